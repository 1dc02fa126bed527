use std::f64::consts::PI;

use esld_core::*;
use proptest::prelude::*;

fn all_kinds(period: f64, law: AmplitudeLaw) -> Vec<DitherPair> {
    vec![
        make_trig_dither(period, law).unwrap(),
        make_square_sawtooth_dither(period, Waveform::Square, law).unwrap(),
        make_square_sawtooth_dither(period, Waveform::Sawtooth, law).unwrap(),
    ]
}

#[test]
fn trig_values_at_unit_frequency() {
    let d = make_trig_dither(2.0 * PI, AmplitudeLaw::SqrtOmega).unwrap();
    assert!((d.omega() - 1.0).abs() < 1e-15);
    assert!((d.u1(PI / 2.0) - 1.0).abs() < 1e-15);
    assert!((d.u2(0.0) - 1.0).abs() < 1e-15);
    for k in 0..100 {
        let t = k as f64 * 0.0628;
        assert!((d.u1(t) + d.u1(2.0 * PI - t)).abs() < 1e-12);
    }
}

#[test]
fn sqrt_omega_amplitude() {
    let d = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
    let expected = (2.0 * PI / 0.01).sqrt();
    assert!((expected - 25.07).abs() < 0.01);
    let peak = (0..10_000).map(|k| d.u1(k as f64 * 1e-6).abs()).fold(0.0, f64::max);
    assert!((peak - expected).abs() < 1e-6 * expected);
    let unit = make_trig_dither(0.01, AmplitudeLaw::Unit).unwrap();
    assert!((unit.u1(0.0025) - 1.0).abs() < 1e-12);
}

#[test]
fn bad_periods_are_rejected() {
    for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(make_trig_dither(t, AmplitudeLaw::Unit).is_err());
        assert!(make_square_sawtooth_dither(t, Waveform::Square, AmplitudeLaw::Unit).is_err());
    }
}

#[test]
fn every_kind_satisfies_the_assumptions() {
    for law in [AmplitudeLaw::SqrtOmega, AmplitudeLaw::Unit] {
        for d in all_kinds(0.01, law) {
            let r = verify_assumptions(&d, 10_000, 1e-9).unwrap();
            assert!(r.passed(), "{:?}: {r:?}", d.waveform());
        }
    }
    let trig = verify_assumptions(&make_trig_dither(0.01, AmplitudeLaw::Unit).unwrap(), 10_000, 1e-9).unwrap();
    assert!(trig.a2.measured <= 1e-12 && trig.a3.measured <= 1e-12);
}

#[test]
fn offset_breaks_antisymmetry() {
    let d = make_trig_dither(0.01, AmplitudeLaw::Unit).unwrap().with_offsets(0.0, 0.1);
    let r = verify_assumptions(&d, 10_000, 1e-9).unwrap();
    assert!(!r.a3.passed);
    assert!((r.a3.measured - 0.2).abs() < 1e-9);
    assert!(r.a2.passed);
    assert!(!r.passed());
}

#[test]
fn small_grids_are_rejected() {
    let d = make_trig_dither(0.01, AmplitudeLaw::Unit).unwrap();
    assert!(verify_assumptions(&d, 99, 1e-9).is_err());
}

#[test]
fn square_wave_levels() {
    let t = 0.01;
    let d = make_square_sawtooth_dither(t, Waveform::Square, AmplitudeLaw::Unit).unwrap();
    // u₂ jumps at T/4 and 3T/4; the values there are the limits from the left.
    assert_eq!(d.u2_at(t / 4.0, Side::Left), 1.0);
    assert_eq!(d.u2_at(3.0 * t / 4.0, Side::Left), -1.0);
    assert_eq!(d.u2(t / 4.0), 0.0);
    assert_eq!(d.u2(0.1 * t), 1.0);
    assert_eq!(d.u2(0.5 * t), -1.0);
    assert_eq!(d.u1(0.25 * t), 1.0);
    assert_eq!(d.u1(0.75 * t), -1.0);
}

#[test]
fn sawtooth_has_zero_mean() {
    let t = 0.01;
    let d = make_square_sawtooth_dither(t, Waveform::Sawtooth, AmplitudeLaw::Unit).unwrap();
    // Midpoint rule on a grid that avoids the jump nodes.
    let n = 100_000;
    let h = t / n as f64;
    let m1: f64 = (0..n).map(|k| d.u1((k as f64 + 0.5) * h)).sum::<f64>() * h / t;
    let m2: f64 = (0..n).map(|k| d.u2((k as f64 + 0.5) * h)).sum::<f64>() * h / t;
    assert!(m1.abs() < 1e-9 && m2.abs() < 1e-9);
}

#[test]
fn needle_samples() {
    let d = make_trig_dither(2.0 * PI, AmplitudeLaw::Unit).unwrap();
    let s = sample_needles(&d, 5).unwrap();
    assert!((s.epsilon() - PI / 5.0).abs() < 1e-15);
    assert_eq!(s.values().len(), 10);
    assert!((s.needle(1) - 0.8090).abs() < 1e-4);
    assert!((s.needle(1) - (PI / 5.0).cos()).abs() < 1e-15);
    assert!(sample_needles(&d, 0).is_err());
}

#[test]
fn needles_come_in_opposite_pairs() {
    for d in all_kinds(0.01, AmplitudeLaw::SqrtOmega) {
        for n in [3, 10, 64, 1000] {
            let s = sample_needles(&d, n).unwrap();
            for i in 1..=n {
                assert!((s.needle(i) + s.needle(i + n)).abs() <= 1e-9, "{:?} N={n} i={i}", d.waveform());
            }
            let riemann: f64 = s.epsilon() * s.values().iter().sum::<f64>();
            assert!(riemann.abs() <= 1e-12);
        }
    }
}

#[test]
fn needles_converge_to_the_dither() {
    let d = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
    let coarse = sample_needles(&d, 1000).unwrap().max_error(100_003);
    let fine = sample_needles(&d, 10_000).unwrap().max_error(100_003);
    assert!(coarse <= 10.0 * fine * 1.05, "{coarse} vs {fine}");
    assert!(coarse >= 10.0 * fine * 0.95, "{coarse} vs {fine}");
    // Piecewise-constant error bound ε·max|u₂'| = ε·√ω·ω.
    let bound = 0.01 / 2000.0 * d.omega().powf(1.5);
    assert!(coarse <= bound);
}

#[test]
fn sequential_blocks() {
    let base = make_trig_dither(0.01, AmplitudeLaw::Unit).unwrap();
    let sd = make_sequential(&base, 3).unwrap();
    assert!((sd.full_period() - 0.03).abs() < 1e-15);
    let mut u1 = [0.0; 3];
    let mut u2 = [0.0; 3];
    let t = 0.015 + 0.001;
    sd.u1_into(t, Side::Mid, &mut u1);
    sd.u2_into(t, Side::Mid, &mut u2);
    assert_eq!(u1[0], 0.0);
    assert_eq!(u1[2], 0.0);
    assert!((u1[1] - base.u1(0.006)).abs() < 1e-12);
    assert!((u2[1] - base.u2(0.006)).abs() < 1e-12);
    assert_eq!(sd.active_block(0.015, Side::Mid).0, 1);
    assert!(make_sequential(&base, 0).is_err());
}

#[test]
fn sequential_with_one_dimension_is_the_scalar_pair() {
    let base = make_square_sawtooth_dither(0.01, Waveform::Sawtooth, AmplitudeLaw::SqrtOmega).unwrap();
    let sd = make_sequential(&base, 1).unwrap();
    for k in 0..1000 {
        let t = k as f64 * 1.37e-5;
        for side in [Side::Left, Side::Mid, Side::Right] {
            assert_eq!(sd.u1_component(t, side, 0), base.u1_at(t, side));
            assert_eq!(sd.u2_component(t, side, 0), base.u2_at(t, side));
        }
    }
}

#[test]
fn sequential_integrals_vanish() {
    let base = make_trig_dither(0.01, AmplitudeLaw::SqrtOmega).unwrap();
    let sd = make_sequential(&base, 3).unwrap();
    let n = 30_000;
    let h = sd.full_period() / n as f64;
    for i in 0..3 {
        let s1: f64 = (0..n).map(|k| sd.u1_component((k as f64 + 0.5) * h, Side::Mid, i)).sum::<f64>() * h;
        let s2: f64 = (0..n).map(|k| sd.u2_component((k as f64 + 0.5) * h, Side::Mid, i)).sum::<f64>() * h;
        assert!(s1.abs() < 1e-10 && s2.abs() < 1e-10, "component {i}: {s1} {s2}");
    }
}

proptest! {
    #[test]
    fn at_most_one_active_coordinate(t in 0.0f64..1.0, n in 1usize..6, kind in 0usize..3) {
        let base = all_kinds(0.01, AmplitudeLaw::SqrtOmega)[kind];
        let sd = make_sequential(&base, n).unwrap();
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        sd.u1_into(t, Side::Mid, &mut u1);
        sd.u2_into(t, Side::Mid, &mut u2);
        prop_assert!(u1.iter().filter(|v| **v != 0.0).count() <= 1);
        prop_assert!(u2.iter().filter(|v| **v != 0.0).count() <= 1);
        // Periodic in nT.
        let shifted = t + sd.full_period();
        for i in 0..n {
            prop_assert!((sd.u1_component(shifted, Side::Mid, i) - u1[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn symmetries_hold_pointwise(s in 0.0f64..1.0, period in 1e-4f64..10.0, kind in 0usize..3) {
        let d = all_kinds(period, AmplitudeLaw::Unit)[kind];
        let t = s * period;
        prop_assert!((d.u1(t) + d.u1(period - t)).abs() < 1e-9);
        prop_assert!((d.u2(0.5 * t) + d.u2(0.5 * period + 0.5 * t)).abs() < 1e-9);
    }
}
