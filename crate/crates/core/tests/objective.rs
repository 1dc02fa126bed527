use esld_core::objective::{field_derivative_mismatch, gradient_mismatch};
use esld_core::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

#[test]
fn builtin_values() {
    let objs = builtin_objectives();
    let names: Vec<&str> = objs.iter().map(|o| o.name()).collect();
    assert_eq!(names, ["f1", "f2", "f3"]);
    assert!((objs[0].value(&[1.8]) - 1.62).abs() < 1e-15);
    assert!((objs[2].value(&[1.8, 1.8]) - 3.24).abs() < 1e-15);
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    for obj in builtin_objectives() {
        for _ in 0..100 {
            let x: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut g = vec![0.0; obj.dim()];
            obj.gradient(&x, &mut g);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = 1e-6;
            let mut diff = 0.0;
            for i in 0..x.len() {
                let (mut up, mut down) = (x.clone(), x.clone());
                up[i] += h;
                down[i] -= h;
                let fd = (obj.value(&up) - obj.value(&down)) / (2.0 * h);
                diff += (g[i] - fd).powi(2);
            }
            assert!(diff.sqrt() <= 1e-5 * (1.0 + norm), "{} at {x:?}", obj.name());
            assert!(gradient_mismatch(obj.as_ref(), &x, h) <= 1e-5);
        }
    }
}

#[test]
fn field_derivatives_match_central_differences() {
    let mut rng = StdRng::seed_from_u64(11);
    for fields in [BuiltinFields::Benchmark { a: 5.0 }, BuiltinFields::Unit, BuiltinFields::SinCos] {
        for _ in 0..100 {
            let f = rng.gen_range(-10.0..10.0);
            assert!(field_derivative_mismatch(&fields, f, 1e-6) <= 1e-5);
        }
    }
}

#[test]
fn f2_has_two_local_minima_with_the_global_one_at_zero() {
    let f2 = BumpedQuadratic::DEFAULT;
    let minima = f2.local_minima(-3.0, 3.0);
    assert_eq!(minima.len(), 2, "{minima:?}");
    assert!(minima[0].abs() < 1e-6);
    assert!((minima[1] - 0.9).abs() < 0.05);
    assert!(f2.value(&[minima[0]]) < f2.value(&[minima[1]]));

    // Independent scan of the derivative sign on a fine grid.
    let mut changes = 0;
    let mut g = [0.0];
    let mut prev = None;
    for i in 0..=60_000 {
        let x = -3.0 + i as f64 * 1e-4;
        f2.gradient(&[x], &mut g);
        let s = g[0] > 0.0;
        if prev == Some(false) && s {
            changes += 1;
        }
        prev = Some(s);
    }
    assert_eq!(changes, 2);
}

#[test]
fn bracket_normalization() {
    for fields in [BuiltinFields::Unit, BuiltinFields::SinCos] {
        let b = make_lie_bracket(&fields);
        for i in 0..=2000 {
            let f = -10.0 + i as f64 * 0.01;
            assert!((b.g0(f) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn benchmark_bracket_is_minus_a() {
    let fields = BuiltinFields::Benchmark { a: 5.0 };
    let b = make_lie_bracket(&fields);
    let h = 1e-6;
    for f in [-2.0, 0.0, 0.7, 3.0] {
        assert_eq!(b.g0(f), -5.0);
        // g₁'g₂ − g₂'g₁ with the derivatives taken by differences.
        let fd = (fields.g1(f + h) - fields.g1(f - h)) / (2.0 * h) * fields.g2(f)
            - (fields.g2(f + h) - fields.g2(f - h)) / (2.0 * h) * fields.g1(f);
        assert!((fd + 5.0).abs() < 1e-8);
    }
}
