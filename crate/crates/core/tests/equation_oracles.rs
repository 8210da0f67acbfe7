use liouville_core::equation::{accessory_from_lambda, validate_constraints, PuncturedSphere, SmirnovEquation};
use liouville_core::frobenius::{LocalBasis, LogBranch, SingularPoint};
use liouville_core::taylor::transport_segment;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Classical RK4 for `(p y')' + (z + lambda) y = 0` along a straight segment.
fn rk4(eq: &SmirnovEquation, from: Complex64, to: Complex64, y: Complex64, dy: Complex64, steps: usize) -> (Complex64, Complex64) {
    let f = |z: Complex64, y: Complex64, dy: Complex64| {
        let d2 = -(eq.dp(z) * dy + (z + eq.lambda()) * y) / eq.p(z);
        (dy, d2)
    };
    let h = (to - from) / steps as f64;
    let (mut z, mut y, mut dy) = (from, y, dy);
    for _ in 0..steps {
        let k1 = f(z, y, dy);
        let k2 = f(z + 0.5 * h, y + 0.5 * h * k1.0, dy + 0.5 * h * k1.1);
        let k3 = f(z + 0.5 * h, y + 0.5 * h * k2.0, dy + 0.5 * h * k2.1);
        let k4 = f(z + h, y + h * k3.0, dy + h * k3.1);
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        dy += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        z += h;
    }
    (y, dy)
}

#[test]
fn taylor_transport_agrees_with_rk4() {
    let eq = SmirnovEquation::new(0.41, 0.37).unwrap();
    let legs = [
        (c(0.3, 0.4), c(1.7, 0.9)),
        (c(-0.8, -0.5), c(0.2, -0.3)),
        (c(2.0, 1.0), c(0.6, 0.05)),
    ];
    for (from, to) in legs {
        let (y0, dy0) = (c(0.7, -0.2), c(-0.4, 1.1));
        let mut states = [(y0, dy0)];
        transport_segment(&eq, from, to, &mut states, 0.5).unwrap();
        let (y, dy) = rk4(&eq, from, to, y0, dy0, 20_000);
        let err = (states[0].0 - y).norm().max((states[0].1 - dy).norm());
        assert!(err < 1e-10 * (1.0 + y.norm() + dy.norm()), "{from} -> {to}: {err:e}");
    }
}

#[test]
fn frobenius_basis_agrees_with_rk4_off_the_puncture() {
    // continue the holomorphic solution at 0 by RK4 from inside its disk
    let eq = SmirnovEquation::new(0.5, -0.5).unwrap();
    let basis = LocalBasis::new(&eq, SingularPoint::Zero).unwrap();
    let z0 = c(0.05, 0.08);
    let z1 = c(0.1, 0.15);
    let j0 = basis.jets(z0, LogBranch::DIRECT).unwrap().holomorphic;
    let j1 = basis.jets(z1, LogBranch::DIRECT).unwrap().holomorphic;
    let (y, dy) = rk4(&eq, z0, z1, j0.y, j0.dy, 4000);
    assert!((y - j1.y).norm() < 1e-11 && (dy - j1.dy).norm() < 1e-10);
}

#[test]
fn first_frobenius_coefficient_by_hand() {
    // lowest order of the recurrence at 0: a e_1 + lambda e_0 = 0
    for (a, lambda) in [(0.5, -0.5), (0.3, 0.2), (0.8, -1.7)] {
        let eq = SmirnovEquation::new(a, lambda).unwrap();
        let basis = LocalBasis::new(&eq, SingularPoint::Zero).unwrap();
        assert_eq!(basis.coeffs_holomorphic[0], 1.0);
        assert!((basis.coeffs_holomorphic[1] + lambda / a).abs() < 1e-14);
        let slope = basis.jets(c(1e-6, 0.0), LogBranch::DIRECT).unwrap().holomorphic.dy.re;
        assert!((slope + lambda / a).abs() < 1e-5, "{a} {lambda}: {slope}");
    }
    let eq = SmirnovEquation::new(0.5, -0.5).unwrap();
    let basis = LocalBasis::new(&eq, SingularPoint::Zero).unwrap();
    assert!((basis.coeffs_holomorphic[1] - 1.0).abs() < 1e-15);
}

#[test]
fn infinity_normal_form_limit() {
    // z^2 r = 1/2 + (1 + a + 2 lambda) / z + O(z^-2)
    for (a, lambda) in [(0.5, -0.5), (0.13, 3.0), (0.91, -7.5)] {
        let eq = SmirnovEquation::new(a, lambda).unwrap();
        // the sum defining r cancels down from size |c| / |z|
        let scale: f64 = 1.0 + eq.accessory().c.iter().map(|c| c.norm()).sum::<f64>();
        for theta in [0.0, 1.0, 2.5, 4.0] {
            let z = Complex64::from_polar(1e6, theta);
            let v = z * z * eq.r(z).unwrap();
            let first = (1.0 + a + 2.0 * lambda) / z;
            assert!((v - 0.5 - first).norm() < 1e-9 * scale, "{a} {lambda} {theta}: {} vs {first}", v - 0.5);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn accessory_constraints_hold(a in 0.02f64..0.98, lambda in -20.0f64..20.0) {
        let s = PuncturedSphere::smirnov(a).unwrap();
        let cv = accessory_from_lambda(a, lambda).unwrap();
        let rep = validate_constraints(&s, &cv, 1e-13);
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn normal_form_and_transfer_are_consistent(a in 0.05f64..0.95, lambda in -5.0f64..5.0, x in -2.0f64..2.0, y in 0.1f64..2.0) {
        let eq = SmirnovEquation::new(a, lambda).unwrap();
        let z = c(x, y);
        let data = (c(0.3, -0.1), c(1.2, 0.4));
        let back = eq.y_from_u(z, eq.u_from_y(z, data).unwrap()).unwrap();
        prop_assert!((back.0 - data.0).norm() < 1e-12 && (back.1 - data.1).norm() < 1e-11);
    }

    #[test]
    fn real_lambda_gives_conjugation_symmetric_r(a in 0.05f64..0.95, lambda in -5.0f64..5.0, x in -2.0f64..2.0, y in 0.1f64..2.0) {
        let eq = SmirnovEquation::new(a, lambda).unwrap();
        let z = c(x, y);
        let d = eq.r(z.conj()).unwrap() - eq.r(z).unwrap().conj();
        prop_assert!(d.norm() <= 1e-12 * (1.0 + eq.r(z).unwrap().norm()));
    }
}
