use std::f64::consts::PI;

use liouville_core::action::{
    counterterms, default_eps_schedule, fuchsian_action, fuchsian_lambda, model_tail, polyakov_check, PolyakovCheck,
    QuadratureSpec,
};

#[test]
fn action_is_symmetric_under_relabeling() {
    let quad = QuadratureSpec::default();
    let s3 = fuchsian_action(0.3, &quad, &[1e-3]).unwrap();
    let s7 = fuchsian_action(0.7, &quad, &[1e-3]).unwrap();
    assert!((s3.value - s7.value).abs() <= 1e-6 * s3.value.abs(), "{} {}", s3.value, s7.value);
    // lambda_0(1 - a) = -1 - lambda_0(a)
    assert!((s3.lambda + 1.0 + s7.lambda).abs() < 1e-8);
}

#[test]
fn regularized_action_stabilizes_in_the_cutoff() {
    let est = fuchsian_action(0.5, &QuadratureSpec::default(), &default_eps_schedule()).unwrap();
    let s = est.value;
    let s3 = est.value_at(1e-3).unwrap();
    let s35 = est.value_at(10f64.powf(-3.5)).unwrap();
    assert!((s3 - s35).abs() <= 1e-2 * s.abs());
    assert!(est.stabilizes(), "{:?}", est.differences());
    assert!(est.extrapolation_error <= 1e-2 * s.abs());
    assert!(est.quadrature_error <= 1e-6 * s.abs(), "{}", est.quadrature_error);
    for c in &est.cutoffs {
        // the bare counterterms alone leave an O(1/|log eps|) drift
        assert!((c.raw - c.value).abs() > (s3 - s35).abs());
        let shift = counterterms(c.eps) - model_tail(c.eps, &est.asymptotics.b).unwrap();
        assert!((c.raw - c.value - shift).abs() < 1e-9 * s.abs());
    }
}

#[test]
fn accessory_parameter_is_the_derivative_of_the_action() {
    let quad = QuadratureSpec::default();
    let sym = polyakov_check(0.5, 5e-3, &quad, 1e-3).unwrap();
    assert!(sym.lhs.abs() <= 1e-2 && sym.rhs.abs() <= 1e-2, "{sym:?}");

    let chk = polyakov_check(0.3, 5e-3, &quad, 1e-3).unwrap();
    let l0 = fuchsian_lambda(0.3).unwrap();
    let c2 = (1.0 + 2.0 * l0) / (0.3 * (0.3 - 1.0));
    assert!((chk.rhs - c2).abs() < 1e-12);
    assert!(chk.rel_err <= 2e-2, "{chk:?}");
    assert!((chk.lhs - (-(chk.s_plus - chk.s_minus) / (2.0 * 5e-3) / (4.0 * PI))).abs() < 1e-12);
}

#[test]
fn polyakov_record_from_values() {
    let rec = PolyakovCheck::from_values(0.3, 1e-2, 10.0, 10.0 - 4.0 * PI * 0.02, -2.0);
    assert!((rec.ds_da + 4.0 * PI).abs() < 1e-12);
    assert!((rec.lhs - 1.0).abs() < 1e-12 && (rec.lhs_real_derivative - 2.0).abs() < 1e-12);
    assert!((rec.rel_err - 1.5).abs() < 1e-12);
}

#[test]
fn cutoff_outside_the_schedule_range_is_rejected() {
    let quad = QuadratureSpec::default();
    assert!(fuchsian_action(0.5, &quad, &[1e-5]).is_err());
    assert!(fuchsian_action(0.5, &quad, &[]).is_err());
    assert!(polyakov_check(0.5, 0.1, &quad, 1e-3).is_err());
}
