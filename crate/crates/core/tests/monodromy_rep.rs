use liouville_core::equation::SmirnovEquation;
use liouville_core::monodromy::{conjugate_to_real, default_base_point, monodromy_rep, realness_defect, report};
use liouville_core::spectra::{full_chain, SpectrumOptions};
use num_complex::Complex64;

#[test]
fn spectral_points_have_real_parabolic_monodromy() {
    let chain = full_chain(0.5, 1, &SpectrumOptions::default()).unwrap();
    for e in &chain {
        let eq = SmirnovEquation::new(0.5, e.value).unwrap();
        let rep = monodromy_rep(&eq, default_base_point()).unwrap();
        assert!(rep.max_det_defect() <= 1e-10, "{}", e.label());
        assert!(rep.max_parabolic_defect() <= 1e-8, "{}", e.label());
        assert!(rep.product_defect() <= 1e-8, "{}", e.label());
        assert!(realness_defect(&rep) <= 1e-6, "{}: {}", e.label(), realness_defect(&rep));
        let (q, real) = conjugate_to_real(&rep).unwrap();
        assert!((q.determinant() - 1.0).norm() < 1e-8);
        assert!(real.max_imaginary_entry() < 1e-6);
        for (t0, t1) in rep.traces().iter().zip(real.traces()) {
            assert!((t0 - t1).norm() < 1e-8);
        }
    }
}

#[test]
fn midpoint_between_spectral_points_is_not_real() {
    let chain = full_chain(0.5, 1, &SpectrumOptions::default()).unwrap();
    let l0 = chain.iter().find(|e| e.label() == "lambda_0").unwrap().value;
    let mu1 = chain.iter().find(|e| e.label() == "mu_1").unwrap().value;
    let eq = SmirnovEquation::new(0.5, 0.5 * (l0 + mu1)).unwrap();
    let rep = monodromy_rep(&eq, default_base_point()).unwrap();
    assert!(realness_defect(&rep) > 1e-3);
    assert!(rep.max_parabolic_defect() <= 1e-8);
    let r = report(&rep);
    assert!(r.conjugation_error.is_some() && r.real_generators.is_none());
}

#[test]
fn trace_words_do_not_depend_on_the_base_point() {
    let eq = SmirnovEquation::new(0.37, -0.81).unwrap();
    let w0 = monodromy_rep(&eq, default_base_point()).unwrap().trace_words();
    let w1 = monodromy_rep(&eq, Complex64::new(0.6, 0.45)).unwrap().trace_words();
    for (x, y) in w0.iter().zip(&w1) {
        assert!((x - y).norm() < 1e-8 * (1.0 + x.norm()), "{x} {y}");
    }
}
