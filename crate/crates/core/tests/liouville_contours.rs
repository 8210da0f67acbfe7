use std::sync::OnceLock;

use liouville_core::equation::SmirnovEquation;
use liouville_core::frobenius::SingularPoint;
use liouville_core::liouville::{
    classify_solution, contours_to_svg, extract_contours_auto, schwarz_singularity_check, sign_flips_across, BBox,
    Contour, FieldEvaluator, GridSpec, SolutionType,
};
use liouville_core::spectra::{full_chain, Eigenvalue, SpectrumOptions};

const A: f64 = 0.5;

fn chain() -> &'static [Eigenvalue] {
    static CHAIN: OnceLock<Vec<Eigenvalue>> = OnceLock::new();
    CHAIN.get_or_init(|| full_chain(A, 2, &SpectrumOptions::default()).unwrap())
}

fn spectral(label: &str) -> &'static Eigenvalue {
    chain().iter().find(|e| e.label() == label).unwrap()
}

fn contours_of(label: &str) -> (FieldEvaluator, Vec<Contour>) {
    let eq = SmirnovEquation::new(A, spectral(label).value).unwrap();
    let ev = FieldEvaluator::new(&eq).unwrap();
    let spec = GridSpec::new(BBox::default_for_sphere(), 400, 400).unwrap();
    let (_, contours) = extract_contours_auto(&ev, &spec, 8).unwrap();
    (ev, contours)
}

fn assert_flips(ev: &FieldEvaluator, contours: &[Contour]) {
    for c in contours {
        assert!(sign_flips_across(ev, c, 16, 1e-3 * c.diameter()).unwrap());
    }
}

#[test]
fn uniformizing_field_has_no_contours() {
    let (ev, contours) = contours_of("lambda_0");
    assert!(contours.is_empty());
    let cls = classify_solution(ev.equation(), chain(), &contours, 1e-8).unwrap();
    assert_eq!(cls.kind, SolutionType::FuchsianUniformizing);
    assert_eq!(cls.goes_over, None);
}

#[test]
fn mu_contours_are_mirror_images() {
    let (ev_p, plus) = contours_of("mu_1");
    let (ev_m, minus) = contours_of("mu_-1");
    assert_eq!((plus.len(), minus.len()), (1, 1));
    assert!(plus[0].goes_over(SingularPoint::Zero, SingularPoint::A));
    assert!(minus[0].goes_over(SingularPoint::A, SingularPoint::One));
    assert_flips(&ev_p, &plus);
    assert_flips(&ev_m, &minus);
    // z -> 1 - z carries mu_1(a) to mu_-1(1 - a); here a = 1 - a
    let xp = plus[0].real_crossings();
    let mut xm: Vec<f64> = minus[0].real_crossings().iter().map(|x| 1.0 - x).collect();
    xm.sort_by(f64::total_cmp);
    assert_eq!(xp.len(), 2);
    assert_eq!(xp.len(), xm.len());
    for (p, m) in xp.iter().zip(&xm) {
        assert!((p - m).abs() < 5e-3, "{xp:?} {xm:?}");
    }
    for (ev, cs) in [(&ev_p, &plus), (&ev_m, &minus)] {
        let cls = classify_solution(ev.equation(), chain(), cs, 1e-8).unwrap();
        assert_eq!(cls.kind, SolutionType::SchottkyType);
        assert_eq!((cls.contour_count, cls.expected_contours), (1, 1));
    }
}

#[test]
fn first_fuchsian_type_fields_have_two_contours() {
    for (label, pair) in [
        ("lambda_1", [SingularPoint::Zero, SingularPoint::A]),
        ("lambda_-1", [SingularPoint::A, SingularPoint::One]),
    ] {
        let (ev, contours) = contours_of(label);
        assert_eq!(contours.len(), 2, "{label}");
        assert!(contours.iter().all(|c| c.goes_over(pair[0], pair[1])), "{label}");
        assert_flips(&ev, &contours);
        let cls = classify_solution(ev.equation(), chain(), &contours, 1e-8).unwrap();
        assert_eq!(cls.kind, SolutionType::FuchsianType);
        assert_eq!(cls.goes_over, Some(pair));
    }
}

#[test]
fn field_blows_up_like_the_schwarz_model() {
    let (ev, contours) = contours_of("mu_1");
    let rep = schwarz_singularity_check(&ev, &contours[0], 8, &[1e-2, 3e-3, 1e-3]).unwrap();
    assert_eq!(rep.samples.len(), 8 * 3 * 2);
    assert!(rep.within(5.0), "worst slope {}", rep.worst_slope());
    for s in &rep.samples {
        assert!((s.distance - s.delta * rep.diameter).abs() < 1e-15);
    }
}

#[test]
fn svg_export_draws_each_contour() {
    let (_, contours) = contours_of("mu_1");
    let bbox = BBox::default_for_sphere();
    let svg = contours_to_svg(&bbox, A, &contours, "mu_1 <a=0.5>", Some("k=1 & a<1"));
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<title>mu_1 &lt;a=0.5&gt;</title>"));
    assert!(svg.contains("<metadata>k=1 &amp; a&lt;1</metadata>"));
    assert_eq!(svg.matches("class=\"contour\"").count(), contours.len());
    assert_eq!(svg.matches("class=\"puncture\"").count(), 3);
    assert!(svg.trim_end().ends_with("</svg>"));
}
