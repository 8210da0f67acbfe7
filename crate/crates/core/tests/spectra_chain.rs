use liouville_core::spectra::{
    full_chain, oscillation_index, solve_spectrum, verify_interlacing, Eigenvalue, ProblemKind, SpectralProblem,
    SpectrumOptions,
};

fn eig(kind: ProblemKind, a: f64, k: i32) -> Eigenvalue {
    let p = SpectralProblem::new(kind, a).unwrap();
    solve_spectrum(&p, k..=k, &SpectrumOptions::default()).unwrap().remove(0)
}

#[test]
fn ground_state_at_the_symmetric_modulus() {
    let l0 = eig(ProblemKind::P3, 0.5, 0);
    assert!((l0.value + 0.5).abs() < 1e-9, "{}", l0.value);
}

#[test]
fn relabeling_mirror_oracle() {
    // z -> 1 - z exchanges 0 and 1, sends a to 1 - a and lambda to -1 - lambda
    let opts = SpectrumOptions::default();
    for a in [0.3, 0.5] {
        let b = 1.0 - a;
        for k in 1..=2 {
            let mu = eig(ProblemKind::P1, a, k).value;
            let mirror = eig(ProblemKind::P2, b, -k).value;
            assert!((mu + 1.0 + mirror).abs() < 1e-8, "a={a} k={k}: {mu} vs {mirror}");
        }
        let lam = solve_spectrum(&SpectralProblem::new(ProblemKind::P3, a).unwrap(), -1..=1, &opts).unwrap();
        let lam_b = solve_spectrum(&SpectralProblem::new(ProblemKind::P3, b).unwrap(), -1..=1, &opts).unwrap();
        for e in &lam {
            let m = lam_b.iter().find(|f| f.k == -e.k).unwrap();
            assert!((e.value + 1.0 + m.value).abs() < 1e-8, "a={a} k={}: {} vs {}", e.k, e.value, m.value);
        }
    }
}

#[test]
fn oscillation_counts_label_the_mu_families() {
    for a in [0.3, 0.7] {
        for k in 1..=3 {
            let mu = eig(ProblemKind::P1, a, k);
            assert_eq!(mu.osc, (k - 1) as usize);
            let nu = eig(ProblemKind::P2, a, -k);
            assert_eq!(nu.osc, (k - 1) as usize);
            assert!(mu.residual < 1e-8 && nu.residual < 1e-8);
        }
    }
    let p1 = SpectralProblem::new(ProblemKind::P1, 0.4).unwrap();
    let mu2 = eig(ProblemKind::P1, 0.4, 2).value;
    assert_eq!(oscillation_index(&p1, mu2 + 1e-3).unwrap(), 1);
}

#[test]
fn interlacing_chain() {
    for a in [0.3, 0.5, 0.7] {
        let chain = full_chain(a, 2, &SpectrumOptions::default()).unwrap();
        let rep = verify_interlacing(&chain);
        assert!(rep.holds(), "a={a}: {:?}", rep.violations);
        let value = |kind: ProblemKind, k: i32| chain.iter().find(|e| e.problem == kind && e.k == k).unwrap().value;
        assert!(value(ProblemKind::P1, 1) > -a);
        assert!(value(ProblemKind::P2, -1) < -a);
        let ranks: Vec<i64> = {
            let mut c = chain.clone();
            c.sort_by(|x, y| x.value.total_cmp(&y.value));
            c.iter().map(Eigenvalue::chain_rank).collect()
        };
        assert!(ranks.windows(2).all(|w| w[0] < w[1]), "{ranks:?}");
    }
}

#[test]
fn eigenvalues_round_trip_through_json() {
    let e = eig(ProblemKind::P3, 0.3, 1);
    let v = serde_json::to_value(&e).unwrap();
    assert_eq!(v["problem"], "P3");
    assert_eq!(v["lambda"].as_f64().unwrap(), e.value);
    let back: Eigenvalue = serde_json::from_value(v).unwrap();
    assert_eq!(back, e);
}
