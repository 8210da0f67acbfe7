use std::fs;
use std::path::Path;

use liouville_core::action::{liouville_action, polyakov_check, ActionEstimate, PolyakovCheck, QuadratureSpec};
use liouville_core::equation::SmirnovEquation;
use liouville_core::frobenius::SingularPoint;
use liouville_core::liouville::{
    chi_field, classify_solution, contours_to_svg, extract_contours_auto, grid_to_csv, puncture_asymptotics_check,
    residuals, schwarz_singularity_check, sign_flips_across, AsymptoticsReport, BBox, Classification, Contour,
    FieldEvaluator, GridSpec, Residuals, SchwarzReport,
};
use liouville_core::monodromy::{monodromy_rep, report, MonodromyReport};
use liouville_core::spectra::{
    full_chain, solve_spectrum, verify_interlacing, Eigenvalue, InterlacingReport, ProblemKind, SpectralProblem,
    SpectrumOptions,
};
use liouville_core::Error;
use serde::Serialize;

use crate::config::{Accessory, Command, Resolved};

/// Failure of a run, mapped to an exit status by `main`.
#[derive(Debug)]
pub enum Failure {
    Io(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

const CONTOUR_EXPANSIONS: usize = 8;
const ASYMPTOTIC_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn spectrum_options(cfg: &Resolved) -> SpectrumOptions {
    SpectrumOptions {
        tol: cfg.tol,
        ..SpectrumOptions::default()
    }
}

/// The accessory value and, when selected by index, its eigenvalue record.
fn accessory(cfg: &Resolved) -> Outcome<(f64, Option<Eigenvalue>)> {
    match cfg.accessory.expect("validated for this command") {
        Accessory::Lambda(l) => Ok((l, None)),
        Accessory::Spectral { problem, k } => {
            let p = SpectralProblem::new(problem.into(), cfg.a)?;
            let e = solve_spectrum(&p, k..=k, &spectrum_options(cfg))?;
            let e = e
                .into_iter()
                .next()
                .ok_or_else(|| Error::BracketNotFound { what: format!("{problem:?} k = {k}") })?;
            Ok((e.value, Some(e)))
        }
    }
}

#[derive(Serialize)]
struct SpectrumArtifact<'a> {
    config: &'a Resolved,
    eigenvalues: Vec<Eigenvalue>,
    interlacing: Option<InterlacingReport>,
}

fn spectrum(cfg: &Resolved) -> Outcome<()> {
    let opts = spectrum_options(cfg);
    let range = cfg.k_range.lo..=cfg.k_range.hi;
    let (eigenvalues, interlacing) = match cfg.problem {
        Some(p) => (solve_spectrum(&SpectralProblem::new(p.into(), cfg.a)?, range, &opts)?, None),
        None => {
            let p1 = SpectralProblem::new(ProblemKind::P1, cfg.a)?;
            let p2 = SpectralProblem::new(ProblemKind::P2, cfg.a)?;
            let p3 = SpectralProblem::new(ProblemKind::P3, cfg.a)?;
            let mut all = solve_spectrum(&p2, range.clone(), &opts)?;
            all.extend(solve_spectrum(&p1, range.clone(), &opts)?);
            all.extend(solve_spectrum(&p3, range, &opts)?);
            all.sort_by_key(|e| e.chain_rank());
            let report = verify_interlacing(&all);
            (all, Some(report))
        }
    };
    write_json(
        &cfg.out,
        "spectrum.json",
        &SpectrumArtifact {
            config: cfg,
            eigenvalues,
            interlacing,
        },
    )
}

#[derive(Serialize)]
struct MonodromyArtifact<'a> {
    config: &'a Resolved,
    eigenvalue: Option<Eigenvalue>,
    monodromy: MonodromyReport,
}

fn monodromy(cfg: &Resolved) -> Outcome<()> {
    let (lambda, eigenvalue) = accessory(cfg)?;
    let eq = SmirnovEquation::new(cfg.a, lambda)?;
    let rep = monodromy_rep(&eq, liouville_core::monodromy::default_base_point())?;
    write_json(
        &cfg.out,
        "monodromy.json",
        &MonodromyArtifact {
            config: cfg,
            eigenvalue,
            monodromy: report(&rep),
        },
    )
}

fn grid_spec(cfg: &Resolved) -> Outcome<GridSpec> {
    let [x0, y0, x1, y1] = cfg.bbox;
    Ok(GridSpec::new(BBox::new(x0, y0, x1, y1)?, cfg.grid[0], cfg.grid[1])?)
}

#[derive(Serialize)]
struct FieldArtifact<'a> {
    config: &'a Resolved,
    lambda: f64,
    eigenvalue: Option<Eigenvalue>,
    realness_defect: f64,
    min_chi: f64,
    max_chi: f64,
    residuals: Residuals,
    asymptotics: Vec<AsymptoticsReport>,
    csv: &'static str,
}

fn field(cfg: &Resolved) -> Outcome<()> {
    let (lambda, eigenvalue) = accessory(cfg)?;
    let eq = SmirnovEquation::new(cfg.a, lambda)?;
    let ev = FieldEvaluator::new(&eq)?;
    let grid = chi_field(&ev, &grid_spec(cfg)?)?;
    let res = residuals(&ev, &grid)?;
    let asymptotics = SingularPoint::ALL
        .iter()
        .map(|p| puncture_asymptotics_check(&ev, *p, 0.7, &ASYMPTOTIC_RADII))
        .collect::<Result<Vec<_>, _>>()?;
    let comment = serde_json::to_string(cfg).map_err(|e| Failure::Io(e.to_string()))?;
    fs::write(cfg.out.join("field.csv"), grid_to_csv(&grid, Some(&format!("config {comment}"))))?;
    write_json(
        &cfg.out,
        "field.json",
        &FieldArtifact {
            config: cfg,
            lambda,
            eigenvalue,
            realness_defect: ev.realness_defect(),
            min_chi: grid.min_chi(),
            max_chi: grid.max_chi(),
            residuals: res,
            asymptotics,
            csv: "field.csv",
        },
    )
}

#[derive(Serialize)]
struct ContourSummary {
    vertices: usize,
    enclosed: Vec<SingularPoint>,
    real_crossings: Vec<f64>,
    diameter: f64,
    length: f64,
    sign_flip: bool,
}

impl ContourSummary {
    fn new(ev: &FieldEvaluator, c: &Contour) -> Outcome<Self> {
        Ok(Self {
            vertices: c.polyline.len() - 1,
            enclosed: c.enclosed_punctures.clone(),
            real_crossings: c.real_crossings(),
            diameter: c.diameter(),
            length: c.length(),
            sign_flip: sign_flips_across(ev, c, 16, 1e-3 * c.diameter())?,
        })
    }
}

#[derive(Serialize)]
struct ContoursArtifact<'a> {
    config: &'a Resolved,
    lambda: f64,
    eigenvalue: Option<Eigenvalue>,
    bbox: BBox,
    grid: [usize; 2],
    contours: Vec<ContourSummary>,
    classification: Option<Classification>,
    classification_error: Option<String>,
    schwarz: Option<SchwarzReport>,
    svg: &'static str,
}

struct ContourRun {
    lambda: f64,
    eigenvalue: Option<Eigenvalue>,
    bbox: BBox,
    grid: [usize; 2],
    contours: Vec<Contour>,
    summaries: Vec<ContourSummary>,
    classification: Result<Classification, String>,
    schwarz: Option<SchwarzReport>,
}

fn contour_run(cfg: &Resolved, a: f64, lambda: f64, eigenvalue: Option<Eigenvalue>, spec: &GridSpec) -> Outcome<ContourRun> {
    let eq = SmirnovEquation::new(a, lambda)?;
    let ev = FieldEvaluator::new(&eq)?;
    let (grid, contours) = extract_contours_auto(&ev, spec, CONTOUR_EXPANSIONS)?;
    let summaries = contours
        .iter()
        .map(|c| ContourSummary::new(&ev, c))
        .collect::<Outcome<Vec<_>>>()?;
    let spectra: Vec<Eigenvalue> = match &eigenvalue {
        Some(e) => vec![e.clone()],
        None => {
            let k = cfg.k_range.lo.abs().max(cfg.k_range.hi.abs()).max(1);
            full_chain(a, k, &SpectrumOptions::default())?
        }
    };
    let classification = classify_solution(&eq, &spectra, &contours, 1e-8).map_err(|e| e.to_string());
    let schwarz = match contours.first() {
        Some(c) => Some(schwarz_singularity_check(&ev, c, 8, &[1e-2, 3e-3, 1e-3])?),
        None => None,
    };
    Ok(ContourRun {
        lambda,
        eigenvalue,
        bbox: grid.spec.bbox,
        grid: [grid.spec.nx, grid.spec.ny],
        contours,
        summaries,
        classification,
        schwarz,
    })
}

fn contours(cfg: &Resolved) -> Outcome<()> {
    let (lambda, eigenvalue) = accessory(cfg)?;
    let run = contour_run(cfg, cfg.a, lambda, eigenvalue, &grid_spec(cfg)?)?;
    let meta = serde_json::to_string(cfg).map_err(|e| Failure::Io(e.to_string()))?;
    let title = match &run.eigenvalue {
        Some(e) => format!("zero set of chi, a = {}, {} = {:.12}", cfg.a, e.label(), lambda),
        None => format!("zero set of chi, a = {}, lambda = {lambda}", cfg.a),
    };
    fs::write(
        cfg.out.join("contours.svg"),
        contours_to_svg(&run.bbox, cfg.a, &run.contours, &title, Some(&meta)),
    )?;
    write_json(
        &cfg.out,
        "contours.json",
        &ContoursArtifact {
            config: cfg,
            lambda: run.lambda,
            eigenvalue: run.eigenvalue,
            bbox: run.bbox,
            grid: run.grid,
            contours: run.summaries,
            classification: run.classification.clone().ok(),
            classification_error: run.classification.err(),
            schwarz: run.schwarz,
            svg: "contours.svg",
        },
    )
}

#[derive(Serialize)]
struct ActionArtifact<'a> {
    config: &'a Resolved,
    a: f64,
    #[serde(rename = "S")]
    s: f64,
    eps_schedule: Vec<f64>,
    estimate: ActionEstimate,
    lhs: f64,
    rhs: f64,
    rel_err: f64,
    polyakov: PolyakovCheck,
}

fn action_parts(cfg: &Resolved) -> Outcome<(ActionEstimate, PolyakovCheck)> {
    let quad = QuadratureSpec::default();
    let lambda0 = liouville_core::action::fuchsian_lambda(cfg.a)?;
    let estimate = liouville_action(cfg.a, lambda0, &quad, &cfg.eps)?;
    let limit = cfg.tol * estimate.value.abs();
    if estimate.extrapolation_error > limit {
        return Err(Error::NonConvergence(format!(
            "action spread {:.3e} over the cutoff schedule exceeds {limit:.3e}",
            estimate.extrapolation_error
        ))
        .into());
    }
    let smallest = estimate.eps_schedule.last().copied().expect("non-empty schedule");
    let polyakov = polyakov_check(cfg.a, cfg.delta, &quad, smallest)?;
    Ok((estimate, polyakov))
}

fn action(cfg: &Resolved) -> Outcome<()> {
    let (estimate, polyakov) = action_parts(cfg)?;
    write_json(
        &cfg.out,
        "action.json",
        &ActionArtifact {
            config: cfg,
            a: cfg.a,
            s: estimate.value,
            eps_schedule: estimate.eps_schedule.clone(),
            lhs: polyakov.lhs,
            rhs: polyakov.rhs,
            rel_err: polyakov.rel_err,
            estimate,
            polyakov,
        },
    )
}

#[derive(Serialize)]
struct PointReport {
    eigenvalue: Eigenvalue,
    det_defect: f64,
    parabolic_defect: f64,
    product_defect: f64,
    realness_defect: f64,
    contour_count: usize,
    classification: Option<Classification>,
    classification_error: Option<String>,
}

#[derive(Serialize)]
struct ReportArtifact<'a> {
    config: &'a Resolved,
    interlacing: InterlacingReport,
    points: Vec<PointReport>,
    action: Option<ActionEstimate>,
    polyakov: Option<PolyakovCheck>,
    action_error: Option<String>,
}

fn full_report(cfg: &Resolved) -> Outcome<()> {
    let k = cfg.k_range.lo.abs().max(cfg.k_range.hi.abs()).max(1);
    // --tol is the action tolerance here
    let chain = full_chain(cfg.a, k, &SpectrumOptions::default())?;
    let interlacing = verify_interlacing(&chain);
    let spec = grid_spec(cfg)?;
    let mut points = Vec::with_capacity(chain.len());
    for e in &chain {
        let eq = SmirnovEquation::new(cfg.a, e.value)?;
        let m = report(&monodromy_rep(&eq, liouville_core::monodromy::default_base_point())?);
        let run = contour_run(cfg, cfg.a, e.value, Some(e.clone()), &spec)?;
        points.push(PointReport {
            eigenvalue: e.clone(),
            det_defect: m.max_det_defect,
            parabolic_defect: m.max_parabolic_defect,
            product_defect: m.product_defect,
            realness_defect: m.realness_defect,
            contour_count: run.contours.len(),
            classification: run.classification.clone().ok(),
            classification_error: run.classification.err(),
        });
    }
    let (action, polyakov, action_error) = match action_parts(cfg) {
        Ok((a, p)) => (Some(a), Some(p), None),
        Err(Failure::Numerical(e)) => (None, None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    write_json(
        &cfg.out,
        "report.json",
        &ReportArtifact {
            config: cfg,
            interlacing,
            points,
            action,
            polyakov,
            action_error,
        },
    )
}

pub fn run(cfg: &Resolved) -> Outcome<()> {
    fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Monodromy => monodromy(cfg),
        Command::Field => field(cfg),
        Command::Contours => contours(cfg),
        Command::Action => action(cfg),
        Command::Report => full_report(cfg),
    }
}
