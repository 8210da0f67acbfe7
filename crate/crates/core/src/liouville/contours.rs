use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{chi_field_masked, FieldEvaluator, FieldGrid, GridSpec};
use crate::equation::SmirnovEquation;
use crate::error::{Error, Result};
use crate::frobenius::SingularPoint;
use crate::spectra::{Eigenvalue, ProblemKind};

/// A closed component of the zero set of `chi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    /// Closed polyline (`first == last`).
    pub polyline: Vec<Complex64>,
    /// Finite punctures enclosed by the polyline; infinity is always outside.
    pub enclosed_punctures: Vec<SingularPoint>,
    /// Unit tangents, one per vertex (the last repeats the first).
    pub tangents: Vec<Complex64>,
}

impl Contour {
    fn from_loop(polyline: Vec<Complex64>, a: f64) -> Self {
        let n = polyline.len() - 1;
        let tangents = (0..=n)
            .map(|k| {
                let prev = polyline[if k == 0 { n - 1 } else { k - 1 }];
                let next = polyline[if k >= n { 1 } else { k + 1 }];
                let d = next - prev;
                d / d.norm()
            })
            .collect();
        let enclosed_punctures = SingularPoint::FINITE
            .iter()
            .copied()
            .filter(|p| winding_number(&polyline, Complex64::new(p.location(a).unwrap(), 0.0)) != 0)
            .collect();
        Self {
            polyline,
            enclosed_punctures,
            tangents,
        }
    }

    /// Whether the contour passes between the two finite punctures `p` and
    /// `q`, i.e. encloses exactly one of them.
    pub fn goes_over(&self, p: SingularPoint, q: SingularPoint) -> bool {
        self.enclosed_punctures.contains(&p) != self.enclosed_punctures.contains(&q)
    }

    /// Points where the polyline crosses the real axis, ascending.
    pub fn real_crossings(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .polyline
            .windows(2)
            .filter(|w| (w[0].im > 0.0) != (w[1].im > 0.0))
            .map(|w| w[0].re + (w[1].re - w[0].re) * w[0].im / (w[0].im - w[1].im))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn encloses(&self, z: Complex64) -> bool {
        winding_number(&self.polyline, z) != 0
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let step = (self.polyline.len() / 256).max(1);
        let pts: Vec<Complex64> = self.polyline.iter().step_by(step).copied().collect();
        let mut d: f64 = 0.0;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    pub fn length(&self) -> f64 {
        self.polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Winding number of a closed polyline about `z`.
pub fn winding_number(polyline: &[Complex64], z: Complex64) -> i32 {
    let mut total = 0.0;
    for w in polyline.windows(2) {
        total += ((w[1] - z) / (w[0] - z)).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

/// Grid edge carrying a zero crossing: horizontal edges start at `(i, j)`
/// and go to `(i + 1, j)`, vertical ones go to `(i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct EdgeId {
    i: usize,
    j: usize,
    vertical: bool,
}

/// Zero level set of `chi` by marching squares, chained into closed loops.
///
/// Cells touching masked samples are skipped. A chain that ends (at the box
/// boundary or at a masked cell) is reported as an open-chain error.
pub fn extract_contours(grid: &FieldGrid) -> Result<Vec<Contour>> {
    trace_contours(grid).map_err(|p| {
        Error::OpenChain(format!(
            "zero set of chi leaves the sampled region near ({:.4}, {:.4})",
            p.re, p.im
        ))
    })
}

/// Marching squares; an open chain yields its loose end.
fn trace_contours(grid: &FieldGrid) -> std::result::Result<Vec<Contour>, Complex64> {
    let spec = &grid.spec;
    let v = |i: usize, j: usize| grid.chi[grid.index(i, j)];
    let crossing = |e: EdgeId| -> Complex64 {
        let (i2, j2) = if e.vertical { (e.i, e.j + 1) } else { (e.i + 1, e.j) };
        let (f0, f1) = (v(e.i, e.j), v(i2, j2));
        let t = f0 / (f0 - f1);
        spec.point(e.i, e.j) + (spec.point(i2, j2) - spec.point(e.i, e.j)) * t
    };
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..spec.ny - 1 {
        for i in 0..spec.nx - 1 {
            let corners = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            if corners.iter().any(|c| !c.is_finite()) {
                continue;
            }
            // edges in counterclockwise order: bottom, right, top, left
            let edges = [
                EdgeId { i, j, vertical: false },
                EdgeId { i: i + 1, j, vertical: true },
                EdgeId { i, j: j + 1, vertical: false },
                EdgeId { i, j, vertical: true },
            ];
            let mut cut = Vec::with_capacity(4);
            for k in 0..4 {
                let (f0, f1) = (corners[k], corners[(k + 1) % 4]);
                if (f0 > 0.0) != (f1 > 0.0) {
                    cut.push(k);
                }
            }
            match cut.len() {
                2 => segments.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let center = 0.25 * corners.iter().sum::<f64>();
                    // pair each crossing with the neighbour that keeps the center's sign region connected
                    if (center > 0.0) == (corners[0] > 0.0) {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    let mut adjacency: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (s, (e0, e1)) in segments.iter().enumerate() {
        adjacency.entry(*e0).or_default().push(s);
        adjacency.entry(*e1).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut contours = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut current) = segments[start];
        let mut chain = vec![crossing(first), crossing(current)];
        loop {
            if current == first {
                break;
            }
            let next = adjacency[&current].iter().copied().find(|s| !used[*s]);
            let Some(s) = next else {
                return Err(crossing(current));
            };
            used[s] = true;
            let (e0, e1) = segments[s];
            current = if e0 == current { e1 } else { e0 };
            chain.push(crossing(current));
        }
        if chain.len() >= 4 {
            contours.push(Contour::from_loop(chain, grid.a));
        }
    }
    // deterministic order: by leftmost vertex
    contours.sort_by(|x, y| {
        let lx = x.polyline.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let ly = y.polyline.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        lx.total_cmp(&ly)
    });
    Ok(contours)
}

/// Samples the field and extracts contours. While a chain escapes, the box
/// is grown (at constant spacing) by half its size on each side the chain
/// leaves through. Only samples essentially on a puncture are masked.
pub fn extract_contours_auto(ev: &FieldEvaluator, spec: &GridSpec, max_expansions: usize) -> Result<(FieldGrid, Vec<Contour>)> {
    let mut spec = *spec;
    for attempt in 0..=max_expansions {
        let grid = chi_field_masked(ev, &spec, 0.0)?;
        let exit = match trace_contours(&grid) {
            Ok(c) => return Ok((grid, c)),
            Err(p) => p,
        };
        if attempt == max_expansions {
            return Err(Error::OpenChain(format!(
                "zero set of chi still leaves {:?} near ({:.4}, {:.4})",
                spec.bbox, exit.re, exit.im
            )));
        }
        let b = spec.bbox;
        let (w, h) = (b.width(), b.height());
        let near = |d: f64, size: f64| d < 0.05 * size;
        let mut grown = b;
        if near(exit.re - b.x0, w) {
            grown.x0 -= 0.5 * w;
        }
        if near(b.x1 - exit.re, w) {
            grown.x1 += 0.5 * w;
        }
        // contours are symmetric under conjugation
        if near(exit.im - b.y0, h) || near(b.y1 - exit.im, h) {
            grown.y0 -= 0.5 * h;
            grown.y1 += 0.5 * h;
        }
        if grown == b {
            grown = b.expanded(1.5);
        }
        spec = spec.with_bbox_same_spacing(grown);
    }
    unreachable!()
}

/// Moves `z` onto the zero set of `chi` by Newton steps along the gradient.
pub fn refine_to_contour(ev: &FieldEvaluator, z: Complex64) -> Result<Complex64> {
    let mut z = z;
    for _ in 0..30 {
        let j = ev.chi_jet(z)?;
        let g = 2.0 * j.chi_z.conj();
        if g.norm() == 0.0 {
            return Err(Error::NonConvergence("vanishing gradient on the contour".into()));
        }
        let step = j.chi * g / g.norm_sqr();
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    Ok(z)
}

/// Local model of the field near a point of an analytic contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzLocalModel {
    pub z0: Complex64,
    pub tangent: Complex64,
    /// Derivative of the Schwarz function at `z0`: `conj(T) / T`.
    pub s_prime: Complex64,
}

impl SchwarzLocalModel {
    pub fn from_tangent(z0: Complex64, tangent: Complex64) -> Self {
        let t = tangent / tangent.norm();
        Self {
            z0,
            tangent: t,
            s_prime: t.conj() / t,
        }
    }

    /// `-4 S'(z0) / (conj(z - z0) - S'(z0) (z - z0))^2`, real and positive off
    /// the tangent line.
    pub fn model(&self, z: Complex64) -> Complex64 {
        let d = z - self.z0;
        let den = d.conj() - self.s_prime * d;
        -4.0 * self.s_prime / (den * den)
    }

    /// Rejects approach directions within about six degrees of the tangent.
    pub fn check_direction(&self, dir: Complex64) -> Result<()> {
        let sin = (dir / dir.norm() * self.tangent.conj()).im.abs();
        if sin < 0.1 {
            return Err(Error::TangentialApproach);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzSample {
    pub z0: Complex64,
    pub delta: f64,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub diameter: f64,
    pub samples: Vec<SchwarzSample>,
}

impl SchwarzReport {
    /// Largest `|ratio - 1| / delta`.
    pub fn worst_slope(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.ratio - 1.0).abs() / s.delta)
            .fold(0.0, f64::max)
    }

    pub fn within(&self, factor: f64) -> bool {
        self.samples.iter().all(|s| (s.ratio - 1.0).abs() <= factor * s.delta)
    }
}

/// Ratio `e^phi / model` at normal distances `delta * diameter` from
/// `n_points` points spread along `contour`, approached from both sides.
pub fn schwarz_singularity_check(
    ev: &FieldEvaluator,
    contour: &Contour,
    n_points: usize,
    deltas: &[f64],
) -> Result<SchwarzReport> {
    let diameter = contour.diameter();
    let m = contour.polyline.len() - 1;
    let mut samples = Vec::new();
    for k in 0..n_points.max(1) {
        let idx = (k * m) / n_points.max(1);
        let z0 = refine_to_contour(ev, contour.polyline[idx])?;
        let j = ev.chi_jet(z0)?;
        let g = 2.0 * j.chi_z.conj();
        let normal = g / g.norm();
        let model = SchwarzLocalModel::from_tangent(z0, Complex64::new(0.0, 1.0) * normal);
        for &delta in deltas {
            for side in [1.0, -1.0] {
                let dir = normal * side;
                model.check_direction(dir)?;
                let d = delta * diameter;
                let z = z0 + dir * d;
                let chi = ev.chi(z)?;
                let ratio = 1.0 / (chi * chi) / model.model(z).re;
                samples.push(SchwarzSample {
                    z0,
                    delta,
                    distance: d,
                    ratio,
                });
            }
        }
    }
    Ok(SchwarzReport { diameter, samples })
}

/// Whether `chi` takes opposite signs at `±offset` along the normal at
/// `n_points` vertices of `contour`.
pub fn sign_flips_across(ev: &FieldEvaluator, contour: &Contour, n_points: usize, offset: f64) -> Result<bool> {
    let m = contour.polyline.len() - 1;
    for k in 0..n_points.max(1) {
        let idx = (k * m) / n_points.max(1);
        let z0 = contour.polyline[idx];
        let normal = Complex64::new(0.0, -1.0) * contour.tangents[idx];
        let plus = ev.chi(z0 + offset * normal)?;
        let minus = ev.chi(z0 - offset * normal)?;
        if plus * minus >= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionType {
    FuchsianUniformizing,
    FuchsianType,
    SchottkyType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub a: f64,
    pub lambda: f64,
    pub label: String,
    pub kind: SolutionType,
    pub k: i32,
    pub contour_count: usize,
    pub expected_contours: usize,
    /// Finite punctures each contour passes between.
    pub goes_over: Option<[SingularPoint; 2]>,
    /// Finite punctures enclosed by each contour.
    pub enclosed: Vec<Vec<SingularPoint>>,
}

/// Expected contour count for an eigenvalue: `2|k|` for `lambda_k`, `2|k| - 1` for `mu_k`.
pub fn expected_contours(e: &Eigenvalue) -> usize {
    let k = e.k.unsigned_abs() as usize;
    match e.problem {
        ProblemKind::P3 => 2 * k,
        _ => 2 * k - 1,
    }
}

/// Matches `eq.lambda()` to one of `spectra` and cross-checks the contours.
pub fn classify_solution(
    eq: &SmirnovEquation,
    spectra: &[Eigenvalue],
    contours: &[Contour],
    tol: f64,
) -> Result<Classification> {
    let lam = eq.lambda();
    let e = spectra
        .iter()
        .filter(|e| (e.a - eq.a()).abs() <= 1e-12)
        .min_by(|x, y| (x.value - lam).abs().total_cmp(&(y.value - lam).abs()))
        .filter(|e| (e.value - lam).abs() <= tol * (1.0 + lam.abs()))
        .ok_or_else(|| Error::Domain(format!("lambda = {lam} is not a computed spectral point")))?;
    let kind = match (e.problem, e.k) {
        (ProblemKind::P3, 0) => SolutionType::FuchsianUniformizing,
        (ProblemKind::P3, _) => SolutionType::FuchsianType,
        _ => SolutionType::SchottkyType,
    };
    let expected = expected_contours(e);
    if contours.len() != expected {
        return Err(Error::Mismatch(format!(
            "{} expects {expected} contours, found {}",
            e.label(),
            contours.len()
        )));
    }
    let pair = if e.k > 0 {
        (SingularPoint::Zero, SingularPoint::A)
    } else {
        (SingularPoint::A, SingularPoint::One)
    };
    if let Some(c) = contours.iter().find(|c| !c.goes_over(pair.0, pair.1)) {
        return Err(Error::Mismatch(format!(
            "{} contour enclosing {:?} does not pass between {} and {}",
            e.label(),
            c.enclosed_punctures,
            pair.0,
            pair.1
        )));
    }
    Ok(Classification {
        a: eq.a(),
        lambda: lam,
        label: e.label(),
        kind,
        k: e.k,
        contour_count: contours.len(),
        expected_contours: expected,
        goes_over: (e.k != 0).then_some([pair.0, pair.1]),
        enclosed: contours.iter().map(|c| c.enclosed_punctures.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn line_model_is_half_plane_density() {
        let m = SchwarzLocalModel::from_tangent(c(0.3, 0.0), c(1.0, 0.0));
        assert_eq!(m.s_prime, c(1.0, 0.0));
        for z in [c(0.1, 0.5), c(-2.0, 0.01), c(0.3, -3.0)] {
            let v = m.model(z);
            assert!((v.re - 1.0 / (z.im * z.im)).abs() < 1e-12 * v.re);
            assert!(v.im.abs() < 1e-12 * v.re);
        }
    }

    #[test]
    fn circle_model_matches_disk_density() {
        let z0 = Complex64::from_polar(1.0, 0.7);
        let m = SchwarzLocalModel::from_tangent(z0, c(0.0, 1.0) * z0);
        assert!((m.s_prime + 1.0 / (z0 * z0)).norm() < 1e-15);
        for delta in [1e-2, 1e-3, 1e-4] {
            let z = (1.0 - delta) * z0;
            let model = m.model(z).re;
            let disk = 4.0 / (1.0 - z.norm_sqr()).powi(2);
            assert!((model * delta * delta - 1.0).abs() < 1e-12);
            assert!((model / disk - 1.0).abs() < 2.0 * delta);
        }
    }

    #[test]
    fn tangential_approach_rejected() {
        let m = SchwarzLocalModel::from_tangent(c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(m.check_direction(c(1.0, 0.01)), Err(Error::TangentialApproach)));
        assert!(m.check_direction(c(0.3, 1.0)).is_ok());
    }

    #[test]
    fn winding_of_square() {
        let sq = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)];
        assert_eq!(winding_number(&sq, c(0.5, 0.5)), 1);
        assert_eq!(winding_number(&sq, c(1.5, 0.5)), 0);
    }
}
