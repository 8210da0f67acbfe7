//! The regularized Liouville action of the Fuchsian field and the check that
//! it is an antiderivative of the accessory parameter at `a`.
//!
//! The integrand `|psi_z|^2 + e^psi` is `(4|chi_z|^2 + 1) / chi^2`. The
//! sphere is cut into a square neighbourhood of each finite puncture, a
//! Cartesian bulk and an exterior; the punctured pieces are integrated in
//! log-polar coordinates, where the integrand times the Jacobian stays
//! bounded. Below the cutoff `eps` the field is replaced by its leading
//! asymptotics `chi = r (|log r| + B)`, whose contribution together with the
//! counterterms is available in closed form.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::SmirnovEquation;
use crate::error::{Error, Result};
use crate::liouville::FieldEvaluator;
use crate::spectra::{solve_spectrum, ProblemKind, SpectralProblem, SpectrumOptions};

/// Radius at which the asymptotic constants are read off.
const PROBE_RADIUS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
    /// Largest bulk cell side.
    pub cell: f64,
    /// Largest panel length in `log r`.
    pub log_panel: f64,
    /// Angular panels per quarter turn.
    pub angular_panels: usize,
    /// Half-width of the bulk square centred at the origin.
    pub outer: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 16,
            cell: 0.25,
            log_panel: 1.0,
            angular_panels: 2,
            outer: 2.0,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.order >= 2
            && self.cell > 0.0
            && self.log_panel > 0.0
            && self.angular_panels >= 1
            && self.outer > 1.5;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid quadrature spec {self:?}")))
        }
    }

    fn coarser(&self) -> Self {
        Self {
            order: (self.order * 3 / 4).max(2),
            ..*self
        }
    }
}

pub fn default_eps_schedule() -> Vec<f64> {
    [-2.0, -2.5, -3.0, -3.5, -4.0].iter().map(|e| 10f64.powf(*e)).collect()
}

/// Constants `B` in `chi ~ r (|log r| + B)` at 0, a, 1 and (in the chart
/// `r = 1/|z|`) at infinity, each averaged over four directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub b: [f64; 4],
    /// Largest spread of a constant over the probe directions.
    pub spread: f64,
    /// Largest deviation of the coefficient of `|log r|` from one.
    pub slope_defect: f64,
}

pub fn asymptotic_constants(ev: &FieldEvaluator) -> Result<AsymptoticConstants> {
    let a = ev.equation().a();
    let dirs = [0.3, 1.9, 3.4, 5.0];
    let probe = |z0: Option<f64>, r: f64, theta: f64| -> Result<f64> {
        let u = Complex64::from_polar(1.0, theta);
        match z0 {
            Some(x) => Ok(ev.chi(Complex64::new(x, 0.0) + r * u)? / r),
            None => Ok(ev.chi(u / r)? * r),
        }
    };
    let mut b = [0.0; 4];
    let (mut spread, mut slope_defect) = (0.0f64, 0.0f64);
    for (n, z0) in [Some(0.0), Some(a), Some(1.0), None].into_iter().enumerate() {
        let mut vals = Vec::with_capacity(dirs.len());
        for &t in &dirs {
            let (r1, r2) = (PROBE_RADIUS, 10.0 * PROBE_RADIUS);
            let (f1, f2) = (probe(z0, r1, t)?, probe(z0, r2, t)?);
            let (l1, l2) = (-r1.ln(), -r2.ln());
            slope_defect = slope_defect.max(((f1 - f2) / (l1 - l2) - 1.0).abs());
            vals.push(f1 - l1);
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        spread = spread.max(vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max));
        b[n] = mean;
    }
    Ok(AsymptoticConstants { b, spread, slope_defect })
}

/// Counterterms `2 pi n log eps + 4 pi (n - 2) log|log eps|` for `n = 4`.
pub fn counterterms(eps: f64) -> f64 {
    8.0 * PI * eps.ln() + 8.0 * PI * eps.ln().abs().ln()
}

/// Integral of the model density below the cutoff plus the counterterms,
/// in the limit of vanishing inner cutoff.
pub fn model_tail(eps: f64, b: &[f64; 4]) -> Result<f64> {
    let l = -eps.ln();
    let mut total = 0.0;
    for (n, bn) in b.iter().enumerate() {
        let m = l + bn;
        if m <= 0.0 {
            return Err(Error::Domain(format!(
                "cutoff {eps:e} too large for the asymptotic constant {bn}"
            )));
        }
        let sign = if n == 3 { -1.0 } else { 1.0 };
        total += 2.0 * PI * (-l + sign * 2.0 * m.ln() + 2.0 / m);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    z: Complex64,
    w: f64,
}

fn rule(order: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(order).expect("order is at least two");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

fn composite(lo: f64, hi: f64, max_len: f64, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let panels = ((hi - lo) / max_len).ceil().max(1.0) as usize;
    let len = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for k in 0..panels {
        let c = lo + (k as f64 + 0.5) * len;
        out.extend(rule.iter().map(|(x, w)| (c + 0.5 * len * x, 0.5 * len * w)));
    }
    out
}

fn square_radius(half_width: f64, theta: f64) -> f64 {
    half_width / theta.cos().abs().max(theta.sin().abs())
}

fn angular_nodes(spec: &QuadratureSpec, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    // panel edges at the square's corners
    let quarter = 0.5 * PI;
    let mut out = Vec::new();
    for q in 0..4 {
        let lo = -0.25 * PI + q as f64 * quarter;
        out.extend(composite(lo, lo + quarter, quarter / spec.angular_panels as f64, rule));
    }
    out
}

/// Log-polar nodes about `center` for `log r` between `lo(theta)` and `hi(theta)`.
fn log_polar_nodes(
    center: Complex64,
    spec: &QuadratureSpec,
    rule: &[(f64, f64)],
    bounds: impl Fn(f64) -> (f64, f64),
) -> Vec<Node> {
    let mut out = Vec::new();
    for (theta, wt) in angular_nodes(spec, rule) {
        let (lo, hi) = bounds(theta);
        for (t, wr) in composite(lo, hi, spec.log_panel, rule) {
            let r = t.exp();
            out.push(Node {
                z: center + Complex64::from_polar(r, theta),
                w: wt * wr * r * r,
            });
        }
    }
    out
}

fn bulk_nodes(a: f64, half: f64, spec: &QuadratureSpec, rule: &[(f64, f64)]) -> Vec<Node> {
    let r = spec.outer;
    let mut xs = vec![-r, r];
    for c in [0.0, a, 1.0] {
        xs.push(c - half);
        xs.push(c + half);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|p, q| (*p - *q).abs() < 1e-14);
    let ys = [-r, -half, half, r];
    let mut out = Vec::new();
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let mid = Complex64::new(0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1]));
            let in_square = [0.0, a, 1.0]
                .iter()
                .any(|c| (mid.re - c).abs() < half && mid.im.abs() < half);
            if in_square {
                continue;
            }
            let gx = composite(xw[0], xw[1], spec.cell, rule);
            let gy = composite(yw[0], yw[1], spec.cell, rule);
            for (x, wx) in &gx {
                for (y, wy) in &gy {
                    out.push(Node {
                        z: Complex64::new(*x, *y),
                        w: wx * wy,
                    });
                }
            }
        }
    }
    out
}

fn integrate(ev: &FieldEvaluator, nodes: &[Node]) -> Result<f64> {
    let parts: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|n| Ok(n.w * ev.chi_jet(n.z)?.action_density()))
        .collect();
    // fixed-order summation keeps the result independent of thread count
    Ok(parts?.iter().sum())
}

/// Integral of the action density over the sphere with disks of radius
/// `eps` about 0, a, 1 and `|z| > 1/eps` removed.
fn truncated_integral(ev: &FieldEvaluator, spec: &QuadratureSpec, eps: f64) -> Result<f64> {
    let a = ev.equation().a();
    let half = 0.5 * a.min(1.0 - a);
    let rule = rule(spec.order);
    if eps >= 0.5 * half {
        return Err(Error::Domain(format!("cutoff {eps:e} exceeds the puncture neighbourhoods")));
    }
    let mut nodes = bulk_nodes(a, half, spec, &rule);
    for c in [0.0, a, 1.0] {
        nodes.extend(log_polar_nodes(Complex64::new(c, 0.0), spec, &rule, |th| {
            (eps.ln(), square_radius(half, th).ln())
        }));
    }
    let r = spec.outer;
    nodes.extend(log_polar_nodes(Complex64::new(0.0, 0.0), spec, &rule, |th| {
        (square_radius(r, th).ln(), -eps.ln())
    }));
    integrate(ev, &nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffValue {
    pub eps: f64,
    /// Integral over the truncated sphere plus counterterms.
    pub raw: f64,
    /// `raw` with the closed-form contribution of the model below `eps`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEstimate {
    pub a: f64,
    pub lambda: f64,
    pub value: f64,
    pub eps_schedule: Vec<f64>,
    pub cutoffs: Vec<CutoffValue>,
    /// Spread of the stabilized values over the schedule.
    pub extrapolation_error: f64,
    /// Change of the value under a lower-order rule.
    pub quadrature_error: f64,
    pub asymptotics: AsymptoticConstants,
    pub quadrature: QuadratureSpec,
}

impl ActionEstimate {
    /// Successive differences of the stabilized values.
    pub fn differences(&self) -> Vec<f64> {
        self.cutoffs.windows(2).map(|w| (w[1].value - w[0].value).abs()).collect()
    }

    /// Whether successive differences shrink monotonically.
    pub fn stabilizes(&self) -> bool {
        self.differences().windows(2).all(|d| d[1] <= d[0])
    }

    pub fn value_at(&self, eps: f64) -> Option<f64> {
        self.cutoffs
            .iter()
            .find(|c| ((c.eps - eps) / eps).abs() < 1e-9)
            .map(|c| c.value)
    }
}

/// Regularized action of the field built from `lambda` (the Fuchsian value
/// for this `a`). The reported value is the one at the smallest cutoff.
pub fn liouville_action(a: f64, lambda: f64, quad: &QuadratureSpec, eps_schedule: &[f64]) -> Result<ActionEstimate> {
    quad.validate()?;
    if eps_schedule.is_empty() || eps_schedule.iter().any(|e| !(1e-4 * 0.999..=1e-2 * 1.001).contains(e)) {
        return Err(Error::Domain("cutoffs must lie in [1e-4, 1e-2]".into()));
    }
    let mut schedule = eps_schedule.to_vec();
    schedule.sort_by(|x, y| y.total_cmp(x));
    schedule.dedup();
    let eq = SmirnovEquation::new(a, lambda)?;
    let ev = FieldEvaluator::new(&eq)?;
    let asymptotics = asymptotic_constants(&ev)?;
    let mut cutoffs = Vec::with_capacity(schedule.len());
    for &eps in &schedule {
        let integral = truncated_integral(&ev, quad, eps)?;
        cutoffs.push(CutoffValue {
            eps,
            raw: integral + counterterms(eps),
            value: integral + model_tail(eps, &asymptotics.b)?,
        });
    }
    let last = cutoffs.last().expect("schedule is non-empty");
    let value = last.value;
    let coarse = truncated_integral(&ev, &quad.coarser(), last.eps)? + model_tail(last.eps, &asymptotics.b)?;
    let (lo, hi) = cutoffs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.value), hi.max(c.value)));
    if !value.is_finite() {
        return Err(Error::NonConvergence("action is not finite".into()));
    }
    Ok(ActionEstimate {
        a,
        lambda,
        value,
        eps_schedule: schedule,
        extrapolation_error: hi - lo,
        quadrature_error: (coarse - value).abs(),
        cutoffs,
        asymptotics,
        quadrature: *quad,
    })
}

/// The Fuchsian accessory value `lambda_0(a)`.
pub fn fuchsian_lambda(a: f64) -> Result<f64> {
    let p3 = SpectralProblem::new(ProblemKind::P3, a)?;
    let e = solve_spectrum(&p3, 0..=0, &SpectrumOptions::default())?;
    e.first()
        .map(|e| e.value)
        .ok_or_else(|| Error::BracketNotFound { what: "lambda_0".into() })
}

/// Action of the Fuchsian field at `a`, with `lambda_0` solved for.
pub fn fuchsian_action(a: f64, quad: &QuadratureSpec, eps_schedule: &[f64]) -> Result<ActionEstimate> {
    liouville_action(a, fuchsian_lambda(a)?, quad, eps_schedule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyakovCheck {
    pub a: f64,
    pub delta: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    /// Central difference `(S(a + delta) - S(a - delta)) / (2 delta)`.
    pub ds_da: f64,
    /// `-(1/2 pi) dS/dz_2` with the holomorphic derivative `dS/dz_2 = (1/2) dS/da`.
    pub lhs: f64,
    /// `-(1/2 pi) dS/da`.
    pub lhs_real_derivative: f64,
    /// `c_2 = (1 + 2 lambda_0) / (a (a - 1))`.
    pub rhs: f64,
    pub rel_err: f64,
    pub abs_err: f64,
}

impl PolyakovCheck {
    pub fn from_values(a: f64, delta: f64, s_minus: f64, s_plus: f64, rhs: f64) -> Self {
        let ds_da = (s_plus - s_minus) / (2.0 * delta);
        let lhs_real_derivative = -ds_da / (2.0 * PI);
        let lhs = 0.5 * lhs_real_derivative;
        let abs_err = (lhs - rhs).abs();
        Self {
            a,
            delta,
            s_minus,
            s_plus,
            ds_da,
            lhs,
            lhs_real_derivative,
            rhs,
            rel_err: if rhs != 0.0 { abs_err / rhs.abs() } else { f64::INFINITY },
            abs_err,
        }
    }
}

/// Compares `-(1/2 pi) dS/dz_2` (central difference in `a`) with the
/// accessory coefficient of `1/(z - a)`.
pub fn polyakov_check(a: f64, delta: f64, quad: &QuadratureSpec, eps: f64) -> Result<PolyakovCheck> {
    if !(1e-3 * 0.999..=1e-2 * 1.001).contains(&delta) {
        return Err(Error::Domain(format!("difference step {delta} outside [1e-3, 1e-2]")));
    }
    if a - delta <= 0.0 || a + delta >= 1.0 {
        return Err(Error::Domain(format!("a = {a} too close to the boundary for step {delta}")));
    }
    let (minus, (plus, centre)) = rayon::join(
        || fuchsian_action(a - delta, quad, &[eps]),
        || rayon::join(|| fuchsian_action(a + delta, quad, &[eps]), || fuchsian_lambda(a)),
    );
    let (minus, plus, lambda0) = (minus?, plus?, centre?);
    let rhs = SmirnovEquation::new(a, lambda0)?.accessory().c[1].re;
    Ok(PolyakovCheck::from_values(a, delta, minus.value, plus.value, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterterm_coefficients() {
        let eps: f64 = 1e-3;
        let expected = 8.0 * PI * eps.ln() + 8.0 * PI * (-eps.ln()).ln();
        assert!((counterterms(eps) - expected).abs() < 1e-12);
    }

    #[test]
    fn model_tail_vanishes_with_the_cutoff() {
        // model density integrated in closed form plus counterterms
        let b = [1.3, 0.4, 1.3, -0.2];
        let exact = |eps: f64| {
            let l = -eps.ln();
            let mut s = 0.0;
            for (n, bn) in b.iter().enumerate() {
                let m: f64 = l + bn;
                let sgn = if n == 3 { -1.0 } else { 1.0 };
                s += 2.0 * PI * (-l + sgn * 2.0 * m.ln() + 2.0 / m);
            }
            s
        };
        for eps in [1e-3, 1e-6] {
            assert!((model_tail(eps, &b).unwrap() - exact(eps)).abs() < 1e-12);
        }
        let small = model_tail(1e-300, &b).unwrap() - counterterms(1e-300);
        assert!(small.abs() < 0.2, "{small}");
    }

    #[test]
    fn composite_rule_integrates_log() {
        let r = rule(12);
        let s: f64 = composite(1.0, 4.0, 1.0, &r).iter().map(|(x, w)| w * x.ln()).sum();
        let exact = 4.0 * 4f64.ln() - 4.0 - (0.0 - 1.0);
        assert!((s - exact).abs() < 1e-13);
    }

    #[test]
    fn polyakov_record_signs() {
        let c = PolyakovCheck::from_values(0.3, 5e-3, 1.0, 1.1, -0.8);
        let flipped = PolyakovCheck::from_values(0.3, 5e-3, 1.1, 1.0, -0.8);
        assert_eq!(c.lhs, -flipped.lhs);
        assert!((c.lhs_real_derivative - 2.0 * c.lhs).abs() < 1e-15);
    }
}
