//! Local Frobenius bases at the singular points `0, a, 1, oo`.
//!
//! Every singular point of the self-adjoint equation has the double indicial
//! root (0 at finite points, 1 in the chart `w = 1/z` at infinity), so the
//! basis is
//!
//! ```text
//! y1 = sum e_n t^n,         y2 = y1 log t + sum e'_n t^n        (finite points, t = z - z_i)
//! y1 = sum e_n w^(n+1),     y2 = y1 log w + sum e'_n w^(n+1)    (infinity, w = 1/z)
//! ```
//!
//! where `e_n(rho)` solves the indicial-shifted recurrence and `e'_n` is its
//! derivative in the exponent `rho` at the double root. Both sequences are
//! carried together with dual numbers.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equation::SmirnovEquation;
use crate::error::{Error, Result};
use crate::taylor::Jet;

/// Evaluation radius as a fraction of the distance to the nearest other
/// singular point.
pub const RADIUS_FRACTION: f64 = 0.45;
const START_ORDER: usize = 24;
const MAX_ORDER: usize = 4096;
const DEFAULT_TAIL_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SingularPoint {
    Zero,
    A,
    One,
    Infinity,
}

impl SingularPoint {
    pub const ALL: [SingularPoint; 4] = [
        SingularPoint::Zero,
        SingularPoint::A,
        SingularPoint::One,
        SingularPoint::Infinity,
    ];

    pub const FINITE: [SingularPoint; 3] = [SingularPoint::Zero, SingularPoint::A, SingularPoint::One];

    /// Location in the `z`-plane; `None` for infinity.
    pub fn location(self, a: f64) -> Option<f64> {
        match self {
            SingularPoint::Zero => Some(0.0),
            SingularPoint::A => Some(a),
            SingularPoint::One => Some(1.0),
            SingularPoint::Infinity => None,
        }
    }

    /// Radius of convergence of the local series, in the local coordinate.
    pub fn convergence_radius(self, a: f64) -> f64 {
        match self {
            SingularPoint::Zero => a,
            SingularPoint::A => a.min(1.0 - a),
            SingularPoint::One => 1.0 - a,
            // nearest finite singular point to w = 0 is w = 1
            SingularPoint::Infinity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SingularPoint::Zero => "0",
            SingularPoint::A => "a",
            SingularPoint::One => "1",
            SingularPoint::Infinity => "inf",
        }
    }
}

impl fmt::Display for SingularPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
    fn scale(self, s: f64) -> Dual {
        Dual::new(self.v * s, self.d * s)
    }
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

/// Which logarithm multiplies `y1` inside `y2`.
///
/// `reflected = false` uses `Log(t)`, real for `t > 0`; `reflected = true` uses
/// `Log(-t)`, real for `t < 0`. `winding` adds `2 pi i winding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LogBranch {
    pub reflected: bool,
    pub winding: i32,
}

impl LogBranch {
    pub const DIRECT: LogBranch = LogBranch {
        reflected: false,
        winding: 0,
    };
    pub const REFLECTED: LogBranch = LogBranch {
        reflected: true,
        winding: 0,
    };

    pub fn log(&self, t: Complex64) -> Complex64 {
        let base = if self.reflected { (-t).ln() } else { t.ln() };
        base + Complex64::new(0.0, 2.0 * PI * self.winding as f64)
    }
}

/// A solution written as `alpha y1 + beta y2` in the basis at `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionRepr {
    pub point: SingularPoint,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub log_branch: LogBranch,
}

impl SolutionRepr {
    pub fn new(point: SingularPoint, alpha: Complex64, beta: Complex64, log_branch: LogBranch) -> Self {
        Self {
            point,
            alpha,
            beta,
            log_branch,
        }
    }

    pub fn holomorphic(point: SingularPoint) -> Self {
        Self::new(point, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), LogBranch::DIRECT)
    }

    pub fn logarithmic(point: SingularPoint) -> Self {
        Self::new(point, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), LogBranch::DIRECT)
    }

    pub fn is_regular(&self) -> bool {
        self.beta == Complex64::new(0.0, 0.0)
    }
}

/// Direction of a real continuation through a finite singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    LeftToRight,
    RightToLeft,
}

/// Replace `log(z_i - z)` by `log(z - z_i)` (or the reverse) keeping `alpha`,
/// `beta` and the holomorphic parts.
pub fn real_continuation(repr: &SolutionRepr, side: Side) -> Result<SolutionRepr> {
    let scale = 1.0 + repr.alpha.norm() + repr.beta.norm();
    if repr.alpha.im.abs() > 1e-14 * scale || repr.beta.im.abs() > 1e-14 * scale {
        return Err(Error::ComplexCoefficients {
            alpha: repr.alpha,
            beta: repr.beta,
        });
    }
    let expected = matches!(side, Side::LeftToRight);
    if repr.log_branch.reflected != expected || repr.log_branch.winding != 0 {
        return Err(Error::Domain(format!(
            "real continuation {side:?} needs the real logarithm on the starting side, got {:?}",
            repr.log_branch
        )));
    }
    Ok(SolutionRepr {
        point: repr.point,
        alpha: Complex64::new(repr.alpha.re, 0.0),
        beta: Complex64::new(repr.beta.re, 0.0),
        log_branch: LogBranch {
            reflected: !expected,
            winding: 0,
        },
    })
}

/// Value, derivative and second derivative (in `z`) of both basis elements.
#[derive(Debug, Clone, Copy)]
pub struct BasisJets {
    pub holomorphic: Jet,
    pub logarithmic: Jet,
}

/// Frobenius pair at one singular point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalBasis {
    pub point: SingularPoint,
    pub a: f64,
    pub lambda: f64,
    pub order: usize,
    /// `e_n`, with `e_0 = 1`.
    pub coeffs_holomorphic: Vec<f64>,
    /// `de_n / d rho`, with the first entry 0.
    pub coeffs_tilde: Vec<f64>,
    /// Evaluation radius in the local coordinate.
    pub radius: f64,
}

/// Builds the basis with an explicit truncation order `order >= 8`.
pub fn local_basis(eq: &SmirnovEquation, point: SingularPoint, order: usize) -> Result<LocalBasis> {
    if order < 8 {
        return Err(Error::Domain(format!("truncation order {order} < 8")));
    }
    let (holo, tilde) = recurrence(eq, point, order)?;
    Ok(LocalBasis {
        point,
        a: eq.a(),
        lambda: eq.lambda(),
        order,
        coeffs_holomorphic: holo,
        coeffs_tilde: tilde,
        radius: RADIUS_FRACTION * point.convergence_radius(eq.a()),
    })
}

fn recurrence(eq: &SmirnovEquation, point: SingularPoint, order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let lambda = eq.lambda();
    let a = eq.a();
    let rho = Dual::new(0.0, 1.0);
    let mut e: Vec<Dual> = Vec::with_capacity(order + 1);
    e.push(Dual::new(1.0, 0.0));
    let zero = Dual::new(0.0, 0.0);
    match point.location(a) {
        Some(zi) => {
            let zc = Complex64::new(zi, 0.0);
            let p1 = eq.dp(zc).re;
            let p2 = 0.5 * eq.d2p(zc).re;
            let q0 = zi + lambda;
            for m in 1..=order {
                let mf = m as f64;
                let k = rho.add(Dual::new(mf, 0.0));
                let km1 = rho.add(Dual::new(mf - 1.0, 0.0));
                let km2 = rho.add(Dual::new(mf - 2.0, 0.0));
                let em1 = e[m - 1];
                let em2 = if m >= 2 { e[m - 2] } else { zero };
                let a1 = km1.mul(k).scale(p2).add(Dual::new(q0, 0.0));
                let a2 = km2.mul(k).add(Dual::new(1.0, 0.0));
                let num = a1.mul(em1).add(a2.mul(em2)).scale(-1.0);
                let den = k.mul(k).scale(p1);
                let next = num.div(den);
                if !(next.v.is_finite() && next.d.is_finite()) {
                    return Err(Error::Overflow { order: m });
                }
                e.push(next);
            }
        }
        None => {
            let big_p1 = -(1.0 + a);
            let big_p2 = a;
            let rho = rho.add(Dual::new(1.0, 0.0));
            for m in 1..=order {
                let mf = m as f64;
                let km = rho.add(Dual::new(mf - 1.0, 0.0));
                let km1 = rho.add(Dual::new(mf - 1.0, 0.0));
                let km2 = rho.add(Dual::new(mf - 2.0, 0.0));
                let em1 = e[m - 1];
                let em2 = if m >= 2 { e[m - 2] } else { zero };
                let a1 = km1.mul(km2).scale(big_p1).add(Dual::new(lambda, 0.0));
                let a2 = km2.mul(km2).scale(big_p2);
                let num = a1.mul(em1).add(a2.mul(em2)).scale(-1.0);
                let den = km.mul(km);
                let next = num.div(den);
                if !(next.v.is_finite() && next.d.is_finite()) {
                    return Err(Error::Overflow { order: m });
                }
                e.push(next);
            }
        }
    }
    Ok((e.iter().map(|d| d.v).collect(), e.iter().map(|d| d.d).collect()))
}

impl LocalBasis {
    /// Basis at `point` with the default evaluation radius and an order chosen
    /// by doubling from 24 until the tail at that radius is negligible.
    pub fn new(eq: &SmirnovEquation, point: SingularPoint) -> Result<Self> {
        Self::with_radius(eq, point, RADIUS_FRACTION * point.convergence_radius(eq.a()))
    }

    /// Basis usable out to `radius` (local coordinate), which must be smaller
    /// than the radius of convergence.
    pub fn with_radius(eq: &SmirnovEquation, point: SingularPoint, radius: f64) -> Result<Self> {
        let conv = point.convergence_radius(eq.a());
        if !(radius > 0.0 && radius < conv) {
            return Err(Error::Domain(format!(
                "radius {radius} outside (0, {conv}) at {point}"
            )));
        }
        let mut order = START_ORDER;
        loop {
            let mut basis = local_basis(eq, point, order)?;
            basis.radius = radius;
            if basis.tail_estimate(radius) < DEFAULT_TAIL_TOL {
                return Ok(basis);
            }
            if order >= MAX_ORDER {
                return Err(Error::NonConvergence(format!(
                    "Frobenius series at {point} did not converge within {MAX_ORDER} terms"
                )));
            }
            order *= 2;
        }
    }

    /// Size of the last few retained terms at `|t| = rho`, relative to the
    /// largest term.
    pub fn tail_estimate(&self, rho: f64) -> f64 {
        let mut max_term: f64 = 1.0;
        let mut pw = 1.0;
        let mut terms = Vec::with_capacity(self.order + 1);
        let logf = 1.0 + rho.ln().abs();
        for (h, t) in self.coeffs_holomorphic.iter().zip(&self.coeffs_tilde) {
            let term = h.abs() * pw * logf + t.abs() * pw;
            max_term = max_term.max(term);
            terms.push(term);
            pw *= rho;
        }
        let tail = terms.iter().rev().take(4).fold(0.0_f64, |m, &t| m.max(t));
        tail / max_term
    }

    /// Local coordinate of `z`: `z - z_i`, or `1/z` at infinity.
    pub fn local_coordinate(&self, z: Complex64) -> Complex64 {
        match self.point.location(self.a) {
            Some(zi) => z - zi,
            None => z.inv(),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.local_coordinate(z).norm() < self.radius
    }

    /// Jets of `y1` and `y2` at `z` with the given logarithm, without a radius
    /// check (the caller guarantees convergence).
    pub fn jets_unchecked(&self, z: Complex64, branch: LogBranch) -> BasisJets {
        let t = self.local_coordinate(z);
        let (h0, h1, h2) = horner3(&self.coeffs_holomorphic, t);
        let (g0, g1, g2) = horner3(&self.coeffs_tilde, t);
        let ell = branch.log(t);
        let tinv = t.inv();
        match self.point.location(self.a) {
            Some(_) => {
                let holomorphic = Jet {
                    y: h0,
                    dy: h1,
                    d2y: h2,
                };
                let logarithmic = Jet {
                    y: h0 * ell + g0,
                    dy: h1 * ell + h0 * tinv + g1,
                    d2y: h2 * ell + 2.0 * h1 * tinv - h0 * tinv * tinv + g2,
                };
                BasisJets {
                    holomorphic,
                    logarithmic,
                }
            }
            None => {
                let w = t;
                // derivatives in w of w*H and w*G
                let y1 = w * h0;
                let y1w = h0 + w * h1;
                let y1ww = 2.0 * h1 + w * h2;
                let gw0 = w * g0;
                let gw1 = g0 + w * g1;
                let gw2 = 2.0 * g1 + w * g2;
                let y2 = y1 * ell + gw0;
                let y2w = y1w * ell + y1 * tinv + gw1;
                let y2ww = y1ww * ell + 2.0 * y1w * tinv - y1 * tinv * tinv + gw2;
                let to_z = |f: Complex64, fw: Complex64, fww: Complex64| {
                    let w2 = w * w;
                    Jet {
                        y: f,
                        dy: -w2 * fw,
                        d2y: w2 * w2 * fww + 2.0 * w2 * w * fw,
                    }
                };
                BasisJets {
                    holomorphic: to_z(y1, y1w, y1ww),
                    logarithmic: to_z(y2, y2w, y2ww),
                }
            }
        }
    }

    pub fn jets(&self, z: Complex64, branch: LogBranch) -> Result<BasisJets> {
        let dist = self.local_coordinate(z).norm();
        if !(dist < self.radius) {
            return Err(Error::OutOfDisk {
                z,
                dist,
                radius: self.radius,
            });
        }
        Ok(self.jets_unchecked(z, branch))
    }

    /// `(y, y')` of `alpha y1 + beta y2` at `z`.
    pub fn evaluate(&self, repr: &SolutionRepr, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_point(repr)?;
        let j = self.jets(z, repr.log_branch)?;
        Ok((
            repr.alpha * j.holomorphic.y + repr.beta * j.logarithmic.y,
            repr.alpha * j.holomorphic.dy + repr.beta * j.logarithmic.dy,
        ))
    }

    /// Jet of `alpha y1 + beta y2` at `z`.
    pub fn evaluate_jet(&self, repr: &SolutionRepr, z: Complex64) -> Result<Jet> {
        self.check_point(repr)?;
        let j = self.jets(z, repr.log_branch)?;
        Ok(combine(repr.alpha, repr.beta, &j))
    }

    fn check_point(&self, repr: &SolutionRepr) -> Result<()> {
        if repr.point != self.point {
            return Err(Error::Domain(format!(
                "representation at {} evaluated with basis at {}",
                repr.point, self.point
            )));
        }
        Ok(())
    }

    /// `pW(y2, y1)`, constant and equal to `-p'(z_i)` at finite points, `1` at infinity.
    pub fn basis_wronskian(&self) -> f64 {
        match self.point.location(self.a) {
            Some(zi) => {
                let a = self.a;
                -(3.0 * zi * zi - 2.0 * (1.0 + a) * zi + a)
            }
            None => 1.0,
        }
    }

    /// Residual of the equation applied to the truncated holomorphic series at
    /// local coordinate `t`, computed from the leftover monomials only.
    pub fn recurrence_residual(&self, t: Complex64) -> f64 {
        let e = &self.coeffs_holomorphic;
        let n = e.len() - 1;
        let get = |k: i64| -> f64 {
            if k < 0 || k as usize > n {
                0.0
            } else {
                e[k as usize]
            }
        };
        let mut total = 0.0;
        match self.point.location(self.a) {
            Some(zi) => {
                let zc = Complex64::new(zi, 0.0);
                let p1 = -self.basis_wronskian();
                let p2 = 0.5 * (6.0 * zi - 2.0 * (1.0 + self.a));
                let q0 = zi + self.lambda;
                let _ = zc;
                // coefficient of t^(m-1), for m = n+1 .. n+2 (higher ones vanish)
                for m in (n + 1)..=(n + 2) {
                    let m = m as i64;
                    let mf = m as f64;
                    let c = p1 * mf * mf * get(m)
                        + (p2 * (mf - 1.0) * mf + q0) * get(m - 1)
                        + ((mf - 2.0) * mf + 1.0) * get(m - 2);
                    total += c.abs() * t.norm().powi((m - 1) as i32);
                }
            }
            None => {
                let big_p1 = -(1.0 + self.a);
                for m in (n + 1)..=(n + 2) {
                    let m = m as i64;
                    let mf = m as f64;
                    // exponent m + rho with rho = 1
                    let c = mf * mf * get(m)
                        + (big_p1 * mf * (mf - 1.0) + self.lambda) * get(m - 1)
                        + self.a * (mf - 1.0) * (mf - 1.0) * get(m - 2);
                    total += c.abs() * t.norm().powi((m + 1) as i32);
                }
            }
        }
        total
    }
}

pub(crate) fn combine(alpha: Complex64, beta: Complex64, j: &BasisJets) -> Jet {
    Jet {
        y: alpha * j.holomorphic.y + beta * j.logarithmic.y,
        dy: alpha * j.holomorphic.dy + beta * j.logarithmic.dy,
        d2y: alpha * j.holomorphic.d2y + beta * j.logarithmic.d2y,
    }
}

fn horner3(c: &[f64], t: Complex64) -> (Complex64, Complex64, Complex64) {
    let mut f0 = Complex64::new(0.0, 0.0);
    let mut f1 = Complex64::new(0.0, 0.0);
    let mut f2 = Complex64::new(0.0, 0.0);
    for (n, &cn) in c.iter().enumerate().rev() {
        let nf = n as f64;
        f0 = f0 * t + cn;
        if n >= 1 {
            f1 = f1 * t + nf * cn;
        }
        if n >= 2 {
            f2 = f2 * t + nf * (nf - 1.0) * cn;
        }
    }
    (f0, f1, f2)
}

/// `p(z) (f g' - g f')` for data `(y, y')` of two solutions.
pub fn p_wronskian(
    eq: &SmirnovEquation,
    f: (Complex64, Complex64),
    g: (Complex64, Complex64),
    z: Complex64,
) -> Complex64 {
    eq.p(z) * (f.0 * g.1 - g.0 * f.1)
}

/// Coefficients of `f` in the basis at `basis.point`, using the given log
/// branch, from data `(y, y')` at `z` inside the basis disk.
pub fn connection_coefficients(
    eq: &SmirnovEquation,
    basis: &LocalBasis,
    branch: LogBranch,
    z: Complex64,
    f: (Complex64, Complex64),
) -> Result<SolutionRepr> {
    let j = basis.jets(z, branch)?;
    let y1 = (j.holomorphic.y, j.holomorphic.dy);
    let y2 = (j.logarithmic.y, j.logarithmic.dy);
    let w21 = p_wronskian(eq, y2, y1, z);
    let alpha = p_wronskian(eq, f, y2, z) / (-w21);
    let beta = p_wronskian(eq, f, y1, z) / w21;
    Ok(SolutionRepr::new(basis.point, alpha, beta, branch))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_coefficient_at_zero() {
        let eq = SmirnovEquation::new(0.5, -0.5).unwrap();
        let b = local_basis(&eq, SingularPoint::Zero, 16).unwrap();
        assert_eq!(b.coeffs_holomorphic[0], 1.0);
        assert!((b.coeffs_holomorphic[1] - 1.0).abs() < 1e-15);
        let eq = SmirnovEquation::new(0.3, 0.7).unwrap();
        let b = local_basis(&eq, SingularPoint::Zero, 16).unwrap();
        assert!((b.coeffs_holomorphic[1] + 0.7 / 0.3).abs() < 1e-14);
    }

    #[test]
    fn order_below_eight_rejected() {
        let eq = SmirnovEquation::new(0.5, 0.0).unwrap();
        assert!(local_basis(&eq, SingularPoint::A, 7).is_err());
    }

    #[test]
    fn head_values_at_finite_points() {
        let eq = SmirnovEquation::new(0.4, 1.3).unwrap();
        for p in SingularPoint::FINITE {
            let b = LocalBasis::new(&eq, p).unwrap();
            let zi = p.location(0.4).unwrap();
            // at the point itself the series head is exact
            let (h0, h1, _) = horner3(&b.coeffs_holomorphic, c(0.0, 0.0));
            assert_eq!(h0, c(1.0, 0.0));
            assert_eq!(h1, c(b.coeffs_holomorphic[1], 0.0));
            let expected = -(zi + 1.3) / eq.dp(c(zi, 0.0)).re;
            assert!((b.coeffs_holomorphic[1] - expected).abs() < 1e-14);
            assert_eq!(b.coeffs_tilde[0], 0.0);
        }
    }

    #[test]
    fn infinity_head() {
        let eq = SmirnovEquation::new(0.4, 1.3).unwrap();
        let b = LocalBasis::new(&eq, SingularPoint::Infinity).unwrap();
        assert_eq!(b.coeffs_holomorphic[0], 1.0);
        assert!((b.coeffs_holomorphic[1] + 1.3).abs() < 1e-15);
        let z = c(1e3, 0.0);
        let j = b.jets(z, LogBranch::DIRECT).unwrap();
        assert!((j.holomorphic.y * z - 1.0).norm() < 2e-3);
    }

    #[test]
    fn both_basis_elements_solve_the_equation() {
        let eq = SmirnovEquation::new(0.35, -2.2).unwrap();
        for p in SingularPoint::ALL {
            let b = LocalBasis::new(&eq, p).unwrap();
            let z = match p.location(0.35) {
                Some(zi) => c(zi, 0.0) + 0.8 * b.radius * c(0.6, 0.8),
                None => (0.8 * b.radius * c(0.6, -0.8)).inv(),
            };
            let j = b.jets(z, LogBranch::DIRECT).unwrap();
            for jet in [j.holomorphic, j.logarithmic] {
                let res = eq.p(z) * jet.d2y + eq.dp(z) * jet.dy + (z + eq.lambda()) * jet.y;
                let scale = (eq.p(z) * jet.d2y).norm() + (eq.dp(z) * jet.dy).norm() + jet.y.norm();
                assert!(res.norm() < 1e-12 * scale, "{p}: {res} / {scale}");
            }
        }
    }

    #[test]
    fn basis_wronskian_matches_closed_form() {
        let eq = SmirnovEquation::new(0.5, 0.3).unwrap();
        for p in SingularPoint::ALL {
            let b = LocalBasis::new(&eq, p).unwrap();
            let z = match p.location(0.5) {
                Some(zi) => c(zi, 0.0) + 0.5 * b.radius * c(0.0, 1.0),
                None => (0.5 * b.radius * c(0.3, 0.9539392014169456)).inv(),
            };
            let j = b.jets(z, LogBranch::DIRECT).unwrap();
            let w = p_wronskian(
                &eq,
                (j.logarithmic.y, j.logarithmic.dy),
                (j.holomorphic.y, j.holomorphic.dy),
                z,
            );
            assert!((w - b.basis_wronskian()).norm() < 1e-12, "{p}: {w}");
        }
        let b = LocalBasis::new(&eq, SingularPoint::A).unwrap();
        assert!((b.basis_wronskian() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_outside_disk() {
        let eq = SmirnovEquation::new(0.5, 0.0).unwrap();
        let b = LocalBasis::new(&eq, SingularPoint::Zero).unwrap();
        let r = b.evaluate(&SolutionRepr::holomorphic(SingularPoint::Zero), c(0.3, 0.0));
        assert!(matches!(r, Err(Error::OutOfDisk { .. })));
        let r = b.evaluate(&SolutionRepr::holomorphic(SingularPoint::A), c(0.1, 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn log_solution_dominated_by_log() {
        let eq = SmirnovEquation::new(0.5, 0.0).unwrap();
        let b = LocalBasis::new(&eq, SingularPoint::Zero).unwrap();
        let t = c(1e-8, 0.0);
        let (y, _) = b.evaluate(&SolutionRepr::logarithmic(SingularPoint::Zero), t).unwrap();
        assert!((y / t.ln() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn real_continuation_of_pure_log() {
        // beta = 1, alpha = 0 at a with holomorphic part switched off: the log
        // factor must switch from log(a - z) to log(z - a).
        let repr = SolutionRepr::new(SingularPoint::A, c(0.0, 0.0), c(1.0, 0.0), LogBranch::REFLECTED);
        let cont = real_continuation(&repr, Side::LeftToRight).unwrap();
        assert_eq!(cont.log_branch, LogBranch::DIRECT);
        assert_eq!(cont.alpha, repr.alpha);
        assert_eq!(cont.beta, repr.beta);
        let t_left = c(-0.01, 0.0);
        let t_right = c(0.01, 0.0);
        assert!((repr.log_branch.log(t_left) - (0.01f64).ln()).norm() < 1e-15);
        assert!((cont.log_branch.log(t_right) - (0.01f64).ln()).norm() < 1e-15);
    }

    #[test]
    fn real_continuation_rejects_complex_coefficients() {
        let repr = SolutionRepr::new(SingularPoint::A, c(0.0, 1.0), c(1.0, 0.0), LogBranch::REFLECTED);
        assert!(matches!(
            real_continuation(&repr, Side::LeftToRight),
            Err(Error::ComplexCoefficients { .. })
        ));
    }

    #[test]
    fn connection_recovers_basis_elements() {
        let eq = SmirnovEquation::new(0.3, 0.4).unwrap();
        let b = LocalBasis::new(&eq, SingularPoint::One).unwrap();
        let z = c(1.0 - 0.05, 0.07);
        let j = b.jets(z, LogBranch::DIRECT).unwrap();
        let r1 = connection_coefficients(&eq, &b, LogBranch::DIRECT, z, (j.holomorphic.y, j.holomorphic.dy)).unwrap();
        assert!((r1.alpha - 1.0).norm() < 1e-13 && r1.beta.norm() < 1e-13);
        let r2 = connection_coefficients(&eq, &b, LogBranch::DIRECT, z, (j.logarithmic.y, j.logarithmic.dy)).unwrap();
        assert!(r2.alpha.norm() < 1e-13 && (r2.beta - 1.0).norm() < 1e-13);
    }

    #[test]
    fn coefficients_real_for_real_lambda() {
        let eq = SmirnovEquation::new(0.62, -3.7).unwrap();
        for p in SingularPoint::ALL {
            let b = LocalBasis::new(&eq, p).unwrap();
            assert!(b.coeffs_holomorphic.iter().chain(&b.coeffs_tilde).all(|x| x.is_finite()));
        }
    }
}
