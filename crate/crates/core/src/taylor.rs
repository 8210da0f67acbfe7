//! Power series of solutions of `(p y')' + (z + lambda) y = 0` about ordinary
//! points, used for analytic continuation with tail-controlled steps.

use num_complex::Complex64;

use crate::equation::SmirnovEquation;
use crate::dd::{CDd, Dd};
use crate::error::{Error, Result};

/// Relative size of the last retained term.
pub const TAIL_TOL: f64 = 1e-17;
const MAX_TERMS: usize = 400;
const DD_TAIL_TOL: f64 = 1e-33;

/// Value and first two derivatives of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub y: Complex64,
    pub dy: Complex64,
    pub d2y: Complex64,
}

/// Taylor coefficients of one solution about an ordinary point.
#[derive(Debug, Clone)]
pub struct TaylorSeries {
    pub center: Complex64,
    pub coeffs: Vec<Complex64>,
}

/// Local polynomial data of the equation about `center`.
#[derive(Debug, Clone, Copy)]
struct LocalCoeffs {
    p0: Complex64,
    p1: Complex64,
    p2: Complex64,
    q0: Complex64,
}

impl LocalCoeffs {
    fn at(eq: &SmirnovEquation, c: Complex64) -> Self {
        Self {
            p0: eq.p(c),
            p1: eq.dp(c),
            p2: 0.5 * eq.d2p(c),
            q0: c + eq.lambda(),
        }
    }
}

impl TaylorSeries {
    /// Coefficients `b_0 .. b_{n-1}` from `b_0 = y`, `b_1 = y'`.
    pub fn new(eq: &SmirnovEquation, center: Complex64, y: Complex64, dy: Complex64, n: usize) -> Result<Self> {
        let lc = LocalCoeffs::at(eq, center);
        if lc.p0.norm() == 0.0 {
            return Err(Error::Pole {
                z: center,
                puncture: center,
            });
        }
        let n = n.max(2);
        let mut b = Vec::with_capacity(n);
        b.push(y);
        b.push(dy);
        for m in 0..n - 2 {
            let mf = m as f64;
            let bm1 = if m >= 1 { b[m - 1] } else { Complex64::new(0.0, 0.0) };
            // p_3 = q_1 = 1
            let num = (mf + 1.0) * (mf + 1.0) * lc.p1 * b[m + 1]
                + ((mf + 1.0) * mf * lc.p2 + lc.q0) * b[m]
                + ((mf + 1.0) * (mf - 1.0) + 1.0) * bm1;
            let next = -num / ((mf + 1.0) * (mf + 2.0) * lc.p0);
            if !next.is_finite() {
                return Err(Error::Overflow { order: m + 2 });
            }
            b.push(next);
        }
        Ok(Self { center, coeffs: b })
    }

    /// Number of terms needed so that the tail at `|z - center| = rho` is
    /// below `TAIL_TOL`, given the convergence radius `radius`.
    pub fn terms_for_ratio(ratio: f64) -> usize {
        let ratio = ratio.clamp(1e-3, 0.95);
        let n = (TAIL_TOL.ln() / ratio.ln()).ceil() as usize + 8;
        n.clamp(12, MAX_TERMS)
    }

    pub fn eval(&self, z: Complex64) -> Jet {
        let t = z - self.center;
        let mut y = Complex64::new(0.0, 0.0);
        let mut dy = Complex64::new(0.0, 0.0);
        let mut d2y = Complex64::new(0.0, 0.0);
        for (n, b) in self.coeffs.iter().enumerate().rev() {
            let nf = n as f64;
            y = y * t + b;
            if n >= 1 {
                dy = dy * t + nf * b;
            }
            if n >= 2 {
                d2y = d2y * t + nf * (nf - 1.0) * b;
            }
        }
        Jet { y, dy, d2y }
    }
}

/// Transport of the data `(y, y')` of several solutions along a straight
/// segment, with steps capped at `ratio` times the distance to the nearest
/// puncture.
pub fn transport_segment(
    eq: &SmirnovEquation,
    from: Complex64,
    to: Complex64,
    states: &mut [(Complex64, Complex64)],
    ratio: f64,
) -> Result<()> {
    let mut z = from;
    let total = (to - from).norm();
    if total == 0.0 {
        return Ok(());
    }
    let dir = (to - from) / total;
    let mut travelled = 0.0;
    let mut guard = 0usize;
    while travelled < total {
        let clearance = eq.clearance(z);
        if clearance < 1e-12 {
            return Err(Error::StepCollapse {
                waypoint: z,
                clearance,
            });
        }
        let h = (ratio * clearance).min(total - travelled);
        let next = if h >= total - travelled { to } else { z + dir * h };
        let n = TaylorSeries::terms_for_ratio(h / clearance);
        for s in states.iter_mut() {
            let series = TaylorSeries::new(eq, z, s.0, s.1, n).map_err(|e| match e {
                Error::Overflow { .. } => Error::StepCollapse {
                    waypoint: z,
                    clearance,
                },
                other => other,
            })?;
            let jet = series.eval(next);
            *s = (jet.y, jet.dy);
        }
        travelled += h;
        z = next;
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::StepCollapse {
                waypoint: z,
                clearance,
            });
        }
    }
    Ok(())
}

/// Double-double counterpart of [`transport_segment`], for transports whose
/// later products cancel large entries.
pub fn transport_segment_dd(
    eq: &SmirnovEquation,
    from: Complex64,
    to: Complex64,
    states: &mut [(CDd, CDd)],
    ratio: f64,
) -> Result<()> {
    let total = (to - from).norm();
    if total == 0.0 {
        return Ok(());
    }
    let dir = (to - from) / total;
    let a = Dd::new(eq.a());
    let one_plus_a = Dd::ONE + a;
    let lambda = CDd::from(eq.lambda());
    let mut z = from;
    let mut travelled = 0.0;
    while travelled < total {
        let clearance = eq.clearance(z);
        if clearance < 1e-12 {
            return Err(Error::StepCollapse {
                waypoint: z,
                clearance,
            });
        }
        let h = (ratio * clearance).min(total - travelled);
        let next = if h >= total - travelled { to } else { z + dir * h };
        let rho = (h / clearance).clamp(1e-3, 0.95);
        let n = ((DD_TAIL_TOL.ln() / rho.ln()).ceil() as usize + 8).clamp(16, 2 * MAX_TERMS);
        let c = CDd::from(z);
        let t = CDd::from(next) - c;
        let p0 = c * (c - CDd::new(a, Dd::ZERO)) * (c - CDd::ONE);
        let p1 = (c * c).scale(3.0) - c * CDd::new(one_plus_a, Dd::ZERO).scale(2.0) + CDd::new(a, Dd::ZERO);
        let p2 = c.scale(3.0) - CDd::new(one_plus_a, Dd::ZERO);
        let q0 = c + lambda;
        for s in states.iter_mut() {
            let mut b = Vec::with_capacity(n);
            b.push(s.0);
            b.push(s.1);
            for m in 0..n - 2 {
                let mf = m as f64;
                let bm1 = if m >= 1 { b[m - 1] } else { CDd::ZERO };
                let num = (p1 * b[m + 1]).scale((mf + 1.0) * (mf + 1.0))
                    + (p2.scale((mf + 1.0) * mf) + q0) * b[m]
                    + bm1.scale((mf + 1.0) * (mf - 1.0) + 1.0);
                let next_b = -(num / p0.scale((mf + 1.0) * (mf + 2.0)));
                if !next_b.to_c64().is_finite() {
                    return Err(Error::StepCollapse {
                        waypoint: z,
                        clearance,
                    });
                }
                b.push(next_b);
            }
            let mut y = CDd::ZERO;
            let mut dy = CDd::ZERO;
            for (k, bk) in b.iter().enumerate().rev() {
                y = y * t + *bk;
                if k >= 1 {
                    dy = dy * t + bk.scale(k as f64);
                }
            }
            *s = (y, dy);
        }
        travelled += h;
        z = next;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn series_satisfies_ode() {
        let eq = SmirnovEquation::new(0.35, 2.5).unwrap();
        let center = c(0.4, 0.6);
        let s = TaylorSeries::new(&eq, center, c(1.0, 0.5), c(-0.3, 2.0), 80).unwrap();
        let z = center + c(0.1, -0.05);
        let j = s.eval(z);
        // (p y')' + (z + lambda) y = p y'' + p' y' + (z + lambda) y
        let res = eq.p(z) * j.d2y + eq.dp(z) * j.dy + (z + eq.lambda()) * j.y;
        assert!(res.norm() < 1e-13, "{res}");
    }

    #[test]
    fn closed_loop_without_punctures_is_identity() {
        let eq = SmirnovEquation::new(0.5, -0.2).unwrap();
        let pts = [c(2.0, 1.0), c(3.0, 1.0), c(3.0, 2.0), c(2.0, 2.0), c(2.0, 1.0)];
        let mut states = [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0))];
        for w in pts.windows(2) {
            transport_segment(&eq, w[0], w[1], &mut states, 0.5).unwrap();
        }
        assert!((states[0].0 - 1.0).norm() < 1e-12);
        assert!(states[0].1.norm() < 1e-12);
        assert!(states[1].0.norm() < 1e-12);
        assert!((states[1].1 - 1.0).norm() < 1e-12);
    }

    #[test]
    fn step_collapse_at_puncture() {
        let eq = SmirnovEquation::new(0.5, 0.0).unwrap();
        let mut states = [(c(1.0, 0.0), c(0.0, 0.0))];
        let err = transport_segment(&eq, c(-0.5, 0.0), c(0.5, 0.0), &mut states, 0.5);
        assert!(matches!(err, Err(Error::StepCollapse { .. })));
    }
}
