//! Polyline paths in the punctured plane and transport of solution data along them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::equation::{u_from_y_with, y_from_u_with, SmirnovEquation};
use crate::error::{Error, Result};
use crate::taylor::transport_segment;

/// Step length as a fraction of the distance to the nearest puncture.
pub const STEP_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    waypoints: Vec<Complex64>,
}

impl Path {
    pub fn new(waypoints: Vec<Complex64>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Domain("a path needs at least two waypoints".into()));
        }
        if waypoints.iter().any(|z| !z.is_finite()) {
            return Err(Error::Domain("non-finite waypoint".into()));
        }
        Ok(Self { waypoints })
    }

    pub fn line(from: Complex64, to: Complex64) -> Self {
        Self {
            waypoints: vec![from, to],
        }
    }

    /// Closed polygonal circle starting and ending at `center + radius e^{i start}`.
    pub fn circle(center: Complex64, radius: f64, start: f64, counterclockwise: bool, vertices: usize) -> Self {
        let n = vertices.max(8);
        let sign = if counterclockwise { 1.0 } else { -1.0 };
        let waypoints = (0..=n)
            .map(|k| {
                let th = start + sign * 2.0 * PI * k as f64 / n as f64;
                center + Complex64::from_polar(radius, th)
            })
            .collect();
        Self { waypoints }
    }

    pub fn waypoints(&self) -> &[Complex64] {
        &self.waypoints
    }

    pub fn start(&self) -> Complex64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.waypoints.last().expect("non-empty path")
    }

    pub fn then(mut self, other: &Path) -> Self {
        let skip = usize::from(self.end() == other.start());
        self.waypoints.extend_from_slice(&other.waypoints[skip..]);
        self
    }

    pub fn reversed(&self) -> Self {
        let mut w = self.waypoints.clone();
        w.reverse();
        Self { waypoints: w }
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-14 * (1.0 + self.start().norm())
    }

    /// Minimum distance from the path to the finite punctures.
    pub fn clearance(&self, eq: &SmirnovEquation) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.waypoints.windows(2) {
            for x in eq.roots() {
                best = best.min(segment_distance(w[0], w[1], Complex64::new(x, 0.0)));
            }
        }
        best
    }
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// Transports `(y, y')` data of several solutions of the self-adjoint equation
/// along `path`.
pub fn transport(
    eq: &SmirnovEquation,
    path: &Path,
    states: &[(Complex64, Complex64)],
) -> Result<Vec<(Complex64, Complex64)>> {
    let clearance = path.clearance(eq);
    if clearance <= 0.0 {
        let waypoint = path
            .waypoints
            .iter()
            .copied()
            .min_by(|x, y| eq.clearance(*x).total_cmp(&eq.clearance(*y)))
            .unwrap_or_default();
        return Err(Error::StepCollapse { waypoint, clearance });
    }
    let mut out = states.to_vec();
    for w in path.waypoints.windows(2) {
        transport_segment(eq, w[0], w[1], &mut out, STEP_RATIO)?;
    }
    Ok(out)
}

/// The branch of `sqrt(p)` at the end of `path` obtained by continuing
/// `start_value` (a square root of `p(path.start())`) along it.
pub fn continue_sqrt_p(eq: &SmirnovEquation, path: &Path, start_value: Complex64) -> Result<Complex64> {
    let mut s = start_value;
    for w in path.waypoints.windows(2) {
        let total = (w[1] - w[0]).norm();
        if total == 0.0 {
            continue;
        }
        let dir = (w[1] - w[0]) / total;
        let mut travelled = 0.0;
        let mut z = w[0];
        while travelled < total {
            let clearance = eq.clearance(z);
            if clearance < 1e-12 {
                return Err(Error::StepCollapse { waypoint: z, clearance });
            }
            let h = (0.25 * clearance).min(total - travelled);
            z = if h >= total - travelled { w[1] } else { z + dir * h };
            travelled += h;
            let cand = eq.sqrt_p(z)?;
            s = if (cand - s).norm() <= (cand + s).norm() { cand } else { -cand };
        }
    }
    Ok(s)
}

/// Continues a solution of `u'' + r u / 2 = 0` along `path`.
///
/// The starting data uses the principal branch of `sqrt(p)` at the start of
/// the path; the returned data is expressed with the continued branch, so
/// that the result is the genuine analytic continuation of `u`.
pub fn continue_solution(
    eq: &SmirnovEquation,
    path: &Path,
    init: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    let z0 = path.start();
    let z1 = path.end();
    let s0 = eq.sqrt_p(z0)?;
    let y0 = y_from_u_with(s0, eq.half_log_derivative(z0), init);
    let y1 = transport(eq, path, &[y0])?[0];
    let s1 = continue_sqrt_p(eq, path, s0)?;
    Ok(u_from_y_with(s1, eq.half_log_derivative(z1), y1))
}
