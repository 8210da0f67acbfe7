//! Monodromy of the self-adjoint equation around `0, a, 1, oo`, its realness
//! defect, and conjugation into `SL(2, R)`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equation::SmirnovEquation;
use crate::error::{Error, Result};
use crate::frobenius::SingularPoint;
use crate::dd::{mat_det, mat_mul, CDd, Mat2Dd};
use crate::path::{transport, Path, STEP_RATIO};
use crate::taylor::transport_segment_dd;

pub type Mat2 = Matrix2<Complex64>;

/// Circle radius as a fraction of the distance to the nearest other puncture.
pub const LOOP_RADIUS_FRACTION: f64 = 0.3;
const LOOP_VERTICES: usize = 96;

pub fn default_base_point() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Monodromy matrices in a basis with unit `p`-Wronskian at the base point.
///
/// Matrices act on coefficient columns: continuing `Y c` along a loop gives
/// `Y (M c)`. With loops based in the upper half plane, the relation is
/// `M_inf M_1 M_a M_0 = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyRep {
    pub a: f64,
    pub lambda: f64,
    pub base_point: Complex64,
    /// Ordered as `[M_0, M_a, M_1, M_inf]`.
    pub matrices: [Mat2; 4],
    /// The same matrices in double-double, when computed by transport.
    precise: Option<[Mat2Dd; 4]>,
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard loop around `point` based at `base`.
pub fn standard_loop(eq: &SmirnovEquation, point: SingularPoint, base: Complex64) -> Result<Path> {
    if base.im == 0.0 {
        return Err(Error::Domain("base point must lie off the real axis".into()));
    }
    let a = eq.a();
    match point.location(a) {
        Some(zi) => {
            let rho = LOOP_RADIUS_FRACTION * point.convergence_radius(a);
            let side = base.im.signum();
            let touch = c(zi, side * rho);
            let start_angle = side * 0.5 * PI;
            let spoke = Path::line(base, touch);
            let circle = Path::circle(c(zi, 0.0), rho, start_angle, true, LOOP_VERTICES);
            Ok(spoke.then(&circle).then(&Path::line(touch, base)))
        }
        None => {
            let radius = (2.0 * base.norm()).max(3.0);
            let dir = base / base.norm();
            let touch = dir * radius;
            let spoke = Path::line(base, touch);
            // counterclockwise around infinity is clockwise in the z-plane
            let circle = Path::circle(c(0.0, 0.0), radius, dir.arg(), false, 2 * LOOP_VERTICES);
            Ok(spoke.then(&circle).then(&Path::line(touch, base)))
        }
    }
}

/// Transport matrix of `(y, y')` data along `path`.
pub fn transport_matrix(eq: &SmirnovEquation, path: &Path) -> Result<Mat2> {
    let out = transport(eq, path, &[(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0))])?;
    Ok(Mat2::new(out[0].0, out[1].0, out[0].1, out[1].1))
}

fn transport_matrix_dd(eq: &SmirnovEquation, path: &Path) -> Result<Mat2Dd> {
    if path.clearance(eq) <= 0.0 {
        return Err(Error::StepCollapse {
            waypoint: path.start(),
            clearance: 0.0,
        });
    }
    let mut s = [(CDd::ONE, CDd::ZERO), (CDd::ZERO, CDd::ONE)];
    for w in path.waypoints().windows(2) {
        transport_segment_dd(eq, w[0], w[1], &mut s, STEP_RATIO)?;
    }
    Ok([[s[0].0, s[1].0], [s[0].1, s[1].1]])
}

fn to_mat2(m: &Mat2Dd) -> Mat2 {
    Mat2::new(m[0][0].to_c64(), m[0][1].to_c64(), m[1][0].to_c64(), m[1][1].to_c64())
}

/// Data matrix (columns `(y, y')`) of the unit-Wronskian basis at `base`.
pub fn normalized_frame(eq: &SmirnovEquation, base: Complex64) -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), eq.p(base).inv())
}

pub fn monodromy_rep(eq: &SmirnovEquation, base_point: Complex64) -> Result<MonodromyRep> {
    let pb = CDd::from(eq.p(base_point));
    let loops = SingularPoint::ALL
        .iter()
        .map(|point| standard_loop(eq, *point, base_point))
        .collect::<Result<Vec<_>>>()?;
    let transports = loops
        .par_iter()
        .map(|lp| transport_matrix_dd(eq, lp))
        .collect::<Result<Vec<_>>>()?;
    let mut precise = [[[CDd::ZERO; 2]; 2]; 4];
    for (k, t) in transports.iter().enumerate() {
        // conjugate by the unit-Wronskian frame diag(1, 1/p(base))
        let mut m = [[t[0][0], t[0][1] / pb], [t[1][0] * pb, t[1][1]]];
        if (m[0][0] + m[1][1]).re.to_f64() < 0.0 {
            m = m.map(|row| row.map(|x| -x));
        }
        precise[k] = m;
    }
    Ok(MonodromyRep {
        a: eq.a(),
        lambda: eq.lambda(),
        base_point,
        matrices: precise.map(|m| to_mat2(&m)),
        precise: Some(precise),
    })
}

fn det(m: &Mat2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

impl MonodromyRep {
    /// A representation from given matrices ordered `[M_0, M_a, M_1, M_inf]`.
    pub fn from_matrices(a: f64, lambda: f64, base_point: Complex64, matrices: [Mat2; 4]) -> Self {
        Self {
            a,
            lambda,
            base_point,
            matrices,
            precise: None,
        }
    }

    pub fn matrix(&self, point: SingularPoint) -> &Mat2 {
        let k = SingularPoint::ALL.iter().position(|p| *p == point).expect("known point");
        &self.matrices[k]
    }

    pub fn traces(&self) -> [Complex64; 4] {
        self.matrices.map(|m| m.trace())
    }

    pub fn determinants(&self) -> [Complex64; 4] {
        match &self.precise {
            Some(p) => p.map(|m| mat_det(&m).to_c64()),
            None => self.matrices.map(|m| det(&m)),
        }
    }

    pub fn max_det_defect(&self) -> f64 {
        self.determinants().iter().map(|d| (d - 1.0).norm()).fold(0.0, f64::max)
    }

    /// `max | |tr M| - 2 |` over the generators.
    pub fn max_parabolic_defect(&self) -> f64 {
        self.traces().iter().map(|t| (t.norm() - 2.0).abs()).fold(0.0, f64::max)
    }

    /// `M_inf M_1 M_a M_0`.
    pub fn product(&self) -> Mat2 {
        let [m0, ma, m1, minf] = &self.matrices;
        minf * m1 * ma * m0
    }

    /// Distance of the ordered product from `+I` or `-I`, whichever is closer.
    pub fn product_defect(&self) -> f64 {
        let p = match &self.precise {
            Some([m0, ma, m1, minf]) => {
                let mut p = mat_mul(&mat_mul(&mat_mul(minf, m1), ma), m0);
                let sign = if p[0][0].re.to_f64() >= 0.0 { 1.0 } else { -1.0 };
                p[0][0] = p[0][0] - CDd::from(sign);
                p[1][1] = p[1][1] - CDd::from(sign);
                return p
                    .iter()
                    .flatten()
                    .map(|x| x.to_c64().norm())
                    .fold(0.0, f64::max);
            }
            None => self.product(),
        };
        max_abs(&(p - Mat2::identity())).min(max_abs(&(p + Mat2::identity())))
    }

    /// Words used by [`realness_defect`]: generators and all ordered products
    /// of two generators.
    pub fn trace_words(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.traces().to_vec();
        match &self.precise {
            Some(p) => {
                for x in p {
                    for y in p {
                        let m = mat_mul(x, y);
                        out.push((m[0][0] + m[1][1]).to_c64());
                    }
                }
            }
            None => {
                for x in &self.matrices {
                    for y in &self.matrices {
                        out.push((x * y).trace());
                    }
                }
            }
        }
        out
    }

    pub fn conjugated(&self, q: &Mat2) -> Result<MonodromyRep> {
        let qi = q
            .try_inverse()
            .ok_or_else(|| Error::ConjugationFailure("conjugator is singular".into()))?;
        Ok(MonodromyRep {
            a: self.a,
            lambda: self.lambda,
            base_point: self.base_point,
            matrices: self.matrices.map(|m| q * m * qi),
            precise: None,
        })
    }

    pub fn max_imaginary_entry(&self) -> f64 {
        self.matrices
            .iter()
            .flat_map(|m| m.iter().map(|x| x.im.abs()))
            .fold(0.0, f64::max)
    }
}

/// Max `|Im tr w|` over the trace words; zero exactly when the character is real.
pub fn realness_defect(rep: &MonodromyRep) -> f64 {
    rep.trace_words().iter().map(|t| t.im.abs()).fold(0.0, f64::max)
}

/// Fixed vector of a parabolic matrix (eigenvector for eigenvalue `tr/2`).
fn parabolic_eigenvector(m: &Mat2) -> nalgebra::Vector2<Complex64> {
    let half = m.trace() * 0.5;
    let v1 = nalgebra::Vector2::new(m[(0, 1)], half - m[(0, 0)]);
    let v2 = nalgebra::Vector2::new(half - m[(1, 1)], m[(1, 0)]);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    v / Complex64::new(v.norm(), 0.0)
}

/// Tolerance on the realness defect required by [`conjugate_to_real`].
pub const CONJUGATION_TOL: f64 = 1e-6;

/// A unit-determinant `Q` with `Q M Q^{-1}` real for every generator, built from
/// the fixed vectors of two parabolic generators.
pub fn conjugate_to_real(rep: &MonodromyRep) -> Result<(Mat2, MonodromyRep)> {
    let defect = realness_defect(rep);
    if defect > CONJUGATION_TOL {
        return Err(Error::ConjugationFailure(format!(
            "realness defect {defect:.3e} exceeds {CONJUGATION_TOL:.0e}"
        )));
    }
    if rep.max_imaginary_entry() <= CONJUGATION_TOL {
        return Ok((Mat2::identity(), rep.clone()));
    }
    let vecs: Vec<_> = rep.matrices.iter().map(parabolic_eigenvector).collect();
    let mut best = (0, 1, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let d = (vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, sep) = best;
    if sep < 1e-8 {
        return Err(Error::ConjugationFailure(
            "parabolic fixed points coincide; representation is reducible".into(),
        ));
    }
    let p = Mat2::new(vecs[i][0], vecs[j][0], vecs[i][1], vecs[j][1]);
    let pinv = p
        .try_inverse()
        .ok_or_else(|| Error::ConjugationFailure("fixed-point frame is singular".into()))?;
    let q0 = pinv / det(&pinv).sqrt();
    let q0i = q0.try_inverse().expect("unit determinant");
    let upper = q0 * rep.matrices[i] * q0i;
    let x = upper[(0, 1)];
    if x.norm() == 0.0 {
        return Err(Error::ConjugationFailure("degenerate parabolic generator".into()));
    }
    // diag(s, 1/s) rotates x onto the positive real axis
    let s2 = Complex64::new(x.norm(), 0.0) / x;
    let s = s2.sqrt();
    let scale = Mat2::new(s, c(0.0, 0.0), c(0.0, 0.0), s.inv());
    let q = scale * q0;
    let real = rep.conjugated(&q)?;
    let residual = real.max_imaginary_entry();
    if residual > CONJUGATION_TOL {
        return Err(Error::ConjugationFailure(format!(
            "imaginary residue {residual:.3e} after conjugation"
        )));
    }
    Ok((q, real))
}

fn entries(m: &Mat2) -> [[[f64; 2]; 2]; 2] {
    let e = |i, j| {
        let x: Complex64 = m[(i, j)];
        [x.re, x.im]
    };
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub point: String,
    /// Rows of `[re, im]` pairs.
    pub matrix: [[[f64; 2]; 2]; 2],
    pub trace: [f64; 2],
    pub det: [f64; 2],
}

/// Serializable summary of a representation and its realness certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub a: f64,
    pub lambda: f64,
    pub base_point: [f64; 2],
    pub order: String,
    pub generators: Vec<GeneratorRecord>,
    pub max_det_defect: f64,
    pub max_parabolic_defect: f64,
    pub product_defect: f64,
    pub realness_defect: f64,
    pub conjugator: Option<[[[f64; 2]; 2]; 2]>,
    pub real_generators: Option<Vec<[[f64; 2]; 2]>>,
    pub conjugation_error: Option<String>,
}

pub fn report(rep: &MonodromyRep) -> MonodromyReport {
    let generators = SingularPoint::ALL
        .iter()
        .zip(&rep.matrices)
        .map(|(p, m)| {
            let t = m.trace();
            let d = det(m);
            GeneratorRecord {
                point: p.name().to_string(),
                matrix: entries(m),
                trace: [t.re, t.im],
                det: [d.re, d.im],
            }
        })
        .collect();
    let (conjugator, real_generators, conjugation_error) = match conjugate_to_real(rep) {
        Ok((q, real)) => (
            Some(entries(&q)),
            Some(
                real.matrices
                    .iter()
                    .map(|m| [[m[(0, 0)].re, m[(0, 1)].re], [m[(1, 0)].re, m[(1, 1)].re]])
                    .collect(),
            ),
            None,
        ),
        Err(e) => (None, None, Some(e.to_string())),
    };
    MonodromyReport {
        a: rep.a,
        lambda: rep.lambda,
        base_point: [rep.base_point.re, rep.base_point.im],
        order: "M_inf M_1 M_a M_0".into(),
        generators,
        max_det_defect: rep.max_det_defect(),
        max_parabolic_defect: rep.max_parabolic_defect(),
        product_defect: rep.product_defect(),
        realness_defect: realness_defect(rep),
        conjugator,
        real_generators,
        conjugation_error,
    }
}
