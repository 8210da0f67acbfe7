//! Genus-zero Fuchsian equation `u'' + r(z) u / 2 = 0` and its self-adjoint
//! normal form `(p y')' + (z + lambda) y = 0` for the punctures `{0, a, 1, oo}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for [`validate_constraints`].
pub const DEFAULT_CONSTRAINT_TOL: f64 = 1e-10;

/// Finite punctures `z_1, ..., z_{n-1}` of a sphere whose last puncture is `oo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturedSphere {
    punctures: Vec<Complex64>,
}

impl PuncturedSphere {
    pub fn new(punctures: Vec<Complex64>) -> Result<Self> {
        if punctures.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least two finite punctures, got {}",
                punctures.len()
            )));
        }
        for (i, zi) in punctures.iter().enumerate() {
            if !zi.is_finite() {
                return Err(Error::Domain(format!("puncture {i} is not finite")));
            }
            for zj in &punctures[..i] {
                if (zi - zj).norm() <= f64::EPSILON * (1.0 + zi.norm()) {
                    return Err(Error::Domain(format!("punctures coincide at {zi}")));
                }
            }
        }
        Ok(Self { punctures })
    }

    /// The four-punctured sphere `{0, a, 1, oo}`.
    pub fn smirnov(a: f64) -> Result<Self> {
        check_modulus(a)?;
        Self::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(a, 0.0),
            Complex64::new(1.0, 0.0),
        ])
    }

    pub fn punctures(&self) -> &[Complex64] {
        &self.punctures
    }

    /// Puncture count including the point at infinity.
    pub fn n(&self) -> usize {
        self.punctures.len() + 1
    }
}

/// Accessory coefficients `c_i` paired with the finite punctures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessoryVector {
    pub c: Vec<Complex64>,
}

impl AccessoryVector {
    pub fn new(c: Vec<Complex64>) -> Self {
        Self { c }
    }

    pub fn from_real(c: &[f64]) -> Self {
        Self {
            c: c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// Residuals of the two linear constraints on the accessory coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub satisfied: bool,
    /// `|sum c_i|`
    pub sum_defect: f64,
    /// `|sum z_i c_i - (1 - n/2)|`
    pub moment_defect: f64,
}

pub(crate) fn check_modulus(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("modulus a = {a} must lie in (0, 1)")))
    }
}

/// Closed-form accessory coefficients `(c_1, c_2, c_3)` at `(0, a, 1)` for the
/// accessory parameter `lambda`.
pub fn accessory_from_lambda(a: f64, lambda: f64) -> Result<AccessoryVector> {
    check_modulus(a)?;
    let s = 1.0 + 2.0 * lambda;
    let c1 = 1.0 + s / a;
    let c2 = s / (a * (a - 1.0));
    let c3 = -(a + 2.0 * lambda) / (a - 1.0);
    Ok(AccessoryVector::from_real(&[c1, c2, c3]))
}

/// Checks `sum c_i = 0` and `sum z_i c_i = 1 - n/2` up to `tol` (relative to
/// the size of the data, floored at 1).
pub fn validate_constraints(s: &PuncturedSphere, c: &AccessoryVector, tol: f64) -> ConstraintReport {
    if c.c.len() != s.punctures.len() {
        return ConstraintReport {
            satisfied: false,
            sum_defect: f64::INFINITY,
            moment_defect: f64::INFINITY,
        };
    }
    let sum: Complex64 = c.c.iter().sum();
    let moment: Complex64 = s.punctures.iter().zip(&c.c).map(|(z, ci)| z * ci).sum();
    let target = 1.0 - s.n() as f64 / 2.0;
    let sum_defect = sum.norm();
    let moment_defect = (moment - target).norm();
    let scale_sum = c.c.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let scale_moment = s
        .punctures
        .iter()
        .zip(&c.c)
        .map(|(z, ci)| (z * ci).norm())
        .fold(1.0, f64::max);
    ConstraintReport {
        satisfied: sum_defect <= tol * scale_sum && moment_defect <= tol * scale_moment,
        sum_defect,
        moment_defect,
    }
}

/// `r(z) = sum_i [ 1/(2 (z - z_i)^2) + c_i/(z - z_i) ]`.
pub fn coefficient_r(z: Complex64, s: &PuncturedSphere, c: &AccessoryVector) -> Result<Complex64> {
    let mut r = Complex64::new(0.0, 0.0);
    for (zi, ci) in s.punctures.iter().zip(&c.c) {
        let d = z - zi;
        if d.norm() <= f64::EPSILON * (1.0 + zi.norm()) {
            return Err(Error::Pole { z, puncture: *zi });
        }
        let inv = d.inv();
        r += 0.5 * inv * inv + ci * inv;
    }
    Ok(r)
}

/// The Smirnov equation `(p y')' + (z + lambda) y = 0`, `p(z) = z (z - a)(z - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmirnovEquation {
    a: f64,
    lambda: f64,
}

impl SmirnovEquation {
    pub fn new(a: f64, lambda: f64) -> Result<Self> {
        check_modulus(a)?;
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} is not finite")));
        }
        Ok(Self { a, lambda })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { a: self.a, lambda }
    }

    /// Finite roots of `p`, in increasing order.
    pub fn roots(&self) -> [f64; 3] {
        [0.0, self.a, 1.0]
    }

    /// Coefficients of `p(z) = z^3 + c2 z^2 + c1 z` as `[0, c1, c2, 1]`.
    pub fn p_coeffs(&self) -> [f64; 4] {
        [0.0, self.a, -(1.0 + self.a), 1.0]
    }

    pub fn p(&self, z: Complex64) -> Complex64 {
        z * (z - self.a) * (z - 1.0)
    }

    pub fn dp(&self, z: Complex64) -> Complex64 {
        3.0 * z * z - 2.0 * (1.0 + self.a) * z + self.a
    }

    pub fn d2p(&self, z: Complex64) -> Complex64 {
        6.0 * z - 2.0 * (1.0 + self.a)
    }

    pub fn sphere(&self) -> PuncturedSphere {
        PuncturedSphere::smirnov(self.a).expect("modulus validated on construction")
    }

    pub fn accessory(&self) -> AccessoryVector {
        accessory_from_lambda(self.a, self.lambda).expect("modulus validated on construction")
    }

    /// `r(z)` of the normal form `u'' + r u / 2 = 0`.
    pub fn r(&self, z: Complex64) -> Result<Complex64> {
        coefficient_r(z, &self.sphere(), &self.accessory())
    }

    /// Distance from `z` to the nearest finite puncture.
    pub fn clearance(&self, z: Complex64) -> f64 {
        self.roots()
            .iter()
            .map(|&x| (z - x).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Branch of `sqrt(p)` with cuts along `[0, a]` and `[1, oo)`.
    pub fn sqrt_p(&self, z: Complex64) -> Result<Complex64> {
        if self.clearance(z) == 0.0 {
            return Err(Error::Branch(z));
        }
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        Ok(z * (one - self.a / z).sqrt() * i * (one - z).sqrt())
    }

    /// `p'/(2p)`, the logarithmic derivative of `sqrt(p)`.
    pub fn half_log_derivative(&self, z: Complex64) -> Complex64 {
        0.5 * self.dp(z) / self.p(z)
    }

    /// `(u, u')` to `(y, y')` with `u = sqrt(p) y`.
    pub fn y_from_u(&self, z: Complex64, u: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
        let s = self.sqrt_p(z)?;
        Ok(y_from_u_with(s, self.half_log_derivative(z), u))
    }

    /// `(y, y')` to `(u, u')` with `u = sqrt(p) y`.
    pub fn u_from_y(&self, z: Complex64, y: (Complex64, Complex64)) -> Result<(Complex64, Complex64)> {
        let s = self.sqrt_p(z)?;
        Ok(u_from_y_with(s, self.half_log_derivative(z), y))
    }
}

pub(crate) fn u_from_y_with(
    sqrt_p: Complex64,
    h: Complex64,
    (y, dy): (Complex64, Complex64),
) -> (Complex64, Complex64) {
    (sqrt_p * y, sqrt_p * (dy + h * y))
}

pub(crate) fn y_from_u_with(
    sqrt_p: Complex64,
    h: Complex64,
    (u, du): (Complex64, Complex64),
) -> (Complex64, Complex64) {
    let y = u / sqrt_p;
    (y, du / sqrt_p - h * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms_at_half() {
        let v = accessory_from_lambda(0.5, 0.0).unwrap();
        assert_eq!(v.c, vec![c(3.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)]);
        let v = accessory_from_lambda(0.5, -0.5).unwrap();
        assert_eq!(v.c[1], c(0.0, 0.0));
    }

    #[test]
    fn modulus_out_of_range() {
        assert!(matches!(accessory_from_lambda(1.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(accessory_from_lambda(0.0, 0.0), Err(Error::Domain(_))));
        assert!(SmirnovEquation::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn perturbed_vector_fails_validation() {
        let s = PuncturedSphere::smirnov(0.5).unwrap();
        let ok = validate_constraints(&s, &AccessoryVector::from_real(&[3.0, -4.0, 1.0]), DEFAULT_CONSTRAINT_TOL);
        assert!(ok.satisfied);
        assert_eq!(ok.moment_defect, 0.0);
        let bad = validate_constraints(
            &s,
            &AccessoryVector::from_real(&[3.0 + 1e-3, -4.0, 1.0]),
            DEFAULT_CONSTRAINT_TOL,
        );
        assert!(!bad.satisfied);
        assert!((bad.sum_defect - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let s = PuncturedSphere::smirnov(0.5).unwrap();
        let r = validate_constraints(&s, &AccessoryVector::from_real(&[1.0, -1.0]), 1.0);
        assert!(!r.satisfied);
    }

    #[test]
    fn duplicate_punctures_rejected() {
        assert!(PuncturedSphere::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn r_golden_value() {
        // 1/8 + 3/2 + 2/9 - 8/3 + 1/2 + 1 = 49/72, and the same value from
        // 2(z + lambda)/p - p''/p + p'^2/(2 p^2) with p = 3, p' = 13/2, p'' = 9.
        let eq = SmirnovEquation::new(0.5, 0.0).unwrap();
        let r = eq.r(c(2.0, 0.0)).unwrap();
        assert!((r - c(49.0 / 72.0, 0.0)).norm() < 1e-15);
        let from_p = 2.0 * 2.0 / 3.0 - 9.0 / 3.0 + 6.5 * 6.5 / 18.0;
        assert!((r.re - from_p).abs() < 1e-15);
    }

    #[test]
    fn r_pole_error() {
        let eq = SmirnovEquation::new(0.3, 0.1).unwrap();
        assert!(matches!(eq.r(c(0.3, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn r_double_poles_and_infinity() {
        let eq = SmirnovEquation::new(0.37, -0.8).unwrap();
        for zi in eq.roots() {
            let d = c(1e-7, 1e-7);
            let v = eq.r(c(zi, 0.0) + d).unwrap() * d * d;
            assert!((v - 0.5).norm() < 1e-5, "{v}");
        }
        let z = c(1e6, 0.0);
        let v = eq.r(z).unwrap() * z * z;
        assert!((v - 0.5).norm() < 1e-5);
    }

    #[test]
    fn dp_at_roots() {
        let eq = SmirnovEquation::new(0.3, 0.0).unwrap();
        assert!((eq.dp(c(0.3, 0.0)) - c(0.3 * (0.3 - 1.0), 0.0)).norm() < 1e-15);
        assert!((eq.dp(c(0.0, 0.0)) - c(0.3, 0.0)).norm() < 1e-15);
        assert!((eq.dp(c(1.0, 0.0)) - c(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_p_squares_to_p() {
        let eq = SmirnovEquation::new(0.4, 0.0).unwrap();
        for z in [c(0.2, 0.3), c(-1.0, -2.0), c(3.0, 0.1), c(0.7, -0.01)] {
            let s = eq.sqrt_p(z).unwrap();
            assert!((s * s - eq.p(z)).norm() < 1e-14 * (1.0 + eq.p(z).norm()));
        }
        assert!(matches!(eq.sqrt_p(c(0.4, 0.0)), Err(Error::Branch(_))));
    }

    #[test]
    fn sqrt_p_continuous_off_cuts() {
        // Crossing the real axis inside (a, 1) and (-oo, 0) must be continuous.
        let eq = SmirnovEquation::new(0.4, 0.0).unwrap();
        for x in [0.7, -0.5, -3.0] {
            let up = eq.sqrt_p(c(x, 1e-9)).unwrap();
            let dn = eq.sqrt_p(c(x, -1e-9)).unwrap();
            assert!((up - dn).norm() < 1e-6, "x = {x}: {up} vs {dn}");
        }
        let up = eq.sqrt_p(c(0.2, 1e-9)).unwrap();
        let dn = eq.sqrt_p(c(0.2, -1e-9)).unwrap();
        assert!((up + dn).norm() < 1e-6);
    }

    #[test]
    fn symmetry_under_reflection_at_half() {
        let lambda = 0.37;
        let e1 = SmirnovEquation::new(0.5, lambda).unwrap();
        let e2 = SmirnovEquation::new(0.5, -1.0 - lambda).unwrap();
        for z in [c(0.2, 0.3), c(2.0, -1.0), c(-0.4, 0.05)] {
            let lhs = e1.r(z).unwrap();
            let rhs = e2.r(c(1.0, 0.0) - z).unwrap();
            assert!((lhs - rhs).norm() < 1e-13 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn transfer_round_trip() {
        let eq = SmirnovEquation::new(0.3, 1.5).unwrap();
        let z = c(0.4, 0.7);
        let u = (c(0.3, -1.2), c(2.0, 0.5));
        let y = eq.y_from_u(z, u).unwrap();
        let back = eq.u_from_y(z, y).unwrap();
        assert!((back.0 - u.0).norm() < 1e-14);
        assert!((back.1 - u.1).norm() < 1e-14);
    }
}
