//! The three real spectral problems for the accessory parameter, solved by
//! shooting between Frobenius bases, and the interlacing of their spectra.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::{check_modulus, SmirnovEquation};
use crate::error::{Error, Result};
use crate::frobenius::{
    connection_coefficients, p_wronskian, real_continuation, LocalBasis, LogBranch, Side, SingularPoint,
    SolutionRepr,
};
use crate::path::STEP_RATIO;
use crate::taylor::transport_segment;

/// Anchor points sit at this fraction of the basis radius.
const ANCHOR_FRACTION: f64 = 0.8;
/// Samples per interval for zero counting.
const PROFILE_SAMPLES: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    /// Regular at `0` and `a`.
    P1,
    /// Regular at `a` and `1`.
    P2,
    /// Regular at `0`, real-continued through `a`, regular at `1`.
    P3,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemKind::P1 => "P1",
            ProblemKind::P2 => "P2",
            ProblemKind::P3 => "P3",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(ProblemKind::P1),
            "P2" | "2" => Ok(ProblemKind::P2),
            "P3" | "3" => Ok(ProblemKind::P3),
            _ => Err(Error::Domain(format!("unknown spectral problem {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralProblem {
    pub kind: ProblemKind,
    pub a: f64,
}

impl SpectralProblem {
    pub fn new(kind: ProblemKind, a: f64) -> Result<Self> {
        check_modulus(a)?;
        Ok(Self { kind, a })
    }
}

/// One eigenvalue. `mu_k` is `P1` with `k >= 1`, `mu_{-k}` is `P2` with
/// `k <= -1`, `lambda_k` is `P3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub problem: ProblemKind,
    pub a: f64,
    pub k: i32,
    #[serde(rename = "lambda")]
    pub value: f64,
    pub osc: usize,
    pub residual: f64,
}

impl Eigenvalue {
    pub fn label(&self) -> String {
        match self.problem {
            ProblemKind::P3 => format!("lambda_{}", self.k),
            _ => format!("mu_{}", self.k),
        }
    }

    /// Position in the chain `... mu_{-1} < lambda_0 < mu_1 < lambda_1 ...`.
    pub fn chain_rank(&self) -> i64 {
        let k = self.k as i64;
        match self.problem {
            ProblemKind::P3 => 2 * k,
            ProblemKind::P1 => 2 * k - 1,
            ProblemKind::P2 => 2 * k + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Scan step for bracketing.
    pub step: f64,
    /// Initial half-width of the scan window.
    pub window: f64,
    /// Half-width beyond which the scan gives up.
    pub max_window: f64,
    /// Bracket width at which bisection hands over to the secant polish.
    pub bisection_tol: f64,
    /// Final step size of the polish.
    pub tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            step: 0.05,
            window: 10.0,
            max_window: 5000.0,
            bisection_tol: 1e-6,
            tol: 1e-10,
        }
    }
}

/// Frobenius bases at the three finite points for one value of lambda.
struct Shooter {
    eq: SmirnovEquation,
    b0: LocalBasis,
    ba: LocalBasis,
    b1: LocalBasis,
}

type Data = (Complex64, Complex64);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Shooter {
    fn new(a: f64, lambda: f64) -> Result<Self> {
        let eq = SmirnovEquation::new(a, lambda)?;
        Ok(Self {
            b0: LocalBasis::new(&eq, SingularPoint::Zero)?,
            ba: LocalBasis::new(&eq, SingularPoint::A)?,
            b1: LocalBasis::new(&eq, SingularPoint::One)?,
            eq,
        })
    }

    fn a(&self) -> f64 {
        self.eq.a()
    }

    fn anchor(&self, basis: &LocalBasis, rightward: bool) -> f64 {
        let zi = basis.point.location(self.a()).expect("finite point");
        let d = ANCHOR_FRACTION * basis.radius;
        if rightward {
            zi + d
        } else {
            zi - d
        }
    }

    fn carry(&self, from: f64, to: f64, state: Data) -> Result<Data> {
        let mut s = [state];
        transport_segment(&self.eq, re(from), re(to), &mut s, STEP_RATIO)?;
        Ok(s[0])
    }

    /// Data of `repr` (expressed in `basis`) at `x`, carried from the anchor
    /// on the side of `x`.
    fn solution_at(&self, basis: &LocalBasis, repr: &SolutionRepr, x: f64) -> Result<Data> {
        let zi = basis.point.location(self.a()).expect("finite point");
        let rightward = x > zi;
        let anchor = self.anchor(basis, rightward);
        if (x - zi).abs() <= (anchor - zi).abs() {
            return basis.evaluate(repr, re(x));
        }
        let start = basis.evaluate(repr, re(anchor))?;
        self.carry(anchor, x, start)
    }

    fn holo(point: SingularPoint) -> SolutionRepr {
        SolutionRepr::holomorphic(point)
    }

    fn d1(&self) -> Result<Complex64> {
        let m = 0.5 * self.a();
        let f = self.solution_at(&self.b0, &Self::holo(SingularPoint::Zero), m)?;
        let g = self.solution_at(&self.ba, &Self::holo(SingularPoint::A), m)?;
        Ok(p_wronskian(&self.eq, f, g, re(m)))
    }

    fn d2(&self) -> Result<Complex64> {
        let m = 0.5 * (self.a() + 1.0);
        let f = self.solution_at(&self.ba, &Self::holo(SingularPoint::A), m)?;
        let g = self.solution_at(&self.b1, &Self::holo(SingularPoint::One), m)?;
        Ok(p_wronskian(&self.eq, f, g, re(m)))
    }

    /// `y_0^{(1)}` in the basis at `a` (left side) and its real continuation.
    fn through_a(&self) -> Result<(SolutionRepr, SolutionRepr)> {
        let xl = self.anchor(&self.ba, false);
        let f = self.solution_at(&self.b0, &Self::holo(SingularPoint::Zero), xl)?;
        let left = connection_coefficients(&self.eq, &self.ba, LogBranch::REFLECTED, re(xl), f)?;
        let left = SolutionRepr::new(
            left.point,
            re(left.alpha.re),
            re(left.beta.re),
            left.log_branch,
        );
        let right = real_continuation(&left, Side::LeftToRight)?;
        Ok((left, right))
    }

    /// Coefficients at `1` (real logarithm `log(1 - z)`) of the real
    /// continuation of `y_0^{(1)}`.
    fn at_one(&self, right: &SolutionRepr) -> Result<SolutionRepr> {
        let xr = self.anchor(&self.b1, false);
        let f = self.solution_at(&self.ba, right, xr)?;
        connection_coefficients(&self.eq, &self.b1, LogBranch::REFLECTED, re(xr), f)
    }

    fn d3(&self) -> Result<Complex64> {
        let (_, right) = self.through_a()?;
        Ok(self.at_one(&right)?.beta)
    }

    fn value(&self, kind: ProblemKind) -> Result<Complex64> {
        match kind {
            ProblemKind::P1 => self.d1(),
            ProblemKind::P2 => self.d2(),
            ProblemKind::P3 => self.d3(),
        }
    }

    /// Real samples of a solution across `(lo, hi)`: the left representation
    /// up to the midpoint, the right one (rescaled to match) beyond it.
    fn profile(
        &self,
        left: (&LocalBasis, &SolutionRepr),
        right: (&LocalBasis, &SolutionRepr),
        lo: f64,
        hi: f64,
        rescale: bool,
        n: usize,
    ) -> Result<Vec<(f64, f64, f64)>> {
        let mid = 0.5 * (lo + hi);
        let xs: Vec<f64> = (1..=n).map(|j| lo + (hi - lo) * j as f64 / (n + 1) as f64).collect();
        let left_part = self.march(left, xs.iter().copied().filter(|x| *x <= mid).collect())?;
        let right_xs: Vec<f64> = xs.iter().rev().copied().filter(|x| *x > mid).collect();
        let mut right_part = self.march(right, right_xs)?;
        right_part.reverse();
        if rescale {
            let fl = self.solution_at(left.0, left.1, mid)?;
            let fr = self.solution_at(right.0, right.1, mid)?;
            let s = if fr.0.norm() >= fr.1.norm() * (hi - lo) * 1e-3 {
                fl.0.re / fr.0.re
            } else {
                fl.1.re / fr.1.re
            };
            for v in right_part.iter_mut() {
                v.1 *= s;
                v.2 *= s;
            }
        }
        let mut out = left_part;
        out.extend(right_part);
        Ok(out)
    }

    /// Samples `(x, y, y')` at `xs`, ordered away from the basis point.
    fn march(&self, side: (&LocalBasis, &SolutionRepr), xs: Vec<f64>) -> Result<Vec<(f64, f64, f64)>> {
        let (basis, repr) = side;
        let zi = basis.point.location(self.a()).expect("finite point");
        let mut out = Vec::with_capacity(xs.len());
        let mut last: Option<(f64, Data)> = None;
        for x in xs {
            let rightward = x > zi;
            let anchor = self.anchor(basis, rightward);
            let data = if (x - zi).abs() <= (anchor - zi).abs() {
                basis.evaluate(repr, re(x))?
            } else {
                match last {
                    Some((x0, d0)) if (x0 - zi).abs() >= (anchor - zi).abs() => self.carry(x0, x, d0)?,
                    _ => {
                        let d0 = basis.evaluate(repr, re(anchor))?;
                        self.carry(anchor, x, d0)?
                    }
                }
            };
            last = Some((x, data));
            out.push((x, data.0.re, data.1.re));
        }
        Ok(out)
    }

    /// The eigenfunction candidate for `kind` sampled on its interval(s).
    fn eigen_profile(&self, kind: ProblemKind, n: usize) -> Result<Vec<Vec<(f64, f64, f64)>>> {
        let a = self.a();
        let h0 = Self::holo(SingularPoint::Zero);
        let ha = Self::holo(SingularPoint::A);
        let h1 = Self::holo(SingularPoint::One);
        match kind {
            ProblemKind::P1 => Ok(vec![self.profile((&self.b0, &h0), (&self.ba, &ha), 0.0, a, true, n)?]),
            ProblemKind::P2 => Ok(vec![self.profile((&self.ba, &ha), (&self.b1, &h1), a, 1.0, true, n)?]),
            ProblemKind::P3 => {
                let (left, right) = self.through_a()?;
                let first = self.profile((&self.b0, &h0), (&self.ba, &left), 0.0, a, false, n)?;
                let second = self.profile((&self.ba, &right), (&self.b1, &h1), a, 1.0, true, n)?;
                Ok(vec![first, second])
            }
        }
    }
}

/// Shooting determinant as computed, before discarding the (round-off)
/// imaginary part.
pub fn shooting_value(problem: &SpectralProblem, lambda: f64) -> Result<Complex64> {
    if !lambda.is_finite() {
        return Err(Error::Domain("lambda must be finite".into()));
    }
    Shooter::new(problem.a, lambda)?.value(problem.kind)
}

/// `D(lambda)`: vanishes exactly at the eigenvalues of `problem`.
///
/// * `P1`: `pW(y_0^{(1)}, y_a^{(1)})` at `a/2`.
/// * `P2`: `pW(y_a^{(1)}, y_1^{(1)})` at `(a+1)/2`.
/// * `P3`: the coefficient of `y_1^{(2)}` in the real continuation of `y_0^{(1)}`.
pub fn shooting_determinant(problem: &SpectralProblem, lambda: f64) -> Result<f64> {
    Ok(shooting_value(problem, lambda)?.re)
}

fn count_zeros(samples: &[(f64, f64, f64)]) -> usize {
    let mut count = 0;
    let scale = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    for w in samples.windows(2) {
        let (x0, y0, d0) = w[0];
        let (x1, y1, d1) = w[1];
        if y0 == 0.0 {
            continue;
        }
        if y0 * y1 < 0.0 || (y1 == 0.0) {
            count += 1;
        } else if d0 * d1 < 0.0 && y0.abs().min(y1.abs()) < 1e-3 * scale {
            // possible pair of close zeros between samples: check the cubic
            // Hermite interpolant on a fine grid
            let h = x1 - x0;
            let mut prev = y0;
            for j in 1..=64 {
                let t = j as f64 / 64.0;
                let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
                let h10 = t * t * t - 2.0 * t * t + t;
                let h01 = -2.0 * t * t * t + 3.0 * t * t;
                let h11 = t * t * t - t * t;
                let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
                if v * prev < 0.0 {
                    count += 1;
                }
                prev = v;
            }
        }
    }
    count
}

/// Number of interior zeros of the eigenfunction candidate at `lambda` on the
/// open interval(s) of `problem`.
pub fn oscillation_index(problem: &SpectralProblem, lambda: f64) -> Result<usize> {
    let sh = Shooter::new(problem.a, lambda)?;
    let parts = sh.eigen_profile(problem.kind, PROFILE_SAMPLES)?;
    Ok(parts.iter().map(|p| count_zeros(p)).sum())
}

/// Samples `(x, y)` of the eigenfunction candidate at `lambda`.
pub fn eigenfunction_samples(problem: &SpectralProblem, lambda: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let sh = Shooter::new(problem.a, lambda)?;
    let parts = sh.eigen_profile(problem.kind, n.max(4))?;
    Ok(parts.into_iter().flatten().map(|(x, y, _)| (x, y)).collect())
}

/// Sign changes of `D` on a uniform grid over `[lo, hi]`.
fn brackets(problem: &SpectralProblem, lo: f64, hi: f64, step: f64) -> Result<Vec<(f64, f64, f64, f64)>> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
    let ds: Vec<f64> = xs
        .par_iter()
        .map(|&x| shooting_determinant(problem, x))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for j in 0..n {
        if ds[j] == 0.0 {
            out.push((xs[j], xs[j], 0.0, 0.0));
        } else if ds[j] * ds[j + 1] < 0.0 {
            out.push((xs[j], xs[j + 1], ds[j], ds[j + 1]));
        }
    }
    Ok(out)
}

/// Bisection down to `bisection_tol`, then a safeguarded secant polish.
fn refine(problem: &SpectralProblem, bracket: (f64, f64, f64, f64), opts: &SpectrumOptions) -> Result<(f64, f64)> {
    let (mut lo, mut hi, mut dlo, mut dhi) = bracket;
    if lo == hi {
        return Ok((lo, 0.0));
    }
    while hi - lo > opts.bisection_tol {
        let mid = 0.5 * (lo + hi);
        let dm = shooting_determinant(problem, mid)?;
        if dm == 0.0 {
            return Ok((mid, 0.0));
        }
        if dm * dlo < 0.0 {
            hi = mid;
            dhi = dm;
        } else {
            lo = mid;
            dlo = dm;
        }
    }
    let (mut x0, mut f0, mut x1, mut f1) = (lo, dlo, hi, dhi);
    for _ in 0..60 {
        if f1 == f0 {
            break;
        }
        let mut x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2 > lo && x2 < hi) {
            x2 = 0.5 * (lo + hi);
        }
        let f2 = shooting_determinant(problem, x2)?;
        if f2 == 0.0 {
            return Ok((x2, 0.0));
        }
        if f2 * dlo < 0.0 {
            hi = x2;
        } else {
            lo = x2;
            dlo = f2;
        }
        let dx = (x2 - x1).abs();
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if dx <= opts.tol {
            return Ok((x1, f1.abs()));
        }
    }
    if hi - lo <= opts.tol {
        return Ok((x1, f1.abs()));
    }
    Err(Error::NonConvergence(format!(
        "{} root polish stalled in [{lo}, {hi}]",
        problem.kind
    )))
}

fn roots_in(problem: &SpectralProblem, lo: f64, hi: f64, opts: &SpectrumOptions) -> Result<Vec<(f64, f64)>> {
    let br = brackets(problem, lo, hi, opts.step)?;
    br.into_par_iter().map(|b| refine(problem, b, opts)).collect()
}

/// Roots of `D` for `P1` or `P2` indexed by oscillation count, from the
/// finite end of the spectrum up to `count` eigenvalues.
fn sturm_family(problem: &SpectralProblem, count: usize, opts: &SpectrumOptions) -> Result<Vec<Eigenvalue>> {
    let sign = if problem.kind == ProblemKind::P1 { 1.0 } else { -1.0 };
    let mut step_opts = *opts;
    for _ in 0..5 {
        let mut w = step_opts.window;
        let mut roots = roots_in(problem, -w, w, &step_opts)?;
        loop {
            roots.sort_by(|x, y| (sign * x.0).total_cmp(&(sign * y.0)));
            if roots.len() >= count || w >= step_opts.max_window {
                break;
            }
            let (lo, hi) = if sign > 0.0 { (w, 2.0 * w) } else { (-2.0 * w, -w) };
            roots.extend(roots_in(problem, lo, hi, &step_opts)?);
            w *= 2.0;
        }
        if roots.len() < count {
            return Err(Error::BracketNotFound {
                what: format!("{} eigenvalues beyond |lambda| = {w}", problem.kind),
            });
        }
        let mut out = Vec::with_capacity(count);
        let mut consistent = true;
        for (j, (value, residual)) in roots.iter().take(count).enumerate() {
            let osc = oscillation_index(problem, *value)?;
            if osc != j {
                consistent = false;
                break;
            }
            let k = sign as i32 * (j as i32 + 1);
            out.push(Eigenvalue {
                problem: problem.kind,
                a: problem.a,
                k,
                value: *value,
                osc,
                residual: *residual,
            });
        }
        if consistent {
            return Ok(out);
        }
        step_opts.step *= 0.5;
    }
    Err(Error::NonConvergence(format!(
        "{} oscillation counts inconsistent with root order",
        problem.kind
    )))
}

/// Eigenvalues of `problem` with index in `k_range`.
///
/// `P1` accepts `k >= 1`, `P2` accepts `k <= -1` and `P3` any `k`; indices of
/// the wrong sign are ignored.
pub fn solve_spectrum(
    problem: &SpectralProblem,
    k_range: std::ops::RangeInclusive<i32>,
    opts: &SpectrumOptions,
) -> Result<Vec<Eigenvalue>> {
    let (kmin, kmax) = (*k_range.start(), *k_range.end());
    if kmin > kmax {
        return Ok(Vec::new());
    }
    match problem.kind {
        ProblemKind::P1 => {
            if kmax < 1 {
                return Ok(Vec::new());
            }
            let all = sturm_family(problem, kmax as usize, opts)?;
            Ok(all.into_iter().filter(|e| e.k >= kmin).collect())
        }
        ProblemKind::P2 => {
            if kmin > -1 {
                return Ok(Vec::new());
            }
            let mut all = sturm_family(problem, (-kmin) as usize, opts)?;
            all.retain(|e| e.k <= kmax);
            all.reverse();
            Ok(all)
        }
        ProblemKind::P3 => {
            let p1 = SpectralProblem::new(ProblemKind::P1, problem.a)?;
            let p2 = SpectralProblem::new(ProblemKind::P2, problem.a)?;
            let mu_plus = sturm_family(&p1, (kmax + 1).max(kmin).max(1) as usize, opts)?;
            let mu_minus = sturm_family(&p2, (1 - kmin).max(-kmax).max(1) as usize, opts)?;
            // lambda_k lies between mu_k and mu_{k+1}, lambda_0 between mu_{-1} and mu_1
            let value_of = |fam: &[Eigenvalue], k: i32| fam.iter().find(|m| m.k == k).map(|m| m.value);
            let lo = if kmin <= 0 { value_of(&mu_minus, kmin - 1) } else { value_of(&mu_plus, kmin) };
            let hi = if kmax >= 0 { value_of(&mu_plus, kmax + 1) } else { value_of(&mu_minus, kmax) };
            let (lo, hi) = lo.zip(hi).ok_or_else(|| Error::BracketNotFound {
                what: "mu eigenvalues enclosing the requested P3 range".into(),
            })?;
            let mut step_opts = *opts;
            for _ in 0..5 {
                let roots = roots_in(problem, lo, hi, &step_opts)?;
                let mut out: Vec<Eigenvalue> = Vec::new();
                for (value, residual) in roots {
                    let k = mu_plus.iter().filter(|m| m.value < value).count() as i32
                        - mu_minus.iter().filter(|m| m.value > value).count() as i32;
                    if k < kmin || k > kmax {
                        continue;
                    }
                    out.push(Eigenvalue {
                        problem: ProblemKind::P3,
                        a: problem.a,
                        k,
                        value,
                        osc: oscillation_index(problem, value)?,
                        residual,
                    });
                }
                out.sort_by_key(|e| e.k);
                let complete = out.len() == (kmax - kmin + 1) as usize
                    && out.iter().zip(kmin..=kmax).all(|(e, k)| e.k == k);
                if complete {
                    return Ok(out);
                }
                step_opts.step *= 0.5;
            }
            Err(Error::BracketNotFound {
                what: format!("P3 eigenvalues for k in {kmin}..={kmax}"),
            })
        }
    }
}

/// All three spectra with `|k| <= kmax` (and `k != 0` for the mu's).
pub fn full_chain(a: f64, kmax: i32, opts: &SpectrumOptions) -> Result<Vec<Eigenvalue>> {
    let p1 = SpectralProblem::new(ProblemKind::P1, a)?;
    let p2 = SpectralProblem::new(ProblemKind::P2, a)?;
    let p3 = SpectralProblem::new(ProblemKind::P3, a)?;
    let mut out = solve_spectrum(&p2, -kmax..=-1, opts)?;
    out.extend(solve_spectrum(&p1, 1..=kmax, opts)?);
    out.extend(solve_spectrum(&p3, -(kmax - 1).max(0)..=(kmax - 1).max(0), opts)?);
    out.sort_by(|x, y| x.chain_rank().cmp(&y.chain_rank()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainViolation {
    pub lower: String,
    pub upper: String,
    pub lower_value: f64,
    pub upper_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingReport {
    /// Labels and values in chain order.
    pub chain: Vec<(String, f64)>,
    pub violations: Vec<ChainViolation>,
    /// `mu_1 > -a`, when `mu_1` is present.
    pub mu1_above_minus_a: Option<bool>,
    /// `mu_{-1} < -a`, when `mu_{-1}` is present.
    pub mu_minus1_below_minus_a: Option<bool>,
}

impl InterlacingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
            && self.mu1_above_minus_a != Some(false)
            && self.mu_minus1_below_minus_a != Some(false)
    }
}

/// Checks strict increase along `... mu_{-1} < lambda_0 < mu_1 < lambda_1 ...`
/// for every adjacent pair present in `eigs`.
pub fn verify_interlacing(eigs: &[Eigenvalue]) -> InterlacingReport {
    let mut sorted: Vec<&Eigenvalue> = eigs.iter().collect();
    sorted.sort_by_key(|e| e.chain_rank());
    let mut violations = Vec::new();
    for w in sorted.windows(2) {
        if !(w[0].value < w[1].value) {
            violations.push(ChainViolation {
                lower: w[0].label(),
                upper: w[1].label(),
                lower_value: w[0].value,
                upper_value: w[1].value,
            });
        }
    }
    let find = |kind: ProblemKind, k: i32| eigs.iter().find(|e| e.problem == kind && e.k == k);
    InterlacingReport {
        chain: sorted.iter().map(|e| (e.label(), e.value)).collect(),
        violations,
        mu1_above_minus_a: find(ProblemKind::P1, 1).map(|e| e.value > -e.a),
        mu_minus1_below_minus_a: find(ProblemKind::P2, -1).map(|e| e.value < -e.a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(kind: ProblemKind, a: f64) -> SpectralProblem {
        SpectralProblem::new(kind, a).unwrap()
    }

    #[test]
    fn determinant_is_real() {
        for kind in [ProblemKind::P1, ProblemKind::P2, ProblemKind::P3] {
            let pr = problem(kind, 0.37);
            for j in 0..9 {
                let lam = -3.0 + 0.77 * j as f64;
                let d = shooting_value(&pr, lam).unwrap();
                assert!(d.im.abs() <= 1e-13 * (1.0 + d.re.abs()), "{kind} {lam} {d}");
            }
        }
    }

    #[test]
    fn ground_state_at_half() {
        let pr = problem(ProblemKind::P3, 0.5);
        let e = solve_spectrum(&pr, 0..=0, &SpectrumOptions::default()).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0].value + 0.5).abs() < 1e-9, "{}", e[0].value);
    }

    #[test]
    fn fabricated_violation_is_reported() {
        let mk = |problem, k, value| Eigenvalue {
            problem,
            a: 0.5,
            k,
            value,
            osc: 0,
            residual: 0.0,
        };
        let eigs = [mk(ProblemKind::P3, 0, -0.2), mk(ProblemKind::P1, 1, -0.2), mk(ProblemKind::P2, -1, -0.8)];
        let rep = verify_interlacing(&eigs);
        assert!(!rep.holds());
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].lower, "lambda_0");
        assert_eq!(rep.violations[0].upper, "mu_1");
    }

    #[test]
    fn problem_kind_parses() {
        assert_eq!("p2".parse::<ProblemKind>().unwrap(), ProblemKind::P2);
        assert!("P4".parse::<ProblemKind>().is_err());
    }
}
