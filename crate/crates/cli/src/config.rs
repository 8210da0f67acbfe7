use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use liouville_core::spectra::ProblemKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Monodromy,
    Field,
    Contours,
    Action,
    Report,
}

impl Command {
    fn needs_accessory(self) -> bool {
        matches!(self, Command::Monodromy | Command::Field | Command::Contours)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    P1,
    P2,
    P3,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::P1 => ProblemKind::P1,
            Problem::P2 => ProblemKind::P2,
            Problem::P3 => ProblemKind::P3,
        }
    }
}

/// Index range `N` (meaning `-N..=N`) or `LO:HI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KRange {
    pub lo: i32,
    pub hi: i32,
}

impl FromStr for KRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid k-range {s:?} (expected N or LO:HI)");
        let r = match s.split_once(':') {
            Some((lo, hi)) => KRange {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            },
            None => {
                let n: i32 = s.trim().parse().map_err(|_| bad())?;
                if n < 0 {
                    return Err(bad());
                }
                KRange { lo: -n, hi: n }
            }
        };
        if r.lo > r.hi {
            return Err(bad());
        }
        Ok(r)
    }
}

impl TryFrom<String> for KRange {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<KRange> for String {
    fn from(r: KRange) -> String {
        r.to_string()
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Numerics for Liouville fields on the sphere punctured at 0, a, 1 and
/// infinity.
#[derive(Debug, Parser)]
#[command(name = "liouville", version, allow_negative_numbers = true)]
pub struct Cli {
    /// What to compute (may instead come from the config file).
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Modulus, the fourth puncture, in (0, 1).
    #[arg(long)]
    pub a: Option<f64>,
    /// Accessory parameter of the self-adjoint equation.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Spectral problem selecting the accessory parameter together with --k.
    #[arg(long, value_enum)]
    pub problem: Option<Problem>,
    #[arg(long)]
    pub k: Option<i32>,
    /// Index range: N for -N..N, or LO:HI.
    #[arg(long)]
    pub k_range: Option<KRange>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    #[arg(long, num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"])]
    pub bbox: Option<Vec<f64>>,
    /// Cutoff schedule for the action, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Tolerance: root tolerance for spectra, relative spread for the action.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Difference step in `a` for the antiderivative check.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configuration as read from a file or flags; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
    pub problem: Option<Problem>,
    pub k: Option<i32>,
    pub k_range: Option<KRange>,
    pub grid: Option<[usize; 2]>,
    pub bbox: Option<[f64; 4]>,
    pub eps: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// `self` with every field present in `other` replaced.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            command: other.command.or(self.command),
            a: other.a.or(self.a),
            lambda: other.lambda.or(self.lambda),
            problem: other.problem.or(self.problem),
            k: other.k.or(self.k),
            k_range: other.k_range.or(self.k_range),
            grid: other.grid.or(self.grid),
            bbox: other.bbox.or(self.bbox),
            eps: other.eps.or(self.eps),
            tol: other.tol.or(self.tol),
            delta: other.delta.or(self.delta),
            out: other.out.or(self.out),
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self, String> {
        let base = match &cli.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            command: cli.command,
            a: cli.a,
            lambda: cli.lambda,
            problem: cli.problem,
            k: cli.k,
            k_range: cli.k_range,
            grid: cli.grid.as_ref().map(|g| [g[0], g[1]]),
            bbox: cli.bbox.as_ref().map(|b| [b[0], b[1], b[2], b[3]]),
            eps: cli.eps.clone(),
            tol: cli.tol,
            delta: cli.delta,
            out: cli.out.clone(),
        };
        Ok(base.overridden_by(flags))
    }
}

/// Accessory parameter given directly or through a spectral index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accessory {
    Lambda(f64),
    Spectral { problem: Problem, k: i32 },
}

/// Fully resolved configuration, embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub command: Command,
    pub a: f64,
    pub accessory: Option<Accessory>,
    pub problem: Option<Problem>,
    pub k_range: KRange,
    pub grid: [usize; 2],
    pub bbox: [f64; 4],
    pub eps: Vec<f64>,
    pub tol: f64,
    pub delta: f64,
    pub out: PathBuf,
}

pub const DEFAULT_GRID: [usize; 2] = [400, 400];
pub const DEFAULT_BBOX: [f64; 4] = [-0.8, -1.2, 1.8, 1.2];

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let command = self.command.ok_or("no command given")?;
        let a = self.a.ok_or("--a is required")?;
        if !(a.is_finite() && a > 0.0 && a < 1.0) {
            return Err(format!("a = {a} must lie in (0, 1)"));
        }
        let accessory = match (self.lambda, self.problem, self.k) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err("give either --lambda or --problem with --k, not both".into())
            }
            (Some(l), None, None) => {
                if !l.is_finite() {
                    return Err(format!("lambda = {l} is not finite"));
                }
                Some(Accessory::Lambda(l))
            }
            (None, Some(problem), Some(k)) => {
                let ok = match problem {
                    Problem::P1 => k >= 1,
                    Problem::P2 => k <= -1,
                    Problem::P3 => true,
                };
                if !ok {
                    return Err(format!("index k = {k} is not valid for {problem:?}"));
                }
                Some(Accessory::Spectral { problem, k })
            }
            (None, None, Some(_)) => return Err("--k requires --problem".into()),
            (None, Some(_), None) if command.needs_accessory() => return Err("--problem requires --k".into()),
            _ => None,
        };
        if command.needs_accessory() && accessory.is_none() {
            return Err(format!("{command:?} needs --lambda or --problem with --k"));
        }
        let default_range = if command == Command::Report { 1 } else { 2 };
        let k_range = self.k_range.unwrap_or(KRange {
            lo: -default_range,
            hi: default_range,
        });
        let grid = self.grid.unwrap_or(DEFAULT_GRID);
        if grid[0] < 3 || grid[1] < 3 {
            return Err(format!("grid {grid:?} needs at least 3 samples per side"));
        }
        let bbox = self.bbox.unwrap_or(DEFAULT_BBOX);
        if !(bbox.iter().all(|v| v.is_finite()) && bbox[0] < bbox[2] && bbox[1] < bbox[3]) {
            return Err(format!("bbox {bbox:?} must satisfy X0 < X1 and Y0 < Y1"));
        }
        let eps = self.eps.clone().unwrap_or_else(liouville_core::action::default_eps_schedule);
        if eps.is_empty() || eps.iter().any(|e| !(0.999e-4..=1.001e-2).contains(e)) {
            return Err(format!("cutoffs {eps:?} must lie in [1e-4, 1e-2]"));
        }
        let tol = self.tol.unwrap_or(match command {
            Command::Action | Command::Report => 1e-2,
            _ => 1e-10,
        });
        if !(tol.is_finite() && tol > 0.0) {
            return Err(format!("tolerance {tol} must be positive"));
        }
        let delta = self.delta.unwrap_or(5e-3);
        if !(0.999e-3..=1.001e-2).contains(&delta) {
            return Err(format!("difference step {delta} must lie in [1e-3, 1e-2]"));
        }
        if command == Command::Action && (a - delta <= 0.0 || a + delta >= 1.0) {
            return Err(format!("a = {a} is within {delta} of the boundary"));
        }
        Ok(Resolved {
            command,
            a,
            accessory,
            problem: self.problem,
            k_range,
            grid,
            bbox,
            eps,
            tol,
            delta,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("liouville-out")),
        })
    }
}
