use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::SmirnovEquation;
use crate::error::{Error, Result};
use crate::frobenius::{connection_coefficients, LocalBasis, LogBranch, SingularPoint, SolutionRepr};
use crate::monodromy::{conjugate_to_real, default_base_point, monodromy_rep, normalized_frame, realness_defect, Mat2};
use crate::taylor::{transport_segment, Jet, TaylorSeries};

/// Largest `|z - center| / radius` at which a local expansion is used.
const MAX_RATIO: f64 = 0.62;
/// Half-width of the square covered by Taylor centers.
const LATTICE_HALF_WIDTH: f64 = 2.3;
/// Centers closer than this many spacings to a puncture are dropped.
const LATTICE_EXCLUSION: f64 = 1.9;
const BRANCH_TOL: f64 = 1e-8;

/// `chi` and its derivatives at one point. `chi_zzbar` is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiJet {
    pub chi: f64,
    pub chi_z: Complex64,
    pub chi_zz: Complex64,
    pub chi_zzbar: f64,
}

impl ChiJet {
    /// `phi = -2 log|chi|`.
    pub fn phi(&self) -> f64 {
        -2.0 * self.chi.abs().ln()
    }

    /// `|phi_z|^2 + e^phi`.
    pub fn action_density(&self) -> f64 {
        (4.0 * self.chi_z.norm_sqr() + 1.0) / (self.chi * self.chi)
    }
}

#[derive(Debug, Clone)]
struct Center {
    c: Complex64,
    clearance: f64,
    series: [TaylorSeries; 2],
}

#[derive(Debug, Clone)]
struct Chart {
    basis: LocalBasis,
    reprs: [SolutionRepr; 2],
}

/// Which local expansion answered a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Lattice,
    Frobenius(SingularPoint),
}

/// Evaluates the real unit-Wronskian basis of the self-adjoint equation and
/// the field `chi = |p| Im(conj(y_1) y_2)` anywhere off the punctures.
///
/// The basis is obtained by continuing the unit-Wronskian frame at the base
/// point and conjugating the monodromy into `SL(2, R)`; `chi` is then
/// independent of the continuation path, so a lattice of Taylor centers
/// (filled by breadth-first transport) and Frobenius charts at the four
/// punctures can be mixed freely.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    eq: SmirnovEquation,
    base_point: Complex64,
    conjugator: Mat2,
    realness_defect: f64,
    sign: f64,
    spacing: f64,
    origin: Complex64,
    nx: usize,
    ny: usize,
    centers: Vec<Option<Center>>,
    charts: Vec<Chart>,
}

fn ratio_order() -> usize {
    TaylorSeries::terms_for_ratio(MAX_RATIO)
}

impl FieldEvaluator {
    pub fn new(eq: &SmirnovEquation) -> Result<Self> {
        Self::with_base_point(eq, default_base_point())
    }

    pub fn with_base_point(eq: &SmirnovEquation, base_point: Complex64) -> Result<Self> {
        let rep = monodromy_rep(eq, base_point)?;
        let defect = realness_defect(&rep);
        let (q, _) = conjugate_to_real(&rep)?;
        let qi = q
            .try_inverse()
            .ok_or_else(|| Error::ConjugationFailure("conjugator is singular".into()))?;
        // data (y, y') of the real basis at the base point
        let data = normalized_frame(eq, base_point) * qi;
        let start = [(data[(0, 0)], data[(1, 0)]), (data[(0, 1)], data[(1, 1)])];

        let a = eq.a();
        let spacing = (0.25 * a.min(1.0 - a)).min(0.1);
        let n_side = (2.0 * LATTICE_HALF_WIDTH / spacing).ceil() as usize + 1;
        let origin = Complex64::new(-LATTICE_HALF_WIDTH, -LATTICE_HALF_WIDTH);
        let mut ev = Self {
            eq: *eq,
            base_point,
            conjugator: q,
            realness_defect: defect,
            sign: 1.0,
            spacing,
            origin,
            nx: n_side,
            ny: n_side,
            centers: vec![None; n_side * n_side],
            charts: Vec::new(),
        };
        ev.fill_lattice(start)?;
        ev.build_charts()?;
        let chi0 = ev.chi_jet(base_point)?.chi;
        if chi0 < 0.0 {
            ev.sign = -1.0;
        }
        let drift = ev.branch_consistency()?;
        if drift > BRANCH_TOL {
            return Err(Error::BranchInconsistency(format!(
                "chi differs by {drift:.3e} between overlapping charts"
            )));
        }
        Ok(ev)
    }

    pub fn equation(&self) -> &SmirnovEquation {
        &self.eq
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn conjugator(&self) -> &Mat2 {
        &self.conjugator
    }

    pub fn realness_defect(&self) -> f64 {
        self.realness_defect
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        self.origin + Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    fn active(&self, z: Complex64) -> bool {
        self.eq.clearance(z) >= LATTICE_EXCLUSION * self.spacing
    }

    fn fill_lattice(&mut self, start: [(Complex64, Complex64); 2]) -> Result<()> {
        let n = ratio_order();
        let rel = (self.base_point - self.origin) / self.spacing;
        let (i0, j0) = (rel.re.round() as i64, rel.im.round() as i64);
        let mut seed = None;
        'search: for radius in 0..(self.nx as i64) {
            for dj in -radius..=radius {
                for di in -radius..=radius {
                    if di.abs().max(dj.abs()) != radius {
                        continue;
                    }
                    let (i, j) = (i0 + di, j0 + dj);
                    if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                        continue;
                    }
                    let z = self.node(i as usize, j as usize);
                    if self.active(z) {
                        seed = Some((i as usize, j as usize));
                        break 'search;
                    }
                }
            }
        }
        let (si, sj) = seed.ok_or_else(|| Error::Domain("no admissible Taylor center".into()))?;
        let c0 = self.node(si, sj);
        let mut states = start;
        transport_segment(&self.eq, self.base_point, c0, &mut states, 0.5)?;
        let make = |eq: &SmirnovEquation, c: Complex64, s: [(Complex64, Complex64); 2]| -> Result<Center> {
            Ok(Center {
                c,
                clearance: eq.clearance(c),
                series: [
                    TaylorSeries::new(eq, c, s[0].0, s[0].1, n)?,
                    TaylorSeries::new(eq, c, s[1].0, s[1].1, n)?,
                ],
            })
        };
        self.centers[sj * self.nx + si] = Some(make(&self.eq, c0, states)?);
        let mut queue = VecDeque::from([(si, sj)]);
        while let Some((i, j)) = queue.pop_front() {
            let (src_c, jets) = {
                let src = self.centers[j * self.nx + i].as_ref().expect("queued centers are filled");
                (src.c, src.series.clone())
            };
            let neighbours = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
            for (di, dj) in neighbours {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= self.nx as i64 || nj >= self.ny as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let idx = nj * self.nx + ni;
                if self.centers[idx].is_some() {
                    continue;
                }
                let z = self.node(ni, nj);
                if !self.active(z) {
                    continue;
                }
                debug_assert!((z - src_c).norm() <= 0.6 * self.eq.clearance(src_c));
                let j0 = jets[0].eval(z);
                let j1 = jets[1].eval(z);
                self.centers[idx] = Some(make(&self.eq, z, [(j0.y, j0.dy), (j1.y, j1.dy)])?);
                queue.push_back((ni, nj));
            }
        }
        Ok(())
    }

    fn build_charts(&mut self) -> Result<()> {
        let a = self.eq.a();
        let mut charts = Vec::with_capacity(4);
        for point in SingularPoint::ALL {
            let conv = point.convergence_radius(a);
            let basis = LocalBasis::with_radius(&self.eq, point, MAX_RATIO * conv)?;
            // matching point inside the chart and covered by the lattice
            let zc = match point.location(a) {
                Some(zi) => Complex64::new(zi, 0.5 * conv),
                None => Complex64::new(0.0, 2.0),
            };
            let jets = self.lattice_jets(zc)?;
            let mut reprs = [SolutionRepr::holomorphic(point); 2];
            for (k, jet) in jets.iter().enumerate() {
                reprs[k] = connection_coefficients(&self.eq, &basis, LogBranch::DIRECT, zc, (jet.y, jet.dy))?;
            }
            charts.push(Chart { basis, reprs });
        }
        self.charts = charts;
        Ok(())
    }

    /// Best lattice center for `z`, with its ratio.
    fn lattice_center(&self, z: Complex64) -> Option<(&Center, f64)> {
        let rel = (z - self.origin) / self.spacing;
        let (ic, jc) = (rel.re.round() as i64, rel.im.round() as i64);
        let mut best: Option<(&Center, f64)> = None;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (i, j) = (ic + di, jc + dj);
                if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                    continue;
                }
                if let Some(c) = &self.centers[j as usize * self.nx + i as usize] {
                    let r = (z - c.c).norm() / c.clearance;
                    if best.map_or(true, |b| r < b.1) {
                        best = Some((c, r));
                    }
                }
            }
        }
        best
    }

    fn lattice_jets(&self, z: Complex64) -> Result<[Jet; 2]> {
        match self.lattice_center(z) {
            Some((c, r)) if r <= MAX_RATIO => Ok([c.series[0].eval(z), c.series[1].eval(z)]),
            _ => Err(Error::OutOfDisk {
                z,
                dist: f64::NAN,
                radius: self.spacing,
            }),
        }
    }

    fn chart_ratio(&self, chart: &Chart, z: Complex64) -> f64 {
        let conv = chart.basis.point.convergence_radius(self.eq.a());
        chart.basis.local_coordinate(z).norm() / conv
    }

    fn chart_jets(&self, chart: &Chart, z: Complex64) -> [Jet; 2] {
        let j = chart.basis.jets_unchecked(z, LogBranch::DIRECT);
        let combine = |r: &SolutionRepr| Jet {
            y: r.alpha * j.holomorphic.y + r.beta * j.logarithmic.y,
            dy: r.alpha * j.holomorphic.dy + r.beta * j.logarithmic.dy,
            d2y: r.alpha * j.holomorphic.d2y + r.beta * j.logarithmic.d2y,
        };
        [combine(&chart.reprs[0]), combine(&chart.reprs[1])]
    }

    /// Jets of the real basis at `z` from the best available expansion.
    pub fn basis_jets(&self, z: Complex64) -> Result<([Jet; 2], Source)> {
        if !z.is_finite() {
            return Err(Error::Domain("non-finite point".into()));
        }
        for x in self.eq.roots() {
            if (z - x).norm() <= 1e-300 {
                return Err(Error::Pole {
                    z,
                    puncture: Complex64::new(x, 0.0),
                });
            }
        }
        let mut best: Option<(Source, f64)> = self.lattice_center(z).map(|(_, r)| (Source::Lattice, r));
        for chart in &self.charts {
            let r = self.chart_ratio(chart, z);
            if best.map_or(true, |b| r < b.1) {
                best = Some((Source::Frobenius(chart.basis.point), r));
            }
        }
        match best {
            Some((src, r)) if r <= MAX_RATIO => {
                let jets = match src {
                    Source::Lattice => self.lattice_jets(z)?,
                    Source::Frobenius(p) => {
                        let chart = self.charts.iter().find(|c| c.basis.point == p).expect("chart exists");
                        self.chart_jets(chart, z)
                    }
                };
                Ok((jets, src))
            }
            _ => Err(Error::OutOfDisk {
                z,
                dist: f64::NAN,
                radius: MAX_RATIO,
            }),
        }
    }

    fn chi_from_jets(&self, z: Complex64, jets: &[Jet; 2]) -> ChiJet {
        let p = self.eq.p(z);
        let dp = self.eq.dp(z);
        let d2p = self.eq.d2p(z);
        let h = dp / (2.0 * p);
        let dh = d2p / (2.0 * p) - 2.0 * h * h;
        let modp = p.norm() * self.sign;
        let u = |j: &Jet| j.dy + h * j.y;
        let yhat = |j: &Jet| j.d2y + 2.0 * h * j.dy + (dh + h * h) * j.y;
        let [j1, j2] = jets;
        let two_i = Complex64::new(0.0, 2.0);
        ChiJet {
            chi: modp * (j1.y.conj() * j2.y).im,
            chi_z: modp * (j1.y.conj() * u(j2) - j2.y.conj() * u(j1)) / two_i,
            chi_zz: modp * (j1.y.conj() * yhat(j2) - j2.y.conj() * yhat(j1)) / two_i,
            chi_zzbar: modp * (u(j1).conj() * u(j2)).im,
        }
    }

    pub fn chi_jet(&self, z: Complex64) -> Result<ChiJet> {
        let (jets, _) = self.basis_jets(z)?;
        Ok(self.chi_from_jets(z, &jets))
    }

    pub fn chi(&self, z: Complex64) -> Result<f64> {
        Ok(self.chi_jet(z)?.chi)
    }

    /// `chi` from an explicitly chosen expansion, for cross-checks.
    pub fn chi_jet_from(&self, z: Complex64, source: Source) -> Result<ChiJet> {
        let jets = match source {
            Source::Lattice => self.lattice_jets(z)?,
            Source::Frobenius(p) => {
                let chart = self.charts.iter().find(|c| c.basis.point == p).expect("chart exists");
                if self.chart_ratio(chart, z) > MAX_RATIO {
                    return Err(Error::OutOfDisk {
                        z,
                        dist: self.chart_ratio(chart, z),
                        radius: MAX_RATIO,
                    });
                }
                self.chart_jets(chart, z)
            }
        };
        Ok(self.chi_from_jets(z, &jets))
    }

    /// Largest relative disagreement of `chi` between each Frobenius chart
    /// and the lattice, sampled on a circle around the chart's point. Every
    /// sample on the circle is reached by the lattice along a different
    /// path, so this tests single-valuedness.
    pub fn branch_consistency(&self) -> Result<f64> {
        let a = self.eq.a();
        let mut worst: f64 = 0.0;
        for chart in &self.charts {
            let point = chart.basis.point;
            let conv = point.convergence_radius(a);
            for k in 0..16 {
                let th = (k as f64 + 0.5) * std::f64::consts::PI / 8.0;
                let dir = Complex64::from_polar(1.0, th);
                let z = match point.location(a) {
                    Some(zi) => zi + 0.5 * conv * dir,
                    None => 2.05 * dir,
                };
                let Ok(lat) = self.chi_jet_from(z, Source::Lattice) else {
                    continue;
                };
                let fr = self.chi_jet_from(z, Source::Frobenius(point))?;
                let scale = lat.chi.abs() + 2.0 * lat.chi_z.norm() * conv + 1e-300;
                worst = worst.max((lat.chi - fr.chi).abs() / scale);
            }
        }
        Ok(worst)
    }

    /// `chi_zz + r chi / 2` at `z`.
    pub fn ode_residual(&self, z: Complex64) -> Result<f64> {
        let j = self.chi_jet(z)?;
        let r = self.eq.r(z)?;
        Ok((j.chi_zz + 0.5 * r * j.chi).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("invalid bbox [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn default_for_sphere() -> Self {
        Self {
            x0: -0.8,
            y0: -1.2,
            x1: 1.8,
            y1: 1.2,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Grows the box about its center by `factor`.
    pub fn expanded(&self, factor: f64) -> Self {
        let (cx, cy) = (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1));
        let (hx, hy) = (0.5 * (self.x1 - self.x0) * factor, 0.5 * (self.y1 - self.y0) * factor);
        Self {
            x0: cx - hx,
            y0: cy - hy,
            x1: cx + hx,
            y1: cy + hy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bbox: BBox,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(bbox: BBox, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Domain("grid needs at least 3 samples per axis".into()));
        }
        Ok(Self { bbox, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        (self.bbox.x1 - self.bbox.x0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.bbox.y1 - self.bbox.y0) / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.bbox.x0 + i as f64 * self.hx(), self.bbox.y0 + j as f64 * self.hy())
    }

    /// A grid over `bbox` with (at most) the spacing of `self`.
    pub fn with_bbox_same_spacing(&self, bbox: BBox) -> Self {
        let nx = (bbox.width() / self.hx()).ceil() as usize + 1;
        let ny = (bbox.height() / self.hy()).ceil() as usize + 1;
        Self { bbox, nx, ny }
    }

    /// The grid with half the spacing, containing every node of `self`.
    pub fn refined(&self) -> Self {
        Self {
            bbox: self.bbox,
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            bbox: BBox::default_for_sphere(),
            nx: 400,
            ny: 400,
        }
    }
}

/// Samples of `chi` on a rectangular grid, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub a: f64,
    pub lambda: f64,
    pub chi: Vec<f64>,
    pub chi_z: Vec<Complex64>,
    pub phi: Vec<f64>,
    /// `true` where the sample lies within two grid steps of a puncture.
    pub mask: Vec<bool>,
}

impl FieldGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.spec.nx + i
    }

    pub fn unmasked_chi(&self) -> impl Iterator<Item = f64> + '_ {
        self.chi.iter().zip(&self.mask).filter(|(_, m)| !**m).map(|(c, _)| *c)
    }

    pub fn min_chi(&self) -> f64 {
        self.unmasked_chi().fold(f64::INFINITY, f64::min)
    }

    pub fn max_chi(&self) -> f64 {
        self.unmasked_chi().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Grid masking samples within two grid steps of a puncture.
pub fn chi_field(ev: &FieldEvaluator, spec: &GridSpec) -> Result<FieldGrid> {
    chi_field_masked(ev, spec, 2.0)
}

/// Grid masking samples within `mask_cells` grid steps of a puncture (and
/// always samples closer than `1e-12`).
pub fn chi_field_masked(ev: &FieldEvaluator, spec: &GridSpec, mask_cells: f64) -> Result<FieldGrid> {
    let h = (spec.hx().max(spec.hy()) * mask_cells).max(1e-12);
    let roots = ev.eq.roots();
    let rows: Vec<Vec<(f64, Complex64, bool)>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            (0..spec.nx)
                .map(|i| {
                    let z = spec.point(i, j);
                    if roots.iter().any(|x| (z - x).norm() < h) {
                        return Ok((f64::NAN, Complex64::new(f64::NAN, f64::NAN), true));
                    }
                    let jet = ev.chi_jet(z)?;
                    Ok((jet.chi, jet.chi_z, false))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n = spec.nx * spec.ny;
    let (mut chi, mut chi_z, mut phi, mut mask) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for row in rows {
        for (c, cz, m) in row {
            chi.push(c);
            chi_z.push(cz);
            phi.push(if m || c == 0.0 { f64::NAN } else { -2.0 * c.abs().ln() });
            mask.push(m);
        }
    }
    Ok(FieldGrid {
        spec: *spec,
        a: ev.eq.a(),
        lambda: ev.eq.lambda(),
        chi,
        chi_z,
        phi,
        mask,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Max of `|phi_{z zbar} - e^phi / 2|` by centered differences.
    pub liouville: f64,
    /// Max of `|-chi chi_{z zbar} + |chi_z|^2 - 1/4|`, `chi_{z zbar}` by centered differences.
    pub chi_pde: f64,
    /// Max of `|chi_zz + r chi / 2|` from analytic derivatives.
    pub chi_ode: f64,
    /// Max of `|-chi chi_{z zbar} + |chi_z|^2 - 1/4|` from analytic derivatives.
    pub chi_pde_analytic: f64,
    pub samples: usize,
}

/// Five-point `(1/4) Laplacian` of `f` at `z` with step `h`.
pub fn fd_zzbar(f: impl Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let c = f(z);
    let sum = f(z + h) + f(z - h) + f(z + Complex64::new(0.0, h)) + f(z - Complex64::new(0.0, h));
    (sum - 4.0 * c) / (4.0 * h * h)
}

/// Residual `phi_{z zbar} - e^phi / 2` of an explicit field at `z`.
pub fn liouville_fd_residual(phi: impl Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let lap = fd_zzbar(&phi, z, h);
    lap - 0.5 * phi(z).exp()
}

/// Nodes at which every residual stencil is admissible: away from punctures
/// and from the zero set of `chi`.
pub fn admissible_nodes(grid: &FieldGrid, chi_floor: f64) -> Vec<(usize, usize)> {
    let (nx, ny) = (grid.spec.nx, grid.spec.ny);
    let mut out = Vec::new();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let stencil = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
            let ok = stencil.iter().all(|&(p, q)| {
                let k = grid.index(p, q);
                !grid.mask[k] && grid.chi[k].abs() > chi_floor
            });
            if ok {
                out.push((i, j));
            }
        }
    }
    out
}

/// Residuals over `nodes` of `grid` (the grid's own spacing is used for the
/// finite differences).
pub fn residuals_at(ev: &FieldEvaluator, grid: &FieldGrid, nodes: &[(usize, usize)]) -> Result<Residuals> {
    let (hx, hy) = (grid.spec.hx(), grid.spec.hy());
    let vals: Vec<(f64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|&(i, j)| {
            let k = grid.index(i, j);
            let c = grid.chi[k];
            let e = |p: usize, q: usize| grid.chi[grid.index(p, q)];
            let lap_chi = (e(i + 1, j) - 2.0 * c + e(i - 1, j)) / (hx * hx)
                + (e(i, j + 1) - 2.0 * c + e(i, j - 1)) / (hy * hy);
            let f = |p: usize, q: usize| grid.phi[grid.index(p, q)];
            let lap_phi = (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) / (hx * hx)
                + (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) / (hy * hy);
            let liou = (0.25 * lap_phi - 0.5 * f(i, j).exp()).abs();
            let pde = (-c * 0.25 * lap_chi + grid.chi_z[k].norm_sqr() - 0.25).abs();
            let z = grid.spec.point(i, j);
            let jet = ev.chi_jet(z)?;
            let r = ev.eq.r(z)?;
            let ode = (jet.chi_zz + 0.5 * r * jet.chi).norm();
            let pde_an = (-jet.chi * jet.chi_zzbar + jet.chi_z.norm_sqr() - 0.25).abs();
            Ok((liou, pde, ode, pde_an))
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&(f64, f64, f64, f64)) -> f64| vals.iter().map(f).fold(0.0, f64::max);
    Ok(Residuals {
        liouville: max(|v| v.0),
        chi_pde: max(|v| v.1),
        chi_ode: max(|v| v.2),
        chi_pde_analytic: max(|v| v.3),
        samples: vals.len(),
    })
}

pub fn residuals(ev: &FieldEvaluator, grid: &FieldGrid) -> Result<Residuals> {
    let floor = 0.05 * grid.unmasked_chi().map(f64::abs).fold(0.0, f64::max);
    let nodes = admissible_nodes(grid, floor);
    residuals_at(ev, grid, &nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub coarse: Residuals,
    pub fine: Residuals,
    /// `coarse / fine` for the Liouville residual.
    pub liouville_ratio: f64,
    /// `coarse / fine` for the finite-difference chi residual.
    pub chi_pde_ratio: f64,
}

/// Finite-difference residuals on `spec` and on its refinement, both
/// measured at the nodes of `spec`.
pub fn convergence_study(ev: &FieldEvaluator, spec: &GridSpec) -> Result<ConvergenceStudy> {
    let coarse = chi_field(ev, spec)?;
    let fine = chi_field(ev, &spec.refined())?;
    let floor = 0.05 * coarse.unmasked_chi().map(f64::abs).fold(0.0, f64::max);
    let nodes = admissible_nodes(&coarse, floor);
    let fine_nodes: Vec<(usize, usize)> = nodes.iter().map(|&(i, j)| (2 * i, 2 * j)).collect();
    let rc = residuals_at(ev, &coarse, &nodes)?;
    let rf = residuals_at(ev, &fine, &fine_nodes)?;
    Ok(ConvergenceStudy {
        liouville_ratio: rc.liouville / rf.liouville,
        chi_pde_ratio: rc.chi_pde / rf.chi_pde,
        coarse: rc,
        fine: rf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub puncture: SingularPoint,
    pub direction: f64,
    pub radii: Vec<f64>,
    /// `phi + 2 log r + 2 log|log r|` in the puncture's chart.
    pub defects: Vec<f64>,
    /// `chi / (r |log r|)` in the puncture's chart.
    pub chi_ratios: Vec<f64>,
}

impl AsymptoticsReport {
    pub fn decreasing(&self) -> bool {
        self.defects.windows(2).all(|w| w[1].abs() < w[0].abs())
    }

    pub fn final_defect(&self) -> f64 {
        *self.defects.last().unwrap_or(&f64::NAN)
    }
}

/// Defect of the cusp asymptotics along the ray from `puncture` in direction
/// `theta` (for infinity, along `w = 1/z`).
pub fn puncture_asymptotics_check(
    ev: &FieldEvaluator,
    puncture: SingularPoint,
    theta: f64,
    radii: &[f64],
) -> Result<AsymptoticsReport> {
    let a = ev.eq.a();
    let mut defects = Vec::with_capacity(radii.len());
    let mut ratios = Vec::with_capacity(radii.len());
    for &r in radii {
        let dir = Complex64::from_polar(1.0, theta);
        let (z, chart_scale) = match puncture.location(a) {
            Some(zi) => (zi + r * dir, 1.0),
            // chi transforms as a (-1/2, -1/2)-density: chi_w = chi_z |dw/dz|
            None => (1.0 / (r * dir), r * r),
        };
        let chi = ev.chi(z)?.abs() * chart_scale;
        let l = r.ln().abs();
        defects.push(-2.0 * (chi / (r * l)).ln());
        ratios.push(chi / (r * l));
    }
    Ok(AsymptoticsReport {
        puncture,
        direction: theta,
        radii: radii.to_vec(),
        defects,
        chi_ratios: ratios,
    })
}
