//! Level dynamics along a control-parameter path: sweeps, Hellmann–Feynman
//! slopes, perturbative curvatures, avoided crossings, localization and
//! parity doublets.

use rayon::prelude::*;

use crate::basis::{hermite_functions, matrix_1d, matrix_2d, wavefunction_1d, Basis, Basis1D, Basis2D, OpTag};
use crate::error::{Error, Result};
use crate::linalg::{dot, SymBandMatrix};
use crate::potentials::{barrier_point, critical_energies, Model, PathKind, PotentialSpec};
use crate::quad::{gauss_legendre, laguerre_functions};
use crate::spectra::{assemble, converged_spectrum_with, ModelPoint, SolverOptions, Spectrum};

/// A canonical path together with its λ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    pub kind: PathKind,
    pub grid: Vec<f64>,
}

impl ParameterPath {
    /// A single point is accepted; slopes then come from Hellmann–Feynman only.
    pub fn new(kind: PathKind, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("λ grid is empty".into()));
        }
        if grid.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument("λ grid contains non-finite values".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("λ grid must be strictly ascending".into()));
        }
        Ok(ParameterPath { kind, grid })
    }

    pub fn linspace(kind: PathKind, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidArgument("λ grid needs at least one point".into()));
        }
        if points == 1 {
            return Self::new(kind, vec![lo]);
        }
        let grid = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        Self::new(kind, grid)
    }

    pub fn spec_at(&self, lambda: f64) -> PotentialSpec {
        self.kind.spec(lambda)
    }
}

/// The operator `∂H/∂λ` of a path: `x` (V1), `x²` (V2), `r²` (collective).
pub fn derivative_tag(kind: PathKind) -> OpTag {
    match kind {
        PathKind::CuspFirstOrder => OpTag::X,
        PathKind::CuspSecondOrder => OpTag::X2,
        PathKind::Collective => OpTag::R2,
    }
}

pub fn derivative_operator(kind: PathKind, basis: &Basis) -> Result<SymBandMatrix> {
    let tag = derivative_tag(kind);
    match basis {
        Basis::One(b) => Ok(matrix_1d(b, tag)?.matrix),
        Basis::Two(b) => Ok(matrix_2d(b, tag)?.matrix),
    }
}

fn check_on_path(spectrum: &Spectrum, kind: PathKind) -> Result<f64> {
    let lambda = kind.lambda_of(&spectrum.model_point.spec).ok_or_else(|| {
        Error::ModelMismatch(format!("spectrum potential {:?} is not on the {} path", spectrum.model_point.spec, kind.name()))
    })?;
    if spectrum.vectors.len() != spectrum.levels.len() {
        return Err(Error::InvalidArgument("spectrum carries no eigenvectors".into()));
    }
    Ok(lambda)
}

/// Hellmann–Feynman slopes `Ė_i = ⟨i|∂H/∂λ|i⟩`.
pub fn hf_slope(spectrum: &Spectrum, kind: PathKind) -> Result<Vec<f64>> {
    check_on_path(spectrum, kind)?;
    let d = derivative_operator(kind, &spectrum.basis)?;
    Ok(spectrum.vectors.iter().map(|v| d.bilinear(v, v)).collect())
}

/// Second derivatives of the levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Curvatures {
    /// `Ë_i` including every basis state (window sum plus tail).
    pub values: Vec<f64>,
    /// `2 Σ_j |⟨i|∂H/∂λ|j⟩|² / (E_i − E_j)` over the reported levels only.
    pub window_sum: Vec<f64>,
    /// Contribution of the basis states above the window.
    pub tail: Vec<f64>,
    /// A partner closer than `1e-12·scale` was handled as a degenerate pair.
    pub degenerate: Vec<bool>,
}

/// Perturbative curvatures. The window sum runs over the reported levels;
/// the tail is the remainder of the full in-basis sum, obtained from the
/// reduced resolvent `(E_i − H)⁻¹` applied to `∂H/∂λ|i⟩`.
pub fn curvature(spectrum: &Spectrum, kind: PathKind) -> Result<Curvatures> {
    check_on_path(spectrum, kind)?;
    let h = assemble(&spectrum.model_point, &spectrum.basis)?;
    let d = derivative_operator(kind, &spectrum.basis)?;
    Ok(curvature_in_basis(&h, &d, &spectrum.levels, &spectrum.vectors, spectrum.parity.as_deref()))
}

/// Curvatures for explicit `H`, `∂H/∂λ` and eigenpairs. With parity labels
/// the even and odd index sectors are treated separately, so that exact
/// cross-sector doublets never enter a resolvent.
pub fn curvature_in_basis(
    h: &SymBandMatrix,
    d: &SymBandMatrix,
    levels: &[f64],
    vectors: &[Vec<f64>],
    parity: Option<&[i8]>,
) -> Curvatures {
    let n = levels.len();
    let scale = levels.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE);
    let degenerate_tol = 1e-12 * scale;
    let sectors: Vec<(Vec<usize>, Vec<usize>)> = match parity {
        Some(par) => [1i8, -1]
            .iter()
            .map(|&p| {
                let members: Vec<usize> = (0..n).filter(|&i| par[i] == p).collect();
                let start = if p == 1 { 0 } else { 1 };
                let idx: Vec<usize> = (start..h.dim()).step_by(2).collect();
                (members, idx)
            })
            .collect(),
        None => vec![((0..n).collect(), (0..h.dim()).collect())],
    };

    let mut values = vec![0.0; n];
    let mut window_sum = vec![0.0; n];
    let mut tail = vec![0.0; n];
    let mut degenerate = vec![false; n];
    for (members, idx) in sectors {
        if members.is_empty() {
            continue;
        }
        let full = idx.len() == h.dim();
        let (hs, ds) = if full {
            (h.clone(), d.clone())
        } else {
            let bw = (h.bandwidth() / 2).max(1);
            (h.principal(&idx, bw), d.principal(&idx, (d.bandwidth() / 2).max(1)))
        };
        let vecs: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| if full { vectors[i].clone() } else { idx.iter().map(|&r| vectors[i][r]).collect() })
            .collect();
        let dv: Vec<Vec<f64>> = vecs.iter().map(|v| ds.matvec(v)).collect();
        for (a, &i) in members.iter().enumerate() {
            let ei = levels[i];
            let mut sum = 0.0;
            let mut close: Vec<usize> = vec![a];
            for (b, &j) in members.iter().enumerate() {
                if b == a {
                    continue;
                }
                let gap = ei - levels[j];
                if gap.abs() < degenerate_tol {
                    // a kink rather than a smooth curvature; no pair term
                    degenerate[i] = true;
                    close.push(b);
                    continue;
                }
                let vij = dot(&dv[a], &vecs[b]);
                sum += vij * vij / gap;
            }
            window_sum[i] = 2.0 * sum;
            // reduced resolvent over the whole sector basis
            let mut r = dv[a].clone();
            project_out(&mut r, close.iter().map(|&c| &vecs[c]));
            let mut y = hs.shifted_solve(ei, std::slice::from_ref(&r)).pop().unwrap();
            project_out(&mut y, close.iter().map(|&c| &vecs[c]));
            let total = -2.0 * dot(&r, &y);
            values[i] = total;
            tail[i] = total - window_sum[i];
        }
    }
    Curvatures { values, window_sum, tail, degenerate }
}

fn project_out<'a>(x: &mut [f64], basis: impl Iterator<Item = &'a Vec<f64>>) {
    for v in basis {
        let p = dot(x, v);
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= p * vi;
        }
    }
}

/// Parity of each level from the support of its eigenvector.
pub fn parity_label(spectrum: &Spectrum) -> Result<Vec<i8>> {
    let spec = &spectrum.model_point.spec;
    if spec.model != Model::Cusp || spec.q != 0.0 {
        return Err(Error::ParityUndefined("the potential is not symmetric under x → −x".into()));
    }
    if spectrum.vectors.len() != spectrum.levels.len() {
        return Err(Error::InvalidArgument("spectrum carries no eigenvectors".into()));
    }
    Ok(spectrum
        .vectors
        .iter()
        .map(|v| {
            let even: f64 = v.iter().step_by(2).map(|c| c * c).sum();
            let odd: f64 = v.iter().skip(1).step_by(2).map(|c| c * c).sum();
            if even >= odd {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// The coordinate separating the two wells: `x` of the barrier top for the
/// cusp, radius of the saddle between the wells for the collective model.
pub fn well_partition(spec: &PotentialSpec) -> Result<f64> {
    let bp = barrier_point(spec).ok_or_else(|| Error::SingleWell("no barrier between two minima".into()))?;
    Ok(match bp.location {
        crate::potentials::Point::X(x) => x,
        crate::potentials::Point::Polar { r, .. } => r,
    })
}

/// Probability weight on either side of the partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellWeights {
    /// `x < threshold` (cusp) or `r < threshold` (collective).
    pub left: f64,
    pub right: f64,
}

/// Per-level well weights from `|ψ|²` integrated on panel Gauss grids.
pub fn localization(spectrum: &Spectrum, threshold: f64) -> Result<Vec<WellWeights>> {
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument("partition threshold must be finite".into()));
    }
    if spectrum.vectors.len() != spectrum.levels.len() {
        return Err(Error::InvalidArgument("spectrum carries no eigenvectors".into()));
    }
    if !critical_energies(&spectrum.model_point.spec).is_double_well() {
        return Err(Error::SingleWell("localization needs two wells".into()));
    }
    match &spectrum.basis {
        Basis::One(b) => Ok(localization_1d(&spectrum.vectors, b, threshold)),
        Basis::Two(b) => Ok(localization_2d(&spectrum.vectors, b, threshold.max(0.0))),
    }
}

/// Highest basis index carrying weight above round-off in any vector.
fn effective_cutoff(vectors: &[Vec<f64>]) -> usize {
    vectors
        .iter()
        .map(|v| {
            let m = v.iter().fold(0.0f64, |a, c| a.max(c.abs()));
            v.iter().rposition(|c| c.abs() > 1e-14 * m).unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Composite Gauss–Legendre nodes on `[a, b]` with panels no wider than `width`.
fn panel_nodes(a: f64, b: f64, width: f64, rule: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.0.len());
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            out.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

fn localization_1d(vectors: &[Vec<f64>], basis: &Basis1D, threshold: f64) -> Vec<WellWeights> {
    let cut = effective_cutoff(vectors).max(1);
    let l = basis.length_scale;
    let reach = l * ((2.0 * cut as f64 + 1.0).sqrt() + 8.0);
    let width = 2.0 * std::f64::consts::PI * l / (2.0 * cut as f64 + 1.0).sqrt();
    let rule = gauss_legendre(16);
    let lo = -reach.max(threshold.abs() + l);
    let hi = reach.max(threshold.abs() + l);
    let mut left = vec![0.0; vectors.len()];
    let mut right = vec![0.0; vectors.len()];
    for (side, a, b) in [(0, lo, threshold), (1, threshold, hi)] {
        for (x, w) in panel_nodes(a, b, width, &rule) {
            let hf = hermite_functions(cut + 1, l, x);
            for (k, v) in vectors.iter().enumerate() {
                let psi: f64 = v[..=cut].iter().zip(&hf).map(|(c, h)| c * h).sum();
                if side == 0 {
                    left[k] += w * psi * psi;
                } else {
                    right[k] += w * psi * psi;
                }
            }
        }
    }
    left.into_iter().zip(right).map(|(left, right)| WellWeights { left, right }).collect()
}

fn localization_2d(vectors: &[Vec<f64>], basis: &Basis2D, threshold: f64) -> Vec<WellWeights> {
    // ∫|ψ|² r dr dφ = Σ_k ∫ (Σ_n c_nk φ_n(ρ²))² 2ρ dρ with ρ = r/ℓ
    let l = basis.length_scale;
    let cut_n = basis.n_max;
    let quanta = 4.0 * cut_n as f64 + 6.0 * basis.k_max as f64 + 2.0;
    let reach = quanta.sqrt() + 8.0;
    let width = 2.0 * std::f64::consts::PI / quanta.sqrt();
    let rule = gauss_legendre(16);
    let rho_b = (threshold / l).min(reach);
    let mut left = vec![0.0; vectors.len()];
    let mut right = vec![0.0; vectors.len()];
    for (side, a, b) in [(0, 0.0, rho_b), (1, rho_b, reach)] {
        for (rho, w) in panel_nodes(a, b, width, &rule) {
            let t = rho * rho;
            for k in 0..=basis.k_max {
                let f = laguerre_functions((3 * k) as f64, cut_n + 1, t);
                for (m, v) in vectors.iter().enumerate() {
                    let s: f64 = (0..=cut_n).map(|n| v[basis.index(n, k)] * f[n]).sum();
                    let contrib = w * 2.0 * rho * s * s;
                    if side == 0 {
                        left[m] += contrib;
                    } else {
                        right[m] += contrib;
                    }
                }
            }
        }
    }
    left.into_iter().zip(right).map(|(left, right)| WellWeights { left, right }).collect()
}

/// Level table along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFlow {
    pub path: PathKind,
    pub k: f64,
    pub lambdas: Vec<f64>,
    /// `energies[g][i]`: level `i` at grid point `g`.
    pub energies: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
    pub curvatures: Vec<Vec<f64>>,
    pub curvature_tail: Vec<Vec<f64>>,
    /// Curvature near-singular: degenerate partner, or a neighbour closer
    /// than ten times its relative drift over one grid step.
    pub curvature_flag: Vec<Vec<bool>>,
    pub parity: Vec<Option<Vec<i8>>>,
    /// Weight in the left (cusp) or inner (collective) well; `None` where
    /// the potential has a single well.
    pub left_weight: Vec<Option<Vec<f64>>>,
    /// `resolved_gaps[g][i]` is `E_{i+1} − E_i`, except for parity doublets
    /// of a symmetric double well, whose splitting is below the round-off
    /// of the energies and is taken from the Herring formula instead.
    pub resolved_gaps: Vec<Vec<f64>>,
    /// Worst per-level convergence error at each grid point.
    pub convergence: Vec<f64>,
    pub basis: Vec<Basis>,
}

impl LevelFlow {
    pub fn num_levels(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn level_row(&self, i: usize) -> Vec<f64> {
        self.energies.iter().map(|col| col[i]).collect()
    }

    /// Whether parity is conserved along the whole path.
    pub fn has_sectors(&self) -> bool {
        self.parity.iter().all(Option::is_some)
    }

    /// Level indices grouped by symmetry sector at grid point `g`, each
    /// ascending in energy. Parity sectors are used only when parity is
    /// conserved at every grid point.
    pub fn sectors_at(&self, g: usize) -> Vec<(Option<i8>, Vec<usize>)> {
        match (&self.parity[g], self.has_sectors()) {
            (Some(par), true) => [1i8, -1]
                .iter()
                .map(|&p| (Some(p), (0..par.len()).filter(|&i| par[i] == p).collect()))
                .collect(),
            _ => vec![(None, (0..self.num_levels()).collect())],
        }
    }

    /// Gap between levels `i < j` at grid point `g`.
    pub fn gap(&self, g: usize, i: usize, j: usize) -> f64 {
        if j == i + 1 {
            self.resolved_gaps[g][i]
        } else {
            self.energies[g][j] - self.energies[g][i]
        }
    }
}

struct PointData {
    levels: Vec<f64>,
    gaps: Vec<f64>,
    slopes: Vec<f64>,
    curv: Curvatures,
    parity: Option<Vec<i8>>,
    left: Option<Vec<f64>>,
    convergence: f64,
    basis: Basis,
}

fn point_data(path: &ParameterPath, k: f64, num_levels: usize, opts: &SolverOptions, lambda: f64) -> Result<PointData> {
    let mp = ModelPoint::new(path.spec_at(lambda), k)?;
    let wrap = |e: Error| Error::UnconvergedAt { lambda, source: Box::new(e) };
    let opts = SolverOptions { with_vectors: true, ..opts.clone() };
    let s = converged_spectrum_with(&mp, num_levels, &opts).map_err(wrap)?;
    let slopes = hf_slope(&s, path.kind)?;
    let curv = curvature(&s, path.kind)?;
    let left = match well_partition(&mp.spec) {
        Ok(th) => Some(localization(&s, th)?.iter().map(|w| w.left).collect()),
        Err(Error::SingleWell(_)) => None,
        Err(e) => return Err(e),
    };
    let mut gaps: Vec<f64> = s.levels.windows(2).map(|w| w[1] - w[0]).collect();
    if s.parity.is_some() && critical_energies(&mp.spec).is_double_well() {
        let resolution = 1e3 * f64::EPSILON * s.levels.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for d in doublet_splittings(&s)? {
            let (i, j) = (d.even_level.min(d.odd_level), d.even_level.max(d.odd_level));
            if j == i + 1 && gaps[i].abs() < resolution {
                gaps[i] = d.herring;
            }
        }
    }
    Ok(PointData {
        gaps,
        convergence: s.convergence.iter().copied().fold(0.0, f64::max),
        levels: s.levels,
        slopes,
        curv,
        parity: s.parity,
        left,
        basis: s.basis,
    })
}

/// Converged spectra at every grid point, computed in parallel and
/// assembled in grid order.
pub fn sweep(path: &ParameterPath, k: f64, num_levels: usize, opts: &SolverOptions) -> Result<LevelFlow> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("K must be positive and finite, got {k}")));
    }
    let points: Vec<PointData> = path
        .grid
        .par_iter()
        .map(|&lambda| point_data(path, k, num_levels, opts, lambda))
        .collect::<Result<Vec<_>>>()?;
    let mut flow = LevelFlow {
        path: path.kind,
        k,
        lambdas: path.grid.clone(),
        energies: Vec::with_capacity(points.len()),
        slopes: Vec::with_capacity(points.len()),
        curvatures: Vec::with_capacity(points.len()),
        curvature_tail: Vec::with_capacity(points.len()),
        curvature_flag: Vec::with_capacity(points.len()),
        parity: Vec::with_capacity(points.len()),
        left_weight: Vec::with_capacity(points.len()),
        resolved_gaps: Vec::with_capacity(points.len()),
        convergence: Vec::with_capacity(points.len()),
        basis: Vec::with_capacity(points.len()),
    };
    for p in points {
        flow.energies.push(p.levels);
        flow.resolved_gaps.push(p.gaps);
        flow.slopes.push(p.slopes);
        flow.curvatures.push(p.curv.values);
        flow.curvature_tail.push(p.curv.tail);
        flow.curvature_flag.push(p.curv.degenerate);
        flow.parity.push(p.parity);
        flow.left_weight.push(p.left);
        flow.convergence.push(p.convergence);
        flow.basis.push(p.basis);
    }
    flag_near_crossings(&mut flow);
    Ok(flow)
}

fn flag_near_crossings(flow: &mut LevelFlow) {
    let n = flow.lambdas.len();
    if n < 2 {
        return;
    }
    for g in 0..n {
        let step = match g {
            0 => flow.lambdas[1] - flow.lambdas[0],
            _ if g == n - 1 => flow.lambdas[g] - flow.lambdas[g - 1],
            _ => (flow.lambdas[g + 1] - flow.lambdas[g]).max(flow.lambdas[g] - flow.lambdas[g - 1]),
        };
        for (_, idx) in flow.sectors_at(g) {
            for w in idx.windows(2) {
                let (i, j) = (w[0], w[1]);
                let gap = flow.gap(g, i, j);
                let drift = 10.0 * step * (flow.slopes[g][j] - flow.slopes[g][i]).abs();
                if gap < drift {
                    flow.curvature_flag[g][i] = true;
                    flow.curvature_flag[g][j] = true;
                }
            }
        }
    }
}

/// A local minimum of the gap between sector neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvoidedCrossing {
    pub sector: Option<i8>,
    /// Rank of the lower level within its sector.
    pub rank: usize,
    /// Global index of the lower level at the grid point nearest `lambda`.
    pub lower: usize,
    pub lambda: f64,
    pub gap: f64,
    /// Mean energy of the pair at the refined position.
    pub energy: f64,
}

/// Local gap minima between adjacent levels of one sector, refined by a
/// parabola through the squared gaps (exact for a two-level hyperbola).
pub fn avoided_crossings(flow: &LevelFlow) -> Result<Vec<AvoidedCrossing>> {
    let n = flow.lambdas.len();
    if n < 3 {
        return Err(Error::InvalidArgument("avoided-crossing search needs at least 3 grid points".into()));
    }
    let sector_ids: Vec<Option<i8>> = flow.sectors_at(0).into_iter().map(|s| s.0).collect();
    let mut out = Vec::new();
    for sid in sector_ids {
        let per_point: Vec<Vec<usize>> = (0..n)
            .map(|g| flow.sectors_at(g).into_iter().find(|s| s.0 == sid).map(|s| s.1).unwrap_or_default())
            .collect();
        let ranks = per_point.iter().map(Vec::len).min().unwrap_or(0);
        for rank in 0..ranks.saturating_sub(1) {
            let gap = |g: usize| {
                let (i, j) = (per_point[g][rank], per_point[g][rank + 1]);
                flow.gap(g, i, j)
            };
            let mean = |g: usize| {
                let (i, j) = (per_point[g][rank], per_point[g][rank + 1]);
                0.5 * (flow.energies[g][j] + flow.energies[g][i])
            };
            for g in 1..n - 1 {
                let (a, b, c) = (gap(g - 1), gap(g), gap(g + 1));
                if !(b < a && b <= c) {
                    continue;
                }
                let (x0, x1, x2) = (flow.lambdas[g - 1], flow.lambdas[g], flow.lambdas[g + 1]);
                let (lam, g2) = parabola_min((x0, a * a), (x1, b * b), (x2, c * c)).unwrap_or((x1, b * b));
                let (lam, gmin) = if g2 > 0.0 && g2 <= b * b && lam > x0 && lam < x2 { (lam, g2.sqrt()) } else { (x1, b) };
                let e = mean(g) + (lam - x1) * (mean(g + 1) - mean(g - 1)) / (x2 - x0);
                out.push(AvoidedCrossing { sector: sid, rank, lower: per_point[g][rank], lambda: lam, gap: gmin, energy: e });
            }
        }
    }
    out.sort_by(|p, q| p.lambda.total_cmp(&q.lambda).then(p.lower.cmp(&q.lower)));
    Ok(out)
}

/// Vertex of the parabola through three points, if it opens upwards.
fn parabola_min(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a <= 0.0 {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let x = -b / (2.0 * a);
    let y = y1 + (x - x1) * (d01 + a * (x - x0));
    Some((x, y))
}

/// One parity doublet below the barrier of a symmetric double well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Doublet {
    pub index: usize,
    /// Positions of the two members in the spectrum.
    pub even_level: usize,
    pub odd_level: usize,
    pub even_energy: f64,
    pub odd_energy: f64,
    /// `E₋ − E₊` from the eigenvalues; limited by round-off (~1e-16 ‖H‖).
    pub direct: f64,
    /// `(K²/2) ψ₊(0) ψ₋'(0) / ∫₀^∞ ψ₊ψ₋ dx`, with the values at the origin
    /// carried in from the inner turning point by outward integration.
    pub herring: f64,
}

/// Tunnelling splittings of the parity doublets below the barrier.
pub fn doublet_splittings(spectrum: &Spectrum) -> Result<Vec<Doublet>> {
    let spec = spectrum.model_point.spec;
    if spec.model != Model::Cusp || spec.q != 0.0 {
        return Err(Error::ParityUndefined("the potential is not symmetric under x → −x".into()));
    }
    let ce = critical_energies(&spec);
    let barrier = ce.barrier.ok_or_else(|| Error::SingleWell("no barrier between two minima".into()))?;
    let basis = match spectrum.basis {
        Basis::One(b) => b,
        Basis::Two(_) => return Err(Error::ModelMismatch("doublets need a 1D basis".into())),
    };
    let parity = match &spectrum.parity {
        Some(p) => p.clone(),
        None => parity_label(spectrum)?,
    };
    let even: Vec<usize> = (0..parity.len()).filter(|&i| parity[i] == 1).collect();
    let odd: Vec<usize> = (0..parity.len()).filter(|&i| parity[i] == -1).collect();
    let k = spectrum.model_point.k;
    let mut out = Vec::new();
    for (n, (&ip, &im)) in even.iter().zip(&odd).enumerate() {
        let (ep, em) = (spectrum.levels[ip], spectrum.levels[im]);
        if ep.max(em) >= barrier {
            break;
        }
        let e_mid = 0.5 * (ep + em);
        // inner turning point x_t > 0 of x⁴ + a x² = E
        let a = spec.p;
        let xt = ((-a - (a * a + 4.0 * e_mid).sqrt()) / 2.0).sqrt();
        let (vp, _) = wavefunction_1d(&spectrum.vectors[ip], &basis, xt)?;
        let (vm, _) = wavefunction_1d(&spectrum.vectors[im], &basis, xt)?;
        let up = outward(&spec, k, ep, 1.0, 0.0, xt);
        let um = outward(&spec, k, em, 0.0, 1.0, xt);
        let psi0 = vp / up;
        let dpsi0 = vm / um;
        let overlap = half_line_overlap(&spectrum.vectors[ip], &spectrum.vectors[im], &basis);
        let herring = 0.5 * k * k * psi0 * dpsi0 / overlap;
        out.push(Doublet { index: n, even_level: ip, odd_level: im, even_energy: ep, odd_energy: em, direct: em - ep, herring });
    }
    Ok(out)
}

/// `u(x_end)` for `u'' = (2/K²)(V − E) u` from `x = 0`, classical RK4.
fn outward(spec: &PotentialSpec, k: f64, e: f64, u0: f64, du0: f64, x_end: f64) -> f64 {
    let steps = 40_000usize;
    let h = x_end / steps as f64;
    let c = 2.0 / (k * k);
    let f = |x: f64| c * (spec.cusp_value(x) - e);
    let (mut u, mut du) = (u0, du0);
    let mut x = 0.0;
    for _ in 0..steps {
        let k1u = du;
        let k1d = f(x) * u;
        let k2u = du + 0.5 * h * k1d;
        let k2d = f(x + 0.5 * h) * (u + 0.5 * h * k1u);
        let k3u = du + 0.5 * h * k2d;
        let k3d = f(x + 0.5 * h) * (u + 0.5 * h * k2u);
        let k4u = du + h * k3d;
        let k4d = f(x + h) * (u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        x += h;
    }
    u
}

fn half_line_overlap(a: &[f64], b: &[f64], basis: &Basis1D) -> f64 {
    let pair = [a.to_vec(), b.to_vec()];
    let cut = effective_cutoff(&pair).max(1);
    let l = basis.length_scale;
    let reach = l * ((2.0 * cut as f64 + 1.0).sqrt() + 8.0);
    let width = 2.0 * std::f64::consts::PI * l / (2.0 * cut as f64 + 1.0).sqrt();
    let rule = gauss_legendre(16);
    panel_nodes(0.0, reach, width, &rule)
        .into_iter()
        .map(|(x, w)| {
            let hf = hermite_functions(cut + 1, l, x);
            let pa: f64 = a[..=cut].iter().zip(&hf).map(|(c, h)| c * h).sum();
            let pb: f64 = b[..=cut].iter().zip(&hf).map(|(c, h)| c * h).sum();
            w * pa * pb
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{converged_spectrum, solve_fixed};

    fn spectrum(kind: PathKind, lambda: f64, k: f64, n: usize) -> Spectrum {
        converged_spectrum(&ModelPoint::new(kind.spec(lambda), k).unwrap(), n, 1e-11).unwrap()
    }

    #[test]
    fn path_validation() {
        assert!(ParameterPath::new(PathKind::CuspFirstOrder, vec![]).is_err());
        assert!(ParameterPath::new(PathKind::CuspFirstOrder, vec![0.1, 0.1]).is_err());
        assert!(ParameterPath::new(PathKind::CuspFirstOrder, vec![0.2, 0.1]).is_err());
        let p = ParameterPath::linspace(PathKind::Collective, 0.0, 1.0, 5).unwrap();
        assert_eq!(p.grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.spec_at(0.5), PotentialSpec::collective(0.5, 1.0));
    }

    #[test]
    fn slope_symmetry_and_sign() {
        let s = spectrum(PathKind::CuspFirstOrder, 0.0, 0.03, 12);
        let m = s.levels.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        for sl in hf_slope(&s, PathKind::CuspFirstOrder).unwrap() {
            assert!(sl.abs() < 1e-8 * m.max(1.0));
        }
        let s = spectrum(PathKind::CuspSecondOrder, -0.5, 0.03, 12);
        assert!(hf_slope(&s, PathKind::CuspSecondOrder).unwrap().iter().all(|x| *x > 0.0));
        assert!(hf_slope(&s, PathKind::CuspFirstOrder).is_err());
    }

    fn fixed_levels(s: &Spectrum, kind: PathKind, lambda: f64, n: usize) -> Vec<f64> {
        let mp = ModelPoint::new(kind.spec(lambda), s.model_point.k).unwrap();
        solve_fixed(&mp, &s.basis, n, false).unwrap().values
    }

    /// Richardson-extrapolated central difference at fixed basis.
    fn fd_slope(s: &Spectrum, kind: PathKind, lambda: f64, h: f64, n: usize) -> Vec<f64> {
        let d = |h: f64| {
            let p = fixed_levels(s, kind, lambda + h, n);
            let m = fixed_levels(s, kind, lambda - h, n);
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>()
        };
        let (a, b) = (d(h), d(h / 2.0));
        a.iter().zip(&b).map(|(x, y)| (4.0 * y - x) / 3.0).collect()
    }

    #[test]
    fn hf_matches_fd() {
        for (kind, lam, k) in [
            (PathKind::CuspFirstOrder, -0.2, 0.02),
            (PathKind::CuspSecondOrder, 0.3, 0.02),
            (PathKind::Collective, 0.3, 0.02),
        ] {
            let s = spectrum(kind, lam, k, 15);
            let hf = hf_slope(&s, kind).unwrap();
            let fd = fd_slope(&s, kind, lam, 1e-5, 15);
            for (a, b) in hf.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-3), "{kind:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_level_curvature() {
        // H(λ) = diag(0, Δ) + λ c σx: Ë = ∓2c²/Δ at λ = 0
        let (delta, c) = (0.7, 0.3);
        let mut h = SymBandMatrix::zeros(2, 1);
        h.set(1, 1, delta);
        let mut d = SymBandMatrix::zeros(2, 1);
        d.set(1, 0, c);
        let vecs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cv = curvature_in_basis(&h, &d, &[0.0, delta], &vecs, None);
        assert!((cv.values[0] + 2.0 * c * c / delta).abs() < 1e-14);
        assert!((cv.values[1] - 2.0 * c * c / delta).abs() < 1e-14);
        assert!(cv.tail.iter().all(|t| t.abs() < 1e-14));
        // closed-form diagonalization
        let e = |l: f64| 0.5 * delta - (0.25 * delta * delta + l * l * c * c).sqrt();
        let step = 1e-4;
        let fd = (e(step) - 2.0 * e(0.0) + e(-step)) / (step * step);
        assert!((fd - cv.values[0]).abs() < 1e-6);
    }

    #[test]
    fn curvature_matches_fd_and_ground_sign() {
        for (kind, lam, k) in [(PathKind::CuspFirstOrder, -0.25, 0.03), (PathKind::CuspSecondOrder, 0.4, 0.03), (PathKind::Collective, 0.35, 0.02)] {
            let s = spectrum(kind, lam, k, 10);
            let c = curvature(&s, kind).unwrap();
            assert!(c.window_sum[0] <= 0.0);
            assert!(c.values[0] <= 0.0);
            // FD of HF slopes at fixed basis
            let slope_at = |l: f64| {
                let mp = ModelPoint::new(kind.spec(l), k).unwrap();
                let fs = solve_fixed(&mp, &s.basis, 10, true).unwrap();
                let sp = Spectrum {
                    model_point: mp,
                    levels: fs.values,
                    vectors: fs.vectors,
                    basis: s.basis,
                    convergence: vec![0.0; 10],
                    parity: fs.parity,
                };
                hf_slope(&sp, kind).unwrap()
            };
            let h = 1e-4;
            let (p, m) = (slope_at(lam + h), slope_at(lam - h));
            for i in 0..10 {
                let fd = (p[i] - m[i]) / (2.0 * h);
                assert!((fd - c.values[i]).abs() <= 1e-3 * c.values[i].abs().max(1e-2), "{kind:?} level {i}: {fd} vs {}", c.values[i]);
            }
        }
    }

    #[test]
    fn parity_labels() {
        let s = spectrum(PathKind::CuspSecondOrder, -1.0, 0.05, 10);
        let p = parity_label(&s).unwrap();
        assert_eq!(p[0], 1);
        assert_eq!(p, s.parity.clone().unwrap());
        let bigger = converged_spectrum(&ModelPoint::new(PathKind::CuspSecondOrder.spec(-1.0), 0.05).unwrap(), 10, 1e-13).unwrap();
        assert_eq!(parity_label(&bigger).unwrap(), p);
        let s1 = spectrum(PathKind::CuspFirstOrder, 0.1, 0.05, 4);
        assert!(matches!(parity_label(&s1), Err(Error::ParityUndefined(_))));
    }

    #[test]
    fn localization_weights() {
        let s = spectrum(PathKind::CuspSecondOrder, -1.0, 0.02, 4);
        let th = well_partition(&s.model_point.spec).unwrap();
        assert!(th.abs() < 1e-12);
        for w in localization(&s, th).unwrap() {
            assert!((w.left + w.right - 1.0).abs() < 1e-6);
            assert!((w.left - 0.5).abs() < 1e-6);
        }
        let s = spectrum(PathKind::CuspFirstOrder, -0.2, 0.01, 3);
        let th = well_partition(&s.model_point.spec).unwrap();
        let w = localization(&s, th).unwrap();
        // with b < 0 the lower well is at x > 0
        assert!(w[0].right > 0.99);
        let s = spectrum(PathKind::CuspSecondOrder, 1.0, 0.05, 3);
        assert!(matches!(localization(&s, 0.0), Err(Error::SingleWell(_))));
    }

    #[test]
    fn collective_localization_normalized() {
        let s = spectrum(PathKind::Collective, 0.25, 0.01, 8);
        let th = well_partition(&s.model_point.spec).unwrap();
        assert!((th - 0.25).abs() < 1e-12);
        for w in localization(&s, th).unwrap() {
            assert!((w.left + w.right - 1.0).abs() < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn herring_matches_direct_for_resolvable_doublets() {
        let s = spectrum(PathKind::CuspSecondOrder, -1.0, 0.04, 12);
        let d = doublet_splittings(&s).unwrap();
        assert!(d.len() >= 2);
        let mut checked = 0;
        for x in &d {
            assert!(x.herring > 0.0);
            if x.direct > 1e-9 {
                assert!((x.herring / x.direct - 1.0).abs() < 1e-4, "{x:?}");
                checked += 1;
            }
        }
        assert!(checked >= 1);
        for w in d.windows(2) {
            assert!(w[1].herring > w[0].herring);
        }
    }

    #[test]
    fn sweep_single_point_and_crossings() {
        let opts = SolverOptions { tol: 1e-10, ..SolverOptions::default() };
        let p = ParameterPath::new(PathKind::CuspFirstOrder, vec![0.1]).unwrap();
        let f = sweep(&p, 0.05, 6, &opts).unwrap();
        assert_eq!(f.lambdas.len(), 1);
        assert_eq!(f.slopes[0].len(), 6);
        assert!(avoided_crossings(&f).is_err());

        let p = ParameterPath::linspace(PathKind::CuspFirstOrder, -0.4, 0.4, 41).unwrap();
        let f = sweep(&p, 0.02, 12, &opts).unwrap();
        let ac = avoided_crossings(&f).unwrap();
        assert!(!ac.is_empty());
        assert!(ac.iter().all(|a| a.gap > 0.0));
        for g in 0..41 {
            for w in f.energies[g].windows(2) {
                assert!(w[1] > w[0]);
            }
        }

        // harmonic, single-well region: gaps change monotonically
        let p = ParameterPath::linspace(PathKind::CuspSecondOrder, 1.0, 2.0, 11).unwrap();
        let f = sweep(&p, 0.05, 6, &opts).unwrap();
        assert!(avoided_crossings(&f).unwrap().is_empty());
        assert!(f.left_weight.iter().all(Option::is_none));
    }
}
