//! Level-density histograms, counting functions and slope fits between the
//! classical critical energies.

use rayon::prelude::*;

use crate::basis::{Basis, Basis1D, Basis2D};
use crate::classical::{classify_singularity, smoothed_count, w_volume, Singularity};
use crate::error::{Error, Result};
use crate::potentials::{stationary_points, PotentialSpec, StationaryKind};
use crate::spectra::{assemble, enlarge, initial_basis, ModelPoint, SolverOptions};

/// Median bin population targeted by `default_bin_width`.
pub const MEDIAN_BIN_COUNT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub energy: f64,
    pub kind: StationaryKind,
    pub singularity: Singularity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `counts / bin width`.
    pub density: Vec<f64>,
    pub markers: Vec<Marker>,
    pub k: Option<f64>,
}

impl DensityHistogram {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Bin containing `e`; the last bin is closed on the right.
    pub fn bin_of(&self, e: f64) -> Option<usize> {
        let n = self.counts.len();
        if !(e >= self.edges[0] && e <= self.edges[n]) {
            return None;
        }
        let i = ((e - self.edges[0]) / self.bin_width()).floor() as usize;
        Some(i.min(n - 1))
    }
}

fn markers_for(spec: &PotentialSpec) -> Vec<Marker> {
    stationary_points(spec)
        .iter()
        .map(|sp| Marker { energy: sp.energy, kind: sp.kind, singularity: classify_singularity(spec, sp) })
        .collect()
}

fn build(edges: Vec<f64>, counts: Vec<usize>, spec: &PotentialSpec, k: Option<f64>) -> DensityHistogram {
    let density = edges.windows(2).zip(&counts).map(|(w, &c)| c as f64 / (w[1] - w[0])).collect();
    DensityHistogram { edges, counts, density, markers: markers_for(spec), k }
}

/// Uniform bins of width `bin_width` starting at the lowest level and
/// covering the highest one.
pub fn histogram(levels: &[f64], bin_width: f64, spec: &PotentialSpec, k: Option<f64>) -> Result<DensityHistogram> {
    if levels.is_empty() {
        return Err(Error::Empty("histogram of an empty level list".into()));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width must be positive, got {bin_width}")));
    }
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nb = (((hi - lo) / bin_width).floor() as usize + 1).max(1);
    let edges: Vec<f64> = (0..=nb).map(|i| lo + i as f64 * bin_width).collect();
    let mut counts = vec![0usize; nb];
    for &e in levels {
        // levels sitting on an edge (up to rounding) go to the upper bin
        let i = (((e - lo) / bin_width + 1e-9).floor() as usize).min(nb - 1);
        counts[i] += 1;
    }
    Ok(build(edges, counts, spec, k))
}

/// Histogram from a counting function sampled at the bin edges:
/// `counts[i] = N(edges[i+1]) − N(edges[i])`.
pub fn histogram_from_staircase(edges: &[f64], cumulative: &[usize], spec: &PotentialSpec, k: Option<f64>) -> Result<DensityHistogram> {
    if edges.len() < 2 || cumulative.len() != edges.len() {
        return Err(Error::InvalidArgument("need at least two edges and one count per edge".into()));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("bin edges must be strictly ascending".into()));
    }
    if cumulative.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Numerical("counting function decreases".into()));
    }
    let counts = cumulative.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(build(edges.to_vec(), counts, spec, k))
}

/// Number of levels `≤ e` in a sorted list.
pub fn staircase(levels: &[f64], e: f64) -> usize {
    levels.partition_point(|&x| x <= e)
}

/// Smallest bin width (growing from the mean level spacing × target) whose
/// median bin holds at least `MEDIAN_BIN_COUNT` levels.
pub fn default_bin_width(levels: &[f64]) -> Result<f64> {
    if levels.len() < 2 {
        return Err(Error::Empty("need at least two levels to choose a bin width".into()));
    }
    let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span <= 0.0 {
        return Err(Error::InvalidArgument("all levels coincide".into()));
    }
    let mut w = span * MEDIAN_BIN_COUNT as f64 / levels.len() as f64;
    loop {
        let nb = (span / w).floor() as usize + 1;
        if nb == 1 {
            return Ok(w);
        }
        let mut counts = vec![0usize; nb];
        for &e in levels {
            counts[(((e - lo) / w).floor() as usize).min(nb - 1)] += 1;
        }
        counts.sort_unstable();
        if counts[nb / 2] >= MEDIAN_BIN_COUNT {
            return Ok(w);
        }
        w *= 1.1;
    }
}

/// `K` for which the Weyl estimate places `target` levels below `e_top`.
pub fn select_k(spec: &PotentialSpec, e_top: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("target count must be positive, got {target}")));
    }
    let w = w_volume(spec, e_top)?;
    if w <= 0.0 {
        return Err(Error::Domain(format!("no classically allowed region below E = {e_top}")));
    }
    let f = spec.dof() as f64;
    Ok((w / target).powf(1.0 / f) / (2.0 * std::f64::consts::PI))
}

/// Eigenvalue counts `#{E_i < e}` of the Hamiltonian in a fixed basis, from
/// the inertia of `H − e` (no eigenvectors, no full spectrum).
pub fn counting_function(mp: &ModelPoint, basis: &Basis, energies: &[f64]) -> Result<Vec<usize>> {
    let h = assemble(mp, basis)?;
    Ok(energies.par_iter().map(|&e| h.count_below(e)).collect())
}

/// Inverse of one enlargement step, kept large enough for `min_dim` states.
fn shrink(basis: &Basis, min_dim: usize) -> Basis {
    let smaller = match basis {
        Basis::One(b) => Basis::One(Basis1D { size: b.size / 2, length_scale: b.length_scale }),
        Basis::Two(b) => Basis::Two(Basis2D { n_max: b.n_max * 2 / 3, k_max: b.k_max * 2 / 3, length_scale: b.length_scale }),
    };
    if smaller.dim() >= min_dim { smaller } else { *basis }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedCounts {
    pub energies: Vec<f64>,
    pub counts: Vec<usize>,
    pub basis: Basis,
}

/// Counting function converged under basis enlargement: the counts in two
/// successive bases agree exactly at every energy. The starting basis holds
/// the Weyl estimate of the top count in its lower half.
pub fn converged_counts(mp: &ModelPoint, energies: &[f64], opts: &SolverOptions) -> Result<ConvergedCounts> {
    let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if energies.is_empty() || !top.is_finite() {
        return Err(Error::Empty("no energies to count at".into()));
    }
    let cap = match mp.spec.dof() {
        1 => opts.cap_1d,
        _ => opts.cap_2d,
    };
    let estimate = (smoothed_count(&mp.spec, mp.k, top)?.ceil() as usize).max(1);
    let mut basis = match opts.initial {
        Some(b) => b,
        // Counts only need each level placed on the right side of an edge,
        // far looser than the eigenvalue tolerance the spectrum rule sizes
        // for; start one enlargement step lower.
        None => shrink(&initial_basis(mp, estimate, opts.scale)?, 2 * estimate),
    };
    let mut prev = counting_function(mp, &basis, energies)?;
    loop {
        let next = enlarge(&basis);
        if next.dim() > cap {
            let worst = prev.iter().copied().max().unwrap_or(0);
            return Err(Error::Unconverged { cap, worst_error: f64::NAN, errors: vec![worst as f64] });
        }
        let cur = counting_function(mp, &next, energies)?;
        log::debug!("counts in basis {} vs {}: top {} vs {}", basis.dim(), next.dim(), prev.last().unwrap(), cur.last().unwrap());
        basis = next;
        if cur == prev && 2 * cur.iter().copied().max().unwrap_or(0) <= basis.dim() {
            return Ok(ConvergedCounts { energies: energies.to_vec(), counts: cur, basis });
        }
        prev = cur;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the fit residuals.
    pub slope_se: f64,
    /// Bins fitted (lying wholly inside the segment).
    pub bins: usize,
    pub rss: f64,
    /// Fewer than three populated bins.
    pub underpopulated: bool,
}

impl Segment {
    /// `|Δslope| / √(se₁² + se₂²)`.
    pub fn separation(&self, other: &Segment) -> f64 {
        (self.slope - other.slope).abs() / self.slope_se.hypot(other.slope_se)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFit {
    pub breakpoints: Vec<f64>,
    pub segments: Vec<Segment>,
    /// Residual sum of squares over all fitted bins.
    pub residual: f64,
    /// Breakpoints where `V(E)` diverges; a linear fit is poor next to them.
    pub singular_breakpoints: Vec<f64>,
    pub flagged: bool,
}

impl SegmentFit {
    /// Smallest pairwise slope separation in units of the combined error.
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.segments.len() {
            for j in i + 1..self.segments.len() {
                m = m.min(self.segments[i].separation(&self.segments[j]));
            }
        }
        m
    }
}

/// Least-squares line through `(x, y)`: slope, intercept, slope error, rss.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    if x.len() < 2 || sxx == 0.0 {
        return (f64::NAN, ym, f64::INFINITY, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (m - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, intercept, se, rss)
}

/// Independent straight-line fits of the density between consecutive
/// stationary energies lying inside the histogram range. Bins straddling a
/// breakpoint, and a partially covered last bin, are left out.
pub fn slope_segments(hist: &DensityHistogram) -> Result<SegmentFit> {
    if hist.total() == 0 {
        return Err(Error::Empty("histogram holds no levels".into()));
    }
    let lo = hist.edges[0];
    let hi = *hist.edges.last().unwrap();
    let mut inside: Vec<&Marker> = hist.markers.iter().filter(|m| m.energy > lo && m.energy < hi).collect();
    inside.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    inside.dedup_by(|a, b| (a.energy - b.energy).abs() <= 1e-12 * (1.0 + b.energy.abs()));
    let breakpoints: Vec<f64> = inside.iter().map(|m| m.energy).collect();
    let singular_breakpoints: Vec<f64> =
        inside.iter().filter(|m| m.singularity == Singularity::LogDivergence).map(|m| m.energy).collect();
    let mut bounds = vec![lo];
    bounds.extend(&breakpoints);
    bounds.push(hi);
    // the last bin is only partly covered by levels
    let usable = hist.counts.len().saturating_sub(1).max(1);
    let mut segments = Vec::new();
    let mut residual = 0.0;
    for w in bounds.windows(2) {
        let (x, y): (Vec<f64>, Vec<f64>) = (0..usable)
            .filter(|&i| hist.edges[i] >= w[0] && hist.edges[i + 1] <= w[1])
            .map(|i| (0.5 * (hist.edges[i] + hist.edges[i + 1]), hist.density[i]))
            .unzip();
        let populated = y.iter().filter(|&&d| d > 0.0).count();
        let (slope, intercept, slope_se, rss) = fit_line(&x, &y);
        residual += rss;
        segments.push(Segment {
            lo: w[0],
            hi: w[1],
            slope,
            intercept,
            slope_se,
            bins: x.len(),
            rss,
            underpopulated: populated < 3,
        });
    }
    let flagged = !singular_breakpoints.is_empty() || segments.iter().any(|s| s.underpopulated);
    Ok(SegmentFit { breakpoints, segments, residual, singular_breakpoints, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::smoothed_density;
    use crate::potentials::{critical_energies, PathKind};
    use crate::spectra::converged_spectrum;
    use proptest::prelude::*;

    #[test]
    fn uniform_spectrum() {
        let s = 0.01;
        let levels: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) * s).collect();
        let spec = PotentialSpec::cusp(1.0, 0.0);
        let h = histogram(&levels, 10.0 * s, &spec, None).unwrap();
        let n = h.counts.len();
        for i in 1..n - 1 {
            assert!((h.density[i] - 1.0 / s).abs() < 1e-6 / s, "bin {i}: {}", h.density[i]);
        }
        assert_eq!(h.total(), 1000);
        assert!(histogram(&[], 1.0, &spec, None).is_err());
        assert!(histogram(&levels, 0.0, &spec, None).is_err());
    }

    #[test]
    fn staircase_limits() {
        let levels = [0.1, 0.2, 0.2, 0.5];
        assert_eq!(staircase(&levels, 0.0), 0);
        assert_eq!(staircase(&levels, 0.2), 3);
        assert_eq!(staircase(&levels, 9.0), 4);
    }

    #[test]
    fn staircase_follows_weyl() {
        let spec = PathKind::CuspFirstOrder.spec(-0.3);
        let k = 2e-3;
        let mp = ModelPoint::new(spec, k).unwrap();
        let levels = converged_spectrum(&mp, 300, 1e-9).unwrap().levels;
        let e = levels[200] + 0.3 * (levels[201] - levels[200]);
        let weyl = w_volume(&spec, e).unwrap() / (2.0 * std::f64::consts::PI * k);
        let n = staircase(&levels, e) as f64;
        assert!((n - weyl).abs() < 0.02 * weyl, "{n} vs {weyl}");
    }

    #[test]
    fn density_against_weyl_away_from_critical_energies() {
        let spec = PathKind::CuspFirstOrder.spec(-0.3);
        let k = 1e-3;
        let mp = ModelPoint::new(spec, k).unwrap();
        let levels = converged_spectrum(&mp, 1000, 1e-9).unwrap().levels;
        let h = histogram(&levels, default_bin_width(&levels).unwrap(), &spec, Some(k)).unwrap();
        let w = h.bin_width();
        let crit = critical_energies(&spec).to_vec();
        let mut checked = 0;
        for (i, c) in h.centers().iter().enumerate().take(h.counts.len() - 1) {
            if h.counts[i] < 30 || crit.iter().any(|e| (e - c).abs() <= 3.5 * w) {
                continue;
            }
            // bin average of the smooth density from the Weyl count
            let smooth = (smoothed_count(&spec, k, h.edges[i + 1]).unwrap() - smoothed_count(&spec, k, h.edges[i]).unwrap()) / w;
            assert!((h.density[i] / smooth - 1.0).abs() < 0.05, "bin {i}: {} vs {smooth}", h.density[i]);
            checked += 1;
        }
        assert!(checked > 5);
        let mid = smoothed_density(&spec, k, 0.5 * (levels[0] + levels[999])).unwrap();
        assert!(mid > 0.0);
    }

    #[test]
    fn default_width_median() {
        let levels: Vec<f64> = (0..5000).map(|i| (i as f64).sqrt()).collect();
        let w = default_bin_width(&levels).unwrap();
        let h = histogram(&levels, w, &PotentialSpec::cusp(1.0, 0.0), None).unwrap();
        let mut c = h.counts.clone();
        c.sort_unstable();
        assert!(c[c.len() / 2] >= MEDIAN_BIN_COUNT);
    }

    #[test]
    fn select_k_hits_target() {
        let spec = PotentialSpec::collective(0.22, 1.0);
        let k = select_k(&spec, 0.02, 3000.0).unwrap();
        let n = smoothed_count(&spec, k, 0.02).unwrap();
        assert!((n / 3000.0 - 1.0).abs() < 1e-9);
        assert!(select_k(&spec, -1.0, 3000.0).is_err());
    }

    #[test]
    fn counting_matches_eigenvalues() {
        let mp = ModelPoint::new(PotentialSpec::collective(0.1, 1.0), 2e-2).unwrap();
        let sp = converged_spectrum(&mp, 40, 1e-10).unwrap();
        let probes: Vec<f64> = (0..39).map(|i| 0.5 * (sp.levels[i] + sp.levels[i + 1])).collect();
        let c = converged_counts(&mp, &probes, &SolverOptions::default()).unwrap();
        assert_eq!(c.counts, (1..40).collect::<Vec<_>>());
        let h = histogram_from_staircase(&probes, &c.counts, &mp.spec, Some(mp.k)).unwrap();
        assert_eq!(h.total(), 38);
    }

    #[test]
    fn single_well_one_segment() {
        let spec = PotentialSpec::cusp(1.0, 0.0);
        let levels: Vec<f64> = (0..2000).map(|i| 0.01 * i as f64).collect();
        let h = histogram(&levels, 0.5, &spec, None).unwrap();
        let fit = slope_segments(&h).unwrap();
        assert_eq!(fit.segments.len(), 1);
        assert!(fit.breakpoints.is_empty());
        assert!(!fit.flagged);
    }

    #[test]
    fn barrier_breakpoint_is_flagged() {
        let spec = PathKind::CuspSecondOrder.spec(-1.0);
        let mp = ModelPoint::new(spec, 2e-3).unwrap();
        let levels = converged_spectrum(&mp, 600, 1e-8).unwrap().levels;
        let h = histogram(&levels, default_bin_width(&levels).unwrap(), &spec, Some(mp.k)).unwrap();
        let fit = slope_segments(&h).unwrap();
        assert!(fit.flagged);
        assert_eq!(fit.singular_breakpoints, vec![0.0]);
        // markers inside the range are exactly the breakpoints
        let inner: Vec<f64> = h.markers.iter().map(|m| m.energy).filter(|&e| e > h.edges[0]).collect();
        assert_eq!(fit.breakpoints, inner);
    }

    #[test]
    fn straddling_bins_excluded() {
        let spec = PathKind::CuspFirstOrder.spec(-0.3);
        let ce = critical_energies(&spec);
        let levels: Vec<f64> = (0..3000).map(|i| ce.global_min + 1e-3 * i as f64).collect();
        let h = histogram(&levels, 0.05, &spec, None).unwrap();
        let fit = slope_segments(&h).unwrap();
        for s in &fit.segments {
            let used = (0..h.counts.len() - 1).filter(|&i| h.edges[i] >= s.lo && h.edges[i + 1] <= s.hi).count();
            assert_eq!(used, s.bins);
        }
        let all: usize = fit.segments.iter().map(|s| s.bins).sum();
        assert!(all < h.counts.len() - 1);
    }

    proptest! {
        #[test]
        fn counts_sum_and_integral(mut levels in prop::collection::vec(-3.0f64..3.0, 1..300), w in 0.01f64..2.0) {
            levels.sort_by(f64::total_cmp);
            let h = histogram(&levels, w, &PotentialSpec::cusp(-1.0, 0.0), None).unwrap();
            prop_assert_eq!(h.total(), levels.len());
            let integral: f64 = h.density.iter().map(|d| d * w).sum();
            prop_assert!((integral - levels.len() as f64).abs() < 1e-9 * levels.len() as f64);
            prop_assert!(h.density.iter().all(|&d| d >= 0.0));
        }
    }
}
