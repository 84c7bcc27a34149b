//! Hamiltonian assembly, diagonalization and basis-convergence control.

use crate::basis::{matrix_1d, matrix_2d, Basis, Basis1D, Basis2D, OpTag};
use crate::classical::{minimum_energy, smoothed_count};
use crate::error::{Error, Result};
use crate::linalg::SymBandMatrix;
use crate::potentials::{Model, PotentialSpec};

pub use crate::linalg::{eigensolve, EigenPairs};

/// A potential together with the classicality constant `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub spec: PotentialSpec,
    pub k: f64,
}

impl ModelPoint {
    pub fn new(spec: PotentialSpec, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("K must be positive and finite, got {k}")));
        }
        Ok(ModelPoint { spec, k })
    }
}

/// Assembles `H = (K²/2) p² + x⁴ + a x² + b x` or
/// `H = −(K²/2)∇² + r⁴ + A r² + B r³ cos 3φ` in band storage.
pub fn assemble(mp: &ModelPoint, basis: &Basis) -> Result<SymBandMatrix> {
    match (mp.spec.model, basis) {
        (Model::Cusp, Basis::One(b)) => {
            let mut h = matrix_1d(b, OpTag::X4)?.matrix;
            h.axpy(0.5 * mp.k * mp.k, &matrix_1d(b, OpTag::P2)?.matrix);
            if mp.spec.p != 0.0 {
                h.axpy(mp.spec.p, &matrix_1d(b, OpTag::X2)?.matrix);
            }
            if mp.spec.q != 0.0 {
                h.axpy(mp.spec.q, &matrix_1d(b, OpTag::X)?.matrix);
            }
            Ok(h)
        }
        (Model::Collective, Basis::Two(b)) => {
            let mut h = matrix_2d(b, OpTag::R4)?.matrix;
            h.axpy(1.0, &matrix_2d(b, OpTag::Kinetic2D { k: mp.k })?.matrix);
            if mp.spec.p != 0.0 {
                h.axpy(mp.spec.p, &matrix_2d(b, OpTag::R2)?.matrix);
            }
            if mp.spec.q != 0.0 && b.k_max > 0 {
                h.axpy(mp.spec.q, &matrix_2d(b, OpTag::R3Cos3Phi)?.matrix);
            }
            Ok(h)
        }
        (m, b) => Err(Error::ModelMismatch(format!("{m:?} model with a {}-dimensional basis", match b {
            Basis::One(_) => 1,
            Basis::Two(_) => 2,
        }))),
    }
}

/// Eigenvalues (and optionally eigenvectors) at a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSolve {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `+1`/`−1` per level when the Hamiltonian conserves parity (cusp, `b = 0`).
    pub parity: Option<Vec<i8>>,
}

/// Whether the 1D Hamiltonian splits into even and odd sectors.
pub fn has_parity(spec: &PotentialSpec) -> bool {
    spec.model == Model::Cusp && spec.q == 0.0
}

/// Lowest `count` levels of `H` in a given basis.
pub fn solve_fixed(mp: &ModelPoint, basis: &Basis, count: usize, with_vectors: bool) -> Result<FixedSolve> {
    let h = assemble(mp, basis)?;
    solve_matrix(&h, has_parity(&mp.spec) && matches!(basis, Basis::One(_)), count, with_vectors)
}

/// Lowest `count` levels of an assembled band matrix, optionally split into
/// the even/odd index sectors.
pub fn solve_matrix(h: &SymBandMatrix, split_parity: bool, count: usize, with_vectors: bool) -> Result<FixedSolve> {
    let n = h.dim();
    if count > n {
        return Err(Error::InvalidArgument(format!("{count} levels requested from a basis of {n} states")));
    }
    if !split_parity {
        let (values, vectors) = if with_vectors {
            let p = h.lowest_eigenpairs(count)?;
            (p.values, p.vectors)
        } else {
            (h.lowest_eigenvalues(count), Vec::new())
        };
        return Ok(FixedSolve { values, vectors, parity: None });
    }
    let even: Vec<usize> = (0..n).step_by(2).collect();
    let odd: Vec<usize> = (1..n).step_by(2).collect();
    let bw = h.bandwidth() / 2;
    let sector = |idx: &[usize]| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let sub = h.principal(idx, bw);
        let m = count.min(idx.len());
        if with_vectors {
            let p = sub.lowest_eigenpairs(m)?;
            let embedded = p
                .vectors
                .into_iter()
                .map(|v| {
                    let mut full = vec![0.0; n];
                    for (c, &i) in v.iter().zip(idx) {
                        full[i] = *c;
                    }
                    full
                })
                .collect();
            Ok((p.values, embedded))
        } else {
            Ok((sub.lowest_eigenvalues(m), Vec::new()))
        }
    };
    let (ev, evec) = sector(&even)?;
    let (ov, ovec) = sector(&odd)?;
    let scale = ev.iter().chain(&ov).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tie = 1e-13 * scale;
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::new();
    let mut parity = Vec::with_capacity(count);
    let (mut i, mut j) = (0, 0);
    while values.len() < count {
        // even first unless the odd level is lower beyond the degeneracy tolerance
        let take_even = j >= ov.len() || (i < ev.len() && ev[i] <= ov[j] + tie);
        if take_even {
            values.push(ev[i]);
            if with_vectors {
                vectors.push(evec[i].clone());
            }
            parity.push(1);
            i += 1;
        } else {
            values.push(ov[j]);
            if with_vectors {
                vectors.push(ovec[j].clone());
            }
            parity.push(-1);
            j += 1;
        }
    }
    Ok(FixedSolve { values, vectors, parity: Some(parity) })
}

/// How the oscillator length is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleRule {
    /// Match the oscillator to the classical phase-space extent at the
    /// energy of the highest requested level.
    PhaseSpace,
    /// Minimize the trace of the Hamiltonian over 25 candidate scales.
    TraceMinimum,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Absolute eigenvalue tolerance between successive basis sizes.
    pub tol: f64,
    pub cap_1d: usize,
    pub cap_2d: usize,
    pub scale: ScaleRule,
    /// Starting basis; derived from the phase-space extent when absent.
    pub initial: Option<Basis>,
    pub with_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, cap_1d: 4096, cap_2d: 8000, scale: ScaleRule::PhaseSpace, initial: None, with_vectors: true }
    }
}

/// Converged levels at one model point.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub model_point: ModelPoint,
    pub levels: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Basis the reported levels and vectors belong to.
    pub basis: Basis,
    /// `|E_i(larger basis) − E_i(previous basis)|` per level.
    pub convergence: Vec<f64>,
    pub parity: Option<Vec<i8>>,
}

/// Classical extent used to size the basis: `(E_top, r_cl, p_cl)`.
pub fn phase_space_extent(mp: &ModelPoint, num_levels: usize) -> Result<(f64, f64, f64)> {
    let spec = &mp.spec;
    let vmin = minimum_energy(spec);
    // invert the Weyl count for the energy of the top requested level
    let target = num_levels as f64 + 0.5;
    let mut lo = vmin;
    let mut hi = vmin + 1.0;
    while smoothed_count(spec, mp.k, hi)? < target {
        hi = vmin + 2.0 * (hi - vmin);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if smoothed_count(spec, mp.k, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + hi.abs()) {
            break;
        }
    }
    let e_top = hi;
    let r_cl = classical_radius(spec, e_top);
    let p_cl = (2.0 * (e_top - vmin)).sqrt();
    Ok((e_top, r_cl, p_cl))
}

/// Largest distance from the origin of the region `V ≤ E`.
fn classical_radius(spec: &PotentialSpec, e: f64) -> f64 {
    // on each ray V(s) = s⁴ + c s³ + a s² (+ b s); the outermost crossing is
    // beyond every stationary point, where V is increasing
    let rays: Vec<Box<dyn Fn(f64) -> f64>> = match spec.model {
        Model::Cusp => vec![
            Box::new(move |s| spec.cusp_value(s)),
            Box::new(move |s| spec.cusp_value(-s)),
        ],
        Model::Collective => vec![
            Box::new(move |s| spec.radial(s, spec.q)),
            Box::new(move |s| spec.radial(s, -spec.q)),
        ],
    };
    let mut best: f64 = 0.0;
    for f in rays {
        let mut hi = 1.0;
        while f(hi) <= e {
            hi *= 2.0;
        }
        // walk inward to the last crossing
        let steps = 4000;
        let mut lo = 0.0;
        for i in (0..steps).rev() {
            let s = hi * i as f64 / steps as f64;
            if f(s) <= e {
                lo = s;
                break;
            }
        }
        let mut top = lo + hi / steps as f64;
        if lo == 0.0 && f(0.0) > e {
            continue;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + top);
            if f(mid) <= e {
                lo = mid;
            } else {
                top = mid;
            }
        }
        best = best.max(lo);
    }
    best
}

/// Oscillator length and starting basis from the phase-space extent.
pub fn initial_basis(mp: &ModelPoint, num_levels: usize, rule: ScaleRule) -> Result<Basis> {
    let (_, r_cl, p_cl) = phase_space_extent(mp, num_levels)?;
    let omega = p_cl / r_cl;
    // quanta of the matched oscillator needed to cover the classical region
    let quanta = p_cl * r_cl / (2.0 * mp.k);
    let l_ps = (mp.k / omega).sqrt();
    match mp.spec.model {
        Model::Cusp => {
            let size = (2 * num_levels).max((1.2 * quanta).ceil() as usize).max(8);
            let l = match rule {
                ScaleRule::PhaseSpace => l_ps,
                ScaleRule::Fixed(l) => l,
                ScaleRule::TraceMinimum => crate::basis::trace_minimizing_scale(|l| trace_1d(mp, size, l), mp.k),
            };
            Ok(Basis::One(Basis1D::new(size, l)?))
        }
        Model::Collective => {
            let mut n_max = (1.0 * quanta).ceil() as usize;
            let mut k_max = (0.7 * quanta).ceil() as usize;
            n_max = n_max.max(4);
            k_max = k_max.max(2);
            while (n_max + 1) * (k_max + 1) < 2 * num_levels {
                n_max += 1;
                k_max += 1;
            }
            let l = match rule {
                ScaleRule::PhaseSpace => l_ps,
                ScaleRule::Fixed(l) => l,
                ScaleRule::TraceMinimum => {
                    crate::basis::trace_minimizing_scale(|l| trace_2d(mp, n_max, k_max, l), mp.k)
                }
            };
            Ok(Basis::Two(Basis2D::new(n_max, k_max, l)?))
        }
    }
}

/// Trace of the 1D Hamiltonian matrix, in closed form.
pub fn trace_1d(mp: &ModelPoint, size: usize, l: f64) -> f64 {
    (0..size)
        .map(|n| {
            let m = n as f64 + 0.5;
            let nf = n as f64;
            0.5 * mp.k * mp.k * m / (l * l) + mp.spec.p * l * l * m + l.powi(4) * (6.0 * nf * nf + 6.0 * nf + 3.0) / 4.0
        })
        .sum()
}

/// Trace of the 2D Hamiltonian matrix, in closed form.
pub fn trace_2d(mp: &ModelPoint, n_max: usize, k_max: usize, l: f64) -> f64 {
    let mut t = 0.0;
    for k in 0..=k_max {
        for n in 0..=n_max {
            let lam = (3 * k) as f64;
            let nf = n as f64;
            let m = 2.0 * nf + lam + 1.0;
            let r4 = l.powi(4) * (m * m + nf * (nf + lam) + (nf + 1.0) * (nf + lam + 1.0));
            t += mp.k * mp.k * m / (2.0 * l * l) + mp.spec.p * l * l * m + r4;
        }
    }
    t
}

/// The next basis in the enlargement sequence: size doubled in 1D, both
/// `n_max` and `k_max` increased by 50% in 2D. The length scale is kept so
/// the bases are nested.
pub fn enlarge(basis: &Basis) -> Basis {
    match basis {
        Basis::One(b) => Basis::One(Basis1D { size: 2 * b.size, length_scale: b.length_scale }),
        Basis::Two(b) => Basis::Two(Basis2D {
            n_max: (b.n_max * 3).div_ceil(2),
            k_max: (b.k_max * 3).div_ceil(2),
            length_scale: b.length_scale,
        }),
    }
}

/// Lowest `num_levels` levels converged to `tol` under basis enlargement.
pub fn converged_spectrum(mp: &ModelPoint, num_levels: usize, tol: f64) -> Result<Spectrum> {
    converged_spectrum_with(mp, num_levels, &SolverOptions { tol, ..SolverOptions::default() })
}

pub fn converged_spectrum_with(mp: &ModelPoint, num_levels: usize, opts: &SolverOptions) -> Result<Spectrum> {
    if num_levels == 0 {
        return Err(Error::InvalidArgument("num_levels must be at least 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let cap = match mp.spec.model {
        Model::Cusp => opts.cap_1d,
        Model::Collective => opts.cap_2d,
    };
    let mut basis = match opts.initial {
        Some(b) => b,
        None => initial_basis(mp, num_levels, opts.scale)?,
    };
    if basis.dim() < 2 * num_levels {
        return Err(Error::InvalidArgument(format!(
            "initial basis of {} states cannot hold {num_levels} levels in its lower half",
            basis.dim()
        )));
    }
    if basis.dim() > cap {
        return Err(Error::Unconverged { cap, worst_error: f64::INFINITY, errors: vec![f64::INFINITY; num_levels] });
    }
    let mut prev = solve_fixed(mp, &basis, num_levels, false)?;
    let mut errors = vec![f64::INFINITY; num_levels];
    loop {
        let next = enlarge(&basis);
        if next.dim() > cap {
            let worst = errors.iter().copied().fold(0.0, f64::max);
            return Err(Error::Unconverged { cap, worst_error: worst, errors });
        }
        let cur = solve_fixed(mp, &next, num_levels, false)?;
        errors = cur.values.iter().zip(&prev.values).map(|(a, b)| (a - b).abs()).collect();
        let worst = errors.iter().copied().fold(0.0, f64::max);
        log::debug!("basis {} -> {}: worst level change {worst:e}", basis.dim(), next.dim());
        basis = next;
        if worst < opts.tol {
            let fin = if opts.with_vectors { solve_fixed(mp, &basis, num_levels, true)? } else { cur };
            return Ok(Spectrum {
                model_point: *mp,
                levels: fin.values,
                vectors: fin.vectors,
                basis,
                convergence: errors,
                parity: fin.parity,
            });
        }
        prev = cur;
    }
}

/// Outcome of the pure-quartic scaling test.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub expected: f64,
    pub ratios: Vec<f64>,
    pub max_relative_deviation: f64,
}

impl ScalingReport {
    pub fn passed(&self, rel: f64) -> bool {
        self.max_relative_deviation <= rel
    }
}

/// Checks `E_n(K₁)/E_n(K₂) = (K₁/K₂)^{4/3}` for the lowest 20 levels of the
/// pure quartic oscillator.
pub fn scaling_check(spec: &PotentialSpec, k1: f64, k2: f64) -> Result<ScalingReport> {
    if spec.model != Model::Cusp || spec.p != 0.0 || spec.q != 0.0 {
        return Err(Error::InvalidArgument("the K^{4/3} scaling holds only for the pure quartic (a, b) = (0, 0)".into()));
    }
    let levels = 20;
    let solve = |k: f64| -> Result<Vec<f64>> {
        let mp = ModelPoint::new(*spec, k)?;
        let scale = k.powf(4.0 / 3.0);
        let opts = SolverOptions { tol: 1e-9 * scale, with_vectors: false, ..SolverOptions::default() };
        Ok(converged_spectrum_with(&mp, levels, &opts)?.levels)
    };
    let e1 = solve(k1)?;
    let e2 = if k1 == k2 { e1.clone() } else { solve(k2)? };
    let expected = (k1 / k2).powf(4.0 / 3.0);
    let ratios: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a / b).collect();
    let max_relative_deviation = ratios.iter().map(|r| (r / expected - 1.0).abs()).fold(0.0, f64::max);
    Ok(ScalingReport { expected, ratios, max_relative_deviation })
}
