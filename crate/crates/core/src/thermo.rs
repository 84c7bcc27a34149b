//! Canonical thermodynamics of finite spectra and the finite-difference
//! checks of its temperature and λ derivatives.

use rayon::prelude::*;

use crate::density::DensityHistogram;
use crate::error::{Error, Result};
use crate::levelflow::LevelFlow;

/// Boltzmann weight of the top retained level that defines `T_max`.
pub const TRUNCATION_WEIGHT: f64 = 1e-10;

/// Canonical averages at one `(λ, T)`. `⟪XY⟫ = ⟨XY⟩ − ⟨X⟩⟨Y⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoCell {
    pub lambda: f64,
    pub t: f64,
    /// `ln Z`; `Z` itself over- or underflows for small `T`.
    pub ln_z: f64,
    pub f: f64,
    pub mean_e: f64,
    pub s: f64,
    pub var_e: f64,
    pub mean_edot: f64,
    pub var_edot: f64,
    pub cov_e_edot: f64,
    pub mean_eddot: f64,
    /// `T` exceeds the truncation temperature of the spectrum.
    pub truncated: bool,
}

/// Canonical moments of a finite spectrum. Slopes and curvatures are
/// optional; their moments are zero when absent.
pub fn canonical(levels: &[f64], slopes: Option<&[f64]>, curvatures: Option<&[f64]>, t: f64) -> Result<ThermoCell> {
    if levels.is_empty() {
        return Err(Error::Empty("canonical ensemble of an empty spectrum".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")));
    }
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("levels must be finite".into()));
    }
    for (name, v) in [("slopes", slopes), ("curvatures", curvatures)] {
        if let Some(v) = v {
            if v.len() != levels.len() {
                return Err(Error::InvalidArgument(format!("{} {name} for {} levels", v.len(), levels.len())));
            }
        }
    }
    // ground-state shift before exponentiation
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = levels.iter().map(|e| (-(e - e0) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let avg = |f: &dyn Fn(usize) -> f64| -> f64 { p.iter().enumerate().map(|(i, pi)| pi * f(i)).sum() };
    let de = |i: usize| levels[i] - e0;
    let mean_shift = avg(&de);
    let var_e = avg(&|i| (de(i) - mean_shift).powi(2));
    let sl = |i: usize| slopes.map_or(0.0, |s| s[i]);
    let mean_edot = avg(&sl);
    let var_edot = avg(&|i| (sl(i) - mean_edot).powi(2));
    let cov_e_edot = avg(&|i| (de(i) - mean_shift) * (sl(i) - mean_edot));
    let mean_eddot = avg(&|i| curvatures.map_or(0.0, |c| c[i]));
    let ln_z = -e0 / t + z.ln();
    let f = e0 - t * z.ln();
    let s = mean_shift / t + z.ln();
    Ok(ThermoCell {
        lambda: f64::NAN,
        t,
        ln_z,
        f,
        mean_e: e0 + mean_shift,
        s,
        var_e,
        mean_edot,
        var_edot,
        cov_e_edot,
        mean_eddot,
        truncated: t > truncation_temperature(levels),
    })
}

/// Free energy alone, `F = E₀ − T ln Σ e^{−(E_i−E₀)/T}`.
pub fn free_energy(levels: &[f64], t: f64) -> f64 {
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let z: f64 = levels.iter().map(|e| (-(e - e0) / t).exp()).sum();
    e0 - t * z.ln()
}

/// Largest `T` at which the top level's Boltzmann weight stays below
/// `TRUNCATION_WEIGHT`; infinite for a single level.
pub fn truncation_temperature(levels: &[f64]) -> f64 {
    if levels.len() < 2 {
        return f64::INFINITY;
    }
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let top = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == e0 {
        return f64::INFINITY;
    }
    if 1.0 / levels.len() as f64 <= TRUNCATION_WEIGHT {
        return f64::INFINITY;
    }
    let weight = |t: f64| {
        let z: f64 = levels.iter().map(|e| (-(e - e0) / t).exp()).sum();
        (-(top - e0) / t).exp() / z
    };
    let (mut lo, mut hi) = (0.0, (top - e0));
    while weight(hi) < TRUNCATION_WEIGHT {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if weight(mid) < TRUNCATION_WEIGHT {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    lo
}

/// `(λ, T)` grid of canonical cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoTable {
    pub lambdas: Vec<f64>,
    pub temps: Vec<f64>,
    /// `cells[g][j]` at `lambdas[g]`, `temps[j]`.
    pub cells: Vec<Vec<ThermoCell>>,
    /// Truncation temperature per λ.
    pub t_max: Vec<f64>,
}

pub fn thermo_table(flow: &LevelFlow, temps: &[f64]) -> Result<ThermoTable> {
    if temps.is_empty() {
        return Err(Error::Empty("temperature grid".into()));
    }
    let cells = (0..flow.lambdas.len())
        .into_par_iter()
        .map(|g| {
            temps
                .iter()
                .map(|&t| {
                    let mut c = canonical(&flow.energies[g], Some(&flow.slopes[g]), Some(&flow.curvatures[g]), t)?;
                    c.lambda = flow.lambdas[g];
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThermoTable {
        lambdas: flow.lambdas.clone(),
        temps: temps.to_vec(),
        cells,
        t_max: flow.energies.iter().map(|e| truncation_temperature(e)).collect(),
    })
}

/// Relative deviation with a floor for quantities that vanish by symmetry.
fn rel_err(fd: f64, exact: f64, floor: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(floor)
}

/// Outcome of the temperature-derivative checks at one `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TDerivativeReport {
    pub t: f64,
    pub dfdt_fd: f64,
    pub minus_s: f64,
    pub first_rel_err: f64,
    pub d2fdt2_fd: f64,
    pub minus_var_over_t3: f64,
    pub second_rel_err: f64,
    /// Richardson step halvings needed before the estimates stabilized.
    pub halvings: usize,
}

impl TDerivativeReport {
    pub fn passed(&self, first: f64, second: f64) -> bool {
        self.first_rel_err <= first && self.second_rel_err <= second
    }
}

/// `∂F/∂T = −S` and `∂²F/∂T² = −⟪E²⟫/T³` by Richardson-extrapolated central
/// differences, halving the step until successive estimates agree.
pub fn check_t_derivatives(levels: &[f64], t: f64) -> Result<TDerivativeReport> {
    let cell = canonical(levels, None, None, t)?;
    let f = |x: f64| free_energy(levels, x);
    let d1 = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    let d2 = |h: f64| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    let rich1 = |h: f64| (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
    let rich2 = |h: f64| (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
    let mut h = 0.1 * t;
    let (mut a1, mut a2) = (rich1(h), rich2(h));
    for halvings in 1..=16 {
        h *= 0.5;
        let (b1, b2) = (rich1(h), rich2(h));
        let stable1 = (b1 - a1).abs() <= 1e-7 * b1.abs().max(1e-300);
        let stable2 = (b2 - a2).abs() <= 1e-5 * b2.abs().max(1e-300);
        if stable1 && stable2 {
            let minus_var_over_t3 = -cell.var_e / t.powi(3);
            return Ok(TDerivativeReport {
                t,
                dfdt_fd: b1,
                minus_s: -cell.s,
                first_rel_err: rel_err(b1, -cell.s, 1e-300),
                d2fdt2_fd: b2,
                minus_var_over_t3,
                second_rel_err: rel_err(b2, minus_var_over_t3, 1e-300),
                halvings,
            });
        }
        a1 = b1;
        a2 = b2;
    }
    Err(Error::GridTooCoarse(format!("temperature differences at T = {t} did not stabilize")))
}

/// Outcome of the λ-derivative checks at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaDerivativeReport {
    pub lambda: f64,
    pub t: f64,
    pub dfdl_fd: f64,
    pub mean_edot: f64,
    pub first_rel_err: f64,
    pub d2fdl2_fd: f64,
    /// `⟨Ë⟩ − ⟪Ė²⟫/T`
    pub second_rhs: f64,
    pub second_rel_err: f64,
    pub mixed_fd: f64,
    /// `⟪EĖ⟫/T²`
    pub mixed_rhs: f64,
    pub mixed_rel_err: f64,
    pub truncated: bool,
}

impl LambdaDerivativeReport {
    pub fn worst(&self) -> f64 {
        self.first_rel_err.max(self.second_rel_err).max(self.mixed_rel_err)
    }
}

/// `∂F/∂λ = ⟨Ė⟩`, `∂²F/∂λ² = ⟨Ë⟩ − ⟪Ė²⟫/T` and `∂²F/∂T∂λ = ⟪EĖ⟫/T²` at
/// every grid point with two neighbours on each side. λ differences use the
/// flow grid (steps h and 2h, Richardson-combined; the grid must be locally
/// uniform); the mixed derivative also differences in `T`.
///
/// Relative errors use `abs_floor` in the denominator so that quantities
/// vanishing by symmetry do not blow up the ratio.
pub fn check_lambda_derivatives(flow: &LevelFlow, t: f64, abs_floor: f64) -> Result<Vec<LambdaDerivativeReport>> {
    let n = flow.lambdas.len();
    if n < 5 {
        return Err(Error::GridTooCoarse("λ-derivative checks need at least 5 grid points".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {t}")));
    }
    let dt = 1e-3 * t;
    let mut out = Vec::new();
    for g in 2..n - 2 {
        let l = &flow.lambdas;
        let h = l[g + 1] - l[g];
        let uniform = [l[g] - l[g - 1], l[g - 1] - l[g - 2], l[g + 2] - l[g + 1]].iter().all(|d| (d - h).abs() <= 1e-9 * h.abs());
        if !uniform {
            return Err(Error::GridTooCoarse(format!("λ grid not uniform around {}", l[g])));
        }
        let f_at = |k: usize, temp: f64| free_energy(&flow.energies[k], temp);
        let first = |temp: f64| {
            let d_h = (f_at(g + 1, temp) - f_at(g - 1, temp)) / (2.0 * h);
            let d_2h = (f_at(g + 2, temp) - f_at(g - 2, temp)) / (4.0 * h);
            (4.0 * d_h - d_2h) / 3.0
        };
        let d_h = (f_at(g + 1, t) - 2.0 * f_at(g, t) + f_at(g - 1, t)) / (h * h);
        let d_2h = (f_at(g + 2, t) - 2.0 * f_at(g, t) + f_at(g - 2, t)) / (4.0 * h * h);
        let second = (4.0 * d_h - d_2h) / 3.0;
        let m_h = (first(t + dt) - first(t - dt)) / (2.0 * dt);
        let m_2h = (first(t + 2.0 * dt) - first(t - 2.0 * dt)) / (4.0 * dt);
        let mixed = (4.0 * m_h - m_2h) / 3.0;
        let cell = canonical(&flow.energies[g], Some(&flow.slopes[g]), Some(&flow.curvatures[g]), t)?;
        let dfdl = first(t);
        let second_rhs = cell.mean_eddot - cell.var_edot / t;
        let mixed_rhs = cell.cov_e_edot / (t * t);
        out.push(LambdaDerivativeReport {
            lambda: l[g],
            t,
            dfdl_fd: dfdl,
            mean_edot: cell.mean_edot,
            first_rel_err: rel_err(dfdl, cell.mean_edot, abs_floor),
            d2fdl2_fd: second,
            second_rhs,
            second_rel_err: rel_err(second, second_rhs, abs_floor),
            mixed_fd: mixed,
            mixed_rhs,
            mixed_rel_err: rel_err(mixed, mixed_rhs, abs_floor),
            truncated: cell.truncated,
        });
    }
    Ok(out)
}

/// `S = ln ρ(E)` from a level-density histogram.
pub fn microcanonical_entropy(hist: &DensityHistogram, e: f64) -> Result<f64> {
    let bin = hist.bin_of(e).ok_or_else(|| Error::Domain(format!("E = {e} outside the histogram range")))?;
    if hist.counts[bin] == 0 {
        return Err(Error::Empty(format!("histogram bin containing E = {e}")));
    }
    Ok(hist.density[bin].ln())
}

/// Thermal separatrix diagnostic: for each `T`, the grid λ maximizing
/// `|∂²F/∂λ²| = |⟨Ë⟩ − ⟪Ė²⟫/T|`.
pub fn separatrix(table: &ThermoTable) -> Vec<(f64, f64)> {
    table
        .temps
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let best = table
                .cells
                .iter()
                .map(|row| {
                    let c = &row[j];
                    (c.lambda, (c.mean_eddot - c.var_edot / t).abs())
                })
                .fold((f64::NAN, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            (t, best.0)
        })
        .collect()
}
