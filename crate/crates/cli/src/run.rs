//! Command execution: each command turns a validated configuration into a
//! set of CSV files, notes and plot scripts.

use std::f64::consts::{FRAC_PI_3, PI};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use esqpt_core::basis::{wavefunction_samples, Basis};
use esqpt_core::classical::{volumes, w_volume};
use esqpt_core::density::{
    converged_counts, default_bin_width, histogram, histogram_from_staircase, select_k, slope_segments, DensityHistogram, SegmentFit,
};
use esqpt_core::levelflow::{avoided_crossings, sweep, LevelFlow, ParameterPath};
use esqpt_core::potentials::{critical_energies, critical_loci, eval_potential, stationary_points, Model, PathKind, Point, PotentialSpec, StationaryKind};
use esqpt_core::spectra::{converged_spectrum_with, ModelPoint, SolverOptions};
use esqpt_core::thermo::{separatrix, thermo_table};
use esqpt_core::Error;

use crate::config::{linspace, Command, DensityMethod, Figure, RunConfig};
use crate::output::{opt_real, real, Artifacts, Csv};
use crate::plots;

/// Runs `cfg` on a pool of `workers` threads (0: pool default).
pub fn execute_with_workers(cfg: &RunConfig, workers: usize) -> Result<Artifacts> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building the worker pool")?;
    pool.install(|| execute(cfg))
}

pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    let mut art = match cfg.command {
        Command::Spectrum => spectrum(cfg)?,
        Command::Classical => classical(cfg)?,
        Command::Flow => flow_command(cfg)?,
        Command::Thermo => thermo(cfg)?,
        Command::Density => density(cfg)?,
        Command::Wavefunction => wavefunction(cfg)?,
        Command::Report => report(cfg)?,
    };
    if let Some(n) = &cfg.note {
        art.note(n.clone());
    }
    Ok(art)
}

fn fixed_spec(cfg: &RunConfig) -> Result<PotentialSpec> {
    Ok(PotentialSpec::new(cfg.model, cfg.a, cfg.b)?)
}

fn solver(cfg: &RunConfig, with_vectors: bool) -> SolverOptions {
    SolverOptions { tol: cfg.tol, cap_1d: cfg.cap_1d, cap_2d: cfg.cap_2d, with_vectors, ..SolverOptions::default() }
}

fn describe(basis: &Basis) -> String {
    match basis {
        Basis::One(b) => format!("oscillator basis of {} states, length {}", b.size, real(b.length_scale)),
        Basis::Two(b) => format!("polar basis n_max {} k_max {} ({} states), length {}", b.n_max, b.k_max, b.dim(), real(b.length_scale)),
    }
}

fn kind_name(k: StationaryKind) -> &'static str {
    match k {
        StationaryKind::Minimum => "minimum",
        StationaryKind::Maximum => "maximum",
        StationaryKind::Saddle => "saddle",
    }
}

/// Model points the per-panel commands work on: the fixed coefficients, or
/// every grid λ of the configured path.
fn panels(cfg: &RunConfig) -> Result<Vec<(Option<f64>, PotentialSpec)>> {
    match cfg.path_kind() {
        None => Ok(vec![(None, fixed_spec(cfg)?)]),
        Some(kind) => Ok(cfg.lambda_grid().into_iter().map(|l| (Some(l), kind.spec(l))).collect()),
    }
}

fn panel_name(stem: &str, index: usize, many: bool) -> String {
    if many {
        format!("{stem}_{index:02}.csv")
    } else {
        format!("{stem}.csv")
    }
}

// ---------------------------------------------------------------------------
// spectrum and classical

fn spectrum(cfg: &RunConfig) -> Result<Artifacts> {
    let mp = ModelPoint::new(fixed_spec(cfg)?, cfg.k)?;
    let sp = converged_spectrum_with(&mp, cfg.num_levels, &solver(cfg, false))?;
    let mut csv = Csv::new(&["index", "energy", "convergence", "parity"]);
    for (i, e) in sp.levels.iter().enumerate() {
        let parity = sp.parity.as_ref().map(|p| p[i].to_string()).unwrap_or_default();
        csv.row(&[i.to_string(), real(*e), real(sp.convergence[i]), parity]);
    }
    let mut art = Artifacts::default();
    art.csv("spectrum.csv", csv);
    art.note(describe(&sp.basis));
    Ok(art)
}

/// Default energy window: from the global minimum to twice the spread of the
/// stationary energies above the highest one.
fn energy_window(cfg: &RunConfig, spec: &PotentialSpec) -> (f64, f64) {
    let pts = stationary_points(spec);
    let bottom = pts.iter().map(|p| p.energy).fold(f64::INFINITY, f64::min);
    let top = pts.iter().map(|p| p.energy).fold(f64::NEG_INFINITY, f64::max);
    let lo = cfg.e_min.unwrap_or(bottom);
    let hi = cfg.e_max.unwrap_or(if top > bottom { top + 2.0 * (top - bottom) } else { bottom + 1.0 });
    (lo, hi)
}

fn stationary_csv(spec: &PotentialSpec) -> Csv {
    let mut csv = Csv::new(&["energy", "kind", "coordinate1", "coordinate2", "degenerate"]);
    for p in stationary_points(spec) {
        let (c1, c2) = match p.location {
            Point::X(x) => (real(x), String::new()),
            Point::Polar { r, phi } => (real(r), real(phi)),
        };
        csv.row(&[real(p.energy), kind_name(p.kind).into(), c1, c2, p.degenerate.to_string()]);
    }
    csv
}

fn classical(cfg: &RunConfig) -> Result<Artifacts> {
    let spec = fixed_spec(cfg)?;
    let (lo, hi) = energy_window(cfg, &spec);
    let grid = linspace(lo, hi, cfg.e_steps);
    let norm = (2.0 * PI * cfg.k).powi(spec.dof() as i32);
    let rows = grid
        .par_iter()
        .map(|&e| match volumes(&spec, e) {
            Ok(wv) => Ok(wv),
            // V diverges at a barrier top; W stays finite
            Err(Error::LogSingularity { .. }) => Ok((w_volume(&spec, e)?, f64::NAN)),
            Err(err) => Err(err),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::new(&["energy", "W", "V", "smoothed_density"]);
    for (e, (w, v)) in grid.iter().zip(rows) {
        csv.row(&[real(*e), real(w), real(v), real(v / norm)]);
    }
    let mut art = Artifacts::default();
    art.csv("classical.csv", csv);
    art.csv("stationary.csv", stationary_csv(&spec));
    art.text("classical.gp", plots::classical());
    Ok(art)
}

// ---------------------------------------------------------------------------
// level flows and thermodynamics

fn flow_of(cfg: &RunConfig) -> Result<LevelFlow> {
    let kind = cfg.path_kind().ok_or_else(|| anyhow!("a λ path is required"))?;
    let path = ParameterPath::new(kind, cfg.lambda_grid())?;
    Ok(sweep(&path, cfg.k, cfg.num_levels, &solver(cfg, true))?)
}

fn critical_csv(kind: PathKind, lambdas: &[f64]) -> Csv {
    let mut csv = Csv::new(&["lambda", "E1", "E2", "E3"]);
    for &l in lambdas {
        let ce = critical_energies(&kind.spec(l));
        csv.row(&[real(l), real(ce.global_min), opt_real(ce.secondary_min), opt_real(ce.barrier)]);
    }
    csv
}

fn flow_artifacts(flow: &LevelFlow) -> Result<Artifacts> {
    let mut csv = Csv::new(&["lambda", "level_index", "energy", "slope", "curvature", "parity", "left_weight"]);
    for (g, &l) in flow.lambdas.iter().enumerate() {
        for i in 0..flow.num_levels() {
            let parity = flow.parity[g].as_ref().map(|p| p[i].to_string()).unwrap_or_default();
            let weight = flow.left_weight[g].as_ref().map(|w| real(w[i])).unwrap_or_default();
            csv.row(&[real(l), i.to_string(), real(flow.energies[g][i]), real(flow.slopes[g][i]), real(flow.curvatures[g][i]), parity, weight]);
        }
    }
    let mut art = Artifacts::default();
    art.csv("flow.csv", csv);
    if flow.lambdas.len() >= 3 {
        let mut cx = Csv::new(&["lambda", "sector", "lower", "gap", "energy"]);
        for c in avoided_crossings(flow)? {
            cx.row(&[real(c.lambda), c.sector.map(|s| s.to_string()).unwrap_or_default(), c.lower.to_string(), real(c.gap), real(c.energy)]);
        }
        art.csv("crossings.csv", cx);
    }
    art.csv("critical.csv", critical_csv(flow.path, &flow.lambdas));
    // critical and spinodal points on the path, drawn as dashed verticals
    let loci = critical_loci(flow.path.model());
    let (lo, hi) = (flow.lambdas[0], *flow.lambdas.last().unwrap());
    let mut lc = Csv::new(&["lambda", "kind"]);
    for (kind, list) in [("critical", loci.critical_on(flow.path)), ("spinodal", loci.spinodal_on(flow.path))] {
        for l in list.into_iter().filter(|l| (lo..=hi).contains(l)) {
            lc.row(&[real(l), kind.into()]);
        }
    }
    art.csv("loci.csv", lc);
    let flagged: usize = flow.curvature_flag.iter().flatten().filter(|&&f| f).count();
    art.note(format!("{flagged} curvature values flagged as near-singular"));
    let worst = flow.convergence.iter().copied().fold(0.0, f64::max);
    art.note(format!("worst level convergence along the path {}", real(worst)));
    Ok(art)
}

fn flow_command(cfg: &RunConfig) -> Result<Artifacts> {
    let flow = flow_of(cfg)?;
    let mut art = flow_artifacts(&flow)?;
    art.text("flow.gp", plots::flow("flow", "level flow"));
    Ok(art)
}

fn thermo(cfg: &RunConfig) -> Result<Artifacts> {
    let flow = flow_of(cfg)?;
    let table = thermo_table(&flow, &cfg.temperature_grid())?;
    let mut csv = Csv::new(&["lambda", "T", "F", "S", "meanE", "varE", "meanEdot", "varEdot", "covEEdot", "meanEddot", "flag_truncation"]);
    for row in &table.cells {
        for c in row {
            csv.row(&[
                real(c.lambda),
                real(c.t),
                real(c.f),
                real(c.s),
                real(c.mean_e),
                real(c.var_e),
                real(c.mean_edot),
                real(c.var_edot),
                real(c.cov_e_edot),
                real(c.mean_eddot),
                u8::from(c.truncated).to_string(),
            ]);
        }
    }
    let mut sep = Csv::new(&["T", "lambda_c"]);
    for (t, l) in separatrix(&table) {
        sep.row(&[real(t), real(l)]);
    }
    let mut tmax = Csv::new(&["lambda", "T_max"]);
    for (l, t) in table.lambdas.iter().zip(&table.t_max) {
        tmax.row(&[real(*l), real(*t)]);
    }
    let mut art = Artifacts::default();
    art.csv("thermo.csv", csv);
    art.csv("separatrix.csv", sep);
    art.csv("truncation.csv", tmax);
    art.text("thermo.gp", plots::thermo());
    Ok(art)
}

// ---------------------------------------------------------------------------
// level densities

struct DensityPanel {
    k: f64,
    hist: DensityHistogram,
    fit: SegmentFit,
}

fn density_panel(cfg: &RunConfig, spec: &PotentialSpec) -> Result<DensityPanel> {
    let k = match cfg.density_target {
        Some(target) => {
            let top = cfg.e_max.ok_or_else(|| anyhow!("density_target needs e_max, the top of the energy window"))?;
            select_k(spec, top, target)?
        }
        None => cfg.k,
    };
    let mp = ModelPoint::new(*spec, k)?;
    let hist = match cfg.density_method {
        DensityMethod::Spectrum => {
            let sp = converged_spectrum_with(&mp, cfg.num_levels, &solver(cfg, false))?;
            let lo = cfg.e_min.unwrap_or(f64::NEG_INFINITY);
            let hi = cfg.e_max.unwrap_or(f64::INFINITY);
            let levels: Vec<f64> = sp.levels.iter().copied().filter(|e| (lo..=hi).contains(e)).collect();
            let w = match cfg.bin_width {
                Some(w) => w,
                None => default_bin_width(&levels)?,
            };
            histogram(&levels, w, spec, Some(k))?
        }
        DensityMethod::Counting => {
            let lo = cfg.e_min.unwrap_or_else(|| critical_energies(spec).global_min);
            let hi = cfg.e_max.ok_or_else(|| anyhow!("the counting method needs e_max"))?;
            if !(hi > lo) {
                bail!("energy window [{lo}, {hi}] is empty");
            }
            let w = cfg.bin_width.unwrap_or((hi - lo) / 50.0);
            let bins = ((hi - lo) / w - 1e-9).ceil().max(1.0) as usize;
            let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * w).collect();
            let counts = converged_counts(&mp, &edges, &solver(cfg, false))?;
            histogram_from_staircase(&edges, &counts.counts, spec, Some(k))?
        }
    };
    let fit = slope_segments(&hist)?;
    Ok(DensityPanel { k, hist, fit })
}

fn density_artifacts(cfg: &RunConfig) -> Result<Artifacts> {
    let list = panels(cfg)?;
    let many = list.len() > 1;
    let results = list.par_iter().map(|(_, spec)| density_panel(cfg, spec)).collect::<Result<Vec<_>>>()?;
    let mut art = Artifacts::default();
    let mut index = Csv::new(&["panel", "lambda", "K", "levels", "segments", "min_separation", "flagged"]);
    for (p, ((lambda, _), r)) in list.iter().zip(&results).enumerate() {
        let mut d = Csv::new(&["bin_center", "count", "density"]);
        for ((c, n), rho) in r.hist.centers().iter().zip(&r.hist.counts).zip(&r.hist.density) {
            d.row(&[real(*c), n.to_string(), real(*rho)]);
        }
        let mut m = Csv::new(&["energy", "kind"]);
        for mk in &r.hist.markers {
            m.row(&[real(mk.energy), kind_name(mk.kind).into()]);
        }
        let mut s = Csv::new(&["lo", "hi", "slope", "slope_se", "intercept", "bins", "rss", "underpopulated"]);
        for seg in &r.fit.segments {
            s.row(&[real(seg.lo), real(seg.hi), real(seg.slope), real(seg.slope_se), real(seg.intercept), seg.bins.to_string(), real(seg.rss), seg.underpopulated.to_string()]);
        }
        art.csv(panel_name("density", p, many), d);
        art.csv(panel_name("markers", p, many), m);
        art.csv(panel_name("segments", p, many), s);
        index.row(&[
            p.to_string(),
            opt_real(*lambda),
            real(r.k),
            r.hist.total().to_string(),
            r.fit.segments.len().to_string(),
            real(r.fit.min_separation()),
            r.fit.flagged.to_string(),
        ]);
    }
    art.csv("panels.csv", index);
    Ok(art)
}

fn density(cfg: &RunConfig) -> Result<Artifacts> {
    let mut art = density_artifacts(cfg)?;
    art.text("density.gp", plots::density(panels(cfg)?.len()));
    Ok(art)
}

// ---------------------------------------------------------------------------
// wave functions

/// Largest distance from the origin at which `V ≤ e`, over a fan of rays.
fn classical_extent(spec: &PotentialSpec, e: f64) -> Result<f64> {
    let rays: Vec<Box<dyn Fn(f64) -> Point>> = match spec.model {
        Model::Cusp => vec![Box::new(Point::X), Box::new(|r| Point::X(-r))],
        Model::Collective => (0..=12).map(|j| -> Box<dyn Fn(f64) -> Point> { Box::new(move |r| Point::Polar { r, phi: FRAC_PI_3 * j as f64 / 12.0 }) }).collect(),
    };
    let mut best = 0.0f64;
    for ray in &rays {
        let v = |r: f64| eval_potential(spec, ray(r));
        // the quartic term dominates beyond this radius
        let mut big = 1.0;
        while v(big)? <= e {
            big *= 2.0;
        }
        let n = 4000;
        let mut last = 0.0;
        for i in 0..=n {
            let r = big * i as f64 / n as f64;
            if v(r)? <= e {
                last = r;
            }
        }
        let (mut a, mut b) = (last, (last + big / n as f64).min(big));
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if v(m)? <= e {
                a = m;
            } else {
                b = m;
            }
        }
        best = best.max(a);
    }
    Ok(best)
}

/// Fold a Cartesian point into the sextant `0 ≤ φ ≤ π/3` where the
/// symmetric collective states are tabulated.
fn sextant(x: f64, y: f64) -> Point {
    let r = x.hypot(y);
    let mut phi = y.atan2(x).rem_euclid(2.0 * FRAC_PI_3);
    if phi > FRAC_PI_3 {
        phi = 2.0 * FRAC_PI_3 - phi;
    }
    Point::Polar { r, phi: phi.clamp(0.0, FRAC_PI_3) }
}

fn wavefunction_artifacts(cfg: &RunConfig) -> Result<Artifacts> {
    let list = panels(cfg)?;
    let top = *cfg.levels.iter().max().unwrap();
    let spectra = list
        .par_iter()
        .map(|(_, spec)| converged_spectrum_with(&ModelPoint::new(*spec, cfg.k)?, top + 1, &solver(cfg, true)))
        .collect::<Result<Vec<_>, _>>()?;
    let extent = match cfg.extent {
        Some(x) => x,
        None => {
            let mut x = 0.0f64;
            for ((_, spec), sp) in list.iter().zip(&spectra) {
                x = x.max(classical_extent(spec, sp.levels[top])?);
            }
            1.25 * x
        }
    };
    let axis = linspace(-extent, extent, cfg.points);
    let (header, grid): (Vec<&str>, Vec<(Vec<f64>, Point)>) = match cfg.model {
        Model::Cusp => (vec!["lambda", "level", "x", "psi_squared"], axis.iter().map(|&x| (vec![x], Point::X(x))).collect()),
        Model::Collective => (
            vec!["lambda", "level", "x", "y", "psi_squared"],
            axis.iter().flat_map(|&y| axis.iter().map(move |&x| (vec![x, y], sextant(x, y)))).collect(),
        ),
    };
    let points: Vec<Point> = grid.iter().map(|(_, p)| *p).collect();
    let mut csv = Csv::new(&header);
    for ((lambda, _), sp) in list.iter().zip(&spectra) {
        for &lvl in &cfg.levels {
            let psi2 = wavefunction_samples(&sp.vectors[lvl], &sp.basis, &points)?;
            for ((coords, _), v) in grid.iter().zip(psi2) {
                let mut row = vec![opt_real(*lambda), lvl.to_string()];
                row.extend(coords.iter().map(|c| real(*c)));
                row.push(real(v));
                csv.row(&row);
            }
        }
    }
    let mut art = Artifacts::default();
    art.csv("wavefunction.csv", csv);
    Ok(art)
}

fn wavefunction(cfg: &RunConfig) -> Result<Artifacts> {
    let mut art = wavefunction_artifacts(cfg)?;
    art.text("wavefunction.gp", plots::wavefunction(cfg.model == Model::Collective));
    Ok(art)
}

// ---------------------------------------------------------------------------
// figure presets

fn report(cfg: &RunConfig) -> Result<Artifacts> {
    let figure = cfg.figure.ok_or_else(|| anyhow!("report needs a figure"))?;
    let mut art = Artifacts::default();
    match figure {
        Figure::Fig1a | Figure::Fig1b | Figure::Fig3 => {
            let flow = flow_of(cfg)?;
            art.merge(flow_artifacts(&flow)?);
            let (name, title) = match figure {
                Figure::Fig1a => ("fig1a", "first-order path"),
                Figure::Fig1b => ("fig1b", "second-order path"),
                _ => ("fig3", "collective path"),
            };
            art.text(format!("{name}.gp"), plots::flow(name, title));
        }
        Figure::Fig2 => {
            let flow = flow_of(cfg)?;
            art.merge(flow_artifacts(&flow)?);
            art.merge(wavefunction_artifacts(cfg)?);
            art.text("fig2.gp", plots::fig2());
        }
        Figure::Fig4 => {
            art.merge(density_artifacts(cfg)?);
            art.text("fig4.gp", plots::density(panels(cfg)?.len()));
        }
    }
    Ok(art)
}
