//! End-to-end checks across modules: spectra feeding flows, thermodynamics,
//! densities and wave functions.

use esqpt_core::basis::wavefunction_samples;
use esqpt_core::classical::{boundary_count_correction, smoothed_count, smoothed_density};
use esqpt_core::density::{converged_counts, default_bin_width, histogram, slope_segments, staircase};
use esqpt_core::levelflow::{sweep, ParameterPath};
use esqpt_core::potentials::{critical_energies, PathKind, Point, PotentialSpec};
use esqpt_core::spectra::{converged_spectrum, converged_spectrum_with, scaling_check, ModelPoint, SolverOptions};
use esqpt_core::thermo::{free_energy, separatrix, thermo_table};

#[test]
fn quartic_scaling() {
    let r = scaling_check(&PotentialSpec::cusp(0.0, 0.0), 2e-2, 1e-2).unwrap();
    assert!(r.passed(1e-8), "{r:?}");
}

#[test]
fn flow_feeds_thermo_table() {
    let path = ParameterPath::linspace(PathKind::CuspSecondOrder, -0.4, 0.4, 17).unwrap();
    let flow = sweep(&path, 2e-2, 40, &SolverOptions::default()).unwrap();
    let temps = [0.01, 0.03, 0.1];
    let table = thermo_table(&flow, &temps).unwrap();
    assert_eq!(table.cells.len(), 17);
    for (g, row) in table.cells.iter().enumerate() {
        assert_eq!(row.len(), 3);
        // F falls with T and never exceeds the ground state
        assert!(row[0].f <= flow.energies[g][0] + 1e-15);
        assert!(row.windows(2).all(|w| w[1].f < w[0].f));
        assert!(row.iter().all(|c| c.s >= 0.0 && c.var_e >= 0.0));
        assert_eq!(row[1].f, free_energy(&flow.energies[g], 0.03));
    }
    let sep = separatrix(&table);
    assert_eq!(sep.len(), 3);
    assert!(sep.iter().all(|(_, l)| flow.lambdas.contains(l)), "{sep:?}");
}

#[test]
fn collective_counts_follow_corrected_weyl_law() {
    let spec = PotentialSpec::collective(0.3, 1.0);
    let k = 1e-2;
    let mp = ModelPoint::new(spec, k).unwrap();
    let sp = converged_spectrum(&mp, 120, 1e-9).unwrap();
    let probes: Vec<f64> = (40..100).step_by(10).map(|i| 0.5 * (sp.levels[i] + sp.levels[i + 1])).collect();
    let counted = converged_counts(&mp, &probes, &SolverOptions::default()).unwrap();
    for (e, c) in probes.iter().zip(&counted.counts) {
        assert_eq!(*c, staircase(&sp.levels, *e));
        let smooth = smoothed_count(&spec, k, *e).unwrap() + boundary_count_correction(&spec, k, *e).unwrap();
        assert!((*c as f64 / smooth - 1.0).abs() < 0.05, "E = {e}: {c} vs {smooth}");
    }
}

#[test]
fn cusp_histogram_tracks_smoothed_density() {
    let spec = PathKind::CuspFirstOrder.spec(0.2);
    let k = 5e-3;
    let levels = converged_spectrum(&ModelPoint::new(spec, k).unwrap(), 400, 1e-9).unwrap().levels;
    let h = histogram(&levels, default_bin_width(&levels).unwrap(), &spec, Some(k)).unwrap();
    let fit = slope_segments(&h).unwrap();
    assert_eq!(fit.breakpoints.len(), critical_energies(&spec).to_vec().iter().filter(|&&e| e > h.edges[0] && e < h.edges[h.edges.len() - 1]).count());
    let centers = h.centers();
    let mid = centers.len() / 2;
    let smooth = smoothed_density(&spec, k, centers[mid]).unwrap();
    assert!((h.density[mid] / smooth - 1.0).abs() < 0.1, "{} vs {smooth}", h.density[mid]);
}

#[test]
fn wave_functions_are_normalized() {
    let spec = PathKind::CuspFirstOrder.spec(-0.1);
    let sp = converged_spectrum(&ModelPoint::new(spec, 2e-2).unwrap(), 8, 1e-10).unwrap();
    let n = 4001;
    let xs: Vec<Point> = (0..n).map(|i| Point::X(-2.0 + 4.0 * i as f64 / (n - 1) as f64)).collect();
    for v in &sp.vectors {
        let p = wavefunction_samples(v, &sp.basis, &xs).unwrap();
        let norm: f64 = p.iter().sum::<f64>() * 4.0 / (n - 1) as f64;
        assert!((norm - 1.0).abs() < 1e-6, "{norm}");
    }
    // collective: integrate over the sextant, r dr dφ
    let spec = PotentialSpec::collective(0.3, 1.0);
    let sp = converged_spectrum_with(&ModelPoint::new(spec, 2e-2).unwrap(), 4, &SolverOptions::default()).unwrap();
    let (nr, nphi) = (400, 60);
    let (rmax, dphi) = (1.5, std::f64::consts::FRAC_PI_3 / nphi as f64);
    let dr = rmax / nr as f64;
    let grid: Vec<Point> = (0..nr)
        .flat_map(|i| (0..nphi).map(move |j| Point::Polar { r: (i as f64 + 0.5) * dr, phi: (j as f64 + 0.5) * dphi }))
        .collect();
    for v in &sp.vectors {
        let p = wavefunction_samples(v, &sp.basis, &grid).unwrap();
        let norm: f64 = grid
            .iter()
            .zip(&p)
            .map(|(pt, d)| match pt {
                Point::Polar { r, .. } => r * d * dr * dphi,
                Point::X(_) => unreachable!(),
            })
            .sum();
        assert!((norm - 1.0).abs() < 1e-3, "{norm}");
    }
}
