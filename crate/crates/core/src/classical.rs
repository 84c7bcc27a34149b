//! Classical phase-space volumes `W(E)` and their energy derivative `V(E)`
//! for `H = p²/2 + V`, and the smooth (Weyl) level density.
//!
//! One dimension: the allowed region is a union of intervals bounded by
//! turning points of the quartic. On each interval `E − V` factors as
//! `(x − x₁)(x₂ − x) q(x)` with a positive quadratic `q`, and the substitution
//! `x = m + h sin θ` removes the square-root endpoint behaviour.
//!
//! Two dimensions: for every angle the radial allowed set is found from the
//! quartic in `r` and integrated in closed form; the angular integral is split
//! at the angles where the radial structure changes.

use std::f64::consts::{FRAC_PI_3, PI, SQRT_2};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potentials::{stationary_points, Model, PotentialSpec, StationaryKind, StationaryPoint};
use crate::quad::integrate_adaptive;

/// One-sided offset used when a grid energy coincides with a critical energy.
pub const CRITICAL_OFFSET: f64 = 1e-9;

const REL_TOL: f64 = 1e-12;

/// `W`, `V` tabulated on an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeCurve {
    pub energies: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub f: usize,
}

/// Quartic `x⁴ + c3 x³ + c2 x² + c1 x` on the real line.
#[derive(Debug, Clone, Copy)]
struct Quartic {
    c3: f64,
    c2: f64,
    c1: f64,
}

impl Quartic {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        x * (self.c1 + x * (self.c2 + x * (self.c3 + x)))
    }

    #[inline]
    fn deriv(&self, x: f64) -> f64 {
        self.c1 + x * (2.0 * self.c2 + x * (3.0 * self.c3 + 4.0 * x))
    }

    /// Real zeros of `V'`, ascending.
    fn critical_xs(&self) -> Vec<f64> {
        // monic form x³ + a2 x² + a1 x + a0, depressed by x = y − a2/3
        let a2 = 3.0 * self.c3 / 4.0;
        let a1 = self.c2 / 2.0;
        let a0 = self.c1 / 4.0;
        let pp = a1 - a2 * a2 / 3.0;
        let qq = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
        let shift = a2 / 3.0;
        let mut xs: Vec<f64> = crate::potentials::depressed_cubic_roots(pp, qq)
            .into_iter()
            .map(|(y, _)| y - shift)
            .collect();
        for x in xs.iter_mut() {
            let d2 = 2.0 * self.c2 + 6.0 * self.c3 * *x + 12.0 * *x * *x;
            if d2.abs() > 1e-8 {
                *x -= self.deriv(*x) / d2;
            }
        }
        xs.sort_by(f64::total_cmp);
        xs
    }

    fn min_value(&self) -> f64 {
        self.critical_xs().into_iter().map(|x| self.value(x)).fold(f64::INFINITY, f64::min)
    }

    /// Maximal intervals where `V ≤ E`.
    fn allowed_intervals(&self, e: f64) -> Vec<(f64, f64)> {
        let crit = self.critical_xs();
        let g = |x: f64| self.value(x) - e;
        // outer bound where V > E for sure
        let mut big = 1.0 + self.c3.abs() + self.c2.abs().sqrt() + self.c1.abs().cbrt() + e.abs().sqrt().sqrt();
        while g(big) <= 0.0 || g(-big) <= 0.0 {
            big *= 2.0;
        }
        let mut knots = vec![-big];
        knots.extend(crit.iter().copied());
        knots.push(big);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (glo, ghi) = (g(lo), g(hi));
            if glo == 0.0 && (roots.last() != Some(&lo)) {
                roots.push(lo);
            }
            if glo * ghi < 0.0 {
                roots.push(bracketed_root(&g, &|x| self.deriv(x), lo, hi));
            }
        }
        // pair consecutive roots that enclose an allowed region
        let mut out = Vec::new();
        let mut i = 0;
        while i + 1 < roots.len() {
            let (a, b) = (roots[i], roots[i + 1]);
            let mid = 0.5 * (a + b);
            if g(mid) <= 0.0 && b > a {
                out.push((a, b));
                i += 2;
            } else {
                i += 1;
            }
        }
        out
    }

    /// `(W, V)` with `W = 2√2 ∫√(E−V)` and `V = √2 ∫ 1/√(E−V)`.
    fn volumes(&self, e: f64, want_v: bool) -> Result<(f64, f64)> {
        let crit = self.critical_xs();
        let mut w_total = 0.0;
        let mut v_total = 0.0;
        for (x1, x2) in self.allowed_intervals(e) {
            let m = 0.5 * (x1 + x2);
            let h = 0.5 * (x2 - x1);
            if h <= 0.0 {
                continue;
            }
            let sigma = self.c3 + x1 + x2;
            let s = self.c2 + (x1 + x2) * sigma - x1 * x2;
            let qx = move |x: f64| (x * (x + sigma) + s).max(0.0);
            // split at interior stationary points (the integrand peaks there near a barrier top)
            let mut cuts = vec![-0.5 * PI];
            for &xc in &crit {
                let u = (xc - m) / h;
                if u > -1.0 + 1e-12 && u < 1.0 - 1e-12 {
                    cuts.push(u.asin());
                }
            }
            cuts.push(0.5 * PI);
            for c in cuts.windows(2) {
                let wi = integrate_adaptive(
                    |t: f64| {
                        let ct = t.cos();
                        ct * ct * qx(m + h * t.sin()).sqrt()
                    },
                    c[0],
                    c[1],
                    1e-300,
                    REL_TOL,
                )?;
                w_total += 2.0 * SQRT_2 * h * h * wi;
                if want_v {
                    let vi = integrate_adaptive(
                        |t: f64| {
                            let qv = qx(m + h * t.sin());
                            if qv > 0.0 {
                                1.0 / qv.sqrt()
                            } else {
                                0.0
                            }
                        },
                        c[0],
                        c[1],
                        1e-300,
                        REL_TOL,
                    )?;
                    v_total += SQRT_2 * vi;
                }
            }
        }
        Ok((w_total, v_total))
    }
}

/// Safeguarded Newton iteration on a sign-changing bracket.
fn bracketed_root<G: Fn(f64) -> f64, D: Fn(f64) -> f64>(g: &G, dg: &D, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    if glo == 0.0 {
        return lo;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if (gx < 0.0) == (glo < 0.0) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        let d = dg(x);
        let mut next = x - gx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return next;
        }
        x = next;
    }
    x
}

fn cusp_quartic(spec: &PotentialSpec) -> Quartic {
    Quartic { c3: 0.0, c2: spec.p, c1: spec.q }
}

/// 1D potential along the two mirror lines of the collective sextant, joined
/// into the full line: `x⁴ + B x³ + A x²`.
fn mirror_quartic(spec: &PotentialSpec) -> Quartic {
    Quartic { c3: spec.q, c2: spec.p, c1: 0.0 }
}

fn barrier_tops(spec: &PotentialSpec) -> Vec<f64> {
    stationary_points(spec)
        .into_iter()
        .filter(|p| p.kind == StationaryKind::Maximum)
        .map(|p| p.energy)
        .collect()
}

fn check_energy(e: f64) -> Result<()> {
    if !e.is_finite() {
        return Err(Error::Domain(format!("non-finite energy {e}")));
    }
    Ok(())
}

/// Global minimum of the potential.
pub fn minimum_energy(spec: &PotentialSpec) -> f64 {
    stationary_points(spec).first().map(|p| p.energy).unwrap_or(0.0)
}

/// Phase-space volume below `E`.
pub fn w_volume(spec: &PotentialSpec, e: f64) -> Result<f64> {
    check_energy(e)?;
    if e <= minimum_energy(spec) {
        return Ok(0.0);
    }
    match spec.model {
        Model::Cusp => Ok(cusp_quartic(spec).volumes(e, false)?.0),
        Model::Collective => Ok(collective_volumes(spec, e)?.0),
    }
}

/// Density of phase-space volume at `E`, `dW/dE`.
pub fn v_volume(spec: &PotentialSpec, e: f64) -> Result<f64> {
    check_energy(e)?;
    if e < minimum_energy(spec) {
        return Ok(0.0);
    }
    match spec.model {
        Model::Cusp => {
            for top in barrier_tops(spec) {
                if (e - top).abs() <= 1e-14 * (1.0 + top.abs()) {
                    return Err(Error::LogSingularity { energy: e });
                }
            }
            if e == minimum_energy(spec) {
                // limit from above: 2π/ω summed over degenerate minima
                return Ok(stationary_points(spec)
                    .iter()
                    .filter(|p| p.kind == StationaryKind::Minimum && p.energy == e)
                    .map(|p| 2.0 * PI / p.hessian_eigenvalues[0].sqrt())
                    .sum());
            }
            Ok(cusp_quartic(spec).volumes(e, true)?.1)
        }
        Model::Collective => {
            if e == minimum_energy(spec) {
                return Ok(0.0);
            }
            Ok(collective_volumes(spec, e)?.1)
        }
    }
}

/// Both volumes at once (shares the root finding in 2D).
pub fn volumes(spec: &PotentialSpec, e: f64) -> Result<(f64, f64)> {
    Ok((w_volume(spec, e)?, v_volume(spec, e)?))
}

/// Weyl-law level density `V(E)/(2πK)^f`.
pub fn smoothed_density(spec: &PotentialSpec, k: f64, e: f64) -> Result<f64> {
    check_k(k)?;
    Ok(v_volume(spec, e)? / (2.0 * PI * k).powi(spec.dof() as i32))
}

/// Weyl-law level count `W(E)/(2πK)^f`.
pub fn smoothed_count(spec: &PotentialSpec, k: f64, e: f64) -> Result<f64> {
    check_k(k)?;
    Ok(w_volume(spec, e)? / (2.0 * PI * k).powi(spec.dof() as i32))
}

/// Boundary correction to the 2D level count from the two mirror lines of the
/// sextant (Neumann conditions): `W_line(E) / (4 · 2πK)`, with `W_line` the 1D
/// phase-space volume of `x⁴ + B x³ + A x²` along the full line. Zero for the
/// cusp, whose configuration space has no boundary.
pub fn boundary_count_correction(spec: &PotentialSpec, k: f64, e: f64) -> Result<f64> {
    check_k(k)?;
    check_energy(e)?;
    match spec.model {
        Model::Cusp => Ok(0.0),
        Model::Collective => {
            let quartic = mirror_quartic(spec);
            if e <= quartic.min_value() {
                return Ok(0.0);
            }
            Ok(quartic.volumes(e, false)?.0 / (8.0 * PI * k))
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("K must be positive and finite, got {k}")));
    }
    Ok(())
}

/// `W` and `V` on a grid. Grid energies that coincide with a critical energy
/// are shifted up by [`CRITICAL_OFFSET`].
pub fn volume_curve(spec: &PotentialSpec, energies: &[f64]) -> Result<VolumeCurve> {
    for w in energies.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidArgument("energy grid must be sorted".into()));
        }
    }
    let crit: Vec<f64> = stationary_points(spec).iter().map(|p| p.energy).collect();
    let vals: Vec<(f64, f64)> = energies
        .par_iter()
        .map(|&e| {
            let mut ee = e;
            if crit.iter().any(|c| (e - c).abs() <= 1e-14 * (1.0 + c.abs())) {
                ee = e + CRITICAL_OFFSET;
            }
            volumes(spec, ee)
        })
        .collect::<Result<_>>()?;
    Ok(VolumeCurve {
        energies: energies.to_vec(),
        w: vals.iter().map(|v| v.0).collect(),
        v: vals.iter().map(|v| v.1).collect(),
        f: spec.dof(),
    })
}

/// Type of non-analyticity of `V(E)` at a stationary energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Singularity {
    /// `V` jumps (1D minimum).
    Jump,
    /// `V` diverges logarithmically (1D maximum).
    LogDivergence,
    /// `V` continuous with a slope discontinuity (2D minimum or maximum).
    SlopeKink,
    /// `V` continuous with an infinite one-sided slope (2D saddle).
    SingularTangent,
    /// No leading-order singularity (degenerate stationary points).
    Smooth,
}

pub fn classify_singularity(spec: &PotentialSpec, sp: &StationaryPoint) -> Singularity {
    if sp.degenerate {
        return Singularity::Smooth;
    }
    match (spec.model, sp.kind) {
        (Model::Cusp, StationaryKind::Minimum) => Singularity::Jump,
        (Model::Cusp, _) => Singularity::LogDivergence,
        (Model::Collective, StationaryKind::Saddle) => Singularity::SingularTangent,
        (Model::Collective, _) => Singularity::SlopeKink,
    }
}

// ---------------------------------------------------------------------------
// two dimensions

/// Radial quartic `r⁴ + c r³ + A r²` for one angle.
struct Radial {
    c: f64,
    a: f64,
    e: f64,
}

impl Radial {
    #[inline]
    fn g(&self, r: f64) -> f64 {
        r * r * (r * r + self.c * r + self.a) - self.e
    }

    #[inline]
    fn dg(&self, r: f64) -> f64 {
        r * (4.0 * r * r + 3.0 * self.c * r + 2.0 * self.a)
    }

    /// Positive zeros of `dV/dr`, ascending.
    fn stationary(&self) -> Vec<f64> {
        let disc = 9.0 * self.c * self.c - 32.0 * self.a;
        if disc < 0.0 {
            return Vec::new();
        }
        let s = disc.sqrt();
        let mut v: Vec<f64> = [(-3.0 * self.c - s) / 8.0, (-3.0 * self.c + s) / 8.0]
            .into_iter()
            .filter(|r| *r > 0.0)
            .collect();
        v.dedup();
        v
    }

    /// Sum over allowed intervals of `(hi² − lo²)/2` and of `F(hi) − F(lo)`.
    fn integrals(&self) -> (f64, f64) {
        let mut knots = vec![0.0];
        knots.extend(self.stationary());
        let mut big = 1.0 + self.c.abs() + self.a.abs().sqrt() + self.e.abs().sqrt().sqrt();
        while self.g(big) <= 0.0 {
            big *= 2.0;
        }
        knots.push(big);
        // sign of g just to the right of a knot, so that knots sitting exactly
        // on E (a stationary energy) do not hide a sign change
        let side = |k: f64, next: f64| {
            let v = self.g(k);
            if v != 0.0 {
                v
            } else {
                self.g(k + 1e-9 * (next - k))
            }
        };
        let mut inside = side(0.0, knots[1]) < 0.0;
        let mut start = 0.0;
        let mut area = 0.0;
        let mut wsum = 0.0;
        let f = |r: f64| {
            let r2 = r * r;
            r2 * (0.5 * self.e - r2 * (r2 / 6.0 + self.c * r / 5.0 + self.a / 4.0))
        };
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (glo, ghi) = (side(lo, hi), self.g(hi));
            if glo * ghi < 0.0 {
                let root = bracketed_root(&|r| self.g(r), &|r| self.dg(r), lo, hi);
                if inside {
                    area += 0.5 * (root * root - start * start);
                    wsum += f(root) - f(start);
                    inside = false;
                } else {
                    start = root;
                    inside = true;
                }
            }
        }
        (area, wsum)
    }
}

/// Angles in `(0, π/3)` at which a radial stationary value crosses `E`.
fn angular_breakpoints(spec: &PotentialSpec, e: f64) -> Vec<f64> {
    let vals = |phi: f64| -> [f64; 2] {
        let c = spec.q * (3.0 * phi).cos();
        let disc = 9.0 * c * c - 32.0 * spec.p;
        if disc < 0.0 {
            return [f64::NAN, f64::NAN];
        }
        let s = disc.sqrt();
        let mut out = [f64::NAN; 2];
        for (i, r) in [(-3.0 * c - s) / 8.0, (-3.0 * c + s) / 8.0].into_iter().enumerate() {
            if r > 0.0 {
                out[i] = spec.radial(r, c) - e;
            }
        }
        out
    };
    let n = 512;
    let mut out = Vec::new();
    let mut prev_phi = 0.0;
    let mut prev = vals(0.0);
    for i in 1..=n {
        let phi = FRAC_PI_3 * i as f64 / n as f64;
        let cur = vals(phi);
        for j in 0..2 {
            let (a, b) = (prev[j], cur[j]);
            if a.is_nan() != b.is_nan() {
                // a stationary branch appears or vanishes (sqrt-type change)
                let (mut lo, mut hi) = (prev_phi, phi);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if vals(mid)[j].is_nan() == a.is_nan() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            } else if a * b < 0.0 {
                let (mut lo, mut hi) = (prev_phi, phi);
                let sa = a < 0.0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let m = vals(mid)[j];
                    if m.is_nan() {
                        break;
                    }
                    if (m < 0.0) == sa {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
        prev = cur;
        prev_phi = phi;
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out.retain(|p| *p > 1e-14 && *p < FRAC_PI_3 - 1e-14);
    out
}

/// `(W, V)` for the collective potential.
fn collective_volumes(spec: &PotentialSpec, e: f64) -> Result<(f64, f64)> {
    let mut cuts = vec![0.0];
    cuts.extend(angular_breakpoints(spec, e));
    cuts.push(FRAC_PI_3);
    let mut area = 0.0;
    let mut wint = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        // φ(u) = lo + half (1 − cos πu): clusters nodes at both ends
        let map = |u: f64| (lo + half * (1.0 - (PI * u).cos()), half * PI * (PI * u).sin());
        let radial = |phi: f64| Radial { c: spec.q * (3.0 * phi).cos(), a: spec.p, e }.integrals();
        area += integrate_adaptive(
            |u| {
                let (phi, jac) = map(u);
                radial(phi).0 * jac
            },
            0.0,
            1.0,
            1e-300,
            REL_TOL,
        )?;
        wint += integrate_adaptive(
            |u| {
                let (phi, jac) = map(u);
                radial(phi).1 * jac
            },
            0.0,
            1.0,
            1e-300,
            REL_TOL,
        )?;
    }
    Ok((2.0 * PI * wint, 2.0 * PI * area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::critical_energies;
    use crate::quad::{gauss_legendre, integrate_fixed};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn harmonic_limit() {
        let spec = PotentialSpec::cusp(1.0, 0.0);
        let v = v_volume(&spec, 1e-8).unwrap();
        assert!(rel(v, 2.0 * PI / SQRT_2) < 1e-6);
        let w = w_volume(&spec, 1e-6).unwrap();
        assert!(rel(w, 2.0 * PI / SQRT_2 * 1e-6) < 1e-5);
        assert!(rel(smoothed_density(&spec, 0.01, 1e-9).unwrap(), 1.0 / (SQRT_2 * 0.01)) < 1e-6);
    }

    #[test]
    fn below_minimum_is_zero() {
        for spec in [PotentialSpec::cusp(-1.0, 0.3), PotentialSpec::collective(0.2, 1.0)] {
            let emin = minimum_energy(&spec);
            assert_eq!(w_volume(&spec, emin).unwrap(), 0.0);
            assert_eq!(w_volume(&spec, emin - 1.0).unwrap(), 0.0);
            assert_eq!(v_volume(&spec, emin - 1.0).unwrap(), 0.0);
            assert_eq!(smoothed_density(&spec, 0.01, emin - 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn pure_quartic_1d() {
        // oracle: ∫₀¹ du/√(1−u⁴) with u = 1 − s², which removes the endpoint singularity
        let rule = gauss_legendre(200);
        let beta = integrate_fixed(
            |s: f64| {
                let u = 1.0 - s * s;
                2.0 / ((1.0 + u) * (1.0 + u * u)).sqrt()
            },
            0.0,
            1.0,
            &rule,
        );
        let want = 2.0 * SQRT_2 * beta;
        let got = v_volume(&PotentialSpec::cusp(0.0, 0.0), 1.0).unwrap();
        assert!((got - 3.708_149_354_602_744).abs() < 1e-9, "{got}");
        assert!(rel(got, want) < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn pure_quartic_2d() {
        let spec = PotentialSpec::collective(0.0, 0.0);
        let v = v_volume(&spec, 1.0).unwrap();
        assert!(rel(v, PI * PI / 3.0) < 1e-12);
        // W = 2π (π/3) ∫₀¹ (1 − r⁴) r dr = 2π (π/3)(1/2 − 1/6)
        let w = w_volume(&spec, 1.0).unwrap();
        assert!(rel(w, 2.0 * PI * FRAC_PI_3 / 3.0) < 1e-12);
        let d = smoothed_density(&spec, 1e-3, 1.0).unwrap();
        assert!(rel(d, PI * PI / 3.0 / (2.0 * PI * 1e-3f64).powi(2)) < 1e-12);
    }

    #[test]
    fn monte_carlo_area() {
        // area of {V ≤ E} in the sextant for a generic collective point
        let spec = PotentialSpec::collective(0.22, 1.0);
        let e = 0.004;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let rmax = 0.8;
        let mut hit = 0usize;
        for _ in 0..n {
            let x: f64 = rng.random_range(0.0..rmax);
            let y: f64 = rng.random_range(0.0..rmax);
            let r = x.hypot(y);
            let phi = y.atan2(x);
            if phi <= FRAC_PI_3 && spec.radial(r, (3.0 * phi).cos()) <= e {
                hit += 1;
            }
        }
        let area = rmax * rmax * hit as f64 / n as f64;
        let sigma = rmax * rmax * ((hit as f64) * (1.0 - hit as f64 / n as f64)).sqrt() / n as f64;
        let v = v_volume(&spec, e).unwrap();
        assert!((v / (2.0 * PI) - area).abs() < 4.0 * sigma, "{} vs {area} ± {sigma}", v / (2.0 * PI));
    }

    #[test]
    fn log_singularity_flagged() {
        let spec = PotentialSpec::cusp(-1.0, 0.0);
        assert!(matches!(v_volume(&spec, 0.0), Err(Error::LogSingularity { .. })));
        assert!(v_volume(&spec, 1e-9).unwrap() > v_volume(&spec, 1e-3).unwrap());
        // grid evaluation stays total
        let curve = volume_curve(&spec, &[-0.1, 0.0, 0.1]).unwrap();
        assert!(curve.v.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn log_fit_at_barrier() {
        let spec = PotentialSpec::cusp(-1.0, -0.3);
        let e3 = critical_energies(&spec).barrier.unwrap();
        for side in [-1.0, 1.0] {
            let pts: Vec<(f64, f64)> = (0..=20)
                .map(|i| {
                    let d = 10f64.powf(-4.0 + 2.0 * i as f64 / 20.0);
                    (d.ln(), v_volume(&spec, e3 + side * d).unwrap())
                })
                .collect();
            let (slope, r2) = linear_fit(&pts);
            assert!(slope < 0.0);
            assert!(r2 > 0.999, "side {side}: R² = {r2}");
        }
    }

    fn linear_fit(p: &[(f64, f64)]) -> (f64, f64) {
        let n = p.len() as f64;
        let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
        let my = p.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
        let syy: f64 = p.iter().map(|q| (q.1 - my).powi(2)).sum();
        let slope = sxy / sxx;
        (slope, sxy * sxy / (sxx * syy))
    }

    #[test]
    fn jump_at_secondary_minimum() {
        let spec = PotentialSpec::cusp(-1.0, 0.2);
        let ce = critical_energies(&spec);
        let e2 = ce.secondary_min.unwrap();
        let below = v_volume(&spec, e2 - 1e-7).unwrap();
        let above = v_volume(&spec, e2 + 1e-7).unwrap();
        let pts = stationary_points(&spec);
        let h = pts.iter().find(|p| p.energy == e2).unwrap().hessian_eigenvalues[0];
        assert!(rel(above - below, 2.0 * PI / h.sqrt()) < 1e-3);
    }

    #[test]
    fn collective_kink_and_tangent() {
        let spec = PotentialSpec::collective(0.22, 1.0);
        let ce = critical_energies(&spec);
        let e2 = ce.secondary_min.unwrap();
        let e3 = ce.barrier.unwrap();
        let v = |e: f64| v_volume(&spec, e).unwrap();
        // continuity at E2, different one-sided slopes
        let d = 1e-6;
        let jump = |d: f64| (v(e2 + d) - v(e2 - d)).abs();
        assert!(jump(d / 10.0) < 0.2 * jump(d));
        let sl = (v(e2 - d) - v(e2 - 2.0 * d)) / d;
        let sr = (v(e2 + 2.0 * d) - v(e2 + d)) / d;
        assert!((sr - sl).abs() > 0.1 * sl.abs());
        // one-sided slope at the saddle grows like −ln|E − E3|: equal increments per decade
        let slope = |d: f64| (v(e3 + d) - v(e3)) / d;
        for side in [1.0, -1.0] {
            let s: Vec<f64> = [1e-4, 1e-6, 1e-8].iter().map(|d| slope(side * d)).collect();
            let (i1, i2) = (s[1] - s[0], s[2] - s[1]);
            assert!(i1 > 0.0 && i2 > 0.0);
            assert!(rel(i2, i1) < 0.05, "{s:?}");
        }
    }

    #[test]
    fn classification() {
        let spec = PotentialSpec::cusp(-1.0, 0.2);
        let kinds: Vec<_> = stationary_points(&spec).iter().map(|p| classify_singularity(&spec, p)).collect();
        assert_eq!(kinds, vec![Singularity::Jump, Singularity::Jump, Singularity::LogDivergence]);
        let spec = PotentialSpec::collective(0.22, 1.0);
        let kinds: Vec<_> = stationary_points(&spec).iter().map(|p| classify_singularity(&spec, p)).collect();
        assert_eq!(kinds, vec![Singularity::SlopeKink, Singularity::SlopeKink, Singularity::SingularTangent]);
    }

    #[test]
    fn boundary_term_vanishes_for_cusp() {
        assert_eq!(boundary_count_correction(&PotentialSpec::cusp(-1.0, 0.0), 0.01, 0.3).unwrap(), 0.0);
        assert!(boundary_count_correction(&PotentialSpec::collective(0.27, 1.0), 0.01, 0.01).unwrap() > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cusp_derivative_and_monotonicity(a in -1.5f64..1.5, b in -0.8f64..0.8, t in 0.05f64..1.0) {
            let spec = PotentialSpec::cusp(a, b);
            let emin = minimum_energy(&spec);
            let e = emin + t;
            let near_critical = stationary_points(&spec).iter().any(|p| (p.energy - e).abs() < 1e-3);
            prop_assume!(!near_critical);
            let h = 1e-5;
            let fd = (w_volume(&spec, e + h).unwrap() - w_volume(&spec, e - h).unwrap()) / (2.0 * h);
            let v = v_volume(&spec, e).unwrap();
            prop_assert!(rel(fd, v) < 1e-4);
            prop_assert!(w_volume(&spec, e + 0.01).unwrap() > w_volume(&spec, e).unwrap());
            prop_assert!(v > 0.0);
        }

        #[test]
        fn collective_derivative(a in -0.3f64..0.6, t in 0.002f64..0.05) {
            let spec = PotentialSpec::collective(a, 1.0);
            let e = minimum_energy(&spec) + t;
            let near_critical = stationary_points(&spec).iter().any(|p| (p.energy - e).abs() < 1e-4);
            prop_assume!(!near_critical);
            let h = 1e-5 * t;
            let fd = (w_volume(&spec, e + h).unwrap() - w_volume(&spec, e - h).unwrap()) / (2.0 * h);
            let v = v_volume(&spec, e).unwrap();
            prop_assert!(rel(fd, v) < 1e-4, "{} vs {}", fd, v);
            prop_assert!(w_volume(&spec, e + 0.01 * t).unwrap() > w_volume(&spec, e).unwrap());
        }
    }
}
