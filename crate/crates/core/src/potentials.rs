//! The two model potentials, their stationary points and critical loci.
//!
//! Cusp: `V(x) = x⁴ + a x² + b x`.
//! Collective: `V(r, φ) = r⁴ + A r² + B r³ cos 3φ` on the sextant `φ ∈ [0, π/3]`.

use std::f64::consts::{FRAC_PI_3, PI};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Cusp,
    Collective,
}

impl Model {
    /// Number of classical degrees of freedom.
    pub fn dof(self) -> usize {
        match self {
            Model::Cusp => 1,
            Model::Collective => 2,
        }
    }
}

/// Model tag plus its two real parameters: `(a, b)` for the cusp and
/// `(A, B)` for the collective potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub model: Model,
    pub p: f64,
    pub q: f64,
}

impl PotentialSpec {
    pub fn new(model: Model, p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::Domain(format!("non-finite potential parameters ({p}, {q})")));
        }
        Ok(PotentialSpec { model, p, q })
    }

    /// `x⁴ + a x² + b x`. Panics on non-finite parameters.
    pub fn cusp(a: f64, b: f64) -> Self {
        Self::new(Model::Cusp, a, b).expect("finite cusp parameters")
    }

    /// `r⁴ + A r² + B r³ cos 3φ`. Panics on non-finite parameters.
    pub fn collective(a: f64, b: f64) -> Self {
        Self::new(Model::Collective, a, b).expect("finite collective parameters")
    }

    pub fn dof(&self) -> usize {
        self.model.dof()
    }

    /// Potential along a ray of the collective model: `r⁴ + c r³ + A r²` with
    /// `c = B cos 3φ`.
    #[inline]
    pub fn radial(&self, r: f64, c: f64) -> f64 {
        let r2 = r * r;
        r2 * (r2 + c * r + self.p)
    }

    /// Cusp potential at `x` without domain checks.
    #[inline]
    pub fn cusp_value(&self, x: f64) -> f64 {
        let x2 = x * x;
        x2 * (x2 + self.p) + self.q * x
    }

    /// Collective potential in Cartesian coordinates, valid in the whole plane:
    /// `r³ cos 3φ = x³ − 3 x y²`.
    pub fn collective_cartesian(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        r2 * r2 + self.p * r2 + self.q * (x * x * x - 3.0 * x * y * y)
    }
}

/// A point in the model's configuration space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    X(f64),
    Polar { r: f64, phi: f64 },
}

/// Evaluates the potential at `point`.
pub fn eval_potential(spec: &PotentialSpec, point: Point) -> Result<f64> {
    match (spec.model, point) {
        (Model::Cusp, Point::X(x)) => {
            if !x.is_finite() {
                return Err(Error::Domain(format!("non-finite coordinate x = {x}")));
            }
            Ok(spec.cusp_value(x))
        }
        (Model::Collective, Point::Polar { r, phi }) => {
            if !r.is_finite() || !phi.is_finite() {
                return Err(Error::Domain(format!("non-finite coordinates ({r}, {phi})")));
            }
            if r < 0.0 {
                return Err(Error::Domain(format!("negative radius r = {r}")));
            }
            if !(-1e-15..=FRAC_PI_3 + 1e-15).contains(&phi) {
                return Err(Error::Domain(format!("angle {phi} outside the sextant [0, π/3]")));
            }
            Ok(spec.radial(r, spec.q * (3.0 * phi).cos()))
        }
        (m, p) => Err(Error::ModelMismatch(format!("{p:?} is not a coordinate of the {m:?} model"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    pub location: Point,
    pub energy: f64,
    pub kind: StationaryKind,
    /// Hessian eigenvalues in Cartesian coordinates.
    pub hessian_eigenvalues: Vec<f64>,
    /// Set when a Hessian eigenvalue vanishes (spinodal merging); such points
    /// are classified as saddles.
    pub degenerate: bool,
}

fn classify(hess: &[f64], tol: f64) -> (StationaryKind, bool) {
    if hess.iter().any(|h| h.abs() <= tol) {
        return (StationaryKind::Saddle, true);
    }
    if hess.iter().all(|&h| h > 0.0) {
        (StationaryKind::Minimum, false)
    } else if hess.iter().all(|&h| h < 0.0) {
        (StationaryKind::Maximum, false)
    } else {
        (StationaryKind::Saddle, false)
    }
}

/// Real roots of `x³ + p x + q = 0`, ascending, each multiple root listed once.
/// The second return value marks roots that are double.
pub fn depressed_cubic_roots(p: f64, q: f64) -> Vec<(f64, bool)> {
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    let scale = (4.0 * p * p * p).abs() + 27.0 * q * q;
    if scale == 0.0 {
        return vec![(0.0, true)];
    }
    if disc.abs() <= 1e-13 * scale {
        // double root −3q/(2p), simple root 3q/p
        let d = -1.5 * q / p;
        let s = 3.0 * q / p;
        let mut v = vec![(d, true), (s, false)];
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        return v;
    }
    let mut roots = if disc < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3).map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos()).collect::<Vec<_>>()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    };
    for x in roots.iter_mut() {
        // one Newton step
        let f = *x * *x * *x + p * *x + q;
        let df = 3.0 * *x * *x + p;
        if df.abs() > 1e-8 * (1.0 + p.abs()) {
            *x -= f / df;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.into_iter().map(|x| (x, false)).collect()
}

/// All real stationary points, sorted by energy.
pub fn stationary_points(spec: &PotentialSpec) -> Vec<StationaryPoint> {
    let mut pts = match spec.model {
        Model::Cusp => cusp_stationary(spec),
        Model::Collective => collective_stationary(spec),
    };
    pts.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(loc_key(&a.location).total_cmp(&loc_key(&b.location))));
    pts
}

fn loc_key(p: &Point) -> f64 {
    match p {
        Point::X(x) => *x,
        Point::Polar { r, phi } => r + 10.0 * phi,
    }
}

fn cusp_stationary(spec: &PotentialSpec) -> Vec<StationaryPoint> {
    let (a, b) = (spec.p, spec.q);
    let tol = 1e-9 * (1.0 + a.abs());
    depressed_cubic_roots(a / 2.0, b / 4.0)
        .into_iter()
        .map(|(x, double)| {
            let h = if double { 0.0 } else { 12.0 * x * x + 2.0 * a };
            let (kind, degenerate) = classify(&[h], tol);
            StationaryPoint {
                location: Point::X(x),
                energy: spec.cusp_value(x),
                kind,
                hessian_eigenvalues: vec![h],
                degenerate,
            }
        })
        .collect()
}

fn collective_stationary(spec: &PotentialSpec) -> Vec<StationaryPoint> {
    let (a, b) = (spec.p, spec.q);
    let tol = 1e-9 * (1.0 + a.abs() + b.abs());
    let mut out = Vec::new();
    let (kind, degenerate) = classify(&[2.0 * a, 2.0 * a], tol);
    out.push(StationaryPoint {
        location: Point::Polar { r: 0.0, phi: 0.0 },
        energy: 0.0,
        kind,
        hessian_eigenvalues: vec![2.0 * a, 2.0 * a],
        degenerate,
    });
    // With B = 0 every ray is equivalent; report the φ = 0 representative only.
    let rays: &[(f64, f64)] = if b == 0.0 { &[(0.0, 1.0)] } else { &[(0.0, 1.0), (FRAC_PI_3, -1.0)] };
    for &(phi, cos3) in rays {
        let c = b * cos3;
        // r (4 r² + 3 c r + 2 A) = 0
        let disc = 9.0 * c * c - 32.0 * a;
        let scale = 9.0 * c * c + 32.0 * a.abs();
        let mut radii: Vec<(f64, bool)> = Vec::new();
        if scale > 0.0 && disc.abs() <= 1e-13 * scale {
            radii.push((-3.0 * c / 8.0, true));
        } else if disc > 0.0 {
            let s = disc.sqrt();
            // stable quadratic roots
            let qq = -0.5 * (3.0 * c + c.signum() * s) + if c == 0.0 { -0.5 * s } else { 0.0 };
            let r1 = if qq != 0.0 { qq / 4.0 } else { 0.0 };
            let r2 = if qq != 0.0 { 2.0 * a / qq } else { 0.0 };
            radii.push((r1, false));
            radii.push((r2, false));
        }
        for (r, double) in radii {
            if r <= 0.0 || !r.is_finite() {
                continue;
            }
            let radial = if double { 0.0 } else { 12.0 * r * r + 6.0 * c * r + 2.0 * a };
            let tangential = -9.0 * c * r;
            let hess = vec![radial, tangential];
            let (kind, degenerate) = classify(&hess, tol);
            out.push(StationaryPoint {
                location: Point::Polar { r, phi },
                energy: spec.radial(r, c),
                kind,
                hessian_eigenvalues: hess,
                degenerate,
            });
        }
    }
    out
}

/// Canonical one-parameter paths through the parameter planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// Cusp with `(a, b) = (−1, λ)`: first-order transition at `λ = 0`.
    CuspFirstOrder,
    /// Cusp with `(a, b) = (λ, 0)`: second-order transition at `λ = 0`.
    CuspSecondOrder,
    /// Collective with `(A, B) = (λ, 1)`.
    Collective,
}

impl PathKind {
    pub fn model(self) -> Model {
        match self {
            PathKind::CuspFirstOrder | PathKind::CuspSecondOrder => Model::Cusp,
            PathKind::Collective => Model::Collective,
        }
    }

    pub fn spec(self, lambda: f64) -> PotentialSpec {
        match self {
            PathKind::CuspFirstOrder => PotentialSpec::cusp(-1.0, lambda),
            PathKind::CuspSecondOrder => PotentialSpec::cusp(lambda, 0.0),
            PathKind::Collective => PotentialSpec::collective(lambda, 1.0),
        }
    }

    /// Recovers λ if `spec` lies on this path.
    pub fn lambda_of(self, spec: &PotentialSpec) -> Option<f64> {
        if spec.model != self.model() {
            return None;
        }
        match self {
            PathKind::CuspFirstOrder => (spec.p == -1.0).then_some(spec.q),
            PathKind::CuspSecondOrder => (spec.q == 0.0).then_some(spec.p),
            PathKind::Collective => (spec.q == 1.0).then_some(spec.p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PathKind::CuspFirstOrder => "V1",
            PathKind::CuspSecondOrder => "V2",
            PathKind::Collective => "collective",
        }
    }
}

/// Parameter-plane curves bounding the phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// `8a³ + 27b² = 0`: the cusp bifurcation set (spinodals).
    CuspBifurcation,
    /// `b = 0, a < 0`: equal-depth wells (first-order line).
    CuspMaxwell,
    /// `B² = 4A`: degenerate minima.
    CollectiveCritical,
    /// `A = 0`: the spherical minimum loses stability.
    CollectiveInnerSpinodal,
    /// `9B² = 32A`: the deformed minimum disappears.
    CollectiveOuterSpinodal,
}

impl CurveKind {
    /// Signed residual; zero on the curve.
    pub fn residual(self, p: f64, q: f64) -> f64 {
        match self {
            CurveKind::CuspBifurcation => 8.0 * p * p * p + 27.0 * q * q,
            CurveKind::CuspMaxwell => q,
            CurveKind::CollectiveCritical => q * q - 4.0 * p,
            CurveKind::CollectiveInnerSpinodal => p,
            CurveKind::CollectiveOuterSpinodal => 9.0 * q * q - 32.0 * p,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            CurveKind::CuspBifurcation => "8a^3 + 27b^2 = 0",
            CurveKind::CuspMaxwell => "b = 0, a < 0",
            CurveKind::CollectiveCritical => "B^2 = 4A",
            CurveKind::CollectiveInnerSpinodal => "A = 0",
            CurveKind::CollectiveOuterSpinodal => "9B^2 = 32A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Locus {
    Point { path: PathKind, lambda: f64 },
    Curve(CurveKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLoci {
    pub model: Model,
    pub critical: Vec<Locus>,
    pub spinodal: Vec<Locus>,
}

impl CriticalLoci {
    pub fn critical_on(&self, path: PathKind) -> Vec<f64> {
        points_on(&self.critical, path)
    }

    pub fn spinodal_on(&self, path: PathKind) -> Vec<f64> {
        points_on(&self.spinodal, path)
    }
}

fn points_on(loci: &[Locus], path: PathKind) -> Vec<f64> {
    loci.iter()
        .filter_map(|l| match l {
            Locus::Point { path: p, lambda } if *p == path => Some(*lambda),
            _ => None,
        })
        .collect()
}

/// Closed-form critical and spinodal loci.
pub fn critical_loci(model: Model) -> CriticalLoci {
    match model {
        Model::Cusp => {
            let s = 4.0 / (3.0 * 6f64.sqrt());
            CriticalLoci {
                model,
                critical: vec![
                    Locus::Curve(CurveKind::CuspMaxwell),
                    Locus::Point { path: PathKind::CuspFirstOrder, lambda: 0.0 },
                    Locus::Point { path: PathKind::CuspSecondOrder, lambda: 0.0 },
                ],
                spinodal: vec![
                    Locus::Curve(CurveKind::CuspBifurcation),
                    Locus::Point { path: PathKind::CuspFirstOrder, lambda: -s },
                    Locus::Point { path: PathKind::CuspFirstOrder, lambda: s },
                ],
            }
        }
        Model::Collective => CriticalLoci {
            model,
            critical: vec![
                Locus::Curve(CurveKind::CollectiveCritical),
                Locus::Point { path: PathKind::Collective, lambda: 0.25 },
            ],
            spinodal: vec![
                Locus::Curve(CurveKind::CollectiveInnerSpinodal),
                Locus::Curve(CurveKind::CollectiveOuterSpinodal),
                Locus::Point { path: PathKind::Collective, lambda: 0.0 },
                Locus::Point { path: PathKind::Collective, lambda: 9.0 / 32.0 },
            ],
        },
    }
}

/// `E⁽¹⁾ ≤ E⁽²⁾ < E⁽³⁾`: global minimum, secondary minimum and the barrier
/// separating them. Single-well potentials carry only the global minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEnergies {
    pub global_min: f64,
    pub secondary_min: Option<f64>,
    pub barrier: Option<f64>,
}

impl CriticalEnergies {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.global_min];
        v.extend(self.secondary_min);
        v.extend(self.barrier);
        v
    }

    pub fn is_double_well(&self) -> bool {
        self.secondary_min.is_some()
    }
}

pub fn critical_energies(spec: &PotentialSpec) -> CriticalEnergies {
    let pts = stationary_points(spec);
    let minima: Vec<&StationaryPoint> = pts.iter().filter(|p| p.kind == StationaryKind::Minimum).collect();
    let global_min = minima.first().map(|p| p.energy).unwrap_or_else(|| pts[0].energy);
    if minima.len() < 2 {
        return CriticalEnergies { global_min, secondary_min: None, barrier: None };
    }
    let e2 = minima[1].energy;
    let barrier = pts
        .iter()
        .filter(|p| p.kind != StationaryKind::Minimum && p.energy >= e2)
        .map(|p| p.energy)
        .next();
    CriticalEnergies { global_min, secondary_min: Some(e2), barrier }
}

/// The stationary point forming the barrier between two wells, if any.
pub fn barrier_point(spec: &PotentialSpec) -> Option<StationaryPoint> {
    let ce = critical_energies(spec);
    let e3 = ce.barrier?;
    stationary_points(spec).into_iter().find(|p| p.kind != StationaryKind::Minimum && p.energy == e3)
}
