//! Truncated oscillator bases and operator matrices.
//!
//! 1D: Hermite functions with oscillator length `ℓ`, `x = ℓ(a + a†)/√2`.
//! 2D: products of 2D-oscillator radial functions with angular index `Λ = 3k`
//! and the Neumann cosine functions `cos 3kφ` on the sextant `[0, π/3]`.
//! States are ordered `k`-major, `index = k (n_max + 1) + n`.

use std::f64::consts::{FRAC_PI_3, PI, SQRT_2};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SymBandMatrix;
use crate::potentials::Point;
use crate::quad::{laguerre_functions, GaussLaguerre};

/// Extra rows kept when forming operator powers, so that truncation never
/// contaminates the returned block.
pub const POWER_MARGIN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis1D {
    pub size: usize,
    pub length_scale: f64,
}

impl Basis1D {
    pub fn new(size: usize, length_scale: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidArgument(format!("basis size {size} < 2")));
        }
        check_scale(length_scale)?;
        Ok(Basis1D { size, length_scale })
    }
}

/// 2D basis: radial quanta `0..=n_max`, angular functions `cos 3kφ`,
/// `k = 0..=k_max`, in the sector even under both mirror lines of the sextant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis2D {
    pub n_max: usize,
    pub k_max: usize,
    pub length_scale: f64,
}

impl Basis2D {
    pub fn new(n_max: usize, k_max: usize, length_scale: f64) -> Result<Self> {
        check_scale(length_scale)?;
        if (n_max + 1) * (k_max + 1) < 2 {
            return Err(Error::InvalidArgument("2D basis needs at least two states".into()));
        }
        Ok(Basis2D { n_max, k_max, length_scale })
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.k_max + 1)
    }

    #[inline]
    pub fn index(&self, n: usize, k: usize) -> usize {
        k * (self.n_max + 1) + n
    }

    /// `(n, k)` of a basis index.
    pub fn quanta(&self, idx: usize) -> (usize, usize) {
        (idx % (self.n_max + 1), idx / (self.n_max + 1))
    }

    /// Half-bandwidth of every operator in this ordering.
    pub fn bandwidth(&self) -> usize {
        if self.k_max == 0 {
            2.min(self.n_max)
        } else {
            self.n_max + 1
        }
    }
}

fn check_scale(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("length scale must be positive and finite, got {l}")));
    }
    Ok(())
}

/// Either basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    One(Basis1D),
    Two(Basis2D),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::One(b) => b.size,
            Basis::Two(b) => b.dim(),
        }
    }

    pub fn length_scale(&self) -> f64 {
        match self {
            Basis::One(b) => b.length_scale,
            Basis::Two(b) => b.length_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpTag {
    X,
    X2,
    X3,
    X4,
    P2,
    R2,
    R3Cos3Phi,
    R4,
    /// `−(K²/2)∇²` for the given `K`.
    Kinetic2D { k: f64 },
}

/// Symmetric operator matrix in band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub tag: OpTag,
    pub matrix: SymBandMatrix,
}

impl OperatorMatrix {
    pub fn dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }
}

/// Exact position matrix of dimension `n`.
fn x_matrix(n: usize, l: f64) -> SymBandMatrix {
    let mut m = SymBandMatrix::zeros(n, 1);
    for i in 0..n.saturating_sub(1) {
        m.set(i + 1, i, l * ((i + 1) as f64 / 2.0).sqrt());
    }
    m
}

/// Product `A·B` of two commuting symmetric band matrices.
fn band_product(a: &SymBandMatrix, b: &SymBandMatrix) -> SymBandMatrix {
    let n = a.dim();
    let bw = (a.bandwidth() + b.bandwidth()).min(n.saturating_sub(1));
    let mut c = SymBandMatrix::zeros(n, bw);
    for i in 0..n {
        for j in i.saturating_sub(bw)..=i {
            let lo = i.saturating_sub(a.bandwidth()).max(j.saturating_sub(b.bandwidth()));
            let hi = (i + a.bandwidth()).min(j + b.bandwidth()).min(n - 1);
            let mut s = 0.0;
            for k in lo..=hi {
                s += a.get(i, k) * b.get(k, j);
            }
            if s != 0.0 {
                c.set(i, j, s);
            }
        }
    }
    c
}

fn truncate(m: &SymBandMatrix, n: usize) -> SymBandMatrix {
    let idx: Vec<usize> = (0..n).collect();
    m.principal(&idx, m.bandwidth())
}

/// Operator matrix in a 1D basis.
pub fn matrix_1d(basis: &Basis1D, tag: OpTag) -> Result<OperatorMatrix> {
    let n = basis.size;
    let l = basis.length_scale;
    let matrix = match tag {
        OpTag::X => x_matrix(n, l),
        OpTag::X2 | OpTag::X3 | OpTag::X4 => {
            let power = match tag {
                OpTag::X2 => 2,
                OpTag::X3 => 3,
                _ => 4,
            };
            let big = n + POWER_MARGIN;
            let x = x_matrix(big, l);
            let mut acc = x.clone();
            for _ in 1..power {
                acc = band_product(&acc, &x);
            }
            truncate(&acc, n)
        }
        OpTag::P2 => {
            let mut m = SymBandMatrix::zeros(n, 2);
            let l2 = l * l;
            for i in 0..n {
                m.set(i, i, (i as f64 + 0.5) / l2);
                if i + 2 < n {
                    m.set(i + 2, i, -(((i + 1) * (i + 2)) as f64).sqrt() / (2.0 * l2));
                }
            }
            m
        }
        other => return Err(Error::InvalidArgument(format!("{other:?} is not a 1D operator"))),
    };
    Ok(OperatorMatrix { tag, matrix })
}

/// Radial matrix `⟨n', Λ'| r^s |n, Λ⟩` for `n, n' ≤ n_max`, by Gauss–Laguerre
/// quadrature exact for the polynomial part. Rows index `n'`, columns `n`.
pub fn radial_matrix(n_max: usize, lam_row: usize, lam_col: usize, s: u32, l: f64) -> DMatrix<f64> {
    let w = n_max as isize;
    radial_band(n_max, lam_row, lam_col, s, l, -w, w)
}

/// Like [`radial_matrix`] but only fills entries with `n − n' ∈ [lo, hi]`.
pub fn radial_band(n_max: usize, lam_row: usize, lam_col: usize, s: u32, l: f64, lo: isize, hi: isize) -> DMatrix<f64> {
    let m = n_max + 4;
    // One rule per smaller Λ serves every operator of a given angular block;
    // the leftover power t^{(Λ+Λ'+s)/2 − α} joins the polynomial part.
    let lam_min = lam_row.min(lam_col);
    let total = lam_row + lam_col + s as usize;
    assert!(total % 2 == 0, "non-polynomial radial integrand");
    let extra = total / 2 - lam_min;
    assert!(2 * m > 2 * n_max + extra, "Gauss–Laguerre order too low for the radial integrand");
    let gl = GaussLaguerre::cached(m, lam_min as f64);
    let count = n_max + 1;
    let mut out = DMatrix::zeros(count, count);
    let ls = l.powi(s as i32);
    for (&t, &lw) in gl.nodes.iter().zip(&gl.ln_weights) {
        let fr = laguerre_functions(lam_row as f64, count, t);
        let fc = if lam_col == lam_row { fr.clone() } else { laguerre_functions(lam_col as f64, count, t) };
        let w = (lw + 0.5 * s as f64 * t.ln()).exp();
        for i in 0..count {
            let wi = w * fr[i];
            if wi == 0.0 {
                continue;
            }
            let jlo = (i as isize + lo).max(0) as usize;
            let jhi = (i as isize + hi).min(n_max as isize);
            if jhi < jlo as isize {
                continue;
            }
            for j in jlo..=jhi as usize {
                out[(i, j)] += wi * fc[j];
            }
        }
    }
    out * ls
}

/// Exact angular matrix element `⟨k+1| cos 3φ |k⟩` on the Neumann cosine basis.
pub fn angular_coupling(k: usize) -> f64 {
    if k == 0 {
        1.0 / SQRT_2
    } else {
        0.5
    }
}

/// Operator matrix in a 2D basis.
pub fn matrix_2d(basis: &Basis2D, tag: OpTag) -> Result<OperatorMatrix> {
    let l = basis.length_scale;
    let nb = basis.n_max + 1;
    let mut m = SymBandMatrix::zeros(basis.dim(), basis.bandwidth());
    match tag {
        OpTag::R2 | OpTag::R4 | OpTag::Kinetic2D { .. } => {
            let s = if matches!(tag, OpTag::R4) { 4 } else { 2 };
            for k in 0..=basis.k_max {
                let lam = 3 * k;
                let band = if s == 4 { 2 } else { 1 };
                let r = radial_band(basis.n_max, lam, lam, s, l, -(band as isize), 0);
                for i in 0..nb {
                    for j in i.saturating_sub(band)..=i {
                        let mut v = r[(i, j)];
                        if let OpTag::Kinetic2D { k: kk } = tag {
                            let omega = kk / (l * l);
                            v *= -0.5 * omega * omega;
                            if i == j {
                                v += kk * omega * (2 * i + lam + 1) as f64;
                            }
                        }
                        m.set(basis.index(i, k), basis.index(j, k), v);
                    }
                }
            }
        }
        OpTag::R3Cos3Phi => {
            for k in 0..basis.k_max {
                let r = radial_band(basis.n_max, 3 * (k + 1), 3 * k, 3, l, 0, 3);
                let ang = angular_coupling(k);
                for np in 0..nb {
                    // nonzero only for n' ≤ n ≤ n' + 3
                    for n in np..(np + 4).min(nb) {
                        m.set(basis.index(np, k + 1), basis.index(n, k), ang * r[(np, n)]);
                    }
                }
            }
        }
        other => return Err(Error::InvalidArgument(format!("{other:?} is not a 2D operator"))),
    }
    Ok(OperatorMatrix { tag, matrix: m })
}

/// Length scale minimizing the trace of the assembled Hamiltonian over 25
/// logarithmically spaced candidates around the natural scale `K^{1/3}`.
pub fn trace_minimizing_scale(trace: impl Fn(f64) -> f64, k: f64) -> f64 {
    let l0 = k.cbrt();
    (0..25)
        .map(|i| l0 * 4f64.powf((i as f64 - 12.0) / 12.0))
        .map(|l| (l, trace(l)))
        .fold((l0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
        .0
}

/// Normalized Hermite functions `h_n(x)`, `n < count`, with exponent tracking.
pub fn hermite_functions(count: usize, l: f64, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e100;
    let xi = x / l;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let base = -0.5 * xi * xi - 0.25 * PI.ln() - 0.5 * l.ln();
    let mut scale = 0.0;
    let (mut hm, mut h) = (0.0f64, 1.0f64);
    out.push((base).exp());
    for n in 0..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * h - (nf / (nf + 1.0)).sqrt() * hm;
        hm = h;
        h = next;
        if h.abs() > BIG {
            h /= BIG;
            hm /= BIG;
            scale += BIG.ln();
        }
        out.push(h * (base + scale).exp());
    }
    out
}

/// `ψ(x)` and `ψ'(x)` for a 1D coefficient vector.
pub fn wavefunction_1d(coefficients: &[f64], basis: &Basis1D, x: f64) -> Result<(f64, f64)> {
    if coefficients.len() != basis.size {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for a basis of size {}",
            coefficients.len(),
            basis.size
        )));
    }
    let l = basis.length_scale;
    let h = hermite_functions(basis.size + 1, l, x);
    let mut psi = 0.0;
    let mut dpsi = 0.0;
    for (n, c) in coefficients.iter().enumerate() {
        psi += c * h[n];
        // h_n' = (√(n/2) h_{n−1} − √((n+1)/2) h_{n+1}) / ℓ
        let lower = if n > 0 { (n as f64 / 2.0).sqrt() * h[n - 1] } else { 0.0 };
        dpsi += c * (lower - ((n + 1) as f64 / 2.0).sqrt() * h[n + 1]) / l;
    }
    Ok((psi, dpsi))
}

/// `ψ(r, φ)` for a 2D coefficient vector (density w.r.t. `r dr dφ`).
pub fn wavefunction_2d(coefficients: &[f64], basis: &Basis2D, r: f64, phi: f64) -> Result<f64> {
    if coefficients.len() != basis.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for a basis of dimension {}",
            coefficients.len(),
            basis.dim()
        )));
    }
    let l = basis.length_scale;
    let t = r * r / (l * l);
    let mut psi = 0.0;
    for k in 0..=basis.k_max {
        let ang = if k == 0 { (3.0 / PI).sqrt() } else { (6.0 / PI).sqrt() * (3.0 * k as f64 * phi).cos() };
        let radial = laguerre_functions((3 * k) as f64, basis.n_max + 1, t);
        for (n, f) in radial.iter().enumerate() {
            psi += coefficients[basis.index(n, k)] * SQRT_2 / l * f * ang;
        }
    }
    Ok(psi)
}

/// `|ψ|²` at each grid point.
pub fn wavefunction_samples(coefficients: &[f64], basis: &Basis, grid: &[Point]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|p| match (basis, p) {
            (Basis::One(b), Point::X(x)) => wavefunction_1d(coefficients, b, *x).map(|v| v.0 * v.0),
            (Basis::Two(b), Point::Polar { r, phi }) => {
                if *r < 0.0 || !(-1e-15..=FRAC_PI_3 + 1e-15).contains(phi) {
                    return Err(Error::Domain(format!("({r}, {phi}) outside the sextant")));
                }
                wavefunction_2d(coefficients, b, *r, *phi).map(|v| v * v)
            }
            _ => Err(Error::ModelMismatch("grid point does not match the basis dimension".into())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gauss_legendre, integrate_fixed};

    fn b1(n: usize, l: f64) -> Basis1D {
        Basis1D::new(n, l).unwrap()
    }

    #[test]
    fn ladder_elements() {
        let l = 0.7;
        let x = matrix_1d(&b1(10, l), OpTag::X).unwrap().matrix;
        for n in 0..9 {
            assert!((x.get(n, n + 1) - l * ((n + 1) as f64 / 2.0).sqrt()).abs() < 1e-15);
        }
        let x2 = matrix_1d(&b1(10, l), OpTag::X2).unwrap().matrix;
        assert!((x2.get(0, 0) - l * l / 2.0).abs() < 1e-15);
        let x4 = matrix_1d(&b1(10, l), OpTag::X4).unwrap().matrix;
        assert!((x4.get(0, 0) - 0.75 * l.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn x4_ground_moment_by_quadrature() {
        // oracle: ∫ x⁴ h_0(x)² dx on a wide Gauss–Legendre grid
        let l = 1.3;
        let rule = gauss_legendre(120);
        let got = integrate_fixed(|x| x.powi(4) * hermite_functions(1, l, x)[0].powi(2), -12.0 * l, 12.0 * l, &rule);
        let m = matrix_1d(&b1(6, l), OpTag::X4).unwrap().matrix;
        assert!((m.get(0, 0) - got).abs() < 1e-12);
    }

    #[test]
    fn margin_property() {
        let a = matrix_1d(&b1(20, 0.9), OpTag::X4).unwrap().matrix;
        let b = matrix_1d(&b1(30, 0.9), OpTag::X4).unwrap().matrix;
        for i in 0..20 {
            for j in 0..20 {
                assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-14 * (1.0 + b.get(i, j).abs()));
            }
        }
    }

    #[test]
    fn selection_rules_1d() {
        let b = b1(12, 1.0);
        assert_eq!(matrix_1d(&b, OpTag::X).unwrap().matrix.bandwidth(), 1);
        let x4 = matrix_1d(&b, OpTag::X4).unwrap().matrix;
        assert_eq!(x4.bandwidth(), 4);
        let x3 = matrix_1d(&b, OpTag::X3).unwrap().matrix;
        for i in 0..12 {
            for j in 0..12 {
                if (i + j) % 2 == 0 {
                    assert_eq!(x3.get(i, j), 0.0);
                }
            }
        }
        assert!(matrix_1d(&b, OpTag::R2).is_err());
    }

    #[test]
    fn p2_is_minus_second_derivative() {
        // ⟨m|p²|n⟩ = ∫ h_m' h_n' dx
        let l = 0.8;
        let b = b1(8, l);
        let p2 = matrix_1d(&b, OpTag::P2).unwrap().matrix;
        let rule = gauss_legendre(160);
        for (m, n) in [(0, 0), (3, 3), (1, 3), (2, 4), (0, 1)] {
            let mut cm = vec![0.0; 8];
            let mut cn = vec![0.0; 8];
            cm[m] = 1.0;
            cn[n] = 1.0;
            let got = integrate_fixed(
                |x| wavefunction_1d(&cm, &b, x).unwrap().1 * wavefunction_1d(&cn, &b, x).unwrap().1,
                -14.0 * l,
                14.0 * l,
                &rule,
            );
            assert!((p2.get(m, n) - got).abs() < 1e-11, "({m},{n}): {} vs {got}", p2.get(m, n));
        }
    }

    #[test]
    fn positivity() {
        let b = b1(30, 0.5);
        for tag in [OpTag::X2, OpTag::X4, OpTag::P2] {
            let m = matrix_1d(&b, tag).unwrap();
            let ev = m.dense().symmetric_eigenvalues();
            let norm = m.matrix.frobenius();
            assert!(ev.iter().all(|v| *v >= -1e-10 * norm), "{tag:?}");
        }
        let b = Basis2D::new(8, 4, 0.3).unwrap();
        for tag in [OpTag::R2, OpTag::R4] {
            let m = matrix_2d(&b, tag).unwrap();
            let ev = m.dense().symmetric_eigenvalues();
            assert!(ev.iter().all(|v| *v >= -1e-10 * m.matrix.frobenius()), "{tag:?}");
        }
    }

    #[test]
    fn radial_diagonals_match_closed_forms() {
        let l = 0.6;
        for lam in [0usize, 3, 9, 30] {
            let r2 = radial_matrix(12, lam, lam, 2, l);
            let r4 = radial_matrix(12, lam, lam, 4, l);
            for n in 0..=12 {
                let m = (2 * n + lam + 1) as f64;
                let nn = n as f64;
                let lf = lam as f64;
                assert!((r2[(n, n)] - l * l * m).abs() < 1e-12 * m);
                let want4 = l.powi(4) * (m * m + nn * (nn + lf) + (nn + 1.0) * (nn + lf + 1.0));
                assert!((r4[(n, n)] - want4).abs() < 1e-11 * want4);
                if n < 12 {
                    // ⟨n+1|t|n⟩ = −√((n+1)(n+Λ+1))
                    let off = -l * l * ((nn + 1.0) * (nn + lf + 1.0)).sqrt();
                    assert!((r2[(n + 1, n)] - off).abs() < 1e-12 * off.abs());
                }
            }
        }
        // ground state of Λ = 0: ⟨r²⟩ = ℓ²
        let b = Basis2D::new(4, 2, l).unwrap();
        let r2 = matrix_2d(&b, OpTag::R2).unwrap().matrix;
        assert!((r2.get(0, 0) - l * l).abs() < 1e-15);
    }

    #[test]
    fn r4_is_square_of_r2() {
        // with a margin, (t)² truncated equals t² within the block
        let l = 0.45;
        let big = radial_matrix(20, 6, 6, 2, l);
        let sq = &big * &big;
        let r4 = radial_matrix(16, 6, 6, 4, l);
        for i in 0..=16 {
            for j in 0..=16 {
                assert!((sq[(i, j)] - r4[(i, j)]).abs() < 1e-12 * l.powi(4) * (1.0 + (r4[(i, i)] / l.powi(4)).abs()));
            }
        }
    }

    #[test]
    fn r3_selection_and_oracle() {
        let l = 0.5;
        let r3 = radial_matrix(10, 3, 0, 3, l);
        for np in 0..=10 {
            for n in 0..=10 {
                if n < np || n > np + 3 {
                    assert!(r3[(np, n)].abs() < 1e-13, "({np},{n}) = {}", r3[(np, n)]);
                }
            }
        }
        // oracle: direct radial integral with R = (√2/ℓ) φ(r²/ℓ²)
        let rule = gauss_legendre(200);
        let f = |r: f64| {
            let t = r * r / (l * l);
            let a = laguerre_functions(3.0, 3, t)[1];
            let b = laguerre_functions(0.0, 3, t)[2];
            2.0 / (l * l) * a * b * r.powi(4)
        };
        let got = integrate_fixed(f, 0.0, 12.0 * l, &rule);
        assert!((r3[(1, 2)] - got).abs() < 1e-12, "{} vs {got}", r3[(1, 2)]);
    }

    #[test]
    fn angular_selection_2d() {
        let b = Basis2D::new(6, 5, 0.4).unwrap();
        let m = matrix_2d(&b, OpTag::R3Cos3Phi).unwrap().matrix;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let (_, ki) = b.quanta(i);
                let (_, kj) = b.quanta(j);
                if ki.abs_diff(kj) != 1 {
                    assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
        let r2 = matrix_2d(&b, OpTag::R2).unwrap().matrix;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                if b.quanta(i).1 != b.quanta(j).1 {
                    assert_eq!(r2.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn angular_overlaps_by_quadrature() {
        let rule = gauss_legendre(40);
        let u = |k: usize, p: f64| if k == 0 { (3.0 / PI).sqrt() } else { (6.0 / PI).sqrt() * (3.0 * k as f64 * p).cos() };
        for k in 0..4 {
            let got = integrate_fixed(|p| u(k, p) * (3.0 * p).cos() * u(k + 1, p), 0.0, FRAC_PI_3, &rule);
            assert!((got - angular_coupling(k)).abs() < 1e-14);
            let norm = integrate_fixed(|p| u(k, p) * u(k, p), 0.0, FRAC_PI_3, &rule);
            assert!((norm - 1.0).abs() < 1e-14);
            let diag = integrate_fixed(|p| u(k, p) * (3.0 * p).cos() * u(k, p), 0.0, FRAC_PI_3, &rule);
            assert!(diag.abs() < 1e-14);
        }
    }

    #[test]
    fn kinetic_ground_element() {
        // −(K²/2)∇² on the Λ = 0 ground state R = (√2/ℓ) e^{−r²/2ℓ²}:
        // numeric radial differentiation oracle gives K²/(2ℓ²) = Kω_b/2.
        let (kk, l) = (0.01, 0.2);
        let b = Basis2D::new(5, 2, l).unwrap();
        let t = matrix_2d(&b, OpTag::Kinetic2D { k: kk }).unwrap().matrix;
        let rule = gauss_legendre(200);
        let rf = |r: f64| SQRT_2 / l * (-r * r / (2.0 * l * l)).exp();
        let h = 1e-4;
        let lap = |r: f64| {
            let d2 = (rf(r + h) - 2.0 * rf(r) + rf(r - h)) / (h * h);
            let d1 = (rf(r + h) - rf(r - h)) / (2.0 * h);
            d2 + d1 / r
        };
        let oracle = integrate_fixed(|r| -0.5 * kk * kk * rf(r) * lap(r) * r, 0.0, 10.0 * l, &rule);
        let omega = kk / (l * l);
        assert!((t.get(0, 0) - 0.5 * kk * omega).abs() < 1e-15);
        assert!((t.get(0, 0) - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn wavefunction_values() {
        let l = 0.3;
        let b = b1(5, l);
        let s = wavefunction_samples(&[1.0, 0.0, 0.0, 0.0, 0.0], &Basis::One(b), &[Point::X(0.0)]).unwrap();
        assert!((s[0] - 1.0 / (l * PI.sqrt())).abs() < 1e-13);
        let s = wavefunction_samples(&[0.0, 1.0, 0.0, 0.0, 0.0], &Basis::One(b), &[Point::X(0.0)]).unwrap();
        assert_eq!(s[0], 0.0);
        assert!(wavefunction_samples(&[1.0], &Basis::One(b), &[Point::X(0.0)]).is_err());
    }

    #[test]
    fn high_order_hermite_normalized() {
        // h_n for large n stays normalized thanks to exponent tracking
        let l = 1.0;
        let n = 900;
        let rule = gauss_legendre(400);
        let mut total = 0.0;
        let edges: Vec<f64> = (0..=60).map(|i| -60.0 + 2.0 * i as f64).collect();
        for w in edges.windows(2) {
            total += integrate_fixed(|x| hermite_functions(n + 1, l, x)[n].powi(2), w[0], w[1], &rule);
        }
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn wavefunction_2d_normalized() {
        let b = Basis2D::new(6, 3, 0.5).unwrap();
        let mut c = vec![0.0; b.dim()];
        c[b.index(2, 1)] = 0.6;
        c[b.index(0, 3)] = 0.8;
        let rr = gauss_legendre(80);
        let rp = gauss_legendre(30);
        let total = integrate_fixed(
            |r| r * integrate_fixed(|p| wavefunction_2d(&c, &b, r, p).unwrap().powi(2), 0.0, FRAC_PI_3, &rp),
            0.0,
            6.0,
            &rr,
        );
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn trace_scale_picks_minimum() {
        let l = trace_minimizing_scale(|l| (l - 0.1f64).powi(2), 1e-3);
        assert!((l - 0.1).abs() < 0.01);
    }
}
