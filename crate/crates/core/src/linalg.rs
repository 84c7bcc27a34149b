//! Symmetric eigensolvers.
//!
//! Two routes are provided. [`eigensolve`] handles small dense matrices through
//! nalgebra's Householder + implicit QR decomposition. The Hamiltonians built
//! in this crate are banded, so the production route works on
//! [`SymBandMatrix`]: Givens bulge-chasing reduction to tridiagonal form,
//! Sturm-count bisection for the lowest eigenvalues, and inverse iteration on
//! the original band matrix for the eigenvectors that are actually needed.
//! Level counting below a shift uses the inertia of a banded LDLᵀ factorization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenpairs sorted by ascending eigenvalue. `vectors[i]` belongs to `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Lowest `num_levels` eigenpairs of a dense symmetric matrix.
pub fn eigensolve(matrix: &DMatrix<f64>, num_levels: usize) -> Result<EigenPairs> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if num_levels > n {
        return Err(Error::InvalidArgument(format!(
            "requested {num_levels} levels from a {n}x{n} matrix"
        )));
    }
    let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-13 * scale {
                return Err(Error::InvalidArgument(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order[..num_levels].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order[..num_levels]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok(EigenPairs { values, vectors })
}

/// Real symmetric band matrix with half-bandwidth `bw`, lower band stored
/// column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        SymBandMatrix { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        (d <= self.bw && r < self.n).then(|| c * (self.bw + 1) + d)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets both `(i, j)` and `(j, i)`. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] += v;
    }

    /// `self += alpha * other` for matrices of equal size and band.
    pub fn axpy(&mut self, alpha: f64, other: &SymBandMatrix) {
        assert_eq!(self.n, other.n);
        assert!(other.bw <= self.bw);
        for j in 0..self.n {
            for d in 0..=other.bw.min(self.n - 1 - j) {
                self.data[j * (self.bw + 1) + d] += alpha * other.data[j * (other.bw + 1) + d];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let col = &self.data[j * (self.bw + 1)..(j + 1) * (self.bw + 1)];
            y[j] += col[0] * x[j];
            for d in 1..=self.bw.min(self.n - 1 - j) {
                y[j + d] += col[d] * x[j];
                y[j] += col[d] * x[j + d];
            }
        }
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Infinity norm (equal to the 1-norm for symmetric matrices).
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0f64; self.n];
        for j in 0..self.n {
            for d in 0..=self.bw.min(self.n - 1 - j) {
                let v = self.data[j * (self.bw + 1) + d].abs();
                rows[j + d] += v;
                if d > 0 {
                    rows[j] += v;
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for d in 0..=self.bw.min(self.n - 1 - j) {
                let v = self.data[j * (self.bw + 1) + d];
                s += if d == 0 { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// Principal submatrix on the given (ascending) indices, re-banded to `bw`.
    pub fn principal(&self, idx: &[usize], bw: usize) -> SymBandMatrix {
        let mut out = SymBandMatrix::zeros(idx.len(), bw);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().take(a + 1).skip(a.saturating_sub(out.bw)) {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.set(a, b, v);
                }
            }
        }
        out
    }

    /// Lowest `num_levels` eigenvalues.
    pub fn lowest_eigenvalues(&self, num_levels: usize) -> Vec<f64> {
        let (d, e) = self.tridiagonalize();
        tridiagonal_lowest(&d, &e, num_levels.min(self.n))
    }

    /// Lowest `num_levels` eigenpairs; eigenvectors by inverse iteration.
    pub fn lowest_eigenpairs(&self, num_levels: usize) -> Result<EigenPairs> {
        let values = self.lowest_eigenvalues(num_levels);
        let vectors = self.inverse_iteration(&values)?;
        Ok(EigenPairs { values, vectors })
    }

    /// Number of eigenvalues strictly below `shift` (Sylvester inertia of the
    /// banded LDLᵀ factorization of `A - shift`).
    pub fn count_below(&self, shift: f64) -> usize {
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);
        let mut sigma = shift;
        for attempt in 0..8 {
            if let Some(c) = self.ldl_inertia(sigma, norm) {
                return c;
            }
            // A pivot vanished: the shift sits on (or next to) an eigenvalue.
            sigma = shift + (attempt + 1) as f64 * 64.0 * f64::EPSILON * norm;
        }
        // Fall back to the stable tridiagonal route.
        let (d, e) = self.tridiagonalize();
        sturm_count(&d, &e, shift)
    }

    fn ldl_inertia(&self, shift: f64, norm: f64) -> Option<usize> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        // l[j*w + d] = L[j+d][j] scaled by d_j (stores L_ij * d_j).
        let mut l = self.data.clone();
        for j in 0..n {
            l[j * w] -= shift;
        }
        let tiny = f64::EPSILON * norm * 1e-3;
        let mut negatives = 0usize;
        let mut dinv = vec![0.0; n];
        for j in 0..n {
            // Column j of the Schur complement is already updated in l.
            let dj = l[j * w];
            if !dj.is_finite() || dj.abs() < tiny {
                return None;
            }
            if dj < 0.0 {
                negatives += 1;
            }
            dinv[j] = 1.0 / dj;
            let hi = bw.min(n - 1 - j);
            // Rank-1 update of the trailing band: A[i][k] -= (w_i * w_k) / d_j
            let (head, tail) = l.split_at_mut((j + 1) * w);
            let col = &head[j * w..j * w + hi + 1];
            for dk in 1..=hi {
                let wk = col[dk];
                if wk == 0.0 {
                    continue;
                }
                let f = wk * dinv[j];
                let base_k = (dk - 1) * w;
                let dst = &mut tail[base_k..base_k + hi + 1 - dk];
                for (a, b) in dst.iter_mut().zip(&col[dk..=hi]) {
                    *a -= f * b;
                }
            }
        }
        Some(negatives)
    }

    /// Orthogonal reduction to tridiagonal form by Givens bulge chasing.
    /// Returns the diagonal and the sub-diagonal.
    pub fn tridiagonalize(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let b = self.bw;
        if b <= 1 || n <= 2 {
            let d = (0..n).map(|i| self.get(i, i)).collect();
            let e = (1..n).map(|i| self.get(i, i - 1)).collect();
            return (d, e);
        }
        let mut work = BandWork::from(self);
        for j in 0..n - 2 {
            for d in (2..=b).rev() {
                let i = j + d;
                if i >= n {
                    continue;
                }
                if work.get(i, j) == 0.0 {
                    continue;
                }
                work.rotate_to_zero(i - 1, j);
                let mut col = i - 1;
                let mut row = i + b;
                while row < n {
                    if work.get(row, col) == 0.0 {
                        break;
                    }
                    work.rotate_to_zero(row - 1, col);
                    col = row - 1;
                    row += b;
                }
            }
        }
        let d = (0..n).map(|i| work.get(i, i)).collect();
        let e = (1..n).map(|i| work.get(i, i - 1)).collect();
        (d, e)
    }

    /// Solves `(A − σ) y = r` for each right-hand side with a pivoted band LU.
    /// Near-zero pivots are replaced by `ε‖A‖`, so σ may sit on an eigenvalue.
    pub fn shifted_solve(&self, sigma: f64, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);
        let lu = BandLu::factor(self, sigma, norm);
        rhs.iter().map(|r| lu.solve(r)).collect()
    }

    /// Eigenvectors for the given eigenvalues (ascending) by shifted inverse
    /// iteration with a banded LU factorization. Vectors belonging to
    /// clustered eigenvalues are re-orthogonalized against each other.
    pub fn inverse_iteration(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.n;
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);
        let cluster_tol = 1e-3 * norm;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0usize;
        for (idx, &lambda) in values.iter().enumerate() {
            if idx > 0 && (lambda - values[idx - 1]).abs() > cluster_tol {
                cluster_start = idx;
            }
            // Nudge repeated shifts apart so the factorizations differ.
            let mut sigma = lambda;
            if idx > cluster_start {
                let prev = values[idx - 1];
                if (sigma - prev).abs() < 10.0 * f64::EPSILON * norm {
                    sigma = prev + 10.0 * f64::EPSILON * norm;
                }
            }
            let lu = BandLu::factor(self, sigma, norm);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * (((i * 7919 + idx * 104729) % 1009) as f64 / 1009.0 - 0.5))
                .collect();
            normalize(&mut x);
            let mut converged = false;
            for _ in 0..6 {
                let mut y = lu.solve(&x);
                for v in &vectors[cluster_start..idx] {
                    let p = dot(&y, v);
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi -= p * vi;
                    }
                }
                let growth = norm2(&y);
                if !growth.is_finite() || growth == 0.0 {
                    return Err(Error::Numerical("inverse iteration breakdown".into()));
                }
                for yi in y.iter_mut() {
                    *yi /= growth;
                }
                x = y;
                // ‖y‖ ≥ 1/(tolerance) means the residual of x is tiny.
                if growth * 1e-13 * norm > 1.0 {
                    converged = true;
                    // one extra sweep for full accuracy
                    let mut y = lu.solve(&x);
                    for v in &vectors[cluster_start..idx] {
                        let p = dot(&y, v);
                        for (yi, vi) in y.iter_mut().zip(v) {
                            *yi -= p * vi;
                        }
                    }
                    normalize(&mut y);
                    x = y;
                    break;
                }
            }
            if !converged {
                let r = residual_norm(self, &x, lambda);
                if r > 1e-9 * norm {
                    return Err(Error::Numerical(format!(
                        "inverse iteration did not converge for eigenvalue {lambda} (residual {r:e})"
                    )));
                }
            }
            // Final re-orthogonalization pass (twice is enough).
            for _ in 0..2 {
                for v in &vectors[cluster_start..idx] {
                    let p = dot(&x, v);
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi -= p * vi;
                    }
                }
                normalize(&mut x);
            }
            // Deterministic sign: largest component positive.
            let (imax, _) = x
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, v)| if v.abs() > bv + 1e-12 { (i, v.abs()) } else { (bi, bv) });
            if x[imax] < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            vectors.push(x);
        }
        Ok(vectors)
    }
}

/// ‖A x − λ x‖₂.
pub fn residual_norm(a: &SymBandMatrix, x: &[f64], lambda: f64) -> f64 {
    let ax = a.matvec(x);
    ax.iter().zip(x).map(|(p, q)| (p - lambda * q).powi(2)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: &mut [f64]) {
    let s = norm2(a);
    if s > 0.0 {
        a.iter_mut().for_each(|v| *v /= s);
    }
}

/// Working copy for the band reduction with room for one bulge diagonal.
struct BandWork {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl BandWork {
    fn from(a: &SymBandMatrix) -> Self {
        let w = a.bw + 1;
        let mut data = vec![0.0; a.n * (w + 1)];
        for j in 0..a.n {
            for d in 0..=a.bw.min(a.n - 1 - j) {
                data[j * (w + 1) + d] = a.data[j * (a.bw + 1) + d];
            }
        }
        BandWork { n: a.n, w, data }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.w {
            0.0
        } else {
            self.data[c * (self.w + 1) + d]
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(r - c <= self.w);
        c * (self.w + 1) + (r - c)
    }

    /// Rotate rows/columns (p, p+1) so that entry (p+1, col) vanishes.
    fn rotate_to_zero(&mut self, p: usize, col: usize) {
        let q = p + 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        let r = x.hypot(y);
        if r == 0.0 {
            return;
        }
        let c = x / r;
        let s = y / r;
        let w = self.w;
        let lo = p.saturating_sub(w);
        let hi = (q + w).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let dp = p.abs_diff(k);
            let dq = q.abs_diff(k);
            let ap = if dp <= w { self.data[self.idx(p, k)] } else { 0.0 };
            let aq = if dq <= w { self.data[self.idx(q, k)] } else { 0.0 };
            if ap == 0.0 && aq == 0.0 {
                continue;
            }
            let np = c * ap + s * aq;
            let nq = -s * ap + c * aq;
            if dp <= w {
                let i = self.idx(p, k);
                self.data[i] = np;
            }
            if dq <= w {
                let i = self.idx(q, k);
                self.data[i] = nq;
            }
        }
        let app = self.data[self.idx(p, p)];
        let aqq = self.data[self.idx(q, q)];
        let apq = self.data[self.idx(q, p)];
        let ipp = self.idx(p, p);
        let iqq = self.idx(q, q);
        let ipq = self.idx(q, p);
        self.data[ipp] = c * c * app + 2.0 * c * s * apq + s * s * aqq;
        self.data[iqq] = s * s * app - 2.0 * c * s * apq + c * c * aqq;
        self.data[ipq] = c * s * (aqq - app) + (c * c - s * s) * apq;
        let icol = self.idx(q, col);
        self.data[icol] = 0.0;
    }
}

/// Banded LU with partial pivoting of `A − σ`.
struct BandLu {
    n: usize,
    b: usize,
    /// Row i holds columns i .. i + 2b of U.
    u: Vec<f64>,
    /// Multipliers for rows k+1 .. k+b at step k.
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(a: &SymBandMatrix, sigma: f64, norm: f64) -> Self {
        let n = a.n;
        let b = a.bw;
        // rows stored over columns [i-b, i+2b]: width 3b+1, offset c = j - i + b
        let width = 3 * b + 1;
        let mut m = vec![0.0; n * width];
        for i in 0..n {
            for j in i.saturating_sub(b)..=(i + b).min(n - 1) {
                let mut v = a.get(i, j);
                if i == j {
                    v -= sigma;
                }
                m[i * width + (j + b - i)] = v;
            }
        }
        let at = |m: &Vec<f64>, i: usize, j: usize| m[i * width + (j + b - i)];
        let mut l = vec![0.0; n * b.max(1)];
        let mut piv = vec![0usize; n];
        let tiny = f64::EPSILON * norm;
        for k in 0..n {
            let last = (k + b).min(n - 1);
            let mut p = k;
            let mut best = at(&m, k, k).abs();
            for i in k + 1..=last {
                let v = at(&m, i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            let jhi = (k + 2 * b).min(n - 1);
            if p != k {
                for j in k..=jhi {
                    let ik = k * width + (j + b - k);
                    let ip = p * width + (j + b - p);
                    m.swap(ik, ip);
                }
            }
            let mut pivot = at(&m, k, k);
            if pivot.abs() < tiny {
                pivot = if pivot < 0.0 { -tiny } else { tiny };
                m[k * width + b] = pivot;
            }
            for r in 1..=(last - k) {
                let i = k + r;
                let f = at(&m, i, k) / pivot;
                l[k * b + (r - 1)] = f;
                m[i * width + (k + b - i)] = 0.0;
                if f != 0.0 {
                    for j in k + 1..=jhi {
                        let v = at(&m, k, j);
                        m[i * width + (j + b - i)] -= f * v;
                    }
                }
            }
        }
        // compress U rows to columns i .. i+2b
        let mut u = vec![0.0; n * (2 * b + 1)];
        for i in 0..n {
            for j in i..=(i + 2 * b).min(n - 1) {
                u[i * (2 * b + 1) + (j - i)] = m[i * width + (j + b - i)];
            }
        }
        BandLu { n, b, u, l, piv }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let b = self.b;
        let mut y = rhs.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            for r in 1..=b.min(n - 1 - k) {
                y[k + r] -= self.l[k * b + (r - 1)] * yk;
            }
        }
        let w = 2 * b + 1;
        for i in (0..n).rev() {
            let row = &self.u[i * w..(i + 1) * w];
            let mut s = y[i];
            for j in i + 1..=(i + 2 * b).min(n - 1) {
                s -= row[j - i] * y[j];
            }
            y[i] = s / row[0];
        }
        y
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let scale = d.iter().chain(e).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(scale * scale * f64::EPSILON * f64::EPSILON);
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, by the
/// implicit QL algorithm with Wilkinson shifts (no eigenvectors).
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).take(n).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                // fall back to bisection for this matrix
                let mut v = tridiagonal_lowest(&d, &e[..n - 1], n);
                v.sort_by(f64::total_cmp);
                return v;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Lowest `m` eigenvalues of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_lowest(d: &[f64], e: &[f64], m: usize) -> Vec<f64> {
    let n = d.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs());
    let mut out = Vec::with_capacity(m);
    // Maintain tight brackets: upper[k] is a point with count > k.
    let mut lower = vec![lo; m];
    let mut upper = vec![hi; m];
    for k in 0..m {
        let mut a = lower[k].max(out.last().copied().unwrap_or(lo));
        let mut b = upper[k];
        while b - a > tol.max(f64::EPSILON * (a.abs() + b.abs())) {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let c = sturm_count(d, e, mid);
            if c > k {
                b = mid;
                // this point also bounds all eigenvalues with index < c
                for u in upper.iter_mut().take(c.min(m)).skip(k + 1) {
                    if mid < *u {
                        *u = mid;
                    }
                }
            } else {
                a = mid;
                for l in lower.iter_mut().skip(k + 1).take(c.saturating_sub(k)) {
                    if mid > *l {
                        *l = mid;
                    }
                }
                for l in lower.iter_mut().take(m).skip(c.max(k + 1)) {
                    if mid > *l {
                        *l = mid;
                    }
                }
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, bw: usize, seed: u64) -> SymBandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymBandMatrix::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                a.set(i, j, rng.random_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn ql_matches_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 7, 150] {
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let e: Vec<f64> = (1..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = tridiagonal_eigenvalues(&d, &e);
            let b = tridiagonal_lowest(&d, &e, n);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    fn dense_sorted(a: &SymBandMatrix) -> Vec<f64> {
        let mut v: Vec<f64> = a.to_dense().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn two_by_two_flip() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eigensolve(&m, 2).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0, 0.5]));
        let e = eigensolve(&m, 4).unwrap();
        assert_eq!(e.values, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(eigensolve(&m, 1), Err(Error::InvalidArgument(_))));
        let m = DMatrix::<f64>::identity(3, 3);
        assert!(eigensolve(&m, 4).is_err());
    }

    #[test]
    fn dense_reconstruction_50() {
        let a = random_band(50, 49, 7).to_dense();
        let e = eigensolve(&a, 50).unwrap();
        let mut r = DMatrix::<f64>::zeros(50, 50);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let v = nalgebra::DVector::from_column_slice(v);
            r += &v * v.transpose() * *lam;
        }
        assert!((r - &a).abs().max() < 1e-10 * a.abs().max());
    }

    #[test]
    fn band_reduction_matches_dense() {
        for (n, bw, seed) in [(40, 3, 1), (61, 7, 2), (30, 29, 3), (25, 1, 4), (80, 12, 5)] {
            let a = random_band(n, bw, seed);
            let want = dense_sorted(&a);
            let got = a.lowest_eigenvalues(n);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12 * a.norm_inf(), "n={n} bw={bw}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn inertia_matches_dense() {
        let a = random_band(120, 6, 11);
        let ev = dense_sorted(&a);
        for k in [0usize, 1, 17, 60, 119] {
            let x = if k == 0 { ev[0] - 0.1 } else { 0.5 * (ev[k - 1] + ev[k]) };
            assert_eq!(a.count_below(x), k);
        }
        assert_eq!(a.count_below(ev[119] + 1.0), 120);
    }

    #[test]
    fn inverse_iteration_residuals() {
        let a = random_band(150, 5, 21);
        let pairs = a.lowest_eigenpairs(40).unwrap();
        let norm = a.norm_inf();
        for (lam, v) in pairs.values.iter().zip(&pairs.vectors) {
            assert!(residual_norm(&a, v, *lam) < 1e-10 * norm);
        }
        for i in 0..40 {
            for j in 0..=i {
                let p = dot(&pairs.vectors[i], &pairs.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p - want).abs() < 1e-10, "overlap ({i},{j}) = {p}");
            }
        }
    }

    #[test]
    fn inverse_iteration_degenerate_block() {
        // Two decoupled identical blocks: every eigenvalue is exactly double.
        let block = random_band(20, 2, 9);
        let mut a = SymBandMatrix::zeros(40, 2);
        for i in 0..20usize {
            for j in i.saturating_sub(2)..=i {
                a.set(i, j, block.get(i, j));
                a.set(i + 20, j + 20, block.get(i, j));
            }
        }
        let pairs = a.lowest_eigenpairs(10).unwrap();
        for i in 0..10 {
            assert!(residual_norm(&a, &pairs.vectors[i], pairs.values[i]) < 1e-10 * a.norm_inf());
            for j in 0..i {
                assert!(dot(&pairs.vectors[i], &pairs.vectors[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn principal_submatrix() {
        let a = random_band(10, 2, 3);
        let even: Vec<usize> = (0..10).step_by(2).collect();
        let s = a.principal(&even, 1);
        for (x, &i) in even.iter().enumerate() {
            for (y, &j) in even.iter().enumerate() {
                assert_eq!(s.get(x, y), a.get(i, j));
            }
        }
    }
}
