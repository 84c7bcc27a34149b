//! Quadrature rules: Gauss–Legendre, adaptive Gauss–Kronrod and generalized
//! Gauss–Laguerre with log-scaled weights.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed-order Gauss–Legendre integral of `f` over [a, b].
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss–Kronrod integration of `f` over [a, b].
///
/// Stops when the summed error estimate falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    for _ in 0..4000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        // split the worst interval
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.3 > be { (i, p.3) } else { (bi, be) });
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // cannot subdivide further; accept
            parts.push((lo, hi, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // recompute sums to remove drift
    let total: f64 = parts.iter().map(|p| p.2).sum();
    let err: f64 = parts.iter().map(|p| p.3).sum();
    if err <= 10.0 * abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::Numerical(format!(
            "adaptive quadrature on [{a}, {b}] stalled with error estimate {err:e}"
        )))
    }
}

/// Orthonormal Laguerre-type polynomials `q_i^α(t)`, `i < count`, with respect
/// to the measure `t^α e^{-t} dt / Γ(α+1)`, returned as mantissas and a
/// per-index natural-log scale: `q_i = value[i] · exp(scale[i])`.
pub fn laguerre_q_scaled(alpha: f64, count: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    const BIG: f64 = 1e100;
    let ln_big = BIG.ln();
    let mut v = Vec::with_capacity(count);
    let mut s = Vec::with_capacity(count);
    if count == 0 {
        return (v, s);
    }
    v.push(1.0);
    s.push(0.0);
    if count == 1 {
        return (v, s);
    }
    v.push((alpha + 1.0 - t) / (alpha + 1.0).sqrt());
    s.push(0.0);
    let mut scale = 0.0;
    let (mut qm, mut q) = (v[0], v[1]);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + alpha + 1.0 - t) * q - (nf * (nf + alpha)).sqrt() * qm)
            / ((nf + 1.0) * (nf + alpha + 1.0)).sqrt();
        qm = q;
        q = next;
        if q.abs() > BIG {
            q /= BIG;
            qm /= BIG;
            scale += ln_big;
        }
        v.push(q);
        s.push(scale);
    }
    (v, s)
}

/// Orthonormal 2D-oscillator radial functions in the variable `t = r²/ℓ²`:
/// `φ_n(t) = t^{Λ/2} e^{-t/2} q_n^Λ(t) / √Γ(Λ+1)`, `n < count`, normalized so
/// that `∫₀^∞ φ_n φ_m dt = δ_nm`.
pub fn laguerre_functions(lambda: f64, count: usize, t: f64) -> Vec<f64> {
    if t == 0.0 {
        let mut out = vec![0.0; count];
        if lambda == 0.0 {
            let (v, _) = laguerre_q_scaled(0.0, count, 0.0);
            out.copy_from_slice(&v);
        }
        return out;
    }
    let g = 0.5 * lambda * t.ln() - 0.5 * t - 0.5 * ln_gamma(lambda + 1.0);
    let (v, s) = laguerre_q_scaled(lambda, count, t);
    v.iter().zip(&s).map(|(x, sc)| x * (sc + g).exp()).collect()
}

/// Generalized Gauss–Laguerre rule of order `m` for `t^α e^{-t}`.
///
/// Returns the nodes and `ln W_j`, where `W_j = w_j e^{t_j} t_j^{-α}` so that
/// `∫₀^∞ f(t) dt ≈ Σ_j W_j f(t_j)` whenever `f(t) e^{t} t^{-α}` is a polynomial
/// of degree `< 2m`. Working with `W_j` keeps all factors O(1) for the large
/// nodes where `w_j` itself underflows.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(m: usize, alpha: f64) -> Self {
        assert!(m >= 1 && alpha > -1.0);
        let d: Vec<f64> = (0..m).map(|j| 2.0 * j as f64 + alpha + 1.0).collect();
        let e: Vec<f64> = (1..m).map(|j| (j as f64 * (j as f64 + alpha)).sqrt()).collect();
        let mut nodes = tridiagonal_eigenvalues(&d, &e);
        for t in nodes.iter_mut() {
            *t = polish_root(alpha, m, *t);
        }
        let lg = ln_gamma(alpha + 1.0);
        let ln_weights = nodes
            .iter()
            .map(|&t| {
                let (v, s) = laguerre_q_scaled(alpha, m, t);
                let top = *s.last().unwrap();
                let sum: f64 = v.iter().zip(&s).map(|(x, sc)| x * x * (2.0 * (sc - top)).exp()).sum();
                let ln_sum = sum.ln() + 2.0 * top;
                lg - ln_sum + t - alpha * t.ln()
            })
            .collect();
        GaussLaguerre { alpha, nodes, ln_weights }
    }

    /// Per-thread memoized rule; 2D assembly asks for the same rules once
    /// per operator.
    pub fn cached(m: usize, alpha: f64) -> Rc<GaussLaguerre> {
        thread_local! {
            static CACHE: RefCell<HashMap<(usize, u64), Rc<GaussLaguerre>>> = RefCell::new(HashMap::new());
        }
        CACHE.with(|c| {
            let mut c = c.borrow_mut();
            if c.len() > 4096 {
                c.clear();
            }
            c.entry((m, alpha.to_bits())).or_insert_with(|| Rc::new(GaussLaguerre::new(m, alpha))).clone()
        })
    }
}

/// Newton refinement of a zero of `q_m^α`.
fn polish_root(alpha: f64, m: usize, mut t: f64) -> f64 {
    for _ in 0..3 {
        let (mut qm, mut q) = (0.0f64, 1.0f64);
        let (mut dqm, mut dq) = (0.0f64, 0.0f64);
        for n in 0..m {
            let nf = n as f64;
            let a = 2.0 * nf + alpha + 1.0 - t;
            let b = (nf * (nf + alpha)).sqrt();
            let c = ((nf + 1.0) * (nf + alpha + 1.0)).sqrt();
            let next = (a * q - b * qm) / c;
            let dnext = (a * dq - q - b * dqm) / c;
            qm = q;
            q = next;
            dqm = dq;
            dq = dnext;
            let big = q.abs().max(dq.abs());
            if big > 1e100 {
                q /= big;
                qm /= big;
                dq /= big;
                dqm /= big;
            }
        }
        if dq == 0.0 {
            break;
        }
        let step = q / dq;
        if !step.is_finite() || step.abs() > 1e-6 * t.max(1.0) {
            break;
        }
        t -= step;
    }
    t
}
