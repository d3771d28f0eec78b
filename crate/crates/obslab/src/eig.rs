//! Extremal eigenvalue solvers for Hermitian operators.
//!
//! Two paths, one contract: given a Hermitian positive semidefinite map, find
//! an extremal eigenpair whose true residual ‖Av - θv‖ (with ‖v‖ = 1) is at
//! most tol·bound, where `bound` is a caller-supplied operator norm bound.
//!
//! The iterative path is Lanczos with full reorthogonalization: every new
//! Krylov vector is orthogonalized (twice) against the whole stored basis,
//! trading memory for immunity to the usual ghost-eigenvalue drift. The
//! recurrence is
//!
//!   α_j = ⟨q_j, A q_j⟩,   w = A q_j - α_j q_j - β_{j-1} q_{j-1},
//!   β_j = ‖w‖ (after reorthogonalization),   q_{j+1} = w / β_j,
//!
//! and the Ritz value is the top eigenvalue of the tridiagonal matrix
//! T_j = tridiag(β, α, β), extracted by Sturm bisection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Options for the iterative path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the operator norm bound.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the random start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: tol::LANCZOS_TOL,
            max_iter: tol::LANCZOS_MAX_ITER,
            seed: 0x0b5e7ab,
        }
    }
}

/// An extremal eigenpair with its convergence record.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub value: f64,
    pub vector: Vec<Complex64>,
    /// True residual ‖Av - θv‖ with ‖v‖ = 1, from one extra matvec.
    pub residual: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a Hermitian PSD operator given through its matvec.
/// `bound` must dominate the operator norm; it scales the stopping test.
pub fn lanczos_max<F>(
    dim: usize,
    bound: f64,
    opts: &LanczosOptions,
    mut matvec: F,
) -> Result<EigResult>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    assert!(dim > 0 && bound > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = vec![Complex64::default(); dim];
    for v in q.iter_mut() {
        *v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    }
    normalize(&mut q);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut work = vec![Complex64::default(); dim];

    for j in 0..opts.max_iter.min(dim) {
        matvec(&basis[j], &mut work);
        let a_j = dot(&basis[j], &work).re;
        alpha.push(a_j);
        axpy(-Complex64::new(a_j, 0.0), &basis[j], &mut work);
        if j > 0 {
            axpy(-Complex64::new(beta[j - 1], 0.0), &basis[j - 1], &mut work);
        }
        // Full reorthogonalization, two passes.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &work);
                axpy(-c, b, &mut work);
            }
        }
        let b_j = norm(&work);

        let (theta, s) = tridiag_max(&alpha, &beta);
        let ritz_residual_est = b_j * s[s.len() - 1].abs();

        let exhausted = b_j <= 1e-14 * bound.max(1.0) || j + 1 == dim;
        if ritz_residual_est <= opts.tol * bound || exhausted {
            let mut v = vec![Complex64::default(); dim];
            for (coef, b) in s.iter().zip(&basis) {
                axpy(Complex64::new(*coef, 0.0), b, &mut v);
            }
            normalize(&mut v);
            matvec(&v, &mut work);
            let mut res_vec = work.clone();
            axpy(-Complex64::new(theta, 0.0), &v, &mut res_vec);
            let residual = norm(&res_vec);
            if residual <= opts.tol * bound || exhausted {
                return Ok(EigResult {
                    value: theta,
                    vector: v,
                    residual,
                    iterations: j + 1,
                });
            }
        }
        if exhausted {
            break;
        }
        let mut next = work.clone();
        scale(1.0 / b_j, &mut next);
        beta.push(b_j);
        basis.push(next);
    }

    let (theta, _) = tridiag_max(&alpha, &beta);
    Err(Error::NonConvergence {
        residual: theta,
        iterations: alpha.len(),
        tolerance: opts.tol * bound,
    })
}

/// Largest eigenvalue and eigenvector of the symmetric tridiagonal matrix
/// with diagonal `alpha` and off-diagonal `beta` (len(alpha) - 1 entries used).
pub fn tridiag_max(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let n = alpha.len();
    assert!(n >= 1);
    if n == 1 {
        return (alpha[0], vec![1.0]);
    }
    let beta = &beta[..n - 1];

    // Gershgorin interval containing the whole spectrum.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }

    // Sturm bisection for the largest eigenvalue: the smallest x for which
    // all n pivots of the shifted LDL recurrence are negative.
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut d = 1.0f64;
        for i in 0..n {
            let off = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - off / d;
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (lo - 1e-12, hi + 1e-12);
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);

    // Inverse iteration on (T - θ) for the eigenvector; two sweeps are
    // plenty with a near-exact shift and pivoted elimination.
    let mut v = vec![1.0; n];
    for _ in 0..2 {
        v = tridiag_solve_shifted(alpha, beta, theta, &v);
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    (theta, v)
}

/// Solve (T - shift·I) x = b for symmetric tridiagonal T with partial
/// pivoting; elimination may fill a second superdiagonal.
fn tridiag_solve_shifted(alpha: &[f64], beta: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let mut dd: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    // dl[i] is the entry below pivot i during elimination; du / du2 the two
    // superdiagonals of the evolving upper-triangular factor.
    let mut dl: Vec<f64> = beta.to_vec();
    let mut du: Vec<f64> = beta.to_vec();
    let mut du2: Vec<f64> = vec![0.0; n.saturating_sub(2)];
    let mut rhs = b.to_vec();

    for i in 0..n - 1 {
        if dl[i].abs() > dd[i].abs() {
            // Swap rows i and i+1. Before the swap:
            //   row i   = (dd[i], du[i], 0)        at columns i, i+1, i+2
            //   row i+1 = (dl[i], dd[i+1], du[i+1])
            std::mem::swap(&mut dd[i], &mut dl[i]);
            let t = du[i];
            du[i] = dd[i + 1];
            dd[i + 1] = t;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = 0.0;
            }
            rhs.swap(i, i + 1);
        }
        if dd[i] == 0.0 {
            dd[i] = 1e-300;
        }
        let m = dl[i] / dd[i];
        dd[i + 1] -= m * du[i];
        if i + 2 < n {
            du[i + 1] -= m * du2[i];
        }
        rhs[i + 1] -= m * rhs[i];
    }

    let mut x = vec![0.0; n];
    let last = n - 1;
    if dd[last] == 0.0 {
        dd[last] = 1e-300;
    }
    x[last] = rhs[last] / dd[last];
    if n >= 2 {
        let i = n - 2;
        x[i] = (rhs[i] - du[i] * x[i + 1]) / dd[i];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (rhs[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
    }
    x
}

/// Smallest eigenpair of a dense Hermitian matrix. Returns the eigenvalue,
/// the eigenvector, and the true residual from one matvec.
pub fn dense_hermitian_min(m: &DMatrix<Complex64>) -> EigResult {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let eig = m.clone().symmetric_eigen();
    let mut k = 0;
    for i in 1..n {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    let value = eig.eigenvalues[k];
    let v: DVector<Complex64> = eig.eigenvectors.column(k).into();
    let av = m * &v;
    let residual = (&av - &v * Complex64::new(value, 0.0)).norm();
    EigResult {
        value,
        vector: v.iter().copied().collect(),
        residual,
        iterations: 0,
    }
}

/// All eigenvalues of a dense Hermitian matrix, ascending.
pub fn dense_hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let s = norm(a);
    for v in a.iter_mut() {
        *v /= s;
    }
}

fn axpy(c: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn scale(c: f64, x: &mut [Complex64]) {
    for v in x.iter_mut() {
        *v *= c;
    }
}
