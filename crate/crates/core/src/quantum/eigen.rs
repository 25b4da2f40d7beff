//! Lowest eigenpair of a real symmetric sparse matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hamiltonian::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Dimensions up to this use dense diagonalization.
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Absolute tolerance on `||H v - E v||` for unit `v`.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dense_threshold: 400, krylov_dim: 120, max_restarts: 200, residual_tol: 1e-9, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit norm; largest-magnitude component positive.
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn residual_norm(h: &SparseMatrix, value: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    h.matvec(v, &mut hv);
    hv.iter().zip(v).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt()
}

fn lowest_of(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> usize {
    let mut best = 0;
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e < eig.eigenvalues[best] {
            best = i;
        }
    }
    best
}

pub fn lowest_dense(h: &SparseMatrix) -> EigenPair {
    let eig = SymmetricEigen::new(h.to_dense());
    let i = lowest_of(&eig);
    let mut vector: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
    let n = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= n);
    fix_sign(&mut vector);
    let value = eig.eigenvalues[i];
    let residual = residual_norm(h, value, &vector);
    EigenPair { value, vector, residual }
}

/// Lowest Ritz pair of the tridiagonal `(alpha, beta)`: value, coefficients.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, DVector<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let i = lowest_of(&eig);
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

/// Lanczos with full reorthogonalization, restarted from the current Ritz
/// vector until the residual drops below `residual_tol`.
pub fn lowest_lanczos(h: &SparseMatrix, config: &SolverConfig) -> Result<EigenPair> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let kmax = config.krylov_dim.clamp(2, n);
    let mut last_residual = f64::INFINITY;

    for _ in 0..config.max_restarts.max(1) {
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<f64>> = vec![start];
        let mut alpha = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        let mut w = vec![0.0; n];
        let mut ritz = None;
        for m in 0..kmax {
            h.matvec(&basis[m], &mut w);
            let a = dot(&basis[m], &w);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            let done = m + 1 == kmax || b <= 1e-14 * a.abs().max(1.0);
            if done || (m + 1) % 10 == 0 {
                let (theta, y) = tridiagonal_lowest(&alpha, &beta);
                let estimate = b * y[m].abs();
                if done || estimate < 0.1 * config.residual_tol {
                    ritz = Some((theta, y));
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let (theta, y) = ritz.expect("loop always ends with a Ritz pair");
        let mut x = vec![0.0; n];
        for (coef, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += coef * vi);
        }
        let s = norm(&x);
        x.iter_mut().for_each(|xi| *xi /= s);
        let residual = residual_norm(h, theta, &x);
        last_residual = residual;
        if residual <= config.residual_tol {
            fix_sign(&mut x);
            return Ok(EigenPair { value: theta, vector: x, residual });
        }
        start = x;
    }
    Err(Error::NonConvergence { context: "Lanczos eigensolver".into(), residual: last_residual })
}

/// Dense below the configured threshold, Lanczos above.
pub fn lowest_eigenpair(h: &SparseMatrix, config: &SolverConfig) -> Result<EigenPair> {
    if h.dim() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if h.dim() <= config.dense_threshold {
        Ok(lowest_dense(h))
    } else {
        lowest_lanczos(h, config)
    }
}
