//! Partial eigensolvers for Hermitian operators given only by their action.

use faer::{c64, Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SpectralError;
use crate::assembly::{cgemm, HermitianOperator};

/// Which end of the spectrum to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    LargestMagnitude,
    LargestAlgebraic,
    SmallestAlgebraic,
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    /// Residual tolerance relative to the largest Ritz value in magnitude.
    pub tol: f64,
    pub max_restarts: usize,
    /// Block width; `0` picks `k + 4`.
    pub block: usize,
    /// Target basis size before each restart.
    pub basis: usize,
    pub seed: u64,
    /// Operators at most this large are materialized and solved densely.
    pub dense_below: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_restarts: 300, block: 0, basis: 96, seed: 0x5eed_cafe, dense_below: 320 }
    }
}

/// Eigenpairs at one end of a Hermitian spectrum, ordered per [`Which`].
#[derive(Clone, Debug)]
pub struct PartialEigen {
    pub values: Vec<f64>,
    /// Orthonormal frame eigenvectors, one per column.
    pub vectors: Mat<c64>,
    pub residuals: Vec<f64>,
    pub restarts: usize,
}

pub(crate) fn identity_cols(n: usize, start: usize, w: usize) -> Mat<c64> {
    Mat::from_fn(n, w, |r, c| if r == start + c { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

/// Dense frame matrix of an operator, Hermitian part only.
pub(crate) fn materialize(op: &dyn HermitianOperator) -> Mat<c64> {
    let n = op.dim();
    let mut out = Mat::<c64>::zeros(n, n);
    let mut start = 0;
    while start < n {
        let w = 64.min(n - start);
        let y = op.apply(identity_cols(n, start, w).as_ref());
        out.as_mut().subcols_mut(start, w).copy_from(y.as_ref());
        start += w;
    }
    for i in 0..n {
        for j in i..n {
            let h = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = h;
            out[(j, i)] = h.conj();
        }
    }
    out
}

fn order(values: &[f64], which: Which) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match which {
        Which::LargestMagnitude => idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b))),
        Which::LargestAlgebraic => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b))),
        Which::SmallestAlgebraic => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))),
    }
    idx
}

/// Hermitian eigen-decomposition with ascending eigenvalues.
pub(crate) fn eigh(m: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>), SpectralError> {
    let e = m.self_adjoint_eigen(Side::Lower).map_err(|e| SpectralError::Convergence(format!("{e:?}")))?;
    let s = e.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok((values, e.U().to_owned()))
}

/// Orthonormalizes `z` against the orthonormal columns `q` (two passes of
/// classical Gram–Schmidt) and then internally.
pub(crate) fn orthonormalize_against(q: MatRef<'_, c64>, z: &mut Mat<c64>) {
    for _ in 0..2 {
        if q.ncols() > 0 {
            let c = cgemm(q.adjoint(), z.as_ref());
            let p = cgemm(q, c.as_ref());
            *z -= &p;
        }
    }
    let qr = z.qr();
    let mut thin = qr.compute_thin_Q();
    // Householder QR returns orthonormal columns even for a rank-deficient
    // block; re-orthogonalize once more to guard against round-off.
    if q.ncols() > 0 {
        let c = cgemm(q.adjoint(), thin.as_ref());
        let p = cgemm(q, c.as_ref());
        thin -= &p;
        thin = thin.qr().compute_thin_Q();
    }
    *z = thin;
}

fn random_block(n: usize, b: usize, seed: u64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat::<c64>::zeros(n, b);
    for j in 0..b {
        for i in 0..n {
            m[(i, j)] = c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    m
}

/// `k` extremal eigenpairs of a Hermitian operator by block Krylov
/// iteration with Rayleigh–Ritz extraction and restarts.
pub fn partial_eig(
    op: &dyn HermitianOperator,
    k: usize,
    which: Which,
    opts: &KrylovOptions,
) -> Result<PartialEigen, SpectralError> {
    partial_eig_from(op, k, which, opts, None)
}

/// [`partial_eig`] with the leading starting vectors taken from `start`
/// (the rest of the block is random).
pub fn partial_eig_from(
    op: &dyn HermitianOperator,
    k: usize,
    which: Which,
    opts: &KrylovOptions,
    start: Option<MatRef<'_, c64>>,
) -> Result<PartialEigen, SpectralError> {
    let n = op.dim();
    let k = k.min(n);
    if k == 0 {
        return Ok(PartialEigen { values: vec![], vectors: Mat::zeros(n, 0), residuals: vec![], restarts: 0 });
    }
    if n <= opts.dense_below.max(2 * k + 8) {
        let m = materialize(op);
        if !m.as_ref().is_all_finite() {
            return Err(SpectralError::NonFinite);
        }
        let (vals, vecs) = eigh(m.as_ref())?;
        let idx = order(&vals, which);
        let sel: Vec<usize> = idx.into_iter().take(k).collect();
        let vectors = Mat::from_fn(n, k, |r, c| vecs[(r, sel[c])]);
        let values: Vec<f64> = sel.iter().map(|&i| vals[i]).collect();
        let residuals = ritz_residuals(op, vectors.as_ref(), &values);
        return Ok(PartialEigen { values, vectors, residuals, restarts: 0 });
    }

    let b = if opts.block == 0 { k + 4 } else { opts.block.max(k) }.min(n / 2);
    let steps = (opts.basis.max(3 * b) / b).max(3);
    let mut x = random_block(n, b, opts.seed);
    if let Some(s0) = start {
        if s0.nrows() == n {
            let w = s0.ncols().min(b);
            x.as_mut().subcols_mut(0, w).copy_from(s0.subcols(0, w));
        }
    }
    orthonormalize_against(Mat::<c64>::zeros(n, 0).as_ref(), &mut x);
    let mut last_res = f64::INFINITY;
    for restart in 0..opts.max_restarts {
        let mut q = x.clone();
        let mut aq = op.apply(x.as_ref());
        for _ in 1..steps {
            if q.ncols() + b > n {
                break;
            }
            let start = aq.ncols() - b;
            let mut z = aq.as_ref().subcols(start, b).to_owned();
            orthonormalize_against(q.as_ref(), &mut z);
            let az = op.apply(z.as_ref());
            q = hcat(q.as_ref(), z.as_ref());
            aq = hcat(aq.as_ref(), az.as_ref());
        }
        if !aq.as_ref().is_all_finite() {
            return Err(SpectralError::NonFinite);
        }
        let mut h = cgemm(q.adjoint(), aq.as_ref());
        let dim = h.nrows();
        for i in 0..dim {
            for j in i..dim {
                let v = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        let (theta, u) = eigh(h.as_ref())?;
        let idx = order(&theta, which);
        let scale = theta.iter().fold(0.0f64, |s, t| s.max(t.abs())).max(f64::MIN_POSITIVE);
        let keep: Vec<usize> = idx.iter().copied().take(b).collect();
        let us = Mat::from_fn(dim, b, |r, c| u[(r, keep[c])]);
        let y = cgemm(q.as_ref(), us.as_ref());
        let ay = cgemm(aq.as_ref(), us.as_ref());
        let mut residuals = Vec::with_capacity(k);
        for c in 0..k {
            let t = theta[keep[c]];
            let mut s = 0.0;
            for r in 0..n {
                s += (ay[(r, c)] - y[(r, c)] * t).norm_sqr();
            }
            residuals.push(s.sqrt());
        }
        let worst = residuals.iter().fold(0.0f64, |a, r| a.max(*r));
        last_res = worst / scale;
        if worst <= opts.tol * scale {
            let values = keep.iter().take(k).map(|&i| theta[i]).collect();
            let vectors = y.as_ref().subcols(0, k).to_owned();
            return Ok(PartialEigen { values, vectors, residuals, restarts: restart });
        }
        x = y;
        orthonormalize_against(Mat::<c64>::zeros(n, 0).as_ref(), &mut x);
    }
    Err(SpectralError::Convergence(format!(
        "block Krylov did not reach relative residual {:.1e} (last {:.2e})",
        opts.tol, last_res
    )))
}

fn hcat(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::<c64>::zeros(a.nrows(), a.ncols() + b.ncols());
    out.as_mut().subcols_mut(0, a.ncols()).copy_from(a);
    out.as_mut().subcols_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `‖A v_j − λ_j v_j‖` for each column.
pub fn ritz_residuals(op: &dyn HermitianOperator, vectors: MatRef<'_, c64>, values: &[f64]) -> Vec<f64> {
    let av = op.apply(vectors);
    (0..values.len())
        .map(|c| {
            let mut s = 0.0;
            for r in 0..vectors.nrows() {
                s += (av[(r, c)] - vectors[(r, c)] * values[c]).norm_sqr();
            }
            s.sqrt()
        })
        .collect()
}
