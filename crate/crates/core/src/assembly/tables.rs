//! Per-pair Galerkin tables in the area-weighted frame.

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use super::integrals::{pair_integrals, PairIntegrals, PairQuadrature, QuadratureOptions};
use crate::mesh::SurfaceMesh;
use crate::quadrature::{classify_pair, PanelPairClass};
use crate::scalar::Real;

/// Size of the skew part discarded by symmetrization, as the largest absolute
/// row sum in the weighted frame (an upper bound on its operator norm).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SkewResidual {
    pub scalar: f64,
    pub pauli: f64,
    pub derivative_scalar: f64,
    pub derivative_pauli: f64,
}

/// Galerkin matrices of the scalar and Pauli-vector kernels at one decay
/// rate `κ`, stored as `M^{-1/2} G M^{-1/2}` with `M = diag(areas)`.
///
/// `s` is symmetric, each `v[k]` antisymmetric. When derivative kernels are
/// requested, `e` (symmetric) and `f[k]` (antisymmetric) hold
/// `∫∫ e^{−κr}/(4π)` and `∫∫ e^{−κr}(x−y)/(4πr)`.
#[derive(Clone, Debug)]
pub struct PanelTables {
    pub(crate) kappa: f64,
    pub(crate) sqrt_area: Vec<f64>,
    pub(crate) s: Mat<f64>,
    pub(crate) v: [Mat<f64>; 3],
    pub(crate) e: Option<Mat<f64>>,
    pub(crate) f: Option<[Mat<f64>; 3]>,
    pub(crate) skew: SkewResidual,
    pub(crate) mesh_id: String,
}

impl PanelTables {
    pub fn num_panels(&self) -> usize {
        self.sqrt_area.len()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sqrt_area(&self) -> &[f64] {
        &self.sqrt_area
    }

    pub fn skew_residual(&self) -> SkewResidual {
        self.skew
    }

    pub fn has_derivative(&self) -> bool {
        self.e.is_some()
    }

    pub fn mesh_id(&self) -> &str {
        &self.mesh_id
    }

    /// Weighted-frame single-layer matrix.
    pub fn scalar_frame(&self) -> &Mat<f64> {
        &self.s
    }

    /// Weighted-frame Pauli-vector matrices.
    pub fn pauli_frame(&self) -> &[Mat<f64>; 3] {
        &self.v
    }
}

const CHUNK: usize = 32;

/// Assembles all pair integrals at decay rate `kappa`.
///
/// Pairs integrated with an asymmetric rule (near and touching pairs) are
/// computed in both orders and averaged; the discarded skew part is recorded.
pub fn assemble_tables<T: Real>(
    mesh: &SurfaceMesh<T>,
    kappa: f64,
    with_derivative: bool,
    opts: &QuadratureOptions,
) -> PanelTables {
    let n = mesh.num_panels();
    let quad = PairQuadrature::<T>::new(opts);
    let kap = T::lit(kappa);
    let eta = T::lit(opts.eta);
    let mut s = Mat::<f64>::zeros(n, n);
    let mut v: [Mat<f64>; 3] = std::array::from_fn(|_| Mat::zeros(n, n));
    let mut e = with_derivative.then(|| Mat::<f64>::zeros(n, n));
    let mut f: Option<[Mat<f64>; 3]> = with_derivative.then(|| std::array::from_fn(|_| Mat::zeros(n, n)));

    let rows: Vec<usize> = (0..n).collect();
    for chunk in rows.chunks(CHUNK) {
        let results: Vec<Vec<(usize, bool, PairIntegrals<T>)>> = chunk
            .par_iter()
            .map(|&i| {
                let mut out = Vec::new();
                for j in 0..n {
                    let class = classify_pair(mesh, i, j, eta);
                    let once = matches!(class, PanelPairClass::Far | PanelPairClass::Identical);
                    if once && j < i {
                        continue;
                    }
                    out.push((j, once, pair_integrals(mesh, i, j, class, kap, &quad, with_derivative)));
                }
                out
            })
            .collect();
        for (&i, row) in chunk.iter().zip(results) {
            for (j, once, p) in row {
                let (ps, pe) = (p.s.to_f64_lossy(), p.e.to_f64_lossy());
                s[(i, j)] = ps;
                if once {
                    s[(j, i)] = ps;
                }
                for k in 0..3 {
                    let pv = p.v[k].to_f64_lossy();
                    v[k][(i, j)] = pv;
                    if once {
                        v[k][(j, i)] = -pv;
                    }
                }
                if let Some(e) = e.as_mut() {
                    e[(i, j)] = pe;
                    if once {
                        e[(j, i)] = pe;
                    }
                }
                if let Some(f) = f.as_mut() {
                    for k in 0..3 {
                        let pf = p.f[k].to_f64_lossy();
                        f[k][(i, j)] = pf;
                        if once {
                            f[k][(j, i)] = -pf;
                        }
                    }
                }
            }
        }
    }

    let sqrt_area: Vec<f64> = mesh.areas().iter().map(|a| a.to_f64_lossy().sqrt()).collect();
    let mut skew = SkewResidual::default();
    skew.scalar = symmetrize(&mut s, &sqrt_area, 1.0);
    skew.pauli = symmetrize_vector(&mut v, &sqrt_area);
    if let Some(e) = e.as_mut() {
        skew.derivative_scalar = symmetrize(e, &sqrt_area, 1.0);
    }
    if let Some(f) = f.as_mut() {
        skew.derivative_pauli = symmetrize_vector(f, &sqrt_area);
    }
    PanelTables { kappa, sqrt_area, s, v, e, f, skew, mesh_id: mesh.id() }
}

/// Replaces `m` by the weighted-frame part of parity `sign` (+1 symmetric,
/// −1 antisymmetric) and returns the max row sum of the discarded part.
fn symmetrize(m: &mut Mat<f64>, w: &[f64], sign: f64) -> f64 {
    let n = m.nrows();
    let mut rows = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            let scale = 1.0 / (w[i] * w[j]);
            m[(i, j)] *= scale;
        }
    }
    for i in 0..n {
        for j in i..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            let keep = 0.5 * (a + sign * b);
            let drop = 0.5 * (a - sign * b);
            m[(i, j)] = keep;
            m[(j, i)] = sign * keep;
            if i != j {
                rows[i] += drop.abs();
                rows[j] += drop.abs();
            } else {
                rows[i] += drop.abs();
            }
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}

fn symmetrize_vector(m: &mut [Mat<f64>; 3], w: &[f64]) -> f64 {
    let n = m[0].nrows();
    let mut rows = vec![0.0f64; n];
    for c in m.iter_mut() {
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] /= w[i] * w[j];
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let mut drop2 = 0.0;
            for c in m.iter_mut() {
                let (a, b) = (c[(i, j)], c[(j, i)]);
                let keep = 0.5 * (a - b);
                let drop = 0.5 * (a + b);
                c[(i, j)] = keep;
                c[(j, i)] = -keep;
                drop2 += drop * drop;
            }
            let d = drop2.sqrt();
            rows[i] += d;
            if i != j {
                rows[j] += d;
            }
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}
