//! Operators on panel-constant spinor densities.
//!
//! Vectors are panel-major: entry `d·i + c` is component `c` on panel `i`.
//! Every operator acts in the weighted frame `f̂ = M^{1/2} f`, where the
//! area-weighted inner product becomes the Euclidean one and self-adjoint
//! operators become Hermitian matrices.

use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, MatRef, Par};
use serde::Serialize;

use super::tables::PanelTables;
use crate::kernels::pauli_dot;

/// Panel-constant spinor density with `components` values per panel.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVector {
    pub values: Vec<c64>,
    pub components: usize,
}

impl DensityVector {
    pub fn zeros(panels: usize, components: usize) -> Self {
        Self { values: vec![c64::new(0.0, 0.0); panels * components], components }
    }

    pub fn from_fn(panels: usize, components: usize, mut f: impl FnMut(usize, usize) -> c64) -> Self {
        let mut values = Vec::with_capacity(panels * components);
        for i in 0..panels {
            for c in 0..components {
                values.push(f(i, c));
            }
        }
        Self { values, components }
    }

    pub fn panels(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn get(&self, panel: usize, component: usize) -> c64 {
        self.values[self.components * panel + component]
    }

    /// `Σ_i area_i ⟨f_i, g_i⟩` (linear in `self`).
    pub fn weighted_inner(&self, other: &Self, areas: &[f64]) -> c64 {
        let d = self.components;
        let mut acc = c64::new(0.0, 0.0);
        for (i, a) in areas.iter().enumerate() {
            for c in 0..d {
                acc += self.values[d * i + c] * other.values[d * i + c].conj() * *a;
            }
        }
        acc
    }

    pub fn weighted_norm(&self, areas: &[f64]) -> f64 {
        self.weighted_inner(self, areas).re.max(0.0).sqrt()
    }

    /// Weighted-frame column `M^{1/2} f`.
    pub fn to_frame(&self, sqrt_area: &[f64]) -> Mat<c64> {
        let d = self.components;
        Mat::from_fn(self.values.len(), 1, |r, _| self.values[r] * sqrt_area[r / d])
    }

    /// Inverse of [`DensityVector::to_frame`].
    pub fn from_frame(col: MatRef<'_, c64>, components: usize, sqrt_area: &[f64]) -> Self {
        let values = (0..col.nrows()).map(|r| col[(r, 0)] / sqrt_area[r / components]).collect();
        Self { values, components }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Linear operator that is Hermitian in the weighted frame.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;

    /// `Â X` for a block of frame vectors `X` (`dim × p`).
    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64>;
}

pub(crate) fn gemm(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, 1.0, Par::Seq);
    out
}

pub(crate) fn cgemm<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> Mat<c64>
where
    L: faer::traits::Conjugate<Canonical = c64>,
    R: faer::traits::Conjugate<Canonical = c64>,
{
    let mut out = Mat::<c64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, c64::new(1.0, 0.0), Par::Seq);
    out
}

/// Which shell operator a [`ShellOperator`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShellKind {
    /// Single layer `K` on 2-spinors.
    K,
    /// Pauli principal-value operator `W` on 2-spinors.
    W,
    /// Full operator `C = [[(a+m)K, W], [W, (a−m)K]]` on 4-spinors.
    C { a: f64, m: f64 },
    /// `∂C/∂a` on 4-spinors (needs derivative tables, `|a| < m`).
    DcDa { a: f64, m: f64 },
    /// Scalar single layer on 1-component densities.
    Scalar,
}

/// Structured operator backed by [`PanelTables`]; applies blocks with real
/// matrix products and never forms the spinor matrix.
#[derive(Clone, Copy, Debug)]
pub struct ShellOperator<'a> {
    pub tables: &'a PanelTables,
    pub kind: ShellKind,
}

impl<'a> ShellOperator<'a> {
    pub fn new(tables: &'a PanelTables, kind: ShellKind) -> Self {
        if matches!(kind, ShellKind::DcDa { .. }) {
            assert!(tables.has_derivative(), "derivative tables were not assembled");
        }
        Self { tables, kind }
    }

    pub fn components(&self) -> usize {
        match self.kind {
            ShellKind::Scalar => 1,
            ShellKind::K | ShellKind::W => 2,
            ShellKind::C { .. } | ShellKind::DcDa { .. } => 4,
        }
    }
}

/// Splits a panel-major complex block into a real `n × (2·d·p)` matrix with
/// columns ordered (component, re/im, column).
fn gather(x: MatRef<'_, c64>, d: usize) -> Mat<f64> {
    let p = x.ncols();
    let n = x.nrows() / d;
    Mat::from_fn(n, 2 * d * p, |i, col| {
        let c = col / (2 * p);
        let rem = col % (2 * p);
        let z = x[(d * i + c, rem % p)];
        if rem < p {
            z.re
        } else {
            z.im
        }
    })
}

#[inline]
fn pick(m: &Mat<f64>, i: usize, c: usize, j: usize, p: usize) -> c64 {
    c64::new(m[(i, 2 * p * c + j)], m[(i, 2 * p * c + p + j)])
}

/// `i σ·(U)` on the 2-spinor made of components `(c0, c1)` of the products
/// `u[k] = V_k x`.
#[inline]
fn pauli_apply(u: &[Mat<f64>; 3], i: usize, c0: usize, c1: usize, j: usize, p: usize) -> (c64, c64) {
    let im = c64::new(0.0, 1.0);
    let (u1a, u1b) = (pick(&u[0], i, c0, j, p), pick(&u[0], i, c1, j, p));
    let (u2a, u2b) = (pick(&u[1], i, c0, j, p), pick(&u[1], i, c1, j, p));
    let (u3a, u3b) = (pick(&u[2], i, c0, j, p), pick(&u[2], i, c1, j, p));
    (im * (u1b + u3a) + u2b, im * (u1a - u3b) - u2a)
}

impl HermitianOperator for ShellOperator<'_> {
    fn dim(&self) -> usize {
        self.components() * self.tables.num_panels()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let t = self.tables;
        let d = self.components();
        let n = t.num_panels();
        let p = x.ncols();
        assert_eq!(x.nrows(), d * n, "dimension mismatch");
        let b = gather(x, d);
        let mut y = Mat::<c64>::zeros(d * n, p);
        match self.kind {
            ShellKind::Scalar | ShellKind::K => {
                let ps = gemm(t.s.as_ref(), b.as_ref());
                for i in 0..n {
                    for c in 0..d {
                        for j in 0..p {
                            y[(d * i + c, j)] = pick(&ps, i, c, j, p);
                        }
                    }
                }
            }
            ShellKind::W => {
                let u: [Mat<f64>; 3] = std::array::from_fn(|k| gemm(t.v[k].as_ref(), b.as_ref()));
                for i in 0..n {
                    for j in 0..p {
                        let (w0, w1) = pauli_apply(&u, i, 0, 1, j, p);
                        y[(2 * i, j)] = w0;
                        y[(2 * i + 1, j)] = w1;
                    }
                }
            }
            ShellKind::C { a, m } => {
                let ps = gemm(t.s.as_ref(), b.as_ref());
                let u: [Mat<f64>; 3] = std::array::from_fn(|k| gemm(t.v[k].as_ref(), b.as_ref()));
                let (top, bottom) = (a + m, a - m);
                for i in 0..n {
                    for j in 0..p {
                        let (wb0, wb1) = pauli_apply(&u, i, 2, 3, j, p);
                        let (wt0, wt1) = pauli_apply(&u, i, 0, 1, j, p);
                        y[(4 * i, j)] = pick(&ps, i, 0, j, p) * top + wb0;
                        y[(4 * i + 1, j)] = pick(&ps, i, 1, j, p) * top + wb1;
                        y[(4 * i + 2, j)] = wt0 + pick(&ps, i, 2, j, p) * bottom;
                        y[(4 * i + 3, j)] = wt1 + pick(&ps, i, 3, j, p) * bottom;
                    }
                }
            }
            ShellKind::DcDa { a, m } => {
                let kappa = t.kappa;
                let e = t.e.as_ref().expect("derivative tables");
                let f = t.f.as_ref().expect("derivative tables");
                let ps = gemm(t.s.as_ref(), b.as_ref());
                let pe = gemm(e.as_ref(), b.as_ref());
                let u: [Mat<f64>; 3] = std::array::from_fn(|k| gemm(f[k].as_ref(), b.as_ref()));
                let (ct, cb) = (a * (a + m) / kappa, a * (a - m) / kappa);
                for i in 0..n {
                    for j in 0..p {
                        let (wb0, wb1) = pauli_apply(&u, i, 2, 3, j, p);
                        let (wt0, wt1) = pauli_apply(&u, i, 0, 1, j, p);
                        let diag = |c: usize, coef: f64| pick(&pe, i, c, j, p) * coef + pick(&ps, i, c, j, p);
                        y[(4 * i, j)] = diag(0, ct) + wb0 * a;
                        y[(4 * i + 1, j)] = diag(1, ct) + wb1 * a;
                        y[(4 * i + 2, j)] = wt0 * a + diag(2, cb);
                        y[(4 * i + 3, j)] = wt1 * a + diag(3, cb);
                    }
                }
            }
        }
        y
    }
}

/// Which pointwise Clifford multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `α·N` on 4-spinors.
    AlphaN,
    /// `σ·N` on 2-spinors.
    SigmaN,
}

/// Panel-diagonal multiplication by `α·N` or `σ·N`.
#[derive(Clone, Debug)]
pub struct Multiplier {
    blocks: Vec<[[c64; 2]; 2]>,
    kind: MultiplierKind,
}

impl Multiplier {
    pub fn new(normals: &[[f64; 3]], kind: MultiplierKind) -> Self {
        Self { blocks: normals.iter().map(|n| pauli_dot(*n)).collect(), kind }
    }

    pub fn kind(&self) -> MultiplierKind {
        self.kind
    }

    fn components(&self) -> usize {
        match self.kind {
            MultiplierKind::AlphaN => 4,
            MultiplierKind::SigmaN => 2,
        }
    }
}

impl HermitianOperator for Multiplier {
    fn dim(&self) -> usize {
        self.components() * self.blocks.len()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let d = self.components();
        let mut y = Mat::<c64>::zeros(x.nrows(), x.ncols());
        for (i, s) in self.blocks.iter().enumerate() {
            for j in 0..x.ncols() {
                match self.kind {
                    MultiplierKind::SigmaN => {
                        let (u0, u1) = (x[(2 * i, j)], x[(2 * i + 1, j)]);
                        y[(2 * i, j)] = s[0][0] * u0 + s[0][1] * u1;
                        y[(2 * i + 1, j)] = s[1][0] * u0 + s[1][1] * u1;
                    }
                    MultiplierKind::AlphaN => {
                        let b = d * i;
                        let (u0, u1, u2, u3) = (x[(b, j)], x[(b + 1, j)], x[(b + 2, j)], x[(b + 3, j)]);
                        y[(b, j)] = s[0][0] * u2 + s[0][1] * u3;
                        y[(b + 1, j)] = s[1][0] * u2 + s[1][1] * u3;
                        y[(b + 2, j)] = s[0][0] * u0 + s[0][1] * u1;
                        y[(b + 3, j)] = s[1][0] * u0 + s[1][1] * u1;
                    }
                }
            }
        }
        y
    }
}

/// Dense weighted-Hermitian operator.
///
/// Holds the weighted-frame matrix `Â = M^{1/2} A M^{-1/2}`; the operator
/// matrix acting on coefficient vectors is available from
/// [`DenseOperator::entries`].
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub(crate) frame: Mat<c64>,
    pub(crate) sqrt_weight: Vec<f64>,
    pub(crate) components: usize,
    pub symmetry_residual: f64,
    pub meta: OperatorMeta,
}

/// Where an operator came from, carried into reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OperatorMeta {
    pub a: Option<f64>,
    pub m: Option<f64>,
    pub mesh_id: Option<String>,
}

impl DenseOperator {
    /// Wraps a frame matrix; `sqrt_area` has one entry per panel.
    pub fn from_frame(frame: Mat<c64>, sqrt_area: &[f64], components: usize, symmetry_residual: f64) -> Self {
        assert_eq!(frame.nrows(), frame.ncols());
        assert_eq!(frame.nrows(), sqrt_area.len() * components);
        let sqrt_weight = (0..frame.nrows()).map(|r| sqrt_area[r / components]).collect();
        Self { frame, sqrt_weight, components, symmetry_residual, meta: OperatorMeta::default() }
    }

    /// Builds the operator from its coefficient-space matrix, symmetrizing it
    /// in the weighted inner product and recording the discarded skew part
    /// (max absolute row sum in the frame).
    pub fn from_entries(entries: MatRef<'_, c64>, areas: &[f64], components: usize) -> Self {
        let n = entries.nrows();
        let sqrt_area: Vec<f64> = areas.iter().map(|a| a.sqrt()).collect();
        let w: Vec<f64> = (0..n).map(|r| sqrt_area[r / components]).collect();
        let raw = Mat::from_fn(n, n, |i, j| entries[(i, j)] * (w[i] / w[j]));
        let mut frame = Mat::<c64>::zeros(n, n);
        let mut rows = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..n {
                let h = (raw[(i, j)] + raw[(j, i)].conj()) * 0.5;
                frame[(i, j)] = h;
                rows[i] += (raw[(i, j)] - h).norm();
            }
        }
        let residual = rows.into_iter().fold(0.0, f64::max);
        Self::from_frame(frame, &sqrt_area, components, residual)
    }

    pub fn identity(areas: &[f64], components: usize) -> Self {
        let n = areas.len() * components;
        let sqrt_area: Vec<f64> = areas.iter().map(|a| a.sqrt()).collect();
        Self::from_frame(Mat::identity(n, n), &sqrt_area, components, 0.0)
    }

    /// Materializes any weighted-Hermitian operator.
    pub fn materialize(op: &dyn HermitianOperator, sqrt_area: &[f64], components: usize, residual: f64) -> Self {
        let n = op.dim();
        let mut frame = Mat::<c64>::zeros(n, n);
        let block = 64;
        let mut start = 0;
        while start < n {
            let w = block.min(n - start);
            let e = Mat::from_fn(n, w, |r, c| if r == start + c { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
            let y = op.apply(e.as_ref());
            frame.as_mut().subcols_mut(start, w).copy_from(y.as_ref());
            start += w;
        }
        // Remove rounding-level asymmetry so dense solvers see an exactly
        // Hermitian matrix.
        for i in 0..n {
            for j in i..n {
                let h = (frame[(i, j)] + frame[(j, i)].conj()) * 0.5;
                frame[(i, j)] = h;
                frame[(j, i)] = h.conj();
            }
        }
        Self::from_frame(frame, sqrt_area, components, residual)
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn frame(&self) -> &Mat<c64> {
        &self.frame
    }

    /// Per-entry weights `area_i` (repeated per component).
    pub fn weights(&self) -> Vec<f64> {
        self.sqrt_weight.iter().map(|w| w * w).collect()
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weight
    }

    pub fn sqrt_area(&self) -> Vec<f64> {
        self.sqrt_weight.iter().step_by(self.components).copied().collect()
    }

    /// Matrix acting on coefficient vectors: `A = M^{-1/2} Â M^{1/2}`.
    pub fn entries(&self) -> Mat<c64> {
        let w = &self.sqrt_weight;
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.frame[(i, j)] * (w[j] / w[i]))
    }

    pub fn apply_density(&self, f: &DensityVector) -> DensityVector {
        let sa = self.sqrt_area();
        let y = cgemm(self.frame.as_ref(), f.to_frame(&sa).as_ref());
        DensityVector::from_frame(y.as_ref(), self.components, &sa)
    }

    /// Largest entrywise deviation of the frame from its conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.frame[(i, j)] - self.frame[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.frame[(i, j)].re.is_finite() && self.frame[(i, j)].im.is_finite()))
    }
}

impl HermitianOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.frame.nrows()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        cgemm(self.frame.as_ref(), x)
    }
}

/// `Σ c_k A_k` of operators with equal dimension.
pub struct LinearCombination<'a> {
    pub terms: Vec<(f64, &'a dyn HermitianOperator)>,
}

impl HermitianOperator for LinearCombination<'_> {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let mut acc = Mat::<c64>::zeros(x.nrows(), x.ncols());
        for (c, op) in &self.terms {
            let y = op.apply(x);
            acc += faer::Scale(c64::new(*c, 0.0)) * &y;
        }
        acc
    }
}

/// `A B` of two operators (Hermitian when they commute or `B = A`).
pub struct Product<'a>(pub &'a dyn HermitianOperator, pub &'a dyn HermitianOperator);

impl HermitianOperator for Product<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let y = self.1.apply(x);
        self.0.apply(y.as_ref())
    }
}
