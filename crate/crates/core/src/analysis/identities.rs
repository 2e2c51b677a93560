//! Discrete operator identities measured along refinement ladders.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::{observed_orders, AnalysisError};
use crate::assembly::{
    assemble_tables, cgemm, HermitianOperator, PanelTables, Multiplier, MultiplierKind, QuadratureOptions, ShellKind,
    ShellOperator,
};
use crate::geometry;
use crate::kernels::PhysicalParams;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;
use crate::spectral::{partial_eig, KrylovOptions, Which};

/// Weighted-orthonormal frame basis of the spinor fields whose components
/// are polynomials of degree ≤ `degree` (at most 2) in the coordinates.
///
/// Directions that are nearly dependent on the surface (like `|x|² − 1` on
/// a sphere) are dropped; after orthogonalization they would be pure mesh
/// noise.
pub fn smooth_basis<T: Real>(mesh: &SurfaceMesh<T>, components: usize, degree: usize) -> Mat<c64> {
    let n = mesh.num_panels();
    let c = geometry::cast3::<T, f64>(mesh.center());
    let r = mesh.bounding_radius(mesh.center()).to_f64_lossy();
    let mono = |x: [f64; 3]| -> Vec<f64> {
        let u = [(x[0] - c[0]) / r, (x[1] - c[1]) / r, (x[2] - c[2]) / r];
        let mut v = vec![1.0];
        if degree >= 1 {
            v.extend_from_slice(&u);
        }
        if degree >= 2 {
            v.extend_from_slice(&[u[0] * u[0], u[1] * u[1], u[2] * u[2], u[0] * u[1], u[1] * u[2], u[2] * u[0]]);
        }
        v
    };
    let nf = mono([0.0; 3]).len();
    let mut b = Mat::<c64>::zeros(components * n, nf * components);
    for i in 0..n {
        let x = geometry::cast3::<T, f64>(mesh.centroids()[i]);
        let w = mesh.areas()[i].to_f64_lossy().sqrt();
        for (k, v) in mono(x).into_iter().enumerate() {
            for comp in 0..components {
                b[(components * i + comp, components * k + comp)] = c64::new(v * w, 0.0);
            }
        }
    }
    let gram = cgemm(b.adjoint(), b.as_ref());
    let eig = gram.self_adjoint_eigen(faer::Side::Lower).expect("small Gram matrix");
    let vals = eig.S().column_vector();
    let top = (0..vals.nrows()).map(|i| vals[i].re).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.nrows()).filter(|&i| vals[i].re > DEPENDENCE_TOL * DEPENDENCE_TOL * top).collect();
    let u = eig.U();
    let mut q = Mat::<c64>::zeros(b.ncols(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / vals[i].re.sqrt();
        for r in 0..b.ncols() {
            q[(r, c)] = u[(r, i)] * s;
        }
    }
    cgemm(b.as_ref(), q.as_ref())
}

/// Relative singular value below which a polynomial direction is dropped.
const DEPENDENCE_TOL: f64 = 0.05;

/// Largest singular value of `R P` for an orthonormal block `P`.
pub fn restricted_norm(r: &dyn Fn(MatRef<'_, c64>) -> Mat<c64>, basis: MatRef<'_, c64>) -> f64 {
    let rp = r(basis);
    let g = cgemm(rp.adjoint(), rp.as_ref());
    let vals = g.self_adjoint_eigenvalues(faer::Side::Lower).expect("small Gram matrix");
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `R^* R` for a residual map given with its adjoint.
struct Normal<'a> {
    dim: usize,
    r: &'a (dyn Fn(MatRef<'_, c64>) -> Mat<c64> + Sync),
    r_adj: &'a (dyn Fn(MatRef<'_, c64>) -> Mat<c64> + Sync),
}

impl HermitianOperator for Normal<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let y = (self.r)(x);
        (self.r_adj)(y.as_ref())
    }
}

fn full_norm(
    dim: usize,
    r: &(dyn Fn(MatRef<'_, c64>) -> Mat<c64> + Sync),
    r_adj: &(dyn Fn(MatRef<'_, c64>) -> Mat<c64> + Sync),
) -> Result<f64, AnalysisError> {
    let op = Normal { dim, r, r_adj };
    let opts = KrylovOptions { tol: 1e-6, ..KrylovOptions::default() };
    let e = partial_eig(&op, 1, Which::LargestAlgebraic, &opts)?;
    Ok(e.values[0].max(0.0).sqrt())
}

fn axpy(a: &Mat<c64>, s: f64, b: MatRef<'_, c64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)] * s)
}

/// Residual norms of the three identities at one `a`.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub panels: usize,
    pub h: f64,
    pub a: f64,
    /// `‖4(C(α·N))² + I‖` on smooth fields.
    pub dirac_square: f64,
    /// `‖{(σ·N)K, (σ·N)W}‖` on smooth fields.
    pub anticommutator: f64,
    /// `‖((σ·N)W)² + (a² − m²)((σ·N)K)² + 1/4‖` on smooth fields.
    pub pauli_square: f64,
    /// Full-space norms of the same residuals, when requested.
    pub full: Option<[f64; 3]>,
    /// Bound on the skew part removed from `C` by symmetrization.
    pub symmetry_residual: f64,
}

#[derive(Clone, Debug, Default)]
pub struct IdentityOptions {
    /// Also compute full-space operator norms (expensive, diagnostic only).
    pub full_norms: bool,
    pub quadrature: QuadratureOptions,
}

/// Identity residuals on one mesh for each `a` in `a_list`.
pub fn identity_suite<T: Real>(
    mesh: &SurfaceMesh<T>,
    m: f64,
    a_list: &[f64],
    opts: &IdentityOptions,
) -> Result<Vec<IdentityRow>, AnalysisError> {
    let normals: Vec<[f64; 3]> = mesh.normals().iter().map(|n| geometry::cast3(*n)).collect();
    let alpha_n = Multiplier::new(&normals, MultiplierKind::AlphaN);
    let sigma_n = Multiplier::new(&normals, MultiplierKind::SigmaN);
    let p4 = smooth_basis(mesh, 4, 2);
    let p2 = smooth_basis(mesh, 2, 2);
    let h = mesh.max_edge().to_f64_lossy();
    let n = mesh.num_panels();
    let mut rows = Vec::with_capacity(a_list.len());
    // `a` and `−a` share the decay rate and hence the tables.
    let mut cache: Vec<(f64, PanelTables)> = Vec::new();
    for &a in a_list {
        let p = PhysicalParams::new(m, a)?;
        let kappa = p.kappa();
        if !cache.iter().any(|(k, _)| *k == kappa) {
            cache.push((kappa, assemble_tables(mesh, kappa, false, &opts.quadrature)));
        }
        let tables = &cache.iter().find(|(k, _)| *k == kappa).expect("cached").1;
        let c = ShellOperator::new(tables, ShellKind::C { a: p.a, m: p.m });
        let k = ShellOperator::new(tables, ShellKind::K);
        let w = ShellOperator::new(tables, ShellKind::W);
        let coef = p.a * p.a - p.m * p.m;

        let dirac = |x: MatRef<'_, c64>| {
            let y = c.apply(alpha_n.apply(x).as_ref());
            let y = c.apply(alpha_n.apply(y.as_ref()).as_ref());
            axpy(&y, 0.25, x) * faer::Scale(c64::new(4.0, 0.0))
        };
        let dirac_adj = |x: MatRef<'_, c64>| {
            let y = alpha_n.apply(c.apply(x).as_ref());
            let y = alpha_n.apply(c.apply(y.as_ref()).as_ref());
            axpy(&y, 0.25, x) * faer::Scale(c64::new(4.0, 0.0))
        };
        let sk = |x: MatRef<'_, c64>| sigma_n.apply(k.apply(x).as_ref());
        let sw = |x: MatRef<'_, c64>| sigma_n.apply(w.apply(x).as_ref());
        let ks = |x: MatRef<'_, c64>| k.apply(sigma_n.apply(x).as_ref());
        let ws = |x: MatRef<'_, c64>| w.apply(sigma_n.apply(x).as_ref());
        let anti = |x: MatRef<'_, c64>| {
            let a1 = sk(sw(x).as_ref());
            let a2 = sw(sk(x).as_ref());
            a1 + a2
        };
        let anti_adj = |x: MatRef<'_, c64>| {
            let a1 = ws(ks(x).as_ref());
            let a2 = ks(ws(x).as_ref());
            a1 + a2
        };
        let square = |x: MatRef<'_, c64>| {
            let y = sw(sw(x).as_ref());
            let z = sk(sk(x).as_ref());
            axpy(&(y + z * faer::Scale(c64::new(coef, 0.0))), 0.25, x)
        };
        let square_adj = |x: MatRef<'_, c64>| {
            let y = ws(ws(x).as_ref());
            let z = ks(ks(x).as_ref());
            axpy(&(y + z * faer::Scale(c64::new(coef, 0.0))), 0.25, x)
        };
        let full = if opts.full_norms {
            Some([
                full_norm(4 * n, &dirac, &dirac_adj)?,
                full_norm(2 * n, &anti, &anti_adj)?,
                full_norm(2 * n, &square, &square_adj)?,
            ])
        } else {
            None
        };
        rows.push(IdentityRow {
            panels: n,
            h,
            a,
            dirac_square: restricted_norm(&dirac, p4.as_ref()),
            anticommutator: restricted_norm(&anti, p2.as_ref()),
            pauli_square: restricted_norm(&square, p2.as_ref()),
            full,
            symmetry_residual: crate::assembly::kind_residual(tables, ShellKind::C { a: p.a, m: p.m }),
        });
    }
    Ok(rows)
}

/// Identity residuals along a refinement ladder, with observed orders.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityLadder {
    pub m: f64,
    pub rows: Vec<IdentityRow>,
    /// Per `a`: observed orders between consecutive levels for
    /// `[dirac_square, anticommutator, pauli_square]`.
    pub orders: Vec<(f64, Vec<[f64; 3]>)>,
    /// Per `a`: whether every column decreases at every step and the finest
    /// observed order is at least one.
    pub converging: Vec<(f64, bool)>,
}

pub fn identity_ladder<T: Real>(
    meshes: &[SurfaceMesh<T>],
    m: f64,
    a_list: &[f64],
    opts: &IdentityOptions,
) -> Result<IdentityLadder, AnalysisError> {
    let mut rows = Vec::new();
    for mesh in meshes {
        rows.extend(identity_suite(mesh, m, a_list, opts)?);
    }
    let mut orders = Vec::new();
    let mut converging = Vec::new();
    for &a in a_list {
        let sel: Vec<&IdentityRow> = rows.iter().filter(|r| r.a == a).collect();
        let hs: Vec<f64> = sel.iter().map(|r| r.h).collect();
        let cols: [Vec<f64>; 3] = [
            sel.iter().map(|r| r.dirac_square).collect(),
            sel.iter().map(|r| r.anticommutator).collect(),
            sel.iter().map(|r| r.pauli_square).collect(),
        ];
        let per_col: Vec<Vec<f64>> = cols.iter().map(|c| observed_orders(&hs, c)).collect();
        let steps = hs.len().saturating_sub(1);
        let o: Vec<[f64; 3]> = (0..steps).map(|s| [per_col[0][s], per_col[1][s], per_col[2][s]]).collect();
        let ok = steps > 0
            && cols.iter().all(|c| c.windows(2).all(|w| w[1] < w[0]))
            && o.last().is_some_and(|l| l.iter().all(|x| *x >= 1.0));
        orders.push((a, o));
        converging.push((a, ok));
    }
    Ok(IdentityLadder { m, rows, orders, converging })
}

/// Checks specific to round spheres, where `2W` is an isometry
/// anticommuting with `σ·N`.
#[derive(Clone, Debug, Serialize)]
pub struct SphereChecks {
    pub panels: usize,
    /// `‖{σ·N, W}‖` on smooth 2-spinor fields.
    pub anticommutator: f64,
    /// Range of `‖2Wf‖/‖f‖` over random smooth fields.
    pub isometry_min: f64,
    pub isometry_max: f64,
    pub samples: usize,
}

/// Sphere checks at `κ = 0` using `samples` random combinations of smooth
/// fields drawn from a seeded generator.
pub fn sphere_checks<T: Real>(mesh: &SurfaceMesh<T>, samples: usize, seed: u64) -> SphereChecks {
    use rand::{Rng, SeedableRng};
    let normals: Vec<[f64; 3]> = mesh.normals().iter().map(|n| geometry::cast3(*n)).collect();
    let sigma_n = Multiplier::new(&normals, MultiplierKind::SigmaN);
    let tables = assemble_tables(mesh, 0.0, false, &QuadratureOptions::default());
    let w = ShellOperator::new(&tables, ShellKind::W);
    let p = smooth_basis(mesh, 2, 2);
    let anti = |x: MatRef<'_, c64>| {
        let a1 = sigma_n.apply(w.apply(x).as_ref());
        let a2 = w.apply(sigma_n.apply(x).as_ref());
        a1 + a2
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let coef = Mat::<c64>::from_fn(p.ncols(), samples, |_, _| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let f = cgemm(p.as_ref(), coef.as_ref());
    let wf = w.apply(f.as_ref());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..samples {
        let r = 2.0 * wf.col(j).norm_l2() / f.col(j).norm_l2();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    SphereChecks {
        panels: mesh.num_panels(),
        anticommutator: restricted_norm(&anti, p.as_ref()),
        isometry_min: lo,
        isometry_max: hi,
        samples,
    }
}
