//! The critical coupling `λ_Ω`: the largest real `λ` for which
//! `λ² f = 16 W² f + 8mλ K f` has a nonzero solution (`K`, `W` at `a = m`).

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::krylov::{partial_eig, partial_eig_from, KrylovOptions, Which};
use super::SpectralError;
use crate::assembly::{cgemm, DenseOperator, DensityVector, HermitianOperator};

/// Companion dimensions up to this size are solved densely; larger ones by
/// restarted Arnoldi on the companion action.
pub const QEP_DENSE_LIMIT: usize = 800;

/// Relative slack allowed when checking the norm bracket, which holds
/// exactly only for the continuous operators.
const BRACKET_TOL: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMethod {
    Qep,
    Bisection,
}

/// The norm bracket `4(m‖K‖ + √(m²‖K‖² + 1/4)) ≤ λ_Ω ≤ 4(m‖K‖ + √(m²‖K‖² + ‖W‖²))`
/// and the thresholds above which the minimizer argument applies.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsCheck {
    pub norm_k: f64,
    pub norm_w: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub within: bool,
    /// `2√2`.
    pub threshold: f64,
    /// `2√(2 − 1/(4‖W‖²))`, the weakened threshold.
    pub weakened_threshold: f64,
    pub above_threshold: bool,
    pub above_weakened_threshold: bool,
}

impl BoundsCheck {
    fn new(norm_k: f64, norm_w: f64, m: f64, value: f64) -> Self {
        let mk = m * norm_k;
        let lower = 4.0 * (mk + (mk * mk + 0.25).sqrt());
        let upper = 4.0 * (mk + (mk * mk + norm_w * norm_w).sqrt());
        let threshold = 2.0 * 2f64.sqrt();
        let weakened_threshold = 2.0 * (2.0 - 1.0 / (4.0 * norm_w * norm_w)).max(0.0).sqrt();
        Self {
            norm_k,
            norm_w,
            lower,
            upper,
            tolerance: BRACKET_TOL,
            within: value >= lower * (1.0 - BRACKET_TOL) && value <= upper * (1.0 + BRACKET_TOL),
            threshold,
            weakened_threshold,
            above_threshold: value > threshold,
            above_weakened_threshold: value > weakened_threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaOmegaResult {
    pub lambda_omega: f64,
    pub method: LambdaMethod,
    /// Achieving 2-spinor density, weighted-normalized.
    #[serde(skip)]
    pub certificate: DensityVector,
    /// `‖(λ² − 16W² − 8mλK) f‖ / (λ² ‖f‖)`.
    pub residual: f64,
    /// `|A(λ, f) − ‖f‖²| / ‖f‖²` for the certificate.
    pub quadratic_form_gap: f64,
    pub bounds: BoundsCheck,
    pub iterations: usize,
}

/// Both sides of the two equivalent quadratic-form inequalities for one
/// density, all divided by `‖f‖²`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticForms {
    /// `(4/λ)²‖Wf‖² + (8m/λ)⟨Kf, f⟩`; the first form holds when this is ≤ 1.
    pub a_form: f64,
    /// `1 + 2mλ⟨Kf, f⟩`.
    pub second_lhs: f64,
    /// `λ²‖Wf‖²`; the second form holds when `second_lhs ≤ second_rhs`.
    pub second_rhs: f64,
}

fn dot(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let mut s = c64::new(0.0, 0.0);
    for r in 0..a.nrows() {
        s += a[(r, 0)] * b[(r, 0)].conj();
    }
    s
}

fn norm(a: MatRef<'_, c64>) -> f64 {
    dot(a, a).re.sqrt()
}

/// Evaluates both quadratic forms for a frame vector `f`.
pub fn quadratic_forms(
    k: &dyn HermitianOperator,
    w: &dyn HermitianOperator,
    m: f64,
    lambda: f64,
    f: MatRef<'_, c64>,
) -> QuadraticForms {
    let ff = dot(f, f).re;
    let kf = dot(k.apply(f).as_ref(), f).re / ff;
    let wf = w.apply(f);
    let ww = dot(wf.as_ref(), wf.as_ref()).re / ff;
    QuadraticForms {
        a_form: (4.0 / lambda).powi(2) * ww + 8.0 * m / lambda * kf,
        second_lhs: 1.0 + 2.0 * m * lambda * kf,
        second_rhs: lambda * lambda * ww,
    }
}

fn qep_residual(k: &dyn HermitianOperator, w: &dyn HermitianOperator, m: f64, lambda: f64, f: MatRef<'_, c64>) -> f64 {
    let wf = w.apply(f);
    let wwf = w.apply(wf.as_ref());
    let kf = k.apply(f);
    let mut s = 0.0;
    for r in 0..f.nrows() {
        s += (f[(r, 0)] * (lambda * lambda) - wwf[(r, 0)] * 16.0 - kf[(r, 0)] * (8.0 * m * lambda)).norm_sqr();
    }
    s.sqrt() / (lambda * lambda * norm(f))
}

fn norms(k: &dyn HermitianOperator, w: &dyn HermitianOperator, opts: &KrylovOptions) -> Result<(f64, f64), SpectralError> {
    let nk = partial_eig(k, 1, Which::LargestMagnitude, opts)?.values[0].abs();
    // ‖W‖ is attained by (near) degenerate ± pairs; a few extra vectors keep
    // the block iteration fast.
    let nw = partial_eig(w, 4, Which::LargestMagnitude, opts)?.values[0].abs();
    Ok((nk, nw))
}

fn finish(
    k: &dyn HermitianOperator,
    w: &dyn HermitianOperator,
    sqrt_area: &[f64],
    m: f64,
    lambda: f64,
    method: LambdaMethod,
    mut f: Mat<c64>,
    iterations: usize,
    opts: &KrylovOptions,
) -> Result<LambdaOmegaResult, SpectralError> {
    let nf = norm(f.as_ref());
    f /= faer::Scale(c64::new(nf, 0.0));
    let mut fv = f.clone();
    super::fix_phase(&mut fv);
    let forms = quadratic_forms(k, w, m, lambda, fv.as_ref());
    let (nk, nw) = norms(k, w, opts)?;
    let bounds = BoundsCheck::new(nk, nw, m, lambda);
    let result = LambdaOmegaResult {
        lambda_omega: lambda,
        method,
        certificate: DensityVector::from_frame(fv.as_ref(), 2, sqrt_area),
        residual: qep_residual(k, w, m, lambda, fv.as_ref()),
        quadratic_form_gap: (forms.a_form - 1.0).abs(),
        bounds,
        iterations,
    };
    Ok(result)
}

fn check_inputs(k: &dyn HermitianOperator, w: &dyn HermitianOperator, sqrt_area: &[f64], m: f64) -> Result<(), SpectralError> {
    if k.dim() != w.dim() || k.dim() != 2 * sqrt_area.len() {
        return Err(SpectralError::Dimension(format!(
            "K has dimension {}, W {}, expected {} for 2-spinors",
            k.dim(),
            w.dim(),
            2 * sqrt_area.len()
        )));
    }
    if !(m > 0.0) {
        return Err(SpectralError::Dimension(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

/// `λ_Ω` from the companion linearization `[[0, I], [16W², 8mK]]` acting on
/// `(f, λf)`: its largest real eigenvalue, with the eigenvector as
/// certificate.
pub fn lambda_omega_qep(k: &DenseOperator, w: &DenseOperator, m: f64) -> Result<LambdaOmegaResult, SpectralError> {
    lambda_omega_qep_op(k, w, &k.sqrt_area(), m, &KrylovOptions::default())
}

pub fn lambda_omega_qep_op(
    k: &dyn HermitianOperator,
    w: &dyn HermitianOperator,
    sqrt_area: &[f64],
    m: f64,
    opts: &KrylovOptions,
) -> Result<LambdaOmegaResult, SpectralError> {
    check_inputs(k, w, sqrt_area, m)?;
    let n = k.dim();
    let (lambda, f, iterations) = if 2 * n <= QEP_DENSE_LIMIT { dense_companion(k, w, m)? } else { arnoldi_companion(k, w, m)? };
    let result = finish(k, w, sqrt_area, m, lambda, LambdaMethod::Qep, f, iterations, opts)?;
    if !result.bounds.within {
        return Err(SpectralError::BracketViolation { value: lambda, lower: result.bounds.lower, upper: result.bounds.upper });
    }
    Ok(result)
}

fn is_real(z: c64) -> bool {
    z.im.abs() < 1e-8 * z.re.abs()
}

fn dense_companion(k: &dyn HermitianOperator, w: &dyn HermitianOperator, m: f64) -> Result<(f64, Mat<c64>, usize), SpectralError> {
    let n = k.dim();
    let kd = super::materialize(k);
    let wd = super::materialize(w);
    let w2 = cgemm(wd.as_ref(), wd.as_ref());
    let mut l = Mat::<c64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        l[(i, n + i)] = c64::new(1.0, 0.0);
        for j in 0..n {
            l[(n + i, j)] = w2[(i, j)] * 16.0;
            l[(n + i, n + j)] = kd[(i, j)] * (8.0 * m);
        }
    }
    if !l.as_ref().is_all_finite() {
        return Err(SpectralError::NonFinite);
    }
    let e = l.eigen().map_err(|e| SpectralError::Convergence(format!("{e:?}")))?;
    let s = e.S().column_vector();
    let mut best: Option<usize> = None;
    let mut largest: Option<f64> = None;
    for i in 0..s.nrows() {
        let z = s[i];
        if is_real(z) {
            largest = Some(largest.map_or(z.re, |v: f64| v.max(z.re)));
            if z.re > 2.0 && best.is_none_or(|b| z.re > s[b].re) {
                best = Some(i);
            }
        }
    }
    let i = best.ok_or(SpectralError::NoRealEigenvalue { largest })?;
    let u = e.U();
    let f = Mat::from_fn(n, 1, |r, _| u[(r, i)]);
    Ok((s[i].re, f, 0))
}

struct Companion<'a> {
    k: &'a dyn HermitianOperator,
    w: &'a dyn HermitianOperator,
    m: f64,
}

impl Companion<'_> {
    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let n = self.k.dim();
        let f = x.subrows(0, n);
        let g = x.subrows(n, n);
        let wf = self.w.apply(f);
        let wwf = self.w.apply(wf.as_ref());
        let kg = self.k.apply(g);
        let mut y = Mat::<c64>::zeros(2 * n, x.ncols());
        y.as_mut().subrows_mut(0, n).copy_from(g);
        for c in 0..x.ncols() {
            for r in 0..n {
                y[(n + r, c)] = wwf[(r, c)] * 16.0 + kg[(r, c)] * (8.0 * self.m);
            }
        }
        y
    }
}

/// Restarted Arnoldi for the dominant eigenvalue of the companion matrix.
/// The dominant one is `λ_Ω`: every negative eigenvalue of the quadratic
/// problem satisfies `|λ| ≤ 4‖W‖`, below the lower bracket.
fn arnoldi_companion(k: &dyn HermitianOperator, w: &dyn HermitianOperator, m: f64) -> Result<(f64, Mat<c64>, usize), SpectralError> {
    let n = k.dim();
    let op = Companion { k, w, m };
    let dim = 2 * n;
    let steps = 40usize.min(dim - 1);
    let mut v0 = Mat::from_fn(dim, 1, |r, _| c64::new(1.0 + (r % 7) as f64 * 0.1, 0.0));
    let mut last = f64::INFINITY;
    for restart in 0..200 {
        let nv = norm(v0.as_ref());
        v0 /= faer::Scale(c64::new(nv, 0.0));
        let mut basis: Vec<Mat<c64>> = vec![v0.clone()];
        let mut h = Mat::<c64>::zeros(steps + 1, steps);
        let mut used = steps;
        for j in 0..steps {
            let mut z = op.apply(basis[j].as_ref());
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(z.as_ref(), b.as_ref());
                    h[(i, j)] += c;
                    z -= faer::Scale(c) * b;
                }
            }
            let nz = norm(z.as_ref());
            h[(j + 1, j)] = c64::new(nz, 0.0);
            if nz <= 1e-14 * h.as_ref().norm_l2() {
                used = j + 1;
                break;
            }
            z /= faer::Scale(c64::new(nz, 0.0));
            basis.push(z);
        }
        let hm = h.as_ref().submatrix(0, 0, used, used).to_owned();
        let e = hm.eigen().map_err(|e| SpectralError::Convergence(format!("{e:?}")))?;
        let s = e.S().column_vector();
        let mut best = 0;
        for i in 1..s.nrows() {
            if s[i].norm() > s[best].norm() {
                best = i;
            }
        }
        let theta = s[best];
        let u = e.U();
        let mut y = Mat::<c64>::zeros(dim, 1);
        for (i, b) in basis.iter().take(used).enumerate() {
            y += faer::Scale(u[(i, best)]) * b;
        }
        let ny = norm(y.as_ref());
        y /= faer::Scale(c64::new(ny, 0.0));
        let ly = op.apply(y.as_ref());
        let mut r = 0.0;
        for i in 0..dim {
            r += (ly[(i, 0)] - y[(i, 0)] * theta).norm_sqr();
        }
        last = r.sqrt() / theta.norm();
        if last < 1e-12 {
            if !is_real(theta) || theta.re <= 2.0 {
                return Err(SpectralError::NoRealEigenvalue { largest: is_real(theta).then_some(theta.re) });
            }
            let f = y.as_ref().subrows(0, n).to_owned();
            return Ok((theta.re, f, restart + 1));
        }
        v0 = y;
    }
    Err(SpectralError::Convergence(format!("companion Arnoldi stalled at relative residual {last:.2e}")))
}

/// `T_λ = 4(4W² − 1 + 2mλK)/(λ² − 4)`.
struct TLambda<'a> {
    k: &'a dyn HermitianOperator,
    w: &'a dyn HermitianOperator,
    m: f64,
    lambda: f64,
}

impl HermitianOperator for TLambda<'_> {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn apply(&self, x: MatRef<'_, c64>) -> Mat<c64> {
        let wx = self.w.apply(x);
        let wwx = self.w.apply(wx.as_ref());
        let kx = self.k.apply(x);
        let c = 4.0 / (self.lambda * self.lambda - 4.0);
        Mat::from_fn(x.nrows(), x.ncols(), |r, col| {
            (wwx[(r, col)] * 4.0 - x[(r, col)] + kx[(r, col)] * (2.0 * self.m * self.lambda)) * c
        })
    }
}

/// `λ_Ω` as the root of `λ ↦ ‖T_λ‖ − 1`, bracketed by the norm bounds and
/// refined by bisection with false-position steps.
pub fn lambda_omega_bisect(k: &DenseOperator, w: &DenseOperator, m: f64) -> Result<LambdaOmegaResult, SpectralError> {
    lambda_omega_bisect_op(k, w, &k.sqrt_area(), m, &KrylovOptions::default())
}

pub fn lambda_omega_bisect_op(
    k: &dyn HermitianOperator,
    w: &dyn HermitianOperator,
    sqrt_area: &[f64],
    m: f64,
    opts: &KrylovOptions,
) -> Result<LambdaOmegaResult, SpectralError> {
    check_inputs(k, w, sqrt_area, m)?;
    let (nk, nw) = norms(k, w, opts)?;
    let b = BoundsCheck::new(nk, nw, m, 0.0);
    let mut lo = (b.lower * (1.0 - 2.0 * BRACKET_TOL)).max(2.0 + 1e-9);
    let mut hi = b.upper * (1.0 + 2.0 * BRACKET_TOL);
    let mut start: Option<Mat<c64>> = None;
    let eval = |lambda: f64, start: &mut Option<Mat<c64>>| -> Result<(f64, Mat<c64>), SpectralError> {
        let t = TLambda { k, w, m, lambda };
        let e = partial_eig_from(&t, 1, Which::LargestMagnitude, opts, start.as_ref().map(|s| s.as_ref()))?;
        let v = e.vectors.as_ref().subcols(0, 1).to_owned();
        *start = Some(v.clone());
        Ok((e.values[0].abs() - 1.0, v))
    };
    let (mut f_lo, _) = eval(lo, &mut start)?;
    let (mut f_hi, mut v_hi) = eval(hi, &mut start)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(SpectralError::BracketFailure { lower: lo, upper: hi, f_lower: f_lo, f_upper: f_hi });
    }
    let mut iterations = 2;
    let mut side = 0i32;
    while hi - lo > 1e-13 * hi && iterations < 200 {
        // Illinois false position, falling back to bisection when a side
        // stalls.
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) || iterations % 4 == 3 {
            x = 0.5 * (lo + hi);
        }
        let (fx, vx) = eval(x, &mut start)?;
        iterations += 1;
        if fx == 0.0 {
            lo = x;
            hi = x;
            v_hi = vx;
            break;
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            v_hi = vx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    let lambda = 0.5 * (lo + hi);
    finish(k, w, sqrt_area, m, lambda, LambdaMethod::Bisection, v_hi, iterations, opts)
}
