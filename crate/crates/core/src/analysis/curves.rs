//! Eigencurves `a ↦ c_j(a)` of the shell operator, tracked across a grid by
//! eigenvector overlap, with finite-difference and quadratic-form slopes.

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use super::{analysis_krylov, AnalysisError};
use crate::assembly::{assemble_tables, cgemm, HermitianOperator, QuadratureOptions, ShellKind, ShellOperator};
use crate::kernels::PhysicalParams;
use crate::mesh::SurfaceMesh;
use crate::scalar::Real;
use crate::spectral::{partial_eig, Which};

#[derive(Clone, Debug)]
pub struct CurveOptions {
    /// Number of eigenvalues (largest `|c|` at the middle grid point) whose
    /// clusters are tracked.
    pub tracked: usize,
    /// Eigenpairs computed per grid point; curves leaving this window are
    /// truncated.
    pub window: usize,
    /// Finite-difference step, relative to `m`.
    pub fd_step: f64,
    pub overlap_threshold: f64,
    /// Eigenvalues closer than this (relative to the largest) form one
    /// cluster.
    pub cluster_tol: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            tracked: 8,
            window: 32,
            fd_step: 0.05,
            overlap_threshold: 0.7,
            cluster_tol: 1e-5,
            quadrature: QuadratureOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub a: f64,
    /// Mean eigenvalue of the cluster.
    pub value: f64,
    pub multiplicity: usize,
    /// Overlap with the cluster at the previous grid point (1 at the start).
    pub overlap: f64,
    /// `tr(P ∂_aC P) / d` over the cluster projector `P`.
    pub derivative_form: f64,
    /// Central difference `(c(a+h) − c(a−h)) / 2h`, when both neighbours
    /// could be matched.
    pub derivative_fd: Option<f64>,
    /// `|fd − form| / max(|fd|, |form|)`.
    pub derivative_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigencurve {
    pub index: usize,
    pub points: Vec<CurvePoint>,
    /// Why tracking stopped early, if it did.
    pub truncated: Vec<String>,
    pub strictly_increasing: bool,
    pub form_positive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigencurveSet {
    pub mesh_id: String,
    pub m: f64,
    pub a_grid: Vec<f64>,
    pub fd_step: f64,
    pub curves: Vec<Eigencurve>,
    pub warnings: Vec<String>,
    pub all_increasing: bool,
    pub all_form_positive: bool,
    pub max_derivative_gap: f64,
}

/// Eigenpairs at one `a`, grouped into clusters.
struct Window {
    values: Vec<f64>,
    vectors: Mat<c64>,
    /// Index ranges into `values`, only complete clusters.
    clusters: Vec<std::ops::Range<usize>>,
}

impl Window {
    fn compute<T: Real>(mesh: &SurfaceMesh<T>, m: f64, a: f64, opts: &CurveOptions) -> Result<(Self, Option<Vec<f64>>), AnalysisError> {
        Self::compute_with(mesh, m, a, opts, false)
    }

    /// With `derivative`, also returns the quadratic-form slope of each
    /// cluster.
    fn compute_with<T: Real>(
        mesh: &SurfaceMesh<T>,
        m: f64,
        a: f64,
        opts: &CurveOptions,
        derivative: bool,
    ) -> Result<(Self, Option<Vec<f64>>), AnalysisError> {
        let p = PhysicalParams::new(m, a)?;
        let tables = assemble_tables(mesh, p.kappa(), derivative, &opts.quadrature);
        let op = ShellOperator::new(&tables, ShellKind::C { a: p.a, m: p.m });
        let k = opts.window.min(op.dim());
        let e = partial_eig(&op, k, Which::LargestMagnitude, &analysis_krylov())?;
        // Sort by value so clusters are contiguous.
        let mut idx: Vec<usize> = (0..e.values.len()).collect();
        idx.sort_by(|&i, &j| e.values[j].total_cmp(&e.values[i]));
        let values: Vec<f64> = idx.iter().map(|&i| e.values[i]).collect();
        let vectors = Mat::from_fn(e.vectors.nrows(), idx.len(), |r, c| e.vectors[(r, idx[c])]);
        let scale = values.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut ranges = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || (values[i - 1] - values[i]) > opts.cluster_tol * scale {
                ranges.push(start..i);
                start = i;
            }
        }
        // The smallest-|c| cluster in the window may be cut off.
        let cutoff = values.iter().fold(f64::INFINITY, |s, v| s.min(v.abs()));
        let complete: Vec<_> = if k < op.dim() {
            ranges
                .into_iter()
                .filter(|r| r.clone().all(|i| values[i].abs() > cutoff + opts.cluster_tol * scale))
                .collect()
        } else {
            ranges
        };
        let slopes = derivative.then(|| {
            let d = ShellOperator::new(&tables, ShellKind::DcDa { a: p.a, m: p.m });
            complete
                .iter()
                .map(|r| {
                    let v = vectors.as_ref().subcols(r.start, r.len());
                    let dv = d.apply(v);
                    let g = cgemm(v.adjoint(), dv.as_ref());
                    (0..r.len()).map(|i| g[(i, i)].re).sum::<f64>() / r.len() as f64
                })
                .collect()
        });
        Ok((Self { values, vectors, clusters: complete }, slopes))
    }

    fn mean(&self, c: usize) -> f64 {
        let r = &self.clusters[c];
        self.values[r.clone()].iter().sum::<f64>() / r.len() as f64
    }

    fn block(&self, c: usize) -> MatRef<'_, c64> {
        let r = &self.clusters[c];
        self.vectors.as_ref().subcols(r.start, r.len())
    }
}

/// Smallest fraction of a unit vector in span `a` retained by projecting
/// onto span `b`.
fn subspace_overlap(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let m = cgemm(b.adjoint(), a);
    let g = cgemm(m.adjoint(), m.as_ref());
    let vals = g.self_adjoint_eigenvalues(faer::Side::Lower).unwrap_or_default();
    vals.first().copied().unwrap_or(0.0).clamp(0.0, 1.0).sqrt()
}

/// Greedy maximum-overlap matching of `sources` (clusters of `from`) into
/// clusters of `to`. Returns per source the matched cluster and overlap.
fn match_clusters(from: &Window, sources: &[usize], to: &Window, threshold: f64) -> Vec<Option<(usize, f64)>> {
    let mut cand = Vec::new();
    for (s, &c) in sources.iter().enumerate() {
        for t in 0..to.clusters.len() {
            let o = subspace_overlap(from.block(c), to.block(t));
            if o >= threshold {
                cand.push((o, s, t));
            }
        }
    }
    cand.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut out = vec![None; sources.len()];
    let mut used = vec![false; to.clusters.len()];
    for (o, s, t) in cand {
        if out[s].is_none() && !used[t] {
            out[s] = Some((t, o));
            used[t] = true;
        }
    }
    out
}

/// Tracks the leading eigencurves of `C^a` over `a_grid` (strictly
/// increasing, inside `(−m, m)`).
pub fn eigencurves<T: Real>(
    mesh: &SurfaceMesh<T>,
    m: f64,
    a_grid: &[f64],
    opts: &CurveOptions,
) -> Result<EigencurveSet, AnalysisError> {
    if a_grid.is_empty() || a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::Input("a grid must be nonempty and strictly increasing".into()));
    }
    let h = opts.fd_step * m;
    if a_grid.iter().any(|a| a.abs() + h >= m) {
        return Err(AnalysisError::Input(format!("a grid and step {h} must stay inside (−m, m)")));
    }

    let mut windows = Vec::with_capacity(a_grid.len());
    let mut slopes = Vec::with_capacity(a_grid.len());
    let mut fd = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let (w, s) = Window::compute_with(mesh, m, a, opts, true)?;
        let (lo, _) = Window::compute(mesh, m, a - h, opts)?;
        let (hi, _) = Window::compute(mesh, m, a + h, opts)?;
        let all: Vec<usize> = (0..w.clusters.len()).collect();
        let ml = match_clusters(&w, &all, &lo, opts.overlap_threshold);
        let mh = match_clusters(&w, &all, &hi, opts.overlap_threshold);
        let d: Vec<Option<f64>> = all
            .iter()
            .map(|&c| match (ml[c], mh[c]) {
                (Some((l, _)), Some((u, _))) => Some((hi.mean(u) - lo.mean(l)) / (2.0 * h)),
                _ => None,
            })
            .collect();
        fd.push(d);
        slopes.push(s.expect("derivative requested"));
        windows.push(w);
    }

    // Seed at the middle grid point with the clusters covering the
    // `tracked` largest |c|.
    let mid = a_grid.len() / 2;
    let mut order: Vec<usize> = (0..windows[mid].clusters.len()).collect();
    order.sort_by(|&x, &y| windows[mid].mean(y).abs().total_cmp(&windows[mid].mean(x).abs()).then(x.cmp(&y)));
    let mut seeds = Vec::new();
    let mut count = 0;
    for c in order {
        if count >= opts.tracked {
            break;
        }
        count += windows[mid].clusters[c].len();
        seeds.push(c);
    }

    let mut warnings = Vec::new();
    let point = |g: usize, c: usize, overlap: f64| {
        let form = slopes[g][c];
        let fdv = fd[g][c];
        CurvePoint {
            a: a_grid[g],
            value: windows[g].mean(c),
            multiplicity: windows[g].clusters[c].len(),
            overlap,
            derivative_form: form,
            derivative_fd: fdv,
            derivative_gap: fdv.map(|f| (f - form).abs() / f.abs().max(form.abs())),
        }
    };
    let mut curves: Vec<Eigencurve> = seeds
        .iter()
        .enumerate()
        .map(|(i, &c)| Eigencurve {
            index: i,
            points: vec![point(mid, c, 1.0)],
            truncated: Vec::new(),
            strictly_increasing: true,
            form_positive: true,
        })
        .collect();

    for dir in [1isize, -1] {
        let mut current: Vec<Option<usize>> = seeds.iter().map(|&c| Some(c)).collect();
        let mut g = mid as isize;
        loop {
            let next = g + dir;
            if next < 0 || next as usize >= a_grid.len() {
                break;
            }
            let (gu, nu) = (g as usize, next as usize);
            let live: Vec<usize> = (0..current.len()).filter(|&i| current[i].is_some()).collect();
            let sources: Vec<usize> = live.iter().map(|&i| current[i].unwrap()).collect();
            let matched = match_clusters(&windows[gu], &sources, &windows[nu], opts.overlap_threshold);
            for (k, &i) in live.iter().enumerate() {
                match matched[k] {
                    Some((t, o)) => {
                        let p = point(nu, t, o);
                        if dir > 0 {
                            curves[i].points.push(p);
                        } else {
                            curves[i].points.insert(0, p);
                        }
                        current[i] = Some(t);
                    }
                    None => {
                        let msg = format!(
                            "curve {i}: matching lost between a = {} and a = {} (overlap < {})",
                            a_grid[gu], a_grid[nu], opts.overlap_threshold
                        );
                        curves[i].truncated.push(msg.clone());
                        warnings.push(msg);
                        current[i] = None;
                    }
                }
            }
            g = next;
        }
    }

    let mut max_gap: f64 = 0.0;
    for c in &mut curves {
        c.strictly_increasing = c.points.windows(2).all(|w| w[1].value > w[0].value);
        c.form_positive = c.points.iter().all(|p| p.derivative_form > 0.0);
        for p in &c.points {
            match p.derivative_gap {
                Some(gap) => max_gap = max_gap.max(gap),
                None => warnings.push(format!("curve {}: no finite-difference slope at a = {}", c.index, p.a)),
            }
        }
    }
    Ok(EigencurveSet {
        mesh_id: mesh.id(),
        m,
        a_grid: a_grid.to_vec(),
        fd_step: h,
        all_increasing: curves.iter().all(|c| c.strictly_increasing),
        all_form_positive: curves.iter().all(|c| c.form_positive),
        max_derivative_gap: max_gap,
        curves,
        warnings,
    })
}

/// `n` equally spaced points covering `[−f·m, f·m]`.
pub fn symmetric_grid(m: f64, fraction: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| m * fraction * (-1.0 + 2.0 * i as f64 / (n - 1) as f64)).collect()
}
