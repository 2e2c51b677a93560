//! End-to-end acceptance run. Prints one line per criterion and fails if any
//! criterion fails. Meshes and reports are shared between criteria.

use std::io::Write;
use std::process::Command;

use shellspec::analysis::{
    coupling_set, eigencurves, endpoint_coupling, identity_ladder, isoperimetric_report, jump_ladder, split_experiment,
    symmetric_grid, CurveOptions, IdentityOptions, ShapeReport,
};
use shellspec::capacity::{capacity, spheroid_capacity_oracle};
use shellspec::mesh::{generate_ellipsoid, generate_icosphere};
use shellspec::Mesh;

const M: f64 = 1.0;

struct Outcome {
    pass: bool,
    details: String,
}

fn outcome(pass: bool, details: String) -> Outcome {
    Outcome { pass, details }
}

fn rel(x: f64, exact: f64) -> f64 {
    (x - exact).abs() / exact.abs()
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

struct Shared {
    spheres: Vec<Mesh>,
    sphere_reports: Vec<ShapeReport>,
    ellipsoid_reports: Vec<(f64, ShapeReport)>,
}

fn sphere_norm_w(s: &Shared) -> Outcome {
    let err: Vec<f64> = s.sphere_reports.iter().map(|r| rel(r.norm_w, 0.5)).collect();
    let last = *err.last().unwrap();
    outcome(decreasing(&err) && last <= 0.02, format!("relative errors {}", fmt(&err)))
}

fn sphere_norm_k_and_capacity(s: &Shared) -> Outcome {
    let four_pi = 4.0 * std::f64::consts::PI;
    let k: Vec<f64> = s.sphere_reports.iter().map(|r| rel(r.norm_k, 1.0)).collect();
    let cap: Vec<f64> = s.sphere_reports.iter().map(|r| rel(r.capacity, four_pi)).collect();
    let ratio: Vec<f64> = s.sphere_reports.iter().map(|r| rel(r.area_over_cap, 1.0)).collect();
    let pass = *k.last().unwrap() <= 0.01 && *cap.last().unwrap() <= 0.01 && decreasing(&ratio) && *ratio.last().unwrap() <= 0.01;
    outcome(pass, format!("‖K‖ errors {}; Cap errors {}; Area/Cap errors {}", fmt(&k), fmt(&cap), fmt(&ratio)))
}

fn ball_lambda(s: &Shared) -> Outcome {
    let ball = 4.0 * (1.0 + 1.25f64.sqrt());
    let err: Vec<f64> = s.sphere_reports.iter().map(|r| rel(r.lambda_omega, ball)).collect();
    let gaps: Vec<f64> = s.sphere_reports.iter().map(|r| r.method_gap.unwrap_or(f64::INFINITY)).collect();
    let pass = *err.last().unwrap() <= 0.02 && gaps.iter().all(|g| *g <= 1e-6);
    outcome(pass, format!("λ errors {}; QEP vs bisection {}", fmt(&err), fmt(&gaps)))
}

fn identities(s: &Shared) -> Outcome {
    let a_list = [0.0, 0.5 * M, -0.5 * M, M, -M];
    match identity_ladder(&s.spheres, M, &a_list, &IdentityOptions::default()) {
        Ok(l) => {
            let worst = l
                .orders
                .iter()
                .filter_map(|(_, o)| o.last())
                .flat_map(|o| o.iter().copied())
                .fold(f64::INFINITY, f64::min);
            let pass = l.converging.iter().all(|(_, ok)| *ok);
            outcome(pass, format!("all decreasing: {pass}; smallest final observed order {worst:.2}"))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn jumps(s: &Shared) -> Outcome {
    let levels: Vec<(&Mesh, f64)> = s.spheres.iter().zip([0.2, 0.1, 0.05]).map(|(m, e)| (m, e)).collect();
    match jump_ladder(&levels, M, 0.0) {
        Ok(l) => {
            let ext: Vec<f64> = l.rows.iter().map(|r| r.exterior_residual).collect();
            let int: Vec<f64> = l.rows.iter().map(|r| r.interior_residual).collect();
            outcome(l.converging, format!("exterior {}; interior {}", fmt(&ext), fmt(&int)))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn monotonicity() -> Outcome {
    let grid = symmetric_grid(M, 0.8, 9);
    let mut pass = true;
    let mut details = Vec::new();
    for (name, axes) in [("sphere", [1.0, 1.0, 1.0]), ("ellipsoid 2,1,1", [2.0, 1.0, 1.0])] {
        let mesh = generate_ellipsoid(axes, 2).unwrap();
        match eigencurves(&mesh, M, &grid, &CurveOptions::default()) {
            Ok(set) => {
                pass &= set.all_increasing && set.max_derivative_gap <= 0.05;
                details.push(format!(
                    "{name}: {} curves, increasing {}, max derivative gap {:.2}%",
                    set.curves.len(),
                    set.all_increasing,
                    100.0 * set.max_derivative_gap
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn symmetries(s: &Shared) -> Outcome {
    let mesh = s.spheres.last().unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for a in [0.0, 0.5 * M] {
        match coupling_set(mesh, M, a, 8) {
            Ok(c) => {
                pass &= c.max_residual <= 1e-2;
                details.push(format!("closure at a={a}: {:.2e}", c.max_residual));
            }
            Err(e) => {
                pass = false;
                details.push(e.to_string());
            }
        }
    }
    match endpoint_coupling(mesh, M, 8) {
        Ok(e) => {
            pass &= e.mirror_residual <= 1e-2 && e.residual <= 1e-2;
            details.push(format!("mirror {:.2e}, endpoint vs λ {:.2e}", e.mirror_residual, e.residual));
        }
        Err(e) => {
            pass = false;
            details.push(e.to_string());
        }
    }
    outcome(pass, details.join("; "))
}

fn isoperimetric_sweep(s: &Shared) -> Outcome {
    let sup: Vec<f64> = s.sphere_reports.iter().map(|r| r.sup_margin).collect();
    let inf: Vec<f64> = s.sphere_reports.iter().map(|r| r.inf_margin.abs()).collect();
    let last = s.sphere_reports.last().unwrap();
    let sphere_ok = decreasing(&sup)
        && decreasing(&inf)
        && last.sup_margin.abs() <= 1e-4 * last.lambda_omega
        && last.inf_margin.abs() <= 1e-4 * last.lambda_omega;
    let e_sup: Vec<f64> = s.ellipsoid_reports.iter().map(|(_, r)| r.sup_margin).collect();
    let e_inf: Vec<f64> = s.ellipsoid_reports.iter().map(|(_, r)| r.inf_margin).collect();
    let ellipsoid_ok = s.ellipsoid_reports.iter().all(|(_, r)| r.constraint_ok && r.sup_margin > 0.0 && r.inf_margin >= 0.0)
        && e_sup.windows(2).all(|w| w[1] > w[0])
        && e_inf.windows(2).all(|w| w[1] > w[0]);
    outcome(
        sphere_ok && ellipsoid_ok,
        format!("sphere sup {} inf {}; ellipsoids 1.5/2/3 sup {} inf {}", fmt(&sup), fmt(&inf), fmt(&e_sup), fmt(&e_inf)),
    )
}

fn splitting() -> Outcome {
    let mesh = generate_icosphere(1.0, 2).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for t in [1.0, 2f64.powf(-1.0 / 3.0)] {
        match split_experiment(&mesh, t, &[4.0, 8.0, 16.0]) {
            Ok(table) => {
                let bounded = table.rows.iter().all(|r| r.within_bound);
                pass &= bounded;
                let far = table.rows.last().unwrap();
                if t < 1.0 {
                    pass &= far.below_original;
                }
                details.push(format!("t={t:.4}: within bound {bounded}, ‖K‖ at |z|=16 {:.4} vs {:.4}", far.norm_k_split, table.norm_k));
            }
            Err(e) => {
                pass = false;
                details.push(e.to_string());
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn polya_szego(s: &Shared) -> Outcome {
    let margins: Vec<f64> =
        s.sphere_reports.iter().chain(s.ellipsoid_reports.iter().map(|(_, r)| r)).map(|r| r.polya_szego_margin).collect();
    let swept_ok = margins.iter().all(|m| *m >= 0.0);
    let oracle = spheroid_capacity_oracle(2.0, 1.0);
    match capacity(&generate_ellipsoid([2.0, 1.0, 1.0], 3).unwrap()) {
        Ok(c) => {
            let err = rel(c.cap, oracle);
            outcome(swept_ok && err <= 0.01, format!("smallest margin {:.3e}; spheroid 2,1 error {:.3}%", margins.iter().copied().fold(f64::INFINITY, f64::min), 100.0 * err))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn determinism() -> Outcome {
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let run = || {
        let o = Command::new(env!("CARGO_BIN_EXE_shellspec"))
            .args(["iso", "--shape", "icosphere:1:2", "--out"])
            .arg(&out)
            .env("SHELLSPEC_THREADS", "2")
            .output()
            .expect("binary runs");
        let json = std::fs::read(out.join("iso.json")).unwrap_or_default();
        let csv = std::fs::read(out.join("iso.csv")).unwrap_or_default();
        (o.status.success(), o.stdout, json, csv)
    };
    let first = run();
    let second = run();
    let pass = first.0 && second.0 && first == second && !first.1.is_empty();
    outcome(pass, format!("stdout {} bytes, identical: {}", first.1.len(), first == second))
}

#[test]
fn acceptance_criteria() {
    let spheres: Vec<Mesh> = (1..=3).map(|s| generate_icosphere(1.0, s).unwrap()).collect();
    let sphere_reports = spheres
        .iter()
        .enumerate()
        .map(|(i, m)| isoperimetric_report(m, M, &format!("icosphere:1:{}", i + 1)).unwrap())
        .collect();
    let ellipsoid_reports = [1.5, 2.0, 3.0]
        .iter()
        .map(|&k| (k, isoperimetric_report(&generate_ellipsoid([k, 1.0, 1.0], 3).unwrap(), M, &format!("ellipsoid:{k},1,1:3")).unwrap()))
        .collect();
    let shared = Shared { spheres, sphere_reports, ellipsoid_reports };

    let results = [
        ("sphere ‖W‖ → 1/2", sphere_norm_w(&shared)),
        ("sphere ‖K‖ and capacity", sphere_norm_k_and_capacity(&shared)),
        ("ball critical coupling", ball_lambda(&shared)),
        ("identity suite", identities(&shared)),
        ("jump relations", jumps(&shared)),
        ("eigencurve monotonicity", monotonicity()),
        ("spectrum symmetries", symmetries(&shared)),
        ("isoperimetric sweep", isoperimetric_sweep(&shared)),
        ("splitting bound", splitting()),
        ("Pólya–Szegő and capacity oracle", polya_szego(&shared)),
        ("determinism", determinism()),
    ];
    // Written to the stdout handle directly so the lines survive output capture.
    let mut out = std::io::stdout().lock();
    for (i, (title, o)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "criterion {:>2} [{verdict}] {title}: {}", i + 1, o.details);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, (_, o))| !o.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
