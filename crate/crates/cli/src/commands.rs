//! Subcommands.

use std::path::PathBuf;
use std::time::{Instant, SystemTime};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shellspec::analysis::{
    coupling_set_from, eigencurves, endpoint_coupling, identity_ladder, isoperimetric_report, jump_ladder,
    sphere_checks, split_experiment, CouplingSet, CurveOptions, EigencurveSet, EndpointCoupling, IdentityLadder,
    IdentityOptions, JumpLadder, ShapeReport, SphereChecks, SplitTable,
};
use shellspec::assembly::{
    assemble_tables, dense_from_tables, mesh_hash64, write_dump, DumpHeader, QuadratureOptions, ShellKind,
    ShellOperator,
};
use shellspec::capacity::{ball_capacity, capacity_from, CapacityReport};
use shellspec::mesh::{mesh_stats, write_off, MeshStats};
use shellspec::report::LongTable;
use shellspec::shapes::ShapeSpec;
use shellspec::spectral::{lambda_omega_bisect_op, lambda_omega_qep_op, KrylovOptions, LambdaOmegaResult};
use shellspec::{Mesh, Params};

use crate::config::{Experiment, GridSpec, RunConfig};
use crate::output::Emitter;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "shellspec", version, about = "Spectral analysis of Dirac shell interactions on closed surfaces")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Shape as kind:params:subdiv, e.g. icosphere:1.0:3 or ellipsoid:2,1,1:{1,2,3}.
    #[arg(long, global = true)]
    shape: Option<String>,
    /// Mass m > 0.
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Directory for report, CSV and metadata files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides SHELLSPEC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build meshes and report their statistics; writes OFF files with --out.
    Mesh {
        #[command(flatten)]
        common: Common,
    },
    /// Operator identities and jump relations along a refinement ladder.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated spectral parameters.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<f64>>,
        /// Also compute full-space residual norms (slow).
        #[arg(long)]
        full_norms: bool,
        /// Normal offset at the coarsest level; halved per level.
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
    },
    /// Leading eigenvalues of the shell operator and their coupling constants.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Comma-separated spectral parameters.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Option<Vec<f64>>,
        /// Number of tracked eigenvalues.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Also report the endpoint couplings at a = ±m.
        #[arg(long)]
        endpoint: bool,
        /// Write the dense operator at the first a to this binary file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Critical coupling λ_Ω by the quadratic eigenproblem and by bisection.
    Lambda {
        #[command(flatten)]
        common: Common,
    },
    /// Newtonian capacity.
    Capacity {
        #[command(flatten)]
        common: Common,
    },
    /// Isoperimetric report for one shape.
    Iso {
        #[command(flatten)]
        common: Common,
    },
    /// Single-layer norm on two separated scaled copies.
    Split {
        #[command(flatten)]
        common: Common,
        /// Scale factor applied to both copies.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Comma-separated translation lengths.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        z: Vec<f64>,
    },
    /// Eigencurves over a grid of spectral parameters.
    Curves {
        #[command(flatten)]
        common: Common,
        /// Grid as min:max:points (default −0.8m:0.8m:9).
        #[arg(long, allow_hyphen_values = true)]
        a_grid: Option<String>,
        /// Number of tracked eigenvalues.
        #[arg(long, default_value_t = 8)]
        k: usize,
    },
    /// Isoperimetric reports over a list of shapes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Semicolon-separated shapes.
        #[arg(long)]
        shapes: Option<String>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Mesh { common }
            | Self::Verify { common, .. }
            | Self::Spectrum { common, .. }
            | Self::Lambda { common }
            | Self::Capacity { common }
            | Self::Iso { common }
            | Self::Split { common, .. }
            | Self::Curves { common, .. }
            | Self::Sweep { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Mesh { .. } => "mesh",
            Self::Verify { .. } => "verify",
            Self::Spectrum { .. } => "spectrum",
            Self::Lambda { .. } => "lambda",
            Self::Capacity { .. } => "capacity",
            Self::Iso { .. } => "iso",
            Self::Split { .. } => "split",
            Self::Curves { .. } => "curves",
            Self::Sweep { .. } => "sweep",
        }
    }
}

fn resolve(cmd: &Command) -> Result<RunConfig, CliError> {
    let c = cmd.common();
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &c.shape {
        cfg.shape = Some(s.clone());
    }
    if let Some(m) = c.m {
        cfg.m = m;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    if let Some(t) = c.threads {
        cfg.threads = Some(t);
    }
    match cmd {
        Command::Verify { a: Some(a), .. } | Command::Spectrum { a: Some(a), .. } => cfg.a = a.clone(),
        Command::Curves { a_grid: Some(g), .. } => cfg.a_grid = Some(GridSpec::parse(g)?),
        Command::Sweep { shapes: Some(s), .. } => {
            cfg.shapes = s.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count(cfg: &RunConfig) -> Result<usize, CliError> {
    if let Some(t) = cfg.threads {
        return Ok(t);
    }
    match std::env::var("SHELLSPEC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Validation(format!("SHELLSPEC_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let cmd = cli.command;
    let cfg = resolve(&cmd)?;
    let threads = thread_count(&cfg)?;
    // Fails only if a pool already exists, which cannot happen here.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let emitter = Emitter { command: cmd.name(), started: Instant::now(), started_at: SystemTime::now(), threads };
    match &cmd {
        Command::Mesh { .. } => mesh_cmd(&cfg, &emitter),
        Command::Verify { full_norms, eps, .. } => verify_cmd(&cfg, &emitter, *full_norms, *eps),
        Command::Spectrum { k, endpoint, dump, .. } => spectrum_cmd(&cfg, &emitter, *k, *endpoint, dump.as_deref()),
        Command::Lambda { .. } => lambda_cmd(&cfg, &emitter),
        Command::Capacity { .. } => capacity_cmd(&cfg, &emitter),
        Command::Iso { .. } => iso_cmd(&cfg, &emitter),
        Command::Split { t, z, .. } => split_cmd(&cfg, &emitter, *t, z),
        Command::Curves { k, .. } => curves_cmd(&cfg, &emitter, *k),
        Command::Sweep { .. } => sweep_cmd(&cfg, &emitter),
    }
}

fn build(shape: &ShapeSpec) -> Result<Mesh, CliError> {
    Ok(shape.build()?)
}

#[derive(Serialize)]
struct MeshEntry {
    shape: String,
    mesh_id: String,
    stats: MeshStats,
    normal_flux: [f64; 3],
}

fn mesh_cmd(cfg: &RunConfig, em: &Emitter) -> Result<u8, CliError> {
    let mut entries = Vec::new();
    let mut table = LongTable::default();
    let mut files = Vec::new();
    for (i, shape) in cfg.shape_ladder()?.iter().enumerate() {
        let mesh = build(shape)?;
        let e = MeshEntry { shape: shape.to_string(), mesh_id: mesh.id(), stats: mesh_stats(&mesh), normal_flux: mesh.normal_flux() };
        table.push_record(&e.shape, cfg.m, None, &e.stats)?;
        files.push((format!("mesh_{i}.off"), write_off(&mesh)));
        entries.push(e);
    }
    em.emit(cfg, &entries, &table, &files)?;
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport {
    shapes: Vec<String>,
    identities: IdentityLadder,
    jump: JumpLadder,
    epsilons: Vec<f64>,
    sphere: Vec<SphereChecks>,
}

fn verify_cmd(cfg: &RunConfig, em: &Emitter, full_norms: bool, eps: f64) -> Result<u8, CliError> {
    if !(eps > 0.0) {
        return Err(CliError::Validation("eps must be positive".into()));
    }
    let shapes = cfg.shape_ladder()?;
    let meshes = shapes.iter().map(build).collect::<Result<Vec<_>, _>>()?;
    let a_list = if cfg.a.is_empty() { vec![0.0, 0.5 * cfg.m, cfg.m] } else { cfg.a.clone() };
    let opts = IdentityOptions { full_norms, ..Default::default() };
    let identities = identity_ladder(&meshes, cfg.m, &a_list, &opts)?;
    let epsilons: Vec<f64> = (0..meshes.len()).map(|i| eps / 2f64.powi(i as i32)).collect();
    let levels: Vec<(&Mesh, f64)> = meshes.iter().zip(epsilons.iter().copied()).collect();
    let jump = jump_ladder(&levels, cfg.m, 0.0)?;
    let sphere = shapes
        .iter()
        .zip(&meshes)
        .filter(|(s, _)| matches!(s, ShapeSpec::Icosphere { .. }))
        .map(|(_, m)| sphere_checks(m, 8, 0x5eed))
        .collect();

    let mut table = LongTable::default();
    for (r, s) in identities.rows.iter().zip(shapes.iter().flat_map(|s| std::iter::repeat_n(s, a_list.len()))) {
        table.push_record(&s.to_string(), cfg.m, Some(r.a), r)?;
    }
    for (r, s) in jump.rows.iter().zip(&shapes) {
        table.push_record(&s.to_string(), cfg.m, Some(0.0), r)?;
    }
    let report = VerifyReport { shapes: shapes.iter().map(|s| s.to_string()).collect(), identities, jump, epsilons, sphere };
    em.emit(cfg, &report, &table, &[])?;
    Ok(0)
}

#[derive(Serialize)]
struct SpectrumReport {
    shape: String,
    coupling: Vec<CouplingSet>,
    endpoint: Option<EndpointCoupling>,
}

fn spectrum_cmd(cfg: &RunConfig, em: &Emitter, k: usize, endpoint: bool, dump: Option<&std::path::Path>) -> Result<u8, CliError> {
    let shape = cfg.single_shape()?;
    let mesh = build(&shape)?;
    let a_list = if cfg.a.is_empty() { vec![0.0] } else { cfg.a.clone() };
    let mut coupling = Vec::new();
    let mut want_endpoint = endpoint;
    let mut table = LongTable::default();
    for &a in &a_list {
        let p = Params::new(cfg.m, a)?;
        if p.a.abs() >= p.m {
            want_endpoint = true;
            continue;
        }
        let tables = assemble_tables(&mesh, p.kappa(), false, &QuadratureOptions::default());
        let set = coupling_set_from(&mesh, &tables, cfg.m, a, k)?;
        for (i, (c, pc)) in set.eigenvalues.iter().zip(&set.partners).enumerate() {
            table.push(&shape.to_string(), cfg.m, Some(a), &format!("eigenvalue.{i}"), *c);
            table.push(&shape.to_string(), cfg.m, Some(a), &format!("partner_residual.{i}"), pc.residual);
        }
        coupling.push(set);
    }
    if let Some(path) = dump {
        let a = a_list[0];
        let p = Params::new(cfg.m, a)?;
        let tables = assemble_tables(&mesh, p.kappa(), false, &QuadratureOptions::default());
        let op = dense_from_tables(&tables, ShellKind::C { a: p.a, m: p.m });
        let header = DumpHeader { panels: mesh.num_panels() as u64, components: 4, a: p.a, m: p.m, mesh_hash: mesh_hash64(&mesh.content_hash()) };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_dump(&mut f, &op, &header)?;
    }
    let endpoint = if want_endpoint {
        let e = endpoint_coupling(&mesh, cfg.m, k)?;
        table.push_record(&shape.to_string(), cfg.m, Some(cfg.m), &e)?;
        Some(e)
    } else {
        None
    };
    em.emit(cfg, &SpectrumReport { shape: shape.to_string(), coupling, endpoint }, &table, &[])?;
    Ok(0)
}

#[derive(Serialize)]
struct LambdaReport {
    shape: String,
    m: f64,
    qep: Option<LambdaOmegaResult>,
    qep_error: Option<String>,
    bisection: Option<LambdaOmegaResult>,
    bisection_error: Option<String>,
    /// `|qep − bisection| / qep`.
    agreement: Option<f64>,
    /// Closed-form value for a round ball of the same radius.
    ball_reference: Option<f64>,
}

fn lambda_cmd(cfg: &RunConfig, em: &Emitter) -> Result<u8, CliError> {
    let shape = cfg.single_shape()?;
    let mesh = build(&shape)?;
    let tables = assemble_tables(&mesh, 0.0, false, &QuadratureOptions::default());
    let k = ShellOperator::new(&tables, ShellKind::K);
    let w = ShellOperator::new(&tables, ShellKind::W);
    let opts = KrylovOptions::default();
    let qep = lambda_omega_qep_op(&k, &w, tables.sqrt_area(), cfg.m, &opts);
    let bis = lambda_omega_bisect_op(&k, &w, tables.sqrt_area(), cfg.m, &opts);
    let agreement = match (&qep, &bis) {
        (Ok(q), Ok(b)) => Some((q.lambda_omega - b.lambda_omega).abs() / q.lambda_omega),
        _ => None,
    };
    let ball_reference = match shape {
        ShapeSpec::Icosphere { radius, .. } => Some(shellspec::analysis::coupling_bounds(cfg.m, radius).0),
        _ => None,
    };
    let failed = qep.is_err() || bis.is_err();
    let (qep, qep_error) = split_result(qep);
    let (bisection, bisection_error) = split_result(bis);
    let mut table = LongTable::default();
    let s = shape.to_string();
    if let Some(q) = &qep {
        table.push(&s, cfg.m, None, "lambda_omega.qep", q.lambda_omega);
        table.push_record(&s, cfg.m, None, &q.bounds)?;
    }
    if let Some(b) = &bisection {
        table.push(&s, cfg.m, None, "lambda_omega.bisection", b.lambda_omega);
    }
    let report = LambdaReport { shape: s, m: cfg.m, qep, qep_error, bisection, bisection_error, agreement, ball_reference };
    em.emit(cfg, &report, &table, &[])?;
    if failed {
        eprintln!("error: spectral: λ_Ω could not be computed by both methods (see report)");
        return Ok(2);
    }
    Ok(0)
}

fn split_result<T, E: std::fmt::Display>(r: Result<T, E>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(format!("spectral: {e}"))),
    }
}

#[derive(Serialize)]
struct CapacityOut {
    shape: String,
    report: CapacityReport,
    oracle: Option<f64>,
    relative_error: Option<f64>,
    ball_capacity: f64,
}

fn capacity_cmd(cfg: &RunConfig, em: &Emitter) -> Result<u8, CliError> {
    let shape = cfg.single_shape()?;
    let mesh = build(&shape)?;
    let tables = assemble_tables(&mesh, 0.0, false, &QuadratureOptions::default());
    let report = capacity_from(&mesh, &tables)?;
    let oracle = shape.capacity_oracle();
    let out = CapacityOut {
        shape: shape.to_string(),
        relative_error: oracle.map(|o| (report.cap - o).abs() / o),
        oracle,
        ball_capacity: ball_capacity(report.volume),
        report,
    };
    let mut table = LongTable::default();
    table.push_record(&out.shape, cfg.m, None, &out)?;
    em.emit(cfg, &out, &table, &[])?;
    Ok(0)
}

fn iso_cmd(cfg: &RunConfig, em: &Emitter) -> Result<u8, CliError> {
    let shape = cfg.single_shape()?;
    let mesh = build(&shape)?;
    let r = isoperimetric_report(&mesh, cfg.m, &shape.to_string())?;
    let mut table = LongTable::default();
    table.push_record(&r.shape, cfg.m, None, &r)?;
    em.emit(cfg, &r, &table, &[])?;
    Ok(0)
}

fn split_cmd(cfg: &RunConfig, em: &Emitter, t: f64, z: &[f64]) -> Result<u8, CliError> {
    if !(t > 0.0) || z.is_empty() {
        return Err(CliError::Validation("split needs t > 0 and at least one |z|".into()));
    }
    let shape = match &cfg.shape {
        Some(_) => cfg.single_shape()?,
        None => ShapeSpec::Icosphere { radius: 1.0, subdivisions: 2 },
    };
    let mesh = build(&shape)?;
    let r: SplitTable = split_experiment(&mesh, t, z)?;
    let mut table = LongTable::default();
    for row in &r.rows {
        table.push_record(&format!("{shape}|t={t}|z={}", row.z), cfg.m, None, row)?;
    }
    em.emit(cfg, &r, &table, &[])?;
    Ok(0)
}

fn curves_cmd(cfg: &RunConfig, em: &Emitter, k: usize) -> Result<u8, CliError> {
    let shape = cfg.single_shape()?;
    let mesh = build(&shape)?;
    let grid = cfg.a_grid.unwrap_or(GridSpec { min: -0.8 * cfg.m, max: 0.8 * cfg.m, points: 9 }).values();
    let mut opts = CurveOptions { tracked: k, ..Default::default() };
    if let Some(o) = cfg.tolerances.overlap {
        opts.overlap_threshold = o;
    }
    if let Some(h) = cfg.tolerances.fd_step {
        opts.fd_step = h;
    }
    let set: EigencurveSet = eigencurves(&mesh, cfg.m, &grid, &opts)?;
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let mut table = LongTable::default();
    for c in &set.curves {
        for p in &c.points {
            let s = shape.to_string();
            table.push(&s, cfg.m, Some(p.a), &format!("curve.{}.value", c.index), p.value);
            table.push(&s, cfg.m, Some(p.a), &format!("curve.{}.derivative_form", c.index), p.derivative_form);
            if let Some(fd) = p.derivative_fd {
                table.push(&s, cfg.m, Some(p.a), &format!("curve.{}.derivative_fd", c.index), fd);
            }
        }
    }
    em.emit(cfg, &set, &table, &[])?;
    Ok(0)
}

#[derive(Serialize)]
struct SweepEntry {
    shape: String,
    aspect: Option<f64>,
    report: Option<ShapeReport>,
    error: Option<String>,
}

fn sweep_cmd(cfg: &RunConfig, em: &Emitter) -> Result<u8, CliError> {
    if cfg.shapes.is_empty() {
        return Err(CliError::Validation("sweep needs a nonempty shape list".into()));
    }
    if cfg.experiments.iter().any(|e| !matches!(e, Experiment::Iso | Experiment::Capacity | Experiment::Lambda)) {
        return Err(CliError::Validation("sweep supports the experiments iso, capacity and lambda".into()));
    }
    let mut entries = Vec::new();
    let mut table = LongTable::default();
    let mut numerical = 0;
    for spec in &cfg.shapes {
        let run = || -> Result<(ShapeSpec, ShapeReport), CliError> {
            let shape: ShapeSpec = spec.parse().map_err(shellspec::Error::from)?;
            let mesh = build(&shape)?;
            let r = isoperimetric_report(&mesh, cfg.m, &shape.to_string())?;
            Ok((shape, r))
        };
        match run() {
            Ok((shape, r)) => {
                table.push_record(&r.shape, cfg.m, None, &r)?;
                entries.push(SweepEntry { shape: r.shape.clone(), aspect: shape.aspect(), report: Some(r), error: None });
            }
            Err(e) => {
                if e.exit_code() == 2 {
                    numerical += 1;
                }
                eprintln!("warning: shape {spec} failed: {e}");
                entries.push(SweepEntry { shape: spec.clone(), aspect: None, report: None, error: Some(e.to_string()) });
            }
        }
    }
    let mut dat = String::from("# aspect sup_margin inf_margin volume_margin shape\n");
    let mut rows: Vec<&SweepEntry> = entries.iter().filter(|e| e.report.is_some() && e.aspect.is_some()).collect();
    rows.sort_by(|a, b| a.aspect.partial_cmp(&b.aspect).unwrap_or(std::cmp::Ordering::Equal));
    for e in rows {
        let r = e.report.as_ref().expect("filtered");
        dat.push_str(&format!(
            "{:.16e} {:.16e} {:.16e} {:.16e} {}\n",
            e.aspect.expect("filtered"),
            r.sup_margin,
            r.inf_margin,
            r.volume_margin,
            e.shape
        ));
    }
    em.emit(cfg, &entries, &table, &[("sweep_margins.dat".to_string(), dat)])?;
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    Ok(match failed {
        0 => 0,
        n if n < entries.len() => 0,
        _ if numerical > 0 => 2,
        _ => 1,
    })
}
