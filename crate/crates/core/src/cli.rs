//! Command-line orchestration: run / certify / converge / sample.
//!
//! Exit codes are stable API: 0 success, 1 certification failure,
//! 2 invalid input, 3 precondition or guard failure, 4 runtime abort.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::certify::{
    boundary_divergence_check, certify_production_nonpositive, certify_reduced_nonpositive,
    critical_point_check, monotone_velocity_check, slope_relation_check, unique_zero_slice_check,
    young_inequality_check, CertificationReport, ProductionScanSpec, ScanSpec,
};
use crate::config::{ConfigError, DerivedQuantities, RunConfig, RunManifest, RunStatus};
use crate::fv::{self, FvError, Grid2D, RunResult};
use crate::gas::GasParams;
use crate::riemann::{solve_shock_free, RiemannData, RiemannState};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Runtime(String),
    #[error("certification failed")]
    CertificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CertificationFailed => 1,
            CliError::Invalid(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

fn map_fv(e: FvError) -> CliError {
    match e {
        FvError::InvalidGrid(_) | FvError::InvalidConfig(_) => CliError::Invalid(e.to_string()),
        FvError::Guard { .. } | FvError::Riemann(_) => CliError::Precondition(e.to_string()),
        FvError::AbortedCell { .. } => CliError::Runtime(e.to_string()),
    }
}

fn map_config(e: ConfigError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn io_runtime(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o failure: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "rarewave",
    version,
    about = "Exact rarefaction-wave solutions of the 2-D Euler system, a \
             finite-volume stability testbed, and inequality certification"
)]
pub struct Cli {
    /// Worker threads for certification scans; 0 picks the machine default.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one finite-volume experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reuse an existing output directory instead of failing.
        #[arg(long)]
        force: bool,
    },
    /// Certify the inequality suite and print a JSON report array.
    Certify {
        /// Optional scan spec (JSON); defaults cover the certified window.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory to write certification.json into.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        /// Corrupt the scanned bound on purpose; certification must fail.
        #[arg(long)]
        negative_control: bool,
    },
    /// Refinement study: the same problem with Nx doubled per level.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of levels (at least 3).
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        force: bool,
    },
    /// Write exact-solution profiles at one time as CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        /// Sampling time; defaults to the config's t_end.
        #[arg(long)]
        time: Option<f64>,
    },
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        // Ignore "already initialized": tests drive dispatch repeatedly in
        // one process and the pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match cli.command {
        Command::Run { config, out, force } => cmd_run(&config, out, force),
        Command::Certify {
            config,
            out,
            force,
            negative_control,
        } => cmd_certify(config.as_deref(), out.as_deref(), force, negative_control),
        Command::Converge {
            config,
            out,
            levels,
            force,
        } => cmd_converge(&config, out, levels, force),
        Command::Sample {
            config,
            out,
            force,
            time,
        } => cmd_sample(&config, out.as_deref(), force, time),
    }
}

fn prepare_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() && !force {
        return Err(CliError::Invalid(format!(
            "output directory {} already exists; pass --force to reuse it",
            dir.display()
        )));
    }
    fs::create_dir_all(dir).map_err(io_runtime)
}

/// Comma-joined Display floats; f64's Display is the shortest decimal that
/// round-trips, which keeps reruns byte-identical.
fn push_floats(line: &mut String, values: &[f64]) {
    for v in values {
        if !line.is_empty() {
            line.push(',');
        }
        line.push_str(&format!("{v}"));
    }
}

fn write_timeseries(dir: &Path, result: &RunResult) -> std::io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(dir.join("timeseries.csv"))?);
    writeln!(
        out,
        "t,dt,mass,mom1,mom2,energy,s_min,entropy_prod_min,E_total,E_kinetic,E_thermo,l1_rho,l1_theta,l1_u1,l1_u2"
    )?;
    for row in &result.series {
        let mut line = String::new();
        push_floats(
            &mut line,
            &[
                row.t,
                row.dt,
                row.mass,
                row.mom1,
                row.mom2,
                row.energy,
                row.s_min,
                row.entropy_prod_min,
                row.rel.total,
                row.rel.kinetic,
                row.rel.thermo,
                row.l1[0],
                row.l1[1],
                row.l1[2],
                row.l1[3],
            ],
        );
        writeln!(out, "{line}")?;
    }
    out.flush()
}

fn write_rates(dir: &Path, result: &RunResult) -> std::io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(dir.join("rates.csv"))?);
    writeln!(
        out,
        "t,velocity_gradient,entropy_transport,density,young_bound,young_majorized,total"
    )?;
    for row in &result.series {
        let mut line = String::new();
        push_floats(
            &mut line,
            &[
                row.t,
                row.rhs.velocity_gradient,
                row.rhs.entropy_transport,
                row.rhs.density,
                row.rhs.young_bound,
                row.rhs.young_majorized,
                row.rhs.total(),
            ],
        );
        writeln!(out, "{line}")?;
    }
    out.flush()
}

#[derive(Serialize)]
struct SnapshotHeader<'a> {
    nx: usize,
    ny: usize,
    time: f64,
    requested_time: f64,
    variable: &'a str,
    byte_order: &'a str,
    layout: &'a str,
}

fn write_snapshots(dir: &Path, result: &RunResult) -> std::io::Result<()> {
    for (k, snap) in result.snapshots.iter().enumerate() {
        let vars: [(&str, &Vec<f64>); 4] = [
            ("rho", &snap.fields.rho),
            ("m1", &snap.fields.m1),
            ("m2", &snap.fields.m2),
            ("e_tot", &snap.fields.e_tot),
        ];
        for (name, data) in vars {
            let stem = format!("snap_{k:03}_{name}");
            let mut bin = BufWriter::new(fs::File::create(dir.join(format!("{stem}.bin")))?);
            for v in data {
                bin.write_all(&v.to_le_bytes())?;
            }
            bin.flush()?;
            let header = SnapshotHeader {
                nx: snap.fields.nx,
                ny: snap.fields.ny,
                time: snap.time,
                requested_time: snap.requested_time,
                variable: name,
                byte_order: "little_endian",
                layout: "row_major_i_fastest",
            };
            let json = serde_json::to_string_pretty(&header).expect("header serializes");
            fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        }
    }
    Ok(())
}

fn write_run_outputs(dir: &Path, result: &RunResult) -> std::io::Result<()> {
    write_timeseries(dir, result)?;
    write_rates(dir, result)?;
    write_snapshots(dir, result)?;
    let summary = serde_json::to_string_pretty(&result.summary).expect("summary serializes");
    fs::write(dir.join("summary.json"), summary + "\n")
}

/// Run one configured experiment into `dir` (already prepared): manifest
/// first, outputs, manifest finalized. The manifest survives failures with
/// the matching exit status recorded.
fn run_into_dir(config: &RunConfig, dir: &Path) -> Result<RunResult, CliError> {
    let manifest_path = dir.join("manifest.json");
    let start = Instant::now();
    let sol = match solve_shock_free(&config.riemann, &config.gas) {
        Ok(sol) => sol,
        Err(e) => {
            let err = CliError::Precondition(e.to_string());
            let mut manifest = RunManifest::running(config, None);
            manifest.finalize(
                RunStatus::Failed,
                start.elapsed().as_secs_f64(),
                err.exit_code(),
                Some(e.to_string()),
            );
            manifest.write_atomic(&manifest_path).map_err(io_runtime)?;
            return Err(err);
        }
    };
    let mut manifest = RunManifest::running(config, Some(DerivedQuantities::from_solution(&sol)));
    manifest.write_atomic(&manifest_path).map_err(io_runtime)?;

    let outcome = fv::run(
        &config.grid,
        &config.solver,
        &config.riemann,
        &config.gas,
        config.perturbation.as_ref(),
    )
    .map_err(map_fv)
    .and_then(|result| {
        write_run_outputs(dir, &result).map_err(io_runtime)?;
        Ok(result)
    });
    let wall = start.elapsed().as_secs_f64();
    match outcome {
        Ok(result) => {
            manifest.finalize(RunStatus::Completed, wall, 0, None);
            manifest.write_atomic(&manifest_path).map_err(io_runtime)?;
            Ok(result)
        }
        Err(e) => {
            manifest.finalize(RunStatus::Failed, wall, e.exit_code(), Some(e.to_string()));
            manifest.write_atomic(&manifest_path).map_err(io_runtime)?;
            Err(e)
        }
    }
}

fn resolve_out_dir(config: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.or_else(|| config.out_dir.clone()).ok_or_else(|| {
        CliError::Invalid("no output directory: pass --out or set out_dir in the config".into())
    })
}

fn cmd_run(config_path: &Path, out: Option<PathBuf>, force: bool) -> Result<(), CliError> {
    let config = RunConfig::from_path(config_path).map_err(map_config)?;
    let dir = resolve_out_dir(&config, out)?;
    prepare_dir(&dir, force)?;
    run_into_dir(&config, &dir).map(|_| ())
}

/// Everything `certify` scans, with defaults matching the certified claims.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySpec {
    pub scan: ScanSpec,
    pub production: ProductionScanSpec,
    pub young: YoungSpec,
    pub fan: FanSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YoungSpec {
    pub samples: u64,
    pub seed: u64,
}

impl Default for YoungSpec {
    fn default() -> Self {
        YoungSpec {
            samples: 1_000_000,
            seed: 7,
        }
    }
}

/// The concrete fan problem whose slope identity and velocity monotonicity
/// are certified.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FanSpec {
    pub c_v: f64,
    /// (rho, theta, u) of the left state.
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub slope_samples: usize,
    pub monotone_samples: usize,
}

impl Default for FanSpec {
    fn default() -> Self {
        FanSpec {
            c_v: 1.5,
            left: [1.0, 1.0, 0.0],
            right: [1.0, 1.0, 0.5],
            slope_samples: 10_000,
            monotone_samples: 20_000,
        }
    }
}

impl FanSpec {
    fn data(&self) -> RiemannData {
        let state = |v: [f64; 3]| RiemannState {
            rho: v[0],
            theta: v[1],
            u: v[2],
        };
        RiemannData {
            left: state(self.left),
            right: state(self.right),
        }
    }
}

pub fn run_certifications(spec: &CertifySpec) -> Result<Vec<CertificationReport>, CliError> {
    spec.scan.validate().map_err(CliError::Invalid)?;
    spec.production.validate().map_err(CliError::Invalid)?;
    let fan_gas = GasParams::new(spec.fan.c_v).map_err(|e| CliError::Invalid(e.to_string()))?;
    let sol = solve_shock_free(&spec.fan.data(), &fan_gas)
        .map_err(|e| CliError::Precondition(e.to_string()))?;

    let mut reports = Vec::new();
    reports.push(certify_reduced_nonpositive(&spec.scan));
    let z_points = spec.scan.z.points();
    let control = spec.scan.negative_control;
    let mut critical = Vec::new();
    let mut zero = Vec::new();
    let mut boundary = Vec::new();
    for &c_v in &spec.scan.c_v {
        let gas = GasParams::new(c_v).map_err(|e| CliError::Invalid(e.to_string()))?;
        critical.push(critical_point_check(&z_points, &gas, control));
        zero.push(unique_zero_slice_check(&spec.scan.y, &gas, control));
        boundary.push(boundary_divergence_check(&spec.scan, &gas, control));
    }
    reports.push(CertificationReport::merge(critical));
    reports.push(CertificationReport::merge(zero));
    reports.push(CertificationReport::merge(boundary));
    reports.push(certify_production_nonpositive(&spec.production));
    reports.push(young_inequality_check(spec.young.samples, spec.young.seed));
    reports.push(slope_relation_check(&sol, spec.fan.slope_samples));
    reports.push(monotone_velocity_check(&sol, spec.fan.monotone_samples));
    Ok(reports)
}

fn cmd_certify(
    config: Option<&Path>,
    out: Option<&Path>,
    force: bool,
    negative_control: bool,
) -> Result<(), CliError> {
    let mut spec = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<CertifySpec>(&text)
                .map_err(|e| CliError::Invalid(format!("cannot parse {}: {e}", path.display())))?
        }
        None => CertifySpec::default(),
    };
    if negative_control {
        spec.scan.negative_control = true;
    }
    let reports = run_certifications(&spec)?;
    for r in &reports {
        eprintln!(
            "{} {} (max violation {:e}, tolerance {:e}, {} samples)",
            if r.passed { "PASS" } else { "FAIL" },
            r.claim,
            r.max_violation,
            r.tolerance,
            r.samples
        );
    }
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    println!("{json}");
    if let Some(dir) = out {
        prepare_dir(dir, force)?;
        fs::write(dir.join("certification.json"), json + "\n").map_err(io_runtime)?;
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(CliError::CertificationFailed)
    }
}

fn order_between(prev: f64, cur: f64) -> Option<f64> {
    if prev > 0.0 && cur > 0.0 {
        let o = (prev / cur).log2();
        o.is_finite().then_some(o)
    } else {
        None
    }
}

fn cmd_converge(
    config_path: &Path,
    out: Option<PathBuf>,
    levels: usize,
    force: bool,
) -> Result<(), CliError> {
    if levels < 3 {
        return Err(CliError::Invalid(format!(
            "a convergence study needs at least 3 levels, got {levels}"
        )));
    }
    let base = RunConfig::from_path(config_path).map_err(map_config)?;
    let dir = resolve_out_dir(&base, out)?;
    prepare_dir(&dir, force)?;

    struct LevelRow {
        level: usize,
        nx: usize,
        ny: usize,
        h: f64,
        l1: [f64; 4],
        e_total: f64,
    }
    let mut rows: Vec<LevelRow> = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 1usize
            .checked_shl(level as u32)
            .filter(|f| base.grid.nx().checked_mul(*f).is_some())
            .ok_or_else(|| CliError::Invalid(format!("level {level} overflows the cell count")))?;
        let nx = base.grid.nx() * factor;
        let grid = Grid2D::new(base.grid.lx(), nx, base.grid.ny()).map_err(map_fv)?;
        let mut config = base.clone();
        config.grid = grid;
        config.out_dir = None;
        let level_dir = dir.join(format!("level_{level}"));
        prepare_dir(&level_dir, force)?;
        let result = run_into_dir(&config, &level_dir)?;
        rows.push(LevelRow {
            level,
            nx,
            ny: grid.ny(),
            h: grid.dx(),
            l1: result.summary.final_l1,
            e_total: result.summary.final_energy.total,
        });
    }

    let mut out_csv = String::new();
    out_csv.push_str(
        "level,nx,ny,h,l1_rho,l1_theta,l1_u1,l1_u2,e_total,order_rho,order_theta,order_u1,order_u2,order_e_total\n",
    );
    for (k, row) in rows.iter().enumerate() {
        let mut line = format!("{},{},{},{}", row.level, row.nx, row.ny, row.h);
        for v in row.l1 {
            line.push_str(&format!(",{v}"));
        }
        line.push_str(&format!(",{}", row.e_total));
        let prev = (k > 0).then(|| &rows[k - 1]);
        let mut push_order = |p: Option<f64>| match p {
            Some(o) => line.push_str(&format!(",{o}")),
            None => line.push_str(",NA"),
        };
        for m in 0..4 {
            push_order(prev.and_then(|p| order_between(p.l1[m], row.l1[m])));
        }
        push_order(prev.and_then(|p| order_between(p.e_total, row.e_total)));
        out_csv.push_str(&line);
        out_csv.push('\n');
    }
    fs::write(dir.join("convergence.csv"), out_csv).map_err(io_runtime)?;
    Ok(())
}

fn cmd_sample(
    config_path: &Path,
    out: Option<&Path>,
    force: bool,
    time: Option<f64>,
) -> Result<(), CliError> {
    let config = RunConfig::from_path(config_path).map_err(map_config)?;
    let t = time.unwrap_or(config.solver.t_end);
    if !(t.is_finite() && t >= 0.0) {
        return Err(CliError::Invalid(format!(
            "sampling time must be nonnegative and finite, got {t}"
        )));
    }
    let sol = solve_shock_free(&config.riemann, &config.gas)
        .map_err(|e| CliError::Precondition(e.to_string()))?;
    let xs: Vec<f64> = (0..config.grid.nx())
        .map(|i| config.grid.x1_center(i))
        .collect();
    let states = sol
        .sample_field(t, &xs)
        .map_err(|e| CliError::Precondition(e.to_string()))?;

    let mut csv = String::from("x1,rho,theta,u,pressure,entropy\n");
    for (x, st) in xs.iter().zip(&states) {
        let pressure = st.rho * st.theta;
        let entropy = config
            .gas
            .entropy(st.rho, st.theta)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut line = String::new();
        push_floats(&mut line, &[*x, st.rho, st.theta, st.u, pressure, entropy]);
        csv.push_str(&line);
        csv.push('\n');
    }
    match out {
        Some(path) => {
            if path.exists() && !force {
                return Err(CliError::Invalid(format!(
                    "output file {} already exists; pass --force to replace it",
                    path.display()
                )));
            }
            fs::write(path, csv).map_err(io_runtime)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
