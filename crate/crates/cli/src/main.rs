//! `torus-dirac`: verification harness for the solid-torus Dirac operator.
//!
//! Exit status 0 when every gate passes, 1 when a gate fails, 2 on
//! configuration or usage errors.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_modes, parse_tol, FileConfig, Overrides, RunConfig};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use torus_dirac::bessel::suite::{Exact, PerturbedK};
use torus_dirac::mode_space::make_grid;
use torus_dirac::verify::{self, Gate, SuiteReport};

#[derive(Parser)]
#[command(name = "torus-dirac", version, about = "Verification suites for the torus Dirac operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wronskian sweep and the Bessel inequality suite.
    BesselVerify(Common),
    /// `DQ = I` and `QD = I` residuals on seeded fields.
    QResidual(Common),
    /// Green's pairing on in-domain and unconstrained pairs.
    Selfadjoint(Common),
    /// Boundary functional of the regular homogeneous solutions.
    KernelCheck(Common),
    /// HS norms, Schur-Young bounds and the decay envelope.
    NormsTable(Common),
    /// Schatten partial sums under truncation doubling.
    Schatten(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Truncation `M,N`.
    #[arg(long, value_parser = parse_modes)]
    modes: Option<(u32, u32)>,
    /// `name=value`, repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Comma-separated Schatten exponents.
    #[arg(long = "p", value_delimiter = ',', num_args = 1..)]
    p: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seeded samples per mode.
    #[arg(long)]
    fields: Option<usize>,
    /// Singular values of each scalar operator in the norms table.
    #[arg(long)]
    svd: bool,
    /// Multiply every `K_n` by `1 + eps` (fault injection).
    #[arg(long, hide = true)]
    perturb_k: Option<f64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BesselVerify(_) => "bessel-verify",
            Command::QResidual(_) => "q-residual",
            Command::Selfadjoint(_) => "selfadjoint",
            Command::KernelCheck(_) => "kernel-check",
            Command::NormsTable(_) => "norms-table",
            Command::Schatten(_) => "schatten",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::BesselVerify(c)
            | Command::QResidual(c)
            | Command::Selfadjoint(c)
            | Command::KernelCheck(c)
            | Command::NormsTable(c)
            | Command::Schatten(c) => c,
        }
    }

    fn default_modes(&self) -> (u32, u32) {
        match self {
            Command::KernelCheck(_) => (40, 40),
            Command::Schatten(_) => (16, 16),
            _ => (20, 20),
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    seed: u64,
    node_count: usize,
    modes: [u32; 2],
    pass: bool,
    gates: &'a [Gate],
}

enum Failure {
    Usage(String),
    Numeric(String),
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TORUS_DIRAC_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|k| *k > 0)
        .ok_or_else(|| format!("TORUS_DIRAC_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run_suite(cmd: &Command, cfg: &RunConfig) -> Result<SuiteReport, Failure> {
    let numeric = |e: verify::VerifyError| Failure::Numeric(e.to_string());
    let (big_m, big_n) = cfg.modes;
    let tol = &cfg.tolerances;
    if let Command::BesselVerify(c) = cmd {
        return match c.perturb_k {
            Some(eps) => verify::bessel_verify(&PerturbedK(eps), tol),
            None => verify::bessel_verify(&Exact, tol),
        }
        .map_err(numeric);
    }
    let grid = make_grid(cfg.node_count).map_err(|e| Failure::Usage(e.to_string()))?;
    match cmd {
        Command::BesselVerify(_) => unreachable!(),
        Command::QResidual(_) => verify::q_residual(&grid, big_m, big_n, cfg.seed, cfg.fields, tol),
        Command::Selfadjoint(_) => verify::selfadjoint(&grid, big_m, big_n, cfg.seed, cfg.fields, tol),
        Command::KernelCheck(_) => verify::kernel_check(&grid, big_m, big_n, tol),
        Command::NormsTable(_) => verify::norms_table(&grid, big_m, big_n, cfg.svd, cfg.p_values.first().copied(), tol),
        Command::Schatten(_) => verify::schatten(&grid, big_m, big_n, &cfg.p_values, tol),
    }
    .map_err(numeric)
}

fn write_outputs(name: &str, cfg: &RunConfig, report: &SuiteReport) -> Result<(), String> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let header = format!(
        "# torus-dirac {name} seed={} node_count={} modes={},{}\n",
        cfg.seed, cfg.node_count, cfg.modes.0, cfg.modes.1
    );
    for (file, body) in &report.tables {
        let path = dir.join(file);
        std::fs::write(&path, format!("{header}{body}")).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let summary = Summary {
        command: name,
        seed: cfg.seed,
        node_count: cfg.node_count,
        modes: [cfg.modes.0, cfg.modes.1],
        pass: report.passed(),
        gates: &report.gates,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
    let path = dir.join(format!("{name}.summary.json"));
    std::fs::write(&path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads().map_err(Failure::Usage)?;
    let cmd = &cli.command;
    let c = cmd.common();
    let file = match &c.config {
        Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
        None => FileConfig::default(),
    };
    let overrides = Overrides {
        node_count: c.nodes,
        modes: c.modes,
        tolerances: c.tol.clone(),
        p_values: c.p.clone(),
        output_dir: c.out.clone(),
        seed: c.seed,
        fields: c.fields,
        svd: c.svd,
    };
    let cfg = RunConfig::resolve(file, overrides, cmd.default_modes()).map_err(Failure::Usage)?;
    let report = run_suite(cmd, &cfg)?;
    write_outputs(cmd.name(), &cfg, &report).map_err(Failure::Usage)?;
    for g in &report.gates {
        let w = g.worst_case;
        println!(
            "{} {} worst={:e} at (m={}, n={}) tol={:e}",
            if g.pass { "PASS" } else { "FAIL" },
            g.check,
            w.value,
            w.m,
            w.n,
            w.tolerance
        );
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(1)
        }
    }
}
