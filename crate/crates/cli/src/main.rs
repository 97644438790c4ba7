//! `zeno-qfi <mode> [flags]`: sweeps and verification for the dephasing
//! Zeno model.
//!
//! Exit status: 0 on success, 1 when a verification or cross-check fails
//! (or a computation errors), 2 on a configuration error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zeno_core::exec::Exec;
use zeno_core::sweep::{
    run_qfi_vs_gamma, run_ratio_vs_n, run_zeno_time, ConfigLayer, MeasurementCounts, Mode, OutputFormat,
    SweepConfig, Table,
};
use zeno_core::verify::{max_solver_oracle_error, run_verify};
use zeno_core::ZenoError;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "zeno-qfi", version, about = "Quantum Zeno dynamics of noisy channels: QFI sweeps and checks")]
struct Cli {
    /// ratio-vs-N | qfi-vs-gamma | zeno-time | verify
    mode: Option<String>,

    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Same as the positional mode.
    #[arg(long = "mode")]
    mode_flag: Option<String>,

    /// Dimensionless product ω0·τ.
    #[arg(long)]
    omega0_tau: Option<f64>,

    /// Comma-separated Γ/ω0 values.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,

    /// Comma-separated qubit counts N.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,

    /// Comma-separated measurement counts m.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,

    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// csv | json
    #[arg(long)]
    format: Option<String>,

    /// Multiplies every verification tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,

    /// Seed for randomized cross-checks.
    #[arg(long)]
    seed: Option<u64>,

    /// Disable data-parallel row evaluation.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<ZenoError> for Failure {
    fn from(e: ZenoError) -> Self {
        match e {
            ZenoError::InvalidParameter(msg) => Failure::Config(msg),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn flag_layer(cli: &Cli) -> Result<ConfigLayer, Failure> {
    let mode = match (&cli.mode, &cli.mode_flag) {
        (Some(a), Some(b)) if !a.eq_ignore_ascii_case(b) => {
            return Err(Failure::Config(format!("conflicting modes '{a}' and '{b}'")));
        }
        (Some(a), _) | (None, Some(a)) => Some(a.parse::<Mode>()?),
        (None, None) => None,
    };
    Ok(ConfigLayer {
        mode,
        omega0_tau: cli.omega0_tau,
        gamma_over_omega0: cli.gamma.clone(),
        n_list: cli.n.clone(),
        m: cli.m.clone().map(MeasurementCounts::Many),
        output_path: cli.out.clone(),
        format: cli.format.as_deref().map(str::parse::<OutputFormat>).transpose()?,
        tolerance_scale: cli.tolerance_scale,
        seed: cli.seed,
    })
}

fn load_config(cli: &Cli) -> Result<SweepConfig, Failure> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            ConfigLayer::from_json(&text)?
        }
        None => ConfigLayer::default(),
    };
    Ok(SweepConfig::resolve(file, flag_layer(cli)?)?)
}

fn emit(table: &Table, cfg: &SweepConfig) -> Result<(), Failure> {
    let text = table.render(cfg.format)?;
    match &cfg.output_path {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Run(format!("stdout: {e}"))),
    }
}

/// Runs the configured mode; `Ok(false)` means a check failed.
fn run(cfg: &SweepConfig, exec: Exec) -> Result<bool, Failure> {
    match cfg.mode {
        Mode::RatioVsN => {
            emit(&run_ratio_vs_n(cfg, exec)?, cfg)?;
            Ok(true)
        }
        Mode::QfiVsGamma => {
            let sweep = run_qfi_vs_gamma(cfg, exec)?;
            emit(&sweep.table, cfg)?;
            let mut ok = true;
            for c in &sweep.cross_checks {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                ok &= c.passed();
                eprintln!(
                    "cross-check N={} gamma/omega0={}: max relative error {:.3e} {status}",
                    c.n,
                    c.gamma_over_omega0,
                    c.max_relative_error()
                );
            }
            Ok(ok)
        }
        Mode::ZenoTime => {
            emit(&run_zeno_time(cfg, exec)?, cfg)?;
            Ok(true)
        }
        Mode::Verify => {
            let report = run_verify(cfg, exec)?;
            emit(&report.to_table(), cfg)?;
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| c.gating && !c.passed)
                .map(|c| c.name)
                .collect();
            eprintln!("max |solver - oracle| (relative): {:.3e}", max_solver_oracle_error(&report));
            if failed.is_empty() {
                eprintln!("verify: all gating checks passed");
            } else {
                eprintln!("verify: FAILED {}", failed.join(", "));
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(Failure::Config(msg)) | Err(Failure::Run(msg)) => {
            eprintln!("zeno-qfi: config error: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    match run(&cfg, exec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Config(msg)) => {
            eprintln!("zeno-qfi: config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("zeno-qfi: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
