//! Parameter sweeps over the dephasing-model closed forms and the tabular
//! output they produce.
//!
//! Every sweep works in units of `ω0`: it sets `ω0 = 1` and `τ = ω0τ`, so
//! the Fisher-information columns are `F/ω0²` and Zeno times are `τ_QZ·ω0`.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::exec::Exec;
use crate::operator::{QubitRole, StateVector};
use crate::qfi::{
    analytic_qfi_ghz, analytic_qfi_separable, dephasing_setup, entangled_separable_ratio_limit, minimize_cq,
    zeno_time_bound, AnalyticParams, EnvOperatorBasis, StateFamily,
};

/// Significant digits of every floating-point output cell.
pub const OUTPUT_SIGNIFICANT_DIGITS: usize = 12;

/// Relative tolerance of the solver cross-check attached to `qfi-vs-gamma`.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "ratio-vs-N", alias = "ratio-vs-n")]
    RatioVsN,
    #[serde(rename = "qfi-vs-gamma")]
    QfiVsGamma,
    #[serde(rename = "zeno-time")]
    ZenoTime,
    #[serde(rename = "verify")]
    Verify,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::RatioVsN, Mode::QfiVsGamma, Mode::ZenoTime, Mode::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Mode::RatioVsN => "ratio-vs-N",
            Mode::QfiVsGamma => "qfi-vs-gamma",
            Mode::ZenoTime => "zeno-time",
            Mode::Verify => "verify",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ZenoError::InvalidParameter(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(ZenoError::InvalidParameter(format!("unknown format '{s}'"))),
        }
    }
}

/// A single measurement count or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementCounts {
    One(usize),
    Many(Vec<usize>),
}

impl MeasurementCounts {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            MeasurementCounts::One(m) => vec![m],
            MeasurementCounts::Many(ms) => ms,
        }
    }
}

/// Partial configuration: one layer of the JSON file or the command-line
/// flags. Absent fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub mode: Option<Mode>,
    pub omega0_tau: Option<f64>,
    pub gamma_over_omega0: Option<Vec<f64>>,
    #[serde(rename = "N_list", alias = "n_list")]
    pub n_list: Option<Vec<usize>>,
    pub m: Option<MeasurementCounts>,
    pub output_path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Multiplies every verification tolerance; values below 1 tighten them.
    pub tolerance_scale: Option<f64>,
    pub seed: Option<u64>,
}

impl ConfigLayer {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ZenoError::InvalidParameter(format!("config: {e}")))
    }
}

/// Fully resolved sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub omega0_tau: f64,
    pub gamma_over_omega0: Vec<f64>,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub m: Vec<usize>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub tolerance_scale: f64,
    pub seed: u64,
}

impl SweepConfig {
    /// Default grids for each mode.
    pub fn defaults(mode: Mode) -> Self {
        let (gammas, ns, ms): (Vec<f64>, Vec<usize>, Vec<usize>) = match mode {
            Mode::RatioVsN => (vec![1.2, 1.1, 1.0, 0.9, 0.8], (1..=500).collect(), vec![1]),
            Mode::QfiVsGamma => ((0..=60).map(|k| k as f64 * 0.05).collect(), vec![3, 5, 7], vec![1]),
            Mode::ZenoTime => (vec![0.01, 0.1, 1.0, 10.0], vec![1, 3, 5, 7], vec![1, 4, 16, 64]),
            Mode::Verify => (vec![0.8, 1.0, 1.2], vec![1, 2, 3, 4], vec![1]),
        };
        Self {
            mode,
            omega0_tau: 0.5,
            gamma_over_omega0: gammas,
            n_list: ns,
            m: ms,
            output_path: None,
            format: OutputFormat::Csv,
            tolerance_scale: 1.0,
            seed: 0,
        }
    }

    /// Resolves `flags` over `file` over the mode defaults and validates.
    pub fn resolve(file: ConfigLayer, flags: ConfigLayer) -> Result<Self> {
        let mode = flags
            .mode
            .or(file.mode)
            .ok_or_else(|| ZenoError::InvalidParameter("no mode given".into()))?;
        let mut cfg = Self::defaults(mode);
        for layer in [file, flags] {
            if let Some(v) = layer.omega0_tau {
                cfg.omega0_tau = v;
            }
            if let Some(v) = layer.gamma_over_omega0 {
                cfg.gamma_over_omega0 = v;
            }
            if let Some(v) = layer.n_list {
                cfg.n_list = v;
            }
            if let Some(v) = layer.m {
                cfg.m = v.into_vec();
            }
            if let Some(v) = layer.output_path {
                cfg.output_path = Some(v);
            }
            if let Some(v) = layer.format {
                cfg.format = v;
            }
            if let Some(v) = layer.tolerance_scale {
                cfg.tolerance_scale = v;
            }
            if let Some(v) = layer.seed {
                cfg.seed = v;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ZenoError::InvalidParameter(msg));
        if !(self.omega0_tau > 0.0 && self.omega0_tau.is_finite()) {
            return bad(format!("omega0_tau must be positive, got {}", self.omega0_tau));
        }
        if self.gamma_over_omega0.is_empty() || self.n_list.is_empty() || self.m.is_empty() {
            return bad("gamma_over_omega0, N_list and m must be nonempty".into());
        }
        if let Some(g) = self.gamma_over_omega0.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return bad(format!("gamma_over_omega0 entries must be finite and >= 0, got {g}"));
        }
        if self.n_list.contains(&0) {
            return bad("N_list entries must be >= 1".into());
        }
        if self.m.contains(&0) {
            return bad("m entries must be >= 1".into());
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return bad(format!("tolerance_scale must be positive, got {}", self.tolerance_scale));
        }
        Ok(())
    }

    fn params(&self, n: usize, gamma_over_omega0: f64) -> Result<AnalyticParams> {
        AnalyticParams::new(n, 1.0, gamma_over_omega0, self.omega0_tau)
    }
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Missing, Cell::Real)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Real(x) => format_sci(*x),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(k) => serde_json::Value::from(*k),
            Cell::Real(x) => format_sci(*x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Missing => serde_json::Value::Null,
        }
    }
}

/// `x` with 12 significant digits in scientific notation and a signed,
/// two-digit exponent, e.g. `1.00000000000e+00`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let raw = format!("{:.*e}", OUTPUT_SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = raw.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Ordered rows under a header whose names carry units.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub mode: Mode,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| ZenoError::InvalidParameter(format!("csv output: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.flush()
            .map_err(|e| ZenoError::InvalidParameter(format!("csv output: {e}")))
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let value = serde_json::json!({
            "mode": self.mode.name(),
            "columns": self.columns,
            "rows": self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        });
        let io = |e: std::io::Error| ZenoError::InvalidParameter(format!("json output: {e}"));
        serde_json::to_writer_pretty(&mut out, &value)
            .map_err(|e| ZenoError::InvalidParameter(format!("json output: {e}")))?;
        out.write_all(b"\n").map_err(io)
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let mut buf = Vec::new();
        self.write(format, &mut buf)?;
        Ok(String::from_utf8(buf).expect("table output is UTF-8"))
    }
}

/// Per-row outcome; pole rows carry empty entangled columns.
fn status(ok: bool) -> Cell {
    Cell::Text(if ok { "ok" } else { "pole" }.into())
}

pub const RATIO_COLUMNS: [&str; 7] = [
    "N [qubits]",
    "gamma_over_omega0 [1]",
    "F_en_over_omega0_sq [1]",
    "F_se_over_omega0_sq [1]",
    "ratio_en_over_se [1]",
    "asymptote_N_inf [1]",
    "status",
];

/// `F_en / F_se` against `N` for each `Γ/ω0`, plus the
/// `N → ∞` limit. Rows are sorted by `N`, then by the configured `Γ/ω0`
/// order.
pub fn run_ratio_vs_n(cfg: &SweepConfig, exec: Exec) -> Result<Table> {
    let mut ns = cfg.n_list.clone();
    ns.sort_unstable();
    let grid: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| cfg.gamma_over_omega0.iter().map(move |&g| (n, g)))
        .collect();
    let rows = exec.map(&grid, |&(n, g)| -> Result<Vec<Cell>> {
        let p = cfg.params(n, g)?;
        let f_se = analytic_qfi_separable(&p);
        let f_en = analytic_qfi_ghz(&p).ok();
        let asymptote = entangled_separable_ratio_limit(1.0, g, cfg.omega0_tau).ok();
        Ok(vec![
            Cell::Int(n),
            Cell::Real(g),
            Cell::opt(f_en),
            Cell::Real(f_se),
            Cell::opt(f_en.map(|f| f / f_se)),
            Cell::opt(asymptote),
            status(f_en.is_some()),
        ])
    });
    Ok(Table {
        mode: Mode::RatioVsN,
        columns: RATIO_COLUMNS.to_vec(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

pub const QFI_COLUMNS: [&str; 6] = [
    "N [qubits]",
    "gamma_over_omega0 [1]",
    "F_en_over_omega0_sq [1]",
    "F_se_over_omega0_sq [1]",
    "ratio_en_over_se [1]",
    "status",
];

/// Solver-vs-closed-form comparison on one sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub n: usize,
    pub gamma_over_omega0: f64,
    pub analytic_en: f64,
    pub solver_en: f64,
    pub analytic_se: f64,
    pub solver_se: f64,
}

impl CrossCheck {
    pub fn max_relative_error(&self) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
        rel(self.analytic_en, self.solver_en).max(rel(self.analytic_se, self.solver_se))
    }

    pub fn passed(&self) -> bool {
        self.max_relative_error() <= CROSS_CHECK_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiSweep {
    pub table: Table,
    pub cross_checks: Vec<CrossCheck>,
}

/// `F_en/ω0²` and `F_se/ω0²` against `Γ/ω0` for each `N`.
/// For every `N ≤ 3` one row, drawn with the configured seed, is recomputed
/// with the variational solver.
pub fn run_qfi_vs_gamma(cfg: &SweepConfig, exec: Exec) -> Result<QfiSweep> {
    let grid: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.gamma_over_omega0.iter().map(move |&g| (n, g)))
        .collect();
    let rows = exec.map(&grid, |&(n, g)| -> Result<Vec<Cell>> {
        let p = cfg.params(n, g)?;
        let f_se = analytic_qfi_separable(&p);
        let f_en = analytic_qfi_ghz(&p).ok();
        Ok(vec![
            Cell::Int(n),
            Cell::Real(g),
            Cell::opt(f_en),
            Cell::Real(f_se),
            Cell::opt(f_en.map(|f| f / f_se)),
            status(f_en.is_some()),
        ])
    });
    let table = Table {
        mode: Mode::QfiVsGamma,
        columns: QFI_COLUMNS.to_vec(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut picks = Vec::new();
    let mut seen = Vec::new();
    for &n in cfg.n_list.iter().filter(|&&n| n <= 3) {
        if seen.contains(&n) {
            continue;
        }
        seen.push(n);
        let k = rng.gen_range(0..cfg.gamma_over_omega0.len());
        let g = cfg.gamma_over_omega0[k];
        if analytic_qfi_ghz(&cfg.params(n, g)?).is_ok() {
            picks.push((n, g));
        }
    }
    let cross_checks = exec
        .map(&picks, |&(n, g)| solver_cross_check(cfg.omega0_tau, n, g))
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(QfiSweep { table, cross_checks })
}

/// Closed forms against the local-Pauli solver for GHZ and `|+>^N` inputs.
pub fn solver_cross_check(omega0_tau: f64, n: usize, gamma_over_omega0: f64) -> Result<CrossCheck> {
    let p = AnalyticParams::new(n, 1.0, gamma_over_omega0, omega0_tau)?;
    let solve = |state: StateVector| -> Result<f64> {
        let (hhat, psi) = dephasing_setup(n, 1.0, gamma_over_omega0, state)?;
        let basis = EnvOperatorBasis::local_pauli(hhat.labels())?;
        Ok(minimize_cq(&hhat, &basis, &psi, omega0_tau)?.cq_min)
    };
    Ok(CrossCheck {
        n,
        gamma_over_omega0,
        analytic_en: analytic_qfi_ghz(&p)?,
        solver_en: solve(StateVector::ghz(n, QubitRole::System)?)?,
        analytic_se: analytic_qfi_separable(&p),
        solver_se: solve(StateVector::plus(n, QubitRole::System))?,
    })
}

pub const ZENO_TIME_COLUMNS: [&str; 8] = [
    "N [qubits]",
    "m [measurements]",
    "gamma_over_omega0 [1]",
    "F_en_over_omega0_sq [1]",
    "F_se_over_omega0_sq [1]",
    "tau_qz_en_times_omega0 [1]",
    "tau_qz_se_times_omega0 [1]",
    "status",
];

/// Upper bounds `τ_QZ ≤ 2/sqrt(m F)` for both input families over
/// `(N, m, Γ/ω0)`, in that nesting order.
pub fn run_zeno_time(cfg: &SweepConfig, exec: Exec) -> Result<Table> {
    let mut grid = Vec::new();
    for &n in &cfg.n_list {
        for &m in &cfg.m {
            for &g in &cfg.gamma_over_omega0 {
                grid.push((n, m, g));
            }
        }
    }
    let rows = exec.map(&grid, |&(n, m, g)| -> Result<Vec<Cell>> {
        let p = cfg.params(n, g)?;
        let se = zeno_time_bound(&p, m, StateFamily::Separable)?;
        let en = zeno_time_bound(&p, m, StateFamily::Entangled).ok();
        Ok(vec![
            Cell::Int(n),
            Cell::Int(m),
            Cell::Real(g),
            Cell::opt(en.map(|b| b.qfi)),
            Cell::Real(se.qfi),
            Cell::opt(en.map(|b| b.tau_qz)),
            Cell::Real(se.tau_qz),
            status(en.is_some()),
        ])
    });
    Ok(Table {
        mode: Mode::ZenoTime,
        columns: ZENO_TIME_COLUMNS.to_vec(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}
