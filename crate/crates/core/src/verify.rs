//! Cross-module oracle suite behind the `verify` mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dilation::{kraus_from_dilation, random_density, DephasingCouplingModel};
use crate::error::Result;
use crate::exec::Exec;
use crate::operator::{partial_trace, QubitRole, StateVector, DEFAULT_DENSE_CAP};
use crate::qfi::{
    analytic_qfi_ghz, analytic_qfi_one_qubit, analytic_qfi_separable, dephasing_setup, minimize_cq,
    optimal_coefficients_closed_form, qfi_sld_oracle_default, AnalyticParams, EnvOperatorBasis,
};
use crate::sweep::{Cell, Mode, SweepConfig, Table};
use crate::zeno::{survival_probability_exact, survival_probability_quadratic, ZenoProjector, ZenoSchedule};

/// Outcome of one check: `passed` iff `measured <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Informational checks are reported but never fail the run.
    pub gating: bool,
}

impl CheckResult {
    fn new(name: &'static str, measured: f64, tolerance: f64, gating: bool) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
            gating,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.gating)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> Table {
        Table {
            mode: Mode::Verify,
            columns: vec!["check", "measured [1]", "tolerance [1]", "gating", "status"],
            rows: self
                .checks
                .iter()
                .map(|c| {
                    vec![
                        Cell::Text(c.name.into()),
                        Cell::Real(c.measured),
                        Cell::Real(c.tolerance),
                        Cell::Text(if c.gating { "yes" } else { "no" }.into()),
                        Cell::Text(if c.passed { "PASS" } else { "FAIL" }.into()),
                    ]
                })
                .collect(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `(ω0, Γ, τ)` grid of the one-qubit checks.
pub fn one_qubit_grid() -> Vec<(f64, f64, f64)> {
    let mut g = Vec::new();
    for &w in &[0.5, 1.0, 1.5, 2.0] {
        for &gm in &[0.3, 0.8, 1.2, 2.0] {
            for &t in &[0.1, 0.5, 1.0] {
                g.push((w, gm, t));
            }
        }
    }
    g
}

fn ghz(n: usize) -> Result<StateVector> {
    StateVector::ghz(n, QubitRole::System)
}

fn plus(n: usize) -> StateVector {
    StateVector::plus(n, QubitRole::System)
}

/// Kraus completeness and agreement with partial-trace evolution.
fn kraus_checks(scale: f64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut completeness = 0.0f64;
    let mut agreement = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [1usize, 2] {
        let model = DephasingCouplingModel::new(n, 1.0, 0.9)?;
        let u = model.dilation();
        let env_rho = model.environment_ground().density();
        for &t in &[0.1, 0.5, 1.3] {
            let k = kraus_from_dilation(&u, t)?;
            completeness = completeness.max(k.completeness_residual);
            let full_u = u.unitary(t, DEFAULT_DENSE_CAP)?;
            for _ in 0..(if t == 0.5 { 25 } else { 0 }) {
                let rho = random_density(&mut rng, 1 << n);
                let joint = rho.kron(&env_rho);
                let evolved = full_u.mul(&joint)?.mul(&full_u.adjoint())?;
                let reduced = partial_trace(&evolved, u.labels(), QubitRole::System)?;
                agreement = agreement.max(k.apply(&rho)?.max_abs_diff(&reduced));
            }
        }
    }
    Ok(vec![
        CheckResult::new("kraus_completeness", completeness, 1e-10 * scale, true),
        CheckResult::new("kraus_vs_partial_trace", agreement, 1e-10 * scale, true),
    ])
}

fn one_qubit_checks(scale: f64, exec: Exec) -> Result<Vec<CheckResult>> {
    let grid = one_qubit_grid();
    let errs = exec.map(&grid, |&(w, g, t)| -> Result<(f64, f64, f64)> {
        let want = analytic_qfi_one_qubit(&AnalyticParams::new(1, w, g, t)?);
        let (hhat, psi) = dephasing_setup(1, w, g, plus(1))?;
        let sol = minimize_cq(&hhat, &EnvOperatorBasis::local_pauli(hhat.labels())?, &psi, t)?;
        let sld = qfi_sld_oracle_default(&hhat, &psi, t)?;
        // Strict improvement over the unoptimized bound whenever sin(Γt) != 0.
        let gap = sol.cq_min - sol.cq_unoptimized;
        Ok((rel(want, sol.cq_min), rel(want, sld), gap))
    });
    let errs = errs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(vec![
        CheckResult::new(
            "one_qubit_solver_vs_closed_form",
            errs.iter().map(|e| e.0).fold(0.0, f64::max),
            1e-8 * scale,
            true,
        ),
        CheckResult::new(
            "one_qubit_sld_vs_closed_form",
            errs.iter().map(|e| e.1).fold(0.0, f64::max),
            1e-5 * scale,
            true,
        ),
        // Measured as the largest cq_min - 4Var(Ĥ); must be strictly negative.
        CheckResult::new(
            "one_qubit_strict_improvement",
            errs.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max),
            -1e-12 / scale,
            true,
        ),
    ])
}

fn multi_qubit_checks(cfg: &SweepConfig, exec: Exec) -> Result<Vec<CheckResult>> {
    let scale = cfg.tolerance_scale;
    let tau = cfg.omega0_tau;
    let grid: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.gamma_over_omega0.iter().map(move |&g| (n, g)))
        .filter(|&(n, g)| AnalyticParams::new(n, 1.0, g, tau).is_ok_and(|p| analytic_qfi_ghz(&p).is_ok()))
        .collect();

    struct Row {
        ghz: f64,
        separable: f64,
        alpha_gamma: f64,
        beta: f64,
        monotone: f64,
        complete_vs_sld: Option<f64>,
        closed_form_vs_sld: Option<f64>,
    }

    let rows = exec.map(&grid, |&(n, g)| -> Result<Row> {
        let p = AnalyticParams::new(n, 1.0, g, tau)?;
        let (hhat, psi) = dephasing_setup(n, 1.0, g, ghz(n)?)?;
        let local = minimize_cq(&hhat, &EnvOperatorBasis::local_pauli(hhat.labels())?, &psi, tau)?;
        let sym = minimize_cq(&hhat, &EnvOperatorBasis::symmetric(hhat.labels())?, &psi, tau)?;
        let f_en = analytic_qfi_ghz(&p)?;
        let (a, b, c) = optimal_coefficients_closed_form(&p);

        let (hs, psi_s) = dephasing_setup(n, 1.0, g, plus(n))?;
        let sep = minimize_cq(&hs, &EnvOperatorBasis::local_pauli(hs.labels())?, &psi_s, tau)?;

        let (complete_vs_sld, closed_form_vs_sld) = if n <= 3 {
            let complete = minimize_cq(&hhat, &EnvOperatorBasis::complete(hhat.labels())?, &psi, tau)?;
            let sld = qfi_sld_oracle_default(&hhat, &psi, tau)?;
            (Some(rel(sld, complete.cq_min)), Some(rel(sld, f_en)))
        } else {
            (None, None)
        };
        Ok(Row {
            ghz: rel(f_en, local.cq_min).max(rel(f_en, sym.cq_min)),
            separable: rel(analytic_qfi_separable(&p), sep.cq_min),
            alpha_gamma: (sym.coefficients[0] - a).abs().max((sym.coefficients[2] - c).abs()),
            beta: (sym.coefficients[1] - b).abs(),
            monotone: [local.cq_min - local.cq_unoptimized, sep.cq_min - sep.cq_unoptimized]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max),
            complete_vs_sld,
            closed_form_vs_sld,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(0.0f64, f64::max);
    Ok(vec![
        CheckResult::new("ghz_solver_vs_closed_form", worst(&|r| r.ghz), 1e-8 * scale, true),
        CheckResult::new("separable_solver_vs_closed_form", worst(&|r| r.separable), 1e-8 * scale, true),
        CheckResult::new("symmetric_alpha_gamma_zero", worst(&|r| r.alpha_gamma), 1e-9 * scale, true),
        CheckResult::new("symmetric_beta_closed_form", worst(&|r| r.beta), 1e-8 * scale, true),
        CheckResult::new("variational_monotonicity", worst(&|r| r.monotone), 1e-12 * scale, true),
        CheckResult::new(
            "complete_basis_solver_vs_sld",
            worst(&|r| r.complete_vs_sld.unwrap_or(0.0)),
            1e-5 * scale,
            true,
        ),
        // The per-qubit ansatz is not the full channel QFI beyond one qubit;
        // this gap is reported, not gated.
        CheckResult::new(
            "ghz_closed_form_vs_sld",
            worst(&|r| r.closed_form_vs_sld.unwrap_or(0.0)),
            1e-5 * scale,
            false,
        ),
    ])
}

/// Survival under frequent measurement: monotone in `m` and close to 1 at
/// `m = 256`; short-time expansion error shrinking at least like `m τ³`.
fn zeno_checks(scale: f64) -> Result<Vec<CheckResult>> {
    let model = DephasingCouplingModel::new(1, 1.0, 1.0)?;
    let u = model.dilation();
    let env0 = model.environment_ground();
    let projector = ZenoProjector::new(plus(1))?;
    let ms: Vec<usize> = (0..=8).map(|k| 1usize << k).collect();
    let ps = ms
        .iter()
        .map(|&m| survival_probability_exact(&u, &projector, &env0, &ZenoSchedule::over_total_time(1.0, m)?))
        .collect::<Result<Vec<_>>>()?;
    let worst_drop = ps.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let deficit = 1.0 - ps[ps.len() - 1];

    let (hhat, psi) = dephasing_setup(1, 1.0, 1.0, plus(1))?;
    let m = 4;
    let normalized = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&tau| -> Result<f64> {
            let sched = ZenoSchedule::new(m, tau)?;
            let exact = survival_probability_exact(&u, &projector, &env0, &sched)?;
            let quad = survival_probability_quadratic(&hhat, &psi, &sched)?.probability;
            Ok((exact - quad).abs() / (m as f64 * tau.powi(3)))
        })
        .collect::<Result<Vec<_>>>()?;
    let growth = normalized
        .windows(2)
        .map(|w| w[1] / w[0].max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(vec![
        CheckResult::new("zeno_survival_monotone_in_m", worst_drop.max(0.0), 0.0, true),
        CheckResult::new("zeno_survival_m256_deficit", deficit, 0.02 * scale, true),
        CheckResult::new("quadratic_error_order", growth, 1.0 * scale, true),
    ])
}

/// Runs every check; the report passes when every gating check passes.
pub fn run_verify(cfg: &SweepConfig, exec: Exec) -> Result<VerifyReport> {
    let scale = cfg.tolerance_scale;
    let mut checks = kraus_checks(scale, cfg.seed)?;
    checks.extend(one_qubit_checks(scale, exec)?);
    checks.extend(multi_qubit_checks(cfg, exec)?);
    checks.extend(zeno_checks(scale)?);
    Ok(VerifyReport { checks })
}

/// Largest relative solver-vs-oracle error among the gating comparisons.
pub fn max_solver_oracle_error(report: &VerifyReport) -> f64 {
    ["one_qubit_sld_vs_closed_form", "complete_basis_solver_vs_sld"]
        .iter()
        .filter_map(|n| report.check(n))
        .map(|c| c.measured)
        .fold(0.0, f64::max)
}
