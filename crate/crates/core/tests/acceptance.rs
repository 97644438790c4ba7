//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::ExitCode;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zeno_core::dilation::{kraus_from_dilation, random_density, DephasingCouplingModel};
use zeno_core::exec::Exec;
use zeno_core::operator::{partial_trace, QubitRole, StateVector, DEFAULT_DENSE_CAP};
use zeno_core::qfi::{
    analytic_qfi_ghz, analytic_qfi_one_qubit, analytic_qfi_separable, dephasing_setup,
    entangled_separable_ratio_limit, minimize_cq, optimal_coefficients_closed_form, qfi_sld_oracle_default,
    AnalyticParams, EnvOperatorBasis,
};
use zeno_core::sweep::{run_qfi_vs_gamma, run_ratio_vs_n, Cell, Mode, SweepConfig, Table};
use zeno_core::verify::one_qubit_grid;
use zeno_core::zeno::{survival_probability_exact, survival_probability_quadratic, ZenoProjector, ZenoSchedule};
use zeno_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(want: f64, got: f64) -> f64 {
    (want - got).abs() / want.abs()
}

fn ghz(n: usize) -> StateVector {
    StateVector::ghz(n, QubitRole::System).unwrap()
}

fn plus(n: usize) -> StateVector {
    StateVector::plus(n, QubitRole::System)
}

fn local_min(n: usize, w: f64, g: f64, tau: f64, state: StateVector) -> Result<f64> {
    let (hhat, psi) = dephasing_setup(n, w, g, state)?;
    Ok(minimize_cq(&hhat, &EnvOperatorBasis::local_pauli(hhat.labels())?, &psi, tau)?.cq_min)
}

fn sld(n: usize, w: f64, g: f64, tau: f64, state: StateVector) -> Result<f64> {
    let (hhat, psi) = dephasing_setup(n, w, g, state)?;
    qfi_sld_oracle_default(&hhat, &psi, tau)
}

fn criterion_1() -> Result<Outcome> {
    let (mut solver, mut oracle) = (0.0f64, 0.0f64);
    for (w, g, tau) in one_qubit_grid() {
        let want = analytic_qfi_one_qubit(&AnalyticParams::new(1, w, g, tau)?);
        solver = solver.max(rel(want, local_min(1, w, g, tau, plus(1))?));
        oracle = oracle.max(rel(want, sld(1, w, g, tau, plus(1))?));
    }
    Ok(outcome(
        solver <= 1e-8 && oracle <= 1e-5,
        format!("4x4x3 grid: solver max rel {solver:.2e} (<= 1e-8), SLD max rel {oracle:.2e} (<= 1e-5)"),
    ))
}

const GHZ_POINTS: [(f64, f64, f64); 3] = [(1.0, 1.0, 0.5), (1.0, 0.5, 0.3), (0.7, 1.3, 0.8)];

fn criterion_2() -> Result<Outcome> {
    let mut solver = 0.0f64;
    for n in 1..=4 {
        for &(w, g, tau) in &GHZ_POINTS {
            let want = analytic_qfi_ghz(&AnalyticParams::new(n, w, g, tau)?)?;
            solver = solver.max(rel(want, local_min(n, w, g, tau, ghz(n))?));
        }
    }
    let mut per_n = Vec::new();
    let mut oracle_ok = true;
    // Context only: the solver over every environment operator reproduces the
    // oracle, so a gap above is a property of the closed form, not the oracle.
    let mut complete = 0.0f64;
    for n in 1..=3 {
        let mut worst = 0.0f64;
        for &(w, g, tau) in &GHZ_POINTS {
            let want = analytic_qfi_ghz(&AnalyticParams::new(n, w, g, tau)?)?;
            let oracle = sld(n, w, g, tau, ghz(n))?;
            worst = worst.max(rel(want, oracle));
            let (hhat, psi) = dephasing_setup(n, w, g, ghz(n))?;
            let full = minimize_cq(&hhat, &EnvOperatorBasis::complete(hhat.labels())?, &psi, tau)?.cq_min;
            complete = complete.max(rel(oracle, full));
        }
        oracle_ok &= worst <= 1e-5;
        per_n.push(format!("N={n}: {worst:.2e}"));
    }
    Ok(outcome(
        solver <= 1e-8 && oracle_ok,
        format!(
            "solver N=1..4 max rel {solver:.2e} (<= 1e-8); SLD vs closed form {} (<= 1e-5); \
             [context] complete-basis solver vs SLD max rel {complete:.2e}",
            per_n.join(", ")
        ),
    ))
}

fn criterion_3() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for &(w, g, tau) in &GHZ_POINTS {
            let one = analytic_qfi_one_qubit(&AnalyticParams::new(1, w, g, tau)?);
            let got = local_min(n, w, g, tau, plus(n))?;
            worst = worst.max(rel(n as f64 * one, got));
            worst = worst.max(rel(analytic_qfi_separable(&AnalyticParams::new(n, w, g, tau)?), got));
        }
    }
    Ok(outcome(worst <= 1e-8, format!("|+>^N, N=1..4: max rel vs N x one-qubit {worst:.2e} (<= 1e-8)")))
}

fn criterion_4() -> Result<Outcome> {
    let (mut ag, mut beta) = (0.0f64, 0.0f64);
    for n in 1..=3 {
        for &(w, g, tau) in &GHZ_POINTS {
            let p = AnalyticParams::new(n, w, g, tau)?;
            let (hhat, psi) = dephasing_setup(n, w, g, ghz(n))?;
            let sol = minimize_cq(&hhat, &EnvOperatorBasis::symmetric(hhat.labels())?, &psi, tau)?;
            let (a, b, c) = optimal_coefficients_closed_form(&p);
            ag = ag.max((sol.coefficients[0] - a).abs()).max((sol.coefficients[2] - c).abs());
            beta = beta.max((sol.coefficients[1] - b).abs());
        }
    }
    Ok(outcome(
        ag <= 1e-9 && beta <= 1e-8,
        format!("symmetric ansatz N=1..3: max |alpha|,|gamma| {ag:.2e} (<= 1e-9), max beta error {beta:.2e} (<= 1e-8)"),
    ))
}

fn column(t: &Table, name: &str) -> usize {
    t.column(name).expect("column exists")
}

fn real(c: &Cell) -> f64 {
    match c {
        Cell::Real(x) => *x,
        other => panic!("expected a number, got {other:?}"),
    }
}

fn criterion_5() -> Result<Outcome> {
    let cfg = SweepConfig::defaults(Mode::RatioVsN);
    let table = run_ratio_vs_n(&cfg, Exec::Parallel)?;
    let (gc, rc, ac, nc) = (
        column(&table, "gamma_over_omega0 [1]"),
        column(&table, "ratio_en_over_se [1]"),
        column(&table, "asymptote_N_inf [1]"),
        column(&table, "N [qubits]"),
    );
    let mut ok = true;
    let mut parts = Vec::new();
    for &g in &cfg.gamma_over_omega0 {
        let series: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| real(&r[gc]) == g)
            .map(|r| (real(&r[rc]), real(&r[ac])))
            .collect();
        let gaps: Vec<f64> = series.iter().map(|(r, a)| (r - a).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        let (r500, a500) = series[series.len() - 1];
        let off = rel(a500, r500);
        ok &= monotone && off <= 0.01;
        parts.push(format!("{g}: {:.3}%{}", off * 100.0, if monotone { "" } else { " non-monotone" }));
    }
    let last_n = table.rows.last().map(|r| r[nc].clone());
    ok &= last_n == Some(Cell::Int(500));
    let p = AnalyticParams::new(1000, 1.0, 1.0, 0.5)?;
    let spot = rel(
        entangled_separable_ratio_limit(1.0, 1.0, 0.5)?,
        analytic_qfi_ghz(&p)? / analytic_qfi_separable(&p),
    );
    ok &= spot <= 0.005;
    Ok(outcome(
        ok,
        format!(
            "w0*tau=0.5, offset from asymptote at N=500 by gamma/w0 [{}] (<= 1%); N=1000 spot {:.3}% (<= 0.5%)",
            parts.join(", "),
            spot * 100.0
        ),
    ))
}

fn criterion_6() -> Result<Outcome> {
    let mut cfg = SweepConfig::defaults(Mode::QfiVsGamma);
    cfg.n_list = vec![3, 5, 7];
    cfg.gamma_over_omega0 = vec![0.1, 3.0];
    let t = run_qfi_vs_gamma(&cfg, Exec::Parallel)?.table;
    let (ec, sc) = (column(&t, "F_en_over_omega0_sq [1]"), column(&t, "F_se_over_omega0_sq [1]"));
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, n) in cfg.n_list.iter().enumerate() {
        let low = &t.rows[2 * k];
        let high = &t.rows[2 * k + 1];
        let gap = |r: &Vec<Cell>| (real(&r[ec]) - real(&r[sc])) / real(&r[sc]);
        ok &= real(&low[ec]) > real(&low[sc]) && gap(high) < gap(low);
        parts.push(format!("N={n}: gap {:.3e} -> {:.3e}", gap(low), gap(high)));
    }
    Ok(outcome(
        ok,
        format!("F_en > F_se at gamma/w0=0.1 and relative gap shrinks by 3 ({})", parts.join(", ")),
    ))
}

fn criterion_7() -> Result<Outcome> {
    let model = DephasingCouplingModel::new(1, 1.0, 1.0)?;
    let u = model.dilation();
    let env0 = model.environment_ground();
    let projector = ZenoProjector::new(plus(1))?;
    let ps = (0..=8)
        .map(|k| survival_probability_exact(&u, &projector, &env0, &ZenoSchedule::over_total_time(1.0, 1 << k)?))
        .collect::<Result<Vec<_>>>()?;
    let increasing = ps.windows(2).all(|w| w[1] > w[0]);
    let p256 = ps[ps.len() - 1];

    let (hhat, psi) = dephasing_setup(1, 1.0, 1.0, plus(1))?;
    let m = 4usize;
    let normalized = [0.2, 0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&tau| {
            let sched = ZenoSchedule::new(m, tau)?;
            let exact = survival_probability_exact(&u, &projector, &env0, &sched)?;
            let quad = survival_probability_quadratic(&hhat, &psi, &sched)?.probability;
            Ok((exact - quad).abs() / (m as f64 * tau * tau * tau))
        })
        .collect::<Result<Vec<f64>>>()?;
    let bounded = normalized.windows(2).all(|w| w[1] <= w[0]);
    Ok(outcome(
        increasing && p256 >= 0.98 && bounded,
        format!(
            "P(t=1) increasing over m=1..256: {increasing}, P(256) = {p256:.5} (>= 0.98); \
             |P - P_quad|/(m tau^3) over halvings {:?} non-increasing: {bounded}",
            normalized.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
        ),
    ))
}

fn criterion_8() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut completeness, mut agreement) = (0.0f64, 0.0f64);
    let mut count = 0;
    for n in [1usize, 2] {
        let model = DephasingCouplingModel::new(n, 1.0, 0.7)?;
        let u = model.dilation();
        let env_rho = model.environment_ground().density();
        let t = 0.9;
        let kraus = kraus_from_dilation(&u, t)?;
        completeness = completeness.max(kraus.completeness_residual);
        let full = u.unitary(t, DEFAULT_DENSE_CAP)?;
        for _ in 0..25 {
            let rho = random_density(&mut rng, 1 << n);
            let evolved = full.mul(&rho.kron(&env_rho))?.mul(&full.adjoint())?;
            let reduced = partial_trace(&evolved, u.labels(), QubitRole::System)?;
            let out = kraus.apply(&rho)?;
            completeness = completeness.max((out.trace().re - 1.0).abs());
            agreement = agreement.max(out.max_abs_diff(&reduced));
            count += 1;
        }
    }
    Ok(outcome(
        completeness <= 1e-10 && agreement <= 1e-10 && count == 50,
        format!("trace preservation {completeness:.2e} (<= 1e-10); {count} random rho vs partial trace {agreement:.2e} (<= 1e-10)"),
    ))
}

fn criterion_9() -> Result<Outcome> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut strict = true;
    let mut configs = 0;
    for n in 1..=3 {
        for &(w, g, tau) in &GHZ_POINTS {
            for state in [ghz(n), plus(n)] {
                let (hhat, psi) = dephasing_setup(n, w, g, state)?;
                for basis in [
                    EnvOperatorBasis::local_pauli(hhat.labels())?,
                    EnvOperatorBasis::symmetric(hhat.labels())?,
                ] {
                    let sol = minimize_cq(&hhat, &basis, &psi, tau)?;
                    worst_excess = worst_excess.max(sol.cq_min - sol.cq_unoptimized);
                    configs += 1;
                }
            }
        }
    }
    for (w, g, tau) in one_qubit_grid() {
        let (hhat, psi) = dephasing_setup(1, w, g, plus(1))?;
        let sol = minimize_cq(&hhat, &EnvOperatorBasis::local_pauli(hhat.labels())?, &psi, tau)?;
        worst_excess = worst_excess.max(sol.cq_min - sol.cq_unoptimized);
        strict &= sol.cq_min < sol.cq_unoptimized;
        configs += 1;
    }
    Ok(outcome(
        worst_excess <= 0.0 && strict,
        format!("{configs} configurations: max (cq_min - 4 Var H) = {worst_excess:.2e} (<= 0); strict at N=1: {strict}"),
    ))
}

fn main() -> ExitCode {
    type Criterion = fn() -> Result<Outcome>;
    let criteria: [(&str, Criterion); 9] = [
        ("1 one-qubit QFI closed form", criterion_1),
        ("2 GHZ QFI closed form", criterion_2),
        ("3 separable additivity", criterion_3),
        ("4 symmetric-ansatz optimum", criterion_4),
        ("5 ratio vs N converges to asymptote", criterion_5),
        ("6 QFI vs gamma crossover", criterion_6),
        ("7 Zeno limit and quadratic order", criterion_7),
        ("8 channel consistency", criterion_8),
        ("9 variational monotonicity", criterion_9),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("{} criterion {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
