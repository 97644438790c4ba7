//! Survival under repeated projective measurement onto the initial system
//! state, the Zeno Hamiltonian `Ĥ = H_SE - M H_SE M`, and Zeno-time bounds.
//!
//! The measurement `M = |ψ0><ψ0| ⊗ I_E` is never built as a matrix: states are
//! projected by contracting their system indices with `ψ0`.

use num_complex::Complex64;

use crate::dilation::DilatedEvolution;
use crate::error::{Result, ZenoError};
use crate::operator::{
    compose_state, variance, DenseOperator, Observable, OperatorSum, PauliTerm, QubitRole,
    RegisterLayout, StateVector, NORM_TOL,
};

/// Smallest survival probability a conditional state is formed from.
pub const MIN_CONDITIONING_PROBABILITY: f64 = 1e-14;

/// Rank-one system projector `|ψ0><ψ0| ⊗ I_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenoProjector {
    psi0: StateVector,
}

impl ZenoProjector {
    /// `psi0` must be a state on SYSTEM qubits only; it is normalized here.
    pub fn new(psi0: StateVector) -> Result<Self> {
        if psi0.labels().iter().any(|&r| r != QubitRole::System) {
            return Err(ZenoError::LabelMismatch(
                "projector state must carry only SYSTEM labels".into(),
            ));
        }
        Ok(Self {
            psi0: psi0.normalized()?,
        })
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    fn check(&self, layout: &RegisterLayout) -> Result<()> {
        if layout.system_dim() != self.psi0.dim() {
            return Err(ZenoError::SizeMismatch {
                expected: self.psi0.dim(),
                found: layout.system_dim(),
            });
        }
        Ok(())
    }

    /// Environment amplitudes `c_e = Σ_s conj(ψ0_s) ψ_{s,e}`.
    pub fn contract(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        let layout = RegisterLayout::new(psi.labels());
        self.check(&layout)?;
        let amps = psi.amplitudes();
        Ok((0..layout.environment_dim())
            .map(|e| {
                self.psi0
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(s, a)| a.conj() * amps[layout.join(s, e)])
                    .sum()
            })
            .collect())
    }

    /// `M psi`, unnormalized.
    pub fn project(&self, psi: &StateVector) -> Result<StateVector> {
        let layout = RegisterLayout::new(psi.labels());
        let env = self.contract(psi)?;
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        for (s, a) in self.psi0.amplitudes().iter().enumerate() {
            for (e, c) in env.iter().enumerate() {
                out[layout.join(s, e)] = a * c;
            }
        }
        StateVector::from_raw(out, psi.labels().to_vec())
    }
}

/// `m` measurements separated by `tau`; total time `m * tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoSchedule {
    m: usize,
    tau: f64,
}

impl ZenoSchedule {
    pub fn new(m: usize, tau: f64) -> Result<Self> {
        if m < 1 {
            return Err(ZenoError::InvalidParameter("schedule needs m >= 1".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!("interval tau = {tau}")));
        }
        Ok(Self { m, tau })
    }

    /// Splits a total time into `m` equal intervals.
    pub fn over_total_time(total: f64, m: usize) -> Result<Self> {
        Self::new(m, total / m.max(1) as f64)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn total_time(&self) -> f64 {
        self.m as f64 * self.tau
    }
}

/// Outcome of the measured evolution: the survival probability and, when it
/// is nonzero, the normalized post-measurement state of the full register.
#[derive(Debug, Clone)]
pub struct ZenoRun {
    pub probability: f64,
    pub state: Option<StateVector>,
}

/// Evolve for `tau`, project, record the squared norm, renormalize; `m` times.
pub fn run_measured_evolution(
    u: &DilatedEvolution,
    projector: &ZenoProjector,
    env0: &StateVector,
    sched: &ZenoSchedule,
) -> Result<ZenoRun> {
    let mut psi = compose_state(u.labels(), projector.psi0(), env0)?.normalized()?;
    let mut probability = 1.0;
    for _ in 0..sched.m() {
        let projected = projector.project(&u.evolve(&psi, sched.tau())?)?;
        let p = projected.norm_sqr();
        probability *= p;
        if p == 0.0 {
            return Ok(ZenoRun {
                probability: 0.0,
                state: None,
            });
        }
        psi = projected.normalized()?;
    }
    Ok(ZenoRun {
        probability,
        state: Some(psi),
    })
}

/// Exact survival probability after `m` measurements.
pub fn survival_probability_exact(
    u: &DilatedEvolution,
    projector: &ZenoProjector,
    env0: &StateVector,
    sched: &ZenoSchedule,
) -> Result<f64> {
    Ok(run_measured_evolution(u, projector, env0, sched)?.probability)
}

/// System state conditioned on every measurement succeeding.
pub fn conditional_state(
    u: &DilatedEvolution,
    projector: &ZenoProjector,
    env0: &StateVector,
    sched: &ZenoSchedule,
) -> Result<DenseOperator> {
    let run = run_measured_evolution(u, projector, env0, sched)?;
    match run.state {
        Some(psi) if run.probability > MIN_CONDITIONING_PROBABILITY => {
            Ok(psi.reduced_density(QubitRole::System))
        }
        _ => Err(ZenoError::VanishingSurvival(run.probability)),
    }
}

/// `Ĥ = H_SE - M H_SE M`.
///
/// Writing `M H_SE M = |ψ0><ψ0| ⊗ h_env` with
/// `h_env = Σ_k c_k <ψ0|P_k^S|ψ0> P_k^E`, the correction is stored as a Pauli
/// sum on the environment and applied after projecting.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenoHamiltonian {
    h_se: OperatorSum,
    labels: Vec<QubitRole>,
    projector: ZenoProjector,
    env_part: OperatorSum,
}

impl ZenoHamiltonian {
    pub fn h_se(&self) -> &OperatorSum {
        &self.h_se
    }

    pub fn labels(&self) -> &[QubitRole] {
        &self.labels
    }

    pub fn projector(&self) -> &ZenoProjector {
        &self.projector
    }

    /// `h_env`, padded with identities on the system qubits.
    pub fn environment_correction(&self) -> &OperatorSum {
        &self.env_part
    }

    /// `Some(H_SE)` when `M H_SE M` vanishes, so `Ĥ` is a plain Pauli sum.
    pub fn as_pauli(&self) -> Option<&OperatorSum> {
        self.env_part.terms().is_empty().then_some(&self.h_se)
    }

    /// Dense matrix assembled column by column from [`Observable::apply`].
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        let n = self.labels.len();
        if n > cap {
            return Err(ZenoError::DenseCapExceeded { qubits: n, cap });
        }
        let dim = 1usize << n;
        let cols = (0..dim)
            .map(|j| Ok(self.apply(&StateVector::basis(self.labels.clone(), j)?)?.into_amplitudes()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseOperator::from_fn(dim, |i, j| cols[j][i]))
    }
}

impl Observable for ZenoHamiltonian {
    fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    fn ensure_hermitian(&self) -> Result<()> {
        Ok(())
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.labels() != self.labels.as_slice() {
            return Err(ZenoError::LabelMismatch("state does not match the Zeno Hamiltonian register".into()));
        }
        let direct = self.h_se.apply(psi)?;
        if self.env_part.terms().is_empty() {
            return Ok(direct);
        }
        let correction = self.env_part.apply(&self.projector.project(psi)?)?;
        let amps = direct
            .amplitudes()
            .iter()
            .zip(correction.amplitudes())
            .map(|(a, b)| a - b)
            .collect();
        StateVector::from_raw(amps, psi.labels().to_vec())
    }
}

/// Builds `Ĥ = H_SE - M H_SE M` for a register with the given labels.
pub fn zeno_hamiltonian(
    h_se: &OperatorSum,
    labels: &[QubitRole],
    projector: &ZenoProjector,
) -> Result<ZenoHamiltonian> {
    if h_se.n_qubits() != labels.len() {
        return Err(ZenoError::SizeMismatch {
            expected: labels.len(),
            found: h_se.n_qubits(),
        });
    }
    if !h_se.is_hermitian() {
        return Err(ZenoError::NotHermitian { residual: f64::NAN });
    }
    let layout = RegisterLayout::new(labels);
    projector.check(&layout)?;
    let n = labels.len();
    let sys_labels = vec![QubitRole::System; layout.n_system()];
    let mut env_terms = Vec::new();
    for term in h_se.terms() {
        let mut sys_factors = Vec::new();
        let mut env_factors = Vec::with_capacity(n);
        for (q, role) in labels.iter().enumerate() {
            match role {
                QubitRole::System => {
                    sys_factors.push(term.factors[q]);
                    env_factors.push(crate::operator::Pauli::I);
                }
                QubitRole::Environment => env_factors.push(term.factors[q]),
            }
        }
        let sys_string = OperatorSum::hermitian(sys_labels.len(), vec![PauliTerm::real(1.0, sys_factors)])?;
        let image = sys_string.apply(&projector.psi0().relabeled(sys_labels.clone())?)?;
        let mean = projector.psi0().inner(&image)?;
        env_terms.push(PauliTerm::new(term.coefficient * mean, env_factors));
    }
    let env_part = OperatorSum::hermitian(n, env_terms)?.simplified(1e-15);
    Ok(ZenoHamiltonian {
        h_se: h_se.clone(),
        labels: labels.to_vec(),
        projector: projector.clone(),
        env_part,
    })
}

/// Short-time expansion `1 - m Δ²Ĥ τ²`; `valid` is false once it goes negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSurvival {
    pub probability: f64,
    pub valid: bool,
}

pub fn survival_probability_quadratic<O: Observable + ?Sized>(
    hhat: &O,
    psi0_full: &StateVector,
    sched: &ZenoSchedule,
) -> Result<QuadraticSurvival> {
    let var = variance(hhat, psi0_full)?;
    let probability = 1.0 - sched.m() as f64 * var * sched.tau() * sched.tau();
    Ok(QuadraticSurvival {
        probability,
        valid: probability >= 0.0,
    })
}

/// Zeno time `2 / sqrt(m C_Q)`.
pub fn tau_qz(m: usize, cq: f64) -> Result<f64> {
    if m < 1 {
        return Err(ZenoError::InvalidParameter("m must be >= 1".into()));
    }
    if cq.is_nan() || cq <= 0.0 {
        return Err(ZenoError::InvalidParameter(format!("C_Q must be positive, got {cq}")));
    }
    Ok(2.0 / (m as f64 * cq).sqrt())
}

/// Fidelity `<ψ|ρ|ψ>` of a system density operator with a pure system state.
pub fn fidelity_with(rho: &DenseOperator, psi: &StateVector) -> Result<f64> {
    let v = rho.apply_vec(psi.amplitudes());
    let f = StateVector::from_raw(v, psi.labels().to_vec())?;
    let z = psi.inner(&f)?;
    if (psi.norm_sqr() - 1.0).abs() > NORM_TOL * 10.0 {
        return Err(ZenoError::InvalidParameter("reference state not normalized".into()));
    }
    Ok(z.re)
}
