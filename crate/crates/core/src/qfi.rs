//! Channel quantum Fisher information.
//!
//! The bound `C_Q = 4 Δ²(Ĥ + h')` with `h' = U'† h_E U'` and
//! `U'(τ) = exp(-iĤτ)` is an exact quadratic in the coefficients of `h_E` on
//! a fixed environment basis, so its minimum comes from one symmetric
//! pseudo-inverse solve. An SLD-based estimate on the reduced system state
//! serves as an independent check, and the closed forms for the dephasing
//! model live alongside.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, ZenoError};
use crate::operator::{
    pauli_rotation_apply, variance, variance_from_image, DenseOperator, Observable, OperatorSum, Pauli,
    PauliTerm, QubitRole, StateVector, DEFAULT_DENSE_CAP,
};
use crate::dilation::DilatedEvolution;
use crate::zeno::{survival_probability_exact, ZenoHamiltonian, ZenoProjector, ZenoSchedule};

/// Relative eigenvalue cutoff of the Gram pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Eigenvalue-sum floor in the SLD formula.
pub const SLD_EIGEN_FLOOR: f64 = 1e-10;

/// Relative agreement required between the SLD estimates at `dτ` and `dτ/2`.
pub const SLD_CONVERGENCE: f64 = 1e-5;

/// `|cos(Γτ)|` below this is treated as a pole of `tan(Γτ)`.
pub const POLE_TOL: f64 = 1e-8;

/// Largest environment register for [`EnvOperatorBasis::complete`].
pub const COMPLETE_BASIS_MAX_ENV: usize = 5;

/// Hermitian operators acting trivially on every SYSTEM qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOperatorBasis {
    labels: Vec<QubitRole>,
    elements: Vec<OperatorSum>,
}

impl EnvOperatorBasis {
    pub fn custom(labels: Vec<QubitRole>, elements: Vec<OperatorSum>) -> Result<Self> {
        if elements.is_empty() {
            return Err(ZenoError::InvalidParameter("environment basis is empty".into()));
        }
        for el in &elements {
            if el.n_qubits() != labels.len() {
                return Err(ZenoError::SizeMismatch {
                    expected: labels.len(),
                    found: el.n_qubits(),
                });
            }
            if !el.is_hermitian() {
                return Err(ZenoError::NotHermitian { residual: f64::NAN });
            }
            for t in el.terms() {
                let touches_system = t
                    .factors
                    .iter()
                    .zip(&labels)
                    .any(|(p, r)| *r == QubitRole::System && *p != Pauli::I);
                if touches_system {
                    return Err(ZenoError::InvalidParameter(format!(
                        "basis element term {} acts on a SYSTEM qubit",
                        t.label()
                    )));
                }
            }
        }
        Ok(Self { labels, elements })
    }

    fn env_positions(labels: &[QubitRole]) -> Vec<usize> {
        labels
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == QubitRole::Environment)
            .map(|(q, _)| q)
            .collect()
    }

    /// `{X_E^i, Y_E^i, Z_E^i}` for every environment qubit (3 per qubit).
    pub fn local_pauli(labels: &[QubitRole]) -> Result<Self> {
        let n = labels.len();
        let mut elements = Vec::new();
        for q in Self::env_positions(labels) {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                elements.push(OperatorSum::hermitian(n, vec![PauliTerm::on(n, &[(q, p)], 1.0)])?);
            }
        }
        Self::custom(labels.to_vec(), elements)
    }

    /// `{Σ_i X_E^i, Σ_i Y_E^i, Σ_i Z_E^i}`: the permutation-symmetric ansatz.
    pub fn symmetric(labels: &[QubitRole]) -> Result<Self> {
        let n = labels.len();
        let env = Self::env_positions(labels);
        let elements = [Pauli::X, Pauli::Y, Pauli::Z]
            .iter()
            .map(|&p| {
                OperatorSum::hermitian(n, env.iter().map(|&q| PauliTerm::on(n, &[(q, p)], 1.0)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::custom(labels.to_vec(), elements)
    }

    /// Every non-identity Pauli string on the environment (`4^n_E - 1`
    /// elements). Spans all traceless environment Hermitian operators.
    pub fn complete(labels: &[QubitRole]) -> Result<Self> {
        let n = labels.len();
        let env = Self::env_positions(labels);
        if env.len() > COMPLETE_BASIS_MAX_ENV {
            return Err(ZenoError::DenseCapExceeded {
                qubits: env.len(),
                cap: COMPLETE_BASIS_MAX_ENV,
            });
        }
        let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut elements = Vec::new();
        for code in 1..(1usize << (2 * env.len())) {
            let placed: Vec<(usize, Pauli)> = env
                .iter()
                .enumerate()
                .map(|(k, &q)| (q, paulis[(code >> (2 * k)) & 3]))
                .collect();
            elements.push(OperatorSum::hermitian(n, vec![PauliTerm::on(n, &placed, 1.0)])?);
        }
        Self::custom(labels.to_vec(), elements)
    }

    pub fn labels(&self) -> &[QubitRole] {
        &self.labels
    }

    pub fn elements(&self) -> &[OperatorSum] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Result of minimizing `C_Q` over an environment basis.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolution {
    /// One coefficient per basis element.
    pub coefficients: Vec<f64>,
    pub cq_min: f64,
    /// `C_Q` at zero coefficients, i.e. `4 Δ²Ĥ`.
    pub cq_unoptimized: f64,
    /// Ratio of the largest to the smallest retained Gram eigenvalue.
    pub gram_condition: f64,
}

/// Parameters of the dephasing-coupling closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    pub n: usize,
    pub omega0: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl AnalyticParams {
    pub fn new(n: usize, omega0: f64, gamma: f64, tau: f64) -> Result<Self> {
        if n < 1 {
            return Err(ZenoError::InvalidParameter("N must be >= 1".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!("tau = {tau}")));
        }
        if !omega0.is_finite() || !gamma.is_finite() {
            return Err(ZenoError::InvalidParameter("rates must be finite".into()));
        }
        Ok(Self {
            n,
            omega0,
            gamma,
            tau,
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    fn phase(&self) -> f64 {
        self.gamma * self.tau
    }
}

/// `exp(-iĤτ)` as commuting Pauli rotations when possible, dense otherwise.
#[derive(Debug, Clone)]
pub struct ZenoPropagator {
    kind: PropagatorKind,
}

#[derive(Debug, Clone)]
enum PropagatorKind {
    /// `(c_k, P_k)` with `exp(-iĤτ) = Π_k exp(-i c_k τ P_k)`.
    Rotations(Vec<(f64, PauliTerm)>),
    Dense {
        values: Vec<f64>,
        vectors: DMatrix<Complex64>,
    },
}

impl ZenoPropagator {
    pub fn new(hhat: &ZenoHamiltonian, cap: usize) -> Result<Self> {
        if let Some(op) = hhat.as_pauli() {
            if op.is_commuting() {
                let rotations = op
                    .terms()
                    .iter()
                    .map(|t| (t.coefficient.re, t.unit()))
                    .collect();
                return Ok(Self {
                    kind: PropagatorKind::Rotations(rotations),
                });
            }
        }
        let (values, vectors) = hhat.to_dense(cap)?.hermitian_eigen()?;
        Ok(Self {
            kind: PropagatorKind::Dense { values, vectors },
        })
    }

    pub fn is_rotational(&self) -> bool {
        matches!(self.kind, PropagatorKind::Rotations(_))
    }

    /// `exp(-iĤt) psi`; negative `t` gives the adjoint.
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        match &self.kind {
            PropagatorKind::Rotations(rs) => {
                let mut out = psi.clone();
                for (c, p) in rs {
                    out = pauli_rotation_apply(p, 2.0 * c * t, &out)?;
                }
                Ok(out)
            }
            PropagatorKind::Dense { values, vectors } => {
                let dim = values.len();
                if psi.dim() != dim {
                    return Err(ZenoError::SizeMismatch {
                        expected: dim,
                        found: psi.dim(),
                    });
                }
                let v = DVector::from_column_slice(psi.amplitudes());
                let mut coeffs = vectors.adjoint() * v;
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c *= Complex64::from_polar(1.0, -values[k] * t);
                }
                let out = vectors * coeffs;
                StateVector::from_raw(out.iter().copied().collect(), psi.labels().to_vec())
            }
        }
    }

    fn rotations(&self) -> Option<&[(f64, PauliTerm)]> {
        match &self.kind {
            PropagatorKind::Rotations(rs) => Some(rs),
            PropagatorKind::Dense { .. } => None,
        }
    }
}

/// `C_Q = 4 Δ²Ĥ'` on the full register.
pub fn cq_bound<O: Observable + ?Sized>(hprime: &O, psi_full: &StateVector) -> Result<f64> {
    Ok(4.0 * variance(hprime, psi_full)?)
}

/// `h' = U'† h U'` either as a Pauli sum or, when `U'` is not a product of
/// commuting Pauli rotations, as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjugatedOperator {
    Pauli(OperatorSum),
    Dense(DenseOperator),
}

impl ConjugatedOperator {
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        match self {
            ConjugatedOperator::Pauli(op) => op.to_dense(cap),
            ConjugatedOperator::Dense(d) => Ok(d.clone()),
        }
    }
}

/// `h' = U'†(τ) h_E U'(τ)` with `U' = exp(-iĤτ)`.
///
/// For rotational `U'` each factor `exp(-iθQ/2)` leaves commuting strings
/// alone and maps an anticommuting `P` to `cos θ P - i sin θ P Q`.
pub fn conjugate_h(h_e: &OperatorSum, hhat: &ZenoHamiltonian, tau: f64) -> Result<ConjugatedOperator> {
    let prop = ZenoPropagator::new(hhat, DEFAULT_DENSE_CAP)?;
    if let Some(rs) = prop.rotations() {
        let mut terms: Vec<PauliTerm> = h_e.terms().to_vec();
        for (c, q) in rs {
            let theta = 2.0 * c * tau;
            let (s, co) = theta.sin_cos();
            let mut next = Vec::with_capacity(terms.len());
            for p in terms {
                if p.commutes_with(q) {
                    next.push(p);
                } else {
                    let pq = p.mul(q);
                    next.push(PauliTerm::new(p.coefficient * co, p.factors.clone()));
                    next.push(PauliTerm::new(pq.coefficient * Complex64::new(0.0, -s), pq.factors));
                }
            }
            terms = OperatorSum::general(h_e.n_qubits(), next)?.simplified(1e-15).terms().to_vec();
        }
        return Ok(ConjugatedOperator::Pauli(OperatorSum::hermitian(h_e.n_qubits(), terms)?));
    }
    let u = {
        let dim = 1usize << hhat.labels().len();
        let cols = (0..dim)
            .map(|j| {
                Ok(prop
                    .propagate(&StateVector::basis(hhat.labels().to_vec(), j)?, tau)?
                    .into_amplitudes())
            })
            .collect::<Result<Vec<_>>>()?;
        DenseOperator::from_fn(dim, |i, j| cols[j][i])
    };
    let h = h_e.to_dense(DEFAULT_DENSE_CAP)?;
    Ok(ConjugatedOperator::Dense(u.adjoint().mul(&h)?.mul(&u)?))
}

/// `C_Q(c) = 4 (k + 2 bᵀc + cᵀ A c)` with `A` the symmetrized covariance
/// of the conjugated basis elements and `b` their covariance with `Ĥ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub gram: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
}

impl QuadraticForm {
    /// Builds the form from `v0 = Ĥψ` and `v_k = h'_k ψ`.
    pub fn from_images(psi: &StateVector, v0: &StateVector, vs: &[StateVector]) -> Result<Self> {
        let mean = |v: &StateVector| -> Result<f64> { Ok(psi.inner(v)?.re) };
        let m0 = mean(v0)?;
        let ms = vs.iter().map(mean).collect::<Result<Vec<_>>>()?;
        let k = vs.len();
        let mut gram = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let a = vs[i].inner(&vs[j])?.re - ms[i] * ms[j];
                gram[(i, j)] = a;
                gram[(j, i)] = a;
            }
        }
        let linear = DVector::from_iterator(
            k,
            vs.iter()
                .zip(&ms)
                .map(|(v, m)| Ok(v0.inner(v)?.re - m0 * m))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(Self {
            gram,
            linear,
            constant: v0.norm_sqr() - m0 * m0,
        })
    }

    pub fn value(&self, c: &DVector<f64>) -> f64 {
        4.0 * (self.constant + 2.0 * self.linear.dot(c) + c.dot(&(&self.gram * c)))
    }

    pub fn gradient(&self, c: &DVector<f64>) -> DVector<f64> {
        (&self.linear + &self.gram * c) * 8.0
    }

    /// `c = -A⁺ b` with eigenvalues below `rel_cutoff * λ_max` discarded.
    /// Returns the coefficients and the retained condition number.
    pub fn solve(&self, rel_cutoff: f64) -> Result<(DVector<f64>, f64)> {
        let k = self.linear.len();
        let (values, vectors) = psd_eigen(&self.gram)?;
        let lmax = values.iter().fold(0.0f64, |a, &l| a.max(l));
        let cutoff = rel_cutoff * lmax;
        let mut c = DVector::<f64>::zeros(k);
        let mut lmin = f64::INFINITY;
        for (j, &l) in values.iter().enumerate() {
            if l > cutoff && l > 0.0 {
                lmin = lmin.min(l);
                let v = vectors.column(j);
                c -= v * (v.dot(&self.linear) / l);
            }
        }
        let cond = if lmin.is_finite() { lmax / lmin } else { f64::INFINITY };
        Ok((c, cond))
    }

    /// Plain gradient descent from zero with step `1 / (8 λ_max)`.
    /// A debug cross-check for [`QuadraticForm::solve`], not a solver.
    pub fn gradient_descent(&self, iterations: usize) -> Result<DVector<f64>> {
        let k = self.linear.len();
        let lmax = psd_eigen(&self.gram)?.0.iter().fold(0.0f64, |a, &l| a.max(l));
        let mut c = DVector::<f64>::zeros(k);
        if lmax <= 0.0 {
            return Ok(c);
        }
        let step = 1.0 / (8.0 * lmax);
        for _ in 0..iterations {
            c -= self.gradient(&c) * step;
        }
        Ok(c)
    }
}

/// Eigenpairs of a real symmetric matrix, checked by reconstruction.
///
/// nalgebra's symmetric eigensolver and SVD each return inaccurate
/// factorizations on some nearly diagonal matrices with off-diagonal entries
/// at rounding-noise level, and they fail on different inputs. Noise entries
/// are flushed first; the eigensolver is tried, then the SVD (valid for
/// positive semidefinite input), and whichever reconstructs the matrix wins.
fn psd_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let scale = a.amax();
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let flushed = a.map(|x| if x.abs() < 1e-15 * scale { 0.0 } else { x });
    let sym = (&flushed + flushed.transpose()) * 0.5;
    let residual = |values: &[f64], vectors: &DMatrix<f64>| {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
        (vectors * d * vectors.transpose() - &sym).amax()
    };
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let first = residual(&values, &eig.eigenvectors);
    if first <= tol {
        return Ok((values, eig.eigenvectors));
    }
    let svd = sym.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let second = residual(&values, &u);
    if second <= tol {
        return Ok((values, u));
    }
    Err(ZenoError::EigenNotConverged(first.min(second)))
}

/// Images `Ĥψ` and `h'_k ψ = U'† h_k U' ψ` for every basis element.
fn basis_images(
    hhat: &ZenoHamiltonian,
    basis: &EnvOperatorBasis,
    psi_full: &StateVector,
    tau: f64,
) -> Result<(StateVector, Vec<StateVector>)> {
    if basis.labels() != hhat.labels() {
        return Err(ZenoError::LabelMismatch("basis and Zeno Hamiltonian registers differ".into()));
    }
    let prop = ZenoPropagator::new(hhat, DEFAULT_DENSE_CAP)?;
    let v0 = hhat.apply(psi_full)?;
    let phi = prop.propagate(psi_full, tau)?;
    let vs = basis
        .elements()
        .iter()
        .map(|h| prop.propagate(&h.apply(&phi)?, -tau))
        .collect::<Result<Vec<_>>>()?;
    Ok((v0, vs))
}

/// The quadratic form of `C_Q` in the basis coefficients.
pub fn cq_quadratic_form(
    hhat: &ZenoHamiltonian,
    basis: &EnvOperatorBasis,
    psi_full: &StateVector,
    tau: f64,
) -> Result<QuadraticForm> {
    let (v0, vs) = basis_images(hhat, basis, psi_full, tau)?;
    QuadraticForm::from_images(psi_full, &v0, &vs)
}

/// `min over h_E in span(basis) of C_Q(Ĥ + h'(τ))`.
pub fn minimize_cq(
    hhat: &ZenoHamiltonian,
    basis: &EnvOperatorBasis,
    psi_full: &StateVector,
    tau: f64,
) -> Result<VariationalSolution> {
    let (v0, vs) = basis_images(hhat, basis, psi_full, tau)?;
    let form = QuadraticForm::from_images(psi_full, &v0, &vs)?;
    let (c, gram_condition) = form.solve(PINV_CUTOFF)?;
    let cq_unoptimized = 4.0 * variance_from_image(psi_full, &v0)?;
    let cq_min = 4.0 * variance_from_image(psi_full, &combine(&v0, &vs, c.as_slice())?)?;
    Ok(VariationalSolution {
        coefficients: c.iter().copied().collect(),
        cq_min: cq_min.min(cq_unoptimized),
        cq_unoptimized,
        gram_condition,
    })
}

/// Same minimization by gradient descent; for debugging the linear solve.
pub fn minimize_cq_gradient_descent(
    hhat: &ZenoHamiltonian,
    basis: &EnvOperatorBasis,
    psi_full: &StateVector,
    tau: f64,
    iterations: usize,
) -> Result<VariationalSolution> {
    let (v0, vs) = basis_images(hhat, basis, psi_full, tau)?;
    let form = QuadraticForm::from_images(psi_full, &v0, &vs)?;
    let c = form.gradient_descent(iterations)?;
    let cq_unoptimized = 4.0 * variance_from_image(psi_full, &v0)?;
    let cq_min = 4.0 * variance_from_image(psi_full, &combine(&v0, &vs, c.as_slice())?)?;
    Ok(VariationalSolution {
        coefficients: c.iter().copied().collect(),
        cq_min,
        cq_unoptimized,
        gram_condition: f64::NAN,
    })
}

fn combine(v0: &StateVector, vs: &[StateVector], c: &[f64]) -> Result<StateVector> {
    let mut amps = v0.amplitudes().to_vec();
    for (v, &ck) in vs.iter().zip(c) {
        for (a, b) in amps.iter_mut().zip(v.amplitudes()) {
            *a += b * ck;
        }
    }
    StateVector::from_raw(amps, v0.labels().to_vec())
}

/// `(α, β, γ) = (0, ω0 N sin(Γτ) / 2[N sin²(Γτ) + cos²(Γτ)], 0)`.
pub fn optimal_coefficients_closed_form(p: &AnalyticParams) -> (f64, f64, f64) {
    let (s, c) = p.phase().sin_cos();
    let n = p.nf();
    (0.0, p.omega0 * n * s / (2.0 * (n * s * s + c * c)), 0.0)
}

/// `ω0² cos²(Γτ) + Γ²` (the `N` field is ignored).
pub fn analytic_qfi_one_qubit(p: &AnalyticParams) -> f64 {
    let c = p.phase().cos();
    p.omega0 * p.omega0 * c * c + p.gamma * p.gamma
}

/// `ω0² N² / (1 + N tan²(Γτ)) + N Γ²`.
pub fn analytic_qfi_ghz(p: &AnalyticParams) -> Result<f64> {
    let c = p.phase().cos();
    if c.abs() < POLE_TOL {
        return Err(ZenoError::PoleProximity(c.abs()));
    }
    let n = p.nf();
    let t = p.phase().tan();
    Ok(p.omega0 * p.omega0 * n * n / (1.0 + n * t * t) + n * p.gamma * p.gamma)
}

/// Large-`N` form `N [Γ² + ω0² cot²(Γτ)]`.
pub fn analytic_qfi_ghz_asymptotic(p: &AnalyticParams) -> Result<f64> {
    let (s, c) = p.phase().sin_cos();
    if s.abs() < POLE_TOL {
        return Err(ZenoError::PoleProximity(s.abs()));
    }
    let cot = c / s;
    Ok(p.nf() * (p.gamma * p.gamma + p.omega0 * p.omega0 * cot * cot))
}

/// `N [ω0² cos²(Γτ) + Γ²]`.
pub fn analytic_qfi_separable(p: &AnalyticParams) -> f64 {
    p.nf() * analytic_qfi_one_qubit(p)
}

/// Limit of `F_en / F_se` as `N → ∞`: `[Γ² + ω0² cot²] / [Γ² + ω0² cos²]`.
pub fn entangled_separable_ratio_limit(omega0: f64, gamma: f64, tau: f64) -> Result<f64> {
    let p = AnalyticParams::new(1, omega0, gamma, tau)?;
    Ok(analytic_qfi_ghz_asymptotic(&p)? / analytic_qfi_one_qubit(&p))
}

/// SLD Fisher information of `ρ` given `∂ρ`.
pub fn sld_fisher(rho: &DenseOperator, drho: &DenseOperator) -> Result<f64> {
    let (values, vectors) = rho.hermitian_eigen()?;
    let d = vectors.adjoint() * drho.matrix() * &vectors;
    let mut f = 0.0;
    for (i, li) in values.iter().enumerate() {
        for (j, lj) in values.iter().enumerate() {
            let s = li + lj;
            if s > SLD_EIGEN_FLOOR {
                f += 2.0 * d[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(f)
}

/// QFI of `ρ_S(τ) = Tr_E[exp(-iĤτ) |ψ><ψ| exp(iĤτ)]` with respect to `τ`,
/// by central differences at `dtau` and `dtau/2`.
pub fn qfi_sld_oracle(hhat: &ZenoHamiltonian, psi_full: &StateVector, tau: f64, dtau: f64) -> Result<f64> {
    let n = hhat.labels().len();
    if n > DEFAULT_DENSE_CAP {
        return Err(ZenoError::DenseCapExceeded {
            qubits: n,
            cap: DEFAULT_DENSE_CAP,
        });
    }
    if dtau.is_nan() || dtau <= 0.0 || dtau >= tau.abs().max(f64::MIN_POSITIVE) {
        return Err(ZenoError::InvalidParameter(format!("dtau {dtau} must be in (0, tau)")));
    }
    let (values, vectors) = hhat.to_dense(DEFAULT_DENSE_CAP)?.hermitian_eigen()?;
    let prop = ZenoPropagator {
        kind: PropagatorKind::Dense { values, vectors },
    };
    let rho_at = |t: f64| -> Result<DenseOperator> {
        Ok(prop.propagate(psi_full, t)?.reduced_density(QubitRole::System))
    };
    let rho = rho_at(tau)?;
    let estimate = |h: f64| -> Result<f64> {
        let drho = rho_at(tau + h)?
            .sub(&rho_at(tau - h)?)?
            .scale(Complex64::new(1.0 / (2.0 * h), 0.0));
        sld_fisher(&rho, &drho)
    };
    let coarse = estimate(dtau)?;
    let fine = estimate(dtau / 2.0)?;
    let change = (coarse - fine).abs() / fine.abs().max(1e-10);
    if change > SLD_CONVERGENCE {
        return Err(ZenoError::StepNotConverged(change));
    }
    Ok(fine)
}

/// [`qfi_sld_oracle`] with `dtau = 1e-4 τ`.
pub fn qfi_sld_oracle_default(hhat: &ZenoHamiltonian, psi_full: &StateVector, tau: f64) -> Result<f64> {
    qfi_sld_oracle(hhat, psi_full, tau, 1e-4 * tau)
}

/// Which closed form feeds a Zeno-time bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    /// `|+>^N`; `N = 1` is the one-qubit case.
    Separable,
    /// GHZ with the exact finite-`N` formula.
    Entangled,
    /// GHZ with the `N → ∞` cotangent form.
    EntangledAsymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoTimeBound {
    pub tau_qz: f64,
    pub qfi: f64,
    /// Set when the large-`N` approximation was used.
    pub asymptotic: bool,
}

/// `τ_QZ ≤ 2 / sqrt(m F_Q)`.
pub fn zeno_time_bound(p: &AnalyticParams, m: usize, family: StateFamily) -> Result<ZenoTimeBound> {
    let (qfi, asymptotic) = match family {
        StateFamily::Separable => (analytic_qfi_separable(p), false),
        StateFamily::Entangled => (analytic_qfi_ghz(p)?, false),
        StateFamily::EntangledAsymptotic => (analytic_qfi_ghz_asymptotic(p)?, true),
    };
    Ok(ZenoTimeBound {
        tau_qz: crate::zeno::tau_qz(m, qfi)?,
        qfi,
        asymptotic,
    })
}

/// `[∂τ P]² / (P (1 - P))` for a single measurement after time `tau`, with
/// the derivative by central difference. Approximates `4 Δ²Ĥ` at short times.
pub fn cq_from_survival(
    u: &DilatedEvolution,
    projector: &ZenoProjector,
    env0: &StateVector,
    tau: f64,
) -> Result<f64> {
    let p = |t: f64| -> Result<f64> {
        survival_probability_exact(u, projector, env0, &ZenoSchedule::new(1, t)?)
    };
    let h = 1e-4 * tau;
    let dp = (p(tau + h)? - p(tau - h)?) / (2.0 * h);
    let p0 = p(tau)?;
    let denom = p0 * (1.0 - p0);
    if denom <= 0.0 {
        return Err(ZenoError::InvalidParameter("survival probability is 0 or 1".into()));
    }
    Ok(dp * dp / denom)
}

/// Labels, full initial state and Zeno Hamiltonian for the dephasing model
/// with a given system state and the environment in `|0...0>`.
pub fn dephasing_setup(
    n: usize,
    omega0: f64,
    gamma: f64,
    system_state: StateVector,
) -> Result<(ZenoHamiltonian, StateVector)> {
    let model = crate::dilation::DephasingCouplingModel::new(n, omega0, gamma)?;
    let labels = model.labels();
    let projector = ZenoProjector::new(system_state)?;
    let psi = crate::operator::compose_state(&labels, projector.psi0(), &model.environment_ground())?;
    let hhat = crate::zeno::zeno_hamiltonian(&model.hamiltonian(), &labels, &projector)?;
    Ok((hhat, psi))
}

/// Coefficients of a local-basis solution averaged over environment qubits,
/// as `(α, β, γ)`. Assumes [`EnvOperatorBasis::local_pauli`] ordering.
pub fn symmetric_projection(coefficients: &[f64]) -> (f64, f64, f64) {
    let n = (coefficients.len() / 3).max(1) as f64;
    let mut acc = [0.0; 3];
    for (k, c) in coefficients.iter().enumerate() {
        acc[k % 3] += c;
    }
    (acc[0] / n, acc[1] / n, acc[2] / n)
}
