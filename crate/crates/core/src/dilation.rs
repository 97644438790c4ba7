//! Unitary dilations of system channels, Kraus extraction and generators.
//!
//! A channel on the system is represented by a unitary `U(t)` on
//! system ⊗ environment with the environment starting in `|0...0>`. Kraus
//! operators are the environment-projected blocks
//! `Π_l(t) = (I ⊗ <l|) U(t) (I ⊗ |0>)`.

use num_complex::Complex64;

use crate::error::{Result, ZenoError};
use crate::operator::{
    hermitian_expm, pauli_rotation_apply, DenseOperator, OperatorSum, Pauli, PauliTerm, QubitRole,
    RegisterLayout, StateVector, DEFAULT_DENSE_CAP,
};

/// Kraus completeness tolerance.
pub const KRAUS_TOL: f64 = 1e-10;

/// Kraus operators with Frobenius norm below this are dropped.
pub const KRAUS_PRUNE: f64 = 1e-12;

/// Largest tolerated anti-Hermitian residue of a finite-difference generator.
pub const GENERATOR_RESIDUE_TOL: f64 = 1e-6;

/// `exp(-i rate t P / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub rate: f64,
    pub pauli: PauliTerm,
}

impl Rotation {
    pub fn new(rate: f64, pauli: PauliTerm) -> Self {
        Self {
            rate,
            pauli: pauli.unit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionForm {
    /// Applied to the state in list order: the first rotation acts first.
    Rotations(Vec<Rotation>),
    /// Hermitian `G` with `U(t) = exp(-i G t)`.
    Dense(DenseOperator),
}

/// Time-parameterized unitary on a labelled system ⊗ environment register.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedEvolution {
    labels: Vec<QubitRole>,
    form: EvolutionForm,
}

impl DilatedEvolution {
    pub fn from_rotations(labels: Vec<QubitRole>, rotations: Vec<Rotation>) -> Result<Self> {
        for r in &rotations {
            if r.pauli.n_qubits() != labels.len() {
                return Err(ZenoError::SizeMismatch {
                    expected: labels.len(),
                    found: r.pauli.n_qubits(),
                });
            }
            if !r.rate.is_finite() {
                return Err(ZenoError::InvalidParameter(format!("rotation rate {}", r.rate)));
            }
        }
        Ok(Self {
            labels,
            form: EvolutionForm::Rotations(rotations),
        })
    }

    pub fn from_generator(labels: Vec<QubitRole>, generator: DenseOperator) -> Result<Self> {
        let expected = 1usize << labels.len();
        if generator.dim() != expected {
            return Err(ZenoError::SizeMismatch {
                expected,
                found: generator.dim(),
            });
        }
        generator.ensure_hermitian()?;
        Ok(Self {
            labels,
            form: EvolutionForm::Dense(generator),
        })
    }

    pub fn labels(&self) -> &[QubitRole] {
        &self.labels
    }

    pub fn form(&self) -> &EvolutionForm {
        &self.form
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn layout(&self) -> RegisterLayout {
        RegisterLayout::new(&self.labels)
    }

    /// Largest rotation rate, or the row-sum norm of a dense generator.
    pub fn characteristic_rate(&self) -> f64 {
        match &self.form {
            EvolutionForm::Rotations(rs) => rs.iter().map(|r| r.rate.abs()).fold(0.0, f64::max),
            EvolutionForm::Dense(g) => {
                let m = g.matrix();
                (0..g.dim())
                    .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.labels() != self.labels.as_slice() {
            return Err(ZenoError::LabelMismatch(format!(
                "state labels {:?} vs dilation labels {:?}",
                psi.labels(),
                self.labels
            )));
        }
        match &self.form {
            EvolutionForm::Rotations(rs) => {
                let mut out = psi.clone();
                for r in rs {
                    out = pauli_rotation_apply(&r.pauli, r.rate * t, &out)?;
                }
                Ok(out)
            }
            EvolutionForm::Dense(g) => {
                let u = hermitian_expm(g, t)?;
                StateVector::from_raw(u.apply_vec(psi.amplitudes()), psi.labels().to_vec())
            }
        }
    }

    /// Dense `U(t)`, built column by column from [`DilatedEvolution::evolve`].
    pub fn unitary(&self, t: f64, cap: usize) -> Result<DenseOperator> {
        let n = self.n_qubits();
        if n > cap {
            return Err(ZenoError::DenseCapExceeded { qubits: n, cap });
        }
        if let EvolutionForm::Dense(g) = &self.form {
            return hermitian_expm(g, t);
        }
        let dim = 1usize << n;
        let cols = (0..dim)
            .map(|j| {
                let basis = StateVector::basis(self.labels.clone(), j)?;
                Ok(self.evolve(&basis, t)?.into_amplitudes())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseOperator::from_fn(dim, |i, j| cols[j][i]))
    }
}

/// Free-function form of [`DilatedEvolution::evolve`].
pub fn evolve(u: &DilatedEvolution, psi: &StateVector, t: f64) -> Result<StateVector> {
    u.evolve(psi, t)
}

/// `N` system qubits each coupled to its own environment qubit:
/// `∏_i exp(-i ω0 Z_i t / 2) exp(-i Γ Z_i X_{E,i} t / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingCouplingModel {
    pub n: usize,
    pub omega0: f64,
    pub gamma: f64,
}

impl DephasingCouplingModel {
    pub fn new(n: usize, omega0: f64, gamma: f64) -> Result<Self> {
        if n < 1 {
            return Err(ZenoError::InvalidParameter("model needs N >= 1".into()));
        }
        if !omega0.is_finite() || !gamma.is_finite() {
            return Err(ZenoError::InvalidParameter("rates must be finite".into()));
        }
        Ok(Self { n, omega0, gamma })
    }

    /// `N` SYSTEM labels followed by `N` ENVIRONMENT labels.
    pub fn labels(&self) -> Vec<QubitRole> {
        let mut labels = vec![QubitRole::System; self.n];
        labels.extend(vec![QubitRole::Environment; self.n]);
        labels
    }

    pub fn dilation(&self) -> DilatedEvolution {
        let n2 = 2 * self.n;
        let mut rotations = Vec::with_capacity(n2);
        for i in 0..self.n {
            rotations.push(Rotation::new(self.omega0, PauliTerm::on(n2, &[(i, Pauli::Z)], 1.0)));
            rotations.push(Rotation::new(
                self.gamma,
                PauliTerm::on(n2, &[(i, Pauli::Z), (self.n + i, Pauli::X)], 1.0),
            ));
        }
        DilatedEvolution::from_rotations(self.labels(), rotations).expect("sizes consistent")
    }

    /// `Σ_i (ω0 Z_i + Γ Z_i X_{E,i}) / 2`.
    pub fn hamiltonian(&self) -> OperatorSum {
        match generator(&self.dilation()) {
            Ok(Generator::Pauli(op)) => op,
            _ => unreachable!("rotation dilations have Pauli generators"),
        }
    }

    pub fn environment_ground(&self) -> StateVector {
        StateVector::zeros(self.n, QubitRole::Environment)
    }
}

/// `build_dephasing_model`.
pub fn build_dephasing_model(n: usize, omega0: f64, gamma: f64) -> Result<DilatedEvolution> {
    Ok(DephasingCouplingModel::new(n, omega0, gamma)?.dilation())
}

/// Kraus operators of a dilation at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<DenseOperator>,
    pub time: f64,
    pub completeness_residual: f64,
}

impl KrausSet {
    pub fn new(operators: Vec<DenseOperator>, time: f64) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| ZenoError::InvalidParameter("empty Kraus set".into()))?;
        let dim = first.dim();
        let mut sum = DenseOperator::zeros(dim);
        for k in &operators {
            sum = sum.add(&k.adjoint().mul(k)?)?;
        }
        let completeness_residual = sum.max_abs_diff(&DenseOperator::identity(dim));
        Ok(Self {
            operators,
            time,
            completeness_residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn apply(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        apply_channel(self, rho)
    }
}

/// `Π_l(t) = (I ⊗ <l|) U(t) (I ⊗ |0>)`, in environment basis order with
/// vanishing blocks dropped.
pub fn kraus_from_dilation(u: &DilatedEvolution, t: f64) -> Result<KrausSet> {
    kraus_from_dilation_capped(u, t, DEFAULT_DENSE_CAP)
}

pub fn kraus_from_dilation_capped(u: &DilatedEvolution, t: f64, cap: usize) -> Result<KrausSet> {
    let layout = u.layout();
    for k in [layout.n_system(), layout.n_environment()] {
        if k > cap {
            return Err(ZenoError::DenseCapExceeded { qubits: k, cap });
        }
    }
    let (sd, ed) = (layout.system_dim(), layout.environment_dim());
    let columns = (0..sd)
        .map(|s| {
            let input = StateVector::basis(u.labels().to_vec(), layout.join(s, 0))?;
            Ok(u.evolve(&input, t)?.into_amplitudes())
        })
        .collect::<Result<Vec<_>>>()?;
    let operators: Vec<DenseOperator> = (0..ed)
        .map(|l| DenseOperator::from_fn(sd, |i, j| columns[j][layout.join(i, l)]))
        .filter(|k| k.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() >= KRAUS_PRUNE)
        .collect();
    KrausSet::new(operators, t)
}

/// `Σ_l Π_l ρ Π_l†`.
pub fn apply_channel(k: &KrausSet, rho: &DenseOperator) -> Result<DenseOperator> {
    if rho.dim() != k.dim() {
        return Err(ZenoError::SizeMismatch {
            expected: k.dim(),
            found: rho.dim(),
        });
    }
    let mut out = DenseOperator::zeros(rho.dim());
    for op in &k.operators {
        out = out.add(&op.mul(rho)?.mul(&op.adjoint())?)?;
    }
    Ok(out)
}

/// Generator `G = (1/i) (dU†/dt) U |_{t=0}` of a dilation, so `U ≈ exp(-iGt)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Pauli(OperatorSum),
    Dense(DenseOperator),
}

impl Generator {
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        match self {
            Generator::Pauli(op) => op.to_dense(cap),
            Generator::Dense(g) => Ok(g.clone()),
        }
    }
}

/// Exact `Σ (rate/2) P` for rotation lists; Richardson-extrapolated central
/// difference for dense dilations.
pub fn generator(u: &DilatedEvolution) -> Result<Generator> {
    match u.form() {
        EvolutionForm::Rotations(rs) => {
            let terms = rs
                .iter()
                .map(|r| PauliTerm::real(r.rate / 2.0, r.pauli.factors.clone()))
                .collect();
            Ok(Generator::Pauli(
                OperatorSum::hermitian(u.n_qubits(), terms)?.simplified(0.0),
            ))
        }
        EvolutionForm::Dense(_) => {
            let rate = u.characteristic_rate();
            let h = 1e-4 / if rate > 0.0 { rate } else { 1.0 };
            let g = finite_difference_generator(|t| u.unitary(t, DEFAULT_DENSE_CAP), h)?;
            Ok(Generator::Dense(g))
        }
    }
}

/// `i dU/dt` at zero from `(U(h) - U(-h)) / 2h` with one Richardson level.
pub fn finite_difference_generator<F>(unitary: F, h: f64) -> Result<DenseOperator>
where
    F: Fn(f64) -> Result<DenseOperator>,
{
    let central = |step: f64| -> Result<DenseOperator> {
        Ok(unitary(step)?
            .sub(&unitary(-step)?)?
            .scale(Complex64::new(1.0 / (2.0 * step), 0.0)))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    let derivative = fine
        .scale(Complex64::new(4.0 / 3.0, 0.0))
        .sub(&coarse.scale(Complex64::new(1.0 / 3.0, 0.0)))?;
    // U = exp(-iGt) gives G = i dU/dt = (1/i) dU†/dt U at t = 0
    let g = derivative.scale(Complex64::new(0.0, 1.0));
    let residue = g.hermitian_residual();
    if residue > GENERATOR_RESIDUE_TOL {
        return Err(ZenoError::GeneratorResidue(residue));
    }
    Ok(g.add(&g.adjoint())?.scale(Complex64::new(0.5, 0.0)))
}

/// `A A† / tr(A A†)` for `A` with entries uniform in the unit square; a
/// full-rank test density matrix.
pub fn random_density<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> DenseOperator {
    let vals: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let a = DenseOperator::from_fn(dim, |i, j| vals[i * dim + j]);
    let p = a.mul(&a.adjoint()).expect("square matrices of equal size");
    let tr = p.trace().re;
    p.scale(Complex64::new(1.0 / tr, 0.0))
}
