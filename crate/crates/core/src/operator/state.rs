use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::DenseOperator;
use crate::error::{Result, ZenoError};

/// Normalization tolerance shared by every state constructor.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitRole {
    System,
    Environment,
}

/// Maps between a full register index and its (system, environment) parts.
///
/// Qubit `q` in label order lives at bit `n - 1 - q` of the full index, so the
/// first label is the most significant bit. Within the system (or environment)
/// sub-index the same rule applies to the sub-register's own label order.
#[derive(Debug, Clone)]
pub struct RegisterLayout {
    n: usize,
    sys_bits: Vec<usize>,
    env_bits: Vec<usize>,
}

impl RegisterLayout {
    pub fn new(labels: &[QubitRole]) -> Self {
        let n = labels.len();
        let mut sys_bits = Vec::new();
        let mut env_bits = Vec::new();
        for (q, role) in labels.iter().enumerate() {
            let bit = n - 1 - q;
            match role {
                QubitRole::System => sys_bits.push(bit),
                QubitRole::Environment => env_bits.push(bit),
            }
        }
        Self { n, sys_bits, env_bits }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn n_system(&self) -> usize {
        self.sys_bits.len()
    }

    pub fn n_environment(&self) -> usize {
        self.env_bits.len()
    }

    pub fn system_dim(&self) -> usize {
        1 << self.sys_bits.len()
    }

    pub fn environment_dim(&self) -> usize {
        1 << self.env_bits.len()
    }

    fn gather(bits: &[usize], full: usize) -> usize {
        let k = bits.len();
        bits.iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (((full >> b) & 1) << (k - 1 - j)))
    }

    fn scatter(bits: &[usize], sub: usize) -> usize {
        let k = bits.len();
        bits.iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (((sub >> (k - 1 - j)) & 1) << b))
    }

    pub fn split(&self, full: usize) -> (usize, usize) {
        (
            Self::gather(&self.sys_bits, full),
            Self::gather(&self.env_bits, full),
        )
    }

    pub fn join(&self, sys: usize, env: usize) -> usize {
        Self::scatter(&self.sys_bits, sys) | Self::scatter(&self.env_bits, env)
    }
}

/// Pure state of a labelled qubit register.
///
/// Normalizing constructors guarantee unit norm to [`NORM_TOL`]; results of
/// operator application (see [`StateVector::from_raw`]) may be unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    labels: Vec<QubitRole>,
}

impl StateVector {
    /// Builds a state and normalizes it.
    pub fn new(amplitudes: Vec<Complex64>, labels: Vec<QubitRole>) -> Result<Self> {
        Self::from_raw(amplitudes, labels)?.normalized()
    }

    /// Builds a state without normalizing.
    pub fn from_raw(amplitudes: Vec<Complex64>, labels: Vec<QubitRole>) -> Result<Self> {
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(ZenoError::SizeMismatch {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, labels })
    }

    pub fn from_real(amplitudes: &[f64], labels: Vec<QubitRole>) -> Result<Self> {
        Self::new(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            labels,
        )
    }

    /// Computational basis state `|index>`.
    pub fn basis(labels: Vec<QubitRole>, index: usize) -> Result<Self> {
        let dim = 1usize << labels.len();
        if index >= dim {
            return Err(ZenoError::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes: amps,
            labels,
        })
    }

    /// `|0...0>` on `n` qubits of one role.
    pub fn zeros(n: usize, role: QubitRole) -> Self {
        Self::basis(vec![role; n], 0).expect("index 0 always valid")
    }

    /// `|+>^n`.
    pub fn plus(n: usize, role: QubitRole) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amplitudes: vec![a; dim],
            labels: vec![role; n],
        }
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `n >= 1` qubits.
    pub fn ghz(n: usize, role: QubitRole) -> Result<Self> {
        if n == 0 {
            return Err(ZenoError::InvalidParameter("GHZ state needs n >= 1".into()));
        }
        let dim = 1usize << n;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] += h;
        amps[dim - 1] += h;
        Ok(Self {
            amplitudes: amps,
            labels: vec![role; n],
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn labels(&self) -> &[QubitRole] {
        &self.labels
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(ZenoError::SizeMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(ZenoError::ZeroNorm);
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(self)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
        self
    }

    /// Kronecker product; labels are concatenated.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        StateVector {
            amplitudes: amps,
            labels,
        }
    }

    /// Same amplitudes under different labels (same qubit count).
    pub fn relabeled(&self, labels: Vec<QubitRole>) -> Result<Self> {
        Self::from_raw(self.amplitudes.clone(), labels)
    }

    /// `|psi><psi|`.
    pub fn density(&self) -> DenseOperator {
        DenseOperator::from_fn(self.dim(), |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        })
    }

    /// Reduced density operator on the qubits carrying role `keep`,
    /// contracted directly from the amplitudes.
    pub fn reduced_density(&self, keep: QubitRole) -> DenseOperator {
        let layout = RegisterLayout::new(&self.labels);
        let (kd, td) = match keep {
            QubitRole::System => (layout.system_dim(), layout.environment_dim()),
            QubitRole::Environment => (layout.environment_dim(), layout.system_dim()),
        };
        let at = |k: usize, t: usize| match keep {
            QubitRole::System => self.amplitudes[layout.join(k, t)],
            QubitRole::Environment => self.amplitudes[layout.join(t, k)],
        };
        DenseOperator::from_fn(kd, |i, j| (0..td).map(|t| at(i, t) * at(j, t).conj()).sum())
    }
}

/// Product state `sys ⊗ env` placed on an arbitrary labelled register.
pub fn compose_state(labels: &[QubitRole], sys: &StateVector, env: &StateVector) -> Result<StateVector> {
    let layout = RegisterLayout::new(labels);
    if sys.dim() != layout.system_dim() {
        return Err(ZenoError::SizeMismatch {
            expected: layout.system_dim(),
            found: sys.dim(),
        });
    }
    if env.dim() != layout.environment_dim() {
        return Err(ZenoError::SizeMismatch {
            expected: layout.environment_dim(),
            found: env.dim(),
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << labels.len()];
    for (s, a) in sys.amplitudes().iter().enumerate() {
        for (e, b) in env.amplitudes().iter().enumerate() {
            amps[layout.join(s, e)] = a * b;
        }
    }
    StateVector::from_raw(amps, labels.to_vec())
}

/// Kronecker product of two states.
pub fn tensor_state(a: &StateVector, b: &StateVector) -> StateVector {
    a.tensor(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use QubitRole::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tensor_basis_states() {
        let z = StateVector::zeros(1, System);
        let e = StateVector::zeros(1, Environment);
        let p = z.tensor(&e);
        assert_eq!(p.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(p.labels(), &[System, Environment]);
    }

    #[test]
    fn tensor_plus_with_zero() {
        let p = StateVector::plus(1, System).tensor(&StateVector::zeros(1, Environment));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in p.amplitudes().iter().zip([h, 0.0, h, 0.0]) {
            assert!((a - c(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_bell_with_zero_lands_on_0_and_6() {
        let bell = StateVector::ghz(2, System).unwrap();
        let p = tensor_state(&bell, &StateVector::zeros(1, Environment));
        assert_eq!(p.dim(), 8);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in p.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 6 { h } else { 0.0 };
            assert!((a - c(want)).norm() < 1e-15, "index {i}");
        }
        assert!((p.norm_sqr() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn new_normalizes_and_rejects_bad_input() {
        let s = StateVector::from_real(&[3.0, 4.0], vec![System]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);
        assert_eq!(
            StateVector::from_real(&[0.0, 0.0], vec![System]),
            Err(ZenoError::ZeroNorm)
        );
        assert!(matches!(
            StateVector::from_real(&[1.0, 0.0, 0.0], vec![System]),
            Err(ZenoError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn layout_split_join_roundtrip() {
        let labels = vec![Environment, System, Environment, System];
        let layout = RegisterLayout::new(&labels);
        for full in 0..16 {
            let (s, e) = layout.split(full);
            assert_eq!(layout.join(s, e), full);
        }
        // qubit 1 (system, first) is bit 2; qubit 3 (system, second) is bit 0
        assert_eq!(layout.split(0b0100), (0b10, 0b00));
        assert_eq!(layout.split(0b1000), (0b00, 0b10));
    }

    #[test]
    fn reduced_density_of_product_state() {
        let s = StateVector::plus(1, System);
        let full = s.tensor(&StateVector::zeros(1, Environment));
        let rho = full.reduced_density(System);
        assert!(rho.max_abs_diff(&s.density()) < 1e-15);
    }
}
