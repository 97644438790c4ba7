//! Complex linear-algebra substrate: labelled qubit registers, Pauli-sum
//! operators, small dense matrices and the expectation/variance machinery.
//!
//! Convention: qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the
//! amplitude index. Constructors in this crate put SYSTEM qubits first, so
//! they occupy the most significant bits and ENVIRONMENT the least.

mod dense;
mod pauli;
mod state;

pub use dense::{hermitian_expm, partial_trace, DenseOperator, DENSE_TOL};
pub use pauli::{apply_operator, pauli_rotation_apply, to_dense, OperatorSum, Pauli, PauliTerm};
pub use state::{compose_state, tensor_state, QubitRole, RegisterLayout, StateVector, NORM_TOL};

use num_complex::Complex64;

use crate::error::{Result, ZenoError};

/// Default largest register converted to a dense matrix.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Imaginary residue allowed on an expectation value.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

/// Slack below zero tolerated on a variance before it is treated as an error.
pub const VARIANCE_NEG_TOL: f64 = 1e-12;

/// Anything that can act on a state as a Hermitian operator.
pub trait Observable {
    fn n_qubits(&self) -> usize;
    fn ensure_hermitian(&self) -> Result<()>;
    /// `O|psi>`, unnormalized.
    fn apply(&self, psi: &StateVector) -> Result<StateVector>;
}

impl Observable for OperatorSum {
    fn n_qubits(&self) -> usize {
        OperatorSum::n_qubits(self)
    }

    fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            let residual = self
                .terms()
                .iter()
                .map(|t| t.coefficient.im.abs())
                .fold(0.0, f64::max);
            Err(ZenoError::NotHermitian { residual })
        }
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        OperatorSum::apply(self, psi)
    }
}

impl Observable for DenseOperator {
    fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    fn ensure_hermitian(&self) -> Result<()> {
        DenseOperator::ensure_hermitian(self)
    }

    fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(ZenoError::SizeMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        StateVector::from_raw(self.apply_vec(psi.amplitudes()), psi.labels().to_vec())
    }
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > EXPECTATION_IMAG_TOL * z.re.abs().max(1.0) {
        return Err(ZenoError::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// `Re <psi|O|psi>`.
pub fn expectation<O: Observable + ?Sized>(op: &O, psi: &StateVector) -> Result<f64> {
    op.ensure_hermitian()?;
    let v = op.apply(psi)?;
    real_part(psi.inner(&v)?)
}

/// `||O psi||^2 - <psi|O|psi>^2`, clamped at zero.
pub fn variance<O: Observable + ?Sized>(op: &O, psi: &StateVector) -> Result<f64> {
    op.ensure_hermitian()?;
    let v = op.apply(psi)?;
    variance_from_image(psi, &v)
}

/// Variance given `v = O psi` already computed.
pub(crate) fn variance_from_image(psi: &StateVector, v: &StateVector) -> Result<f64> {
    let mean = real_part(psi.inner(v)?)?;
    let second = v.norm_sqr();
    let var = second - mean * mean;
    if var < -VARIANCE_NEG_TOL * second.max(1.0) {
        return Err(ZenoError::NegativeVariance(var));
    }
    Ok(var.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use QubitRole::*;

    fn z1() -> OperatorSum {
        OperatorSum::hermitian(1, vec![PauliTerm::parse("Z", 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn single_qubit_expectations() {
        assert!(expectation(&z1(), &StateVector::plus(1, System)).unwrap().abs() < 1e-15);
        assert!((expectation(&z1(), &StateVector::zeros(1, System)).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&z1(), &StateVector::zeros(1, System)).unwrap().abs() < 1e-15);
        assert!((variance(&z1(), &StateVector::plus(1, System)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_total_z_cancels() {
        for n in 1..=6 {
            let terms = (0..n).map(|q| PauliTerm::on(n, &[(q, Pauli::Z)], 1.0)).collect();
            let op = OperatorSum::hermitian(n, terms).unwrap();
            let ghz = StateVector::ghz(n, System).unwrap();
            assert!(expectation(&op, &ghz).unwrap().abs() < 1e-14);
            assert!((variance(&op, &ghz).unwrap() - (n * n) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn dephasing_generator_variance_on_ghz() {
        // (ω0 ΣZ_i + Γ ΣZ_i X_i)/2 on GHZ_N ⊗ |0..0>: (N²ω0² + NΓ²)/4
        let (w, g) = (0.8, 1.3);
        for n in 1..=5 {
            let mut terms = Vec::new();
            for i in 0..n {
                terms.push(PauliTerm::on(2 * n, &[(i, Pauli::Z)], w / 2.0));
                terms.push(PauliTerm::on(2 * n, &[(i, Pauli::Z), (n + i, Pauli::X)], g / 2.0));
            }
            let h = OperatorSum::hermitian(2 * n, terms).unwrap();
            let psi = StateVector::ghz(n, System)
                .unwrap()
                .tensor(&StateVector::zeros(n, Environment));
            let nf = n as f64;
            let want = (nf * nf * w * w + nf * g * g) / 4.0;
            assert!((variance(&h, &psi).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let op = OperatorSum::general(1, vec![PauliTerm::parse("Z", 1.0).unwrap()]).unwrap();
        assert!(expectation(&op, &StateVector::zeros(1, System)).is_err());
    }

    #[test]
    fn dense_observable_agrees_with_pauli() {
        let op = OperatorSum::hermitian(
            2,
            vec![PauliTerm::parse("ZX", 0.7).unwrap(), PauliTerm::parse("YI", -0.3).unwrap()],
        )
        .unwrap();
        let psi = StateVector::new(
            vec![
                Complex64::new(0.1, 0.2),
                Complex64::new(-0.4, 0.3),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.2, -0.6),
            ],
            vec![System, Environment],
        )
        .unwrap();
        let dense = op.to_dense(DEFAULT_DENSE_CAP).unwrap();
        assert!((variance(&op, &psi).unwrap() - variance(&dense, &psi).unwrap()).abs() < 1e-14);
        assert!((expectation(&op, &psi).unwrap() - expectation(&dense, &psi).unwrap()).abs() < 1e-14);
    }
}
