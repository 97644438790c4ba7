use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::DenseOperator;
use super::state::StateVector;
use crate::error::{Result, ZenoError};

/// Coefficients whose imaginary part exceeds this are not Hermitian.
pub const HERMITIAN_COEFF_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const IM: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `a * b = phase * c`.
    pub fn product(a: Pauli, b: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (IM, Z),
            (Y, X) => (-IM, Z),
            (Y, Z) => (IM, X),
            (Z, Y) => (-IM, X),
            (Z, X) => (IM, Y),
            (X, Z) => (-IM, Y),
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -IM], [IM, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}


impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A coefficient times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: Complex64,
    pub factors: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: Complex64, factors: Vec<Pauli>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }

    pub fn real(coefficient: f64, factors: Vec<Pauli>) -> Self {
        Self::new(Complex64::new(coefficient, 0.0), factors)
    }

    pub fn identity(n: usize, coefficient: f64) -> Self {
        Self::real(coefficient, vec![Pauli::I; n])
    }

    /// Places the given Paulis on an `n`-qubit register, identity elsewhere.
    pub fn on(n: usize, placed: &[(usize, Pauli)], coefficient: f64) -> Self {
        let mut factors = vec![Pauli::I; n];
        for &(q, p) in placed {
            factors[q] = p;
        }
        Self::real(coefficient, factors)
    }

    /// Parses strings like `"ZIX"`; qubit 0 is the first character.
    pub fn parse(s: &str, coefficient: f64) -> Result<Self> {
        let factors = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| ZenoError::InvalidParameter(format!("bad Pauli symbol {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::real(coefficient, factors))
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&p| p == Pauli::I)
    }

    /// Same string with coefficient one.
    pub fn unit(&self) -> Self {
        Self::new(ONE, self.factors.clone())
    }

    /// Bit masks of the string: flipped bits, phase bits (Z or Y) and the
    /// number of Y factors. Qubit `q` maps to bit `n - 1 - q`.
    fn masks(&self) -> (usize, usize, usize) {
        let n = self.factors.len();
        let mut x = 0;
        let mut z = 0;
        let mut ny = 0;
        for (q, p) in self.factors.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
                Pauli::Z => z |= bit,
            }
        }
        (x, z, ny)
    }

    /// `out += scale * P * input`, ignoring the stored coefficient.
    pub(crate) fn accumulate_string(&self, scale: Complex64, input: &[Complex64], out: &mut [Complex64]) {
        let (x, z, ny) = self.masks();
        let y_phase = [ONE, IM, -ONE, -IM][ny % 4];
        let s = scale * y_phase;
        for (i, a) in input.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[i ^ x] += s * sign * a;
        }
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let anti = self
            .factors
            .iter()
            .zip(&other.factors)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliTerm) -> PauliTerm {
        let mut phase = self.coefficient * other.coefficient;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(&a, &b)| {
                let (ph, p) = Pauli::product(a, b);
                phase *= ph;
                p
            })
            .collect();
        PauliTerm::new(phase, factors)
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|p| p.to_string()).collect()
    }
}

/// A sum of Pauli strings on a fixed register size.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    hermitian: bool,
}

impl OperatorSum {
    /// Hermitian sum: every coefficient must be real to [`HERMITIAN_COEFF_TOL`].
    pub fn hermitian(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        Self::check_sizes(n_qubits, &terms)?;
        let residual = terms
            .iter()
            .map(|t| t.coefficient.im.abs())
            .fold(0.0, f64::max);
        if residual > HERMITIAN_COEFF_TOL {
            return Err(ZenoError::NotHermitian { residual });
        }
        let terms = terms
            .into_iter()
            .map(|t| PauliTerm::new(Complex64::new(t.coefficient.re, 0.0), t.factors))
            .collect();
        Ok(Self {
            n_qubits,
            terms,
            hermitian: true,
        })
    }

    pub fn general(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        Self::check_sizes(n_qubits, &terms)?;
        Ok(Self {
            n_qubits,
            terms,
            hermitian: false,
        })
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
            hermitian: true,
        }
    }

    fn check_sizes(n: usize, terms: &[PauliTerm]) -> Result<()> {
        for t in terms {
            if t.n_qubits() != n {
                return Err(ZenoError::SizeMismatch {
                    expected: n,
                    found: t.n_qubits(),
                });
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Merges repeated strings and drops coefficients below `tol`.
    /// First-appearance order is kept.
    pub fn simplified(&self, tol: f64) -> OperatorSum {
        let mut index: HashMap<Vec<Pauli>, usize> = HashMap::new();
        let mut merged: Vec<PauliTerm> = Vec::new();
        for t in &self.terms {
            match index.get(&t.factors) {
                Some(&k) => merged[k].coefficient += t.coefficient,
                None => {
                    index.insert(t.factors.clone(), merged.len());
                    merged.push(t.clone());
                }
            }
        }
        merged.retain(|t| t.coefficient.norm() > tol);
        OperatorSum {
            n_qubits: self.n_qubits,
            terms: merged,
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, factor: f64) -> OperatorSum {
        OperatorSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm::new(t.coefficient * factor, t.factors.clone()))
                .collect(),
            hermitian: self.hermitian,
        }
    }

    pub fn plus(&self, other: &OperatorSum) -> Result<OperatorSum> {
        if self.n_qubits != other.n_qubits {
            return Err(ZenoError::SizeMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(OperatorSum {
            n_qubits: self.n_qubits,
            terms,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// True when all strings pairwise commute.
    pub fn is_commuting(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, a)| {
            self.terms[i + 1..].iter().all(|b| a.commutes_with(b))
        })
    }

    /// `sum_k c_k P_k |psi>`, term by term. The result is not normalized.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.n_qubits() != self.n_qubits {
            return Err(ZenoError::SizeMismatch {
                expected: self.n_qubits,
                found: psi.n_qubits(),
            });
        }
        let mut out = vec![ZERO; psi.dim()];
        for t in &self.terms {
            t.accumulate_string(t.coefficient, psi.amplitudes(), &mut out);
        }
        StateVector::from_raw(out, psi.labels().to_vec())
    }

    /// Dense matrix of the sum. Fails above `cap` qubits.
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        if self.n_qubits > cap {
            return Err(ZenoError::DenseCapExceeded {
                qubits: self.n_qubits,
                cap,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        let mut col = vec![ZERO; dim];
        let mut basis = vec![ZERO; dim];
        for j in 0..dim {
            basis[j] = ONE;
            col.iter_mut().for_each(|c| *c = ZERO);
            for t in &self.terms {
                t.accumulate_string(t.coefficient, &basis, &mut col);
            }
            for (i, c) in col.iter().enumerate() {
                m[(i, j)] = *c;
            }
            basis[j] = ZERO;
        }
        Ok(DenseOperator::from_matrix(m))
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.coefficient.im == 0.0 {
                write!(f, "{}*{}", t.coefficient.re, t.label())?;
            } else {
                write!(f, "({})*{}", t.coefficient, t.label())?;
            }
        }
        Ok(())
    }
}

/// `apply_operator`: returns `O|psi>` without normalizing.
pub fn apply_operator(op: &OperatorSum, psi: &StateVector) -> Result<StateVector> {
    op.apply(psi)
}

/// `to_dense` with an explicit qubit cap.
pub fn to_dense(op: &OperatorSum, cap: usize) -> Result<DenseOperator> {
    op.to_dense(cap)
}

/// `cos(theta/2) psi - i sin(theta/2) P psi` for a Pauli string `P`.
/// The term's coefficient is ignored; only its string is used.
pub fn pauli_rotation_apply(p: &PauliTerm, theta: f64, psi: &StateVector) -> Result<StateVector> {
    if p.n_qubits() != psi.n_qubits() {
        return Err(ZenoError::SizeMismatch {
            expected: psi.n_qubits(),
            found: p.n_qubits(),
        });
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let mut out: Vec<Complex64> = psi.amplitudes().iter().map(|a| a * c).collect();
    p.accumulate_string(Complex64::new(0.0, -s), psi.amplitudes(), &mut out);
    StateVector::from_raw(out, psi.labels().to_vec())
}
