use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::state::{QubitRole, RegisterLayout};
use crate::error::{Result, ZenoError};

/// Tolerance for Hermiticity and unitarity checks on dense matrices.
pub const DENSE_TOL: f64 = 1e-10;

/// Entries below this fraction of the largest are zeroed before an
/// eigendecomposition.
const EIGEN_FLUSH: f64 = 1e-15;

/// Square complex matrix used for small-register oracles and channels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(ZenoError::SizeMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        Self {
            matrix: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            matrix: &self.matrix * factor,
        }
    }

    pub fn kron(&self, other: &DenseOperator) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermitian_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |U U† - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let uu = &self.matrix * self.matrix.adjoint();
        Self::from_matrix(uu).max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let residual = self.hermitian_residual();
        if residual > DENSE_TOL * self.max_abs().max(1.0) {
            return Err(ZenoError::NotHermitian { residual });
        }
        Ok(())
    }

    /// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        self.ensure_hermitian()?;
        // Entries at rounding-noise level can stall the QR sweeps and leave an
        // inaccurate decomposition; flush them and check the reconstruction.
        let floor = EIGEN_FLUSH * self.max_abs();
        let sym = ((&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0))
            .map(|z| if z.norm() < floor { Complex64::new(0.0, 0.0) } else { z });
        let eig = SymmetricEigen::new(sym.clone());
        let recon = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l, 0.0)))
            * eig.eigenvectors.adjoint();
        let residual = (recon - &sym).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > DENSE_TOL * self.max_abs().max(1.0) {
            return Err(ZenoError::EigenNotConverged(residual));
        }
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    fn check_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(ZenoError::SizeMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// `exp(-i H t)` through the eigendecomposition of `H`.
pub fn hermitian_expm(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let (values, vectors) = h.hermitian_eigen()?;
    let dim = h.dim();
    let phases: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * t))
        .collect();
    let scaled = DMatrix::from_fn(dim, dim, |i, j| vectors[(i, j)] * phases[j]);
    Ok(DenseOperator::from_matrix(scaled * vectors.adjoint()))
}

/// Traces out every qubit whose role differs from `keep`.
pub fn partial_trace(rho: &DenseOperator, labels: &[QubitRole], keep: QubitRole) -> Result<DenseOperator> {
    let expected = 1usize << labels.len();
    if rho.dim() != expected {
        return Err(ZenoError::SizeMismatch {
            expected,
            found: rho.dim(),
        });
    }
    let layout = RegisterLayout::new(labels);
    let (kd, td) = match keep {
        QubitRole::System => (layout.system_dim(), layout.environment_dim()),
        QubitRole::Environment => (layout.environment_dim(), layout.system_dim()),
    };
    let index = |k: usize, t: usize| match keep {
        QubitRole::System => layout.join(k, t),
        QubitRole::Environment => layout.join(t, k),
    };
    let m = rho.matrix();
    Ok(DenseOperator::from_fn(kd, |i, j| {
        (0..td).map(|t| m[(index(i, t), index(j, t))]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{OperatorSum, PauliTerm, StateVector};
    use QubitRole::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli(s: &str, coeff: f64) -> DenseOperator {
        OperatorSum::hermitian(s.len(), vec![PauliTerm::parse(s, coeff).unwrap()])
            .unwrap()
            .to_dense(12)
            .unwrap()
    }

    /// Truncated Taylor series of `exp(-i H t)`, independent of the eigen route.
    fn taylor_expm(h: &DenseOperator, t: f64, terms: usize) -> DenseOperator {
        let a = h.scale(c(0.0, -t));
        let mut sum = DenseOperator::identity(h.dim());
        let mut term = DenseOperator::identity(h.dim());
        for k in 1..terms {
            term = term.mul(&a).unwrap().scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        sum
    }

    #[test]
    fn expm_at_zero_is_identity() {
        let u = hermitian_expm(&pauli("Z", 1.0), 0.0).unwrap();
        assert!(u.max_abs_diff(&DenseOperator::identity(2)) < 1e-15);
    }

    #[test]
    fn expm_z_pi_is_minus_identity() {
        let u = hermitian_expm(&pauli("Z", 1.0), std::f64::consts::PI).unwrap();
        assert!(u.max_abs_diff(&DenseOperator::identity(2).scale(c(-1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn expm_x_matches_taylor_series() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = pauli("X", 1.0);
        for _ in 0..20 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let u = hermitian_expm(&x, t).unwrap();
            assert!(u.max_abs_diff(&taylor_expm(&x, t, 30)) <= 1e-10);
            assert!(u.unitarity_residual() <= 1e-10);
        }
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = DenseOperator::from_fn(2, |i, j| if i == 0 && j == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(hermitian_expm(&m, 1.0), Err(ZenoError::NotHermitian { .. })));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = StateVector::from_real(&[0.6, 0.8], vec![System]).unwrap();
        let full = s.tensor(&StateVector::zeros(1, Environment));
        let rho = partial_trace(&full.density(), full.labels(), System).unwrap();
        assert!(rho.max_abs_diff(&s.density()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let bell = StateVector::ghz(2, System).unwrap().relabeled(vec![System, Environment]).unwrap();
        let rho = partial_trace(&bell.density(), bell.labels(), System).unwrap();
        assert!(rho.max_abs_diff(&DenseOperator::identity(2).scale(c(0.5, 0.0))) < 1e-15);
        let env = partial_trace(&bell.density(), bell.labels(), Environment).unwrap();
        assert!((env.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_dim_mismatch() {
        let rho = DenseOperator::identity(4);
        assert!(partial_trace(&rho, &[System, Environment, Environment], System).is_err());
    }
}
