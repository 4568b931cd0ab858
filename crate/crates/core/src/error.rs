use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("Hamiltonian is not Hermitian (residual {0:.3e})")]
    NonHermitianHamiltonian(f64),
    #[error("Choi matrix is not positive (eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("map is not diagonalizable (eigenvector condition number {0:.3e})")]
    DefectiveMap(f64),
    #[error("negative real eigenvalue {0:.6} has no partner")]
    UnpairedNegativeEigenvalue(f64),
    #[error("complex eigenvalue {re:.6}{im:+.6}i has no conjugate partner")]
    UnpairedComplexEigenvalue { re: f64, im: f64 },
    #[error("eigenvalue of modulus {0:.3e} has no logarithm")]
    ZeroEigenvalue(f64),
    #[error("superoperator does not preserve Hermiticity (residual {0:.3e})")]
    NotHermiticityPreserving(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("integrator diverged at t = {t}: {reason}")]
    IntegratorDiverged { t: f64, reason: String },
    #[error("trace preservation lost (residual {0:.3e})")]
    AccuracyLoss(f64),
    #[error("generator is not of Lindblad form: {0}")]
    NotLindbladian(String),
    #[error("reassembled Lindbladian differs by {0:.3e}")]
    ExtractionResidual(f64),
    #[error("no polynomial root satisfied h(T) = {re:.6}{im:+.6}i")]
    NoConvergedRoot { re: f64, im: f64 },
    #[error("spectral decomposition unusable: {0}")]
    DefectiveDecomposition(String),
    #[error("no valid memory kernel for tau in [{lo:.4e}, {hi:.4e}]")]
    NoValidKernelInRange { lo: f64, hi: f64 },
}
