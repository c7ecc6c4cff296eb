use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin index {index} out of range for a {n_spins}-spin register")]
    SpinIndex { index: usize, n_spins: usize },

    #[error("register size {0} is outside the supported range 1..=8")]
    RegisterSize(usize),

    #[error("a dipolar pair needs two distinct spins, got ({0}, {0})")]
    SamePair(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("harmonic m = {0} is not supported (expected 1 or 2)")]
    Harmonic(u32),

    #[error("Hamiltonian has a non-finite entry at t = {0:e} s")]
    NonFinite(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("density matrix is invalid: {0}")]
    InvalidState(String),

    #[error("matrix dimension {found} does not match the expected {expected}")]
    Dimension { expected: usize, found: usize },

    #[error("Hamiltonian is not a pure bilinear two-spin coupling (local part {0:e})")]
    NotBilinear(f64),

    #[error("no geometry reproduces the requested period: sin^2 would be {0}")]
    NoGeometry(f64),

    #[error("coupling strength is zero")]
    ZeroCoupling,

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
