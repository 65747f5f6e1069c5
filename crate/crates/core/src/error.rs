use thiserror::Error;

/// Errors raised by the stabilizer engine and its experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("support has {support} qubits but the Clifford acts on {expected}")]
    SupportMismatch { support: usize, expected: usize },

    #[error("regions overlap at qubit {0}")]
    OverlappingRegions(usize),

    #[error("cannot measure the identity observable")]
    IdentityObservable,

    #[error("invalid Pauli character {0:?}")]
    InvalidPauliChar(char),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("density matrix has {n} qubits; the dense oracle is capped at {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("density matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
