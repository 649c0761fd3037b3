use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli character {ch:?} at position {position}")]
    InvalidPauliChar { ch: char, position: usize },

    #[error("Pauli string has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("{n_qubits} qubits exceeds the limit of {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },

    /// Raised when synthesis or replay leaves X components behind.
    #[error("group {group} not simultaneously diagonalized: {detail}")]
    NotDiagonalized { group: usize, detail: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// `true` for failures caused by the caller's input, as opposed to
    /// broken internal invariants. The CLI maps these to exit codes 2 and 3.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NotDiagonalized { .. } | Error::Invariant(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
