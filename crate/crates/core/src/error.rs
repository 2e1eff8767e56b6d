use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("magnetization {l} out of range for N = {n}")]
    MagnetizationOutOfRange { l: i64, n: u32 },

    #[error("invalid magnetization band [{min}, {max}]")]
    InvalidBand { min: i64, max: i64 },

    #[error("{what} requires the {expected} mode convention")]
    WrongConvention { what: &'static str, expected: &'static str },

    #[error("mode {mode} is not part of the {convention} convention")]
    ModeAbsent { mode: &'static str, convention: &'static str },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("operator image leaves the target basis (state {state:?})")]
    ImageOutsideBasis { state: [u32; 3] },

    #[error("operator leaks weight {leak:e} outside the target block")]
    BlockLeak { leak: f64 },

    #[error("dimension {dim} exceeds the dense solver cap {cap}; filter the basis into magnetization blocks")]
    DimensionCap { dim: usize, cap: usize },

    #[error("operator is not hermitian (max |A - A^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("state has no weight in the two-mode subspace (total depletion)")]
    SubspaceDepleted,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quantum numbers out of range: {0}")]
    QuantumNumbers(String),

    #[error("gamma = 0 is singular for the spinor Hamiltonian; use the n0_only protocol instead")]
    SpinorAtZeroGamma,

    #[error("integration step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("every time point hit the <X_z> sentinel")]
    AllSentinel,

    #[error("time grid must start at 0 and be strictly increasing")]
    BadTimeGrid,

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
