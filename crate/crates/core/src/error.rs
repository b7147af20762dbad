use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid gate #{index}: {reason}")]
    InvalidGate { index: usize, reason: String },
    #[error("invalid register layout: {0}")]
    InvalidRegisters(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("circuit contains measurements or classically conditioned gates")]
    NotCoherent,
    #[error("width {width} exceeds the configured cap of {cap}")]
    WidthCap { width: usize, cap: usize },
    #[error("state support grew to {size} entries, above the cap of {cap}")]
    SupportCap { size: usize, cap: usize },
    #[error("forced outcome list exhausted after {0} measurements")]
    ForcedOutcomesExhausted(usize),
    #[error("forced outcome {outcome} on qubit {qubit} has probability {probability:.3e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },
    #[error("ancilla restoration failed for column {column}: fidelity {fidelity:.12}")]
    RestorationFailure { column: usize, fidelity: f64 },
    #[error("operator is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("state has {got} qubits, circuit expects {expected}")]
    StateWidth { expected: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("input is not a standard QFT circuit: {0}")]
    NotStandardQft(String),
    #[error("pipeline step failed: {0}")]
    Pipeline(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
