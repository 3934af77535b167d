use thiserror::Error;

/// Errors raised while building, lowering or simulating circuits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "layout must have at least one node and one qubit per node (got {nodes}x{qubits_per_node})"
    )]
    InvalidLayout {
        nodes: usize,
        qubits_per_node: usize,
    },

    #[error("qubit (local {local}, node {node}) is outside a {nodes}x{qubits_per_node} layout")]
    Addressing {
        local: usize,
        node: usize,
        nodes: usize,
        qubits_per_node: usize,
    },

    #[error("wire {wire} is outside a register of width {width}")]
    WireOutOfRange { wire: usize, width: usize },

    #[error("rotation index difference must be at least 1, got {0}")]
    InvalidDistance(i64),

    #[error("control (global {control}) must precede target (global {target})")]
    InvalidPair { control: usize, target: usize },

    #[error("tolerance must lie strictly between 0 and 1, got {0}")]
    InvalidTolerance(f64),

    #[error("{0} must be at least 1")]
    NonPositive(&'static str),

    #[error("register must contain at least one qubit")]
    EmptyRegister,

    #[error("program needs {needed} qubits but the simulator cap is {cap}")]
    Capacity { needed: usize, cap: usize },

    #[error("no free communication qubit: ancilla budget {budget} is too small")]
    AncillaBudget { budget: usize },

    #[error("measurement outcome has probability {0:e}; state cannot be renormalised")]
    NumericalDegeneracy(f64),

    #[error("wire {wire} is still entangled with the register (residual weight {weight:e})")]
    AncillaNotDisentangled { wire: usize, weight: f64 },

    #[error("classical bit {0} read before it was written")]
    UnwrittenBit(usize),

    #[error("classical bit {0} written twice")]
    BitRewritten(usize),

    #[error("dimension mismatch: {left} vs {right} amplitudes")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis index {index} does not fit in {qubits} qubits")]
    BasisIndex { index: u64, qubits: usize },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
