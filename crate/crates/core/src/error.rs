use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("spin index {index} out of range for {num_spins} spins")]
    SpinOutOfRange { index: usize, num_spins: usize },

    #[error("non-finite coefficient {0}")]
    NonFiniteCoefficient(f64),

    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,

    #[error("configuration has length {got}, expected {expected}")]
    ConfigLength { got: usize, expected: usize },

    #[error("basis-mode gate count needs a complete weight-limited basis, {unresolved} dimension(s) unresolved (minimum weights found: {weights:?})")]
    UnresolvedConstraints { unresolved: usize, weights: Vec<usize> },

    #[error("lattice {width}x{height} has fewer sites than {needed} qubits")]
    LatticeTooSmall { width: usize, height: usize, needed: usize },

    #[error("angle binding mismatch: {rz} Rz gates for {terms} terms")]
    AngleBinding { rz: usize, terms: usize },

    #[error("invalid QAOA parameters: {0}")]
    InvalidParams(String),

    #[error("{qubits} qubits exceeds the simulator cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("monomial count {count} exceeds the expansion cap {cap}")]
    ExpansionOverflow { count: usize, cap: usize },

    #[error("Pauli-sum parse error on line {line}: {msg}")]
    PauliParse { line: usize, msg: String },

    #[error("replication factor must be at least 2, got {0}")]
    ReplicationFactor(usize),

    #[error("degenerate abscissa: linear fit needs at least two distinct x values")]
    DegenerateFit,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("routing invariant violated: {0}")]
    Routing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
