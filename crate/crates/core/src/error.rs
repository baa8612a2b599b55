use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),

    #[error("index {index} out of range for {n} qubits")]
    OutOfRange { index: usize, n: usize },

    #[error("invalid Pauli term: {0}")]
    InvalidTerm(String),

    #[error("operator is not Hermitian (max imaginary residue {0:e})")]
    NotHermitian(f64),

    #[error("duplicate mode {0} in pair excitation")]
    DuplicateMode(usize),

    #[error("inconsistent level scheme: {0}")]
    Scheme(String),

    #[error("empty sector: {0}")]
    EmptySector(String),

    #[error("parameter length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("identity Pauli evolution has no gate form; fold it into the global phase")]
    IdentityEvolution,

    #[error("unsupported gate for this operation: {0}")]
    UnsupportedGate(String),

    #[error("circuit contains measurements; the statevector path is measurement-free")]
    MeasurementInStatevector,

    #[error("invalid noise specification: {0}")]
    Noise(String),

    #[error("unknown backend label: {0}")]
    UnknownBackend(String),

    #[error("post-selection kept {kept} of {shots} shots")]
    PostSelection { kept: usize, shots: usize },

    #[error("non-finite cost value {0}")]
    NonFiniteCost(f64),

    #[error("flat cost landscape during calibration (mean |df| = {0:e}); re-randomise the initial point")]
    FlatLandscape(f64),

    #[error("invalid optimizer configuration: {0}")]
    Config(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("missing fit entry for iteration {0}")]
    MissingFit(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
