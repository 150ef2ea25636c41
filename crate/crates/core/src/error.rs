use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("beamsplitter needs two distinct modes, got {0} twice")]
    IdenticalModes(usize),

    #[error("occupation tuple has {got} modes, state has {expected}")]
    ModeCountMismatch { expected: usize, got: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation order {needed} exceeds the hard cap {cap}")]
    TruncationCap { needed: u64, cap: u64 },

    #[error("photon budget {budget} too small for truncation m_max = {m_max}")]
    BudgetTooSmall { budget: i64, m_max: usize },

    #[error("negative photon budget: {0}")]
    NegativeBudget(i64),

    #[error("non-positive variance: {0}")]
    NonPositiveVariance(f64),

    #[error("distribution normalization defect {0:e} exceeds 1e-4")]
    NormalizationDefect(f64),

    #[error("fit needs at least 3 points above r = {r_min}, found {found}")]
    TooFewFitPoints { r_min: f64, found: usize },

    #[error("density matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
