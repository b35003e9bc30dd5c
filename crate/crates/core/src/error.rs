use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between molecular input and sampled patterns.
///
/// Variants split into two families: input validation (bad shapes, bad
/// indices, schema problems) and numerical breakdown (unphysical states,
/// probabilities escaping `[0, 1]`, cutoffs too small). [`Error::is_numerical`]
/// tells them apart; the command-line tool maps them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("number of modes must be at least 1")]
    ZeroModes,

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("{what} is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { what: String, deviation: f64 },

    #[error("{what} must be finite")]
    NonFinite { what: String },

    #[error("mode index {index} out of range for {num_modes} modes")]
    ModeOutOfRange { index: usize, num_modes: usize },

    #[error("mode index {index} appears more than once")]
    DuplicateMode { index: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {deviation:.3e})")]
    NotSymmetric { deviation: f64 },

    #[error("covariance matrix violates the ladder-operator structure (deviation {deviation:.3e})")]
    InvalidCovariance { deviation: f64 },

    #[error("state is unphysical: covariance violates the uncertainty relation")]
    UnphysicalState,

    #[error("pattern has {total} photons in total, above the supported maximum of {max}")]
    PatternTooLarge { total: usize, max: usize },

    #[error("probability {value:e} is outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("probability has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error(
        "conditional normalizer {normalizer:.3e} after prefix {prefix:?} is below 1e-12; increase the cutoff"
    )]
    CutoffTooSmall { prefix: Vec<usize>, normalizer: f64 },

    #[error("probability table would have {entries} entries (limit {limit})")]
    TableTooLarge { entries: u128, limit: u128 },

    #[error("masses must be positive (atom {atom} has {mass})")]
    NonPositiveMass { atom: usize, mass: f64 },

    #[error("frequencies must be positive ({which} frequency {index} is {value})")]
    NonPositiveFrequency {
        which: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{which} normal modes are not orthonormal (max deviation {deviation:.3e})")]
    ModesNotOrthonormal { which: &'static str, deviation: f64 },

    #[error("{num_modes} modes requested but {atoms} atoms allow at most 3N-5 = {max}")]
    TooManyModes {
        num_modes: usize,
        atoms: usize,
        max: i64,
    },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn mismatch(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UnphysicalState
                | Error::ProbabilityOutOfRange { .. }
                | Error::ImaginaryResidue { .. }
                | Error::CutoffTooSmall { .. }
                | Error::SvdFailed
        )
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            e if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
