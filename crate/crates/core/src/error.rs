use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes and error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Numerical => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("unparseable date `{value}` in {source_name}")]
    BadDate { value: String, source_name: String },
    #[error("unparseable value `{value}` in column `{column}` at {date}")]
    BadValue { value: String, column: String, date: String },
    #[error("duplicated date {date} in {source_name}")]
    DuplicateDate { date: String, source_name: String },
    #[error("gap in monthly index between {after} and {before}")]
    Gap { after: String, before: String },
    #[error("missing value in column `{column}` at {date}")]
    MissingValue { column: String, date: String },
    #[error("column `{column}` has non-positive value {value} at {date}; log undefined")]
    NonPositive { column: String, value: f64, date: String },
    #[error("column `{0}` is constant")]
    ConstantSeries(String),
    #[error("empty panel")]
    EmptyPanel,
    #[error("forecast files are not aligned: {0}")]
    Misaligned(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient observations: {0}")]
    InsufficientData(String),

    #[error("prior family `{0}` is not implemented; only mn_iw is available")]
    UnimplementedFamily(String),
    #[error("degenerate scale estimate for `{0}` (zero residual variance)")]
    DegenerateScale(String),
    #[error("matrix `{0}` is not positive definite")]
    NotPositiveDefinite(String),
    #[error("eigenvalue solver did not converge: {0}")]
    EigenNonConvergence(String),
    #[error("only {stable} of {total} posterior draws are stable ({fraction:.3} < required {required:.3})")]
    TooFewStable {
        stable: usize,
        total: usize,
        fraction: f64,
        required: f64,
    },
    #[error("posterior mean parameters are explosive (spectral radius {0:.6})")]
    UnstablePosterior(f64),
    #[error("no admissible draws for variable {variable} at horizon {horizon} (acceptance rate 0)")]
    NoAdmissibleDraws { variable: usize, horizon: usize },
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),
    #[error("all grid candidates failed")]
    AllCandidatesFailed,

    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn category(&self) -> Category {
        use Error::*;
        match self {
            Config(_) | Toml(_) | UnimplementedFamily(_) => Category::Config,
            MissingColumn(_) | DuplicateColumn(_) | BadDate { .. } | BadValue { .. }
            | DuplicateDate { .. } | Gap { .. } | MissingValue { .. } | NonPositive { .. }
            | ConstantSeries(_) | EmptyPanel | Misaligned(_) | Io(_) | Csv(_) | Json(_) | InsufficientData(_) => {
                Category::Data
            }
            Dimension(_) | InvalidArgument(_) => Category::Config,
            DegenerateScale(_) | NotPositiveDefinite(_) | EigenNonConvergence(_)
            | TooFewStable { .. } | UnstablePosterior(_) | NoAdmissibleDraws { .. }
            | RankDeficient(_) | AllCandidatesFailed => Category::Numerical,
        }
    }

    /// Name of the subsystem that raised the error, for machine-readable reports.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            MissingColumn(_) | DuplicateColumn(_) | BadDate { .. } | BadValue { .. }
            | DuplicateDate { .. } | Gap { .. } | MissingValue { .. } | NonPositive { .. }
            | ConstantSeries(_) | EmptyPanel => "data_panel",
            UnimplementedFamily(_) | DegenerateScale(_) | NotPositiveDefinite(_)
            | EigenNonConvergence(_) => "bvar",
            TooFewStable { .. } | UnstablePosterior(_) | NoAdmissibleDraws { .. } => "forecast",
            AllCandidatesFailed => "tuner",
            RankDeficient(_) => "estimation",
            Config(_) | Toml(_) => "config",
            Io(_) | Csv(_) | Json(_) => "io",
            Misaligned(_) => "evaluate",
            Dimension(_) | InvalidArgument(_) | InsufficientData(_) => "input",
        }
    }
}
