use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage, used to tag errors raised during an end-to-end run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Curves,
    CSpread,
    ZIndex,
    Transform,
    UnitRoot,
    Cointegration,
    Ecm,
    Garch,
    Report,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Curves => "curves",
            Stage::CSpread => "c-spread",
            Stage::ZIndex => "z-index",
            Stage::Transform => "transform",
            Stage::UnitRoot => "unit-root",
            Stage::Cointegration => "cointegration",
            Stage::Ecm => "ecm",
            Stage::Garch => "garch",
            Stage::Report => "report",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series `{label}`: {reason}")]
    InvalidSeries { label: String, reason: String },

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("no common dates")]
    NoCommonDates,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("OIS tenors must be strictly increasing (at {tenor})")]
    NonIncreasingTenors { tenor: String },

    #[error("no positive discount factor solves the {tenor} OIS quote")]
    NoDiscountFactor { tenor: String },

    #[error("date {date} precedes curve value date {value_date}")]
    BeforeValueDate { date: NaiveDate, value_date: NaiveDate },

    #[error("unpriceable quote: no z-spread root in [{lower}, {upper}]")]
    UnpriceableQuote { lower: f64, upper: f64 },

    #[error("unknown issuer `{0}`")]
    UnknownIssuer(String),

    #[error("no eligible December contract on {0}")]
    NoEligibleContract(NaiveDate),

    #[error("design matrix is rank deficient: column {column} (`{name}`) is collinear")]
    RankDeficient { column: usize, name: String },

    #[error("singular moment matrix: {0}")]
    Singular(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("unstable simulation spec: {0}")]
    UnstableSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", path.display())]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn at_stage(self, stage: Stage) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Data { .. }
            | Error::Io { .. }
            | Error::InvalidSeries { .. }
            | Error::NoCommonDates
            | Error::UnknownIssuer(_)
            | Error::NonIncreasingTenors { .. }
            | Error::Misaligned(_)
            | Error::NoEligibleContract(_)
            | Error::BeforeValueDate { .. }
            | Error::SeriesTooShort { .. } => 2,
            Error::DegenerateInput(_)
            | Error::NoDiscountFactor { .. }
            | Error::UnpriceableQuote { .. }
            | Error::RankDeficient { .. }
            | Error::Singular(_)
            | Error::Optimizer(_)
            | Error::UnstableSpec(_) => 3,
        }
    }
}

pub trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
