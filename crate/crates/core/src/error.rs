use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("user {user} could not be placed after {attempts} draws; exclusion zones leave no room")]
    Placement { user: usize, attempts: usize },

    #[error("user {user} is not served by SBS {sbs}")]
    NotServed { user: usize, sbs: usize },

    #[error("user {0} has no serving SBS")]
    EmptyCluster(usize),

    #[error("serving link (user {user}, SBS {sbs}) has no instantaneous CSI")]
    MissingCsi { user: usize, sbs: usize },

    #[error("surrogate is not finite at the starting point")]
    NonFiniteStart,

    #[error("step size underflow ({0:e}); the iterate is trapped against the surrogate domain")]
    StepUnderflow(f64),

    #[error("run aborted after {completed} outer iterations: {source}")]
    Aborted { completed: usize, objectives: Vec<f64>, source: Box<Error> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
