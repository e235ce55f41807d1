use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] turnpike_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid problem file {path}: {message}")]
    ProblemFile { path: PathBuf, message: String },

    #[error("invalid trajectory CSV: {0}")]
    Trajectory(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        use turnpike_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::DimensionMismatch { .. } => "dimension_mismatch",
                E::NonFiniteDerivative { .. } => "non_finite_derivative",
                E::LegendreViolated { .. } => "legendre_violated",
                E::StaticDiverged { .. } => "static_diverged",
                E::StaticSingular { .. } => "static_singular",
                E::StaticLqSingular => "static_lq_singular",
                E::TerminalMapSingular => "terminal_map_singular",
                E::NonHyperbolic { .. } => "non_hyperbolic",
                E::NotAGraph { .. } => "not_a_graph",
                E::ControlSolve { .. } => "control_solve",
                E::BlowUp { .. } => "blow_up",
                E::ShootingFailed { .. } => "shooting_failed",
                E::DirectDiverged { .. } => "direct_diverged",
                E::KktFactorization { .. } => "kkt_factorization",
                E::InvalidArgument(_) => "invalid_argument",
            },
            CliError::Io { .. } => "io",
            CliError::ProblemFile { .. } => "problem_file",
            CliError::Trajectory(_) => "trajectory",
            CliError::Config(_) => "config",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Body {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("error body serializes")
    }
}
