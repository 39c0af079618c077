use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("nonpositive temperature")]
    NonpositiveTemperature,

    #[error("nonpositive amount for species {index}")]
    NonpositiveAmount { index: usize },

    #[error("state has {got} amounts but the network has {expected} species")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: unknown species `{name}`")]
    UnknownSpecies { line: usize, name: String },

    #[error("line {line}: parameter `{name}` must be positive, got {value}")]
    NonpositiveParameter {
        line: usize,
        name: String,
        value: f64,
    },

    #[error("T_env required: {0}")]
    TEnvRequired(String),

    #[error("unpaired reaction: {0}")]
    Unpaired(String),

    #[error("condition {condition} violated: {detail}")]
    Condition { condition: u8, detail: String },

    #[error("irreversible reaction {index} present; a reversible network is required")]
    Irreversible { index: usize },

    #[error("no detailed balanced equilibrium (worst residual {residual:e})")]
    NoDetailedBalance { residual: f64 },

    #[error("reference state is not detailed balanced (worst rate residual {rate:e}, worst energy residual {energy:e})")]
    NotDetailedBalanced { rate: f64, energy: f64 },

    #[error("optimizer did not converge after {iterations} iterations (projected gradient {gradient_norm:e})")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("integration failed at t = {t}: {message}")]
    Integration { t: f64, message: String },
}
