use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite coordinate in event ({t}, {x})")]
    NonFiniteEvent { t: f64, x: f64 },

    #[error("invalid boost: |v| = {0} must be strictly below 1")]
    InvalidBoost(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time {t} outside the evolution window [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("event ({t}, {x}) is not strictly before the final surface")]
    ApexBeyondSurface { t: f64, x: f64 },

    #[error("grid out of range: {0}")]
    GridOutOfRange(String),

    #[error("wrong scenario: expected {expected}, got {found}")]
    WrongScenario {
        expected: &'static str,
        found: &'static str,
    },

    #[error("selected world {index} does not exist (branch set has {count} branches)")]
    NoSuchWorld { index: usize, count: usize },

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("unnormalized state: norm² = {0}")]
    Unnormalized(f64),

    #[error("guidance density {density:e} below node threshold at ({y_left}, {y_right}), t = {t}")]
    DegenerateNode {
        y_left: f64,
        y_right: f64,
        t: f64,
        density: f64,
    },

    #[error("outcome unresolved: coordinate {0:e} still within the readout dead zone")]
    UnresolvedOutcome(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
