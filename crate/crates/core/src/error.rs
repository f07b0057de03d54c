use std::fmt;

use thiserror::Error;

/// One violated invariant of a run configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A signal leaving the initial support at unit speed can reach the boundary before `t_final`.
    DomainTooSmall {
        required_half_width: f64,
        x_min: f64,
        x_max: f64,
    },
    /// `dt > dx`.
    CflViolation { dt: f64, dx: f64 },
    /// A size or duration parameter is out of range.
    NonpositiveRun(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DomainTooSmall {
                required_half_width,
                x_min,
                x_max,
            } => write!(
                f,
                "DomainTooSmall: domain [{x_min}, {x_max}] must contain [-{required_half_width}, {required_half_width}]"
            ),
            Violation::CflViolation { dt, dx } => {
                write!(f, "CflViolation: dt = {dt} exceeds dx = {dx}")
            }
            Violation::NonpositiveRun(what) => write!(f, "NonpositiveRun: {what}"),
        }
    }
}

/// Every invariant a configuration failed, in check order.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("OutOfDomain: x = {x} lies outside [{x_min}, {x_max}]")]
    OutOfDomain { x: f64, x_min: f64, x_max: f64 },
    #[error("HistoryGap: {required} source levels required, {available} stored")]
    HistoryGap { required: usize, available: usize },
    #[error("NegativeSource: mu = {value} at level {level}, node {node}")]
    NegativeSource {
        level: usize,
        node: usize,
        value: f64,
    },
    #[error("KernelWiderThanDomain: kernel spans {width} nodes, grid has {len}")]
    KernelWiderThanDomain { width: usize, len: usize },
    #[error("StepUnderflow: step size collapsed at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("SingularJacobian: det = {det}")]
    SingularJacobian { det: f64 },
    #[error("InvalidExponents: q = {q}, gamma = {gamma} (need q >= 1, gamma >= 3/q - 4)")]
    InvalidExponents { q: f64, gamma: f64 },
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error("ladder needs at least two rungs, got {0}")]
    LadderTooShort(usize),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
