//! Conservation laws, a-priori bounds and residual monitors.

mod measures;
mod monitor;

pub use measures::*;
pub use monitor::{fmt_f64, write_csv, Check, DiagnosticsRecord, Monitor, Summary};
