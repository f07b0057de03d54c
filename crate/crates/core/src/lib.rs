//! Particle and integral-representation solver for the slab-symmetric Nordström-Vlasov system.

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod flowcheck;
pub mod grid;
pub mod io;
pub mod kinetic;
pub mod ladder;
pub mod particle;
pub mod quad;
pub mod wavefield;

pub use error::{Error, Result};
