//! Particle solver for the slab Vlasov equation and its coupling to the wave field.

mod deposit;
mod force;
mod push;
mod solver;

pub use deposit::{deposit, particle_phi, scatter, MomentGrids};
pub use force::{AnalyticForce, Force, ForceField, SlabFn};
pub use push::{characteristic_rhs, push, push_one};
pub use solver::{field_data, run_data, Simulation, State};
