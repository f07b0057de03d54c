//! Checks of the characteristic flow in full 3D space under prescribed potentials.

pub mod field;
pub mod flow;
pub mod liouville;
pub mod suite;

pub use field::PrescribedField;
pub use flow::{determinant, expected_determinant, integrate_flow, jacobian_fd, Phase};
pub use liouville::{initial_functional, liouville_functional, Bump, Quadrature};
pub use suite::{run_flow_checks, to_csv, FlowCheckOptions, FlowCheckRow};
