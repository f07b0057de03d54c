//! Snapshot files and plot-ready field profiles.

pub mod snapshot;

use std::io::Write;

use crate::diagnostics::fmt_f64;
use crate::grid::Grid;
use crate::kinetic::State;

pub use snapshot::{read_snapshot, write_snapshot};

pub const PROFILE_HEADER: &str = "x,phi,dphi_dt,dphi_dx,phi_hom,psi,mu,sigma,rho,j";

/// One row per grid node.
pub fn write_profile<W: Write>(out: &mut W, grid: &Grid, state: &State) -> std::io::Result<()> {
    writeln!(out, "{PROFILE_HEADER}")?;
    let (s, m) = (&state.slice, &state.moments);
    for i in 0..grid.nx {
        let row = [
            grid.x(i),
            s.phi[i],
            s.dphi_dt[i],
            s.dphi_dx[i],
            s.phi_hom[i],
            s.psi[i],
            m.mu[i],
            m.sigma[i],
            m.rho[i],
            m.j[i],
        ];
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
