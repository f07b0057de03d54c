//! Wave equation `phi_tt - phi_xx = -mu` split as `phi = phi_hom + psi`.

mod duhamel;
mod homogeneous;
mod mollifier;

pub use duhamel::{
    duhamel_parts, duhamel_psi, endpoint_term, level_for_time, DuhamelParts, MuHistory, PsiSlice,
    NEGATIVE_SOURCE_TOLERANCE,
};
pub use homogeneous::{eval_phi_hom, Antiderivative, HomSlice, HomogeneousField};
pub use mollifier::{mollify, Mollifier};

use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlice {
    pub t: f64,
    pub phi: Vec<f64>,
    pub dphi_dt: Vec<f64>,
    pub dphi_dx: Vec<f64>,
    pub phi_hom: Vec<f64>,
    pub psi: Vec<f64>,
}

impl FieldSlice {
    pub fn zeros(t: f64, nx: usize) -> Self {
        FieldSlice {
            t,
            phi: vec![0.0; nx],
            dphi_dt: vec![0.0; nx],
            dphi_dx: vec![0.0; nx],
            phi_hom: vec![0.0; nx],
            psi: vec![0.0; nx],
        }
    }

    /// `1/2 int (phi_t^2 + phi_x^2) dx` (trapezoid).
    pub fn energy(&self, grid: &Grid) -> f64 {
        let e: Vec<f64> = self
            .dphi_dt
            .iter()
            .zip(&self.dphi_dx)
            .map(|(a, b)| 0.5 * (a * a + b * b))
            .collect();
        grid.integrate(&e)
    }

    pub fn sup_abs_phi(&self) -> f64 {
        self.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_abs_phi_hom(&self) -> f64 {
        self.phi_hom.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Incremental field assembly for the time-stepping loop.
///
/// Keeps the twice-mollified source history and the homogeneous solution of the (mollified)
/// data. `psi` and `psi_x` at level `N` only see levels `0..N`, so the newest source level
/// enters through the `s = t` endpoint of `psi_t` alone and can be refreshed cheaply.
#[derive(Clone)]
pub struct FieldAssembler {
    grid: Grid,
    hom: HomogeneousField,
    moll: Option<Mollifier>,
    source_passes: usize,
    source: MuHistory,
    parts: Option<(DuhamelParts, HomSlice)>,
}

impl FieldAssembler {
    /// Data mollified once, every source level twice.
    pub fn new(data: &InitialData, grid: Grid, dt: f64, moll: Option<Mollifier>) -> Self {
        let hom = match &moll {
            Some(m) => HomogeneousField::new(&data.mollified(m), &grid),
            None => HomogeneousField::new(data, &grid),
        };
        FieldAssembler {
            grid,
            hom,
            moll,
            source_passes: 2,
            source: MuHistory::new(grid, dt),
            parts: None,
        }
    }

    /// Companion field with raw data and each source level mollified once. Fed the same raw
    /// source, its slices convolved with the mollifier reproduce those of [`new`](Self::new).
    pub fn once_mollified(
        data: &InitialData,
        grid: Grid,
        dt: f64,
        moll: Option<Mollifier>,
    ) -> Self {
        FieldAssembler {
            grid,
            hom: HomogeneousField::new(data, &grid),
            moll,
            source_passes: 1,
            source: MuHistory::new(grid, dt),
            parts: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mollifier(&self) -> Option<&Mollifier> {
        self.moll.as_ref()
    }

    pub fn homogeneous(&self) -> &HomogeneousField {
        &self.hom
    }

    /// Source history actually fed to the retarded integral.
    pub fn source(&self) -> &MuHistory {
        &self.source
    }

    fn smooth(&self, mu: &[f64]) -> Result<Vec<f64>> {
        match &self.moll {
            Some(m) => mollify(mu, m, self.source_passes),
            None => Ok(mu.to_vec()),
        }
    }

    /// Append a raw source level.
    pub fn push_source(&mut self, mu: &[f64]) -> Result<()> {
        let s = self.smooth(mu)?;
        self.source.push(s)
    }

    /// Overwrite the newest raw source level.
    pub fn replace_source(&mut self, mu: &[f64]) -> Result<()> {
        let s = self.smooth(mu)?;
        self.source.replace_last(s)
    }

    /// Assemble the slice at level `n`; level `n` of the source must already be present.
    pub fn assemble(&mut self, n: usize) -> Result<FieldSlice> {
        let t = self.source.time(n);
        let parts = duhamel_parts(&self.source, n)?;
        let hom = self.hom.eval(t, &self.grid);
        self.parts = Some((parts, hom));
        self.finish(n)
    }

    /// Rebuild the slice at the last assembled level after [`replace_source`](Self::replace_source).
    pub fn finish(&self, n: usize) -> Result<FieldSlice> {
        let (parts, hom) = match &self.parts {
            Some(p) if p.0.level == n => p,
            _ => {
                return Err(Error::HistoryGap {
                    required: n + 1,
                    available: self.source.len(),
                })
            }
        };
        let end = endpoint_term(&self.source, n)?;
        let nx = self.grid.nx;
        let mut slice = FieldSlice::zeros(hom.t, nx);
        for i in 0..nx {
            let psi_t = parts.dpsi_dt_interior[i] + end[i];
            slice.psi[i] = parts.psi[i];
            slice.phi_hom[i] = hom.phi[i];
            slice.phi[i] = hom.phi[i] + parts.psi[i];
            slice.dphi_dt[i] = hom.dphi_dt[i] + psi_t;
            slice.dphi_dx[i] = hom.dphi_dx[i] + parts.dpsi_dx[i];
        }
        Ok(slice)
    }
}

/// One-shot assembly at time `t` from a raw (unmollified) source history.
pub fn assemble_field(
    data: &InitialData,
    hist: &MuHistory,
    moll: Option<&Mollifier>,
    t: f64,
    grid: &Grid,
) -> Result<FieldSlice> {
    if hist.grid() != grid {
        return Err(Error::GridMismatch(
            "source history lives on a different grid".into(),
        ));
    }
    let n = level_for_time(hist.dt(), t)?;
    if hist.len() < n + 1 {
        return Err(Error::HistoryGap {
            required: n + 1,
            available: hist.len(),
        });
    }
    let reach = t.abs() + data.support_radius + moll.map_or(0.0, |m| m.radius());
    if -reach < grid.x_min || reach > grid.x_max {
        return Err(Error::OutOfDomain {
            x: reach,
            x_min: grid.x_min,
            x_max: grid.x_max,
        });
    }
    let mut asm = FieldAssembler::new(data, *grid, hist.dt(), moll.cloned());
    for k in 0..=n {
        asm.push_source(hist.level(k))?;
    }
    asm.assemble(n)
}
