//! Field accessors `(phi, phi_t, phi_x)` at arbitrary `(t, x)` for the particle push.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavefield::FieldSlice;

/// `(phi, d phi/dt, d phi/dx)` at a space-time point.
pub trait Force: Sync {
    fn eval(&self, t: f64, x: f64) -> Result<[f64; 3]>;
}

/// Grid fields, linear in `x` between nodes.
///
/// `Bracketed` interpolates linearly in time between two slices. `Frozen` holds one slice and
/// extrapolates `phi` with its own time derivative, keeping the derivatives fixed.
#[derive(Debug, Clone, Copy)]
pub enum ForceField<'a> {
    Frozen {
        grid: &'a Grid,
        slice: &'a FieldSlice,
    },
    Bracketed {
        grid: &'a Grid,
        a: &'a FieldSlice,
        b: &'a FieldSlice,
    },
}

impl<'a> ForceField<'a> {
    pub fn frozen(grid: &'a Grid, slice: &'a FieldSlice) -> Self {
        ForceField::Frozen { grid, slice }
    }

    pub fn bracketed(grid: &'a Grid, a: &'a FieldSlice, b: &'a FieldSlice) -> Self {
        ForceField::Bracketed { grid, a, b }
    }
}

#[inline]
fn at(s: &FieldSlice, i: usize, w: f64) -> [f64; 3] {
    let lin = |v: &[f64]| (1.0 - w) * v[i] + w * v[i + 1];
    [lin(&s.phi), lin(&s.dphi_dt), lin(&s.dphi_dx)]
}

impl Force for ForceField<'_> {
    fn eval(&self, t: f64, x: f64) -> Result<[f64; 3]> {
        match *self {
            ForceField::Frozen { grid, slice } => {
                let (i, w) = grid.locate_checked(x)?;
                let [phi, phi_t, phi_x] = at(slice, i, w);
                Ok([phi + (t - slice.t) * phi_t, phi_t, phi_x])
            }
            ForceField::Bracketed { grid, a, b } => {
                let (i, w) = grid.locate_checked(x)?;
                let fa = at(a, i, w);
                let fb = at(b, i, w);
                let span = b.t - a.t;
                let theta = if span == 0.0 { 0.0 } else { (t - a.t) / span };
                Ok(std::array::from_fn(|k| {
                    (1.0 - theta) * fa[k] + theta * fb[k]
                }))
            }
        }
    }
}

pub type SlabFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Closed-form field on a bounded slab; used for prescribed-field tests.
#[derive(Clone)]
pub struct AnalyticForce {
    pub x_min: f64,
    pub x_max: f64,
    pub phi: SlabFn,
    pub dphi_dt: SlabFn,
    pub dphi_dx: SlabFn,
}

impl AnalyticForce {
    pub fn zero(x_min: f64, x_max: f64) -> Self {
        let z: SlabFn = Arc::new(|_, _| 0.0);
        AnalyticForce {
            x_min,
            x_max,
            phi: z.clone(),
            dphi_dt: z.clone(),
            dphi_dx: z,
        }
    }

    /// `phi = alpha t`.
    pub fn linear_in_time(alpha: f64, x_min: f64, x_max: f64) -> Self {
        AnalyticForce {
            x_min,
            x_max,
            phi: Arc::new(move |t, _| alpha * t),
            dphi_dt: Arc::new(move |_, _| alpha),
            dphi_dx: Arc::new(|_, _| 0.0),
        }
    }
}

impl Force for AnalyticForce {
    fn eval(&self, t: f64, x: f64) -> Result<[f64; 3]> {
        if !(x >= self.x_min && x <= self.x_max) {
            return Err(Error::OutOfDomain {
                x,
                x_min: self.x_min,
                x_max: self.x_max,
            });
        }
        Ok([(self.phi)(t, x), (self.dphi_dt)(t, x), (self.dphi_dx)(t, x)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice(t: f64, g: &Grid, f: impl Fn(f64) -> f64) -> FieldSlice {
        let mut s = FieldSlice::zeros(t, g.nx);
        for i in 0..g.nx {
            s.phi[i] = f(g.x(i));
            s.dphi_dt[i] = 2.0 * f(g.x(i));
            s.dphi_dx[i] = -f(g.x(i));
        }
        s
    }

    #[test]
    fn exact_on_nodes_and_bracketing_times() {
        let g = Grid::new(-1.0, 1.0, 21);
        let a = slice(0.0, &g, |x| x * x);
        let b = slice(0.1, &g, |x| x.sin());
        let f = ForceField::bracketed(&g, &a, &b);
        for i in 0..g.nx {
            assert_eq!(f.eval(0.0, g.x(i)).unwrap()[0], a.phi[i]);
            assert_eq!(f.eval(0.1, g.x(i)).unwrap()[2], b.dphi_dx[i]);
        }
        let mid = f.eval(0.05, g.x(3)).unwrap()[1];
        assert!((mid - 0.5 * (a.dphi_dt[3] + b.dphi_dt[3])).abs() < 1e-15);
        assert!(matches!(f.eval(0.0, 1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn frozen_extrapolates_phi_only() {
        let g = Grid::new(-1.0, 1.0, 21);
        let a = slice(1.0, &g, |_| 1.0);
        let [phi, phi_t, phi_x] = ForceField::frozen(&g, &a).eval(1.5, 0.2).unwrap();
        assert!((phi - 2.0).abs() < 1e-15);
        assert_eq!((phi_t, phi_x), (2.0, -1.0));
    }
}
