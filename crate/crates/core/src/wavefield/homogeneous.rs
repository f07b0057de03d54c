//! Free-wave part of the field from the d'Alembert representation.

use crate::data::{InitialData, ScalarFn};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quad::gauss_legendre_panel;

/// Cumulative integral of a scalar function: node values from a 3-point Gauss-Legendre rule per
/// cell, off-node values completed by one more panel from the left node.
#[derive(Clone)]
pub struct Antiderivative {
    f: ScalarFn,
    lo: f64,
    h: f64,
    values: Vec<f64>,
}

impl Antiderivative {
    pub fn new(f: &ScalarFn, lo: f64, hi: f64, h: f64) -> Self {
        let cells = ((hi - lo) / h).ceil().max(1.0) as usize;
        let h = (hi - lo) / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for k in 0..cells {
            let a = lo + k as f64 * h;
            acc += gauss_legendre_panel(&|x| f(x), a, a + h);
            values.push(acc);
        }
        Antiderivative {
            f: f.clone(),
            lo,
            h,
            values,
        }
    }

    /// Integral from the table's left end to `x`; constant continuation outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let u = (x - self.lo) / self.h;
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= n as f64 {
            return self.values[n];
        }
        let i = (u.floor() as usize).min(n - 1);
        let a = self.lo + i as f64 * self.h;
        let f = &self.f;
        self.values[i] + gauss_legendre_panel(&|y| f(y), a, x)
    }
}

/// `phi_hom`, `d phi_hom/dt`, `d phi_hom/dx` on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSlice {
    pub t: f64,
    pub phi: Vec<f64>,
    pub dphi_dt: Vec<f64>,
    pub dphi_dx: Vec<f64>,
}

impl HomSlice {
    /// `1/2 int (phi_t^2 + phi_x^2) dx` by the trapezoid rule.
    pub fn energy(&self, grid: &Grid) -> f64 {
        let dens: Vec<f64> = self
            .dphi_dt
            .iter()
            .zip(&self.dphi_dx)
            .map(|(a, b)| 0.5 * (a * a + b * b))
            .collect();
        grid.integrate(&dens)
    }
}

/// Solution of the homogeneous wave equation with data `(phi0, phi1)`:
///
/// `phi_hom(t,x) = [phi0(x+t) + phi0(x-t)]/2 + [Phi1(x+t) - Phi1(x-t)]/2`, `Phi1' = phi1`,
///
/// with both derivatives taken from the same representation using `phi0'` and `phi1` directly.
#[derive(Clone)]
pub struct HomogeneousField {
    phi0: ScalarFn,
    dphi0: ScalarFn,
    phi1: ScalarFn,
    antiderivative: Antiderivative,
    support_radius: f64,
}

impl HomogeneousField {
    pub fn new(data: &InitialData, grid: &Grid) -> Self {
        let len = grid.x_max - grid.x_min;
        let antiderivative = Antiderivative::new(
            &data.phi1,
            grid.x_min - len,
            grid.x_max + len,
            grid.dx() / 16.0,
        );
        HomogeneousField {
            phi0: data.phi0.clone(),
            dphi0: data.dphi0.clone(),
            phi1: data.phi1.clone(),
            antiderivative,
            support_radius: data.support_radius,
        }
    }

    /// `(phi_hom, d/dt, d/dx)` at one point.
    #[inline]
    pub fn eval_point(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (r, l) = (x + t, x - t);
        let (f_r, f_l) = ((self.phi0)(r), (self.phi0)(l));
        let (d_r, d_l) = ((self.dphi0)(r), (self.dphi0)(l));
        let (g_r, g_l) = ((self.phi1)(r), (self.phi1)(l));
        let big = self.antiderivative.eval(r) - self.antiderivative.eval(l);
        let phi = 0.5 * (f_r + f_l) + 0.5 * big;
        let dphi_dt = 0.5 * (d_r - d_l) + 0.5 * (g_r + g_l);
        let dphi_dx = 0.5 * (d_r + d_l) + 0.5 * (g_r - g_l);
        (phi, dphi_dt, dphi_dx)
    }

    pub fn eval(&self, t: f64, grid: &Grid) -> HomSlice {
        let mut phi = Vec::with_capacity(grid.nx);
        let mut dphi_dt = Vec::with_capacity(grid.nx);
        let mut dphi_dx = Vec::with_capacity(grid.nx);
        for i in 0..grid.nx {
            let (a, b, c) = self.eval_point(t, grid.x(i));
            phi.push(a);
            dphi_dt.push(b);
            dphi_dx.push(c);
        }
        HomSlice {
            t,
            phi,
            dphi_dt,
            dphi_dx,
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }
}

/// Evaluate the homogeneous solution on `grid` at time `t`.
pub fn eval_phi_hom(data: &InitialData, t: f64, grid: &Grid) -> Result<HomSlice> {
    let reach = t.abs() + data.support_radius;
    if -reach < grid.x_min || reach > grid.x_max {
        return Err(Error::OutOfDomain {
            x: if reach > grid.x_max { reach } else { -reach },
            x_min: grid.x_min,
            x_max: grid.x_max,
        });
    }
    Ok(HomogeneousField::new(data, grid).eval(t, grid))
}
