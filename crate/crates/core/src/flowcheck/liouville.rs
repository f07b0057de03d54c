//! Weighted phase-space functionals transported by the 3D flow.

use rayon::prelude::*;

use super::field::PrescribedField;
use super::flow::{integrate_augmented, Augmented, Phase};
use crate::error::Result;

/// Smooth compactly supported initial density `A bump(|x|/rx) bump(|p|/rp)`,
/// `bump(r) = exp(-1/(1 - r^2))` for `r < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub rx: f64,
    pub rp: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump {
            amplitude: 1.0,
            rx: 1.0,
            rp: 0.8,
        }
    }
}

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

impl Bump {
    pub fn eval(&self, z: &Phase) -> f64 {
        let sx = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) / (self.rx * self.rx);
        let sp = (z[3] * z[3] + z[4] * z[4] + z[5] * z[5]) / (self.rp * self.rp);
        self.amplitude * bump(sx) * bump(sp)
    }
}

/// Tensor midpoint rule on the support box of the bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub points_per_axis: usize,
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            points_per_axis: 6,
            tol: 1e-11,
        }
    }
}

fn midpoint_nodes(f_in: &Bump, quad: &Quadrature) -> (Vec<Phase>, f64) {
    let m = quad.points_per_axis;
    let hx = 2.0 * f_in.rx / m as f64;
    let hp = 2.0 * f_in.rp / m as f64;
    let cx = |k: usize| -f_in.rx + (k as f64 + 0.5) * hx;
    let cp = |k: usize| -f_in.rp + (k as f64 + 0.5) * hp;
    let mut pts = Vec::with_capacity(m.pow(6));
    for idx in 0..m.pow(6) {
        let d: [usize; 6] = std::array::from_fn(|a| (idx / m.pow(a as u32)) % m);
        pts.push([cx(d[0]), cx(d[1]), cx(d[2]), cp(d[3]), cp(d[4]), cp(d[5])]);
    }
    (pts, hx.powi(3) * hp.powi(3))
}

/// Trajectories of every quadrature point from 0 to `t`, with the integrated `l = int S phi`.
/// Points outside the support of `f_in` carry nothing and are skipped.
pub fn transported_nodes(
    f_in: &Bump,
    field: &PrescribedField,
    t: f64,
    quad: &Quadrature,
) -> Result<(Vec<(Phase, Augmented)>, f64)> {
    let (pts, w) = midpoint_nodes(f_in, quad);
    let out: Result<Vec<_>> = pts
        .par_iter()
        .filter(|z| f_in.eval(z) > 0.0)
        .map(|z| {
            let mut a = [0.0; 7];
            a[..6].copy_from_slice(z);
            Ok((*z, integrate_augmented(&a, field, 0.0, t, quad.tol)?))
        })
        .collect();
    Ok((out?, w))
}

/// `int int (f e^{-4 phi})^q e^{3 phi} dp dx` at time `t`, evaluated on the pushed-forward
/// quadrature points: `f` at `(X, P)` comes from `f_in e^{4 l}`, the volume element from
/// `e^{3(phi_in - phi(t, X))}`.
pub fn liouville_functional(
    f_in: &Bump,
    q: f64,
    field: &PrescribedField,
    t: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let (nodes, w) = transported_nodes(f_in, field, t, quad)?;
    Ok(functional_from_nodes(f_in, q, field, t, &nodes, w))
}

pub fn functional_from_nodes(
    f_in: &Bump,
    q: f64,
    field: &PrescribedField,
    t: f64,
    nodes: &[(Phase, Augmented)],
    w: f64,
) -> f64 {
    let terms: Vec<f64> = nodes
        .par_iter()
        .map(|(z0, z1)| {
            let phi_in = field.phi(0.0, &[z0[0], z0[1], z0[2]]);
            let phi = field.phi(t, &[z1[0], z1[1], z1[2]]);
            let f = f_in.eval(z0) * (4.0 * z1[6]).exp();
            (f * (-4.0 * phi).exp()).powf(q) * (3.0 * phi).exp() * (3.0 * (phi_in - phi)).exp()
        })
        .collect();
    // fixed-order reduction
    w * terms.iter().sum::<f64>()
}

/// Direct quadrature of `int int f_in^q e^{(3 - 4q) phi(0)} dp dx` on the same nodes.
pub fn initial_functional(f_in: &Bump, q: f64, field: &PrescribedField, quad: &Quadrature) -> f64 {
    let (pts, w) = midpoint_nodes(f_in, quad);
    w * pts
        .iter()
        .map(|z| {
            f_in.eval(z).powf(q) * ((3.0 - 4.0 * q) * field.phi(0.0, &[z[0], z[1], z[2]])).exp()
        })
        .sum::<f64>()
}
