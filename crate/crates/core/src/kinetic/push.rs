//! Slab characteristics and the RK2 particle push.

use rayon::prelude::*;

use super::force::Force;
use crate::error::Result;
use crate::particle::KineticParticle;

/// `dx/ds = p1/gamma`, `dp/ds = -(S phi) p - (phi_x/gamma, 0, 0)` with `S phi = phi_t + p^_1 phi_x`.
#[inline]
pub fn characteristic_rhs<F: Force + ?Sized>(
    x: f64,
    p: &[f64; 3],
    field: &F,
    t: f64,
) -> Result<(f64, [f64; 3])> {
    let [_, phi_t, phi_x] = field.eval(t, x)?;
    let gamma = (1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let v = p[0] / gamma;
    assert!(
        v.abs() < 1.0,
        "particle speed {v} reached the speed of light"
    );
    let s_phi = phi_t + v * phi_x;
    let dp = [-s_phi * p[0] - phi_x / gamma, -s_phi * p[1], -s_phi * p[2]];
    Ok((v, dp))
}

/// Explicit midpoint step of one particle; `dt` may be negative.
#[inline]
pub fn push_one<F: Force + ?Sized>(
    part: &mut KineticParticle,
    field: &F,
    t: f64,
    dt: f64,
) -> Result<()> {
    let (vx, dp) = characteristic_rhs(part.x, &part.p, field, t)?;
    let h = 0.5 * dt;
    let xm = part.x + h * vx;
    let pm = [
        part.p[0] + h * dp[0],
        part.p[1] + h * dp[1],
        part.p[2] + h * dp[2],
    ];
    let (vx, dp) = characteristic_rhs(xm, &pm, field, t + h)?;
    part.x += dt * vx;
    for k in 0..3 {
        part.p[k] += dt * dp[k];
    }
    Ok(())
}

/// Advance every particle from `t` to `t + dt`. Invariants `a`, `m`, `c` are not touched.
pub fn push<F: Force + ?Sized>(
    particles: &mut [KineticParticle],
    field: &F,
    t: f64,
    dt: f64,
) -> Result<()> {
    particles
        .par_iter_mut()
        .try_for_each(|part| push_one(part, field, t, dt))
}
