//! Full 3D characteristics under a prescribed field, adaptive RK4 and the flow-map Jacobian.

use super::field::PrescribedField;
use crate::error::{Error, Result};

/// Phase point `(x, p)` in R^6.
pub type Phase = [f64; 6];

/// Phase point plus `l = int S phi ds`, which gives `f = f_in e^{4 l}` and the volume factor
/// `e^{-3 l}` along the curve.
pub type Augmented = [f64; 7];

fn rhs(field: &PrescribedField, t: f64, z: &Augmented) -> Augmented {
    let x = [z[0], z[1], z[2]];
    let p = [z[3], z[4], z[5]];
    let gamma = (1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let v = [p[0] / gamma, p[1] / gamma, p[2] / gamma];
    let (phi_t, grad) = field.derivatives(t, &x);
    let s_phi = phi_t + v[0] * grad[0] + v[1] * grad[1] + v[2] * grad[2];
    [
        v[0],
        v[1],
        v[2],
        -s_phi * p[0] - grad[0] / gamma,
        -s_phi * p[1] - grad[1] / gamma,
        -s_phi * p[2] - grad[2] / gamma,
        s_phi,
    ]
}

fn rk4(field: &PrescribedField, t: f64, z: &Augmented, h: f64) -> Augmented {
    let add = |a: &Augmented, b: &Augmented, s: f64| -> Augmented {
        std::array::from_fn(|i| a[i] + s * b[i])
    };
    let k1 = rhs(field, t, z);
    let k2 = rhs(field, t + 0.5 * h, &add(z, &k1, 0.5 * h));
    let k3 = rhs(field, t + 0.5 * h, &add(z, &k2, 0.5 * h));
    let k4 = rhs(field, t + h, &add(z, &k3, h));
    std::array::from_fn(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Adaptive RK4 with step doubling on the augmented system; `t1 < t0` integrates backwards.
pub fn integrate_augmented(
    z0: &Augmented,
    field: &PrescribedField,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Augmented> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(*z0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut z = *z0;
    let mut h = 0.1 * span.abs().min(1.0);
    let h_min = 1e-12 * span.abs().max(1.0);
    while (t1 - t) * dir > 0.0 {
        h = h.min((t1 - t) * dir);
        let full = rk4(field, t, &z, dir * h);
        let half = rk4(field, t, &z, 0.5 * dir * h);
        let two = rk4(field, t + 0.5 * dir * h, &half, 0.5 * dir * h);
        let err = (0..7).fold(0.0f64, |m, i| m.max((two[i] - full[i]).abs())) / 15.0;
        if err <= tol {
            t = if (t1 - (t + dir * h)) * dir <= 0.0 {
                t1
            } else {
                t + dir * h
            };
            // local extrapolation
            z = std::array::from_fn(|i| two[i] + (two[i] - full[i]) / 15.0);
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0)
        };
        h *= factor;
        if h < h_min {
            return Err(Error::StepUnderflow { t });
        }
    }
    Ok(z)
}

/// Flow map `z0 at t0 -> z1 at t1` with local tolerance `tol`.
pub fn integrate_flow(
    z0: &Phase,
    field: &PrescribedField,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<Phase> {
    let mut a = [0.0; 7];
    a[..6].copy_from_slice(z0);
    let out = integrate_augmented(&a, field, t0, t1, tol)?;
    Ok(std::array::from_fn(|i| out[i]))
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant<const N: usize>(mut a: [[f64; N]; N]) -> f64 {
    let mut det = 1.0;
    for c in 0..N {
        let piv = (c..N)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty column");
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..N {
            let l = a[r][c] / a[c][c];
            for k in c..N {
                a[r][k] -= l * a[c][k];
            }
        }
    }
    det
}

/// Default finite-difference step `1e-4 (1 + |z0|)`.
pub fn default_fd_step(z0: &Phase) -> f64 {
    1e-4 * (1.0 + z0.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Local tolerance used for the Jacobian integrations.
pub const JACOBIAN_TOL: f64 = 1e-13;

/// Central-difference Jacobian determinant of the flow map (12 integrations).
pub fn jacobian_fd(z0: &Phase, field: &PrescribedField, t0: f64, t1: f64, h: f64) -> Result<f64> {
    let mut jac = [[0.0; 6]; 6];
    for k in 0..6 {
        let mut zp = *z0;
        let mut zm = *z0;
        zp[k] += h;
        zm[k] -= h;
        let fp = integrate_flow(&zp, field, t0, t1, JACOBIAN_TOL)?;
        let fm = integrate_flow(&zm, field, t0, t1, JACOBIAN_TOL)?;
        for i in 0..6 {
            jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let det = determinant(jac);
    if det.abs() < 1e-12 {
        return Err(Error::SingularJacobian { det });
    }
    Ok(det)
}

/// `exp[exponent (phi(t0, x0) - phi(t1, X(t1)))]`; the flow has exponent 3.
pub fn expected_determinant(
    field: &PrescribedField,
    z0: &Phase,
    z1: &Phase,
    t0: f64,
    t1: f64,
    exponent: f64,
) -> f64 {
    let x0 = [z0[0], z0[1], z0[2]];
    let x1 = [z1[0], z1[1], z1[2]];
    (exponent * (field.phi(t0, &x0) - field.phi(t1, &x1))).exp()
}
