//! Retarded (Duhamel) part of the field, `psi(t,x) = -1/2 int_0^t int_{|y-x|<t-s} mu(s,y) dy ds`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Source values below this are treated as a deposition bug; values in `[-tol, 0)` are clamped.
pub const NEGATIVE_SOURCE_TOLERANCE: f64 = 1e-12;

/// Source grids at times `k * dt`, `k = 0, 1, ...`, with cached cumulative integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct MuHistory {
    grid: Grid,
    dt: f64,
    levels: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

impl MuHistory {
    pub fn new(grid: Grid, dt: f64) -> Self {
        MuHistory {
            grid,
            dt,
            levels: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    fn sanitize(&self, mut mu: Vec<f64>, level: usize) -> Result<Vec<f64>> {
        assert_eq!(mu.len(), self.grid.nx, "source grid size mismatch");
        for (node, v) in mu.iter_mut().enumerate() {
            if *v < -NEGATIVE_SOURCE_TOLERANCE || v.is_nan() {
                return Err(Error::NegativeSource {
                    level,
                    node,
                    value: *v,
                });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(mu)
    }

    fn cumulate(&self, mu: &[f64]) -> Vec<f64> {
        let half_dx = 0.5 * self.grid.dx();
        let mut cum = Vec::with_capacity(mu.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in mu.windows(2) {
            acc += half_dx * (w[0] + w[1]);
            cum.push(acc);
        }
        cum
    }

    pub fn push(&mut self, mu: Vec<f64>) -> Result<()> {
        let mu = self.sanitize(mu, self.levels.len())?;
        self.cumulative.push(self.cumulate(&mu));
        self.levels.push(mu);
        Ok(())
    }

    /// Overwrite the newest level (used by the predictor-corrector cycle).
    pub fn replace_last(&mut self, mu: Vec<f64>) -> Result<()> {
        let k = self.levels.len().checked_sub(1).expect("empty history");
        let mu = self.sanitize(mu, k)?;
        self.cumulative[k] = self.cumulate(&mu);
        self.levels[k] = mu;
        Ok(())
    }

    /// Exact integral of the piecewise-linear interpolant of level `k` over `[a, b]`,
    /// assembled from non-negative pieces so the result is non-negative for `mu >= 0`.
    pub fn window_integral(&self, k: usize, a: f64, b: f64) -> f64 {
        let g = &self.grid;
        let a = a.max(g.x_min);
        let b = b.min(g.x_max);
        if !(b > a) {
            return 0.0;
        }
        let mu = &self.levels[k];
        let cum = &self.cumulative[k];
        let dx = g.dx();
        let (ia, fa) = g.locate(a).expect("clipped to the grid");
        let (ib, fb) = g.locate(b).expect("clipped to the grid");
        let mu_a = (1.0 - fa) * mu[ia] + fa * mu[ia + 1];
        let mu_b = (1.0 - fb) * mu[ib] + fb * mu[ib + 1];
        if ia == ib {
            return ((fb - fa) * dx).max(0.0) * 0.5 * (mu_a + mu_b);
        }
        let first = (1.0 - fa) * dx * 0.5 * (mu_a + mu[ia + 1]);
        let middle = cum[ib] - cum[ia + 1];
        let last = fb * dx * 0.5 * (mu[ib] + mu_b);
        first + middle + last
    }
}

/// `psi` and its space derivative at time level `N`, plus the time derivative without the
/// `s = t` endpoint term (which depends only on the newest level, see [`endpoint_term`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelParts {
    pub level: usize,
    pub psi: Vec<f64>,
    pub dpsi_dt_interior: Vec<f64>,
    pub dpsi_dx: Vec<f64>,
}

/// Trapezoid weight of level `k` in `[0, N dt]`.
#[inline]
fn trapezoid_weight(k: usize, n: usize, dt: f64) -> f64 {
    if n == 0 {
        0.0
    } else if k == 0 || k == n {
        0.5 * dt
    } else {
        dt
    }
}

/// Evaluate the retarded integral at level `n` from levels `0..n` of `hist`.
///
/// Trapezoid rule in `s`; exact integration in `y` of the linearly interpolated source.
/// All weights are non-negative, so `psi <= 0` holds exactly when the source is non-negative.
pub fn duhamel_parts(hist: &MuHistory, n: usize) -> Result<DuhamelParts> {
    if hist.len() < n + 1 {
        return Err(Error::HistoryGap {
            required: n + 1,
            available: hist.len(),
        });
    }
    let grid = hist.grid;
    let dt = hist.dt;
    let rows: Vec<(f64, f64, f64)> = (0..grid.nx)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut window = 0.0;
            let mut sum_plus = 0.0;
            let mut sum_minus = 0.0;
            for k in 0..n {
                let w = trapezoid_weight(k, n, dt);
                let r = (n - k) as f64 * dt;
                window += w * hist.window_integral(k, x - r, x + r);
                let mu = hist.level(k);
                let right = grid.interp_or_zero(mu, x + r);
                let left = grid.interp_or_zero(mu, x - r);
                sum_plus += w * (right + left);
                sum_minus += w * (right - left);
            }
            (-0.5 * window, -0.5 * sum_plus, -0.5 * sum_minus)
        })
        .collect();
    let mut psi = Vec::with_capacity(grid.nx);
    let mut dpsi_dt_interior = Vec::with_capacity(grid.nx);
    let mut dpsi_dx = Vec::with_capacity(grid.nx);
    for (a, b, c) in rows {
        psi.push(a);
        dpsi_dt_interior.push(b);
        dpsi_dx.push(c);
    }
    Ok(DuhamelParts {
        level: n,
        psi,
        dpsi_dt_interior,
        dpsi_dx,
    })
}

/// Contribution of the `s = t` node to `d psi/dt`: `-(dt/2) mu(t, x)`.
pub fn endpoint_term(hist: &MuHistory, n: usize) -> Result<Vec<f64>> {
    if hist.len() < n + 1 {
        return Err(Error::HistoryGap {
            required: n + 1,
            available: hist.len(),
        });
    }
    let w = trapezoid_weight(n, n, hist.dt);
    Ok(hist.level(n).iter().map(|mu| -0.5 * w * 2.0 * mu).collect())
}

/// `psi`, `d psi/dt`, `d psi/dx` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSlice {
    pub t: f64,
    pub psi: Vec<f64>,
    pub dpsi_dt: Vec<f64>,
    pub dpsi_dx: Vec<f64>,
}

/// Retarded field at time `t`, which must be a whole number of history steps.
pub fn duhamel_psi(hist: &MuHistory, t: f64) -> Result<PsiSlice> {
    let n = level_for_time(hist.dt, t)?;
    let parts = duhamel_parts(hist, n)?;
    let end = endpoint_term(hist, n)?;
    let dpsi_dt = parts
        .dpsi_dt_interior
        .iter()
        .zip(&end)
        .map(|(a, b)| a + b)
        .collect();
    Ok(PsiSlice {
        t,
        psi: parts.psi,
        dpsi_dt,
        dpsi_dx: parts.dpsi_dx,
    })
}

pub fn level_for_time(dt: f64, t: f64) -> Result<usize> {
    let n = (t / dt).round();
    if n < 0.0 || (n * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "t = {t} is not a whole number of steps dt = {dt}"
        )));
    }
    Ok(n as usize)
}
