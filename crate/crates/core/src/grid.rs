use crate::error::{Error, Result};

/// Uniform node-centred grid on `[x_min, x_max]` with `nx` nodes (both ends included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Self {
        assert!(nx >= 2, "grid needs at least two nodes");
        assert!(x_max > x_min, "empty grid interval");
        Self {
            x_min,
            x_max,
            nx,
            dx: (x_max - x_min) / (nx - 1) as f64,
        }
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Cell index `i` in `[0, nx-2]` and fractional offset in `[0, 1]` with `x = x_i + frac * dx`.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let u = (x - self.x_min) / self.dx;
        if !(u >= 0.0 && u <= (self.nx - 1) as f64) {
            return None;
        }
        // snap round-off so that node positions interpolate exactly
        let r = u.round();
        let u = if (u - r).abs() < 1e-10 { r } else { u };
        let i = (u.floor() as usize).min(self.nx - 2);
        Some((i, u - i as f64))
    }

    #[inline]
    pub fn locate_checked(&self, x: f64) -> Result<(usize, f64)> {
        self.locate(x).ok_or(Error::OutOfDomain {
            x,
            x_min: self.x_min,
            x_max: self.x_max,
        })
    }

    /// Linear interpolation; zero outside the domain.
    #[inline]
    pub fn interp_or_zero(&self, values: &[f64], x: f64) -> f64 {
        match self.locate(x) {
            Some((i, w)) => (1.0 - w) * values[i] + w * values[i + 1],
            None => 0.0,
        }
    }

    pub fn interp(&self, values: &[f64], x: f64) -> Result<f64> {
        let (i, w) = self.locate_checked(x)?;
        Ok((1.0 - w) * values[i] + w * values[i + 1])
    }

    /// Trapezoid rule over all nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nx);
        let interior: f64 = values[1..self.nx - 1].iter().sum();
        self.dx * (interior + 0.5 * (values[0] + values[self.nx - 1]))
    }

    /// Same grid with the spacing halved.
    pub fn refined(&self) -> Self {
        Grid::new(self.x_min, self.x_max, 2 * (self.nx - 1) + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_nodes() {
        let g = Grid::new(-1.0, 1.0, 11);
        let v: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        for i in 0..g.nx {
            assert_eq!(g.interp(&v, g.x(i)).unwrap(), v[i]);
        }
        assert!(g.interp(&v, 1.5).is_err());
        assert_eq!(g.interp_or_zero(&v, -2.0), 0.0);
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = Grid::new(-24.0, 24.0, 512);
        let r = g.refined();
        assert_eq!(r.nx, 1023);
        assert!((r.dx() * 2.0 - g.dx()).abs() < 1e-15);
    }
}
