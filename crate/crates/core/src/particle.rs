//! Characteristic-curve samples and the deterministic quiet-start sampler.

use crate::config::SimConfig;
use crate::data::InitialData;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// One characteristic-curve sample.
///
/// `a = f_in * exp(-4 phi(0, x0))` is the Vlasov invariant, `m = f_in * V0 * exp(-phi(0, x0))`
/// the mass charge and `c = V0 * exp(3 phi(0, x0))` the Casimir volume factor. With
/// `phi = phi(t, x(t))` the particle carries the value `f = a e^{4 phi}` and the phase volume
/// `V = c e^{-3 phi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParticle {
    pub x: f64,
    pub p: [f64; 3],
    pub a: f64,
    pub m: f64,
    pub c: f64,
}

impl KineticParticle {
    pub fn from_sample(x: f64, p: [f64; 3], f_value: f64, phi0: f64, volume: f64) -> Self {
        let a = f_value * (-4.0 * phi0).exp();
        let c = volume * (3.0 * phi0).exp();
        KineticParticle {
            x,
            p,
            a,
            m: a * c,
            c,
        }
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        (1.0 + self.p[0] * self.p[0] + self.p[1] * self.p[1] + self.p[2] * self.p[2]).sqrt()
    }

    #[inline]
    pub fn f_value(&self, phi: f64) -> f64 {
        self.a * (4.0 * phi).exp()
    }

    #[inline]
    pub fn volume(&self, phi: f64) -> f64 {
        self.c * (-3.0 * phi).exp()
    }

    /// `f * V = a c e^{phi}`.
    #[inline]
    pub fn weight(&self, phi: f64) -> f64 {
        self.a * self.c * phi.exp()
    }
}

/// Casimir exponent `q` for `Q(z) = z^q` and the weight exponent `gamma` of the weighted
/// `L^q` monitor; requires `q >= 1` and `gamma >= 3/q - 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirSpec {
    pub q: f64,
    pub gamma: f64,
}

impl CasimirSpec {
    pub fn new(q: f64, gamma: f64) -> Result<Self> {
        let spec = CasimirSpec { q, gamma };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.q >= 1.0) || !(self.gamma >= 3.0 / self.q - 4.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidExponents {
                q: self.q,
                gamma: self.gamma,
            });
        }
        Ok(())
    }
}

/// Particles plus the sampling metadata the bound monitors need.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub particles: Vec<KineticParticle>,
    /// Phase-cell volume `V0` shared by every particle.
    pub cell_volume: f64,
    /// Largest sampled `f_in`.
    pub f_in_sup: f64,
    /// Largest `|phi0|` over the grid nodes and the initial particle positions.
    pub phi0_sup: f64,
    /// Largest Vlasov invariant `a`.
    pub a_sup: f64,
    /// Lattice points along (x, p1, p2, p3) before empty cells were dropped.
    pub lattice: [usize; 4],
}

impl Ensemble {
    pub fn empty() -> Self {
        Ensemble {
            particles: Vec::new(),
            cell_volume: 0.0,
            f_in_sup: 0.0,
            phi0_sup: 0.0,
            a_sup: 0.0,
            lattice: [0; 4],
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// `f_in` identically zero: the run is a pure vacuum wave evolution.
    pub fn is_vacuum(&self) -> bool {
        self.particles.is_empty()
    }

    /// `f_in` at the particle's starting point, recovered from `a`, `c` and `V0`.
    pub fn initial_value(&self, p: &KineticParticle) -> f64 {
        p.a * (p.c / self.cell_volume).powf(4.0 / 3.0)
    }

    /// Particle form of `||f_in||_q = (sum f_in^q V0)^{1/q}`.
    pub fn initial_lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self
            .particles
            .iter()
            .map(|p| self.initial_value(p).powf(q) * self.cell_volume)
            .sum();
        s.powf(1.0 / q)
    }
}

/// Tensor lattice of cell midpoints over `[x_lo, x_hi] x momentum_box`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub p_box: [(f64, f64); 3],
    pub np: [usize; 3],
}

impl SamplingPlan {
    /// Grid-aligned plan: `sample_per_cell` sub-cells per grid cell covering the x-support.
    pub fn for_config(cfg: &SimConfig, data: &InitialData) -> Self {
        let grid = cfg.grid();
        let dx = grid.dx();
        let r = data.kinetic_radius;
        let lo_cell = (((-r - grid.x_min) / dx).floor().max(0.0)) as usize;
        let hi_cell = (((r - grid.x_min) / dx).ceil() as usize).min(grid.nx - 1);
        let cells = hi_cell.saturating_sub(lo_cell).max(1);
        let nx = cells * cfg.sample_per_cell.max(1);
        let np = cfg.momentum_lattice_points(nx);
        SamplingPlan {
            x_lo: grid.x(lo_cell),
            x_hi: grid.x(lo_cell + cells),
            nx,
            p_box: data.momentum_box,
            np: [np; 3],
        }
    }

    pub fn cell_volume(&self) -> f64 {
        let mut v = (self.x_hi - self.x_lo) / self.nx as f64;
        for k in 0..3 {
            v *= (self.p_box[k].1 - self.p_box[k].0) / self.np[k] as f64;
        }
        v
    }
}

/// Quiet-start sampling of `data` on the lattice of `plan`.
///
/// Cells where `f_in = 0` produce no particle; the ordering is x-major, then p1, p2, p3, so two
/// calls with the same inputs produce bitwise identical ensembles.
pub fn sample_with_plan(data: &InitialData, plan: &SamplingPlan, grid: Option<&Grid>) -> Ensemble {
    let hx = (plan.x_hi - plan.x_lo) / plan.nx as f64;
    let hp: [f64; 3] =
        std::array::from_fn(|k| (plan.p_box[k].1 - plan.p_box[k].0) / plan.np[k] as f64);
    let volume = plan.cell_volume();
    let mut particles = Vec::new();
    let mut f_in_sup: f64 = 0.0;
    let mut a_sup: f64 = 0.0;
    let mut phi0_sup: f64 = 0.0;
    for ix in 0..plan.nx {
        let x = plan.x_lo + (ix as f64 + 0.5) * hx;
        let phi0 = (data.phi0)(x);
        for i1 in 0..plan.np[0] {
            let p1 = plan.p_box[0].0 + (i1 as f64 + 0.5) * hp[0];
            for i2 in 0..plan.np[1] {
                let p2 = plan.p_box[1].0 + (i2 as f64 + 0.5) * hp[1];
                for i3 in 0..plan.np[2] {
                    let p3 = plan.p_box[2].0 + (i3 as f64 + 0.5) * hp[2];
                    let p = [p1, p2, p3];
                    let f = (data.f_in)(x, &p);
                    if f > 0.0 {
                        let particle = KineticParticle::from_sample(x, p, f, phi0, volume);
                        f_in_sup = f_in_sup.max(f);
                        a_sup = a_sup.max(particle.a);
                        phi0_sup = phi0_sup.max(phi0.abs());
                        particles.push(particle);
                    }
                }
            }
        }
    }
    if let Some(g) = grid {
        for i in 0..g.nx {
            phi0_sup = phi0_sup.max((data.phi0)(g.x(i)).abs());
        }
    }
    Ensemble {
        particles,
        cell_volume: volume,
        f_in_sup,
        phi0_sup,
        a_sup,
        lattice: [plan.nx, plan.np[0], plan.np[1], plan.np[2]],
    }
}

pub fn sample_ensemble(data: &InitialData, cfg: &SimConfig) -> Ensemble {
    let plan = SamplingPlan::for_config(cfg, data);
    sample_with_plan(data, &plan, Some(&cfg.grid()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FieldBump, ProfileSpec};
    use std::sync::Arc;

    #[test]
    fn single_cell_invariants() {
        let p = KineticParticle::from_sample(0.0, [0.0; 3], 2.0, 0.0, 0.5);
        assert_eq!(p.a, 2.0);
        assert_eq!(p.c, 0.5);
        assert_eq!(p.m, 1.0);
    }

    #[test]
    fn mass_charge_is_product_of_invariants() {
        let data = ProfileSpec::GaussianBump {
            mass: 1.0,
            x_width: 0.7,
            p_width: 0.4,
            radius: 2.0,
            p_max: 1.5,
            field: FieldBump {
                phi0_amplitude: -0.1,
                phi1_amplitude: 0.0,
                radius: 2.0,
            },
        }
        .build()
        .unwrap();
        let cfg = SimConfig {
            nx: 128,
            sample_np: Some(6),
            ..SimConfig::default()
        };
        let e = sample_ensemble(&data, &cfg);
        assert!(!e.is_empty());
        for p in &e.particles {
            assert_eq!(p.m, p.a * p.c);
            assert!(p.a >= 0.0 && p.c > 0.0);
        }
    }

    #[test]
    fn vacuum_gives_empty_ensemble() {
        let data = InitialData::vacuum(2.0);
        let e = sample_ensemble(&data, &SimConfig::default());
        assert!(e.is_vacuum());
        assert_eq!(e.particles.iter().map(|p| p.m).sum::<f64>(), 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut data = InitialData::vacuum(1.0);
        data.f_in = Arc::new(|x, p| {
            let r2 = x * x + p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            (1.0 - r2).max(0.0)
        });
        let cfg = SimConfig {
            nx: 64,
            sample_np: Some(5),
            ..SimConfig::default()
        };
        assert_eq!(sample_ensemble(&data, &cfg), sample_ensemble(&data, &cfg));
    }

    #[test]
    fn initial_value_recovers_f_in() {
        let mut data = InitialData::vacuum(1.0);
        data.f_in = Arc::new(|x, _| 1.0 + x);
        data.phi0 = Arc::new(|x| 0.2 * x);
        let plan = SamplingPlan {
            x_lo: -0.5,
            x_hi: 0.5,
            nx: 4,
            p_box: [(-1.0, 1.0); 3],
            np: [1, 1, 1],
        };
        let e = sample_with_plan(&data, &plan, None);
        for p in &e.particles {
            assert!((e.initial_value(p) - (1.0 + p.x)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_casimir_exponents() {
        assert!(CasimirSpec::new(0.5, 0.0).is_err());
        assert!(CasimirSpec::new(1.0, -1.5).is_err());
        assert!(CasimirSpec::new(2.0, -2.5).is_ok());
    }
}
