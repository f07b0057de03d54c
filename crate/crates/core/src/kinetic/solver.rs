//! Self-consistent predictor-corrector loop.

use std::sync::Arc;

use super::deposit::{deposit, MomentGrids};
use super::force::ForceField;
use super::push::push;
use crate::config::{validate_config, SimConfig};
use crate::data::InitialData;
use crate::error::Result;
use crate::grid::Grid;
use crate::particle::{sample_ensemble, Ensemble};
use crate::wavefield::{FieldAssembler, FieldSlice, Mollifier};

/// Solver state at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub step: usize,
    pub t: f64,
    pub ensemble: Ensemble,
    pub slice: FieldSlice,
    pub moments: MomentGrids,
}

/// Field data before regularization: `data`, or zero field data with `zero_field`.
pub fn field_data(cfg: &SimConfig, data: &InitialData) -> InitialData {
    if cfg.zero_field {
        let z: crate::data::ScalarFn = Arc::new(|_| 0.0);
        return data.clone().with_field_data(z.clone(), z.clone(), z);
    }
    data.clone()
}

/// Field data the run actually evolves: mollified once when `mollifier_n > 0`.
pub fn run_data(cfg: &SimConfig, data: &InitialData) -> InitialData {
    let data = field_data(cfg, data);
    match cfg.mollifier_n {
        0 => data,
        n => data.mollified(&Mollifier::new(n, cfg.dx())),
    }
}

pub struct Simulation {
    cfg: SimConfig,
    grid: Grid,
    dt: f64,
    steps: usize,
    chunks: usize,
    pool: rayon::ThreadPool,
    assembler: FieldAssembler,
    state: State,
}

impl Simulation {
    /// Validate, sample and assemble the initial state. `threads` also fixes the deposit chunking.
    pub fn new(cfg: &SimConfig, data: &InitialData, threads: usize) -> Result<Self> {
        let cfg = validate_config(cfg, data)?;
        let threads = threads.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        let grid = cfg.grid();
        let (steps, dt) = cfg.time_steps();
        let moll = match cfg.mollifier_n {
            0 => None,
            n => Some(Mollifier::new(n, grid.dx())),
        };
        // the assembler mollifies the data itself
        let mut assembler = FieldAssembler::new(&field_data(&cfg, data), grid, dt, moll);
        let data = run_data(&cfg, data);
        let state = pool.install(|| -> Result<State> {
            let ensemble = sample_ensemble(&data, &cfg);
            assembler.push_source(&vec![0.0; grid.nx])?;
            let slice = if cfg.zero_field {
                FieldSlice::zeros(0.0, grid.nx)
            } else {
                assembler.assemble(0)?
            };
            let moments = deposit(
                &ensemble.particles,
                &slice.phi,
                &grid,
                cfg.deposition,
                threads,
            )?;
            assembler.replace_source(&moments.mu)?;
            let slice = if cfg.zero_field {
                slice
            } else {
                assembler.finish(0)?
            };
            Ok(State {
                step: 0,
                t: 0.0,
                ensemble,
                slice,
                moments,
            })
        })?;
        Ok(Simulation {
            cfg,
            grid,
            dt,
            steps,
            chunks: threads,
            pool,
            assembler,
            state,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn into_state(self) -> State {
        self.state
    }

    pub fn assembler(&self) -> &FieldAssembler {
        &self.assembler
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.steps
    }

    /// One predictor-corrector step: predict, deposit, assemble, correct, re-deposit.
    pub fn advance(&mut self) -> Result<()> {
        let Simulation {
            cfg,
            grid,
            dt,
            chunks,
            pool,
            assembler,
            state,
            ..
        } = self;
        let (grid, dt, chunks) = (*grid, *dt, *chunks);
        pool.install(|| -> Result<()> {
            let n = state.step + 1;
            let t0 = state.t;
            let t1 = n as f64 * dt;
            let zero = cfg.zero_field;

            let mut predicted = state.ensemble.particles.clone();
            push(
                &mut predicted,
                &ForceField::frozen(&grid, &state.slice),
                t0,
                dt,
            )?;
            let phi_pred: Vec<f64> = state
                .slice
                .phi
                .iter()
                .zip(&state.slice.dphi_dt)
                .map(|(p, d)| p + dt * d)
                .collect();
            let mu_pred = deposit(&predicted, &phi_pred, &grid, cfg.deposition, chunks)?.mu;
            assembler.push_source(&mu_pred)?;

            let next = if zero {
                FieldSlice::zeros(t1, grid.nx)
            } else {
                assembler.assemble(n)?
            };

            let mut particles = std::mem::take(&mut state.ensemble.particles);
            push(
                &mut particles,
                &ForceField::bracketed(&grid, &state.slice, &next),
                t0,
                dt,
            )?;
            let moments = deposit(&particles, &next.phi, &grid, cfg.deposition, chunks)?;
            assembler.replace_source(&moments.mu)?;
            let next = if zero { next } else { assembler.finish(n)? };

            state.ensemble.particles = particles;
            state.step = n;
            state.t = t1;
            state.slice = next;
            state.moments = moments;
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FieldBump, ProfileSpec};

    fn small_cfg() -> SimConfig {
        SimConfig {
            x_min: -8.0,
            x_max: 8.0,
            nx: 129,
            dt: 0.0625,
            t_final: 0.5,
            sample_np: Some(6),
            ..SimConfig::default()
        }
    }

    fn bump() -> InitialData {
        ProfileSpec::GaussianBump {
            mass: 1.0,
            x_width: 0.7,
            p_width: 0.6,
            radius: 2.0,
            p_max: 2.0,
            field: FieldBump {
                phi0_amplitude: -0.05,
                phi1_amplitude: 0.02,
                radius: 2.0,
            },
        }
        .build()
        .unwrap()
    }

    #[test]
    fn vacuum_stays_zero() {
        let data = InitialData::vacuum(2.0);
        let mut sim = Simulation::new(&small_cfg(), &data, 1).unwrap();
        while !sim.is_done() {
            sim.advance().unwrap();
        }
        let s = sim.state();
        assert!(s.ensemble.is_vacuum());
        assert!(s.slice.phi.iter().chain(&s.moments.mu).all(|v| *v == 0.0));
        assert!((s.t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invariants_and_sign_are_kept() {
        let mut sim = Simulation::new(&small_cfg(), &bump(), 1).unwrap();
        let m0: f64 = sim.state().ensemble.particles.iter().map(|p| p.m).sum();
        let invariants: Vec<_> = sim
            .state()
            .ensemble
            .particles
            .iter()
            .map(|p| (p.a, p.m, p.c))
            .collect();
        while !sim.is_done() {
            sim.advance().unwrap();
            let s = sim.state();
            assert!(s.moments.mu.iter().all(|v| *v >= 0.0));
            assert!(s.slice.psi.iter().all(|v| *v <= 0.0));
            assert!(s.slice.psi.iter().any(|v| *v < 0.0));
        }
        let parts = &sim.state().ensemble.particles;
        let m1: f64 = parts.iter().map(|p| p.m).sum();
        assert_eq!(m0.to_bits(), m1.to_bits());
        assert!(parts
            .iter()
            .zip(&invariants)
            .all(|(p, i)| (p.a, p.m, p.c) == *i));
    }

    #[test]
    fn runs_are_bitwise_repeatable() {
        let run = |threads| {
            let mut sim = Simulation::new(&small_cfg(), &bump(), threads).unwrap();
            for _ in 0..3 {
                sim.advance().unwrap();
            }
            sim.into_state()
        };
        assert_eq!(run(1), run(1));
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SimConfig {
            dt: 1.0,
            ..small_cfg()
        };
        assert!(matches!(
            Simulation::new(&cfg, &bump(), 1),
            Err(crate::error::Error::Config(_))
        ));
    }
}
