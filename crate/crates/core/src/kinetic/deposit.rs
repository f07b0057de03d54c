//! Cloud-in-cell deposition of velocity moments.

use rayon::prelude::*;

use crate::config::Deposition;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::particle::KineticParticle;

/// Velocity moments on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentGrids {
    /// `int f dp / gamma`
    pub mu: Vec<f64>,
    /// `int f dp`
    pub sigma: Vec<f64>,
    /// `e^{-phi} int f dp`
    pub rho: Vec<f64>,
    /// `e^{-phi} int p^_1 f dp`
    pub j: Vec<f64>,
    /// `int gamma f dp`
    pub kinetic: Vec<f64>,
    /// `int p_1 f dp`
    pub momentum: Vec<f64>,
}

impl MomentGrids {
    pub fn zeros(nx: usize) -> Self {
        MomentGrids {
            mu: vec![0.0; nx],
            sigma: vec![0.0; nx],
            rho: vec![0.0; nx],
            j: vec![0.0; nx],
            kinetic: vec![0.0; nx],
            momentum: vec![0.0; nx],
        }
    }
}

/// `phi` at each particle position, linear in `x`.
pub fn particle_phi(particles: &[KineticParticle], grid: &Grid, phi: &[f64]) -> Result<Vec<f64>> {
    particles
        .par_iter()
        .map(|p| grid.interp(phi, p.x))
        .collect()
}

/// Scatter `K` per-particle channels with the kernel weights, dividing by `dx`.
///
/// Particles are split into `chunks` contiguous blocks whose partial grids are added in block
/// order, so the result depends on the chunk count but never on scheduling.
pub fn scatter<const K: usize, F>(
    particles: &[KineticParticle],
    phis: &[f64],
    grid: &Grid,
    kernel: Deposition,
    chunks: usize,
    channels: F,
) -> Result<[Vec<f64>; K]>
where
    F: Fn(&KineticParticle, f64) -> [f64; K] + Sync,
{
    let nx = grid.nx;
    let chunks = chunks.max(1);
    let size = particles.len().div_ceil(chunks).max(1);
    let partials: Vec<[Vec<f64>; K]> = particles
        .par_chunks(size)
        .zip(phis.par_chunks(size))
        .map(|(ps, phs)| -> Result<[Vec<f64>; K]> {
            let mut acc: [Vec<f64>; K] = std::array::from_fn(|_| vec![0.0; nx]);
            for (p, &phi) in ps.iter().zip(phs) {
                let (i, w) = grid.locate_checked(p.x)?;
                let (first, weights) = kernel.stencil(i as f64 + w);
                let last = first + if kernel == Deposition::Cic { 1 } else { 2 };
                if first < 0 || last >= nx as isize {
                    return Err(Error::OutOfDomain {
                        x: p.x,
                        x_min: grid.x_min,
                        x_max: grid.x_max,
                    });
                }
                let vals = channels(p, phi);
                for (off, node) in (first..=last).enumerate() {
                    let wn = weights[off];
                    for k in 0..K {
                        acc[k][node as usize] += wn * vals[k];
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total: [Vec<f64>; K] = std::array::from_fn(|_| vec![0.0; nx]);
    for part in &partials {
        for k in 0..K {
            for (t, v) in total[k].iter_mut().zip(&part[k]) {
                *t += v;
            }
        }
    }
    let inv = 1.0 / grid.dx();
    for g in total.iter_mut() {
        for v in g.iter_mut() {
            *v *= inv;
        }
    }
    Ok(total)
}

/// Deposit all moments given the grid potential `phi` at the deposit time.
pub fn deposit(
    particles: &[KineticParticle],
    phi: &[f64],
    grid: &Grid,
    kernel: Deposition,
    chunks: usize,
) -> Result<MomentGrids> {
    let phis = particle_phi(particles, grid, phi)?;
    let [mu, sigma, j_raw, kinetic, momentum] =
        scatter(particles, &phis, grid, kernel, chunks, |p, phi| {
            let fv = p.weight(phi);
            let gamma = p.gamma();
            [fv / gamma, fv, fv * p.p[0] / gamma, fv * gamma, fv * p.p[0]]
        })?;
    let rho = sigma.iter().zip(phi).map(|(s, f)| (-f).exp() * s).collect();
    let j = j_raw.iter().zip(phi).map(|(s, f)| (-f).exp() * s).collect();
    Ok(MomentGrids {
        mu,
        sigma,
        rho,
        j,
        kinetic,
        momentum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    #[test]
    fn empty_ensemble_gives_zero_grids() {
        let g = Grid::new(-1.0, 1.0, 21);
        let m = deposit(&[], &vec![0.0; 21], &g, Deposition::Cic, 3).unwrap();
        assert_eq!(m, MomentGrids::zeros(21));
    }

    #[test]
    fn particle_on_node_deposits_there_only() {
        let g = Grid::new(-1.0, 1.0, 21);
        let v0 = 0.25;
        let p = [0.3, 0.4, 0.0];
        let part = KineticParticle::from_sample(g.x(7), p, 1.0, 0.0, v0);
        let m = deposit(&[part], &vec![0.0; 21], &g, Deposition::Cic, 1).unwrap();
        let gamma = (1.25f64).sqrt();
        for i in 0..21 {
            let expect = if i == 7 { v0 / (g.dx() * gamma) } else { 0.0 };
            assert!((m.mu[i] - expect).abs() < 1e-14 * expect.max(1.0));
        }
        assert!(m.j[7].abs() <= m.rho[7]);
    }

    fn uniform_box(np: usize, g: &Grid) -> MomentGrids {
        // f = 1 on |p_k| <= 1 and |x| <= 0.5, sampled at cell midpoints
        let nxs = 40;
        let (hx, hp) = (1.0 / nxs as f64, 2.0 / np as f64);
        let vol = hx * hp * hp * hp;
        let mid = |k: usize| -1.0 + (k as f64 + 0.5) * hp;
        let mut parts = Vec::new();
        for ix in 0..nxs {
            for a in 0..np {
                for b in 0..np {
                    for c in 0..np {
                        let x = -0.5 + (ix as f64 + 0.5) * hx;
                        parts.push(KineticParticle::from_sample(
                            x,
                            [mid(a), mid(b), mid(c)],
                            1.0,
                            0.0,
                            vol,
                        ));
                    }
                }
            }
        }
        deposit(&parts, &vec![0.0; g.nx], g, Deposition::Cic, 4).unwrap()
    }

    #[test]
    fn uniform_box_matches_quadrature() {
        let g = Grid::new(-2.0, 2.0, 81);
        let inner = |p1: f64, p2: f64| {
            gauss_legendre(
                |p3| 1.0 / (1.0 + p1 * p1 + p2 * p2 + p3 * p3).sqrt(),
                -1.0,
                1.0,
                20,
            )
        };
        let exact = gauss_legendre(
            |p1| gauss_legendre(|p2| inner(p1, p2), -1.0, 1.0, 20),
            -1.0,
            1.0,
            20,
        );
        let coarse = uniform_box(8, &g);
        let fine = uniform_box(16, &g);
        // sigma = int f dp = 8 well inside the slab, exact for a constant integrand
        assert!((coarse.sigma[40] - 8.0).abs() < 1e-12);
        let (e1, e2) = ((coarse.mu[40] - exact).abs(), (fine.mu[40] - exact).abs());
        assert!(e1 < 2e-2 && (e1 / e2 - 4.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn single_chunk_is_independent_of_pool_size() {
        let g = Grid::new(-1.0, 1.0, 41);
        let parts: Vec<_> = (0..500)
            .map(|k| {
                let x = -0.9 + 1.8 * ((k * 37) % 500) as f64 / 500.0;
                KineticParticle::from_sample(
                    x,
                    [0.01 * k as f64, 0.0, 0.1],
                    1.0 + (k % 7) as f64,
                    0.0,
                    1e-3,
                )
            })
            .collect();
        let phi: Vec<f64> = (0..41).map(|i| 0.1 * (i as f64).sin()).collect();
        let a = deposit(&parts, &phi, &g, Deposition::Cic, 1).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let b = pool
            .install(|| deposit(&parts, &phi, &g, Deposition::Cic, 1))
            .unwrap();
        assert_eq!(a, b);
        let c = deposit(&parts, &phi, &g, Deposition::Cic, 4).unwrap();
        let d = pool
            .install(|| deposit(&parts, &phi, &g, Deposition::Cic, 4))
            .unwrap();
        assert_eq!(c, d);
    }
}
