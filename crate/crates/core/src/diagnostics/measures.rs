//! Conserved quantities, bound slacks and residuals evaluated on one state.

use std::f64::consts::PI;

use crate::config::Deposition;
use crate::error::Result;
use crate::grid::Grid;
use crate::kinetic::{scatter, MomentGrids};
use crate::particle::{CasimirSpec, Ensemble};
use crate::wavefield::FieldSlice;

/// `(sum m_k, int rho dx)`.
pub fn mass(ensemble: &Ensemble, moments: &MomentGrids, grid: &Grid) -> (f64, f64) {
    let particle: f64 = ensemble
        .particles
        .iter()
        .map(|p| p.m)
        .fold(0.0, |s, m| s + m);
    let deposited = moments.rho.iter().sum::<f64>() * grid.dx();
    (particle, deposited)
}

/// `(kinetic, field, total)` with kinetic `sum a c e^{phi} gamma` and the trapezoid field energy.
pub fn energy(
    ensemble: &Ensemble,
    phis: &[f64],
    slice: &FieldSlice,
    grid: &Grid,
) -> (f64, f64, f64) {
    let kinetic: f64 = ensemble
        .particles
        .iter()
        .zip(phis)
        .map(|(p, &phi)| p.weight(phi) * p.gamma())
        .fold(0.0, |s, e| s + e);
    let field = slice.energy(grid);
    (kinetic, field, kinetic + field)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirValues {
    pub spec: CasimirSpec,
    /// `(sum a^q c)^{1/q}`
    pub exact: f64,
    /// Same functional through a deposit of `a^q c e^{-3 phi}` reweighted by `e^{3 phi}` on nodes.
    pub grid: f64,
    /// `||e^{gamma phi} f(t)||_q`
    pub wlq_lhs: f64,
    /// `||f_in||_q exp[7(||phi_hom|| + ||phi0||) + |gamma| ||phi_hom||]`
    pub wlq_rhs: f64,
}

pub fn casimir(
    ensemble: &Ensemble,
    phis: &[f64],
    slice: &FieldSlice,
    grid: &Grid,
    spec: CasimirSpec,
    phi_hom_sup: f64,
    kernel: Deposition,
    chunks: usize,
) -> Result<CasimirValues> {
    spec.check()?;
    let q = spec.q;
    let exact = ensemble
        .particles
        .iter()
        .map(|p| p.a.powf(q) * p.c)
        .sum::<f64>()
        .powf(1.0 / q);
    let [dens] = scatter(&ensemble.particles, phis, grid, kernel, chunks, |p, phi| {
        [p.a.powf(q) * p.c * (-3.0 * phi).exp()]
    })?;
    let grid_value = (dens
        .iter()
        .zip(&slice.phi)
        .map(|(d, phi)| d * (3.0 * phi).exp())
        .sum::<f64>()
        * grid.dx())
    .powf(1.0 / q);
    let wlq_lhs = ensemble
        .particles
        .iter()
        .zip(phis)
        .map(|(p, &phi)| (p.f_value(phi) * (spec.gamma * phi).exp()).powf(q) * p.volume(phi))
        .sum::<f64>()
        .powf(1.0 / q);
    let wlq_rhs = if ensemble.is_vacuum() {
        0.0
    } else {
        ensemble.initial_lq_norm(q)
            * (7.0 * (phi_hom_sup + ensemble.phi0_sup) + spec.gamma.abs() * phi_hom_sup).exp()
    };
    Ok(CasimirValues {
        spec,
        exact,
        grid: grid_value,
        wlq_lhs,
        wlq_rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBound {
    /// `max_k a_k e^{4 phi(t, x_k)}`
    pub f_sup: f64,
    /// `||f_in||_inf exp[4(||phi_hom(t)|| + ||phi0||)]`
    pub rhs: f64,
    pub slack: f64,
}

pub fn supnorm_bound(ensemble: &Ensemble, phis: &[f64], phi_hom_sup: f64) -> SupBound {
    let f_sup = ensemble
        .particles
        .iter()
        .zip(phis)
        .fold(0.0f64, |m, (p, &phi)| m.max(p.f_value(phi)));
    let rhs = if ensemble.is_vacuum() {
        0.0
    } else {
        ensemble.f_in_sup * (4.0 * (phi_hom_sup + ensemble.phi0_sup)).exp()
    };
    SupBound {
        f_sup,
        rhs,
        slack: rhs - f_sup,
    }
}

/// Constant of the pointwise `mu` bound.
///
/// Split at `|p| = R`: `int_{|p|<R} dp/|p| = 2 pi R^2` against `||f||_inf`, and
/// `1/gamma <= gamma/R^2` outside, so `mu <= 2 pi R^2 F + K/R^2`. With `R = (K/F)^{1/4}` both
/// terms are `sqrt(F K)`.
pub const MU_BOUND_CONSTANT: f64 = 2.0 * PI + 1.0;

/// Constant of the pointwise `rho` bound, `(4 pi / 3) ||a||_inf + 1`.
///
/// `f <= ||a||_inf e^{4 phi}` gives `int_{|p|<R} f <= (4 pi/3) R^3 ||a|| e^{4 phi}`, the tail is
/// at most `K/R`; with `R = e^{-phi} K^{1/4}` and the prefactor `e^{-phi}` both reduce to
/// multiples of `K^{3/4}`.
pub fn rho_bound_constant(a_sup: f64) -> f64 {
    4.0 * PI / 3.0 * a_sup + 1.0
}

/// Pointwise slack grids `(mu, rho)` of the two interpolation bounds.
pub fn interpolation_bounds(moments: &MomentGrids, f_sup: f64, a_sup: f64) -> (Vec<f64>, Vec<f64>) {
    let c_rho = rho_bound_constant(a_sup);
    let mu = moments
        .mu
        .iter()
        .zip(&moments.kinetic)
        .map(|(mu, k)| MU_BOUND_CONSTANT * (f_sup * k).sqrt() - mu)
        .collect();
    let rho = moments
        .rho
        .iter()
        .zip(&moments.kinetic)
        .map(|(rho, k)| c_rho * k.powf(0.75) - rho)
        .collect();
    (mu, rho)
}

/// Deposited mass on nodes with `|x| > radius + |t| + w`, `w` the kernel reach.
pub fn propagation_check(rho: &[f64], grid: &Grid, radius: f64, t: f64, kernel: Deposition) -> f64 {
    let cut = radius + t.abs() + kernel.half_width() * grid.dx();
    (0..grid.nx)
        .filter(|&i| grid.x(i).abs() > cut)
        .map(|i| rho[i])
        .sum::<f64>()
        * grid.dx()
}

/// Densities entering the local conservation laws at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLevel {
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    /// `int gamma f dp + (phi_t^2 + phi_x^2)/2`
    pub e: Vec<f64>,
    /// `int p_1 f dp - phi_t phi_x`
    pub flux: Vec<f64>,
}

impl LocalLevel {
    pub fn new(moments: &MomentGrids, slice: &FieldSlice) -> Self {
        let n = moments.rho.len();
        let mut e = Vec::with_capacity(n);
        let mut flux = Vec::with_capacity(n);
        for i in 0..n {
            let (ft, fx) = (slice.dphi_dt[i], slice.dphi_dx[i]);
            e.push(moments.kinetic[i] + 0.5 * (ft * ft + fx * fx));
            flux.push(moments.momentum[i] - ft * fx);
        }
        LocalLevel {
            rho: moments.rho.clone(),
            j: moments.j.clone(),
            e,
            flux,
        }
    }
}

/// Centred residuals of `rho_t + j_x = 0` and `e_t + flux_x = 0` at the middle level, L1 in x.
pub fn local_conservation_residual(levels: [&LocalLevel; 3], dt: f64, grid: &Grid) -> (f64, f64) {
    let dx = grid.dx();
    let residual = |u: [&[f64]; 3], w: &[f64]| -> f64 {
        (1..grid.nx - 1)
            .map(|i| ((u[2][i] - u[0][i]) / (2.0 * dt) + (w[i + 1] - w[i - 1]) / (2.0 * dx)).abs())
            .sum::<f64>()
            * dx
    };
    let [a, b, c] = levels;
    (
        residual([&a.rho, &b.rho, &c.rho], &b.j),
        residual([&a.e, &b.e, &c.e], &b.flux),
    )
}

/// `max_k |p_k|`, 0 for an empty ensemble.
pub fn momentum_support(ensemble: &Ensemble) -> f64 {
    ensemble.particles.iter().fold(0.0f64, |m, p| {
        m.max((p.p[0] * p.p[0] + p.p[1] * p.p[1] + p.p[2] * p.p[2]).sqrt())
    })
}

/// Discrete `L^2` norm over the grid (trapezoid).
pub fn l2(grid: &Grid, v: &[f64]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    grid.integrate(&sq).sqrt()
}

/// `max_k ||phi(t_k) - phi(t_{k-1})||_2 / (L |t_k - t_{k-1}|)` with `L = max_k ||phi_t(t_k)||_2`.
///
/// Slices are `(t, phi, phi_t)`. Returns 0 when every difference vanishes.
pub fn time_continuity_check(slices: &[(f64, &[f64], &[f64])], grid: &Grid) -> f64 {
    let lip = slices.iter().fold(0.0f64, |m, s| m.max(l2(grid, s.2)));
    let mut worst = 0.0f64;
    for w in slices.windows(2) {
        let diff: Vec<f64> = w[1].1.iter().zip(w[0].1).map(|(a, b)| a - b).collect();
        let d = l2(grid, &diff);
        if d > 0.0 {
            worst = worst.max(d / (lip * (w[1].0 - w[0].0).abs()));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::KineticParticle;

    fn ensemble(parts: Vec<KineticParticle>) -> Ensemble {
        let mut e = Ensemble::empty();
        e.cell_volume = 0.5;
        e.f_in_sup = parts.iter().fold(0.0, |m: f64, p| m.max(p.a));
        e.a_sup = e.f_in_sup;
        e.particles = parts;
        e
    }

    #[test]
    fn vacuum_measures_vanish() {
        let g = Grid::new(-4.0, 4.0, 33);
        let e = Ensemble::empty();
        let m = MomentGrids::zeros(33);
        let s = FieldSlice::zeros(0.0, 33);
        assert_eq!(mass(&e, &m, &g), (0.0, 0.0));
        let b = supnorm_bound(&e, &[], 0.0);
        assert_eq!((b.f_sup, b.rhs, b.slack), (0.0, 0.0, 0.0));
        let (mu, rho) = interpolation_bounds(&m, 0.0, 0.0);
        assert!(mu.iter().chain(&rho).all(|v| *v == 0.0));
        assert_eq!(
            propagation_check(&m.rho, &g, 2.0, 1.0, Deposition::Cic),
            0.0
        );
        assert_eq!(momentum_support(&e), 0.0);
        let l = LocalLevel::new(&m, &s);
        assert_eq!(
            local_conservation_residual([&l, &l, &l], 0.1, &g),
            (0.0, 0.0)
        );
        let c = casimir(
            &e,
            &[],
            &s,
            &g,
            CasimirSpec::new(2.0, 0.0).unwrap(),
            0.0,
            Deposition::Cic,
            1,
        )
        .unwrap();
        assert_eq!(
            (c.exact, c.grid, c.wlq_lhs, c.wlq_rhs),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn zero_field_casimir_one_is_mass() {
        let g = Grid::new(-4.0, 4.0, 33);
        let parts = vec![
            KineticParticle::from_sample(0.1, [0.0; 3], 2.0, 0.0, 0.5),
            KineticParticle::from_sample(-0.7, [1.0, 0.0, 0.0], 3.0, 0.0, 0.5),
        ];
        let e = ensemble(parts);
        let s = FieldSlice::zeros(0.0, 33);
        let c = casimir(
            &e,
            &[0.0, 0.0],
            &s,
            &g,
            CasimirSpec::new(1.0, 0.0).unwrap(),
            0.0,
            Deposition::Cic,
            1,
        )
        .unwrap();
        assert!((c.exact - 2.5).abs() < 1e-15);
        assert!((c.grid - 2.5).abs() < 1e-14);
        let b = supnorm_bound(&e, &[0.0, 0.0], 0.0);
        assert_eq!(b.slack, 0.0);
    }

    #[test]
    fn cold_particle_obeys_interpolation_bounds() {
        let g = Grid::new(-4.0, 4.0, 33);
        let p = KineticParticle::from_sample(0.0, [0.0; 3], 1.0, 0.0, 1e-3);
        let e = ensemble(vec![p]);
        let m = crate::kinetic::deposit(
            &e.particles,
            &vec![0.0; 33],
            &g,
            crate::config::Deposition::Cic,
            1,
        )
        .unwrap();
        let (mu, rho) = interpolation_bounds(&m, 1.0, 1.0);
        assert!(mu.iter().chain(&rho).all(|v| *v >= 0.0));
        assert!(mu[16] > 0.0);
    }

    #[test]
    fn mis_sized_radius_sees_escaping_mass() {
        let g = Grid::new(-4.0, 4.0, 81);
        let rho: Vec<f64> = (0..81)
            .map(|i| if g.x(i).abs() < 2.0 { 1.0 } else { 0.0 })
            .collect();
        assert_eq!(propagation_check(&rho, &g, 2.0, 0.0, Deposition::Cic), 0.0);
        assert!(propagation_check(&rho, &g, 1.0, 0.0, Deposition::Cic) > 0.0);
    }

    #[test]
    fn travelling_wave_continuity_ratio_is_near_one() {
        let g = Grid::new(-20.0, 20.0, 801);
        let dt = 0.05;
        let slices: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..20)
            .map(|k| {
                let t = k as f64 * dt;
                let phi = (0..g.nx).map(|i| (-(g.x(i) - t).powi(2)).exp()).collect();
                let phit = (0..g.nx)
                    .map(|i| 2.0 * (g.x(i) - t) * (-(g.x(i) - t).powi(2)).exp())
                    .collect();
                (t, phi, phit)
            })
            .collect();
        let view: Vec<(f64, &[f64], &[f64])> = slices
            .iter()
            .map(|(t, a, b)| (*t, &a[..], &b[..]))
            .collect();
        let r = time_continuity_check(&view, &g);
        assert!(r <= 1.0 + 1e-3 && r > 0.99, "{r}");
    }

    #[test]
    fn linear_profile_residual_vanishes() {
        // rho = 1 + x - t with j = x + t satisfies rho_t + j_x = 0 exactly on the stencil
        let g = Grid::new(-1.0, 1.0, 21);
        let dt = 0.1;
        let lvl = |t: f64| LocalLevel {
            rho: (0..21).map(|i| 1.0 + g.x(i) - t).collect(),
            j: (0..21).map(|i| g.x(i) + t).collect(),
            e: vec![1.0; 21],
            flux: vec![2.0; 21],
        };
        let (a, b, c) = (lvl(0.0), lvl(0.1), lvl(0.2));
        let (rm, re) = local_conservation_residual([&a, &b, &c], dt, &g);
        assert!(rm < 1e-13 && re == 0.0);
    }
}
