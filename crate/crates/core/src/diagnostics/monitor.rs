//! Per-step diagnostics rows and the run-level pass/fail summary.

use std::io::Write;

use super::measures::*;
use crate::config::{Deposition, SimConfig};
use crate::error::Result;
use crate::grid::Grid;
use crate::kinetic::{particle_phi, State};
use crate::particle::CasimirSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_particle: f64,
    pub mass_grid: f64,
    pub energy_kinetic: f64,
    pub energy_field: f64,
    pub energy_total: f64,
    pub casimir: Vec<CasimirValues>,
    pub f_sup: f64,
    pub sup_bound_rhs: f64,
    pub phi_hom_sup: f64,
    pub psi_max: f64,
    pub mu_l2: f64,
    pub rho_l43: f64,
    pub mu_bound_slack: f64,
    pub rho_bound_slack: f64,
    /// `max_i (|j_i| - rho_i)`
    pub j_excess: f64,
    pub momentum_support: f64,
    pub propagation_excess: f64,
    /// Centred at this row's time; 0 on the first and last rows.
    pub continuity_residual: f64,
    pub energy_residual: f64,
    /// `||phi(t) - phi(t - dt)|| / (dt max(||phi_t||))` over the two levels; 0 on the first row.
    pub continuity_ratio: f64,
}

impl DiagnosticsRecord {
    pub fn header(casimir: &[CasimirSpec]) -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "mass_particle",
            "mass_grid",
            "energy_kinetic",
            "energy_field",
            "energy_total",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for c in casimir {
            let tag = format!("q{}_g{}", c.q, c.gamma);
            h.push(format!("casimir_{tag}_exact"));
            h.push(format!("casimir_{tag}_grid"));
            h.push(format!("wlq_{tag}_lhs"));
            h.push(format!("wlq_{tag}_rhs"));
        }
        h.extend(
            [
                "f_sup",
                "sup_bound_rhs",
                "phi_hom_sup",
                "psi_max",
                "mu_l2",
                "rho_l43",
                "mu_bound_slack",
                "rho_bound_slack",
                "j_excess",
                "momentum_support",
                "propagation_excess",
                "continuity_residual",
                "energy_residual",
                "continuity_ratio",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.mass_particle,
            self.mass_grid,
            self.energy_kinetic,
            self.energy_field,
            self.energy_total,
        ];
        for c in &self.casimir {
            v.extend([c.exact, c.grid, c.wlq_lhs, c.wlq_rhs]);
        }
        v.extend([
            self.f_sup,
            self.sup_bound_rhs,
            self.phi_hom_sup,
            self.psi_max,
            self.mu_l2,
            self.rho_l43,
            self.mu_bound_slack,
            self.rho_bound_slack,
            self.j_excess,
            self.momentum_support,
            self.propagation_excess,
            self.continuity_residual,
            self.energy_residual,
            self.continuity_ratio,
        ]);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Format with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(
    out: &mut W,
    casimir: &[CasimirSpec],
    rows: &[DiagnosticsRecord],
) -> std::io::Result<()> {
    writeln!(out, "{}", DiagnosticsRecord::header(casimir).join(","))?;
    for r in rows {
        let line: Vec<String> = r.values().into_iter().map(fmt_f64).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Outcome of one monitor over the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Fitted `C` in `||phi_hom(t)|| <= C (1 + t)`.
    pub phi_hom_growth: f64,
    /// Largest time-continuity ratio against the global Lipschitz constant.
    pub continuity_ratio: f64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Collects one [`DiagnosticsRecord`] per step and the history the lagged monitors need.
pub struct Monitor {
    grid: Grid,
    dt: f64,
    casimir: Vec<CasimirSpec>,
    radius: f64,
    kernel: Deposition,
    chunks: usize,
    energy_tolerance: f64,
    slack_tolerance: f64,
    continuity_ratio_max: f64,
    momentum_warn_factor: f64,
    rows: Vec<DiagnosticsRecord>,
    locals: Vec<LocalLevel>,
    phi: Vec<(f64, Vec<f64>, Vec<f64>)>,
    a_sup: f64,
    momentum_initial: f64,
}

impl Monitor {
    /// `radius` is the initial support radius of `f_in` used by the propagation check.
    pub fn new(cfg: &SimConfig, dt: f64, radius: f64, chunks: usize) -> Self {
        Monitor {
            grid: cfg.grid(),
            dt,
            casimir: cfg.casimir.clone(),
            radius,
            kernel: cfg.deposition,
            chunks,
            energy_tolerance: cfg.energy_tolerance,
            slack_tolerance: cfg.slack_tolerance,
            continuity_ratio_max: cfg.continuity_ratio_max,
            momentum_warn_factor: cfg.momentum_warn_factor,
            rows: Vec::new(),
            locals: Vec::new(),
            phi: Vec::new(),
            a_sup: 0.0,
            momentum_initial: 0.0,
        }
    }

    pub fn rows(&self) -> &[DiagnosticsRecord] {
        &self.rows
    }

    pub fn casimir_specs(&self) -> &[CasimirSpec] {
        &self.casimir
    }

    pub fn record(&mut self, state: &State) -> Result<&DiagnosticsRecord> {
        let grid = self.grid;
        let ens = &state.ensemble;
        let slice = &state.slice;
        let mom = &state.moments;
        if self.rows.is_empty() {
            self.a_sup = ens.a_sup;
            self.momentum_initial = momentum_support(ens);
        }
        let phis = particle_phi(&ens.particles, &grid, &slice.phi)?;
        let (mass_particle, mass_grid) = mass(ens, mom, &grid);
        let (energy_kinetic, energy_field, energy_total) = energy(ens, &phis, slice, &grid);
        let phi_hom_sup = slice.sup_abs_phi_hom();
        let casimir = self
            .casimir
            .iter()
            .map(|&spec| {
                casimir(
                    ens,
                    &phis,
                    slice,
                    &grid,
                    spec,
                    phi_hom_sup,
                    self.kernel,
                    self.chunks,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let sup = supnorm_bound(ens, &phis, phi_hom_sup);
        let (mu_slack, rho_slack) = interpolation_bounds(mom, sup.f_sup, self.a_sup);
        let min = |v: &[f64]| v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        let j_excess = mom
            .j
            .iter()
            .zip(&mom.rho)
            .fold(f64::NEG_INFINITY, |m, (j, r)| m.max(j.abs() - r));
        let pow_norm = |v: &[f64], p: f64| {
            let w: Vec<f64> = v.iter().map(|x| x.abs().powf(p)).collect();
            grid.integrate(&w).powf(1.0 / p)
        };

        let level = LocalLevel::new(mom, slice);
        self.locals.push(level);
        let n = self.locals.len();
        if n >= 3 {
            let (rm, re) = local_conservation_residual(
                [
                    &self.locals[n - 3],
                    &self.locals[n - 2],
                    &self.locals[n - 1],
                ],
                self.dt,
                &grid,
            );
            let prev = self.rows.last_mut().expect("previous row");
            prev.continuity_residual = rm;
            prev.energy_residual = re;
            self.locals.remove(0);
        }

        let continuity_ratio = match self.phi.last() {
            Some((t0, phi0, phit0)) => {
                let diff: Vec<f64> = slice.phi.iter().zip(phi0).map(|(a, b)| a - b).collect();
                let d = l2(&grid, &diff);
                let lip = l2(&grid, phit0).max(l2(&grid, &slice.dphi_dt));
                if d > 0.0 {
                    d / (lip * (slice.t - t0).abs())
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        self.phi
            .push((slice.t, slice.phi.clone(), slice.dphi_dt.clone()));

        self.rows.push(DiagnosticsRecord {
            t: state.t,
            mass_particle,
            mass_grid,
            energy_kinetic,
            energy_field,
            energy_total,
            casimir,
            f_sup: sup.f_sup,
            sup_bound_rhs: sup.rhs,
            phi_hom_sup,
            psi_max: slice.psi.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x)),
            mu_l2: l2(&grid, &mom.mu),
            rho_l43: pow_norm(&mom.rho, 4.0 / 3.0),
            mu_bound_slack: min(&mu_slack),
            rho_bound_slack: min(&rho_slack),
            j_excess,
            momentum_support: momentum_support(ens),
            propagation_excess: propagation_check(
                &mom.rho,
                &grid,
                self.radius,
                state.t,
                self.kernel,
            ),
            continuity_residual: 0.0,
            energy_residual: 0.0,
            continuity_ratio,
        });
        Ok(self.rows.last().expect("row just pushed"))
    }

    pub fn summary(&self) -> Summary {
        let rows = &self.rows;
        let tol = self.slack_tolerance;
        let mut checks = Vec::new();
        let mut warnings = Vec::new();
        let first = match rows.first() {
            Some(r) => r,
            None => {
                return Summary {
                    checks,
                    warnings,
                    phi_hom_growth: 0.0,
                    continuity_ratio: 0.0,
                }
            }
        };
        let mut push = |name, pass, detail: String| checks.push(Check { name, pass, detail });

        let mass_const = rows
            .iter()
            .all(|r| r.mass_particle.to_bits() == first.mass_particle.to_bits());
        push(
            "mass_particle_constant",
            mass_const,
            format!("{:.17e}", first.mass_particle),
        );

        let casimir_const = (0..first.casimir.len()).all(|k| {
            rows.iter()
                .all(|r| r.casimir[k].exact.to_bits() == first.casimir[k].exact.to_bits())
        });
        push(
            "casimir_exact_constant",
            casimir_const,
            format!("{} specs", first.casimir.len()),
        );

        let psi_max = rows.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.psi_max));
        push(
            "psi_nonpositive",
            psi_max <= 0.0,
            format!("max psi {psi_max:e}"),
        );

        let worst_sup = rows
            .iter()
            .map(|r| (r.sup_bound_rhs - r.f_sup) / r.sup_bound_rhs.max(1.0))
            .fold(f64::INFINITY, f64::min);
        push(
            "sup_norm_bound",
            worst_sup >= -tol,
            format!("min slack {worst_sup:e}"),
        );

        let worst_wlq = rows
            .iter()
            .flat_map(|r| {
                r.casimir
                    .iter()
                    .map(|c| (c.wlq_rhs - c.wlq_lhs) / c.wlq_rhs.max(1.0))
            })
            .fold(f64::INFINITY, f64::min);
        push(
            "weighted_lq_bound",
            worst_wlq >= -tol,
            format!("min slack {worst_wlq:e}"),
        );

        let worst_mu = rows
            .iter()
            .map(|r| r.mu_bound_slack)
            .fold(f64::INFINITY, f64::min);
        push(
            "mu_bound",
            worst_mu >= -tol,
            format!("min slack {worst_mu:e}"),
        );
        let worst_rho = rows
            .iter()
            .map(|r| r.rho_bound_slack)
            .fold(f64::INFINITY, f64::min);
        push(
            "rho_bound",
            worst_rho >= -tol,
            format!("min slack {worst_rho:e}"),
        );
        let worst_j = rows
            .iter()
            .map(|r| r.j_excess)
            .fold(f64::NEG_INFINITY, f64::max);
        push(
            "current_dominated_by_density",
            worst_j <= tol,
            format!("max |j| - rho {worst_j:e}"),
        );

        let excess = rows
            .iter()
            .map(|r| r.propagation_excess)
            .fold(0.0, f64::max);
        push(
            "finite_propagation",
            excess <= tol,
            format!("max excess {excess:e}"),
        );

        let e0 = first.energy_total;
        let e_max = rows
            .iter()
            .map(|r| r.energy_total)
            .fold(f64::NEG_INFINITY, f64::max);
        push(
            "energy_bounded",
            e_max <= e0 * (1.0 + self.energy_tolerance) + tol,
            format!("max/initial {:.6}", if e0 > 0.0 { e_max / e0 } else { 0.0 }),
        );

        let view: Vec<(f64, &[f64], &[f64])> = self
            .phi
            .iter()
            .map(|(t, a, b)| (*t, &a[..], &b[..]))
            .collect();
        let continuity_ratio = time_continuity_check(&view, &self.grid);
        push(
            "time_continuity",
            continuity_ratio <= self.continuity_ratio_max,
            format!("max ratio {continuity_ratio:.6}"),
        );

        push(
            "finite_values",
            rows.iter().all(|r| r.is_finite()),
            String::new(),
        );

        let p_max = rows.iter().map(|r| r.momentum_support).fold(0.0, f64::max);
        if self.momentum_initial > 0.0 && p_max > self.momentum_warn_factor * self.momentum_initial
        {
            warnings.push(format!(
                "momentum support grew from {:.4} to {:.4}",
                self.momentum_initial, p_max
            ));
        }
        let phi_hom_growth = rows
            .iter()
            .map(|r| r.phi_hom_sup / (1.0 + r.t))
            .fold(0.0, f64::max);
        Summary {
            checks,
            warnings,
            phi_hom_growth,
            continuity_ratio,
        }
    }
}
