//! Run configuration: a plain-text `key = value` file, one key per line, `#` comments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::data::{FieldBump, InitialData, ProfileSpec};
use crate::error::{ConfigError, Error, Result, Violation};
use crate::grid::Grid;
use crate::particle::CasimirSpec;

/// Particle-to-grid kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deposition {
    /// Linear (cloud-in-cell) weights over the two nearest nodes.
    Cic,
    /// Quadratic spline (triangular-shaped cloud) weights over the three nearest nodes.
    Tsc,
}

impl Deposition {
    /// Node offsets `(first, weights)` of a particle at fractional grid position `u`.
    #[inline]
    pub fn stencil(self, u: f64) -> (isize, [f64; 3]) {
        match self {
            Deposition::Cic => {
                let i = u.floor();
                let w = u - i;
                (i as isize, [1.0 - w, w, 0.0])
            }
            Deposition::Tsc => {
                let i = u.round();
                let d = u - i;
                let wl = 0.5 * (0.5 - d) * (0.5 - d);
                let wr = 0.5 * (0.5 + d) * (0.5 + d);
                (i as isize - 1, [wl, 0.75 - d * d, wr])
            }
        }
    }

    /// Extra reach of the kernel beyond the particle position, in cells.
    pub fn half_width(self) -> f64 {
        match self {
            Deposition::Cic => 1.0,
            Deposition::Tsc => 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    /// Requested time step; the run uses `t_final / ceil(t_final / dt)`.
    pub dt: f64,
    pub t_final: f64,
    /// Target particle count, used to size the momentum lattice when `sample_np` is unset.
    pub n_particles: usize,
    /// Sub-samples per grid cell along x.
    pub sample_per_cell: usize,
    /// Lattice points per momentum axis.
    pub sample_np: Option<usize>,
    /// Regularization index; 0 disables mollification.
    pub mollifier_n: u32,
    pub deposition: Deposition,
    /// Extra room between the light cone of the support and the boundary.
    pub margin: f64,
    pub casimir: Vec<CasimirSpec>,
    /// Force `phi = 0` for the whole run (free transport).
    pub zero_field: bool,
    pub energy_tolerance: f64,
    pub slack_tolerance: f64,
    pub continuity_ratio_max: f64,
    pub momentum_warn_factor: f64,
    pub snapshot_stride: usize,
    pub output_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            x_min: -24.0,
            x_max: 24.0,
            nx: 512,
            dt: 0.5 * 48.0 / 511.0,
            t_final: 2.0,
            n_particles: 200_000,
            sample_per_cell: 2,
            sample_np: None,
            mollifier_n: 0,
            deposition: Deposition::Tsc,
            margin: 1.0,
            casimir: vec![
                CasimirSpec { q: 1.0, gamma: 0.0 },
                CasimirSpec { q: 2.0, gamma: 0.0 },
            ],
            zero_field: false,
            energy_tolerance: 0.02,
            slack_tolerance: 1e-8,
            continuity_ratio_max: 1.05,
            momentum_warn_factor: 2.0,
            snapshot_stride: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl SimConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.x_min, self.x_max, self.nx)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx.max(2) - 1) as f64
    }

    /// Number of steps and the uniform step actually used (never larger than `dt`).
    pub fn time_steps(&self) -> (usize, f64) {
        let steps = ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }

    /// Same run with `dx`, `dt` and the sampling spacing halved.
    pub fn refined(&self) -> SimConfig {
        let mut r = self.clone();
        r.nx = 2 * (self.nx - 1) + 1;
        r.dt = self.dt / 2.0;
        r.sample_np = self.sample_np.map(|np| 2 * np);
        r.n_particles = self.n_particles * 16;
        r
    }

    /// Lattice points per momentum axis, given `x_samples` lattice points along x.
    pub fn momentum_lattice_points(&self, x_samples: usize) -> usize {
        if let Some(np) = self.sample_np {
            return np;
        }
        let per_x = self.n_particles as f64 / x_samples.max(1) as f64;
        (per_x.cbrt().round() as usize).max(2)
    }
}

/// Check every invariant of `cfg` against the support of `data`.
pub fn validate_config(
    cfg: &SimConfig,
    data: &InitialData,
) -> std::result::Result<SimConfig, ConfigError> {
    let mut violations = Vec::new();
    if cfg.nx < 16 {
        violations.push(Violation::NonpositiveRun(format!("nx = {} < 16", cfg.nx)));
    }
    if cfg.n_particles < 1 {
        violations.push(Violation::NonpositiveRun("n_particles = 0".into()));
    }
    if !(cfg.t_final > 0.0) {
        violations.push(Violation::NonpositiveRun(format!(
            "t_final = {} <= 0",
            cfg.t_final
        )));
    }
    if !(cfg.dt > 0.0) {
        violations.push(Violation::NonpositiveRun(format!("dt = {} <= 0", cfg.dt)));
    }
    if cfg.sample_per_cell < 1 {
        violations.push(Violation::NonpositiveRun("sample_per_cell = 0".into()));
    }
    if !(cfg.x_max > cfg.x_min) {
        violations.push(Violation::NonpositiveRun(format!(
            "empty domain [{}, {}]",
            cfg.x_min, cfg.x_max
        )));
    }
    let required = data.support_radius + cfg.t_final.max(0.0) + cfg.margin;
    if cfg.x_min > -required || cfg.x_max < required {
        violations.push(Violation::DomainTooSmall {
            required_half_width: required,
            x_min: cfg.x_min,
            x_max: cfg.x_max,
        });
    }
    if cfg.nx >= 2 && cfg.x_max > cfg.x_min && cfg.dt > cfg.dx() {
        violations.push(Violation::CflViolation {
            dt: cfg.dt,
            dx: cfg.dx(),
        });
    }
    if violations.is_empty() {
        Ok(cfg.clone())
    } else {
        Err(ConfigError { violations })
    }
}

/// Simulation parameters together with the initial-data profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub profile: ProfileSpec,
}

/// Every accepted key with its default and meaning; printed by `print-config-schema`.
pub const CONFIG_SCHEMA: &[(&str, &str, &str)] = &[
    ("x_min", "-24", "left end of the slab domain"),
    ("x_max", "24", "right end of the slab domain"),
    ("nx", "512", "grid nodes, both ends included (>= 16)"),
    ("dt", "-", "requested time step (overrides cfl)"),
    (
        "cfl",
        "0.5",
        "dt = cfl * dx when dt is not given; must be <= 1",
    ),
    ("t_final", "2", "end time (> 0)"),
    (
        "n_particles",
        "200000",
        "target particle count for the momentum lattice",
    ),
    (
        "sample_per_cell",
        "2",
        "quiet-start sub-samples per grid cell along x",
    ),
    (
        "sample_np",
        "-",
        "lattice points per momentum axis (overrides n_particles)",
    ),
    (
        "mollifier_n",
        "0",
        "regularization index n, kernel radius 1/n (0 = off)",
    ),
    ("deposition", "tsc", "particle-to-grid kernel: tsc | cic"),
    ("margin", "1", "light-cone clearance to the boundary"),
    ("casimir_q", "1,2", "Casimir exponents q >= 1 to monitor"),
    (
        "weight_gamma",
        "0",
        "weight exponent gamma for the weighted L^q monitor",
    ),
    ("zero_field", "false", "force phi = 0 (free transport)"),
    (
        "energy_tolerance",
        "0.02",
        "allowed relative growth of total energy",
    ),
    (
        "slack_tolerance",
        "1e-8",
        "reconstruction tolerance for inequality monitors",
    ),
    (
        "continuity_ratio_max",
        "1.05",
        "bound on the time-Lipschitz ratio of phi",
    ),
    (
        "momentum_warn_factor",
        "2",
        "warn when max|p| exceeds this multiple of its initial value",
    ),
    (
        "snapshot_stride",
        "0",
        "write a snapshot every K steps (0 = final only)",
    ),
    (
        "output_dir",
        "out",
        "directory for CSV, profiles and snapshots",
    ),
    (
        "profile",
        "gaussian-bump",
        "gaussian-bump | two-stream | vacuum | table",
    ),
    (
        "profile.mass",
        "1",
        "initial mass int e^{-phi0} int f dp dx",
    ),
    ("profile.x_width", "0.7", "Gaussian width in x"),
    ("profile.p_width", "0.4", "Gaussian width in |p|"),
    ("profile.radius", "2", "x-support radius R0 of f_in"),
    (
        "profile.p_max",
        "1.5",
        "momentum support radius of each lobe",
    ),
    (
        "profile.stream_momentum",
        "0.8",
        "two-stream lobe centre along p1",
    ),
    (
        "profile.phi0_amplitude",
        "0",
        "amplitude of phi0 = A0 (1 - (x/R)^2)^4",
    ),
    (
        "profile.phi1_amplitude",
        "0",
        "amplitude of phi1 = A1 (1 - (x/R)^2)^4",
    ),
    (
        "profile.field_radius",
        "profile.radius",
        "support radius R of the field data",
    ),
    (
        "profile.table_path",
        "-",
        "tabulated f_in file for profile = table",
    ),
];

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Parse {
        line,
        msg: format!("{key}: expected a number, got {v:?}"),
    })
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("{key}: expected a non-negative integer, got {v:?}"),
    })
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("{key}: expected true/false, got {v:?}"),
        }),
    }
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let ProfileSpec::Table { path: table, .. } = &mut cfg.profile {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or(Error::Parse {
                line,
                msg: format!("expected `key = value`, got {content:?}"),
            })?;
            let key = k.trim().to_string();
            if !CONFIG_SCHEMA.iter().any(|(name, _, _)| *name == key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key {key:?}"),
                });
            }
            if entries
                .insert(key.clone(), (line, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {key:?}"),
                });
            }
        }

        let mut sim = SimConfig::default();
        let get = |k: &str| entries.get(k).map(|(l, v)| (*l, v.as_str()));
        if let Some((l, v)) = get("x_min") {
            sim.x_min = parse_f64(l, "x_min", v)?;
        }
        if let Some((l, v)) = get("x_max") {
            sim.x_max = parse_f64(l, "x_max", v)?;
        }
        if let Some((l, v)) = get("nx") {
            sim.nx = parse_usize(l, "nx", v)?;
        }
        if let Some((l, v)) = get("t_final") {
            sim.t_final = parse_f64(l, "t_final", v)?;
        }
        let dx = (sim.x_max - sim.x_min) / (sim.nx.max(2) - 1) as f64;
        sim.dt = match (get("dt"), get("cfl")) {
            (Some((l, v)), _) => parse_f64(l, "dt", v)?,
            (None, Some((l, v))) => parse_f64(l, "cfl", v)? * dx,
            (None, None) => 0.5 * dx,
        };
        if let Some((l, v)) = get("n_particles") {
            sim.n_particles = parse_usize(l, "n_particles", v)?;
        }
        if let Some((l, v)) = get("sample_per_cell") {
            sim.sample_per_cell = parse_usize(l, "sample_per_cell", v)?;
        }
        if let Some((l, v)) = get("sample_np") {
            sim.sample_np = Some(parse_usize(l, "sample_np", v)?);
        }
        if let Some((l, v)) = get("mollifier_n") {
            sim.mollifier_n = parse_usize(l, "mollifier_n", v)? as u32;
        }
        if let Some((l, v)) = get("deposition") {
            sim.deposition = match v {
                "cic" => Deposition::Cic,
                "tsc" => Deposition::Tsc,
                other => {
                    return Err(Error::Parse {
                        line: l,
                        msg: format!("unknown deposition kernel {other:?}"),
                    })
                }
            };
        }
        if let Some((l, v)) = get("margin") {
            sim.margin = parse_f64(l, "margin", v)?;
        }
        let gamma = match get("weight_gamma") {
            Some((l, v)) => parse_f64(l, "weight_gamma", v)?,
            None => 0.0,
        };
        if let Some((l, v)) = get("casimir_q") {
            let mut specs = Vec::new();
            for tok in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let q = parse_f64(l, "casimir_q", tok)?;
                specs.push(CasimirSpec::new(q, gamma).map_err(|e| Error::Parse {
                    line: l,
                    msg: e.to_string(),
                })?);
            }
            sim.casimir = specs;
        } else {
            for s in &mut sim.casimir {
                s.gamma = gamma;
            }
            for s in &sim.casimir {
                CasimirSpec::new(s.q, s.gamma).map_err(|e| Error::Parse {
                    line: get("weight_gamma").map(|x| x.0).unwrap_or(0),
                    msg: e.to_string(),
                })?;
            }
        }
        if let Some((l, v)) = get("zero_field") {
            sim.zero_field = parse_bool(l, "zero_field", v)?;
        }
        if let Some((l, v)) = get("energy_tolerance") {
            sim.energy_tolerance = parse_f64(l, "energy_tolerance", v)?;
        }
        if let Some((l, v)) = get("slack_tolerance") {
            sim.slack_tolerance = parse_f64(l, "slack_tolerance", v)?;
        }
        if let Some((l, v)) = get("continuity_ratio_max") {
            sim.continuity_ratio_max = parse_f64(l, "continuity_ratio_max", v)?;
        }
        if let Some((l, v)) = get("momentum_warn_factor") {
            sim.momentum_warn_factor = parse_f64(l, "momentum_warn_factor", v)?;
        }
        if let Some((l, v)) = get("snapshot_stride") {
            sim.snapshot_stride = parse_usize(l, "snapshot_stride", v)?;
        }
        if let Some((_, v)) = get("output_dir") {
            sim.output_dir = PathBuf::from(v);
        }

        let num = |k: &str, default: f64| -> Result<f64> {
            match get(k) {
                Some((l, v)) => parse_f64(l, k, v),
                None => Ok(default),
            }
        };
        let mass = num("profile.mass", 1.0)?;
        let x_width = num("profile.x_width", 0.7)?;
        let p_width = num("profile.p_width", 0.4)?;
        let radius = num("profile.radius", 2.0)?;
        let p_max = num("profile.p_max", 1.5)?;
        let stream_momentum = num("profile.stream_momentum", 0.8)?;
        let field = FieldBump {
            phi0_amplitude: num("profile.phi0_amplitude", 0.0)?,
            phi1_amplitude: num("profile.phi1_amplitude", 0.0)?,
            radius: num("profile.field_radius", radius)?,
        };
        let kind = get("profile")
            .map(|(l, v)| (l, v.to_string()))
            .unwrap_or((0, "gaussian-bump".into()));
        let profile = match kind.1.as_str() {
            "gaussian-bump" => ProfileSpec::GaussianBump {
                mass,
                x_width,
                p_width,
                radius,
                p_max,
                field,
            },
            "two-stream" => ProfileSpec::TwoStream {
                mass,
                x_width,
                p_width,
                radius,
                p_max,
                stream_momentum,
                field,
            },
            "vacuum" => ProfileSpec::Vacuum { radius, field },
            "table" => {
                let (l, path) = get("profile.table_path").ok_or(Error::Parse {
                    line: kind.0,
                    msg: "profile = table requires profile.table_path".into(),
                })?;
                if path.is_empty() {
                    return Err(Error::Parse {
                        line: l,
                        msg: "empty profile.table_path".into(),
                    });
                }
                ProfileSpec::Table {
                    path: PathBuf::from(path),
                    field,
                }
            }
            other => {
                return Err(Error::Parse {
                    line: kind.0,
                    msg: format!("unknown profile {other:?}"),
                })
            }
        };
        Ok(RunConfig { sim, profile })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data_with_radius(r: f64) -> InitialData {
        InitialData::vacuum(r)
    }

    fn cfg(x: f64, nx: usize, dt: f64, t_final: f64) -> SimConfig {
        SimConfig {
            x_min: -x,
            x_max: x,
            nx,
            dt,
            t_final,
            ..SimConfig::default()
        }
    }

    #[test]
    fn accepts_contained_light_cone() {
        let c = cfg(20.0, 401, 0.05, 10.0);
        assert!(validate_config(&c, &data_with_radius(2.0)).is_ok());
    }

    #[test]
    fn rejects_small_domain() {
        let c = cfg(5.0, 101, 0.05, 10.0);
        let err = validate_config(&c, &data_with_radius(2.0)).unwrap_err();
        assert!(matches!(
            err.violations[0],
            Violation::DomainTooSmall { .. }
        ));
    }

    #[test]
    fn rejects_cfl_violation() {
        // dx = 0.1
        let c = cfg(20.0, 401, 0.2, 10.0);
        let err = validate_config(&c, &data_with_radius(2.0)).unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert!(matches!(err.violations[0], Violation::CflViolation { .. }));
    }

    #[test]
    fn reports_every_violation() {
        let c = cfg(3.0, 8, 5.0, -1.0);
        let err = validate_config(&c, &data_with_radius(2.0)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nx"));
        assert!(msg.contains("t_final"));
        assert!(msg.contains("CflViolation"));
    }

    #[test]
    fn time_steps_never_exceed_requested_dt() {
        let c = SimConfig::default();
        let (n, dt) = c.time_steps();
        assert!(dt <= c.dt);
        assert!((n as f64 * dt - c.t_final).abs() < 1e-12);
        let (n2, _) = c.refined().time_steps();
        assert_eq!(n2, 2 * n);
    }

    #[test]
    fn parses_key_value_file() {
        let text = "# baseline\nx_min = -10\nx_max = 10 # inline\nnx = 201\ncfl = 0.5\n\
                    profile = two-stream\nprofile.stream_momentum = 0.5\ncasimir_q = 1, 3\n";
        let rc = RunConfig::parse(text).unwrap();
        assert_eq!(rc.sim.nx, 201);
        assert!((rc.sim.dt - 0.05).abs() < 1e-15);
        assert_eq!(rc.sim.casimir.len(), 2);
        assert_eq!(rc.sim.casimir[1].q, 3.0);
        assert!(
            matches!(rc.profile, ProfileSpec::TwoStream { stream_momentum, .. } if stream_momentum == 0.5)
        );
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(RunConfig::parse("bogus = 1\n").is_err());
        assert!(RunConfig::parse("nx = 10\nnx = 12\n").is_err());
        assert!(RunConfig::parse("casimir_q = 0.5\n").is_err());
        assert!(RunConfig::parse("profile = table\n").is_err());
    }
}
