//! Initial data `(f_in, phi0, phi1)` for the slab problem and the built-in profile catalog.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::wavefield::Mollifier;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type PhaseDensity = Arc<dyn Fn(f64, &[f64; 3]) -> f64 + Send + Sync>;

/// Initial data on `R x R^3` (slab coordinate, 3D momentum).
///
/// `f_in`, `phi0` and `phi1` vanish for `|x| > support_radius`; `f_in` also vanishes
/// outside `momentum_box`. The derivative of `phi0` is always supplied in closed form.
#[derive(Clone)]
pub struct InitialData {
    pub name: String,
    pub f_in: PhaseDensity,
    pub phi0: ScalarFn,
    pub dphi0: ScalarFn,
    pub phi1: ScalarFn,
    pub support_radius: f64,
    /// Radius of the x-support of `f_in` alone (field data may extend further after mollification).
    pub kinetic_radius: f64,
    pub momentum_box: [(f64, f64); 3],
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .field("kinetic_radius", &self.kinetic_radius)
            .field("momentum_box", &self.momentum_box)
            .finish_non_exhaustive()
    }
}

impl InitialData {
    pub fn vacuum(radius: f64) -> Self {
        let zero: ScalarFn = Arc::new(|_| 0.0);
        InitialData {
            name: "vacuum".into(),
            f_in: Arc::new(|_, _| 0.0),
            phi0: zero.clone(),
            dphi0: zero.clone(),
            phi1: zero,
            support_radius: radius,
            kinetic_radius: radius,
            momentum_box: [(-1.0, 1.0); 3],
        }
    }

    /// Replace the field data `(phi0, phi0', phi1)`, keeping `f_in`.
    pub fn with_field_data(mut self, phi0: ScalarFn, dphi0: ScalarFn, phi1: ScalarFn) -> Self {
        self.phi0 = phi0;
        self.dphi0 = dphi0;
        self.phi1 = phi1;
        self
    }

    /// Field data convolved with the discrete mollifier: `phi0 * delta_n`, `phi1 * delta_n`.
    ///
    /// The convolution is a finite weighted sum of translates, so the result is evaluable at any
    /// point and `(phi0 * delta_n)' = phi0' * delta_n` holds exactly. `f_in` is left unchanged.
    pub fn mollified(&self, moll: &Mollifier) -> InitialData {
        let taps: Arc<Vec<(f64, f64)>> = Arc::new(moll.taps());
        let conv = |g: &ScalarFn| -> ScalarFn {
            let g = g.clone();
            let taps = taps.clone();
            Arc::new(move |x| taps.iter().map(|&(y, w)| w * g(x - y)).sum())
        };
        InitialData {
            name: format!("{}+mollified(n={})", self.name, moll.n()),
            f_in: self.f_in.clone(),
            phi0: conv(&self.phi0),
            dphi0: conv(&self.dphi0),
            phi1: conv(&self.phi1),
            support_radius: self.support_radius + moll.radius(),
            kinetic_radius: self.kinetic_radius,
            momentum_box: self.momentum_box,
        }
    }
}

/// `(1 - r^2)^k` on `|r| < 1`, zero outside.
#[inline]
fn bump(r: f64, k: i32) -> f64 {
    if r.abs() < 1.0 {
        (1.0 - r * r).powi(k)
    } else {
        0.0
    }
}

/// Compactly supported field data `amp * (1 - (x/R)^2)^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBump {
    pub phi0_amplitude: f64,
    pub phi1_amplitude: f64,
    pub radius: f64,
}

impl FieldBump {
    pub fn functions(&self) -> (ScalarFn, ScalarFn, ScalarFn) {
        let (a0, a1, r) = (self.phi0_amplitude, self.phi1_amplitude, self.radius);
        let phi0: ScalarFn = Arc::new(move |x| a0 * bump(x / r, 4));
        let dphi0: ScalarFn = Arc::new(move |x| {
            let u = x / r;
            if u.abs() < 1.0 {
                a0 * 4.0 * (1.0 - u * u).powi(3) * (-2.0 * u / r)
            } else {
                0.0
            }
        });
        let phi1: ScalarFn = Arc::new(move |x| a1 * bump(x / r, 4));
        (phi0, dphi0, phi1)
    }
}

/// Entries of the built-in profile catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    /// `A * X(x) * G(|p|)` with `X`, `G` Gaussians tapered by `(1 - r^2)^3` to compact support.
    GaussianBump {
        mass: f64,
        x_width: f64,
        p_width: f64,
        radius: f64,
        p_max: f64,
        field: FieldBump,
    },
    /// Two counter-streaming copies of the momentum bump centred at `+-stream_momentum` along p1.
    TwoStream {
        mass: f64,
        x_width: f64,
        p_width: f64,
        radius: f64,
        p_max: f64,
        stream_momentum: f64,
        field: FieldBump,
    },
    Vacuum {
        radius: f64,
        field: FieldBump,
    },
    /// Tabulated `f_in` read from a text file; field data from the bump parameters.
    Table {
        path: PathBuf,
        field: FieldBump,
    },
}

impl ProfileSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileSpec::GaussianBump { .. } => "gaussian-bump",
            ProfileSpec::TwoStream { .. } => "two-stream",
            ProfileSpec::Vacuum { .. } => "vacuum",
            ProfileSpec::Table { .. } => "table",
        }
    }

    pub fn build(&self) -> Result<InitialData> {
        match self {
            ProfileSpec::GaussianBump {
                mass,
                x_width,
                p_width,
                radius,
                p_max,
                field,
            } => Ok(tapered_gaussian(
                *mass, *x_width, *p_width, *radius, *p_max, 0.0, field,
            )),
            ProfileSpec::TwoStream {
                mass,
                x_width,
                p_width,
                radius,
                p_max,
                stream_momentum,
                field,
            } => Ok(tapered_gaussian(
                *mass,
                *x_width,
                *p_width,
                *radius,
                *p_max,
                *stream_momentum,
                field,
            )),
            ProfileSpec::Vacuum { radius, field } => {
                let (phi0, dphi0, phi1) = field.functions();
                let r = radius.max(field.radius);
                let mut data = InitialData::vacuum(r).with_field_data(phi0, dphi0, phi1);
                data.kinetic_radius = 0.0;
                Ok(data)
            }
            ProfileSpec::Table { path, field } => {
                let table = PhaseTable::read(path)?;
                Ok(table.into_initial_data(field))
            }
        }
    }
}

fn tapered_gaussian(
    mass: f64,
    x_width: f64,
    p_width: f64,
    radius: f64,
    p_max: f64,
    stream: f64,
    field: &FieldBump,
) -> InitialData {
    let (phi0, dphi0, phi1) = field.functions();
    let spatial = move |x: f64| bump(x / radius, 3) * (-0.5 * x * x / (x_width * x_width)).exp();
    let radial = move |r: f64| bump(r / p_max, 3) * (-0.5 * r * r / (p_width * p_width)).exp();

    // Normalize so that the initial mass  int e^{-phi0} int f dp dx  equals `mass`.
    let phi0_n = phi0.clone();
    let ix = gauss_legendre(|x| (-phi0_n(x)).exp() * spatial(x), -radius, radius, 4000);
    let lobes = if stream != 0.0 { 2.0 } else { 1.0 };
    let ip = lobes * 4.0 * PI * gauss_legendre(|r| r * r * radial(r), 0.0, p_max, 4000);
    let amp = if mass > 0.0 { mass / (ix * ip) } else { 0.0 };

    let f_in: PhaseDensity = if stream != 0.0 {
        Arc::new(move |x, p| {
            let s = spatial(x);
            if s == 0.0 {
                return 0.0;
            }
            let perp = p[1] * p[1] + p[2] * p[2];
            let rp = ((p[0] - stream).powi(2) + perp).sqrt();
            let rm = ((p[0] + stream).powi(2) + perp).sqrt();
            amp * s * (radial(rp) + radial(rm))
        })
    } else {
        Arc::new(move |x, p| {
            let s = spatial(x);
            if s == 0.0 {
                return 0.0;
            }
            amp * s * radial((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        })
    };
    let name = if stream != 0.0 {
        "two-stream"
    } else {
        "gaussian-bump"
    };
    InitialData {
        name: name.into(),
        f_in,
        phi0,
        dphi0,
        phi1,
        support_radius: radius.max(field.radius),
        kinetic_radius: radius,
        momentum_box: [
            (-stream.abs() - p_max, stream.abs() + p_max),
            (-p_max, p_max),
            (-p_max, p_max),
        ],
    }
}

/// Piecewise-constant `f_in` on a tensor grid of cells in `(x, p1, p2, p3)`.
///
/// Text format: one header line
///
/// ```text
/// nx np1 np2 np3 x_lo x_hi p1_lo p1_hi p2_lo p2_hi p3_lo p3_hi
/// ```
///
/// followed by `nx*np1*np2*np3` whitespace-separated cell values, `x` slowest and `p3` fastest.
/// Lines starting with `#` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub dims: [usize; 4],
    pub bounds: [(f64, f64); 4],
    pub values: Vec<f64>,
}

impl PhaseTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty table".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse {
            line: hline + 1,
            msg: msg.to_string(),
        };
        if fields.len() != 12 {
            return Err(bad("header needs 4 dims and 8 bounds"));
        }
        let mut dims = [0usize; 4];
        for k in 0..4 {
            dims[k] = fields[k].parse().map_err(|_| bad("bad grid dimension"))?;
            if dims[k] == 0 {
                return Err(bad("zero grid dimension"));
            }
        }
        let mut bounds = [(0.0, 0.0); 4];
        for k in 0..4 {
            let lo: f64 = fields[4 + 2 * k].parse().map_err(|_| bad("bad bound"))?;
            let hi: f64 = fields[5 + 2 * k].parse().map_err(|_| bad("bad bound"))?;
            if !(hi > lo) {
                return Err(bad("bounds must satisfy lo < hi"));
            }
            bounds[k] = (lo, hi);
        }
        let expected = dims.iter().product::<usize>();
        let mut values = Vec::with_capacity(expected);
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    msg: format!("bad value {tok:?}"),
                })?;
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Parse {
                        line: ln + 1,
                        msg: format!("f_in must be finite and non-negative, got {v}"),
                    });
                }
                values.push(v);
            }
        }
        if values.len() != expected {
            return Err(Error::Parse {
                line: hline + 1,
                msg: format!("expected {expected} values, found {}", values.len()),
            });
        }
        Ok(PhaseTable {
            dims,
            bounds,
            values,
        })
    }

    pub fn value(&self, x: f64, p: &[f64; 3]) -> f64 {
        let coords = [x, p[0], p[1], p[2]];
        let mut idx = 0usize;
        for k in 0..4 {
            let (lo, hi) = self.bounds[k];
            let c = coords[k];
            if !(c >= lo && c < hi) {
                return 0.0;
            }
            let cell = (((c - lo) / (hi - lo)) * self.dims[k] as f64) as usize;
            idx = idx * self.dims[k] + cell.min(self.dims[k] - 1);
        }
        self.values[idx]
    }

    pub fn into_initial_data(self, field: &FieldBump) -> InitialData {
        let (phi0, dphi0, phi1) = field.functions();
        let kinetic_radius = self.bounds[0].0.abs().max(self.bounds[0].1.abs());
        let momentum_box = [self.bounds[1], self.bounds[2], self.bounds[3]];
        let table = Arc::new(self);
        InitialData {
            name: "table".into(),
            f_in: Arc::new(move |x, p| table.value(x, p)),
            phi0,
            dphi0,
            phi1,
            support_radius: kinetic_radius.max(field.radius),
            kinetic_radius,
            momentum_box,
        }
    }
}
