//! Closed-form potentials on full 3D space.

/// `phi(t, x)` with analytic `phi_t` and `grad phi`, `x` in R^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrescribedField {
    Zero,
    /// `alpha t`
    LinearInTime {
        alpha: f64,
    },
    /// `alpha t + beta sin(x1)`
    Separable {
        alpha: f64,
        beta: f64,
    },
    /// `amp exp(-|x - v t e1|^2 / w^2)`
    Pulse {
        amp: f64,
        width: f64,
        speed: f64,
    },
}

impl PrescribedField {
    pub fn name(&self) -> &'static str {
        match self {
            PrescribedField::Zero => "zero",
            PrescribedField::LinearInTime { .. } => "linear-in-time",
            PrescribedField::Separable { .. } => "separable",
            PrescribedField::Pulse { .. } => "pulse",
        }
    }

    /// Default catalog used by the verification suite.
    pub fn catalog() -> Vec<PrescribedField> {
        vec![
            PrescribedField::Zero,
            PrescribedField::LinearInTime { alpha: 0.3 },
            PrescribedField::Separable {
                alpha: 0.3,
                beta: 0.2,
            },
            PrescribedField::Pulse {
                amp: 0.4,
                width: 0.8,
                speed: 0.5,
            },
        ]
    }

    pub fn from_name(name: &str) -> Option<PrescribedField> {
        Self::catalog().into_iter().find(|f| f.name() == name)
    }

    pub fn phi(&self, t: f64, x: &[f64; 3]) -> f64 {
        match *self {
            PrescribedField::Zero => 0.0,
            PrescribedField::LinearInTime { alpha } => alpha * t,
            PrescribedField::Separable { alpha, beta } => alpha * t + beta * x[0].sin(),
            PrescribedField::Pulse { amp, width, speed } => {
                let d0 = x[0] - speed * t;
                amp * (-(d0 * d0 + x[1] * x[1] + x[2] * x[2]) / (width * width)).exp()
            }
        }
    }

    /// `(phi_t, grad phi)`.
    pub fn derivatives(&self, t: f64, x: &[f64; 3]) -> (f64, [f64; 3]) {
        match *self {
            PrescribedField::Zero => (0.0, [0.0; 3]),
            PrescribedField::LinearInTime { alpha } => (alpha, [0.0; 3]),
            PrescribedField::Separable { alpha, beta } => (alpha, [beta * x[0].cos(), 0.0, 0.0]),
            PrescribedField::Pulse { width, speed, .. } => {
                let phi = self.phi(t, x);
                let d0 = x[0] - speed * t;
                let k = -2.0 / (width * width);
                let grad = [k * d0 * phi, k * x[1] * phi, k * x[2] * phi];
                (-speed * grad[0], grad)
            }
        }
    }
}
