//! Small composite quadrature helpers shared by data normalization and test oracles.

const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Composite 3-point Gauss-Legendre rule on `panels` equal panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let mut panel = 0.0;
        for (node, w) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
            panel += w * f(mid + 0.5 * h * node);
        }
        total += 0.5 * h * panel;
    }
    total
}

/// Single-panel 3-point Gauss-Legendre rule, exact for quintics.
#[inline]
pub fn gauss_legendre_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (node, w) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
        s += w * f(mid + half * node);
    }
    half * s
}
