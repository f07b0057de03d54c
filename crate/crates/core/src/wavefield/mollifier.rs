use crate::error::{Error, Result};

/// Discrete even bump `exp(-1/(1 - (x n)^2))` on the grid offsets `|j dx| < 1/n`,
/// normalized by its discrete sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    n: u32,
    dx: f64,
    /// Weights for offsets `0, 1, ..., half_width`; offset `-j` shares the weight of `j`.
    weights: Vec<f64>,
}

impl Mollifier {
    pub fn new(n: u32, dx: f64) -> Self {
        assert!(n >= 1, "mollifier index must be positive");
        assert!(dx > 0.0);
        let nf = n as f64;
        let mut raw = Vec::new();
        let mut j = 0usize;
        loop {
            let u = j as f64 * dx * nf;
            if u >= 1.0 {
                break;
            }
            raw.push((-1.0 / (1.0 - u * u)).exp());
            j += 1;
        }
        let total: f64 = raw[0] + 2.0 * raw[1..].iter().sum::<f64>();
        let weights = raw.iter().map(|w| w / total).collect();
        Mollifier { n, dx, weights }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn half_width(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weight(&self, offset: isize) -> f64 {
        self.weights
            .get(offset.unsigned_abs())
            .copied()
            .unwrap_or(0.0)
    }

    /// `(offset, weight)` pairs over the full stencil, offsets in physical units.
    pub fn taps(&self) -> Vec<(f64, f64)> {
        let h = self.half_width() as isize;
        (-h..=h)
            .map(|j| (j as f64 * self.dx, self.weight(j)))
            .collect()
    }

    fn check_width(&self, len: usize) -> Result<()> {
        let width = 2 * self.half_width() + 1;
        if width > len {
            return Err(Error::KernelWiderThanDomain { width, len });
        }
        Ok(())
    }

    /// Convolution with zero extension outside the grid.
    pub fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_width(g.len())?;
        let n = g.len() as isize;
        let at = |i: isize| if i >= 0 && i < n { g[i as usize] } else { 0.0 };
        Ok((0..n)
            .map(|i| {
                // pairwise in offset so symmetric inputs give bitwise symmetric outputs
                let mut s = self.weights[0] * g[i as usize];
                for (j, w) in self.weights.iter().enumerate().skip(1) {
                    let j = j as isize;
                    s += w * (at(i - j) + at(i + j));
                }
                s
            })
            .collect())
    }

    /// Convolution on a periodic grid.
    pub fn apply_periodic(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.check_width(g.len())?;
        let n = g.len() as isize;
        let at = |i: isize| g[i.rem_euclid(n) as usize];
        Ok((0..n)
            .map(|i| {
                let mut s = self.weights[0] * g[i as usize];
                for (j, w) in self.weights.iter().enumerate().skip(1) {
                    let j = j as isize;
                    s += w * (at(i - j) + at(i + j));
                }
                s
            })
            .collect())
    }
}

/// Apply the mollifier `times` times (2 for the source, 1 for field data).
pub fn mollify(g: &[f64], moll: &Mollifier, times: usize) -> Result<Vec<f64>> {
    let mut out = g.to_vec();
    for _ in 0..times {
        out = moll.apply(&out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_are_even_nonnegative_and_unit_mass() {
        let m = Mollifier::new(4, 0.01);
        let taps = m.taps();
        let total: f64 = taps.iter().map(|t| t.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for &(y, w) in &taps {
            assert!(w >= 0.0);
            assert!(y.abs() < 0.25);
            assert_eq!(
                m.weight((y / 0.01).round() as isize),
                m.weight(-(y / 0.01).round() as isize)
            );
        }
        assert_eq!(m.half_width(), 24);
    }

    #[test]
    fn unresolved_kernel_is_identity() {
        let m = Mollifier::new(32, 0.1);
        assert_eq!(m.half_width(), 0);
        let g = vec![1.0, 2.0, 3.0];
        assert_eq!(m.apply(&g).unwrap(), g);
    }

    #[test]
    fn constant_stays_constant_periodic() {
        let m = Mollifier::new(5, 0.02);
        let g = vec![3.5; 100];
        for v in m.apply_periodic(&g).unwrap() {
            assert!((v - 3.5).abs() < 1e-14);
        }
    }

    #[test]
    fn spike_spreads_within_radius_and_keeps_mass() {
        let dx = 0.001;
        let m = Mollifier::new(50, dx);
        let mut g = vec![0.0; 201];
        g[100] = 1.0;
        let out = m.apply(&g).unwrap();
        // direct summation oracle: the output is the kernel itself
        for (i, v) in out.iter().enumerate() {
            let off = i as isize - 100;
            assert_eq!(*v, m.weight(off));
            if (off as f64 * dx).abs() >= 1.0 / 50.0 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_wide_kernel_is_rejected() {
        let m = Mollifier::new(1, 0.1);
        assert!(matches!(
            m.apply(&[1.0; 5]),
            Err(Error::KernelWiderThanDomain { .. })
        ));
    }

    proptest! {
        #[test]
        fn preserves_sign_mass_and_symmetry(
            half in proptest::collection::vec(0.0f64..10.0, 10..40),
            n in 1u32..20,
        ) {
            let mut g = half.clone();
            g.reverse();
            g.extend_from_slice(&half[1..]);
            let m = Mollifier::new(n, 0.05);
            // zero padding wide enough that two passes never reach the edge
            let pad = 2 * m.half_width() + 1;
            let mut padded = vec![0.0; pad];
            padded.extend_from_slice(&g);
            padded.extend(vec![0.0; pad]);
            let out = mollify(&padded, &m, 2).unwrap();
            prop_assert!(out.iter().all(|v| *v >= 0.0));
            let (si, so): (f64, f64) = (padded.iter().sum(), out.iter().sum());
            prop_assert!((si - so).abs() <= 1e-14 * si.max(1.0) * 4.0);
            let len = out.len();
            for i in 0..len {
                prop_assert_eq!(out[i], out[len - 1 - i]);
            }
        }

        #[test]
        fn commutes_with_periodic_translation(
            g in proptest::collection::vec(-5.0f64..5.0, 20..60),
            shift in 0usize..20,
            n in 1u32..10,
        ) {
            let m = Mollifier::new(n, 0.1);
            let len = g.len();
            let shifted: Vec<f64> = (0..len).map(|i| g[(i + shift) % len]).collect();
            let a = m.apply_periodic(&shifted).unwrap();
            let b = m.apply_periodic(&g).unwrap();
            for i in 0..len {
                prop_assert!((a[i] - b[(i + shift) % len]).abs() < 1e-12);
            }
        }
    }
}
