//! Quadrature rules.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence from the Tricomi initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule: `order` points on each of the given panels.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Panels between consecutive `breaks`, each cut into `per_panel` equal pieces.
    pub fn new(breaks: &[f64], per_panel: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for b in breaks.windows(2) {
            let h = (b[1] - b[0]) / per_panel as f64;
            for p in 0..per_panel {
                let a = b[0] + p as f64 * h;
                for (x, w) in gx.iter().zip(&gw) {
                    nodes.push(a + 0.5 * h * (x + 1.0));
                    weights.push(0.5 * h * w);
                }
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Trapezoid rule on `[0, 2 pi)` for periodic samples.
pub fn periodic_trapezoid(values: &[crate::C64]) -> crate::C64 {
    let n = values.len() as f64;
    values.iter().sum::<crate::C64>() * (2.0 * PI / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..(2 * n).min(30) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn composite_gaussian() {
        let r = CompositeRule::new(&[0.0, 1.0, 6.0], 4, 20);
        let q = r.integrate(|x| (-x * x).exp());
        assert!((q - 0.5 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_is_spectral_on_trig_polys() {
        let n = 32;
        let v: Vec<crate::C64> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                crate::C64::new((3.0 * t).cos().powi(2), 0.0)
            })
            .collect();
        assert!((periodic_trapezoid(&v).re - PI).abs() < 1e-13);
    }
}
