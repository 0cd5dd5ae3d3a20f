//! Smooth cut-off functions built from `exp(-1/x)`.

fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// `C^infinity` step: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = psi(x);
    let b = psi(1.0 - x);
    if a + b == 0.0 {
        return if x >= 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Radial bump: 1 on `[0, eps/2]`, 0 on `[eps, inf)`.
pub fn bump(r: f64, eps: f64) -> f64 {
    1.0 - smooth_step((r - 0.5 * eps) / (0.5 * eps))
}

/// Step that vanishes on `[0, a]` and equals 1 on `[b, inf)`.
pub fn ramp(x: f64, a: f64, b: f64) -> f64 {
    smooth_step((x - a) / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_plateaus() {
        assert_eq!(bump(0.0, 0.5), 1.0);
        assert_eq!(bump(0.25, 0.5), 1.0);
        assert_eq!(bump(0.5, 0.5), 0.0);
        assert_eq!(bump(0.9, 0.5), 0.0);
        let mid = bump(0.375, 0.5);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn step_is_monotone() {
        let v: Vec<f64> = (0..=100).map(|i| smooth_step(i as f64 / 100.0)).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(ramp(0.1, 0.2, 0.4), 0.0);
        assert_eq!(ramp(0.5, 0.2, 0.4), 1.0);
    }
}
