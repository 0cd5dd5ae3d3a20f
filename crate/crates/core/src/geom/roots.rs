/// Root of `g` inside a sign-change bracket `[a, b]`.
///
/// Newton steps with a central-difference derivative; any step that leaves the
/// current bracket, or fails to halve the residual, is replaced by bisection.
/// Returns `None` when `max_iter` is exhausted before the bracket collapses.
pub fn bracketed_root<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, max_iter: usize) -> Option<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    let mut x = 0.5 * (lo + hi);
    let mut gx = g(x);
    for _ in 0..max_iter {
        if gx == 0.0 {
            return Some(x);
        }
        if gx.signum() == glo.signum() {
            lo = x;
            glo = gx;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return Some(x);
        }
        let h = (1e-7 * (1.0 + x.abs())).min(0.25 * width);
        let slope = (g(x + h) - g(x - h)) / (2.0 * h);
        let newton = x - gx / slope;
        let candidate = if slope.is_finite() && slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let gc = g(candidate);
        if gc.abs() > 0.5 * gx.abs() && candidate != 0.5 * (lo + hi) {
            let mid = 0.5 * (lo + hi);
            x = mid;
            gx = g(mid);
        } else {
            x = candidate;
            gx = gc;
        }
    }
    if gx.abs() <= 1e-14 {
        Some(x)
    } else {
        None
    }
}
