//! Safeguarded Newton iteration on a sign-changing bracket.

/// Root of `f` in `[lo, hi]` where `f` returns `(value, derivative)`.
///
/// Newton steps that leave the current bracket are replaced by bisection.
/// Returns `None` when the endpoint values do not bracket a sign change.
pub(crate) fn newton_bisect<F: FnMut(f64) -> (f64, f64)>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Option<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    // orient so that f(a) < 0 < f(b)
    let (mut a, mut b) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let (l, r) = if a < b { (a, b) } else { (b, a) };
        let next = if newton.is_finite() && newton > l && newton < r { newton } else { 0.5 * (a + b) };
        if (next - x).abs() <= xtol || (r - l) <= xtol {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 3.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12).is_none());
    }
}
