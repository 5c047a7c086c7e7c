//! Analytic capacity of finite unions of real intervals and the Ahlfors function.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::CombSolution;
use crate::quadrature::ln_1p;

/// Sorted, pairwise disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// Sorts by left end; overlapping or touching intervals are rejected.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<IntervalUnion> {
        for &(a, b) in &intervals {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidIntervals(format!("[{a}, {b}] is not a proper interval")));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in intervals.windows(2) {
            if !(w[0].1 < w[1].0) {
                return Err(Error::InvalidIntervals(format!("[{}, {}] meets [{}, {}]", w[0].0, w[0].1, w[1].0, w[1].1)));
            }
        }
        Ok(IntervalUnion { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }
}

pub fn total_length(e: &IntervalUnion) -> f64 {
    e.intervals.iter().map(|(a, b)| b - a).sum()
}

pub fn capacity(e: &IntervalUnion) -> f64 {
    total_length(e) / 4.0
}

/// `phi_E(z) = int_E dt / (z - t) = sum log((z - a) / (z - b))`.
pub fn phi(e: &IntervalUnion, z: C64) -> Result<C64> {
    if z.im == 0.0 && e.contains(z.re) {
        return Err(Error::OnSet);
    }
    // log(1 + (b - a) / (z - b)) keeps precision far from E
    Ok(e.intervals.iter().map(|&(a, b)| ln_1p((b - a) / (z - b))).sum())
}

/// `f_E = (exp(phi/2) - 1) / (exp(phi/2) + 1) = tanh(phi/4)`.
pub fn ahlfors(e: &IntervalUnion, z: C64) -> Result<C64> {
    Ok((phi(e, z)? / 4.0).tanh())
}

/// `lim z f_E(z)` at infinity, one Richardson step in `1/z` from `|z| = 1e6`.
pub fn ahlfors_derivative_at_infinity(e: &IntervalUnion) -> f64 {
    if e.intervals.is_empty() {
        return 0.0;
    }
    let c = 0.5 * (e.intervals[0].0 + e.intervals[e.intervals.len() - 1].1);
    // w f(c + w) = f'(inf) + O(1/w), expanded about the center of E
    let g = |r: f64| {
        let w = C64::new(0.0, r);
        w * ahlfors(e, c + w).unwrap_or_default()
    };
    let r = 1e6;
    (2.0 * g(2.0 * r) - g(r)).re
}

/// Largest `|f_E|` on a grid of `n x n` points around `E`, including points on
/// the real axis between intervals.
pub fn max_sampled_modulus(e: &IntervalUnion, n: usize) -> f64 {
    if e.intervals.is_empty() {
        return 0.0;
    }
    let lo = e.intervals[0].0;
    let hi = e.intervals[e.intervals.len() - 1].1;
    let pad = 0.5 * (hi - lo);
    let mut m = 0.0f64;
    for i in 0..n {
        let x = lo - pad + (hi - lo + 2.0 * pad) * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let y = pad * (j as f64 - 0.5 * (n as f64 - 1.0)) / n as f64;
            if let Ok(f) = ahlfors(e, C64::new(x, y)) {
                m = m.max(f.norm());
            }
        }
    }
    for w in e.intervals.windows(2) {
        let x = 0.5 * (w[0].1 + w[1].0);
        m = m.max(ahlfors(e, C64::new(x, 0.0)).map(|f| f.norm()).unwrap_or(0.0));
    }
    m
}

/// Capacity of the slit union `Gamma(h)` through its gap image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlitCapacityReport {
    pub l1: f64,
    /// `||l||_1 / 4`, the capacity of the gap union.
    pub capacity: f64,
    /// `||l||_1`, the other normalization.
    pub capacity_unscaled: f64,
    pub diameter: f64,
    pub passed: bool,
}

pub fn slit_union_capacity_check(sol: &CombSolution) -> SlitCapacityReport {
    let l1: f64 = sol.gaps.gaps.iter().map(|g| g.len()).sum();
    let slits: Vec<(f64, f64)> = sol.slit_index.iter().map(|&i| (sol.config.u[i], sol.config.h[i])).collect();
    let mut diameter = 0.0f64;
    for (i, &(ui, hi)) in slits.iter().enumerate() {
        diameter = diameter.max(2.0 * hi);
        for &(uj, hj) in &slits[i + 1..] {
            diameter = diameter.max((uj - ui).hypot(hi + hj));
        }
    }
    let capacity = l1 / 4.0;
    SlitCapacityReport { l1, capacity, capacity_unscaled: l1, diameter, passed: capacity <= diameter * (1.0 + 1e-12) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval() {
        let e = IntervalUnion::new(vec![(-1.0, 1.0)]).unwrap();
        assert!((phi(&e, C64::new(3.0, 0.0)).unwrap().re - 2f64.ln()).abs() < 1e-15);
        let f = ahlfors(&e, C64::new(3.0, 0.0)).unwrap();
        let s = 2f64.sqrt();
        assert!((f.re - (s - 1.0) / (s + 1.0)).abs() < 1e-15);
        assert!((ahlfors_derivative_at_infinity(&e) - 0.5).abs() < 1e-10);
        assert!(matches!(phi(&e, C64::new(0.2, 0.0)), Err(Error::OnSet)));
    }
}
