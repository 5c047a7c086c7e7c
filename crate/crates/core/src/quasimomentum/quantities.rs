use serde::{Deserialize, Serialize};

use super::{cheb_pt, cheb_theta, Pt, Quasimomentum, PI};
use crate::error::{Error, Result};
use crate::quadrature::gl_interval;

/// Per-gap scalars of a solved quasimomentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapQuantities {
    pub u: f64,
    pub h: f64,
    pub l: f64,
    pub a: f64,
    pub j: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub nu: f64,
    pub big_l: f64,
}

impl Quasimomentum {
    fn check_gap(&self, n: usize) -> Result<()> {
        if n >= self.gaps.len() {
            return Err(Error::InvalidGapIndex(n));
        }
        Ok(())
    }

    /// Recovered `(u_n, h_n)` for every gap.
    pub fn heights_and_positions(&self) -> (Vec<f64>, Vec<f64>) {
        (self.u.clone(), self.h.clone())
    }

    /// `v = Im k` on the closed gap `n`.
    pub fn v_on_gap(&self, n: usize, x: f64) -> Result<f64> {
        self.check_gap(n)?;
        let g = self.gaps[n];
        if !(x >= g.lo && x <= g.hi) {
            return Err(Error::OutOfGap { gap: n, x });
        }
        Ok(self.v_theta(n, cheb_theta(g.lo, g.hi, x)))
    }

    /// `int v dx` over gap `n`, written as `int (x - m)(x - c) G d theta` after integrating by parts.
    fn v_moment(&self, n: usize) -> f64 {
        let g = self.gaps[n];
        let r = g.rad();
        self.rules[n].integrate(|t| {
            let p = cheb_pt(g.lo, g.hi, t);
            -r * t.cos() * p.diff(g.c) * self.product_except(&p, n, usize::MAX)
        })
    }

    /// `A_n = (2/pi) int_gap v dx`.
    pub fn action(&self, n: usize) -> Result<f64> {
        self.check_gap(n)?;
        Ok((2.0 / PI * self.v_moment(n)).max(0.0))
    }

    pub fn sqrt_action(&self, n: usize) -> Result<f64> {
        Ok(self.action(n)?.sqrt())
    }

    /// `(Q0, I_D)`, with `Q0 = (1/pi) int v` taken by nested quadrature of `v`
    /// and cross-checked against the sum of the actions.
    pub fn q0_and_dirichlet(&self) -> Result<(f64, f64)> {
        let mut total = 0.0;
        for n in 0..self.gaps.len() {
            let g = self.gaps[n];
            let r = g.rad();
            total += self.rules[n].integrate(|t| self.v_theta(n, t) * r * t.sin());
        }
        let q0 = total / PI;
        let sum_a: f64 = (0..self.gaps.len()).map(|n| 2.0 / PI * self.v_moment(n)).sum();
        if (2.0 * q0 - sum_a).abs() > 1e-8 * q0.max(1.0) {
            return Err(Error::IdentityViolation { lhs: 2.0 * q0, rhs: sum_a });
        }
        Ok((q0, 2.0 * q0))
    }

    /// `(mu^-, mu^+)` with `mu^- < 0 < mu^+`.
    pub fn effective_masses(&self, n: usize) -> Result<(f64, f64)> {
        self.check_gap(n)?;
        let g = self.gaps[n];
        let at = |e: f64| {
            let p = Pt::at(e);
            let c = (e - g.c).abs() / g.len().sqrt() * self.product_except(&p, n, usize::MAX);
            2.0 * c * c
        };
        Ok((-at(g.lo), at(g.hi)))
    }

    /// `nu_n = 1 / |q'(c_n)|`.
    pub fn tip_mass(&self, n: usize) -> Result<f64> {
        self.check_gap(n)?;
        let g = self.gaps[n];
        let p = Pt::at(g.c);
        let rho = ((g.c - g.lo) * (g.hi - g.c)).sqrt();
        Ok(rho / self.product_except(&p, n, usize::MAX))
    }

    /// `L_n = 2 int_gap sqrt(v'^2 + 1) dx`.
    pub fn invariant_length(&self, n: usize) -> Result<f64> {
        self.check_gap(n)?;
        let g = self.gaps[n];
        let r = g.rad();
        Ok(2.0
            * self.rules[n].integrate(|t| {
                let dv = self.dv_dtheta(n, t);
                let dx = r * t.sin();
                dv.hypot(dx)
            }))
    }

    /// `V_n(x) = (1/pi) int_{R \ gap n} v(t) dt / (|t - x| v_n(t))`, with
    /// `v_n(t) = |(t - z_n^-)(t - z_n^+)|^{1/2}`; only other gaps contribute.
    pub fn v_correction(&self, n: usize, x: f64) -> Result<f64> {
        self.check_gap(n)?;
        let g = self.gaps[n];
        if !(x >= g.lo && x <= g.hi) {
            return Err(Error::OutOfGap { gap: n, x });
        }
        let px = Pt::at(x);
        let mut total = 0.0;
        for j in (0..self.gaps.len()).filter(|&j| j != n) {
            let gj = self.gaps[j];
            let r = gj.rad();
            total += self.rules[j].integrate(|t| {
                let p = cheb_pt(gj.lo, gj.hi, t);
                let dist = (p.x() - px.x()).abs();
                let vn = (p.diff(g.lo) * p.diff(g.hi)).abs().sqrt();
                self.v_theta(j, t) * r * t.sin() / (dist * vn)
            });
        }
        Ok(total / PI)
    }

    pub fn gap_quantities(&self, n: usize) -> Result<GapQuantities> {
        self.check_gap(n)?;
        let a = self.action(n)?;
        let (mu_minus, mu_plus) = self.effective_masses(n)?;
        Ok(GapQuantities {
            u: self.u[n],
            h: self.h[n],
            l: self.gaps[n].len(),
            a,
            j: a.sqrt(),
            mu_minus,
            mu_plus,
            nu: self.tip_mass(n)?,
            big_l: self.invariant_length(n)?,
        })
    }

    /// Point on the real axis where `k` takes the real value `target`, which must not be a slit position.
    pub fn band_point(&self, target: f64) -> Result<f64> {
        let n = self.gaps.len();
        if n == 0 {
            return Ok(target);
        }
        let k = self.u.partition_point(|&u| u < target);
        if k < n && self.u[k] == target {
            return Err(Error::OnSlit);
        }
        // bracket on the band between gap k-1 and gap k
        let lo = if k == 0 { self.gaps[0].lo - (self.u[0] - target) - 1.0 } else { self.gaps[k - 1].hi };
        let hi = if k == n { self.gaps[n - 1].hi + (target - self.u[n - 1]) + 1.0 } else { self.gaps[k].lo };
        let f = |x: f64| {
            let v = self.k_real(x).re - target;
            let q = self.q_real(x).map(|q| q.re).unwrap_or(f64::INFINITY);
            (v, q)
        };
        let scale = lo.abs().max(hi.abs()).max(1.0);
        crate::roots::newton_bisect(f, lo, hi, 4.0 * f64::EPSILON * scale)
            .ok_or(Error::NonConvergence { residual: f64::NAN, iterations: 0 })
    }

    /// Integral of `v` from `z_n^-` to `x` (used by the rectangle estimate).
    pub(crate) fn v_integral_from(&self, n: usize, x: f64) -> f64 {
        let g = self.gaps[n];
        let tx = cheb_theta(g.lo, g.hi, x);
        let r = g.rad();
        let rule = &self.rules[n];
        let mut s = 0.0;
        for &(a, b) in &rule.panels {
            if a >= tx {
                break;
            }
            let b = b.min(tx);
            s += gl_interval(a, b, self.quad.order, |t| self.v_theta(n, t) * r * t.sin());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadSettings;

    #[test]
    fn single_gap_quantities() {
        let q = Quasimomentum::solve(&[(-1.0, 1.0)], QuadSettings::default()).unwrap();
        let g = q.gap_quantities(0).unwrap();
        assert!((g.a - 1.0).abs() < 1e-14);
        assert!((g.mu_plus - 1.0).abs() < 1e-14 && (g.mu_minus + 1.0).abs() < 1e-14);
        assert!((g.nu - 1.0).abs() < 1e-14);
        assert!((g.big_l - 2.0 * PI).abs() < 1e-13);
        let (q0, id) = q.q0_and_dirichlet().unwrap();
        assert!((q0 - 0.5).abs() < 1e-14 && (id - 1.0).abs() < 1e-14);
        for x in [-0.9, -0.3, 0.0, 0.55, 0.999] {
            let v = q.v_on_gap(0, x).unwrap();
            assert!((v - (1.0 - x * x).sqrt()).abs() < 1e-14, "x={x}: {v}");
        }
        assert!(matches!(q.v_on_gap(0, 1.5), Err(Error::OutOfGap { .. })));
        assert_eq!(q.v_correction(0, 0.2).unwrap(), 0.0);
        assert!((q.band_point(3f64.sqrt()).unwrap() - 2.0).abs() < 1e-14);
        assert!((q.v_integral_from(0, 1.0) - PI / 2.0).abs() < 1e-14);
    }
}
