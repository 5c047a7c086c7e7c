//! The inverse direction: from gap endpoints to the quasimomentum
//! `k(z)`, its derivative `q(z) = prod (z - c_n) / prod sqrt((z - z_n^-)(z - z_n^+))`
//! and everything derived from it.
//!
//! All square roots are continued from the band right of all gaps through the
//! upper half-plane. Gap integrals use `x = m - r cos(theta)`, under which
//! `dx / sqrt((x - a)(b - x)) = d theta`, so every integrand is smooth on
//! `[0, pi]` and only the endpoints of other gaps act as nearby singularities.

mod dirichlet;
mod inverse;
mod quantities;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{expm1, gl_interval, ln_1p, QuadSettings, Rule};
use crate::roots::newton_bisect;

pub use quantities::GapQuantities;

const PI: f64 = std::f64::consts::PI;

/// One open gap `(z^-, z^+)` with its critical point `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    #[serde(rename = "zMinus")]
    pub lo: f64,
    pub c: f64,
    #[serde(rename = "zPlus")]
    pub hi: f64,
}

impl Gap {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn rad(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GapSystem {
    pub gaps: Vec<Gap>,
}

impl GapSystem {
    pub fn endpoints(&self) -> Vec<(f64, f64)> {
        self.gaps.iter().map(|g| (g.lo, g.hi)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check_interlacing(&self.endpoints())?;
        for (i, g) in self.gaps.iter().enumerate() {
            if !(g.lo < g.c && g.c < g.hi) {
                return Err(Error::InvalidInterlacing { index: i });
            }
        }
        Ok(())
    }
}

pub fn check_interlacing(endpoints: &[(f64, f64)]) -> Result<()> {
    for (i, &(a, b)) in endpoints.iter().enumerate() {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterlacing { index: i });
        }
        if i + 1 < endpoints.len() && !(b < endpoints[i + 1].0) {
            return Err(Error::InvalidInterlacing { index: i });
        }
    }
    Ok(())
}

/// A real point kept as `anchor + off`, so that differences to endpoints
/// close to the anchor keep full relative precision.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pt {
    pub anchor: f64,
    pub off: f64,
}

impl Pt {
    pub fn at(x: f64) -> Pt {
        Pt { anchor: x, off: 0.0 }
    }
    pub fn x(&self) -> f64 {
        self.anchor + self.off
    }
    pub fn diff(&self, e: f64) -> f64 {
        (self.anchor - e) + self.off
    }
}

/// Point of `[lo, hi]` at Chebyshev angle `theta` (0 at `lo`, pi at `hi`).
pub(crate) fn cheb_pt(lo: f64, hi: f64, theta: f64) -> Pt {
    let r = 0.5 * (hi - lo);
    if theta <= 0.5 * PI {
        let s = (0.5 * theta).sin();
        Pt { anchor: lo, off: 2.0 * r * s * s }
    } else {
        let c = (0.5 * theta).cos();
        Pt { anchor: hi, off: -2.0 * r * c * c }
    }
}

/// Chebyshev angle of `x` in `[lo, hi]`.
pub(crate) fn cheb_theta(lo: f64, hi: f64, x: f64) -> f64 {
    let r = 0.5 * (hi - lo);
    if x - lo <= hi - x {
        2.0 * ((x - lo) / (2.0 * r)).max(0.0).sqrt().min(1.0).asin()
    } else {
        PI - 2.0 * ((hi - x) / (2.0 * r)).max(0.0).sqrt().min(1.0).asin()
    }
}

/// Images in the theta-plane of real singularities outside `[lo, hi]`.
pub(crate) fn theta_singularities(lo: f64, hi: f64, pts: impl Iterator<Item = f64>) -> Vec<C64> {
    let r = 0.5 * (hi - lo);
    pts.filter_map(|e| {
        if e < lo {
            let eps = (lo - e) / r;
            Some(C64::new(0.0, (eps + (eps * (2.0 + eps)).sqrt()).ln_1p()))
        } else if e > hi {
            let eps = (e - hi) / r;
            Some(C64::new(PI, (eps + (eps * (2.0 + eps)).sqrt()).ln_1p()))
        } else {
            None
        }
    })
    .collect()
}

/// Solved quasimomentum of a gap system.
#[derive(Debug, Clone)]
pub struct Quasimomentum {
    gaps: Vec<Gap>,
    quad: QuadSettings,
    rules: Vec<Rule>,
    cum: Vec<Vec<f64>>,
    u: Vec<f64>,
    h: Vec<f64>,
}

impl Quasimomentum {
    /// Solve the closure conditions for the critical points and build the map.
    pub fn solve(endpoints: &[(f64, f64)], quad: QuadSettings) -> Result<Self> {
        check_interlacing(endpoints)?;
        let gaps: Vec<Gap> = endpoints.iter().map(|&(lo, hi)| Gap { lo, c: f64::NAN, hi }).collect();
        let mut q = Quasimomentum { gaps, quad, rules: Vec::new(), cum: Vec::new(), u: Vec::new(), h: Vec::new() };
        q.build_rules();
        q.solve_critical_points()?;
        q.finish();
        Ok(q)
    }

    /// Use the critical points as given (no closure solve).
    pub fn from_gaps(system: &GapSystem, quad: QuadSettings) -> Result<Self> {
        system.validate()?;
        let mut q =
            Quasimomentum { gaps: system.gaps.clone(), quad, rules: Vec::new(), cum: Vec::new(), u: Vec::new(), h: Vec::new() };
        q.build_rules();
        q.finish();
        Ok(q)
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn gap_system(&self) -> GapSystem {
        GapSystem { gaps: self.gaps.clone() }
    }

    pub fn quad(&self) -> QuadSettings {
        self.quad
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Slit positions `u_n = Re k` on each gap.
    pub fn positions(&self) -> &[f64] {
        &self.u
    }

    /// Slit heights `h_n = max v` on each gap.
    pub fn heights(&self) -> &[f64] {
        &self.h
    }

    pub(crate) fn endpoint_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.gaps.iter().flat_map(|g| [g.lo, g.hi])
    }

    fn build_rules(&mut self) {
        self.rules = (0..self.gaps.len())
            .map(|n| {
                let g = self.gaps[n];
                let others = self.gaps.iter().enumerate().filter(|&(i, _)| i != n).flat_map(|(_, g)| [g.lo, g.hi]);
                let sing = theta_singularities(g.lo, g.hi, others);
                Rule::graded(0.0, PI, &sing, &self.quad)
            })
            .collect();
    }

    /// `|x - c_i| / sqrt(|(x - a_i)(x - b_i)|)` for `x` outside gap `i`.
    #[inline]
    pub(crate) fn factor(&self, i: usize, p: &Pt) -> f64 {
        let g = &self.gaps[i];
        p.diff(g.c).abs() / (p.diff(g.lo) * p.diff(g.hi)).abs().sqrt()
    }

    /// Product of `factor` over all gaps except `skip_a` and `skip_b`.
    #[inline]
    pub(crate) fn product_except(&self, p: &Pt, skip_a: usize, skip_b: usize) -> f64 {
        let mut prod = 1.0;
        for i in 0..self.gaps.len() {
            if i != skip_a && i != skip_b {
                prod *= self.factor(i, p);
            }
        }
        prod
    }

    /// `dv/dtheta` on gap `n`: `(c_n - x) G_n(x)`.
    #[inline]
    pub(crate) fn dv_dtheta(&self, n: usize, theta: f64) -> f64 {
        let g = &self.gaps[n];
        let p = cheb_pt(g.lo, g.hi, theta);
        -p.diff(g.c) * self.product_except(&p, n, usize::MAX)
    }

    fn solve_critical_points(&mut self) -> Result<()> {
        let n = self.gaps.len();
        if n == 0 {
            return Ok(());
        }
        let mids: Vec<f64> = self.gaps.iter().map(|g| g.mid()).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for row in 0..n {
            let g = self.gaps[row];
            let r = g.rad();
            for &(theta, w) in &self.rules[row].nodes {
                let p = cheb_pt(g.lo, g.hi, theta);
                let mut e = 1.0;
                for (i, gi) in self.gaps.iter().enumerate() {
                    if i != row {
                        e *= p.diff(mids[i]).abs() / (p.diff(gi.lo) * p.diff(gi.hi)).sqrt();
                    }
                }
                let dm = -r * theta.cos();
                let we = w * e;
                rhs[row] += we * dm;
                m[(row, row)] += we;
                for j in 0..n {
                    if j != row {
                        m[(row, j)] += we * dm / p.diff(mids[j]);
                    }
                }
            }
        }
        let coef = m.lu().solve(&(-rhs)).ok_or_else(|| Error::NewtonDivergence { residuals: vec![f64::NAN; n] })?;
        for row in 0..n {
            let g = self.gaps[row];
            let f = |x: f64| {
                let dm = x - mids[row];
                let (mut s, mut ds) = (0.0, 0.0);
                for j in 0..n {
                    if j != row {
                        let d = x - mids[j];
                        s += coef[j] / d;
                        ds -= coef[j] / (d * d);
                    }
                }
                (dm * (1.0 + s) + coef[row], 1.0 + s + dm * ds)
            };
            let tol = 1e-16 * g.len().max(g.mid().abs());
            let c = newton_bisect(f, g.lo, g.hi, tol)
                .ok_or_else(|| Error::NewtonDivergence { residuals: vec![f(g.lo).0, f(g.hi).0] })?;
            self.gaps[row].c = c;
        }
        Ok(())
    }

    fn finish(&mut self) {
        let n = self.gaps.len();
        self.cum = (0..n)
            .map(|k| {
                let mut acc = vec![0.0];
                let mut s = 0.0;
                let order = self.quad.order;
                for (pi, _) in self.rules[k].panels.iter().enumerate() {
                    let nodes = &self.rules[k].nodes[pi * order..(pi + 1) * order];
                    s += nodes.iter().map(|&(t, w)| w * self.dv_dtheta(k, t)).sum::<f64>();
                    acc.push(s);
                }
                acc
            })
            .collect();
        self.h = (0..n)
            .map(|k| {
                let g = self.gaps[k];
                self.v_theta(k, cheb_theta(g.lo, g.hi, g.c))
            })
            .collect();
        self.u = self.compute_positions();
    }

    /// `v` on gap `n` at Chebyshev angle `theta`.
    pub(crate) fn v_theta(&self, n: usize, theta: f64) -> f64 {
        let rule = &self.rules[n];
        let k = rule.panels.partition_point(|&(a, _)| a <= theta).saturating_sub(1);
        let (a, _) = rule.panels[k];
        self.cum[n][k] + gl_interval(a, theta, self.quad.order, |t| self.dv_dtheta(n, t))
    }

    /// `v(z_n^+)`, zero when the closure condition holds.
    pub fn closure_residual(&self, n: usize) -> f64 {
        *self.cum[n].last().unwrap_or(&0.0)
    }

    /// `int_{b_N}^inf (q - 1) dx` with `x = b_N + s^2`, then `s = S / tau` past `S`.
    fn right_tail(&self) -> f64 {
        let last = self.gaps.len() - 1;
        let b = self.gaps[last].hi;
        let span = b - self.gaps[0].lo;
        let s_cut = (2.0 * span.sqrt()).max(1.0);
        let sing: Vec<C64> = self.endpoint_values().filter(|&e| e < b).map(|e| C64::new(0.0, (b - e).sqrt())).collect();
        let f = |s: f64| 2.0 * s * self.q_minus_one_real(&Pt { anchor: b, off: s * s }, last, s);
        let near = Rule::graded(0.0, s_cut, &sing, &self.quad).integrate(f);
        let tsing: Vec<C64> = sing.iter().map(|z| s_cut / z).collect();
        let far = Rule::graded(0.0, 1.0, &tsing, &self.quad).integrate(|t| {
            let s = s_cut / t;
            f(s) * s_cut / (t * t)
        });
        near + far
    }

    /// `q - 1` at a point right of all gaps; `s = sqrt(x - b_N)` keeps the last factor exact.
    fn q_minus_one_real(&self, p: &Pt, last: usize, s: f64) -> f64 {
        let far = self.gaps.iter().all(|g| p.diff(g.mid()) > 2.0 * g.rad());
        if far {
            let mut l = 0.0;
            for g in &self.gaps {
                let d = p.diff(g.mid());
                let r = g.rad();
                l += ((g.mid() - g.c) / d).ln_1p() - 0.5 * (-(r / d) * (r / d)).ln_1p();
            }
            l.exp_m1()
        } else {
            let g = &self.gaps[last];
            let lastf = p.diff(g.c).abs() / (s * p.diff(g.lo).sqrt());
            lastf * self.product_except(p, last, usize::MAX) - 1.0
        }
    }

    /// `int q dx` over the band right of gap `n`.
    pub(crate) fn band_integral(&self, n: usize) -> f64 {
        let (lo, hi) = (self.gaps[n].hi, self.gaps[n + 1].lo);
        let (gl, gr) = (self.gaps[n], self.gaps[n + 1]);
        let others = self.endpoint_values().filter(|&e| e != lo && e != hi);
        let sing = theta_singularities(lo, hi, others);
        Rule::graded(0.0, PI, &sing, &self.quad).integrate(|t| {
            let p = cheb_pt(lo, hi, t);
            p.diff(gl.c).abs() / p.diff(gl.lo).sqrt() * p.diff(gr.c).abs() / (-p.diff(gr.hi)).sqrt()
                * self.product_except(&p, n, n + 1)
        })
    }

    fn compute_positions(&self) -> Vec<f64> {
        let n = self.gaps.len();
        if n == 0 {
            return Vec::new();
        }
        let mut u = vec![0.0; n];
        u[n - 1] = self.gaps[n - 1].hi - self.right_tail();
        for k in (0..n - 1).rev() {
            u[k] = u[k + 1] - self.band_integral(k);
        }
        u
    }

    /// `u_1` recomputed from the left half-line, an independent check of the right sweep.
    pub fn left_anchor(&self) -> Option<f64> {
        let a = self.gaps.first()?.lo;
        let span = self.gaps.last()?.hi - a;
        let s_cut = (2.0 * span.sqrt()).max(1.0);
        let sing: Vec<C64> = self.endpoint_values().filter(|&e| e > a).map(|e| C64::new(0.0, (e - a).sqrt())).collect();
        let f = |s: f64| {
            let p = Pt { anchor: a, off: -s * s };
            let far = self.gaps.iter().all(|g| -p.diff(g.mid()) > 2.0 * g.rad());
            let qm1 = if far {
                let mut l = 0.0;
                for g in &self.gaps {
                    let d = p.diff(g.mid());
                    let r = g.rad();
                    l += ((g.mid() - g.c) / d).ln_1p() - 0.5 * (-(r / d) * (r / d)).ln_1p();
                }
                l.exp_m1()
            } else {
                let g = &self.gaps[0];
                p.diff(g.c).abs() / (s * (-p.diff(g.hi)).sqrt()) * self.product_except(&p, 0, usize::MAX) - 1.0
            };
            2.0 * s * qm1
        };
        let near = Rule::graded(0.0, s_cut, &sing, &self.quad).integrate(f);
        let tsing: Vec<C64> = sing.iter().map(|z| s_cut / z).collect();
        let far = Rule::graded(0.0, 1.0, &tsing, &self.quad).integrate(|t| {
            let s = s_cut / t;
            f(s) * s_cut / (t * t)
        });
        Some(a + near + far)
    }

    /// Index of the gap whose closed interval contains `x`.
    pub(crate) fn gap_containing(&self, x: f64) -> Option<usize> {
        let k = self.gaps.partition_point(|g| g.hi < x);
        (k < self.gaps.len() && self.gaps[k].lo <= x).then_some(k)
    }

    /// `q(z) = k'(z)`; on the real axis the limit from the upper half-plane.
    pub fn q_eval(&self, z: C64) -> Result<C64> {
        if z.im > 0.0 {
            Ok(self.q_upper(z))
        } else if z.im < 0.0 {
            Ok(self.q_upper(z.conj()).conj())
        } else {
            self.q_real(z.re)
        }
    }

    pub(crate) fn q_upper(&self, z: C64) -> C64 {
        let mut q = C64::new(1.0, 0.0);
        for g in &self.gaps {
            q *= (z - g.c) / ((z - g.lo).sqrt() * (z - g.hi).sqrt());
        }
        q
    }

    pub(crate) fn q_minus_one_upper(&self, z: C64) -> C64 {
        if self.gaps.iter().all(|g| (z - g.mid()).norm() > 2.0 * g.rad()) {
            let mut l = C64::new(0.0, 0.0);
            for g in &self.gaps {
                let d = z - g.mid();
                let r = g.rad();
                l += ln_1p((g.mid() - g.c) / d) - 0.5 * ln_1p(-(r / d) * (r / d));
            }
            expm1(l)
        } else {
            self.q_upper(z) - 1.0
        }
    }

    /// Derivative `q'(z)` for `z` off the real axis.
    pub fn q_prime(&self, z: C64) -> Result<C64> {
        if z.im == 0.0 {
            return Err(Error::EvaluationAtBranchPoint { x: z.re });
        }
        let zz = if z.im > 0.0 { z } else { z.conj() };
        let mut s = C64::new(0.0, 0.0);
        for g in &self.gaps {
            s += 1.0 / (zz - g.c) - 0.5 / (zz - g.lo) - 0.5 / (zz - g.hi);
        }
        let d = self.q_upper(zz) * s;
        Ok(if z.im > 0.0 { d } else { d.conj() })
    }

    /// `q` on the real axis (real on bands, imaginary on gaps).
    pub fn q_real(&self, x: f64) -> Result<C64> {
        if self.gaps.iter().any(|g| x == g.lo || x == g.hi) {
            return Err(Error::EvaluationAtBranchPoint { x });
        }
        let p = Pt::at(x);
        match self.gap_containing(x) {
            Some(n) => {
                let g = &self.gaps[n];
                let rho = (p.diff(g.lo) * -p.diff(g.hi)).sqrt();
                Ok(C64::new(0.0, -p.diff(g.c) * self.product_except(&p, n, usize::MAX) / rho))
            }
            None => Ok(C64::new(self.product_except(&p, usize::MAX, usize::MAX), 0.0)),
        }
    }

    /// `k(z)`, the inverse comb mapping.
    pub fn k_eval(&self, z: C64) -> Result<C64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite argument {z}")));
        }
        if z.im > 0.0 {
            Ok(self.k_upper(z))
        } else if z.im < 0.0 {
            Ok(self.k_upper(z.conj()).conj())
        } else {
            Ok(self.k_real(z.re))
        }
    }

    /// `k(z) = z - int_0^inf (q(z + t) - 1) dt` along a horizontal ray.
    pub(crate) fn k_upper(&self, z: C64) -> C64 {
        if self.gaps.is_empty() {
            return z;
        }
        let right = self.gaps.last().unwrap().hi;
        let span = right - self.gaps[0].lo;
        let t_cut = (right - z.re).max(0.0) + span.max(z.im).max(1.0);
        let sing: Vec<C64> = self.endpoint_values().map(|e| e - z).collect();
        let near = Rule::graded(0.0, t_cut, &sing, &self.quad);
        let mut acc = C64::new(0.0, 0.0);
        for &(t, w) in &near.nodes {
            acc += w * self.q_minus_one_upper(z + t);
        }
        let tsing: Vec<C64> = sing.iter().map(|s| t_cut / s).collect();
        let far = Rule::graded(0.0, 1.0, &tsing, &self.quad);
        for &(tau, w) in &far.nodes {
            let t = t_cut / tau;
            acc += w * self.q_minus_one_upper(z + t) * (t_cut / (tau * tau));
        }
        z - acc
    }

    /// `int_0^smax 2 s q(e + side s^2) ds` from endpoint `e` of gap `j` into the adjacent band.
    pub(crate) fn endpoint_integral(&self, j: usize, side: f64, smax: f64) -> f64 {
        let g = self.gaps[j];
        let (e, other) = if side > 0.0 { (g.hi, g.lo) } else { (g.lo, g.hi) };
        let sing: Vec<C64> = self
            .endpoint_values()
            .filter(|&x| x != e)
            .map(|x| {
                let d = side * (x - e);
                if d > 0.0 {
                    C64::new(d.sqrt(), 0.0)
                } else {
                    C64::new(0.0, (-d).sqrt())
                }
            })
            .collect();
        Rule::graded(0.0, smax, &sing, &self.quad).integrate(|s| {
            let p = Pt { anchor: e, off: side * s * s };
            2.0 * p.diff(g.c).abs() / p.diff(other).abs().sqrt() * self.product_except(&p, j, usize::MAX)
        })
    }

    /// `k` on the real axis.
    pub(crate) fn k_real(&self, x: f64) -> C64 {
        let n = self.gaps.len();
        if n == 0 {
            return C64::new(x, 0.0);
        }
        if let Some(k) = self.gap_containing(x) {
            let g = self.gaps[k];
            return C64::new(self.u[k], self.v_theta(k, cheb_theta(g.lo, g.hi, x)));
        }
        let right = self.gaps.partition_point(|g| g.hi < x);
        let from_left = right.checked_sub(1);
        let from_right = (right < n).then_some(right);
        let use_left = match (from_left, from_right) {
            (Some(l), Some(r)) => x - self.gaps[l].hi <= self.gaps[r].lo - x,
            (Some(_), None) => true,
            _ => false,
        };
        if use_left {
            let l = from_left.unwrap();
            C64::new(self.u[l] + self.endpoint_integral(l, 1.0, (x - self.gaps[l].hi).sqrt()), 0.0)
        } else {
            let r = from_right.unwrap();
            C64::new(self.u[r] - self.endpoint_integral(r, -1.0, (self.gaps[r].lo - x).sqrt()), 0.0)
        }
    }

    /// `Q0` from the expansion `k(z) = z - Q0/z + ...`, which holds once the
    /// closure conditions force the `1/z` term of `q` to vanish.
    pub fn q0_asymptotic(&self) -> f64 {
        if self.gaps.is_empty() {
            return 0.0;
        }
        let x0 = self.gaps.iter().map(|g| g.mid()).sum::<f64>() / self.gaps.len() as f64;
        0.5 * self
            .gaps
            .iter()
            .map(|g| g.rad() * g.rad() + (g.mid() - g.c) * (g.mid() + g.c - 2.0 * x0))
            .sum::<f64>()
    }

    /// Coefficient of `1/z` in `q`, zero for a closed system.
    pub fn first_moment(&self) -> f64 {
        self.gaps.iter().map(|g| g.mid() - g.c).sum()
    }
}
