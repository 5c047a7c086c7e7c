//! Local Dirichlet integrals `(1/pi) iint |z'(k) - 1|^2 du dv` over strips and
//! rectangles of the slit plane, reduced by Green's theorem to line integrals
//! of `Im(conj(F) dF)` with `F = z(k) - k`. The slit sides map to the gap, where
//! the contribution is explicit in terms of `v`.

use num_complex::Complex64 as C64;

use super::{Quasimomentum, PI};
use crate::error::{Error, Result};
use crate::quadrature::Rule;

impl Quasimomentum {
    /// `1/q(z) - 1` for `z` in the upper half-plane.
    fn inv_q_minus_one(&self, z: C64) -> C64 {
        let qm1 = self.q_minus_one_upper(z);
        -qm1 / (qm1 + 1.0)
    }

    /// Singularities of `v -> z(u0 + i v)`: slit tips, and points along each slit.
    fn vertical_singularities(&self, u0: f64, scale: impl Fn(C64) -> C64) -> Vec<C64> {
        let mut out = Vec::new();
        for (&u, &h) in self.u.iter().zip(&self.h) {
            let d = (u0 - u).abs();
            let m = ((h / d.max(1e-300)).ceil() as usize).clamp(1, 64);
            for i in 0..=m {
                out.push(scale(C64::new(h * i as f64 / m as f64, d)));
            }
        }
        out
    }

    /// `int Re(conj(F) (z' - 1)) dv` along `k = u0 + i v`, `v` from 0 to `v_hi` (or infinity).
    fn vertical_line(&self, u0: f64, v_hi: Option<f64>) -> Result<f64> {
        if self.gaps.is_empty() {
            return Ok(0.0);
        }
        if self.u.contains(&u0) {
            return Err(Error::OnSlit);
        }
        let hmax = self.h.iter().cloned().fold(0.0, f64::max);
        let v_cut = v_hi.unwrap_or(2.0 * hmax + 1.0);
        let near = Rule::graded(0.0, v_cut, &self.vertical_singularities(u0, |s| s), &self.quad);
        let mut pts: Vec<(f64, f64)> = near.nodes.clone();
        if v_hi.is_none() {
            let far = Rule::graded(0.0, 1.0, &self.vertical_singularities(u0, |s| v_cut / s), &self.quad);
            pts.extend(far.nodes.iter().map(|&(t, w)| (v_cut / t, w * v_cut / (t * t))));
        }
        // march from the top down so each inversion starts next to the previous one
        pts.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut acc = 0.0;
        let mut prev: Option<(C64, C64)> = None;
        for (v, w) in pts {
            let k = C64::new(u0, v);
            let z = match prev {
                Some((kp, zp)) => {
                    let guess = zp + (k - kp) / self.q_upper(zp);
                    let guess = if guess.im > 0.0 { guess } else { zp };
                    self.z_of_k_near(k, guess)?
                }
                None => self.z_of_k(k)?,
            };
            prev = Some((k, z));
            let f = z - k;
            acc += w * (f.conj() * self.inv_q_minus_one(z)).re;
        }
        Ok(acc)
    }

    /// Dirichlet integral over the strip `u_lo < Re k < u_hi`.
    pub fn strip_dirichlet(&self, u_lo: f64, u_hi: f64) -> Result<f64> {
        let inside: f64 = (0..self.gaps.len())
            .filter(|&n| self.u[n] > u_lo && self.u[n] < u_hi)
            .map(|n| self.action(n))
            .sum::<Result<f64>>()?;
        let jr = self.vertical_line(u_hi, None)?;
        let jl = self.vertical_line(u_lo, None)?;
        Ok(inside + (jr - jl) / PI)
    }

    /// `I_n` over the strip `|Re k - u_n| < r`, which must contain no other slit.
    pub fn local_dirichlet(&self, n: usize, r: f64) -> Result<f64> {
        if n >= self.gaps.len() {
            return Err(Error::InvalidGapIndex(n));
        }
        let (lo, hi) = (self.u[n] - r, self.u[n] + r);
        if self.u.iter().enumerate().any(|(j, &u)| j != n && u >= lo && u <= hi) {
            return Err(Error::InvalidGapIndex(n));
        }
        self.strip_dirichlet(lo, hi)
    }

    /// `iint |z' - 1|^2` (without the `1/pi`) over `(u_n, u_n + r) x (-h_n, h_n)`.
    pub fn rect_dirichlet(&self, n: usize, r: f64) -> Result<f64> {
        if n >= self.gaps.len() {
            return Err(Error::InvalidGapIndex(n));
        }
        let g = self.gaps[n];
        let (un, hn) = (self.u[n], self.h[n]);
        // right side of the slit: gap from c to z^+
        let slit = 2.0 * (self.v_integral_from(n, g.hi) - self.v_integral_from(n, g.c)) + hn * (g.c - un);
        let right = self.vertical_line(un + r, Some(hn))?;
        // top edge with u = u_n + s^2, run from the tip outward
        let nu = self.tip_mass(n)?;
        let mut sing: Vec<C64> = Vec::new();
        for (&u, &h) in self.u.iter().zip(&self.h) {
            for tip in [C64::new(u, h), C64::new(u, -h)] {
                let d = tip - C64::new(un, hn);
                if d.norm() > 0.0 {
                    sing.push(d.sqrt());
                    sing.push(-d.sqrt());
                }
            }
        }
        let rule = Rule::graded(0.0, r.sqrt(), &sing, &self.quad);
        let rot = C64::from_polar((2.0 * nu).sqrt(), PI / 4.0);
        let mut top = 0.0;
        let mut prev: Option<(C64, C64)> = None;
        for &(s, w) in &rule.nodes {
            let k = C64::new(un + s * s, hn);
            let local = C64::new(g.c, 0.0) + rot * s;
            let guess = match prev {
                Some((kp, zp)) if s * s > 1e-3 * r => zp + (k - kp) / self.q_upper(zp),
                _ => local,
            };
            let guess = if guess.im > 0.0 { guess } else { local };
            let z = self.z_of_k_near(k, guess)?;
            prev = Some((k, z));
            let f = z - k;
            top -= w * 2.0 * s * (f.conj() * self.inv_q_minus_one(z)).im;
        }
        Ok(slit + right + top)
    }
}
