use num_complex::Complex64 as C64;

use super::Quasimomentum;
use crate::error::{Error, Result};

impl Quasimomentum {
    fn on_slit(&self, k: C64) -> bool {
        self.u.iter().zip(&self.h).any(|(&u, &h)| (k.re - u).abs() <= 8.0 * f64::EPSILON * u.abs().max(1.0) && k.im.abs() <= h)
    }

    /// Damped Newton for `k(z) = target` in the upper half-plane.
    fn newton_z(&self, target: C64, z0: C64) -> Option<C64> {
        let tol = 2e-14 * target.norm().max(1.0);
        let mut z = z0;
        if z.im <= 0.0 {
            return None;
        }
        let mut r = self.k_upper(z) - target;
        for _ in 0..60 {
            if r.norm() <= tol {
                return Some(z);
            }
            let dz = r / self.q_upper(z);
            if !dz.re.is_finite() || !dz.im.is_finite() {
                return None;
            }
            let mut lam = 1.0;
            loop {
                let zn = z - lam * dz;
                if zn.im > 0.0 {
                    let rn = self.k_upper(zn) - target;
                    if rn.norm() < r.norm() {
                        z = zn;
                        r = rn;
                        break;
                    }
                }
                lam *= 0.5;
                if lam < 1e-4 {
                    // stalled at rounding level
                    return (r.norm() <= 1e3 * tol).then_some(z);
                }
            }
            if (lam * dz).norm() <= 1e-15 * z.norm().max(1.0) {
                return (r.norm() <= 1e3 * tol).then_some(z);
            }
        }
        (r.norm() <= 1e3 * tol).then_some(z)
    }

    /// `z(k)`, the comb mapping itself, by inverting `k`.
    pub fn z_of_k(&self, k: C64) -> Result<C64> {
        if self.on_slit(k) {
            return Err(Error::OnSlit);
        }
        if k.im == 0.0 {
            return self.band_point(k.re).map(|x| C64::new(x, 0.0));
        }
        if k.im < 0.0 {
            return self.z_of_k(k.conj()).map(|z| z.conj());
        }
        if self.gaps.is_empty() {
            return Ok(k);
        }
        let hmax = self.h.iter().cloned().fold(0.0, f64::max);
        let fail = || Error::InversionFailure { re: k.re, im: k.im };
        let mut top = k.im.max(2.0 * hmax + 1.0);
        let mut z = None;
        for _ in 0..12 {
            let k0 = C64::new(k.re, top);
            z = self.newton_z(k0, k0);
            if z.is_some() {
                break;
            }
            top *= 2.0;
        }
        let mut z = z.ok_or_else(fail)?;
        let mut cur = top;
        let mut step = (top - k.im) / 8.0;
        while cur > k.im {
            let next = (cur - step).max(k.im);
            let (kc, kn) = (C64::new(k.re, cur), C64::new(k.re, next));
            let pred = z + (kn - kc) / self.q_upper(z);
            let pred = if pred.im > 0.0 { pred } else { C64::new(pred.re, 0.5 * z.im) };
            match self.newton_z(kn, pred) {
                Some(zn) => {
                    z = zn;
                    cur = next;
                    step *= 1.5;
                }
                None => {
                    step *= 0.25;
                    if step < 1e-9 * (top - k.im) {
                        return Err(fail());
                    }
                }
            }
        }
        Ok(z)
    }

    /// `z(k)` starting Newton from a nearby known value; falls back to the full path.
    pub fn z_of_k_near(&self, k: C64, guess: C64) -> Result<C64> {
        if k.im > 0.0 && guess.im > 0.0 && !self.on_slit(k) {
            if let Some(z) = self.newton_z(k, guess) {
                return Ok(z);
            }
        }
        self.z_of_k(k)
    }
}
