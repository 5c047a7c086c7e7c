//! Exact reference solutions used as oracles.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::SlitConfig;
use crate::error::{Error, Result};
use crate::forward::{solve_forward, SolverOptions};
use crate::quadrature::{QuadSettings, Rule};
use crate::quasimomentum::Quasimomentum;

const PI: f64 = std::f64::consts::PI;

/// `sqrt(w^2 + c^2)` continued from `w` at infinity, cut along `[-ic, ic]`.
fn sqrt_add_square(w: C64, c: f64) -> C64 {
    if w == C64::new(0.0, 0.0) {
        return C64::new(0.0, c.abs());
    }
    w * (1.0 + (c / w) * (c / w)).sqrt()
}

/// One slit of height `h` at `u0`: `z(k) = u0 + sqrt((k - u0)^2 + h^2)`.
pub fn single_slit_map(k: C64, u0: f64, h: f64) -> Result<C64> {
    let w = k - u0;
    if w.re == 0.0 && w.im.abs() <= h {
        return Err(Error::OnSlit);
    }
    Ok(u0 + sqrt_add_square(w, h))
}

/// Gap length of the periodic comb `u_n = pi n`, `h_n = H`.
pub fn uniform_comb_gap_length(h: f64) -> f64 {
    2.0 * h.tanh().asin()
}

/// Three slits at `-1, 0, 1` with heights `M, h0, M`, expressed through the
/// two-slit map `eta` of the outer pair: `z(k) = sqrt(z(k, eta)^2 + |z(i h0, eta)|^2)`.
#[derive(Debug, Clone)]
pub struct NestingOracle {
    pub h0: f64,
    pub m: f64,
    outer: Quasimomentum,
    shift: f64,
}

impl NestingOracle {
    pub fn new(h0: f64, m: f64, opts: &SolverOptions) -> Result<NestingOracle> {
        let eta = SlitConfig::new(vec![-1.0, 1.0], vec![m, m])?;
        let outer = solve_forward(&eta, opts)?.quasimomentum()?;
        let shift = if h0 > 0.0 { outer.z_of_k(C64::new(0.0, h0))?.norm() } else { 0.0 };
        Ok(NestingOracle { h0, m, outer, shift })
    }

    /// `|z(i h0, eta)|`, the height of the middle slit's image.
    pub fn image_height(&self) -> f64 {
        self.shift
    }

    pub fn eval(&self, k: C64) -> Result<C64> {
        if k.re == 0.0 && k.im.abs() <= self.h0 {
            return Err(Error::OnSlit);
        }
        let w = self.outer.z_of_k(k)?;
        Ok(sqrt_add_square(w, self.shift))
    }

    /// Upper bound on the middle gap length.
    pub fn middle_gap_bound(&self) -> f64 {
        let (m, h) = (self.m, self.h0);
        ((m * m - h * h + 1.0).powi(2) + 4.0 * h * h).powf(0.25)
    }
}

pub fn three_slit_nesting(k: C64, h0: f64, m: f64, opts: &SolverOptions) -> Result<C64> {
    NestingOracle::new(h0, m, opts)?.eval(k)
}

/// `alpha < beta` with `u_*/2 = int_0^alpha sqrt((beta^2-t^2)/(alpha^2-t^2))` and
/// `h_+ = int_alpha^beta sqrt((beta^2-t^2)/(t^2-alpha^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelSchwarzConstants {
    pub alpha: f64,
    pub beta: f64,
}

fn quad() -> QuadSettings {
    QuadSettings { order: 24, panel_ratio: 0.5 }
}

/// `int_0^{pi/2} sqrt(eps^2 - sin^2 phi)`, the first integral divided by `alpha`.
pub(crate) fn cs_first(eps: f64) -> f64 {
    // complex zeros of eps^2 - sin^2 sit at pi/2 +- i acosh(eps)
    let d = (eps - 1.0).max(0.0);
    let sing = [C64::new(0.5 * PI, (d + (d * (d + 2.0)).sqrt()).ln_1p())];
    Rule::graded(0.0, 0.5 * PI, &sing, &quad()).integrate(|p| {
        let s = p.sin();
        ((eps - s) * (eps + s)).sqrt()
    })
}

/// The second integral divided by `alpha`, after `t^2 = alpha^2 (1 + (eps^2-1) sin^2 psi)`.
pub(crate) fn cs_second(eps: f64) -> f64 {
    let e2 = (eps - 1.0) * (eps + 1.0);
    // 1 + e2 sin^2 psi vanishes at psi = i asinh(1/sqrt(e2))
    let sing = [C64::new(0.0, (1.0 / e2.sqrt()).asinh())];
    e2 * Rule::graded(0.0, 0.5 * PI, &sing, &quad()).integrate(|p| {
        let (s, c) = p.sin_cos();
        c * c / (1.0 + e2 * s * s).sqrt()
    })
}

pub fn cs_constants(u_star: f64, h_plus: f64) -> Result<ChristoffelSchwarzConstants> {
    if !(u_star > 0.0 && h_plus > 0.0 && u_star.is_finite() && h_plus.is_finite()) {
        return Err(Error::NonConvergence { residual: f64::NAN, iterations: 0 });
    }
    // the ratio h_+ / (u_*/2) = F2/F1 increases from 0 to infinity in eps
    let target = 2.0 * h_plus / u_star;
    let g = |eps: f64| cs_second(eps) / cs_first(eps) - target;
    let mut hi = 2.0;
    let mut iters = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::NonConvergence { residual: g(hi), iterations: iters });
        }
    }
    // bisect in log(eps - 1) so tiny heights resolve
    let (mut a, mut b) = (-60.0f64, (hi - 1.0).ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(1.0 + m.exp()) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let eps = 1.0 + (0.5 * (a + b)).exp();
    let alpha = 0.5 * u_star / cs_first(eps);
    Ok(ChristoffelSchwarzConstants { alpha, beta: eps * alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_slit_values() {
        let z = single_slit_map(C64::new(0.0, 2.0), 0.0, 1.0).unwrap();
        assert!((z - C64::new(0.0, 3f64.sqrt())).norm() < 1e-15);
        assert!(matches!(single_slit_map(C64::new(2.0, 0.5), 2.0, 1.0), Err(Error::OnSlit)));
        let z = single_slit_map(C64::new(1e8, 0.0), 0.0, 1.0).unwrap();
        assert!((z.re - 1e8).abs() < 1e-7);
    }

    #[test]
    fn cs_integrals_at_degenerate_ratio() {
        assert!((cs_first(1.0) - 1.0).abs() < 1e-14);
        assert_eq!(cs_second(1.0), 0.0);
        // eps large: F1 ~ eps pi/2
        assert!((cs_first(1e3) / (1e3 * PI / 2.0) - 1.0).abs() < 1e-6);
    }
}
