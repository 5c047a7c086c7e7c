use crate::closed_forms::cs_constants;
use crate::domain::{greedy_energy_bounds, norm, weighted_norm, NormSpec};
use crate::error::Result;
use crate::forward::CombSolution;
use crate::quasimomentum::Quasimomentum;
use crate::report::{quantity_report_with, QuantityReport};

use super::{CheckResult, Checks};

const PI: f64 = std::f64::consts::PI;

/// A solved instance with everything the checks read.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sol: CombSolution,
    pub q: Quasimomentum,
    pub rep: QuantityReport,
    pub fingerprint: String,
}

impl Instance {
    pub fn new(sol: CombSolution) -> Result<Instance> {
        let q = sol.quasimomentum()?;
        let rep = quantity_report_with(&sol, &q)?;
        let fingerprint = super::fingerprint(&sol.config);
        Ok(Instance { sol, q, rep, fingerprint })
    }

    pub fn u_star(&self) -> f64 {
        self.sol.config.u_star()
    }

    pub fn h(&self) -> &[f64] {
        &self.rep.h_computed
    }

    pub fn h_inf(&self) -> f64 {
        norm(self.h(), f64::INFINITY)
    }

    /// `exp(||h||_inf / u_*)`, equal to one for a single slit.
    pub fn xi(&self) -> f64 {
        (self.h_inf() / self.u_star()).exp()
    }

    fn out(&self) -> Checks {
        Checks { instance: self.fingerprint.clone(), ..Checks::default() }
    }
}

/// `alpha_p = (2^{p+2} (2 + pi) / u_*)^p / pi`.
pub fn alpha_p(p: f64, u_star: f64) -> f64 {
    (2f64.powf(p + 2.0) * (2.0 + PI) / u_star).powf(p) / PI
}

/// `C_p = (pi^2 / 2)^{1/p}`.
pub fn c_p(p: f64) -> f64 {
    (PI * PI / 2.0).powf(1.0 / p)
}

fn conj(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn ptag(p: f64) -> String {
    format!("p={p}")
}

/// Per-gap bounds that need no extra hypotheses, the `L` chain, and the
/// energy identities.
pub fn check_per_gap(inst: &Instance) -> Checks {
    let mut out = inst.out();
    let r = &inst.rep;
    let h = inst.h();
    for &i in &inst.sol.slit_index {
        let n = format!("n={i}");
        out.push("1.3", &n, r.l[i], 2.0 * h[i]);
        out.push("2.28", &n, r.nu[i], h[i]);
        out.push("2.30-lower", &n, (r.l[i] * r.l[i] / 4.0).max(r.l[i] * h[i] / PI), r.a[i]);
        out.push("2.30-upper", &n, r.a[i], 2.0 * r.l[i] * h[i] / PI);
        // L_n as printed is twice the arc length of the graph of v over the gap
        let half = r.big_l[i] / 2.0;
        out.push("L-lower", &n, 2.0 * h[i], half);
        out.push("L-upper", &n, half, 2.0 * (h[i] + r.l[i]));
        out.push("L-top", &n, 2.0 * (h[i] + r.l[i]), 6.0 * h[i]);
    }
    let l2 = norm(&r.l, 2.0);
    let sum_a: f64 = r.a.iter().sum();
    let hl: f64 = h.iter().zip(&r.l).map(|(a, b)| a * b).sum();
    out.push("1.5-lower", "", l2 * l2 / 4.0, 2.0 * r.q0);
    out.push("1.5-upper", "", 2.0 * r.q0, 2.0 / PI * hl);
    out.push("1.5-identity", "", (2.0 * r.q0 - sum_a).abs(), 1e-7 * r.q0.max(1.0));
    let j2: f64 = r.j.iter().map(|x| x * x).sum();
    out.push("1.5-J", "", (j2 - r.id).abs(), 1e-7 * r.q0.max(1.0));
    out
}

/// Unweighted `l^p` chains between `h`, `l` and `J`; the `C_p` bound only for `p >= 2`.
pub fn check_lp_chains(inst: &Instance, p: f64) -> Checks {
    let mut out = inst.out();
    let r = &inst.rep;
    let (h, l, j) = (norm(inst.h(), p), norm(&r.l, p), norm(&r.j, p));
    let us = inst.u_star();
    let ap = alpha_p(p, us);
    let t = ptag(p);
    if (1.0..=2.0).contains(&p) {
        out.push("2.2", &t, h, 2.0 * l * (1.0 + ap * l.powf(p)));
        out.push("2.4-lower", &t, l / 2.0, j);
        out.push("2.4-upper", &t, j, 2.0 / PI.sqrt() * l * (1.0 + ap * l.powf(p)).sqrt());
        out.push("2.5-lower", &t, PI.sqrt() / 2.0 * j, h);
        out.push("2.5-upper", &t, h, 4.0 * j * (1.0 + ap * 2f64.powf(p) * j.powf(p)));
    }
    if p >= 2.0 {
        let q = conj(p);
        let lq = norm(&r.l, q);
        let cp = c_p(p);
        let e = 2.0 / (p - 1.0);
        let rhs = 2.0 / PI * cp * cp * lq * (1.0 + (2.0 * cp / (PI * us)).powf(e) * lq.powf(e));
        out.push("2.3", &t, h, rhs);
    }
    out
}

/// Weighted chains with powers of `xi`; `p` in `[1, 2]`, weights at least one.
pub fn check_weighted_chains(inst: &Instance, spec: &NormSpec) -> Result<Checks> {
    let mut out = inst.out();
    let r = &inst.rep;
    let p = spec.p;
    let wn = |v: &[f64]| weighted_norm(v, spec);
    let (h, l, j) = (wn(inst.h())?, wn(&r.l)?, wn(&r.j)?);
    let (mp, mm) = (wn(&r.mu_plus)?, wn(&r.mu_minus)?);
    let hinf = inst.h_inf();
    let xi = inst.xi();
    let ap = alpha_p(p, inst.u_star());
    let t = if spec.weights.is_some() { format!("p={p},w") } else { ptag(p) };
    out.push("2.6-mu+", &t, hinf, 2.0 * PI * norm(&r.mu_plus, f64::INFINITY));
    out.push("2.6-mu-", &t, hinf, 2.0 * PI * norm(&r.mu_minus, f64::INFINITY));
    out.push("2.6-J", &t, hinf, j);
    let inv_q = 1.0 - 1.0 / p;
    out.push("2.6-l", &t, hinf, 2.0 * PI.powf(-1.0 / p) * l * (1.0 + ap * l.powf(p)).powf(inv_q));
    out.push("2.7-lower", &t, l, 2.0 * h);
    out.push("2.7-upper", &t, 2.0 * h, xi.powi(9) * l);
    out.push("2.8-lower", &t, l, 2.0 * j);
    out.push("2.8-upper", &t, 2.0 * j, xi.powi(5) * 2.0 * l);
    out.push("2.9-lower", &t, PI.sqrt() / 2.0 * j, h);
    out.push("2.9-upper", &t, h, xi.powi(5) * (PI / 2.0).sqrt() * j);
    for (tag, m) in [("+", mp), ("-", mm)] {
        out.push(&format!("2.10-lower{tag}"), &t, l, 2.0 * m);
        out.push(&format!("2.10-upper{tag}"), &t, 2.0 * m, xi.powi(18) * l);
    }
    Ok(out)
}

/// Bounds on `Q0` and `I_D` that hold for any `u_*`.
pub fn check_energy_bounds(inst: &Instance, p: f64) -> Checks {
    let mut out = inst.out();
    let r = &inst.rep;
    let q = conj(p);
    let (hp, lp, lq) = (norm(inst.h(), p), norm(&r.l, p), norm(&r.l, q));
    let hinf = inst.h_inf();
    let (l1, h1) = (norm(&r.l, 1.0), norm(inst.h(), 1.0));
    let t = ptag(p);
    out.push("2.29", "", hinf * hinf, 2.0 * r.q0);
    out.push("3.17", &t, PI * r.q0, hp * lq);
    if (1.0..=2.0).contains(&p) {
        out.push("3.18", &t, r.id, (2.0 / PI).powf(2.0 / p) * hp.powf(2.0 / q) * lp.powf(2.0 / p));
    }
    out.push("3.19-lower", "", PI * r.q0, hinf * l1);
    out.push("3.19-upper", "", hinf * l1, 2.0 / PI * l1 * l1);
    out.push("3.20-h", "", hinf, 2.0 / PI * l1);
    out.push("3.20-l", "", l1, 2.0 * h1);
    out
}

/// `l^2` bounds between `I_D`, `h`, `l` and `J`.
pub fn check_l2_bounds(inst: &Instance) -> Checks {
    let mut out = inst.out();
    let r = &inst.rep;
    let us = inst.u_star();
    let (h, l, j) = (norm(inst.h(), 2.0), norm(&r.l, 2.0), norm(&r.j, 2.0));
    out.push("3.6-lower", "", PI / 4.0 * r.id, h * h);
    out.push("3.6-upper", "", h * h, PI * PI / 2.0 * (r.id.sqrt() / us).max(1.0) * r.id);
    out.push("3.8-lower", "", l / 2.0, j);
    out.push("3.8-upper", "", j, 2f64.sqrt() * l * (1.0 + 2f64.sqrt() / us * l));
    out
}

/// Rectangle bound per gap with `r = u_*/2` (or `r = h_n` for one slit), and
/// the local mass and length bounds on gaps with `h_n <= r/2`.
pub fn check_local(inst: &Instance) -> Result<Checks> {
    let mut out = inst.out();
    let r = &inst.rep;
    let h = inst.h();
    let us = inst.u_star();
    for (g, &i) in inst.sol.slit_index.iter().enumerate() {
        let n = format!("n={i}");
        let rr = if us.is_finite() { us / 2.0 } else { h[i] };
        let rect = inst.q.rect_dirichlet(g, rr)?;
        out.push("3.3", &n, 2.0 * h[i] * h[i], PI * (h[i] / rr).max(1.0) * rect);
        if !us.is_finite() {
            out.skip("3.10", &n, "single slit: no finite u_*");
            continue;
        }
        if h[i] > rr / 2.0 {
            out.skip("3.10", &n, "h_n > r/2");
            continue;
        }
        let i_n = inst.q.local_dirichlet(g, rr)?;
        let k = (2.0 + PI) / rr * i_n.sqrt();
        for (tag, m) in [("+", r.mu_plus[i]), ("-", r.mu_minus[i])] {
            out.push(&format!("3.10{tag}"), &n, (h[i] - m).abs(), k * m);
        }
        out.push("3.11-lower", &n, 0.0, h[i] - r.nu[i]);
        out.push("3.11-upper", &n, h[i] - r.nu[i], 2.0 * k * h[i]);
        out.push("3.12-lower", &n, 0.0, h[i] - r.l[i] / 2.0);
        out.push("3.12-upper", &n, h[i] - r.l[i] / 2.0, k * h[i]);
    }
    Ok(out)
}

/// Band length and `V_n` bounds, with `s` the shortest bounded band.
pub fn check_band_bounds(inst: &Instance) -> Result<Checks> {
    let mut out = inst.out();
    let r = &inst.rep;
    let h = inst.h();
    let hinf = inst.h_inf();
    let us = inst.u_star();
    let Some(s) = r.s.filter(|_| inst.sol.config.len() >= 2) else {
        out.skip("3.33", "", "needs at least two slits");
        return Ok(out);
    };
    if hinf == 0.0 {
        out.skip("3.33", "", "no gaps");
        return Ok(out);
    }
    let xi = inst.xi();
    let e2 = std::f64::consts::E.powi(2);
    out.push("3.33-lower", "", s, us);
    out.push("3.33-upper", "", us, PI * s / 2.0 * e2.max(xi.powf(2.5 * PI)));
    out.push("3.34", "", 1.0 + 2.0 * hinf / (s * PI), xi.powi(9));
    let vb = 2.0 * hinf / (PI * s);
    for (g, &i) in inst.sol.slit_index.iter().enumerate() {
        let n = format!("n={i}");
        let gap = inst.q.gaps()[g];
        let mut vmax = 0.0f64;
        for k in 0..=8 {
            let x = gap.lo + gap.len() * 0.5 * (1.0 - (PI * k as f64 / 8.0).cos());
            vmax = vmax.max(inst.q.v_correction(g, x.clamp(gap.lo, gap.hi))?);
        }
        out.push("3.35", &n, vmax, vb);
        out.push("3.36-a", &n, 2.0 * h[i], r.l[i] * (1.0 + vmax));
        out.push("3.36-b", &n, r.l[i] * (1.0 + vmax), r.l[i] * (1.0 + vb));
        out.push("3.36-c", &n, r.l[i] * (1.0 + vb), r.l[i] * xi.powi(9));
    }
    let cs = cs_constants(us, hinf)?;
    out.push("3.38-lower", "", 2.0 * cs.alpha, s);
    out.push("3.38-upper", "", us, PI * cs.beta);
    Ok(out)
}

/// `v = v_n (1 + V_n)` at five interior points of every gap, to `1e-6 h_n`.
pub fn check_decomposition(inst: &Instance) -> Result<Checks> {
    let mut out = inst.out();
    for (g, &i) in inst.sol.slit_index.iter().enumerate() {
        let gap = inst.q.gaps()[g];
        let h = inst.q.heights()[g];
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let x = gap.lo + t * gap.len();
            let vn = ((x - gap.lo) * (gap.hi - x)).sqrt();
            let res = (inst.q.v_on_gap(g, x)? - vn * (1.0 + inst.q.v_correction(g, x)?)).abs();
            out.push("3.32", &format!("n={i},t={t}"), res, 1e-6 * h);
        }
    }
    Ok(out)
}

/// Two-sided `Q0` bound through the greedy subsequence.
pub fn check_greedy_bounds(inst: &Instance) -> Checks {
    let mut out = inst.out();
    let (lo, hi) = greedy_energy_bounds(&inst.sol.config);
    out.push("2.16-lower", "", lo, inst.rep.q0);
    out.push("2.16-upper", "", inst.rep.q0, hi);
    out
}

impl Checks {
    fn push(&mut self, id: &str, tag: &str, lhs: f64, rhs: f64) {
        let id = if tag.is_empty() { id.to_string() } else { format!("{id}[{tag}]") };
        self.results.push(CheckResult::new(&id, lhs, rhs, &self.instance));
    }
}
