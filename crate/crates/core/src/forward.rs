//! The direct problem: slit data `(u, h)` to the gap system reproducing it.
//!
//! Unknowns are the left end of the first gap followed by `log l_n` and the
//! logarithms of the bands between consecutive gaps, so every trial point is
//! an interlaced gap system. Critical points are eliminated by the closure
//! solve of [`Quasimomentum::solve`]. Heights are reached by continuation in
//! a global scale `h(t) = t h`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::domain::SlitConfig;
use crate::error::{Error, Result};
use crate::estimates::CheckResult;
use crate::quadrature::QuadSettings;
use crate::quasimomentum::{Gap, GapSystem, Quasimomentum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverOptions {
    pub residual_tol: f64,
    pub max_newton_iters: usize,
    pub continuation_steps: usize,
    pub fd_step: f64,
    pub quad: QuadSettings,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { residual_tol: 1e-9, max_newton_iters: 60, continuation_steps: 8, fd_step: 1e-7, quad: QuadSettings::default() }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.residual_tol > 0.0
            && self.max_newton_iters > 0
            && self.continuation_steps > 0
            && self.fd_step > 0.0
            && self.quad.order > 0
            && self.quad.panel_ratio > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("solver options must be positive".into()))
        }
    }
}

/// A slit configuration with the gap system that realizes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CombSolution {
    pub config: SlitConfig,
    pub gaps: GapSystem,
    /// Config index of each gap; slits below the height cutoff have none.
    pub slit_index: Vec<usize>,
    pub residual: f64,
    pub iterations: usize,
    pub continuation_path: Vec<(f64, f64)>,
    pub quad: QuadSettings,
}

impl CombSolution {
    /// The quasimomentum of the solved gaps, with critical points as stored.
    pub fn quasimomentum(&self) -> Result<Quasimomentum> {
        Quasimomentum::from_gaps(&self.gaps, self.quad)
    }

    /// Per-slit values of a per-gap sequence, zero on empty slits.
    pub fn spread(&self, per_gap: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.config.len()];
        for (g, &i) in self.slit_index.iter().enumerate() {
            out[i] = per_gap[g];
        }
        out
    }

    /// Gap index of config slit `i`, if nonempty.
    pub fn gap_of(&self, i: usize) -> Option<usize> {
        self.slit_index.iter().position(|&s| s == i)
    }
}

struct Problem<'a> {
    u: Vec<f64>,
    h: Vec<f64>,
    opts: &'a SolverOptions,
}

impl Problem<'_> {
    fn endpoints(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let n = self.u.len();
        let mut out = Vec::with_capacity(n);
        let mut a = x[0];
        for k in 0..n {
            let b = a + x[2 * k + 1].exp();
            out.push((a, b));
            if k + 1 < n {
                a = b + x[2 * k + 2].exp();
            }
        }
        out
    }

    fn unknowns(gaps: &[(f64, f64)]) -> Vec<f64> {
        let mut x = vec![gaps[0].0];
        for (k, &(a, b)) in gaps.iter().enumerate() {
            x.push((b - a).ln());
            if k + 1 < gaps.len() {
                x.push((gaps[k + 1].0 - b).ln());
            }
        }
        x
    }

    /// Bands so thin that endpoints stop being distinct doubles.
    fn collides(e: &[(f64, f64)]) -> Option<usize> {
        for (k, w) in e.windows(2).enumerate() {
            let scale = w[0].1.abs().max(w[1].0.abs()).max(1.0);
            if !(w[1].0 - w[0].1 > 64.0 * f64::EPSILON * scale) {
                return Some(k);
            }
        }
        for (k, &(a, b)) in e.iter().enumerate() {
            if !(b - a > 64.0 * f64::EPSILON * a.abs().max(b.abs())) {
                return Some(k);
            }
        }
        None
    }

    fn eval(&self, x: &[f64], t: f64) -> Option<(Quasimomentum, Vec<f64>)> {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let e = self.endpoints(x);
        if Self::collides(&e).is_some() {
            return None;
        }
        let q = Quasimomentum::solve(&e, self.opts.quad).ok()?;
        let mut r = Vec::with_capacity(2 * e.len());
        for k in 0..e.len() {
            r.push(q.positions()[k] - self.u[k]);
            r.push(q.heights()[k] - t * self.h[k]);
        }
        r.iter().all(|v| v.is_finite()).then_some((q, r))
    }

    fn guess(&self, t: f64) -> Vec<f64> {
        let e: Vec<(f64, f64)> = self.u.iter().zip(&self.h).map(|(&u, &h)| (u - t * h, u + t * h)).collect();
        Self::unknowns(&e)
    }

    /// Newton with a finite-difference Jacobian and backtracking.
    fn newton(&self, mut x: Vec<f64>, t: f64, tol: f64, iters: &mut usize) -> Option<(Vec<f64>, Quasimomentum, f64)> {
        let (mut q, mut r) = self.eval(&x, t)?;
        let mut norm = sup(&r);
        let mut polish = 0;
        for _ in 0..self.opts.max_newton_iters {
            if norm <= tol {
                // a couple of extra steps settle the last digits
                if polish == 2 || norm == 0.0 {
                    break;
                }
                polish += 1;
            }
            *iters += 1;
            let m = x.len();
            let mut jac = DMatrix::<f64>::zeros(m, m);
            // translation moves every u by the same amount and leaves h alone
            for k in 0..m / 2 {
                jac[(2 * k, 0)] = 1.0;
            }
            for j in 1..m {
                let step = self.opts.fd_step * x[j].abs().max(1.0);
                let mut xp = x.clone();
                xp[j] += step;
                let (_, rp) = self.eval(&xp, t)?;
                for i in 0..m {
                    jac[(i, j)] = (rp[i] - r[i]) / step;
                }
            }
            let dx = jac.lu().solve(&-DVector::from_vec(r.clone()))?;
            // cap log changes so one step cannot wipe out a band
            let cap = dx.iter().skip(1).fold(0.0f64, |a, v| a.max(v.abs()));
            let mut lam = if cap > 2.0 { 2.0 / cap } else { 1.0 };
            let mut accepted = false;
            while lam > 1e-6 {
                let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lam * d).collect();
                if let Some((qn, rn)) = self.eval(&xn, t) {
                    let nn = sup(&rn);
                    if nn < norm || (nn <= tol && norm <= tol) {
                        x = xn;
                        q = qn;
                        r = rn;
                        norm = nn;
                        accepted = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (norm <= tol).then_some((x, q, norm))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Solve the direct problem.
pub fn solve_forward(config: &SlitConfig, opts: &SolverOptions) -> Result<CombSolution> {
    crate::domain::validate(config.clone())?;
    opts.validate()?;
    let hmax = config.max_height();
    let slit_index: Vec<usize> = (0..config.len()).filter(|&i| hmax > 0.0 && config.h[i] > 1e-13 * hmax).collect();
    let empty = |path| CombSolution {
        config: config.clone(),
        gaps: GapSystem::default(),
        slit_index: Vec::new(),
        residual: 0.0,
        iterations: 0,
        continuation_path: path,
        quad: opts.quad,
    };
    if slit_index.is_empty() {
        return Ok(empty(Vec::new()));
    }
    let prob = Problem {
        u: slit_index.iter().map(|&i| config.u[i]).collect(),
        h: slit_index.iter().map(|&i| config.h[i]).collect(),
        opts,
    };
    let ustar = {
        let s = SlitConfig { u: prob.u.clone(), h: prob.h.clone() }.u_star();
        if s.is_finite() { s } else { 4.0 * hmax }
    };
    let t0 = (1.0 / opts.continuation_steps as f64).min(0.25 * ustar / hmax);
    let loose = opts.residual_tol.max(1e-6 * hmax);
    let mut iters = 0;
    let mut path = Vec::new();

    // first point: the small-slit guess, shrunk further if Newton refuses it
    let mut t = t0;
    let mut start = None;
    for _ in 0..10 {
        if let Some(s) = prob.newton(prob.guess(t), t, if t == 1.0 { opts.residual_tol } else { loose }, &mut iters) {
            start = Some(s);
            break;
        }
        t *= 0.5;
    }
    let Some((mut x, mut q, mut res)) = start else {
        return Err(Error::ContinuationExhausted { last_t: 0.0, residual: f64::NAN, path });
    };
    path.push((t, res));
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut dt = 1.0 / opts.continuation_steps as f64;
    let min_dt = 1.0 / 1024.0;
    while t < 1.0 {
        let tn = (t + dt).min(1.0);
        // secant predictor in log t, log lengths scale with t to first order
        let pred: Vec<f64> = match &prev {
            Some((tp, xp)) => {
                let s = (tn / t).ln() / (t / tp).ln();
                x.iter().zip(xp).map(|(a, b)| a + s * (a - b)).collect()
            }
            None => {
                let mut p = x.clone();
                for k in 0..prob.u.len() {
                    p[2 * k + 1] += (tn / t).ln();
                }
                p
            }
        };
        let tol = if tn == 1.0 { opts.residual_tol } else { loose };
        let before = iters;
        let attempt = prob.newton(pred, tn, tol, &mut iters).or_else(|| prob.newton(x.clone(), tn, tol, &mut iters));
        match attempt {
            Some((xn, qn, rn)) => {
                prev = Some((t, std::mem::replace(&mut x, xn)));
                q = qn;
                res = rn;
                t = tn;
                path.push((t, res));
                if iters - before <= 4 {
                    dt = (2.0 * dt).min(0.5);
                }
            }
            None => {
                dt *= 0.5;
                if dt < min_dt {
                    return Err(Error::ContinuationExhausted { last_t: t, residual: res, path });
                }
            }
        }
    }
    let e = prob.endpoints(&x);
    if let Some(k) = Problem::collides(&e) {
        return Err(Error::GapCollision { index: slit_index[k] });
    }
    if !(res <= opts.residual_tol) {
        return Err(Error::NonConvergence { residual: res, iterations: iters });
    }
    Ok(CombSolution {
        config: config.clone(),
        gaps: q.gap_system(),
        slit_index,
        residual: res,
        iterations: iters,
        continuation_path: path,
        quad: opts.quad,
    })
}

/// Deviations of `(u, h)` recomputed from the gaps with refined quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundTrip {
    pub du: Vec<f64>,
    pub dh: Vec<f64>,
    pub max_deviation: f64,
}

pub fn round_trip_check(sol: &CombSolution) -> RoundTrip {
    let n = sol.config.len();
    let mut rt = RoundTrip { du: vec![0.0; n], dh: vec![0.0; n], max_deviation: 0.0 };
    if sol.gaps.gaps.is_empty() {
        return rt;
    }
    match Quasimomentum::solve(&sol.gaps.endpoints(), sol.quad.refined().refined()) {
        Ok(q) => {
            for (g, &i) in sol.slit_index.iter().enumerate() {
                rt.du[i] = q.positions()[g] - sol.config.u[i];
                rt.dh[i] = q.heights()[g] - sol.config.h[i];
            }
        }
        Err(_) => {
            rt.du.fill(f64::INFINITY);
            rt.dh.fill(f64::INFINITY);
        }
    }
    rt.max_deviation = sup(&rt.du).max(sup(&rt.dh));
    rt
}

/// Comparison of two solutions with the same positions and `small <= big` heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LindelofReport {
    pub checks: Vec<CheckResult>,
}

impl LindelofReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Monotonicity of `Q0`, of gap lengths on untouched slits, and of `y = Im z`
/// under lowering slits.
pub fn lindelof_pair_check(small: &SlitConfig, big: &SlitConfig, opts: &SolverOptions) -> Result<LindelofReport> {
    if small.u != big.u {
        return Err(Error::MonotonicityViolation("positions differ".into()));
    }
    if small.h.iter().zip(&big.h).any(|(a, b)| a > b) {
        return Err(Error::MonotonicityViolation("small heights exceed big heights".into()));
    }
    let (ss, sb) = (solve_forward(small, opts)?, solve_forward(big, opts)?);
    let (qs, qb) = (ss.quasimomentum()?, sb.quasimomentum()?);
    let tag = format!("{}|{}", crate::estimates::fingerprint(small), crate::estimates::fingerprint(big));
    let mut checks = Vec::new();
    let (q0s, _) = qs.q0_and_dirichlet()?;
    let (q0b, _) = qb.q0_and_dirichlet()?;
    checks.push(CheckResult::new("2.26", q0s, q0b, &tag));
    if small.h != big.h {
        // strictness: the gap has to be visible above the quadrature noise
        let tol = 1e-9 * q0b.max(1.0);
        let mut c = CheckResult::new("2.26-strict", q0s + tol, q0b, &tag);
        c.passed = q0s + tol < q0b;
        checks.push(c);
    }
    let ls = ss.spread(&ss.gaps.gaps.iter().map(Gap::len).collect::<Vec<_>>());
    let lb = sb.spread(&sb.gaps.gaps.iter().map(Gap::len).collect::<Vec<_>>());
    for m in 0..small.len() {
        if small.h[m] == big.h[m] && big.h[m] > 0.0 {
            checks.push(CheckResult::new(&format!("2.27[{m}]"), lb[m], ls[m], &tag));
        }
    }
    // y(k, small) >= y(k, big) on a grid in the big slit domain
    let (lo, hi) = (big.u[0] - 1.0, big.u[big.len() - 1] + 1.0);
    let hmax = big.max_height().max(1e-3);
    let mut worst: Option<CheckResult> = None;
    for i in 0..10 {
        // irrational offset keeps grid columns off the slits
        let u = lo + (hi - lo) * (i as f64 + 0.5 + 0.1 * std::f64::consts::FRAC_1_SQRT_2) / 10.0;
        for j in 0..10 {
            let v = 2.0 * hmax * (j as f64 + 0.5) / 10.0;
            let k = C64::new(u, v);
            let yb = match qb.z_of_k(k) {
                Ok(z) => z.im,
                Err(Error::OnSlit) => continue,
                Err(e) => return Err(e),
            };
            let ys = match qs.z_of_k(k) {
                Ok(z) => z.im,
                Err(Error::OnSlit) => continue,
                Err(e) => return Err(e),
            };
            let c = CheckResult::new("2.23", yb, ys, &tag);
            if worst.as_ref().is_none_or(|w| c.margin < w.margin) {
                worst = Some(c);
            }
        }
    }
    checks.extend(worst);
    Ok(LindelofReport { checks })
}
