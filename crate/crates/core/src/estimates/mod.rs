//! The verification harness: each check compares two computed scalars.
//!
//! Check ids are the numbers of the inequalities they test, optionally followed
//! by a side (`-lower`, `-upper`, `+`, `-`) and a bracketed context such as
//! `[p=1.5]` or `[n=3]`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::domain::{NormSpec, SlitConfig};
use crate::error::Result;
use crate::forward::{solve_forward, SolverOptions};

mod checks;
mod ensemble;
mod examples;

pub use checks::*;
pub use ensemble::*;
pub use examples::*;

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResult {
    pub check_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub instance: String,
}

impl CheckResult {
    pub fn new(id: &str, lhs: f64, rhs: f64, instance: &str) -> CheckResult {
        let tol = 1e-9 * rhs.abs().max(1.0);
        CheckResult {
            check_id: id.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            passed: lhs <= rhs + tol,
            instance: instance.to_string(),
        }
    }

    /// The id without its bracketed context.
    pub fn base_id(&self) -> &str {
        self.check_id.split('[').next().unwrap_or(&self.check_id)
    }

    /// Margin relative to `max(1, |rhs|)`.
    pub fn relative_margin(&self) -> f64 {
        self.margin / self.rhs.abs().max(1.0)
    }

    /// Close enough to failing that the instance is recomputed with finer quadrature.
    /// Identity residuals are tolerances, not inequalities, and never trigger it.
    pub fn near_violation(&self) -> bool {
        let identity = ["1.5-identity", "1.5-J", "3.32"].contains(&self.base_id());
        !identity && !(self.relative_margin() >= 1e-6)
    }
}

/// A check that was not evaluated because its hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Skipped {
    pub check_id: String,
    pub instance: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Checks {
    pub instance: String,
    pub results: Vec<CheckResult>,
    pub skipped: Vec<Skipped>,
}

impl Checks {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Checks) {
        self.results.extend(other.results);
        self.skipped.extend(other.skipped);
    }

    fn skip(&mut self, id: &str, tag: &str, reason: &str) {
        let id = if tag.is_empty() { id.to_string() } else { format!("{id}[{tag}]") };
        self.skipped.push(Skipped { check_id: id, instance: self.instance.clone(), reason: reason.to_string() });
    }
}

/// Does `id` fall under one of `filters`? A filter matches an id equal to it or
/// continuing with `-`, `+` or `[`, so "2.7" selects "2.7-upper[p=1]" but not "2.70".
pub fn matches_filter(id: &str, filters: &[String]) -> bool {
    filters.is_empty()
        || filters.iter().any(|f| id.strip_prefix(f.as_str()).is_some_and(|rest| rest.is_empty() || rest.starts_with(['-', '+', '['])))
}

/// FNV-1a hash of the bit patterns of `u` and `h`.
pub fn fingerprint(config: &SlitConfig) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for x in config.u.iter().chain(&config.h) {
        for b in x.to_bits().to_le_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{hash:016x}")
}

/// How weights for the weighted chains are built from a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeightRule {
    Unit,
    /// `(2 u_n)^2`, raised to one where it is smaller.
    QuadraticPosition,
    Explicit(Vec<f64>),
}

impl WeightRule {
    pub fn norm_spec(&self, p: f64, config: &SlitConfig) -> Result<NormSpec> {
        let w = match self {
            WeightRule::Unit => None,
            WeightRule::QuadraticPosition => Some(config.u.iter().map(|u| (2.0 * u).powi(2).max(1.0)).collect()),
            WeightRule::Explicit(w) => Some(w.clone()),
        };
        NormSpec::new(p, w)
    }
}

/// Which checks to run and with which norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CheckOptions {
    /// Exponents in `[1, 2]` for the `l^p` chains.
    pub ps: Vec<f64>,
    /// Exponents `>= 2` for the `C_p` bound.
    pub ps_high: Vec<f64>,
    pub weights: Vec<WeightRule>,
    /// Rectangle and local bounds, which need area integrals.
    pub local: bool,
    pub filter: Vec<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            ps: vec![1.0, 1.5, 2.0],
            ps_high: vec![2.0, 3.0],
            weights: vec![WeightRule::Unit, WeightRule::QuadraticPosition],
            local: true,
            filter: Vec::new(),
        }
    }
}

const GROUPS: [&[&str]; 9] = [
    &["1.3", "2.28", "2.30", "L", "1.5"],
    &["2.2", "2.3", "2.4", "2.5"],
    &["2.6", "2.7", "2.8", "2.9", "2.10"],
    &["2.29", "3.17", "3.18", "3.19", "3.20"],
    &["3.6", "3.8"],
    &["3.3", "3.10", "3.11", "3.12"],
    &["3.33", "3.34", "3.35", "3.36", "3.38"],
    &["2.16"],
    &["3.32"],
];

impl CheckOptions {
    fn wants(&self, group: usize) -> bool {
        // a filter may name a whole group member or one side of it
        self.filter.is_empty()
            || GROUPS[group].iter().any(|g| self.filter.iter().any(|f| matches_filter(f, &[g.to_string()]) || matches_filter(g, std::slice::from_ref(f))))
    }
}

/// Every applicable check on one solved instance, filtered and deduplicated.
pub fn run_checks(inst: &Instance, opts: &CheckOptions) -> Result<Checks> {
    let mut out = Checks { instance: inst.fingerprint.clone(), ..Checks::default() };
    if opts.wants(0) {
        out.extend(check_per_gap(inst));
    }
    let mut all_ps: Vec<f64> = opts.ps.iter().chain(&opts.ps_high).copied().collect();
    all_ps.sort_by(f64::total_cmp);
    all_ps.dedup();
    if opts.wants(1) {
        for &p in &all_ps {
            let mut c = check_lp_chains(inst, p);
            let high = opts.ps_high.contains(&p);
            let low = opts.ps.contains(&p);
            c.results.retain(|r| if r.base_id() == "2.3" { high } else { low });
            out.extend(c);
        }
    }
    if opts.wants(2) {
        for rule in &opts.weights {
            for &p in opts.ps.iter().filter(|&&p| p <= 2.0) {
                out.extend(check_weighted_chains(inst, &rule.norm_spec(p, &inst.sol.config)?)?);
            }
        }
    }
    if opts.wants(3) {
        for &p in &all_ps {
            out.extend(check_energy_bounds(inst, p));
        }
    }
    if opts.wants(4) {
        out.extend(check_l2_bounds(inst));
    }
    if opts.local && opts.wants(5) {
        out.extend(check_local(inst)?);
    }
    if opts.wants(6) {
        out.extend(check_band_bounds(inst)?);
    }
    if opts.wants(7) {
        out.extend(check_greedy_bounds(inst));
    }
    if opts.wants(8) {
        out.extend(check_decomposition(inst)?);
    }
    let mut seen = HashSet::new();
    out.results.retain(|c| matches_filter(&c.check_id, &opts.filter) && seen.insert(c.check_id.clone()));
    let mut seen = HashSet::new();
    out.skipped.retain(|c| matches_filter(&c.check_id, &opts.filter) && seen.insert(c.check_id.clone()));
    Ok(out)
}

/// Solves and checks one configuration. If any check is within `1e-6` of
/// failing, everything is recomputed with refined quadrature and the second
/// pass is reported; the flag says whether that happened.
pub fn verify_config(config: &SlitConfig, solver: &SolverOptions, opts: &CheckOptions) -> Result<(Checks, bool)> {
    let sol = solve_forward(config, solver)?;
    let checks = run_checks(&Instance::new(sol)?, opts)?;
    if !checks.results.iter().any(CheckResult::near_violation) {
        return Ok((checks, false));
    }
    let fine = SolverOptions { quad: solver.quad.refined(), ..*solver };
    let sol = solve_forward(config, &fine)?;
    Ok((run_checks(&Instance::new(sol)?, opts)?, true))
}
