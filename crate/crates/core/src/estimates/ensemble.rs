use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::SlitConfig;
use crate::error::{Error, Result};
use crate::forward::{lindelof_pair_check, SolverOptions};

use super::{fingerprint, verify_config, CheckOptions, CheckResult, Skipped};

/// Seeded random family of configurations with `u_1 = 1` and spacings in
/// `spacing`, so `u_* >= spacing.0 >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    /// Inclusive range of slit counts.
    pub n_range: (usize, usize),
    pub spacing: (f64, f64),
    pub height: (f64, f64),
    /// Probability that a slit is empty.
    pub zero_fraction: f64,
    pub lindelof_pairs: usize,
    pub checks: CheckOptions,
    pub solver: SolverOptions,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            seed: 42,
            count: 200,
            n_range: (1, 8),
            spacing: (1.0, 2.0),
            height: (0.0, 2.0),
            zero_fraction: 0.1,
            lindelof_pairs: 20,
            checks: CheckOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (a, b): (f64, f64)) -> f64 {
    if a == b {
        a
    } else {
        rng.gen_range(a..b)
    }
}

impl EnsembleSpec {
    /// Unit spacing and heights at most `0.2`, so every slit meets `h_n <= r/2`
    /// with `r = 1/2`; only the local bounds are checked.
    pub fn small_slits(seed: u64, count: usize) -> EnsembleSpec {
        EnsembleSpec {
            seed,
            count,
            n_range: (2, 8),
            spacing: (1.0, 1.0),
            height: (0.0, 0.2),
            zero_fraction: 0.0,
            lindelof_pairs: 0,
            checks: CheckOptions { filter: vec!["3.10".into(), "3.11".into(), "3.12".into()], ..CheckOptions::default() },
            ..EnsembleSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n0, n1) = self.n_range;
        let (s0, s1) = self.spacing;
        let (h0, h1) = self.height;
        let ok = n0 >= 1
            && n0 <= n1
            && s0 >= 1.0
            && s0 <= s1
            && s1.is_finite()
            && h0 >= 0.0
            && h0 <= h1
            && h1.is_finite()
            && (0.0..=1.0).contains(&self.zero_fraction);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad ensemble spec: n {:?}, spacing {:?}, height {:?}", self.n_range, self.spacing, self.height)))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, n_range: (usize, usize), height: (f64, f64), zeros: f64) -> SlitConfig {
        let n = rng.gen_range(n_range.0..=n_range.1);
        let mut u = vec![1.0];
        for _ in 1..n {
            let last = u[u.len() - 1];
            u.push(last + uniform(rng, self.spacing));
        }
        let h = (0..n).map(|_| if rng.gen_bool(zeros) { 0.0 } else { uniform(rng, height) }).collect();
        SlitConfig { u, h }
    }

    /// The `count` configurations, generated sequentially from `seed`.
    pub fn configs(&self) -> Vec<SlitConfig> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count).map(|_| self.draw(&mut rng, self.n_range, self.height, self.zero_fraction)).collect()
    }

    /// Monotone pairs `(small, big)` from an independent stream: each slit of
    /// `small` keeps, drops or shrinks the height of `big`, and at least one changes.
    pub fn lindelof_suite(&self) -> Vec<(SlitConfig, SlitConfig)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let n_range = (self.n_range.0, self.n_range.1.min(4).max(self.n_range.0));
        let height = (self.height.0.max(0.1 * self.height.1), self.height.1);
        (0..self.lindelof_pairs)
            .map(|_| {
                let big = self.draw(&mut rng, n_range, height, 0.0);
                let mut small = big.clone();
                for h in small.h.iter_mut() {
                    match rng.gen_range(0..3) {
                        0 => {}
                        1 => *h = 0.0,
                        _ => *h *= rng.gen_range(0.2..0.9),
                    }
                }
                if small.h == big.h {
                    let m = rng.gen_range(0..small.len());
                    small.h[m] *= 0.5;
                }
                (small, big)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceOutcome {
    pub index: usize,
    pub instance: String,
    pub config: SlitConfig,
    /// Recomputed with refined quadrature after a near-violation.
    pub refined: bool,
    pub results: Vec<CheckResult>,
    pub skipped: Vec<Skipped>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairOutcome {
    pub index: usize,
    pub small: SlitConfig,
    pub big: SlitConfig,
    pub results: Vec<CheckResult>,
    pub error: Option<String>,
}

/// Aggregate over all results sharing a base id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub check_id: String,
    pub evaluated: usize,
    pub violations: usize,
    pub skipped: usize,
    /// Smallest `margin / max(1, |rhs|)`; `None` if nothing was evaluated.
    pub min_relative_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnsembleReport {
    pub seed: u64,
    pub count: usize,
    pub instances: Vec<InstanceOutcome>,
    pub lindelof: Vec<PairOutcome>,
    pub summary: Vec<SummaryRow>,
    pub violations: usize,
    pub failures: usize,
}

impl EnsembleReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.failures == 0
    }

    pub fn all_results(&self) -> impl Iterator<Item = &CheckResult> {
        self.instances.iter().flat_map(|i| &i.results).chain(self.lindelof.iter().flat_map(|p| &p.results))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let refined = self.instances.iter().filter(|i| i.refined).count();
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "instances: {} (refined {refined}), lindelof pairs: {}", self.count, self.lindelof.len());
        let _ = writeln!(s, "{:<16} {:>9} {:>10} {:>8} {:>16}", "check", "evaluated", "violations", "skipped", "min rel. margin");
        for r in &self.summary {
            let m = r.min_relative_margin.map_or("-".to_string(), |m| format!("{m:.3e}"));
            let _ = writeln!(s, "{:<16} {:>9} {:>10} {:>8} {:>16}", r.check_id, r.evaluated, r.violations, r.skipped, m);
        }
        for c in self.all_results().filter(|c| !c.passed) {
            let _ = writeln!(s, "VIOLATION {} on {}: lhs {:.9e} > rhs {:.9e}", c.check_id, c.instance, c.lhs, c.rhs);
        }
        for i in &self.instances {
            if let Some(e) = &i.error {
                let _ = writeln!(s, "FAILURE instance {} ({}): {e}", i.index, i.instance);
            }
        }
        for p in &self.lindelof {
            if let Some(e) = &p.error {
                let _ = writeln!(s, "FAILURE lindelof pair {}: {e}", p.index);
            }
        }
        let _ = writeln!(s, "violations: {}, failures: {}", self.violations, self.failures);
        s
    }
}

fn summarize(instances: &[InstanceOutcome], pairs: &[PairOutcome]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<String, SummaryRow> = BTreeMap::new();
    let results = instances.iter().flat_map(|i| &i.results).chain(pairs.iter().flat_map(|p| &p.results));
    for c in results {
        let r = entry(&mut rows, &c.check_id);
        r.evaluated += 1;
        r.violations += usize::from(!c.passed);
        let m = c.relative_margin();
        r.min_relative_margin = Some(r.min_relative_margin.map_or(m, |x| x.min(m)));
    }
    for sk in instances.iter().flat_map(|i| &i.skipped) {
        entry(&mut rows, &sk.check_id).skipped += 1;
    }
    rows.into_values().collect()
}

fn entry<'a>(rows: &'a mut BTreeMap<String, SummaryRow>, id: &str) -> &'a mut SummaryRow {
    let id = id.split('[').next().unwrap_or(id).to_string();
    rows.entry(id.clone())
        .or_insert_with(|| SummaryRow { check_id: id, evaluated: 0, violations: 0, skipped: 0, min_relative_margin: None })
}

/// Thread cap from `COMBMAP_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("COMBMAP_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn run_parallel<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Verifies every configuration of the ensemble plus its Lindelöf suite.
/// Members run concurrently; results are collected in index order, so the
/// report depends only on the spec.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleReport> {
    spec.validate()?;
    let configs = spec.configs();
    let pairs = spec.lindelof_suite();
    let (instances, lindelof) = run_parallel(|| {
        let instances: Vec<InstanceOutcome> = configs
            .into_par_iter()
            .enumerate()
            .map(|(index, config)| {
                let instance = fingerprint(&config);
                match verify_config(&config, &spec.solver, &spec.checks) {
                    Ok((checks, refined)) => InstanceOutcome {
                        index,
                        instance,
                        config,
                        refined,
                        results: checks.results,
                        skipped: checks.skipped,
                        error: None,
                    },
                    Err(e) => InstanceOutcome {
                        index,
                        instance,
                        config,
                        refined: false,
                        results: Vec::new(),
                        skipped: Vec::new(),
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        let lindelof: Vec<PairOutcome> = pairs
            .into_par_iter()
            .enumerate()
            .map(|(index, (small, big))| {
                let (results, error) = match lindelof_pair_check(&small, &big, &spec.solver) {
                    Ok(r) => (r.checks, None),
                    Err(e) => (Vec::new(), Some(e.to_string())),
                };
                let results = results.into_iter().filter(|c| super::matches_filter(&c.check_id, &spec.checks.filter)).collect();
                PairOutcome { index, small, big, results, error }
            })
            .collect();
        (instances, lindelof)
    });
    let summary = summarize(&instances, &lindelof);
    let violations = summary.iter().map(|r| r.violations).sum();
    let failures = instances.iter().filter(|i| i.error.is_some()).count() + lindelof.iter().filter(|p| p.error.is_some()).count();
    Ok(EnsembleReport { seed: spec.seed, count: spec.count, instances, lindelof, summary, violations, failures })
}
