//! One PASS/FAIL line per acceptance criterion, then a single assertion.
//! Run with `cargo test -p combmap-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use combmap::capacity::{ahlfors, ahlfors_derivative_at_infinity, max_sampled_modulus, total_length, IntervalUnion};
use combmap::closed_forms::{uniform_comb_gap_length, NestingOracle};
use combmap::estimates::{matches_filter, reproduce_example, run_ensemble, CheckResult, EnsembleReport, EnsembleSpec};
use combmap::report::quantity_report;
use combmap::{solve_forward, SlitConfig, SolverOptions};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

struct Line {
    id: usize,
    passed: bool,
    detail: String,
}

fn line(id: usize, passed: bool, detail: String) -> Line {
    Line { id, passed, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn single_slit() -> Line {
    let t = Instant::now();
    let sol = solve_forward(&SlitConfig::new(vec![0.0], vec![1.0]).unwrap(), &SolverOptions::default()).unwrap();
    let r = quantity_report(&sol).unwrap();
    let got = [r.l[0], r.a[0], r.j[0], r.q0, r.id, r.mu_plus[0], r.mu_minus[0], r.nu[0]];
    let want = [2.0, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0];
    let err = got.iter().zip(want).map(|(g, w)| (g.abs() - w).abs()).fold(0.0, f64::max);
    let dt = t.elapsed();
    line(1, err <= 1e-8 && dt < Duration::from_secs(1), format!("max error {err:.1e}, {}", secs(dt)))
}

/// Criteria 2, 3, 9 and 10 all read the same seeded ensemble.
fn ensemble() -> (EnsembleReport, Duration) {
    let t = Instant::now();
    let mut spec = EnsembleSpec::default();
    spec.checks.local = false;
    let rep = run_ensemble(&spec).unwrap();
    (rep, t.elapsed())
}

fn identity(rep: &EnsembleReport, dt: Duration) -> Line {
    let ids: Vec<&CheckResult> = rep.all_results().filter(|c| c.check_id == "1.5-identity").collect();
    let bad = ids.iter().filter(|c| !c.passed).count();
    // Q0 once more, from the decay of z(k) - k at infinity
    let mut worst = 0.0f64;
    for (inst, config) in rep.instances.iter().zip(EnsembleSpec::default().configs()) {
        assert_eq!(inst.config, config);
        let sol = solve_forward(&config, &SolverOptions::default()).unwrap();
        let q = sol.quasimomentum().unwrap();
        let (q0, _) = q.q0_and_dirichlet().unwrap();
        worst = worst.max((q0 - q.q0_asymptotic()).abs() / q0.max(1.0));
    }
    let n = rep.instances.len();
    let passed = rep.failures == 0 && ids.len() == n && bad == 0 && worst < 1e-7 && dt < Duration::from_secs(120);
    line(2, passed, format!("{n} instances, {bad} identity violations, Q0 cross-check {worst:.1e}, {}", secs(dt)))
}

const CRITERION_3: [&str; 25] = [
    "1.3", "2.2", "2.3", "2.4", "2.5", "2.6", "2.7", "2.8", "2.9", "2.10", "2.28", "2.29", "2.30", "3.6", "3.8", "3.17",
    "3.18", "3.19", "3.20", "3.33", "3.34", "3.35", "3.36", "3.38", "2.16",
];

fn inequalities(rep: &EnsembleReport) -> Line {
    let filter: Vec<String> = CRITERION_3.iter().map(|s| s.to_string()).collect();
    let sel: Vec<&CheckResult> = rep.all_results().filter(|c| matches_filter(&c.check_id, &filter)).collect();
    let bad = sel.iter().filter(|c| !c.passed).count();
    let p_ok = ["2.2[p=1]", "2.2[p=1.5]", "2.2[p=2]", "2.3[p=2]", "2.3[p=3]", "2.7-upper[p=2,w]"]
        .iter()
        .all(|id| sel.iter().any(|c| c.check_id == *id));
    line(3, rep.failures == 0 && bad == 0 && p_ok, format!("{} checks, {bad} violations", sel.len()))
}

fn local() -> Line {
    let t = Instant::now();
    let rep = run_ensemble(&EnsembleSpec::small_slits(42, 50)).unwrap();
    let n = rep.all_results().count();
    let dt = t.elapsed();
    let passed = rep.passed() && n > 0 && dt < Duration::from_secs(300);
    line(4, passed, format!("{n} local checks, {} violations, {}", rep.violations, secs(dt)))
}

fn capacity() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut modulus, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let mut x = rng.gen_range(-5.0..5.0);
        let mut iv = Vec::new();
        for _ in 0..n {
            let len = rng.gen_range(0.01..3.0);
            iv.push((x, x + len));
            x += len + rng.gen_range(0.01..2.0);
        }
        let e = IntervalUnion::new(iv).unwrap();
        let quarter = total_length(&e) / 4.0;
        worst = worst.max((ahlfors_derivative_at_infinity(&e) - quarter).abs());
        modulus = modulus.max(max_sampled_modulus(&e, 40));
        // z f(z) on a far point as a coarse independent look
        let far = C64::new(1e6, 1e6);
        oracle = oracle.max(((ahlfors(&e, far).unwrap() * far).re - quarter).abs());
    }
    let passed = worst <= 1e-8 && modulus <= 1.0 + 1e-12 && oracle < 1e-4;
    line(5, passed, format!("max |f'(inf) - |E|/4| = {worst:.1e}, max |f| = {modulus:.15}"))
}

fn uniform_comb() -> Line {
    let r = reproduce_example(3, 50, &SolverOptions::default()).unwrap();
    let col = |name: &str| {
        let j = r.columns.iter().position(|c| c == name).unwrap();
        r.rows.iter().map(|row| row[j]).collect::<Vec<f64>>()
    };
    let (ns, err) = (col("N"), col("error"));
    let monotone = err.windows(2).all(|w| w[1] < w[0]);
    let last = *err.last().unwrap();
    let limit = uniform_comb_gap_length(1.0);
    let passed = ns.first() == Some(&12.0) && ns.last() == Some(&50.0) && last <= 1e-2 && monotone;
    line(6, passed, format!("N = {ns:?}, errors {err:.4?} against {limit:.6}"))
}

fn examples() -> Line {
    let opts = SolverOptions::default();
    let r1 = reproduce_example(1, 3, &opts).unwrap();
    let id = r1.checks.iter().find(|c| c.check_id == "ex1-lower").unwrap().rhs;
    let r2 = reproduce_example(2, 4, &opts).unwrap();
    let j = r2.columns.iter().position(|c| c == "l").unwrap();
    let l: Vec<f64> = r2.rows.iter().map(|row| row[j]).collect();
    let l2: f64 = l.iter().map(|x| x * x).sum();
    let sum: f64 = l.iter().sum();
    let top = 8.0 * 8f64.powf(0.25) * 4f64.powf(1.5);
    let passed = (9.0..=144.0).contains(&id) && l2 <= top && sum <= 32.0;
    line(7, passed, format!("I_D = {id:.4} in [9, 144]; |l|^2 = {l2:.3} <= {top:.3}; sum l = {sum:.3} <= 32"))
}

fn nesting() -> Line {
    let opts = SolverOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let (mut worst, mut bound_fails, mut worst_ratio) = (0.0f64, 0, 0.0f64);
    for _ in 0..20 {
        let (h0, m) = (rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0));
        let oracle = NestingOracle::new(h0, m, &opts).unwrap();
        let sol = solve_forward(&SlitConfig::new(vec![-1.0, 0.0, 1.0], vec![m, h0, m]).unwrap(), &opts).unwrap();
        let q = sol.quasimomentum().unwrap();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            let k = C64::new(-2.5 + 5.0 * t + 0.0123, 3.0 * (6.0 * PI * t).sin() + 0.05);
            worst = worst.max((q.z_of_k(k).unwrap() - oracle.eval(k).unwrap()).norm());
        }
        let l0 = sol.gaps.gaps[sol.gap_of(1).unwrap()].len();
        let ratio = l0 / oracle.middle_gap_bound();
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 + 1e-9 {
            bound_fails += 1;
        }
    }
    line(
        8,
        worst <= 1e-6 && bound_fails == 0,
        format!("map deviation {worst:.1e}; l0 bound fails on {bound_fails}/20, worst l0/bound = {worst_ratio:.3}"),
    )
}

fn lindelof(rep: &EnsembleReport) -> Line {
    let pairs = &rep.lindelof;
    let errors = pairs.iter().filter(|p| p.error.is_some()).count();
    let bad = pairs.iter().flat_map(|p| &p.results).filter(|c| !c.passed).count();
    let strict = pairs
        .iter()
        .filter(|p| p.small.h != p.big.h)
        .all(|p| p.results.iter().any(|c| c.check_id == "2.26-strict"));
    let grid = pairs.iter().all(|p| p.results.iter().any(|c| c.check_id == "2.23"));
    let passed = pairs.len() == 20 && errors == 0 && bad == 0 && strict && grid;
    line(9, passed, format!("{} pairs, {errors} errors, {bad} violations", pairs.len()))
}

fn decomposition(rep: &EnsembleReport) -> Line {
    let r: Vec<&CheckResult> = rep.all_results().filter(|c| c.base_id() == "3.32").collect();
    let gaps: usize = rep.instances.iter().map(|i| i.config.h.iter().filter(|&&h| h > 0.0).count()).sum();
    let bad = r.iter().filter(|c| !c.passed).count();
    let worst = r.iter().map(|c| c.lhs / c.rhs * 1e-6).fold(0.0, f64::max);
    line(10, bad == 0 && r.len() == 5 * gaps, format!("{} points on {gaps} gaps, worst residual/h = {worst:.1e}", r.len()))
}

#[test]
fn acceptance() {
    let mut lines = vec![single_slit()];
    let (rep, dt) = ensemble();
    lines.push(identity(&rep, dt));
    lines.push(inequalities(&rep));
    lines.push(local());
    lines.push(capacity());
    lines.push(uniform_comb());
    lines.push(examples());
    lines.push(nesting());
    lines.push(lindelof(&rep));
    lines.push(decomposition(&rep));
    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("{} criterion {:>2}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
