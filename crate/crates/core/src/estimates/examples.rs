use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::capacity::slit_union_capacity_check;
use crate::closed_forms::uniform_comb_gap_length;
use crate::domain::{norm, SlitConfig};
use crate::error::{Error, Result};
use crate::forward::{solve_forward, SolverOptions};
use crate::report::quantity_report;

use super::CheckResult;

const PI: f64 = std::f64::consts::PI;

/// Chains, a per-row table, and the checks behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExampleReport {
    pub id: u32,
    pub size: usize,
    pub chains: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub checks: Vec<CheckResult>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "example {} (size {})", self.id, self.size);
        for c in &self.chains {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s);
        let head: Vec<String> = self.columns.iter().map(|c| format!("{c:>14}")).collect();
        let _ = writeln!(s, "{}", head.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:>14.8}")).collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        let _ = writeln!(s);
        for c in &self.checks {
            let verdict = if c.passed { "ok  " } else { "FAIL" };
            let _ = writeln!(s, "{verdict} {:<24} {:.9e} <= {:.9e}", c.check_id, c.lhs, c.rhs);
        }
        s
    }
}

/// The three reference families:
/// 1. `u_n = n`, `h_n = N` for `|n| <= N`;
/// 2. `u_n = n`, `h_n = N - |n|` for `|n| <= N`;
/// 3. `u_n = pi n`, `h_n = 1` for `0 <= n < N`, at `N = size` and successive halvings down to 12.
pub fn reproduce_example(id: u32, size: usize, opts: &SolverOptions) -> Result<ExampleReport> {
    match id {
        1 | 2 if !(1..=8).contains(&size) => Err(Error::InvalidArgument(format!("size {size} outside 1..=8"))),
        3 if !(2..=100).contains(&size) => Err(Error::InvalidArgument(format!("size {size} outside 2..=100"))),
        1 => example_one(size, opts),
        2 => example_two(size, opts),
        3 => example_three(size, opts),
        _ => Err(Error::InvalidArgument(format!("no example {id}"))),
    }
}

fn symmetric(n: usize, height: impl Fn(i64) -> f64) -> SlitConfig {
    let n = n as i64;
    SlitConfig { u: (-n..=n).map(|k| k as f64).collect(), h: (-n..=n).map(height).collect() }
}

fn example_one(n: usize, opts: &SolverOptions) -> Result<ExampleReport> {
    let nf = n as f64;
    let config = symmetric(n, |_| nf);
    let sol = solve_forward(&config, opts)?;
    let rep = quantity_report(&sol)?;
    let tag = "ex1";
    let hinf = norm(&rep.h_computed, f64::INFINITY);
    let checks = vec![
        CheckResult::new("ex1-lower", hinf * hinf, rep.id, tag),
        CheckResult::new("ex1-upper", rep.id, 16.0 * nf * nf, tag),
        CheckResult::new("ex1-identity", (2.0 * rep.q0 - rep.id).abs(), 1e-7 * rep.q0.max(1.0), tag),
    ];
    Ok(ExampleReport {
        id: 1,
        size: n,
        chains: vec![format!("N^2 = {} <= 2 Q0 = I_D = {:.9} <= 16 N^2 = {}", nf * nf, rep.id, 16.0 * nf * nf)],
        columns: ["u", "h", "l", "A"].map(String::from).to_vec(),
        rows: (0..config.len()).map(|i| vec![config.u[i], config.h[i], rep.l[i], rep.a[i]]).collect(),
        checks,
    })
}

fn example_two(n: usize, opts: &SolverOptions) -> Result<ExampleReport> {
    let nf = n as f64;
    let config = symmetric(n, |k| (n as i64 - k.abs()) as f64);
    let sol = solve_forward(&config, opts)?;
    let rep = quantity_report(&sol)?;
    let cap = slit_union_capacity_check(&sol);
    let tag = "ex2";
    let c = 8f64.powf(0.25) * nf.sqrt();
    let lmax = norm(&rep.l, f64::INFINITY);
    let l1 = norm(&rep.l, 1.0);
    let l2sq = norm(&rep.l, 2.0).powi(2);
    let top = 8.0 * 8f64.powf(0.25) * nf.powf(1.5);
    let checks = vec![
        CheckResult::new("ex2-max", lmax, c, tag),
        CheckResult::new("ex2-l2", l2sq, c * l1, tag),
        CheckResult::new("ex2-l2-top", c * l1, top, tag),
        CheckResult::new("ex2-capacity", cap.capacity, cap.diameter, tag),
        CheckResult::new("ex2-sum", l1, 8.0 * nf, tag),
    ];
    Ok(ExampleReport {
        id: 2,
        size: n,
        chains: vec![
            format!("||l||^2 = {l2sq:.9} <= 8^(1/4) sqrt(N) sum l = {:.9} <= 8 8^(1/4) N^(3/2) = {top:.9}", c * l1),
            format!("sum l = {l1:.9} <= 4 diam = {:.9} = 8N", 4.0 * cap.diameter),
        ],
        columns: ["u", "h", "l", "A"].map(String::from).to_vec(),
        rows: (0..config.len()).map(|i| vec![config.u[i], config.h[i], rep.l[i], rep.a[i]]).collect(),
        checks,
    })
}

fn example_three(size: usize, opts: &SolverOptions) -> Result<ExampleReport> {
    let mut sizes = vec![size];
    while sizes[sizes.len() - 1] / 2 >= 12 {
        sizes.push(sizes[sizes.len() - 1] / 2);
    }
    sizes.reverse();
    let limit = uniform_comb_gap_length(1.0);
    let mut rows = Vec::new();
    for &n in &sizes {
        let config = SlitConfig { u: (0..n).map(|k| PI * k as f64).collect(), h: vec![1.0; n] };
        let sol = solve_forward(&config, opts)?;
        let g = sol.gap_of(n / 2).expect("every slit has height one");
        let l = sol.gaps.gaps[g].len();
        rows.push(vec![n as f64, l, limit, (l - limit).abs()]);
    }
    let mut checks = Vec::new();
    let last = &rows[rows.len() - 1];
    checks.push(CheckResult::new(&format!("ex3-limit[N={size}]"), last[3], 1e-2, "ex3"));
    for w in rows.windows(2) {
        checks.push(CheckResult::new(&format!("ex3-monotone[N={},{}]", w[0][0], w[1][0]), w[1][3], w[0][3], "ex3"));
    }
    Ok(ExampleReport {
        id: 3,
        size,
        chains: vec![format!("l -> 2 arcsin tanh 1 = {limit:.12}")],
        columns: ["N", "l", "limit", "error"].map(String::from).to_vec(),
        rows,
        checks,
    })
}
