//! `combmap`: solve slit configurations, verify the a priori bounds, reproduce
//! the reference examples and compute capacities.
//!
//! Exit codes: 0 success, 1 inequality violation, 2 input error, 3 numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use combmap::capacity::{
    ahlfors_derivative_at_infinity, capacity, max_sampled_modulus, slit_union_capacity_check, total_length, IntervalUnion,
};
use combmap::estimates::{
    fingerprint, reproduce_example, run_ensemble, verify_config, CheckOptions, EnsembleSpec, WeightRule,
};
use combmap::report::{quantity_report, quantity_report_with, QuantityReport};
use combmap::{CombSolution, Error, GapSystem, NormSpec, QuadSettings, Quasimomentum, SlitConfig, SolverOptions};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "combmap", version, about = "Comb conformal mappings of planes with vertical slits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration and print the gaps and derived quantities.
    Solve(SolveArgs),
    /// Check the a priori bounds on one configuration or a random ensemble.
    Verify(VerifyArgs),
    /// Reproduce one of the reference examples.
    Example(ExampleArgs),
    /// Analytic capacity of a union of intervals or of a solved slit union.
    Capacity(CapacityArgs),
    /// Recover slit positions, heights and quantities from gap endpoints.
    Gaps(GapsArgs),
}

#[derive(Args)]
struct SolveArgs {
    config: PathBuf,
    /// Per-slit rows: n,u,h,l,A,J,mu+,mu-,nu,L,e,d.
    #[arg(long, conflicts_with = "gaps_only")]
    csv: bool,
    /// Print only the gap system.
    #[arg(long)]
    gaps_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Configuration file; omit with --ensemble.
    #[arg(required_unless_present = "ensemble", conflicts_with = "ensemble")]
    config: Option<PathBuf>,
    #[arg(long)]
    ensemble: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Check ids to keep, e.g. 2.7 or 3.12; repeatable.
    #[arg(long)]
    filter: Vec<String>,
    /// Norm exponents; repeatable.
    #[arg(long = "p")]
    p: Vec<f64>,
    /// `unit`, `position` for (2u_n)^2, or a comma-separated list.
    #[arg(long)]
    weights: Option<String>,
    /// Skip the area-integral bounds.
    #[arg(long)]
    no_local: bool,
    /// Small-slit ensemble: unit spacing, heights at most 0.2.
    #[arg(long, requires = "ensemble")]
    small: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(long)]
    id: u32,
    #[arg(long, default_value_t = 3)]
    size: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CapacityArgs {
    /// Intervals as `a,b`.
    #[arg(long, num_args = 1.., required_unless_present = "from_solution", conflicts_with = "from_solution")]
    intervals: Vec<String>,
    /// Output of `solve`, or a configuration to solve first.
    #[arg(long)]
    from_solution: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GapsArgs {
    path: PathBuf,
    #[arg(long)]
    csv: bool,
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let mut msg = e.to_string();
        if let Error::ContinuationExhausted { path, .. } = &e {
            msg.push_str("\ncontinuation trace (t, residual):");
            for (t, r) in path {
                let _ = write!(msg, "\n  {t:.6e} {r:.3e}");
            }
        }
        Fail(if e.is_input() { 2 } else { 3 }, msg)
    }
}

fn input(msg: impl std::fmt::Display) -> Fail {
    Fail(2, msg.to_string())
}

type Outcome = Result<u8, Fail>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    u: Vec<f64>,
    h: Vec<f64>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    p: Option<f64>,
    #[serde(default)]
    solver: Option<SolverOptions>,
}

struct Loaded {
    config: SlitConfig,
    p: Option<f64>,
    weights: Option<Vec<f64>>,
    solver: SolverOptions,
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<Loaded, Fail> {
    let text = read(path)?;
    let file: ConfigFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let config = SlitConfig::new(file.u, file.h)?;
    if let Some(w) = &file.weights {
        if w.len() != config.len() {
            return Err(Error::LengthMismatch { expected: config.len(), found: w.len() }.into());
        }
    }
    // validates p >= 1 and weights >= 1
    NormSpec::new(file.p.unwrap_or(1.0), file.weights.clone())?;
    Ok(Loaded { config, p: file.p, weights: file.weights, solver: file.solver.unwrap_or_default() })
}

#[derive(Serialize, Deserialize)]
struct SolveOutput {
    solution: CombSolution,
    report: QuantityReport,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn csv(config: &SlitConfig, rep: &QuantityReport) -> String {
    let mut s = String::from("n,u,h,l,A,J,mu+,mu-,nu,L,e,d\n");
    for i in 0..config.len() {
        let row = [
            config.u[i],
            config.h[i],
            rep.l[i],
            rep.a[i],
            rep.j[i],
            rep.mu_plus[i],
            rep.mu_minus[i],
            rep.nu[i],
            rep.big_l[i],
            rep.e[i],
            rep.d[i],
        ];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(s, "{i},{}", cells.join(","));
    }
    s
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let loaded = load_config(&a.config)?;
    let sol = combmap::solve_forward(&loaded.config, &loaded.solver)?;
    let text = if a.gaps_only {
        to_json(&sol.gaps)
    } else {
        let report = quantity_report(&sol)?;
        if a.csv {
            csv(&sol.config, &report)
        } else {
            to_json(&SolveOutput { solution: sol, report })
        }
    };
    emit(&text, a.out.as_deref())?;
    Ok(0)
}

fn check_options(a: &VerifyArgs, file_p: Option<f64>, file_weights: Option<&Vec<f64>>) -> Result<CheckOptions, Fail> {
    let mut opts = CheckOptions { filter: a.filter.clone(), local: !a.no_local, ..CheckOptions::default() };
    let mut ps = a.p.clone();
    if ps.is_empty() {
        ps.extend(file_p);
    }
    if !ps.is_empty() {
        if let Some(bad) = ps.iter().find(|p| !p.is_finite() || **p < 1.0) {
            return Err(input(format!("p = {bad} must be finite and at least 1")));
        }
        opts.ps = ps.iter().copied().filter(|&p| p <= 2.0).collect();
        opts.ps_high = ps.iter().copied().filter(|&p| p >= 2.0).collect();
    }
    let from_file = file_weights.cloned().map(WeightRule::Explicit);
    opts.weights = match a.weights.as_deref() {
        None => match from_file {
            Some(w) => vec![WeightRule::Unit, w],
            None => opts.weights,
        },
        Some("unit") => vec![WeightRule::Unit],
        Some("position") => vec![WeightRule::QuadraticPosition],
        Some(list) => {
            let w: Result<Vec<f64>, _> = list.split(',').map(|x| x.trim().parse::<f64>()).collect();
            vec![WeightRule::Explicit(w.map_err(|e| input(format!("--weights: {e}")))?)]
        }
    };
    Ok(opts)
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    if a.ensemble {
        let mut spec = if a.small { EnsembleSpec::small_slits(a.seed, a.count) } else { EnsembleSpec::default() };
        spec.seed = a.seed;
        spec.count = a.count;
        let mut opts = check_options(a, None, None)?;
        if a.small && a.filter.is_empty() {
            opts.filter = spec.checks.filter.clone();
        }
        if opts.weights.iter().any(|w| matches!(w, WeightRule::Explicit(_))) {
            return Err(input("explicit weights need a configuration; use unit or position with --ensemble"));
        }
        spec.checks = opts;
        let report = run_ensemble(&spec)?;
        if a.json {
            print!("{}", to_json(&report));
        } else {
            print!("{}", report.to_text());
        }
        return Ok(if report.failures > 0 {
            3
        } else if report.violations > 0 {
            1
        } else {
            0
        });
    }
    let path = a.config.as_deref().expect("clap requires a config without --ensemble");
    let loaded = load_config(path)?;
    let opts = check_options(a, loaded.p, loaded.weights.as_ref())?;
    for w in &opts.weights {
        if let WeightRule::Explicit(w) = w {
            NormSpec::new(1.0, Some(w.clone()))?;
            if w.len() != loaded.config.len() {
                return Err(Error::LengthMismatch { expected: loaded.config.len(), found: w.len() }.into());
            }
        }
    }
    let (checks, refined) = verify_config(&loaded.config, &loaded.solver, &opts)?;
    if a.json {
        print!("{}", to_json(&checks));
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "seed: {} (unused for a single configuration)", a.seed);
        let _ = writeln!(s, "instance: {}{}", fingerprint(&loaded.config), if refined { " (refined quadrature)" } else { "" });
        for c in &checks.results {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict} {:<24} lhs {:.9e} rhs {:.9e} margin {:.3e}", c.check_id, c.lhs, c.rhs, c.margin);
        }
        for k in &checks.skipped {
            let _ = writeln!(s, "SKIP {:<24} {}", k.check_id, k.reason);
        }
        let n = checks.violations().count();
        let _ = writeln!(s, "checks: {}, skipped: {}, violations: {n}", checks.results.len(), checks.skipped.len());
        print!("{s}");
    }
    Ok(if checks.passed() { 0 } else { 1 })
}

fn cmd_example(a: &ExampleArgs) -> Outcome {
    if !(1..=3).contains(&a.id) {
        return Err(input(format!("--id must be 1, 2 or 3, not {}", a.id)));
    }
    let report = reproduce_example(a.id, a.size, &SolverOptions::default())?;
    if a.json {
        print!("{}", to_json(&report));
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn parse_interval(s: &str) -> Result<(f64, f64), Fail> {
    let (a, b) = s.split_once(',').ok_or_else(|| input(format!("interval {s:?} is not a,b")))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| input(format!("interval {s:?}: {e}")));
    Ok((num(a)?, num(b)?))
}

/// A `solve` output, a bare solution, or a configuration to solve.
fn load_solution(path: &Path) -> Result<CombSolution, Fail> {
    let text = read(path)?;
    if let Ok(out) = serde_json::from_str::<SolveOutput>(&text) {
        return Ok(out.solution);
    }
    if let Ok(sol) = serde_json::from_str::<CombSolution>(&text) {
        return Ok(sol);
    }
    let loaded = load_config(path)?;
    Ok(combmap::solve_forward(&loaded.config, &loaded.solver)?)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CapacityOutput {
    intervals: Vec<(f64, f64)>,
    total_length: f64,
    capacity: f64,
    ahlfors_derivative: f64,
    max_sampled_modulus: f64,
    diameter: f64,
    /// Capacity at most the diameter of the slit union (or of the intervals).
    diameter_bound_holds: bool,
}

fn cmd_capacity(a: &CapacityArgs) -> Outcome {
    let (e, diameter) = match &a.from_solution {
        Some(p) => {
            let sol = load_solution(p)?;
            let rep = slit_union_capacity_check(&sol);
            (IntervalUnion::new(sol.gaps.endpoints())?, rep.diameter)
        }
        None => {
            let ivs = a.intervals.iter().map(|s| parse_interval(s)).collect::<Result<Vec<_>, _>>()?;
            let e = IntervalUnion::new(ivs)?;
            let d = match (e.intervals().first(), e.intervals().last()) {
                (Some(f), Some(l)) => l.1 - f.0,
                _ => 0.0,
            };
            (e, d)
        }
    };
    let cap = capacity(&e);
    let out = CapacityOutput {
        intervals: e.intervals().to_vec(),
        total_length: total_length(&e),
        capacity: cap,
        ahlfors_derivative: ahlfors_derivative_at_infinity(&e),
        max_sampled_modulus: max_sampled_modulus(&e, a.samples),
        diameter,
        diameter_bound_holds: cap <= diameter * (1.0 + 1e-12),
    };
    if a.json {
        print!("{}", to_json(&out));
    } else {
        println!("|E|            {:.16e}", out.total_length);
        println!("|E|/4          {:.16e}", out.capacity);
        println!("f'(inf)        {:.16e}", out.ahlfors_derivative);
        println!("max |f| (grid) {:.16e}", out.max_sampled_modulus);
        println!("diameter       {:.16e}", out.diameter);
        println!("capacity <= diameter: {}", out.diameter_bound_holds);
    }
    Ok(if out.diameter_bound_holds { 0 } else { 1 })
}

/// A gap as an object with `zMinus`, `zPlus` (and an ignored `c`), or `[a, b]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum GapInput {
    Pair(f64, f64),
    Object {
        #[serde(rename = "zMinus")]
        lo: f64,
        #[serde(rename = "zPlus")]
        hi: f64,
        #[allow(dead_code)]
        c: Option<f64>,
    },
}

/// `{"gaps": [...]}` as written by `solve --gaps-only`, or a bare list.
#[derive(Deserialize)]
#[serde(untagged)]
enum GapsFile {
    Wrapped { gaps: Vec<GapInput> },
    Bare(Vec<GapInput>),
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GapsOutput {
    gaps: GapSystem,
    u: Vec<f64>,
    h: Vec<f64>,
    report: QuantityReport,
}

fn cmd_gaps(a: &GapsArgs) -> Outcome {
    let text = read(&a.path)?;
    let file: GapsFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", a.path.display())))?;
    let (GapsFile::Wrapped { gaps } | GapsFile::Bare(gaps)) = file;
    let ends: Vec<(f64, f64)> = gaps
        .iter()
        .map(|g| match *g {
            GapInput::Pair(lo, hi) | GapInput::Object { lo, hi, .. } => (lo, hi),
        })
        .collect();
    if ends.is_empty() {
        return Err(input("no gaps"));
    }
    // critical points are recomputed from the closure conditions
    let quad = QuadSettings::default();
    let q = Quasimomentum::solve(&ends, quad)?;
    let (u, h) = q.heights_and_positions();
    let sol = CombSolution {
        config: SlitConfig::new(u.clone(), h.clone())?,
        gaps: q.gap_system(),
        slit_index: (0..ends.len()).collect(),
        residual: 0.0,
        iterations: 0,
        continuation_path: Vec::new(),
        quad,
    };
    let report = quantity_report_with(&sol, &q)?;
    if a.csv {
        print!("{}", csv(&sol.config, &report));
    } else {
        print!("{}", to_json(&GapsOutput { gaps: sol.gaps, u, h, report }));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Example(a) => cmd_example(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Gaps(a) => cmd_gaps(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
