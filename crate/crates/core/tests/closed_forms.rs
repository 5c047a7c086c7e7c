use combmap::closed_forms::{cs_constants, single_slit_map, three_slit_nesting, uniform_comb_gap_length, NestingOracle};
use combmap::{solve_forward, Error, SlitConfig, SolverOptions};
use num_complex::Complex64 as C64;

const PI: f64 = std::f64::consts::PI;

/// Off-slit sample points around the three slits at -1, 0, 1.
fn samples() -> Vec<C64> {
    (0..50)
        .map(|i| {
            let t = i as f64 / 50.0;
            let u = -2.5 + 5.0 * t + 0.0123;
            let v = 3.0 * (2.0 * PI * 3.0 * t).sin() + 0.05;
            C64::new(u, v)
        })
        .collect()
}

#[test]
fn nesting_matches_the_three_slit_solve() {
    let opts = SolverOptions::default();
    for (h0, m) in [(0.3, 1.7), (1.2, 1.2), (1.9, 0.4), (0.8, 2.0)] {
        let oracle = NestingOracle::new(h0, m, &opts).unwrap();
        let sol = solve_forward(&SlitConfig::new(vec![-1.0, 0.0, 1.0], vec![m, h0, m]).unwrap(), &opts).unwrap();
        let q = sol.quasimomentum().unwrap();
        for k in samples() {
            let z = q.z_of_k(k).unwrap();
            let w = oracle.eval(k).unwrap();
            assert!((z - w).norm() < 1e-6, "h0={h0} M={m} k={k}: {z} vs {w}");
        }
        // the middle slit opens onto [-Y, Y] with Y = |z(i h0, eta)|
        let l0 = sol.gaps.gaps[sol.gap_of(1).unwrap()].len();
        assert!((l0 - 2.0 * oracle.image_height()).abs() < 1e-8, "{l0} vs {}", oracle.image_height());
        assert!(oracle.image_height() <= oracle.middle_gap_bound());
    }
}

#[test]
fn nesting_without_outer_slits_is_one_slit() {
    let k = C64::new(0.7, 0.4);
    let z = three_slit_nesting(k, 1.5, 0.0, &SolverOptions::default()).unwrap();
    assert!((z - single_slit_map(k, 0.0, 1.5).unwrap()).norm() < 1e-12);
    assert!(matches!(three_slit_nesting(C64::new(0.0, 0.5), 1.5, 1.0, &SolverOptions::default()), Err(Error::OnSlit)));
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// The two defining integrals straight from `t`, after substitutions that
/// remove the endpoint singularities: `t = alpha - s^2` on `(0, alpha)`, and
/// `t = alpha cosh w`, `w = w_max (1 - s^2)` on `(alpha, beta)`.
fn cs_integrals(alpha: f64, beta: f64) -> (f64, f64) {
    let g = |t: f64| ((beta * beta - t * t) / (alpha + t)).sqrt();
    let first = simpson(|s| 2.0 * g(alpha - s * s), 0.0, alpha.sqrt(), 20000);
    let wmax = (beta / alpha).acosh();
    let second = simpson(
        |s| {
            let t = alpha * (wmax * (1.0 - s * s)).cosh();
            2.0 * wmax * s * ((beta - t) * (beta + t)).max(0.0).sqrt()
        },
        0.0,
        1.0,
        20000,
    );
    (first, second)
}

#[test]
fn christoffel_schwarz_constants_reproduce_their_integrals() {
    for (us, hp) in [(1.0, 0.3), (1.0, 2.0), (PI, 1.0), (2.5, 0.01), (1.0, 6.0)] {
        let c = cs_constants(us, hp).unwrap();
        assert!(0.0 < c.alpha && c.alpha < c.beta);
        let (first, second) = cs_integrals(c.alpha, c.beta);
        assert!((first - us / 2.0).abs() < 1e-9 * us, "u*={us} h+={hp}: {first}");
        assert!((second - hp).abs() < 1e-9 * hp.max(1.0), "u*={us} h+={hp}: {second}");
    }
    assert!(cs_constants(0.0, 1.0).is_err());
    assert!(cs_constants(1.0, -1.0).is_err());
}

#[test]
fn uniform_comb_limits() {
    assert!((uniform_comb_gap_length(1e-4) - 2e-4).abs() < 1e-12);
    assert!((uniform_comb_gap_length(20.0) - PI).abs() < 1e-8);
    assert_eq!(uniform_comb_gap_length(1.0), 2.0 * 1f64.tanh().asin());
    // a 13-slit truncation already sits close to the infinite comb in the middle
    let n = 13;
    let c = SlitConfig::new((0..n).map(|k| PI * k as f64).collect(), vec![1.0; n]).unwrap();
    let sol = solve_forward(&c, &SolverOptions::default()).unwrap();
    let l = sol.gaps.gaps[n / 2].len();
    assert!((l - uniform_comb_gap_length(1.0)).abs() < 0.03, "{l}");
}
