use combmap::capacity::{
    ahlfors, ahlfors_derivative_at_infinity, capacity, max_sampled_modulus, phi, slit_union_capacity_check, total_length,
    IntervalUnion,
};
use combmap::{solve_forward, Error, SlitConfig, SolverOptions};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

/// `lim z f(z)` as the `1/z` coefficient: `(1/2 pi i) oint f dz` by the
/// trapezoid rule on a circle enclosing `E`, which converges geometrically.
fn residue_at_infinity(e: &IntervalUnion) -> f64 {
    let iv = e.intervals();
    let (lo, hi) = (iv[0].0, iv[iv.len() - 1].1);
    let c = 0.5 * (lo + hi);
    let r = hi - lo;
    let m = 2048;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..m {
        let w = C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / m as f64);
        acc += ahlfors(e, c + w).unwrap() * w;
    }
    (acc / m as f64).re
}

fn random_union(rng: &mut ChaCha8Rng) -> IntervalUnion {
    let n = rng.gen_range(1..=6);
    let mut x = rng.gen_range(-5.0..5.0);
    let mut v = Vec::new();
    for _ in 0..n {
        let len = rng.gen_range(0.01..3.0);
        v.push((x, x + len));
        x += len + rng.gen_range(0.01..2.0);
    }
    IntervalUnion::new(v).unwrap()
}

#[test]
fn derivative_at_infinity_is_quarter_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let e = random_union(&mut rng);
        let quarter = total_length(&e) / 4.0;
        assert_eq!(capacity(&e), quarter);
        let oracle = residue_at_infinity(&e);
        assert!((oracle - quarter).abs() < 1e-10, "oracle {oracle} vs {quarter}");
        let ours = ahlfors_derivative_at_infinity(&e);
        assert!((ours - quarter).abs() < 1e-8, "{ours} vs {quarter} on {:?}", e.intervals());
        assert!(max_sampled_modulus(&e, 40) <= 1.0 + 1e-12);
    }
}

#[test]
fn ahlfors_function_is_odd_about_the_real_axis_and_bounded() {
    let e = IntervalUnion::new(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
    let z = C64::new(1.5, 0.8);
    let f = ahlfors(&e, z).unwrap();
    assert!((ahlfors(&e, z.conj()).unwrap() - f.conj()).norm() < 1e-15);
    // boundary values on E have modulus one
    let on = ahlfors(&e, C64::new(0.5, 1e-12)).unwrap();
    assert!((on.norm() - 1.0).abs() < 1e-9, "{on}");
    // between intervals f is real with |f| < 1
    let mid = ahlfors(&e, C64::new(1.5, 0.0)).unwrap();
    assert!(mid.im.abs() < 1e-15 && mid.re.abs() < 1.0);
    assert!((phi(&e, C64::new(10.0, 0.0)).unwrap().re - ((10.0f64 / 9.0) * (8.0 / 7.0)).ln()).abs() < 1e-14);
}

#[test]
fn bad_unions_and_points_on_the_set() {
    assert!(matches!(IntervalUnion::new(vec![(0.0, 1.0), (0.5, 2.0)]), Err(Error::InvalidIntervals(_))));
    assert!(matches!(IntervalUnion::new(vec![(0.0, 1.0), (1.0, 2.0)]), Err(Error::InvalidIntervals(_))));
    assert!(matches!(IntervalUnion::new(vec![(1.0, 1.0)]), Err(Error::InvalidIntervals(_))));
    let e = IntervalUnion::new(vec![(2.0, 3.0), (0.0, 1.0)]).unwrap();
    assert_eq!(e.intervals(), &[(0.0, 1.0), (2.0, 3.0)]);
    assert_eq!(phi(&e, C64::new(2.5, 0.0)), Err(Error::OnSet));
    let empty = IntervalUnion::new(Vec::new()).unwrap();
    assert_eq!(ahlfors_derivative_at_infinity(&empty), 0.0);
}

#[test]
fn slit_union_capacity_is_within_its_diameter() {
    let sol = solve_forward(&SlitConfig::new(vec![0.0, 1.0, 2.5], vec![1.0, 0.4, 2.0]).unwrap(), &SolverOptions::default()).unwrap();
    let rep = slit_union_capacity_check(&sol);
    let l1: f64 = sol.gaps.gaps.iter().map(|g| g.len()).sum();
    assert_eq!(rep.l1, l1);
    assert_eq!(rep.capacity, l1 / 4.0);
    assert_eq!(rep.capacity_unscaled, l1);
    // the tallest slit reflected across the line spans 4, more than any pair
    assert_eq!(rep.diameter, 4.0);
    assert!(rep.passed);
}
