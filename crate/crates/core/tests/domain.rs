use combmap::domain::norm;
use combmap::{greedy_energy_bounds, greedy_tilde, weighted_norm, NormSpec, SlitConfig};
use proptest::prelude::*;

fn arb_config() -> impl Strategy<Value = SlitConfig> {
    (1usize..10)
        .prop_flat_map(|n| (prop::collection::vec(0.1f64..3.0, n), prop::collection::vec(0.0f64..3.0, n)))
        .prop_map(|(du, h)| {
            let mut u = Vec::new();
            let mut x = -1.0;
            for d in du {
                x += d;
                u.push(x);
            }
            SlitConfig::new(u, h).unwrap()
        })
}

#[test]
fn spacing_and_heights() {
    let c = SlitConfig::new(vec![-1.0, 0.5, 4.0], vec![0.0, 2.0, 1.5]).unwrap();
    assert_eq!(c.u_star(), 1.5);
    assert_eq!(c.max_height(), 2.0);
    assert_eq!(c.scaled_heights(0.5).h, vec![0.0, 1.0, 0.75]);
    assert_eq!(norm(&c.h, f64::INFINITY), 2.0);
}

#[test]
fn config_json_round_trip() {
    let c = SlitConfig::new(vec![0.1, 0.7], vec![1.0 / 3.0, 2.0]).unwrap();
    let s = serde_json::to_string(&c).unwrap();
    assert_eq!(serde_json::from_str::<SlitConfig>(&s).unwrap(), c);
}

proptest! {
    #[test]
    fn norms_decrease_in_p(v in prop::collection::vec(-5.0f64..5.0, 1..12), p in 1.0f64..4.0, dp in 0.0f64..3.0) {
        prop_assert!(norm(&v, p + dp) <= norm(&v, p) * (1.0 + 1e-12));
        prop_assert!(norm(&v, f64::INFINITY) <= norm(&v, p) * (1.0 + 1e-12));
    }

    #[test]
    fn weights_at_least_one_dominate(v in prop::collection::vec(-5.0f64..5.0, 1..12), p in 1.0f64..3.0, w in 1.0f64..9.0) {
        let spec = NormSpec::new(p, Some(vec![w; v.len()])).unwrap();
        let weighted = weighted_norm(&v, &spec).unwrap();
        prop_assert!(weighted >= norm(&v, p) * (1.0 - 1e-12));
        // constant weights factor out
        prop_assert!((weighted - w.powf(1.0 / p) * norm(&v, p)).abs() <= 1e-12 * weighted.max(1.0));
    }

    #[test]
    fn greedy_selection_is_separated_and_covering(c in arb_config()) {
        let t = greedy_tilde(&c);
        let chosen: Vec<usize> = (0..c.len()).filter(|&i| t[i] > 0.0).collect();
        for &i in &chosen {
            prop_assert_eq!(t[i], c.h[i]);
            for &j in &chosen {
                if i != j {
                    prop_assert!((c.u[i] - c.u[j]).abs() > c.h[i].min(c.h[j]));
                }
            }
        }
        // every nonempty slit left out sits in the window of a chosen slit at least as tall
        for i in (0..c.len()).filter(|&i| c.h[i] > 0.0 && t[i] == 0.0) {
            prop_assert!(chosen.iter().any(|&m| (c.u[i] - c.u[m]).abs() <= c.h[m] && c.h[m] >= c.h[i]));
        }
        let (lo, hi) = greedy_energy_bounds(&c);
        prop_assert!(lo <= hi);
    }
}
