//! Composite Gauss-Legendre rules on panels graded toward nearby complex
//! singularities, plus a few complex helpers that avoid cancellation.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Node count per panel and panel grading ratio.
///
/// A panel is accepted once its width is at most `panel_ratio` times its
/// distance to the nearest singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub order: usize,
    pub panel_ratio: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { order: 16, panel_ratio: 1.0 }
    }
}

impl QuadSettings {
    /// Twice the nodes per unit length, used for refinement reruns.
    pub fn refined(&self) -> Self {
        QuadSettings { order: self.order + self.order / 2, panel_ratio: self.panel_ratio * 0.5 }
    }
}

#[derive(Debug)]
pub(crate) struct GaussLegendre {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

fn compute_gauss_legendre(n: usize) -> GaussLegendre {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    GaussLegendre { x, w }
}

pub(crate) fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Box::leak(Box::new(compute_gauss_legendre(n))))
}

fn distance_to_segment(s: Complex64, lo: f64, hi: f64) -> f64 {
    if s.re < lo {
        (s - lo).norm()
    } else if s.re > hi {
        (s - hi).norm()
    } else {
        s.im.abs()
    }
}

/// Split `[lo, hi]` into panels graded toward the given singularities.
pub(crate) fn graded_panels(lo: f64, hi: f64, sing: &[Complex64], ratio: f64, max_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let min_width = (hi - lo) * 1e-14;
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let w = b - a;
        let d = sing.iter().map(|&s| distance_to_segment(s, a, b)).fold(f64::INFINITY, f64::min);
        if (w <= ratio * d && w <= max_width) || w <= min_width || out.len() + stack.len() > 20_000 {
            out.push((a, b));
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        }
    }
    out
}

/// Flattened composite rule: (node, weight) pairs.
#[derive(Debug, Clone, Default)]
pub(crate) struct Rule {
    pub panels: Vec<(f64, f64)>,
    pub nodes: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(panels: Vec<(f64, f64)>, order: usize) -> Rule {
        let gl = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(panels.len() * order);
        for &(a, b) in &panels {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gl.x.iter().zip(&gl.w) {
                nodes.push((c + h * x, h * w));
            }
        }
        Rule { panels, nodes }
    }

    pub fn graded(lo: f64, hi: f64, sing: &[Complex64], q: &QuadSettings) -> Rule {
        Rule::new(graded_panels(lo, hi, sing, q.panel_ratio, f64::INFINITY), q.order)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|&(x, w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre on a single interval.
pub(crate) fn gl_interval<F: FnMut(f64) -> f64>(a: f64, b: f64, order: usize, mut f: F) -> f64 {
    let gl = gauss_legendre(order);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    gl.x.iter().zip(&gl.w).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// ln(1 + w) without cancellation for small |w|.
pub fn ln_1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.re * w.re + w.im * w.im).ln_1p();
    Complex64::new(re, w.im.atan2(1.0 + w.re))
}

/// exp(w) - 1 without cancellation for small |w|.
pub fn expm1(w: Complex64) -> Complex64 {
    let s = (0.5 * w.im).sin();
    let re = w.re.exp_m1() * w.im.cos() - 2.0 * s * s;
    Complex64::new(re, w.re.exp() * w.im.sin())
}
