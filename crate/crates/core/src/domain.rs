//! Slit configurations, weighted norms and the greedy height selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite vertical-slit configuration: slit `n` is `[u_n - i h_n, u_n + i h_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitConfig {
    pub u: Vec<f64>,
    pub h: Vec<f64>,
}

impl SlitConfig {
    pub fn new(u: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        validate(SlitConfig { u, h })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Minimal spacing; `+inf` for a single slit.
    pub fn u_star(&self) -> f64 {
        self.u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_height(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    /// Same positions, heights multiplied by `t`.
    pub fn scaled_heights(&self, t: f64) -> SlitConfig {
        SlitConfig { u: self.u.clone(), h: self.h.iter().map(|h| t * h).collect() }
    }
}

pub fn validate(config: SlitConfig) -> Result<SlitConfig> {
    if config.u.is_empty() {
        return Err(Error::EmptyConfig);
    }
    if config.u.len() != config.h.len() {
        return Err(Error::LengthMismatch { expected: config.u.len(), found: config.h.len() });
    }
    if let Some(i) = config.u.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonIncreasingPositions { index: i.max(1) });
    }
    for i in 1..config.u.len() {
        if config.u[i] <= config.u[i - 1] {
            return Err(Error::NonIncreasingPositions { index: i });
        }
    }
    for (i, &h) in config.h.iter().enumerate() {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::NegativeHeight { index: i, value: h });
        }
    }
    Ok(config)
}

/// Exponent `p` in `[1, inf]` and optional weights (`None` means all ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl NormSpec {
    pub fn new(p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidNorm(format!("p = {p} < 1")));
        }
        if let Some(w) = &weights {
            if let Some(bad) = w.iter().find(|&&x| !(x >= 1.0) || !x.is_finite()) {
                return Err(Error::InvalidNorm(format!("weight {bad} < 1")));
            }
        }
        Ok(NormSpec { p, weights })
    }

    pub fn unweighted(p: f64) -> Self {
        NormSpec { p, weights: None }
    }

    /// Same weights, different exponent.
    pub fn with_p(&self, p: f64) -> Self {
        NormSpec { p, weights: self.weights.clone() }
    }
}

pub fn weighted_norm(seq: &[f64], spec: &NormSpec) -> Result<f64> {
    if let Some(w) = &spec.weights {
        if w.len() != seq.len() {
            return Err(Error::LengthMismatch { expected: seq.len(), found: w.len() });
        }
    }
    if spec.p.is_infinite() {
        return Ok(seq.iter().map(|f| f.abs()).fold(0.0, f64::max));
    }
    let p = spec.p;
    let sum: f64 = match &spec.weights {
        Some(w) => seq.iter().zip(w).map(|(f, w)| w * f.abs().powf(p)).sum(),
        None => seq.iter().map(|f| f.abs().powf(p)).sum(),
    };
    Ok(sum.powf(1.0 / p))
}

/// Unweighted p-norm.
pub fn norm(seq: &[f64], p: f64) -> f64 {
    weighted_norm(seq, &NormSpec::unweighted(p)).expect("unweighted norm has no length constraint")
}

/// Greedy selection of well-separated tall slits.
///
/// Repeatedly takes the tallest remaining slit (smallest index on ties) among
/// those outside every window `|u_n - u_m| <= h_m` of the slits chosen so far.
pub fn greedy_tilde(config: &SlitConfig) -> Vec<f64> {
    let n = config.len();
    let mut out = vec![0.0; n];
    let mut chosen: Vec<usize> = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if config.h[i] <= 0.0 || chosen.contains(&i) {
                continue;
            }
            if !chosen.iter().all(|&m| (config.u[i] - config.u[m]).abs() > config.h[m]) {
                continue;
            }
            if best.is_none_or(|b| config.h[i] > config.h[b]) {
                best = Some(i);
            }
        }
        match best {
            Some(i) => {
                out[i] = config.h[i];
                chosen.push(i);
            }
            None => break,
        }
    }
    out
}

/// Two-sided bounds on `Q0` from the greedy heights.
pub fn greedy_energy_bounds(config: &SlitConfig) -> (f64, f64) {
    let t = greedy_tilde(config);
    let s: f64 = t.iter().map(|x| x * x).sum();
    let pi = std::f64::consts::PI;
    (s / (pi * pi), 2.0 * 2f64.sqrt() / pi * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let c = SlitConfig::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(c.u_star(), 1.0);
        assert_eq!(
            SlitConfig::new(vec![0.0, 0.5, 0.2], vec![1.0; 3]),
            Err(Error::NonIncreasingPositions { index: 2 })
        );
        assert!(matches!(SlitConfig::new(vec![0.0], vec![-1.0]), Err(Error::NegativeHeight { index: 0, .. })));
        assert_eq!(SlitConfig::new(vec![], vec![]), Err(Error::EmptyConfig));
        assert!(SlitConfig::new(vec![0.0], vec![1.0]).unwrap().u_star().is_infinite());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(weighted_norm(&[3.0, 4.0], &NormSpec::new(2.0, Some(vec![1.0, 1.0])).unwrap()).unwrap(), 5.0);
        assert_eq!(norm(&[1.0, 1.0, 1.0], 1.0), 3.0);
        let inf = NormSpec::new(f64::INFINITY, Some(vec![7.0, 9.0])).unwrap();
        assert_eq!(weighted_norm(&[2.0, -5.0], &inf).unwrap(), 5.0);
        assert!(matches!(
            weighted_norm(&[1.0], &NormSpec::new(1.0, Some(vec![1.0, 1.0])).unwrap()),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(NormSpec::new(0.5, None).is_err());
        assert!(NormSpec::new(2.0, Some(vec![0.5])).is_err());
    }

    #[test]
    fn greedy_examples() {
        let c = SlitConfig::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(greedy_tilde(&c), vec![0.0, 2.0, 0.0]);
        let c = SlitConfig::new(vec![0.0, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert_eq!(greedy_tilde(&c), vec![0.0; 3]);
        assert_eq!(greedy_energy_bounds(&c), (0.0, 0.0));
        let c = SlitConfig::new(vec![0.0, 10.0, 20.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(greedy_tilde(&c), vec![1.0, 2.0, 3.0]);
        // ties go to the smallest index
        let c = SlitConfig::new(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(greedy_tilde(&c), vec![2.0, 0.0]);
    }

    #[test]
    fn single_slit_bounds() {
        let c = SlitConfig::new(vec![0.0], vec![1.0]).unwrap();
        let (lo, hi) = greedy_energy_bounds(&c);
        assert!((lo - 0.10132118364233778).abs() < 1e-15);
        assert!((hi - 0.9003163161571061).abs() < 1e-15);
    }
}
