//! All derived scalars of a solved instance, indexed by slit.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forward::CombSolution;
use crate::quasimomentum::Quasimomentum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityReport {
    pub l: Vec<f64>,
    #[serde(rename = "hComputed")]
    pub h_computed: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    /// `|mu^+|`; `mu^+` itself is positive.
    #[serde(rename = "muPlus")]
    pub mu_plus: Vec<f64>,
    /// `|mu^-|`; `mu^-` itself carries `muMinusSign`.
    #[serde(rename = "muMinus")]
    pub mu_minus: Vec<f64>,
    #[serde(rename = "muMinusSign")]
    pub mu_minus_sign: i8,
    pub nu: Vec<f64>,
    #[serde(rename = "Q0")]
    pub q0: f64,
    #[serde(rename = "ID")]
    pub id: f64,
    /// Induced charges `l / 4 pi`.
    pub e: Vec<f64>,
    /// Dipole moments `A / 4`.
    pub d: Vec<f64>,
    /// Shortest bounded band, counting empty slits as points; `None` for one slit.
    pub s: Option<f64>,
    #[serde(rename = "L")]
    pub big_l: Vec<f64>,
    /// Real-axis images `[z^-, z^+]` of every slit (a point for empty slits).
    pub images: Vec<(f64, f64)>,
}

/// `[z^-, z^+]` per slit, with `z(u_n)` on the band for empty slits.
pub fn slit_images(sol: &CombSolution, q: &Quasimomentum) -> Result<Vec<(f64, f64)>> {
    (0..sol.config.len())
        .map(|i| match sol.gap_of(i) {
            Some(g) => Ok((q.gaps()[g].lo, q.gaps()[g].hi)),
            None => q.band_point(sol.config.u[i]).map(|x| (x, x)),
        })
        .collect()
}

pub fn quantity_report(sol: &CombSolution) -> Result<QuantityReport> {
    let q = sol.quasimomentum()?;
    quantity_report_with(sol, &q)
}

pub fn quantity_report_with(sol: &CombSolution, q: &Quasimomentum) -> Result<QuantityReport> {
    let n = q.len();
    let mut per: Vec<Vec<f64>> = (0..7).map(|_| Vec::with_capacity(n)).collect();
    for g in 0..n {
        let gq = q.gap_quantities(g)?;
        per[0].push(q.gaps()[g].len());
        per[1].push(gq.h);
        per[2].push(gq.a);
        per[3].push(gq.mu_plus);
        per[4].push(-gq.mu_minus);
        per[5].push(gq.nu);
        per[6].push(gq.big_l);
    }
    let (q0, id) = q.q0_and_dirichlet()?;
    let spread = |v: &Vec<f64>| sol.spread(v);
    let l = spread(&per[0]);
    let a = spread(&per[2]);
    let images = slit_images(sol, q)?;
    let s = images.windows(2).map(|w| w[1].0 - w[0].1).reduce(f64::min);
    Ok(QuantityReport {
        e: l.iter().map(|x| x / (4.0 * std::f64::consts::PI)).collect(),
        d: a.iter().map(|x| x / 4.0).collect(),
        j: a.iter().map(|x| x.sqrt()).collect(),
        l,
        a,
        h_computed: spread(&per[1]),
        mu_plus: spread(&per[3]),
        mu_minus: spread(&per[4]),
        mu_minus_sign: -1,
        nu: spread(&per[5]),
        q0,
        id,
        s,
        big_l: spread(&per[6]),
        images,
    })
}
