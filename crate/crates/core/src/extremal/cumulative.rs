//! Cumulative multipole distributions.
//!
//! `𝔄_M = sum_{K <= M} sum_q |<𝔗_Kq>|^2` runs over the state multipoles and
//! starts at `K = 0`. `A_M = sum_{1/2 <= K <= M} sum_q |<T_Kq>|^2` runs over
//! the inverse multipoles and omits the constant `<T_00> = 1`, so it vanishes
//! exactly on the vacuum.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::basis::TensorIndex;
use crate::error::Result;
use crate::fock::DensityMatrix;
use crate::multipole::table::fmt_f64;
use crate::multipole::{inverse_multipole, state_multipole};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CumulativeBasis {
    /// State multipoles `<𝔗_Kq>`.
    Inverse,
    /// Inverse multipoles `<T_Kq>`.
    Direct,
}

impl fmt::Display for CumulativeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CumulativeBasis::Inverse => "inverse",
            CumulativeBasis::Direct => "direct",
        })
    }
}

/// Running sums indexed by `m2 = 2M`, nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulativeProfile {
    pub basis: CumulativeBasis,
    pub entries: Vec<(u32, f64)>,
}

impl CumulativeProfile {
    pub fn value_at(&self, m2: u32) -> Option<f64> {
        self.entries.iter().find(|(m, _)| *m == m2).map(|(_, v)| *v)
    }

    pub fn last(&self) -> f64 {
        self.entries.last().map_or(0.0, |(_, v)| *v)
    }

    pub fn is_monotone(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// Columns `m2,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m2", "value"])?;
        for (m2, v) in &self.entries {
            w.write_record([m2.to_string(), fmt_f64(*v)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `𝔗_K^2 = sum_q |<𝔗_Kq>|^2`.
pub fn multipole_norm_sq(rho: &DensityMatrix, k2: u32) -> f64 {
    TensorIndex::with_rank(k2).map(|i| state_multipole(rho, i).norm_sqr()).sum()
}

/// `sum_q |<T_Kq>|^2`, subject to the inverse-multipole truncation rule.
pub fn direct_norm_sq(rho: &DensityMatrix, k2: u32) -> Result<f64> {
    let mut acc = 0.0;
    for i in TensorIndex::with_rank(k2) {
        acc += inverse_multipole(rho, i).map_err(|e| e.at(i))?.norm_sqr();
    }
    Ok(acc)
}

/// `𝔄_M` for every `m2' <= m2`.
pub fn cumulative_inverse(rho: &DensityMatrix, m2: u32) -> CumulativeProfile {
    let mut acc = 0.0;
    let entries = (0..=m2)
        .map(|k2| {
            acc += multipole_norm_sq(rho, k2);
            (k2, acc)
        })
        .collect();
    CumulativeProfile {
        basis: CumulativeBasis::Inverse,
        entries,
    }
}

/// `𝔄_M` at the single order `m2`.
pub fn cumulative_inverse_value(rho: &DensityMatrix, m2: u32) -> f64 {
    (0..=m2).map(|k2| multipole_norm_sq(rho, k2)).sum()
}

/// `A_M` for every `m2' <= m2`; the `m2 = 0` entry is the empty sum.
pub fn cumulative_direct(rho: &DensityMatrix, m2: u32) -> Result<CumulativeProfile> {
    let mut acc = 0.0;
    let mut entries = vec![(0, 0.0)];
    for k2 in 1..=m2 {
        acc += direct_norm_sq(rho, k2)?;
        entries.push((k2, acc));
    }
    Ok(CumulativeProfile {
        basis: CumulativeBasis::Direct,
        entries,
    })
}

/// `A_M` at order `m2`, embedding `rho` first so the truncation rule holds.
pub fn cumulative_direct_value(rho: &DensityMatrix, m2: u32) -> f64 {
    let need = rho.support(crate::multipole::SUPPORT_EPS) + m2 as usize;
    let rho = if need > rho.cutoff() { rho.embed(need) } else { rho.clone() };
    cumulative_direct(&rho, m2).expect("cutoff covers the rule").last()
}
