use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::{inverse_multipole, inverse_multipole_weyl, state_multipole, state_multipole_weyl, SUPPORT_EPS};
use crate::basis::{inverse_matrix, monomial_matrix, TensorIndex};
use crate::error::{Error, Result};
use crate::fock::operator::{c, FockOperator, C64};
use crate::fock::DensityMatrix;

/// Which expectation values a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `<𝔗_Kq>`, the state multipoles.
    InverseNormal,
    /// `<T_Kq>`, the inverse multipoles.
    DirectNormal,
    /// `<𝔗^W_Kq>`.
    InverseWeyl,
    /// `<T^W_Kq>`.
    DirectWeyl,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::InverseNormal => "inverse",
            Basis::DirectNormal => "direct",
            Basis::InverseWeyl => "inverse-weyl",
            Basis::DirectWeyl => "direct-weyl",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" | "inverse-normal" => Ok(Basis::InverseNormal),
            "direct" | "direct-normal" => Ok(Basis::DirectNormal),
            "inverse-weyl" => Ok(Basis::InverseWeyl),
            "direct-weyl" => Ok(Basis::DirectWeyl),
            other => Err(Error::Parse {
                position: 0,
                message: format!("unknown basis '{other}'"),
            }),
        }
    }
}

/// Multipoles of one state for every label with `2K <= m2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleTable {
    pub basis: Basis,
    pub m2: u32,
    pub entries: BTreeMap<TensorIndex, C64>,
}

impl MultipoleTable {
    pub fn get(&self, idx: TensorIndex) -> C64 {
        self.entries.get(&idx).copied().unwrap_or(c(0.0))
    }

    /// `max |entry(K,-q) - conj(entry(K,q))|`.
    pub fn conjugation_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|(i, v)| (self.get(i.conj()) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .map(|&i| (self.get(i) - other.get(i)).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with header `k2,q2,re,im` (plus `abs` when requested), rows in
    /// ascending `(k2, q2)`.
    pub fn write_csv<W: Write>(&self, out: W, with_abs: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if with_abs {
            w.write_record(["k2", "q2", "re", "im", "abs"])?;
        } else {
            w.write_record(["k2", "q2", "re", "im"])?;
        }
        for (i, v) in &self.entries {
            let mut rec = vec![i.k2.to_string(), i.q2.to_string(), fmt_f64(v.re), fmt_f64(v.im)];
            if with_abs {
                rec.push(fmt_f64(v.norm()));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout produced by [`Self::write_csv`]; an `abs` column is ignored.
    pub fn read_csv<R: Read>(input: R, basis: Basis) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut entries = BTreeMap::new();
        let mut m2 = 0;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |k: usize| -> Result<&str> {
                rec.get(k).ok_or_else(|| Error::Parse {
                    position: line + 2,
                    message: format!("missing column {k}"),
                })
            };
            let parse_err = |e: String| Error::Parse {
                position: line + 2,
                message: e,
            };
            let k2: u32 = field(0)?.trim().parse().map_err(|e| parse_err(format!("k2: {e}")))?;
            let q2: i32 = field(1)?.trim().parse().map_err(|e| parse_err(format!("q2: {e}")))?;
            let re: f64 = field(2)?.trim().parse().map_err(|e| parse_err(format!("re: {e}")))?;
            let im: f64 = field(3)?.trim().parse().map_err(|e| parse_err(format!("im: {e}")))?;
            let idx = TensorIndex::new(k2, q2)?;
            m2 = m2.max(k2);
            entries.insert(idx, C64::new(re, im));
        }
        Ok(Self { basis, m2, entries })
    }
}

/// Shortest representation that round-trips exactly.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn entry(rho: &DensityMatrix, idx: TensorIndex, basis: Basis) -> Result<C64> {
    match basis {
        Basis::InverseNormal => Ok(state_multipole(rho, idx)),
        Basis::InverseWeyl => Ok(state_multipole_weyl(rho, idx)),
        Basis::DirectNormal => inverse_multipole(rho, idx),
        Basis::DirectWeyl => inverse_multipole_weyl(rho, idx),
    }
}

/// All multipoles of `rho` with `2K <= m2`. Truncation errors name the
/// offending label.
pub fn multipole_table(rho: &DensityMatrix, m2: u32, basis: Basis) -> Result<MultipoleTable> {
    let idx: Vec<TensorIndex> = TensorIndex::all_upto(m2).collect();
    let values: Vec<Result<C64>> = idx.par_iter().map(|&i| entry(rho, i, basis).map_err(|e| e.at(i))).collect();
    let mut entries = BTreeMap::new();
    for (i, v) in idx.into_iter().zip(values) {
        entries.insert(i, v?);
    }
    Ok(MultipoleTable { basis, m2, entries })
}

/// `sum_{Kq} <𝔗_Kq> T_Kq` on `span{|0>, ..., |N>}`; exact for states
/// supported within the cutoff once `m2 >= 2N`.
pub fn reconstruct(table: &MultipoleTable, cutoff: usize) -> Result<FockOperator> {
    if table.basis != Basis::InverseNormal {
        return Err(Error::Unsupported(format!("reconstruction from a {} table", table.basis)));
    }
    let mut out = FockOperator::zeros(cutoff);
    for (&i, &v) in &table.entries {
        if v != c(0.0) {
            out = &out + &monomial_matrix(i, cutoff).scale(v);
        }
    }
    Ok(out)
}

/// Partial purity sum `sum_{2K <= m2} <𝔗_Kq> <T_Kq>`. The state is first
/// embedded at a cutoff large enough for every inverse multipole.
pub fn purity_from_multipoles(rho: &DensityMatrix, m2: u32) -> C64 {
    let need = rho.support(SUPPORT_EPS) + m2 as usize;
    let work = if need > rho.cutoff() { rho.embed(need) } else { rho.clone() };
    TensorIndex::all_upto(m2)
        .map(|i| state_multipole(&work, i) * inverse_multipole(&work, i).expect("cutoff enlarged"))
        .sum()
}

/// Coefficients of `F` in the monomial basis: `F = sum <𝔗_Kq, F> T_Kq`
/// with `<𝔗_Kq, F> = Tr(𝔗_Kq F)`.
pub fn expand_operator(f: &FockOperator, m2: u32) -> MultipoleTable {
    let n = f.cutoff();
    let entries = TensorIndex::all_upto(m2)
        .map(|i| {
            let reach = i.reach().max(n);
            let x = if reach > n { f.embed(reach) } else { f.clone() };
            (i, inverse_matrix(i, reach).trace_product(&x))
        })
        .collect();
    MultipoleTable {
        basis: Basis::InverseNormal,
        m2,
        entries,
    }
}
