//! The two-mode operator `sum_{K <= M, q} 𝔗_Kq ⊗ 𝔗_{K,-q}` whose expectation
//! in a duplicated state `rho ⊗ rho` is `𝔄_M(rho)`, and its spectrum.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::basis::normal::inverse_entry;
use crate::basis::TensorIndex;
use crate::error::{Error, Result};
use crate::fock::operator::{c, FockOperator};
use crate::fock::{eigensolve_matrix, DensityMatrix};
use crate::multipole::table::fmt_f64;

/// Swap expectations within this distance of `±1` classify an eigenvector.
pub const SWAP_CLASS_TOL: f64 = 1e-6;
/// Eigenvalues closer than this form one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct JointOperator {
    pub m2: u32,
    op: FockOperator,
}

impl JointOperator {
    pub fn cutoff(&self) -> usize {
        self.op.cutoff()
    }

    pub fn op(&self) -> &FockOperator {
        &self.op
    }

    /// `max |A - A^T|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.op.hermiticity_defect()
    }

    /// `Tr((rho ⊗ rho) A)`.
    pub fn duplicated_expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.cutoff() != self.cutoff() {
            return Err(Error::CutoffMismatch(rho.cutoff(), self.cutoff()));
        }
        let d = self.cutoff() + 1;
        let m = self.op.matrix();
        let mut acc = c(0.0);
        for r1 in 0..d {
            for r2 in 0..d {
                for c1 in 0..d {
                    for c2 in 0..d {
                        let a = m[(r1 * d + r2, c1 * d + c2)];
                        if a != c(0.0) {
                            acc += a * rho.get(c1, r1) * rho.get(c2, r2);
                        }
                    }
                }
            }
        }
        Ok(acc.re)
    }
}

/// Nonzero entries `(row, col, value)` of `𝔗_Kq`.
fn stripe_entries(idx: TensorIndex) -> Vec<(usize, usize, f64)> {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let off = pos.offset();
    (off..=pos.reach())
        .map(|n| {
            let v = inverse_entry(pos, n);
            if idx.q2 >= 0 {
                (n - off, n, v)
            } else {
                (n, n - off, v)
            }
        })
        .filter(|e| e.2 != 0.0)
        .collect()
}

/// Builds the joint operator on `(N+1)^2` dimensions. Requires `N >= 2M`, which
/// holds every stripe entry of `𝔗_Kq`, `K <= M`.
pub fn build_joint_operator(m2: u32, cutoff: usize) -> Result<JointOperator> {
    if cutoff < m2 as usize {
        return Err(Error::truncation(format!("joint operator of order m2 = {m2}"), m2 as usize, cutoff));
    }
    let d = cutoff + 1;
    let mut a = DMatrix::<f64>::zeros(d * d, d * d);
    for idx in TensorIndex::all_upto(m2) {
        let left = stripe_entries(idx);
        let right = stripe_entries(idx.conj());
        for &(r1, c1, v1) in &left {
            for &(r2, c2, v2) in &right {
                a[(r1 * d + r2, c1 * d + c2)] += v1 * v2;
            }
        }
    }
    Ok(JointOperator {
        m2,
        op: FockOperator::with_modes(cutoff, 2, a.map(c))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SwapClass {
    Symmetric,
    Antisymmetric,
    Mixed,
}

impl fmt::Display for SwapClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapClass::Symmetric => "symmetric",
            SwapClass::Antisymmetric => "antisymmetric",
            SwapClass::Mixed => "mixed",
        })
    }
}

#[derive(Clone, Debug)]
pub struct JointEigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `<v|S|v>` for the swap `S|n1 n2> = |n2 n1>`.
    pub swap: f64,
    pub class: SwapClass,
}

#[derive(Clone, Debug)]
pub struct JointSpectrum {
    pub m2: u32,
    pub cutoff: usize,
    /// Ordered by decreasing `|lambda|`.
    pub pairs: Vec<JointEigenpair>,
    /// `|<v_min|(|01> - |10>)/sqrt2>|^2` for the most negative eigenvalue.
    pub antisymmetric_overlap: f64,
    /// `lambda` of the eigenvector with the largest `|<00|v>|^2`, over the
    /// largest eigenvalue among symmetric eigenvectors other than that one.
    pub vacuum_ratio: f64,
    /// `|<11|v>|^2` for that largest symmetric eigenvector.
    pub one_one_overlap: f64,
}

fn swap_apply(v: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = v[i * d + j];
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn classify(swap: f64) -> SwapClass {
    if (swap - 1.0).abs() < SWAP_CLASS_TOL {
        SwapClass::Symmetric
    } else if (swap + 1.0).abs() < SWAP_CLASS_TOL {
        SwapClass::Antisymmetric
    } else {
        SwapClass::Mixed
    }
}

/// Rotates each degenerate cluster so its vectors diagonalize the swap.
fn resolve_clusters(values: &[f64], vectors: &mut [Vec<f64>], d: usize) -> Result<()> {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[end - 1]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let k = end - start;
            let swapped: Vec<Vec<f64>> = vectors[start..end].iter().map(|v| swap_apply(v, d)).collect();
            let s = DMatrix::from_fn(k, k, |i, j| c(dot(&vectors[start + i], &swapped[j])));
            let eig = eigensolve_matrix(&s)?;
            let rotated: Vec<Vec<f64>> = (0..k)
                .map(|col| {
                    let mut v = vec![0.0; d * d];
                    for (i, src) in vectors[start..end].iter().enumerate() {
                        let w = eig.vectors[(i, col)].re;
                        for (x, y) in v.iter_mut().zip(src) {
                            *x += w * y;
                        }
                    }
                    v
                })
                .collect();
            for (slot, v) in vectors[start..end].iter_mut().zip(rotated) {
                *slot = v;
            }
        }
        start = end;
    }
    Ok(())
}

/// Full diagonalization of the joint operator at order `m2`; keeps the `top`
/// eigenpairs of largest magnitude.
pub fn eigenanalysis(m2: u32, cutoff: usize, top: usize) -> Result<JointSpectrum> {
    let joint = build_joint_operator(m2, cutoff)?;
    let d = cutoff + 1;
    let eig = eigensolve_matrix(joint.op.matrix())?;
    let values = eig.values.clone();
    let mut vectors: Vec<Vec<f64>> = (0..eig.dim).map(|j| eig.vectors.column(j).iter().map(|z| z.re).collect()).collect();
    resolve_clusters(&values, &mut vectors, d)?;

    let mut all: Vec<JointEigenpair> = values
        .into_iter()
        .zip(vectors)
        .map(|(value, vector)| {
            let swap = dot(&vector, &swap_apply(&vector, d));
            JointEigenpair {
                value,
                vector,
                swap,
                class: classify(swap),
            }
        })
        .collect();
    all.sort_by(|a, b| b.value.abs().total_cmp(&a.value.abs()));

    let at = |v: &[f64], i: usize, j: usize| v[i * d + j];
    let most_negative = all.iter().min_by(|a, b| a.value.total_cmp(&b.value)).expect("nonempty");
    let antisymmetric_overlap = if cutoff >= 1 {
        ((at(&most_negative.vector, 0, 1) - at(&most_negative.vector, 1, 0)) * std::f64::consts::FRAC_1_SQRT_2).powi(2)
    } else {
        0.0
    };

    let vacuum_like = (0..all.len())
        .max_by(|&a, &b| at(&all[a].vector, 0, 0).powi(2).total_cmp(&at(&all[b].vector, 0, 0).powi(2)))
        .expect("nonempty");
    let best_symmetric = (0..all.len())
        .filter(|&i| i != vacuum_like && all[i].class == SwapClass::Symmetric)
        .max_by(|&a, &b| all[a].value.total_cmp(&all[b].value));
    let (vacuum_ratio, one_one_overlap) = match best_symmetric {
        Some(i) if cutoff >= 1 => (all[vacuum_like].value / all[i].value, at(&all[i].vector, 1, 1).powi(2)),
        _ => (f64::NAN, f64::NAN),
    };

    all.truncate(top);
    Ok(JointSpectrum {
        m2,
        cutoff,
        pairs: all,
        antisymmetric_overlap,
        vacuum_ratio,
        one_one_overlap,
    })
}

/// Columns `M,lambda_rank,lambda,class`, with `M = m2 / 2` printed as a decimal.
pub fn write_spectra_csv<W: Write>(spectra: &[JointSpectrum], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "lambda_rank", "lambda", "class"])?;
    for s in spectra {
        let m = (s.m2 as f64 / 2.0).to_string();
        for (rank, p) in s.pairs.iter().enumerate() {
            w.write_record([m.clone(), rank.to_string(), fmt_f64(p.value), p.class.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
