//! Products of inverse operators and displacement covariance of both families.

use super::index::TensorIndex;
use super::normal::{inverse_entry, inverse_matrix, monomial_matrix};
use crate::fock::operator::{build_displacement, c, FockOperator, C64};
use crate::special::{binomial, inv_factorial, sign};

/// `𝔗_Kq 𝔗_K'q' = sum_K'' f_K'' 𝔗_{K'', q+q'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureExpansion {
    /// `2(q + q')`.
    pub q2: i32,
    /// `(2K'', f_K'')`, descending in `K''`. Empty for a vanishing product.
    pub terms: Vec<(u32, f64)>,
    /// `true` when the stripe balancing left a residual and the
    /// coefficients were taken from the dual projection `Tr(P T_K''q'')`.
    pub projected: bool,
}

impl StructureExpansion {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn reconstruct(&self, cutoff: usize) -> FockOperator {
        let mut out = FockOperator::zeros(cutoff);
        for &(k2, f) in &self.terms {
            let idx = TensorIndex { k2, q2: self.q2 };
            out = &out + &inverse_matrix(idx, cutoff).scale(c(f));
        }
        out
    }

    pub fn coefficient(&self, k2: u32) -> f64 {
        self.terms.iter().find(|t| t.0 == k2).map_or(0.0, |t| t.1)
    }
}

/// Smallest cutoff that holds both factors and their product exactly.
pub fn product_cutoff(a: TensorIndex, b: TensorIndex) -> usize {
    a.reach().max(b.reach())
}

/// `q, q' >= 0` and `2q > K' - q'`: the product vanishes identically.
pub fn vanishes_by_rule(a: TensorIndex, b: TensorIndex) -> bool {
    a.q2 >= 0 && b.q2 >= 0 && (a.q2 as i64) > b.minus() as i64
}

/// Closed-form leading constant for `q, q' >= 0` outside the vanishing regime:
/// `K''max = min(K + q', K' - q)` and
/// `f = (-1)^{K+K'+q-q'} / ((K''max + q - q')! (K' - q - K''max)! (K + q' - K''max)!)`.
pub fn top_structure_constant(a: TensorIndex, b: TensorIndex) -> Option<(u32, f64)> {
    if a.q2 < 0 || b.q2 < 0 || vanishes_by_rule(a, b) {
        return None;
    }
    let (k2, q2, kp2, qp2) = (a.k2 as i64, a.q2 as i64, b.k2 as i64, b.q2 as i64);
    let kmax2 = (k2 + qp2).min(kp2 - q2);
    let s = sign((k2 + kp2 + q2 - qp2) / 2);
    let d1 = (kmax2 + q2 - qp2) / 2;
    let d2 = (kp2 - q2 - kmax2) / 2;
    let d3 = (k2 + qp2 - kmax2) / 2;
    if d1 < 0 {
        return None;
    }
    let f = s * inv_factorial(d1 as usize) * inv_factorial(d2 as usize) * inv_factorial(d3 as usize);
    Some((kmax2 as u32, f))
}

/// Structure constants of `𝔗_Kq 𝔗_K'q'` for every sign combination.
///
/// The product matrix is balanced stripe entry by stripe entry from the top:
/// the entry at larger photon number `n` is reached only by `𝔗_{K'',q''}`
/// with `K'' + |q''| >= n`, and `𝔗_{n-|q''|,q''}` has its nonzero pivot
/// `1/sqrt(n! (n-2|q''|)!)` there. If the balance leaves a residual above
/// `1e-10` (relative), the coefficients are recomputed by the dual
/// projection `f = Tr(P T_{K'',q''})`.
pub fn product_expansion(a: TensorIndex, b: TensorIndex) -> StructureExpansion {
    let q2 = a.q2 + b.q2;
    if vanishes_by_rule(a, b) {
        return StructureExpansion {
            q2,
            terms: Vec::new(),
            projected: false,
        };
    }
    let cutoff = product_cutoff(a, b);
    let prod = &inverse_matrix(a, cutoff) * &inverse_matrix(b, cutoff);
    let off = q2.unsigned_abs() as usize;
    let stripe = |n: usize| -> f64 {
        if q2 >= 0 {
            prod.get(n - off, n).re
        } else {
            prod.get(n, n - off).re
        }
    };
    let mut residual: Vec<f64> = (0..=cutoff).map(|n| if n >= off { stripe(n) } else { 0.0 }).collect();
    let scale = residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut raw = Vec::new();
    for n in (off..=cutoff).rev() {
        let r = residual[n];
        if r == 0.0 {
            continue;
        }
        let k2 = (2 * n - off) as u32;
        let pos = TensorIndex { k2, q2: off as i32 };
        let f = r / inverse_entry(pos, n);
        for (m, slot) in residual.iter_mut().enumerate().take(n + 1).skip(off) {
            *slot -= f * inverse_entry(pos, m);
        }
        residual[n] = 0.0;
        raw.push((k2, f));
    }
    let fmax = raw.iter().fold(0.0f64, |m, t| m.max(t.1.abs()));
    let terms: Vec<(u32, f64)> = raw.into_iter().filter(|t| t.1.abs() > 1e-14 * fmax.max(1.0)).collect();
    let mut exp = StructureExpansion {
        q2,
        terms,
        projected: false,
    };
    let err = exp.reconstruct(cutoff).max_abs_diff(&prod);
    if err > 1e-10 * scale.max(1.0) {
        exp.terms = project_onto_inverse(&prod, q2, cutoff);
        exp.projected = true;
    }
    exp
}

fn project_onto_inverse(prod: &FockOperator, q2: i32, cutoff: usize) -> Vec<(u32, f64)> {
    let off = q2.unsigned_abs() as usize;
    let mut out = Vec::new();
    for n in (off..=cutoff).rev() {
        let idx = TensorIndex {
            k2: (2 * n - off) as u32,
            q2,
        };
        let f = prod.trace_product(&monomial_matrix(idx, cutoff)).re;
        if f != 0.0 {
            out.push((idx.k2, f));
        }
    }
    out
}

/// One term `coeff * X_{index}` of an expansion in `T` or `𝔗`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub index: TensorIndex,
    pub coeff: C64,
}

/// `D(α) T_Kq D(α)^dagger = sum_{S <= K, l} C(K+q, S+l) C(K-q, S-l)
/// (-α*)^{K+q-S-l} (-α)^{K-q-S+l} T_Sl`.
pub fn displaced_monomial_expansion(alpha: C64, idx: TensorIndex) -> Vec<ExpansionTerm> {
    let (p, m) = (idx.plus() as i64, idx.minus() as i64);
    let mut out = Vec::new();
    for sub in TensorIndex::all_upto(idx.k2) {
        let (sp, sm) = (sub.plus() as i64, sub.minus() as i64);
        if sp > p || sm > m {
            continue;
        }
        let coeff = (-alpha.conj()).powu((p - sp) as u32) * (-alpha).powu((m - sm) as u32) * binomial(p, sp) * binomial(m, sm);
        if coeff != c(0.0) {
            out.push(ExpansionTerm { index: sub, coeff });
        }
    }
    out
}

/// Partial sum over `2S <= s2max` of
/// `D(α) 𝔗_Kq D(α)^dagger = sum_{S, l} α^{S-l} α*^{S+l} C(K+S+q+l, K+q) C(K+S-q-l, K-q) 𝔗_{K+S, q+l}`.
pub fn displaced_inverse_expansion(alpha: C64, idx: TensorIndex, s2max: u32) -> Vec<ExpansionTerm> {
    let (p, m) = (idx.plus() as i64, idx.minus() as i64);
    let mut out = Vec::new();
    for s in TensorIndex::all_upto(s2max) {
        let (sp, sm) = (s.plus() as i64, s.minus() as i64);
        let coeff = alpha.powu(sm as u32) * alpha.conj().powu(sp as u32) * binomial(p + sp, p) * binomial(m + sm, m);
        out.push(ExpansionTerm {
            index: TensorIndex {
                k2: idx.k2 + s.k2,
                q2: idx.q2 + s.q2,
            },
            coeff,
        });
    }
    out
}

/// `sum coeff * build(index)` on the given cutoff.
pub fn sum_expansion(terms: &[ExpansionTerm], cutoff: usize, build: impl Fn(TensorIndex, usize) -> FockOperator) -> FockOperator {
    let mut out = FockOperator::zeros(cutoff);
    for t in terms {
        out = &out + &build(t.index, cutoff).scale(t.coeff);
    }
    out
}

/// `D(α) X D(α)^dagger` restricted to `span{|0>, ..., |block>}`, computed
/// at cutoff `work`. Exact on the block when `X` is supported within `work`.
pub fn conjugate_by_displacement(alpha: C64, x: &FockOperator, block: usize) -> FockOperator {
    let d = build_displacement(alpha, x.cutoff());
    (&(&d * x) * &d.adjoint()).truncate(block)
}
