//! Normally ordered monomials `T_Kq = a^dagger^{K+q} a^{K-q}` and their
//! trace-dual inverse operators `𝔗_Kq`, which satisfy
//! `Tr(𝔗_Kq T_K'q') = δ_KK' δ_qq'`.
//!
//! Both families live on a single stripe of the Fock matrix: `T_Kq` raises
//! the photon number by `2q`, `𝔗_Kq` lowers it by `2q`. Only `q >= 0` is
//! constructed directly; `q < 0` is always the transpose (all entries are
//! real, so transpose and adjoint agree).

use super::index::TensorIndex;
use crate::error::{Error, Result};
use crate::fock::operator::{c, FockOperator};
use crate::special::{hyp2f1_terminating, inv_factorial, inv_sqrt_factorial, sign};

fn transpose_if_negative(op: FockOperator, idx: TensorIndex) -> FockOperator {
    if idx.q2 < 0 {
        op.adjoint()
    } else {
        op
    }
}

/// `<n + 2q| T_Kq |n> = sqrt(n! (n+2q)!) / (n - K + q)!` for `q >= 0`, zero
/// when `n < K - q`.
pub fn monomial_entry(idx: TensorIndex, n: usize) -> f64 {
    let minus = idx.minus() as usize;
    let plus = idx.plus() as usize;
    if n < minus {
        return 0.0;
    }
    let base = n - minus;
    // prod_{j=base+1}^{n} sqrt(j) * prod_{j=base+1}^{base+plus} sqrt(j)
    let mut v = 1.0;
    for j in base + 1..=n {
        v *= (j as f64).sqrt();
    }
    for j in base + 1..=base + plus {
        v *= (j as f64).sqrt();
    }
    v
}

/// Matrix of `T_Kq` restricted to `span{|0>, ..., |N>}`. Entries whose row
/// would exceed `N` are dropped.
pub fn monomial_matrix(idx: TensorIndex, cutoff: usize) -> FockOperator {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let off = pos.offset();
    let mut op = FockOperator::zeros(cutoff);
    for n in 0..=cutoff {
        if n + off > cutoff {
            break;
        }
        let v = monomial_entry(pos, n);
        if v != 0.0 {
            op.set(n + off, n, c(v));
        }
    }
    transpose_if_negative(op, idx)
}

/// Entry `<n - 2q| 𝔗_Kq |n>` for `q >= 0`:
/// `(-1)^{K+q+n} / (sqrt(n! (n-2q)!) (K+q-n)!)` for `2q <= n <= K+q`.
pub fn inverse_entry(idx: TensorIndex, n: usize) -> f64 {
    let off = idx.offset();
    let plus = idx.plus() as usize;
    if n < off || n > plus {
        return 0.0;
    }
    sign((plus + n) as i64) * inv_sqrt_factorial(n) * inv_sqrt_factorial(n - off) * inv_factorial(plus - n)
}

/// Matrix of `𝔗_Kq` on `span{|0>, ..., |N>}`; exact when `N >= K + |q|`.
pub fn inverse_matrix(idx: TensorIndex, cutoff: usize) -> FockOperator {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let off = pos.offset();
    let mut op = FockOperator::zeros(cutoff);
    for n in off..=pos.reach().min(cutoff) {
        op.set(n - off, n, c(inverse_entry(pos, n)));
    }
    transpose_if_negative(op, idx)
}

/// Nonzero pattern of `𝔗_Kq`: entries `(row, col)` with `col - row = -2q`
/// and `row + col` running over `|2q|, |2q| + 2, ..., 2K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StripePattern {
    /// `col - row`, i.e. `2q`.
    pub diagonal_offset: i32,
    pub antidiagonal_min: u32,
    pub antidiagonal_max: u32,
}

impl StripePattern {
    pub fn contains(&self, row: usize, col: usize) -> bool {
        let d = col as i64 - row as i64;
        let s = (row + col) as i64;
        d == self.diagonal_offset as i64
            && s >= self.antidiagonal_min as i64
            && s <= self.antidiagonal_max as i64
            && (s - self.antidiagonal_min as i64) % 2 == 0
    }

    /// All positions in the pattern, in increasing `row + col`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut s = self.antidiagonal_min as i64;
        while s <= self.antidiagonal_max as i64 {
            let row = (s - self.diagonal_offset as i64) / 2;
            let col = (s + self.diagonal_offset as i64) / 2;
            out.push((row as usize, col as usize));
            s += 2;
        }
        out
    }
}

pub fn support_pattern(idx: TensorIndex) -> StripePattern {
    StripePattern {
        diagonal_offset: idx.q2,
        antidiagonal_min: idx.q2.unsigned_abs(),
        antidiagonal_max: idx.k2,
    }
}

/// Outcome of an orthonormality sweep.
#[derive(Clone, Debug)]
pub struct OrthonormalityReport {
    pub max_deviation: f64,
    /// Pair attaining the maximum.
    pub worst: (TensorIndex, TensorIndex),
    pub pairs: usize,
}

/// `max |Tr(𝔗_Kq T_K'q') - δ_KK' δ_qq'|` over all labels with `2K, 2K' <= k2max`.
///
/// Requires `N >= 2 k2max`, i.e. `N >= (K+|q|) + (K'+|q'|)` for every pair.
pub fn verify_orthonormality(k2max: u32, cutoff: usize) -> Result<OrthonormalityReport> {
    let required = 2 * k2max as usize;
    if cutoff < required {
        return Err(Error::truncation("orthonormality sweep", required, cutoff));
    }
    let idx: Vec<TensorIndex> = TensorIndex::all_upto(k2max).collect();
    let inv: Vec<FockOperator> = idx.iter().map(|&i| inverse_matrix(i, cutoff)).collect();
    let mono: Vec<FockOperator> = idx.iter().map(|&i| monomial_matrix(i, cutoff)).collect();
    let mut report = OrthonormalityReport {
        max_deviation: 0.0,
        worst: (idx[0], idx[0]),
        pairs: 0,
    };
    for (i, a) in idx.iter().enumerate() {
        for (j, b) in idx.iter().enumerate() {
            let t = inv[i].trace_product(&mono[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (t - c(target)).norm();
            report.pairs += 1;
            if dev > report.max_deviation {
                report.max_deviation = dev;
                report.worst = (*a, *b);
            }
        }
    }
    Ok(report)
}

/// Closed form of `Tr(𝔗_Kq 𝔗_K'q')`:
/// `δ_{q,-q'} (-1)^{K+K'+2|q|} 2F1(|q|-K, |q|-K'; 2|q|+1; 1) / ((2|q|)! (K-|q|)! (K'-|q|)!)`.
pub fn inverse_trace_overlap(a: TensorIndex, b: TensorIndex) -> f64 {
    if a.q2 != -b.q2 {
        return 0.0;
    }
    let qa = a.q2.unsigned_abs() as i64; // 2|q|
    let ka = (a.k2 as i64 - qa) / 2; // K - |q|
    let kb = (b.k2 as i64 - qa) / 2; // K' - |q|
    let s = sign((a.k2 as i64 + b.k2 as i64) / 2 + qa);
    let f = hyp2f1_terminating(-ka as f64, -kb, (qa + 1) as f64, 1.0).expect("c >= 1 has no pole");
    s * f * inv_factorial(qa as usize) * inv_factorial(ka as usize) * inv_factorial(kb as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::{build_annihilation, build_creation, build_number};
    use approx::assert_abs_diff_eq;

    fn idx(k2: u32, q2: i32) -> TensorIndex {
        TensorIndex::new(k2, q2).unwrap()
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(monomial_matrix(idx(0, 0), 5), FockOperator::identity(5));
        assert!(monomial_matrix(idx(2, 0), 6).max_abs_diff(&build_number(6)) < 1e-15);
        assert!(monomial_matrix(idx(1, 1), 3).max_abs_diff(&build_creation(3)) < 1e-15);
        assert!(monomial_matrix(idx(1, -1), 3).max_abs_diff(&build_annihilation(3)) < 1e-15);
    }

    #[test]
    fn monomial_matches_operator_powers() {
        // a^dagger^p a^m computed at a larger cutoff is exact on the low block.
        let big = 20;
        let a = build_annihilation(big);
        let ad = build_creation(big);
        for i in TensorIndex::all_upto(6) {
            let prod = &ad.powi(i.plus()) * &a.powi(i.minus());
            let want = prod.truncate(8);
            assert!(monomial_matrix(i, 8).max_abs_diff(&want) < 1e-9 * want.max_abs().max(1.0), "{i}");
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_matrix(idx(0, 0), 3), FockOperator::dyad(3, 0, 0));
        assert_eq!(inverse_matrix(idx(1, 1), 3), FockOperator::dyad(3, 0, 1));
        let want = &FockOperator::dyad(3, 1, 1) - &FockOperator::dyad(3, 0, 0);
        assert_eq!(inverse_matrix(idx(2, 0), 3), want);
    }

    #[test]
    fn orthonormality_small() {
        let r = verify_orthonormality(2, 10).unwrap();
        assert!(r.max_deviation < 1e-12, "{r:?}");
        let t = inverse_matrix(idx(2, 0), 4).trace_product(&monomial_matrix(idx(0, 0), 4));
        assert_eq!(t, c(0.0));
        let t = inverse_matrix(idx(1, 1), 4).trace_product(&monomial_matrix(idx(1, 1), 4));
        assert_eq!(t, c(1.0));
        assert!(matches!(verify_orthonormality(3, 5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn trace_overlap_examples() {
        assert_abs_diff_eq!(inverse_trace_overlap(idx(2, 0), idx(2, 0)), 2.0);
        assert_eq!(inverse_trace_overlap(idx(1, 1), idx(1, 1)), 0.0);
        assert_abs_diff_eq!(inverse_trace_overlap(idx(0, 0), idx(0, 0)), 1.0);
    }

    #[test]
    fn trace_overlap_matches_matrices() {
        for a in TensorIndex::all_upto(8) {
            for b in TensorIndex::all_upto(8) {
                let n = a.reach().max(b.reach());
                let m = inverse_matrix(a, n).trace_product(&inverse_matrix(b, n));
                let cf = inverse_trace_overlap(a, b);
                assert!((m.re - cf).abs() < 1e-13 && m.im == 0.0, "{a} {b}: {m} vs {cf}");
            }
        }
    }

    #[test]
    fn support_examples() {
        let p = support_pattern(idx(2, 0));
        assert_eq!(p.positions(), vec![(0, 0), (1, 1)]);
        let p = support_pattern(idx(1, 1));
        assert_eq!(p.positions(), vec![(0, 1)]);
    }

    #[test]
    fn support_matches_matrix_exactly() {
        for i in TensorIndex::all_upto(12) {
            let n = i.reach() + 2;
            let m = inverse_matrix(i, n);
            let p = support_pattern(i);
            for r in 0..=n {
                for col in 0..=n {
                    assert_eq!(m.get(r, col) != c(0.0), p.contains(r, col), "{i} at ({r},{col})");
                    if p.contains(r, col) {
                        assert!(r + col <= i.k2 as usize);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_of_inverse_is_delta() {
        for i in TensorIndex::all_upto(12) {
            let t = inverse_matrix(i, i.reach()).trace();
            let want = if i.k2 == 0 { 1.0 } else { 0.0 };
            assert!((t.re - want).abs() < 1e-14, "{i}: {t}");
        }
    }
}
