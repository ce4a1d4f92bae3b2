//! Symmetrically ordered monomials `T^W_Kq` and their trace-dual inverse
//! operators `𝔗^W_Kq`.
//!
//! `T^W_Kq = sum_n w_n T_{K-n,q}` with `w_0 = 1`, so the change of basis is
//! unit lower triangular in `K` at fixed `q`. The dual family has infinite
//! Fock support; its diagonal stripe alternates in sign and grows
//! polynomially, so traces pairing it with monomials are evaluated as Abel
//! sums.

use super::index::TensorIndex;
use super::normal::{inverse_entry, monomial_matrix};
use crate::error::{Error, Result};
use crate::fock::operator::{c, FockOperator};
use crate::special::{binomial, fact, hyp2f1_terminating, inv_factorial, ln_factorial, sign};

/// Coefficient `(K+q)! (K-q)! / (2^n n! (K+q-n)! (K-q-n)!)` of `T_{K-n,q}` in `T^W_Kq`.
pub fn weyl_coefficient(idx: TensorIndex, n: u32) -> f64 {
    let p = idx.plus() as i64;
    let m = idx.minus() as i64;
    let n = n as i64;
    if n > p.min(m) {
        return 0.0;
    }
    binomial(p, n) * binomial(m, n) * fact(n as usize) / 2f64.powi(n as i32)
}

/// `(W^{-1})_{K+n, K}` at fixed `q`:
/// `(-1)^n (K+n+q)! (K+n-q)! / (2^n n! (K+q)! (K-q)!)`.
pub fn weyl_inverse_coefficient(idx: TensorIndex, n: u32) -> f64 {
    let p = idx.plus();
    let m = idx.minus();
    let ln = ln_factorial(p + n) + ln_factorial(m + n)
        - ln_factorial(n)
        - ln_factorial(p)
        - ln_factorial(m)
        - n as f64 * std::f64::consts::LN_2;
    sign(n as i64) * ln.exp()
}

/// Matrix of `T^W_Kq` on `span{|0>, ..., |N>}`.
pub fn monomial_weyl_matrix(idx: TensorIndex, cutoff: usize) -> FockOperator {
    let top = idx.plus().min(idx.minus());
    let mut out = monomial_matrix(idx, cutoff);
    for n in 1..=top {
        let lower = idx.lowered(n).expect("n <= min(K+q, K-q)");
        out = &out + &monomial_matrix(lower, cutoff).scale(c(weyl_coefficient(idx, n)));
    }
    out
}

/// Entry `<n - 2q| 𝔗^W_Kq |n>` for `q >= 0`, with `m = n - 2q`:
/// `(-1)^{K+3q} 2^{K+q+1} sqrt(n!/m!) / (K-q)! * 2F1~(K+q+1, -m; 2q+1; 2)`.
///
/// The regularized hypergeometric factor is rewritten with the Pfaff
/// transformation as `(-1)^m 2F1(q-K, -m; 2q+1; 2) / (2q)!`, a sum of at
/// most `K - q + 1` terms.
pub fn inverse_weyl_entry(idx: TensorIndex, n: usize) -> f64 {
    let off = idx.offset();
    if n < off {
        return 0.0;
    }
    let m = n - off;
    let plus = idx.plus() as i64;
    let minus = idx.minus() as i64;
    let q2 = idx.q2 as i64;
    let mut ratio = 1.0; // sqrt(n!/m!)
    for j in m + 1..=n {
        ratio *= (j as f64).sqrt();
    }
    let f = hyp2f1_terminating(-(m as f64), -minus, (q2 + 1) as f64, 2.0).expect("c >= 1 has no pole");
    let s = sign((idx.k2 as i64 + 3 * q2) / 2 + m as i64);
    s * 2f64.powi((plus + 1) as i32) * ratio * inv_factorial(minus as usize) * inv_factorial(off) * f
}

/// Matrix of `𝔗^W_Kq` on `span{|0>, ..., |N>}`; every stripe entry is
/// filled since the support is unbounded.
pub fn inverse_weyl_matrix(idx: TensorIndex, cutoff: usize) -> FockOperator {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let off = pos.offset();
    let mut op = FockOperator::zeros(cutoff);
    for n in off..=cutoff {
        op.set(n - off, n, c(inverse_weyl_entry(pos, n)));
    }
    if idx.q2 < 0 {
        op.adjoint()
    } else {
        op
    }
}

/// Entry `<n - 2q| 𝔗^W_Kq |n>` (`q >= 0`) from the series
/// `sum_{J >= K} (W^{-1})_{J,K} <n - 2q| 𝔗_Jq |n>`, an independent route
/// to [`inverse_weyl_entry`]. Terms decay like `J^p / 2^J`; summation stops
/// once they fall below `1e-18` of the running total.
pub fn inverse_weyl_entry_series(idx: TensorIndex, n: usize) -> f64 {
    let off = idx.offset();
    if n < off {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut quiet = 0;
    let start = (n as i64 - idx.plus() as i64).max(0) as u32;
    for j in start.. {
        let big = TensorIndex {
            k2: idx.k2 + 2 * j,
            q2: idx.q2,
        };
        let term = weyl_inverse_coefficient(idx, j) * inverse_entry(big, n);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            quiet += 1;
            if quiet > 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        if j > 2000 {
            break;
        }
    }
    sum
}

/// Abel sum `lim_{r -> 1} sum_m d_m r^m` of `d_m = (-1)^m p(m)` with `p` a
/// polynomial, given `d_0, ..., d_D` with `D >= deg p`.
///
/// Uses the Euler transform `sum_k (-1)^k Δ^k p(0) / 2^{k+1}`, which is
/// exact for polynomial `p`.
pub fn abel_alternating_sum(d: &[f64]) -> f64 {
    let mut diff: Vec<f64> = d.iter().enumerate().map(|(m, x)| sign(m as i64) * x).collect();
    let mut total = 0.0;
    let mut scale = 0.5;
    let mut k = 0;
    while !diff.is_empty() {
        total += sign(k) * diff[0] * scale;
        scale *= 0.5;
        k += 1;
        for i in 0..diff.len() - 1 {
            diff[i] = diff[i + 1] - diff[i];
        }
        diff.pop();
    }
    total
}

/// Regularized `Tr(𝔗^W_Kq T^W_K'q')`.
///
/// Zero unless `q = q'`. Otherwise the diagonal of the product is
/// `(-1)^m p(m)` with `deg p <= K + K'`, and the trace is its Abel sum.
pub fn weyl_regularized_trace(a: TensorIndex, b: TensorIndex) -> Result<f64> {
    if a.q2 != b.q2 {
        return Ok(0.0);
    }
    let degree = ((a.k2 + b.k2) / 2) as usize;
    let terms = degree + 6;
    let off = a.offset();
    let cutoff = terms + off;
    let inv = inverse_weyl_matrix(a, cutoff);
    let mono = monomial_weyl_matrix(b, cutoff);
    let prod = &inv * &mono;
    let diag: Vec<f64> = (0..terms).map(|m| prod.get(m, m).re).collect();
    if diag.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("weyl_regularized_trace", "non-finite diagonal"));
    }
    Ok(abel_alternating_sum(&diag))
}

/// Max deviation of the regularized Weyl orthonormality matrix from the identity.
pub fn verify_weyl_orthonormality(k2max: u32) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in TensorIndex::all_upto(k2max) {
        for b in TensorIndex::all_upto(k2max) {
            let t = weyl_regularized_trace(a, b)?;
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((t - want).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::build_number;
    use approx::assert_abs_diff_eq;

    fn idx(k2: u32, q2: i32) -> TensorIndex {
        TensorIndex::new(k2, q2).unwrap()
    }

    #[test]
    fn weyl_monomial_examples() {
        let n = 6;
        let want = &build_number(n) + &FockOperator::identity(n).scale(c(0.5));
        assert!(monomial_weyl_matrix(idx(2, 0), n).max_abs_diff(&want) < 1e-15);
        for q2 in [-1, 1] {
            assert_eq!(monomial_weyl_matrix(idx(1, q2), n), monomial_matrix(idx(1, q2), n));
        }
        assert_eq!(monomial_weyl_matrix(idx(2, 2), n), monomial_matrix(idx(2, 2), n));
    }

    #[test]
    fn weyl_coefficients_invert() {
        // sum_n W_{K, K-n} (W^{-1})_{K-n, L} = δ_KL at fixed q.
        for q2 in -3i32..=3 {
            let base = q2.unsigned_abs();
            for k2 in (base..=base + 12).step_by(2) {
                for l2 in (base..=k2).step_by(2) {
                    let mut s = 0.0;
                    for j2 in (l2..=k2).step_by(2) {
                        let w = weyl_coefficient(idx(k2, q2), (k2 - j2) / 2);
                        let wi = weyl_inverse_coefficient(idx(l2, q2), (j2 - l2) / 2);
                        s += w * wi;
                    }
                    let want = if k2 == l2 { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-9 * (1.0 + s.abs()), "k2={k2} l2={l2} q2={q2}: {s}");
                }
            }
        }
    }

    #[test]
    fn inverse_weyl_examples() {
        assert_abs_diff_eq!(inverse_weyl_entry(idx(0, 0), 0), 2.0);
        assert_abs_diff_eq!(inverse_weyl_entry(idx(0, 0), 1), -2.0);
        assert_abs_diff_eq!(inverse_weyl_entry(idx(2, 2), 2), 4.0 * 2f64.sqrt(), epsilon = 1e-14);
        // Fock-diagonal entries vanish for q != 0.
        let m = inverse_weyl_matrix(idx(3, 1), 10);
        for n in 0..=10 {
            assert_eq!(m.get(n, n), c(0.0));
        }
    }

    #[test]
    fn inverse_weyl_matches_series() {
        for i in TensorIndex::all_upto(4) {
            let pos = if i.q2 < 0 { i.conj() } else { i };
            for n in pos.offset()..pos.offset() + 5 {
                let a = inverse_weyl_entry(pos, n);
                let b = inverse_weyl_entry_series(pos, n);
                assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{i} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn abel_sums() {
        // 1 - 1 + 1 - ... = 1/2 ; 0 - 1 + 2 - 3 + ... = -1/4
        assert_abs_diff_eq!(abel_alternating_sum(&[1.0, -1.0, 1.0, -1.0]), 0.5);
        assert_abs_diff_eq!(abel_alternating_sum(&[0.0, -1.0, 2.0, -3.0, 4.0]), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn weyl_orthonormality() {
        assert!(verify_weyl_orthonormality(4).unwrap() < 1e-8);
        assert_abs_diff_eq!(weyl_regularized_trace(idx(0, 0), idx(0, 0)).unwrap(), 1.0, epsilon = 1e-12);
    }
}
