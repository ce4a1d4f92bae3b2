//! Closed-form multipoles of coherent states, Fock states and Fock dyads.
//! These serve as oracles for the stripe sums in [`super::moments`].

use crate::basis::weyl::weyl_coefficient;
use crate::basis::TensorIndex;
use crate::fock::operator::{c, C64};
use crate::special::{
    binomial, fact, hyp2f1_regularized_terminating, hyp2f1_terminating, inv_factorial,
    inv_sqrt_factorial, laguerre, sign,
};

fn vacuum_normal(idx: TensorIndex) -> C64 {
    fock_multipole_closed(0, idx)
}

/// `<α|𝔗_Kq|α> = (-1)^{K+q} / (K-q)! * e^{-|α|^2} / α*^{2q} * L_{K+q}^{(-2q)}(|α|^2)`.
///
/// At `α = 0` the removable singularity is bypassed with the vacuum value.
pub fn coherent_multipole_closed(alpha: C64, idx: TensorIndex) -> C64 {
    if alpha == c(0.0) {
        return vacuum_normal(idx);
    }
    let x = alpha.norm_sqr();
    let lag = laguerre(idx.plus(), -(idx.q2 as i64), x).expect("finite |α|^2");
    let pre = sign(idx.plus() as i64) * inv_factorial(idx.minus() as usize) * (-x).exp() * lag;
    alpha.conj().powi(-idx.q2) * pre
}

/// `<α|𝔗^W_Kq|α> = 2^{K-q+1} (-1)^{K+q} / (K-q)! * e^{-2|α|^2} / α*^{2q} * L_{K+q}^{(-2q)}(2|α|^2)`.
pub fn coherent_multipole_weyl_closed(alpha: C64, idx: TensorIndex) -> C64 {
    if alpha == c(0.0) {
        return c(fock_multipole_weyl_closed(0, idx));
    }
    let x = 2.0 * alpha.norm_sqr();
    let lag = laguerre(idx.plus(), -(idx.q2 as i64), x).expect("finite |α|^2");
    let pre = 2f64.powi(idx.minus() as i32 + 1)
        * sign(idx.plus() as i64)
        * inv_factorial(idx.minus() as usize)
        * (-x).exp()
        * lag;
    alpha.conj().powi(-idx.q2) * pre
}

/// `<n|𝔗_Kq|n> = δ_q0 (-1)^{K+n} / (n! (K-n)!)`, zero for `n > K`.
pub fn fock_multipole_closed(n: usize, idx: TensorIndex) -> C64 {
    if idx.q2 != 0 {
        return c(0.0);
    }
    let k = (idx.k2 / 2) as usize;
    if n > k {
        return c(0.0);
    }
    c(sign((k + n) as i64) * inv_factorial(n) * inv_factorial(k - n))
}

/// `<n|𝔗^W_Kq|n> = δ_q0 (-1)^K 2^{K+1} 2F1(K+1, -n; 1; 2) / K!`.
pub fn fock_multipole_weyl_closed(n: usize, idx: TensorIndex) -> f64 {
    if idx.q2 != 0 {
        return 0.0;
    }
    let k = idx.k2 / 2;
    let f = hyp2f1_terminating((k + 1) as f64, -(n as i64), 1.0, 2.0).expect("c = 1");
    sign(k as i64) * 2f64.powi(k as i32 + 1) * inv_factorial(k as usize) * f
}

/// Multipole of the dyad `|n><m|`: `Tr(𝔗_Kq |n><m|) = <m|𝔗_Kq|n>`,
/// nonzero only for `n - m = 2q`. With `hi = max(m, n)`, `lo = min(m, n)`:
/// `(-1)^{K+|q|+hi} / (sqrt(hi! lo!) (K+|q|-hi)!)` for `hi <= K + |q|`.
pub fn dyad_multipole_closed(m: usize, n: usize, idx: TensorIndex) -> f64 {
    if n as i64 - m as i64 != idx.q2 as i64 {
        return 0.0;
    }
    let (lo, hi) = (m.min(n), m.max(n));
    let plus = idx.reach();
    if hi > plus {
        return 0.0;
    }
    sign((plus + hi) as i64) * inv_sqrt_factorial(hi) * inv_sqrt_factorial(lo) * inv_factorial(plus - hi)
}

/// Weyl multipole of the dyad `|n><m|`, `q >= 0` (`n = m + 2q`):
/// `(-1)^{K+3q} 2^{K+q+1} sqrt(n!/m!) / (K-q)! * 2F1~(K+q+1, -m; 2q+1; 2)`.
/// `q < 0` follows from `<m|𝔗^W_{K,-q}|n> = <n|𝔗^W_Kq|m>`.
pub fn dyad_multipole_weyl_closed(m: usize, n: usize, idx: TensorIndex) -> f64 {
    if n as i64 - m as i64 != idx.q2 as i64 {
        return 0.0;
    }
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let (lo, hi) = (m.min(n), m.max(n));
    let mut ratio = 1.0;
    for j in lo + 1..=hi {
        ratio *= (j as f64).sqrt();
    }
    let f = hyp2f1_regularized_terminating((pos.plus() + 1) as f64, -(lo as i64), (pos.q2 + 1) as f64, 2.0)
        .expect("terminating");
    let s = sign((pos.k2 as i64 + 3 * pos.q2 as i64) / 2);
    s * 2f64.powi(pos.plus() as i32 + 1) * ratio * inv_factorial(pos.minus() as usize) * f
}

/// `<α|T_Kq|α> = α*^{K+q} α^{K-q}`.
pub fn coherent_inverse_closed(alpha: C64, idx: TensorIndex) -> C64 {
    alpha.conj().powu(idx.plus()) * alpha.powu(idx.minus())
}

/// `<n|T_Kq|n> = δ_q0 K! C(n, K)`.
pub fn fock_inverse_closed(n: usize, idx: TensorIndex) -> f64 {
    if idx.q2 != 0 {
        return 0.0;
    }
    let k = (idx.k2 / 2) as i64;
    if k > n as i64 {
        return 0.0;
    }
    fact(k as usize) * binomial(n as i64, k)
}

/// `<α|T^W_Kq|α> = sum_n w_n α*^{K+q-n} α^{K-q-n}`.
pub fn coherent_inverse_weyl_closed(alpha: C64, idx: TensorIndex) -> C64 {
    let mut acc = c(0.0);
    for n in 0..=idx.plus().min(idx.minus()) {
        acc += coherent_inverse_closed(alpha, idx.lowered(n).expect("valid")) * weyl_coefficient(idx, n);
    }
    acc
}

/// `<n|T^W_Kq|n> = sum_j w_j δ_q0 (K-j)! C(n, K-j)`.
pub fn fock_inverse_weyl_closed(n: usize, idx: TensorIndex) -> f64 {
    if idx.q2 != 0 {
        return 0.0;
    }
    (0..=idx.plus())
        .map(|j| fock_inverse_closed(n, idx.lowered(j).expect("valid")) * weyl_coefficient(idx, j))
        .sum()
}
