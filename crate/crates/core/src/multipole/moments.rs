//! Multipoles `<𝔗_Kq>` and inverse multipoles `<T_Kq>` of a state, in normal
//! and symmetric order, evaluated as sums along one stripe of `rho`.

use crate::basis::normal::{inverse_entry, monomial_entry};
use crate::basis::weyl::{inverse_weyl_entry, weyl_coefficient};
use crate::basis::TensorIndex;
use crate::error::{Error, Result};
use crate::fock::operator::{c, C64};
use crate::fock::DensityMatrix;

/// Entries of `rho` below this modulus do not count towards its support.
pub const SUPPORT_EPS: f64 = 1e-20;

/// `sum_n w(n) rho_{n, n-2q}` for `q >= 0`, or `sum_n w(n) rho_{n-2|q|, n}`
/// for `q < 0`, over `n = 2|q| ..= N`. This is `Tr(rho X)` for an operator
/// `X` with entries `w(n)` at `(n - 2q, n)` (or the transpose).
fn lowering_stripe(rho: &DensityMatrix, q2: i32, w: impl Fn(usize) -> f64) -> C64 {
    let off = q2.unsigned_abs() as usize;
    let mut acc = c(0.0);
    for n in off..=rho.cutoff() {
        let x = w(n);
        if x != 0.0 {
            let r = if q2 >= 0 { rho.get(n, n - off) } else { rho.get(n - off, n) };
            acc += r * x;
        }
    }
    acc
}

/// `<𝔗_Kq> = Tr(rho 𝔗_Kq)` as a finite stripe sum; independent of the
/// cutoff once the state fits.
pub fn state_multipole(rho: &DensityMatrix, idx: TensorIndex) -> C64 {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    lowering_stripe(rho, idx.q2, |n| inverse_entry(pos, n))
}

/// `<𝔗^W_Kq> = Tr(rho 𝔗^W_Kq)`, summed over the full stripe inside the cutoff.
pub fn state_multipole_weyl(rho: &DensityMatrix, idx: TensorIndex) -> C64 {
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    lowering_stripe(rho, idx.q2, |n| inverse_weyl_entry(pos, n))
}

/// Fails unless `n0 + 2K <= N`, `n0` being the support of `rho`.
pub fn check_inverse_rule(rho: &DensityMatrix, idx: TensorIndex) -> Result<()> {
    let required = rho.support(SUPPORT_EPS) + idx.k2 as usize;
    if required > rho.cutoff() {
        return Err(Error::truncation(format!("inverse multipole {idx}"), required, rho.cutoff()));
    }
    Ok(())
}

fn monomial_expectation(rho: &DensityMatrix, idx: TensorIndex) -> C64 {
    // T_Kq raises by 2q, so Tr(rho T) pairs with rho_{n, n+2q}: the
    // lowering stripe of the conjugate label.
    let pos = if idx.q2 < 0 { idx.conj() } else { idx };
    let off = pos.offset();
    lowering_stripe(rho, -idx.q2, |n| monomial_entry(pos, n - off))
}

/// `<T_Kq> = Tr(rho T_Kq)`, subject to the rule `n0 + 2K <= N`.
pub fn inverse_multipole(rho: &DensityMatrix, idx: TensorIndex) -> Result<C64> {
    check_inverse_rule(rho, idx)?;
    Ok(monomial_expectation(rho, idx))
}

/// `<T^W_Kq> = sum_n w_n <T_{K-n,q}>`, subject to the rule `n0 + 2K <= N`.
pub fn inverse_multipole_weyl(rho: &DensityMatrix, idx: TensorIndex) -> Result<C64> {
    check_inverse_rule(rho, idx)?;
    let mut acc = c(0.0);
    for n in 0..=idx.plus().min(idx.minus()) {
        let lower = idx.lowered(n).expect("n <= min(K+q, K-q)");
        acc += monomial_expectation(rho, lower) * weyl_coefficient(idx, n);
    }
    Ok(acc)
}
