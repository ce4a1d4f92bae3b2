//! Factorials, binomials, Laguerre polynomials, terminating hypergeometric
//! sums and the modified Bessel function `I0`.
//!
//! Large-order coefficients such as `1/K!` are produced by multiplicative
//! recurrences (tables below) rather than by dividing two large factorials,
//! so they underflow gracefully instead of overflowing to `inf/inf`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `n` for which `n!` is finite in `f64`.
pub const MAX_FACTORIAL: u32 = 170;

const TABLE_LEN: usize = 1024;

struct Tables {
    fact: Vec<f64>,
    inv_fact: Vec<f64>,
    inv_sqrt_fact: Vec<f64>,
    ln_fact: Vec<f64>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut fact = vec![1.0; MAX_FACTORIAL as usize + 1];
        let mut inv_fact = vec![1.0; TABLE_LEN];
        let mut inv_sqrt_fact = vec![1.0; TABLE_LEN];
        let mut ln_fact = vec![0.0; TABLE_LEN];
        for n in 1..TABLE_LEN {
            let nf = n as f64;
            if n < fact.len() {
                fact[n] = fact[n - 1] * nf;
            }
            inv_fact[n] = inv_fact[n - 1] / nf;
            inv_sqrt_fact[n] = inv_sqrt_fact[n - 1] / nf.sqrt();
            ln_fact[n] = ln_fact[n - 1] + nf.ln();
        }
        // Re-anchor the log table on exact products where available; the
        // running sum of logs drifts by a few ulps per step.
        for (n, f) in fact.iter().enumerate() {
            ln_fact[n] = f.ln();
        }
        Tables {
            fact,
            inv_fact,
            inv_sqrt_fact,
            ln_fact,
        }
    })
}

/// `n!` as a double. Fails above [`MAX_FACTORIAL`]; use [`ln_factorial`] there.
pub fn factorial(n: u32) -> Result<f64> {
    if n > MAX_FACTORIAL {
        return Err(Error::domain(
            "factorial",
            format!("{n}! overflows f64; use ln_factorial"),
        ));
    }
    Ok(tables().fact[n as usize])
}

/// `ln(n!)`, relative error below `1e-14` for all `n`.
pub fn ln_factorial(n: u32) -> f64 {
    let n = n as usize;
    if n < TABLE_LEN {
        return tables().ln_fact[n];
    }
    // Stirling series; at n >= 1024 the truncation error is far below one ulp.
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `1/n!`, built by recurrence; underflows to zero for very large `n`.
pub fn inv_factorial(n: usize) -> f64 {
    match tables().inv_fact.get(n) {
        Some(v) => *v,
        None => 0.0,
    }
}

/// `1/sqrt(n!)`, built by recurrence.
pub fn inv_sqrt_factorial(n: usize) -> f64 {
    match tables().inv_sqrt_fact.get(n) {
        Some(v) => *v,
        None => (-0.5 * ln_factorial(n as u32)).exp(),
    }
}

/// Exact-table factorial for internal use; `n` must not exceed [`MAX_FACTORIAL`].
pub(crate) fn fact(n: usize) -> f64 {
    tables().fact[n]
}

/// Generalized binomial `C(m, k)` for integer `m` of either sign.
///
/// `C(m, k) = m (m-1) ... (m-k+1) / k!`, zero for `k < 0`. A nonnegative `m`
/// with `k > m` hits the factor `m - m = 0` and returns exactly zero.
pub fn binomial(m: i64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    if m >= 0 && k > m {
        return 0.0;
    }
    // Symmetric shortcut keeps the product short for nonnegative m.
    let k = if m >= 0 && k > m - k { m - k } else { k };
    let mut r = 1.0;
    for i in 1..=k {
        r *= (m - i + 1) as f64 / i as f64;
    }
    r
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` with integer `a` of either sign,
/// evaluated by the finite sum `sum_j (-1)^j C(n+a, n-j) x^j / j!`.
pub fn laguerre(n: u32, a: i64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("laguerre", format!("non-finite argument {x}")));
    }
    let n = n as i64;
    let top = n + a;
    let mut sum = 0.0;
    let mut xpow = 1.0; // x^j / j!
    for j in 0..=n {
        if j > 0 {
            xpow *= x / j as f64;
        }
        let c = binomial(top, n - j);
        if c != 0.0 {
            let term = c * xpow;
            if j % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    Ok(sum)
}

/// Rising factorial `(a)_j`.
pub fn pochhammer(a: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a + i as f64))
}

fn nonpositive_int(b: i64, func: &'static str) -> Result<u32> {
    if b > 0 {
        return Err(Error::domain(
            func,
            format!("second parameter must be a nonpositive integer, got {b}"),
        ));
    }
    Ok((-b) as u32)
}

/// Terminating Gauss hypergeometric sum `2F1(a, b; c; z)` with `b = -n <= 0`.
///
/// Fails when `c` is a nonpositive integer `> -n`, where a denominator
/// `(c)_j` vanishes before the numerator does.
pub fn hyp2f1_terminating(a: f64, b: i64, c: f64, z: f64) -> Result<f64> {
    let n = nonpositive_int(b, "hyp2f1_terminating")?;
    if c <= 0.0 && c.fract() == 0.0 && c > -(n as f64) {
        return Err(Error::domain(
            "hyp2f1_terminating",
            format!("pole: c = {c} with terminating order {n}"),
        ));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 0..n {
        let jf = j as f64;
        term *= (a + jf) * (b as f64 + jf) / ((c + jf) * (jf + 1.0)) * z;
        sum += term;
    }
    Ok(sum)
}

/// `1/Gamma(x)`, exactly zero at the poles `x = 0, -1, -2, ...`.
pub fn rgamma(x: f64) -> f64 {
    if x.fract() == 0.0 {
        if x <= 0.0 {
            return 0.0;
        }
        if x - 1.0 < TABLE_LEN as f64 {
            return inv_factorial(x as usize - 1);
        }
    }
    1.0 / statrs::function::gamma::gamma(x)
}

/// Regularized terminating sum `2F1~(a, b; c; z) = sum_j (a)_j (b)_j z^j / (Gamma(c+j) j!)`
/// with `b = -n <= 0`. Finite for every `c`.
pub fn hyp2f1_regularized_terminating(a: f64, b: i64, c: f64, z: f64) -> Result<f64> {
    let n = nonpositive_int(b, "hyp2f1_regularized_terminating")?;
    let mut sum = 0.0;
    let mut num = 1.0; // (a)_j (b)_j z^j / j!
    for j in 0..=n {
        if j > 0 {
            let jf = (j - 1) as f64;
            num *= (a + jf) * (b as f64 + jf) * z / (jf + 1.0);
        }
        sum += num * rgamma(c + j as f64);
    }
    Ok(sum)
}

/// Modified Bessel function `I0(x) = sum_k (x/2)^{2k} / k!^2`, summed with a
/// recurrent term until it no longer changes the total.
pub fn bessel_i0(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= y / (k * k);
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
    }
}

/// Coherent-state amplitude `<n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!)`.
pub fn poisson_amplitude(n: usize, alpha: Complex64) -> Complex64 {
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 1..=n {
        amp *= alpha / (k as f64).sqrt();
    }
    amp
}

/// All amplitudes `<n|alpha>` for `n = 0..=cutoff`.
pub fn poisson_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for k in 1..=cutoff {
        amp *= alpha / (k as f64).sqrt();
        out.push(amp);
    }
    out
}

/// `(-1)^k` for a possibly negative integer.
#[inline]
pub(crate) fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn factorial_basics() {
        assert_eq!(factorial(0).unwrap(), 1.0);
        assert_eq!(factorial(5).unwrap(), 120.0);
        assert!(factorial(170).unwrap().is_finite());
        assert!(factorial(171).is_err());
        assert!(ln_factorial(171).is_finite());
        assert!(ln_factorial(170).is_finite());
    }

    #[test]
    fn ln_factorial_matches_products() {
        for n in [1u32, 2, 10, 50, 100, 170] {
            let exact = factorial(n).unwrap().ln();
            assert!((ln_factorial(n) - exact).abs() <= 1e-14 * exact.abs().max(1.0));
        }
        // Stirling branch against the table's summed logs.
        let mut acc = tables().ln_fact[TABLE_LEN - 1];
        for n in TABLE_LEN..TABLE_LEN + 50 {
            acc += (n as f64).ln();
            let rel = (ln_factorial(n as u32) - acc).abs() / acc;
            assert!(rel < 1e-14, "n = {n}, rel = {rel}");
        }
    }

    #[test]
    fn factorial_ratio() {
        for n in 1..=170u32 {
            let r = (ln_factorial(n) - ln_factorial(n - 1)).exp();
            assert!((r - n as f64).abs() < 1e-12 * n as f64, "n = {n}");
        }
    }

    #[test]
    fn generalized_binomial() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(-1, 3), -1.0);
        assert_eq!(binomial(-2, 2), 3.0);
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(4, -1), 0.0);
    }

    #[test]
    fn laguerre_examples() {
        assert_abs_diff_eq!(laguerre(1, 0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(laguerre(0, -2, 3.7).unwrap(), 1.0);
        // L_2^{(-2)}(x) = x^2 / 2
        assert_abs_diff_eq!(laguerre(2, -2, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        // L_2^{(1)}(x) = (x^2 - 6x + 6)/2
        assert_abs_diff_eq!(laguerre(2, 1, 1.5).unwrap(), (2.25 - 9.0 + 6.0) / 2.0, epsilon = 1e-14);
        assert!(laguerre(3, 0, f64::NAN).is_err());
    }

    #[test]
    fn hyp2f1_examples() {
        assert_abs_diff_eq!(hyp2f1_terminating(-1.0, -1, 1.0, 1.0).unwrap(), 2.0);
        for k in 0..6 {
            assert_abs_diff_eq!(hyp2f1_terminating(k as f64 + 1.0, 0, 1.0, 2.0).unwrap(), 1.0);
        }
        assert_abs_diff_eq!(hyp2f1_terminating(1.0, -1, 1.0, 2.0).unwrap(), -1.0);
        assert!(hyp2f1_terminating(1.0, -3, -1.0, 0.5).is_err());
        assert!(hyp2f1_terminating(1.0, 2, 1.0, 0.5).is_err());
        // c = -3 with n = 2: the numerator terminates first.
        assert!(hyp2f1_terminating(1.0, -2, -3.0, 0.5).is_ok());
    }

    #[test]
    fn hyp2f1_regularized_matches_plain_over_gamma() {
        for (a, b, c, z) in [(2.0, -3, 1.0, 2.0), (1.5, -4, 3.0, 0.3), (4.0, -2, 2.5, -1.0)] {
            let plain = hyp2f1_terminating(a, b, c, z).unwrap();
            let reg = hyp2f1_regularized_terminating(a, b, c, z).unwrap();
            assert_abs_diff_eq!(reg, plain * rgamma(c), epsilon = 1e-12);
        }
        // At a pole of Gamma(c) only terms with c + j >= 1 survive.
        let reg = hyp2f1_regularized_terminating(1.0, -2, 0.0, 1.0).unwrap();
        // j = 1: (1)(−2)/1 * 1/Gamma(1); j = 2: (1)(2)(−2)(−1)/2 * 1/Gamma(2)
        assert_abs_diff_eq!(reg, -2.0 + 2.0, epsilon = 1e-15);
    }

    #[test]
    fn bessel_i0_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((bessel_i0(2.0) - 2.27959).abs() < 5e-6);
        let partial: f64 = (0..=100).map(|k| inv_factorial(k).powi(2)).sum();
        assert_abs_diff_eq!(bessel_i0(2.0), partial, epsilon = 1e-14);
    }

    #[test]
    fn poisson_normalization() {
        assert_abs_diff_eq!(poisson_amplitude(0, Complex64::new(0.0, 0.0)).re, 1.0);
        assert_abs_diff_eq!(
            poisson_amplitude(1, Complex64::new(1.0, 0.0)).re,
            (-0.5f64).exp(),
            epsilon = 1e-15
        );
        let alpha = Complex64::new(1.3, 0.4);
        let total: f64 = poisson_amplitudes(alpha, 60).iter().map(|a| a.norm_sqr()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            (poisson_amplitude(7, alpha) - poisson_amplitudes(alpha, 10)[7]).norm(),
            0.0,
            epsilon = 1e-16
        );
    }
}
