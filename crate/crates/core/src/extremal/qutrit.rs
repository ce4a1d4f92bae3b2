//! `𝔄_M` on the real qutrit family `sqrt(p0)|0> + sqrt(p1)|1> - sqrt(p2)|2>`.
//!
//! On this family `𝔄_M` is a quadratic form in the seven monomials
//! `p0^2, p1^2, p2^2, p0 p1, p0 p2, p1 p2, p1 sqrt(p0 p2)`. The coefficients
//! come from exact evaluations at seven fixed interior probes.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::operator::c;
use crate::fock::DensityMatrix;
use crate::multipole::table::fmt_f64;

use super::cumulative::cumulative_inverse_value;

pub const MONOMIAL_NAMES: [&str; 7] = ["p0^2", "p1^2", "p2^2", "p0*p1", "p0*p2", "p1*p2", "p1*sqrt(p0*p2)"];

/// `(p0, p1, p2)`, all interior.
const PROBES: [[f64; 3]; 7] = [
    [0.5, 0.3, 0.2],
    [0.2, 0.5, 0.3],
    [0.3, 0.2, 0.5],
    [0.6, 0.1, 0.3],
    [0.1, 0.6, 0.3],
    [0.1, 0.3, 0.6],
    [0.4, 0.4, 0.2],
];

fn monomials(p0: f64, p1: f64, p2: f64) -> [f64; 7] {
    [p0 * p0, p1 * p1, p2 * p2, p0 * p1, p0 * p2, p1 * p2, p1 * (p0 * p2).sqrt()]
}

pub fn qutrit_state(p0: f64, p1: f64, p2: f64) -> Result<DensityMatrix> {
    if [p0, p1, p2].iter().any(|p| !(0.0..=1.0 + 1e-12).contains(p)) || (p0 + p1 + p2 - 1.0).abs() > 1e-12 {
        return Err(Error::domain("qutrit_state", format!("({p0}, {p1}, {p2}) is not a probability vector")));
    }
    DensityMatrix::from_ket(2, &[c(p0.sqrt()), c(p1.sqrt()), c(-p2.max(0.0).sqrt())])
}

#[derive(Clone, Debug, PartialEq)]
pub struct QutritForm {
    pub m2: u32,
    pub coefficients: [f64; 7],
    /// 2-norm condition number of the probe design.
    pub condition: f64,
}

impl QutritForm {
    pub fn evaluate(&self, p0: f64, p1: f64, p2: f64) -> f64 {
        monomials(p0, p1, p2).iter().zip(&self.coefficients).map(|(m, k)| m * k).sum()
    }
}

pub fn qutrit_form(m2: u32) -> Result<QutritForm> {
    if m2 < 4 {
        return Err(Error::domain("qutrit_form", format!("needs m2 >= 4, got {m2}")));
    }
    let design = DMatrix::from_fn(7, 7, |i, j| {
        let [p0, p1, p2] = PROBES[i];
        monomials(p0, p1, p2)[j]
    });
    let rhs = PROBES
        .iter()
        .map(|&[p0, p1, p2]| qutrit_state(p0, p1, p2).map(|rho| cumulative_inverse_value(&rho, m2)))
        .collect::<Result<Vec<_>>>()?;
    let sv = design.clone().singular_values();
    let condition = sv.max() / sv.min();
    let sol = design
        .lu()
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| Error::Conditioning("singular qutrit probe design".into()))?;
    let mut coefficients = [0.0; 7];
    coefficients.copy_from_slice(sol.as_slice());
    Ok(QutritForm {
        m2,
        coefficients,
        condition,
    })
}

/// Columns `M` then one per monomial, one row per order.
pub fn write_coefficients_csv<W: Write>(forms: &[QutritForm], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["M"];
    header.extend(MONOMIAL_NAMES);
    w.write_record(&header)?;
    for f in forms {
        let mut rec = vec![(f.m2 as f64 / 2.0).to_string()];
        rec.extend(f.coefficients.iter().map(|&x| fmt_f64(x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QutritScan {
    pub m2: u32,
    pub grid: usize,
    /// `(p0, p1, 𝔄_M)` with `p0 + p1 <= 1`, row-major in `p0`.
    pub points: Vec<(f64, f64, f64)>,
    pub argmax: (f64, f64, f64),
}

impl QutritScan {
    /// Columns `p0,p1,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p0", "p1", "value"])?;
        for &(p0, p1, v) in &self.points {
            w.write_record([fmt_f64(p0), fmt_f64(p1), fmt_f64(v)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact `𝔄_M` on the simplex grid `p0 = i/grid`, `p1 = j/grid`, `i + j <= grid`.
pub fn scan_qutrit(m2: u32, grid: usize) -> Result<QutritScan> {
    if grid < 2 {
        return Err(Error::domain("scan_qutrit", format!("grid resolution {grid} < 2")));
    }
    let nodes: Vec<(usize, usize)> = (0..=grid).flat_map(|i| (0..=grid - i).map(move |j| (i, j))).collect();
    let points = nodes
        .par_iter()
        .map(|&(i, j)| {
            let (p0, p1) = (i as f64 / grid as f64, j as f64 / grid as f64);
            let p2 = ((grid - i - j) as f64 / grid as f64).max(0.0);
            qutrit_state(p0, p1, p2).map(|rho| (p0, p1, cumulative_inverse_value(&rho, m2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let argmax = *points.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("grid >= 2");
    Ok(QutritScan {
        m2,
        grid,
        points,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_state, StateSpec};
    use crate::special::inv_factorial;

    /// Limit `M -> infinity` of the coefficients, summed by hand from the
    /// stripe entries of `𝔗_K0` and `𝔗_{K,1/2}` on `n <= 2`.
    fn limit_coefficients() -> [f64; 7] {
        let i = |nu: usize| -> f64 { (0..60).map(|k| inv_factorial(k) * inv_factorial(k + nu)).sum() };
        let (i0, i1, i2) = (i(0), i(1), i(2));
        [i0, i0, i0 / 4.0, 2.0 * (i0 - i1), i0 + i2, i0 - i1, 2.0 * 2f64.sqrt() * i1]
    }

    #[test]
    fn converged_coefficients() {
        let exact = limit_coefficients();
        let f100 = qutrit_form(200).unwrap();
        let f7 = qutrit_form(14).unwrap();
        for (k, want) in exact.iter().enumerate() {
            assert!((f100.coefficients[k] - want).abs() < 1e-9, "{k}");
            assert!((f7.coefficients[k] - f100.coefficients[k]).abs() < 1e-4, "{k}");
        }
        // Reference values for the five monomials without a p0-p1 coherence.
        for (k, v) in [(0, 2.27959), (1, 2.27959), (2, 0.569896), (4, 2.96853), (5, 0.688948)] {
            assert!((f100.coefficients[k] - v).abs() < 1e-5, "{k}");
        }
        assert!(f100.condition < 1e4);
    }

    #[test]
    fn form_reproduces_exact_values() {
        let f = qutrit_form(9).unwrap();
        for &(p0, p1) in &[(0.7, 0.2), (0.05, 0.9), (0.33, 0.33), (0.2, 0.1)] {
            let p2 = 1.0 - p0 - p1;
            let exact = cumulative_inverse_value(&qutrit_state(p0, p1, p2).unwrap(), 9);
            assert!((f.evaluate(p0, p1, p2) - exact).abs() < 1e-10);
        }
        let vac = make_state(&StateSpec::Fock(0), 2).unwrap();
        assert!((f.evaluate(1.0, 0.0, 0.0) - cumulative_inverse_value(&vac, 9)).abs() < 1e-12);
        assert!(matches!(qutrit_form(3), Err(Error::Domain { .. })));
    }

    #[test]
    fn scan_corners() {
        let s = scan_qutrit(20, 10).unwrap();
        assert_eq!(s.points.len(), 66);
        assert_eq!((s.argmax.0, s.argmax.1), (1.0, 0.0));
        let at = |p0: f64, p1: f64| s.points.iter().find(|p| p.0 == p0 && p.1 == p1).unwrap().2;
        assert!((at(1.0, 0.0) - at(0.0, 1.0) - inv_factorial(10).powi(2)).abs() < 1e-12);
        let two = make_state(&StateSpec::Fock(2), 2).unwrap();
        assert_eq!(at(0.0, 0.0), cumulative_inverse_value(&two, 20));
        assert!(scan_qutrit(4, 1).is_err());
    }
}
