//! Analytic extremal states for the low orders `M = 0, 1/2, 1, 3/2`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::fock::operator::{c, C64};
use crate::fock::DensityMatrix;

use super::cumulative::{cumulative_inverse_value, multipole_norm_sq};

/// A labelled pure state on `n <= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalState {
    pub label: &'static str,
    pub ket: [C64; 3],
}

impl ExtremalState {
    fn fock(label: &'static str, n: usize) -> Self {
        let mut ket = [c(0.0); 3];
        ket[n] = c(1.0);
        Self { label, ket }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_ket(2, &self.ket).expect("normalized ket")
    }
}

/// Optimizers of `𝔗_M^2` (the norm at the top order alone) and of `𝔄_M`.
#[derive(Clone, Debug)]
pub struct ExtremalCase {
    pub m2: u32,
    pub norm_maximizers: Vec<ExtremalState>,
    pub norm_max: f64,
    pub norm_minimizers: Vec<ExtremalState>,
    pub norm_min: f64,
    pub cumulative_maximizer: ExtremalState,
    pub cumulative_max: f64,
    pub cumulative_minimizer: ExtremalState,
    pub cumulative_min: f64,
}

fn psi_plus() -> ExtremalState {
    ExtremalState {
        label: "(|0>+|1>)/sqrt2",
        ket: [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)],
    }
}

/// `e^{i phi}/sqrt3 |0> + 1/sqrt2 |1> - e^{-i phi}/sqrt6 |2>`.
pub fn three_halves_maximizer(phi: f64) -> ExtremalState {
    ExtremalState {
        label: "e^{i phi}|0>/sqrt3 + |1>/sqrt2 - e^{-i phi}|2>/sqrt6",
        ket: [
            C64::from_polar(1.0 / 3f64.sqrt(), phi),
            c(FRAC_1_SQRT_2),
            -C64::from_polar(1.0 / 6f64.sqrt(), -phi),
        ],
    }
}

pub fn extremal_closed_forms(m2: u32) -> Result<ExtremalCase> {
    let vac = ExtremalState::fock("|0>", 0);
    let case = match m2 {
        0 => ExtremalCase {
            m2,
            norm_maximizers: vec![vac.clone()],
            norm_max: 1.0,
            norm_minimizers: vec![ExtremalState::fock("|1>", 1)],
            norm_min: 0.0,
            cumulative_maximizer: vac,
            cumulative_max: 1.0,
            cumulative_minimizer: ExtremalState::fock("|1>", 1),
            cumulative_min: 0.0,
        },
        1 => ExtremalCase {
            m2,
            norm_maximizers: vec![psi_plus()],
            norm_max: 0.5,
            norm_minimizers: vec![vac.clone(), ExtremalState::fock("|1>", 1)],
            norm_min: 0.0,
            cumulative_maximizer: vac,
            cumulative_max: 1.0,
            cumulative_minimizer: ExtremalState::fock("|1>", 1),
            cumulative_min: 0.0,
        },
        2 => ExtremalCase {
            m2,
            norm_maximizers: vec![vac.clone(), ExtremalState::fock("|1>", 1)],
            norm_max: 1.0,
            norm_minimizers: vec![psi_plus(), ExtremalState::fock("|2>", 2)],
            norm_min: 0.0,
            cumulative_maximizer: vac,
            cumulative_max: 2.0,
            cumulative_minimizer: ExtremalState::fock("|2>", 2),
            cumulative_min: 0.0,
        },
        3 => ExtremalCase {
            m2,
            norm_maximizers: vec![three_halves_maximizer(0.0), three_halves_maximizer(0.9)],
            norm_max: 0.75,
            norm_minimizers: vec![vac.clone(), ExtremalState::fock("|2>", 2)],
            norm_min: 0.0,
            cumulative_maximizer: vac,
            cumulative_max: 2.0,
            cumulative_minimizer: ExtremalState::fock("|2>", 2),
            cumulative_min: 0.0,
        },
        _ => return Err(Error::Unsupported(format!("closed-form extremal states for m2 = {m2}"))),
    };
    Ok(case)
}

/// Largest deviation between the tabulated values and `𝔗_M^2`, `𝔄_M`
/// recomputed on the tabulated states.
pub fn verify_extremal_case(case: &ExtremalCase) -> f64 {
    let norm = |s: &ExtremalState| multipole_norm_sq(&s.density(), case.m2);
    let cum = |s: &ExtremalState| cumulative_inverse_value(&s.density(), case.m2);
    let mut worst = 0.0f64;
    for s in &case.norm_maximizers {
        worst = worst.max((norm(s) - case.norm_max).abs());
    }
    for s in &case.norm_minimizers {
        worst = worst.max((norm(s) - case.norm_min).abs());
    }
    worst = worst.max((cum(&case.cumulative_maximizer) - case.cumulative_max).abs());
    worst.max((cum(&case.cumulative_minimizer) - case.cumulative_min).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tabulated_values_recompute() {
        for m2 in 0..=3 {
            let case = extremal_closed_forms(m2).unwrap();
            assert!(verify_extremal_case(&case) < 1e-14, "m2 = {m2}");
        }
        assert!(matches!(extremal_closed_forms(4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn three_halves_beats_vacuum_at_its_order() {
        let case = extremal_closed_forms(3).unwrap();
        let top = multipole_norm_sq(&case.norm_maximizers[0].density(), 3);
        let vac = multipole_norm_sq(&ExtremalState::fock("|0>", 0).density(), 3);
        assert_eq!(vac, 0.0);
        assert!(top > vac);
    }

    #[test]
    fn no_random_qutrit_exceeds_tabulated_maxima() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases: Vec<_> = (0..=3).map(|m2| extremal_closed_forms(m2).unwrap()).collect();
        for _ in 0..2000 {
            let ket: Vec<C64> = (0..3).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let rho = DensityMatrix::from_ket(2, &ket).unwrap();
            for case in &cases {
                assert!(multipole_norm_sq(&rho, case.m2) <= case.norm_max + 1e-12);
                assert!(cumulative_inverse_value(&rho, case.m2) <= case.cumulative_max + 1e-12);
            }
        }
    }
}
