//! Extremes of `A_M` at fixed mean photon number.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::TensorIndex;
use crate::error::{Error, Result};
use crate::fock::operator::{c, FockOperator, C64};
use crate::fock::{cat_ket, coherent_required_cutoff, make_state, DensityMatrix, StateSpec};
use crate::multipole::{inverse_multipole, SUPPORT_EPS};

use super::cumulative::cumulative_direct_value;

/// Tolerance on the mean photon number of matched trial states.
pub const ENERGY_TOL: f64 = 1e-10;
/// Trial kets reach `ceil(nbar) + EXTRA_LEVELS`.
const EXTRA_LEVELS: usize = 4;

/// `(ceil(n) - n)|ceil(n)-1><ceil(n)-1| + (1 + n - ceil(n))|ceil(n)><ceil(n)|`,
/// together with its `A_M`.
pub fn direct_minimizer(nbar: f64, m2: u32) -> Result<(DensityMatrix, f64)> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::domain("direct_minimizer", format!("nbar = {nbar}")));
    }
    let top = nbar.ceil() as usize;
    let cutoff = top + m2 as usize;
    let mut op = FockOperator::zeros(cutoff);
    let upper = 1.0 + nbar - top as f64;
    op.set(top, top, c(upper));
    if top > 0 && upper < 1.0 {
        op.set(top - 1, top - 1, c(1.0 - upper));
    }
    let rho = DensityMatrix::new(op)?;
    let value = cumulative_direct_value(&rho, m2);
    Ok((rho, value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrialFamily {
    /// Disjoint-support superposition of random kets below and above `nbar`.
    RandomPure,
    /// Cat with 2 to 4 branches and random amplitudes, `|alpha|` bisected.
    Cat,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialOutcome {
    pub family: TrialFamily,
    pub energy: f64,
    pub value: f64,
    /// `A_M(coherent) - A_M(trial)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximizerReport {
    pub m2: u32,
    pub nbar: f64,
    pub coherent_value: f64,
    pub minimizer_value: f64,
    pub trials: Vec<TrialOutcome>,
    pub min_margin: f64,
    /// Every trial scored at or below the coherent state.
    pub coherent_dominates: bool,
    /// The Fock mixture scored at or below every trial.
    pub minimizer_below_all: bool,
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

fn ket_energy(v: &[C64]) -> f64 {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    v.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>() / norm
}

/// Pure state of mean energy `nbar` from two random kets on `n < ceil(nbar)`
/// and on `ceil(nbar) <= n <= ceil(nbar) + 4`.
fn random_pure_trial(nbar: f64, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let split = nbar.ceil() as usize;
    let top = split + EXTRA_LEVELS;
    let mut hi: Vec<C64> = (0..=top).map(|n| if n >= split { random_complex(rng) } else { c(0.0) }).collect();
    normalize(&mut hi);
    let e_hi = ket_energy(&hi);
    if split == 0 {
        return hi;
    }
    let mut lo: Vec<C64> = (0..=top).map(|n| if n < split { random_complex(rng) } else { c(0.0) }).collect();
    normalize(&mut lo);
    let e_lo = ket_energy(&lo);
    let w = (nbar - e_lo) / (e_hi - e_lo);
    lo.iter().zip(&hi).map(|(a, b)| a * (1.0 - w).sqrt() + b * w.sqrt()).collect()
}

fn cat_energy(r: f64, branches: usize, amps: &[C64]) -> f64 {
    let alpha = c(r);
    let cutoff = coherent_required_cutoff(alpha) + 8;
    ket_energy(&cat_ket(alpha, branches, amps, cutoff))
}

/// Cat ket of mean energy `nbar`, or `None` if the bracket fails.
fn cat_trial(nbar: f64, rng: &mut ChaCha8Rng) -> Option<Vec<C64>> {
    let branches = rng.random_range(2..=4usize);
    let amps: Vec<C64> = (0..branches).map(|_| random_complex(rng)).collect();
    let mut lo = 1e-3;
    if cat_energy(lo, branches, &amps) >= nbar {
        return None;
    }
    let mut hi = nbar.sqrt().max(1.0);
    while cat_energy(hi, branches, &amps) <= nbar {
        hi *= 2.0;
        if hi > 1e3 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let e = cat_energy(mid, branches, &amps);
        if (e - nbar).abs() < ENERGY_TOL * 0.1 {
            lo = mid;
            hi = mid;
            break;
        }
        if e < nbar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = c(0.5 * (lo + hi));
    let ket = cat_ket(alpha, branches, &amps, coherent_required_cutoff(alpha) + 8);
    ((ket_energy(&ket) - nbar).abs() < ENERGY_TOL).then_some(ket)
}

fn score(ket: &[C64], m2: u32) -> Result<(f64, f64)> {
    let rho = DensityMatrix::from_ket(ket.len() - 1, ket)?;
    Ok((rho.mean_photon_number(), cumulative_direct_value(&rho, m2)))
}

/// Compares the coherent state of energy `nbar` against `trials` random
/// same-energy states, half random pure kets and half cats.
pub fn direct_maximizer_check(m2: u32, nbar: f64, trials: usize, seed: u64) -> Result<MaximizerReport> {
    if !nbar.is_finite() || nbar <= 0.0 {
        return Err(Error::domain("direct_maximizer_check", format!("nbar = {nbar}")));
    }
    let alpha = c(nbar.sqrt());
    let coh = make_state(&StateSpec::Coherent(alpha), coherent_required_cutoff(alpha))?;
    let coherent_value = cumulative_direct_value(&coh, m2);
    let (_, minimizer_value) = direct_minimizer(nbar, m2)?;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let (family, ket) = if t % 2 == 1 {
                match (0..16).find_map(|_| cat_trial(nbar, &mut rng)) {
                    Some(k) => (TrialFamily::Cat, k),
                    None => (TrialFamily::RandomPure, random_pure_trial(nbar, &mut rng)),
                }
            } else {
                (TrialFamily::RandomPure, random_pure_trial(nbar, &mut rng))
            };
            let (energy, value) = score(&ket, m2)?;
            Ok(TrialOutcome {
                family,
                energy,
                value,
                margin: coherent_value - value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let min_margin = outcomes.iter().map(|o| o.margin).fold(f64::INFINITY, f64::min);
    let coherent_dominates = outcomes.iter().all(|o| o.margin >= -1e-9 * coherent_value.max(1.0));
    let minimizer_below_all = outcomes.iter().all(|o| minimizer_value <= o.value + 1e-12);
    Ok(MaximizerReport {
        m2,
        nbar,
        coherent_value,
        minimizer_value,
        trials: outcomes,
        min_margin,
        coherent_dominates,
        minimizer_below_all,
    })
}

/// Moments of the equal-amplitude cat with `max(2|q|, 1)` branches:
/// `|<T_Kq>|^2`, the Cauchy-Schwarz bound
/// `<a^dag^{K+q} a^{K+q}> <a^dag^{K-q} a^{K-q}>`, and `|alpha|^{4K}`.
///
/// `a^{2q}` acts on the cat as `alpha^{2q}`, so the bound is met. The bound
/// equals `|alpha|^{4K}` when `K - q` is a multiple of `2q`.
pub fn cat_saturation(alpha: C64, k2: u32, q2: i32) -> Result<(f64, f64, f64)> {
    let idx = TensorIndex::new(k2, q2)?;
    let branches = idx.offset().max(1);
    let cutoff = coherent_required_cutoff(alpha) + 8 + k2 as usize;
    let rho = make_state(
        &StateSpec::Cat {
            alpha,
            branches,
            amplitudes: None,
        },
        cutoff,
    )?;
    let rho = rho.embed(rho.support(SUPPORT_EPS) + 2 * idx.reach());
    let t = inverse_multipole(&rho, idx)?.norm_sqr();
    let up = inverse_multipole(&rho, TensorIndex::from_exponents(idx.plus(), idx.plus()))?.re;
    let down = inverse_multipole(&rho, TensorIndex::from_exponents(idx.minus(), idx.minus()))?.re;
    Ok((t, up * down, alpha.norm().powi(2 * k2 as i32)))
}
