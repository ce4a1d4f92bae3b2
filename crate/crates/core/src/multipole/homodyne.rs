//! Inverse multipoles from phase-resolved quadrature moments.
//!
//! With `x(θ) = a e^{-iθ} + a^dagger e^{iθ}`,
//! `x(θ)^j = sum_p C(j,p) e^{iθ(2p-j)} T^W_{j/2, p-j/2}`, so each power `j`
//! is a real trigonometric polynomial in `θ` whose `j + 1` real
//! coefficients are the symmetrically ordered moments `<T^W_{j/2,q}>`. These
//! are fitted by least squares over the measured phases and converted to
//! normal order by forward substitution in `K` at fixed `q`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::moments::SUPPORT_EPS;
use super::table::{fmt_f64, Basis, MultipoleTable};
use crate::basis::weyl::weyl_coefficient;
use crate::basis::TensorIndex;
use crate::error::{Error, Result};
use crate::fock::operator::{build_annihilation, c, FockOperator, C64};
use crate::fock::DensityMatrix;
use crate::special::binomial;

/// Smallest singular value accepted relative to the largest.
pub const MIN_RECIPROCAL_CONDITION: f64 = 1e-10;

/// `<x(θ)^j>` for every phase and `j = 0..=J`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureMomentSet {
    pub phases: Vec<f64>,
    pub max_power: u32,
    /// `moments[k][j] = <x(phases[k])^j>`.
    pub moments: Vec<Vec<f64>>,
}

impl QuadratureMomentSet {
    /// Checks `<x^0> = 1` and nonnegative even moments (within `1e-12`).
    pub fn new(phases: Vec<f64>, max_power: u32, moments: Vec<Vec<f64>>) -> Result<Self> {
        if phases.len() != moments.len() {
            return Err(Error::validation("one moment row per phase", format!("{} phases, {} rows", phases.len(), moments.len())));
        }
        for (k, row) in moments.iter().enumerate() {
            if row.len() != max_power as usize + 1 {
                return Err(Error::validation("powers 0..=J present", format!("phase {k} has {} moments", row.len())));
            }
            if (row[0] - 1.0).abs() > 1e-12 {
                return Err(Error::validation("moment at j=0 equals 1", format!("phase {k}: {}", row[0])));
            }
            for (j, m) in row.iter().enumerate().step_by(2) {
                if *m < -1e-12 {
                    return Err(Error::validation("even-power moments nonnegative", format!("phase {k}, j={j}: {m}")));
                }
            }
        }
        Ok(Self {
            phases,
            max_power,
            moments,
        })
    }

    /// CSV with header `theta,j,moment`, one row per phase and power.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta", "j", "moment"])?;
        for (theta, row) in self.phases.iter().zip(&self.moments) {
            for (j, m) in row.iter().enumerate() {
                w.write_record([fmt_f64(*theta), j.to_string(), fmt_f64(*m)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows: BTreeMap<u64, (f64, BTreeMap<u32, f64>)> = BTreeMap::new();
        let mut order = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Parse {
                position: line + 2,
                message: format!("bad {what}"),
            };
            let theta: f64 = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("theta"))?;
            let j: u32 = rec.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("j"))?;
            let m: f64 = rec.get(2).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("moment"))?;
            let key = theta.to_bits();
            if !rows.contains_key(&key) {
                order.push(key);
            }
            rows.entry(key).or_insert((theta, BTreeMap::new())).1.insert(j, m);
        }
        let max_power = rows.values().flat_map(|r| r.1.keys().copied()).max().unwrap_or(0);
        let mut phases = Vec::new();
        let mut moments = Vec::new();
        for key in order {
            let (theta, row) = &rows[&key];
            let mut v = Vec::new();
            for j in 0..=max_power {
                v.push(*row.get(&j).ok_or_else(|| Error::Parse {
                    position: 0,
                    message: format!("missing j={j} at theta={theta}"),
                })?);
            }
            phases.push(*theta);
            moments.push(v);
        }
        Self::new(phases, max_power, moments)
    }
}

/// `count` phases `π k / count`, `k = 0..count`.
pub fn equispaced_phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| PI * k as f64 / count as f64).collect()
}

/// Matrix of `x(θ)` on the truncated space.
pub fn quadrature_operator(theta: f64, cutoff: usize) -> FockOperator {
    let a = build_annihilation(cutoff);
    let e = C64::from_polar(1.0, theta);
    &a.scale(e.conj()) + &a.adjoint().scale(e)
}

/// Additive Gaussian noise on the moments `j >= 1`.
#[derive(Clone, Copy, Debug)]
pub struct MomentNoise {
    pub sigma: f64,
    pub seed: u64,
}

/// Exact `Tr(rho x(θ)^j)` from truncated matrix powers, optionally with
/// seeded Gaussian noise. Requires `N >= n0 + J`.
pub fn simulate_quadrature_moments(
    rho: &DensityMatrix,
    phases: &[f64],
    max_power: u32,
    noise: Option<MomentNoise>,
) -> Result<QuadratureMomentSet> {
    let required = rho.support(SUPPORT_EPS) + max_power as usize;
    if required > rho.cutoff() {
        return Err(Error::truncation(format!("quadrature moments up to j={max_power}"), required, rho.cutoff()));
    }
    let mut rng = noise.map(|n| ChaCha8Rng::seed_from_u64(n.seed));
    let dist = match noise {
        Some(n) => Some(Normal::new(0.0, n.sigma).map_err(|e| Error::domain("simulate_quadrature_moments", e.to_string()))?),
        None => None,
    };
    let mut moments = Vec::with_capacity(phases.len());
    for &theta in phases {
        let x = quadrature_operator(theta, rho.cutoff());
        // rho x^j, one multiplication per power.
        let mut acc = rho.op().clone();
        let mut row = vec![1.0];
        for _ in 1..=max_power {
            acc = &acc * &x;
            let mut m = acc.trace().re;
            if let (Some(r), Some(d)) = (rng.as_mut(), dist.as_ref()) {
                m += d.sample(r);
            }
            row.push(m);
        }
        moments.push(row);
    }
    QuadratureMomentSet::new(phases.to_vec(), max_power, moments)
}

/// Fit quality for one power `j`.
#[derive(Clone, Debug)]
pub struct PowerFit {
    pub j: u32,
    pub condition: f64,
    /// Root-mean-square residual of the fit over phases.
    pub residual_rms: f64,
}

#[derive(Clone, Debug)]
pub struct HomodyneRecovery {
    /// `<T_Kq>` for `2K <= m2`.
    pub table: MultipoleTable,
    /// `<T^W_Kq>` as fitted.
    pub weyl: MultipoleTable,
    pub fits: Vec<PowerFit>,
}

/// Design matrix for power `j`. Columns: `C(j, j/2)` for even `j`, then
/// `2 C(j,p) cos((2p-j)θ)` and `-2 C(j,p) sin((2p-j)θ)` for each `p > j/2`.
fn design(j: u32, phases: &[f64]) -> DMatrix<f64> {
    let cols = j as usize + 1;
    DMatrix::from_fn(phases.len(), cols, |r, col| {
        let theta = phases[r];
        let even = j.is_multiple_of(2);
        if even && col == 0 {
            return binomial(j as i64, (j / 2) as i64);
        }
        let slot = if even { col - 1 } else { col };
        let p = j.div_ceil(2) + if even { 1 } else { 0 } + (slot / 2) as u32;
        let h = (2 * p as i64 - j as i64) as f64 * theta;
        let w = 2.0 * binomial(j as i64, p as i64);
        if slot % 2 == 0 {
            w * h.cos()
        } else {
            -w * h.sin()
        }
    })
}

/// Least-squares recovery of `<T_Kq>`, `2K <= m2`, from quadrature moments.
pub fn recover_inverse_multipoles(set: &QuadratureMomentSet, m2: u32) -> Result<HomodyneRecovery> {
    if set.max_power < m2 {
        return Err(Error::domain(
            "recover_inverse_multipoles",
            format!("moments up to j={} cannot resolve m2={m2}", set.max_power),
        ));
    }
    let mut weyl = BTreeMap::new();
    let mut fits = Vec::new();
    weyl.insert(TensorIndex::int(0, 0), c(1.0));
    for j in 1..=m2 {
        let a = design(j, &set.phases);
        if a.nrows() < a.ncols() {
            return Err(Error::Conditioning(format!("{} phases cannot resolve {} coefficients at j={j}", a.nrows(), a.ncols())));
        }
        let b = DVector::from_iterator(set.phases.len(), set.moments.iter().map(|row| row[j as usize]));
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= MIN_RECIPROCAL_CONDITION * smax {
            return Err(Error::Conditioning(format!("phase design rank-deficient at j={j} (singular values {smin:e} / {smax:e})")));
        }
        let x = svd.solve(&b, 0.0).map_err(|e| Error::Conditioning(e.to_string()))?;
        let resid = &a * &x - &b;
        fits.push(PowerFit {
            j,
            condition: smax / smin,
            residual_rms: (resid.norm_squared() / b.len() as f64).sqrt(),
        });
        let even = j % 2 == 0;
        if even {
            weyl.insert(TensorIndex { k2: j, q2: 0 }, c(x[0]));
        }
        let first = if even { 1 } else { 0 };
        for slot in 0..(j as usize).div_ceil(2) {
            let p = j.div_ceil(2) + if even { 1 } else { 0 } + slot as u32;
            let v = C64::new(x[first + 2 * slot], x[first + 2 * slot + 1]);
            let q2 = 2 * p as i32 - j as i32;
            weyl.insert(TensorIndex { k2: j, q2 }, v);
            weyl.insert(TensorIndex { k2: j, q2: -q2 }, v.conj());
        }
    }
    let weyl = MultipoleTable {
        basis: Basis::DirectWeyl,
        m2,
        entries: weyl,
    };
    let table = weyl_to_normal(&weyl);
    Ok(HomodyneRecovery { table, weyl, fits })
}

/// Solves `<T^W_Kq> = sum_n w_n <T_{K-n,q}>` for `<T_Kq>`, increasing `K`
/// at each fixed `q`; `w_0 = 1`, so no division occurs.
pub fn weyl_to_normal(weyl: &MultipoleTable) -> MultipoleTable {
    let mut out: BTreeMap<TensorIndex, C64> = BTreeMap::new();
    for (&i, &v) in &weyl.entries {
        // BTreeMap order is ascending in k2, so lower K are already present.
        let mut acc = v;
        for n in 1..=i.plus().min(i.minus()) {
            let lower = i.lowered(n).expect("valid");
            acc -= out[&lower] * weyl_coefficient(i, n);
        }
        out.insert(i, acc);
    }
    MultipoleTable {
        basis: Basis::DirectNormal,
        m2: weyl.m2,
        entries: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_state, StateSpec};
    use crate::multipole::table::multipole_table;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simulated_moment_examples() {
        let vac = make_state(&StateSpec::Fock(0), 6).unwrap();
        let s = simulate_quadrature_moments(&vac, &equispaced_phases(5), 2, None).unwrap();
        for row in &s.moments {
            assert_eq!(row[0], 1.0);
            assert_abs_diff_eq!(row[2], 1.0, epsilon = 1e-14);
        }
        let coh = make_state(&StateSpec::Coherent(c(0.8)), 40).unwrap();
        let s = simulate_quadrature_moments(&coh, &[0.0], 1, None).unwrap();
        assert_abs_diff_eq!(s.moments[0][1], 1.6, epsilon = 1e-12);
    }

    #[test]
    fn truncation_rule() {
        let one = make_state(&StateSpec::Fock(1), 3).unwrap();
        assert!(matches!(
            simulate_quadrature_moments(&one, &[0.0], 4, None),
            Err(Error::Truncation { required: 5, .. })
        ));
    }

    #[test]
    fn noiseless_round_trip() {
        let vac = make_state(&StateSpec::Fock(0), 6).unwrap();
        let s = simulate_quadrature_moments(&vac, &equispaced_phases(8), 2, None).unwrap();
        let r = recover_inverse_multipoles(&s, 2).unwrap();
        for (i, v) in &r.table.entries {
            let want = if i.k2 == 0 { 1.0 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-12, "{i}: {v}");
        }
        let one = make_state(&StateSpec::Fock(1), 8).unwrap();
        let s = simulate_quadrature_moments(&one, &equispaced_phases(8), 2, None).unwrap();
        let r = recover_inverse_multipoles(&s, 2).unwrap();
        assert!((r.table.get(TensorIndex::int(1, 0)) - c(1.0)).norm() < 1e-12);

        let coh = make_state(&StateSpec::Coherent(c(1.0)), 50).unwrap();
        let s = simulate_quadrature_moments(&coh, &equispaced_phases(14), 6, None).unwrap();
        let r = recover_inverse_multipoles(&s, 6).unwrap();
        let direct = multipole_table(&coh, 6, Basis::DirectNormal).unwrap();
        assert!(r.table.max_abs_diff(&direct) < 1e-8);
        assert!((r.table.get(TensorIndex::new(1, 1).unwrap()) - c(1.0)).norm() < 1e-10);
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let vac = make_state(&StateSpec::Fock(0), 8).unwrap();
        let s = simulate_quadrature_moments(&vac, &equispaced_phases(2), 4, None).unwrap();
        assert!(matches!(recover_inverse_multipoles(&s, 4), Err(Error::Conditioning(_))));
        // Phases differing by π give the same harmonics up to sign.
        let s = simulate_quadrature_moments(&vac, &[0.0, PI, 2.0 * PI], 2, None).unwrap();
        assert!(matches!(recover_inverse_multipoles(&s, 2), Err(Error::Conditioning(_))));
    }

    #[test]
    fn noise_is_seeded() {
        let vac = make_state(&StateSpec::Fock(0), 8).unwrap();
        let noise = Some(MomentNoise { sigma: 1e-3, seed: 7 });
        let a = simulate_quadrature_moments(&vac, &equispaced_phases(6), 3, noise).unwrap();
        let b = simulate_quadrature_moments(&vac, &equispaced_phases(6), 3, noise).unwrap();
        assert_eq!(a, b);
        let r = recover_inverse_multipoles(&a, 3).unwrap();
        assert!(r.fits.iter().any(|f| f.residual_rms > 0.0));
    }

    #[test]
    fn csv_roundtrip() {
        let coh = make_state(&StateSpec::Coherent(C64::new(0.3, 0.2)), 30).unwrap();
        let s = simulate_quadrature_moments(&coh, &equispaced_phases(4), 3, None).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("theta,j,moment\n"));
        assert_eq!(QuadratureMomentSet::read_csv(buf.as_slice()).unwrap(), s);
    }
}
