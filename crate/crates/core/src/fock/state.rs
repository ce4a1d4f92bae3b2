use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::eigen::hermitian_eigensolve;
use super::operator::{c, FockOperator, C64};
use crate::error::{Error, Result};
use crate::special::poisson_amplitudes;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
/// Minimum retained norm of a coherent component inside the cutoff.
pub const NORM_RETENTION: f64 = 1.0 - 1e-8;

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: FockOperator,
}

impl DensityMatrix {
    /// Validates `op` without renormalizing it.
    pub fn new(op: FockOperator) -> Result<Self> {
        let herm = op.hermiticity_defect();
        if herm >= HERMITIAN_TOL {
            return Err(Error::validation("Hermitian", format!("max |rho_mn - rho_nm^*| = {herm:e}")));
        }
        let tr = op.trace();
        if (tr - c(1.0)).norm() >= TRACE_TOL {
            return Err(Error::validation("unit trace", format!("trace = {tr}")));
        }
        let eig = hermitian_eigensolve(&op)?;
        let min = *eig.values.last().expect("nonempty");
        if min < PSD_TOL {
            return Err(Error::validation("positive semidefinite", format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    /// Normalizes by the trace, then validates.
    pub fn normalized(op: FockOperator) -> Result<Self> {
        let tr = op.trace();
        if tr.norm() == 0.0 {
            return Err(Error::validation("unit trace", "trace is zero"));
        }
        let scaled = op.scale(c(1.0) / tr);
        let herm = scaled.hermiticity_defect();
        if herm >= HERMITIAN_TOL {
            return Err(Error::validation("Hermitian", format!("max |rho_mn - rho_nm^*| = {herm:e}")));
        }
        // Symmetrize away rounding from the division.
        let sym = (&scaled + &scaled.adjoint()).scale(c(0.5));
        Self::new(sym)
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_ket(cutoff: usize, ket: &[C64]) -> Result<Self> {
        if ket.len() != cutoff + 1 {
            return Err(Error::validation(
                "cutoff consistent with dimension",
                format!("ket of length {} for cutoff {cutoff}", ket.len()),
            ));
        }
        let v = DVector::from_column_slice(ket);
        let norm_sq = v.norm_squared();
        if norm_sq == 0.0 {
            return Err(Error::validation("unit trace", "zero ket"));
        }
        let m = &v * v.adjoint() / c(norm_sq);
        Self::normalized(FockOperator::from_matrix(cutoff, m)?)
    }

    pub fn op(&self) -> &FockOperator {
        &self.op
    }

    pub fn cutoff(&self) -> usize {
        self.op.cutoff()
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.op.get(m, n)
    }

    /// `Tr(rho X)`.
    pub fn expectation(&self, x: &FockOperator) -> C64 {
        self.op.trace_product(x)
    }

    /// `sum_n n rho_nn`.
    pub fn mean_photon_number(&self) -> f64 {
        (0..=self.cutoff()).map(|n| n as f64 * self.get(n, n).re).sum()
    }

    /// Largest `n` with a row or column of `rho` carrying an entry above `eps`.
    pub fn support(&self, eps: f64) -> usize {
        let d = self.cutoff() + 1;
        (0..d)
            .rev()
            .find(|&n| (0..d).any(|k| self.get(n, k).norm() > eps || self.get(k, n).norm() > eps))
            .unwrap_or(0)
    }

    /// Re-expresses the state at a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Self {
        Self {
            op: self.op.embed(cutoff),
        }
    }
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.op.trace_product(&rho.op).re
}

/// Description of a state to build at a chosen cutoff.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Coherent(C64),
    /// Superposition `sum_l psi_l |alpha e^{2 pi i l / branches}>`; equal
    /// amplitudes when `amplitudes` is `None`.
    Cat {
        alpha: C64,
        branches: usize,
        amplitudes: Option<Vec<C64>>,
    },
    /// `(|m><m| + |n><n|)/2 + (lambda |m><n| + lambda^* |n><m|)/2` with `|lambda| <= 1`.
    Dyad { m: usize, n: usize, mixing: C64 },
    Explicit(FockOperator),
}

/// Smallest cutoff retaining `NORM_RETENTION` of `|alpha>`.
pub fn coherent_required_cutoff(alpha: C64) -> usize {
    let mut acc = 0.0;
    let mut amp = (-0.5 * alpha.norm_sqr()).exp();
    let r = alpha.norm();
    let mut n = 0usize;
    loop {
        acc += amp * amp;
        if acc >= NORM_RETENTION || n > 10_000 {
            return n;
        }
        n += 1;
        amp *= r / (n as f64).sqrt();
    }
}

fn check_coherent(alpha: C64, cutoff: usize) -> Result<()> {
    let kept: f64 = poisson_amplitudes(alpha, cutoff).iter().map(|z| z.norm_sqr()).sum();
    if kept < NORM_RETENTION {
        return Err(Error::truncation(
            format!("coherent component alpha = {alpha}"),
            coherent_required_cutoff(alpha),
            cutoff,
        ));
    }
    Ok(())
}

/// Ket of a cat state inside the cutoff, unnormalized.
pub fn cat_ket(alpha: C64, branches: usize, amplitudes: &[C64], cutoff: usize) -> Vec<C64> {
    let mut ket = vec![c(0.0); cutoff + 1];
    for (l, psi) in amplitudes.iter().enumerate() {
        let beta = alpha * C64::from_polar(1.0, 2.0 * PI * l as f64 / branches as f64);
        for (k, a) in poisson_amplitudes(beta, cutoff).into_iter().enumerate() {
            ket[k] += psi * a;
        }
    }
    ket
}

pub fn make_state(spec: &StateSpec, cutoff: usize) -> Result<DensityMatrix> {
    match spec {
        StateSpec::Fock(n) => {
            if *n > cutoff {
                return Err(Error::truncation(format!("Fock state |{n}>"), *n, cutoff));
            }
            DensityMatrix::new(FockOperator::dyad(cutoff, *n, *n))
        }
        StateSpec::Coherent(alpha) => {
            check_coherent(*alpha, cutoff)?;
            DensityMatrix::from_ket(cutoff, &poisson_amplitudes(*alpha, cutoff))
        }
        StateSpec::Cat {
            alpha,
            branches,
            amplitudes,
        } => {
            if *branches == 0 {
                return Err(Error::domain("make_state", "cat needs at least one branch"));
            }
            let amps = match amplitudes {
                Some(a) if a.len() != *branches => {
                    return Err(Error::domain(
                        "make_state",
                        format!("{} amplitudes for {branches} branches", a.len()),
                    ))
                }
                Some(a) => a.clone(),
                None => vec![c(1.0); *branches],
            };
            check_coherent(*alpha, cutoff)?;
            let ket = cat_ket(*alpha, *branches, &amps, cutoff);
            DensityMatrix::from_ket(cutoff, &ket).map_err(|e| match e {
                Error::Validation { invariant: "unit trace", .. } => {
                    Error::domain("make_state", "cat amplitudes interfere to a zero vector")
                }
                other => other,
            })
        }
        StateSpec::Dyad { m, n, mixing } => {
            let top = (*m).max(*n);
            if top > cutoff {
                return Err(Error::truncation(format!("dyad |{m}><{n}|"), top, cutoff));
            }
            if mixing.norm() > 1.0 + 1e-12 {
                return Err(Error::domain("make_state", format!("|mixing| = {} exceeds 1", mixing.norm())));
            }
            let mut op = FockOperator::zeros(cutoff);
            if m == n {
                op.set(*m, *m, c(1.0));
            } else {
                op.set(*m, *m, c(0.5));
                op.set(*n, *n, c(0.5));
                op.set(*m, *n, mixing * 0.5);
                op.set(*n, *m, mixing.conj() * 0.5);
            }
            DensityMatrix::new(op)
        }
        StateSpec::Explicit(op) => {
            if op.cutoff() > cutoff {
                let tail = op.truncate(cutoff);
                let lost = (op.trace() - tail.trace()).norm();
                if lost > 1e-12 {
                    return Err(Error::truncation("explicit matrix", op.cutoff(), cutoff));
                }
                return DensityMatrix::normalized(tail);
            }
            DensityMatrix::normalized(op.embed(cutoff))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ExplicitDoc {
    cutoff: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Parses `{"cutoff": N, "re": [[...]], "im": [[...]]}` into an operator.
pub fn explicit_from_json(text: &str) -> Result<FockOperator> {
    let doc: ExplicitDoc = serde_json::from_str(text)?;
    let d = doc.cutoff + 1;
    let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
    if !shape_ok(&doc.re) || !shape_ok(&doc.im) {
        return Err(Error::validation(
            "cutoff consistent with dimension",
            format!("re/im must both be {d}x{d} for cutoff {}", doc.cutoff),
        ));
    }
    let m = DMatrix::from_fn(d, d, |i, j| C64::new(doc.re[i][j], doc.im[i][j]));
    FockOperator::from_matrix(doc.cutoff, m)
}

pub fn explicit_from_file(path: &Path) -> Result<FockOperator> {
    explicit_from_json(&std::fs::read_to_string(path)?)
}

/// Serializes an operator in the explicit-matrix JSON layout.
pub fn explicit_to_json(op: &FockOperator) -> Result<String> {
    let d = op.dim();
    let doc = ExplicitDoc {
        cutoff: op.cutoff(),
        re: (0..d).map(|i| (0..d).map(|j| op.get(i, j).re).collect()).collect(),
        im: (0..d).map(|i| (0..d).map(|j| op.get(i, j).im).collect()).collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::build_number;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fock_state() {
        let rho = make_state(&StateSpec::Fock(2), 4).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                let e = if m == 2 && n == 2 { 1.0 } else { 0.0 };
                assert_eq!(rho.get(m, n), c(e));
            }
        }
        assert_eq!(purity(&rho), 1.0);
        assert!(matches!(make_state(&StateSpec::Fock(5), 4), Err(Error::Truncation { .. })));
    }

    #[test]
    fn coherent_vacuum_population() {
        let rho = make_state(&StateSpec::Coherent(c(1.0)), 40).unwrap();
        assert_abs_diff_eq!(rho.get(0, 0).re, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_truncation_error_carries_hint() {
        let err = make_state(&StateSpec::Coherent(c(3.0)), 10).unwrap_err();
        match err {
            Error::Truncation { required, cutoff, .. } => {
                assert_eq!(cutoff, 10);
                assert!(required > 10);
                assert!(make_state(&StateSpec::Coherent(c(3.0)), required).is_ok());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn mixed_purity() {
        let mut op = FockOperator::zeros(3);
        op.set(0, 0, c(0.5));
        op.set(1, 1, c(0.5));
        let rho = DensityMatrix::new(op).unwrap();
        assert_abs_diff_eq!(purity(&rho), 0.5);
    }

    #[test]
    fn two_branch_cat_is_parity_symmetric() {
        let rho = make_state(
            &StateSpec::Cat {
                alpha: c(2.0),
                branches: 2,
                amplitudes: None,
            },
            40,
        )
        .unwrap();
        // Invariance under alpha -> -alpha: rho_mn = (-1)^{m+n} rho_mn.
        for m in 0..=40 {
            for n in 0..=40 {
                let flipped = rho.get(m, n) * if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((flipped - rho.get(m, n)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn coherent_mean_photon_number() {
        let n = build_number(40);
        for alpha in [C64::new(0.5, 0.2), C64::new(-1.1, 1.7), c(3.0)] {
            let rho = make_state(&StateSpec::Coherent(alpha), 40).unwrap();
            assert_abs_diff_eq!(rho.expectation(&n).re, alpha.norm_sqr(), epsilon = 1e-8);
        }
    }

    #[test]
    fn explicit_json_roundtrip_and_validation() {
        let good = r#"{"cutoff": 1, "re": [[0.5, 0.5], [0.5, 0.5]], "im": [[0, 0], [0, 0]]}"#;
        let op = explicit_from_json(good).unwrap();
        let rho = make_state(&StateSpec::Explicit(op.clone()), 1).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-15);
        let again = explicit_from_json(&explicit_to_json(&op).unwrap()).unwrap();
        assert_eq!(again, op);

        let not_psd = r#"{"cutoff": 1, "re": [[0.5, 1.0], [1.0, 0.5]], "im": [[0, 0], [0, 0]]}"#;
        let err = make_state(&StateSpec::Explicit(explicit_from_json(not_psd).unwrap()), 1).unwrap_err();
        assert!(err.to_string().contains("positive semidefinite"));

        let not_herm = r#"{"cutoff": 1, "re": [[0.5, 0.1], [0.0, 0.5]], "im": [[0, 0], [0, 0]]}"#;
        let err = make_state(&StateSpec::Explicit(explicit_from_json(not_herm).unwrap()), 1).unwrap_err();
        assert!(err.to_string().contains("Hermitian"));

        let bad_shape = r#"{"cutoff": 2, "re": [[1.0]], "im": [[0.0]]}"#;
        assert!(explicit_from_json(bad_shape).is_err());
    }

    #[test]
    fn dyad_state() {
        let rho = make_state(&StateSpec::Dyad { m: 0, n: 1, mixing: c(1.0) }, 3).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-15);
        assert_eq!(rho.get(0, 1), c(0.5));
        assert!(make_state(&StateSpec::Dyad { m: 0, n: 1, mixing: c(1.5) }, 3).is_err());
    }
}
