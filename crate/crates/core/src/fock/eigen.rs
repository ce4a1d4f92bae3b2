//! Dense cyclic Jacobi diagonalization of Hermitian matrices.
//!
//! Real symmetric input takes a purely real path; complex input first rotates
//! the phase of each pivot to make it real, then applies the same real
//! rotation. Eigenvalues are returned sorted descending.

use nalgebra::DMatrix;

use super::operator::{c, FockOperator, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<C64>,
    pub dim: usize,
}

impl EigenDecomposition {
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i).iter().copied().collect()
    }

    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= c(self.values[j]);
        }
        scaled * self.vectors.adjoint()
    }

    /// `max_i ||A v_i - lambda_i v_i||_inf`.
    pub fn max_residual(&self, a: &DMatrix<C64>) -> f64 {
        let av = a * &self.vectors;
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for i in 0..self.dim {
                let r = av[(i, j)] - self.vectors[(i, j)] * self.values[j];
                worst = worst.max(r.norm());
            }
        }
        worst
    }

    /// `max |V^dagger V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - c(target)).norm());
            }
        }
        worst
    }
}

/// Full spectrum of a Hermitian operator (single- or two-mode).
pub fn hermitian_eigensolve(a: &FockOperator) -> Result<EigenDecomposition> {
    eigensolve_matrix(a.matrix())
}

/// Full spectrum of a Hermitian matrix. Fails if `max |A - A^dagger|`
/// exceeds `1e-10 * max(1, max|A|)`.
pub fn eigensolve_matrix(a: &DMatrix<C64>) -> Result<EigenDecomposition> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation("square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    let scale = a.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::validation("Hermitian", format!("max |A - A^dagger| = {defect:e}")));
    }

    let (values, vectors) = if a.iter().all(|z| z.im == 0.0) {
        let re = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let (vals, vecs) = jacobi_real(re);
        (vals, vecs.map(c))
    } else {
        let h = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
        jacobi_complex(h)
    };
    Ok(sorted(values, vectors))
}

fn sorted(values: Vec<f64>, vectors: DMatrix<C64>) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let vals = order.iter().map(|&i| values[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, k| vectors[(r, order[k])]);
    EigenDecomposition {
        values: vals,
        vectors: vecs,
        dim: n,
    }
}

fn off_norm_sq<T>(a: &DMatrix<T>, norm_sq: impl Fn(&T) -> f64) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += norm_sq(&a[(i, j)]);
            }
        }
    }
    s
}

/// Rotation `(cos, sin, tan)` annihilating a real pivot `apq` between
/// diagonal entries `app`, `aqq`.
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let cs = 1.0 / (t * t + 1.0).sqrt();
    (cs, t * cs, t)
}

fn jacobi_real(mut a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let total: f64 = a.iter().map(|x| x * x).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total;
    for _ in 0..MAX_SWEEPS {
        if off_norm_sq(&a, |x| x * x) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Skip pivots already negligible against both diagonals.
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let (cs, sn, t) = rotation(app, aqq, apq);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    a[(p, k)] = a[(k, p)];
                    a[(q, k)] = a[(k, q)];
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

fn jacobi_complex(mut a: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total;
    for _ in 0..MAX_SWEEPS {
        if off_norm_sq(&a, |z| z.norm_sqr()) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[(p, q)];
                let r = z.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = c(0.0);
                    a[(q, p)] = c(0.0);
                    continue;
                }
                // Phase step: column q times e^{-i phi}, row q times e^{i phi}.
                let ph = (z / r).conj();
                for k in 0..n {
                    if k != q {
                        a[(k, q)] *= ph;
                        a[(q, k)] = a[(k, q)].conj();
                    }
                    v[(k, q)] *= ph;
                }
                let (cs, sn, t) = rotation(app, aqq, r);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * sn;
                    a[(k, q)] = akp * sn + akq * cs;
                }
                for k in 0..n {
                    a[(p, k)] = a[(k, p)].conj();
                    a[(q, k)] = a[(k, q)].conj();
                }
                a[(p, p)] = c(app - t * r);
                a[(q, q)] = c(aqq + t * r);
                a[(p, q)] = c(0.0);
                a[(q, p)] = c(0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * sn;
                    v[(k, q)] = vkp * sn + vkq * cs;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::build_number;
    use approx::assert_abs_diff_eq;

    fn diag(vals: &[f64]) -> DMatrix<C64> {
        DMatrix::from_fn(vals.len(), vals.len(), |i, j| if i == j { c(vals[i]) } else { c(0.0) })
    }

    #[test]
    fn identity_and_diagonal() {
        let e = eigensolve_matrix(&DMatrix::identity(4, 4)).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
        let e = eigensolve_matrix(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn number_operator_spectrum() {
        let e = hermitian_eigensolve(&build_number(5)).unwrap();
        for (i, v) in e.values.iter().enumerate() {
            assert_abs_diff_eq!(*v, (5 - i) as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(eigensolve_matrix(&m), Err(Error::Validation { .. })));
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 2 and 0.
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(1.0)]);
        let e = eigensolve_matrix(&m).unwrap();
        assert_abs_diff_eq!(e.values[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], 0.0, epsilon = 1e-15);
        assert!(e.max_residual(&m) < 1e-14);
    }

    #[test]
    fn agrees_with_library_solver_on_real_symmetric() {
        let n = 12;
        let m = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 7 + i * j) % 11) as f64 - 5.0);
        let e = eigensolve_matrix(&m.map(c)).unwrap();
        let mut lib: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        lib.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in e.values.iter().zip(&lib) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
    }
}
