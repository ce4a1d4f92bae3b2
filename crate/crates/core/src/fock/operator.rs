use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::laguerre;

pub type C64 = Complex64;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense operator on the truncated Fock space `span{|0>, ..., |N>}` of one
/// mode, or on the tensor product of two such spaces.
///
/// Single-mode row and column indices are photon numbers. For two modes the
/// joint index of `|n1> ⊗ |n2>` is `n1 (N+1) + n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    cutoff: usize,
    modes: u32,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn zeros(cutoff: usize) -> Self {
        let d = cutoff + 1;
        Self {
            cutoff,
            modes: 1,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(cutoff: usize) -> Self {
        let d = cutoff + 1;
        Self {
            cutoff,
            modes: 1,
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Wraps a single-mode matrix. Fails unless it is `(N+1) x (N+1)` with finite entries.
    pub fn from_matrix(cutoff: usize, matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_modes(cutoff, 1, matrix)
    }

    pub(crate) fn with_modes(cutoff: usize, modes: u32, matrix: DMatrix<C64>) -> Result<Self> {
        let d = (cutoff + 1).pow(modes);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::validation(
                "cutoff consistent with dimension",
                format!(
                    "{}x{} matrix for cutoff {cutoff} and {modes} mode(s)",
                    matrix.nrows(),
                    matrix.ncols()
                ),
            ));
        }
        if let Some(bad) = matrix.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("finite entries", format!("found {bad}")));
        }
        Ok(Self {
            cutoff,
            modes,
            matrix,
        })
    }

    /// Real single-mode matrix from a closure over `(row, col)`.
    pub(crate) fn from_real_fn(cutoff: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let d = cutoff + 1;
        Self {
            cutoff,
            modes: 1,
            matrix: DMatrix::from_fn(d, d, |r, col| c(f(r, col))),
        }
    }

    /// Rank-one `|m><n|`.
    pub fn dyad(cutoff: usize, m: usize, n: usize) -> Self {
        let mut op = Self::zeros(cutoff);
        op.matrix[(m, n)] = c(1.0);
        op
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> u32 {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, v: C64) {
        self.matrix[(row, col)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            modes: self.modes,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            cutoff: self.cutoff,
            modes: self.modes,
            matrix: &self.matrix * s,
        }
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let a = &self.matrix;
        let b = &other.matrix;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..a.nrows() {
            for k in 0..a.ncols() {
                let x = a[(r, k)];
                if x.re != 0.0 || x.im != 0.0 {
                    acc += x * b[(k, r)];
                }
            }
        }
        acc
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A_ij - A_ji^*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::identity_like(self);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn identity_like(other: &Self) -> Self {
        let d = other.dim();
        Self {
            cutoff: other.cutoff,
            modes: other.modes,
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Upper-left `(n+1) x (n+1)` block as a single-mode operator with cutoff `n`.
    pub fn truncate(&self, n: usize) -> Self {
        assert_eq!(self.modes, 1);
        Self {
            cutoff: n,
            modes: 1,
            matrix: self.matrix.view((0, 0), (n + 1, n + 1)).into_owned(),
        }
    }

    /// Embeds a single-mode operator into a larger cutoff, padding with zeros.
    pub fn embed(&self, n: usize) -> Self {
        assert!(n >= self.cutoff && self.modes == 1);
        let mut out = Self::zeros(n);
        out.matrix
            .view_mut((0, 0), (self.cutoff + 1, self.cutoff + 1))
            .copy_from(&self.matrix);
        out
    }
}

impl<'a> Mul<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator {
            cutoff: self.cutoff,
            modes: self.modes,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator {
            cutoff: self.cutoff,
            modes: self.modes,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator {
            cutoff: self.cutoff,
            modes: self.modes,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Annihilation operator: `<n-1| a |n> = sqrt(n)`.
pub fn build_annihilation(cutoff: usize) -> FockOperator {
    FockOperator::from_real_fn(cutoff, |r, col| {
        if col == r + 1 {
            (col as f64).sqrt()
        } else {
            0.0
        }
    })
}

pub fn build_creation(cutoff: usize) -> FockOperator {
    build_annihilation(cutoff).adjoint()
}

pub fn build_number(cutoff: usize) -> FockOperator {
    FockOperator::from_real_fn(cutoff, |r, col| if r == col { r as f64 } else { 0.0 })
}

/// Matrix of the displacement operator `D(alpha)` from the Laguerre form of
/// its Fock matrix elements. Exactly unitary only as `N -> inf`.
pub fn build_displacement(alpha: C64, cutoff: usize) -> FockOperator {
    let d = cutoff + 1;
    let x = alpha.norm_sqr();
    let gauss = (-0.5 * x).exp();
    let mut m = DMatrix::zeros(d, d);
    for row in 0..d {
        for col in 0..d {
            // Both branches use a nonnegative upper index; the ratio of
            // factorials is accumulated as a product of square roots.
            let (lo, hi) = if row >= col { (col, row) } else { (row, col) };
            let mut ratio = 1.0;
            for k in lo + 1..=hi {
                ratio /= (k as f64).sqrt();
            }
            let lag = laguerre(lo as u32, (hi - lo) as i64, x).expect("finite |alpha|^2");
            let phase = if row >= col {
                alpha.powu((row - col) as u32)
            } else {
                (-alpha.conj()).powu((col - row) as u32)
            };
            m[(row, col)] = phase * (gauss * ratio * lag);
        }
    }
    FockOperator {
        cutoff,
        modes: 1,
        matrix: m,
    }
}

/// Kronecker product `A ⊗ B` on the two-mode space, joint index `n1 (N+1) + n2`.
pub fn tensor_product(a: &FockOperator, b: &FockOperator) -> Result<FockOperator> {
    if a.cutoff != b.cutoff {
        return Err(Error::CutoffMismatch(a.cutoff, b.cutoff));
    }
    if a.modes != 1 || b.modes != 1 {
        return Err(Error::Unsupported("tensor product of multimode operators".into()));
    }
    Ok(FockOperator {
        cutoff: a.cutoff,
        modes: 2,
        matrix: a.matrix.kronecker(&b.matrix),
    })
}
