use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor label `(K, q)` stored doubled as `(2K, 2q)` so that half-integer
/// labels need no floating-point arithmetic.
///
/// Invariants: `|q2| <= k2` and `k2 = q2 (mod 2)`, hence `K + q` and `K - q`
/// are nonnegative integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TensorIndex {
    pub k2: u32,
    pub q2: i32,
}

impl TensorIndex {
    pub fn new(k2: u32, q2: i32) -> Result<Self> {
        if q2.unsigned_abs() > k2 || (k2 as i64 - q2 as i64).rem_euclid(2) != 0 {
            return Err(Error::InvalidIndex { k2, q2 });
        }
        Ok(Self { k2, q2 })
    }

    /// Index with integer `K` and `q`.
    pub fn int(k: u32, q: i32) -> Self {
        Self::new(2 * k, 2 * q).expect("valid integer index")
    }

    /// Index from `K + q` and `K - q`, the exponents of `a^dagger` and `a`.
    pub fn from_exponents(plus: u32, minus: u32) -> Self {
        Self {
            k2: plus + minus,
            q2: plus as i32 - minus as i32,
        }
    }

    pub fn k(&self) -> f64 {
        self.k2 as f64 / 2.0
    }

    pub fn q(&self) -> f64 {
        self.q2 as f64 / 2.0
    }

    /// `K + q`.
    pub fn plus(&self) -> u32 {
        ((self.k2 as i64 + self.q2 as i64) / 2) as u32
    }

    /// `K - q`.
    pub fn minus(&self) -> u32 {
        ((self.k2 as i64 - self.q2 as i64) / 2) as u32
    }

    /// `2|q|`: the stripe offset.
    pub fn offset(&self) -> usize {
        self.q2.unsigned_abs() as usize
    }

    /// `K + |q|`: largest photon number touched by the inverse operator.
    pub fn reach(&self) -> usize {
        ((self.k2 + self.q2.unsigned_abs()) / 2) as usize
    }

    /// `(K, -q)`.
    pub fn conj(&self) -> Self {
        Self {
            k2: self.k2,
            q2: -self.q2,
        }
    }

    /// Same `q` with `K` replaced by `K - n`; `None` if that leaves `|q| > K`.
    pub fn lowered(&self, n: u32) -> Option<Self> {
        let k2 = self.k2.checked_sub(2 * n)?;
        Self::new(k2, self.q2).ok()
    }

    /// All `(k2, q2)` for `k2 = 0..=k2max`, `q2 = -k2, -k2+2, ..., k2`.
    pub fn all_upto(k2max: u32) -> impl Iterator<Item = TensorIndex> {
        (0..=k2max).flat_map(Self::with_rank)
    }

    /// The `2K + 1` indices sharing `k2`, ascending in `q2`.
    pub fn with_rank(k2: u32) -> impl Iterator<Item = TensorIndex> {
        (0..=k2).map(move |i| TensorIndex {
            k2,
            q2: 2 * i as i32 - k2 as i32,
        })
    }
}

fn half(v: i64) -> String {
    if v % 2 == 0 {
        format!("{}", v / 2)
    } else {
        format!("{v}/2")
    }
}

impl fmt::Display for TensorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(K={}, q={})", half(self.k2 as i64), half(self.q2 as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TensorIndex::new(1, 1).is_ok());
        assert!(TensorIndex::new(1, 0).is_err());
        assert!(TensorIndex::new(2, 4).is_err());
        assert!(TensorIndex::new(3, -3).is_ok());
    }

    #[test]
    fn exponents_and_display() {
        let i = TensorIndex::new(3, -1).unwrap();
        assert_eq!((i.plus(), i.minus()), (1, 2));
        assert_eq!(TensorIndex::from_exponents(1, 2), i);
        assert_eq!(i.to_string(), "(K=3/2, q=-1/2)");
        assert_eq!(i.reach(), 2);
        assert_eq!(i.conj().q2, 1);
    }

    #[test]
    fn enumeration_counts() {
        // sum_{k2 <= 4} (k2 + 1) = 15
        assert_eq!(TensorIndex::all_upto(4).count(), 15);
        let ranks: Vec<i32> = TensorIndex::with_rank(2).map(|i| i.q2).collect();
        assert_eq!(ranks, vec![-2, 0, 2]);
    }
}
