//! Chromatic height and the collapsed grading.
//!
//! `K(n)_*` is a graded field with `v_n` invertible in degree `2(p^n - 1)`.
//! Setting `v_n = 1` turns every `K(n)_*`-module into an F_p vector space graded by
//! `Z / 2(p^n - 1)`; that residue grading is used throughout the crate.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::field::Fp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeightError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("chromatic height must be at least 1")]
    ZeroHeight,
    #[error("modulus 2(p^n - 1) overflows for p = {p}, n = {n}")]
    Overflow { p: u32, n: u32 },
}

/// A prime together with a chromatic height `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Height {
    field: Fp,
    n: u32,
    modulus: u32,
}

impl Height {
    pub fn new(p: u32, n: u32) -> Result<Self, HeightError> {
        let field = Fp::new(p).ok_or(HeightError::NotPrime(p))?;
        if n == 0 {
            return Err(HeightError::ZeroHeight);
        }
        let pn = (p as u64)
            .checked_pow(n)
            .filter(|&x| 2 * (x - 1) <= u32::MAX as u64)
            .ok_or(HeightError::Overflow { p, n })?;
        Ok(Height {
            field,
            n,
            modulus: (2 * (pn - 1)) as u32,
        })
    }

    /// Height `n` at the prime 2.
    pub fn at_two(n: u32) -> Result<Self, HeightError> {
        Self::new(2, n)
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `2(p^n - 1)`, the degree of `v_n`.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn residue(&self, degree: i64) -> u32 {
        degree.rem_euclid(self.modulus as i64) as u32
    }

    /// `|x| = 2(p^n - 1)/(p - 1)`, the degree of the generator of
    /// `K(n)^*K(Z/p^j, n)`.
    pub fn x_degree(&self) -> u64 {
        let p = self.p() as u64;
        2 * (p.pow(self.n) - 1) / (p - 1)
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K({}) at p={}", self.n, self.p())
    }
}

/// Dimensions of a graded F_p vector space over `Z/modulus`.
///
/// Only nonzero entries are stored; a missing residue has dimension zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedDims {
    height: Height,
    dims: BTreeMap<u32, usize>,
}

impl GradedDims {
    pub fn zero(height: Height) -> Self {
        GradedDims {
            height,
            dims: BTreeMap::new(),
        }
    }

    /// The one-dimensional space in degree 0.
    pub fn unit(height: Height) -> Self {
        let mut g = Self::zero(height);
        g.add(0, 1);
        g
    }

    /// Degrees may be any integers; they are reduced mod the modulus and summed.
    pub fn from_pairs<I: IntoIterator<Item = (i64, usize)>>(height: Height, pairs: I) -> Self {
        let mut g = Self::zero(height);
        for (d, k) in pairs {
            g.add(height.residue(d), k);
        }
        g
    }

    pub fn height(&self) -> Height {
        self.height
    }

    pub fn get(&self, residue: u32) -> usize {
        self.dims.get(&(residue % self.height.modulus())).copied().unwrap_or(0)
    }

    pub fn add(&mut self, residue: u32, k: usize) {
        if k == 0 {
            return;
        }
        *self.dims.entry(residue % self.height.modulus()).or_insert(0) += k;
    }

    pub fn set(&mut self, residue: u32, k: usize) {
        let r = residue % self.height.modulus();
        if k == 0 {
            self.dims.remove(&r);
        } else {
            self.dims.insert(r, k);
        }
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Nonzero `(residue, dimension)` pairs in increasing residue order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.dims.iter().map(|(&d, &k)| (d, k))
    }

    /// Dimensions of the tensor product over F_p.
    pub fn convolve(&self, other: &GradedDims) -> GradedDims {
        assert_eq!(self.height, other.height, "convolving tables of different heights");
        let m = self.height.modulus() as u64;
        let mut out = GradedDims::zero(self.height);
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                out.add(((a as u64 + b as u64) % m) as u32, x * y);
            }
        }
        out
    }

    pub fn shifted(&self, by: u32) -> GradedDims {
        let m = self.height.modulus() as u64;
        let mut out = GradedDims::zero(self.height);
        for (d, k) in self.iter() {
            out.add(((d as u64 + by as u64) % m) as u32, k);
        }
        out
    }
}

impl fmt::Display for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (d, k)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}: {k}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_values() {
        assert_eq!(Height::at_two(1).unwrap().modulus(), 2);
        assert_eq!(Height::at_two(2).unwrap().modulus(), 6);
        assert_eq!(Height::at_two(3).unwrap().modulus(), 14);
        assert_eq!(Height::new(3, 2).unwrap().modulus(), 16);
        assert_eq!(Height::at_two(2).unwrap().x_degree(), 6);
        assert_eq!(Height::new(3, 2).unwrap().x_degree(), 8);
    }

    #[test]
    fn invalid_heights() {
        assert_eq!(Height::new(4, 1), Err(HeightError::NotPrime(4)));
        assert_eq!(Height::new(2, 0), Err(HeightError::ZeroHeight));
        assert!(matches!(Height::new(2, 40), Err(HeightError::Overflow { .. })));
    }

    #[test]
    fn keys_are_reduced() {
        let h = Height::at_two(2).unwrap();
        let g = GradedDims::from_pairs(h, [(0, 1), (6, 2), (-1, 1), (0, 0)]);
        assert_eq!(g.get(0), 3);
        assert_eq!(g.get(5), 1);
        assert_eq!(g.get(11), 1);
        assert_eq!(g.total(), 4);
        assert_eq!(g.to_string(), "{0: 3, 5: 1}");
    }

    #[test]
    fn convolution_wraps() {
        let h = Height::at_two(2).unwrap();
        let a = GradedDims::from_pairs(h, [(0, 1), (4, 1)]);
        let b = GradedDims::from_pairs(h, [(2, 2)]);
        let c = a.convolve(&b);
        assert_eq!(c.get(2), 2);
        assert_eq!(c.get(0), 2);
        assert_eq!(c.total(), 4);
    }
}
