//! The twisted Atiyah–Hirzebruch spectral sequence for finite complexes at p = 2.
//!
//! The coefficient direction is collapsed by `v_n = 1`, so a page is a list of
//! F_2 dimensions indexed by the filtration degree `s`. A differential `d_r`
//! can be nonzero only when `r - 1` is a multiple of `2(2^n - 1)`; the first
//! candidate is `d_{2^{n+1}-1}`, given on `x` by
//!
//! `d(x) = Q_n(x) + x · Q_{n-1} ⋯ Q_1(H)`,
//!
//! where the composite is the identity when `n = 1`. Later differentials are
//! never computed; [`AhssPage::converged`] reports when none can be nonzero.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graded::{GradedDims, Height};
use crate::linalg::Matrix;
use crate::steenrod::{Poly, SteenrodError, SteenrodRing};
use crate::field::Fp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AhssError {
    #[error("the twisted spectral sequence is implemented for p = 2 only, got p = {0}")]
    Prime(u32),
    #[error("the cohomology ring is not finite")]
    InfiniteRing,
    #[error("twist has degree {got}, expected n + 2 = {expected}")]
    TwistDegree { expected: u32, got: u32 },
    #[error("the first differential starts from E_2, got E_{0}")]
    PageIndex(u32),
    #[error("d∘d is nonzero starting in filtration {0}")]
    NotSquareZero(u32),
    #[error(transparent)]
    Steenrod(#[from] SteenrodError),
}

/// The mod 2 reduction of an integral twist, an element of `H^{n+2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistClass {
    class: Poly,
}

impl TwistClass {
    pub fn zero() -> Self {
        TwistClass { class: Poly::zero() }
    }

    /// Checks `|H| = n + 2`; the zero class is always accepted.
    pub fn new(ring: &SteenrodRing, height: Height, class: Poly) -> Result<Self, AhssError> {
        if let Some(d) = ring.degree_of(&class)? {
            if d != height.n() + 2 {
                return Err(AhssError::TwistDegree {
                    expected: height.n() + 2,
                    got: d,
                });
            }
        }
        Ok(TwistClass { class })
    }

    /// `k · H` reduced mod 2.
    pub fn from_multiple(ring: &SteenrodRing, height: Height, k: i64, class: Poly) -> Result<Self, AhssError> {
        let t = Self::new(ring, height, class)?;
        Ok(if k.rem_euclid(2) == 0 { Self::zero() } else { t })
    }

    pub fn class(&self) -> &Poly {
        &self.class
    }

    pub fn is_zero(&self) -> bool {
        self.class.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AhssPage {
    height: Height,
    ring: SteenrodRing,
    r: u32,
    entries: BTreeMap<u32, usize>,
}

/// `d_r` on `E_r` together with the page it produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Turnover {
    /// Length of the differential.
    pub r: u32,
    /// `E_r`, the page the differential acts on.
    pub source: AhssPage,
    /// Matrix of `d_r : E_r^s → E_r^{s+r}` in the monomial bases, for each `s`.
    pub differentials: BTreeMap<u32, Matrix>,
    /// `E_{r+1}`.
    pub next: AhssPage,
}

impl AhssPage {
    /// `E_2^s = H^s(X; F_2)`.
    pub fn e2(ring: &SteenrodRing, height: Height) -> Result<Self, AhssError> {
        if height.p() != 2 {
            return Err(AhssError::Prime(height.p()));
        }
        let top = ring.top_degree().ok_or(AhssError::InfiniteRing)?;
        let entries = (0..=top)
            .map(|s| (s, ring.basis(s).len()))
            .filter(|&(_, k)| k > 0)
            .collect();
        Ok(AhssPage {
            height,
            ring: ring.clone(),
            r: 2,
            entries,
        })
    }

    pub fn height(&self) -> Height {
        self.height
    }

    pub fn ring(&self) -> &SteenrodRing {
        &self.ring
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn entry(&self, s: u32) -> usize {
        self.entries.get(&s).copied().unwrap_or(0)
    }

    /// Nonzero `(s, dim)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.entries.iter().map(|(&s, &k)| (s, k))
    }

    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.entries
            .iter()
            .map(|(&s, &k)| if s % 2 == 0 { k as i64 } else { -(k as i64) })
            .sum()
    }

    /// Entries folded into the `Z/2(2^n - 1)` grading.
    pub fn collapsed(&self) -> GradedDims {
        GradedDims::from_pairs(self.height, self.entries().map(|(s, k)| (s as i64, k)))
    }

    /// Length of the first differential that can be nonzero, `2^{n+1} - 1`.
    pub fn first_length(height: Height) -> u32 {
        height.modulus() + 1
    }

    /// True when no differential of length `>= r` can connect two nonzero entries.
    pub fn converged(&self) -> bool {
        let step = self.height.modulus();
        let Some(&top) = self.entries.keys().next_back() else {
            return true;
        };
        // admissible lengths are 1 + multiples of the modulus
        let mut len = 1 + step * self.r.saturating_sub(1).div_ceil(step);
        while len <= top {
            if self.entries.keys().any(|&s| self.entry(s + len) > 0) {
                return false;
            }
            len += step;
        }
        true
    }

    /// `x ↦ Q_n(x) + x · Q_{n-1}⋯Q_1(H)`.
    pub fn differential(&self, twist: &TwistClass, x: &Poly) -> Result<Poly, AhssError> {
        let n = self.height.n();
        let mut u = twist.class().clone();
        for j in 1..n {
            u = self.ring.milnor_q(j, &u)?;
        }
        let q = self.ring.milnor_q(n, x)?;
        Ok(q.add(&self.ring.mul(x, &u)))
    }

    /// Computes `d_{2^{n+1}-1}` on `E_2` and the resulting page `E_{2^{n+1}}`.
    ///
    /// Intermediate pages carry no differentials, so `E_{2^{n+1}-1} = E_2`.
    pub fn first_differential(&self, twist: &TwistClass) -> Result<Turnover, AhssError> {
        if self.r != 2 {
            return Err(AhssError::PageIndex(self.r));
        }
        let n = self.height.n();
        if !twist.is_zero() {
            let d = self.ring.degree_of(twist.class())?.unwrap_or(0);
            if d != n + 2 {
                return Err(AhssError::TwistDegree { expected: n + 2, got: d });
            }
        }
        let r = Self::first_length(self.height);
        let f2 = Fp::new(2).expect("2 is prime");
        let top = self.ring.top_degree().ok_or(AhssError::InfiniteRing)?;
        let mut differentials = BTreeMap::new();
        for s in 0..=top {
            let src = self.ring.basis(s);
            let dst = self.ring.basis(s + r);
            let mut m = Matrix::zeros(f2, dst.len(), src.len());
            for (j, x) in src.iter().enumerate() {
                let image = self.differential(twist, &Poly::monomial(x.clone()))?;
                for mono in image.monomials() {
                    let i = dst.binary_search(mono).expect("image lies in the target degree");
                    m.set(i, j, 1);
                }
            }
            differentials.insert(s, m);
        }
        for s in 0..=top {
            let (Some(a), Some(b)) = (differentials.get(&s), differentials.get(&(s + r))) else {
                continue;
            };
            if a.rows() > 0 && a.cols() > 0 && b.rows() > 0 && !b.mul(a).is_zero() {
                return Err(AhssError::NotSquareZero(s));
            }
        }
        let mut entries = BTreeMap::new();
        for s in 0..=top {
            let dim = self.entry(s);
            let out_rank = differentials[&s].rank();
            let in_rank = s.checked_sub(r).map_or(0, |t| differentials[&t].rank());
            let h = dim - out_rank - in_rank;
            if h > 0 {
                entries.insert(s, h);
            }
        }
        let source = AhssPage { r, ..self.clone() };
        let next = AhssPage {
            height: self.height,
            ring: self.ring.clone(),
            r: r + 1,
            entries,
        };
        Ok(Turnover {
            r,
            source,
            differentials,
            next,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: u32) -> Height {
        Height::at_two(n).unwrap()
    }

    fn entries(p: &AhssPage) -> Vec<(u32, usize)> {
        p.entries().collect()
    }

    #[test]
    fn e2_pages() {
        let s4 = SteenrodRing::sphere(4);
        assert_eq!(entries(&AhssPage::e2(&s4, h(2)).unwrap()), [(0, 1), (4, 1)]);
        let rp3 = SteenrodRing::rp(3);
        assert_eq!(entries(&AhssPage::e2(&rp3, h(1)).unwrap()), [(0, 1), (1, 1), (2, 1), (3, 1)]);
        assert!(matches!(
            AhssPage::e2(&SteenrodRing::rp_infinity(), h(1)),
            Err(AhssError::InfiniteRing)
        ));
        assert!(matches!(
            AhssPage::e2(&s4, Height::new(3, 1).unwrap()),
            Err(AhssError::Prime(3))
        ));
    }

    #[test]
    fn three_sphere_odd_twist_kills_everything() {
        let s3 = SteenrodRing::sphere(3);
        let sigma = s3.generator("sigma3").unwrap();
        let e2 = AhssPage::e2(&s3, h(1)).unwrap();
        let t = TwistClass::from_multiple(&s3, h(1), 1, sigma.clone()).unwrap();
        let turn = e2.first_differential(&t).unwrap();
        assert_eq!(turn.r, 3);
        assert_eq!(e2.differential(&t, &s3.one()).unwrap(), sigma);
        assert_eq!(turn.next.r(), 4);
        assert_eq!(turn.next.total(), 0);
        assert!(turn.next.converged());
    }

    #[test]
    fn three_sphere_even_twist_survives() {
        let s3 = SteenrodRing::sphere(3);
        let sigma = s3.generator("sigma3").unwrap();
        let e2 = AhssPage::e2(&s3, h(1)).unwrap();
        let t = TwistClass::from_multiple(&s3, h(1), 2, sigma).unwrap();
        assert!(t.is_zero());
        let turn = e2.first_differential(&t).unwrap();
        assert_eq!(entries(&turn.next), [(0, 1), (3, 1)]);
        assert!(turn.next.converged());
    }

    #[test]
    fn spheres_collapse() {
        for n in [2u32, 3] {
            let s = SteenrodRing::sphere(n + 2);
            let sigma = s.generator(&format!("sigma{}", n + 2)).unwrap();
            let e2 = AhssPage::e2(&s, h(n)).unwrap();
            let turn = e2.first_differential(&TwistClass::new(&s, h(n), sigma).unwrap()).unwrap();
            assert_eq!(entries(&turn.next), [(0, 1), (n + 2, 1)]);
            assert_eq!(turn.next.r(), 1 << (n + 1));
            assert!(turn.next.converged());
        }
    }

    #[test]
    fn wrong_twist_degree() {
        let s4 = SteenrodRing::sphere(4);
        let sigma = s4.generator("sigma4").unwrap();
        assert!(matches!(
            TwistClass::new(&s4, h(1), sigma),
            Err(AhssError::TwistDegree { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn rp7_pages() {
        let rp7 = SteenrodRing::rp(7);
        let e2 = AhssPage::e2(&rp7, h(1)).unwrap();
        let zero = e2.first_differential(&TwistClass::zero()).unwrap();
        assert_eq!(entries(&zero.next), [(0, 1), (2, 1), (5, 1), (7, 1)]);
        // d_5 from 0 to 5 or from 2 to 7 is not excluded by length
        assert!(!zero.next.converged());
        let t3 = TwistClass::new(&rp7, h(1), rp7.parse("t^3").unwrap()).unwrap();
        let twisted = e2.first_differential(&t3).unwrap();
        assert_eq!(entries(&twisted.next), [(1, 1), (6, 1)]);
        assert!(!twisted.next.converged());
    }

    #[test]
    fn euler_characteristic_is_preserved() {
        let ring = SteenrodRing::rp(9).product(&SteenrodRing::sphere(3)).unwrap();
        let e2 = AhssPage::e2(&ring, h(1)).unwrap();
        for class in ["0", "t^3", "sigma3", "t^3 + sigma3"] {
            let t = TwistClass::new(&ring, h(1), ring.parse(class).unwrap()).unwrap();
            let turn = e2.first_differential(&t).unwrap();
            assert_eq!(turn.next.euler_characteristic(), e2.euler_characteristic(), "{class}");
        }
    }

    #[test]
    fn twisted_leibniz_rule() {
        // d(xy) = d(x) y + x Q_n(y)
        let ring = SteenrodRing::rp(12).product(&SteenrodRing::sphere(4)).unwrap();
        let e2 = AhssPage::e2(&ring, h(2)).unwrap();
        let t = TwistClass::new(&ring, h(2), ring.parse("t^4 + sigma4").unwrap()).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let x = ring.parse(&format!("t^{a}")).unwrap();
                let y = ring.parse(&format!("t^{b}*sigma4 + t^{}", b + 4)).unwrap();
                let lhs = e2.differential(&t, &ring.mul(&x, &y)).unwrap();
                let rhs = ring
                    .mul(&e2.differential(&t, &x).unwrap(), &y)
                    .add(&ring.mul(&x, &ring.milnor_q(2, &y).unwrap()));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn degree_law() {
        let ring = SteenrodRing::rp(20);
        for n in 1..=3u32 {
            let e2 = AhssPage::e2(&ring, h(n)).unwrap();
            let t = TwistClass::new(&ring, h(n), ring.parse(&format!("t^{}", n + 2)).unwrap()).unwrap();
            for k in 0..=20u32 {
                let image = e2.differential(&t, &ring.parse(&format!("t^{k}")).unwrap()).unwrap();
                if let Some(d) = ring.degree_of(&image).unwrap() {
                    assert_eq!(d, k + (1 << (n + 1)) - 1);
                }
            }
        }
    }

    #[test]
    fn second_turnover_rejected() {
        let s3 = SteenrodRing::sphere(3);
        let e2 = AhssPage::e2(&s3, h(1)).unwrap();
        let turn = e2.first_differential(&TwistClass::zero()).unwrap();
        assert!(matches!(
            turn.next.first_differential(&TwistClass::zero()),
            Err(AhssError::PageIndex(4))
        ));
    }
}
