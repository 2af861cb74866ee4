//! Steenrod squares on finitely presented graded F_2 algebras, and the Milnor
//! primitives.
//!
//! A [`SteenrodRing`] records `Sq^i` on its generators only. Values on products
//! come from the Cartan formula `Sq^i(xy) = Σ Sq^j(x) Sq^{i-j}(y)`. Adem
//! relations are never needed for evaluation and are not implemented.
//!
//! Milnor primitives use `Q_0 = Sq^1` and `Q_{j+1} = Sq^{2^{j+1}} Q_j + Q_j Sq^{2^{j+1}}`,
//! so that `|Q_j| = 2^{j+1} - 1`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::algebra::Monomial;
use crate::expr::{self, ExprError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SteenrodError {
    #[error("`{0}` is not homogeneous")]
    NonHomogeneous(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` appears twice")]
    DuplicateGenerator(String),
    #[error("generator `{0}` must have positive degree")]
    ZeroDegree(String),
    #[error("Sq^{i}({generator}): {reason}")]
    BadSquare { generator: String, i: u32, reason: String },
    #[error(transparent)]
    Parse(#[from] ExprError),
}

/// A homogeneous-or-not F_2 polynomial, stored as its set of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Poly(BTreeSet<Monomial>);

type SqMemo = HashMap<(Monomial, u32), Poly>;

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn monomial(m: Monomial) -> Self {
        let mut p = Poly::zero();
        p.0.insert(m);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds one monomial (mod 2).
    pub fn toggle(&mut self, m: Monomial) {
        if !self.0.remove(&m) {
            self.0.insert(m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        Poly(self.0.symmetric_difference(&other.0).cloned().collect())
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for m in &other.0 {
            self.toggle(m.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingGenerator {
    pub name: String,
    pub degree: u32,
    /// `Some(e)` imposes `g^e = 0`; `None` leaves `g` polynomial.
    pub truncation: Option<u32>,
}

impl RingGenerator {
    pub fn new(name: impl Into<String>, degree: u32, truncation: Option<u32>) -> Self {
        RingGenerator {
            name: name.into(),
            degree,
            truncation,
        }
    }
}

/// Mod 2 cohomology ring with Steenrod squares specified on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteenrodRing {
    generators: Vec<RingGenerator>,
    /// `Sq^i(g)` for `1 <= i < |g|`; absent entries are zero.
    squares: HashMap<(usize, u32), Poly>,
    primitives: PrimitiveCache,
}

/// `Q_j(g)` per generator, filled on demand. Shared between clones, ignored by `==`.
#[derive(Clone, Default)]
struct PrimitiveCache(Arc<Mutex<HashMap<(usize, u32), Poly>>>);

impl PartialEq for PrimitiveCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for PrimitiveCache {}

impl fmt::Debug for PrimitiveCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PrimitiveCache")
    }
}

impl SteenrodRing {
    /// Builds a ring from generators and `(generator, i, value)` square entries.
    ///
    /// Values must be homogeneous of degree `|g| + i`; an entry for the top
    /// square `i = |g|` must equal `g^2`.
    pub fn new(generators: Vec<RingGenerator>, squares: &[(String, u32, String)]) -> Result<Self, SteenrodError> {
        let mut seen = std::collections::HashSet::new();
        for g in &generators {
            if !seen.insert(g.name.clone()) {
                return Err(SteenrodError::DuplicateGenerator(g.name.clone()));
            }
            if g.degree == 0 {
                return Err(SteenrodError::ZeroDegree(g.name.clone()));
            }
        }
        let mut ring = SteenrodRing {
            generators,
            squares: HashMap::new(),
            primitives: PrimitiveCache::default(),
        };
        for (name, i, value) in squares {
            let g = ring.generator_index(name)?;
            let value = ring.parse(value)?;
            ring.set_square(g, *i, value)?;
        }
        Ok(ring)
    }

    fn set_square(&mut self, g: usize, i: u32, value: Poly) -> Result<(), SteenrodError> {
        let gen = &self.generators[g];
        let bad = |reason: String| SteenrodError::BadSquare {
            generator: gen.name.clone(),
            i,
            reason,
        };
        if i == 0 || i > gen.degree {
            return Err(bad(format!("index must lie in 1..={}", gen.degree)));
        }
        if let Some(d) = self.degree_of(&value)? {
            if d != gen.degree + i {
                return Err(bad(format!("value has degree {d}, expected {}", gen.degree + i)));
            }
        }
        if i == gen.degree {
            let g1 = Poly::monomial(self.gen_monomial(g));
            if value != self.mul(&g1, &g1) {
                return Err(bad("top square must be the square".to_string()));
            }
            return Ok(());
        }
        if value.is_zero() {
            self.squares.remove(&(g, i));
        } else {
            self.squares.insert((g, i), value);
        }
        Ok(())
    }

    /// `H^*(RP^∞) = F_2[t]`, `|t| = 1`.
    pub fn rp_infinity() -> Self {
        SteenrodRing {
            generators: vec![RingGenerator::new("t", 1, None)],
            squares: HashMap::new(),
            primitives: PrimitiveCache::default(),
        }
    }

    /// `H^*(RP^m) = F_2[t]/t^{m+1}`.
    pub fn rp(m: u32) -> Self {
        SteenrodRing {
            generators: vec![RingGenerator::new("t", 1, Some(m + 1))],
            squares: HashMap::new(),
            primitives: PrimitiveCache::default(),
        }
    }

    /// `H^*(S^m) = F_2[σ_m]/σ_m^2`, generator named `sigma{m}`.
    pub fn sphere(m: u32) -> Self {
        SteenrodRing {
            generators: vec![RingGenerator::new(format!("sigma{m}"), m.max(1), Some(2))],
            squares: HashMap::new(),
            primitives: PrimitiveCache::default(),
        }
    }

    /// Künneth product; generator names must be distinct.
    pub fn product(&self, other: &SteenrodRing) -> Result<Self, SteenrodError> {
        let offset = self.generators.len();
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        let mut names = std::collections::HashSet::new();
        for g in &generators {
            if !names.insert(&g.name) {
                return Err(SteenrodError::DuplicateGenerator(g.name.clone()));
            }
        }
        let pad = |m: &Monomial, before: usize, after: usize| {
            let mut v = vec![0; before];
            v.extend_from_slice(&m.0);
            v.extend(std::iter::repeat_n(0, after));
            Monomial(v)
        };
        let mut squares = HashMap::new();
        for ((g, i), p) in &self.squares {
            let lifted = Poly(p.0.iter().map(|m| pad(m, 0, other.generators.len())).collect());
            squares.insert((*g, *i), lifted);
        }
        for ((g, i), p) in &other.squares {
            let lifted = Poly(p.0.iter().map(|m| pad(m, offset, 0)).collect());
            squares.insert((g + offset, *i), lifted);
        }
        Ok(SteenrodRing {
            generators,
            squares,
            primitives: PrimitiveCache::default(),
        })
    }

    /// `H^*(BO) = F_2[w_1, ..., w_maxdeg]` with the Wu formula
    /// `Sq^i w_j = Σ_t C(j - i + t - 1, t) w_{i-t} w_{j+t}`.
    ///
    /// Classes `w_k` with `k > maxdeg` are dropped, so squares are exact only in
    /// degrees `<= maxdeg`.
    pub fn wu_bo(maxdeg: u32) -> Self {
        Self::wu(maxdeg, false)
    }

    /// `H^*(BSO)`: the Wu formula with `w_1 = 0`.
    pub fn wu_bso(maxdeg: u32) -> Self {
        Self::wu(maxdeg, true)
    }

    fn wu(maxdeg: u32, oriented: bool) -> Self {
        let first = if oriented { 2 } else { 1 };
        let generators: Vec<RingGenerator> = (first..=maxdeg)
            .map(|k| RingGenerator::new(format!("w{k}"), k, None))
            .collect();
        let n = generators.len();
        // monomial of w_a * w_b, with w_0 = 1; None if a class is absent
        let w = |k: u32| -> Option<Option<usize>> {
            if k == 0 {
                Some(None)
            } else if k < first || k > maxdeg {
                None
            } else {
                Some(Some((k - first) as usize))
            }
        };
        let mut squares = HashMap::new();
        for j in first..=maxdeg {
            for i in 1..j {
                let mut value = Poly::zero();
                for t in 0..=i {
                    if binomial_mod2(j - i + t - 1, t) == 0 {
                        continue;
                    }
                    let (Some(a), Some(b)) = (w(i - t), w(j + t)) else {
                        continue;
                    };
                    let mut m = vec![0u32; n];
                    for idx in [a, b].into_iter().flatten() {
                        m[idx] += 1;
                    }
                    value.toggle(Monomial(m));
                }
                if !value.is_zero() {
                    squares.insert(((j - first) as usize, i), value);
                }
            }
        }
        SteenrodRing {
            generators,
            squares,
            primitives: PrimitiveCache::default(),
        }
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.generators
    }

    /// Square table entries `(generator, i, value)` with `1 <= i < |g|`, sorted.
    pub fn square_entries(&self) -> Vec<(String, u32, String)> {
        let mut out: Vec<(usize, u32, String)> = self
            .squares
            .iter()
            .map(|((g, i), p)| (*g, *i, self.format(p)))
            .collect();
        out.sort();
        out.into_iter()
            .map(|(g, i, v)| (self.generators[g].name.clone(), i, v))
            .collect()
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, SteenrodError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| SteenrodError::UnknownGenerator(name.to_string()))
    }

    fn gen_monomial(&self, g: usize) -> Monomial {
        Monomial::generator(self.generators.len(), g)
    }

    pub fn generator(&self, name: &str) -> Result<Poly, SteenrodError> {
        Ok(Poly::monomial(self.gen_monomial(self.generator_index(name)?)))
    }

    pub fn one(&self) -> Poly {
        Poly::monomial(Monomial::one(self.generators.len()))
    }

    pub fn monomial_degree(&self, m: &Monomial) -> u32 {
        m.0.iter().zip(&self.generators).map(|(&e, g)| e * g.degree).sum()
    }

    /// `None` for the zero polynomial, an error if not homogeneous.
    pub fn degree_of(&self, p: &Poly) -> Result<Option<u32>, SteenrodError> {
        let mut degs = p.0.iter().map(|m| self.monomial_degree(m));
        let Some(d) = degs.next() else {
            return Ok(None);
        };
        if degs.any(|e| e != d) {
            return Err(SteenrodError::NonHomogeneous(self.format(p)));
        }
        Ok(Some(d))
    }

    fn survives(&self, m: &Monomial) -> bool {
        m.0.iter()
            .zip(&self.generators)
            .all(|(&e, g)| g.truncation.is_none_or(|t| e < t))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::zero();
        for x in &a.0 {
            for y in &b.0 {
                let m = x.times(y);
                if self.survives(&m) {
                    out.toggle(m);
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &Poly, e: u32) -> Poly {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn parse(&self, s: &str) -> Result<Poly, SteenrodError> {
        let mut out = Poly::zero();
        for (c, factors) in expr::parse_terms(s)? {
            if c.rem_euclid(2) == 0 {
                continue;
            }
            let mut m = Monomial::one(self.generators.len());
            for (name, e) in factors {
                m.0[self.generator_index(&name)?] += e;
            }
            if self.survives(&m) {
                out.toggle(m);
            }
        }
        Ok(out)
    }

    pub fn format(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".to_string();
        }
        p.0.iter()
            .map(|m| {
                let parts: Vec<String> = m
                    .0
                    .iter()
                    .zip(&self.generators)
                    .filter(|(&e, _)| e > 0)
                    .map(|(&e, g)| if e == 1 { g.name.clone() } else { format!("{}^{}", g.name, e) })
                    .collect();
                if parts.is_empty() {
                    "1".to_string()
                } else {
                    parts.join("*")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// True when every generator is truncated, i.e. the ring is finite.
    pub fn is_finite(&self) -> bool {
        self.generators.iter().all(|g| g.truncation.is_some())
    }

    /// Largest degree with a nonzero class, for finite rings.
    pub fn top_degree(&self) -> Option<u32> {
        if !self.is_finite() {
            return None;
        }
        Some(
            self.generators
                .iter()
                .map(|g| (g.truncation.unwrap() - 1) * g.degree)
                .sum(),
        )
    }

    /// Monomial basis of `H^degree`, in monomial order.
    pub fn basis(&self, degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.generators.len()];
        self.basis_rec(0, degree, &mut cur, &mut out);
        out.sort();
        out
    }

    fn basis_rec(&self, i: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == self.generators.len() {
            if remaining == 0 {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        let g = &self.generators[i];
        let mut e = 0;
        loop {
            if g.truncation.is_some_and(|t| e >= t) || e * g.degree > remaining {
                break;
            }
            cur[i] = e;
            self.basis_rec(i + 1, remaining - e * g.degree, cur, out);
            e += 1;
        }
        cur[i] = 0;
    }

    /// `Sq^i` on a homogeneous polynomial.
    pub fn sq(&self, i: u32, e: &Poly) -> Result<Poly, SteenrodError> {
        self.degree_of(e)?;
        Ok(self.sq_with(i, e, &mut HashMap::new()))
    }

    fn sq_with(&self, i: u32, e: &Poly, memo: &mut SqMemo) -> Poly {
        let mut out = Poly::zero();
        for m in &e.0 {
            out.add_assign(&self.sq_monomial(i, m, memo));
        }
        out
    }

    fn sq_generator(&self, j: u32, g: usize) -> Poly {
        let d = self.generators[g].degree;
        let m = self.gen_monomial(g);
        match j {
            0 => Poly::monomial(m),
            j if j == d => {
                let sq = m.times(&m);
                if self.survives(&sq) {
                    Poly::monomial(sq)
                } else {
                    Poly::zero()
                }
            }
            j if j > d => Poly::zero(),
            j => self.squares.get(&(g, j)).cloned().unwrap_or_default(),
        }
    }

    fn sq_monomial(&self, i: u32, m: &Monomial, memo: &mut SqMemo) -> Poly {
        if i == 0 {
            return Poly::monomial(m.clone());
        }
        if i > self.monomial_degree(m) {
            return Poly::zero();
        }
        if let Some(p) = memo.get(&(m.clone(), i)) {
            return p.clone();
        }
        let g = m.0.iter().position(|&e| e > 0).expect("positive degree monomial");
        let mut rest = m.clone();
        rest.0[g] -= 1;
        let top = i.min(self.generators[g].degree);
        let mut out = Poly::zero();
        for j in 0..=top {
            let left = self.sq_generator(j, g);
            if left.is_zero() {
                continue;
            }
            let right = self.sq_monomial(i - j, &rest, memo);
            out.add_assign(&self.mul(&left, &right));
        }
        memo.insert((m.clone(), i), out.clone());
        out
    }

    /// The Milnor primitive `Q_j`.
    ///
    /// Values on generators come from [`Self::milnor_q_by_squares`]; products
    /// are expanded with the derivation rule.
    pub fn milnor_q(&self, j: u32, e: &Poly) -> Result<Poly, SteenrodError> {
        self.degree_of(e)?;
        let mut out = Poly::zero();
        for m in &e.0 {
            for (g, &k) in m.0.iter().enumerate() {
                if k % 2 == 0 {
                    continue;
                }
                let mut rest = m.clone();
                rest.0[g] -= 1;
                out.add_assign(&self.mul(&Poly::monomial(rest), &self.primitive_on_generator(j, g)));
            }
        }
        Ok(out)
    }

    fn primitive_on_generator(&self, j: u32, g: usize) -> Poly {
        let mut cache = self.primitives.0.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = cache.get(&(g, j)) {
            return p.clone();
        }
        let value = self.milnor_q_with(j, &Poly::monomial(self.gen_monomial(g)), &mut HashMap::new());
        cache.insert((g, j), value.clone());
        value
    }

    /// `Q_j` straight from `Q_0 = Sq^1`, `Q_j = Sq^{2^j} Q_{j-1} + Q_{j-1} Sq^{2^j}`.
    pub fn milnor_q_by_squares(&self, j: u32, e: &Poly) -> Result<Poly, SteenrodError> {
        self.degree_of(e)?;
        Ok(self.milnor_q_with(j, e, &mut HashMap::new()))
    }

    fn milnor_q_with(&self, j: u32, e: &Poly, memo: &mut SqMemo) -> Poly {
        if j == 0 {
            return self.sq_with(1, e, memo);
        }
        let s = 1u32 << j;
        let inner = self.milnor_q_with(j - 1, e, memo);
        let a = self.sq_with(s, &inner, memo);
        let se = self.sq_with(s, e, memo);
        a.add(&self.milnor_q_with(j - 1, &se, memo))
    }
}

impl fmt::Display for SteenrodRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .generators
            .iter()
            .map(|g| match g.truncation {
                Some(t) => format!("{}:{} ({}^{} = 0)", g.name, g.degree, g.name, t),
                None => format!("{}:{}", g.name, g.degree),
            })
            .collect();
        write!(f, "F_2[{}]", gens.join(", "))
    }
}

/// `C(n, k) mod 2` by Lucas: odd iff the bits of `k` are a subset of those of `n`.
pub fn binomial_mod2(n: u32, k: u32) -> u32 {
    u32::from(k & !n == 0)
}
