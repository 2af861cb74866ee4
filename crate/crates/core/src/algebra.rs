//! Finitely presented graded-commutative algebras with one truncation rule per
//! generator.
//!
//! Each generator `g` carries exactly one rule, either `g^e -> 0` or
//! `g^e -> c*g`. Rules on different generators never interact, so rewriting a
//! monomial one generator at a time is terminating and confluent and every
//! monomial has a unique normal form with all exponents below `e`.
//!
//! This covers the Ravenel–Wilson factors `R(a_k)` and `R(b_k)` (with `v_n = 1`),
//! truncated polynomial rings `F_p[x]/x^{p^j}` and exterior generators.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::expr::{self, ExprError};
use crate::field::Fp;
use crate::graded::{GradedDims, Height};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` appears twice")]
    DuplicateGenerator(String),
    #[error("rule for `{name}`: {reason}")]
    BadRule { name: String, reason: String },
    #[error("presentations live at different heights")]
    HeightMismatch,
    #[error(transparent)]
    Parse(#[from] ExprError),
}

/// The single rewrite rule attached to a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `g^e -> 0`
    Truncate { exponent: u32 },
    /// `g^e -> c*g`, `c` a nonzero scalar
    Reduce { exponent: u32, coeff: u32 },
}

impl Rule {
    pub fn exponent(&self) -> u32 {
        match *self {
            Rule::Truncate { exponent } | Rule::Reduce { exponent, .. } => exponent,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    /// Degree as a residue mod the height's modulus.
    pub degree: u32,
    pub rule: Rule,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32, rule: Rule) -> Self {
        Generator {
            name: name.into(),
            degree,
            rule,
        }
    }
}

/// Exponent vector, indexed like the presentation's generator list.
///
/// Ordered by total exponent first, then lexicographically with a larger
/// exponent on an earlier generator sorting first, so `1 < b0 < b1 < b0*b1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn generator(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Monomial(v)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An F_p-linear combination of monomials. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Element {
    terms: BTreeMap<Monomial, u32>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: Monomial, coeff: u32) -> Self {
        let mut e = Self::zero();
        if coeff != 0 {
            e.terms.insert(m, coeff);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    fn add_term(&mut self, f: Fp, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(m).or_insert(0);
        *slot = f.add(*slot, c);
        if *slot == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }
}

/// A finitely presented graded-commutative F_p algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraPresentation {
    height: Height,
    generators: Vec<Generator>,
}

impl AlgebraPresentation {
    pub fn new(height: Height, generators: Vec<Generator>) -> Result<Self, PresentationError> {
        let f = height.field();
        let m = height.modulus() as u64;
        let mut seen = std::collections::HashSet::new();
        let mut gens = Vec::with_capacity(generators.len());
        for mut g in generators {
            if !seen.insert(g.name.clone()) {
                return Err(PresentationError::DuplicateGenerator(g.name));
            }
            g.degree %= height.modulus();
            let bad = |reason: &str| PresentationError::BadRule {
                name: g.name.clone(),
                reason: reason.to_string(),
            };
            match &mut g.rule {
                Rule::Truncate { exponent } if *exponent < 1 => {
                    return Err(bad("truncation exponent must be at least 1"))
                }
                Rule::Reduce { exponent, coeff } => {
                    if *exponent < 2 {
                        return Err(bad("reduction exponent must be at least 2"));
                    }
                    *coeff %= f.p();
                    if *coeff == 0 {
                        return Err(bad("reduction coefficient must be nonzero"));
                    }
                    if !((*exponent as u64 - 1) * g.degree as u64).is_multiple_of(m) {
                        return Err(bad("g^e and g have different degrees"));
                    }
                }
                _ => {}
            }
            gens.push(g);
        }
        Ok(AlgebraPresentation {
            height,
            generators: gens,
        })
    }

    /// The algebra `F_p` with no generators.
    pub fn trivial(height: Height) -> Self {
        AlgebraPresentation {
            height,
            generators: Vec::new(),
        }
    }

    pub fn height(&self) -> Height {
        self.height
    }

    pub fn field(&self) -> Fp {
        self.height.field()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, PresentationError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| PresentationError::UnknownGenerator(name.to_string()))
    }

    /// Tensor product over F_p: generator lists are concatenated.
    pub fn tensor(&self, other: &AlgebraPresentation) -> Result<Self, PresentationError> {
        if self.height != other.height {
            return Err(PresentationError::HeightMismatch);
        }
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Self::new(self.height, gens)
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        let md = self.height.modulus() as u64;
        let d = m
            .0
            .iter()
            .zip(&self.generators)
            .fold(0u64, |acc, (&e, g)| (acc + e as u64 * g.degree as u64) % md);
        d as u32
    }

    /// Applies the rule of generator `g` once, if it applies.
    ///
    /// Returns `Some(None)` when the monomial rewrites to zero and
    /// `Some(Some((c, m')))` when it rewrites to `c*m'`.
    pub fn rewrite_step(&self, m: &Monomial, g: usize) -> Option<Option<(u32, Monomial)>> {
        let e = m.0[g];
        match self.generators[g].rule {
            Rule::Truncate { exponent } if e >= exponent => Some(None),
            Rule::Reduce { exponent, coeff } if e >= exponent => {
                let mut next = m.clone();
                next.0[g] = e - (exponent - 1);
                Some(Some((coeff, next)))
            }
            _ => None,
        }
    }

    /// Normal form of a single monomial: `None` if it vanishes, otherwise the
    /// scalar and reduced monomial.
    pub fn reduce_monomial(&self, m: &Monomial) -> Option<(u32, Monomial)> {
        let f = self.field();
        let mut coeff = 1;
        let mut out = Vec::with_capacity(m.0.len());
        for (&e, g) in m.0.iter().zip(&self.generators) {
            match g.rule {
                Rule::Truncate { exponent } => {
                    if e >= exponent {
                        return None;
                    }
                    out.push(e);
                }
                Rule::Reduce { exponent, coeff: c } => {
                    if e < exponent {
                        out.push(e);
                    } else {
                        // g^e = c^k g^(e - k(exponent-1)), landing in 1..exponent-1
                        let step = exponent - 1;
                        let k = (e - 1) / step;
                        coeff = f.mul(coeff, f.pow(c, k as u64));
                        out.push(e - k * step);
                    }
                }
            }
        }
        Some((coeff, Monomial(out)))
    }

    /// Normalizes a raw combination of (possibly unreduced) monomials.
    pub fn normalize<I: IntoIterator<Item = (Monomial, u32)>>(&self, raw: I) -> Element {
        let f = self.field();
        let mut out = Element::zero();
        for (m, c) in raw {
            assert_eq!(m.0.len(), self.generators.len(), "monomial has wrong arity");
            if let Some((k, r)) = self.reduce_monomial(&m) {
                out.add_term(f, r, f.mul(k, c % f.p()));
            }
        }
        out
    }

    /// Normal form of `sum coeff * prod name^exp`.
    pub fn normal_form(&self, terms: &[(i64, Vec<(&str, u32)>)]) -> Result<Element, PresentationError> {
        let f = self.field();
        let mut raw = Vec::with_capacity(terms.len());
        for (c, factors) in terms {
            let mut m = Monomial::one(self.generators.len());
            for (name, e) in factors {
                m.0[self.generator_index(name)?] += e;
            }
            raw.push((m, f.reduce(*c)));
        }
        Ok(self.normalize(raw))
    }

    /// Parses and normalizes an expression such as `b0^2 + b0*b1`.
    pub fn parse(&self, s: &str) -> Result<Element, PresentationError> {
        let terms = expr::parse_terms(s)?;
        let borrowed: Vec<(i64, Vec<(&str, u32)>)> = terms
            .iter()
            .map(|(c, fs)| (*c, fs.iter().map(|(n, e)| (n.as_str(), *e)).collect()))
            .collect();
        self.normal_form(&borrowed)
    }

    pub fn one(&self) -> Element {
        Element::monomial(Monomial::one(self.generators.len()), 1)
    }

    pub fn generator_element(&self, i: usize) -> Element {
        self.normalize([(Monomial::generator(self.generators.len(), i), 1)])
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        let f = self.field();
        let mut out = a.clone();
        for (m, c) in b.terms() {
            out.add_term(f, m.clone(), c);
        }
        out
    }

    pub fn scale(&self, a: &Element, c: u32) -> Element {
        let f = self.field();
        let mut out = Element::zero();
        for (m, k) in a.terms() {
            out.add_term(f, m.clone(), f.mul(k, c));
        }
        out
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let f = self.field();
        let raw = a.terms().flat_map(|(ma, ca)| {
            b.terms().map(move |(mb, cb)| (ma.times(mb), f.mul(ca, cb)))
        });
        self.normalize(raw.collect::<Vec<_>>())
    }

    pub fn pow(&self, a: &Element, e: u32) -> Element {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Every reduced monomial, in monomial order.
    pub fn all_monomials(&self) -> Vec<Monomial> {
        let mut out = vec![Monomial::one(self.generators.len())];
        for (i, g) in self.generators.iter().enumerate() {
            let bound = g.rule.exponent();
            let mut next = Vec::with_capacity(out.len() * bound as usize);
            for m in &out {
                for e in 0..bound {
                    let mut v = m.clone();
                    v.0[i] = e;
                    next.push(v);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Reduced monomials of degree `residue`, in monomial order.
    pub fn basis(&self, residue: u32) -> Vec<Monomial> {
        let r = residue % self.height.modulus();
        self.all_monomials()
            .into_iter()
            .filter(|m| self.degree(m) == r)
            .collect()
    }

    pub fn dimension(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.rule.exponent() as usize)
            .product()
    }

    pub fn hilbert(&self) -> GradedDims {
        let mut g = GradedDims::zero(self.height);
        for m in self.all_monomials() {
            g.add(self.degree(&m), 1);
        }
        g
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .zip(&self.generators)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, g)| {
                if e == 1 {
                    g.name.clone()
                } else {
                    format!("{}^{}", g.name, e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    pub fn format(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        e.terms()
            .map(|(m, c)| {
                let body = self.format_monomial(m);
                match (c, body.as_str()) {
                    (1, _) => body,
                    (_, "1") => c.to_string(),
                    _ => format!("{c}*{body}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn structure(&self) -> Structure<'_> {
        Structure::new(self)
    }
}

impl fmt::Display for AlgebraPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generators.is_empty() {
            return write!(f, "F_{}", self.field().p());
        }
        let rules: Vec<String> = self
            .generators
            .iter()
            .map(|g| match g.rule {
                Rule::Truncate { exponent } => format!("{}^{} = 0", g.name, exponent),
                Rule::Reduce { exponent, coeff: 1 } => format!("{}^{} = {}", g.name, exponent, g.name),
                Rule::Reduce { exponent, coeff } => {
                    format!("{}^{} = {}*{}", g.name, exponent, coeff, g.name)
                }
            })
            .collect();
        let names: Vec<&str> = self.generators.iter().map(|g| g.name.as_str()).collect();
        write!(f, "F_{}[{}]/({})", self.field().p(), names.join(", "), rules.join(", "))
    }
}

/// The regular representation of a presentation: its monomial basis, the
/// coordinate map, and multiplication operators.
///
/// Used to find the primitive idempotents and the radical, which decide
/// freeness of modules.
pub struct Structure<'a> {
    alg: &'a AlgebraPresentation,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl<'a> Structure<'a> {
    fn new(alg: &'a AlgebraPresentation) -> Self {
        let basis = alg.all_monomials();
        let index = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Structure { alg, basis, index }
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn index_of(&self, m: &Monomial) -> usize {
        self.index[m]
    }

    pub fn vector(&self, e: &Element) -> Vec<u32> {
        let mut v = vec![0; self.basis.len()];
        for (m, c) in e.terms() {
            v[self.index[m]] = c;
        }
        v
    }

    pub fn element(&self, v: &[u32]) -> Element {
        let mut e = Element::zero();
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                e.terms.insert(self.basis[i].clone(), c);
            }
        }
        e
    }

    /// Matrix of left multiplication by `e` on the monomial basis.
    pub fn mult_matrix(&self, e: &Element) -> Matrix {
        let cols: Vec<Vec<u32>> = self
            .basis
            .iter()
            .map(|m| {
                let prod = self.alg.mul(e, &Element::monomial(m.clone(), 1));
                self.vector(&prod)
            })
            .collect();
        Matrix::from_columns(self.alg.field(), self.basis.len(), &cols)
    }

    /// Matrix of the Frobenius `x -> x^p`, which is F_p-linear.
    fn frobenius(&self) -> Matrix {
        let p = self.alg.field().p();
        let cols: Vec<Vec<u32>> = self
            .basis
            .iter()
            .map(|m| self.vector(&self.alg.pow(&Element::monomial(m.clone(), 1), p)))
            .collect();
        Matrix::from_columns(self.alg.field(), self.basis.len(), &cols)
    }

    /// Basis of the nilradical: the kernel of a high enough Frobenius power.
    pub fn radical(&self) -> Vec<Element> {
        let frob = self.frobenius();
        let p = self.alg.field().p() as usize;
        let mut power = frob.clone();
        let mut reach = p;
        while reach < self.basis.len().max(2) {
            power = frob.mul(&power);
            reach *= p;
        }
        power.kernel().iter().map(|v| self.element(v)).collect()
    }

    /// The primitive idempotents, one per local factor.
    ///
    /// The fixed points of Frobenius form the span of the primitive idempotents
    /// (a split algebra `F_p^s`); the common eigenlines of its multiplication
    /// operators are exactly the lines through those idempotents.
    pub fn primitive_idempotents(&self) -> Vec<Element> {
        let f = self.alg.field();
        let n = self.basis.len();
        let fixed = self.frobenius().sub(&Matrix::identity(f, n)).kernel();
        let fixed_elems: Vec<Element> = fixed.iter().map(|v| self.element(v)).collect();

        let mut spaces: Vec<Vec<Vec<u32>>> = vec![fixed.clone()];
        for z in &fixed_elems {
            let lz = self.mult_matrix(z);
            let mut refined = Vec::new();
            for space in spaces {
                if space.len() <= 1 {
                    refined.push(space);
                    continue;
                }
                let b = Matrix::from_columns(f, n, &space);
                let lb = lz.mul(&b);
                for lambda in f.elements() {
                    let shifted = lb.sub(&b.scale(lambda));
                    let coeffs = shifted.kernel();
                    if coeffs.is_empty() {
                        continue;
                    }
                    refined.push(coeffs.iter().map(|c| b.apply(c)).collect());
                }
            }
            spaces = refined;
        }

        let mut idempotents: Vec<Element> = spaces
            .into_iter()
            .map(|space| {
                debug_assert_eq!(space.len(), 1);
                let v = self.element(&space[0]);
                let sq = self.alg.mul(&v, &v);
                // v^2 = mu v with mu != 0
                let (m, c) = v.terms().next().expect("nonzero eigenvector");
                let mu = f.mul(sq.coeff(m), f.inv(c));
                self.alg.scale(&v, f.inv(mu))
            })
            .collect();
        idempotents.sort_by(|a, b| self.vector(b).cmp(&self.vector(a)));
        idempotents
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn h(n: u32) -> Height {
        Height::at_two(n).unwrap()
    }

    fn r_b(height: Height, count: usize) -> AlgebraPresentation {
        let gens = (0..count)
            .map(|i| Generator::new(format!("b{i}"), 0, Rule::Reduce { exponent: 2, coeff: 1 }))
            .collect();
        AlgebraPresentation::new(height, gens).unwrap()
    }

    fn truncated(height: Height, deg: u32, e: u32) -> AlgebraPresentation {
        AlgebraPresentation::new(height, vec![Generator::new("x", deg, Rule::Truncate { exponent: e })]).unwrap()
    }

    #[test]
    fn idempotent_rule_reduces_square() {
        let a = AlgebraPresentation::new(h(2), vec![Generator::new("a0", 6, Rule::Reduce { exponent: 2, coeff: 1 })]).unwrap();
        let e = a.parse("a0^2").unwrap();
        assert_eq!(a.format(&e), "a0");
        assert_eq!(a.parse("a0^7").unwrap(), a.parse("a0").unwrap());
    }

    #[test]
    fn unit_is_normal() {
        let a = r_b(h(2), 2);
        assert_eq!(a.parse("1").unwrap(), a.one());
        assert_eq!(a.format(&a.one()), "1");
    }

    #[test]
    fn truncated_product_vanishes() {
        let a = truncated(h(2), 6, 4);
        let x3 = a.parse("x^3").unwrap();
        let x2 = a.parse("x^2").unwrap();
        assert!(a.mul(&x3, &x2).is_zero());
        assert!(!a.mul(&x2, &a.parse("x").unwrap()).is_zero());
    }

    #[test]
    fn unknown_generator_is_an_error() {
        let a = r_b(h(1), 1);
        assert_eq!(a.parse("b7"), Err(PresentationError::UnknownGenerator("b7".into())));
    }

    #[test]
    fn bad_rules_rejected() {
        let bad = |rule| AlgebraPresentation::new(h(2), vec![Generator::new("g", 2, rule)]);
        assert!(bad(Rule::Reduce { exponent: 2, coeff: 2 }).is_err());
        // g^2 = g needs |g| = 0 mod 6
        assert!(bad(Rule::Reduce { exponent: 2, coeff: 1 }).is_err());
        assert!(bad(Rule::Reduce { exponent: 1, coeff: 1 }).is_err());
        assert!(bad(Rule::Truncate { exponent: 0 }).is_err());
        assert!(AlgebraPresentation::new(
            h(2),
            vec![
                Generator::new("g", 0, Rule::Truncate { exponent: 2 }),
                Generator::new("g", 0, Rule::Truncate { exponent: 2 })
            ]
        )
        .is_err());
    }

    #[test]
    fn basis_of_two_rw_factors() {
        let a = r_b(h(2), 2);
        let b = a.basis(0);
        let names: Vec<String> = b.iter().map(|m| a.format_monomial(m)).collect();
        assert_eq!(names, ["1", "b0", "b1", "b0*b1"]);
        for d in 1..6 {
            assert!(a.basis(d).is_empty());
        }
    }

    #[test]
    fn basis_of_empty_and_truncated() {
        let a = AlgebraPresentation::trivial(h(3));
        assert_eq!(a.basis(0), vec![Monomial(vec![])]);
        let t = truncated(h(2), 6, 4);
        assert_eq!(t.basis(0).len(), 4);
    }

    #[test]
    fn hilbert_examples() {
        let a0 = AlgebraPresentation::new(h(2), vec![Generator::new("a0", 6, Rule::Reduce { exponent: 2, coeff: 1 })]).unwrap();
        assert_eq!(a0.hilbert(), GradedDims::from_pairs(h(2), [(0, 2)]));
        assert_eq!(AlgebraPresentation::trivial(h(2)).hilbert(), GradedDims::unit(h(2)));
        assert_eq!(r_b(h(1), 3).hilbert(), GradedDims::from_pairs(h(1), [(0, 8)]));
    }

    #[test]
    fn hilbert_of_tensor_is_convolution() {
        let height = Height::new(3, 1).unwrap(); // modulus 4
        let a = AlgebraPresentation::new(height, vec![Generator::new("y", 1, Rule::Truncate { exponent: 3 })]).unwrap();
        let b = AlgebraPresentation::new(
            height,
            vec![
                Generator::new("a", 2, Rule::Reduce { exponent: 3, coeff: 2 }),
                Generator::new("z", 3, Rule::Truncate { exponent: 2 }),
            ],
        )
        .unwrap();
        let t = a.tensor(&b).unwrap();
        assert_eq!(t.hilbert(), a.hilbert().convolve(&b.hilbert()));
        assert_eq!(t.dimension(), 18);
    }

    #[test]
    fn odd_prime_reduction_coefficient() {
        // a^3 = 2a over F_3: a^5 = 2 a^3 = 4a = a
        let height = Height::new(3, 1).unwrap();
        let a = AlgebraPresentation::new(height, vec![Generator::new("a", 2, Rule::Reduce { exponent: 3, coeff: 2 })]).unwrap();
        assert_eq!(a.parse("a^3").unwrap(), a.parse("2*a").unwrap());
        assert_eq!(a.parse("a^5").unwrap(), a.parse("a").unwrap());
        assert_eq!(a.parse("a^4").unwrap(), a.parse("2*a^2").unwrap());
    }

    /// Rewrites by single rule applications in a random order until stuck.
    fn random_order_rewrite(a: &AlgebraPresentation, m: Monomial, rng: &mut impl Rng) -> Element {
        let f = a.field();
        let mut work = vec![(m, 1u32)];
        let mut done = Vec::new();
        while let Some((m, c)) = work.pop() {
            let applicable: Vec<usize> = (0..a.num_generators())
                .filter(|&g| a.rewrite_step(&m, g).is_some())
                .collect();
            if applicable.is_empty() {
                done.push((m, c));
                continue;
            }
            let g = applicable[rng.gen_range(0..applicable.len())];
            if let Some(Some((k, next))) = a.rewrite_step(&m, g) {
                work.push((next, f.mul(c, k)));
            }
        }
        a.normalize(done)
    }

    #[test]
    fn rewriting_is_confluent() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let height = Height::new(3, 1).unwrap();
        let a = AlgebraPresentation::new(
            height,
            vec![
                Generator::new("a", 2, Rule::Reduce { exponent: 3, coeff: 2 }),
                Generator::new("b", 0, Rule::Reduce { exponent: 3, coeff: 1 }),
                Generator::new("x", 1, Rule::Truncate { exponent: 4 }),
            ],
        )
        .unwrap();
        for _ in 0..300 {
            let m = Monomial((0..3).map(|_| rng.gen_range(0..9)).collect());
            let direct = a.normalize([(m.clone(), 1)]);
            assert_eq!(random_order_rewrite(&a, m, &mut rng), direct);
        }
    }

    #[test]
    fn multiplication_associative_commutative() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let a = r_b(h(2), 3).tensor(&truncated(h(2), 0, 4)).unwrap();
        let monos = a.all_monomials();
        for _ in 0..200 {
            let pick = |rng: &mut rand::rngs::StdRng| Element::monomial(monos[rng.gen_range(0..monos.len())].clone(), 1);
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            assert_eq!(a.mul(&a.mul(&x, &y), &z), a.mul(&x, &a.mul(&y, &z)));
            assert_eq!(a.mul(&x, &y), a.mul(&y, &x));
        }
    }

    #[test]
    fn degree_homogeneity_preserved() {
        let height = Height::new(3, 1).unwrap();
        let a = AlgebraPresentation::new(height, vec![Generator::new("a", 2, Rule::Reduce { exponent: 3, coeff: 2 })]).unwrap();
        for e in 0..12u32 {
            let m = Monomial(vec![e]);
            if let Some((_, r)) = a.reduce_monomial(&m) {
                assert_eq!(a.degree(&r), a.degree(&m));
            }
        }
    }

    #[test]
    fn rank_of_rw_tensor_is_power_of_p() {
        for j in 0..5 {
            assert_eq!(r_b(h(2), j).dimension(), 1 << j);
            assert_eq!(r_b(h(2), j).all_monomials().len(), 1 << j);
        }
    }

    #[test]
    fn idempotents_of_split_algebra() {
        let a = r_b(h(1), 2);
        let s = a.structure();
        let ids = s.primitive_idempotents();
        assert_eq!(ids.len(), 4);
        let mut sum = Element::zero();
        for (i, e) in ids.iter().enumerate() {
            assert_eq!(a.mul(e, e), *e);
            for (j, e2) in ids.iter().enumerate() {
                if i != j {
                    assert!(a.mul(e, e2).is_zero());
                }
            }
            sum = a.add(&sum, e);
        }
        assert_eq!(sum, a.one());
        assert!(s.radical().is_empty());
    }

    #[test]
    fn local_algebra_has_one_idempotent() {
        let a = truncated(h(2), 0, 4);
        let s = a.structure();
        assert_eq!(s.primitive_idempotents(), vec![a.one()]);
        assert_eq!(s.radical().len(), 3);
    }

    #[test]
    fn non_split_factor() {
        // a^3 = -a over F_3: F_3[a]/(a(a^2+1)) = F_3 x F_9
        let height = Height::new(3, 2).unwrap();
        let a = AlgebraPresentation::new(height, vec![Generator::new("a", 8, Rule::Reduce { exponent: 3, coeff: 2 })]).unwrap();
        let ids = a.structure().primitive_idempotents();
        assert_eq!(ids.len(), 2);
        for e in &ids {
            assert_eq!(a.mul(e, e), *e);
        }
        assert_eq!(a.add(&ids[0], &ids[1]), a.one());
    }
}
