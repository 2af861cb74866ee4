//! Graded modules over an [`AlgebraPresentation`], algebra characters, and the
//! tensor product `M ⊗_A F_p(χ)`.
//!
//! A module is an explicit finite basis with one action matrix per algebra
//! generator. Column `j` of the matrix for `g` is `g · e_j` in basis
//! coordinates. All questions are then degreewise linear algebra over F_p.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::algebra::{AlgebraPresentation, Element, Monomial, PresentationError, Rule};
use crate::graded::GradedDims;
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("expected {expected} action matrices, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("action of `{generator}` is {rows}x{cols}, module has dimension {dim}")]
    ActionShape {
        generator: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("action of `{generator}` sends basis element {from} (degree {from_degree}) to basis element {to} (degree {to_degree})")]
    NotHomogeneous {
        generator: String,
        from: usize,
        from_degree: u32,
        to: usize,
        to_degree: u32,
    },
    #[error("module and character are over different algebras")]
    AlgebraMismatch,
    #[error("character value on `{generator}` violates its rule")]
    CharacterRule { generator: String },
    #[error("character is nonzero on `{generator}` of nonzero degree {degree}")]
    CharacterDegree { generator: String, degree: u32 },
    #[error("expected {expected} character values, got {got}")]
    CharacterArity { expected: usize, got: usize },
    #[error("relation `{0}` is not homogeneous")]
    InhomogeneousRelation(String),
    #[error("freeness detection needs every generator in degree 0; `{0}` is not")]
    UnsupportedGrading(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// A graded module over a presented algebra, given by action matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleOverAlgebra {
    algebra: AlgebraPresentation,
    basis: Vec<(String, u32)>,
    actions: Vec<Matrix>,
}

impl ModuleOverAlgebra {
    /// Validates shapes and homogeneity. Rule compatibility and commutativity
    /// are not checked here; see [`verify_action`](Self::verify_action).
    pub fn new(
        algebra: AlgebraPresentation,
        basis: Vec<(String, u32)>,
        actions: Vec<Matrix>,
    ) -> Result<Self, ModuleError> {
        let modulus = algebra.height().modulus();
        let basis: Vec<(String, u32)> = basis.into_iter().map(|(n, d)| (n, d % modulus)).collect();
        if actions.len() != algebra.num_generators() {
            return Err(ModuleError::ActionCount {
                expected: algebra.num_generators(),
                got: actions.len(),
            });
        }
        let dim = basis.len();
        for (g, m) in algebra.generators().iter().zip(&actions) {
            if m.rows() != dim || m.cols() != dim {
                return Err(ModuleError::ActionShape {
                    generator: g.name.clone(),
                    rows: m.rows(),
                    cols: m.cols(),
                    dim,
                });
            }
            for j in 0..dim {
                for i in 0..dim {
                    if m.get(i, j) != 0 && basis[i].1 != (basis[j].1 + g.degree) % modulus {
                        return Err(ModuleError::NotHomogeneous {
                            generator: g.name.clone(),
                            from: j,
                            from_degree: basis[j].1,
                            to: i,
                            to_degree: basis[i].1,
                        });
                    }
                }
            }
        }
        Ok(ModuleOverAlgebra {
            algebra,
            basis,
            actions,
        })
    }

    /// One basis element in degree 0 on which every generator acts by zero.
    pub fn unit(algebra: &AlgebraPresentation) -> Self {
        Self::trivial(algebra, &GradedDims::unit(algebra.height()))
    }

    /// A module with the given dimensions and the augmentation action.
    pub fn trivial(algebra: &AlgebraPresentation, dims: &GradedDims) -> Self {
        let mut basis = Vec::new();
        for (d, k) in dims.iter() {
            for i in 0..k {
                basis.push((class_name(dims, d, i), d));
            }
        }
        let f = algebra.field();
        let n = basis.len();
        let actions = vec![Matrix::zeros(f, n, n); algebra.num_generators()];
        ModuleOverAlgebra {
            algebra: algebra.clone(),
            basis,
            actions,
        }
    }

    /// `A ⊗ C` with `A` acting by left multiplication on the first factor.
    pub fn free(algebra: &AlgebraPresentation, classes: &GradedDims) -> Self {
        let regular = Self::cyclic_quotient(algebra, &[]).expect("empty relation list is homogeneous");
        regular.tensor_classes(classes)
    }

    /// The cyclic module `A / I` where `I` is the ideal generated by `relations`.
    ///
    /// Basis element 0 is the image of `1` whenever `1` is not in `I`.
    pub fn cyclic_quotient(algebra: &AlgebraPresentation, relations: &[Element]) -> Result<Self, ModuleError> {
        let f = algebra.field();
        let s = algebra.structure();
        let monos = s.basis().to_vec();
        let n = monos.len();
        for r in relations {
            let mut degs = r.terms().map(|(m, _)| algebra.degree(m));
            if let Some(d0) = degs.next() {
                if degs.any(|d| d != d0) {
                    return Err(ModuleError::InhomogeneousRelation(algebra.format(r)));
                }
            }
        }
        let mut ideal_rows = Vec::new();
        for r in relations {
            for m in &monos {
                let v = s.vector(&algebra.mul(r, &Element::monomial(m.clone(), 1)));
                ideal_rows.push(v);
            }
        }
        let ideal = Matrix::from_rows(f, &ideal_rows, n);
        let (rref, pivots) = ideal.rref();
        let keep: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
        let reduce = |mut v: Vec<u32>| -> Vec<u32> {
            for (row, &pc) in pivots.iter().enumerate() {
                let c = v[pc];
                if c != 0 {
                    for j in 0..n {
                        v[j] = f.sub(v[j], f.mul(c, rref.get(row, j)));
                    }
                }
            }
            keep.iter().map(|&i| v[i]).collect()
        };
        let basis: Vec<(String, u32)> = keep
            .iter()
            .map(|&i| (algebra.format_monomial(&monos[i]), algebra.degree(&monos[i])))
            .collect();
        let actions = (0..algebra.num_generators())
            .map(|g| {
                let gen = algebra.generator_element(g);
                let cols: Vec<Vec<u32>> = keep
                    .iter()
                    .map(|&i| reduce(s.vector(&algebra.mul(&gen, &Element::monomial(monos[i].clone(), 1)))))
                    .collect();
                Matrix::from_columns(f, keep.len(), &cols)
            })
            .collect();
        Ok(ModuleOverAlgebra {
            algebra: algebra.clone(),
            basis,
            actions,
        })
    }

    /// `self ⊗ C`: one shifted copy of `self` for every basis class of `C`.
    pub fn tensor_classes(&self, classes: &GradedDims) -> Self {
        let mut out: Option<ModuleOverAlgebra> = None;
        for (d, k) in classes.iter() {
            for i in 0..k {
                let copy = self.shifted(d, &class_name(classes, d, i));
                out = Some(match out {
                    None => copy,
                    Some(acc) => acc.direct_sum(&copy),
                });
            }
        }
        out.unwrap_or_else(|| Self::trivial(&self.algebra, &GradedDims::zero(self.algebra.height())))
    }

    /// Shifts every degree by `by`, tagging basis names with `tag`.
    pub fn shifted(&self, by: u32, tag: &str) -> Self {
        let m = self.algebra.height().modulus();
        let basis = self
            .basis
            .iter()
            .map(|(n, d)| (format!("{n}⊗{tag}"), (d + by % m) % m))
            .collect();
        ModuleOverAlgebra {
            algebra: self.algebra.clone(),
            basis,
            actions: self.actions.clone(),
        }
    }

    pub fn direct_sum(&self, other: &ModuleOverAlgebra) -> Self {
        assert_eq!(self.algebra, other.algebra, "direct sum over different algebras");
        let f = self.algebra.field();
        let (a, b) = (self.dim(), other.dim());
        let mut basis = self.basis.clone();
        basis.extend(other.basis.iter().cloned());
        let actions = self
            .actions
            .iter()
            .zip(&other.actions)
            .map(|(x, y)| {
                let mut m = Matrix::zeros(f, a + b, a + b);
                for i in 0..a {
                    for j in 0..a {
                        m.set(i, j, x.get(i, j));
                    }
                }
                for i in 0..b {
                    for j in 0..b {
                        m.set(a + i, a + j, y.get(i, j));
                    }
                }
                m
            })
            .collect();
        ModuleOverAlgebra {
            algebra: self.algebra.clone(),
            basis,
            actions,
        }
    }

    pub fn algebra(&self) -> &AlgebraPresentation {
        &self.algebra
    }

    pub fn basis(&self) -> &[(String, u32)] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.basis[i].1
    }

    pub fn action(&self, generator: usize) -> &Matrix {
        &self.actions[generator]
    }

    pub fn actions(&self) -> &[Matrix] {
        &self.actions
    }

    /// Basis indices of the degree-`residue` slice.
    pub fn slice(&self, residue: u32) -> Vec<usize> {
        let r = residue % self.algebra.height().modulus();
        (0..self.dim()).filter(|&i| self.basis[i].1 == r).collect()
    }

    pub fn hilbert(&self) -> GradedDims {
        let mut g = GradedDims::zero(self.algebra.height());
        for (_, d) in &self.basis {
            g.add(*d, 1);
        }
        g
    }

    /// The action of `g` as a map from the degree-`residue` slice to the
    /// degree `residue + |g|` slice.
    pub fn action_block(&self, generator: usize, residue: u32) -> Matrix {
        let m = self.algebra.height().modulus();
        let src = self.slice(residue);
        let dst = self.slice((residue + self.algebra.generators()[generator].degree) % m);
        self.actions[generator].select(&dst, &src)
    }

    pub fn monomial_action(&self, m: &Monomial) -> Matrix {
        let f = self.algebra.field();
        let mut acc = Matrix::identity(f, self.dim());
        for (g, &e) in m.0.iter().enumerate() {
            if e > 0 {
                acc = self.actions[g].pow(e).mul(&acc);
            }
        }
        acc
    }

    pub fn element_action(&self, e: &Element) -> Matrix {
        let f = self.algebra.field();
        let mut acc = Matrix::zeros(f, self.dim(), self.dim());
        for (m, c) in e.terms() {
            acc = acc.add(&self.monomial_action(m).scale(c));
        }
        acc
    }

    /// Checks that the actions satisfy the algebra's rules and commute.
    pub fn verify_action(&self) -> Result<(), ActionViolation> {
        let gens = self.algebra.generators();
        for (i, g) in gens.iter().enumerate() {
            let a = &self.actions[i];
            let expected = match g.rule {
                Rule::Truncate { .. } => Matrix::zeros(self.algebra.field(), self.dim(), self.dim()),
                Rule::Reduce { coeff, .. } => a.scale(coeff),
            };
            let lhs = a.pow(g.rule.exponent());
            if let Some(col) = first_difference(&lhs, &expected) {
                return Err(ActionViolation {
                    kind: ViolationKind::Rule,
                    generators: (g.name.clone(), None),
                    residue: self.degree(col),
                });
            }
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                let ab = self.actions[i].mul(&self.actions[j]);
                let ba = self.actions[j].mul(&self.actions[i]);
                if let Some(col) = first_difference(&ab, &ba) {
                    return Err(ActionViolation {
                        kind: ViolationKind::Commutativity,
                        generators: (gens[i].name.clone(), Some(gens[j].name.clone())),
                        residue: self.degree(col),
                    });
                }
            }
        }
        Ok(())
    }
}

fn class_name(dims: &GradedDims, d: u32, i: usize) -> String {
    if dims.get(d) == 1 {
        format!("c{d}")
    } else {
        format!("c{d}_{i}")
    }
}

fn first_difference(a: &Matrix, b: &Matrix) -> Option<usize> {
    (0..a.cols()).find(|&j| (0..a.rows()).any(|i| a.get(i, j) != b.get(i, j)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `g^e` acts differently from the right-hand side of its rule.
    Rule,
    /// Two generators do not commute.
    Commutativity,
}

/// Witness for a failed [`ModuleOverAlgebra::verify_action`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionViolation {
    pub kind: ViolationKind,
    pub generators: (String, Option<String>),
    /// Degree of the first basis element where the check fails.
    pub residue: u32,
}

/// An algebra map `A -> F_p`, recorded by its values on generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    algebra: AlgebraPresentation,
    values: Vec<u32>,
}

impl Character {
    pub fn new(algebra: &AlgebraPresentation, values: Vec<u32>) -> Result<Self, ModuleError> {
        let f = algebra.field();
        if values.len() != algebra.num_generators() {
            return Err(ModuleError::CharacterArity {
                expected: algebra.num_generators(),
                got: values.len(),
            });
        }
        let values: Vec<u32> = values.into_iter().map(|v| v % f.p()).collect();
        for (g, &v) in algebra.generators().iter().zip(&values) {
            if v != 0 && g.degree != 0 {
                return Err(ModuleError::CharacterDegree {
                    generator: g.name.clone(),
                    degree: g.degree,
                });
            }
            if !respects_rule(f, g.rule, v) {
                return Err(ModuleError::CharacterRule {
                    generator: g.name.clone(),
                });
            }
        }
        Ok(Character {
            algebra: algebra.clone(),
            values,
        })
    }

    /// Values given by name; unnamed generators go to zero.
    pub fn from_named(algebra: &AlgebraPresentation, named: &[(&str, u32)]) -> Result<Self, ModuleError> {
        let mut values = vec![0; algebra.num_generators()];
        for (name, v) in named {
            values[algebra.generator_index(name)?] = *v;
        }
        Self::new(algebra, values)
    }

    /// All generators to zero.
    pub fn augmentation(algebra: &AlgebraPresentation) -> Self {
        Character {
            algebra: algebra.clone(),
            values: vec![0; algebra.num_generators()],
        }
    }

    pub fn algebra(&self) -> &AlgebraPresentation {
        &self.algebra
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value(&self, generator: usize) -> u32 {
        self.values[generator]
    }

    /// Evaluates the character on an algebra element.
    pub fn eval(&self, e: &Element) -> u32 {
        let f = self.algebra.field();
        e.terms().fold(0, |acc, (m, c)| {
            let v = m
                .0
                .iter()
                .zip(&self.values)
                .fold(1, |x, (&exp, &val)| f.mul(x, f.pow(val, exp as u64)));
            f.add(acc, f.mul(c, v))
        })
    }

    /// `b0 ↦ 1, b1 ↦ 0` style rendering.
    pub fn describe(&self) -> String {
        if self.values.is_empty() {
            return "(trivial)".to_string();
        }
        self.algebra
            .generators()
            .iter()
            .zip(&self.values)
            .map(|(g, v)| format!("{} ↦ {}", g.name, v))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn respects_rule(f: crate::field::Fp, rule: Rule, v: u32) -> bool {
    match rule {
        Rule::Truncate { exponent } => f.pow(v, exponent as u64) == 0,
        Rule::Reduce { exponent, coeff } => f.pow(v, exponent as u64) == f.mul(coeff, v),
    }
}

/// Every character of `A`: rule-respecting, degree-compatible scalar
/// assignments, in lexicographic order of value vectors (the augmentation
/// first).
pub fn enumerate_characters(algebra: &AlgebraPresentation) -> Vec<Character> {
    let f = algebra.field();
    let choices: Vec<Vec<u32>> = algebra
        .generators()
        .iter()
        .map(|g| {
            f.elements()
                .filter(|&v| (v == 0 || g.degree == 0) && respects_rule(f, g.rule, v))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for c in &choices {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                c.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|values| Character {
            algebra: algebra.clone(),
            values,
        })
        .collect()
}

/// Dimensions of `M ⊗_A F_p(χ)`.
///
/// In each degree the quotient is the slice modulo the span of
/// `g·m − χ(g)·m` over generators `g` and basis elements `m` landing there.
pub fn tensor_character(module: &ModuleOverAlgebra, chi: &Character) -> Result<GradedDims, ModuleError> {
    if module.algebra() != chi.algebra() {
        return Err(ModuleError::AlgebraMismatch);
    }
    let alg = module.algebra();
    let f = alg.field();
    let n = module.dim();
    let mut by_degree: BTreeMap<u32, Vec<Vec<u32>>> = BTreeMap::new();
    for (gi, g) in alg.generators().iter().enumerate() {
        let act = module.action(gi);
        let c = chi.value(gi);
        for j in 0..n {
            let mut v = act.column(j);
            if c != 0 {
                v[j] = f.sub(v[j], c);
            }
            if v.iter().all(|&x| x == 0) {
                continue;
            }
            let target = (module.degree(j) + g.degree) % alg.height().modulus();
            by_degree.entry(target).or_default().push(v);
        }
    }
    let mut out = GradedDims::zero(alg.height());
    for (d, size) in module.hilbert().iter() {
        let slice = module.slice(d);
        let rank = match by_degree.get(&d) {
            Some(rels) => {
                let restricted: Vec<Vec<u32>> = rels
                    .iter()
                    .map(|v| slice.iter().map(|&i| v[i]).collect())
                    .collect();
                Matrix::from_columns(f, slice.len(), &restricted).rank()
            }
            None => 0,
        };
        out.set(d, size - rank);
    }
    Ok(out)
}

/// Outcome of [`freeness_certificate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Freeness {
    Free(FreeCertificate),
    NotFree(Refusal),
}

/// Witness that `M ≅ A ⊗ C`: module generators whose induced map from the
/// free module is an isomorphism in every degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCertificate {
    pub classes: GradedDims,
    /// Generators as coordinate vectors in the module basis, grouped by degree.
    pub generators: Vec<(u32, Vec<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refusal {
    pub residue: u32,
    pub reason: String,
}

/// Decides whether `M` is free over its algebra and, if so, extracts a basis.
///
/// The algebra splits as a product of local factors cut out by its primitive
/// idempotents. In each degree and each factor, generators are extracted
/// greedily (lowest basis index first) modulo the radical; by Nakayama the
/// slice is free exactly when every factor needs the same number of them and
/// the dimensions match. The assembled generators are then checked to induce
/// an isomorphism from `A ⊗ C`.
pub fn freeness_certificate(module: &ModuleOverAlgebra) -> Result<Freeness, ModuleError> {
    let alg = module.algebra();
    if let Some(g) = alg.generators().iter().find(|g| g.degree != 0) {
        return Err(ModuleError::UnsupportedGrading(g.name.clone()));
    }
    let f = alg.field();
    let structure = alg.structure();
    let idempotents = structure.primitive_idempotents();
    let radical = structure.radical();
    let dim_a = alg.dimension();

    // per local factor: dim e·A and residue field degree
    let factors: Vec<(Matrix, usize, usize)> = idempotents
        .iter()
        .map(|e| {
            let dim_local = structure.mult_matrix(e).rank();
            let rad_cols: Vec<Vec<u32>> = radical.iter().map(|r| structure.vector(&alg.mul(e, r))).collect();
            let dim_rad = Matrix::from_columns(f, dim_a, &rad_cols).rank();
            (module.element_action(e), dim_local, dim_local - dim_rad)
        })
        .collect();
    let radical_actions: Vec<Matrix> = radical.iter().map(|r| module.element_action(r)).collect();
    let monomial_actions: Vec<Matrix> = structure.basis().iter().map(|m| module.monomial_action(m)).collect();

    let mut classes = GradedDims::zero(alg.height());
    let mut generators = Vec::new();
    for (d, size) in module.hilbert().iter() {
        let slice = module.slice(d);
        let restrict = |m: &Matrix| m.select(&slice, &slice);
        if size % dim_a != 0 {
            return Ok(Freeness::NotFree(Refusal {
                residue: d,
                reason: format!("slice dimension {size} is not a multiple of dim A = {dim_a}"),
            }));
        }
        let rank = size / dim_a;
        let span_of = |vectors: &[Vec<u32>]| -> Matrix {
            let mut cols = Vec::new();
            for v in vectors {
                for m in &monomial_actions {
                    cols.push(restrict(m).apply(v));
                }
            }
            Matrix::from_columns(f, slice.len(), &cols)
        };

        let mut per_factor: Vec<Vec<Vec<u32>>> = Vec::new();
        for (fi, (e_action, dim_local, residue_degree)) in factors.iter().enumerate() {
            let e = restrict(e_action);
            let component: Vec<Vec<u32>> = e.column_basis().iter().map(|&j| e.column(j)).collect();
            if component.len() != rank * dim_local {
                return Ok(Freeness::NotFree(Refusal {
                    residue: d,
                    reason: format!(
                        "local factor {fi} has dimension {} here, expected {} = {rank}·{dim_local}",
                        component.len(),
                        rank * dim_local
                    ),
                }));
            }
            let mut radical_part = Vec::new();
            for j in &radical_actions {
                let jr = restrict(j);
                for v in &component {
                    radical_part.push(jr.apply(v));
                }
            }
            let mut chosen: Vec<Vec<u32>> = Vec::new();
            let mut current = Matrix::from_columns(f, slice.len(), &radical_part);
            for v in &component {
                if current.rank() == component.len() {
                    break;
                }
                if current.spans(v) {
                    continue;
                }
                chosen.push(v.clone());
                current = current.hstack(&span_of(std::slice::from_ref(v)));
            }
            if chosen.len() != rank {
                return Ok(Freeness::NotFree(Refusal {
                    residue: d,
                    reason: format!(
                        "local factor {fi} needs {} generators (residue degree {residue_degree}), free rank would be {rank}",
                        chosen.len()
                    ),
                }));
            }
            per_factor.push(chosen);
        }

        let mut slice_gens = Vec::new();
        for k in 0..rank {
            let mut v = vec![0u32; slice.len()];
            for chosen in &per_factor {
                for (x, y) in v.iter_mut().zip(&chosen[k]) {
                    *x = f.add(*x, *y);
                }
            }
            slice_gens.push(v);
        }
        let induced = span_of(&slice_gens);
        if induced.cols() != size || induced.rank() != size {
            return Ok(Freeness::NotFree(Refusal {
                residue: d,
                reason: format!(
                    "induced map from the free module has rank {} < {size}",
                    induced.rank()
                ),
            }));
        }
        classes.add(d, rank);
        for v in slice_gens {
            let mut full = vec![0u32; module.dim()];
            for (pos, &i) in slice.iter().enumerate() {
                full[i] = v[pos];
            }
            generators.push((d, full));
        }
    }
    Ok(Freeness::Free(FreeCertificate { classes, generators }))
}
