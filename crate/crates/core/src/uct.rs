//! Twisted Morava K-homology by the universal coefficient theorem.
//!
//! For a principal bundle `P → X` classified by a twist, `K(n)_*(X; twist)` is
//! `K(n)_*(P) ⊗_A K(n)_*`, where `A` is `⊗ R(b_i)` for integral twists or
//! `R(a_0)` for mod 2 twists, and `K(n)_*` is an `A`-module through the twist
//! character (`b_0 ↦ 1` or `a_0 ↦ 1`). Everything here reduces to
//! [`tensor_character`] on explicit modules, or to structural flags recorded in
//! the catalog when only the module's shape is known.

use std::fmt;

use thiserror::Error;

use crate::catalog::{
    em_algebra, integral_twist_algebra, twist_character, CatalogError, EmGroup, Homology, SpaceDescriptor,
    SpaceKind, StructuralFlag, TwistFlavor,
};
use crate::graded::{GradedDims, Height};
use crate::module::{freeness_certificate, tensor_character, Character, Freeness, ModuleError, ModuleOverAlgebra};
use crate::steenrod::Poly;

#[derive(Debug, Error)]
pub enum UctError {
    #[error("twisted computations need p = 2, got p = {0}")]
    Prime(u32),
    #[error("multiplier must be at least 1, got {0}")]
    Multiplier(i64),
    #[error("malformed twist expression `{0}`; expected [k*]name")]
    TwistSyntax(String),
    #[error("space `{space}` has no twist named `{twist}`")]
    UnknownTwist { space: String, twist: String },
    #[error("space `{space}` lacks the structural flag `{flag}`")]
    MissingFlag { space: String, flag: &'static str },
    #[error("hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("{0}")]
    Refused(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// An integral twist `k·H` or a mod 2 twist `k·h`, by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistSpec {
    pub height: Height,
    pub flavor: TwistFlavor,
    pub multiplier: i64,
    pub name: String,
    /// The class in the space's cohomology ring, when it has one.
    pub class: Option<Poly>,
}

/// Splits `3*sigma3`, `-1*w2`, `p1/2` into a multiplier and a class name.
pub fn parse_twist_expr(expr: &str) -> Result<(i64, String), UctError> {
    let bad = || UctError::TwistSyntax(expr.to_string());
    let expr = expr.trim();
    let (k, name) = match expr.split_once('*') {
        Some((k, name)) => (k.trim().parse::<i64>().map_err(|_| bad())?, name.trim()),
        None => (1, expr),
    };
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '/' | '<' | '>' | '^'));
    if !valid {
        return Err(bad());
    }
    Ok((k, name.to_string()))
}

impl TwistSpec {
    /// Resolves a twist expression against the space's named twists.
    pub fn resolve(space: &SpaceDescriptor, expr: &str) -> Result<Self, UctError> {
        if space.height.p() != 2 {
            return Err(UctError::Prime(space.height.p()));
        }
        let (multiplier, name) = parse_twist_expr(expr)?;
        if let Some(t) = space.twists.get(&name) {
            return Ok(TwistSpec {
                height: space.height,
                flavor: t.flavor,
                multiplier,
                name,
                class: t.class.clone(),
            });
        }
        if let Some(ring) = &space.ring {
            if let Ok(class) = ring.parse(&name) {
                return Ok(TwistSpec {
                    height: space.height,
                    flavor: TwistFlavor::Integral,
                    multiplier,
                    name,
                    class: Some(class),
                });
            }
        }
        Err(UctError::UnknownTwist {
            space: space.name.clone(),
            twist: name,
        })
    }

    /// True when the twist is zero: multiplier 0, an even multiple of a mod 2
    /// class, or a vanishing class.
    pub fn is_zero(&self) -> bool {
        let class_zero = self.class.as_ref().is_some_and(|c| c.is_zero());
        match self.flavor {
            TwistFlavor::Integral => self.multiplier == 0 || class_zero,
            TwistFlavor::Mod2 => self.multiplier.rem_euclid(2) == 0 || class_zero,
        }
    }

    pub fn character(&self, truncation: u32) -> Result<Character, CatalogError> {
        match self.flavor {
            TwistFlavor::Integral => twist_character(self.height, truncation),
            TwistFlavor::Mod2 => crate::catalog::mod2_twist_character(self.height),
        }
    }
}

impl fmt::Display for TwistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.multiplier == 1 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}*{}", self.multiplier, self.name)
        }
    }
}

/// Outcome of a twisted computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Dimensions obtained by a full computation.
    Numeric { dims: GradedDims, certificate: Vec<String> },
    /// Isomorphic to the untwisted theory; dimensions when known.
    Isomorphic {
        statement: String,
        dims: Option<GradedDims>,
        certificate: Vec<String>,
    },
    /// The twisted theory vanishes.
    Zero { statement: String, certificate: Vec<String> },
}

impl Verdict {
    pub fn certificate(&self) -> &[String] {
        match self {
            Verdict::Numeric { certificate, .. }
            | Verdict::Isomorphic { certificate, .. }
            | Verdict::Zero { certificate, .. } => certificate,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Numeric { .. } => "numeric",
            Verdict::Isomorphic { .. } => "isomorphic",
            Verdict::Zero { .. } => "zero",
        }
    }

    pub fn dims(&self) -> Option<&GradedDims> {
        match self {
            Verdict::Numeric { dims, .. } => Some(dims),
            Verdict::Isomorphic { dims, .. } => dims.as_ref(),
            Verdict::Zero { .. } => None,
        }
    }
}

/// `K(n)_*(K(Z, n+2); k)` with the reduction of the total space recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedEm {
    pub k: u64,
    /// `k = 2^j · m` with `m` odd.
    pub j: u32,
    pub m: u64,
    pub total_space: String,
    /// `K(n)_*` of the total space, as dimensions.
    pub untwisted: GradedDims,
    pub dims: GradedDims,
    pub certificate: Vec<String>,
}

/// The total space of `k` times the fundamental class is `K(Z/k, n+1)`. At the
/// prime 2 this is `K(Z/2^j, n+1)` for `k = 2^j m`, whose Morava K-homology is
/// that of a point since `n + 1 > n`. The twisting algebra then acts through
/// the augmentation, which clashes with the twist character.
pub fn twisted_em(height: Height, k: i64, truncation: u32) -> Result<TwistedEm, UctError> {
    if height.p() != 2 {
        return Err(UctError::Prime(height.p()));
    }
    if k < 1 {
        return Err(UctError::Multiplier(k));
    }
    let k = k as u64;
    let j = k.trailing_zeros();
    let m = k >> j;
    let n = height.n();
    let algebra = integral_twist_algebra(height, truncation)?;
    let (total_space, untwisted) = if j == 0 {
        (format!("K(Z/{k}, {}) ~ pt at p = 2", n + 1), GradedDims::unit(height))
    } else {
        let fiber = em_algebra(height, EmGroup::Cyclic { j }, n + 1, 1)?;
        (format!("K(Z/{k}, {}) ~ K(Z/2^{j}, {}) at p = 2", n + 1, n + 1), fiber.hilbert())
    };
    let module = ModuleOverAlgebra::trivial(&algebra, &untwisted);
    let chi = twist_character(height, truncation)?;
    let dims = tensor_character(&module, &chi)?;
    let certificate = vec![
        format!("k = {k} = 2^{j} * {m}"),
        format!("P_k = {total_space}"),
        format!("K({n})_*(P_k) = {untwisted} with augmentation action"),
        format!("K({n})_*(P_k) (x)_A K({n})_* with b0 -> 1 = {}", show(&dims)),
    ];
    Ok(TwistedEm {
        k,
        j,
        m,
        total_space,
        untwisted,
        dims,
        certificate,
    })
}

/// Runs `f` at truncations `J` and `J + 1`; returns the value at `J` and
/// whether the two agree.
pub fn j_stable<T: PartialEq, E>(truncation: u32, f: impl Fn(u32) -> Result<T, E>) -> Result<(T, bool), E> {
    let a = f(truncation)?;
    let b = f(truncation + 1)?;
    let stable = a == b;
    Ok((a, stable))
}

/// Numeric untwisting: `M` free over `A` implies `M ⊗_A F(χ) ≅ C` for every
/// character `χ`, in particular for the twist character and the augmentation.
pub fn untwist_free(module: &ModuleOverAlgebra, chi: &Character) -> Result<Verdict, UctError> {
    let cert = match freeness_certificate(module)? {
        Freeness::Free(c) => c,
        Freeness::NotFree(r) => {
            return Err(UctError::Hypothesis(format!(
                "module is not free in degree {}: {}",
                r.residue, r.reason
            )))
        }
    };
    let twisted = tensor_character(module, chi)?;
    let untwisted = tensor_character(module, &Character::augmentation(module.algebra()))?;
    if twisted != cert.classes || untwisted != cert.classes {
        return Err(UctError::Hypothesis(format!(
            "free module with classes {} gave {twisted} and {untwisted}",
            cert.classes
        )));
    }
    Ok(Verdict::Isomorphic {
        statement: "M (x)_A K(n)_* (twisted) = M (x)_A K(n)_* (untwisted)".into(),
        dims: Some(cert.classes.clone()),
        certificate: vec![
            format!("M = A (x) C with C = {} (freeness certificate)", cert.classes),
            format!("(A (x) C) (x)_A K(n)_* = C for {}", chi.describe()),
            format!("(A (x) C) (x)_A K(n)_* = C for the augmentation"),
        ],
    })
}

/// Numeric clash: `M` generated by a degree 0 unit `e_0` on which the twist
/// generator (index 0 of the algebra) acts by 0 gives `M ⊗_A F(χ) = 0` when
/// `χ` sends that generator to 1.
pub fn clash_numeric(module: &ModuleOverAlgebra, chi: &Character) -> Result<Verdict, UctError> {
    let alg = module.algebra();
    if module.dim() == 0 {
        return Err(UctError::Hypothesis("module has no unit".into()));
    }
    if module.degree(0) != 0 {
        return Err(UctError::Hypothesis("basis element 0 is not in degree 0".into()));
    }
    if alg.num_generators() == 0 || chi.value(0) != 1 {
        return Err(UctError::Hypothesis("character does not send the first generator to 1".into()));
    }
    let g = &alg.generators()[0].name;
    if module.action(0).column(0).iter().any(|&x| x != 0) {
        return Err(UctError::Hypothesis(format!("{g} does not kill the unit")));
    }
    let f = alg.field();
    let images: Vec<Vec<u32>> = alg
        .all_monomials()
        .iter()
        .map(|m| module.monomial_action(m).column(0))
        .collect();
    let span = crate::linalg::Matrix::from_columns(f, module.dim(), &images).rank();
    if span != module.dim() {
        return Err(UctError::Hypothesis(format!(
            "the unit generates a {span}-dimensional submodule of {}",
            module.dim()
        )));
    }
    let dims = tensor_character(module, chi)?;
    if !dims.is_zero() {
        return Err(UctError::Hypothesis(format!("clash module gave {dims}")));
    }
    Ok(Verdict::Zero {
        statement: "M (x)_A K(n)_* = 0".into(),
        certificate: clash_chain(g),
    })
}

fn show(dims: &GradedDims) -> String {
    if dims.is_zero() {
        "0".to_string()
    } else {
        dims.to_string()
    }
}

fn clash_chain(g: &str) -> Vec<String> {
    vec![
        format!("{g} acts by 0 on the unit 1 of K(n)_*(P)"),
        format!("1 (x) 1 = 1 (x) {g}.1 = {g}.1 (x) 1 = 0 (x) 1 = 0"),
        "K(n)_*(P) is generated over A by 1, so every a.1 (x) 1 = 1 (x) chi(a) = 0".to_string(),
    ]
}

fn untwisted_statement(space: &SpaceDescriptor, twist: &TwistSpec) -> String {
    let base = space.base.as_deref().unwrap_or(&space.name);
    format!("K({n})_*({base}; {twist}) = K({n})_*({base})", n = space.height.n())
}

/// Symbolic untwisting for a cover whose total space is free over `A`.
pub fn twisted_cover(space: &SpaceDescriptor, twist: &TwistSpec) -> Result<Verdict, UctError> {
    check_twist(space, twist)?;
    if let Homology::Module(m) = &space.homology {
        let chi = twist.character(space.truncation)?;
        return untwist_free(m, &chi);
    }
    if !space.has_flag(StructuralFlag::FreeOverA) {
        return Err(UctError::MissingFlag {
            space: space.name.clone(),
            flag: StructuralFlag::FreeOverA.as_str(),
        });
    }
    let alg = match twist.flavor {
        TwistFlavor::Integral => "(x)_i R(b_i)",
        TwistFlavor::Mod2 => "R(a_0)",
    };
    Ok(Verdict::Isomorphic {
        statement: untwisted_statement(space, twist),
        dims: None,
        certificate: vec![
            format!("K(n)_*({}) = A (x) C is free over A = {alg} (flag free-over-A)", space.name),
            "A (x) C (x)_A K(n)_* = C for every character of A".to_string(),
            "C is the same for the twist character and the augmentation".to_string(),
        ],
    })
}

/// Symbolic vanishing for a cover whose unit is killed by `b_0` (or `a_0`).
pub fn clash_vanishing(space: &SpaceDescriptor, twist: &TwistSpec) -> Result<Verdict, UctError> {
    check_twist(space, twist)?;
    if let Homology::Module(m) = &space.homology {
        let chi = twist.character(space.truncation)?;
        return clash_numeric(m, &chi);
    }
    let flag = match twist.flavor {
        TwistFlavor::Integral => StructuralFlag::B0Killed,
        TwistFlavor::Mod2 => StructuralFlag::A0Killed,
    };
    if !space.has_flag(flag) {
        return Err(UctError::MissingFlag {
            space: space.name.clone(),
            flag: flag.as_str(),
        });
    }
    let base = space.base.as_deref().unwrap_or(&space.name);
    let g = match twist.flavor {
        TwistFlavor::Integral => "b0",
        TwistFlavor::Mod2 => "a0",
    };
    let mut certificate = vec![format!("P = {}, flag {}", space.name, flag.as_str())];
    certificate.extend(clash_chain(g));
    Ok(Verdict::Zero {
        statement: format!("K({})_*({base}; {twist}) = 0", space.height.n()),
        certificate,
    })
}

/// The mod 2 flavor of [`uct`].
pub fn mod2_twisted(space: &SpaceDescriptor, twist: &TwistSpec) -> Result<Verdict, UctError> {
    if twist.flavor != TwistFlavor::Mod2 {
        return Err(UctError::Refused(format!("`{}` is not a mod 2 twist", twist.name)));
    }
    uct(space, twist)
}

fn check_twist(space: &SpaceDescriptor, twist: &TwistSpec) -> Result<(), UctError> {
    if space.height.p() != 2 {
        return Err(UctError::Prime(space.height.p()));
    }
    if twist.height != space.height {
        return Err(UctError::Refused("twist and space live at different heights".into()));
    }
    Ok(())
}

/// Dispatches on what the catalog knows about the total space.
pub fn uct(space: &SpaceDescriptor, twist: &TwistSpec) -> Result<Verdict, UctError> {
    check_twist(space, twist)?;
    if twist.is_zero() {
        return Ok(Verdict::Isomorphic {
            statement: untwisted_statement(space, twist),
            dims: match &space.homology {
                Homology::Dims(d) => Some(d.clone()),
                Homology::Module(m) => Some(m.hilbert()),
                Homology::Structural(_) => None,
            },
            certificate: vec![format!("{twist} is the zero twist"), "K(n)_*(X; 0) = K(n)_*(X)".into()],
        });
    }
    if matches!(twist.flavor, TwistFlavor::Integral) && twist.multiplier != 1 && space.kind == SpaceKind::StructuralCover
    {
        return Err(UctError::Refused(format!(
            "structural data describe the cover for {} only, not for {twist}",
            twist.name
        )));
    }
    match &space.homology {
        Homology::Structural(flags) => {
            let killed = match twist.flavor {
                TwistFlavor::Integral => StructuralFlag::B0Killed,
                TwistFlavor::Mod2 => StructuralFlag::A0Killed,
            };
            if flags.contains(&killed) {
                clash_vanishing(space, twist)
            } else if flags.contains(&StructuralFlag::FreeOverA) {
                twisted_cover(space, twist)
            } else {
                Err(UctError::MissingFlag {
                    space: space.name.clone(),
                    flag: killed.as_str(),
                })
            }
        }
        Homology::Module(m) => {
            let expected = space.twist_algebra(twist.flavor)?;
            if m.algebra() != &expected {
                return Err(UctError::Refused(format!(
                    "K(n)_*({}) is not a module over the algebra of a {} twist",
                    space.name,
                    twist.flavor.as_str()
                )));
            }
            let chi = twist.character(space.truncation)?;
            let dims = tensor_character(m, &chi)?;
            Ok(Verdict::Numeric {
                certificate: vec![
                    format!("K(n)_*(P) = {} over {}", m.hilbert(), expected),
                    format!("tensor with {} gives {}", chi.describe(), show(&dims)),
                ],
                dims,
            })
        }
        Homology::Dims(_) => Err(UctError::Refused(format!(
            "the catalog has no module structure for `{}` over the twisting algebra",
            space.name
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{load_space, mod2_twist_algebra};

    fn h(n: u32) -> Height {
        Height::at_two(n).unwrap()
    }

    #[test]
    fn twist_expressions() {
        assert_eq!(parse_twist_expr("1*sigma3").unwrap(), (1, "sigma3".into()));
        assert_eq!(parse_twist_expr(" 6 * sigma3 ").unwrap(), (6, "sigma3".into()));
        assert_eq!(parse_twist_expr("p1/2").unwrap(), (1, "p1/2".into()));
        assert_eq!(parse_twist_expr("-1*w2").unwrap(), (-1, "w2".into()));
        assert!(parse_twist_expr("x*w2").is_err());
        assert!(parse_twist_expr("3*").is_err());
        assert!(parse_twist_expr("2 w2").is_err());
    }

    #[test]
    fn twisted_em_vanishes() {
        for (n, k) in [(2, 1), (2, 2), (1, 3), (3, 12)] {
            let out = twisted_em(h(n), k, 2).unwrap();
            assert!(out.dims.is_zero(), "n={n} k={k}");
            assert_eq!(out.untwisted.total(), 1);
        }
        let out = twisted_em(h(2), 12, 1).unwrap();
        assert_eq!((out.j, out.m), (2, 3));
        assert!(matches!(twisted_em(h(2), 0, 1), Err(UctError::Multiplier(0))));
        assert!(matches!(
            twisted_em(Height::new(3, 1).unwrap(), 1, 1),
            Err(UctError::Prime(3))
        ));
        let (dims, stable) = j_stable(2, |j| twisted_em(h(2), 4, j).map(|t| t.dims)).unwrap();
        assert!(dims.is_zero() && stable);
    }

    #[test]
    fn free_modules_untwist() {
        let a = integral_twist_algebra(h(2), 2).unwrap();
        let c = GradedDims::from_pairs(h(2), [(0, 2), (3, 1)]);
        let m = ModuleOverAlgebra::free(&a, &c);
        let v = untwist_free(&m, &twist_character(h(2), 2).unwrap()).unwrap();
        assert_eq!(v.dims(), Some(&c));
        assert!(untwist_free(&ModuleOverAlgebra::unit(&a), &twist_character(h(2), 2).unwrap()).is_err());
    }

    #[test]
    fn unit_module_clashes() {
        let a = integral_twist_algebra(h(2), 1).unwrap();
        let v = clash_numeric(&ModuleOverAlgebra::unit(&a), &twist_character(h(2), 1).unwrap()).unwrap();
        assert_eq!(v.kind(), "zero");
        let a0 = mod2_twist_algebra(h(1)).unwrap();
        let chi = crate::catalog::mod2_twist_character(h(1)).unwrap();
        assert!(clash_numeric(&ModuleOverAlgebra::unit(&a0), &chi).is_ok());
        // a free module's unit is not killed by b0
        assert!(clash_numeric(&ModuleOverAlgebra::free(&a, &GradedDims::unit(h(2))), &twist_character(h(2), 1).unwrap()).is_err());
    }

    const BSTRING: &str = r#"
name = "BString-n2"
kind = "structural-cover"
prime = 2
height = 2
truncation = 2
base = "BSpin"
flags = ["b0-killed"]
[twists]
"p1/2" = { flavor = "integral" }
"#;

    #[test]
    fn structural_dispatch() {
        let space = load_space(BSTRING).unwrap();
        let t = TwistSpec::resolve(&space, "p1/2").unwrap();
        let v = uct(&space, &t).unwrap();
        let Verdict::Zero { statement, certificate } = &v else { panic!("{v:?}") };
        assert_eq!(statement, "K(2)_*(BSpin; p1/2) = 0");
        assert!(certificate.iter().any(|c| c.contains("1 (x) 1 = 1 (x) b0.1")));
        assert!(matches!(
            twisted_cover(&space, &t),
            Err(UctError::MissingFlag { flag: "free-over-A", .. })
        ));
        assert!(matches!(uct(&space, &TwistSpec::resolve(&space, "3*p1/2").unwrap()), Err(UctError::Refused(_))));
        assert_eq!(uct(&space, &TwistSpec::resolve(&space, "0*p1/2").unwrap()).unwrap().kind(), "isomorphic");
        assert!(matches!(
            TwistSpec::resolve(&space, "w2"),
            Err(UctError::UnknownTwist { .. })
        ));
    }

    #[test]
    fn free_cover_and_mod2() {
        let text = BSTRING.replace("b0-killed", "free-over-A");
        let space = load_space(&text).unwrap();
        let t = TwistSpec::resolve(&space, "p1/2").unwrap();
        let v = uct(&space, &t).unwrap();
        let Verdict::Isomorphic { statement, dims, .. } = &v else { panic!() };
        assert_eq!(statement, "K(2)_*(BSpin; p1/2) = K(2)_*(BSpin)");
        assert!(dims.is_none());

        let bso = load_space(
            "name = \"BSpin-n1\"\nkind = \"structural-cover\"\nprime = 2\nheight = 1\ntruncation = 1\nbase = \"BSO\"\nflags = [\"a0-killed\"]\n[twists]\nw2 = { flavor = \"mod2\" }\n",
        )
        .unwrap();
        let w2 = TwistSpec::resolve(&bso, "w2").unwrap();
        let v = mod2_twisted(&bso, &w2).unwrap();
        assert_eq!(v.kind(), "zero");
        assert_eq!(uct(&bso, &TwistSpec::resolve(&bso, "2*w2").unwrap()).unwrap().kind(), "isomorphic");
        assert!(mod2_twisted(&space, &t).is_err());
    }

    #[test]
    fn spheres_are_refused() {
        let s3 = load_space("name = \"S3\"\nkind = \"sphere(3)\"\nprime = 2\nheight = 1\ntruncation = 1\n").unwrap();
        let t = TwistSpec::resolve(&s3, "sigma3").unwrap();
        assert!(matches!(uct(&s3, &t), Err(UctError::Refused(_))));
    }
}
