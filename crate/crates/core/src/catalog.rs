//! Ravenel–Wilson algebras, twist characters, and the space catalog.
//!
//! # Catalog documents
//!
//! One TOML document per space. Top-level keys:
//!
//! | key          | type                 | notes                                                    |
//! |--------------|----------------------|----------------------------------------------------------|
//! | `name`       | string               | required                                                 |
//! | `kind`       | string               | `em-integral(q)`, `em-mod-p(j,q)`, `sphere(m)`, `finite-complex`, `structural-cover` |
//! | `prime`      | integer              | required                                                 |
//! | `height`     | integer              | chromatic height `n >= 1`                                |
//! | `truncation` | integer              | `J >= 1`, number of `b_i` factors kept                   |
//! | `base`       | string               | structural covers only: the space carrying the twist     |
//! | `dims`       | table                | `{ "0" = 1, "3" = 1 }`, degrees reduced mod `2(p^n - 1)` |
//! | `flags`      | array of strings     | `free-over-A`, `b0-killed`, `a0-killed`                  |
//! | `[ring]`     | table                | finite complexes: mod 2 cohomology                       |
//! | `[actions]`  | table                | explicit module over the twisting algebra                |
//! | `[twists]`   | table                | named twist classes                                      |
//!
//! `[ring]` holds `generators = ["t:1", ...]` (name:degree), an optional
//! `truncations = { t = 8 }` imposing `t^8 = 0`, and an optional
//! `sq = [{ gen = "w2", i = 1, value = "w3" }, ...]`.
//!
//! `[actions]` holds `over = "integral"` (module over `⊗_{i<J} R(b_i)`) or
//! `"mod2"` (over `R(a_0)`), `basis = ["u:0", ...]` (name:degree), and a
//! `[actions.matrices]` table with one row-major 0/1 matrix per algebra
//! generator. Column `j` of the matrix for `g` is `g · e_j`.
//!
//! `[twists]` maps a class name to `{ flavor = "integral" | "mod2", class = "..." }`;
//! `class` is a polynomial in the ring and may be omitted when the space has no
//! ring. Spheres `S^m` implicitly carry the integral twist `sigma{m}`.
//!
//! Exactly one of `dims`, `flags`, `[actions]` describes homology. Spheres and
//! Eilenberg–MacLane kinds derive it and finite complexes derive it from their
//! ring; an explicit `dims` on these kinds must agree with the derived value.
//! Flags are accepted only on `structural-cover`. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraPresentation, Generator, PresentationError, Rule};
use crate::graded::{GradedDims, Height, HeightError};
use crate::linalg::Matrix;
use crate::module::{Character, ModuleError, ModuleOverAlgebra};
use crate::steenrod::{Poly, RingGenerator, SteenrodError, SteenrodRing};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("q must be at least 1")]
    DegreeTooSmall,
    #[error("j must be at least 1")]
    TrivialGroup,
    #[error("truncation J must be at least 1")]
    ZeroTruncation,
    #[error("K({n})_* of {space} is outside the Ravenel–Wilson range covered here")]
    Unsupported { n: u32, space: String },
    #[error("twisted computations need p = 2, got p = {0}")]
    TwistPrime(u32),
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("no space named `{0}` in the catalog")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<CatalogError> },
    #[error(transparent)]
    Height(#[from] HeightError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// The coefficient group of an Eilenberg–MacLane space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmGroup {
    Integers,
    /// `Z/p^j`.
    Cyclic { j: u32 },
}

/// `K(n)_* K(G, q)` as a presented algebra.
///
/// * `Z/p^j`, `q = n`: `⊗_{i<j} R(a_i)` with `a_i^p = (-1)^{n-1} a_i`.
/// * `Z`, `q = n + 1`: `⊗_{i<J} R(b_i)`, the infinite tensor cut at `J`.
/// * `Z/p^j` with `q > n`, or `Z` with `q > n + 1`: the trivial algebra.
///
/// Smaller `q` is reported as [`CatalogError::Unsupported`].
pub fn em_algebra(height: Height, group: EmGroup, q: u32, truncation: u32) -> Result<AlgebraPresentation, CatalogError> {
    if q < 1 {
        return Err(CatalogError::DegreeTooSmall);
    }
    let n = height.n();
    let (letter, count, critical) = match group {
        EmGroup::Cyclic { j } => {
            if j == 0 {
                return Err(CatalogError::TrivialGroup);
            }
            ("a", j, n)
        }
        EmGroup::Integers => {
            if truncation == 0 {
                return Err(CatalogError::ZeroTruncation);
            }
            ("b", truncation, n + 1)
        }
    };
    if q > critical {
        return Ok(AlgebraPresentation::trivial(height));
    }
    if q < critical {
        let space = match group {
            EmGroup::Integers => format!("K(Z, {q})"),
            EmGroup::Cyclic { j } => format!("K(Z/{}^{j}, {q})", height.p()),
        };
        return Err(CatalogError::Unsupported { n, space });
    }
    let f = height.field();
    let sign = if n % 2 == 1 { 1 } else { f.neg(1) };
    let modulus = height.modulus() as u64;
    let p = height.p() as u64;
    let mut generators = Vec::new();
    let mut pk = 1u64;
    for k in 0..count {
        let degree = ((pk % modulus) * (height.x_degree() % modulus) % modulus) as u32;
        generators.push(Generator::new(
            format!("{letter}{k}"),
            degree,
            Rule::Reduce {
                exponent: height.p(),
                coeff: sign,
            },
        ));
        pk = pk * p % modulus;
    }
    Ok(AlgebraPresentation::new(height, generators)?)
}

/// `⊗_{i<J} R(b_i)`, the algebra acting on the homology of an integral twist's total space.
pub fn integral_twist_algebra(height: Height, truncation: u32) -> Result<AlgebraPresentation, CatalogError> {
    em_algebra(height, EmGroup::Integers, height.n() + 1, truncation)
}

/// `R(a_0) = K(n)_* K(Z/2, n)`, the algebra for mod 2 twists.
pub fn mod2_twist_algebra(height: Height) -> Result<AlgebraPresentation, CatalogError> {
    em_algebra(height, EmGroup::Cyclic { j: 1 }, height.n(), 1)
}

/// The character `b_0 ↦ 1`, `b_i ↦ 0` for `i > 0`.
pub fn twist_character(height: Height, truncation: u32) -> Result<Character, CatalogError> {
    if height.p() != 2 {
        return Err(CatalogError::TwistPrime(height.p()));
    }
    leading_character(&integral_twist_algebra(height, truncation)?)
}

/// The character `a_0 ↦ 1` on `R(a_0)`.
pub fn mod2_twist_character(height: Height) -> Result<Character, CatalogError> {
    if height.p() != 2 {
        return Err(CatalogError::TwistPrime(height.p()));
    }
    leading_character(&mod2_twist_algebra(height)?)
}

fn leading_character(algebra: &AlgebraPresentation) -> Result<Character, CatalogError> {
    let mut values = vec![0; algebra.num_generators()];
    values[0] = 1;
    Character::new(algebra, values).map_err(|e| CatalogError::Invalid {
        field: "character".into(),
        reason: e.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    EmIntegral { q: u32 },
    EmModP { j: u32, q: u32 },
    Sphere { m: u32 },
    FiniteComplex,
    StructuralCover,
}

impl SpaceKind {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let args = |prefix: &str| -> Option<Vec<u32>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(|a| a.trim().parse().ok()).collect()
        };
        match s {
            "finite-complex" => return Some(SpaceKind::FiniteComplex),
            "structural-cover" => return Some(SpaceKind::StructuralCover),
            _ => {}
        }
        if let Some(a) = args("em-integral") {
            return matches!(a[..], [_]).then(|| SpaceKind::EmIntegral { q: a[0] });
        }
        if let Some(a) = args("em-mod-p") {
            return matches!(a[..], [_, _]).then(|| SpaceKind::EmModP { j: a[0], q: a[1] });
        }
        if let Some(a) = args("sphere") {
            return matches!(a[..], [_]).then(|| SpaceKind::Sphere { m: a[0] });
        }
        None
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::EmIntegral { q } => write!(f, "em-integral({q})"),
            SpaceKind::EmModP { j, q } => write!(f, "em-mod-p({j},{q})"),
            SpaceKind::Sphere { m } => write!(f, "sphere({m})"),
            SpaceKind::FiniteComplex => write!(f, "finite-complex"),
            SpaceKind::StructuralCover => write!(f, "structural-cover"),
        }
    }
}

/// Structure certified for the homology of a cover's total space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuralFlag {
    /// Free over the twisting algebra.
    FreeOverA,
    /// `b_0` acts by zero on the unit, and the unit generates.
    B0Killed,
    /// Mod 2 analogue of `B0Killed` for `a_0`.
    A0Killed,
}

impl StructuralFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            StructuralFlag::FreeOverA => "free-over-A",
            StructuralFlag::B0Killed => "b0-killed",
            StructuralFlag::A0Killed => "a0-killed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::FreeOverA, Self::B0Killed, Self::A0Killed]
            .into_iter()
            .find(|f| f.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TwistFlavor {
    Integral,
    Mod2,
}

impl TwistFlavor {
    pub fn as_str(&self) -> &'static str {
        match self {
            TwistFlavor::Integral => "integral",
            TwistFlavor::Mod2 => "mod2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "integral" => Some(TwistFlavor::Integral),
            "mod2" => Some(TwistFlavor::Mod2),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedTwist {
    pub flavor: TwistFlavor,
    /// The class as a polynomial in the space's ring, when it has one.
    pub class: Option<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homology {
    /// Dimensions only; any action is the augmentation.
    Dims(GradedDims),
    Module(ModuleOverAlgebra),
    Structural(Vec<StructuralFlag>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub name: String,
    pub kind: SpaceKind,
    pub height: Height,
    pub truncation: u32,
    pub base: Option<String>,
    pub homology: Homology,
    pub ring: Option<SteenrodRing>,
    pub twists: BTreeMap<String, NamedTwist>,
}

impl SpaceDescriptor {
    pub fn flags(&self) -> &[StructuralFlag] {
        match &self.homology {
            Homology::Structural(f) => f,
            _ => &[],
        }
    }

    pub fn has_flag(&self, flag: StructuralFlag) -> bool {
        self.flags().contains(&flag)
    }

    /// The algebra the twist of this flavor acts through.
    pub fn twist_algebra(&self, flavor: TwistFlavor) -> Result<AlgebraPresentation, CatalogError> {
        match flavor {
            TwistFlavor::Integral => integral_twist_algebra(self.height, self.truncation),
            TwistFlavor::Mod2 => mod2_twist_algebra(self.height),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: String,
    kind: String,
    prime: u32,
    height: u32,
    truncation: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<BTreeMap<String, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flags: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ring: Option<RawRing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actions: Option<RawActions>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    twists: BTreeMap<String, RawTwist>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRing {
    generators: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    truncations: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sq: Vec<RawSquare>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSquare {
    gen: String,
    i: u32,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActions {
    over: String,
    basis: Vec<String>,
    matrices: BTreeMap<String, Vec<Vec<u32>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwist {
    flavor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class: Option<String>,
}

fn invalid(field: &str, reason: impl fmt::Display) -> CatalogError {
    CatalogError::Invalid {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, column)
}

fn split_named_degree(field: &str, s: &str) -> Result<(String, u32), CatalogError> {
    let (name, degree) = s
        .rsplit_once(':')
        .ok_or_else(|| invalid(field, format!("`{s}` is not of the form name:degree")))?;
    let degree = degree
        .trim()
        .parse()
        .map_err(|_| invalid(field, format!("bad degree in `{s}`")))?;
    Ok((name.trim().to_string(), degree))
}

/// Homology of a space whose kind determines it, if any.
fn derived_homology(
    kind: SpaceKind,
    height: Height,
    truncation: u32,
    ring: Option<&SteenrodRing>,
) -> Result<Option<Homology>, CatalogError> {
    Ok(match kind {
        SpaceKind::EmIntegral { q } => {
            let a = em_algebra(height, EmGroup::Integers, q, truncation)?;
            Some(Homology::Module(ModuleOverAlgebra::free(&a, &GradedDims::unit(height))))
        }
        SpaceKind::EmModP { j, q } => {
            let a = em_algebra(height, EmGroup::Cyclic { j }, q, truncation)?;
            Some(Homology::Module(ModuleOverAlgebra::free(&a, &GradedDims::unit(height))))
        }
        SpaceKind::Sphere { m } => Some(Homology::Dims(GradedDims::from_pairs(height, [(0, 1), (m as i64, 1)]))),
        SpaceKind::FiniteComplex => ring.map(|r| Homology::Dims(cell_dims(r, height))),
        SpaceKind::StructuralCover => None,
    })
}

/// Collapsed mod 2 Betti numbers of a finite ring.
pub fn cell_dims(ring: &SteenrodRing, height: Height) -> GradedDims {
    let top = ring.top_degree().unwrap_or(0);
    GradedDims::from_pairs(height, (0..=top).map(|d| (d as i64, ring.basis(d).len())))
}

/// Parses and validates one catalog document.
pub fn load_space(text: &str) -> Result<SpaceDescriptor, CatalogError> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
        CatalogError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let kind = SpaceKind::parse(&raw.kind).ok_or_else(|| invalid("kind", format!("unknown kind `{}`", raw.kind)))?;
    let height = Height::new(raw.prime, raw.height).map_err(|e| match e {
        HeightError::NotPrime(_) => invalid("prime", e),
        _ => invalid("height", e),
    })?;
    if raw.truncation == 0 {
        return Err(invalid("truncation", "must be at least 1"));
    }

    let ring = match (&raw.ring, kind) {
        (Some(_), SpaceKind::Sphere { .. } | SpaceKind::EmIntegral { .. } | SpaceKind::EmModP { .. }) => {
            return Err(invalid("ring", format!("not allowed for kind {kind}")))
        }
        (Some(r), _) => Some(parse_ring(r)?),
        (None, SpaceKind::Sphere { m }) => {
            if m == 0 {
                return Err(invalid("kind", "sphere dimension must be positive"));
            }
            Some(SteenrodRing::sphere(m))
        }
        (None, SpaceKind::FiniteComplex) => return Err(invalid("ring", "required for finite-complex")),
        (None, _) => None,
    };
    if let Some(r) = &ring {
        if !r.is_finite() {
            return Err(invalid("ring.truncations", "every generator needs a truncation"));
        }
    }

    let derived = derived_homology(kind, height, raw.truncation, ring.as_ref()).map_err(|e| invalid("kind", e))?;
    let present = [raw.dims.is_some(), raw.flags.is_some(), raw.actions.is_some()];
    let count = present.iter().filter(|&&b| b).count();
    if count > 1 {
        return Err(invalid("dims", "give exactly one of dims, flags, actions"));
    }
    if raw.flags.is_some() && kind != SpaceKind::StructuralCover {
        return Err(invalid("flags", format!("structural flags are not allowed for kind {kind}")));
    }
    if raw.base.is_some() && kind != SpaceKind::StructuralCover {
        return Err(invalid("base", "only structural covers have a base"));
    }

    let twists = parse_twists(&raw.twists, height, ring.as_ref(), kind)?;

    let explicit = if let Some(dims) = &raw.dims {
        let mut g = GradedDims::zero(height);
        for (k, v) in dims {
            let d: i64 = k.trim().parse().map_err(|_| invalid("dims", format!("bad degree `{k}`")))?;
            g.add(height.residue(d), *v);
        }
        Some(Homology::Dims(g))
    } else if let Some(flags) = &raw.flags {
        Some(Homology::Structural(parse_flags(flags, &twists)?))
    } else if let Some(actions) = &raw.actions {
        if derived.is_some() {
            return Err(invalid("actions", format!("homology of kind {kind} is derived, not given")));
        }
        Some(Homology::Module(parse_actions(actions, height, raw.truncation)?))
    } else {
        None
    };

    let homology = match (explicit, derived) {
        (Some(e), Some(d)) => {
            let agrees = match (&e, &d) {
                (Homology::Dims(a), Homology::Dims(b)) => a == b,
                (Homology::Dims(a), Homology::Module(m)) => *a == m.hilbert(),
                _ => false,
            };
            if !agrees {
                return Err(invalid("dims", format!("disagree with the homology derived for kind {kind}")));
            }
            d
        }
        (Some(e), None) => e,
        (None, Some(d)) => d,
        (None, None) => return Err(invalid("dims", "give exactly one of dims, flags, actions")),
    };

    if kind == SpaceKind::StructuralCover && raw.base.is_none() {
        return Err(invalid("base", "required for structural-cover"));
    }

    Ok(SpaceDescriptor {
        name: raw.name,
        kind,
        height,
        truncation: raw.truncation,
        base: raw.base,
        homology,
        ring,
        twists,
    })
}

fn parse_ring(raw: &RawRing) -> Result<SteenrodRing, CatalogError> {
    let mut gens = Vec::new();
    for g in &raw.generators {
        let (name, degree) = split_named_degree("ring.generators", g)?;
        gens.push(RingGenerator::new(name, degree, None));
    }
    for (name, &t) in &raw.truncations {
        let g = gens
            .iter_mut()
            .find(|g| &g.name == name)
            .ok_or_else(|| invalid("ring.truncations", format!("unknown generator `{name}`")))?;
        if t < 1 {
            return Err(invalid("ring.truncations", "exponent must be at least 1"));
        }
        g.truncation = Some(t);
    }
    let squares: Vec<(String, u32, String)> = raw.sq.iter().map(|s| (s.gen.clone(), s.i, s.value.clone())).collect();
    SteenrodRing::new(gens, &squares).map_err(|e: SteenrodError| invalid("ring", e))
}

fn parse_twists(
    raw: &BTreeMap<String, RawTwist>,
    height: Height,
    ring: Option<&SteenrodRing>,
    kind: SpaceKind,
) -> Result<BTreeMap<String, NamedTwist>, CatalogError> {
    let mut out = BTreeMap::new();
    if let (SpaceKind::Sphere { m }, Some(r)) = (kind, ring) {
        let name = format!("sigma{m}");
        let class = r.generator(&name).expect("sphere generator");
        out.insert(
            name,
            NamedTwist {
                flavor: TwistFlavor::Integral,
                class: Some(class),
            },
        );
    }
    if !raw.is_empty() && height.p() != 2 {
        return Err(invalid("twists", CatalogError::TwistPrime(height.p())));
    }
    for (name, t) in raw {
        let field = format!("twists.{name}");
        let flavor =
            TwistFlavor::parse(&t.flavor).ok_or_else(|| invalid(&field, format!("unknown flavor `{}`", t.flavor)))?;
        let class = match (&t.class, ring) {
            (Some(c), Some(r)) => {
                let p = r.parse(c).map_err(|e| invalid(&field, e))?;
                r.degree_of(&p).map_err(|e| invalid(&field, e))?;
                Some(p)
            }
            (Some(_), None) => return Err(invalid(&field, "a class needs a ring")),
            (None, _) => None,
        };
        out.insert(name.clone(), NamedTwist { flavor, class });
    }
    Ok(out)
}

fn parse_flags(raw: &[String], twists: &BTreeMap<String, NamedTwist>) -> Result<Vec<StructuralFlag>, CatalogError> {
    let mut flags = Vec::new();
    for s in raw {
        let f = StructuralFlag::parse(s).ok_or_else(|| invalid("flags", format!("unknown flag `{s}`")))?;
        if !flags.contains(&f) {
            flags.push(f);
        }
    }
    if flags.is_empty() {
        return Err(invalid("flags", "structural cover needs at least one flag"));
    }
    let has = |fl: TwistFlavor| twists.values().any(|t| t.flavor == fl);
    for f in &flags {
        let ok = match f {
            StructuralFlag::FreeOverA => !twists.is_empty(),
            StructuralFlag::B0Killed => has(TwistFlavor::Integral),
            StructuralFlag::A0Killed => has(TwistFlavor::Mod2),
        };
        if !ok {
            return Err(invalid("flags", format!("`{}` has no matching twist", f.as_str())));
        }
    }
    flags.sort();
    Ok(flags)
}

fn parse_actions(raw: &RawActions, height: Height, truncation: u32) -> Result<ModuleOverAlgebra, CatalogError> {
    let flavor = TwistFlavor::parse(&raw.over)
        .ok_or_else(|| invalid("actions.over", format!("expected integral or mod2, got `{}`", raw.over)))?;
    let algebra = match flavor {
        TwistFlavor::Integral => integral_twist_algebra(height, truncation),
        TwistFlavor::Mod2 => mod2_twist_algebra(height),
    }
    .map_err(|e| invalid("actions.over", e))?;
    let mut basis = Vec::new();
    for b in &raw.basis {
        basis.push(split_named_degree("actions.basis", b)?);
    }
    let dim = basis.len();
    let f = algebra.field();
    let mut actions = Vec::new();
    for g in algebra.generators() {
        let field = format!("actions.matrices.{}", g.name);
        let rows = raw
            .matrices
            .get(&g.name)
            .ok_or_else(|| invalid(&field, "missing"))?;
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(invalid(&field, format!("expected a {dim}x{dim} matrix")));
        }
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&x| x % f.p()).collect()).collect();
        actions.push(Matrix::from_rows(f, &rows, dim));
    }
    if let Some(extra) = raw.matrices.keys().find(|k| algebra.generator_index(k).is_err()) {
        return Err(invalid(&format!("actions.matrices.{extra}"), "not a generator of the algebra"));
    }
    let module = ModuleOverAlgebra::new(algebra, basis, actions).map_err(|e: ModuleError| invalid("actions", e))?;
    module.verify_action().map_err(|v| invalid("actions", format!("{v:?}")))?;
    Ok(module)
}

/// Serializes a descriptor; `load_space(&save_space(d)) == d`.
pub fn save_space(d: &SpaceDescriptor) -> String {
    let derived = derived_homology(d.kind, d.height, d.truncation, d.ring.as_ref()).ok().flatten();
    let mut raw = RawDocument {
        name: d.name.clone(),
        kind: d.kind.to_string(),
        prime: d.height.p(),
        height: d.height.n(),
        truncation: d.truncation,
        base: d.base.clone(),
        dims: None,
        flags: None,
        ring: None,
        actions: None,
        twists: BTreeMap::new(),
    };
    if derived.as_ref() != Some(&d.homology) {
        match &d.homology {
            Homology::Dims(g) => raw.dims = Some(g.iter().map(|(k, v)| (k.to_string(), v)).collect()),
            Homology::Structural(f) => raw.flags = Some(f.iter().map(|f| f.as_str().to_string()).collect()),
            Homology::Module(m) => {
                let over = if m.algebra().generators().first().is_some_and(|g| g.name.starts_with('a')) {
                    TwistFlavor::Mod2
                } else {
                    TwistFlavor::Integral
                };
                raw.actions = Some(RawActions {
                    over: over.as_str().to_string(),
                    basis: m.basis().iter().map(|(n, deg)| format!("{n}:{deg}")).collect(),
                    matrices: m
                        .algebra()
                        .generators()
                        .iter()
                        .zip(m.actions())
                        .map(|(g, a)| (g.name.clone(), a.to_rows()))
                        .collect(),
                });
            }
        }
    }
    if let (Some(r), false) = (&d.ring, matches!(d.kind, SpaceKind::Sphere { .. })) {
        raw.ring = Some(RawRing {
            generators: r.generators().iter().map(|g| format!("{}:{}", g.name, g.degree)).collect(),
            truncations: r
                .generators()
                .iter()
                .filter_map(|g| g.truncation.map(|t| (g.name.clone(), t)))
                .collect(),
            sq: r
                .square_entries()
                .into_iter()
                .map(|(gen, i, value)| RawSquare { gen, i, value })
                .collect(),
        });
    }
    let implicit = match d.kind {
        SpaceKind::Sphere { m } => Some(format!("sigma{m}")),
        _ => None,
    };
    for (name, t) in &d.twists {
        if implicit.as_deref() == Some(name.as_str()) {
            continue;
        }
        let class = match (&t.class, &d.ring) {
            (Some(c), Some(r)) => Some(r.format(c)),
            _ => None,
        };
        raw.twists.insert(
            name.clone(),
            RawTwist {
                flavor: t.flavor.as_str().to_string(),
                class,
            },
        );
    }
    toml::to_string(&raw).expect("catalog documents always serialize")
}

/// Paths of all `*.toml` documents in `dir`, sorted.
fn documents(dir: &Path) -> Result<Vec<PathBuf>, CatalogError> {
    let io = |e| CatalogError::Io {
        path: dir.to_path_buf(),
        source: e,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn load_file(path: &Path) -> Result<SpaceDescriptor, CatalogError> {
    let text = fs::read_to_string(path).map_err(|e| CatalogError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    load_space(&text).map_err(|e| CatalogError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Every descriptor in `dir`, sorted by name.
pub fn list_spaces(dir: &Path) -> Result<Vec<SpaceDescriptor>, CatalogError> {
    let mut out = documents(dir)?
        .iter()
        .map(|p| load_file(p))
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Finds a space by name, together with the raw text of its document.
pub fn find_space(dir: &Path, name: &str) -> Result<(SpaceDescriptor, String), CatalogError> {
    for path in documents(dir)? {
        let d = load_file(&path)?;
        if d.name == name {
            let text = fs::read_to_string(&path).map_err(|e| CatalogError::Io { path, source: e })?;
            return Ok((d, text));
        }
    }
    Err(CatalogError::NotFound(name.to_string()))
}

/// Writes `d` to `dir/<name>.toml` through a temporary file and a rename.
pub fn store_space(dir: &Path, d: &SpaceDescriptor) -> Result<PathBuf, CatalogError> {
    let file = d.name.replace(['/', '\\'], "_");
    let path = dir.join(format!("{file}.toml"));
    let tmp = dir.join(format!(".{file}.toml.tmp"));
    let io = |p: &Path, e| CatalogError::Io {
        path: p.to_path_buf(),
        source: e,
    };
    fs::write(&tmp, save_space(d)).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| io(&path, e))?;
    Ok(path)
}
