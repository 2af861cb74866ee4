use std::path::Path;

use thiserror::Error;
use twmk_core::abgrp::{k1_sandwich_periodic, FinAbGroup, GroupError};
use twmk_core::ahss::{AhssError, AhssPage, TwistClass};
use twmk_core::catalog::{
    em_algebra, find_space, list_spaces, CatalogError, EmGroup, Homology, SpaceKind, TwistFlavor,
};
use twmk_core::graded::{GradedDims, Height, HeightError};
use twmk_core::module::enumerate_characters;
use twmk_core::uct::{self, j_stable, twisted_em, TwistSpec, UctError, Verdict};

use crate::report::{Report, Table};

/// Failures, split by exit status.
#[derive(Debug, Error)]
pub enum CommandError {
    /// Bad flags, unknown names, malformed expressions: exit 2.
    #[error("{0}")]
    Usage(String),
    /// Valid request the engines decline to answer: exit 1.
    #[error("{0}")]
    Refused(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => 2,
            CommandError::Refused(_) => 1,
        }
    }
}

impl From<HeightError> for CommandError {
    fn from(e: HeightError) -> Self {
        CommandError::Usage(e.to_string())
    }
}

impl From<GroupError> for CommandError {
    fn from(e: GroupError) -> Self {
        CommandError::Usage(e.to_string())
    }
}

impl From<CatalogError> for CommandError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Unsupported { .. } => CommandError::Refused(e.to_string()),
            _ => CommandError::Usage(e.to_string()),
        }
    }
}

impl From<UctError> for CommandError {
    fn from(e: UctError) -> Self {
        match e {
            UctError::Prime(_)
            | UctError::Multiplier(_)
            | UctError::TwistSyntax(_)
            | UctError::UnknownTwist { .. }
            | UctError::Catalog(_) => CommandError::Usage(e.to_string()),
            _ => CommandError::Refused(e.to_string()),
        }
    }
}

impl From<AhssError> for CommandError {
    fn from(e: AhssError) -> Self {
        match e {
            AhssError::NotSquareZero(_) => CommandError::Refused(e.to_string()),
            _ => CommandError::Usage(e.to_string()),
        }
    }
}

fn twisted_height(prime: u32, n: u32) -> Result<Height, CommandError> {
    let h = Height::new(prime, n)?;
    if prime != 2 {
        return Err(CommandError::Usage(format!("twisted computations need p = 2, got p = {prime}")));
    }
    Ok(h)
}

fn dims_table(name: &str, dims: &GradedDims) -> Table {
    let mut t = Table::new(name, &["degree", "dim"]);
    for d in 0..dims.height().modulus() {
        t.row(&[d.to_string(), dims.get(d).to_string()]);
    }
    t
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn twisted_em_cmd(prime: u32, n: u32, k: i64, truncation: u32) -> Result<Report, CommandError> {
    let h = twisted_height(prime, n)?;
    if truncation == 0 {
        return Err(CommandError::Usage("truncation must be at least 1".into()));
    }
    let out = twisted_em(h, k, truncation)?;
    let (_, stable) = j_stable(truncation, |j| twisted_em(h, k, j).map(|t| t.dims))?;
    let mut r = Report::new("twisted-em");
    r.field("theory", format!("K({n})_*(K(Z, {}); {k})", n + 2));
    r.field("prime", prime);
    r.field("height", n);
    r.field("multiplier", k);
    r.field("two_adic", format!("k = 2^{} * {}", out.j, out.m));
    r.field("total_space", &out.total_space);
    r.field("truncation", truncation);
    r.field("j_stable", yes_no(stable));
    r.field("total", out.dims.total());
    r.tables.push(dims_table("dims", &out.dims));
    for c in &out.certificate {
        r.note(c.clone());
    }
    Ok(r)
}

pub fn ahss_cmd(
    catalog: &Path,
    space: &str,
    height: Option<u32>,
    twist: &str,
    pages: bool,
) -> Result<Report, CommandError> {
    let (d, _) = find_space(catalog, space)?;
    let n = height.unwrap_or(d.height.n());
    let h = twisted_height(d.height.p(), n)?;
    let ring = d
        .ring
        .as_ref()
        .ok_or_else(|| CommandError::Refused(format!("space `{space}` has no finite cohomology ring in the catalog")))?;
    let spec = TwistSpec::resolve(&d, twist)?;
    if spec.flavor != TwistFlavor::Integral {
        return Err(CommandError::Usage(format!("`{}` is a mod 2 twist; the sequence needs an integral one", spec.name)));
    }
    let class = spec
        .class
        .clone()
        .ok_or_else(|| CommandError::Usage(format!("twist `{}` has no class in the ring of `{space}`", spec.name)))?;
    let t = TwistClass::from_multiple(ring, h, spec.multiplier, class)?;
    let e2 = AhssPage::e2(ring, h)?;
    let turn = e2.first_differential(&t)?;

    let mut r = Report::new("ahss");
    r.field("space", &d.name);
    r.field("height", n);
    r.field("twist", &spec);
    r.field("twist_mod_2", if t.is_zero() { "0".to_string() } else { ring.format(t.class()) });
    r.field("differential", format!("d_{}", turn.r));
    r.field("page", format!("E_{}", turn.next.r()));
    let converged = turn.next.converged();
    r.field("converged", yes_no(converged));
    r.field("total", turn.next.total());

    if pages {
        let mut e = Table::new("E_2", &["s", "dim"]);
        for (s, k) in e2.entries() {
            e.row(&[s, k as u32]);
        }
        r.tables.push(e);
        let mut dt = Table::new(&format!("d_{}", turn.r), &["s", "target", "rank"]);
        for (s, m) in &turn.differentials {
            if m.rows() > 0 && m.cols() > 0 {
                dt.row(&[*s, s + turn.r, m.rank() as u32]);
            }
        }
        r.tables.push(dt);
    }
    let mut next = Table::new(&format!("E_{}", turn.next.r()), &["s", "dim"]);
    for (s, k) in turn.next.entries() {
        next.row(&[s, k as u32]);
    }
    r.tables.push(next);
    if converged {
        r.tables.push(dims_table("collapsed", &turn.next.collapsed()));
        r.note(format!(
            "no differential of length >= {} joins two nonzero entries",
            turn.next.r()
        ));
    } else {
        r.note("higher differentials are not excluded by length; ranks are upper bounds");
    }
    Ok(r)
}

pub fn uct_cmd(catalog: &Path, space: &str, twist: &str) -> Result<Report, CommandError> {
    let (d, _) = find_space(catalog, space)?;
    let spec = TwistSpec::resolve(&d, twist)?;
    let verdict = uct::uct(&d, &spec)?;
    let mut r = Report::new("uct");
    r.field("space", &d.name);
    if let Some(b) = &d.base {
        r.field("base", b);
    }
    r.field("height", d.height.n());
    r.field("twist", &spec);
    r.field("flavor", spec.flavor.as_str());
    r.field("verdict", verdict.kind());
    match &verdict {
        Verdict::Zero { statement, .. } | Verdict::Isomorphic { statement, .. } => r.field("statement", statement),
        Verdict::Numeric { dims, .. } => r.field("total", dims.total()),
    }
    if let Some(dims) = verdict.dims() {
        r.tables.push(dims_table("dims", dims));
    }
    for c in verdict.certificate() {
        r.note(c.clone());
    }
    Ok(r)
}

pub fn characters_cmd(algebra: &str, prime: u32, n: u32, truncation: u32) -> Result<Report, CommandError> {
    let h = Height::new(prime, n)?;
    let kind = SpaceKind::parse(algebra)
        .ok_or_else(|| CommandError::Usage(format!("unknown algebra `{algebra}`; use em-integral(q) or em-mod-p(j,q)")))?;
    let a = match kind {
        SpaceKind::EmIntegral { q } => em_algebra(h, EmGroup::Integers, q, truncation)?,
        SpaceKind::EmModP { j, q } => em_algebra(h, EmGroup::Cyclic { j }, q, truncation)?,
        _ => return Err(CommandError::Usage(format!("`{algebra}` is not an Eilenberg-MacLane algebra"))),
    };
    let chars = enumerate_characters(&a);
    let mut r = Report::new("characters");
    r.field("algebra", kind);
    r.field("prime", prime);
    r.field("height", n);
    r.field("presentation", &a);
    r.field("dimension", a.dimension());
    r.field("count", chars.len());
    let mut t = Table::new("characters", &["index", "values"]);
    for (i, c) in chars.iter().enumerate() {
        t.row(&[i.to_string(), c.describe()]);
    }
    r.tables.push(t);
    Ok(r)
}

pub fn sandwich_cmd(even: &str, odd: &str) -> Result<Report, CommandError> {
    let ge = FinAbGroup::parse(even)?;
    let go = FinAbGroup::parse(odd)?;
    let (se, so) = k1_sandwich_periodic(&ge, &go);
    let total = se.add(&so);
    let mut r = Report::new("sandwich");
    r.field("group_even", &ge);
    r.field("group_odd", &go);
    r.field("total_lower", total.lower);
    r.field("total_upper", total.upper);
    r.field("exact", total.exact().map_or("no".to_string(), |v| v.to_string()));
    let mut t = Table::new("bounds", &["parity", "lower", "upper"]);
    t.row(&["even".to_string(), se.lower.to_string(), se.upper.to_string()]);
    t.row(&["odd".to_string(), so.lower.to_string(), so.upper.to_string()]);
    r.tables.push(t);
    r.note("lower = dim G_n (x) Z/2, upper = lower + dim Tor(G_{n-1}, Z/2)");
    Ok(r)
}

pub fn spaces_cmd(catalog: &Path) -> Result<Report, CommandError> {
    let spaces = list_spaces(catalog)?;
    let mut r = Report::new("spaces");
    r.field("catalog", catalog.display());
    r.field("count", spaces.len());
    let mut t = Table::new("spaces", &["name", "kind", "p", "n", "homology", "twists"]);
    for d in &spaces {
        let homology = match &d.homology {
            Homology::Dims(g) => g.to_string(),
            Homology::Module(m) => format!("module {}", m.hilbert()),
            Homology::Structural(f) => f.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(","),
        };
        let twists = d.twists.keys().cloned().collect::<Vec<_>>().join(",");
        t.row(&[
            d.name.clone(),
            d.kind.to_string(),
            d.height.p().to_string(),
            d.height.n().to_string(),
            homology,
            if twists.is_empty() { "-".into() } else { twists },
        ]);
    }
    r.tables.push(t);
    Ok(r)
}
