//! JSON scenario files.
//!
//! Sets are tagged by `"kind"`, rationals are strings (`"1/2"`, `"1e-9"`)
//! or integers, and vectors are lists of `[index, value]` pairs. Indices and
//! values may be expressions in the sequence index `n`. Every field of a
//! generator is evaluated for each `n` in `[start, horizon]` while the
//! config is compiled, so a bad expression fails before any check runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::expr::Expr;
use crate::certificates::{nearest_recovery, CertMode, SliceCertificate};
use crate::convergence::{FamilyKind, FunctionalSequence, SetSequence, TestFamily};
use crate::error::{Error, Result};
use crate::kadec::VectorSequence;
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::{epigraph_build, CompactFamily, ConvexSet, Direction, PolyFunc};
use crate::space::{Coords, DualBallDescription, NormSpec, Window};

pub const DEFAULT_HORIZON: usize = 128;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ScenarioConfig {
    pub name: String,
    pub window: RawWindow,
    pub norm: RawNorm,
    #[serde(default)]
    pub start: Option<usize>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<Num>,
    #[serde(default)]
    pub sequence: Option<RawSequence>,
    #[serde(default)]
    pub functionals: Option<RawFunctionals>,
    #[serde(default)]
    pub vectors: Option<RawVectors>,
    #[serde(default)]
    pub families: BTreeMap<String, RawFamily>,
    pub checks: Vec<RawCheck>,
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
    })
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig> {
        from_json(text)
    }
}

/// Parses a norm in the scenario syntax, e.g. `{"kind": "bvC0"}`.
pub fn parse_norm(text: &str, window: &Window) -> Result<NormSpec> {
    compile_norm(&from_json::<RawNorm>(text)?, window, "$")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawWindow {
    Range { lo: usize, hi: usize },
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RawNorm {
    SupC0,
    Ell1,
    Ell2,
    BvC0,
    Predual {
        constraints: Vec<RawSlab>,
        radius: Num,
        base: Box<RawNorm>,
    },
    Product2 {
        inner: Box<RawNorm>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSlab {
    pub y: RawVec,
    pub bound: Num,
}

pub type RawVec = Vec<(Num, Num)>;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawDirection {
    Le,
    Ge,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RawSet {
    Hyperplane {
        f: RawVec,
        value: Num,
    },
    Halfspace {
        f: RawVec,
        value: Num,
        direction: RawDirection,
    },
    Ball {
        #[serde(default)]
        center: Option<RawVec>,
        radius: Num,
        #[serde(default)]
        norm: Option<RawNorm>,
    },
    Polytope {
        vertices: Vec<RawVec>,
    },
    Point {
        at: RawVec,
    },
    MinkowskiSum {
        base: Box<RawSet>,
        ball: Box<RawSet>,
    },
    Intersection {
        members: Vec<RawSet>,
    },
    Slice {
        constraints: Vec<RawVec>,
        base: Box<RawSet>,
    },
    Scaled {
        factor: Num,
        set: Box<RawSet>,
    },
    /// Epigraph of `max_k (<g_k, x> + b_k)` over an optional polytope domain;
    /// requires a `product2` ambient norm.
    Epigraph {
        pieces: Vec<RawPiece>,
        #[serde(default)]
        domain: Option<Vec<RawVec>>,
    },
    Empty {},
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPiece {
    pub g: RawVec,
    pub b: Num,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSequence {
    pub generator: RawSet,
    pub limit: RawSet,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFunctionals {
    pub generator: RawVec,
    pub limit: RawVec,
    #[serde(default)]
    pub level: Option<Num>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVectors {
    pub generator: RawVec,
    pub limit: RawVec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RawFamily {
    Points { members: BTreeMap<String, RawVec> },
    Compact { members: BTreeMap<String, RawSet> },
    WeakCompact { members: BTreeMap<String, RawSet> },
    Bounded { members: BTreeMap<String, RawSet> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CheckKind {
    Wijsman,
    CompactGap,
    WeakCompactGap,
    Slice,
    Mosco,
    LevelSetWijsman,
    Certificate,
    WijsmanCertificate,
    WStarKadec,
    WStarTauKadec,
    Lur,
    PropertyStar,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Wijsman => "wijsman",
            CheckKind::CompactGap => "compactGap",
            CheckKind::WeakCompactGap => "weakCompactGap",
            CheckKind::Slice => "slice",
            CheckKind::Mosco => "mosco",
            CheckKind::LevelSetWijsman => "levelSetWijsman",
            CheckKind::Certificate => "certificate",
            CheckKind::WijsmanCertificate => "wijsmanCertificate",
            CheckKind::WStarKadec => "wStarKadec",
            CheckKind::WStarTauKadec => "wStarTauKadec",
            CheckKind::Lur => "lur",
            CheckKind::PropertyStar => "propertyStar",
        }
    }

    pub fn is_probe(self) -> bool {
        matches!(self, CheckKind::WStarKadec | CheckKind::WStarTauKadec | CheckKind::Lur | CheckKind::PropertyStar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Supported,
    Refuted,
    Pass,
    Fail,
    Vacuous,
}

impl Expectation {
    pub fn name(self) -> &'static str {
        match self {
            Expectation::Supported => "supported",
            Expectation::Refuted => "refuted",
            Expectation::Pass => "pass",
            Expectation::Fail => "fail",
            Expectation::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWitnessExpect {
    #[serde(default)]
    pub object: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub lhs: Option<String>,
    #[serde(default)]
    pub rhs: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RawCheck {
    pub check: CheckKind,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub family: Option<String>,
    /// Compact family for `wStarTauKadec`.
    #[serde(default)]
    pub compact: Option<String>,
    #[serde(default)]
    pub certificate: Option<RawCertificate>,
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub expect_witness: Option<RawWitnessExpect>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RawCertMode {
    Norm,
    Mackey,
    WeakStar,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawRecovery {
    Named(String),
    Explicit(RawVec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RawCertificate {
    pub x0_star: RawVec,
    pub attain_point: RawVec,
    /// Certificate functionals in `n`; defaults to `x0Star` for every `n`.
    #[serde(default)]
    pub sequence: Option<RawVec>,
    pub mode: RawCertMode,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub recovery: Option<RawRecovery>,
}

// ---------------------------------------------------------------------------
// Compilation

fn cfg_err(path: &str, msg: impl ToString) -> Error {
    Error::config(path.to_string(), msg.to_string())
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => cfg_err(path, other),
    }
}

fn expr(num: &Num, path: &str) -> Result<Expr> {
    match num {
        Num::Int(i) => Ok(Expr::Lit(Rat::from_int(*i))),
        Num::Str(s) => s.parse::<Expr>().map_err(|e| cfg_err(path, e)),
    }
}

fn constant(num: &Num, path: &str) -> Result<Rat> {
    expr(num, path)?
        .constant()
        .ok_or_else(|| cfg_err(path, "expected a constant (no `n`)"))
}

#[derive(Debug, Clone)]
struct VecT {
    path: String,
    entries: Vec<(Expr, Expr)>,
}

impl VecT {
    fn compile(raw: &RawVec, path: &str) -> Result<VecT> {
        let entries = raw
            .iter()
            .enumerate()
            .map(|(k, (i, v))| Ok((expr(i, &format!("{path}[{k}][0]"))?, expr(v, &format!("{path}[{k}][1]"))?)))
            .collect::<Result<_>>()?;
        Ok(VecT {
            path: path.to_string(),
            entries,
        })
    }

    fn build<K>(&self, w: &Window, n: usize) -> Result<Coords<K>> {
        let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
        for (k, (i, v)) in self.entries.iter().enumerate() {
            let idx = i.eval_index(n).map_err(|e| cfg_err(&format!("{}[{k}][0]", self.path), e))?;
            let val = v.eval(n).map_err(|e| cfg_err(&format!("{}[{k}][1]", self.path), e))?;
            *acc.entry(idx).or_default() += val;
        }
        Coords::from_entries(w, acc).map_err(|e| cfg_err(&self.path, format!("{e} (n = {n})")))
    }

    fn mentions_n(&self) -> bool {
        self.entries.iter().any(|(i, v)| i.mentions_n() || v.mentions_n())
    }
}

fn compile_norm(raw: &RawNorm, w: &Window, path: &str) -> Result<NormSpec> {
    Ok(match raw {
        RawNorm::SupC0 => NormSpec::SupC0,
        RawNorm::Ell1 => NormSpec::Ell1,
        RawNorm::Ell2 => NormSpec::Ell2,
        RawNorm::BvC0 => NormSpec::BvC0,
        RawNorm::Predual {
            constraints,
            radius,
            base,
        } => {
            let slabs = constraints
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let p = format!("{path}.constraints[{k}]");
                    let y = VecT::compile(&s.y, &format!("{p}.y"))?.build(w, 0)?;
                    Ok((y, constant(&s.bound, &format!("{p}.bound"))?))
                })
                .collect::<Result<_>>()?;
            let base = compile_norm(base, w, &format!("{path}.base"))?;
            let desc = DualBallDescription::new(slabs, constant(radius, &format!("{path}.radius"))?, base)
                .map_err(|e| at(path, e))?;
            NormSpec::predual(desc)
        }
        RawNorm::Product2 { inner } => NormSpec::product2(compile_norm(inner, w, &format!("{path}.inner"))?),
    })
}

/// A set with expressions in `n`, built per index.
#[derive(Debug, Clone)]
enum SetT {
    Hyperplane(VecT, Expr),
    Halfspace(VecT, Expr, Direction),
    Ball(Option<VecT>, Expr, Option<NormSpec>),
    Polytope(Vec<VecT>),
    Point(VecT),
    Minkowski(Box<SetT>, Box<SetT>),
    Intersection(Vec<SetT>),
    Slice(Vec<VecT>, Box<SetT>),
    Scaled(Expr, Box<SetT>),
    Epigraph(Vec<(VecT, Expr)>, Option<Vec<VecT>>),
    Empty,
}

struct Ctx<'a> {
    window: &'a Window,
    norm: &'a NormSpec,
}

impl SetT {
    fn compile(raw: &RawSet, ctx: &Ctx, path: &str) -> Result<SetT> {
        let v = |r: &RawVec, p: &str| VecT::compile(r, &format!("{path}.{p}"));
        let e = |r: &Num, p: &str| expr(r, &format!("{path}.{p}"));
        Ok(match raw {
            RawSet::Hyperplane { f, value } => SetT::Hyperplane(v(f, "f")?, e(value, "value")?),
            RawSet::Halfspace { f, value, direction } => SetT::Halfspace(
                v(f, "f")?,
                e(value, "value")?,
                match direction {
                    RawDirection::Le => Direction::Le,
                    RawDirection::Ge => Direction::Ge,
                },
            ),
            RawSet::Ball { center, radius, norm } => SetT::Ball(
                center.as_ref().map(|c| v(c, "center")).transpose()?,
                e(radius, "radius")?,
                norm.as_ref()
                    .map(|n| compile_norm(n, ctx.window, &format!("{path}.norm")))
                    .transpose()?,
            ),
            RawSet::Polytope { vertices } => SetT::Polytope(
                vertices
                    .iter()
                    .enumerate()
                    .map(|(k, r)| v(r, &format!("vertices[{k}]")))
                    .collect::<Result<_>>()?,
            ),
            RawSet::Point { at } => SetT::Point(v(at, "at")?),
            RawSet::MinkowskiSum { base, ball } => SetT::Minkowski(
                Box::new(SetT::compile(base, ctx, &format!("{path}.base"))?),
                Box::new(SetT::compile(ball, ctx, &format!("{path}.ball"))?),
            ),
            RawSet::Intersection { members } => SetT::Intersection(
                members
                    .iter()
                    .enumerate()
                    .map(|(k, m)| SetT::compile(m, ctx, &format!("{path}.members[{k}]")))
                    .collect::<Result<_>>()?,
            ),
            RawSet::Slice { constraints, base } => SetT::Slice(
                constraints
                    .iter()
                    .enumerate()
                    .map(|(k, r)| v(r, &format!("constraints[{k}]")))
                    .collect::<Result<_>>()?,
                Box::new(SetT::compile(base, ctx, &format!("{path}.base"))?),
            ),
            RawSet::Scaled { factor, set } => {
                SetT::Scaled(e(factor, "factor")?, Box::new(SetT::compile(set, ctx, &format!("{path}.set"))?))
            }
            RawSet::Epigraph { pieces, domain } => {
                if !matches!(ctx.norm, NormSpec::Product2(_)) {
                    return Err(cfg_err(path, "epigraphs need a product2 ambient norm"));
                }
                SetT::Epigraph(
                    pieces
                        .iter()
                        .enumerate()
                        .map(|(k, p)| Ok((v(&p.g, &format!("pieces[{k}].g"))?, e(&p.b, &format!("pieces[{k}].b"))?)))
                        .collect::<Result<_>>()?,
                    domain
                        .as_ref()
                        .map(|d| {
                            d.iter()
                                .enumerate()
                                .map(|(k, r)| v(r, &format!("domain[{k}]")))
                                .collect::<Result<Vec<_>>>()
                        })
                        .transpose()?,
                )
            }
            RawSet::Empty {} => SetT::Empty,
        })
    }

    fn build(&self, ctx: &Ctx, n: usize, path: &str) -> Result<ConvexSet> {
        let w = ctx.window;
        let val = |e: &Expr, p: &str| e.eval(n).map_err(|err| cfg_err(&format!("{path}.{p}"), err));
        let set = match self {
            SetT::Hyperplane(f, a) => ConvexSet::hyperplane(f.build(w, n)?, val(a, "value")?),
            SetT::Halfspace(f, a, d) => ConvexSet::halfspace(f.build(w, n)?, val(a, "value")?, *d),
            SetT::Ball(c, r, nm) => {
                let center = match c {
                    Some(c) => c.build(w, n)?,
                    None => Coords::zero(w),
                };
                let norm = nm.clone().unwrap_or_else(|| ctx.norm.clone());
                ConvexSet::ball(center, val(r, "radius")?, norm).map_err(|e| at(path, e))?
            }
            SetT::Polytope(vs) => {
                ConvexSet::polytope(vs.iter().map(|v| v.build(w, n)).collect::<Result<_>>()?).map_err(|e| at(path, e))?
            }
            SetT::Point(x) => ConvexSet::point(x.build(w, n)?),
            SetT::Minkowski(a, b) => ConvexSet::minkowski_sum(
                a.build(ctx, n, &format!("{path}.base"))?,
                b.build(ctx, n, &format!("{path}.ball"))?,
            )
            .map_err(|e| at(path, e))?,
            SetT::Intersection(ms) => ConvexSet::intersection(
                ms.iter()
                    .enumerate()
                    .map(|(k, m)| m.build(ctx, n, &format!("{path}.members[{k}]")))
                    .collect::<Result<_>>()?,
            )
            .map_err(|e| at(path, e))?,
            SetT::Slice(cs, base) => ConvexSet::slice(
                cs.iter().map(|c| c.build(w, n)).collect::<Result<_>>()?,
                base.build(ctx, n, &format!("{path}.base"))?,
            )
            .map_err(|e| at(path, e))?,
            SetT::Scaled(k, s) => {
                let k = val(k, "factor")?;
                s.build(ctx, n, &format!("{path}.set"))?.scaled(&k).map_err(|e| at(path, e))?
            }
            SetT::Epigraph(pieces, domain) => {
                let NormSpec::Product2(inner) = ctx.norm else {
                    unreachable!("checked at compile time")
                };
                let base = w.without_last().map_err(|e| at(path, e))?;
                let pieces = pieces
                    .iter()
                    .enumerate()
                    .map(|(k, (g, b))| Ok((g.build(&base, n)?, val(b, &format!("pieces[{k}].b"))?)))
                    .collect::<Result<_>>()?;
                let domain = domain
                    .as_ref()
                    .map(|d| d.iter().map(|v| v.build(&base, n)).collect::<Result<Vec<_>>>())
                    .transpose()?;
                let f = PolyFunc::new(&base, pieces, domain).map_err(|e| at(path, e))?;
                epigraph_build(&f, inner)
            }
            SetT::Empty => ConvexSet::empty(w),
        };
        let sw = set.window().map_err(|e| at(path, e))?;
        if &sw != w {
            return Err(cfg_err(path, "set window differs from the scenario window"));
        }
        Ok(set)
    }
}

/// A compiled check, ready to run.
#[derive(Debug, Clone)]
pub struct CompiledCheck {
    pub id: String,
    pub kind: CheckKind,
    pub family: Option<TestFamily>,
    pub compact: Option<CompactFamily>,
    pub certificate: Option<SliceCertificate>,
    pub recovery: Option<VectorSequence>,
    pub expect: Option<Expectation>,
    pub expect_witness: Option<RawWitnessExpect>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub window: Window,
    pub norm: NormSpec,
    pub start: usize,
    pub horizon: usize,
    pub tolerance: Rat,
    pub sequence: Option<SetSequence>,
    pub functionals: Option<(FunctionalSequence, Rat)>,
    pub vectors: Option<VectorSequence>,
    pub checks: Vec<CompiledCheck>,
}

impl ScenarioConfig {
    pub fn compile(&self) -> Result<Scenario> {
        let base = match &self.window {
            RawWindow::Range { lo, hi } => {
                if lo > hi {
                    return Err(cfg_err("window", "lo exceeds hi"));
                }
                Window::range(*lo, *hi)
            }
            RawWindow::Indices(v) => Window::new(v.iter().copied()).map_err(|e| at("window", e))?,
        };
        // Norms are compiled on the base window; product norms add a slot.
        let norm = compile_norm(&self.norm, &base, "norm")?;
        let window = if matches!(norm, NormSpec::Product2(_)) {
            base.with_scalar_slot()
        } else {
            base
        };
        let start = self.start.unwrap_or(1);
        let horizon = self.horizon.unwrap_or(DEFAULT_HORIZON);
        if start > horizon {
            return Err(cfg_err("start", format!("start {start} exceeds horizon {horizon}")));
        }
        let tolerance = match &self.tolerance {
            Some(t) => {
                let t = constant(t, "tolerance")?;
                if t.is_negative() {
                    return Err(cfg_err("tolerance", "must be non-negative"));
                }
                t
            }
            None if norm.is_polyhedral() => Rat::zero(),
            None => Rat::pow10(-9),
        };
        let ctx = Ctx {
            window: &window,
            norm: &norm,
        };

        let sequence = self
            .sequence
            .as_ref()
            .map(|s| -> Result<SetSequence> {
                let gen = SetT::compile(&s.generator, &ctx, "sequence.generator")?;
                let lim = SetT::compile(&s.limit, &ctx, "sequence.limit")?;
                let limit = lim.build(&ctx, horizon, "sequence.limit")?;
                for n in start..=horizon {
                    gen.build(&ctx, n, "sequence.generator")?;
                }
                let (w, nm) = (window.clone(), norm.clone());
                SetSequence::new(
                    move |n| {
                        gen.build(
                            &Ctx {
                                window: &w,
                                norm: &nm,
                            },
                            n,
                            "sequence.generator",
                        )
                    },
                    limit,
                    start,
                    horizon,
                    norm.clone(),
                )
                .map_err(|e| at("sequence", e))
            })
            .transpose()?;

        let functionals = self
            .functionals
            .as_ref()
            .map(|f| -> Result<(FunctionalSequence, Rat)> {
                let gen = VecT::compile(&f.generator, "functionals.generator")?;
                let lim = VecT::compile(&f.limit, "functionals.limit")?;
                if lim.mentions_n() {
                    return Err(cfg_err("functionals.limit", "the limit cannot depend on n"));
                }
                for n in start..=horizon {
                    gen.build::<crate::space::Dual>(&window, n)?;
                }
                let level = f.level.as_ref().map(|l| constant(l, "functionals.level")).transpose()?;
                let w = window.clone();
                let seq = FunctionalSequence::new(move |n| gen.build(&w, n), lim.build(&window, 0)?, start, horizon, norm.clone())
                    .map_err(|e| at("functionals", e))?;
                Ok((seq, level.unwrap_or_else(Rat::one)))
            })
            .transpose()?;

        let vectors = self
            .vectors
            .as_ref()
            .map(|v| -> Result<VectorSequence> {
                let gen = VecT::compile(&v.generator, "vectors.generator")?;
                let lim = VecT::compile(&v.limit, "vectors.limit")?;
                if lim.mentions_n() {
                    return Err(cfg_err("vectors.limit", "the limit cannot depend on n"));
                }
                for n in start..=horizon {
                    gen.build::<crate::space::Primal>(&window, n)?;
                }
                let w = window.clone();
                VectorSequence::new(move |n| gen.build(&w, n), lim.build(&window, 0)?, start, horizon)
                    .map_err(|e| at("vectors", e))
            })
            .transpose()?;

        let mut families = BTreeMap::new();
        for (name, fam) in &self.families {
            let path = format!("families.{name}");
            let compiled = match fam {
                RawFamily::Points { members } => TestFamily::named_points(
                    members
                        .iter()
                        .map(|(id, v)| Ok((id.clone(), VecT::compile(v, &format!("{path}.members.{id}"))?.build(&window, 0)?)))
                        .collect::<Result<_>>()?,
                ),
                RawFamily::Compact { members } | RawFamily::WeakCompact { members } | RawFamily::Bounded { members } => {
                    let kind = match fam {
                        RawFamily::Compact { .. } => FamilyKind::Compact,
                        RawFamily::WeakCompact { .. } => FamilyKind::WeakCompact,
                        _ => FamilyKind::Bounded,
                    };
                    let sets = members
                        .iter()
                        .map(|(id, s)| {
                            let p = format!("{path}.members.{id}");
                            Ok((id.clone(), SetT::compile(s, &ctx, &p)?.build(&ctx, 0, &p)?))
                        })
                        .collect::<Result<_>>()?;
                    TestFamily::named_sets(kind, sets).map_err(|e| at(&path, e))?
                }
            };
            if compiled.is_empty() {
                return Err(cfg_err(&path, "family has no members"));
            }
            families.insert(name.clone(), compiled);
        }

        let mut checks = Vec::new();
        let mut ids = std::collections::BTreeSet::new();
        for (k, c) in self.checks.iter().enumerate() {
            let path = format!("checks[{k}]");
            let id = c
                .id
                .clone()
                .unwrap_or_else(|| match &c.family {
                    Some(f) => format!("{}:{f}", c.check.name()),
                    None => c.check.name().to_string(),
                });
            if !ids.insert(id.clone()) {
                return Err(cfg_err(&path, format!("duplicate check id `{id}`")));
            }
            let lookup = |name: &Option<String>, field: &str| -> Result<Option<TestFamily>> {
                match name {
                    None => Ok(None),
                    Some(n) => families
                        .get(n)
                        .cloned()
                        .map(Some)
                        .ok_or_else(|| cfg_err(&format!("{path}.{field}"), format!("unknown family `{n}`"))),
                }
            };
            let family = lookup(&c.family, "family")?;
            let need_family = |want: FamilyKind| -> Result<()> {
                match &family {
                    Some(f) if f.kind() == want => Ok(()),
                    Some(f) => Err(cfg_err(
                        &format!("{path}.family"),
                        format!("{} needs a {want:?} family, got {:?}", c.check.name(), f.kind()),
                    )),
                    None => Err(cfg_err(&path, format!("{} needs a family", c.check.name()))),
                }
            };
            let need = |ok: bool, what: &str| -> Result<()> {
                if ok {
                    Ok(())
                } else {
                    Err(cfg_err(&path, format!("{} needs {what}", c.check.name())))
                }
            };
            let mut compact = None;
            let mut certificate = None;
            let mut recovery = None;
            match c.check {
                CheckKind::Wijsman | CheckKind::Mosco => {
                    need(sequence.is_some(), "a sequence")?;
                    need_family(FamilyKind::Points)?;
                }
                CheckKind::CompactGap => {
                    need(sequence.is_some(), "a sequence")?;
                    need_family(FamilyKind::Compact)?;
                }
                CheckKind::WeakCompactGap => {
                    need(sequence.is_some(), "a sequence")?;
                    need_family(FamilyKind::WeakCompact)?;
                }
                CheckKind::Slice => {
                    need(sequence.is_some(), "a sequence")?;
                    need_family(FamilyKind::Bounded)?;
                }
                CheckKind::LevelSetWijsman | CheckKind::WStarKadec => {
                    need(functionals.is_some(), "functionals")?;
                    need_family(FamilyKind::Points)?;
                }
                CheckKind::WStarTauKadec => {
                    need(functionals.is_some(), "functionals")?;
                    need_family(FamilyKind::Points)?;
                    let fam = lookup(&c.compact, "compact")?
                        .ok_or_else(|| cfg_err(&path, "wStarTauKadec needs a compact family"))?;
                    compact = Some(
                        CompactFamily::new(fam.set_members().iter().map(|(_, s)| s.clone()).collect())
                            .map_err(|e| at(&format!("{path}.compact"), e))?,
                    );
                }
                CheckKind::Lur => need(vectors.is_some(), "vectors")?,
                CheckKind::PropertyStar => {
                    need(functionals.is_some(), "functionals")?;
                    need(vectors.is_some(), "vectors")?;
                }
                CheckKind::Certificate | CheckKind::WijsmanCertificate => {
                    let seq = sequence.as_ref().ok_or_else(|| cfg_err(&path, "certificates need a sequence"))?;
                    let raw = c
                        .certificate
                        .as_ref()
                        .ok_or_else(|| cfg_err(&path, "missing `certificate`"))?;
                    let cp = format!("{path}.certificate");
                    let x0 = VecT::compile(&raw.x0_star, &format!("{cp}.x0Star"))?.build(&window, 0)?;
                    let attain = VecT::compile(&raw.attain_point, &format!("{cp}.attainPoint"))?.build(&window, 0)?;
                    let cfam = lookup(&raw.family, "certificate.family")?;
                    let mode = match raw.mode {
                        RawCertMode::Norm => CertMode::Norm,
                        RawCertMode::Mackey => {
                            let f = cfam.ok_or_else(|| cfg_err(&cp, "mackey mode needs a family"))?;
                            CertMode::Mackey(
                                CompactFamily::new(f.set_members().iter().map(|(_, s)| s.clone()).collect())
                                    .map_err(|e| at(&format!("{cp}.family"), e))?,
                            )
                        }
                        RawCertMode::WeakStar => {
                            let f = cfam.ok_or_else(|| cfg_err(&cp, "weakStar mode needs a points family"))?;
                            if f.kind() != FamilyKind::Points {
                                return Err(cfg_err(&format!("{cp}.family"), "weakStar mode needs a points family"));
                            }
                            CertMode::WeakStar(f.point_members().iter().map(|(_, p)| p.clone()).collect())
                        }
                    };
                    let cert = match &raw.sequence {
                        None => SliceCertificate::constant(x0, attain.clone(), mode),
                        Some(s) => {
                            let gen = VecT::compile(s, &format!("{cp}.sequence"))?;
                            for n in start..=horizon {
                                gen.build::<crate::space::Dual>(&window, n)?;
                            }
                            let w = window.clone();
                            SliceCertificate::new(x0, attain.clone(), move |n| gen.build(&w, n), mode)
                        }
                    };
                    if c.check == CheckKind::WijsmanCertificate {
                        if !matches!(cert.mode, CertMode::WeakStar(_)) {
                            return Err(cfg_err(&format!("{cp}.mode"), "wijsmanCertificate uses weakStar mode"));
                        }
                        recovery = Some(match &raw.recovery {
                            None => nearest_recovery(seq, &attain).map_err(|e| at(&cp, e))?,
                            Some(RawRecovery::Named(s)) if s == "nearest" => {
                                nearest_recovery(seq, &attain).map_err(|e| at(&cp, e))?
                            }
                            Some(RawRecovery::Named(s)) => {
                                return Err(cfg_err(&format!("{cp}.recovery"), format!("unknown recovery `{s}`")));
                            }
                            Some(RawRecovery::Explicit(v)) => {
                                let gen = VecT::compile(v, &format!("{cp}.recovery"))?;
                                let w = window.clone();
                                VectorSequence::new(move |n| gen.build(&w, n), attain.clone(), start, horizon)
                                    .map_err(|e| at(&cp, e))?
                            }
                        });
                    }
                    certificate = Some(cert);
                }
            }
            if let Some(e) = c.expect {
                let ok = if c.check.is_probe() {
                    matches!(e, Expectation::Pass | Expectation::Fail | Expectation::Vacuous)
                } else {
                    matches!(e, Expectation::Supported | Expectation::Refuted)
                };
                if !ok {
                    return Err(cfg_err(&format!("{path}.expect"), format!("`{}` is not an outcome of {}", e.name(), c.check.name())));
                }
            }
            if let Some(w) = &c.expect_witness {
                for (field, v) in [("lhs", &w.lhs), ("rhs", &w.rhs)] {
                    if let Some(v) = v {
                        v.parse::<Scalar>()
                            .map_err(|e| cfg_err(&format!("{path}.expectWitness.{field}"), e))?;
                    }
                }
            }
            checks.push(CompiledCheck {
                id,
                kind: c.check,
                family,
                compact,
                certificate,
                recovery,
                expect: c.expect,
                expect_witness: c.expect_witness.clone(),
            });
        }
        if checks.is_empty() {
            return Err(cfg_err("checks", "no checks requested"));
        }
        Ok(Scenario {
            name: self.name.clone(),
            window,
            norm,
            start,
            horizon,
            tolerance,
            sequence,
            functionals,
            vectors,
            checks,
        })
    }
}

/// Shared handle for compiled scenarios run in parallel.
pub type SharedScenario = Arc<Scenario>;

#[cfg(test)]
mod tests {
    use super::*;

    const SHRINK: &str = r#"{
        "name": "shrinking",
        "window": {"lo": 0, "hi": 1},
        "norm": {"kind": "supC0"},
        "horizon": 32,
        "sequence": {
            "generator": {"kind": "ball", "radius": "1 + 1/n"},
            "limit": {"kind": "ball", "radius": "1"}
        },
        "families": {"pts": {"kind": "points", "members": {"a": [[0, "2"]]}}},
        "checks": [{"check": "wijsman", "family": "pts", "expect": "supported"}]
    }"#;

    #[test]
    fn compiles() {
        let s = ScenarioConfig::from_json(SHRINK).unwrap().compile().unwrap();
        assert_eq!(s.tolerance, Rat::zero());
        assert_eq!(s.checks[0].id, "wijsman:pts");
        let c = s.sequence.unwrap().set(4).unwrap();
        assert!(matches!(c, ConvexSet::NormBall { radius, .. } if radius == Rat::new(5, 4)));
    }

    fn err_path(text: &str) -> String {
        match ScenarioConfig::from_json(text).and_then(|c| c.compile()) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn error_paths() {
        assert_eq!(err_path(&SHRINK.replace("1 + 1/n", "1 + 1/")), "sequence.generator.radius");
        assert_eq!(err_path(&SHRINK.replace("1 + 1/n", "1/(n-1)")), "sequence.generator.radius");
        assert_eq!(err_path(&SHRINK.replace("\"family\": \"pts\"", "\"family\": \"nope\"")), "checks[0].family");
        assert_eq!(err_path(&SHRINK.replace("supC0", "lp")), "norm.kind");
        assert_eq!(err_path(&SHRINK.replace("[[0, \"2\"]]", "[[5, \"2\"]]")), "families.pts.members.a");
        assert_eq!(err_path(&SHRINK.replace("\"supported\"", "\"pass\"")), "checks[0].expect");
    }
}
