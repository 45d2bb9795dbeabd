//! Horizon-bounded convergence checkers for set sequences.
//!
//! A limit is never decided from a finite trace; verdicts are statements of
//! the form "supported up to the horizon". The decision rule is the tail
//! envelope: with `n0 = max(start, horizon / 2)` and `e_n` the deviation of
//! the trace from its target, a series is supported iff
//!
//! ```text
//! e_n <= tol + (3/2) * M * n0 / n   for every n in [n0, horizon],
//! ```
//!
//! where `M` is the largest deviation on the tail. Traces decaying at least
//! like `1/sqrt(n)` pass; traces that stall (for example a constant gap)
//! fail once `n > 3/2 * n0`, and the first such `n` is the witness.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::{distance, gap, nearest_point, ConvexSet};
use crate::space::{dual_norm_eval, norm_eval, Functional, NormSpec, Vector};

pub type SetGenerator = Arc<dyn Fn(usize) -> Result<ConvexSet> + Send + Sync>;
pub type FunctionalGenerator = Arc<dyn Fn(usize) -> Result<Functional> + Send + Sync>;

/// `n -> C_n` on `[start, horizon]` with a declared limit and ambient norm.
#[derive(Clone)]
pub struct SetSequence {
    generator: SetGenerator,
    limit: ConvexSet,
    start: usize,
    horizon: usize,
    norm: NormSpec,
}

impl SetSequence {
    pub fn new(
        generator: impl Fn(usize) -> Result<ConvexSet> + Send + Sync + 'static,
        limit: ConvexSet,
        start: usize,
        horizon: usize,
        norm: NormSpec,
    ) -> Result<SetSequence> {
        if start > horizon {
            return Err(Error::Precondition(format!("start index {start} exceeds horizon {horizon}")));
        }
        limit.window()?;
        Ok(SetSequence {
            generator: Arc::new(generator),
            limit,
            start,
            horizon,
            norm,
        })
    }

    /// The sequence `C_n = C`.
    pub fn constant(set: ConvexSet, start: usize, horizon: usize, norm: NormSpec) -> Result<SetSequence> {
        let s = set.clone();
        SetSequence::new(move |_| Ok(s.clone()), set, start, horizon, norm)
    }

    pub fn limit(&self) -> &ConvexSet {
        &self.limit
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn tail_start(&self) -> usize {
        tail_start(self.start, self.horizon)
    }

    pub fn set(&self, n: usize) -> Result<ConvexSet> {
        let s = (self.generator)(n)?;
        if s.window()? != self.limit.window()? {
            return Err(Error::WindowMismatch);
        }
        Ok(s)
    }

    /// `(n, C_n)` over the tail.
    pub fn tail(&self) -> Result<Vec<(usize, ConvexSet)>> {
        (self.tail_start()..=self.horizon)
            .into_par_iter()
            .map(|n| Ok((n, self.set(n)?)))
            .collect()
    }

    /// The same sequence with another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<SetSequence> {
        if self.start > horizon {
            return Err(Error::Precondition(format!("start index {} exceeds horizon {horizon}", self.start)));
        }
        Ok(SetSequence {
            horizon,
            ..self.clone()
        })
    }
}

impl fmt::Debug for SetSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetSequence")
            .field("limit", &self.limit)
            .field("start", &self.start)
            .field("horizon", &self.horizon)
            .field("norm", &self.norm)
            .finish_non_exhaustive()
    }
}

/// `n -> f_n` with a declared limit; `norm` is the norm whose dual is probed.
#[derive(Clone)]
pub struct FunctionalSequence {
    generator: FunctionalGenerator,
    limit: Functional,
    start: usize,
    horizon: usize,
    norm: NormSpec,
}

impl FunctionalSequence {
    pub fn new(
        generator: impl Fn(usize) -> Result<Functional> + Send + Sync + 'static,
        limit: Functional,
        start: usize,
        horizon: usize,
        norm: NormSpec,
    ) -> Result<FunctionalSequence> {
        if start > horizon {
            return Err(Error::Precondition(format!("start index {start} exceeds horizon {horizon}")));
        }
        Ok(FunctionalSequence {
            generator: Arc::new(generator),
            limit,
            start,
            horizon,
            norm,
        })
    }

    pub fn limit(&self) -> &Functional {
        &self.limit
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn tail_start(&self) -> usize {
        tail_start(self.start, self.horizon)
    }

    pub fn get(&self, n: usize) -> Result<Functional> {
        let f = (self.generator)(n)?;
        f.same_window(&self.limit)?;
        Ok(f)
    }

    /// `n -> T(f_n)` with limit `T(f)`, for a linear map `T` on functionals.
    pub fn map(&self, t: impl Fn(&Functional) -> Result<Functional> + Send + Sync + 'static) -> Result<FunctionalSequence> {
        let inner = self.generator.clone();
        let t = Arc::new(t);
        let t2 = t.clone();
        Ok(FunctionalSequence {
            generator: Arc::new(move |n| t2(&inner(n)?)),
            limit: t(&self.limit)?,
            ..self.clone()
        })
    }
}

impl fmt::Debug for FunctionalSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalSequence")
            .field("limit", &self.limit)
            .field("start", &self.start)
            .field("horizon", &self.horizon)
            .field("norm", &self.norm)
            .finish_non_exhaustive()
    }
}

pub(crate) fn tail_start(start: usize, horizon: usize) -> usize {
    start.max(horizon / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FamilyKind {
    Points,
    Compact,
    WeakCompact,
    Bounded,
}

/// Named test objects: points for Wijsman and Mosco, sets for gap notions.
#[derive(Debug, Clone)]
pub struct TestFamily {
    kind: FamilyKind,
    points: Vec<(String, Vector)>,
    sets: Vec<(String, ConvexSet)>,
}

impl TestFamily {
    pub fn points(points: Vec<Vector>) -> TestFamily {
        let named = points.into_iter().enumerate().map(|(i, p)| (format!("p{i}"), p)).collect();
        TestFamily::named_points(named)
    }

    pub fn named_points(points: Vec<(String, Vector)>) -> TestFamily {
        TestFamily {
            kind: FamilyKind::Points,
            points,
            sets: Vec::new(),
        }
    }

    pub fn sets(kind: FamilyKind, sets: Vec<ConvexSet>) -> Result<TestFamily> {
        let named = sets.into_iter().enumerate().map(|(i, s)| (format!("W{i}"), s)).collect();
        TestFamily::named_sets(kind, named)
    }

    pub fn named_sets(kind: FamilyKind, sets: Vec<(String, ConvexSet)>) -> Result<TestFamily> {
        for (id, s) in &sets {
            let ok = match kind {
                FamilyKind::Points => false,
                FamilyKind::Compact | FamilyKind::WeakCompact => matches!(s, ConvexSet::Polytope { .. }),
                FamilyKind::Bounded => s.is_bounded(),
            };
            if !ok {
                return Err(Error::InvalidSet(format!("`{id}` ({}) does not fit a {kind:?} family", s.kind_name())));
            }
            s.window()?;
        }
        Ok(TestFamily {
            kind,
            points: Vec::new(),
            sets,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn point_members(&self) -> &[(String, Vector)] {
        &self.points
    }

    pub fn set_members(&self) -> &[(String, ConvexSet)] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.points.len() + self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Notion {
    Wijsman,
    CompactGap,
    WeakCompactGap,
    Slice,
    Mosco,
    LevelSetWijsman,
    SliceCertificate,
    WijsmanCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Supported,
    Refuted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub object: String,
    pub n: usize,
    pub lhs: Scalar,
    pub rhs: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub object: String,
    pub value: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub object: String,
    pub value: Scalar,
}

/// One named sub-condition of a verdict (for example M(i) of Mosco).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub witness: Option<Witness>,
    pub max_deviation: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub notion: Notion,
    pub status: Status,
    pub witness: Option<Witness>,
    pub max_deviation: Scalar,
    pub horizon: usize,
    pub tail_start: usize,
    pub tolerance: Rat,
    /// No value in the verdict came from an approximate computation.
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditions: Vec<Condition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<String>,
    pub targets: Vec<Target>,
    pub trace: Vec<TraceRow>,
}

impl ConvergenceVerdict {
    pub fn is_supported(&self) -> bool {
        self.status == Status::Supported
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// A trace of one test object against its target value.
#[derive(Debug, Clone)]
pub(crate) struct Series {
    pub object: String,
    pub target: Scalar,
    pub rows: Vec<(usize, Scalar)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Judgement {
    pub witness: Option<Witness>,
    pub max_deviation: Scalar,
    pub exact: bool,
}

/// The tail-envelope rule on one series (rows sorted by `n`, all in the tail).
pub(crate) fn judge(series: &Series, tol: &Rat) -> Judgement {
    let devs: Vec<Scalar> = series.rows.iter().map(|(_, v)| v.deviation(&series.target)).collect();
    let exact = series.target.is_exact() && series.rows.iter().all(|(_, v)| v.is_exact());
    let max = devs.iter().cloned().fold(Scalar::zero(), Scalar::max);
    let n0 = series.rows.first().map_or(1, |(n, _)| (*n).max(1));
    let mut witness = None;
    for ((n, v), e) in series.rows.iter().zip(&devs) {
        let within = match (&max, e) {
            (_, Scalar::PosInf) => false,
            (Scalar::PosInf, e) => e.within(&Scalar::zero(), tol),
            (Scalar::Exact(m), Scalar::Exact(e)) => {
                let bound = tol + &(m * &Rat::new(3 * n0 as i64, 2 * (*n).max(1) as i64));
                *e <= bound
            }
            (m, e) => {
                let bound = tol.to_f64() + 1.5 * m.to_f64() * n0 as f64 / (*n).max(1) as f64;
                e.to_f64() <= bound
            }
        };
        if !within {
            witness = Some(Witness {
                object: series.object.clone(),
                n: *n,
                lhs: v.clone(),
                rhs: series.target.clone(),
            });
            break;
        }
    }
    Judgement {
        witness,
        max_deviation: max,
        exact,
    }
}

pub(crate) fn condition(name: &str, series: &[Series], tol: &Rat) -> (Condition, bool) {
    let mut exact = true;
    let mut max = Scalar::zero();
    let mut witness = None;
    for s in series {
        let j = judge(s, tol);
        exact &= j.exact;
        max = max.max(j.max_deviation);
        if witness.is_none() {
            witness = j.witness;
        }
    }
    (
        Condition {
            name: name.to_string(),
            status: if witness.is_some() { Status::Refuted } else { Status::Supported },
            witness,
            max_deviation: max,
        },
        exact,
    )
}

pub(crate) fn trace_rows(series: &[Series]) -> Vec<TraceRow> {
    let mut rows: Vec<TraceRow> = series
        .iter()
        .flat_map(|s| {
            s.rows.iter().map(move |(n, v)| TraceRow {
                n: *n,
                object: s.object.clone(),
                value: v.clone(),
            })
        })
        .collect();
    rows.sort_by_key(|a| a.n);
    rows
}

pub(crate) fn targets(series: &[Series]) -> Vec<Target> {
    series
        .iter()
        .map(|s| Target {
            object: s.object.clone(),
            value: s.target.clone(),
        })
        .collect()
}

/// Assembles a verdict from named conditions; the first failing condition
/// provides the witness.
pub(crate) fn verdict(
    notion: Notion,
    horizon: usize,
    tail_start: usize,
    tol: &Rat,
    parts: Vec<(Condition, bool, Vec<Series>)>,
) -> ConvergenceVerdict {
    let mut conditions = Vec::new();
    let mut trace = Vec::new();
    let mut tg = Vec::new();
    let mut exact = true;
    for (c, ex, series) in parts {
        exact &= ex;
        trace.extend(trace_rows(&series));
        tg.extend(targets(&series));
        conditions.push(c);
    }
    trace.sort_by_key(|a| a.n);
    let witness = conditions.iter().find_map(|c| c.witness.clone());
    let max = conditions.iter().map(|c| c.max_deviation.clone()).fold(Scalar::zero(), Scalar::max);
    ConvergenceVerdict {
        notion,
        status: if witness.is_some() { Status::Refuted } else { Status::Supported },
        witness,
        max_deviation: max,
        horizon,
        tail_start,
        tolerance: tol.clone(),
        exact,
        conditions: if notion_has_conditions(notion) { conditions } else { Vec::new() },
        skipped: Vec::new(),
        consistency: None,
        targets: tg,
        trace,
    }
}

fn notion_has_conditions(n: Notion) -> bool {
    !matches!(n, Notion::Wijsman | Notion::CompactGap | Notion::WeakCompactGap | Notion::Slice)
}

/// Evaluates `value(object, C_n)` on the tail for every object, in parallel,
/// returning series ordered by object.
fn tail_series<T: Sync>(
    seq: &SetSequence,
    objects: &[(String, T)],
    target: impl Fn(&T, &ConvexSet) -> Result<Scalar> + Sync,
    value: impl Fn(&T, &ConvexSet) -> Result<Scalar> + Sync,
) -> Result<Vec<Series>> {
    let tail = seq.tail()?;
    let targets: Vec<Scalar> = objects
        .par_iter()
        .map(|(_, o)| target(o, &seq.limit))
        .collect::<Result<_>>()?;
    let cells: Vec<Scalar> = (0..objects.len() * tail.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / tail.len(), k % tail.len());
            value(&objects[i].1, &tail[j].1)
        })
        .collect::<Result<_>>()?;
    Ok(objects
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(i, ((id, _), t))| Series {
            object: id.clone(),
            target: t,
            rows: tail
                .iter()
                .enumerate()
                .map(|(j, (n, _))| (*n, cells[i * tail.len() + j].clone()))
                .collect(),
        })
        .collect())
}

/// Wijsman: `d(x, C_n) -> d(x, C)` for every test point.
pub fn wijsman_check(seq: &SetSequence, pts: &TestFamily, tol: &Rat) -> Result<ConvergenceVerdict> {
    if pts.kind != FamilyKind::Points || pts.points.is_empty() {
        return Err(Error::Precondition("Wijsman check needs a non-empty point family".into()));
    }
    let norm = seq.norm.clone();
    let series = tail_series(
        seq,
        &pts.points,
        |x, c| distance(x, c, &norm),
        |x, c| distance(x, c, &norm),
    )?;
    let (cond, exact) = condition("wijsman", &series, tol);
    Ok(verdict(Notion::Wijsman, seq.horizon, seq.tail_start(), tol, vec![(cond, exact, series)]))
}

/// Gap convergence `d(W, C_n) -> d(W, C)`; the notion follows the family
/// kind (compact, weak compact, or bounded for slice).
pub fn gap_convergence_check(seq: &SetSequence, fam: &TestFamily, tol: &Rat) -> Result<ConvergenceVerdict> {
    let notion = match fam.kind {
        FamilyKind::Compact => Notion::CompactGap,
        FamilyKind::WeakCompact => Notion::WeakCompactGap,
        FamilyKind::Bounded => Notion::Slice,
        FamilyKind::Points => {
            return Err(Error::Precondition("gap convergence needs a set family".into()));
        }
    };
    if fam.sets.is_empty() {
        return Err(Error::Precondition("gap convergence needs a non-empty family".into()));
    }
    let norm = seq.norm.clone();
    let series = tail_series(seq, &fam.sets, |w, c| gap(w, c, &norm), |w, c| gap(w, c, &norm))?;
    let (cond, exact) = condition("gap", &series, tol);
    Ok(verdict(notion, seq.horizon, seq.tail_start(), tol, vec![(cond, exact, series)]))
}

/// Mosco: M(i) recovery of points of `C` and M(ii) nearest-point selections
/// of `C_n` approaching `C`.
pub fn mosco_check(seq: &SetSequence, probes: &TestFamily, tol: &Rat) -> Result<ConvergenceVerdict> {
    if probes.kind != FamilyKind::Points || probes.points.is_empty() {
        return Err(Error::Precondition("Mosco check needs a non-empty probe family".into()));
    }
    let norm = &seq.norm;
    let tail = seq.tail()?;
    let zero = Scalar::zero();

    // M(i): project the probes onto C, then d(q, C_n) -> 0.
    let anchors: Vec<Option<Vector>> = probes
        .points
        .par_iter()
        .map(|(_, p)| Ok(nearest_point(p, &seq.limit, norm)?.map(|(_, q)| q)))
        .collect::<Result<_>>()?;
    let recov: Vec<(String, Vector)> = probes
        .points
        .iter()
        .zip(anchors)
        .filter_map(|((id, _), q)| q.map(|q| (format!("{id}:anchor"), q)))
        .collect();
    let m1 = tail_series(seq, &recov, |_, _| Ok(Scalar::zero()), |q, c| distance(q, c, norm))?;
    let (c1, e1) = condition("M(i)", &m1, tol);

    // M(ii): selections x_n = nearest point of C_n to p, then d(x_n, C) -> 0.
    let mut skipped = Vec::new();
    let mut m2 = Vec::new();
    for (id, p) in &probes.points {
        let sel: Vec<(usize, Option<Vector>)> = tail
            .par_iter()
            .map(|(n, c)| Ok((*n, nearest_point(p, c, norm)?.map(|(_, x)| x))))
            .collect::<Result<_>>()?;
        let present: Vec<(usize, Vector)> = sel.into_iter().filter_map(|(n, x)| x.map(|x| (n, x))).collect();
        let (Some((_, first)), Some((_, last))) = (present.first(), present.last()) else {
            skipped.push(format!("M(ii) {id}: no selection (C_n empty on the tail)"));
            continue;
        };
        let a = norm_eval(norm, first)?.to_f64();
        let b = norm_eval(norm, last)?.to_f64();
        if b >= 2.0 * a.max(1.0) {
            skipped.push(format!("M(ii) {id}: selection unbounded (norm {a:e} -> {b:e})"));
            continue;
        }
        let rows: Vec<(usize, Scalar)> = present
            .par_iter()
            .map(|(n, x)| Ok((*n, distance(x, &seq.limit, norm)?)))
            .collect::<Result<_>>()?;
        m2.push(Series {
            object: format!("{id}:selection"),
            target: zero.clone(),
            rows,
        });
    }
    let (c2, e2) = condition("M(ii)", &m2, tol);
    let mut v = verdict(
        Notion::Mosco,
        seq.horizon,
        seq.tail_start(),
        tol,
        vec![(c1, e1, m1), (c2, e2, m2)],
    );
    v.skipped = skipped;
    Ok(v)
}

/// Level-set criterion: `<f_n, x> -> <f, x>` on the test points and
/// `||f_n||* -> ||f||*`, cross-checked against the direct Wijsman trace of
/// the hyperplanes `{f_n = a}`.
pub fn level_set_wijsman_criterion(
    fseq: &FunctionalSequence,
    a: &Rat,
    pts: &TestFamily,
    tol: &Rat,
) -> Result<ConvergenceVerdict> {
    if fseq.limit.is_zero() {
        return Err(Error::Precondition("level-set criterion needs a non-zero limit functional".into()));
    }
    if pts.kind != FamilyKind::Points || pts.points.is_empty() {
        return Err(Error::Precondition("level-set criterion needs a non-empty point family".into()));
    }
    let norm = &fseq.norm;
    let ns: Vec<usize> = (fseq.tail_start()..=fseq.horizon).collect();
    let fs: Vec<(usize, Functional)> = ns.par_iter().map(|&n| Ok((n, fseq.get(n)?))).collect::<Result<_>>()?;
    let mut pointwise = Vec::new();
    for (id, x) in &pts.points {
        pointwise.push(Series {
            object: format!("{id}:pairing"),
            target: Scalar::Exact(fseq.limit.apply(x)),
            rows: fs.iter().map(|(n, f)| (*n, Scalar::Exact(f.apply(x)))).collect(),
        });
    }
    let (cp, ep) = condition("pointwise", &pointwise, tol);
    let norms = vec![Series {
        object: "dual_norm".into(),
        target: dual_norm_eval(norm, &fseq.limit)?,
        rows: fs
            .par_iter()
            .map(|(n, f)| Ok((*n, dual_norm_eval(norm, f)?)))
            .collect::<Result<_>>()?,
    }];
    let (cn, en) = condition("norms", &norms, tol);
    let mut v = verdict(
        Notion::LevelSetWijsman,
        fseq.horizon,
        fseq.tail_start(),
        tol,
        vec![(cp, ep, pointwise), (cn, en, norms)],
    );

    let gen = fseq.generator.clone();
    let level = a.clone();
    let hyper = SetSequence::new(
        move |n| Ok(ConvexSet::hyperplane(gen(n)?, level.clone())),
        ConvexSet::hyperplane(fseq.limit.clone(), a.clone()),
        fseq.start,
        fseq.horizon,
        norm.clone(),
    )?;
    let direct = wijsman_check(&hyper, pts, tol)?;
    v.conditions.push(Condition {
        name: "direct_wijsman".into(),
        status: direct.status,
        witness: direct.witness.clone(),
        max_deviation: direct.max_deviation.clone(),
    });
    if direct.status != v.status {
        v.consistency = Some(format!(
            "level-set criterion says {:?} but the direct Wijsman trace says {:?}",
            v.status, direct.status
        ));
    }
    Ok(v)
}

/// CSV rows `n,object_id,value` for a set of verdicts, in verdict order.
pub fn trace_csv<'a>(verdicts: impl IntoIterator<Item = (&'a str, &'a ConvergenceVerdict)>) -> String {
    let mut out = String::from("n,object_id,value\n");
    for (check, v) in verdicts {
        for row in &v.trace {
            out.push_str(&format!(
                "{},{}/{},{}\n",
                row.n,
                check,
                row.object,
                crate::scenario::report::csv_value(&row.value)
            ));
        }
    }
    out
}
