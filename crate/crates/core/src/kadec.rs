//! Sequential probes of dual-norm geometry.
//!
//! Each probe checks the hypotheses of an implication on a finite trace and
//! then its conclusion. Hypotheses that fail make the report `vacuous`, so a
//! pass never rests on empty premises. Limits are judged with the same tail
//! envelope as the convergence checkers.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergence::{condition, judge, tail_start, trace_rows, Condition, FunctionalSequence, Series, Status, TraceRow};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::CompactFamily;
use crate::space::{dual_norm_eval, norm_eval, DualBallDescription, Functional, NormSpec, Vector};

pub type VectorGenerator = Arc<dyn Fn(usize) -> Result<Vector> + Send + Sync>;

/// `n -> x_n` on `[start, horizon]` with a declared limit.
#[derive(Clone)]
pub struct VectorSequence {
    generator: VectorGenerator,
    limit: Vector,
    start: usize,
    horizon: usize,
}

impl VectorSequence {
    pub fn new(
        generator: impl Fn(usize) -> Result<Vector> + Send + Sync + 'static,
        limit: Vector,
        start: usize,
        horizon: usize,
    ) -> Result<VectorSequence> {
        if start > horizon {
            return Err(Error::Precondition(format!("start index {start} exceeds horizon {horizon}")));
        }
        Ok(VectorSequence {
            generator: Arc::new(generator),
            limit,
            start,
            horizon,
        })
    }

    pub fn limit(&self) -> &Vector {
        &self.limit
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, n: usize) -> Result<Vector> {
        let x = (self.generator)(n)?;
        x.same_window(&self.limit)?;
        Ok(x)
    }

    fn tail(&self) -> Result<Vec<(usize, Vector)>> {
        (tail_start(self.start, self.horizon)..=self.horizon)
            .into_par_iter()
            .map(|n| Ok((n, self.get(n)?)))
            .collect()
    }
}

impl fmt::Debug for VectorSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorSequence")
            .field("limit", &self.limit)
            .field("start", &self.start)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Property {
    WStarKadec,
    WStarTauKadec,
    Lur,
    PropertyStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ProbeStatus {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub n: usize,
    pub quantity: String,
    pub value: Scalar,
    pub expected: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub property: Property,
    pub status: ProbeStatus,
    pub witness: Option<ProbeWitness>,
    pub hypotheses: Vec<Condition>,
    pub conclusion: Condition,
    /// Ids of the vectors on which weak-star hypotheses were checked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probe_basis: Vec<String>,
    pub horizon: usize,
    pub tolerance: Rat,
    pub exact: bool,
    pub trace: Vec<TraceRow>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.status == ProbeStatus::Pass
    }
}

fn report(
    property: Property,
    horizon: usize,
    tol: &Rat,
    hyps: Vec<(&str, Vec<Series>)>,
    concl: (&str, Vec<Series>),
    probe_basis: Vec<String>,
) -> ProbeReport {
    let mut exact = true;
    let mut trace = Vec::new();
    let mut hypotheses = Vec::new();
    for (name, series) in hyps {
        let (c, ex) = condition(name, &series, tol);
        exact &= ex;
        trace.extend(trace_rows(&series));
        hypotheses.push(c);
    }
    let (conclusion, ex) = condition(concl.0, &concl.1, tol);
    exact &= ex;
    trace.extend(trace_rows(&concl.1));
    trace.sort_by_key(|a| a.n);
    let status = if hypotheses.iter().any(|h| h.status == Status::Refuted) {
        ProbeStatus::Vacuous
    } else if conclusion.status == Status::Refuted {
        ProbeStatus::Fail
    } else {
        ProbeStatus::Pass
    };
    let witness = match status {
        ProbeStatus::Fail => conclusion.witness.as_ref().map(|w| ProbeWitness {
            n: w.n,
            quantity: w.object.clone(),
            value: w.lhs.clone(),
            expected: w.rhs.clone(),
        }),
        _ => None,
    };
    ProbeReport {
        property,
        status,
        witness,
        hypotheses,
        conclusion,
        probe_basis,
        horizon,
        tolerance: tol.clone(),
        exact,
        trace,
    }
}

fn functional_tail(fseq: &FunctionalSequence) -> Result<Vec<(usize, Functional)>> {
    (fseq.tail_start()..=fseq.horizon())
        .into_par_iter()
        .map(|n| Ok((n, fseq.get(n)?)))
        .collect()
}

/// `||f_n||* -> ||f||*` and `<f_n, x> -> <f, x>` on the probe points.
fn kadec_hypotheses(fseq: &FunctionalSequence, tail: &[(usize, Functional)], pts: &[Vector]) -> Result<Vec<(&'static str, Vec<Series>)>> {
    let norm = fseq.norm();
    let norms = Series {
        object: "dual_norm(f_n)".into(),
        target: dual_norm_eval(norm, fseq.limit())?,
        rows: tail
            .par_iter()
            .map(|(n, f)| Ok((*n, dual_norm_eval(norm, f)?)))
            .collect::<Result<_>>()?,
    };
    let pointwise = pts
        .iter()
        .enumerate()
        .map(|(i, x)| Series {
            object: format!("<f_n, p{i}>"),
            target: Scalar::Exact(fseq.limit().apply(x)),
            rows: tail.iter().map(|(n, f)| (*n, Scalar::Exact(f.apply(x)))).collect(),
        })
        .collect();
    Ok(vec![("norms", vec![norms]), ("weak_star", pointwise)])
}

fn basis(pts: &[Vector]) -> Vec<String> {
    (0..pts.len()).map(|i| format!("p{i}")).collect()
}

/// Sequential w*-Kadec: the hypotheses force `||f_n - f||* -> 0`.
pub fn probe_w_star_kadec(fseq: &FunctionalSequence, pts: &[Vector], tol: &Rat) -> Result<ProbeReport> {
    let tail = functional_tail(fseq)?;
    let hyps = kadec_hypotheses(fseq, &tail, pts)?;
    let norm = fseq.norm();
    let concl = Series {
        object: "dual_norm(f_n - f)".into(),
        target: Scalar::zero(),
        rows: tail
            .par_iter()
            .map(|(n, f)| Ok((*n, dual_norm_eval(norm, &f.checked_sub(fseq.limit())?)?)))
            .collect::<Result<_>>()?,
    };
    Ok(report(
        Property::WStarKadec,
        fseq.horizon(),
        tol,
        hyps,
        ("norm_convergence", vec![concl]),
        basis(pts),
    ))
}

/// Sequential w*-tau-Kadec: the hypotheses force uniform convergence on each
/// polytope of the family, i.e. `max_v |<f_n - f, v>| -> 0` over vertices.
pub fn probe_w_star_tau_kadec(
    fseq: &FunctionalSequence,
    pts: &[Vector],
    fam: &CompactFamily,
    tol: &Rat,
) -> Result<ProbeReport> {
    if fam.is_empty() {
        return Err(Error::Precondition("w*-tau-Kadec probe needs a non-empty compact family".into()));
    }
    let tail = functional_tail(fseq)?;
    let hyps = kadec_hypotheses(fseq, &tail, pts)?;
    let mut concl = Vec::new();
    for (k, _) in fam.members().iter().enumerate() {
        let cells: Vec<(usize, Scalar, usize)> = tail
            .par_iter()
            .map(|(n, f)| {
                let d = f.checked_sub(fseq.limit())?;
                let (v, at) = fam.vertex_sup_abs(k, &d);
                Ok((*n, Scalar::Exact(v), at))
            })
            .collect::<Result<_>>()?;
        let rows: Vec<(usize, Scalar)> = cells.iter().map(|(n, v, _)| (*n, v.clone())).collect();
        let probe = Series {
            object: format!("sup_K{k}|f_n - f|"),
            target: Scalar::zero(),
            rows: rows.clone(),
        };
        // Name the maximizing vertex at the witness index, if there is one.
        let object = match judge(&probe, tol).witness {
            Some(w) => {
                let at = cells.iter().find(|(n, _, _)| *n == w.n).map_or(0, |c| c.2);
                format!("sup_K{k}|f_n - f| at vertex {at}")
            }
            None => probe.object.clone(),
        };
        concl.push(Series { object, ..probe });
    }
    Ok(report(
        Property::WStarTauKadec,
        fseq.horizon(),
        tol,
        hyps,
        ("mackey_convergence", concl),
        basis(pts),
    ))
}

/// `2||x||^2 + 2||y||^2 - ||x + y||^2`, exact whenever the norms are.
pub fn lur_expression(norm: &NormSpec, xn: &Vector, x: &Vector) -> Result<Scalar> {
    let a = norm_eval(norm, xn)?;
    let b = norm_eval(norm, x)?;
    let c = norm_eval(norm, &xn.checked_add(x)?)?;
    Ok(match (a.square_exact(), b.square_exact(), c.square_exact()) {
        (Some(a), Some(b), Some(c)) => {
            let two = Rat::from_int(2);
            Scalar::Exact(&(&(&two * &a) + &(&two * &b)) - &c)
        }
        _ => {
            let (a, b, c) = (a.to_f64(), b.to_f64(), c.to_f64());
            Scalar::Approx(2.0 * a * a + 2.0 * b * b - c * c)
        }
    })
}

/// LUR at `x`: the rotundity expression tending to zero forces `x_n -> x`.
pub fn probe_lur(norm: &NormSpec, xseq: &VectorSequence, tol: &Rat) -> Result<ProbeReport> {
    let x = xseq.limit();
    let tail = xseq.tail()?;
    let cells: Vec<(usize, Scalar, Scalar)> = tail
        .par_iter()
        .map(|(n, xn)| Ok((*n, lur_expression(norm, xn, x)?, norm_eval(norm, &xn.checked_sub(x)?)?)))
        .collect::<Result<_>>()?;
    let expr = Series {
        object: "2|x_n|^2 + 2|x|^2 - |x_n + x|^2".into(),
        target: Scalar::zero(),
        rows: cells.iter().map(|(n, e, _)| (*n, e.clone())).collect(),
    };
    let dist = Series {
        object: "|x_n - x|".into(),
        target: Scalar::zero(),
        rows: cells.iter().map(|(n, _, d)| (*n, d.clone())).collect(),
    };
    Ok(report(
        Property::Lur,
        xseq.horizon(),
        tol,
        vec![("rotundity", vec![expr])],
        ("norm_convergence", vec![dist]),
        Vec::new(),
    ))
}

/// Property (*): `<x_n*, x_n> -> <x*, x>` for `x_n* -> x*` weak-star and
/// `x_n -> x` weakly.
///
/// The weak hypotheses are checked on the coordinates below the tail start:
/// coordinates near the horizon cannot show convergence within the trace.
pub fn property_star_check(fseq: &FunctionalSequence, xseq: &VectorSequence, tol: &Rat) -> Result<ProbeReport> {
    let tail = functional_tail(fseq)?;
    let xs = xseq.tail()?;
    if tail.len() != xs.len() || tail.iter().zip(&xs).any(|((a, _), (b, _))| a != b) {
        return Err(Error::Precondition("functional and vector sequences must share start and horizon".into()));
    }
    let n0 = tail.first().map_or(0, |(n, _)| *n);
    let w = fseq.limit().window().clone();
    let coords: Vec<usize> = w.indices().iter().copied().filter(|&i| i < n0).collect();
    let mut weak_star = Vec::new();
    let mut weak = Vec::new();
    for &i in &coords {
        weak_star.push(Series {
            object: format!("x_n*[{i}]"),
            target: Scalar::Exact(fseq.limit().get(i)),
            rows: tail.iter().map(|(n, f)| (*n, Scalar::Exact(f.get(i)))).collect(),
        });
        weak.push(Series {
            object: format!("x_n[{i}]"),
            target: Scalar::Exact(xseq.limit().get(i)),
            rows: xs.iter().map(|(n, x)| (*n, Scalar::Exact(x.get(i)))).collect(),
        });
    }
    let pairing = Series {
        object: "<x_n*, x_n>".into(),
        target: Scalar::Exact(fseq.limit().apply(xseq.limit())),
        rows: tail.iter().zip(&xs).map(|((n, f), (_, x))| (*n, Scalar::Exact(f.apply(x)))).collect(),
    };
    Ok(report(
        Property::PropertyStar,
        fseq.horizon(),
        tol,
        vec![("weak_star", weak_star), ("weak", weak)],
        ("pairing", vec![pairing]),
        coords.iter().map(|i| format!("e{i}")).collect(),
    ))
}

/// A failure of property (*) restricted to an index set `J`: the
/// functionals `x_j*` for `j` in `J` and their weak-star limit.
#[derive(Debug, Clone)]
pub struct StarFailure {
    pub base: NormSpec,
    pub functionals: Vec<(usize, Functional)>,
    pub limit: Functional,
}

/// The renorming whose dual ball is `{|<L, y>| <= 1} ∩ {||L||* <= 2}`.
///
/// Validates the normalization of the witness and the choice of `y`, `y*`,
/// then checks `|||y* + x_j*||| <= 1` on `J` and `|||y* + x*||| = 1` on the
/// constructed norm. When `||x*||* = 1` the base norm already fails and is
/// returned unchanged.
pub fn build_prop25_renorm(witness: &StarFailure, y: &Vector, y_star: &Functional) -> Result<NormSpec> {
    let base = &witness.base;
    let one = Scalar::Exact(Rat::one());
    let limit_norm = dual_norm_eval(base, &witness.limit)?;
    if limit_norm == one {
        return Ok(base.clone());
    }
    if !witness.limit.is_zero() {
        return Err(Error::Precondition(format!(
            "the weak-star limit must be normalized to 0 (its dual norm is {limit_norm})"
        )));
    }
    if witness.functionals.is_empty() {
        return Err(Error::Precondition("the index set J is empty".into()));
    }
    let ny = norm_eval(base, y)?;
    if ny != one {
        return Err(Error::Precondition(format!("||y|| = {ny}, expected 1")));
    }
    let pair = y_star.apply(y);
    let ns = dual_norm_eval(base, y_star)?;
    if !pair.is_one() || ns != one {
        return Err(Error::Precondition(format!("<y*, y> = {pair} and ||y*|| = {ns}, expected both 1")));
    }
    for (j, f) in &witness.functionals {
        let nf = dual_norm_eval(base, f)?;
        if nf.total_cmp(&one).is_gt() {
            return Err(Error::Precondition(format!("||x_{j}*|| = {nf} exceeds 1")));
        }
        let p = f.apply(y);
        if p.is_positive() {
            return Err(Error::Precondition(format!("<x_{j}*, y> = {p} is positive")));
        }
    }
    let renorm = NormSpec::predual(DualBallDescription::new(vec![(y.clone(), Rat::one())], Rat::from_int(2), base.clone())?);
    let at_limit = dual_norm_eval(&renorm, &y_star.checked_add(&witness.limit)?)?;
    if at_limit != one {
        return Err(Error::Precondition(format!("|||y* + x*||| = {at_limit}, expected 1")));
    }
    for (j, f) in &witness.functionals {
        let v = dual_norm_eval(&renorm, &y_star.checked_add(f)?)?;
        if v.total_cmp(&one).is_gt() {
            return Err(Error::Precondition(format!("|||y* + x_{j}*||| = {v} exceeds 1")));
        }
    }
    Ok(renorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Window;

    const H: usize = 64;

    fn ell1_fseq(w: &Window) -> FunctionalSequence {
        let e1 = Functional::unit(w, 1).unwrap();
        let w2 = w.clone();
        let e1b = e1.clone();
        FunctionalSequence::new(
            move |n| e1b.checked_add(&Functional::unit(&w2, n)?),
            e1,
            2,
            H,
            NormSpec::Ell1,
        )
        .unwrap()
    }

    fn low_points(w: &Window) -> Vec<Vector> {
        (0..4).map(|i| Vector::unit(w, i).unwrap()).collect()
    }

    #[test]
    fn ell1_kadec_contrast() {
        let w = Window::range(0, H);
        let fseq = ell1_fseq(&w);
        let pts = low_points(&w);
        let k = probe_w_star_kadec(&fseq, &pts, &Rat::zero()).unwrap();
        assert_eq!(k.status, ProbeStatus::Fail);
        assert!(k.conclusion_trace_is_one());
        let fam = CompactFamily::new(vec![
            crate::sets::ConvexSet::polytope(pts.clone()).unwrap(),
            crate::sets::ConvexSet::polytope(vec![Vector::from_fracs(&w, &[(0, 1, 1), (3, -2, 1)]).unwrap()]).unwrap(),
        ])
        .unwrap();
        let t = probe_w_star_tau_kadec(&fseq, &pts, &fam, &Rat::zero()).unwrap();
        assert_eq!(t.status, ProbeStatus::Pass, "{:?}", t.conclusion);

        let moving: Vec<Vector> = (2..=H).map(|i| Vector::unit(&w, i).unwrap()).collect();
        let fam = CompactFamily::new(vec![crate::sets::ConvexSet::polytope(moving).unwrap()]).unwrap();
        let t = probe_w_star_tau_kadec(&fseq, &pts, &fam, &Rat::zero()).unwrap();
        assert_eq!(t.status, ProbeStatus::Fail);
        assert!(t.witness.unwrap().quantity.contains("vertex"));
    }

    impl ProbeReport {
        fn conclusion_trace_is_one(&self) -> bool {
            self.trace
                .iter()
                .filter(|r| r.object == "dual_norm(f_n - f)")
                .all(|r| r.value == Scalar::Exact(Rat::one()))
        }
    }

    #[test]
    fn kadec_on_norm_convergent_sequence() {
        let w = Window::range(0, 3);
        let f = Functional::from_fracs(&w, &[(0, 1, 1), (2, -1, 2)]).unwrap();
        let g = Functional::unit(&w, 1).unwrap();
        let fb = f.clone();
        let fseq = FunctionalSequence::new(
            move |n| fb.checked_add(&g.scale(&Rat::recip_int(n as i64))),
            f,
            1,
            H,
            NormSpec::Ell2,
        )
        .unwrap();
        let r = probe_w_star_kadec(&fseq, &low_points(&w), &Rat::new(1, 1_000_000_000)).unwrap();
        assert_eq!(r.status, ProbeStatus::Pass, "{r:?}");
    }

    #[test]
    fn lur_examples() {
        let w = Window::range(0, 1);
        let e0 = Vector::unit(&w, 0).unwrap();
        let e1 = Vector::unit(&w, 1).unwrap();
        let sum = e0.checked_add(&e1).unwrap();
        let seq = VectorSequence::new(move |_| Ok(sum.clone()), e0.clone(), 1, H).unwrap();
        let r = probe_lur(&NormSpec::SupC0, &seq, &Rat::zero()).unwrap();
        assert_eq!(r.status, ProbeStatus::Fail);
        assert_eq!(r.witness.unwrap().value, Scalar::Exact(Rat::one()));

        let e0b = e0.clone();
        let seq = VectorSequence::new(
            move |n| e0b.checked_add(&e1.scale(&Rat::recip_int(n as i64))),
            e0.clone(),
            1,
            H,
        )
        .unwrap();
        let r = probe_lur(&NormSpec::Ell2, &seq, &Rat::zero()).unwrap();
        assert_eq!(r.status, ProbeStatus::Pass, "{r:?}");
        // Parallelogram law: the expression is |x_n - x|^2 = 1/n^2.
        let expr = lur_expression(&NormSpec::Ell2, &seq.get(4).unwrap(), &e0).unwrap();
        assert_eq!(expr, Scalar::Exact(Rat::new(1, 16)));
    }

    #[test]
    fn property_star_examples() {
        let w = Window::range(0, H);
        let fseq = FunctionalSequence::new(
            {
                let w = w.clone();
                move |n| Functional::unit(&w, n)
            },
            Functional::zero(&w),
            1,
            H,
            NormSpec::Ell2,
        )
        .unwrap();
        let xseq = VectorSequence::new(
            {
                let w = w.clone();
                move |n| Vector::unit(&w, n)
            },
            Vector::zero(&w),
            1,
            H,
        )
        .unwrap();
        let r = property_star_check(&fseq, &xseq, &Rat::zero()).unwrap();
        assert_eq!(r.status, ProbeStatus::Fail);
        assert_eq!(r.witness.unwrap().value, Scalar::Exact(Rat::one()));

        let e1 = Functional::unit(&w, 1).unwrap();
        let fseq = FunctionalSequence::new(move |n| Ok(e1.scale(&Rat::recip_int(n as i64))), Functional::zero(&w), 1, H, NormSpec::Ell2)
            .unwrap();
        let x1 = Vector::unit(&w, 1).unwrap();
        let x1b = x1.clone();
        let xseq = VectorSequence::new(move |_| Ok(x1b.clone()), x1, 1, H).unwrap();
        let r = property_star_check(&fseq, &xseq, &Rat::zero()).unwrap();
        assert_eq!(r.status, ProbeStatus::Pass);
    }

    fn star_failure(w: &Window) -> StarFailure {
        StarFailure {
            base: NormSpec::Ell2,
            functionals: (1..=8).map(|j| (j, Functional::unit(w, j).unwrap())).collect(),
            limit: Functional::zero(w),
        }
    }

    #[test]
    fn renorm_construction() {
        let w = Window::range(0, 8);
        let y = Vector::unit(&w, 0).unwrap();
        let ys = Functional::unit(&w, 0).unwrap();
        let renorm = build_prop25_renorm(&star_failure(&w), &y, &ys).unwrap();
        assert!(matches!(renorm, NormSpec::PredualOfBall(_)));
        let one = Scalar::Exact(Rat::one());
        assert_eq!(dual_norm_eval(&renorm, &ys).unwrap(), one);
        let f = ys.checked_add(&Functional::unit(&w, 3).unwrap()).unwrap();
        assert_eq!(dual_norm_eval(&renorm, &f).unwrap(), one);
    }

    #[test]
    fn renorm_degenerate_and_errors() {
        let w = Window::range(0, 8);
        let y = Vector::unit(&w, 0).unwrap();
        let ys = Functional::unit(&w, 0).unwrap();
        let mut wit = star_failure(&w);
        wit.limit = Functional::unit(&w, 5).unwrap();
        assert_eq!(build_prop25_renorm(&wit, &y, &ys).unwrap(), NormSpec::Ell2);

        let mut wit = star_failure(&w);
        wit.functionals = (1..=4).map(|j| (j, Functional::unit(&w, 0).unwrap().scale(&Rat::new(1, j as i64)))).collect();
        let err = build_prop25_renorm(&wit, &y, &ys).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("positive")));

        let half = Vector::from_fracs(&w, &[(0, 1, 2)]).unwrap();
        assert!(build_prop25_renorm(&star_failure(&w), &half, &ys).is_err());
    }
}
