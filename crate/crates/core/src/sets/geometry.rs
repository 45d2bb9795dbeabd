use std::collections::BTreeSet;

use super::euclid::{chain_min, kelley, project_polytope};
use super::{ConvexSet, Direction, PolyFunc};
use crate::error::{Error, Result};
use crate::lp::{LinExpr, LpOutcome, Program, VarKind};
use crate::polyhedron::free_vars;
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::space::{dual_norm_eval, Frame, Functional, NormSpec, Vector, Window};

/// A maximal-margin separating functional: `sup_A f = sup_a < inf_b = inf_B f`
/// with `f` of unit dual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub functional: Functional,
    pub sup_a: Rat,
    pub inf_b: Rat,
}

impl Separation {
    pub fn margin(&self) -> Rat {
        &self.inf_b - &self.sup_a
    }
}

enum Ambient<'a> {
    Poly(&'a NormSpec),
    Euclid,
    /// `product2(inner)` with a polyhedral inner norm.
    Product(&'a NormSpec),
}

fn ambient(norm: &NormSpec) -> Result<Ambient<'_>> {
    match norm {
        NormSpec::Ell2 => Ok(Ambient::Euclid),
        NormSpec::Product2(inner) if **inner == NormSpec::Ell2 => Ok(Ambient::Euclid),
        NormSpec::Product2(inner) if inner.is_polyhedral() => Ok(Ambient::Product(inner)),
        n if n.is_polyhedral() => Ok(Ambient::Poly(n)),
        n => Err(Error::Unsupported(format!("ambient norm {n:?}"))),
    }
}

fn common_window(sets: &[&ConvexSet]) -> Result<Window> {
    let w = sets[0].window()?;
    for s in &sets[1..] {
        if s.window()? != w {
            return Err(Error::WindowMismatch);
        }
    }
    Ok(w)
}

fn frame_for(norm: Option<&NormSpec>, w: &Window, sets: &[&ConvexSet], extra: &[usize]) -> Result<Frame> {
    let mut acc: BTreeSet<usize> = extra.iter().copied().collect();
    for s in sets {
        s.collect_indices(&mut acc)?;
    }
    if !sets.iter().all(|s| s.is_tail_closed()) {
        return Ok(Frame::full(w));
    }
    match norm {
        Some(n) => n.frame(w, acc),
        None => Frame::of(w, acc),
    }
}

/// `min norm(d)` over `prog`; the optimum and the solution, `None` when infeasible.
fn min_norm(mut prog: Program, frame: &Frame, d: &[LinExpr], norm: &NormSpec) -> Result<Option<(Scalar, Vec<Rat>)>> {
    match ambient(norm)? {
        Ambient::Poly(n) => {
            let t = LinExpr::var(prog.add_var(VarKind::NonNeg));
            n.embed_bound(&mut prog, frame, d, &t)?;
            Ok(match prog.minimize(&t)? {
                LpOutcome::Optimal(s) => Some((Scalar::Exact(s.value), s.values)),
                LpOutcome::Infeasible => None,
                LpOutcome::Unbounded => unreachable!("norm bound is non-negative"),
            })
        }
        Ambient::Product(inner) => {
            let w = frame.window();
            let slot = w.last();
            let sp = frame.pos(slot).ok_or(Error::MissingIndex(slot))?;
            let inner_frame = Frame::of(&w.without_last()?, frame.indices().iter().copied().filter(|&i| i != slot))?;
            let d_inner: Vec<LinExpr> = d.iter().enumerate().filter(|(p, _)| *p != sp).map(|(_, e)| e.clone()).collect();
            let t = LinExpr::var(prog.add_var(VarKind::NonNeg));
            let u = LinExpr::var(prog.add_var(VarKind::NonNeg));
            inner.embed_bound(&mut prog, &inner_frame, &d_inner, &t)?;
            prog.le(&d[sp], &u);
            prog.le(&-&d[sp], &u);
            Ok(chain_min(&prog, &t, &u)?.map(|(q, v)| (Scalar::sqrt(q), v)))
        }
        Ambient::Euclid => Ok(kelley(&prog, d)?.map(|(v, vals)| (Scalar::Approx(v), vals))),
    }
}

/// Whether `C` is empty.
pub fn is_empty(c: &ConvexSet) -> Result<bool> {
    let w = c.window()?;
    if c.is_polyhedral() {
        let frame = frame_for(None, &w, &[c], &[])?;
        return Ok(c.polyhedron(&frame)?.is_empty()?);
    }
    match c {
        ConvexSet::NormBall { .. } => Ok(false),
        ConvexSet::MinkowskiSum { base, .. } => is_empty(base),
        ConvexSet::Intersection(ms) => {
            let (poly, rest): (Vec<&ConvexSet>, Vec<&ConvexSet>) = ms.iter().partition(|m| m.is_polyhedral());
            match rest.as_slice() {
                [ConvexSet::NormBall { center, radius, norm }] => {
                    let others = if poly.is_empty() {
                        return Ok(false);
                    } else {
                        ConvexSet::Intersection(poly.into_iter().cloned().collect())
                    };
                    let d = distance(center, &others, norm)?;
                    Ok(!d.within(&Scalar::zero(), radius))
                }
                _ => Err(Error::Unsupported("emptiness of an intersection of several non-polyhedral sets".into())),
            }
        }
        _ => Err(Error::Unsupported(format!("emptiness of a non-polyhedral {}", c.kind_name()))),
    }
}

/// `d(x, C) = inf { norm(x - c) : c in C }`, `+inf` for empty `C`.
pub fn distance(x: &Vector, c: &ConvexSet, norm: &NormSpec) -> Result<Scalar> {
    Ok(nearest_point(x, c, norm)?.map_or(Scalar::PosInf, |(d, _)| d))
}

/// The distance together with a nearest point of `C`; `None` for empty `C`.
pub fn nearest_point(x: &Vector, c: &ConvexSet, norm: &NormSpec) -> Result<Option<(Scalar, Vector)>> {
    let w = c.window()?;
    if x.window() != &w {
        return Err(Error::WindowMismatch);
    }
    let amb = ambient(norm)?;
    if let (ConvexSet::Epigraph { func, .. }, NormSpec::Product2(inner)) = (c, norm) {
        if let Some(res) = flat_epigraph_nearest(x, func, inner)? {
            return Ok(res);
        }
    }
    if let ConvexSet::MinkowskiSum { base, ball } = c {
        if let ConvexSet::NormBall { center, radius, norm: bn } = &**ball {
            if bn == norm && center.is_zero() {
                return peeled_nearest(x, base, radius, norm);
            }
        }
    }
    if let Ambient::Euclid = amb {
        if let Some(res) = euclid_nearest(x, c)? {
            return Ok(res);
        }
    }
    let support: Vec<usize> = x.support().collect();
    let frame = frame_for(Some(norm), &w, &[c], &support)?;
    let mut prog = Program::new();
    let cv = free_vars(&mut prog, frame.dim());
    c.embed(&mut prog, &frame, &cv)?;
    let d: Vec<LinExpr> = frame.consts(x).iter().zip(&cv).map(|(xi, ci)| xi - ci).collect();
    Ok(min_norm(prog, &frame, &d, norm)?.map(|(v, vals)| (v, frame.coords(&vals[..frame.dim()]))))
}

/// Nearest point of `A + B_r`: the nearest point `p` of `A`, moved a
/// distance `r` towards `x`.
fn peeled_nearest(x: &Vector, base: &ConvexSet, r: &Rat, norm: &NormSpec) -> Result<Option<(Scalar, Vector)>> {
    let Some((d, p)) = nearest_point(x, base, norm)? else {
        return Ok(None);
    };
    if d.within(&Scalar::zero(), r) {
        return Ok(Some((Scalar::zero(), x.clone())));
    }
    let k = match &d {
        Scalar::Exact(dv) => r / dv,
        other => Rat::round_f64(r.to_f64() / other.to_f64(), 1 << 40),
    };
    let q = p.add_scaled(&x.checked_sub(&p)?, &k)?;
    Ok(Some((add_rat(d, &-r), q)))
}

/// The level `b` when `f` is `b` on its domain (all pieces flat).
fn flat_level(f: &PolyFunc) -> Option<Rat> {
    if f.pieces().iter().all(|(g, _)| g.is_zero()) {
        f.pieces().iter().map(|(_, b)| b.clone()).max()
    } else {
        None
    }
}

/// `epi f = dom f x [b, inf)` for flat `f`, so under the product norm
/// `d((x, s), epi f)^2 = d(x, dom f)^2 + max(b - s, 0)^2`.
#[allow(clippy::type_complexity)]
fn flat_epigraph_nearest(x: &Vector, f: &PolyFunc, inner: &NormSpec) -> Result<Option<Option<(Scalar, Vector)>>> {
    let Some(b) = flat_level(f) else {
        return Ok(None);
    };
    let last = x.window().last();
    let s = x.get(last);
    let xb = Vector::from_entries(f.window(), x.entries().filter(|(i, _)| *i != last).map(|(i, v)| (i, v.clone())))?;
    let (dx, p) = match f.domain() {
        None => (Scalar::zero(), xb),
        Some(verts) => match nearest_point(&xb, &ConvexSet::polytope(verts.to_vec())?, inner)? {
            Some(res) => res,
            None => return Ok(Some(None)),
        },
    };
    let vertical = (&b - &s).max(Rat::zero());
    let d = match dx.square_exact() {
        Some(q) => Scalar::sqrt(q + vertical.square()),
        None => Scalar::Approx(dx.to_f64().hypot(vertical.to_f64())),
    };
    let mut q = Vector::from_entries(x.window(), p.entries().map(|(i, v)| (i, v.clone())))?;
    q.try_set(last, s.max(b))?;
    Ok(Some(Some((d, q))))
}

/// For a polytope `Q` and flat `f`, the ray of `epi f` can be cut at the
/// top of `Q` without changing `d(Q, epi f)`.
fn truncated_flat_epigraph(epi: &ConvexSet, q: &ConvexSet) -> Result<Option<ConvexSet>> {
    let (ConvexSet::Epigraph { func, window, .. }, ConvexSet::Polytope { vertices }) = (epi, q) else {
        return Ok(None);
    };
    let (Some(b), Some(dom)) = (flat_level(func), func.domain()) else {
        return Ok(None);
    };
    let last = window.last();
    let top = vertices.iter().map(|v| v.get(last)).max().expect("non-empty polytope").max(b.clone());
    let mut verts = Vec::with_capacity(2 * dom.len());
    for v in dom {
        for h in [&b, &top] {
            let mut u = Vector::from_entries(window, v.entries().map(|(i, x)| (i, x.clone())))?;
            u.try_set(last, h.clone())?;
            verts.push(u);
        }
    }
    Ok(Some(ConvexSet::polytope(verts)?))
}

/// Closed forms for the Euclidean ambient; `None` when no closed form applies.
#[allow(clippy::type_complexity)]
fn euclid_nearest(x: &Vector, c: &ConvexSet) -> Result<Option<Option<(Scalar, Vector)>>> {
    Ok(Some(match c {
        ConvexSet::Hyperplane { f, value } => hyperplane_nearest(x, f, value),
        ConvexSet::Halfspace { f, value, direction } => {
            let v = f.apply(x) - value;
            let ok = match direction {
                Direction::Le => !v.is_positive(),
                Direction::Ge => !v.is_negative(),
            };
            if ok {
                Some((Scalar::zero(), x.clone()))
            } else {
                hyperplane_nearest(x, f, value)
            }
        }
        ConvexSet::Polytope { vertices } => {
            let mut acc: BTreeSet<usize> = x.support().collect();
            c.collect_indices(&mut acc)?;
            let frame = Frame::of(x.window(), acc)?;
            let verts: Vec<Vec<Rat>> = vertices.iter().map(|v| frame.dense(v)).collect();
            match project_polytope(&frame.dense(x), &verts) {
                Some((d2, p)) => Some((Scalar::sqrt(d2), frame.coords(&p))),
                None => return Ok(None),
            }
        }
        ConvexSet::NormBall { center, radius, norm } if *norm == NormSpec::Ell2 => {
            let rel = x.checked_sub(center)?;
            let q = rel.sum_sq();
            if q <= radius.square() {
                Some((Scalar::zero(), x.clone()))
            } else if let Some(root) = q.sqrt_exact() {
                let p = center.add_scaled(&rel, &(radius / &root))?;
                Some((Scalar::Exact(&root - radius), p))
            } else if radius.is_zero() {
                Some((Scalar::Root(q), center.clone()))
            } else {
                let root = q.to_f64().sqrt();
                let k = Rat::round_f64(radius.to_f64() / root, 1 << 40);
                Some((Scalar::Approx(root - radius.to_f64()), center.add_scaled(&rel, &k)?))
            }
        }
        _ => return Ok(None),
    }))
}

fn hyperplane_nearest(x: &Vector, f: &Functional, value: &Rat) -> Option<(Scalar, Vector)> {
    let ff = f.sum_sq();
    let v = f.apply(x) - value;
    if ff.is_zero() {
        return v.is_zero().then(|| (Scalar::zero(), x.clone()));
    }
    let k = -(&v / &ff);
    let p = x.add_scaled(&f.to_vector(), &k).expect("same window");
    Some((Scalar::sqrt(v.square() / ff), p))
}

/// `d(A, B) = inf { norm(a - b) }`, `+inf` if either set is empty.
pub fn gap(a: &ConvexSet, b: &ConvexSet, norm: &NormSpec) -> Result<Scalar> {
    let w = common_window(&[a, b])?;
    let amb = ambient(norm)?;
    // d(A + rB, C) = max(0, d(A, C) - r) for the ambient ball.
    for (x, y) in [(a, b), (b, a)] {
        let peeled = match x {
            ConvexSet::NormBall { center, radius, norm: bn } if bn == norm => {
                Some((ConvexSet::point(center.clone()), radius))
            }
            ConvexSet::MinkowskiSum { base, ball } => match &**ball {
                ConvexSet::NormBall { center, radius, norm: bn } if bn == norm && center.is_zero() => {
                    Some(((**base).clone(), radius))
                }
                _ => None,
            },
            _ => None,
        };
        if let Some((inner, r)) = peeled {
            let d = gap(&inner, y, norm)?;
            return Ok(add_rat(d, &-r).max(Scalar::zero()));
        }
    }
    for (x, y) in [(a, b), (b, a)] {
        if let Some(t) = truncated_flat_epigraph(x, y)? {
            return gap(&t, y, norm);
        }
    }
    if let Ambient::Euclid = amb {
        if let Some(v) = euclid_gap(a, b)? {
            return Ok(v);
        }
    }
    if is_empty(a)? || is_empty(b)? {
        return Ok(Scalar::PosInf);
    }
    let frame = frame_for(Some(norm), &w, &[a, b], &[])?;
    let mut prog = Program::new();
    let av = free_vars(&mut prog, frame.dim());
    let bv = free_vars(&mut prog, frame.dim());
    a.embed(&mut prog, &frame, &av)?;
    b.embed(&mut prog, &frame, &bv)?;
    let d: Vec<LinExpr> = av.iter().zip(&bv).map(|(x, y)| x - y).collect();
    Ok(min_norm(prog, &frame, &d, norm)?.map_or(Scalar::PosInf, |(v, _)| v))
}

fn euclid_gap(a: &ConvexSet, b: &ConvexSet) -> Result<Option<Scalar>> {
    use ConvexSet::Polytope;
    match (a, b) {
        (Polytope { vertices }, other) | (other, Polytope { vertices }) if vertices.len() == 1 => {
            Ok(Some(distance(&vertices[0], other, &NormSpec::Ell2)?))
        }
        (Polytope { vertices: va }, Polytope { vertices: vb }) => {
            let mut acc = BTreeSet::new();
            a.collect_indices(&mut acc)?;
            b.collect_indices(&mut acc)?;
            let frame = Frame::of(va[0].window(), acc)?;
            let diffs: Vec<Vec<Rat>> = va
                .iter()
                .flat_map(|p| vb.iter().map(|q| frame.dense(&p.checked_sub(q).expect("same window"))))
                .collect();
            let origin = vec![Rat::zero(); frame.dim()];
            Ok(project_polytope(&origin, &diffs).map(|(d2, _)| Scalar::sqrt(d2)))
        }
        (Polytope { vertices }, ConvexSet::Hyperplane { f, value })
        | (ConvexSet::Hyperplane { f, value }, Polytope { vertices }) => {
            let vals: Vec<Rat> = vertices.iter().map(|v| f.apply(v) - value).collect();
            let lo = vals.iter().min().expect("non-empty");
            let hi = vals.iter().max().expect("non-empty");
            let ff = f.sum_sq();
            if !lo.is_positive() && !hi.is_negative() {
                return Ok(Some(Scalar::zero()));
            }
            if ff.is_zero() {
                return Ok(Some(Scalar::PosInf));
            }
            let m = lo.abs().min(hi.abs());
            Ok(Some(Scalar::sqrt(m.square() / ff)))
        }
        _ => Ok(None),
    }
}

fn add_rat(s: Scalar, r: &Rat) -> Scalar {
    match s {
        Scalar::Exact(v) => Scalar::Exact(v + r),
        Scalar::Root(q) if r.is_zero() => Scalar::Root(q),
        Scalar::Root(_) | Scalar::Approx(_) => Scalar::Approx(s.to_f64() + r.to_f64()),
        inf => inf,
    }
}

/// `sup { <f, c> : c in C }`: `+inf` when unbounded above, `-inf` for empty `C`.
pub fn support_value(f: &Functional, c: &ConvexSet) -> Result<Scalar> {
    let w = c.window()?;
    if f.window() != &w {
        return Err(Error::WindowMismatch);
    }
    match c {
        ConvexSet::Polytope { vertices } => {
            return Ok(Scalar::Exact(vertices.iter().map(|v| f.apply(v)).max().expect("non-empty")));
        }
        ConvexSet::NormBall { center, radius, norm } => {
            return Ok(add_rat(dual_norm_eval(norm, f)?.scale(radius), &f.apply(center)));
        }
        ConvexSet::MinkowskiSum { base, ball } if !c.is_polyhedral() => {
            let a = support_value(f, base)?;
            let b = support_value(f, ball)?;
            return Ok(match (a, b) {
                (Scalar::NegInf, _) | (_, Scalar::NegInf) => Scalar::NegInf,
                (Scalar::PosInf, _) | (_, Scalar::PosInf) => Scalar::PosInf,
                (Scalar::Exact(x), y) | (y, Scalar::Exact(x)) => add_rat(y, &x),
                (x, y) => Scalar::Approx(x.to_f64() + y.to_f64()),
            });
        }
        _ => {}
    }
    if !c.is_polyhedral() {
        return Err(Error::NotPolyhedral(format!("support value over a {}", c.kind_name())));
    }
    let support: Vec<usize> = f.support().collect();
    let frame = frame_for(None, &w, &[c], &support)?;
    Ok(match c.polyhedron(&frame)?.support(&frame.dense(f))? {
        LpOutcome::Optimal(s) => Scalar::Exact(s.value),
        LpOutcome::Infeasible => Scalar::NegInf,
        LpOutcome::Unbounded => Scalar::PosInf,
    })
}

/// The maximal-margin separating functional of unit dual norm. Its margin
/// equals `gap(A, B)` by linear-programming duality.
pub fn separate(a: &ConvexSet, b: &ConvexSet, norm: &NormSpec) -> Result<Separation> {
    let w = common_window(&[a, b])?;
    if !norm.is_polyhedral() || !a.is_polyhedral() || !b.is_polyhedral() {
        return Err(Error::NotPolyhedral("separation".into()));
    }
    let frame = frame_for(Some(norm), &w, &[a, b], &[])?;
    let pa = a.polyhedron(&frame)?;
    let pb = b.polyhedron(&frame)?;
    if pa.is_empty()? || pb.is_empty()? {
        return Err(Error::Precondition("separation of an empty set".into()));
    }
    let mut prog = Program::new();
    let lam = free_vars(&mut prog, frame.dim());
    let r = LinExpr::var(prog.add_var(VarKind::Free));
    let s = LinExpr::var(prog.add_var(VarKind::Free));
    pa.embed_support_bound(&mut prog, &lam, &r);
    let neg: Vec<LinExpr> = lam.iter().map(|l| -l).collect();
    pb.embed_support_bound(&mut prog, &neg, &-&s);
    norm.embed_dual_bound(&mut prog, &frame, &lam, &LinExpr::constant(Rat::one()))?;
    let sol = match prog.maximize(&(&s - &r))? {
        LpOutcome::Optimal(sol) => sol,
        _ => unreachable!("margin is bounded by the gap"),
    };
    if !sol.value.is_positive() {
        return Err(Error::NotSeparated(sol.value.to_string()));
    }
    let functional: Functional = frame.coords(&sol.values[..frame.dim()]);
    let sup_a = support_value(&functional, a)?;
    let inf_b = support_value(&functional.neg(), b)?;
    match (sup_a, inf_b) {
        (Scalar::Exact(sa), Scalar::Exact(nb)) => Ok(Separation {
            functional,
            sup_a: sa,
            inf_b: -nb,
        }),
        other => unreachable!("bounded support values expected, got {other:?}"),
    }
}

/// A subgradient of `d(., C)` at `x`.
pub fn distance_subgradient(x: &Vector, c: &ConvexSet, norm: &NormSpec) -> Result<Functional> {
    let w = c.window()?;
    if x.window() != &w {
        return Err(Error::WindowMismatch);
    }
    match ambient(norm)? {
        Ambient::Poly(_) => {
            if is_empty(c)? {
                return Err(Error::Precondition("subgradient of the distance to an empty set".into()));
            }
            if distance(x, c, norm)? == Scalar::zero() {
                return Ok(Functional::zero(&w));
            }
            Ok(separate(&ConvexSet::point(x.clone()), c, norm)?.functional.neg())
        }
        Ambient::Euclid => {
            let Some((d, p)) = nearest_point(x, c, norm)? else {
                return Err(Error::Precondition("subgradient of the distance to an empty set".into()));
            };
            match d {
                Scalar::Exact(dv) if dv.is_zero() => Ok(Functional::zero(&w)),
                Scalar::Exact(dv) => Ok(x.checked_sub(&p)?.scale(&dv.recip()).to_functional()),
                Scalar::Root(q) => Err(Error::NonRational(format!("Euclidean distance sqrt({q})"))),
                _ => Err(Error::Unsupported("subgradient from an approximate projection".into())),
            }
        }
        Ambient::Product(_) => Err(Error::Unsupported("subgradients under a product norm".into())),
    }
}
