//! Convex sets in a window and the geometric kernel over them.

mod epigraph;
mod euclid;
mod geometry;

pub use epigraph::{coercivity_margin, epigraph_build};
pub use geometry::{
    distance, distance_subgradient, gap, is_empty, nearest_point, separate, support_value, Separation,
};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lp::{LinExpr, Program, VarKind};
use crate::polyhedron::{free_vars, Polyhedron};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::space::{norm_eval, Frame, Functional, NormSpec, Vector, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `<f, x> <= a`
    Le,
    /// `<f, x> >= a`
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Hyperplane {
        f: Functional,
        value: Rat,
    },
    Halfspace {
        f: Functional,
        value: Rat,
        direction: Direction,
    },
    NormBall {
        center: Vector,
        radius: Rat,
        norm: NormSpec,
    },
    Polytope {
        vertices: Vec<Vector>,
    },
    /// `base + ball`, where `ball` is a `NormBall`.
    MinkowskiSum {
        base: Box<ConvexSet>,
        ball: Box<ConvexSet>,
    },
    Intersection(Vec<ConvexSet>),
    /// `base ∩ { x : <f_i, x> = 0 }`.
    SubspaceSlice {
        constraints: Vec<Functional>,
        base: Box<ConvexSet>,
    },
    /// `{ (x, s) : f(x) <= s }` in a product window whose last index is `s`.
    Epigraph {
        func: PolyFunc,
        product_norm: NormSpec,
        window: Window,
    },
}

/// `x -> max_i <f_i, x> + b_i` on a polytope domain (or everywhere),
/// `+inf` outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFunc {
    pieces: Vec<(Functional, Rat)>,
    domain: Option<Vec<Vector>>,
    window: Window,
}

/// A family of compact convex test sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactFamily {
    members: Vec<ConvexSet>,
}

impl ConvexSet {
    pub fn hyperplane(f: Functional, value: Rat) -> ConvexSet {
        ConvexSet::Hyperplane { f, value }
    }

    pub fn halfspace(f: Functional, value: Rat, direction: Direction) -> ConvexSet {
        ConvexSet::Halfspace { f, value, direction }
    }

    pub fn ball(center: Vector, radius: Rat, norm: NormSpec) -> Result<ConvexSet> {
        if radius.is_negative() {
            return Err(Error::InvalidSet(format!("ball radius {radius} is negative")));
        }
        Ok(ConvexSet::NormBall { center, radius, norm })
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<ConvexSet> {
        let s = ConvexSet::Polytope { vertices };
        s.window()?;
        Ok(s)
    }

    pub fn point(x: Vector) -> ConvexSet {
        ConvexSet::Polytope { vertices: vec![x] }
    }

    pub fn minkowski_sum(base: ConvexSet, ball: ConvexSet) -> Result<ConvexSet> {
        let s = ConvexSet::MinkowskiSum {
            base: Box::new(base),
            ball: Box::new(ball),
        };
        s.window()?;
        Ok(s)
    }

    pub fn intersection(members: Vec<ConvexSet>) -> Result<ConvexSet> {
        let s = ConvexSet::Intersection(members);
        s.window()?;
        Ok(s)
    }

    pub fn slice(constraints: Vec<Functional>, base: ConvexSet) -> Result<ConvexSet> {
        let s = ConvexSet::SubspaceSlice {
            constraints,
            base: Box::new(base),
        };
        s.window()?;
        Ok(s)
    }

    /// A canonical empty set: the halfspace `0 <= -1`.
    pub fn empty(window: &Window) -> ConvexSet {
        ConvexSet::Halfspace {
            f: Functional::zero(window),
            value: Rat::from_int(-1),
            direction: Direction::Le,
        }
    }

    /// The window of the set, validating the structural invariants on the way.
    pub fn window(&self) -> Result<Window> {
        match self {
            ConvexSet::Hyperplane { f, .. } | ConvexSet::Halfspace { f, .. } => Ok(f.window().clone()),
            ConvexSet::NormBall { center, radius, norm } => {
                if radius.is_negative() {
                    return Err(Error::InvalidSet(format!("ball radius {radius} is negative")));
                }
                norm.required_indices(center.window())?;
                Ok(center.window().clone())
            }
            ConvexSet::Polytope { vertices } => {
                let first = vertices
                    .first()
                    .ok_or_else(|| Error::InvalidSet("polytope needs at least one vertex".into()))?;
                for v in vertices {
                    v.same_window(first)?;
                }
                Ok(first.window().clone())
            }
            ConvexSet::MinkowskiSum { base, ball } => {
                if !matches!(**ball, ConvexSet::NormBall { .. }) {
                    return Err(Error::InvalidSet("second Minkowski summand must be a norm ball".into()));
                }
                same(base.window()?, ball.window()?)
            }
            ConvexSet::Intersection(members) => {
                let mut it = members.iter();
                let first = it
                    .next()
                    .ok_or_else(|| Error::InvalidSet("intersection of no sets".into()))?
                    .window()?;
                for m in it {
                    same(first.clone(), m.window()?)?;
                }
                Ok(first)
            }
            ConvexSet::SubspaceSlice { constraints, base } => {
                let w = base.window()?;
                for f in constraints {
                    if f.window() != &w {
                        return Err(Error::WindowMismatch);
                    }
                }
                Ok(w)
            }
            ConvexSet::Epigraph { func, window, .. } => {
                if &func.window.with_scalar_slot() != window {
                    return Err(Error::WindowMismatch);
                }
                Ok(window.clone())
            }
        }
    }

    /// Whether every norm inside the set description is polyhedral.
    pub fn is_polyhedral(&self) -> bool {
        match self {
            ConvexSet::NormBall { norm, .. } => norm.is_polyhedral(),
            ConvexSet::MinkowskiSum { base, ball } => base.is_polyhedral() && ball.is_polyhedral(),
            ConvexSet::Intersection(ms) => ms.iter().all(ConvexSet::is_polyhedral),
            ConvexSet::SubspaceSlice { base, .. } => base.is_polyhedral(),
            _ => true,
        }
    }

    /// Whether every inner norm allows frame compression.
    pub(crate) fn is_tail_closed(&self) -> bool {
        match self {
            ConvexSet::NormBall { norm, .. } => norm.is_tail_closed(),
            ConvexSet::MinkowskiSum { base, ball } => base.is_tail_closed() && ball.is_tail_closed(),
            ConvexSet::Intersection(ms) => ms.iter().all(ConvexSet::is_tail_closed),
            ConvexSet::SubspaceSlice { base, .. } => base.is_tail_closed(),
            _ => true,
        }
    }

    /// Indices that any exact program over this set must keep.
    pub(crate) fn collect_indices(&self, acc: &mut BTreeSet<usize>) -> Result<()> {
        match self {
            ConvexSet::Hyperplane { f, .. } | ConvexSet::Halfspace { f, .. } => acc.extend(f.support()),
            ConvexSet::NormBall { center, norm, .. } => {
                acc.extend(center.support());
                acc.extend(norm.required_indices(center.window())?);
            }
            ConvexSet::Polytope { vertices } => {
                for v in vertices {
                    acc.extend(v.support());
                }
            }
            ConvexSet::MinkowskiSum { base, ball } => {
                base.collect_indices(acc)?;
                ball.collect_indices(acc)?;
            }
            ConvexSet::Intersection(ms) => {
                for m in ms {
                    m.collect_indices(acc)?;
                }
            }
            ConvexSet::SubspaceSlice { constraints, base } => {
                for f in constraints {
                    acc.extend(f.support());
                }
                base.collect_indices(acc)?;
            }
            ConvexSet::Epigraph { func, window, .. } => {
                func.collect_indices(acc);
                acc.insert(window.last());
            }
        }
        Ok(())
    }

    /// Adds `x in C` to `prog`, for `x` given over `frame`.
    pub fn embed(&self, prog: &mut Program, frame: &Frame, x: &[LinExpr]) -> Result<()> {
        match self {
            ConvexSet::Hyperplane { f, value } => {
                prog.eq(&frame.pair(f, x), &LinExpr::constant(value.clone()));
            }
            ConvexSet::Halfspace { f, value, direction } => {
                let lhs = frame.pair(f, x);
                let rhs = LinExpr::constant(value.clone());
                match direction {
                    Direction::Le => prog.le(&lhs, &rhs),
                    Direction::Ge => prog.ge(&lhs, &rhs),
                }
            }
            ConvexSet::NormBall { center, radius, norm } => {
                let d: Vec<LinExpr> = x.iter().zip(frame.consts(center)).map(|(xi, ci)| xi - &ci).collect();
                norm.embed_bound(prog, frame, &d, &LinExpr::constant(radius.clone()))?;
            }
            ConvexSet::Polytope { vertices } => {
                let lam: Vec<LinExpr> = prog
                    .add_vars(vertices.len(), VarKind::NonNeg)
                    .into_iter()
                    .map(LinExpr::var)
                    .collect();
                let total = lam.iter().fold(LinExpr::zero(), |acc, l| &acc + l);
                prog.eq(&total, &LinExpr::constant(Rat::one()));
                let mut comb = vec![LinExpr::zero(); frame.dim()];
                for (v, l) in vertices.iter().zip(&lam) {
                    for (i, c) in v.entries() {
                        let p = frame.pos(i).ok_or(Error::IndexOutsideWindow(i))?;
                        comb[p].add_scaled(l, c);
                    }
                }
                for (xi, ci) in x.iter().zip(&comb) {
                    prog.eq(xi, ci);
                }
            }
            ConvexSet::MinkowskiSum { base, ball } => {
                let a = free_vars(prog, frame.dim());
                base.embed(prog, frame, &a)?;
                let rest: Vec<LinExpr> = x.iter().zip(&a).map(|(xi, ai)| xi - ai).collect();
                ball.embed(prog, frame, &rest)?;
            }
            ConvexSet::Intersection(ms) => {
                for m in ms {
                    m.embed(prog, frame, x)?;
                }
            }
            ConvexSet::SubspaceSlice { constraints, base } => {
                for f in constraints {
                    prog.eq(&frame.pair(f, x), &LinExpr::zero());
                }
                base.embed(prog, frame, x)?;
            }
            ConvexSet::Epigraph { func, window, .. } => {
                let slot = frame.pos(window.last()).ok_or(Error::MissingIndex(window.last()))?;
                func.embed_below(prog, frame, x, &x[slot])?;
            }
        }
        Ok(())
    }

    /// The set as a polyhedron over the frame.
    pub fn polyhedron(&self, frame: &Frame) -> Result<Polyhedron> {
        let mut p = Polyhedron::new(frame.dim());
        let x = p.coords();
        self.embed(p.program_mut(), frame, &x)?;
        Ok(p)
    }

    /// Exact membership test.
    pub fn contains(&self, x: &Vector) -> Result<bool> {
        let w = self.window()?;
        if x.window() != &w {
            return Err(Error::WindowMismatch);
        }
        match self {
            ConvexSet::NormBall { center, radius, norm } if !norm.is_polyhedral() => {
                let v = norm_eval(norm, &x.checked_sub(center)?)?;
                Ok(v.within(&Scalar::zero(), radius))
            }
            ConvexSet::MinkowskiSum { base, ball } if !self.is_polyhedral() => {
                let ConvexSet::NormBall { center, radius, norm } = &**ball else {
                    unreachable!("validated by window()")
                };
                let d = distance(&x.checked_sub(center)?, base, norm)?;
                Ok(d.total_cmp(&Scalar::Exact(radius.clone())).is_le())
            }
            ConvexSet::Intersection(ms) if !self.is_polyhedral() => {
                for m in ms {
                    if !m.contains(x)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            ConvexSet::SubspaceSlice { constraints, base } if !self.is_polyhedral() => {
                Ok(constraints.iter().all(|f| f.apply(x).is_zero()) && base.contains(x)?)
            }
            _ => {
                let mut acc = BTreeSet::new();
                self.collect_indices(&mut acc)?;
                acc.extend(x.support());
                let frame = if self.is_tail_closed() { Frame::of(&w, acc)? } else { Frame::full(&w) };
                let mut prog = Program::new();
                self.embed(&mut prog, &frame, &frame.consts(x))?;
                Ok(prog.feasible_point()?.is_some())
            }
        }
    }

    /// `k * C` for a polytope or a ball centred anywhere.
    pub fn scaled(&self, k: &Rat) -> Result<ConvexSet> {
        match self {
            ConvexSet::Polytope { vertices } => Ok(ConvexSet::Polytope {
                vertices: vertices.iter().map(|v| v.scale(k)).collect(),
            }),
            ConvexSet::NormBall { center, radius, norm } if !k.is_negative() => Ok(ConvexSet::NormBall {
                center: center.scale(k),
                radius: radius * k,
                norm: norm.clone(),
            }),
            _ => Err(Error::Unsupported("scaling of this set kind".into())),
        }
    }

    /// Whether the set is bounded (decided structurally, conservatively).
    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexSet::NormBall { .. } | ConvexSet::Polytope { .. } => true,
            ConvexSet::MinkowskiSum { base, .. } => base.is_bounded(),
            ConvexSet::Intersection(ms) => ms.iter().any(ConvexSet::is_bounded),
            ConvexSet::SubspaceSlice { base, .. } => base.is_bounded(),
            _ => false,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConvexSet::Hyperplane { .. } => "hyperplane",
            ConvexSet::Halfspace { .. } => "halfspace",
            ConvexSet::NormBall { .. } => "ball",
            ConvexSet::Polytope { .. } => "polytope",
            ConvexSet::MinkowskiSum { .. } => "minkowskiSum",
            ConvexSet::Intersection(_) => "intersection",
            ConvexSet::SubspaceSlice { .. } => "slice",
            ConvexSet::Epigraph { .. } => "epigraph",
        }
    }
}

fn same(a: Window, b: Window) -> Result<Window> {
    if a == b {
        Ok(a)
    } else {
        Err(Error::WindowMismatch)
    }
}

impl PolyFunc {
    /// A max-affine function on `domain` (the whole space if `None`).
    pub fn new(window: &Window, pieces: Vec<(Functional, Rat)>, domain: Option<Vec<Vector>>) -> Result<PolyFunc> {
        if pieces.is_empty() {
            return Err(Error::InvalidSet("a polyhedral function needs at least one affine piece".into()));
        }
        for (f, _) in &pieces {
            if f.window() != window {
                return Err(Error::WindowMismatch);
            }
        }
        if let Some(vs) = &domain {
            if vs.is_empty() {
                return Err(Error::InvalidSet("empty domain polytope".into()));
            }
            for v in vs {
                if v.window() != window {
                    return Err(Error::WindowMismatch);
                }
            }
        }
        Ok(PolyFunc {
            pieces,
            domain,
            window: window.clone(),
        })
    }

    /// The indicator function of the polytope `conv(vertices)`.
    pub fn indicator(vertices: Vec<Vector>) -> Result<PolyFunc> {
        let w = vertices
            .first()
            .ok_or_else(|| Error::InvalidSet("empty domain polytope".into()))?
            .window()
            .clone();
        PolyFunc::new(&w, vec![(Functional::zero(&w), Rat::zero())], Some(vertices))
    }

    /// The constant function `c` on the whole space.
    pub fn constant(window: &Window, c: Rat) -> PolyFunc {
        PolyFunc {
            pieces: vec![(Functional::zero(window), c)],
            domain: None,
            window: window.clone(),
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn pieces(&self) -> &[(Functional, Rat)] {
        &self.pieces
    }

    pub fn domain(&self) -> Option<&[Vector]> {
        self.domain.as_deref()
    }

    pub fn value(&self, x: &Vector) -> Result<Scalar> {
        if x.window() != &self.window {
            return Err(Error::WindowMismatch);
        }
        if let Some(vs) = &self.domain {
            if !(ConvexSet::Polytope { vertices: vs.clone() }).contains(x)? {
                return Ok(Scalar::PosInf);
            }
        }
        let m = self
            .pieces
            .iter()
            .map(|(f, b)| f.apply(x) + b)
            .max()
            .expect("non-empty pieces");
        Ok(Scalar::Exact(m))
    }

    fn collect_indices(&self, acc: &mut BTreeSet<usize>) {
        for (f, _) in &self.pieces {
            acc.extend(f.support());
        }
        for v in self.domain.iter().flatten() {
            acc.extend(v.support());
        }
    }

    /// `f(y) <= s` where `y` are the X-coordinates of `x` over the frame.
    fn embed_below(&self, prog: &mut Program, frame: &Frame, x: &[LinExpr], s: &LinExpr) -> Result<()> {
        for (f, b) in &self.pieces {
            let lhs = &frame.pair(f, x) + &LinExpr::constant(b.clone());
            prog.le(&lhs, s);
        }
        if let Some(vs) = &self.domain {
            // conv(vs) lives in the X window; its indices coincide with the
            // product frame's, and the real slot is left free.
            let slot = frame.window().last();
            let xs: Vec<LinExpr> = frame
                .indices()
                .iter()
                .zip(x)
                .map(|(&i, xi)| if i == slot { LinExpr::zero() } else { xi.clone() })
                .collect();
            let lifted: Vec<Vector> = vs.iter().map(|v| v.in_window(frame.window())).collect::<Result<_>>()?;
            ConvexSet::Polytope { vertices: lifted }.embed(prog, frame, &xs)?;
        }
        Ok(())
    }
}

impl CompactFamily {
    pub fn new(members: Vec<ConvexSet>) -> Result<CompactFamily> {
        for m in &members {
            if !matches!(m, ConvexSet::Polytope { .. }) {
                return Err(Error::InvalidSet(format!("compact family member is a {}", m.kind_name())));
            }
            m.window()?;
        }
        Ok(CompactFamily { members })
    }

    pub fn members(&self) -> &[ConvexSet] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `max_K max_{v in K} |<f, v>|` per member.
    pub fn vertex_sups(&self, f: &Functional) -> Vec<Rat> {
        (0..self.members.len()).map(|k| self.vertex_sup_abs(k, f).0).collect()
    }

    /// `max_{v in K_k} |<f, v>|` and the index of a maximizing vertex.
    pub fn vertex_sup_abs(&self, k: usize, f: &Functional) -> (Rat, usize) {
        match &self.members[k] {
            ConvexSet::Polytope { vertices } => vertices
                .iter()
                .enumerate()
                .map(|(i, v)| (f.apply(v).abs(), i))
                .fold((Rat::zero(), 0), |best, c| if c.0 > best.0 { c } else { best }),
            _ => unreachable!("validated at construction"),
        }
    }
}
