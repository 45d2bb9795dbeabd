use std::cmp::Ordering;
use std::fmt;

use super::{Frame, Functional, Vector, Window};
use crate::error::{Error, Result};
use crate::lp::{LinExpr, LpOutcome, Program, VarKind};
use crate::polyhedron::Polyhedron;
use crate::rational::Rat;
use crate::scalar::Scalar;

/// A norm family on the sequence space.
#[derive(Clone, PartialEq)]
pub enum NormSpec {
    /// `max |x_i|`.
    SupC0,
    /// `sum |x_i|`.
    Ell1,
    /// `sqrt(sum x_i^2)`.
    Ell2,
    /// `max(|x_0|, |x_1|, sup_{n>=2} |x_n + x_1|)`. Needs indices 0 and 1.
    BvC0,
    /// The norm whose dual unit ball is the described set.
    PredualOfBall(Box<DualBallDescription>),
    /// `sqrt(inner(x)^2 + r^2)` on `X x R`; the last window index is the
    /// real slot.
    Product2(Box<NormSpec>),
}

/// `B = { L : |<L, y_i>| <= b_i for all i } ∩ { L : base*(L) <= radius }`.
#[derive(Clone, PartialEq)]
pub struct DualBallDescription {
    constraints: Vec<(Vector, Rat)>,
    radius: Rat,
    base: NormSpec,
}

impl DualBallDescription {
    pub fn new(constraints: Vec<(Vector, Rat)>, radius: Rat, base: NormSpec) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::Precondition(format!("dual ball radius must be positive, got {radius}")));
        }
        if let NormSpec::PredualOfBall(_) | NormSpec::Product2(_) = base {
            return Err(Error::Unsupported(format!("{} as the base of a dual ball", base.name())));
        }
        for (k, (y, b)) in constraints.iter().enumerate() {
            if !b.is_positive() {
                return Err(Error::Precondition(format!("slab bound {k} must be positive, got {b}")));
            }
            y.same_window(&constraints[0].0)?;
        }
        Ok(DualBallDescription {
            constraints,
            radius,
            base,
        })
    }

    pub fn constraints(&self) -> &[(Vector, Rat)] {
        &self.constraints
    }

    pub fn radius(&self) -> &Rat {
        &self.radius
    }

    pub fn base(&self) -> &NormSpec {
        &self.base
    }

    /// `B` restricted to the frame, as a polyhedron of functionals.
    pub fn polyhedron(&self, frame: &Frame) -> Result<Polyhedron> {
        let mut b = Polyhedron::new(frame.dim());
        let lambda = b.coords();
        for (y, bound) in &self.constraints {
            let e = frame.pair(y, &lambda);
            b.program_mut().le(&e, &LinExpr::constant(bound.clone()));
            b.program_mut().ge(&e, &LinExpr::constant(-bound));
        }
        let base_dual = self.base.unit_ball(frame)?.polar();
        base_dual.embed(b.program_mut(), &lambda, &LinExpr::constant(self.radius.clone()));
        Ok(b)
    }

    fn check_window(&self, w: &Window) -> Result<()> {
        match self.constraints.first() {
            Some((y, _)) if y.window() != w => Err(Error::WindowMismatch),
            _ => Ok(()),
        }
    }
}

impl NormSpec {
    pub fn name(&self) -> &'static str {
        match self {
            NormSpec::SupC0 => "supC0",
            NormSpec::Ell1 => "ell1",
            NormSpec::Ell2 => "ell2",
            NormSpec::BvC0 => "bvC0",
            NormSpec::PredualOfBall(_) => "predualOfBall",
            NormSpec::Product2(_) => "product2",
        }
    }

    pub fn predual(desc: DualBallDescription) -> NormSpec {
        NormSpec::PredualOfBall(Box::new(desc))
    }

    pub fn product2(inner: NormSpec) -> NormSpec {
        NormSpec::Product2(Box::new(inner))
    }

    /// Whether the unit ball is a polyhedron (so distances are linear programs).
    pub fn is_polyhedral(&self) -> bool {
        match self {
            NormSpec::SupC0 | NormSpec::Ell1 | NormSpec::BvC0 => true,
            NormSpec::PredualOfBall(b) => b.base.is_polyhedral(),
            NormSpec::Ell2 | NormSpec::Product2(_) => false,
        }
    }

    /// Whether zeroing coordinates never increases the norm, and neither does
    /// dropping window indices that carry no data. Programs over such norms
    /// may be restricted to the coordinates the data touches.
    pub fn is_tail_closed(&self) -> bool {
        match self {
            NormSpec::SupC0 | NormSpec::Ell1 | NormSpec::Ell2 | NormSpec::BvC0 => true,
            NormSpec::Product2(inner) => inner.is_tail_closed(),
            NormSpec::PredualOfBall(_) => false,
        }
    }

    /// Indices every frame must contain for this norm on `window`.
    pub fn required_indices(&self, window: &Window) -> Result<Vec<usize>> {
        match self {
            NormSpec::BvC0 => {
                for i in [0, 1] {
                    if !window.contains(i) {
                        return Err(Error::MissingIndex(i));
                    }
                }
                Ok(vec![0, 1])
            }
            NormSpec::Product2(inner) => {
                let mut out = inner.required_indices(&window.without_last()?)?;
                out.push(window.last());
                Ok(out)
            }
            NormSpec::PredualOfBall(b) => {
                b.check_window(window)?;
                b.base.required_indices(window)?;
                Ok(window.indices().to_vec())
            }
            _ => Ok(Vec::new()),
        }
    }

    /// The smallest frame on which programs for this norm are exact, given
    /// the indices the data touches.
    pub fn frame(&self, window: &Window, data: impl IntoIterator<Item = usize>) -> Result<Frame> {
        let req = self.required_indices(window)?;
        if self.is_tail_closed() {
            Frame::of(window, data.into_iter().chain(req))
        } else {
            Ok(Frame::full(window))
        }
    }

    /// The closed unit ball over the frame.
    pub fn unit_ball(&self, frame: &Frame) -> Result<Polyhedron> {
        let dim = frame.dim();
        let mut p = Polyhedron::new(dim);
        let x = p.coords();
        let one = LinExpr::constant(Rat::one());
        match self {
            NormSpec::SupC0 => {
                for xi in &x {
                    p.program_mut().le(xi, &one);
                    p.program_mut().ge(xi, &-&one);
                }
            }
            NormSpec::Ell1 => {
                let prog = p.program_mut();
                let w: Vec<LinExpr> = prog
                    .add_vars(dim, VarKind::NonNeg)
                    .into_iter()
                    .map(LinExpr::var)
                    .collect();
                let mut total = LinExpr::zero();
                for (xi, wi) in x.iter().zip(&w) {
                    prog.le(xi, wi);
                    prog.le(&-xi, wi);
                    total = &total + wi;
                }
                prog.le(&total, &one);
            }
            NormSpec::BvC0 => {
                let (p0, p1) = match (frame.pos(0), frame.pos(1)) {
                    (Some(a), Some(b)) => (a, b),
                    (None, _) => return Err(Error::MissingIndex(0)),
                    (_, None) => return Err(Error::MissingIndex(1)),
                };
                let prog = p.program_mut();
                for xi in [&x[p0], &x[p1]] {
                    prog.le(xi, &one);
                    prog.ge(xi, &-&one);
                }
                for (pos, &i) in frame.indices().iter().enumerate() {
                    if i >= 2 {
                        let e = &x[pos] + &x[p1];
                        prog.le(&e, &one);
                        prog.ge(&e, &-&one);
                    }
                }
            }
            NormSpec::PredualOfBall(b) => {
                if frame.dim() != frame.window().len() {
                    return Err(Error::Precondition("predual norms need the full window".into()));
                }
                return Ok(b.polyhedron(frame)?.polar());
            }
            NormSpec::Ell2 | NormSpec::Product2(_) => {
                return Err(Error::NotPolyhedral(format!("{} unit ball", self.name())))
            }
        }
        Ok(p)
    }

    /// Constrains `norm(d) <= t` inside `prog`.
    pub fn embed_bound(&self, prog: &mut Program, frame: &Frame, d: &[LinExpr], t: &LinExpr) -> Result<()> {
        self.unit_ball(frame)?.embed(prog, d, t);
        Ok(())
    }

    /// Constrains `dual_norm(lambda) <= t` inside `prog`.
    pub fn embed_dual_bound(
        &self,
        prog: &mut Program,
        frame: &Frame,
        lambda: &[LinExpr],
        t: &LinExpr,
    ) -> Result<()> {
        match self {
            NormSpec::SupC0 => {
                // sum |lambda_i| <= t
                let w = prog.add_vars(lambda.len(), VarKind::NonNeg);
                let mut total = LinExpr::zero();
                for (l, &wi) in lambda.iter().zip(&w) {
                    let wi = LinExpr::var(wi);
                    prog.le(l, &wi);
                    prog.le(&-l, &wi);
                    total = &total + &wi;
                }
                prog.le(&total, t);
            }
            NormSpec::Ell1 => {
                for l in lambda {
                    prog.le(l, t);
                    prog.le(&-l, t);
                }
            }
            _ => self.unit_ball(frame)?.embed_support_bound(prog, lambda, t),
        }
        Ok(())
    }

    /// Generators `g_k` with `norm(x) = max_k |<g_k, x>|` over the frame.
    fn dual_generators(&self, frame: &Frame) -> Result<Vec<Vec<Rat>>> {
        let d = frame.dim();
        let unit = |p: usize| {
            let mut v = vec![Rat::zero(); d];
            v[p] = Rat::one();
            v
        };
        match self {
            NormSpec::SupC0 => Ok((0..d).map(unit).collect()),
            NormSpec::Ell1 => {
                if d > 16 {
                    return Err(Error::Unsupported(format!("ell1 sign enumeration over {d} coordinates")));
                }
                // Signs up to a global flip.
                Ok((0..1u32 << d.saturating_sub(1))
                    .map(|mask| {
                        (0..d)
                            .map(|p| if p > 0 && mask >> (p - 1) & 1 == 1 { Rat::from_int(-1) } else { Rat::one() })
                            .collect()
                    })
                    .collect())
            }
            NormSpec::BvC0 => {
                let p0 = frame.pos(0).ok_or(Error::MissingIndex(0))?;
                let p1 = frame.pos(1).ok_or(Error::MissingIndex(1))?;
                let mut out = vec![unit(p0), unit(p1)];
                for (pos, &i) in frame.indices().iter().enumerate() {
                    if i >= 2 {
                        let mut g = unit(p1);
                        g[pos] = Rat::one();
                        out.push(g);
                    }
                }
                Ok(out)
            }
            _ => Err(Error::NotPolyhedral(format!("{} as a metric argument", self.name()))),
        }
    }
}

impl fmt::Debug for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::PredualOfBall(b) => write!(f, "predualOfBall({b:?})"),
            NormSpec::Product2(inner) => write!(f, "product2({inner:?})"),
            other => f.write_str(other.name()),
        }
    }
}

impl fmt::Debug for DualBallDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualBall")
            .field("constraints", &self.constraints)
            .field("radius", &self.radius)
            .field("base", &self.base)
            .finish()
    }
}

fn max_abs<'a>(vals: impl Iterator<Item = &'a Rat>) -> Rat {
    vals.map(Rat::abs).max().unwrap_or_default()
}

/// `norm(x)`.
pub fn norm_eval(norm: &NormSpec, x: &Vector) -> Result<Scalar> {
    let w = x.window();
    match norm {
        NormSpec::SupC0 => Ok(Scalar::Exact(max_abs(x.entries().map(|(_, v)| v)))),
        NormSpec::Ell1 => Ok(Scalar::Exact(x.entries().map(|(_, v)| v.abs()).sum())),
        NormSpec::Ell2 => Ok(Scalar::sqrt(x.sum_sq())),
        NormSpec::BvC0 => {
            norm.required_indices(w)?;
            let x1 = x.get(1);
            let mut m = x.get(0).abs().max(x1.abs());
            for (i, v) in x.entries() {
                if i >= 2 {
                    m = m.max((v + &x1).abs());
                }
            }
            Ok(Scalar::Exact(m))
        }
        NormSpec::PredualOfBall(b) => {
            b.check_window(w)?;
            if b.base.is_polyhedral() {
                let frame = Frame::full(w);
                match b.polyhedron(&frame)?.support(&frame.dense(x))? {
                    LpOutcome::Optimal(s) => Ok(Scalar::Exact(s.value)),
                    _ => Err(Error::Unbounded("predual norm of a degenerate dual ball".into())),
                }
            } else {
                predual_ell2(b, x)
            }
        }
        NormSpec::Product2(inner) => {
            let (xs, r) = split_product(x)?;
            let a = norm_eval(inner, &xs)?;
            Ok(hypot(&a, &r))
        }
    }
}

/// `sup { <f, x> : norm(x) <= 1 }`.
pub fn dual_norm_eval(norm: &NormSpec, f: &Functional) -> Result<Scalar> {
    let w = f.window();
    match norm {
        NormSpec::SupC0 => Ok(Scalar::Exact(f.entries().map(|(_, v)| v.abs()).sum())),
        NormSpec::Ell1 => Ok(Scalar::Exact(max_abs(f.entries().map(|(_, v)| v)))),
        NormSpec::Ell2 => Ok(Scalar::sqrt(f.sum_sq())),
        NormSpec::BvC0 => {
            let frame = norm.frame(w, f.support())?;
            match norm.unit_ball(&frame)?.support(&frame.dense(f))? {
                LpOutcome::Optimal(s) => Ok(Scalar::Exact(s.value)),
                _ => Err(Error::Unbounded("bvC0 unit ball restricted to the window".into())),
            }
        }
        NormSpec::PredualOfBall(b) => {
            // Gauge of B: the smallest t with f in t*B.
            b.check_window(w)?;
            let mut g = dual_norm_eval(&b.base, f)?.scale(&b.radius.recip());
            for (y, bound) in &b.constraints {
                g = g.max(Scalar::Exact(f.dot(y).abs() / bound));
            }
            Ok(g)
        }
        NormSpec::Product2(inner) => {
            let (fs, r) = split_product(&f.to_vector())?;
            let a = dual_norm_eval(inner, &fs.to_functional())?;
            Ok(hypot(&a, &r))
        }
    }
}

/// The norm on X whose dual unit ball is `B`: its support function.
pub fn predual_norm_from_dual_ball(b: &DualBallDescription, x: &Vector) -> Result<Scalar> {
    norm_eval(&NormSpec::predual(b.clone()), x)
}

/// `sup { |nu(x) - mu(x)| : base(x) <= 1 }` over the window.
pub fn norm_metric_rho(mu: &NormSpec, nu: &NormSpec, base: &NormSpec, window: &Window) -> Result<Rat> {
    if !base.is_polyhedral() {
        return Err(Error::NotPolyhedral(format!("{} as the base norm", base.name())));
    }
    let frame = Frame::full(window);
    let gm = mu.dual_generators(&frame)?;
    let gn = nu.dual_generators(&frame)?;
    let ball = base.unit_ball(&frame)?;
    Ok(one_sided_rho(&gn, mu, &ball, &frame)?.max(one_sided_rho(&gm, nu, &ball, &frame)?))
}

/// `sup { p(x) - q(x) : x in ball }` where `p = max_k |<g_k, .>|`.
fn one_sided_rho(gp: &[Vec<Rat>], q: &NormSpec, ball: &Polyhedron, frame: &Frame) -> Result<Rat> {
    let mut best = Rat::zero();
    for g in gp {
        let mut prog = ball.program().clone();
        let x = ball.coords();
        let t = LinExpr::var(prog.add_var(VarKind::NonNeg));
        q.embed_bound(&mut prog, frame, &x, &t)?;
        let obj = &crate::polyhedron::dot(g, &x) - &t;
        // The ball is symmetric, so the sign of g can be fixed.
        match prog.maximize(&obj)? {
            LpOutcome::Optimal(s) => best = best.max(s.value),
            _ => return Err(Error::Unbounded("norm metric over an unbounded ball".into())),
        }
    }
    Ok(best)
}

fn split_product(x: &Vector) -> Result<(Vector, Rat)> {
    let w = x.window();
    let slot = w.last();
    let inner_w = w.without_last()?;
    let xs = Vector::from_entries(&inner_w, x.entries().filter(|(i, _)| *i != slot).map(|(i, v)| (i, v.clone())))?;
    Ok((xs, x.get(slot)))
}

fn hypot(a: &Scalar, r: &Rat) -> Scalar {
    match a.square_exact() {
        Some(a2) => Scalar::sqrt(a2 + r.square()),
        None => Scalar::Approx(a.to_f64().hypot(r.to_f64())),
    }
}

/// `min_s b|s| + radius * ||x - s y||_2` for a single slab.
fn predual_ell2(b: &DualBallDescription, x: &Vector) -> Result<Scalar> {
    if b.base != NormSpec::Ell2 {
        return Err(Error::Unsupported(format!("predual of a {} dual ball", b.base.name())));
    }
    let r = &b.radius;
    match b.constraints.as_slice() {
        [] => Ok(Scalar::sqrt(x.sum_sq()).scale(r)),
        [(y, bound)] => {
            let a = x.sum_sq();
            let c = y.sum_sq();
            let bx = x.dot(y);
            // s = 0 is optimal iff r |<x,y>| <= bound ||x||.
            if c.is_zero() || (r.square() * bx.square()).cmp(&(bound.square() * &a)) != Ordering::Greater {
                return Ok(Scalar::sqrt(a).scale(r));
            }
            let lin = bound * &bx.abs() / &c;
            let perp = &a - &(bx.square() / &c);
            if perp.is_zero() {
                return Ok(Scalar::Exact(lin));
            }
            let q = perp * (r.square() * &c - bound.square()) / &c;
            Ok(Scalar::Approx(lin.to_f64() + q.to_f64().sqrt()))
        }
        _ => Err(Error::Unsupported("Euclidean dual balls with more than one slab".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn exact(n: i64, d: i64) -> Scalar {
        Scalar::Exact(r(n, d))
    }

    /// `sup <f, x>` over the unit ball by brute force over the ball's LP.
    fn dual_by_lp(norm: &NormSpec, f: &Functional) -> Rat {
        let frame = Frame::full(f.window());
        norm.unit_ball(&frame)
            .unwrap()
            .support(&frame.dense(f))
            .unwrap()
            .optimal()
            .unwrap()
            .value
    }

    #[test]
    fn bv_norm_of_witness_points() {
        let w = Window::range(0, 10);
        let z0 = Vector::from_fracs(&w, &[(1, 1, 2)]).unwrap();
        for n in 2..=10 {
            let zn = Vector::from_fracs(&w, &[(0, 1, 2), (1, 1, 2), (n, 1, 2)]).unwrap();
            assert_eq!(norm_eval(&NormSpec::BvC0, &zn).unwrap(), exact(1, 1));
            let d = z0.checked_sub(&zn).unwrap();
            assert_eq!(norm_eval(&NormSpec::BvC0, &d).unwrap(), exact(1, 2));
        }
    }

    #[test]
    fn bv_dual_norms() {
        let w = Window::range(0, 12);
        let f_inf = Functional::unit(&w, 1).unwrap();
        assert_eq!(dual_norm_eval(&NormSpec::BvC0, &f_inf).unwrap(), exact(1, 1));
        for n in 2..=12 {
            let f = Functional::from_fracs(&w, &[(1, 1, 1), (n, 1, 1)]).unwrap();
            assert_eq!(dual_norm_eval(&NormSpec::BvC0, &f).unwrap(), exact(1, 1));
        }
        let missing = Window::new([0, 2]).unwrap();
        assert_eq!(
            dual_norm_eval(&NormSpec::BvC0, &Functional::zero(&missing)).unwrap_err(),
            Error::MissingIndex(1)
        );
    }

    #[test]
    fn closed_form_duals_match_lp() {
        let w = Window::range(0, 3);
        let f = Functional::from_fracs(&w, &[(0, 1, 1), (1, -2, 1), (3, 1, 3)]).unwrap();
        for norm in [NormSpec::SupC0, NormSpec::Ell1, NormSpec::BvC0] {
            assert_eq!(dual_norm_eval(&norm, &f).unwrap(), Scalar::Exact(dual_by_lp(&norm, &f)), "{norm:?}");
        }
        let g = Functional::from_fracs(&w, &[(0, 1, 1), (1, -2, 1)]).unwrap();
        assert_eq!(dual_norm_eval(&NormSpec::SupC0, &g).unwrap(), exact(3, 1));
        assert_eq!(dual_norm_eval(&NormSpec::Ell2, &g).unwrap(), Scalar::Root(r(5, 1)));
    }

    #[test]
    fn predual_of_slab_and_sup_dual_ball() {
        // B = {|L_0| <= 1} ∩ {||L||_inf <= 2} on {0,1}; the support at e0 + e1 is 3.
        let w = Window::range(0, 1);
        let e0 = Vector::unit(&w, 0).unwrap();
        let b = DualBallDescription::new(vec![(e0.clone(), Rat::one())], r(2, 1), NormSpec::Ell1).unwrap();
        let x = Vector::from_fracs(&w, &[(0, 1, 1), (1, 1, 1)]).unwrap();
        assert_eq!(predual_norm_from_dual_ball(&b, &x).unwrap(), exact(3, 1));
        // With an ell1 dual ball of radius 2 instead, the slab caps L_0 + L_1 at 2.
        let b1 = DualBallDescription::new(vec![(e0, Rat::one())], r(2, 1), NormSpec::SupC0).unwrap();
        assert_eq!(predual_norm_from_dual_ball(&b1, &x).unwrap(), exact(2, 1));
        assert_eq!(predual_norm_from_dual_ball(&b, &Vector::zero(&w)).unwrap(), exact(0, 1));
        // Without the slab and radius 1 the predual norm is the base norm.
        let plain = DualBallDescription::new(vec![], Rat::one(), NormSpec::SupC0).unwrap();
        assert_eq!(predual_norm_from_dual_ball(&plain, &Vector::unit(&w, 0).unwrap()).unwrap(), exact(1, 1));
    }

    #[test]
    fn predual_gauge_matches_lp_route() {
        let w = Window::range(0, 2);
        let y = Vector::from_fracs(&w, &[(0, 1, 1), (2, -1, 2)]).unwrap();
        let b = DualBallDescription::new(vec![(y, r(1, 2))], r(3, 2), NormSpec::SupC0).unwrap();
        let norm = NormSpec::predual(b);
        for f in [
            Functional::from_fracs(&w, &[(0, 1, 1), (1, 1, 1)]).unwrap(),
            Functional::from_fracs(&w, &[(2, 3, 1)]).unwrap(),
            Functional::from_fracs(&w, &[(0, -1, 3), (1, 1, 5), (2, 2, 7)]).unwrap(),
        ] {
            assert_eq!(dual_norm_eval(&norm, &f).unwrap(), Scalar::Exact(dual_by_lp(&norm, &f)), "{f:?}");
        }
    }

    #[test]
    fn predual_over_euclidean_base() {
        let w = Window::range(0, 3);
        let y = Vector::unit(&w, 0).unwrap();
        let b = DualBallDescription::new(vec![(y, Rat::one())], r(2, 1), NormSpec::Ell2).unwrap();
        // Orthogonal to y: the slab is inactive, value 2 * ||x||.
        let x = Vector::from_fracs(&w, &[(1, 3, 1), (2, 4, 1)]).unwrap();
        assert_eq!(predual_norm_from_dual_ball(&b, &x).unwrap(), exact(10, 1));
        // Along y: value |s| * bound with s = 1.
        let e0 = Vector::unit(&w, 0).unwrap();
        assert_eq!(predual_norm_from_dual_ball(&b, &e0).unwrap(), exact(1, 1));
        // Mixed: min_s |s| + 2 sqrt((1-s)^2 + 1) = 1 + sqrt(3).
        let m = Vector::from_fracs(&w, &[(0, 1, 1), (1, 1, 1)]).unwrap();
        let v = predual_norm_from_dual_ball(&b, &m).unwrap().to_f64();
        assert!((v - (1.0 + 3f64.sqrt())).abs() < 1e-12, "{v}");
    }

    #[test]
    fn product_norm() {
        let w = Window::range(0, 2).with_scalar_slot();
        let x = Vector::from_fracs(&w, &[(0, 3, 1), (1, -1, 1), (3, 4, 1)]).unwrap();
        assert_eq!(norm_eval(&NormSpec::product2(NormSpec::SupC0), &x).unwrap(), exact(5, 1));
        let f = x.to_functional();
        // Dual of sup is ell1: sqrt(4^2 + 4^2).
        assert_eq!(dual_norm_eval(&NormSpec::product2(NormSpec::SupC0), &f).unwrap(), Scalar::Root(r(32, 1)));
    }

    #[test]
    fn rho_examples() {
        let w = Window::range(0, 1);
        assert_eq!(norm_metric_rho(&NormSpec::SupC0, &NormSpec::Ell1, &NormSpec::SupC0, &w).unwrap(), r(1, 1));
        assert_eq!(norm_metric_rho(&NormSpec::BvC0, &NormSpec::BvC0, &NormSpec::SupC0, &w).unwrap(), r(0, 1));
        let w3 = Window::range(0, 3);
        // Over the ell1 ball the gap ||x||_1 - ||x||_inf peaks at the barycentre (1/4, ..., 1/4).
        assert_eq!(norm_metric_rho(&NormSpec::Ell1, &NormSpec::SupC0, &NormSpec::Ell1, &w3).unwrap(), r(3, 4));
    }
}
