use std::collections::BTreeSet;

use super::{ConvexSet, PolyFunc};
use crate::error::{Error, Result};
use crate::lp::{LinExpr, LpOutcome, Program, VarKind};
use crate::polyhedron::free_vars;
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::space::{Frame, NormSpec};

/// `epi f` in `X x R` under the Euclidean product of `inner` with `|.|`.
pub fn epigraph_build(f: &PolyFunc, inner: &NormSpec) -> ConvexSet {
    ConvexSet::Epigraph {
        func: f.clone(),
        product_norm: NormSpec::product2(inner.clone()),
        window: f.window().with_scalar_slot(),
    }
}

/// For each radius `R`, `min { f(x) / ||x|| : ||x|| = R }` over the domain,
/// `+inf` when the sphere misses the domain.
///
/// The sphere of a polyhedral norm `max_k |<g_k, x>|` is the union of the
/// faces `<±g_k, x> = R` of the ball, so each radius is a handful of linear
/// programs.
pub fn coercivity_margin(f: &PolyFunc, radii: &[Rat], norm: &NormSpec) -> Result<Vec<Scalar>> {
    let w = f.window();
    let mut acc = BTreeSet::new();
    f.collect_indices(&mut acc);
    acc.extend(norm.required_indices(w)?);
    // One spare coordinate stands in for every coordinate the data ignores.
    if let Some(&spare) = w.indices().iter().rev().find(|i| !acc.contains(i)) {
        acc.insert(spare);
    }
    let frame = norm.frame(w, acc)?;
    let gens = match norm {
        NormSpec::SupC0 | NormSpec::Ell1 | NormSpec::BvC0 => generators(norm, &frame)?,
        other => return Err(Error::NotPolyhedral(format!("coercivity over {other:?}"))),
    };
    radii
        .iter()
        .map(|radius| {
            if !radius.is_positive() {
                return Err(Error::Precondition(format!("radius {radius} must be positive")));
            }
            let mut best: Option<Rat> = None;
            for g in &gens {
                for sign in [Rat::one(), Rat::from_int(-1)] {
                    let mut prog = Program::new();
                    let x = free_vars(&mut prog, frame.dim());
                    let s = LinExpr::var(prog.add_var(VarKind::Free));
                    norm.embed_bound(&mut prog, &frame, &x, &LinExpr::constant(radius.clone()))?;
                    let face = crate::polyhedron::dot(g, &x);
                    prog.eq(&(&face * &sign), &LinExpr::constant(radius.clone()));
                    f.embed_over(&mut prog, &frame, &x, &s)?;
                    if let LpOutcome::Optimal(sol) = prog.minimize(&s)? {
                        if best.as_ref().is_none_or(|b| sol.value < *b) {
                            best = Some(sol.value);
                        }
                    }
                }
            }
            Ok(best.map_or(Scalar::PosInf, |b| Scalar::Exact(b / radius)))
        })
        .collect()
}

fn generators(norm: &NormSpec, frame: &Frame) -> Result<Vec<Vec<Rat>>> {
    let d = frame.dim();
    let unit = |p: usize| {
        let mut v = vec![Rat::zero(); d];
        v[p] = Rat::one();
        v
    };
    Ok(match norm {
        NormSpec::SupC0 => (0..d).map(unit).collect(),
        NormSpec::Ell1 => {
            if d > 12 {
                return Err(Error::Unsupported(format!("ell1 sphere with {d} coordinates")));
            }
            (0..1u32 << d)
                .map(|m| (0..d).map(|p| if m >> p & 1 == 1 { Rat::from_int(-1) } else { Rat::one() }).collect())
                .collect()
        }
        _ => {
            let p1 = frame.pos(1).ok_or(Error::MissingIndex(1))?;
            let mut out = vec![unit(frame.pos(0).ok_or(Error::MissingIndex(0))?), unit(p1)];
            for (pos, &i) in frame.indices().iter().enumerate() {
                if i >= 2 {
                    let mut g = unit(p1);
                    g[pos] = Rat::one();
                    out.push(g);
                }
            }
            out
        }
    })
}

impl PolyFunc {
    /// `f(x) <= s` for `x` over an X-window frame.
    fn embed_over(&self, prog: &mut Program, frame: &Frame, x: &[LinExpr], s: &LinExpr) -> Result<()> {
        for (g, b) in &self.pieces {
            prog.le(&(&frame.pair(g, x) + &LinExpr::constant(b.clone())), s);
        }
        if let Some(vs) = &self.domain {
            ConvexSet::Polytope { vertices: vs.clone() }.embed(prog, frame, x)?;
        }
        Ok(())
    }
}
