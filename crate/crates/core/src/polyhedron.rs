//! Polyhedra as lifted linear-program fragments.
//!
//! A [`Polyhedron`] of dimension `d` is a [`Program`] whose first `d`
//! variables are the point coordinates; any further variables are auxiliary
//! and projected out. Fragments can be copied into a larger program
//! ([`Polyhedron::embed`]) or dualized into constraints bounding their
//! support function ([`Polyhedron::embed_support_bound`]).

use crate::lp::{Cmp, LinExpr, LpError, LpOutcome, Program, VarId, VarKind};
use crate::rational::Rat;

#[derive(Debug, Clone)]
pub struct Polyhedron {
    dim: usize,
    prog: Program,
}

impl Polyhedron {
    /// The whole space of dimension `dim`.
    pub fn new(dim: usize) -> Polyhedron {
        let mut prog = Program::new();
        prog.add_vars(dim, VarKind::Free);
        Polyhedron { dim, prog }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate variables as expressions.
    pub fn coords(&self) -> Vec<LinExpr> {
        (0..self.dim).map(LinExpr::var).collect()
    }

    pub fn program(&self) -> &Program {
        &self.prog
    }

    pub fn program_mut(&mut self) -> &mut Program {
        &mut self.prog
    }

    pub fn is_empty(&self) -> Result<bool, LpError> {
        Ok(self.prog.feasible_point()?.is_none())
    }

    /// `max <c, x>` over the polyhedron.
    pub fn support(&self, c: &[Rat]) -> Result<LpOutcome, LpError> {
        let obj = dot(c, &self.coords());
        self.prog.maximize(&obj)
    }

    /// Copies the fragment into `target` with point coordinates `x` and all
    /// right-hand sides multiplied by `scale`. With `scale = t` a norm unit
    /// ball becomes the cone constraint `norm(x) <= t`.
    pub fn embed(&self, target: &mut Program, x: &[LinExpr], scale: &LinExpr) {
        assert_eq!(x.len(), self.dim, "embed: dimension mismatch");
        let map = self.var_map(target, x);
        for row in self.prog.rows() {
            let mut lhs = LinExpr::zero();
            for (v, c) in &row.coeffs {
                lhs.add_scaled(&map[*v], c);
            }
            let rhs = scale * &row.rhs;
            target.constrain(&lhs, row.cmp, &rhs);
        }
    }

    /// Adds constraints to `target` forcing `sup { <lambda, x> : x in P } <= bound`.
    ///
    /// This is the LP dual of the support program: one multiplier per row,
    /// non-negative for inequalities, with the stationarity conditions as
    /// equalities. An empty polyhedron makes the constraint vacuous.
    pub fn embed_support_bound(&self, target: &mut Program, lambda: &[LinExpr], bound: &LinExpr) {
        assert_eq!(lambda.len(), self.dim, "support bound: dimension mismatch");
        let nv = self.prog.num_vars();
        let mut stationarity = vec![LinExpr::zero(); nv];
        let mut value = LinExpr::zero();
        for row in self.prog.rows() {
            // Normalise to `a.x <= b` or `a.x = b`.
            let (sign, kind) = match row.cmp {
                Cmp::Le => (Rat::one(), VarKind::NonNeg),
                Cmp::Ge => (Rat::from_int(-1), VarKind::NonNeg),
                Cmp::Eq => (Rat::one(), VarKind::Free),
            };
            let y = target.add_var(kind);
            for (v, c) in &row.coeffs {
                stationarity[*v].add_term(y, &(c * &sign));
            }
            value.add_term(y, &(&row.rhs * &sign));
        }
        for (v, expr) in stationarity.iter().enumerate() {
            if v < self.dim {
                target.eq(expr, &lambda[v]);
            } else {
                match self.prog.kind(v) {
                    VarKind::Free => target.eq(expr, &LinExpr::zero()),
                    VarKind::NonNeg => target.ge(expr, &LinExpr::zero()),
                }
            }
        }
        target.le(&value, bound);
    }

    /// `{ lambda : <lambda, x> <= 1 for all x in P }`.
    pub fn polar(&self) -> Polyhedron {
        let mut out = Polyhedron::new(self.dim);
        let lambda = out.coords();
        self.embed_support_bound(&mut out.prog, &lambda, &LinExpr::constant(Rat::one()));
        out
    }

    fn var_map(&self, target: &mut Program, x: &[LinExpr]) -> Vec<LinExpr> {
        (0..self.prog.num_vars())
            .map(|v| {
                if v < self.dim {
                    x[v].clone()
                } else {
                    LinExpr::var(target.add_var(self.prog.kind(v)))
                }
            })
            .collect()
    }
}

pub fn dot(c: &[Rat], xs: &[LinExpr]) -> LinExpr {
    let mut out = LinExpr::zero();
    for (ci, xi) in c.iter().zip(xs) {
        if !ci.is_zero() {
            out.add_scaled(xi, ci);
        }
    }
    out
}

/// Fresh free variables as expressions.
pub fn free_vars(prog: &mut Program, n: usize) -> Vec<LinExpr> {
    prog.add_vars(n, VarKind::Free)
        .into_iter()
        .map(LinExpr::var)
        .collect()
}

pub fn var_expr(v: VarId) -> LinExpr {
    LinExpr::var(v)
}
