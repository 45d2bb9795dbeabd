//! Exact linear programming over [`Rat`].
//!
//! A [`Program`] is a list of variables (free or non-negative) and linear
//! rows. It is solved by a two-phase tableau simplex in exact arithmetic:
//! Dantzig pricing, falling back to Bland's rule during runs of degenerate
//! pivots so that cycling is impossible.
//!
//! Programs double as lifted descriptions of polyhedra (see
//! [`crate::polyhedron::Polyhedron`]), which is why rows and variable kinds are
//! inspectable.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::Rat;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// Affine expression `sum coeff * var + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn var(v: VarId) -> LinExpr {
        LinExpr::term(v, Rat::one())
    }

    pub fn term(v: VarId, coeff: Rat) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(v, &coeff);
        e
    }

    pub fn constant(c: Rat) -> LinExpr {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn add_term(&mut self, v: VarId, coeff: &Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rat) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rat) {
        if k.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, &(c * k));
        }
        self.constant += &other.constant * k;
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, &Rat)> {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, values: &[Rat]) -> Rat {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (v, c)| acc + c * &values[*v])
    }
}

impl Add<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::one());
        out
    }
}

impl Sub<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rat::from_int(-1));
        out
    }
}

impl Mul<&Rat> for &LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rat) -> LinExpr {
        let mut out = LinExpr::zero();
        out.add_scaled(self, k);
        out
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * &Rat::from_int(-1)
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(VarId, Rat)>,
    pub cmp: Cmp,
    pub rhs: Rat,
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    kinds: Vec<VarKind>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub value: Rat,
    pub values: Vec<Rat>,
}

impl Solution {
    pub fn eval(&self, e: &LinExpr) -> Rat {
        e.eval(&self.values)
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<Solution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
}

const PIVOT_LIMIT: usize = 500_000;
const DEGENERATE_RUN: usize = 40;

impl Program {
    pub fn new() -> Program {
        Program::default()
    }

    pub fn add_var(&mut self, kind: VarKind) -> VarId {
        self.kinds.push(kind);
        self.kinds.len() - 1
    }

    pub fn add_vars(&mut self, n: usize, kind: VarKind) -> Vec<VarId> {
        (0..n).map(|_| self.add_var(kind)).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.kinds[v]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Adds `lhs cmp rhs`.
    pub fn constrain(&mut self, lhs: &LinExpr, cmp: Cmp, rhs: &LinExpr) {
        let e = lhs - rhs;
        let coeffs: Vec<(VarId, Rat)> = e.terms().map(|(v, c)| (v, c.clone())).collect();
        let rhs = -e.constant_part();
        if coeffs.is_empty() {
            // Constant rows are kept so infeasibility is still detected.
            let ok = match cmp {
                Cmp::Le => !rhs.is_negative(),
                Cmp::Ge => !rhs.is_positive(),
                Cmp::Eq => rhs.is_zero(),
            };
            if ok {
                return;
            }
        }
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub fn le(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.constrain(lhs, Cmp::Le, rhs)
    }

    pub fn ge(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.constrain(lhs, Cmp::Ge, rhs)
    }

    pub fn eq(&mut self, lhs: &LinExpr, rhs: &LinExpr) {
        self.constrain(lhs, Cmp::Eq, rhs)
    }

    pub fn push_row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn maximize(&self, objective: &LinExpr) -> Result<LpOutcome, LpError> {
        Tableau::build(self).solve(self, objective)
    }

    pub fn minimize(&self, objective: &LinExpr) -> Result<LpOutcome, LpError> {
        Ok(match self.maximize(&-objective)? {
            LpOutcome::Optimal(mut s) => {
                s.value = -s.value;
                LpOutcome::Optimal(s)
            }
            other => other,
        })
    }

    /// A feasible point, if any.
    pub fn feasible_point(&self) -> Result<Option<Vec<Rat>>, LpError> {
        Ok(self.maximize(&LinExpr::zero())?.optimal().map(|s| s.values))
    }

    /// Lexicographic minimization: minimize each objective in turn, pinning
    /// the optimum of the previous ones.
    pub fn lex_minimize(&self, objectives: &[LinExpr]) -> Result<LpOutcome, LpError> {
        let mut prog = self.clone();
        let mut last = None;
        for obj in objectives {
            match prog.minimize(obj)? {
                LpOutcome::Optimal(s) => {
                    prog.le(obj, &LinExpr::constant(s.value.clone()));
                    last = Some(s);
                }
                other => return Ok(other),
            }
        }
        Ok(match last {
            Some(s) => LpOutcome::Optimal(s),
            None => match prog.feasible_point()? {
                Some(values) => LpOutcome::Optimal(Solution {
                    value: Rat::zero(),
                    values,
                }),
                None => LpOutcome::Infeasible,
            },
        })
    }
}

/// Column `j` of the tableau stands for `sign * var` (or a slack/artificial).
#[derive(Clone, Copy)]
enum ColumnRole {
    Var(VarId, bool),
    Slack,
    Artificial,
}

struct Tableau {
    a: Vec<Vec<Rat>>,
    b: Vec<Rat>,
    basis: Vec<usize>,
    roles: Vec<ColumnRole>,
    pivots: usize,
}

impl Tableau {
    fn build(prog: &Program) -> Tableau {
        let mut roles = Vec::new();
        let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(prog.kinds.len());
        for (v, kind) in prog.kinds.iter().enumerate() {
            let pos = roles.len();
            roles.push(ColumnRole::Var(v, false));
            let neg = if *kind == VarKind::Free {
                roles.push(ColumnRole::Var(v, true));
                Some(pos + 1)
            } else {
                None
            };
            var_cols.push((pos, neg));
        }
        let structural = roles.len();
        let m = prog.rows.len();
        let mut extra = 0;
        for row in &prog.rows {
            let flip = row.rhs.is_negative();
            let cmp = effective_cmp(row.cmp, flip);
            extra += match cmp {
                Cmp::Le | Cmp::Eq => 1,
                Cmp::Ge => 2,
            };
        }
        let width = structural + extra;
        let mut a = vec![vec![Rat::zero(); width]; m];
        let mut b = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next = structural;
        for (i, row) in prog.rows.iter().enumerate() {
            let flip = row.rhs.is_negative();
            let sign = if flip { Rat::from_int(-1) } else { Rat::one() };
            for (v, c) in &row.coeffs {
                let c = c * &sign;
                let (pos, neg) = var_cols[*v];
                a[i][pos] += &c;
                if let Some(neg) = neg {
                    a[i][neg] -= &c;
                }
            }
            b.push(&row.rhs * &sign);
            match effective_cmp(row.cmp, flip) {
                Cmp::Le => {
                    a[i][next] = Rat::one();
                    roles.push(ColumnRole::Slack);
                    basis.push(next);
                    next += 1;
                }
                Cmp::Ge => {
                    a[i][next] = Rat::from_int(-1);
                    roles.push(ColumnRole::Slack);
                    a[i][next + 1] = Rat::one();
                    roles.push(ColumnRole::Artificial);
                    basis.push(next + 1);
                    next += 2;
                }
                Cmp::Eq => {
                    a[i][next] = Rat::one();
                    roles.push(ColumnRole::Artificial);
                    basis.push(next);
                    next += 1;
                }
            }
        }
        Tableau {
            a,
            b,
            basis,
            roles,
            pivots: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        matches!(self.roles[j], ColumnRole::Artificial)
    }

    fn pivot(&mut self, r: usize, c: usize, d: &mut [Rat], z: &mut Rat) {
        self.pivots += 1;
        let piv = self.a[r][c].clone();
        let nz: Vec<usize> = (0..self.a[r].len())
            .filter(|&j| !self.a[r][j].is_zero())
            .collect();
        if !piv.is_one() {
            for &j in &nz {
                self.a[r][j] = &self.a[r][j] / &piv;
            }
            self.b[r] = &self.b[r] / &piv;
        }
        let prow: Vec<(usize, Rat)> = nz.iter().map(|&j| (j, self.a[r][j].clone())).collect();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            let row = &mut self.a[i];
            for (j, v) in &prow {
                row[*j] -= &(&f * v);
            }
            self.b[i] -= &(&f * &pb);
        }
        if !d[c].is_zero() {
            let f = d[c].clone();
            for (j, v) in &prow {
                d[*j] -= &(&f * v);
            }
            *z += &(&f * &pb);
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on reduced costs `d`; returns false when
    /// unbounded.
    fn iterate(&mut self, d: &mut [Rat], z: &mut Rat, allow_artificial: bool) -> Result<bool, LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.pivots > PIVOT_LIMIT {
                return Err(LpError::PivotLimit(PIVOT_LIMIT));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            for (j, dj) in d.iter().enumerate() {
                if !dj.is_positive() || (!allow_artificial && self.is_artificial(j)) {
                    continue;
                }
                match enter {
                    None => {
                        enter = Some(j);
                        if bland {
                            break;
                        }
                    }
                    Some(k) if dj > &d[k] => enter = Some(j),
                    _ => {}
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.a.len() {
                let aic = &self.a[i][c];
                if !aic.is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / aic;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c, d, z);
        }
    }

    fn solve(mut self, prog: &Program, objective: &LinExpr) -> Result<LpOutcome, LpError> {
        let width = self.roles.len();
        // Phase 1: maximize -(sum of artificials).
        let has_artificial = self.basis.iter().any(|&j| self.is_artificial(j));
        if has_artificial {
            let mut d = vec![Rat::zero(); width];
            let mut z = Rat::zero();
            for (i, &bj) in self.basis.iter().enumerate() {
                if self.is_artificial(bj) {
                    for (j, v) in self.a[i].iter().enumerate() {
                        if !v.is_zero() {
                            d[j] += v;
                        }
                    }
                    z -= &self.b[i];
                }
            }
            for (j, dj) in d.iter_mut().enumerate() {
                if self.is_artificial(j) {
                    *dj = Rat::zero();
                }
            }
            self.iterate(&mut d, &mut z, true)?;
            if z.is_negative() {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining (zero-valued) artificials out of the basis.
            let mut i = 0;
            while i < self.basis.len() {
                if self.is_artificial(self.basis[i]) {
                    let col = (0..width).find(|&j| !self.is_artificial(j) && !self.a[i][j].is_zero());
                    match col {
                        Some(j) => {
                            let mut dummy = vec![Rat::zero(); width];
                            let mut zz = Rat::zero();
                            self.pivot(i, j, &mut dummy, &mut zz);
                        }
                        None => {
                            self.a.remove(i);
                            self.b.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        // Phase 2.
        let mut cost = vec![Rat::zero(); width];
        for (v, c) in objective.terms() {
            for (j, role) in self.roles.iter().enumerate() {
                if let ColumnRole::Var(var, neg) = role {
                    if *var == v {
                        cost[j] = if *neg { -c } else { c.clone() };
                    }
                }
            }
        }
        let mut d = cost.clone();
        let mut z = Rat::zero();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &cost[bj];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.a[i].iter().enumerate() {
                if !v.is_zero() {
                    d[j] -= &(cb * v);
                }
            }
            z += &(cb * &self.b[i]);
        }
        for (j, dj) in d.iter_mut().enumerate() {
            if self.is_artificial(j) {
                *dj = Rat::zero();
            }
        }
        if !self.iterate(&mut d, &mut z, false)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut values = vec![Rat::zero(); prog.num_vars()];
        for (i, &bj) in self.basis.iter().enumerate() {
            if let ColumnRole::Var(v, neg) = self.roles[bj] {
                if neg {
                    values[v] -= &self.b[i];
                } else {
                    values[v] += &self.b[i];
                }
            }
        }
        let value = &z + objective.constant_part();
        Ok(LpOutcome::Optimal(Solution { value, values }))
    }
}

fn effective_cmp(cmp: Cmp, flip: bool) -> Cmp {
    match (cmp, flip) {
        (Cmp::Le, true) => Cmp::Ge,
        (Cmp::Ge, true) => Cmp::Le,
        (c, _) => c,
    }
}
