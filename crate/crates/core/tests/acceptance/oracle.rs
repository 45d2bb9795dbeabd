//! A small dense two-phase simplex over `BigRational` with Bland's rule.
//! It shares no code with the library's LP kernel and is only meant for
//! the handful of variables the acceptance instances need.

use num_rational::BigRational as Q;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

pub struct Lp {
    free: Vec<bool>,
    rows: Vec<(Vec<Q>, Cmp, Q)>,
}

pub enum Outcome {
    Optimal(Q),
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new() -> Lp {
        Lp {
            free: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable, free or non-negative, and returns its index.
    pub fn var(&mut self, free: bool) -> usize {
        self.free.push(free);
        self.free.len() - 1
    }

    pub fn vars(&mut self, k: usize, free: bool) -> Vec<usize> {
        (0..k).map(|_| self.var(free)).collect()
    }

    pub fn row(&mut self, terms: &[(usize, Q)], cmp: Cmp, rhs: Q) {
        let mut a = vec![Q::zero(); self.free.len()];
        for (j, c) in terms {
            a[*j] += c;
        }
        self.rows.push((a, cmp, rhs));
    }

    pub fn minimize(&self, objective: &[(usize, Q)]) -> Outcome {
        let nv = self.free.len();
        // columns: x+ for every variable, x- for free ones, one slack per inequality
        let mut col_of = Vec::with_capacity(nv);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push((ncols, f.then_some(ncols + 1)));
            ncols += if f { 2 } else { 1 };
        }
        let nslack = self.rows.iter().filter(|r| !matches!(r.1, Cmp::Eq)).count();
        let m = self.rows.len();
        let n = ncols + nslack;
        let width = n + m + 1;
        let mut t = vec![vec![Q::zero(); width]; m];
        let mut s = ncols;
        for (i, (a, cmp, b)) in self.rows.iter().enumerate() {
            let row = &mut t[i];
            for (j, c) in a.iter().enumerate().take(nv) {
                let (p, q) = col_of[j];
                row[p] = c.clone();
                if let Some(q) = q {
                    row[q] = -c.clone();
                }
            }
            match cmp {
                Cmp::Le => {
                    row[s] = Q::one();
                    s += 1;
                }
                Cmp::Ge => {
                    row[s] = -Q::one();
                    s += 1;
                }
                Cmp::Eq => {}
            }
            row[width - 1] = b.clone();
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[n + i] = Q::one();
        }
        let mut basis: Vec<usize> = (n..n + m).collect();

        let mut phase1 = vec![Q::zero(); n + m];
        for c in &mut phase1[n..] {
            *c = Q::one();
        }
        if !run(&mut t, &mut basis, &phase1, n + m) {
            unreachable!("phase one is bounded below by zero");
        }
        if value(&t, &basis, &phase1).is_positive() {
            return Outcome::Infeasible;
        }
        // drive zero-level artificials out where possible
        for i in 0..m {
            if basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, &mut basis, i, j);
                }
            }
        }

        let mut cost = vec![Q::zero(); n + m];
        for (j, c) in objective {
            let (p, q) = col_of[*j];
            cost[p] += c;
            if let Some(q) = q {
                cost[q] -= c;
            }
        }
        if !run(&mut t, &mut basis, &cost, n) {
            return Outcome::Unbounded;
        }
        Outcome::Optimal(value(&t, &basis, &cost))
    }
}

fn value(t: &[Vec<Q>], basis: &[usize], cost: &[Q]) -> Q {
    let rhs = t[0].len() - 1;
    basis.iter().enumerate().map(|(i, &b)| &cost[b] * &t[i][rhs]).sum()
}

/// Bland's rule over the first `allowed` columns; false when unbounded.
fn run(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], allowed: usize) -> bool {
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    loop {
        let entering = (0..allowed).find(|&j| {
            let r: Q = &cost[j] - basis.iter().enumerate().map(|(i, &b)| &cost[b] * &t[i][j]).sum::<Q>();
            r.is_negative()
        });
        let Some(j) = entering else {
            return true;
        };
        let mut best: Option<(Q, usize, usize)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][rhs] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some((r, _, b)) => ratio < *r || (ratio == *r && basis[i] < *b),
                };
                if better {
                    best = Some((ratio, i, basis[i]));
                }
            }
        }
        let Some((_, i, _)) = best else {
            return false;
        };
        pivot(t, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], i: usize, j: usize) {
    let p = t[i][j].clone();
    for v in t[i].iter_mut() {
        *v = &*v / &p;
    }
    let pr = t[i].clone();
    for (k, row) in t.iter_mut().enumerate() {
        if k != i && !row[j].is_zero() {
            let f = row[j].clone();
            for (v, w) in row.iter_mut().zip(&pr) {
                *v = &*v - &(&f * w);
            }
        }
    }
    basis[i] = j;
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Known answers; run once before the criteria.
pub fn self_check() {
    // min -x - y, x + 2y <= 4, 3x + y <= 6
    let mut lp = Lp::new();
    let (x, y) = (lp.var(false), lp.var(false));
    lp.row(&[(x, q(1)), (y, q(2))], Cmp::Le, q(4));
    lp.row(&[(x, q(3)), (y, q(1))], Cmp::Le, q(6));
    assert!(matches!(lp.minimize(&[(x, q(-1)), (y, q(-1))]), Outcome::Optimal(v) if v == Q::new((-14).into(), 5.into())));

    let mut lp = Lp::new();
    let z = lp.var(true);
    lp.row(&[(z, q(1))], Cmp::Ge, q(-3));
    assert!(matches!(lp.minimize(&[(z, q(1))]), Outcome::Optimal(v) if v == q(-3)));
    assert!(matches!(lp.minimize(&[(z, q(-1))]), Outcome::Unbounded));
    lp.row(&[(z, q(1))], Cmp::Le, q(-4));
    assert!(matches!(lp.minimize(&[(z, q(1))]), Outcome::Infeasible));
}
