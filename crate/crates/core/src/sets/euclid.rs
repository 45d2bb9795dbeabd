//! Euclidean minimum-norm kernels.

use crate::error::Result;
use crate::lp::{LinExpr, LpOutcome, Program, Solution, VarKind};
use crate::rational::Rat;

/// Vertex count up to which polytope projection always enumerates faces.
pub(crate) const MAX_FACE_VERTICES: usize = 12;

/// Above [`MAX_FACE_VERTICES`], faces are still enumerated while the number
/// of candidate vertex subsets stays below this.
const MAX_FACE_SUBSETS: u64 = 250_000;

const KELLEY_ROUNDS: usize = 400;
const KELLEY_DEN: i64 = 1 << 44;

fn sq(v: &[Rat]) -> Rat {
    v.iter().map(Rat::square).sum()
}

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dedup(points: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

/// Exact solve of a square system; `None` when singular.
fn solve(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let k = &a[r][col] * &inv;
                #[allow(clippy::needless_range_loop)]
                for c in col..n {
                    let delta = &k * &a[col][c];
                    a[r][c] -= delta;
                }
                let delta = &k * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Squared distance from `x` to `conv(verts)` and the nearest point, by
/// enumerating affinely independent vertex subsets of size at most
/// `dim + 1`. `None` when there are too many subsets to enumerate.
pub(crate) fn project_polytope(x: &[Rat], verts: &[Vec<Rat>]) -> Option<(Rat, Vec<Rat>)> {
    let verts = dedup(verts);
    let k = verts.len();
    let dim = x.len();
    let top = (dim + 1).min(k);
    if k > MAX_FACE_VERTICES {
        let shifted: Vec<Vec<Rat>> = verts.iter().map(|v| sub(v, x)).collect();
        if let Some((d2, p)) = wolfe(&shifted) {
            let p = p.iter().zip(x).map(|(a, b)| a + b).collect();
            return Some((d2, p));
        }
        if subset_count(k, top) > MAX_FACE_SUBSETS {
            return None;
        }
    }
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    let mut idx = Vec::with_capacity(top);
    for size in 1..=top {
        for_subsets(k, size, 0, &mut idx, &mut |idx| {
            if let Some((d2, p)) = face_projection(x, &verts, idx) {
                if best.as_ref().is_none_or(|(b, _)| d2 < *b) {
                    best = Some((d2, p));
                }
            }
        });
    }
    best
}

const WOLFE_STEPS: usize = 10_000;

/// Wolfe's minimum-norm point of `conv(points)` in exact arithmetic.
/// `None` on a singular corral or when the step budget runs out.
fn wolfe(points: &[Vec<Rat>]) -> Option<(Rat, Vec<Rat>)> {
    let start = (0..points.len()).min_by(|&a, &b| sq(&points[a]).cmp(&sq(&points[b])))?;
    let mut corral = vec![start];
    let mut lam = vec![Rat::one()];
    let mut x = points[start].clone();
    for _ in 0..WOLFE_STEPS {
        let xx = sq(&x);
        let (j, xj) = points.iter().enumerate().map(|(j, p)| (j, dot(&x, p))).min_by(|a, b| a.1.cmp(&b.1))?;
        if xj >= xx || corral.contains(&j) {
            return Some((xx, x));
        }
        corral.push(j);
        lam.push(Rat::zero());
        loop {
            let alpha = affine_minimizer(points, &corral)?;
            if alpha.iter().all(Rat::is_positive) {
                x = combine(points, &corral, &alpha);
                lam = alpha;
                break;
            }
            // step from lam towards alpha until a weight hits zero
            let theta = lam
                .iter()
                .zip(&alpha)
                .filter(|(_, a)| !a.is_positive())
                .map(|(l, a)| l / &(l - a))
                .min()?;
            lam = lam
                .iter()
                .zip(&alpha)
                .map(|(l, a)| &(&theta * a) + &(&(Rat::one() - theta.clone()) * l))
                .collect();
            let keep: Vec<bool> = lam.iter().map(Rat::is_positive).collect();
            let mut k = 0;
            corral.retain(|_| {
                k += 1;
                keep[k - 1]
            });
            lam.retain(Rat::is_positive);
        }
    }
    None
}

/// Weights of the point of least norm in the affine hull of the corral.
fn affine_minimizer(points: &[Vec<Rat>], corral: &[usize]) -> Option<Vec<Rat>> {
    let m = corral.len();
    let mut a = vec![vec![Rat::zero(); m + 1]; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&points[corral[i]], &points[corral[j]]);
        }
        a[i][m] = Rat::one();
        a[m][i] = Rat::one();
    }
    let mut b = vec![Rat::zero(); m + 1];
    b[m] = Rat::one();
    let mut sol = solve(a, b)?;
    sol.truncate(m);
    Some(sol)
}

fn combine(points: &[Vec<Rat>], corral: &[usize], w: &[Rat]) -> Vec<Rat> {
    let mut x = vec![Rat::zero(); points[0].len()];
    for (&i, c) in corral.iter().zip(w) {
        for (xi, pi) in x.iter_mut().zip(&points[i]) {
            *xi += c * pi;
        }
    }
    x
}

fn subset_count(k: usize, top: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for j in 1..=top as u64 {
        c = c.saturating_mul(k as u64 + 1 - j) / j;
        total = total.saturating_add(c);
    }
    total
}

fn for_subsets(k: usize, size: usize, from: usize, idx: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if idx.len() == size {
        f(idx);
        return;
    }
    for i in from..=k - (size - idx.len()) {
        idx.push(i);
        for_subsets(k, size, i + 1, idx, f);
        idx.pop();
    }
}

/// Projection of `x` onto the affine hull of the chosen vertices, kept only
/// when it lies in their convex hull.
fn face_projection(x: &[Rat], verts: &[Vec<Rat>], idx: &[usize]) -> Option<(Rat, Vec<Rat>)> {
    let v0 = &verts[idx[0]];
    let edges: Vec<Vec<Rat>> = idx[1..].iter().map(|&i| sub(&verts[i], v0)).collect();
    let m = edges.len();
    let rel = sub(x, v0);
    let gram: Vec<Vec<Rat>> = (0..m).map(|i| (0..m).map(|j| dot(&edges[i], &edges[j])).collect()).collect();
    let rhs: Vec<Rat> = edges.iter().map(|e| dot(e, &rel)).collect();
    let mu = solve(gram, rhs)?;
    let rest = Rat::one() - mu.iter().cloned().sum::<Rat>();
    if rest.is_negative() || mu.iter().any(Rat::is_negative) {
        return None;
    }
    let mut p = v0.clone();
    for (e, c) in edges.iter().zip(&mu) {
        for (pi, ei) in p.iter_mut().zip(e) {
            *pi += c * ei;
        }
    }
    Some((sq(&sub(x, &p)), p))
}

fn lexmin(prog: &Program, objs: &[LinExpr]) -> Result<Option<Solution>> {
    Ok(prog.lex_minimize(objs)?.optimal())
}

/// `min t^2 + u^2` over a program in which `t, u >= 0` are variables, by
/// tracing the lower-left boundary of the feasible region's image in the
/// `(t, u)` plane. Exact: returns the squared optimum and a solution.
pub(crate) fn chain_min(prog: &Program, t: &LinExpr, u: &LinExpr) -> Result<Option<(Rat, Vec<Rat>)>> {
    let Some(a) = lexmin(prog, &[t.clone(), u.clone()])? else {
        return Ok(None);
    };
    let b = lexmin(prog, &[u.clone(), t.clone()])?.expect("feasible region");
    let pa = (a.eval(t), a.eval(u));
    let pb = (b.eval(t), b.eval(u));
    let mut chain = vec![pa.clone()];
    if pa != pb {
        refine(prog, t, u, &pa, &pb, &mut chain)?;
        chain.push(pb);
    }
    let mut best = (chain[0].0.square() + chain[0].1.square(), chain[0].clone());
    for seg in chain.windows(2) {
        let (p, q) = (&seg[0], &seg[1]);
        let (dt, du) = (&q.0 - &p.0, &q.1 - &p.1);
        let len2 = dt.square() + du.square();
        let lam = (-(&p.0 * &dt + &p.1 * &du) / &len2).max(Rat::zero()).min(Rat::one());
        let pt = (&p.0 + &(&lam * &dt), &p.1 + &(&lam * &du));
        let d2 = pt.0.square() + pt.1.square();
        if d2 < best.0 {
            best = (d2, pt);
        }
    }
    let mut pinned = prog.clone();
    pinned.le(t, &LinExpr::constant(best.1 .0.clone()));
    pinned.le(u, &LinExpr::constant(best.1 .1.clone()));
    let values = pinned.feasible_point()?.expect("chain points are feasible");
    Ok(Some((best.0, values)))
}

fn refine(
    prog: &Program,
    t: &LinExpr,
    u: &LinExpr,
    p: &(Rat, Rat),
    q: &(Rat, Rat),
    out: &mut Vec<(Rat, Rat)>,
) -> Result<()> {
    // Normal of the segment pq pointing into the region.
    let w = (&p.1 - &q.1, &q.0 - &p.0);
    let obj = &(t * &w.0) + &(u * &w.1);
    let sol = lexmin(prog, &[obj.clone(), t.clone()])?.expect("feasible region");
    let at_p = &w.0 * &p.0 + &w.1 * &p.1;
    if sol.eval(&obj) >= at_p {
        return Ok(());
    }
    let v = (sol.eval(t), sol.eval(u));
    refine(prog, t, u, p, &v, out)?;
    out.push(v.clone());
    refine(prog, t, u, &v, q, out)
}

/// `min ||d||_2` over a program by Kelley's cutting planes; approximate.
/// Returns the best upper bound found and the solution attaining it.
pub(crate) fn kelley(prog: &Program, d: &[LinExpr]) -> Result<Option<(f64, Vec<Rat>)>> {
    let mut p = prog.clone();
    let t = LinExpr::var(p.add_var(VarKind::NonNeg));
    for di in d {
        p.le(di, &t);
        p.le(&-di, &t);
    }
    let mut best: Option<(f64, Vec<Rat>)> = None;
    for _ in 0..KELLEY_ROUNDS {
        let sol = match p.minimize(&t)? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => unreachable!("t is bounded below by zero"),
        };
        let lb = sol.value.to_f64();
        let dv: Vec<f64> = d.iter().map(|e| sol.eval(e).to_f64()).collect();
        let ub = dv.iter().map(|v| v * v).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(b, _)| ub < *b) {
            best = Some((ub, sol.values.clone()));
        }
        let b = best.as_ref().expect("set above").0;
        if b - lb <= 1e-12 * b.max(1.0) || ub == 0.0 {
            break;
        }
        // Cut t >= <g, d> with ||g||_2 <= 1 so the cut is valid.
        let mut g: Vec<Rat> = dv.iter().map(|v| Rat::round_f64(v / ub, KELLEY_DEN)).collect();
        let n2 = sq(&g);
        if n2 > Rat::one() {
            let mut s = Rat::round_f64(n2.to_f64().sqrt(), KELLEY_DEN);
            while s.square() < n2 {
                s += Rat::new(1, KELLEY_DEN);
            }
            g = g.iter().map(|x| x / &s).collect();
        }
        let mut cut = LinExpr::zero();
        for (gi, di) in g.iter().zip(d) {
            cut.add_scaled(di, gi);
        }
        p.le(&cut, &t);
    }
    Ok(best)
}
