//! Acceptance criteria, one line each. Runs without the test harness so the
//! lines always print; exits non-zero if any criterion fails.

mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_rational::BigRational as Q;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use convlab::scenario::builtins::{prop21b_set, prop25_witness, thm32_sequence};
use convlab::scenario::corpus::{
    coincidence_cases, epigraph_cases, separation_instances, CoincidenceCase, COINCIDENCE_SEED, EPIGRAPH_SEED,
    SEPARATION_SEED,
};
use convlab::scenario::builtin_repro;
use convlab::{
    build_prop25_renorm, construct_separating_sequence, distance, dual_norm_eval, exhaust_hyperplane,
    gap, gap_convergence_check, mosco_check, norm_eval, probe_w_star_kadec, probe_w_star_tau_kadec, separate,
    verify_certificate, wijsman_check, CertMode, CompactFamily, ConvexSet, FamilyKind, Functional,
    FunctionalSequence, NormSpec, ProbeStatus, Rat, Scalar, SeparationInstance, SetSequence, SliceCertificate,
    Status, TestFamily, Vector, Window,
};
use oracle::{Cmp, Lp, Outcome};

type Outcome1 = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn big(r: &Rat) -> Q {
    r.to_big()
}

fn exact(r: Rat) -> Scalar {
    Scalar::Exact(r)
}

fn tol9() -> Rat {
    Rat::pow10(-9)
}

// ---------------------------------------------------------------- oracle

/// `t >= norm(z)` for the polyhedral norms on window positions `0..d`.
fn norm_bound(lp: &mut Lp, norm: &NormSpec, z: &[usize]) -> usize {
    let one = || Q::from_integer(1.into());
    let t = lp.var(false);
    let forms: Vec<Vec<usize>> = match norm {
        NormSpec::SupC0 => (0..z.len()).map(|i| vec![i]).collect(),
        // |x0|, |x1| and |x_i + x1| for i >= 2
        NormSpec::BvC0 => (0..z.len()).map(|i| if i < 2 { vec![i] } else { vec![i, 1] }).collect(),
        NormSpec::Ell1 => {
            let s = lp.vars(z.len(), false);
            for (zi, si) in z.iter().zip(&s) {
                lp.row(&[(*zi, one()), (*si, -one())], Cmp::Le, Q::zero());
                lp.row(&[(*zi, one()), (*si, one())], Cmp::Ge, Q::zero());
            }
            let mut terms: Vec<(usize, Q)> = s.iter().map(|&si| (si, one())).collect();
            terms.push((t, -one()));
            lp.row(&terms, Cmp::Le, Q::zero());
            return t;
        }
        other => panic!("oracle has no formulation for {other:?}"),
    };
    for f in forms {
        let mut up: Vec<(usize, Q)> = f.iter().map(|&i| (z[i], one())).collect();
        let mut down = up.clone();
        up.push((t, -one()));
        down.push((t, one()));
        lp.row(&up, Cmp::Le, Q::zero());
        lp.row(&down, Cmp::Ge, Q::zero());
    }
    t
}

fn optimal(o: Outcome) -> Q {
    match o {
        Outcome::Optimal(v) => v,
        Outcome::Infeasible => panic!("oracle program infeasible"),
        Outcome::Unbounded => panic!("oracle program unbounded"),
    }
}

/// `min norm(x - y)` over `{ y : <g_k, y> = c_k }`, dense on `0..d`.
fn oracle_affine_distance(norm: &NormSpec, x: &[Q], eqs: &[(Vec<Q>, Q)]) -> Q {
    let mut lp = Lp::new();
    let z = lp.vars(x.len(), true);
    // y = x - z, so <g, z> = <g, x> - c
    for (g, c) in eqs {
        let gx: Q = g.iter().zip(x).map(|(a, b)| a * b).sum();
        let terms: Vec<(usize, Q)> = z.iter().zip(g).map(|(&zi, gi)| (zi, gi.clone())).collect();
        lp.row(&terms, Cmp::Eq, gx - c);
    }
    let t = norm_bound(&mut lp, norm, &z);
    optimal(lp.minimize(&[(t, Q::from_integer(1.into()))]))
}

/// `min norm(a - b)` over `a in conv(A)`, `b in conv(B)`.
fn oracle_gap(norm: &NormSpec, a: &[Vec<Q>], b: &[Vec<Q>]) -> Q {
    let one = || Q::from_integer(1.into());
    let d = a[0].len();
    let mut lp = Lp::new();
    let z = lp.vars(d, true);
    let la = lp.vars(a.len(), false);
    let mb = lp.vars(b.len(), false);
    for k in 0..d {
        let mut terms = vec![(z[k], one())];
        terms.extend(la.iter().zip(a).map(|(&l, v)| (l, -v[k].clone())));
        terms.extend(mb.iter().zip(b).map(|(&m, v)| (m, v[k].clone())));
        lp.row(&terms, Cmp::Eq, Q::zero());
    }
    lp.row(&la.iter().map(|&l| (l, one())).collect::<Vec<_>>(), Cmp::Eq, one());
    lp.row(&mb.iter().map(|&m| (m, one())).collect::<Vec<_>>(), Cmp::Eq, one());
    let t = norm_bound(&mut lp, norm, &z);
    optimal(lp.minimize(&[(t, one())]))
}

fn dense(v: &Vector) -> Vec<Q> {
    v.window().indices().iter().map(|&i| big(&v.get(i))).collect()
}

fn dense_f(f: &Functional) -> Vec<Q> {
    f.window().indices().iter().map(|&i| big(&f.get(i))).collect()
}

fn polytope_vertices(c: &ConvexSet) -> &[Vector] {
    match c {
        ConvexSet::Polytope { vertices } => vertices,
        other => panic!("expected a polytope, got {}", other.kind_name()),
    }
}

fn random_int_vector(rng: &mut ChaCha8Rng, w: &Window, span: i64) -> Vector {
    Vector::from_entries(w, w.indices().iter().map(|&i| (i, Rat::from_int(rng.gen_range(-span..=span))))).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, w: &Window, span: i64, den: i64) -> Vector {
    Vector::from_entries(
        w,
        w.indices().iter().map(|&i| (i, Rat::new(rng.gen_range(-span * den..=span * den), rng.gen_range(1..=den)))),
    )
    .unwrap()
}

// ------------------------------------------------------------- criteria

/// Exact values of the bvC0 construction and the Wijsman verdicts.
fn criterion1() -> Outcome1 {
    let start = Instant::now();
    let w = Window::range(0, 128);
    let norm = NormSpec::BvC0;
    let half = Rat::new(1, 2);
    let z0 = e(Vector::from_entries(&w, [(1, half.clone())]))?;
    // closed forms of the bvC0 norm and its dual on a window containing 0 and 1
    let bv_norm = |x: &Vector| -> Rat {
        let (x0, x1) = (x.get(0), x.get(1));
        let mut m = x0.abs().max(x1.abs());
        for (i, v) in x.entries() {
            if i >= 2 {
                m = m.max((v + &x1).abs());
            }
        }
        m
    };
    let bv_dual = |f: &Functional| -> Rat {
        let tail: Vec<Rat> = f.entries().filter(|(i, _)| *i >= 2).map(|(_, v)| v.clone()).collect();
        let sum: Rat = tail.iter().cloned().sum();
        let abs: Rat = tail.iter().map(|v| v.abs()).sum();
        f.get(0).abs() + (f.get(1) - sum).abs() + abs
    };
    let rows: Vec<Result<(), String>> = (2..=128usize)
        .into_par_iter()
        .map(|n| {
            let zn = e(Vector::from_entries(&w, [(0, half.clone()), (1, half.clone()), (n, half.clone())]))?;
            let fhat = e(Functional::from_entries(&w, [(1, Rat::one()), (n, Rat::one())]))?;
            let diff = e(z0.checked_sub(&zn))?;
            let lib_norm = e(norm_eval(&norm, &diff))?;
            let lib_dual = e(dual_norm_eval(&norm, &fhat))?;
            let lib_dist = e(distance(&z0, &e(prop21b_set(&w, Some(n)))?, &norm))?;
            ensure(lib_norm == exact(half.clone()) && bv_norm(&diff) == half, || {
                format!("norm(z0 - z_{n}) = {lib_norm}")
            })?;
            ensure(lib_dual == exact(Rat::one()) && bv_dual(&fhat) == Rat::one(), || {
                format!("dual_norm(fhat_{n}) = {lib_dual}")
            })?;
            // the oracle on coordinates 0, 1, n: other coordinates of y are free
            let x = vec![Q::zero(), big(&half), Q::zero()];
            let q = |v: i64| Q::from_integer(v.into());
            let eqs = vec![(vec![q(0), q(1), q(1)], q(1)), (vec![q(1), q(-1), q(0)], q(0))];
            let od = oracle_affine_distance(&norm, &x, &eqs);
            ensure(lib_dist == exact(half.clone()) && od == big(&half), || {
                format!("d(z0, C_{n}) = {lib_dist}, oracle {od}")
            })
        })
        .collect();
    for r in rows {
        r?;
    }
    let f_inf = e(Functional::unit(&w, 1))?;
    let lim_dual = e(dual_norm_eval(&norm, &f_inf))?;
    ensure(lim_dual == exact(Rat::one()) && bv_dual(&f_inf) == Rat::one(), || {
        format!("dual_norm(fhat_inf) = {lim_dual}")
    })?;
    let lim_dist = e(distance(&z0, &e(prop21b_set(&w, None))?, &norm))?;
    ensure(lim_dist == exact(Rat::one()), || format!("d(z0, C) = {lim_dist}"))?;

    let y = e(builtin_repro("prop21b_Y"))?;
    let x = e(builtin_repro("prop21b_X"))?;
    let wy = y.results.iter().find(|r| r.check == "wijsman").ok_or("no Y verdict")?;
    ensure(wy.observed == "supported", || format!("Y-scenario Wijsman {}", wy.observed))?;
    let wx = x.results.iter().find(|r| r.check == "wijsman").ok_or("no X verdict")?;
    let v = wx.verdict.as_ref().ok_or("X verdict missing")?;
    let wit = v.witness.as_ref().ok_or("X verdict has no witness")?;
    ensure(
        v.status == Status::Refuted
            && wit.object == "z0"
            && wit.lhs == exact(half.clone())
            && wit.rhs == exact(Rat::one()),
        || format!("X-scenario verdict {:?} witness {wit:?}", v.status),
    )?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(5), || format!("took {took:?}, limit 5 s"))?;
    Ok(format!(
        "127 indices exact, d(z0, C) = 1, Y supported, X refuted at n = {} with (z0, 1/2, 1)",
        wit.n
    ))
}

fn poly_norms() -> [NormSpec; 3] {
    [NormSpec::SupC0, NormSpec::Ell1, NormSpec::BvC0]
}

fn criterion2() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0002);
    for k in 0..100 {
        let norm = poly_norms()[k % 3].clone();
        let d = rng.gen_range(2..=8usize);
        let w = Window::range(0, d - 1);
        let mut f = random_int_vector(&mut rng, &w, 4).to_functional();
        if f.is_zero() {
            f = e(Functional::unit(&w, 0))?;
        }
        let a = Rat::new(rng.gen_range(-10..=10), rng.gen_range(1..=4));
        let x = random_vector(&mut rng, &w, 6, 3);
        let dist = e(distance(&x, &ConvexSet::hyperplane(f.clone(), a.clone()), &norm))?;
        let dual = e(dual_norm_eval(&norm, &f))?;
        let (Some(dv), Some(fv)) = (dist.as_rat(), dual.as_rat()) else {
            return Err(format!("instance {k}: non-exact values {dist}, {dual}"));
        };
        let rhs = (f.apply(&x) - &a).abs();
        ensure(dv * fv == rhs, || format!("instance {k}: {dv} * {fv} != {rhs}"))?;
        let od = oracle_affine_distance(&norm, &dense(&x), &[(dense_f(&f), big(&a))]);
        ensure(od == big(dv), || format!("instance {k} ({}): distance {dv}, oracle {od}", norm.name()))?;
    }
    Ok("100 instances, dims 2..8, identity and oracle agree exactly".into())
}

fn criterion3() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
    let mut done = 0;
    let mut k = 0;
    while done < 100 {
        let norm = poly_norms()[k % 3].clone();
        k += 1;
        let d = rng.gen_range(2..=4usize);
        let w = Window::range(0, d - 1);
        let off = random_int_vector(&mut rng, &w, 6);
        let na = rng.gen_range(1..=4);
        let nb = rng.gen_range(1..=4);
        let av: Vec<Vector> = (0..na).map(|_| random_int_vector(&mut rng, &w, 3)).collect();
        let bv: Vec<Vector> = (0..nb).map(|_| random_int_vector(&mut rng, &w, 3).checked_add(&off).unwrap()).collect();
        let og = oracle_gap(&norm, &av.iter().map(dense).collect::<Vec<_>>(), &bv.iter().map(dense).collect::<Vec<_>>());
        if !og.is_positive() {
            continue;
        }
        done += 1;
        let (a, b) = (e(ConvexSet::polytope(av.clone()))?, e(ConvexSet::polytope(bv.clone()))?);
        let g = e(gap(&a, &b, &norm))?;
        let s = e(separate(&a, &b, &norm))?;
        let margin = s.margin();
        ensure(g == exact(margin.clone()) && big(&margin) == og, || {
            format!("pair {done}: margin {margin}, gap {g}, oracle {og}")
        })?;
        // the margin from the functional itself, by vertex enumeration
        let sup_a = av.iter().map(|v| s.functional.apply(v)).max().unwrap();
        let inf_b = bv.iter().map(|v| s.functional.apply(v)).min().unwrap();
        ensure(&inf_b - &sup_a == margin, || format!("pair {done}: vertex margin {}", &inf_b - &sup_a))?;
        let nf = e(dual_norm_eval(&norm, &s.functional))?;
        ensure(nf == exact(Rat::one()), || format!("pair {done}: dual norm {nf}"))?;
    }
    Ok(format!("100 disjoint pairs ({k} drawn), margin = gap = oracle exactly"))
}

struct Row {
    id: String,
    truth: bool,
    wijsman: Status,
    compact: Status,
    weak: Status,
    slice: Status,
    mosco: Status,
    work: Duration,
}

fn corpus() -> &'static Vec<CoincidenceCase> {
    static C: OnceLock<Vec<CoincidenceCase>> = OnceLock::new();
    C.get_or_init(|| coincidence_cases(COINCIDENCE_SEED, 50, 128).expect("corpus builds"))
}

fn table() -> &'static Vec<Row> {
    static T: OnceLock<Vec<Row>> = OnceLock::new();
    T.get_or_init(|| {
        corpus()
            .par_iter()
            .map(|c| {
                let tol = tol9();
                let t0 = Instant::now();
                let wijsman = wijsman_check(&c.sequence, &c.points, &tol).unwrap().status;
                let slice = gap_convergence_check(&c.sequence, &c.bounded, &tol).unwrap().status;
                let mosco = mosco_check(&c.sequence, &c.points, &tol).unwrap().status;
                let work = t0.elapsed();
                Row {
                    id: c.id.clone(),
                    truth: c.limit_is_true,
                    wijsman,
                    compact: gap_convergence_check(&c.sequence, &c.compact, &tol).unwrap().status,
                    weak: gap_convergence_check(&c.sequence, &c.weak_compact, &tol).unwrap().status,
                    slice,
                    mosco,
                    work,
                }
            })
            .collect()
    })
}

fn criterion4() -> Outcome1 {
    let rows = table();
    let work: Duration = rows.iter().map(|r| r.work).sum();
    for r in rows {
        ensure(r.wijsman == r.slice && r.slice == r.mosco, || {
            format!("{}: wijsman {:?}, slice {:?}, mosco {:?}", r.id, r.wijsman, r.slice, r.mosco)
        })?;
    }
    ensure(work < Duration::from_secs(30), || format!("took {work:?}, limit 30 s"))?;
    let supported = rows.iter().filter(|r| r.wijsman == Status::Supported).count();
    let truthful = rows.iter().filter(|r| (r.wijsman == Status::Supported) == r.truth).count();
    Ok(format!(
        "50 sequences agree ({supported} supported, {} refuted, {truthful}/50 match the declared limit), {:.1} s",
        50 - supported,
        work.as_secs_f64()
    ))
}

fn thm32_instances() -> Result<Vec<SeparationInstance>, String> {
    let w = Window::range(0, 1);
    let seq = e(thm32_sequence(&w))?;
    let l = ConvexSet::hyperplane(e(Functional::unit(&w, 0))?, Rat::one());
    let ks = e(exhaust_hyperplane(&l, &Vector::zero(&w), 128, &Rat::from_int(4), &NormSpec::SupC0))?;
    ks.members()
        .iter()
        .enumerate()
        .map(|(i, k)| e(SeparationInstance::new(i + 1, i + 2, k.clone(), e(seq.set(i + 2))?, NormSpec::SupC0)))
        .collect()
}

/// `sup_{C_j} L + (1 - 1/n) <= min_{K_n} L` by vertex enumeration for a
/// polytope `C_j`, or from the halfspace `{x0 <= 1/j}` otherwise.
fn margin_holds(inst: &SeparationInstance, lam: &Functional) -> Result<bool, String> {
    let min_k = polytope_vertices(&inst.kn).iter().map(|v| lam.apply(v)).min().unwrap();
    let sup_c = match &inst.cj {
        ConvexSet::Polytope { vertices } => vertices.iter().map(|v| lam.apply(v)).max().unwrap(),
        ConvexSet::Halfspace { f, value, .. } => {
            // sup of L over {f <= value} is finite only for L = t f with t >= 0
            let t = lam.get(0) / f.get(0);
            let parallel = lam.window().indices().iter().all(|&i| lam.get(i) == &t * &f.get(i));
            if !parallel || t.is_negative() {
                return Ok(false);
            }
            &t * value
        }
        other => return Err(format!("unexpected C_j {}", other.kind_name())),
    };
    Ok(sup_c + inst.radius() <= min_k)
}

fn criterion5() -> Outcome1 {
    let rep = e(builtin_repro("thm32_separation"))?;
    ensure(rep.matched, || "thm32_separation report has mismatches".into())?;
    let thm = thm32_instances()?;
    for inst in &thm {
        let lam = e(construct_separating_sequence(inst))?;
        ensure(margin_holds(inst, &lam)?, || format!("margin fails at n = {}", inst.n))?;
    }
    let seeded = e(separation_instances(SEPARATION_SEED, 25))?;
    for (k, inst) in seeded.iter().enumerate() {
        let d = e(gap(&inst.kn, &inst.cj, &inst.norm))?;
        let h = Rat::recip_int(inst.n as i64);
        let ok = d.as_rat().is_some_and(|d| *d > Rat::one() - h.clone() && *d < Rat::one() + h);
        ensure(ok, || format!("seeded {k}: gap {d} outside the pattern"))?;
        let lam = e(construct_separating_sequence(inst))?;
        ensure(margin_holds(inst, &lam)?, || format!("seeded {k}: margin fails"))?;
    }
    Ok(format!("{} exhaustion steps and 25 seeded instances satisfy the margin exactly", thm.len()))
}

fn unit_directions(w: &Window) -> Vec<Functional> {
    let mut out = Vec::new();
    for &i in w.indices() {
        let f = Functional::unit(w, i).unwrap();
        out.push(f.neg());
        out.push(f);
    }
    out
}

fn argmax(verts: &[Vector], f: &Functional) -> Vector {
    verts.iter().max_by(|a, b| f.apply(a).cmp(&f.apply(b))).unwrap().clone()
}

fn criterion6() -> Outcome1 {
    let rows = table();
    let tol = tol9();
    let counts: Vec<Result<(usize, usize), String>> = corpus()
        .par_iter()
        .zip(rows.par_iter())
        .map(|(c, row)| {
            let seq = &c.sequence;
            let limit = polytope_vertices(seq.limit()).to_vec();
            let w = e(seq.limit().window())?;
            let weak: Vec<ConvexSet> = c.weak_compact.set_members().iter().map(|(_, s)| s.clone()).collect();
            let fam = e(CompactFamily::new(weak))?;
            let (mut norm_ok, mut mackey_ok) = (0, 0);
            for f in unit_directions(&w) {
                ensure(e(dual_norm_eval(&c.norm, &f))? == exact(Rat::one()), || "non-unit direction".into())?;
                let at = argmax(&limit, &f);
                let n_cert = SliceCertificate::constant(f.clone(), at.clone(), CertMode::Norm);
                if e(verify_certificate(&n_cert, seq, &tol))?.is_supported() {
                    norm_ok += 1;
                    ensure(row.slice == Status::Supported, || format!("{}: norm certificate without slice", c.id))?;
                }
                let g = f.clone();
                let m_cert = SliceCertificate::new(
                    f.clone(),
                    at,
                    move |n| Ok(g.scale(&(Rat::one() - Rat::recip_int(n as i64)))),
                    CertMode::Mackey(fam.clone()),
                );
                if e(verify_certificate(&m_cert, seq, &tol))?.is_supported() {
                    mackey_ok += 1;
                    ensure(row.weak == Status::Supported, || {
                        format!("{}: Mackey certificate without weak-compact gap", c.id)
                    })?;
                }
            }
            Ok((norm_ok, mackey_ok))
        })
        .collect();
    let (mut n_sup, mut m_sup) = (0, 0);
    for c in counts {
        let (a, b) = c?;
        n_sup += a;
        m_sup += b;
    }
    // the thm32 sequence: a supported certificate next to a slice verdict
    let w = Window::range(0, 1);
    let seq = e(thm32_sequence(&w))?;
    let cert = SliceCertificate::constant(e(Functional::unit(&w, 0))?, Vector::zero(&w), CertMode::Norm);
    let v = e(verify_certificate(&cert, &seq, &tol))?;
    let fams = aligned_families(&w, &mut ChaCha8Rng::seed_from_u64(0xacce_0006), &NormSpec::SupC0)?;
    let slice = e(gap_convergence_check(&seq, &fams.3, &tol))?;
    ensure(!v.is_supported() || slice.is_supported(), || "thm32: certificate without slice".into())?;
    ensure(n_sup > 0 && m_sup > 0, || format!("vacuous: {n_sup} norm and {m_sup} Mackey certificates supported"))?;
    Ok(format!("{n_sup} norm and {m_sup} Mackey certificates supported, 0 counterexamples"))
}

fn criterion7() -> Outcome1 {
    let w = Window::range(0, 128);
    let f = e(Functional::unit(&w, 1))?;
    let (w1, f1) = (w.clone(), f.clone());
    let fseq = e(FunctionalSequence::new(
        move |n| f1.checked_add(&Functional::unit(&w1, n)?),
        f.clone(),
        2,
        128,
        NormSpec::Ell1,
    ))?;
    for n in 2..=128 {
        let d = e(dual_norm_eval(&NormSpec::Ell1, &e(e(fseq.get(n))?.checked_sub(&f))?))?;
        ensure(d == exact(Rat::one()), || format!("||f_{n} - f|| = {d}"))?;
    }
    let pts: Vec<Vector> = (0..4).map(|i| Vector::unit(&w, i).unwrap()).collect();
    let k = e(probe_w_star_kadec(&fseq, &pts, &Rat::zero()))?;
    ensure(k.status == ProbeStatus::Fail, || format!("Kadec probe {:?}", k.status))?;
    let wit = k.witness.as_ref().ok_or("Kadec failure without witness")?;
    ensure(wit.value == exact(Rat::one()), || format!("Kadec witness value {}", wit.value))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
    let low = Window::range(0, 15);
    let mut families = 0;
    for _ in 0..20 {
        let members: Vec<ConvexSet> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let nv = rng.gen_range(1..=4);
                let verts = (0..nv)
                    .map(|_| e(random_int_vector(&mut rng, &low, 3).in_window(&w)))
                    .collect::<Result<Vec<_>, _>>()?;
                e(ConvexSet::polytope(verts))
            })
            .collect::<Result<_, _>>()?;
        let fam = e(CompactFamily::new(members))?;
        let t = e(probe_w_star_tau_kadec(&fseq, &pts, &fam, &Rat::zero()))?;
        ensure(t.status == ProbeStatus::Pass, || format!("tau probe {:?} on family {families}", t.status))?;
        families += 1;
    }
    for name in ["ell1_kadec_fail", "ell1_tau_pass"] {
        let r = e(builtin_repro(name))?;
        ensure(r.matched, || format!("{name} report has mismatches"))?;
    }
    Ok(format!("||f_n - f|| = 1 for 2 <= n <= 128, Kadec fails at n = {}, tau passes on {families} families", wit.n))
}

fn criterion8() -> Outcome1 {
    let w = Window::range(0, 128);
    let (_, _, failure) = e(prop25_witness(&w))?;
    let y = e(Vector::unit(&w, 0))?;
    let y_star = e(Functional::unit(&w, 0))?;
    let renorm = e(build_prop25_renorm(&failure, &y, &y_star))?;
    let one = exact(Rat::one());
    let mut worst = Scalar::NegInf;
    for (_, xj) in &failure.functionals {
        let v = e(dual_norm_eval(&renorm, &e(y_star.checked_add(xj))?))?;
        ensure(v.cmp_exact(&one).is_some_and(|o| o.is_le()), || format!("|||y* + x_j*||| = {v}"))?;
        worst = worst.max(v);
    }
    let at = e(dual_norm_eval(&renorm, &e(y_star.checked_add(&failure.limit))?))?;
    ensure(at == one, || format!("|||y* + x*||| = {at}"))?;
    let (w1, ys) = (w.clone(), y_star.clone());
    let moved = e(FunctionalSequence::new(
        move |n| ys.checked_add(&Functional::unit(&w1, n)?),
        y_star.clone(),
        1,
        128,
        renorm,
    ))?;
    let mut verts = vec![Vector::zero(&w)];
    verts.extend((1..=128).map(|j| Vector::unit(&w, j).unwrap()));
    let planted = e(CompactFamily::new(vec![e(ConvexSet::polytope(verts))?]))?;
    let pts: Vec<Vector> = (0..4).map(|i| Vector::unit(&w, i).unwrap()).collect();
    let t = e(probe_w_star_tau_kadec(&moved, &pts, &planted, &tol9()))?;
    ensure(t.status == ProbeStatus::Fail, || format!("tau probe {:?}", t.status))?;
    Ok(format!("max_j |||y* + x_j*||| = {worst}, |||y* + x*||| = {at}, tau probe fails on the planted set"))
}

fn criterion9() -> Outcome1 {
    let cases = e(epigraph_cases(EPIGRAPH_SEED, 12, 64))?;
    let tol = Rat::pow10(-6);
    let mut ell2 = 0;
    for c in &cases {
        let wij = e(wijsman_check(&c.sequence, &c.points, &tol))?;
        let slice = e(gap_convergence_check(&c.sequence, &c.bounded, &tol))?;
        ensure(wij.is_supported() && slice.is_supported(), || {
            format!("{} ({}): wijsman {:?}, slice {:?}", c.id, c.norm.name(), wij.status, slice.status)
        })?;
        if c.norm == NormSpec::product2(NormSpec::Ell2) {
            ell2 += 1;
        }
    }
    ensure(ell2 >= 4, || format!("only {ell2} Euclidean product cases"))?;
    Ok(format!("{} epigraph sequences supported ({ell2} under the Euclidean product norm)", cases.len()))
}

/// Points, their singletons, plus a polytope, plus a ball: aligned families.
fn aligned_families(
    w: &Window,
    rng: &mut ChaCha8Rng,
    norm: &NormSpec,
) -> Result<(TestFamily, TestFamily, TestFamily, TestFamily), String> {
    let pts: Vec<Vector> = (0..4).map(|_| random_vector(rng, w, 3, 2)).collect();
    aligned_from_points(w, pts, rng, norm)
}

fn aligned_from_points(
    w: &Window,
    pts: Vec<Vector>,
    rng: &mut ChaCha8Rng,
    norm: &NormSpec,
) -> Result<(TestFamily, TestFamily, TestFamily, TestFamily), String> {
    let singletons: Vec<ConvexSet> = pts.iter().map(|p| ConvexSet::point(p.clone())).collect();
    let mut weak = singletons.clone();
    weak.push(e(ConvexSet::polytope((0..3).map(|_| random_vector(rng, w, 3, 1)).collect()))?);
    let mut bounded = weak.clone();
    bounded.push(e(ConvexSet::ball(random_vector(rng, w, 3, 1), Rat::one(), norm.clone()))?);
    Ok((
        TestFamily::points(pts),
        e(TestFamily::sets(FamilyKind::Compact, singletons))?,
        e(TestFamily::sets(FamilyKind::WeakCompact, weak))?,
        e(TestFamily::sets(FamilyKind::Bounded, bounded))?,
    ))
}

fn nesting(
    id: &str,
    seq: &SetSequence,
    fams: &(TestFamily, TestFamily, TestFamily, TestFamily),
) -> Result<[Status; 4], String> {
    let tol = tol9();
    let s = [
        e(wijsman_check(seq, &fams.0, &tol))?.status,
        e(gap_convergence_check(seq, &fams.1, &tol))?.status,
        e(gap_convergence_check(seq, &fams.2, &tol))?.status,
        e(gap_convergence_check(seq, &fams.3, &tol))?.status,
    ];
    check_nesting(id, s[0], s[1], s[2], s[3])?;
    Ok(s)
}

fn check_nesting(id: &str, wij: Status, cpt: Status, weak: Status, slice: Status) -> Result<(), String> {
    let sup = |s: Status| s == Status::Supported;
    ensure(!sup(slice) || sup(weak), || format!("{id}: slice without weak-compact gap"))?;
    ensure(!sup(weak) || sup(cpt), || format!("{id}: weak-compact gap without compact gap"))?;
    ensure(sup(cpt) == sup(wij), || format!("{id}: compact gap {cpt:?} but Wijsman {wij:?}"))
}

fn criterion10() -> Outcome1 {
    let mut checked = 0;
    for r in table() {
        check_nesting(&r.id, r.wijsman, r.compact, r.weak, r.slice)?;
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0010);
    let w2 = Window::range(0, 1);
    nesting("thm32", &e(thm32_sequence(&w2))?, &aligned_families(&w2, &mut rng, &NormSpec::SupC0)?)?;
    checked += 1;

    let w = Window::range(0, 128);
    let half = Rat::new(1, 2);
    let mut y_pts = vec![
        Vector::zero(&w),
        e(Vector::from_entries(&w, [(0, Rat::one()), (1, Rat::one())]))?,
        e(Vector::from_entries(&w, [(0, half.clone()), (1, half.clone()), (2, half.clone())]))?,
        e(Vector::from_entries(&w, [(0, Rat::from_int(2)), (1, Rat::from_int(2)), (3, Rat::one())]))?,
    ];
    let w1 = w.clone();
    let seq = e(SetSequence::new(
        move |n| prop21b_set(&w1, Some(n)),
        e(prop21b_set(&w, None))?,
        2,
        128,
        NormSpec::BvC0,
    ))?;
    let y = nesting("prop21b_Y", &seq, &aligned_from_points(&w, y_pts.clone(), &mut rng, &NormSpec::BvC0)?)?;
    y_pts.push(e(Vector::from_entries(&w, [(1, half)]))?);
    let x = nesting("prop21b_X", &seq, &aligned_from_points(&w, y_pts, &mut rng, &NormSpec::BvC0)?)?;
    ensure(y[0] == Status::Supported && x[0] == Status::Refuted, || "prop21b verdicts changed".into())?;
    checked += 2;
    Ok(format!("{checked} sequences, no violation"))
}

type Criterion = (u32, &'static str, fn() -> Outcome1);

fn main() {
    oracle::self_check();
    let criteria: [Criterion; 10] = [
        (1, "bvC0 construction, exact", criterion1),
        (2, "hyperplane identity", criterion2),
        (3, "gap duality", criterion3),
        (4, "finite-dimensional coincidence", criterion4),
        (5, "separation margin", criterion5),
        (6, "certificate soundness", criterion6),
        (7, "l1 Kadec contrast", criterion7),
        (8, "renorming", criterion8),
        (9, "epigraph scenario", criterion9),
        (10, "nesting invariant", criterion10),
    ];
    let mut failed = 0;
    for (k, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k:>2} {name}: PASS ({detail}; {secs:.2} s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {k:>2} {name}: FAIL ({why}; {secs:.2} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
