//! Convergence certificates: recovery plus a limsup condition on a sequence
//! of functionals, and the separating functionals of the Wijsman/slice
//! construction.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::convergence::{condition, verdict, ConvergenceVerdict, Notion, Series, SetSequence};
use crate::error::{Error, Result};
use crate::kadec::VectorSequence;
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::{distance, gap, nearest_point, separate, support_value, CompactFamily, ConvexSet};
use crate::space::{dual_norm_eval, norm_eval, Functional, NormSpec, Vector};

/// How the certificate functionals must approach `x0*`.
#[derive(Debug, Clone)]
pub enum CertMode {
    Norm,
    Mackey(CompactFamily),
    WeakStar(Vec<Vector>),
}

impl CertMode {
    fn name(&self) -> &'static str {
        match self {
            CertMode::Norm => "norm",
            CertMode::Mackey(_) => "mackey",
            CertMode::WeakStar(_) => "weak_star",
        }
    }
}

#[derive(Clone)]
pub struct SliceCertificate {
    pub x0_star: Functional,
    pub attain_point: Vector,
    cert_seq: Arc<dyn Fn(usize) -> Result<Functional> + Send + Sync>,
    pub mode: CertMode,
}

impl SliceCertificate {
    pub fn new(
        x0_star: Functional,
        attain_point: Vector,
        cert_seq: impl Fn(usize) -> Result<Functional> + Send + Sync + 'static,
        mode: CertMode,
    ) -> SliceCertificate {
        SliceCertificate {
            x0_star,
            attain_point,
            cert_seq: Arc::new(cert_seq),
            mode,
        }
    }

    /// The certificate whose functionals are all `x0*`.
    pub fn constant(x0_star: Functional, attain_point: Vector, mode: CertMode) -> SliceCertificate {
        let f = x0_star.clone();
        SliceCertificate::new(x0_star, attain_point, move |_| Ok(f.clone()), mode)
    }

    pub fn functional(&self, n: usize) -> Result<Functional> {
        let f = (self.cert_seq)(n)?;
        f.same_window(&self.x0_star)?;
        Ok(f)
    }

    fn validate(&self, c: &ConvexSet, norm: &NormSpec) -> Result<()> {
        let one = Scalar::Exact(Rat::one());
        let nx = dual_norm_eval(norm, &self.x0_star)?;
        if nx != one {
            return Err(Error::Precondition(format!("||x0*|| = {nx}, expected 1")));
        }
        if !c.contains(&self.attain_point)? {
            return Err(Error::Precondition("the attain point is not in C".into()));
        }
        let at = Scalar::Exact(self.x0_star.apply(&self.attain_point));
        let sup = support_value(&self.x0_star, c)?;
        if at != sup {
            return Err(Error::Precondition(format!("<x0*, attain point> = {at} but sup_C x0* = {sup}")));
        }
        Ok(())
    }
}

impl fmt::Debug for SliceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SliceCertificate")
            .field("x0_star", &self.x0_star)
            .field("attain_point", &self.attain_point)
            .field("mode", &self.mode)
            .finish_non_exhaustive()
    }
}

/// Points of `C` used to test recovery.
fn samples(c: &ConvexSet, attain: &Vector) -> Vec<(String, Vector)> {
    let mut out = vec![("x0".to_string(), attain.clone())];
    match c {
        ConvexSet::Polytope { vertices } => {
            out.extend(vertices.iter().enumerate().map(|(i, v)| (format!("v{i}"), v.clone())));
        }
        ConvexSet::NormBall { center, .. } => out.push(("center".into(), center.clone())),
        _ => {}
    }
    out
}

struct CertTail {
    ns: Vec<usize>,
    fs: Vec<Functional>,
    sets: Vec<ConvexSet>,
}

fn cert_tail(cert: &SliceCertificate, seq: &SetSequence, norm: &NormSpec) -> Result<CertTail> {
    let tail = seq.tail()?;
    let fs: Vec<Functional> = tail
        .par_iter()
        .map(|(n, _)| {
            let f = cert.functional(*n)?;
            let nf = dual_norm_eval(norm, &f)?;
            if nf.total_cmp(&Scalar::Exact(Rat::one())).is_gt() {
                return Err(Error::Precondition(format!("certificate functional at n = {n} has dual norm {nf} > 1")));
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let (ns, sets) = tail.into_iter().unzip();
    Ok(CertTail { ns, fs, sets })
}

/// `max(0, sup_{C_n} x_n* - sup_C x0*) -> 0`.
fn limsup_series(cert: &SliceCertificate, seq: &SetSequence, t: &CertTail) -> Result<Series> {
    let sup_c = support_value(&cert.x0_star, seq.limit())?;
    let rows = t
        .ns
        .par_iter()
        .zip(t.fs.par_iter().zip(t.sets.par_iter()))
        .map(|(n, (f, c))| {
            let s = support_value(f, c)?;
            let excess = match (&s, &sup_c) {
                (Scalar::NegInf, _) => Scalar::zero(),
                (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact((a - b).max(Rat::zero())),
                (Scalar::PosInf, _) => Scalar::PosInf,
                (a, b) => Scalar::Approx((a.to_f64() - b.to_f64()).max(0.0)),
            };
            Ok((*n, excess))
        })
        .collect::<Result<_>>()?;
    Ok(Series {
        object: "sup_{C_n} x_n* - sup_C x0*".into(),
        target: Scalar::zero(),
        rows,
    })
}

fn mode_series(cert: &SliceCertificate, t: &CertTail, norm: &NormSpec) -> Result<Vec<Series>> {
    let x0 = &cert.x0_star;
    let diffs: Vec<Functional> = t.fs.iter().map(|f| f.checked_sub(x0)).collect::<Result<_>>()?;
    Ok(match &cert.mode {
        CertMode::Norm => vec![Series {
            object: "dual_norm(x_n* - x0*)".into(),
            target: Scalar::zero(),
            rows: t
                .ns
                .par_iter()
                .zip(diffs.par_iter())
                .map(|(n, d)| Ok((*n, dual_norm_eval(norm, d)?)))
                .collect::<Result<_>>()?,
        }],
        CertMode::Mackey(fam) => (0..fam.members().len())
            .map(|k| Series {
                object: format!("sup_K{k}|x_n* - x0*|"),
                target: Scalar::zero(),
                rows: t
                    .ns
                    .iter()
                    .zip(&diffs)
                    .map(|(n, d)| (*n, Scalar::Exact(fam.vertex_sup_abs(k, d).0)))
                    .collect(),
            })
            .collect(),
        CertMode::WeakStar(pts) => pts
            .iter()
            .enumerate()
            .map(|(i, p)| Series {
                object: format!("<x_n*, p{i}>"),
                target: Scalar::Exact(x0.apply(p)),
                rows: t.ns.iter().zip(&t.fs).map(|(n, f)| (*n, Scalar::Exact(f.apply(p)))).collect(),
            })
            .collect(),
    })
}

/// Recovery of sampled points of `C`, the limsup condition, and the
/// convergence of the certificate functionals in the certificate's mode.
pub fn verify_certificate(cert: &SliceCertificate, seq: &SetSequence, tol: &Rat) -> Result<ConvergenceVerdict> {
    let norm = seq.norm();
    cert.validate(seq.limit(), norm)?;
    let t = cert_tail(cert, seq, norm)?;
    let recovery: Vec<Series> = samples(seq.limit(), &cert.attain_point)
        .into_iter()
        .map(|(id, x)| {
            Ok(Series {
                object: format!("d({id}, C_n)"),
                target: Scalar::zero(),
                rows: t
                    .ns
                    .par_iter()
                    .zip(t.sets.par_iter())
                    .map(|(n, c)| Ok((*n, distance(&x, c, norm)?)))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    let limsup = vec![limsup_series(cert, seq, &t)?];
    let mode = mode_series(cert, &t, norm)?;
    let parts = [("(i)", recovery), ("limsup", limsup), (cert.mode.name(), mode)]
        .into_iter()
        .map(|(name, s)| {
            let (c, ex) = condition(name, &s, tol);
            (c, ex, s)
        })
        .collect();
    Ok(verdict(Notion::SliceCertificate, seq.horizon(), seq.tail_start(), tol, parts))
}

/// The Wijsman form: explicit recovery points `x_n ∈ C_n` approaching the
/// attain point, weak-star convergent certificate functionals, and the
/// limsup condition.
pub fn verify_wijsman_certificate(
    cert: &SliceCertificate,
    seq: &SetSequence,
    recovery: &VectorSequence,
    tol: &Rat,
) -> Result<ConvergenceVerdict> {
    if !matches!(cert.mode, CertMode::WeakStar(_)) {
        return Err(Error::Precondition("Wijsman certificates use weak-star mode".into()));
    }
    let norm = seq.norm();
    cert.validate(seq.limit(), norm)?;
    let t = cert_tail(cert, seq, norm)?;
    let x0 = &cert.attain_point;
    let rows: Vec<(usize, Scalar)> = t
        .ns
        .par_iter()
        .zip(t.sets.par_iter())
        .map(|(n, c)| {
            let xn = recovery.get(*n)?;
            if !c.contains(&xn)? {
                return Err(Error::Precondition(format!("recovery point at n = {n} is not in C_n")));
            }
            Ok((*n, norm_eval(norm, &xn.checked_sub(x0)?)?))
        })
        .collect::<Result<_>>()?;
    let rec = vec![Series {
        object: "|x_n - x0|".into(),
        target: Scalar::zero(),
        rows,
    }];
    let limsup = vec![limsup_series(cert, seq, &t)?];
    let mode = mode_series(cert, &t, norm)?;
    let parts = [("(i)", rec), ("limsup", limsup), ("weak_star", mode)]
        .into_iter()
        .map(|(name, s)| {
            let (c, ex) = condition(name, &s, tol);
            (c, ex, s)
        })
        .collect();
    Ok(verdict(Notion::WijsmanCertificate, seq.horizon(), seq.tail_start(), tol, parts))
}

/// Recovery points by nearest-point selection: `x_n` is a point of `C_n`
/// nearest to `x0`.
pub fn nearest_recovery(seq: &SetSequence, x0: &Vector) -> Result<VectorSequence> {
    let s = seq.clone();
    let x = x0.clone();
    VectorSequence::new(
        move |n| match nearest_point(&x, &s.set(n)?, s.norm())? {
            Some((_, p)) => Ok(p),
            None => Err(Error::Precondition(format!("C_{n} is empty"))),
        },
        x0.clone(),
        seq.start(),
        seq.horizon(),
    )
}

/// One step of the separation construction: `K_n` compact inside the
/// hyperplane `L`, `C_j` a member of the sequence.
#[derive(Debug, Clone)]
pub struct SeparationInstance {
    pub n: usize,
    pub j: usize,
    pub kn: ConvexSet,
    pub cj: ConvexSet,
    pub norm: NormSpec,
}

impl SeparationInstance {
    pub fn new(n: usize, j: usize, kn: ConvexSet, cj: ConvexSet, norm: NormSpec) -> Result<SeparationInstance> {
        if n == 0 {
            return Err(Error::Precondition("n starts at 1".into()));
        }
        if !matches!(kn, ConvexSet::Polytope { .. }) {
            return Err(Error::InvalidSet(format!("K_n must be a polytope, got {}", kn.kind_name())));
        }
        if kn.window()? != cj.window()? {
            return Err(Error::WindowMismatch);
        }
        Ok(SeparationInstance { n, j, kn, cj, norm })
    }

    /// `1 - 1/n`.
    pub fn radius(&self) -> Rat {
        Rat::one() - Rat::recip_int(self.n as i64)
    }

    /// The ball `(1 - 1/n) B`.
    pub fn ball(&self) -> Result<ConvexSet> {
        ConvexSet::ball(Vector::zero(&self.kn.window()?), self.radius(), self.norm.clone())
    }

    /// Checks `1 - 1/n < d(K_n, C_j) < 1 + 1/n`, returning the gap.
    pub fn check_gap_pattern(&self) -> Result<Rat> {
        let d = gap(&self.kn, &self.cj, &self.norm)?;
        let Scalar::Exact(d) = d else {
            return Err(Error::NonRational(format!("gap {d}")));
        };
        let h = Rat::recip_int(self.n as i64);
        let lo = Rat::one() - h.clone();
        let hi = Rat::one() + h;
        if !(lo < d && d < hi) {
            return Err(Error::Precondition(format!(
                "gap pattern violated at n = {}, j = {}: need {lo} < d(K_n, C_j) = {d} < {hi}",
                self.n, self.j
            )));
        }
        Ok(d)
    }
}

/// A unit functional `L` with `sup_{C_j} L + (1 - 1/n) <= min_{K_n} L`,
/// re-verified exactly from support values.
pub fn construct_separating_sequence(inst: &SeparationInstance) -> Result<Functional> {
    inst.check_gap_pattern()?;
    // Maximal margin between C_j and K_n: the Minkowski difference K_n - C_j
    // never materializes, both support bounds live in one program.
    let sep = separate(&inst.cj, &inst.kn, &inst.norm)?;
    let lam = sep.functional;
    let nl = dual_norm_eval(&inst.norm, &lam)?;
    if nl != Scalar::Exact(Rat::one()) {
        return Err(Error::Precondition(format!("separating functional has dual norm {nl}")));
    }
    let ok = separation_holds(inst, &lam)?;
    if !ok {
        return Err(Error::Precondition("separating functional misses the margin 1 - 1/n".into()));
    }
    Ok(lam)
}

/// `sup_{C_j} L + (1 - 1/n) <= min_{K_n} L`, from support values.
pub fn separation_holds(inst: &SeparationInstance, lam: &Functional) -> Result<bool> {
    let sup_c = support_value(lam, &inst.cj)?;
    let min_k = support_value(&lam.neg(), &inst.kn)?;
    Ok(match (sup_c, min_k) {
        (Scalar::Exact(s), Scalar::Exact(m)) => &s + &inst.radius() <= -m,
        (Scalar::NegInf, _) => true,
        _ => false,
    })
}

/// Nested polytopes `K_1 ⊂ K_2 ⊂ ...` inside the hyperplane `L = {f = a}`:
/// boxes of half-width `(1 - 1/n) M` around a point of `L` nearest to the
/// anchor, in the coordinates other than a pivot, with `d(K_n, anchor) <
/// 1 + 1/n` verified.
pub fn exhaust_hyperplane(
    l: &ConvexSet,
    anchor: &Vector,
    count: usize,
    m: &Rat,
    norm: &NormSpec,
) -> Result<CompactFamily> {
    let ConvexSet::Hyperplane { f, value } = l else {
        return Err(Error::InvalidSet(format!("expected a hyperplane, got {}", l.kind_name())));
    };
    if count == 0 || !m.is_positive() {
        return Err(Error::Precondition("count and M must be positive".into()));
    }
    let w = l.window()?;
    if anchor.window() != &w {
        return Err(Error::WindowMismatch);
    }
    if l.contains(anchor)? {
        return Err(Error::Precondition("the anchor lies on L".into()));
    }
    let Some((_, base)) = nearest_point(anchor, l, norm)? else {
        return Err(Error::InvalidSet("L is empty".into()));
    };
    let pivot = f
        .entries()
        .max_by(|a, b| a.1.abs().cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidSet("L has a zero normal".into()))?;
    let free: Vec<usize> = w.indices().iter().copied().filter(|&i| i != pivot).collect();
    if free.len() > 12 {
        return Err(Error::Unsupported(format!("box sections in {} free coordinates", free.len())));
    }
    let fp = f.get(pivot);
    let mut members = Vec::with_capacity(count);
    for n in 1..=count {
        let half = m * &(Rat::one() - Rat::recip_int(n as i64));
        let mut verts = Vec::new();
        for mask in 0..1u32 << free.len() {
            let mut v = base.clone();
            for (b, &i) in free.iter().enumerate() {
                let s = if mask >> b & 1 == 1 { -&half } else { half.clone() };
                v.try_set(i, &base.get(i) + &s)?;
            }
            // Restore f(v) = a through the pivot coordinate.
            let off = value - &f.apply(&v);
            v.try_set(pivot, &v.get(pivot) + &(&off / &fp))?;
            verts.push(v);
        }
        let k = ConvexSet::polytope(verts)?;
        let d = gap(&k, &ConvexSet::point(anchor.clone()), norm)?;
        let bound = Scalar::Exact(Rat::one() + Rat::recip_int(n as i64));
        if !d.total_cmp(&bound).is_lt() {
            return Err(Error::Precondition(format!("d(K_{n}, anchor) = {d} is not below {bound}")));
        }
        members.push(k);
    }
    CompactFamily::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::Status;
    use crate::sets::Direction;
    use crate::space::Window;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn sup_ball(w: &Window, radius: Rat) -> ConvexSet {
        ConvexSet::ball(Vector::zero(w), radius, NormSpec::SupC0).unwrap()
    }

    fn shrinking(w: &Window) -> SetSequence {
        let w2 = w.clone();
        SetSequence::new(
            move |n| Ok(sup_ball(&w2, Rat::one() + Rat::recip_int(n as i64))),
            sup_ball(w, Rat::one()),
            1,
            64,
            NormSpec::SupC0,
        )
        .unwrap()
    }

    #[test]
    fn certificate_on_shrinking_balls() {
        let w = Window::range(0, 1);
        let x0 = Functional::unit(&w, 0).unwrap();
        let at = Vector::unit(&w, 0).unwrap();
        let cert = SliceCertificate::constant(x0.clone(), at.clone(), CertMode::Norm);
        let v = verify_certificate(&cert, &shrinking(&w), &Rat::zero()).unwrap();
        assert_eq!(v.status, Status::Supported, "{:?}", v.conditions);
        assert_eq!(v.conditions.len(), 3);

        let planted = SliceCertificate::new(
            x0.clone(),
            at.clone(),
            {
                let x0 = x0.clone();
                move |_| Ok(x0.clone())
            },
            CertMode::Norm,
        );
        // C_n = B_2 makes sup_{C_n} x0* = sup_C x0* + 1 for every n.
        let w2 = w.clone();
        let seq = SetSequence::new(move |_| Ok(sup_ball(&w2, r(2, 1))), sup_ball(&w, Rat::one()), 1, 64, NormSpec::SupC0)
            .unwrap();
        let v = verify_certificate(&planted, &seq, &Rat::zero()).unwrap();
        assert_eq!(v.status, Status::Refuted);
        assert_eq!(v.condition("limsup").unwrap().status, Status::Refuted);
    }

    #[test]
    fn certificate_invariants() {
        let w = Window::range(0, 1);
        let half = Functional::from_fracs(&w, &[(0, 1, 2)]).unwrap();
        let cert = SliceCertificate::constant(half, Vector::unit(&w, 0).unwrap(), CertMode::Norm);
        assert!(verify_certificate(&cert, &shrinking(&w), &Rat::zero()).is_err());
        let x0 = Functional::unit(&w, 0).unwrap();
        let cert = SliceCertificate::constant(x0, Vector::zero(&w), CertMode::Norm);
        assert!(verify_certificate(&cert, &shrinking(&w), &Rat::zero()).is_err());
    }

    #[test]
    fn wijsman_certificate() {
        let w = Window::range(0, 1);
        let x0 = Functional::unit(&w, 0).unwrap();
        let at = Vector::unit(&w, 0).unwrap();
        let pts = vec![Vector::unit(&w, 0).unwrap(), Vector::unit(&w, 1).unwrap()];
        let cert = SliceCertificate::constant(x0, at.clone(), CertMode::WeakStar(pts));
        let seq = SetSequence::constant(sup_ball(&w, Rat::one()), 1, 64, NormSpec::SupC0).unwrap();
        let rec = nearest_recovery(&seq, &at).unwrap();
        let v = verify_wijsman_certificate(&cert, &seq, &rec, &Rat::zero()).unwrap();
        assert_eq!(v.status, Status::Supported);

        let frozen = VectorSequence::new(|_| Ok(Vector::zero(&Window::range(0, 1))), at, 1, 64).unwrap();
        let v = verify_wijsman_certificate(&cert, &seq, &frozen, &Rat::zero()).unwrap();
        assert_eq!(v.condition("(i)").unwrap().status, Status::Refuted);
    }

    fn left_halfspace(w: &Window, bound: Rat) -> ConvexSet {
        ConvexSet::halfspace(Functional::unit(w, 0).unwrap(), bound, Direction::Le)
    }

    #[test]
    fn one_dimensional_separation() {
        let w = Window::range(0, 1);
        let k = ConvexSet::polytope(vec![Vector::unit(&w, 0).unwrap()]).unwrap();
        let inst = SeparationInstance::new(4, 5, k, left_halfspace(&w, Rat::zero()), NormSpec::SupC0).unwrap();
        assert_eq!(inst.check_gap_pattern().unwrap(), Rat::one());
        let lam = construct_separating_sequence(&inst).unwrap();
        assert_eq!(lam, Functional::unit(&w, 0).unwrap());
        assert!(separation_holds(&inst, &lam).unwrap());

        // d = 2 and d = 1 + 1/n both leave the window of the gap pattern.
        for far in [r(2, 1), r(5, 4)] {
            let k = ConvexSet::polytope(vec![Vector::from_entries(&w, [(0, far)]).unwrap()]).unwrap();
            let inst = SeparationInstance::new(4, 5, k, left_halfspace(&w, Rat::zero()), NormSpec::SupC0).unwrap();
            assert!(matches!(construct_separating_sequence(&inst), Err(Error::Precondition(_))));
        }
    }

    #[test]
    fn hyperplane_exhaustion() {
        let w = Window::range(0, 1);
        let l = ConvexSet::hyperplane(Functional::unit(&w, 0).unwrap(), Rat::one());
        let fam = exhaust_hyperplane(&l, &Vector::zero(&w), 6, &r(3, 1), &NormSpec::SupC0).unwrap();
        let ms = fam.members();
        assert_eq!(ms.len(), 6);
        for (i, k) in ms.iter().enumerate() {
            let ConvexSet::Polytope { vertices } = k else { unreachable!() };
            for v in vertices {
                assert!(l.contains(v).unwrap());
                if let Some(next) = ms.get(i + 1) {
                    assert!(next.contains(v).unwrap());
                }
            }
        }
        let ConvexSet::Polytope { vertices } = &ms[3] else { unreachable!() };
        assert!(vertices.contains(&Vector::from_fracs(&w, &[(0, 1, 1), (1, 9, 4)]).unwrap()));
        assert_eq!(exhaust_hyperplane(&l, &Vector::zero(&w), 1, &r(3, 1), &NormSpec::SupC0).unwrap().members().len(), 1);
        assert!(exhaust_hyperplane(&l, &Vector::unit(&w, 0).unwrap(), 3, &Rat::one(), &NormSpec::SupC0).is_err());
    }
}
