//! Seeded random instances behind the built-in reproductions.
//!
//! Every generator takes an explicit seed; the same seed gives the same
//! instances on every platform (ChaCha8, integer coordinates).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificates::SeparationInstance;
use crate::convergence::{FamilyKind, SetSequence, TestFamily};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::{epigraph_build, gap, ConvexSet, PolyFunc};
use crate::space::{NormSpec, Vector, Window};

pub const COINCIDENCE_SEED: u64 = 0x5eed_0004;
pub const SEPARATION_SEED: u64 = 0x5eed_0005;
pub const EPIGRAPH_SEED: u64 = 0x5eed_0009;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(rng: &mut ChaCha8Rng, w: &Window, span: i64, den: i64) -> Vector {
    let entries: Vec<(usize, Rat)> = w
        .indices()
        .iter()
        .map(|&i| (i, Rat::new(rng.gen_range(-span * den..=span * den), den)))
        .collect();
    Vector::from_entries(w, entries).expect("indices come from the window")
}

/// Vertex lists with at least two distinct points.
fn random_vertices(rng: &mut ChaCha8Rng, w: &Window, count: usize, span: i64) -> Vec<Vector> {
    loop {
        let vs: Vec<Vector> = (0..count).map(|_| random_vector(rng, w, span, 1)).collect();
        if vs.iter().any(|v| v != &vs[0]) {
            return vs;
        }
    }
}

fn affine_image(vs: &[Vector], scale: &Rat, shift: &Vector) -> Result<Vec<Vector>> {
    vs.iter().map(|v| v.scale(scale).checked_add(shift)).collect()
}

/// A polytope sequence `C_n = (1 + c/n) P + s/n` with its test families.
#[derive(Debug, Clone)]
pub struct CoincidenceCase {
    pub id: String,
    pub norm: NormSpec,
    pub sequence: SetSequence,
    /// Whether the declared limit is the true limit `P`.
    pub limit_is_true: bool,
    pub points: TestFamily,
    pub compact: TestFamily,
    pub weak_compact: TestFamily,
    pub bounded: TestFamily,
}

/// Every fifth case declares a translate of `P` as its limit. Test points
/// include the vertices of the declared limit, so a wrong limit is visible
/// to all three notions.
pub fn coincidence_cases(seed: u64, count: usize, horizon: usize) -> Result<Vec<CoincidenceCase>> {
    let mut rng = rng(seed);
    let norms = [NormSpec::SupC0, NormSpec::Ell1, NormSpec::Ell2];
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let norm = norms[k % norms.len()].clone();
        let dim = rng.gen_range(2..=3);
        let w = Window::range(0, dim - 1);
        let nv = rng.gen_range(3..=4);
        let p = random_vertices(&mut rng, &w, nv, 3);
        let c = rng.gen_range(0..=2i64);
        let s = random_vector(&mut rng, &w, 2, 1);
        let limit_is_true = k % 5 != 4;
        let declared = if limit_is_true {
            p.clone()
        } else {
            let mut t = random_vector(&mut rng, &w, 2, 1);
            if t.is_zero() {
                t = Vector::unit(&w, 0)?;
            }
            affine_image(&p, &Rat::one(), &t)?
        };
        let gen_p = p.clone();
        let sequence = SetSequence::new(
            move |n| {
                let n = n as i64;
                let scale = Rat::one() + Rat::new(c, n);
                ConvexSet::polytope(affine_image(&gen_p, &scale, &s.scale(&Rat::recip_int(n)))?)
            },
            ConvexSet::polytope(declared.clone())?,
            1,
            horizon,
            norm.clone(),
        )?;

        let mut pts: Vec<(String, Vector)> =
            declared.iter().enumerate().map(|(i, v)| (format!("v{i}"), v.clone())).collect();
        for i in 0..2 {
            pts.push((format!("r{i}"), random_vector(&mut rng, &w, 4, 2)));
        }
        let singletons: Vec<(String, ConvexSet)> =
            pts.iter().map(|(id, p)| (format!("{{{id}}}"), ConvexSet::point(p.clone()))).collect();
        let extra_poly = ConvexSet::polytope(random_vertices(&mut rng, &w, 3, 4))?;
        let ball = ConvexSet::ball(random_vector(&mut rng, &w, 4, 1), Rat::one(), norm.clone())?;
        let mut weak = singletons.clone();
        weak.push(("P'".into(), extra_poly.clone()));
        let mut bounded = weak.clone();
        bounded.push(("B".into(), ball));
        out.push(CoincidenceCase {
            id: format!("seq{k:02}"),
            norm,
            sequence,
            limit_is_true,
            points: TestFamily::named_points(pts),
            compact: TestFamily::named_sets(FamilyKind::Compact, singletons)?,
            weak_compact: TestFamily::named_sets(FamilyKind::WeakCompact, weak)?,
            bounded: TestFamily::named_sets(FamilyKind::Bounded, bounded)?,
        });
    }
    Ok(out)
}

/// Disjoint polytope pairs rescaled so that `1 - 1/n < d(K, C) < 1 + 1/n`.
pub fn separation_instances(seed: u64, count: usize) -> Result<Vec<SeparationInstance>> {
    let mut rng = rng(seed);
    let norms = [NormSpec::SupC0, NormSpec::Ell1, NormSpec::BvC0];
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let norm = norms[k % norms.len()].clone();
        k += 1;
        let dim = rng.gen_range(2..=3);
        let w = Window::range(0, dim - 1);
        let kv = rng.gen_range(1..=4);
        let cv = rng.gen_range(1..=4);
        let kn = ConvexSet::polytope((0..kv).map(|_| random_vector(&mut rng, &w, 2, 1)).collect())?;
        let offset = random_vector(&mut rng, &w, 6, 1);
        let cj = ConvexSet::polytope(
            (0..cv)
                .map(|_| random_vector(&mut rng, &w, 2, 1).checked_add(&offset))
                .collect::<Result<_>>()?,
        )?;
        let Scalar::Exact(g) = gap(&kn, &cj, &norm)? else {
            return Err(Error::NonRational("polyhedral gap".into()));
        };
        if !g.is_positive() {
            continue;
        }
        let n = rng.gen_range(2..=12usize);
        let delta = Rat::new(rng.gen_range(-1..=1), 2 * n as i64);
        let s = &(Rat::one() + delta) / &g;
        out.push(SeparationInstance::new(n, n + 1, kn.scaled(&s)?, cj.scaled(&s)?, norm)?);
    }
    Ok(out)
}

/// Indicator epigraphs of `(1 + 1/n) C` in `X x R` under the product norm.
#[derive(Debug, Clone)]
pub struct EpigraphCase {
    pub id: String,
    pub norm: NormSpec,
    pub sequence: SetSequence,
    pub points: TestFamily,
    pub bounded: TestFamily,
}

pub fn epigraph_cases(seed: u64, count: usize, horizon: usize) -> Result<Vec<EpigraphCase>> {
    let mut rng = rng(seed);
    let inners = [NormSpec::Ell2, NormSpec::SupC0, NormSpec::Ell1];
    let base = Window::range(0, 1);
    let w = base.with_scalar_slot();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let inner = inners[k % inners.len()].clone();
        let norm = NormSpec::product2(inner.clone());
        let nv = rng.gen_range(3..=4);
        let c = random_vertices(&mut rng, &base, nv, 3);
        let epi = |scale: &Rat| -> Result<ConvexSet> {
            let f = PolyFunc::indicator(affine_image(&c, scale, &Vector::zero(&base))?)?;
            Ok(epigraph_build(&f, &inner))
        };
        let limit = epi(&Rat::one())?;
        let (c2, inner2, base2) = (c.clone(), inner.clone(), base.clone());
        let sequence = SetSequence::new(
            move |n| {
                let scale = Rat::one() + Rat::recip_int(n as i64);
                let f = PolyFunc::indicator(affine_image(&c2, &scale, &Vector::zero(&base2))?)?;
                Ok(epigraph_build(&f, &inner2))
            },
            limit,
            1,
            horizon,
            norm.clone(),
        )?;
        let pts: Vec<(String, Vector)> = (0..4).map(|i| (format!("p{i}"), random_vector(&mut rng, &w, 4, 2))).collect();
        let bounded = vec![
            ("B".to_string(), ConvexSet::ball(random_vector(&mut rng, &w, 4, 1), Rat::one(), norm.clone())?),
            ("Q".to_string(), ConvexSet::polytope(random_vertices(&mut rng, &w, 3, 4))?),
        ];
        out.push(EpigraphCase {
            id: format!("epi{k}"),
            norm,
            sequence,
            points: TestFamily::named_points(pts),
            bounded: TestFamily::named_sets(FamilyKind::Bounded, bounded)?,
        });
    }
    Ok(out)
}
