//! Canned reproductions. Each report carries expectations, so a healthy
//! build reports `matched: true` for every built-in.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::corpus::{
    coincidence_cases, epigraph_cases, separation_instances, COINCIDENCE_SEED, EPIGRAPH_SEED, SEPARATION_SEED,
};
use super::report::{CheckResult, NamedValue, Report};
use super::runner::{probe_result, run_scenario, status_name, verdict_result};
use crate::certificates::{
    construct_separating_sequence, exhaust_hyperplane, separation_holds, verify_certificate, CertMode,
    SeparationInstance, SliceCertificate,
};
use crate::convergence::{gap_convergence_check, mosco_check, wijsman_check, FunctionalSequence, SetSequence};
use crate::error::{Error, Result};
use crate::kadec::{build_prop25_renorm, probe_w_star_tau_kadec, property_star_check, StarFailure, VectorSequence};
use crate::rational::Rat;
use crate::scalar::Scalar;
use crate::sets::{distance, support_value, CompactFamily, ConvexSet, Direction};
use crate::space::{dual_norm_eval, norm_eval, Functional, NormSpec, Vector, Window};

pub const PROP21B_Y: &str = include_str!("../../scenarios/prop21b_Y.json");
pub const PROP21B_X: &str = include_str!("../../scenarios/prop21b_X.json");
pub const ELL1_KADEC_FAIL: &str = include_str!("../../scenarios/ell1_kadec_fail.json");
pub const ELL1_TAU_PASS: &str = include_str!("../../scenarios/ell1_tau_pass.json");

const HORIZON: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Builtin {
    Prop21bY,
    Prop21bX,
    Ell1KadecFail,
    Ell1TauPass,
    Prop25Renorm,
    Thm32Separation,
    FiniteDimCoincidence,
    EpigraphIndicator,
}

impl Builtin {
    pub const ALL: [Builtin; 8] = [
        Builtin::Prop21bY,
        Builtin::Prop21bX,
        Builtin::Ell1KadecFail,
        Builtin::Ell1TauPass,
        Builtin::Prop25Renorm,
        Builtin::Thm32Separation,
        Builtin::FiniteDimCoincidence,
        Builtin::EpigraphIndicator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Prop21bY => "prop21b_Y",
            Builtin::Prop21bX => "prop21b_X",
            Builtin::Ell1KadecFail => "ell1_kadec_fail",
            Builtin::Ell1TauPass => "ell1_tau_pass",
            Builtin::Prop25Renorm => "prop25_renorm",
            Builtin::Thm32Separation => "thm32_separation",
            Builtin::FiniteDimCoincidence => "finite_dim_coincidence",
            Builtin::EpigraphIndicator => "epigraph_indicator",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Builtin::Prop21bY => "hyperplanes f_n^-1(1) in Y = {x0 = x1} under the bvC0 norm: Wijsman",
            Builtin::Prop21bX => "the same hyperplanes seen from X: Wijsman fails at z0 = e1/2",
            Builtin::Ell1KadecFail => "f_n = e1* + e_n* on l1: w*-Kadec probe fails, ||f_n - f|| = 1",
            Builtin::Ell1TauPass => "f_n = e1* + e_n* on l1: w*-tau-Kadec probe passes on fixed polytopes",
            Builtin::Prop25Renorm => "l2 failure of property (*) and the renorming built from it",
            Builtin::Thm32Separation => "separating functionals between C_j and exhausting compacta of L",
            Builtin::FiniteDimCoincidence => "50 seeded polytope sequences: Wijsman, slice and Mosco agree",
            Builtin::EpigraphIndicator => "indicator epigraphs of (1 + 1/n) C: Wijsman and slice",
        }
    }

    /// The scenario file behind a config-driven built-in.
    pub fn config_text(self) -> Option<&'static str> {
        match self {
            Builtin::Prop21bY => Some(PROP21B_Y),
            Builtin::Prop21bX => Some(PROP21B_X),
            Builtin::Ell1KadecFail => Some(ELL1_KADEC_FAIL),
            Builtin::Ell1TauPass => Some(ELL1_TAU_PASS),
            _ => None,
        }
    }

    pub fn run(self) -> Result<Report> {
        let mut report = match self.config_text() {
            Some(text) => run_scenario(&ScenarioConfig::from_json(text)?)?,
            None => Report::new(self.name(), Vec::new()),
        };
        let extra = match self {
            Builtin::Prop21bX => vec![prop21b_values()?],
            Builtin::Prop25Renorm => prop25_renorm()?,
            Builtin::Thm32Separation => thm32_separation()?,
            Builtin::FiniteDimCoincidence => finite_dim_coincidence()?,
            Builtin::EpigraphIndicator => epigraph_indicator()?,
            _ => Vec::new(),
        };
        if !extra.is_empty() {
            let mut results = std::mem::take(&mut report.results);
            results.extend(extra);
            report = Report::new(report.scenario, results);
        }
        Ok(report)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
            Error::config("builtin", format!("unknown built-in `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

pub fn builtin_repro(name: &str) -> Result<Report> {
    name.parse::<Builtin>()?.run()
}

/// Every built-in, in listing order.
pub fn repro_all() -> Result<Vec<Report>> {
    Builtin::ALL.par_iter().map(|b| b.run()).collect()
}

fn exact(r: Rat) -> Scalar {
    Scalar::Exact(r)
}

fn half() -> Rat {
    Rat::new(1, 2)
}

/// Hyperplane pair `{x1 + x_n = 1} ∩ {x0 = x1}`; `n = None` gives the limit.
pub fn prop21b_set(w: &Window, n: Option<usize>) -> Result<ConvexSet> {
    let f = match n {
        Some(n) => Functional::from_entries(w, [(1, Rat::one()), (n, Rat::one())])?,
        None => Functional::unit(w, 1)?,
    };
    let y = Functional::from_entries(w, [(0, Rat::one()), (1, -Rat::one())])?;
    ConvexSet::intersection(vec![ConvexSet::hyperplane(f, Rat::one()), ConvexSet::hyperplane(y, Rat::zero())])
}

/// The exact values of the construction, checked for every `2 <= n <= 128`.
fn prop21b_values() -> Result<CheckResult> {
    let w = Window::range(0, HORIZON);
    let norm = NormSpec::BvC0;
    let z0 = Vector::from_entries(&w, [(1, half())])?;
    let limit_f = Functional::unit(&w, 1)?;
    let rows: Vec<(usize, Vec<Scalar>)> = (2..=HORIZON)
        .into_par_iter()
        .map(|n| -> Result<(usize, Vec<Scalar>)> {
            let zn = Vector::from_entries(&w, [(0, half()), (1, half()), (n, half())])?;
            let fhat = Functional::from_entries(&w, [(1, Rat::one()), (n, Rat::one())])?;
            Ok((
                n,
                vec![
                    norm_eval(&norm, &z0.checked_sub(&zn)?)?,
                    dual_norm_eval(&norm, &fhat)?,
                    distance(&z0, &prop21b_set(&w, Some(n))?, &norm)?,
                ],
            ))
        })
        .collect::<Result<_>>()?;
    let want = [exact(half()), exact(Rat::one()), exact(half())];
    let names = ["norm(z0 - z_n)", "dual_norm(fhat_n)", "d(z0, C_n)"];
    let mut bad = Vec::new();
    for (n, vals) in &rows {
        for ((v, w), name) in vals.iter().zip(&want).zip(names) {
            if v != w {
                bad.push(format!("{name} = {v} at n = {n}"));
            }
        }
    }
    let lim_norm = dual_norm_eval(&norm, &limit_f)?;
    let lim_dist = distance(&z0, &prop21b_set(&w, None)?, &norm)?;
    if lim_norm != exact(Rat::one()) {
        bad.push(format!("dual_norm(fhat_inf) = {lim_norm}"));
    }
    if lim_dist != exact(Rat::one()) {
        bad.push(format!("d(z0, C) = {lim_dist}"));
    }
    let mut values: Vec<NamedValue> = names.iter().zip(&want).map(|(n, v)| NamedValue::new(*n, v.clone())).collect();
    values.push(NamedValue::new("dual_norm(fhat_inf)", lim_norm));
    values.push(NamedValue::new("d(z0, C)", lim_dist));
    let observed = if bad.is_empty() { "exact" } else { "mismatch" };
    let r = CheckResult::plain("exactValues", "values", Some("exact"), observed, true)
        .with_values(values)
        .with_note("first three values hold for every 2 <= n <= 128");
    Ok(if bad.is_empty() { r } else { r.with_note(bad.join("; ")) })
}

/// The l2 failure of (*): `x_n* = e_n*`, `x_n = e_n`, both tending to 0.
pub fn prop25_witness(w: &Window) -> Result<(FunctionalSequence, VectorSequence, StarFailure)> {
    let (w1, w2) = (w.clone(), w.clone());
    let fseq = FunctionalSequence::new(
        move |n| Functional::unit(&w1, n),
        Functional::zero(w),
        1,
        HORIZON,
        NormSpec::Ell2,
    )?;
    let xseq = VectorSequence::new(move |n| Vector::unit(&w2, n), Vector::zero(w), 1, HORIZON)?;
    let functionals = (1..=HORIZON).map(|j| Ok((j, Functional::unit(w, j)?))).collect::<Result<_>>()?;
    let failure = StarFailure {
        base: NormSpec::Ell2,
        functionals,
        limit: Functional::zero(w),
    };
    Ok((fseq, xseq, failure))
}

fn prop25_renorm() -> Result<Vec<CheckResult>> {
    let w = Window::range(0, HORIZON);
    let tol = Rat::pow10(-9);
    let (fseq, xseq, failure) = prop25_witness(&w)?;
    let star = property_star_check(&fseq, &xseq, &tol)?;
    let mut out = vec![probe_result("propertyStar", "propertyStar", star, Some("fail"), None)];

    let y = Vector::unit(&w, 0)?;
    let y_star = Functional::unit(&w, 0)?;
    let renorm = build_prop25_renorm(&failure, &y, &y_star)?;
    let shifted: Vec<Scalar> = failure
        .functionals
        .par_iter()
        .map(|(_, f)| dual_norm_eval(&renorm, &y_star.checked_add(f)?))
        .collect::<Result<_>>()?;
    let worst = shifted.iter().cloned().fold(Scalar::NegInf, Scalar::max);
    let at_limit = dual_norm_eval(&renorm, &y_star.checked_add(&failure.limit)?)?;
    let one = exact(Rat::one());
    let ok = worst.cmp_exact(&one).is_some_and(|o| o.is_le()) && at_limit == one;
    out.push(
        CheckResult::plain("renorm", "values", Some("exact"), if ok { "exact" } else { "mismatch" }, true)
            .with_values(vec![
                NamedValue::new("max_j |||y* + x_j*|||", worst),
                NamedValue::new("|||y* + x*|||", at_limit),
            ]),
    );

    // y* + x_j* under the new norm, against the planted set conv{0, e_1, ..., e_128}.
    let (w1, ys) = (w.clone(), y_star.clone());
    let moved = FunctionalSequence::new(
        move |n| ys.checked_add(&Functional::unit(&w1, n)?),
        y_star.clone(),
        1,
        HORIZON,
        renorm,
    )?;
    let mut verts = vec![Vector::zero(&w)];
    for j in 1..=HORIZON {
        verts.push(Vector::unit(&w, j)?);
    }
    let planted = CompactFamily::new(vec![ConvexSet::polytope(verts)?])?;
    let pts: Vec<Vector> = (0..4).map(|i| Vector::unit(&w, i)).collect::<Result<_>>()?;
    let tau = probe_w_star_tau_kadec(&moved, &pts, &planted, &tol)?;
    out.push(probe_result("wStarTauKadec:renormed", "wStarTauKadec", tau, Some("fail"), None));
    Ok(out)
}

/// `C_j = {x0 <= 1/j}` tending to `C = {x0 <= 0}` in the sup norm on two
/// coordinates, with `L = {x0 = 1}`.
pub fn thm32_sequence(w: &Window) -> Result<SetSequence> {
    let f = Functional::unit(w, 0)?;
    let f2 = f.clone();
    SetSequence::new(
        move |j| Ok(ConvexSet::halfspace(f2.clone(), Rat::recip_int(j as i64), Direction::Le)),
        ConvexSet::halfspace(f, Rat::zero(), Direction::Le),
        1,
        HORIZON,
        NormSpec::SupC0,
    )
}

/// Slack of `sup_{C_j} L + (1 - 1/n) <= min_{K_n} L`.
pub fn separation_slack(inst: &SeparationInstance, lam: &Functional) -> Result<Scalar> {
    let sup_c = support_value(lam, &inst.cj)?;
    let min_k = support_value(&lam.neg(), &inst.kn)?;
    Ok(match (sup_c, min_k) {
        (Scalar::Exact(s), Scalar::Exact(m)) => exact(-m - s - inst.radius()),
        (Scalar::NegInf, _) => Scalar::PosInf,
        _ => Scalar::NegInf,
    })
}

fn separation_result(id: String, insts: &[SeparationInstance]) -> Result<CheckResult> {
    let slacks: Vec<std::result::Result<Scalar, String>> = insts
        .par_iter()
        .map(|inst| {
            let lam = construct_separating_sequence(inst).map_err(|e| e.to_string())?;
            if !separation_holds(inst, &lam).map_err(|e| e.to_string())? {
                return Err(format!("margin missed at n = {}", inst.n));
            }
            separation_slack(inst, &lam).map_err(|e| e.to_string())
        })
        .collect();
    let mut bad = Vec::new();
    let mut min_slack = Scalar::PosInf;
    for (inst, s) in insts.iter().zip(slacks) {
        match s {
            Ok(s) => min_slack = if s.total_cmp(&min_slack).is_lt() { s } else { min_slack },
            Err(e) => bad.push(format!("n = {}: {e}", inst.n)),
        }
    }
    let observed = if bad.is_empty() { "holds" } else { "fails" };
    let r = CheckResult::plain(id, "separation", Some("holds"), observed, true)
        .with_values(vec![NamedValue::new("min_slack", min_slack)]);
    Ok(if bad.is_empty() { r } else { r.with_note(bad.join("; ")) })
}

fn thm32_separation() -> Result<Vec<CheckResult>> {
    let w = Window::range(0, 1);
    let seq = thm32_sequence(&w)?;
    let l = ConvexSet::hyperplane(Functional::unit(&w, 0)?, Rat::one());
    let ks = exhaust_hyperplane(&l, &Vector::zero(&w), HORIZON, &Rat::from_int(4), &NormSpec::SupC0)?;
    let insts: Vec<SeparationInstance> = ks
        .members()
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let n = i + 1;
            SeparationInstance::new(n, n + 1, k.clone(), seq.set(n + 1)?, NormSpec::SupC0)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![separation_result("exhaustion".into(), &insts)?];

    let cert = SliceCertificate::constant(Functional::unit(&w, 0)?, Vector::zero(&w), CertMode::Norm);
    let v = verify_certificate(&cert, &seq, &Rat::zero())?;
    out.push(verdict_result("certificate", "certificate", v, Some("supported"), None));

    let seeded = separation_instances(SEPARATION_SEED, 25)?;
    for (k, inst) in seeded.iter().enumerate() {
        out.push(separation_result(format!("seeded{k:02}"), std::slice::from_ref(inst))?);
    }
    Ok(out)
}

fn finite_dim_coincidence() -> Result<Vec<CheckResult>> {
    let cases = coincidence_cases(COINCIDENCE_SEED, 50, HORIZON)?;
    let tol = Rat::pow10(-9);
    cases
        .par_iter()
        .map(|c| {
            let wij = wijsman_check(&c.sequence, &c.points, &tol)?;
            let slice = gap_convergence_check(&c.sequence, &c.bounded, &tol)?;
            let mosco = mosco_check(&c.sequence, &c.points, &tol)?;
            let statuses = [wij.status, slice.status, mosco.status];
            let agree = statuses.iter().all(|s| *s == statuses[0]);
            let observed = if agree { status_name(statuses[0]) } else { "disagree" };
            let expected = if c.limit_is_true { "supported" } else { "refuted" };
            let all_exact = wij.exact && slice.exact && mosco.exact;
            Ok(CheckResult::plain(&c.id, "coincidence", Some(expected), observed, all_exact).with_note(format!(
                "{}: wijsman={} slice={} mosco={}",
                c.norm.name(),
                status_name(wij.status),
                status_name(slice.status),
                status_name(mosco.status)
            )))
        })
        .collect()
}

fn epigraph_indicator() -> Result<Vec<CheckResult>> {
    let cases = epigraph_cases(EPIGRAPH_SEED, 6, 64)?;
    let tol = Rat::pow10(-6);
    let per_case: Vec<Vec<CheckResult>> = cases
        .par_iter()
        .map(|c| -> Result<Vec<CheckResult>> {
            let wij = wijsman_check(&c.sequence, &c.points, &tol)?;
            let slice = gap_convergence_check(&c.sequence, &c.bounded, &tol)?;
            Ok(vec![
                verdict_result(&format!("{}:wijsman", c.id), "wijsman", strip(wij), Some("supported"), None),
                verdict_result(&format!("{}:slice", c.id), "slice", strip(slice), Some("supported"), None),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(per_case.into_iter().flatten().collect())
}

/// Drops per-row traces from bulk verdicts; targets and witnesses stay.
fn strip(mut v: crate::convergence::ConvergenceVerdict) -> crate::convergence::ConvergenceVerdict {
    v.trace.clear();
    v
}
