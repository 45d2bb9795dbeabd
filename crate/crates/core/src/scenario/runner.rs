//! Executes compiled scenarios.

use rayon::prelude::*;

use super::config::{CheckKind, CompiledCheck, Expectation, RawWitnessExpect, Scenario, ScenarioConfig};
use super::report::{CheckResult, Report};
use crate::certificates::{verify_certificate, verify_wijsman_certificate};
use crate::convergence::{
    gap_convergence_check, level_set_wijsman_criterion, mosco_check, wijsman_check, ConvergenceVerdict, Status,
};
use crate::error::{Error, Result};
use crate::kadec::{
    probe_lur, probe_w_star_kadec, probe_w_star_tau_kadec, property_star_check, ProbeReport, ProbeStatus,
};
use crate::scalar::Scalar;
use crate::space::Vector;

/// Validates and runs a scenario. Checks run in parallel; results keep
/// config order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    Ok(run_compiled(&config.compile()?))
}

pub fn run_compiled(sc: &Scenario) -> Report {
    let results: Vec<CheckResult> = sc.checks.par_iter().map(|c| run_check(sc, c)).collect();
    Report::new(sc.name.clone(), results)
}

enum Outcome {
    Verdict(ConvergenceVerdict),
    Probe(ProbeReport),
}

fn missing(what: &str) -> Error {
    Error::Precondition(format!("scenario has no {what}"))
}

fn execute(sc: &Scenario, c: &CompiledCheck) -> Result<Outcome> {
    let tol = &sc.tolerance;
    let seq = || sc.sequence.as_ref().ok_or_else(|| missing("sequence"));
    let fseq = || sc.functionals.as_ref().ok_or_else(|| missing("functionals"));
    let vseq = || sc.vectors.as_ref().ok_or_else(|| missing("vectors"));
    let fam = || c.family.as_ref().ok_or_else(|| missing("family"));
    let points = || -> Result<Vec<Vector>> { Ok(fam()?.point_members().iter().map(|(_, p)| p.clone()).collect()) };
    let cert = || c.certificate.as_ref().ok_or_else(|| missing("certificate"));
    Ok(match c.kind {
        CheckKind::Wijsman => Outcome::Verdict(wijsman_check(seq()?, fam()?, tol)?),
        CheckKind::CompactGap | CheckKind::WeakCompactGap | CheckKind::Slice => {
            Outcome::Verdict(gap_convergence_check(seq()?, fam()?, tol)?)
        }
        CheckKind::Mosco => Outcome::Verdict(mosco_check(seq()?, fam()?, tol)?),
        CheckKind::LevelSetWijsman => {
            let (f, level) = fseq()?;
            Outcome::Verdict(level_set_wijsman_criterion(f, level, fam()?, tol)?)
        }
        CheckKind::Certificate => Outcome::Verdict(verify_certificate(cert()?, seq()?, tol)?),
        CheckKind::WijsmanCertificate => {
            let rec = c.recovery.as_ref().ok_or_else(|| missing("recovery sequence"))?;
            Outcome::Verdict(verify_wijsman_certificate(cert()?, seq()?, rec, tol)?)
        }
        CheckKind::WStarKadec => Outcome::Probe(probe_w_star_kadec(&fseq()?.0, &points()?, tol)?),
        CheckKind::WStarTauKadec => {
            let k = c.compact.as_ref().ok_or_else(|| missing("compact family"))?;
            Outcome::Probe(probe_w_star_tau_kadec(&fseq()?.0, &points()?, k, tol)?)
        }
        CheckKind::Lur => Outcome::Probe(probe_lur(&sc.norm, vseq()?, tol)?),
        CheckKind::PropertyStar => Outcome::Probe(property_star_check(&fseq()?.0, vseq()?, tol)?),
    })
}

fn run_check(sc: &Scenario, c: &CompiledCheck) -> CheckResult {
    let expected = c.expect.map(Expectation::name);
    let check = c.kind.name();
    match execute(sc, c) {
        Ok(Outcome::Verdict(v)) => verdict_result(&c.id, check, v, expected, c.expect_witness.as_ref()),
        Ok(Outcome::Probe(p)) => probe_result(&c.id, check, p, expected, c.expect_witness.as_ref()),
        Err(e) => {
            let r = CheckResult::plain(&c.id, check, expected, "error", true).with_note(e.to_string());
            // An error never meets an expectation.
            if expected.is_some() {
                r.mismatch("check raised an error")
            } else {
                r
            }
        }
    }
}

pub(crate) fn status_name(s: Status) -> &'static str {
    match s {
        Status::Supported => "supported",
        Status::Refuted => "refuted",
    }
}

pub(crate) fn probe_status_name(s: ProbeStatus) -> &'static str {
    match s {
        ProbeStatus::Pass => "pass",
        ProbeStatus::Fail => "fail",
        ProbeStatus::Vacuous => "vacuous",
    }
}

/// Compares an observed witness field by field; `None` means "no witness".
fn witness_mismatch(
    want: &RawWitnessExpect,
    got: Option<(&str, usize, &Scalar, &Scalar)>,
) -> Option<String> {
    let Some((object, n, lhs, rhs)) = got else {
        return Some("expected a witness, none produced".into());
    };
    let mut diffs = Vec::new();
    if let Some(o) = &want.object {
        if o != object {
            diffs.push(format!("object {object} (expected {o})"));
        }
    }
    if let Some(m) = want.n {
        if m != n {
            diffs.push(format!("n = {n} (expected {m})"));
        }
    }
    for (name, want, got) in [("lhs", &want.lhs, lhs), ("rhs", &want.rhs, rhs)] {
        if let Some(w) = want {
            // Validated at compile time.
            let w: Scalar = w.parse().unwrap_or(Scalar::NegInf);
            if &w != got {
                diffs.push(format!("{name} = {got} (expected {w})"));
            }
        }
    }
    if diffs.is_empty() {
        None
    } else {
        Some(format!("witness mismatch: {}", diffs.join(", ")))
    }
}

pub fn verdict_result(
    id: &str,
    check: &str,
    v: ConvergenceVerdict,
    expected: Option<&str>,
    want_witness: Option<&RawWitnessExpect>,
) -> CheckResult {
    let mut r = CheckResult::plain(id, check, expected, status_name(v.status), v.exact);
    if let Some(c) = &v.consistency {
        r = r.with_note(c.clone());
    }
    if let Some(w) = want_witness {
        let got = v.witness.as_ref().map(|w| (w.object.as_str(), w.n, &w.lhs, &w.rhs));
        if let Some(why) = witness_mismatch(w, got) {
            r = r.mismatch(why);
        }
    }
    r.verdict = Some(v);
    r
}

pub fn probe_result(
    id: &str,
    check: &str,
    p: ProbeReport,
    expected: Option<&str>,
    want_witness: Option<&RawWitnessExpect>,
) -> CheckResult {
    let mut r = CheckResult::plain(id, check, expected, probe_status_name(p.status), p.exact);
    if let Some(w) = want_witness {
        let got = p.witness.as_ref().map(|w| (w.quantity.as_str(), w.n, &w.value, &w.expected));
        if let Some(why) = witness_mismatch(w, got) {
            r = r.mismatch(why);
        }
    }
    r.probe = Some(p);
    r
}
