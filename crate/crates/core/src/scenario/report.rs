//! Run reports: one result per requested check, in config order.

use serde::{Deserialize, Serialize};

use crate::convergence::{ConvergenceVerdict, TraceRow};
use crate::error::{Error, Result};
use crate::kadec::ProbeReport;
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: Scalar,
}

impl NamedValue {
    pub fn new(name: impl Into<String>, value: Scalar) -> NamedValue {
        NamedValue {
            name: name.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub observed: String,
    /// False only when an expectation was given and not met.
    pub matched: bool,
    /// All values behind this result are exact rationals or exact roots.
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ConvergenceVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<NamedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    /// A result without a verdict or probe report; `matched` compares
    /// `observed` against `expected`.
    pub fn plain(
        id: impl Into<String>,
        check: impl Into<String>,
        expected: Option<&str>,
        observed: impl Into<String>,
        exact: bool,
    ) -> CheckResult {
        let observed = observed.into();
        CheckResult {
            id: id.into(),
            check: check.into(),
            matched: expected.is_none_or(|e| e == observed),
            expected: expected.map(str::to_string),
            observed,
            exact,
            verdict: None,
            probe: None,
            values: Vec::new(),
            note: None,
        }
    }

    pub fn with_values(mut self, values: Vec<NamedValue>) -> CheckResult {
        self.values = values;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckResult {
        self.note = Some(note.into());
        self
    }

    /// Marks the result mismatched and appends to the note.
    pub fn mismatch(mut self, why: impl AsRef<str>) -> CheckResult {
        self.matched = false;
        self.note = Some(match self.note.take() {
            Some(n) => format!("{n}; {}", why.as_ref()),
            None => why.as_ref().to_string(),
        });
        self
    }

    pub fn trace(&self) -> &[TraceRow] {
        if let Some(v) = &self.verdict {
            &v.trace
        } else if let Some(p) = &self.probe {
            &p.trace
        } else {
            &[]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Every result was computed in exact arithmetic.
    pub exact: bool,
    /// Some result used floating point.
    pub float: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub results: Vec<CheckResult>,
    pub environment: Environment,
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, results: Vec<CheckResult>) -> Report {
        let exact = results.iter().all(|r| r.exact);
        Report {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            matched: results.iter().all(|r| r.matched),
            environment: Environment { exact, float: !exact },
            results,
            wall_time_ms: None,
        }
    }

    pub fn result(&self, id: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let r: Report = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported schema version {}", r.schema_version),
            ));
        }
        Ok(r)
    }

    /// Trace rows of every result as CSV; object ids are `check/object`.
    pub fn trace_csv(&self) -> String {
        traces_csv(std::slice::from_ref(self))
    }
}

/// Exact values print as `p/q`, everything else as a decimal.
pub fn csv_value(v: &Scalar) -> String {
    match v {
        Scalar::Exact(r) => r.to_string(),
        Scalar::PosInf => "inf".into(),
        Scalar::NegInf => "-inf".into(),
        other => format!("{}", other.to_f64()),
    }
}

/// CSV for several reports; object ids are prefixed by the scenario name
/// when more than one report is given.
pub fn traces_csv(reports: &[Report]) -> String {
    let mut out = String::from("n,object_id,value\n");
    for rep in reports {
        for r in &rep.results {
            for row in r.trace() {
                let id = if reports.len() > 1 {
                    format!("{}/{}/{}", rep.scenario, r.id, row.object)
                } else {
                    format!("{}/{}", r.id, row.object)
                };
                out.push_str(&format!("{},{},{}\n", row.n, csv_field(&id), csv_value(&row.value)));
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
