//! The audit registry and the seeded runner.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::random::{substream, AuditRng};
use crate::schemes::DEFAULT_DIM_CAP;

use super::report::{AuditReport, Check};
use super::{cases_math, cases_schemes};

/// Upper limit accepted for `dim_cap`.
pub const MAX_DIM_CAP: usize = 4096;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Registry entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditInfo {
    pub id: &'static str,
    /// The result being audited.
    pub tag: &'static str,
    pub summary: &'static str,
}

type Runner = fn(&Ctx) -> Result<Outcome>;

const REGISTRY: &[(AuditInfo, Runner)] = &[
    (
        AuditInfo { id: "T01", tag: "trace-channel lemma", summary: "Helstrom measurement saturates the trace norm" },
        cases_math::t01,
    ),
    (AuditInfo { id: "T02", tag: "pure-state trace distance", summary: "closed form for (sub)normalized vectors" }, cases_math::t02),
    (AuditInfo { id: "T03", tag: "copies lemma", summary: "t-copy trace distance lower bound" }, cases_math::t03),
    (AuditInfo { id: "T04", tag: "orthogonal blocks lemma", summary: "trace norm is additive over classical blocks" }, cases_math::t04),
    (
        AuditInfo { id: "T05", tag: "coherent gentle measurement theorem", summary: "disturbance bound and dephased marginal" },
        cases_math::t05,
    ),
    (AuditInfo { id: "T06", tag: "subnormalized scaling lemma", summary: "trace distance of rescaled states" }, cases_math::t06),
    (
        AuditInfo { id: "T07", tag: "parallel composition theorems", summary: "correctness, flag factorization, hybrid lift" },
        cases_schemes::t07,
    ),
    (
        AuditInfo { id: "T08", tag: "tamper evidence implies encryption", summary: "distinguisher attack on a non-encrypting scheme" },
        cases_schemes::t08,
    ),
    (
        AuditInfo { id: "T09", tag: "tamper evidence implies encryption bound", summary: "alpha <= sqrt(19 (delta + sqrt(2 eps)))" },
        cases_schemes::t09,
    ),
    (AuditInfo { id: "T10", tag: "money from tamper evidence: correctness", summary: "QM_gamma is gamma-correct" }, cases_schemes::t10),
    (
        AuditInfo { id: "T11", tag: "money from tamper evidence: security", summary: "share-split forgery against S*S'" },
        cases_schemes::t11,
    ),
    (AuditInfo { id: "T12", tag: "set discrimination lemma", summary: "guessing bound for close subnormalized sets" }, cases_math::t12),
    (
        AuditInfo { id: "T13", tag: "revocation and game revocation", summary: "attack translations in both directions" },
        cases_schemes::t13,
    ),
    (AuditInfo { id: "T14", tag: "revocation to tamper evidence: correctness", summary: "TE(S) is 2 eps^(1/4)-correct" }, cases_schemes::t14),
    (
        AuditInfo { id: "T15", tag: "revocation to tamper evidence: flag lemma", summary: "Tr_M D'_k = V_k R and the equality chain" },
        cases_schemes::t15,
    ),
    (AuditInfo { id: "T16", tag: "malleability of S^+", summary: "bit flip goes undetected" }, cases_schemes::t16),
    (AuditInfo { id: "T17", tag: "S^+ is not quantum encryption", summary: "|+> and |-> are perfectly distinguishable" }, cases_schemes::t17),
    (
        AuditInfo { id: "T18", tag: "tamper evidence without unclonability", summary: "Double(S) split attack" },
        cases_schemes::t18,
    ),
    (AuditInfo { id: "T19", tag: "star flag lemma", summary: "inclusion-exclusion of the OR flag" }, cases_schemes::t19),
    (AuditInfo { id: "T20", tag: "always-reject scheme", summary: "zero tamper profiles" }, cases_schemes::t20),
    (
        AuditInfo { id: "T21", tag: "probability lemmas", summary: "Markov, concentration and conditioning bounds" },
        cases_math::t21,
    ),
];

pub fn list_audits() -> Vec<AuditInfo> {
    REGISTRY.iter().map(|(i, _)| i.clone()).collect()
}

/// One audit invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCase {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub dim_cap: usize,
}

impl AuditCase {
    pub fn new(id: impl Into<String>, seed: u64) -> Self {
        AuditCase { id: id.into(), params: BTreeMap::new(), seed, dim_cap: DEFAULT_DIM_CAP }
    }

    pub fn with_param(mut self, name: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn with_dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }
}

/// What a case function sees: parameters, seeded streams, the cap.
pub struct Ctx<'a> {
    case: &'a AuditCase,
}

impl Ctx<'_> {
    pub fn seed(&self) -> u64 {
        self.case.seed
    }

    pub fn cap(&self) -> usize {
        self.case.dim_cap
    }

    /// Independent stream `i` of the case seed.
    pub fn rng(&self, i: u64) -> AuditRng {
        substream(self.case.seed, i)
    }

    pub fn usize(&self, name: &str, default: usize) -> Result<usize> {
        match self.case.params.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::Precondition(format!("parameter {name} must be a non-negative integer"))),
        }
    }

    pub fn list(&self, name: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.case.params.get(name) {
            None => Ok(default.to_vec()),
            Some(serde_json::Value::Array(a)) => a
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Precondition(format!("parameter {name} must list integers"))),
            Some(v) => v
                .as_u64()
                .map(|x| vec![x as usize])
                .ok_or_else(|| Error::Precondition(format!("parameter {name} must list integers"))),
        }
    }

    /// The `trials` parameter.
    pub fn trials(&self, default: usize) -> Result<usize> {
        self.usize("trials", default)
    }
}

/// Checks and reported values produced by one case.
#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, f64>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.insert(name.into(), v);
    }
}

/// Runs one case. Unknown ids and out-of-range caps are errors; failures
/// inside the case, such as a dimension cap being hit, end up in the
/// report's `error` field.
pub fn run_audit(case: &AuditCase) -> Result<AuditReport> {
    let (info, runner) = REGISTRY
        .iter()
        .find(|(i, _)| i.id.eq_ignore_ascii_case(&case.id) || case.id.starts_with(&format!("{}_", i.id)))
        .ok_or_else(|| Error::UnknownCase(case.id.clone()))?;
    if case.dim_cap == 0 || case.dim_cap > MAX_DIM_CAP {
        return Err(Error::Precondition(format!("dim_cap {} outside 1..={MAX_DIM_CAP}", case.dim_cap)));
    }
    let start = Instant::now();
    let (outcome, error) = match runner(&Ctx { case }) {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    Ok(AuditReport {
        case: info.id.to_string(),
        tag: info.tag.to_string(),
        seed: case.seed,
        dim_cap: case.dim_cap,
        params: case.params.clone(),
        checks: outcome.checks,
        values: outcome.values,
        error,
        wall_time_s: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    })
}

/// Runs every registered case with a shared seed, cap and parameters, in
/// registry order.
pub fn run_all(seed: u64, dim_cap: usize, params: &BTreeMap<String, serde_json::Value>) -> Result<Vec<AuditReport>> {
    list_audits()
        .iter()
        .map(|info| run_audit(&AuditCase { id: info.id.to_string(), params: params.clone(), seed, dim_cap }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_all_cases() {
        let l = list_audits();
        assert!(l.len() >= 21);
        for i in 1..=21 {
            let id = format!("T{i:02}");
            let e = l.iter().find(|a| a.id == id).unwrap();
            assert!(!e.tag.is_empty());
        }
    }

    #[test]
    fn unknown_case_and_cap_errors() {
        assert!(matches!(run_audit(&AuditCase::new("T99", 1)), Err(Error::UnknownCase(_))));
        assert!(run_audit(&AuditCase::new("T01", 1).with_dim_cap(MAX_DIM_CAP + 1)).is_err());
    }

    #[test]
    fn long_ids_resolve() {
        let r = run_audit(&AuditCase::new("T20_TRIV", 3)).unwrap();
        assert_eq!(r.case, "T20");
        assert!(r.passed());
    }

    #[test]
    fn cap_violation_is_reported() {
        let r = run_audit(&AuditCase::new("T18", 1).with_dim_cap(4)).unwrap();
        assert!(r.error.is_some());
        assert!(!r.passed());
    }
}
