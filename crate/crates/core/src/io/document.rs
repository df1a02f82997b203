//! JSON result documents.
//!
//! Schema `noether2.result/1`; every key below is always present unless
//! marked optional.
//!
//! | key | type |
//! |-----|------|
//! | `schema` | `"noether2.result/1"` |
//! | `problem` | `{name: string?, kind: "continuous"\|"discrete", vars: [string]}` |
//! | `stage` | `"el"\|"relation"\|"claw"\|"verify"` |
//! | `config` | `{trials: int, tol: number, seed: int}` |
//! | `euler` | `[{field, expr}]` |
//! | `relations` | `[{function, expr, verdict}]` |
//! | `invariance` | `{expr, verdict}` or `null` |
//! | `variational` | `{status, variable?, verdict?}` or `null` |
//! | `residuals` | `[{function, expr, verdict}]` |
//! | `eliminated` | `{expr, verdict}` or `null` |
//! | `identities` | `[{name, expr, verdict}]` |
//! | `conservation_law` | `{fluxes: [{axis, expr}], defect, verdict}` or `null` |
//! | `specializations` | `[{name, fluxes, divergence, error?}]` |
//! | `potential_link` | `{cleared, matches_potential_form}` or `null` |
//! | `expectations` | `[{target, ok, verdict?}]` |
//! | `errors` | `[string]` |
//! | `ok` | `bool` |
//! | `first_mismatch` | `string` or `null` |
//! | `timing_ms` | optional map from step name to milliseconds |
//!
//! A verdict is `{status, trials, max_residual, seed, counterexample}` with
//! `status` one of `proved_zero`, `probably_zero`, `nonzero`,
//! `inconclusive`; `max_residual` is `null` when no finite value exists and
//! `counterexample` maps atom names to printed values.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::verify::{Status, Verdict};

pub const SCHEMA: &str = "noether2.result/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub status: Status,
    pub trials: usize,
    pub max_residual: Option<f64>,
    pub seed: u64,
    pub counterexample: Option<BTreeMap<String, String>>,
}

impl VerdictDoc {
    pub(crate) fn new(v: &Verdict, atom: &dyn Fn(&crate::expr::Atom) -> String) -> Self {
        VerdictDoc {
            status: v.status,
            trials: v.trials,
            max_residual: v.max_residual.is_finite().then_some(v.max_residual),
            seed: v.seed,
            counterexample: v
                .counterexample
                .as_ref()
                .map(|pt| pt.iter().map(|(a, n)| (atom(a), n.to_string())).collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.status.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub name: Option<String>,
    pub kind: String,
    pub vars: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerEntry {
    pub field: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checked {
    pub expr: String,
    pub verdict: VerdictDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerFunction {
    pub function: String,
    pub expr: String,
    pub verdict: VerdictDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub expr: String,
    pub verdict: VerdictDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variational {
    pub status: Status,
    /// Variable whose Euler expression of `X(L)` failed to vanish.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flux {
    pub axis: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClawDoc {
    pub fluxes: Vec<Flux>,
    pub defect: String,
    /// Zero test of `div P − R₀`.
    pub verdict: VerdictDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecializationDoc {
    pub name: String,
    pub fluxes: Vec<Flux>,
    pub divergence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialLinkDoc {
    pub cleared: String,
    pub matches_potential_form: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationDoc {
    pub target: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: String,
    pub problem: ProblemEcho,
    pub stage: String,
    pub config: ConfigEcho,
    pub euler: Vec<EulerEntry>,
    pub relations: Vec<PerFunction>,
    pub invariance: Option<Checked>,
    pub variational: Option<Variational>,
    pub residuals: Vec<PerFunction>,
    pub eliminated: Option<Checked>,
    pub identities: Vec<NamedCheck>,
    pub conservation_law: Option<ClawDoc>,
    pub specializations: Vec<SpecializationDoc>,
    pub potential_link: Option<PotentialLinkDoc>,
    pub expectations: Vec<ExpectationDoc>,
    pub errors: Vec<String>,
    pub ok: bool,
    pub first_mismatch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
}

/// A computed expression that disagrees with the problem's expectations, or
/// a verdict that is not zero.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("golden mismatch: {0}")]
pub struct GoldenMismatch(pub String);

impl ResultDocument {
    pub fn check(&self) -> Result<(), GoldenMismatch> {
        match &self.first_mismatch {
            None if self.ok => Ok(()),
            None => Err(GoldenMismatch("unspecified".into())),
            Some(m) => Err(GoldenMismatch(m.clone())),
        }
    }

    /// Scans the document in order and records the first failure.
    pub(crate) fn settle(&mut self) {
        let mut first: Option<String> = self.errors.first().cloned();
        let mut note = |what: String| {
            if first.is_none() {
                first = Some(what);
            }
        };
        for r in &self.relations {
            if !r.verdict.is_zero() {
                note(format!("relation {} is {}", r.function, r.verdict.status));
            }
        }
        if let Some(c) = &self.invariance {
            if !c.verdict.is_zero() {
                note(format!("invariance X(L) is {}", c.verdict.status));
            }
        }
        if let Some(v) = &self.variational {
            if !v.status.is_zero() {
                let var = v.variable.as_deref().unwrap_or("?");
                note(format!(
                    "X(L) is not a divergence (Euler expression for {var} is {})",
                    v.status
                ));
            }
        }
        for r in &self.residuals {
            if !r.verdict.is_zero() {
                note(format!("residual {} is {}", r.function, r.verdict.status));
            }
        }
        if let Some(c) = &self.eliminated {
            if !c.verdict.is_zero() {
                note(format!("eliminated relation is {}", c.verdict.status));
            }
        }
        for i in &self.identities {
            if !i.verdict.is_zero() {
                note(format!("identity {} is {}", i.name, i.verdict.status));
            }
        }
        if let Some(c) = &self.conservation_law {
            if !c.verdict.is_zero() {
                note(format!("conservation law identity is {}", c.verdict.status));
            }
        }
        for s in &self.specializations {
            if let Some(e) = &s.error {
                note(format!("specialization {}: {e}", s.name));
            }
        }
        if let Some(p) = &self.potential_link {
            if !p.matches_potential_form {
                note("potential link does not reproduce the potential form".into());
            }
        }
        for e in &self.expectations {
            if !e.ok {
                note(format!("expected {} differs", e.target));
            }
        }
        self.ok = first.is_none();
        self.first_mismatch = first;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Plain-text report.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s).expect("string write");
        s
    }

    fn write_text(&self, s: &mut String) -> fmt::Result {
        let name = self.problem.name.as_deref().unwrap_or("(unnamed)");
        writeln!(s, "{name} [{}] stage {}", self.problem.kind, self.stage)?;
        for e in &self.euler {
            writeln!(s, "E[{}] = {}", e.field, e.expr)?;
        }
        for r in &self.relations {
            writeln!(
                s,
                "relation {}: {}  ({})",
                r.function, r.verdict.status, r.expr
            )?;
        }
        if let Some(c) = &self.invariance {
            writeln!(s, "invariance: {}  ({})", c.verdict.status, c.expr)?;
        }
        if let Some(v) = &self.variational {
            writeln!(s, "variational: {}", v.status)?;
        }
        for r in &self.residuals {
            writeln!(
                s,
                "residual {}: {}  ({})",
                r.function, r.verdict.status, r.expr
            )?;
        }
        if let Some(c) = &self.eliminated {
            writeln!(s, "eliminated: {}  ({})", c.verdict.status, c.expr)?;
        }
        for i in &self.identities {
            writeln!(s, "identity {}: {}", i.name, i.verdict.status)?;
        }
        if let Some(c) = &self.conservation_law {
            for f in &c.fluxes {
                writeln!(s, "P[{}] = {}", f.axis, f.expr)?;
            }
            writeln!(s, "R0 = {}", c.defect)?;
            writeln!(s, "div P - R0: {}", c.verdict.status)?;
        }
        for sp in &self.specializations {
            match &sp.error {
                Some(e) => writeln!(s, "specialize {}: {e}", sp.name)?,
                None => {
                    for f in &sp.fluxes {
                        writeln!(s, "specialize {}: P[{}] = {}", sp.name, f.axis, f.expr)?;
                    }
                }
            }
        }
        if let Some(p) = &self.potential_link {
            writeln!(
                s,
                "potential link: {}  ({})",
                p.matches_potential_form, p.cleared
            )?;
        }
        for e in &self.expectations {
            writeln!(
                s,
                "expect {}: {}",
                e.target,
                if e.ok { "ok" } else { "MISMATCH" }
            )?;
        }
        for e in &self.errors {
            writeln!(s, "error: {e}")?;
        }
        if let Some(t) = &self.timing_ms {
            for (k, v) in t {
                writeln!(s, "time {k}: {v:.3} ms")?;
            }
        }
        match &self.first_mismatch {
            None => writeln!(s, "ok"),
            Some(m) => writeln!(s, "FAILED: {m}"),
        }
    }
}
