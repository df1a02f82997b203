//! Runs a parsed problem through the engine.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::diff::{prolonged_action_rf, verify_in, VariationalError};
use crate::expr::{Expr, Mode, Rf, VarRef};
use crate::linop::{divergence_rf, Characteristic, LinearOperator};
use crate::noether::{
    conservation_law_in, euler_expressions_in, relations_in, residuals_in, specialize_in,
};
use crate::noether_disc::potential_link_check;
use crate::verify::{zero_test_rf, ZeroTestConfig};

use super::document::{
    Checked, ClawDoc, ConfigEcho, EulerEntry, ExpectationDoc, Flux, NamedCheck, PerFunction,
    PotentialLinkDoc, ProblemEcho, ResultDocument, SpecializationDoc, Variational, VerdictDoc,
    SCHEMA,
};
use super::problem::{ProblemFile, Target};
use super::syntax::Scope;

/// How far the pipeline runs. Each stage includes the ones before it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Euler–Lagrange expressions.
    El,
    /// Relations (or residuals against the multipliers), elimination,
    /// invariance and variational checks.
    Relation,
    /// Conservation law, specializations, potential link.
    Claw,
    /// Everything, plus identities and `expect` comparisons.
    #[default]
    Verify,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::El => "el",
            Stage::Relation => "relation",
            Stage::Claw => "claw",
            Stage::Verify => "verify",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Options {
    pub config: ZeroTestConfig,
    /// Compare expected fluxes componentwise instead of by divergence.
    pub expect_strict: bool,
    /// Record wall-clock time per step (makes output nondeterministic).
    pub timing: bool,
    pub stage: Stage,
}

struct Run<'a> {
    p: &'a ProblemFile,
    scope: Scope,
    opts: &'a Options,
    doc: ResultDocument,
    clock: BTreeMap<String, f64>,
}

impl Run<'_> {
    fn mode(&self) -> Mode {
        self.p.kind
    }

    fn show(&self, r: &Rf) -> String {
        self.scope.print(&r.to_expr())
    }

    fn verdict(&self, r: &Rf) -> VerdictDoc {
        VerdictDoc::new(&zero_test_rf(r, &self.opts.config), &|a| {
            self.scope.atom_text(a)
        })
    }

    fn rf(&mut self, what: &str, e: &Expr) -> Option<Rf> {
        match Rf::from_expr(e) {
            Ok(r) => Some(r),
            Err(err) => {
                self.doc.errors.push(format!("{what}: {err}"));
                None
            }
        }
    }

    fn timed<T>(&mut self, step: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        if self.opts.timing {
            *self.clock.entry(step.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
        out
    }

    fn expect(&mut self, target: String, diff: Option<Rf>) {
        let verdict = diff.map(|d| self.verdict(&d));
        let ok = verdict.as_ref().is_some_and(VerdictDoc::is_zero);
        self.doc.expectations.push(ExpectationDoc {
            target,
            ok,
            verdict,
        });
    }

    /// Compares fluxes per component under `--expect-strict`, otherwise by
    /// divergence. Missing expected components count as zero.
    fn expect_fluxes(&mut self, label: &str, expected: &[(String, Rf)], got: Option<&[Rf]>) {
        if expected.is_empty() {
            return;
        }
        let axes = self.p.axes();
        let mut want = vec![Rf::zero(); axes];
        for (axis, e) in expected {
            let i = self
                .p
                .independents
                .iter()
                .position(|a| a == axis)
                .expect("validated axis");
            want[i] = want[i].add(e);
        }
        if self.opts.expect_strict {
            for (i, axis) in self.p.independents.clone().iter().enumerate() {
                let diff = got.map(|g| g[i].sub(&want[i]));
                self.expect(format!("{label} {axis}"), diff);
            }
        } else {
            let mode = self.mode();
            let diff = got.map(|g| divergence_rf(mode, g).sub(&divergence_rf(mode, &want)));
            self.expect(format!("{label} divergence"), diff);
        }
    }
}

fn failure_note(err: &VariationalError) -> (String, crate::verify::Verdict) {
    match err {
        VariationalError::NotVariational { var, verdict, .. } => (var.to_string(), verdict.clone()),
    }
}

/// Computes everything the problem asks for up to `options.stage`.
pub fn run_pipeline(p: &ProblemFile, options: &Options) -> ResultDocument {
    let doc = ResultDocument {
        schema: SCHEMA.into(),
        problem: ProblemEcho {
            name: p.name.clone(),
            kind: match p.kind {
                Mode::Derivative => "continuous".into(),
                Mode::Shift => "discrete".into(),
            },
            vars: p.independents.clone(),
        },
        stage: options.stage.name().into(),
        config: ConfigEcho {
            trials: options.config.trials,
            tol: options.config.tol,
            seed: options.config.seed,
        },
        euler: Vec::new(),
        relations: Vec::new(),
        invariance: None,
        variational: None,
        residuals: Vec::new(),
        eliminated: None,
        identities: Vec::new(),
        conservation_law: None,
        specializations: Vec::new(),
        potential_link: None,
        expectations: Vec::new(),
        errors: Vec::new(),
        ok: false,
        first_mismatch: None,
        timing_ms: None,
    };
    let mut run = Run {
        p,
        scope: p.scope(),
        opts: options,
        doc,
        clock: BTreeMap::new(),
    };
    run.go();
    if options.timing {
        run.doc.timing_ms = Some(std::mem::take(&mut run.clock));
    }
    run.doc.settle();
    run.doc
}

impl Run<'_> {
    fn go(&mut self) {
        let p = self.p;
        let mode = self.mode();
        let axes = p.axes();
        let stage = self.opts.stage;
        let verify = stage == Stage::Verify;
        let Some(l) = self.rf("lagrangian", &p.lagrangian) else {
            return;
        };
        let fields: Vec<VarRef> = p
            .fields
            .iter()
            .map(|f| VarRef::dependent(&f.name))
            .collect();

        let euler = self.timed("euler", |_| euler_expressions_in(mode, &l, &fields));
        for (f, e) in p.fields.iter().zip(&euler) {
            let expr = self.show(e);
            self.doc.euler.push(EulerEntry {
                field: f.name.clone(),
                expr,
            });
        }
        if verify {
            for ex in &p.expectations {
                if let Target::Euler(f) = &ex.target {
                    let i = p
                        .fields
                        .iter()
                        .position(|d| &d.name == f)
                        .expect("validated field");
                    let diff = self
                        .rf("expected euler", &ex.expr)
                        .map(|w| euler[i].sub(&w));
                    self.expect(format!("euler {f}"), diff);
                }
            }
        }
        if stage == Stage::El || p.characteristic.is_empty() {
            return;
        }

        let family = p.family();
        let components: Vec<(VarRef, Expr)> = p
            .fields
            .iter()
            .map(|f| {
                let q = p
                    .characteristic
                    .iter()
                    .find(|(name, _)| name == &f.name)
                    .map_or_else(Expr::zero, |(_, q)| q.clone());
                (VarRef::dependent(&f.name), q)
            })
            .collect();
        let q = match Characteristic::new(components, family.clone()) {
            Ok(q) => q,
            Err(e) => {
                self.doc.errors.push(e.to_string());
                return;
            }
        };
        let constrained = !p.constraints.is_empty();

        if p.expect_invariant {
            let xl = self.timed("invariance", |_| {
                prolonged_action_rf(&q.components_rf(), &l, mode)
            });
            let verdict = self.timed("invariance", |r| r.verdict(&xl));
            let expr = self.show(&xl);
            self.doc.invariance = Some(Checked { expr, verdict });
        }
        if !constrained {
            let outcome = self.timed("variational", |r| {
                verify_in(mode, &p.lagrangian, &q, &r.opts.config)
            });
            self.doc.variational = Some(match outcome {
                Ok(status) => Variational {
                    status,
                    variable: None,
                    verdict: None,
                },
                Err(err) => {
                    let (var, v) = failure_note(&err);
                    Variational {
                        status: v.status,
                        variable: Some(var),
                        verdict: Some(VerdictDoc::new(&v, &|a| self.scope.atom_text(a))),
                    }
                }
            });
        }

        let relations = if family.is_empty() {
            Vec::new()
        } else {
            self.timed("relations", |_| relations_in(mode, &p.lagrangian, &q))
        };
        if !constrained {
            for (g, rel) in family.iter().zip(&relations) {
                let verdict = self.timed("relations", |r| r.verdict(rel));
                let expr = self.show(rel);
                self.doc.relations.push(PerFunction {
                    function: g.to_string(),
                    expr,
                    verdict,
                });
            }
        }
        if let Some(form) = &p.eliminate {
            match LinearOperator::from_linear_forms(mode, axes, std::slice::from_ref(form), &family)
            {
                Ok(op) => {
                    let e = self.timed("eliminate", |_| op.apply_row_rf(0, &relations));
                    let verdict = self.timed("eliminate", |r| r.verdict(&e));
                    let expr = self.show(&e);
                    self.doc.eliminated = Some(Checked { expr, verdict });
                }
                Err(e) => self.doc.errors.push(format!("eliminate: {e}")),
            }
        }
        if verify {
            for ex in &p.expectations {
                if let Target::Relation(g) = &ex.target {
                    let i = p
                        .arbitrary
                        .iter()
                        .position(|d| d == g)
                        .expect("validated function");
                    let diff = self
                        .rf("expected relation", &ex.expr)
                        .map(|w| relations[i].sub(&w));
                    self.expect(format!("relation {g}"), diff);
                }
            }
        }

        let mut claw = None;
        if constrained && !p.multipliers.is_empty() {
            let op = match LinearOperator::from_linear_forms(mode, axes, &p.constraints, &family) {
                Ok(op) => op,
                Err(e) => {
                    self.doc.errors.push(format!("constraints: {e}"));
                    return;
                }
            };
            let residuals = match self.timed("residuals", |_| {
                residuals_in(mode, &p.lagrangian, &q, &op, &p.multipliers)
            }) {
                Ok(r) => r,
                Err(e) => {
                    self.doc.errors.push(e.to_string());
                    return;
                }
            };
            let mut all_zero = true;
            for (g, res) in family.iter().zip(&residuals) {
                let verdict = self.timed("residuals", |r| r.verdict(res));
                all_zero &= verdict.is_zero();
                let expr = self.show(res);
                self.doc.residuals.push(PerFunction {
                    function: g.to_string(),
                    expr,
                    verdict,
                });
            }
            if stage >= Stage::Claw && all_zero {
                claw = self.conservation_law(&q, &op);
            }
        }
        if stage >= Stage::Claw {
            if let (Some((field, c)), Some(nu)) = (&p.potential_link, p.multipliers.first()) {
                let link = potential_link_check(nu, field, c);
                self.doc.potential_link = Some(PotentialLinkDoc {
                    cleared: self.scope.print(&link.cleared),
                    matches_potential_form: link.matches_potential_form,
                });
            }
        }
        if !verify {
            return;
        }
        for (name, e) in &p.identities {
            if let Some(r) = self.rf("identity", e) {
                let verdict = self.timed("identities", |run| run.verdict(&r));
                self.doc.identities.push(NamedCheck {
                    name: name.clone(),
                    expr: self.show(&r),
                    verdict,
                });
            }
        }
        let flux_expect: Vec<(String, Rf)> = self.expected(|t| match t {
            Target::Flux(a) => Some(a.clone()),
            _ => None,
        });
        let fluxes = claw.as_ref().map(|(f, _)| f.clone());
        self.expect_fluxes("flux", &flux_expect, fluxes.as_deref());
        for sp in &p.specializations {
            let want: Vec<(String, Rf)> = self.expected(|t| match t {
                Target::SpecializedFlux { name, axis } if name == &sp.name => Some(axis.clone()),
                _ => None,
            });
            let got = claw.as_ref().and_then(|(_, s)| s.get(&sp.name)).cloned();
            self.expect_fluxes(
                &format!("specialized {} flux", sp.name),
                &want,
                got.as_deref(),
            );
        }
    }

    fn expected(&mut self, pick: impl Fn(&Target) -> Option<String>) -> Vec<(String, Rf)> {
        let mut out = Vec::new();
        for ex in &self.p.expectations {
            if let Some(axis) = pick(&ex.target) {
                if let Some(r) = self.rf("expected flux", &ex.expr) {
                    out.push((axis, r));
                }
            }
        }
        out
    }

    /// Builds the conservation law and its specializations; returns the
    /// fluxes of each for expectation checks.
    #[allow(clippy::type_complexity)]
    fn conservation_law(
        &mut self,
        q: &Characteristic,
        op: &LinearOperator,
    ) -> Option<(Vec<Rf>, BTreeMap<String, Vec<Rf>>)> {
        let p = self.p;
        let mode = self.mode();
        let config = self.opts.config;
        let cl = match self.timed("conservation law", |_| {
            conservation_law_in(mode, &p.lagrangian, q, op, &p.multipliers, &config)
        }) {
            Ok(cl) => cl,
            Err(e) => {
                self.doc.errors.push(e.to_string());
                return None;
            }
        };
        let fluxes: Vec<Rf> = cl.fluxes.0.iter().map(crate::expr::canon).collect();
        let identity = crate::expr::canon(&cl.identity_residual());
        let verdict = self.timed("conservation law", |r| r.verdict(&identity));
        self.doc.conservation_law = Some(ClawDoc {
            fluxes: self.flux_docs(&fluxes),
            defect: self.scope.print(&cl.defect),
            verdict,
        });
        let mut special = BTreeMap::new();
        for sp in &p.specializations {
            let bindings: BTreeMap<Arc<str>, Expr> = sp
                .bindings
                .iter()
                .map(|(g, e)| (Arc::from(g.as_str()), e.clone()))
                .collect();
            match self.timed("specializations", |_| {
                specialize_in(&cl, &bindings, &config)
            }) {
                Ok(s) => {
                    let fl: Vec<Rf> = s.fluxes.0.iter().map(crate::expr::canon).collect();
                    let divergence = self.show(&divergence_rf(mode, &fl));
                    self.doc.specializations.push(SpecializationDoc {
                        name: sp.name.clone(),
                        fluxes: self.flux_docs(&fl),
                        divergence,
                        error: None,
                    });
                    special.insert(sp.name.clone(), fl);
                }
                Err(e) => self.doc.specializations.push(SpecializationDoc {
                    name: sp.name.clone(),
                    fluxes: Vec::new(),
                    divergence: String::new(),
                    error: Some(e.to_string()),
                }),
            }
        }
        Some((fluxes, special))
    }

    fn flux_docs(&self, fluxes: &[Rf]) -> Vec<Flux> {
        self.p
            .independents
            .iter()
            .zip(fluxes)
            .map(|(axis, f)| Flux {
                axis: axis.clone(),
                expr: self.show(f),
            })
            .collect()
    }
}
