//! Writes a [`ProblemFile`] back out as `.n2` text.
//!
//! Definitions are expanded during parsing, so the output contains none;
//! reparsing the output gives the same problem.

use std::fmt::Write;

use crate::expr::Mode;

use super::problem::{ProblemFile, Target};

pub fn print(p: &ProblemFile) -> String {
    let scope = p.scope();
    let e = |x| scope.print(x);
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    if let Some(name) = &p.name {
        line(format!("name: {name}"));
    }
    line(format!(
        "kind: {}",
        match p.kind {
            Mode::Derivative => "continuous",
            Mode::Shift => "discrete",
        }
    ));
    if !p.independents.is_empty() {
        line(format!("vars: {}", p.independents.join(", ")));
    }
    if !p.fields.is_empty() {
        let items: Vec<String> = p
            .fields
            .iter()
            .map(|f| match &f.conjugate_of {
                Some(partner) => format!("{} = conj({partner})", f.name),
                None => f.name.clone(),
            })
            .collect();
        line(format!("fields: {}", items.join(", ")));
    }
    if !p.params.is_empty() {
        let items: Vec<String> = p
            .params
            .iter()
            .map(|q| {
                if q.complex {
                    format!("complex {}", q.name)
                } else {
                    q.name.clone()
                }
            })
            .collect();
        line(format!("params: {}", items.join(", ")));
    }
    if !p.arbitrary.is_empty() {
        line(format!("arbitrary: {}", p.arbitrary.join(", ")));
    }
    line(format!("lagrangian: {}", e(&p.lagrangian)));
    for (field, q) in &p.characteristic {
        line(format!("characteristic {field}: {}", e(q)));
    }
    for row in &p.constraints {
        line(format!("constraint: {} = 0", e(row)));
    }
    for (s, nu) in p.multipliers.iter().enumerate() {
        line(format!("multiplier {}: {}", s + 1, e(nu)));
    }
    if let Some(form) = &p.eliminate {
        line(format!("eliminate: {}", e(form)));
    }
    for (name, x) in &p.identities {
        line(format!("identity {name}: {}", e(x)));
    }
    for sp in &p.specializations {
        let mut s = format!("specialize {}:", sp.name);
        for (k, (g, b)) in sp.bindings.iter().enumerate() {
            let sep = if k == 0 { " " } else { ", " };
            write!(s, "{sep}{g} = {}", e(b)).expect("string write");
        }
        line(s);
    }
    if let Some((field, c)) = &p.potential_link {
        line(format!("potential_link: {field}, {}", e(c)));
    }
    if p.expect_invariant {
        line("expect invariant:".into());
    }
    for ex in &p.expectations {
        let head = match &ex.target {
            Target::Euler(f) => format!("euler {f}"),
            Target::Relation(g) => format!("relation {g}"),
            Target::Flux(a) => format!("flux {a}"),
            Target::SpecializedFlux { name, axis } => format!("specialized {name} flux {axis}"),
        };
        line(format!("expect {head}: {}", e(&ex.expr)));
    }
    out
}
