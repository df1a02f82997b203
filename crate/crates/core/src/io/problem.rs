//! `.n2` problem files.
//!
//! A file is a sequence of sections. A header starts in column 0 and ends at
//! the first `:`; indented lines continue the section above. `#` starts a
//! comment.
//!
//! ```text
//! name: wave
//! kind: continuous
//! vars: x, t
//! fields: u
//! arbitrary: g1, g2
//! lagrangian: 1/2*(u_t^2 - u_x^2)
//! characteristic u: g1 + g2
//! constraint: g1_x + g1_t = 0
//! constraint: g2_x - g2_t = 0
//! multiplier 1: u_x - u_t
//! multiplier 2: u_x + u_t
//! expect flux x: (g1 + g2)*u_x - (g1 - g2)*u_t
//! ```
//!
//! Other sections: `params: f, complex z`, `define NAME: expr` (expanded
//! where used), `eliminate: form`, `identity NAME: expr`,
//! `specialize NAME: g1 = 1, g2 = 0`, `potential_link: u, c`,
//! `expect euler u:`, `expect relation g1:`,
//! `expect specialized NAME flux x:` and `expect invariant:`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::expr::{is_linear_homogeneous, Expr, Mode};

use super::syntax::{arc, locate, ExprParser, Located, NameKind, ParseError, Scope, RESERVED};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    /// Field this one is declared as the conjugate of.
    pub conjugate_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub complex: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Specialization {
    pub name: String,
    pub bindings: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Euler(String),
    Relation(String),
    Flux(String),
    SpecializedFlux { name: String, axis: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    pub target: Target,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub kind: Mode,
    pub independents: Vec<String>,
    pub fields: Vec<FieldDecl>,
    pub params: Vec<ParamDecl>,
    pub arbitrary: Vec<String>,
    pub lagrangian: Expr,
    /// `Q^α` per field, in declaration order; absent fields have `Q^α = 0`.
    pub characteristic: Vec<(String, Expr)>,
    /// Rows `𝒟_s(γ) = 0`, stored as `lhs − rhs`.
    pub constraints: Vec<Expr>,
    pub multipliers: Vec<Expr>,
    /// Linear form in the arbitrary functions applied to the relations.
    pub eliminate: Option<Expr>,
    pub identities: Vec<(String, Expr)>,
    pub specializations: Vec<Specialization>,
    /// Field and constant of the lattice potential form.
    pub potential_link: Option<(String, Expr)>,
    pub expectations: Vec<Expectation>,
    /// The characteristic leaves the Lagrangian exactly invariant.
    pub expect_invariant: bool,
}

impl ProblemFile {
    pub fn axes(&self) -> usize {
        self.independents.len()
    }

    pub fn family(&self) -> Vec<Arc<str>> {
        self.arbitrary.iter().map(|g| arc(g)).collect()
    }

    pub(crate) fn scope(&self) -> Scope {
        let mut s = Scope::new(self.kind);
        s.axes = self.independents.clone();
        for (i, a) in self.independents.iter().enumerate() {
            s.names.insert(a.clone(), NameKind::Axis(i));
        }
        for f in &self.fields {
            s.names.insert(f.name.clone(), NameKind::Field);
            if let Some(p) = &f.conjugate_of {
                s.pairing = std::mem::take(&mut s.pairing).pair(p, &f.name);
            }
        }
        for p in &self.params {
            s.names
                .insert(p.name.clone(), NameKind::Param { complex: p.complex });
        }
        for g in &self.arbitrary {
            s.names.insert(g.clone(), NameKind::Arbitrary);
        }
        s
    }
}

/// One section: header words, the content characters, the header line.
struct Section {
    words: Vec<String>,
    body: Vec<Located>,
    line: usize,
    end: (usize, usize),
}

impl Section {
    fn text(&self) -> String {
        self.body
            .iter()
            .map(|c| c.ch)
            .collect::<String>()
            .trim()
            .to_string()
    }

    fn invalid(&self, message: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            line: self.line,
            message: message.into(),
        }
    }

    /// Splits the body at top-level occurrences of `sep`.
    fn split(&self, sep: char) -> Vec<&[Located]> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, c) in self.body.iter().enumerate() {
            match c.ch {
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => depth -= 1,
                ch if ch == sep && depth == 0 => {
                    out.push(&self.body[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        out.push(&self.body[start..]);
        out
    }
}

fn trimmed(s: &[Located]) -> &[Located] {
    let a = s
        .iter()
        .position(|c| !c.ch.is_whitespace())
        .unwrap_or(s.len());
    let b = s
        .iter()
        .rposition(|c| !c.ch.is_whitespace())
        .map_or(a, |b| b + 1);
    &s[a..b]
}

fn text_of(s: &[Located]) -> String {
    trimmed(s).iter().map(|c| c.ch).collect()
}

fn sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut out: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let code = raw.split('#').next().unwrap_or("");
        if code.trim().is_empty() {
            continue;
        }
        let width = code.chars().count();
        if code.starts_with(char::is_whitespace) {
            let Some(sec) = out.last_mut() else {
                let column = code.chars().position(|c| !c.is_whitespace()).unwrap_or(0) + 1;
                return Err(ParseError::Syntax {
                    line,
                    column,
                    expected: vec!["section header".into()],
                    found: "indented text".into(),
                });
            };
            sec.body.push(Located {
                ch: '\n',
                line,
                column: 0,
            });
            sec.body.extend(locate(code, line, 1));
            sec.end = (line, width + 1);
            continue;
        }
        let Some(colon) = code.find(':') else {
            return Err(ParseError::Syntax {
                line,
                column: width + 1,
                expected: vec!["`:`".into()],
                found: "end of line".into(),
            });
        };
        let header = &code[..colon];
        let words: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        let start = header.chars().count() + 2;
        out.push(Section {
            words,
            body: locate(&code[colon + 1..], line, start),
            line,
            end: (line, width + 1),
        });
    }
    Ok(out)
}

fn check_name(name: &str, sec: &Section, taken: &mut BTreeSet<String>) -> Result<(), ParseError> {
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric());
    if !ok {
        return Err(sec.invalid(format!("`{name}` is not a valid name")));
    }
    if RESERVED.contains(&name) {
        return Err(sec.invalid(format!("`{name}` is reserved")));
    }
    if !taken.insert(name.to_string()) {
        return Err(sec.invalid(format!("`{name}` is declared twice")));
    }
    Ok(())
}

fn list(sec: &Section) -> Vec<String> {
    sec.split(',')
        .into_iter()
        .map(text_of)
        .filter(|s| !s.is_empty())
        .collect()
}

fn expr_in(src: &[Located], scope: &Scope, end: (usize, usize)) -> Result<Expr, ParseError> {
    let src = trimmed(src);
    if src.is_empty() {
        return Err(ParseError::Syntax {
            line: end.0,
            column: end.1,
            expected: vec!["expression".into()],
            found: "end of line".into(),
        });
    }
    ExprParser::new(src, scope, end).parse_all()
}

fn one_arg<'a>(sec: &'a Section, what: &str) -> Result<&'a str, ParseError> {
    match sec.words.as_slice() {
        [_, arg] => Ok(arg),
        _ => Err(sec.invalid(format!("`{}` needs exactly one {what}", sec.words[0]))),
    }
}

/// Parses a `.n2` problem description.
pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
    let secs = sections(text)?;
    let mut taken = BTreeSet::new();
    let mut p = ProblemFile {
        name: None,
        kind: Mode::Derivative,
        independents: Vec::new(),
        fields: Vec::new(),
        params: Vec::new(),
        arbitrary: Vec::new(),
        lagrangian: Expr::zero(),
        characteristic: Vec::new(),
        constraints: Vec::new(),
        multipliers: Vec::new(),
        eliminate: None,
        identities: Vec::new(),
        specializations: Vec::new(),
        potential_link: None,
        expectations: Vec::new(),
        expect_invariant: false,
    };

    // Declarations first, so later sections may appear in any order.
    let mut seen_kind = false;
    for sec in &secs {
        let Some(key) = sec.words.first() else {
            return Err(sec.invalid("empty section header"));
        };
        match key.as_str() {
            "name" => p.name = Some(sec.text()),
            "kind" => {
                p.kind = match sec.text().as_str() {
                    "continuous" => Mode::Derivative,
                    "discrete" => Mode::Shift,
                    other => return Err(sec.invalid(format!("unknown kind `{other}`"))),
                };
                seen_kind = true;
            }
            "vars" => {
                for v in list(sec) {
                    check_name(&v, sec, &mut taken)?;
                    p.independents.push(v);
                }
            }
            "fields" => {
                for item in list(sec) {
                    let (name, partner) = match item.split_once('=') {
                        Some((a, b)) => {
                            let b = b.trim();
                            let inner = b
                                .strip_prefix("conj(")
                                .and_then(|s| s.strip_suffix(')'))
                                .ok_or_else(|| {
                                sec.invalid(format!("expected `conj(field)`, found `{b}`"))
                            })?;
                            (a.trim().to_string(), Some(inner.trim().to_string()))
                        }
                        None => (item, None),
                    };
                    check_name(&name, sec, &mut taken)?;
                    p.fields.push(FieldDecl {
                        name,
                        conjugate_of: partner,
                    });
                }
            }
            "params" => {
                for item in list(sec) {
                    let words: Vec<&str> = item.split_whitespace().collect();
                    let (name, complex) = match words.as_slice() {
                        [name] | ["real", name] => (name.to_string(), false),
                        ["complex", name] => (name.to_string(), true),
                        _ => return Err(sec.invalid(format!("malformed parameter `{item}`"))),
                    };
                    check_name(&name, sec, &mut taken)?;
                    p.params.push(ParamDecl { name, complex });
                }
            }
            "arbitrary" => {
                for g in list(sec) {
                    check_name(&g, sec, &mut taken)?;
                    p.arbitrary.push(g);
                }
            }
            _ => {}
        }
    }
    if !seen_kind {
        return Err(ParseError::Invalid {
            line: 1,
            message: "missing `kind:` section".into(),
        });
    }
    for f in &p.fields {
        if let Some(partner) = &f.conjugate_of {
            let ok = p
                .fields
                .iter()
                .any(|g| &g.name == partner && g.conjugate_of.is_none());
            if !ok {
                return Err(ParseError::Invalid {
                    line: 1,
                    message: format!(
                        "`{}` is paired with `{partner}`, which is not a plain field",
                        f.name
                    ),
                });
            }
        }
    }

    let mut scope = p.scope();
    let family: BTreeSet<Arc<str>> = p.family().into_iter().collect();
    let mut lagrangian = None;
    let mut multipliers: BTreeMap<usize, Expr> = BTreeMap::new();
    for sec in &secs {
        let key = sec.words[0].as_str();
        match key {
            "name" | "kind" | "vars" | "fields" | "params" | "arbitrary" => {}
            "define" => {
                let name = one_arg(sec, "name")?.to_string();
                check_name(&name, sec, &mut taken)?;
                let e = expr_in(&sec.body, &scope, sec.end)?;
                scope.defines.insert(name.clone(), e);
                scope.names.insert(name, NameKind::Define);
            }
            "lagrangian" => {
                if lagrangian.is_some() {
                    return Err(sec.invalid("more than one lagrangian"));
                }
                lagrangian = Some(expr_in(&sec.body, &scope, sec.end)?);
            }
            "characteristic" => {
                let field = one_arg(sec, "field")?;
                if !p.fields.iter().any(|f| f.name == field) {
                    return Err(sec.invalid(format!("`{field}` is not a field")));
                }
                if p.characteristic.iter().any(|(f, _)| f == field) {
                    return Err(sec.invalid(format!("two characteristics for `{field}`")));
                }
                let e = expr_in(&sec.body, &scope, sec.end)?;
                p.characteristic.push((field.to_string(), e));
            }
            "constraint" => {
                if trimmed(&sec.body).is_empty() {
                    continue;
                }
                let sides = sec.split('=');
                let row = match sides.as_slice() {
                    [lhs] => expr_in(lhs, &scope, sec.end)?,
                    [lhs, rhs] => expr_in(lhs, &scope, sec.end)? - expr_in(rhs, &scope, sec.end)?,
                    _ => return Err(sec.invalid("more than one `=` in a constraint")),
                };
                if !is_linear_homogeneous(&row, &family) {
                    return Err(ParseError::ConstraintNotLinear { line: sec.line });
                }
                p.constraints.push(row);
            }
            "multiplier" => {
                let s: usize = one_arg(sec, "row number")?
                    .parse()
                    .ok()
                    .filter(|&s| s >= 1)
                    .ok_or_else(|| sec.invalid("multiplier rows are numbered from 1"))?;
                let e = expr_in(&sec.body, &scope, sec.end)?;
                if multipliers.insert(s, e).is_some() {
                    return Err(sec.invalid(format!("two multipliers for row {s}")));
                }
            }
            "eliminate" => {
                let e = expr_in(&sec.body, &scope, sec.end)?;
                if !is_linear_homogeneous(&e, &family) {
                    return Err(
                        sec.invalid("elimination form must be linear in the arbitrary functions")
                    );
                }
                p.eliminate = Some(e);
            }
            "identity" => {
                let name = one_arg(sec, "name")?.to_string();
                let e = expr_in(&sec.body, &scope, sec.end)?;
                p.identities.push((name, e));
            }
            "specialize" => {
                let name = one_arg(sec, "name")?.to_string();
                let mut bindings = Vec::new();
                for part in sec.split(',') {
                    let Some(eq) = part.iter().position(|c| c.ch == '=') else {
                        return Err(sec.invalid("expected `function = expression`"));
                    };
                    let g = text_of(&part[..eq]);
                    if !p.arbitrary.contains(&g) {
                        return Err(sec.invalid(format!("`{g}` is not an arbitrary function")));
                    }
                    bindings.push((g, expr_in(&part[eq + 1..], &scope, sec.end)?));
                }
                p.specializations.push(Specialization { name, bindings });
            }
            "potential_link" => {
                let parts = sec.split(',');
                let [field, c] = parts.as_slice() else {
                    return Err(sec.invalid("expected `field, constant`"));
                };
                let field = text_of(field);
                if !p.fields.iter().any(|f| f.name == field) {
                    return Err(sec.invalid(format!("`{field}` is not a field")));
                }
                if p.kind != Mode::Shift || p.axes() != 2 {
                    return Err(sec.invalid("potential_link needs a discrete problem on two axes"));
                }
                p.potential_link = Some((field, expr_in(c, &scope, sec.end)?));
            }
            "expect" => {
                let words: Vec<&str> = sec.words.iter().map(String::as_str).collect();
                let target = match words.as_slice() {
                    ["expect", "invariant"] => {
                        if !trimmed(&sec.body).is_empty() {
                            return Err(sec.invalid("`expect invariant` takes no expression"));
                        }
                        p.expect_invariant = true;
                        continue;
                    }
                    ["expect", "euler", f] => Target::Euler(f.to_string()),
                    ["expect", "relation", g] => Target::Relation(g.to_string()),
                    ["expect", "flux", a] => Target::Flux(a.to_string()),
                    ["expect", "specialized", n, "flux", a] => Target::SpecializedFlux {
                        name: n.to_string(),
                        axis: a.to_string(),
                    },
                    _ => {
                        return Err(
                            sec.invalid(format!("unknown expectation `{}`", words[1..].join(" ")))
                        )
                    }
                };
                let valid = match &target {
                    Target::Euler(f) => p.fields.iter().any(|d| &d.name == f),
                    Target::Relation(g) => p.arbitrary.contains(g),
                    Target::Flux(a) | Target::SpecializedFlux { axis: a, .. } => {
                        p.independents.contains(a)
                    }
                };
                if !valid {
                    return Err(
                        sec.invalid("expectation names an undeclared field, function or axis")
                    );
                }
                let expr = expr_in(&sec.body, &scope, sec.end)?;
                p.expectations.push(Expectation { target, expr });
            }
            other => return Err(sec.invalid(format!("unknown section `{other}`"))),
        }
    }
    p.lagrangian = lagrangian.ok_or(ParseError::Invalid {
        line: 1,
        message: "missing `lagrangian:` section".into(),
    })?;
    for (k, (s, e)) in multipliers.into_iter().enumerate() {
        if s != k + 1 {
            return Err(ParseError::Invalid {
                line: 1,
                message: format!("multiplier {} is missing", k + 1),
            });
        }
        p.multipliers.push(e);
    }
    if !p.multipliers.is_empty() && p.multipliers.len() != p.constraints.len() {
        return Err(ParseError::Invalid {
            line: 1,
            message: format!(
                "{} multipliers for {} constraint rows",
                p.multipliers.len(),
                p.constraints.len()
            ),
        });
    }
    for sp in &p.specializations {
        if p.specializations
            .iter()
            .filter(|o| o.name == sp.name)
            .count()
            > 1
        {
            return Err(ParseError::Invalid {
                line: 1,
                message: format!("specialization `{}` is defined twice", sp.name),
            });
        }
    }
    for ex in &p.expectations {
        if let Target::SpecializedFlux { name, .. } = &ex.target {
            if !p.specializations.iter().any(|s| &s.name == name) {
                return Err(ParseError::Invalid {
                    line: 1,
                    message: format!("no specialization named `{name}`"),
                });
            }
        }
    }
    p.characteristic
        .sort_by_key(|(f, _)| p.fields.iter().position(|d| &d.name == f));
    Ok(p)
}
