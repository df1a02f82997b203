//! Expression syntax of `.n2` files.
//!
//! ```text
//! sum     = term { ("+" | "-") term }
//! term    = unary { ("*" | "/") unary }
//! unary   = "-" unary | "+" unary | power
//! power   = primary [ "^" unary ]
//! primary = number | "(" sum ")" | call | "I" | name [ subscript | offsets ]
//! ```
//!
//! Jets are `u_x`, `u_xxt`, `u_{a1,a2}` on continuous problems and `u[1,-1]`
//! on lattices; a bare field name is the undifferentiated (unshifted) value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::diff::total_derivative;
use crate::expr::{conj, Atom, Conjugation, Expr, Mode, MultiIndex, Q};
use crate::lattice::shift;

/// A source character with its 1-based position.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Located {
    pub ch: char,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{column}: undeclared identifier `{name}`")]
    UndeclaredIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}: constraint is not linear homogeneous in the arbitrary functions")]
    ConstraintNotLinear { line: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum NameKind {
    Field,
    Arbitrary,
    Param { complex: bool },
    Axis(usize),
    Define,
}

/// Declared names visible to expressions.
#[derive(Clone, Debug)]
pub(crate) struct Scope {
    pub mode: Mode,
    pub axes: Vec<String>,
    pub names: BTreeMap<String, NameKind>,
    pub defines: BTreeMap<String, Expr>,
    pub pairing: Conjugation,
}

pub(crate) const RESERVED: &[&str] = &["I", "exp", "ln", "sin", "cos", "conj", "diff", "shift"];

impl Scope {
    pub fn new(mode: Mode) -> Self {
        Scope {
            mode,
            axes: Vec::new(),
            names: BTreeMap::new(),
            defines: BTreeMap::new(),
            pairing: Conjugation::new(),
        }
    }

    fn compact_axes(&self) -> bool {
        self.axes.iter().all(|a| a.chars().count() == 1)
    }

    fn axis(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a == name)
    }

    /// DSL spelling of an atom.
    pub fn atom_text(&self, a: &Atom) -> String {
        match a {
            Atom::Imag => "I".into(),
            Atom::Param {
                name, conjugated, ..
            } => {
                if *conjugated {
                    format!("conj({name})")
                } else {
                    name.to_string()
                }
            }
            Atom::Indep { name, .. } => name.to_string(),
            Atom::Jet { field: name, index } | Atom::ArbJet { func: name, index } => {
                if index.is_zero() {
                    return name.to_string();
                }
                match index.mode() {
                    Mode::Shift => {
                        let parts: Vec<String> =
                            index.offsets().iter().map(i32::to_string).collect();
                        format!("{name}[{}]", parts.join(","))
                    }
                    Mode::Derivative => {
                        let mut letters = Vec::new();
                        for (axis, &n) in index.offsets().iter().enumerate() {
                            for _ in 0..n {
                                letters.push(self.axes[axis].as_str());
                            }
                        }
                        if self.compact_axes() {
                            format!("{name}_{}", letters.concat())
                        } else {
                            format!("{name}_{{{}}}", letters.join(","))
                        }
                    }
                }
            }
        }
    }

    pub fn print(&self, e: &Expr) -> String {
        e.display_with(&|a| self.atom_text(a))
    }
}

/// Renders the remaining input for an error message.
fn describe(c: Option<&Located>) -> String {
    match c {
        None => "end of input".into(),
        Some(l) if l.ch == '\n' => "end of line".into(),
        Some(l) => format!("`{}`", l.ch),
    }
}

pub(crate) struct ExprParser<'a> {
    src: &'a [Located],
    pos: usize,
    scope: &'a Scope,
    /// Position reported when the input runs out.
    end: (usize, usize),
}

impl<'a> ExprParser<'a> {
    pub fn new(src: &'a [Located], scope: &'a Scope, end: (usize, usize)) -> Self {
        ExprParser {
            src,
            pos: 0,
            scope,
            end,
        }
    }

    /// Parses the whole input as one expression.
    pub fn parse_all(mut self) -> Result<Expr, ParseError> {
        let e = self.sum()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error(&["`+`", "`-`", "`*`", "`/`", "`^`", "end of expression"]));
        }
        Ok(e)
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.ch.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src.get(self.pos).map(|c| c.ch)
    }

    fn here(&self) -> (usize, usize) {
        self.src
            .get(self.pos)
            .map(|c| (c.line, c.column))
            .unwrap_or(self.end)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (line, column) = self.here();
        ParseError::Syntax {
            line,
            column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: describe(self.src.get(self.pos)),
        }
    }

    fn invalid(&self, message: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            line: self.here().0,
            message: message.into(),
        }
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            let want = format!("`{ch}`");
            Err(self.error(&[want.as_str()]))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some('-') => {
                    self.pos += 1;
                    terms.push(-self.term()?);
                }
                _ => return Ok(Expr::add(terms)),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expr::mul([acc, rhs]);
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return Err(self.invalid("division by the constant 0"));
                    }
                    acc = Expr::mul([acc, Expr::pow(rhs, -Q::one())]);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        self.skip_ws();
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let exponent = self.unary()?;
        match exponent.as_num() {
            Some(q) => {
                if base.is_zero() && !q.is_positive_q() {
                    return Err(self.invalid("0 raised to a non-positive power"));
                }
                Ok(Expr::pow(base, q.clone()))
            }
            None => {
                self.pos = at;
                Err(self.error(&["rational constant exponent"]))
            }
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.pos += 1;
        }
        let mut value = Q::from_integer(digits.parse::<BigInt>().expect("digits"));
        if self.peek() == Some('.') {
            self.pos += 1;
            let mut frac = String::new();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                frac.push(c);
                self.pos += 1;
            }
            if frac.is_empty() {
                return Err(self.error(&["digit"]));
            }
            let scale = BigInt::from(10).pow(frac.len() as u32);
            value += Q::new(frac.parse::<BigInt>().expect("digits"), scale);
        }
        Ok(Expr::Num(value))
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_alphanumeric) {
            s.push(c);
            self.pos += 1;
        }
        s
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => self.number(),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let (line, column) = self.here();
                let name = self.ident();
                self.named(name, line, column)
            }
            _ => Err(self.error(&["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn named(&mut self, name: String, line: usize, column: usize) -> Result<Expr, ParseError> {
        if let Some(f) = crate::expr::Func::from_name(&name) {
            self.expect('(')?;
            let arg = self.sum()?;
            self.expect(')')?;
            return Ok(Expr::func(f, arg));
        }
        match name.as_str() {
            "I" => return Ok(Expr::imag()),
            "conj" => {
                self.expect('(')?;
                let arg = self.sum()?;
                self.expect(')')?;
                return Ok(conj(&arg, &self.scope.pairing));
            }
            "diff" => return self.diff_call(),
            "shift" => return self.shift_call(),
            _ => {}
        }
        let Some(kind) = self.scope.names.get(&name).copied() else {
            return Err(ParseError::UndeclaredIdentifier { name, line, column });
        };
        match kind {
            NameKind::Define => Ok(self.scope.defines[&name].clone()),
            NameKind::Param { complex: false } => Ok(Expr::atom(Atom::param(&name))),
            NameKind::Param { complex: true } => Ok(Expr::atom(Atom::complex_param(&name))),
            NameKind::Axis(axis) => Ok(Expr::atom(Atom::indep(&name, axis))),
            NameKind::Field | NameKind::Arbitrary => {
                let index = self.index_suffix()?;
                let atom = if kind == NameKind::Field {
                    Atom::jet(&name, index)
                } else {
                    Atom::arb(&name, index)
                };
                Ok(Expr::atom(atom))
            }
        }
    }

    /// `diff(e, x)` or `diff(e, x, t, ...)`: total derivative.
    fn diff_call(&mut self) -> Result<Expr, ParseError> {
        if self.scope.mode != Mode::Derivative {
            return Err(self.invalid("diff() needs a continuous problem"));
        }
        self.expect('(')?;
        let mut e = self.sum()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    self.skip_ws();
                    let axis = self.axis_name()?;
                    e = total_derivative(&e, axis);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(e);
                }
                _ => return Err(self.error(&["`,`", "`)`"])),
            }
        }
    }

    /// `shift(e, [i, j, ...])`.
    fn shift_call(&mut self) -> Result<Expr, ParseError> {
        if self.scope.mode != Mode::Shift {
            return Err(self.invalid("shift() needs a discrete problem"));
        }
        self.expect('(')?;
        let e = self.sum()?;
        self.expect(',')?;
        self.skip_ws();
        let offsets = self.offsets()?;
        self.expect(')')?;
        Ok(shift(&e, &MultiIndex::shift(&offsets)))
    }

    fn axis_name(&mut self) -> Result<usize, ParseError> {
        let (line, column) = self.here();
        let name = self.ident();
        if name.is_empty() {
            return Err(self.error(&["axis name"]));
        }
        self.scope
            .axis(&name)
            .ok_or(ParseError::UndeclaredIdentifier { name, line, column })
    }

    fn index_suffix(&mut self) -> Result<MultiIndex, ParseError> {
        let axes = self.scope.axes.len();
        match (self.scope.mode, self.peek()) {
            (Mode::Derivative, Some('_')) => {
                self.pos += 1;
                self.subscript()
            }
            (Mode::Shift, Some('[')) => Ok(MultiIndex::shift(&self.offsets()?)),
            (Mode::Derivative, Some('[')) => {
                Err(self.invalid("lattice offsets on a continuous problem"))
            }
            (Mode::Shift, Some('_')) => {
                Err(self.invalid("derivative subscript on a discrete problem"))
            }
            (mode, _) => Ok(MultiIndex::zero(mode, axes)),
        }
    }

    fn subscript(&mut self) -> Result<MultiIndex, ParseError> {
        let mut counts = vec![0u32; self.scope.axes.len()];
        if self.peek() == Some('{') {
            self.pos += 1;
            loop {
                self.skip_ws();
                let start = self.pos;
                let (line, column) = self.here();
                let word = self.ident();
                if word.is_empty() {
                    return Err(self.error(&["axis name"]));
                }
                match self.scope.axis(&word) {
                    Some(axis) => counts[axis] += 1,
                    None if self.scope.compact_axes() => {
                        for (k, ch) in word.chars().enumerate() {
                            match self.scope.axis(&ch.to_string()) {
                                Some(axis) => counts[axis] += 1,
                                None => {
                                    self.pos = start + k;
                                    return Err(self.error(&["axis name"]));
                                }
                            }
                        }
                    }
                    None => {
                        return Err(ParseError::UndeclaredIdentifier {
                            name: word,
                            line,
                            column,
                        })
                    }
                }
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some('}') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error(&["`,`", "`}`"])),
                }
            }
        } else {
            if !self.scope.compact_axes() {
                return Err(self.error(&["`{`"]));
            }
            let mut any = false;
            while let Some(ch) = self.peek().filter(char::is_ascii_alphanumeric) {
                match self.scope.axis(&ch.to_string()) {
                    Some(axis) => counts[axis] += 1,
                    None => return Err(self.error(&["axis name"])),
                }
                self.pos += 1;
                any = true;
            }
            if !any {
                return Err(self.error(&["axis name", "`{`"]));
            }
        }
        Ok(MultiIndex::derivative(&counts))
    }

    fn offsets(&mut self) -> Result<Vec<i32>, ParseError> {
        if self.peek() != Some('[') {
            return Err(self.error(&["`[`"]));
        }
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let negative = self.peek() == Some('-');
            if negative {
                self.pos += 1;
            }
            let mut digits = String::new();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                digits.push(c);
                self.pos += 1;
            }
            if digits.is_empty() {
                return Err(self.error(&["integer offset"]));
            }
            let v: i32 = digits
                .parse()
                .map_err(|_| self.invalid("offset out of range"))?;
            out.push(if negative { -v } else { v });
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.error(&["`,`", "`]`"])),
            }
        }
        if out.len() != self.scope.axes.len() {
            return Err(self.invalid(format!(
                "{} offsets given for {} axes",
                out.len(),
                self.scope.axes.len()
            )));
        }
        Ok(out)
    }
}

trait PositiveQ {
    fn is_positive_q(&self) -> bool;
}

impl PositiveQ for Q {
    fn is_positive_q(&self) -> bool {
        *self > Q::zero()
    }
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Field => "field",
            NameKind::Arbitrary => "arbitrary function",
            NameKind::Param { .. } => "parameter",
            NameKind::Axis(_) => "independent variable",
            NameKind::Define => "definition",
        })
    }
}

pub(crate) fn locate(text: &str, line: usize, column: usize) -> Vec<Located> {
    let mut out = Vec::new();
    let mut col = column;
    for ch in text.chars() {
        out.push(Located {
            ch,
            line,
            column: col,
        });
        col += 1;
    }
    out
}

/// Shared handle for names.
pub(crate) fn arc(s: &str) -> Arc<str> {
    Arc::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope(mode: Mode, axes: &[&str]) -> Scope {
        let mut s = Scope::new(mode);
        s.axes = axes.iter().map(|a| a.to_string()).collect();
        for (i, a) in axes.iter().enumerate() {
            s.names.insert(a.to_string(), NameKind::Axis(i));
        }
        s.names.insert("u".into(), NameKind::Field);
        s.names.insert("g".into(), NameKind::Arbitrary);
        s.names
            .insert("c".into(), NameKind::Param { complex: false });
        s
    }

    fn parse(text: &str, s: &Scope) -> Result<Expr, ParseError> {
        let src = locate(text, 1, 1);
        ExprParser::new(&src, s, (1, text.chars().count() + 1)).parse_all()
    }

    #[test]
    fn jets_and_offsets() {
        let s = scope(Mode::Derivative, &["x", "t"]);
        let e = parse("u_xt + u_{t,x} - 2*u", &s).unwrap();
        let j = |a, b| Expr::atom(Atom::jet("u", MultiIndex::derivative(&[a, b])));
        assert!(crate::expr::same(
            &e,
            &(Expr::int(2) * j(1, 1) - Expr::int(2) * j(0, 0))
        ));

        let l = scope(Mode::Shift, &["n", "m"]);
        let e = parse("u[1,-1]*g", &l).unwrap();
        let want = Expr::atom(Atom::jet("u", MultiIndex::shift(&[1, -1])))
            * Expr::atom(Atom::arb("g", MultiIndex::shift(&[0, 0])));
        assert_eq!(e, want);
    }

    #[test]
    fn precedence_and_powers() {
        let s = scope(Mode::Derivative, &["x"]);
        let e = parse("-u^2", &s).unwrap();
        assert_eq!(
            e,
            -Expr::powi(Expr::atom(Atom::jet("u", MultiIndex::derivative(&[0]))), 2)
        );
        let e = parse("c^(1/2)*c^-1", &s).unwrap();
        let c = Expr::atom(Atom::param("c"));
        assert_eq!(
            e,
            Expr::mul([
                Expr::pow(c.clone(), Q::new(1.into(), 2.into())),
                Expr::pow(c, -Q::one())
            ])
        );
        assert_eq!(parse("0.25", &s).unwrap(), Expr::rational(1, 4));
    }

    #[test]
    fn errors_carry_positions() {
        let s = scope(Mode::Derivative, &["x", "t"]);
        match parse("u_{", &s) {
            Err(ParseError::Syntax {
                line: 1,
                column: 4,
                expected,
                found,
            }) => {
                assert_eq!(expected, vec!["axis name".to_string()]);
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("2 u", &s) {
            Err(ParseError::Syntax { column: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            parse("u + w", &s),
            Err(ParseError::UndeclaredIdentifier {
                name: "w".into(),
                line: 1,
                column: 5
            })
        );
        assert!(parse("u^c", &s).is_err());
    }

    #[test]
    fn derivative_and_shift_calls() {
        let s = scope(Mode::Derivative, &["x", "t"]);
        let e = parse("diff(u*u, x)", &s).unwrap();
        let u = |a, b| Expr::atom(Atom::jet("u", MultiIndex::derivative(&[a, b])));
        assert!(crate::expr::same(&e, &(Expr::int(2) * u(0, 0) * u(1, 0))));
        let l = scope(Mode::Shift, &["n", "m"]);
        let e = parse("shift(u[1,0] - u, [0,-1])", &l).unwrap();
        let v = |a, b| Expr::atom(Atom::jet("u", MultiIndex::shift(&[a, b])));
        assert!(crate::expr::same(&e, &(v(1, -1) - v(0, -1))));
    }

    #[test]
    fn printing_reparses() {
        let s = scope(Mode::Derivative, &["x", "t"]);
        for text in [
            "1/2*(u_x^2 - u_t^2)",
            "-c*u_xt/(u - c)^3 + exp(-I*c*u)",
            "c^(1/3) - 2*ln(u_x)*sin(x*t)",
        ] {
            let e = parse(text, &s).unwrap();
            let printed = s.print(&e);
            assert_eq!(parse(&printed, &s).unwrap(), e, "{printed}");
        }
    }
}
