use std::collections::BTreeSet;
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Func};
use super::Q;

/// Immutable expression tree.
///
/// Constructors perform only light bookkeeping (flattening nested sums and
/// products, folding numeric factors); [`canonicalize`](super::canonicalize)
/// produces the unique normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(Q),
    Atom(Atom),
    Add(Arc<Vec<Expr>>),
    Mul(Arc<Vec<Expr>>),
    Pow(Arc<Expr>, Q),
    Func(Func, Arc<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(Q::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(Q::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Q::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Num(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn imag() -> Expr {
        Expr::Atom(Atom::Imag)
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::Atom(a)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(q) if q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(q) if q.is_one())
    }

    pub fn as_num(&self) -> Option<&Q> {
        match self {
            Expr::Num(q) => Some(q),
            _ => None,
        }
    }

    /// Sum with nested sums flattened and numeric terms folded.
    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out: Vec<Expr> = Vec::new();
        let mut num: Option<(usize, Q)> = None;
        let push = |e: Expr, out: &mut Vec<Expr>, num: &mut Option<(usize, Q)>| match e {
            Expr::Num(q) => match num {
                Some((_, acc)) => *acc += q,
                None => {
                    *num = Some((out.len(), q));
                    out.push(Expr::zero());
                }
            },
            other => out.push(other),
        };
        for t in terms {
            match t {
                Expr::Add(inner) => {
                    for e in inner.iter() {
                        push(e.clone(), &mut out, &mut num);
                    }
                }
                other => push(other, &mut out, &mut num),
            }
        }
        if let Some((pos, q)) = num {
            if q.is_zero() {
                out.remove(pos);
            } else {
                out[pos] = Expr::Num(q);
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(Arc::new(out)),
        }
    }

    /// Product with nested products flattened and numeric factors folded into
    /// a single leading coefficient.
    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coeff = Q::one();
        let mut out: Vec<Expr> = Vec::new();
        for f in factors {
            match f {
                Expr::Num(q) => coeff *= q,
                Expr::Mul(inner) => {
                    for e in inner.iter() {
                        match e {
                            Expr::Num(q) => coeff *= q,
                            other => out.push(other.clone()),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::Num(coeff);
        }
        if !coeff.is_one() {
            out.insert(0, Expr::Num(coeff));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Mul(Arc::new(out))
        }
    }

    pub fn pow(base: Expr, exponent: Q) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        if let Expr::Num(b) = &base {
            if exponent.is_integer() && !(b.is_zero() && exponent.is_negative()) {
                let n = exponent.to_integer();
                if let Ok(k) = i32::try_from(&n) {
                    return Expr::Num(num_traits::pow::Pow::pow(b, k));
                }
            }
        }
        Expr::Pow(Arc::new(base), exponent)
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, Q::from_integer(BigInt::from(n)))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        Expr::Func(f, Arc::new(arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::func(Func::Ln, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(Func::Cos, arg)
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    /// Every atom occurring anywhere in the tree.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Expr::Num(_) => {}
            Expr::Atom(a) => {
                out.insert(a.clone());
            }
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.collect_atoms(out)),
            Expr::Pow(b, _) => b.collect_atoms(out),
            Expr::Func(_, a) => a.collect_atoms(out),
        }
    }

    /// Rebuilds the tree with every atom replaced by `f(atom)`.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Expr) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Atom(a) => f(a),
            Expr::Add(v) => Expr::add(v.iter().map(|e| e.map_atoms(f)).collect::<Vec<_>>()),
            Expr::Mul(v) => Expr::mul(v.iter().map(|e| e.map_atoms(f)).collect::<Vec<_>>()),
            Expr::Pow(b, q) => Expr::pow(b.map_atoms(f), q.clone()),
            Expr::Func(g, a) => Expr::func(*g, a.map_atoms(f)),
        }
    }

    /// True when the tree contains no elementary functions or fractional powers.
    pub fn is_rational(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Atom(_) => true,
            Expr::Add(v) | Expr::Mul(v) => v.iter().all(Expr::is_rational),
            Expr::Pow(b, q) => q.is_integer() && b.is_rational(),
            Expr::Func(..) => false,
        }
    }

    /// Prints the tree with a caller-supplied atom formatter.
    ///
    /// The output re-parses to a structurally identical tree.
    pub fn write_with(
        &self,
        out: &mut dyn fmt::Write,
        atom: &dyn Fn(&Atom) -> String,
    ) -> fmt::Result {
        Printer { atom }.expr(self, out)
    }

    pub fn display_with(&self, atom: &dyn Fn(&Atom) -> String) -> String {
        let mut s = String::new();
        self.write_with(&mut s, atom)
            .expect("writing to String cannot fail");
        s
    }
}

struct Printer<'a> {
    atom: &'a dyn Fn(&Atom) -> String,
}

fn write_q(q: &Q, out: &mut dyn fmt::Write) -> fmt::Result {
    if q.is_integer() {
        write!(out, "{}", q.numer())
    } else {
        write!(out, "{}/{}", q.numer(), q.denom())
    }
}

/// Splits off a leading negative sign, returning the magnitude.
fn negative_part(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(q) if q.is_negative() => Some(Expr::Num(-q)),
        Expr::Mul(v) => match &v[0] {
            Expr::Num(q) if q.is_negative() => {
                let mut rest: Vec<Expr> = v[1..].to_vec();
                let mag = -q;
                if !mag.is_one() {
                    rest.insert(0, Expr::Num(mag));
                }
                if rest.len() == 1 {
                    rest.pop()
                } else {
                    Some(Expr::Mul(Arc::new(rest)))
                }
            }
            _ => None,
        },
        _ => None,
    }
}

impl Printer<'_> {
    fn expr(&self, e: &Expr, out: &mut dyn fmt::Write) -> fmt::Result {
        match e {
            Expr::Add(terms) => {
                for (k, t) in terms.iter().enumerate() {
                    match negative_part(t) {
                        Some(mag) => {
                            out.write_str(if k == 0 { "-" } else { " - " })?;
                            self.term(&mag, out)?;
                        }
                        None => {
                            if k > 0 {
                                out.write_str(" + ")?;
                            }
                            self.term(t, out)?;
                        }
                    }
                }
                Ok(())
            }
            other => match negative_part(other) {
                Some(mag) => {
                    out.write_str("-")?;
                    self.term(&mag, out)
                }
                None => self.term(other, out),
            },
        }
    }

    /// Prints at multiplicative precedence; sums get parentheses.
    fn term(&self, e: &Expr, out: &mut dyn fmt::Write) -> fmt::Result {
        match e {
            Expr::Add(_) => {
                out.write_str("(")?;
                self.expr(e, out)?;
                out.write_str(")")
            }
            Expr::Mul(factors) => {
                for (k, f) in factors.iter().enumerate() {
                    match f {
                        Expr::Pow(b, q) if k > 0 && *q == -Q::one() => {
                            out.write_str("/")?;
                            self.base(b, out)?;
                        }
                        _ => {
                            if k > 0 {
                                out.write_str("*")?;
                            }
                            self.factor(f, out)?;
                        }
                    }
                }
                Ok(())
            }
            other => self.factor(other, out),
        }
    }

    fn factor(&self, e: &Expr, out: &mut dyn fmt::Write) -> fmt::Result {
        match e {
            Expr::Num(q) => write_q(q, out),
            Expr::Pow(b, q) => {
                self.base(b, out)?;
                out.write_str("^")?;
                if q.is_integer() && !q.is_negative() {
                    write_q(q, out)
                } else {
                    out.write_str("(")?;
                    write_q(q, out)?;
                    out.write_str(")")
                }
            }
            Expr::Add(_) | Expr::Mul(_) => {
                out.write_str("(")?;
                self.expr(e, out)?;
                out.write_str(")")
            }
            _ => self.base(e, out),
        }
    }

    /// Prints something that may sit left of `^` or right of `/`.
    fn base(&self, e: &Expr, out: &mut dyn fmt::Write) -> fmt::Result {
        match e {
            Expr::Atom(a) => out.write_str(&(self.atom)(a)),
            Expr::Func(f, arg) => {
                write!(out, "{}(", f.name())?;
                self.expr(arg, out)?;
                out.write_str(")")
            }
            Expr::Num(q) if q.is_integer() && !q.is_negative() => write_q(q, out),
            _ => {
                out.write_str("(")?;
                self.expr(e, out)?;
                out.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, &|a| a.to_string())
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Self {
        Expr::Atom(a)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Q> for Expr {
    fn from(q: Q) -> Self {
        Expr::Num(q)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add([a, b]));
binop!(Sub, sub, |a, b| Expr::add([a, -b]));
binop!(Mul, mul, |a, b| Expr::mul([a, b]));
binop!(Div, div, |a, b| Expr::mul([a, b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul([Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
