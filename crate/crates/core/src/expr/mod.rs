//! Symbolic expression kernel.
//!
//! Expressions are immutable trees over [`Atom`]s. Every operation that needs
//! algebra converts to a canonical rational function over *kernels* (atoms,
//! elementary-function applications, fractional powers) and converts back.
//! On rational subexpressions that normal form is unique, so an expression is
//! identically zero exactly when its canonical form is `0`.

mod atom;
mod eval;
mod gcd;
mod poly;
pub(crate) mod rf;
mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

pub use atom::{Atom, Func, Mode, MultiIndex, VarKind, VarRef};
pub use eval::{ComplexF, GaussQ, Number, FLOAT_PRECISION};
pub use tree::Expr;

pub(crate) use eval::evaluate_rf;
pub(crate) use poly::Kernel;
pub(crate) use rf::Rf;

/// Exact rational numbers.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("atom `{0}` has no value")]
    Unbound(String),
}

/// Canonical form of `e`.
///
/// # Panics
///
/// If `e` divides by an expression that is identically zero. Use
/// [`try_canonicalize`] for untrusted input.
pub fn canonicalize(e: &Expr) -> Expr {
    try_canonicalize(e).expect("symbolic division by zero")
}

pub fn try_canonicalize(e: &Expr) -> Result<Expr, KernelError> {
    Ok(Rf::from_expr(e)?.to_expr())
}

/// True when `a - b` canonicalizes to zero.
pub fn same(a: &Expr, b: &Expr) -> bool {
    canon(a).sub(&canon(b)).is_zero()
}

pub(crate) fn canon(e: &Expr) -> Rf {
    Rf::from_expr(e).expect("symbolic division by zero")
}

/// Simultaneous replacement of atoms, followed by canonicalization.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Atom, Expr>) -> Expr {
    let images: BTreeMap<&Atom, Rf> = bindings.iter().map(|(a, v)| (a, canon(v))).collect();
    canon(e)
        .substitute(&mut |a| images.get(a).cloned())
        .expect("symbolic division by zero")
        .to_expr()
}

/// Value of `e` at `point`.
///
/// Uses exact Gaussian-rational arithmetic when `e` is rational in its atoms
/// and every binding is exact; otherwise 128-bit complex floats.
pub fn evaluate(e: &Expr, point: &BTreeMap<Atom, Number>) -> Result<Number, KernelError> {
    let r = Rf::from_expr(e)?;
    Ok(evaluate_rf(&r, point)?.value)
}

/// Formal partial derivative with respect to a jet-like atom; every distinct
/// atom is an independent coordinate.
pub fn partial_wrt(e: &Expr, a: &Atom) -> Expr {
    partial_rf(&canon(e), a).to_expr()
}

pub(crate) fn partial_rf(r: &Rf, a: &Atom) -> Rf {
    r.derive(&mut |b| if b == a { Rf::one() } else { Rf::zero() })
}

/// True iff `e` is a sum of terms each holding exactly one arbitrary-function
/// atom from `family` to the first power, with a coefficient free of the family.
pub fn is_linear_homogeneous(e: &Expr, family: &BTreeSet<Arc<str>>) -> bool {
    linear_coefficients(&canon(e), family).is_some()
}

fn in_family(a: &Atom, family: &BTreeSet<Arc<str>>) -> bool {
    matches!(a, Atom::ArbJet { func, .. } if family.contains(func))
}

/// Coefficient of each family atom in a linear homogeneous form, or `None`
/// when the form is not linear homogeneous in the family.
pub(crate) fn linear_coefficients(
    r: &Rf,
    family: &BTreeSet<Arc<str>>,
) -> Option<BTreeMap<Atom, Rf>> {
    if r.den().kernels().iter().any(|k| {
        let mut s = BTreeSet::new();
        k.collect_atoms(&mut s);
        s.iter().any(|a| in_family(a, family))
    }) {
        return None;
    }
    let den_inv = Rf::new(poly::Poly::one(), r.den().clone()).ok()?;
    let mut out: BTreeMap<Atom, poly::Poly> = BTreeMap::new();
    for (m, c) in r.num().terms() {
        let mut hit: Option<Atom> = None;
        let mut rest = Vec::new();
        for (k, e) in m {
            match k {
                Kernel::Atom(a) if in_family(a, family) => {
                    if *e != 1 || hit.is_some() {
                        return None;
                    }
                    hit = Some(a.clone());
                }
                other => {
                    let mut s = BTreeSet::new();
                    other.collect_atoms(&mut s);
                    if s.iter().any(|a| in_family(a, family)) {
                        return None;
                    }
                    rest.push((other.clone(), *e));
                }
            }
        }
        let a = hit?;
        let term = poly::Poly::from_factors(rest, c.clone());
        let slot = out.entry(a).or_default();
        *slot = slot.add(&term);
    }
    Some(
        out.into_iter()
            .map(|(a, p)| (a, Rf::from_poly(p).mul(&den_inv)))
            .collect(),
    )
}

/// Pairing of complex dependent variables with their conjugates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Conjugation {
    partners: BTreeMap<Arc<str>, Arc<str>>,
}

impl Conjugation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `a` and `b` as conjugates of each other.
    pub fn pair(mut self, a: &str, b: &str) -> Self {
        self.partners.insert(Arc::from(a), Arc::from(b));
        self.partners.insert(Arc::from(b), Arc::from(a));
        self
    }

    pub fn partner(&self, field: &str) -> Option<&Arc<str>> {
        self.partners.get(field)
    }

    pub fn conj_atom(&self, a: &Atom) -> Expr {
        match a {
            Atom::Imag => -Expr::imag(),
            Atom::Jet { field, index } => match self.partners.get(field) {
                Some(p) => Expr::Atom(Atom::Jet {
                    field: p.clone(),
                    index: index.clone(),
                }),
                None => Expr::Atom(a.clone()),
            },
            Atom::Param {
                name,
                complex: true,
                conjugated,
            } => Expr::Atom(Atom::Param {
                name: name.clone(),
                complex: true,
                conjugated: !conjugated,
            }),
            _ => Expr::Atom(a.clone()),
        }
    }
}

/// Complex conjugate: swaps paired fields, negates `i`, fixes real atoms.
pub fn conj(e: &Expr, pairing: &Conjugation) -> Expr {
    e.map_atoms(&mut |a| pairing.conj_atom(a))
}
