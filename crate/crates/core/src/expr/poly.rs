use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::atom::{Atom, Func};
use super::rf::Rf;
use super::Q;

/// Indeterminate of the polynomial layer.
///
/// Atoms are free variables; function applications and fractional powers are
/// opaque kernels keyed by their canonical argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Kernel {
    Atom(Atom),
    Func(Func, Arc<Rf>),
    /// `base^q` with `0 < q < 1`.
    Root(Arc<Rf>, Q),
}

impl Kernel {
    pub(crate) fn is_imag(&self) -> bool {
        matches!(self, Kernel::Atom(Atom::Imag))
    }

    /// Atoms occurring in this kernel, including inside arguments.
    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Kernel::Atom(a) => {
                out.insert(a.clone());
            }
            Kernel::Func(_, arg) | Kernel::Root(arg, _) => arg.collect_atoms(out),
        }
    }
}

pub(crate) type Monomial = Vec<(Kernel, u32)>;

/// Sparse polynomial with rational coefficients over kernels.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

/// Sorts, merges and reduces a monomial: `i² = −1`, and all `exp` factors
/// combine into one `exp` of the summed argument.
fn normalize_monomial(factors: impl IntoIterator<Item = (Kernel, u32)>) -> (Q, Monomial) {
    let mut merged: BTreeMap<Kernel, u32> = BTreeMap::new();
    for (k, e) in factors {
        if e > 0 {
            *merged.entry(k).or_insert(0) += e;
        }
    }
    let mut sign = Q::one();
    let mut out: Monomial = Vec::with_capacity(merged.len());
    let mut exps: Vec<(Arc<Rf>, u32)> = Vec::new();
    for (k, e) in merged {
        match k {
            Kernel::Atom(Atom::Imag) => {
                let r = e % 4;
                if r >= 2 {
                    sign = -sign;
                }
                if r % 2 == 1 {
                    out.push((Kernel::Atom(Atom::Imag), 1));
                }
            }
            Kernel::Func(Func::Exp, arg) => exps.push((arg, e)),
            other => out.push((other, e)),
        }
    }
    match exps.len() {
        0 => {}
        1 if exps[0].1 == 1 => {
            let (arg, _) = exps.pop().unwrap();
            out.push((Kernel::Func(Func::Exp, arg), 1));
        }
        _ => {
            let mut total = Rf::zero();
            for (arg, e) in &exps {
                total = total.add(&arg.scale(&Q::from_integer((*e).into())));
            }
            if !total.is_zero() {
                out.push((Kernel::Func(Func::Exp, Arc::new(total)), 1));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    (sign, out)
}

impl Poly {
    pub(crate) fn zero() -> Poly {
        Poly::default()
    }

    pub(crate) fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub(crate) fn constant(c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub(crate) fn kernel(k: Kernel) -> Poly {
        Poly::from_factors([(k, 1)], Q::one())
    }

    /// `coeff * Π kernel^exp`, normalized.
    pub(crate) fn from_factors(factors: impl IntoIterator<Item = (Kernel, u32)>, coeff: Q) -> Poly {
        let (sign, m) = normalize_monomial(factors);
        let mut p = Poly::zero();
        p.add_term(m, coeff * sign);
        p
    }

    pub(crate) fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub(crate) fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn leading_coefficient(&self) -> Option<&Q> {
        self.terms.values().next_back()
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let (mut out, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub(crate) fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    pub(crate) fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let (sign, m) = normalize_monomial(ma.iter().chain(mb.iter()).cloned());
                out.add_term(m, ca * cb * sign);
            }
        }
        out
    }

    pub(crate) fn powi(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Distinct kernels appearing at top level.
    pub(crate) fn kernels(&self) -> BTreeSet<Kernel> {
        self.terms
            .keys()
            .flat_map(|m| m.iter().map(|(k, _)| k.clone()))
            .collect()
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        for m in self.terms.keys() {
            for (k, _) in m {
                k.collect_atoms(out);
            }
        }
    }

    pub(crate) fn contains_imag(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.iter().any(|(k, _)| k.is_imag()))
    }

    /// Replaces `i` by `−i`.
    pub(crate) fn flip_imag(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let neg = m.iter().any(|(k, _)| k.is_imag());
            out.add_term(m.clone(), if neg { -c } else { c.clone() });
        }
        out
    }

    /// Splits `p = re + i·im` where `re`, `im` carry no bare `i`.
    pub(crate) fn split_imag(&self) -> (Poly, Poly) {
        let mut re = Poly::zero();
        let mut im = Poly::zero();
        for (m, c) in &self.terms {
            if m.iter().any(|(k, _)| k.is_imag()) {
                let stripped: Monomial = m.iter().filter(|(k, _)| !k.is_imag()).cloned().collect();
                im.add_term(stripped, c.clone());
            } else {
                re.add_term(m.clone(), c.clone());
            }
        }
        (re, im)
    }
}
