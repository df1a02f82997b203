//! Canonical rational functions over kernels.
//!
//! Normal form: `num / den` with `den` free of the imaginary unit, monic with
//! respect to the largest monomial, and coprime to `num` (over ℚ(i), computed
//! as `gcd(den, re num, im num)` over ℚ). Transcendental kernels are treated as
//! free indeterminates, so the form is unique only on rational subexpressions.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Func};
use super::gcd::{self, IPoly};
use super::poly::{Kernel, Monomial, Poly};
use super::tree::Expr;
use super::{KernelError, Q};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Rf {
    num: Poly,
    den: Poly,
}

impl Default for Rf {
    fn default() -> Self {
        Rf::zero()
    }
}

impl Rf {
    pub(crate) fn zero() -> Rf {
        Rf {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub(crate) fn one() -> Rf {
        Rf::constant(Q::one())
    }

    pub(crate) fn constant(c: Q) -> Rf {
        Rf {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub(crate) fn from_poly(p: Poly) -> Rf {
        Rf {
            num: p,
            den: Poly::one(),
        }
    }

    pub(crate) fn atom(a: Atom) -> Rf {
        Rf::from_poly(Poly::kernel(Kernel::Atom(a)))
    }

    pub(crate) fn num(&self) -> &Poly {
        &self.num
    }

    pub(crate) fn den(&self) -> &Poly {
        &self.den
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub(crate) fn as_constant(&self) -> Option<Q> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        self.num.collect_atoms(out);
        self.den.collect_atoms(out);
    }

    pub(crate) fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    /// True when no kernel is a function application or fractional power.
    pub(crate) fn is_rational(&self) -> bool {
        let plain = |p: &Poly| p.kernels().iter().all(|k| matches!(k, Kernel::Atom(_)));
        plain(&self.num) && plain(&self.den)
    }

    pub(crate) fn new(num: Poly, den: Poly) -> Result<Rf, KernelError> {
        normalize(num, den)
    }

    pub(crate) fn add(&self, other: &Rf) -> Rf {
        if self.is_polynomial() && other.is_polynomial() {
            return Rf::from_poly(self.num.add(&other.num));
        }
        if self.den == other.den {
            return normalize(self.num.add(&other.num), self.den.clone())
                .expect("denominator is nonzero");
        }
        if other.is_polynomial() {
            return Rf::reduced(self.num.add(&other.num.mul(&self.den)), self.den.clone());
        }
        if self.is_polynomial() {
            return Rf::reduced(other.num.add(&self.num.mul(&other.den)), other.den.clone());
        }
        self.add_by_denominator_gcd(other)
    }

    /// Sum of reduced fractions: with `g = gcd(d1, d2)` the only possible
    /// cancellation in `(n1·d2/g + n2·d1/g) / (d1·d2/g)` is against `g`.
    fn add_by_denominator_gcd(&self, other: &Rf) -> Rf {
        let Some((g, d1g, d2g)) = common_factor(&self.den, &other.den) else {
            let t = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return Rf::settled(t, self.den.mul(&other.den));
        };
        let t = self.num.mul(&d2g).add(&other.num.mul(&d1g));
        if t.is_zero() {
            return Rf::zero();
        }
        let (t, den) = cancel_by(t, d1g.mul(&other.den), &g);
        Rf::settled(t, den)
    }

    /// Finishes a pair with no common factor left, unless merging `exp`
    /// factors produced a shared `exp` in the denominator.
    fn settled(num: Poly, den: Poly) -> Rf {
        if num.is_zero() {
            return Rf::zero();
        }
        if common_exp(&den).is_some() {
            return normalize(num, den).expect("denominator is nonzero");
        }
        if let Some(c) = den.as_constant() {
            return Rf::from_poly(num.scale(&c.recip()));
        }
        monic(num, den)
    }

    pub(crate) fn neg(&self) -> Rf {
        Rf {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub(crate) fn sub(&self, other: &Rf) -> Rf {
        self.add(&other.neg())
    }

    pub(crate) fn scale(&self, c: &Q) -> Rf {
        if c.is_zero() {
            return Rf::zero();
        }
        Rf {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub(crate) fn mul(&self, other: &Rf) -> Rf {
        if self.is_polynomial() && other.is_polynomial() {
            return Rf::from_poly(self.num.mul(&other.num));
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if !self.num.contains_imag() && !other.num.contains_imag() {
            // Cross cancellation suffices for reduced real fractions.
            let (n1, d2) = cancel_gcd(self.num.clone(), other.den.clone());
            let (n2, d1) = cancel_gcd(other.num.clone(), self.den.clone());
            return Rf::settled(n1.mul(&n2), d1.mul(&d2));
        }
        normalize(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("product of nonzero denominators is nonzero")
    }

    pub(crate) fn div(&self, other: &Rf) -> Result<Rf, KernelError> {
        if other.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        normalize(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub(crate) fn recip(&self) -> Result<Rf, KernelError> {
        Rf::one().div(self)
    }

    pub(crate) fn powi(&self, n: i64) -> Result<Rf, KernelError> {
        let k = u32::try_from(n.unsigned_abs()).expect("exponent fits in u32");
        if n >= 0 {
            Ok(Rf::reduced(self.num.powi(k), self.den.powi(k)))
        } else {
            if self.is_zero() {
                return Err(KernelError::DivisionByZero);
            }
            normalize(self.den.powi(k), self.num.powi(k))
        }
    }

    /// Assembles an already coprime pair; only rescales the denominator.
    fn reduced(num: Poly, den: Poly) -> Rf {
        if num.is_zero() {
            return Rf::zero();
        }
        monic(num, den)
    }

    pub(crate) fn kernel(k: Kernel) -> Rf {
        Rf::from_poly(Poly::kernel(k))
    }

    /// Elementary function of a canonical argument, with the trivial values
    /// at 0 and 1 folded.
    pub(crate) fn func(f: Func, arg: Rf) -> Rf {
        match (f, arg.as_constant()) {
            (Func::Exp, Some(c)) | (Func::Sin, Some(c)) | (Func::Cos, Some(c)) if c.is_zero() => {
                if f == Func::Sin {
                    Rf::zero()
                } else {
                    Rf::one()
                }
            }
            (Func::Ln, Some(c)) if c.is_one() => Rf::zero(),
            _ => Rf::kernel(Kernel::Func(f, Arc::new(arg))),
        }
    }

    /// `base^q` for rational `q`.
    pub(crate) fn pow(base: &Rf, q: &Q) -> Result<Rf, KernelError> {
        if q.is_integer() {
            let n = i64::try_from(q.to_integer()).expect("exponent fits in i64");
            return base.powi(n);
        }
        if base.is_zero() {
            return if q.is_positive() {
                Ok(Rf::zero())
            } else {
                Err(KernelError::DivisionByZero)
            };
        }
        if base.as_constant().is_some_and(|c| c.is_one()) {
            return Ok(Rf::one());
        }
        let whole = q.floor();
        let frac = q - &whole;
        let n = i64::try_from(whole.to_integer()).expect("exponent fits in i64");
        let root = Rf::kernel(Kernel::Root(Arc::new(base.clone()), frac));
        Ok(base.powi(n)?.mul(&root))
    }

    pub(crate) fn from_expr(e: &Expr) -> Result<Rf, KernelError> {
        Ok(match e {
            Expr::Num(q) => Rf::constant(q.clone()),
            Expr::Atom(a) => Rf::atom(a.clone()),
            Expr::Add(terms) => {
                // Terms sharing a denominator are summed in place first.
                let mut by_den: BTreeMap<Poly, Poly> = BTreeMap::new();
                for t in terms.iter() {
                    let r = Rf::from_expr(t)?;
                    match by_den.entry(r.den) {
                        Entry::Vacant(v) => {
                            v.insert(r.num);
                        }
                        Entry::Occupied(mut o) => o.get_mut().add_assign(&r.num),
                    }
                }
                let mut acc = Rf::zero();
                for (den, num) in by_den {
                    acc = acc.add(&normalize(num, den)?);
                }
                acc
            }
            Expr::Mul(factors) => {
                // Numerators and denominators are accumulated separately so
                // the gcd runs once.
                let mut num = Rf::one();
                let mut den = Rf::one();
                for f in factors.iter() {
                    match f {
                        Expr::Pow(b, q) if q.is_integer() && q.is_negative() => {
                            let n = i64::try_from(-q.to_integer()).expect("exponent fits in i64");
                            den = den.mul(&Rf::from_expr(b)?.powi(n)?);
                        }
                        other => num = num.mul(&Rf::from_expr(other)?),
                    }
                    if num.is_zero() {
                        return Ok(Rf::zero());
                    }
                }
                num.div(&den)?
            }
            Expr::Pow(b, q) => Rf::pow(&Rf::from_expr(b)?, q)?,
            Expr::Func(f, arg) => Rf::func(*f, Rf::from_expr(arg)?),
        })
    }

    pub(crate) fn to_expr(&self) -> Expr {
        let num = poly_to_expr(&self.num);
        if self.den.is_one() {
            num
        } else {
            Expr::mul([num, Expr::powi(poly_to_expr(&self.den), -1)])
        }
    }

    /// Replaces atoms by rational functions, re-evaluating every kernel.
    pub(crate) fn substitute(
        &self,
        f: &mut dyn FnMut(&Atom) -> Option<Rf>,
    ) -> Result<Rf, KernelError> {
        let mut cache: BTreeMap<Kernel, Rf> = BTreeMap::new();
        let num = eval_poly(&self.num, f, &mut cache)?;
        if self.den.is_one() {
            return Ok(num);
        }
        let den = eval_poly(&self.den, f, &mut cache)?;
        num.div(&den)
    }

    /// Applies a derivation: `delta` gives the derivative of each atom.
    ///
    /// Kernels are differentiated by the chain rule.
    pub(crate) fn derive(&self, delta: &mut dyn FnMut(&Atom) -> Rf) -> Rf {
        let mut cache: BTreeMap<Kernel, Rf> = BTreeMap::new();
        let dn = derive_poly(&self.num, delta, &mut cache);
        if self.den.is_one() {
            return dn;
        }
        let dd = derive_poly(&self.den, delta, &mut cache);
        if dd.is_zero() {
            return dn.mul(&Rf::reduced(Poly::one(), self.den.clone()));
        }
        // (n/d)' = (n' d - n d') / d²
        let d = Rf::from_poly(self.den.clone());
        let n = Rf::from_poly(self.num.clone());
        let top = dn.mul(&d).sub(&n.mul(&dd));
        top.div(&Rf::from_poly(self.den.mul(&self.den)))
            .expect("denominator is nonzero")
    }
}

fn kernel_to_expr(k: &Kernel) -> Expr {
    match k {
        Kernel::Atom(a) => Expr::Atom(a.clone()),
        Kernel::Func(f, arg) => Expr::func(*f, arg.to_expr()),
        Kernel::Root(b, q) => Expr::pow(b.to_expr(), q.clone()),
    }
}

fn monomial_to_expr(m: &Monomial, c: &Q) -> Expr {
    let mut factors = Vec::with_capacity(m.len() + 1);
    factors.push(Expr::Num(c.clone()));
    for (k, e) in m {
        factors.push(Expr::powi(kernel_to_expr(k), i64::from(*e)));
    }
    Expr::mul(factors)
}

fn poly_to_expr(p: &Poly) -> Expr {
    Expr::add(
        p.terms()
            .rev()
            .map(|(m, c)| monomial_to_expr(m, c))
            .collect::<Vec<_>>(),
    )
}

fn kernel_value(
    k: &Kernel,
    f: &mut dyn FnMut(&Atom) -> Option<Rf>,
    cache: &mut BTreeMap<Kernel, Rf>,
) -> Result<Rf, KernelError> {
    if let Some(v) = cache.get(k) {
        return Ok(v.clone());
    }
    let v = match k {
        Kernel::Atom(a) => f(a).unwrap_or_else(|| Rf::atom(a.clone())),
        Kernel::Func(g, arg) => Rf::func(*g, arg.substitute(f)?),
        Kernel::Root(b, q) => Rf::pow(&b.substitute(f)?, q)?,
    };
    cache.insert(k.clone(), v.clone());
    Ok(v)
}

fn eval_poly(
    p: &Poly,
    f: &mut dyn FnMut(&Atom) -> Option<Rf>,
    cache: &mut BTreeMap<Kernel, Rf>,
) -> Result<Rf, KernelError> {
    let mut acc = Rf::zero();
    for (m, c) in p.terms() {
        let mut term = Rf::constant(c.clone());
        for (k, e) in m {
            let v = kernel_value(k, f, cache)?;
            term = term.mul(&v.powi(i64::from(*e))?);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

fn kernel_derivative(
    k: &Kernel,
    delta: &mut dyn FnMut(&Atom) -> Rf,
    cache: &mut BTreeMap<Kernel, Rf>,
) -> Rf {
    if let Some(v) = cache.get(k) {
        return v.clone();
    }
    let v = match k {
        Kernel::Atom(a) => delta(a),
        Kernel::Func(f, arg) => {
            let da = arg.derive(delta);
            if da.is_zero() {
                Rf::zero()
            } else {
                let outer = match f {
                    Func::Exp => Rf::kernel(k.clone()),
                    Func::Ln => arg.recip().expect("ln argument is nonzero"),
                    Func::Sin => Rf::func(Func::Cos, (**arg).clone()),
                    Func::Cos => Rf::func(Func::Sin, (**arg).clone()).neg(),
                };
                outer.mul(&da)
            }
        }
        Kernel::Root(b, q) => {
            let db = b.derive(delta);
            if db.is_zero() {
                Rf::zero()
            } else {
                // q · b^q / b · b'
                Rf::kernel(k.clone())
                    .mul(&db)
                    .scale(q)
                    .div(b)
                    .expect("root base is nonzero")
            }
        }
    };
    cache.insert(k.clone(), v.clone());
    v
}

fn derive_poly(
    p: &Poly,
    delta: &mut dyn FnMut(&Atom) -> Rf,
    cache: &mut BTreeMap<Kernel, Rf>,
) -> Rf {
    let mut poly_part = Poly::zero();
    let mut rational_part = Rf::zero();
    for (m, c) in p.terms() {
        for (j, (k, e)) in m.iter().enumerate() {
            let dk = kernel_derivative(k, delta, cache);
            if dk.is_zero() {
                continue;
            }
            let rest = m
                .iter()
                .enumerate()
                .map(|(i, (kk, ee))| (kk.clone(), if i == j { ee - 1 } else { *ee }));
            let coeff = c * Q::from_integer(BigInt::from(*e));
            let others = Poly::from_factors(rest, coeff);
            if dk.is_polynomial() {
                poly_part = poly_part.add(&others.mul(dk.num()));
            } else {
                rational_part = rational_part.add(&Rf::from_poly(others).mul(&dk));
            }
        }
    }
    Rf::from_poly(poly_part).add(&rational_part)
}

/// Scales so the denominator's leading coefficient is 1.
fn monic(num: Poly, den: Poly) -> Rf {
    let lc = den
        .leading_coefficient()
        .cloned()
        .expect("denominator is nonzero");
    if lc.is_one() {
        return Rf { num, den };
    }
    let inv = lc.recip();
    Rf {
        num: num.scale(&inv),
        den: den.scale(&inv),
    }
}

/// The single `exp` kernel shared by every monomial, if there is one.
fn common_exp(p: &Poly) -> Option<Arc<Rf>> {
    let mut shared: Option<Arc<Rf>> = None;
    for (m, _) in p.terms() {
        let e = m.iter().find_map(|(k, _)| match k {
            Kernel::Func(Func::Exp, arg) => Some(arg.clone()),
            _ => None,
        })?;
        match &shared {
            None => shared = Some(e),
            Some(s) if *s == e => {}
            Some(_) => return None,
        }
    }
    shared
}

fn normalize(mut num: Poly, mut den: Poly) -> Result<Rf, KernelError> {
    if den.is_zero() {
        return Err(KernelError::DivisionByZero);
    }
    if num.is_zero() {
        return Ok(Rf::zero());
    }
    if let Some(c) = den.as_constant() {
        return Ok(Rf::from_poly(num.scale(&c.recip())));
    }
    if den.contains_imag() {
        let conj = den.flip_imag();
        num = num.mul(&conj);
        den = den.mul(&conj);
    }
    if let Some(arg) = common_exp(&den) {
        let inv = Poly::kernel(Kernel::Func(Func::Exp, Arc::new(arg.neg())));
        num = num.mul(&inv);
        den = den.mul(&inv);
    }
    if let Some(c) = den.as_constant() {
        return Ok(Rf::from_poly(num.scale(&c.recip())));
    }
    let (num, den) = cancel_gcd(num, den);
    if let Some(c) = den.as_constant() {
        return Ok(Rf::from_poly(num.scale(&c.recip())));
    }
    Ok(monic(num, den))
}

/// Integer-polynomial coordinates for a set of polynomials. Plain kernels
/// are variables. Every `exp(c·P)` with `P` normalized to a unit leading
/// coefficient becomes `y_P^k` for one variable `y_P` per direction, so
/// `exp(a)`, `exp(2a)` and `exp(-a)` are powers of the same variable. Negative
/// powers are cleared by a monomial shift, which is a unit.
struct Frame {
    kernels: Vec<Kernel>,
    index: BTreeMap<Kernel, usize>,
    /// `exp` kernel to its direction variable and exponent.
    exps: BTreeMap<Kernel, (usize, i64)>,
    /// Argument of `y_P` for each direction variable, after the plain ones.
    bases: Vec<Rf>,
}

/// A polynomial in frame coordinates: `p = y^shift · poly / denom`.
struct Image {
    poly: IPoly,
    denom: BigInt,
    shift: Vec<i64>,
}

fn rational_gcd(a: &Q, b: &Q) -> Q {
    Q::new(a.numer().gcd(b.numer()), a.denom().lcm(b.denom()))
}

impl Frame {
    fn new(polys: &[&Poly]) -> Frame {
        let set: BTreeSet<Kernel> = polys
            .iter()
            .flat_map(|p| p.kernels())
            .filter(|k| !k.is_imag())
            .collect();
        let mut kernels = Vec::new();
        let mut directions: BTreeMap<Rf, Vec<(Kernel, Q)>> = BTreeMap::new();
        for k in set {
            match &k {
                Kernel::Func(Func::Exp, arg) => {
                    let lc = arg
                        .num
                        .leading_coefficient()
                        .cloned()
                        .expect("nonzero argument");
                    let dir = arg.scale(&lc.recip());
                    directions.entry(dir).or_default().push((k, lc));
                }
                _ => kernels.push(k),
            }
        }
        let index = kernels
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let mut exps = BTreeMap::new();
        let mut bases = Vec::new();
        for (dir, members) in directions {
            let var = kernels.len() + bases.len();
            let step = members
                .iter()
                .skip(1)
                .fold(members[0].1.abs(), |g, (_, c)| rational_gcd(&g, c));
            for (k, c) in members {
                let power = (c / &step).to_integer();
                exps.insert(
                    k,
                    (var, i64::try_from(power).expect("exponent fits in i64")),
                );
            }
            bases.push(dir.scale(&step));
        }
        Frame {
            kernels,
            index,
            exps,
            bases,
        }
    }

    fn nvars(&self) -> usize {
        self.kernels.len() + self.bases.len()
    }

    fn exponents(&self, m: &Monomial) -> Vec<i64> {
        let mut ex = vec![0i64; self.nvars()];
        for (k, e) in m {
            match self.exps.get(k) {
                Some(&(var, power)) => ex[var] += power * i64::from(*e),
                None => ex[self.index[k]] = i64::from(*e),
            }
        }
        ex
    }

    fn to_ipoly(&self, p: &Poly) -> Image {
        let denom = p
            .terms()
            .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let n = self.nvars();
        let rows: Vec<(Vec<i64>, &Q)> = p.terms().map(|(m, c)| (self.exponents(m), c)).collect();
        let mut shift = vec![0i64; n];
        for (v, s) in shift.iter_mut().enumerate().skip(self.kernels.len()) {
            *s = rows.iter().map(|(ex, _)| ex[v]).min().unwrap_or(0);
        }
        let terms = rows.into_iter().map(|(ex, c)| {
            let ex = ex
                .iter()
                .zip(&shift)
                .map(|(e, s)| u32::try_from(e - s).expect("shifted exponents are nonnegative"))
                .collect();
            ((c * Q::from_integer(denom.clone())).to_integer(), ex)
        });
        let poly = IPoly::from_terms(n, terms.map(|(c, ex)| (ex, c)));
        Image { poly, denom, shift }
    }

    fn from_ipoly(&self, p: &IPoly, denom: &BigInt, shift: &[i64]) -> Poly {
        let mut out = Poly::zero();
        let plain = self.kernels.len();
        for (ex, c) in p.terms() {
            let mut factors: Vec<(Kernel, u32)> = ex[..plain]
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (self.kernels[i].clone(), e))
                .collect();
            for (d, base) in self.bases.iter().enumerate() {
                let power = i64::from(ex[plain + d]) + shift[plain + d];
                if power != 0 {
                    let arg = base.scale(&Q::from_integer(power.into()));
                    factors.push((Kernel::Func(Func::Exp, Arc::new(arg)), 1));
                }
            }
            out.add_assign(&Poly::from_factors(
                factors,
                Q::new(c.clone(), denom.clone()),
            ));
        }
        out
    }
}

/// `gcd(a, b)` of two polynomials free of `i`, with the cofactors `a/g` and
/// `b/g`; `None` when the gcd is constant.
fn common_factor(a: &Poly, b: &Poly) -> Option<(Poly, Poly, Poly)> {
    let frame = Frame::new(&[a, b]);
    let ai = frame.to_ipoly(a);
    let bi = frame.to_ipoly(b);
    let g = gcd::gcd(&ai.poly, &bi.poly);
    if g.is_constant() {
        return None;
    }
    let a_g = ai.poly.exact_div(&g).expect("gcd divides");
    let b_g = bi.poly.exact_div(&g).expect("gcd divides");
    Some((
        frame.from_ipoly(&g, &BigInt::one(), &vec![0; frame.nvars()]),
        frame.from_ipoly(&a_g, &ai.denom, &ai.shift),
        frame.from_ipoly(&b_g, &bi.denom, &bi.shift),
    ))
}

fn cancel_gcd(num: Poly, den: Poly) -> (Poly, Poly) {
    let probe = den.clone();
    cancel_by(num, den, &probe)
}

/// Divides `num` and `den` by the gcd of `num` with `probe`, where `probe`
/// divides `den`.
fn cancel_by(num: Poly, den: Poly, probe: &Poly) -> (Poly, Poly) {
    let (re, im) = num.split_imag();
    let frame = Frame::new(&[&re, &im, &den, probe]);
    let di = frame.to_ipoly(&den);
    let ri = frame.to_ipoly(&re);
    let ii = frame.to_ipoly(&im);
    let pi = frame.to_ipoly(probe);
    let mut g = gcd::gcd(&pi.poly, &ri.poly);
    if !ii.poly.is_zero() && !g.is_constant() {
        g = gcd::gcd(&g, &ii.poly);
    }
    if g.is_constant() {
        return (num, den);
    }
    let div = |p: &Image| {
        let q = p.poly.exact_div(&g).expect("gcd divides");
        frame.from_ipoly(&q, &p.denom, &p.shift)
    };
    let den = div(&di);
    let re = div(&ri);
    let im = if ii.poly.is_zero() {
        Poly::zero()
    } else {
        div(&ii)
    };
    let num = re.add(&im.mul(&Poly::kernel(Kernel::Atom(Atom::Imag))));
    (num, den)
}
