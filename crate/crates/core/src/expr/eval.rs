//! Numeric evaluation: exact Gaussian rationals, or 128-bit complex floats
//! when transcendental kernels are present.

use std::collections::BTreeMap;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::atom::{Atom, Func};
use super::poly::{Kernel, Poly};
use super::rf::Rf;
use super::{KernelError, Q};

/// Working precision of the float path, in bits.
pub const FLOAT_PRECISION: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

/// Exact complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussQ {
    pub re: Q,
    pub im: Q,
}

impl GaussQ {
    pub fn real(re: Q) -> Self {
        GaussQ { re, im: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn mul(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div(&self, o: &GaussQ) -> Option<GaussQ> {
        let n = &o.re * &o.re + &o.im * &o.im;
        if n.is_zero() {
            return None;
        }
        Some(GaussQ {
            re: (&self.re * &o.re + &self.im * &o.im) / &n,
            im: (&self.im * &o.re - &self.re * &o.im) / &n,
        })
    }

    fn powi(&self, n: u32) -> GaussQ {
        let mut acc = GaussQ::real(Q::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `|re| + |im|` as a float.
    pub fn magnitude(&self) -> f64 {
        self.re.abs().to_f64().unwrap_or(f64::INFINITY)
            + self.im.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}*I", self.im)
        } else {
            write!(f, "{} + {}*I", self.re, self.im)
        }
    }
}

/// Complex number with [`FLOAT_PRECISION`]-bit components.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexF {
    pub re: BigFloat,
    pub im: BigFloat,
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, FLOAT_PRECISION)
}

fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse().unwrap_or(f64::NAN)
}

fn q_to_bf(q: &Q, cc: &mut Consts) -> BigFloat {
    let n = BigFloat::parse(
        &q.numer().to_string(),
        astro_float::Radix::Dec,
        FLOAT_PRECISION,
        RM,
        cc,
    );
    if q.denom().is_one() {
        return n;
    }
    let d = BigFloat::parse(
        &q.denom().to_string(),
        astro_float::Radix::Dec,
        FLOAT_PRECISION,
        RM,
        cc,
    );
    n.div(&d, FLOAT_PRECISION, RM)
}

impl ComplexF {
    pub fn from_f64(re: f64, im: f64) -> Self {
        ComplexF {
            re: bf(re),
            im: bf(im),
        }
    }

    fn zero() -> Self {
        ComplexF::from_f64(0.0, 0.0)
    }

    fn one() -> Self {
        ComplexF::from_f64(1.0, 0.0)
    }

    fn from_gauss(g: &GaussQ, cc: &mut Consts) -> Self {
        ComplexF {
            re: q_to_bf(&g.re, cc),
            im: q_to_bf(&g.im, cc),
        }
    }

    pub fn re_f64(&self) -> f64 {
        bf_to_f64(&self.re)
    }

    pub fn im_f64(&self) -> f64 {
        bf_to_f64(&self.im)
    }

    /// `|re| + |im|` as a float.
    pub fn magnitude(&self) -> f64 {
        self.re_f64().abs() + self.im_f64().abs()
    }

    fn magnitude_bf(&self) -> BigFloat {
        self.re.abs().add(&self.im.abs(), FLOAT_PRECISION, RM)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn add(&self, o: &ComplexF) -> ComplexF {
        ComplexF {
            re: self.re.add(&o.re, FLOAT_PRECISION, RM),
            im: self.im.add(&o.im, FLOAT_PRECISION, RM),
        }
    }

    fn mul(&self, o: &ComplexF) -> ComplexF {
        let p = FLOAT_PRECISION;
        ComplexF {
            re: self
                .re
                .mul(&o.re, p, RM)
                .sub(&self.im.mul(&o.im, p, RM), p, RM),
            im: self
                .re
                .mul(&o.im, p, RM)
                .add(&self.im.mul(&o.re, p, RM), p, RM),
        }
    }

    fn scale(&self, k: &BigFloat) -> ComplexF {
        ComplexF {
            re: self.re.mul(k, FLOAT_PRECISION, RM),
            im: self.im.mul(k, FLOAT_PRECISION, RM),
        }
    }

    fn div(&self, o: &ComplexF) -> Option<ComplexF> {
        let p = FLOAT_PRECISION;
        let n = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        if n.is_zero() {
            return None;
        }
        let re = self
            .re
            .mul(&o.re, p, RM)
            .add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self
            .im
            .mul(&o.re, p, RM)
            .sub(&self.re.mul(&o.im, p, RM), p, RM);
        Some(ComplexF {
            re: re.div(&n, p, RM),
            im: im.div(&n, p, RM),
        })
    }

    fn powi(&self, n: u32) -> ComplexF {
        let mut acc = ComplexF::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    fn exp(&self, cc: &mut Consts) -> ComplexF {
        let p = FLOAT_PRECISION;
        let m = self.re.exp(p, RM, cc);
        ComplexF {
            re: m.mul(&self.im.cos(p, RM, cc), p, RM),
            im: m.mul(&self.im.sin(p, RM, cc), p, RM),
        }
    }

    fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive() && !self.re.is_zero()
    }
}

/// Value assigned to an atom, or produced by evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(GaussQ),
    Float(ComplexF),
}

impl Number {
    pub fn rational(q: Q) -> Number {
        Number::Exact(GaussQ::real(q))
    }

    pub fn int(n: i64) -> Number {
        Number::rational(Q::from_integer(n.into()))
    }

    pub fn float(x: f64) -> Number {
        Number::Float(ComplexF::from_f64(x, 0.0))
    }

    pub fn magnitude(&self) -> f64 {
        match self {
            Number::Exact(g) => g.magnitude(),
            Number::Float(c) => c.magnitude(),
        }
    }

    pub fn as_exact(&self) -> Option<&GaussQ> {
        match self {
            Number::Exact(g) => Some(g),
            Number::Float(_) => None,
        }
    }

    /// Real and imaginary parts as `f64`.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        match self {
            Number::Exact(g) => (
                g.re.to_f64().unwrap_or(f64::NAN),
                g.im.to_f64().unwrap_or(f64::NAN),
            ),
            Number::Float(c) => (c.re_f64(), c.im_f64()),
        }
    }

    fn to_float(&self, cc: &mut Consts) -> ComplexF {
        match self {
            Number::Exact(g) => ComplexF::from_gauss(g, cc),
            Number::Float(c) => c.clone(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(g) => write!(f, "{g}"),
            Number::Float(c) => {
                let (re, im) = (c.re_f64(), c.im_f64());
                if im == 0.0 {
                    write!(f, "{re:e}")
                } else {
                    write!(f, "{re:e} + {im:e}*I")
                }
            }
        }
    }
}

/// Outcome of evaluating a canonical form at a point.
pub(crate) struct Evaluation {
    pub value: Number,
    /// `|numerator|` over one plus its largest monomial magnitude.
    pub relative_residual: f64,
}

fn lookup<'a>(point: &'a BTreeMap<Atom, Number>, a: &Atom) -> Result<&'a Number, KernelError> {
    if let Atom::Imag = a {
        unreachable!("imaginary unit is never looked up")
    }
    point
        .get(a)
        .ok_or_else(|| KernelError::Unbound(a.to_string()))
}

fn exact_poly(p: &Poly, point: &BTreeMap<Atom, GaussQ>) -> Result<(GaussQ, f64), KernelError> {
    let mut acc = GaussQ::real(Q::zero());
    let mut largest: f64 = 0.0;
    for (m, c) in p.terms() {
        let mut t = GaussQ::real(c.clone());
        for (k, e) in m {
            let v = match k {
                Kernel::Atom(Atom::Imag) => GaussQ {
                    re: Q::zero(),
                    im: Q::one(),
                },
                Kernel::Atom(a) => point
                    .get(a)
                    .cloned()
                    .ok_or_else(|| KernelError::Unbound(a.to_string()))?,
                _ => unreachable!("exact path only for rational forms"),
            };
            t = t.mul(&v.powi(*e));
        }
        largest = largest.max(t.magnitude());
        acc = acc.add(&t);
    }
    Ok((acc, largest))
}

struct FloatEval<'a> {
    point: &'a BTreeMap<Atom, Number>,
    cc: Consts,
    cache: BTreeMap<Kernel, ComplexF>,
}

impl FloatEval<'_> {
    fn kernel(&mut self, k: &Kernel) -> Result<ComplexF, KernelError> {
        if let Some(v) = self.cache.get(k) {
            return Ok(v.clone());
        }
        let v = match k {
            Kernel::Atom(Atom::Imag) => ComplexF::from_f64(0.0, 1.0),
            Kernel::Atom(a) => {
                let n = lookup(self.point, a)?.clone();
                n.to_float(&mut self.cc)
            }
            Kernel::Func(f, arg) => {
                let z = self.rf(arg)?.0;
                let p = FLOAT_PRECISION;
                match f {
                    Func::Exp => z.exp(&mut self.cc),
                    Func::Ln => {
                        if !z.is_positive_real() {
                            return Err(KernelError::Domain(format!(
                                "ln of non-positive or complex value {}",
                                Number::Float(z)
                            )));
                        }
                        ComplexF {
                            re: z.re.ln(p, RM, &mut self.cc),
                            im: bf(0.0),
                        }
                    }
                    Func::Sin | Func::Cos => {
                        // sin z = (e^{iz} - e^{-iz}) / 2i, cos z = (e^{iz} + e^{-iz}) / 2
                        let iz = ComplexF::from_f64(0.0, 1.0).mul(&z);
                        let a = iz.exp(&mut self.cc);
                        let b = ComplexF::one().div(&a).ok_or(KernelError::DivisionByZero)?;
                        let half = bf(0.5);
                        if *f == Func::Cos {
                            a.add(&b).scale(&half)
                        } else {
                            let diff = a.add(&b.scale(&bf(-1.0)));
                            diff.mul(&ComplexF::from_f64(0.0, -0.5))
                        }
                    }
                }
            }
            Kernel::Root(base, q) => {
                let b = self.rf(base)?.0;
                if !b.is_positive_real() {
                    return Err(KernelError::Domain(format!(
                        "fractional power of non-positive or complex value {}",
                        Number::Float(b)
                    )));
                }
                let p = FLOAT_PRECISION;
                let l = b.re.ln(p, RM, &mut self.cc);
                let qf = q_to_bf(q, &mut self.cc);
                ComplexF {
                    re: l.mul(&qf, p, RM).exp(p, RM, &mut self.cc),
                    im: bf(0.0),
                }
            }
        };
        self.cache.insert(k.clone(), v.clone());
        Ok(v)
    }

    fn poly(&mut self, p: &Poly) -> Result<(ComplexF, BigFloat), KernelError> {
        let mut acc = ComplexF::zero();
        let mut largest = bf(0.0);
        for (m, c) in p.terms() {
            let mut t = ComplexF::from_gauss(&GaussQ::real(c.clone()), &mut self.cc);
            for (k, e) in m {
                t = t.mul(&self.kernel(k)?.powi(*e));
            }
            let mag = t.magnitude_bf();
            if mag.cmp(&largest).is_some_and(|o| o > 0) {
                largest = mag;
            }
            acc = acc.add(&t);
        }
        Ok((acc, largest))
    }

    fn rf(&mut self, r: &Rf) -> Result<(ComplexF, BigFloat, ComplexF), KernelError> {
        let (n, largest) = self.poly(r.num())?;
        let (d, _) = self.poly(r.den())?;
        if d.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        let v = n.div(&d).ok_or(KernelError::DivisionByZero)?;
        Ok((v, largest, n))
    }
}

pub(crate) fn evaluate_rf(
    r: &Rf,
    point: &BTreeMap<Atom, Number>,
) -> Result<Evaluation, KernelError> {
    let exact: Option<BTreeMap<Atom, GaussQ>> = if r.is_rational() {
        point
            .iter()
            .map(|(a, n)| n.as_exact().map(|g| (a.clone(), g.clone())))
            .collect()
    } else {
        None
    };
    if let Some(pt) = exact {
        let (n, largest) = exact_poly(r.num(), &pt)?;
        let (d, _) = exact_poly(r.den(), &pt)?;
        let v = n.div(&d).ok_or(KernelError::DivisionByZero)?;
        let rel = n.magnitude() / (1.0 + largest);
        return Ok(Evaluation {
            value: Number::Exact(v),
            relative_residual: rel,
        });
    }
    let mut fe = FloatEval {
        point,
        cc: Consts::new().expect("float constant cache"),
        cache: BTreeMap::new(),
    };
    let (v, largest, n) = fe.rf(r)?;
    let largest = bf_to_f64(&largest);
    let rel = n.magnitude() / (1.0 + largest);
    Ok(Evaluation {
        value: Number::Float(v),
        relative_residual: rel,
    })
}
