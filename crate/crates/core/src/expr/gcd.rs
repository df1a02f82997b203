//! Multivariate polynomial gcd over the integers.
//!
//! Polynomials are sparse maps from dense exponent vectors to integer
//! coefficients. The gcd recurses on variables: content and primitive part
//! with respect to the first variable that occurs, then a primitive
//! pseudo-remainder sequence on the primitive parts. Before recursing, a
//! modular univariate image per variable rules out variables the gcd cannot
//! contain, which settles most coprime inputs without any remainder
//! sequence.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct IPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IPoly {
    pub(crate) fn zero(nvars: usize) -> Self {
        IPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub(crate) fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = IPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub(crate) fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>,
    ) -> Self {
        let mut p = IPoly::zero(nvars);
        for (m, c) in terms {
            debug_assert_eq!(m.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    fn add_term(&mut self, m: Vec<u32>, c: BigInt) {
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

    fn leading(&self) -> (&Vec<u32>, &BigInt) {
        self.terms
            .iter()
            .next_back()
            .expect("leading term of zero polynomial")
    }

    fn sub(&self, other: &IPoly) -> IPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub(crate) fn mul(&self, other: &IPoly) -> IPoly {
        let mut out = IPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    fn scale(&self, c: &BigInt) -> IPoly {
        if c.is_zero() {
            return IPoly::zero(self.nvars);
        }
        IPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    /// Coefficients with respect to `v`, keyed by the power of `v`.
    fn coefficients_in(&self, v: usize) -> BTreeMap<u32, IPoly> {
        let mut out: BTreeMap<u32, IPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let k = std::mem::replace(&mut m2[v], 0);
            out.entry(k)
                .or_insert_with(|| IPoly::zero(self.nvars))
                .add_term(m2, c.clone());
        }
        out
    }

    fn leading_coefficient_in(&self, v: usize) -> IPoly {
        let d = self.degree_in(v);
        self.coefficients_in(v)
            .remove(&d)
            .unwrap_or_else(|| IPoly::zero(self.nvars))
    }

    fn times_var_power(&self, v: usize, k: u32) -> IPoly {
        IPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut m2 = m.clone();
                    m2[v] += k;
                    (m2, c.clone())
                })
                .collect(),
        }
    }

    fn integer_content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Exact quotient, or `None` when `divisor` does not divide `self`.
    pub(crate) fn exact_div(&self, divisor: &IPoly) -> Option<IPoly> {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let (mb, cb) = divisor.leading();
        let (mb, cb) = (mb.clone(), cb.clone());
        let mut q = IPoly::zero(self.nvars);
        let mut r = self.clone();
        while !r.is_zero() {
            let (mr, cr) = r.leading();
            if mr.iter().zip(&mb).any(|(a, b)| a < b) {
                return None;
            }
            let (quot, rem) = cr.div_rem(&cb);
            if !rem.is_zero() {
                return None;
            }
            let m: Vec<u32> = mr.iter().zip(&mb).map(|(a, b)| a - b).collect();
            for (md, cd) in &divisor.terms {
                let shifted = md.iter().zip(&m).map(|(a, b)| a + b).collect();
                r.add_term(shifted, -(cd * &quot));
            }
            q.add_term(m, quot);
        }
        Some(q)
    }

    /// Makes the leading coefficient positive.
    fn sign_normalized(self) -> IPoly {
        if !self.is_zero() && self.leading().1.is_negative() {
            self.scale(&BigInt::from(-1))
        } else {
            self
        }
    }

    fn used_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|m| m[v] > 0))
            .collect()
    }

    /// Coefficients with respect to the monomials in `vars`, as polynomials
    /// in the remaining variables.
    fn coefficients_over(&self, vars: &[usize]) -> Vec<IPoly> {
        let mut out: BTreeMap<Vec<u32>, IPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key: Vec<u32> = vars.iter().map(|&v| m[v]).collect();
            let mut rest = m.clone();
            for &v in vars {
                rest[v] = 0;
            }
            out.entry(key)
                .or_insert_with(|| IPoly::zero(self.nvars))
                .add_term(rest, c.clone());
        }
        out.into_values().collect()
    }

    fn first_var(&self) -> Option<usize> {
        (0..self.nvars).find(|&v| self.terms.keys().any(|m| m[v] > 0))
    }
}

/// Pseudo-remainder of `a` by `b` with respect to variable `v`.
fn pseudo_remainder(a: &IPoly, b: &IPoly, v: usize) -> IPoly {
    let db = b.degree_in(v);
    let lb = b.leading_coefficient_in(v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.leading_coefficient_in(v);
        r = r.mul(&lb).sub(&lr.mul(&b.times_var_power(v, dr - db)));
    }
    r
}

/// Content with respect to `v`: gcd of the coefficients in the other variables.
fn content_in(p: &IPoly, v: usize) -> IPoly {
    let mut coeffs = p.coefficients_in(v).into_values();
    let mut g = coeffs.next().unwrap_or_else(|| IPoly::zero(p.nvars));
    for c in coeffs {
        if g.is_constant() && g.integer_content().is_one() {
            break;
        }
        g = gcd(&g, &c);
    }
    g.sign_normalized()
}

fn primitive_in(p: &IPoly, v: usize) -> IPoly {
    let c = content_in(p, v);
    p.exact_div(&c).expect("content divides polynomial")
}

/// Greatest common divisor, normalized to a positive leading coefficient.
pub(crate) fn gcd(a: &IPoly, b: &IPoly) -> IPoly {
    if a.is_zero() {
        return b.clone().sign_normalized();
    }
    if b.is_zero() {
        return a.clone().sign_normalized();
    }
    if a.is_constant() || b.is_constant() {
        let g = a.integer_content().gcd(&b.integer_content());
        return IPoly::constant(a.nvars, g);
    }
    let (used_a, used_b) = (a.used_vars(), b.used_vars());
    if used_a != used_b {
        // A gcd involves only shared variables: fold the other side's
        // coefficients with respect to its private variables into the gcd.
        let only_a: Vec<usize> = used_a
            .iter()
            .copied()
            .filter(|v| !used_b.contains(v))
            .collect();
        let only_b: Vec<usize> = used_b
            .iter()
            .copied()
            .filter(|v| !used_a.contains(v))
            .collect();
        let (mut g, rest) = if only_a.is_empty() {
            (a.clone(), b.coefficients_over(&only_b))
        } else if only_b.is_empty() {
            (b.clone(), a.coefficients_over(&only_a))
        } else {
            let ca = a.coefficients_over(&only_a);
            let mut g = ca[0].clone();
            for c in &ca[1..] {
                g = gcd(&g, c);
            }
            (g, b.coefficients_over(&only_b))
        };
        let mut rest = rest;
        rest.sort_by_key(|c| c.terms.len());
        for c in &rest {
            if g.is_constant() && g.integer_content().is_one() {
                break;
            }
            g = gcd(&g, c);
        }
        return g.sign_normalized();
    }
    let absent: Vec<usize> = used_a
        .iter()
        .copied()
        .filter(|&v| image_gcd_degree(a, b, v) == Some(0))
        .collect();
    if !absent.is_empty() {
        // The gcd is free of `absent`, so it divides every coefficient
        // with respect to those variables.
        let mut parts = a.coefficients_over(&absent);
        parts.extend(b.coefficients_over(&absent));
        parts.sort_by_key(|c| c.terms.len());
        let mut g = parts[0].clone();
        for c in &parts[1..] {
            if g.is_constant() && g.integer_content().is_one() {
                break;
            }
            g = gcd(&g, c);
        }
        return g.sign_normalized();
    }
    if a.exact_div(b).is_some() {
        return b.clone().sign_normalized();
    }
    if b.exact_div(a).is_some() {
        return a.clone().sign_normalized();
    }
    let va = a.first_var();
    let vb = b.first_var();
    let v = match (va, vb) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => unreachable!("non-constant polynomials have a variable"),
    };
    let in_a = a.degree_in(v) > 0;
    let in_b = b.degree_in(v) > 0;
    if !in_a {
        return gcd(a, &content_in(b, v));
    }
    if !in_b {
        return gcd(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let mut p = a.exact_div(&ca).expect("content divides");
    let mut q = b.exact_div(&cb).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    let g = loop {
        let r = pseudo_remainder(&p, &q, v);
        if r.is_zero() {
            break q;
        }
        if r.degree_in(v) == 0 {
            break IPoly::constant(a.nvars, BigInt::one());
        }
        p = q;
        q = primitive_in(&r, v);
    };
    let g = primitive_in(&g, v);
    c.mul(&g).sign_normalized()
}

const P: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn pow_mod(mut a: u64, mut k: u64) -> u64 {
    let mut acc = 1;
    while k > 0 {
        if k & 1 == 1 {
            acc = mul_mod(acc, a);
        }
        a = mul_mod(a, a);
        k >>= 1;
    }
    acc
}

fn reduce(c: &BigInt) -> u64 {
    let r = c.mod_floor(&BigInt::from(P));
    u64::try_from(r).expect("reduced below the modulus")
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Image of `p` modulo `P` as a univariate polynomial in `v`, with the other
/// variables set to `point`. Index `k` holds the coefficient of `v^k`.
fn univariate_image(p: &IPoly, v: usize, point: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for (m, c) in &p.terms {
        let mut t = reduce(c);
        for (w, &e) in m.iter().enumerate() {
            if w != v && e > 0 {
                t = mul_mod(t, pow_mod(point[w], e.into()));
            }
        }
        let slot = &mut out[m[v] as usize];
        *slot = (*slot + t) % P;
    }
    out
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Degree of the gcd of two univariate polynomials modulo `P`.
fn univariate_gcd_degree(mut a: Vec<u64>, mut b: Vec<u64>) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = pow_mod(*b.last().unwrap(), P - 2);
        while a.len() >= b.len() {
            let f = mul_mod(*a.last().unwrap(), inv);
            let off = a.len() - b.len();
            for (i, &c) in b.iter().enumerate() {
                a[off + i] = (a[off + i] + P - mul_mod(f, c)) % P;
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Upper bound on the degree in `v` of `gcd(a, b)`, from a modular image at
/// a point where both leading coefficients in `v` survive. `None` when no
/// such point was found.
fn image_gcd_degree(a: &IPoly, b: &IPoly, v: usize) -> Option<usize> {
    let (da, db) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
    if da == 0 || db == 0 {
        return Some(0);
    }
    let mut state = 0x5eed_u64 ^ (v as u64).wrapping_mul(0x1000_0001);
    for _ in 0..3 {
        let point: Vec<u64> = (0..a.nvars).map(|_| splitmix(&mut state) % P).collect();
        let ia = univariate_image(a, v, &point);
        let ib = univariate_image(b, v, &point);
        if ia[da] != 0 && ib[db] != 0 {
            return Some(univariate_gcd_degree(ia, ib));
        }
    }
    None
}
