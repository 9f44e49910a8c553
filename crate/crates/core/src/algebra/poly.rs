//! Sparse multivariate polynomials over exact rationals.
//!
//! Variables are even jet coordinates `u^i_k`. Monomials are kept sorted by
//! variable and compared lexicographically, the smallest variable being the
//! most significant one. That order is a proper monomial order, so the
//! division algorithm below detects exact divisibility.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Even jet coordinate `u^field_order`; `field` is zero based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JetVar {
    pub field: usize,
    pub order: usize,
}

impl JetVar {
    pub fn new(field: usize, order: usize) -> Self {
        JetVar { field, order }
    }

    /// The same field differentiated once more.
    pub fn next(self) -> Self {
        JetVar {
            field: self.field,
            order: self.order + 1,
        }
    }
}

/// Power product of jet variables, sorted by variable, exponents nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(JetVar, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: JetVar) -> Self {
        Self::pow(v, 1)
    }

    pub fn pow(v: JetVar, e: u32) -> Self {
        let mut m = SmallVec::new();
        if e > 0 {
            m.push((v, e));
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn degree_in(&self, v: JetVar) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when every exponent of `other` fits.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out: SmallVec<[(JetVar, u32); 4]> = SmallVec::new();
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => continue,
                    Ordering::Greater => out.push((v, e - f)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes `v` entirely, returning its former exponent.
    fn split_off(&self, v: JetVar) -> (u32, Monomial) {
        let mut rest = self.clone();
        let mut e = 0;
        rest.0.retain(|(w, k)| {
            if *w == v {
                e = *k;
                false
            } else {
                true
            }
        });
        (e, rest)
    }

    fn with_exponent_delta(&self, v: JetVar, delta: i64) -> Monomial {
        let (e, rest) = self.split_off(v);
        let ne = e as i64 + delta;
        debug_assert!(ne >= 0);
        rest.mul(&Monomial::pow(v, ne as u32))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let mut i = 0;
        loop {
            match (a.get(i), b.get(i)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va == vb {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                    } else if va < vb {
                        return Ordering::Greater;
                    } else {
                        return Ordering::Less;
                    }
                }
            }
            i += 1;
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(v: JetVar) -> Self {
        Self::term(BigRational::one(), Monomial::var(v))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<JetVar> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| *v))
            .collect()
    }

    pub fn contains_var(&self, v: JetVar) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    pub fn degree_in(&self, v: JetVar) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn derivative(&self, v: JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            if e > 0 {
                out.add_term(
                    m.with_exponent_delta(v, -1),
                    c * BigRational::from_integer(e.into()),
                );
            }
        }
        out
    }

    /// Antiderivative in `v` with zero constant of integration.
    pub fn integrate(&self, v: JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            out.add_term(
                m.with_exponent_delta(v, 1),
                c / BigRational::from_integer((e + 1).into()),
            );
        }
        out
    }

    /// Total x-derivative of a polynomial in even jet variables.
    pub fn total_x(&self) -> Poly {
        let mut out = Poly::zero();
        for v in self.vars() {
            let d = self.derivative(v);
            out = out.add(&d.mul(&Poly::var(v.next())));
        }
        out
    }

    /// Renames variables; `f` must be injective.
    pub fn map_vars(&self, f: &dyn Fn(JetVar) -> JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut mono = Monomial::one();
            for (v, e) in m.factors() {
                mono = mono.mul(&Monomial::pow(f(*v), *e));
            }
            out = out.add(&Poly::term(c.clone(), mono));
        }
        out
    }

    pub fn evaluate(&self, point: &dyn Fn(JetVar) -> BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.factors() {
                let x = point(v);
                for _ in 0..e {
                    t *= &x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        if lc.is_one() {
            return self.clone();
        }
        self.scale(&lc.recip())
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (lm, lc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((m, c)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let t = m.div(&lm)?;
            let k = c / &lc;
            r = r.sub(&d.mul_monomial(&t, &k));
            q.add_term(t, k);
        }
        Some(q)
    }

    fn univariate(&self, x: JetVar) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(x);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out
    }

    fn from_univariate(u: &BTreeMap<u32, Poly>, x: JetVar) -> Poly {
        let mut out = Poly::zero();
        for (&e, p) in u {
            out = out.add(&p.mul_monomial(&Monomial::pow(x, e), &BigRational::one()));
        }
        out
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self == other {
            return self.monic();
        }
        let (va, vb) = (self.vars(), other.vars());
        if !va.is_subset(&vb) {
            return other.gcd_with_coefficients(self, &vb);
        }
        if !vb.is_subset(&va) {
            return self.gcd_with_coefficients(other, &va);
        }
        let x = match (self.vars().first(), other.vars().first()) {
            (Some(a), Some(b)) => *a.min(b),
            _ => return Poly::one(),
        };
        let ua = self.univariate(x);
        let ub = other.univariate(x);
        let deg = |u: &BTreeMap<u32, Poly>| u.keys().next_back().copied().unwrap_or(0);
        if deg(&ua) == 0 {
            return self.gcd(&content(&ub));
        }
        if deg(&ub) == 0 {
            return other.gcd(&content(&ua));
        }
        let ca = content(&ua);
        let cb = content(&ub);
        let c = ca.gcd(&cb);
        let mut pa = primitive(&ua, &ca);
        let mut pb = primitive(&ub, &cb);
        if deg(&pa) < deg(&pb) {
            std::mem::swap(&mut pa, &mut pb);
        }
        loop {
            let r = prem(&pa, &pb);
            if r.is_empty() {
                break;
            }
            if deg(&r) == 0 {
                return c.monic();
            }
            pa = pb;
            let cr = content(&r);
            pb = primitive(&r, &cr);
        }
        let g = Poly::from_univariate(&pb, x);
        c.mul(&g).monic()
    }
}

impl Poly {
    /// `gcd(self, other)` where `self` only uses `keep`: the gcd divides
    /// every coefficient of `other` taken with respect to the other variables.
    fn gcd_with_coefficients(&self, other: &Poly, keep: &BTreeSet<JetVar>) -> Poly {
        let mut parts: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &other.terms {
            let mut outer = Monomial::one();
            let mut inner = Monomial::one();
            for &(v, e) in m.factors() {
                let f = Monomial::pow(v, e);
                if keep.contains(&v) {
                    inner = inner.mul(&f);
                } else {
                    outer = outer.mul(&f);
                }
            }
            parts.entry(outer).or_default().add_term(inner, c.clone());
        }
        let mut g = self.monic();
        for p in parts.values() {
            g = g.gcd(p);
            if g.is_one() {
                break;
            }
        }
        g
    }
}

fn content(u: &BTreeMap<u32, Poly>) -> Poly {
    let mut g = Poly::zero();
    for p in u.values() {
        g = g.gcd(p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive(u: &BTreeMap<u32, Poly>, c: &Poly) -> BTreeMap<u32, Poly> {
    let out: BTreeMap<u32, Poly> = u
        .iter()
        .map(|(&e, p)| (e, p.div_exact(c).expect("content divides coefficients")))
        .collect();
    // keep numeric size in check
    let lc = out
        .values()
        .next_back()
        .map(|p| p.leading_coeff())
        .unwrap_or_else(BigRational::one);
    out.into_iter()
        .map(|(e, p)| (e, p.scale(&lc.recip())))
        .collect()
}

fn prem(a: &BTreeMap<u32, Poly>, b: &BTreeMap<u32, Poly>) -> BTreeMap<u32, Poly> {
    let n = *b.keys().next_back().expect("nonzero divisor");
    let lcb = b[&n].clone();
    let mut r = a.clone();
    while let Some((&m, lcr)) = r.iter().next_back() {
        if m < n {
            break;
        }
        let lcr = lcr.clone();
        let shift = m - n;
        let mut next: BTreeMap<u32, Poly> = BTreeMap::new();
        for (&e, p) in &r {
            let v = p.mul(&lcb);
            if !v.is_zero() {
                next.insert(e, v);
            }
        }
        for (&e, p) in b {
            let t = p.mul(&lcr);
            let entry = next.entry(e + shift).or_default();
            *entry = entry.sub(&t);
        }
        next.retain(|_, p| !p.is_zero());
        r = next;
    }
    r
}

/// Rendering with caller-supplied variable names.
pub(crate) fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl Poly {
    pub fn render(&self, name: &dyn Fn(JetVar) -> String) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                if a.is_integer() {
                    parts.push(fmt_rational(&a));
                } else {
                    parts.push(format!("({})", fmt_rational(&a)));
                }
            }
            for &(v, e) in m.factors() {
                if e == 1 {
                    parts.push(name(v));
                } else {
                    parts.push(format!("{}^{}", name(v), e));
                }
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| default_even_name(v, None)))
    }
}

/// `u`, `u_x`, `u_2x` for a single field and `u1`, `u1_x`, ... otherwise
/// (`n = None` means the multi-field spelling).
pub fn default_even_name(v: JetVar, n: Option<usize>) -> String {
    let base = if n == Some(1) {
        "u".to_string()
    } else {
        format!("u{}", v.field + 1)
    };
    with_order_suffix(&base, v.order)
}

pub fn with_order_suffix(base: &str, order: usize) -> String {
    match order {
        0 => base.to_string(),
        1 => format!("{base}_x"),
        k => format!("{base}_{k}x"),
    }
}
