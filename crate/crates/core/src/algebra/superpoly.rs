//! Graded differential polynomials: rational coefficients in the even jet
//! variables times products of odd (and nonlocal) factors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::poly::{default_even_name, with_order_suffix, JetVar};
use super::rational::RationalExpr;
use crate::error::AlgebraError;

/// Formal nonlocal variable `r` with `r_x` given by a registered density.
///
/// `degree` is the odd degree of that density; variables of even degree
/// commute with everything and are not nilpotent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NonlocalVar {
    pub id: u32,
    pub degree: u32,
}

/// A generator of the graded part. Jet factors `p_{i,k}` sort before
/// nonlocal factors; jets by `(field, order)`, nonlocals by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Jet(JetVar),
    Nonlocal(NonlocalVar),
}

impl Factor {
    pub fn p(field: usize, order: usize) -> Self {
        Factor::Jet(JetVar::new(field, order))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Factor::Jet(_) => 1,
            Factor::Nonlocal(v) => v.degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree() % 2 == 1
    }
}

pub type Word = SmallVec<[Factor; 4]>;

/// Sorts a factor sequence into canonical order. Returns the sorted word and
/// whether the permutation flipped the sign, or `None` if an odd factor
/// repeats.
pub fn canonical_word(mut w: Word) -> Option<(Word, bool)> {
    let mut negate = false;
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            if w[j - 1].is_odd() && w[j].is_odd() {
                negate = !negate;
            }
            w.swap(j - 1, j);
            j -= 1;
        }
    }
    if w.windows(2).any(|p| p[0] == p[1] && p[0].is_odd()) {
        return None;
    }
    Some((w, negate))
}

pub fn word_degree(w: &[Factor]) -> u32 {
    w.iter().map(Factor::degree).sum()
}

fn parity_of(w: &[Factor]) -> bool {
    word_degree(w) % 2 == 1
}

/// Variable with respect to which [`SuperPoly::partial`] differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Even(JetVar),
    Odd(Factor),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SuperPoly {
    terms: BTreeMap<Word, RationalExpr>,
}

impl SuperPoly {
    pub fn zero() -> Self {
        SuperPoly::default()
    }

    pub fn one() -> Self {
        Self::scalar(RationalExpr::one())
    }

    pub fn scalar(c: RationalExpr) -> Self {
        let mut s = Self::zero();
        s.push(Word::new(), c);
        s
    }

    pub fn int(n: i64) -> Self {
        Self::scalar(RationalExpr::int(n))
    }

    /// Even jet variable `u^field_order`.
    pub fn u(field: usize, order: usize) -> Self {
        Self::scalar(RationalExpr::var(JetVar::new(field, order)))
    }

    /// Odd jet variable `p_{field, order}`.
    pub fn p(field: usize, order: usize) -> Self {
        Self::factor(Factor::p(field, order))
    }

    pub fn factor(f: Factor) -> Self {
        Self::monomial(RationalExpr::one(), &[f])
    }

    pub fn nonlocal(v: NonlocalVar) -> Self {
        Self::factor(Factor::Nonlocal(v))
    }

    /// `c` times the product of `factors` in the given order.
    pub fn monomial(c: RationalExpr, factors: &[Factor]) -> Self {
        Self::normalize([(c, factors.to_vec())])
    }

    /// Canonical form of a list of raw terms.
    pub fn normalize<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = (RationalExpr, Vec<Factor>)>,
    {
        let mut out = Self::zero();
        for (c, f) in raw {
            if let Some((w, neg)) = canonical_word(f.into_iter().collect()) {
                out.push(w, if neg { c.neg() } else { c });
            }
        }
        out
    }

    /// Adds a term whose word is already canonical.
    fn push(&mut self, w: Word, c: RationalExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &RationalExpr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &[Factor]) -> RationalExpr {
        self.terms
            .get(&Word::from_slice(w))
            .cloned()
            .unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (w, c) in &small.terms {
            big.push(w.clone(), c.clone());
        }
        big
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (w, c) in &other.terms {
            self.push(w.clone(), c.clone());
        }
    }

    pub fn neg(&self) -> Self {
        SuperPoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.push(w.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, k: &RationalExpr) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.push(w.clone(), c.mul(k));
        }
        out
    }

    pub fn scale_rat(&self, k: &BigRational) -> Self {
        self.scale(&RationalExpr::from(k.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut w: Word = wa.clone();
                w.extend_from_slice(wb);
                if let Some((w, neg)) = canonical_word(w) {
                    let c = ca.mul(cb);
                    out.push(w, if neg { c.neg() } else { c });
                }
            }
        }
        out
    }

    /// Product of a left word, `self`, and a right word, keeping order.
    pub fn sandwich(&self, left: &[Factor], right: &[Factor]) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut f: Word = Word::from_slice(left);
            f.extend_from_slice(w);
            f.extend_from_slice(right);
            if let Some((f, neg)) = canonical_word(f) {
                out.push(f, if neg { c.neg() } else { c.clone() });
            }
        }
        out
    }

    /// Odd degree when every term has the same one.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|w| word_degree(w));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Terms of odd degree `d`.
    pub fn part_of_degree(&self, d: u32) -> Self {
        SuperPoly {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| word_degree(w) == d)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_local(&self) -> bool {
        self.terms
            .keys()
            .all(|w| w.iter().all(|f| matches!(f, Factor::Jet(_))))
    }

    pub fn nonlocals(&self) -> BTreeSet<NonlocalVar> {
        self.terms
            .keys()
            .flat_map(|w| {
                w.iter().filter_map(|f| match f {
                    Factor::Nonlocal(v) => Some(*v),
                    Factor::Jet(_) => None,
                })
            })
            .collect()
    }

    /// Highest nonlocal-factor count over all terms.
    pub fn max_nonlocal_factors(&self) -> usize {
        self.terms
            .keys()
            .map(|w| w.iter().filter(|f| matches!(f, Factor::Nonlocal(_))).count())
            .max()
            .unwrap_or(0)
    }

    /// Highest jet order of `field` among coefficients and odd factors.
    pub fn max_order(&self, field: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (w, c) in &self.terms {
            for v in c.vars() {
                if v.field == field {
                    best = Some(best.map_or(v.order, |b| b.max(v.order)));
                }
            }
            for f in w {
                if let Factor::Jet(v) = f {
                    if v.field == field {
                        best = Some(best.map_or(v.order, |b| b.max(v.order)));
                    }
                }
            }
        }
        best
    }

    /// Even variables occurring in coefficients.
    pub fn even_vars(&self) -> BTreeSet<JetVar> {
        self.terms.values().flat_map(|c| c.vars()).collect()
    }

    /// Odd jet variables occurring in words.
    pub fn odd_vars(&self) -> BTreeSet<JetVar> {
        self.terms
            .keys()
            .flat_map(|w| {
                w.iter().filter_map(|f| match f {
                    Factor::Jet(v) => Some(*v),
                    Factor::Nonlocal(_) => None,
                })
            })
            .collect()
    }

    pub fn max_field(&self) -> Option<usize> {
        let e = self.even_vars().into_iter().map(|v| v.field).max();
        let o = self.odd_vars().into_iter().map(|v| v.field).max();
        e.max(o)
    }

    /// Partial derivative; odd derivatives act from the left.
    pub fn partial(&self, v: Var) -> Result<Self, AlgebraError> {
        match v {
            Var::Even(x) => Ok(self.partial_even(x)),
            Var::Odd(Factor::Jet(x)) => Ok(self.partial_odd(x)),
            Var::Odd(Factor::Nonlocal(r)) => Err(AlgebraError::NonlocalPartial(r.id)),
        }
    }

    pub fn partial_even(&self, x: JetVar) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            if c.contains_var(x) {
                out.push(w.clone(), c.derivative(x));
            }
        }
        out
    }

    /// Left derivative in `p_x`: strike the factor, sign from the factors
    /// standing before it.
    pub fn partial_odd(&self, x: JetVar) -> Self {
        let target = Factor::Jet(x);
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            if let Some(pos) = w.iter().position(|f| *f == target) {
                let mut rest = w.clone();
                rest.remove(pos);
                let c = if parity_of(&w[..pos]) { c.neg() } else { c.clone() };
                out.push(rest, c);
            }
        }
        out
    }

    /// Right derivative in a nonlocal variable: `self = result * v + (terms
    /// free of v)` for odd `v`.
    pub fn right_partial_nonlocal(&self, v: NonlocalVar) -> Self {
        let target = Factor::Nonlocal(v);
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let count = w.iter().filter(|f| **f == target).count();
            if count == 0 {
                continue;
            }
            let pos = w.iter().rposition(|f| *f == target).expect("present");
            let mut rest = w.clone();
            rest.remove(pos);
            let mut c = c.scale(&BigRational::from_integer((count as i64).into()));
            if target.is_odd() && parity_of(&w[pos + 1..]) {
                c = c.neg();
            }
            out.push(rest, c);
        }
        out
    }

    /// Replaces every occurrence of a nonlocal variable by `value`.
    pub fn substitute(&self, v: NonlocalVar, value: &SuperPoly) -> Self {
        let target = Factor::Nonlocal(v);
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            if !w.contains(&target) {
                out.push(w.clone(), c.clone());
                continue;
            }
            // expand factor by factor, left to right
            let mut acc = SuperPoly::scalar(c.clone());
            for f in w {
                let rhs = if *f == target {
                    value.clone()
                } else {
                    SuperPoly::factor(*f)
                };
                acc = acc.mul(&rhs);
            }
            out.add_assign(&acc);
        }
        out
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&RationalExpr) -> RationalExpr) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.push(w.clone(), f(c));
        }
        out
    }

    /// Multiplies every term by `(-1)^(deg(word) * parity)`.
    pub fn graded_sign(&self, parity: u32) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let flip = (word_degree(w) * parity) % 2 == 1;
            out.push(w.clone(), if flip { c.neg() } else { c.clone() });
        }
        out
    }

    pub fn render(&self, names: &Names) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let cs = c.render(&|v| names.even(v));
            let word = w.iter().map(|f| names.factor(f)).collect::<Vec<_>>().join("*");
            let (neg, body) = match cs.strip_prefix('-') {
                Some(rest) if c.is_polynomial() && c.numer().len() == 1 => (true, rest.to_string()),
                _ => (false, cs),
            };
            let needs_parens = c.numer().len() > 1 || !c.is_polynomial();
            let coeff = if needs_parens && !word.is_empty() {
                format!("({body})")
            } else {
                body
            };
            let term = if word.is_empty() {
                coeff
            } else if coeff == "1" {
                word
            } else {
                format!("{coeff}*{word}")
            };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        out
    }
}

/// Spelling of variables in rendered output.
#[derive(Clone, Debug, Default)]
pub struct Names {
    pub fields: Vec<String>,
    pub nonlocals: BTreeMap<u32, String>,
}

impl Names {
    pub fn for_fields(fields: &[&str]) -> Self {
        Names {
            fields: fields.iter().map(|s| s.to_string()).collect(),
            nonlocals: BTreeMap::new(),
        }
    }

    pub fn even(&self, v: JetVar) -> String {
        match self.fields.get(v.field) {
            Some(name) => with_order_suffix(name, v.order),
            None => default_even_name(v, None),
        }
    }

    pub fn odd(&self, v: JetVar) -> String {
        let base = if self.fields.len() <= 1 && v.field == 0 {
            "p".to_string()
        } else {
            format!("p{}", v.field + 1)
        };
        with_order_suffix(&base, v.order)
    }

    pub fn factor(&self, f: &Factor) -> String {
        match f {
            Factor::Jet(v) => self.odd(*v),
            Factor::Nonlocal(r) => self
                .nonlocals
                .get(&r.id)
                .cloned()
                .unwrap_or_else(|| format!("r{}", r.id)),
        }
    }
}

impl fmt::Display for SuperPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.max_field().map_or(1, |m| m + 1);
        let names = if n == 1 {
            Names::for_fields(&["u"])
        } else {
            Names::default()
        };
        f.write_str(&self.render(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;

    fn p(k: usize) -> SuperPoly {
        SuperPoly::p(0, k)
    }
    fn u(k: usize) -> SuperPoly {
        SuperPoly::u(0, k)
    }
    fn r() -> SuperPoly {
        SuperPoly::nonlocal(NonlocalVar { id: 0, degree: 1 })
    }

    #[test]
    fn nilpotency_and_anticommutation() {
        let pp = SuperPoly::normalize([(RationalExpr::one(), vec![Factor::p(0, 0), Factor::p(0, 0)])]);
        assert!(pp.is_zero());
        let swapped = SuperPoly::normalize([(RationalExpr::one(), vec![Factor::p(0, 1), Factor::p(0, 0)])]);
        assert_eq!(swapped, p(0).mul(&p(1)).neg());
        assert!(u(1).mul(&p(0)).mul(&u(1).mul(&p(0))).is_zero());
        assert_eq!(p(1).mul(&p(0)), p(0).mul(&p(1)).neg());
    }

    #[test]
    fn r_squared_vanishes() {
        let t = u(1).scale_rat(&rat(-8, 1)).mul(&p(1)).mul(&r()).mul(&r());
        assert!(t.is_zero());
    }

    #[test]
    fn product_with_nonlocal_reorders() {
        // (-4/3 p_x r)(-2 p_3x) = -(8/3) r p_x p_3x
        let a = p(1).mul(&r()).scale_rat(&rat(-4, 3));
        let b = p(3).scale_rat(&rat(-2, 1));
        let expected = r().mul(&p(1)).mul(&p(3)).scale_rat(&rat(-8, 3));
        assert_eq!(a.mul(&b), expected);
    }

    #[test]
    fn sixteen_ninths_cancel() {
        let c = u(0).mul(&u(1)).scale_rat(&rat(16, 9));
        let a = c.mul(&p(1)).mul(&p(0)).mul(&r());
        let b = c.mul(&p(1)).mul(&r()).mul(&p(0));
        assert!(a.add(&b).is_zero());
    }

    #[test]
    fn left_partials() {
        let a = u(0).mul(&u(0)).mul(&p(1)).mul(&p(0));
        assert_eq!(
            a.partial(Var::Even(JetVar::new(0, 0))).unwrap(),
            u(0).scale_rat(&rat(2, 1)).mul(&p(1)).mul(&p(0))
        );
        let b = p(0).mul(&p(1));
        assert_eq!(b.partial(Var::Odd(Factor::p(0, 1))).unwrap(), p(0).neg());
        assert_eq!(b.partial(Var::Odd(Factor::p(0, 0))).unwrap(), p(1));
        let nl = Factor::Nonlocal(NonlocalVar { id: 0, degree: 1 });
        assert!(matches!(
            b.partial(Var::Odd(nl)),
            Err(AlgebraError::NonlocalPartial(0))
        ));
    }

    #[test]
    fn right_partial_in_nonlocal() {
        let rv = NonlocalVar { id: 0, degree: 1 };
        // r p = -p r, so the right derivative is -p
        let t = r().mul(&p(0));
        assert_eq!(t.right_partial_nonlocal(rv), p(0).neg());
    }

    #[test]
    fn even_nonlocals_commute_and_repeat() {
        let y = SuperPoly::nonlocal(NonlocalVar { id: 3, degree: 2 });
        assert_eq!(y.mul(&p(0)), p(0).mul(&y));
        assert!(!y.mul(&y).is_zero());
    }

    #[test]
    fn rendering() {
        let a = u(1).mul(&p(0)).mul(&r());
        assert_eq!(a.to_string(), "u_x*p*r0");
        let b = p(3).mul(&p(0)).add(&u(0).mul(&u(0)).scale_rat(&rat(2, 3)).mul(&p(1)).mul(&p(0)));
        assert_eq!(b.to_string(), "-(2/3)*u^2*p*p_x - p*p_3x");
    }
}
