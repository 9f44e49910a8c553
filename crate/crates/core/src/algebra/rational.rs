use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{default_even_name, JetVar, Poly};

/// Element of the fraction field `Q(u^i_k)`.
///
/// Always stored reduced: `gcd(num, den) = 1` and `den` has leading
/// coefficient one, so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    num: Poly,
    den: Poly,
}

impl Default for RationalExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Poly> for RationalExpr {
    fn from(p: Poly) -> Self {
        RationalExpr {
            num: p,
            den: Poly::one(),
        }
    }
}

impl From<BigRational> for RationalExpr {
    fn from(c: BigRational) -> Self {
        Poly::constant(c).into()
    }
}

impl RationalExpr {
    pub fn zero() -> Self {
        Poly::zero().into()
    }

    pub fn one() -> Self {
        Poly::one().into()
    }

    pub fn int(n: i64) -> Self {
        Poly::int(n).into()
    }

    pub fn rational(n: i64, d: i64) -> Self {
        BigRational::new(n.into(), d.into()).into()
    }

    pub fn var(v: JetVar) -> Self {
        Poly::var(v).into()
    }

    /// `num / den`, reduced. Returns `None` for a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(c) = den.as_constant() {
            return RationalExpr {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            RationalExpr { num, den }
        } else {
            let k = lc.recip();
            RationalExpr {
                num: num.scale(&k),
                den: den.scale(&k),
            }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return self.num.add(&other.num).into();
        }
        if self.den == other.den {
            return Self::reduce(self.num.add(&other.num), self.den.clone());
        }
        let g = self.den.gcd(&other.den);
        let a = other.den.div_exact(&g).expect("gcd divides");
        let b = self.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&a).add(&other.num.mul(&b));
        Self::reduce(num, self.den.mul(&a))
    }

    pub fn neg(&self) -> Self {
        RationalExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        RationalExpr {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return self.num.mul(&other.num).into();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = other.den.div_exact(&g1).expect("gcd divides");
        let n2 = other.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lc = den.leading_coeff();
        if lc.is_one() {
            RationalExpr { num, den }
        } else {
            let k = lc.recip();
            RationalExpr {
                num: num.scale(&k),
                den: den.scale(&k),
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        Some(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn contains_var(&self, v: JetVar) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn vars(&self) -> std::collections::BTreeSet<JetVar> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }

    pub fn max_order(&self) -> Option<usize> {
        self.vars().into_iter().map(|v| v.order).max()
    }

    pub fn derivative(&self, v: JetVar) -> Self {
        if !self.contains_var(v) {
            return Self::zero();
        }
        if self.den.is_one() || !self.den.contains_var(v) {
            return Self::reduce(self.num.derivative(v), self.den.clone());
        }
        let num = self
            .num
            .derivative(v)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(v)));
        Self::reduce(num, self.den.mul(&self.den))
    }

    pub fn total_x(&self) -> Self {
        let mut out = Self::zero();
        for v in self.vars() {
            out = out.add(&self.derivative(v).mul(&Self::var(v.next())));
        }
        out
    }

    /// Antiderivative in `v` when the denominator does not involve `v`.
    pub fn integrate(&self, v: JetVar) -> Option<Self> {
        if self.den.contains_var(v) {
            return None;
        }
        Some(Self::reduce(self.num.integrate(v), self.den.clone()))
    }

    /// Renames variables; `f` must be injective, so no reduction is needed
    /// beyond keeping the denominator monic.
    pub fn map_vars(&self, f: &dyn Fn(JetVar) -> JetVar) -> Self {
        Self::reduce(self.num.map_vars(f), self.den.map_vars(f))
    }

    pub fn evaluate(&self, point: &dyn Fn(JetVar) -> BigRational) -> Option<BigRational> {
        let d = self.den.evaluate(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.evaluate(point) / d)
    }

    pub fn render(&self, name: &dyn Fn(JetVar) -> String) -> String {
        if self.den.is_one() {
            return self.num.render(name);
        }
        let wrap = |p: &Poly| {
            let s = p.render(name);
            if p.len() > 1 || s.contains('*') || s.contains('/') || s.starts_with('-') {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&self.num), wrap(&self.den))
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| default_even_name(v, None)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(k: usize) -> RationalExpr {
        RationalExpr::var(JetVar::new(0, k))
    }

    #[test]
    fn cross_multiplication_zero_test() {
        let q = u(0).div(&u(0)).unwrap().sub(&RationalExpr::one());
        assert!(q.is_zero());
    }

    #[test]
    fn reduced_form_is_canonical() {
        let a = RationalExpr::int(1).div(&u(0).add(&RationalExpr::one())).unwrap();
        let b = u(0)
            .div(&u(0).mul(&u(0)).add(&u(0)))
            .unwrap();
        assert_eq!(a, b);
        let c = a.add(&a).scale(&num_rational::BigRational::new(1.into(), 2.into()));
        assert_eq!(c, a);
    }

    #[test]
    fn quotient_rule() {
        let x = JetVar::new(0, 0);
        let f = RationalExpr::one().div(&u(0).pow(2)).unwrap();
        let expected = RationalExpr::int(-2).div(&u(0).pow(3)).unwrap();
        assert_eq!(f.derivative(x), expected);
        assert!(f.integrate(x).is_none());
    }
}
