#![allow(dead_code)]

pub mod metrics;
pub mod superfn;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wno::{JetVar, RationalExpr, SuperPoly};

/// Seeded generator of random jet expressions.
pub struct Gen {
    rng: ChaCha8Rng,
    pub n: usize,
    pub max_order: usize,
    /// Percentage of coefficients given a nonconstant denominator.
    pub rational_pct: u32,
}

impl Gen {
    pub fn new(seed: u64, n: usize, max_order: usize) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n,
            max_order,
            rational_pct: 0,
        }
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, pct: u32) -> bool {
        self.rng.gen_range(0..100) < pct
    }

    pub fn small_rat(&mut self) -> BigRational {
        let mut num: i64 = self.rng.gen_range(-3..=3);
        if num == 0 {
            num = 1;
        }
        let den: i64 = self.rng.gen_range(1..=3);
        BigRational::new(num.into(), den.into())
    }

    pub fn jet(&mut self) -> JetVar {
        let f = self.range(0, self.n - 1);
        let k = self.range(0, self.max_order);
        JetVar::new(f, k)
    }

    /// Polynomial with one or two terms of degree at most two.
    pub fn poly(&mut self) -> RationalExpr {
        let mut out = RationalExpr::zero();
        for _ in 0..self.range(1, 2) {
            let mut t = RationalExpr::from(self.small_rat());
            for _ in 0..self.range(0, 2) {
                let v = self.jet();
                t = t.mul(&RationalExpr::var(v));
            }
            out = out.add(&t);
        }
        out
    }

    pub fn coeff(&mut self) -> RationalExpr {
        let c = self.poly();
        if self.rational_pct > 0 && self.chance(self.rational_pct) {
            let v = RationalExpr::var(JetVar::new(self.range(0, self.n - 1), 0));
            let den = v.pow(2).add(&RationalExpr::one());
            return c.div(&den).expect("nonzero");
        }
        c
    }

    pub fn odd_word(&mut self, degree: usize) -> SuperPoly {
        let mut w = SuperPoly::one();
        for _ in 0..degree {
            let v = self.jet();
            w = w.mul(&SuperPoly::p(v.field, v.order));
        }
        w
    }

    /// Homogeneous local superfunction of the given odd degree.
    pub fn superpoly(&mut self, degree: usize, terms: usize) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for _ in 0..terms {
            let c = self.coeff();
            out.add_assign(&self.odd_word(degree).scale(&c));
        }
        out
    }

    /// Local superfunction mixing odd degrees up to `max_degree`.
    pub fn mixed(&mut self, max_degree: usize, terms: usize) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for _ in 0..terms {
            let d = self.range(0, max_degree);
            out.add_assign(&self.superpoly(d, 1));
        }
        out
    }
}
