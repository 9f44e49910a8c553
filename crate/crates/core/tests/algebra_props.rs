mod common;

use common::Gen;
use proptest::prelude::*;
use wno::jetcalc::{adjoint, euler_lagrange, linearize, total_x, var_deriv, Kind};
use wno::nonlocal::NonlocalVarTable;
use wno::{JetVar, Poly, SuperPoly};

fn sign(a: &SuperPoly, b: &SuperPoly) -> bool {
    a.degree().unwrap_or(0) % 2 == 1 && b.degree().unwrap_or(0) % 2 == 1
}

fn table() -> &'static NonlocalVarTable {
    NonlocalVarTable::empty()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_commutativity(seed in any::<u64>(), da in 0usize..=2, db in 0usize..=2) {
        let mut g = Gen::new(seed, 2, 3);
        let a = g.superpoly(da, 2);
        let b = g.superpoly(db, 2);
        let ba = b.mul(&a);
        let expected = if sign(&a, &b) { ba.neg() } else { ba };
        prop_assert_eq!(a.mul(&b), expected);
    }

    #[test]
    fn associativity_and_distributivity(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 3);
        g.rational_pct = 30;
        let a = g.mixed(2, 2);
        let b = g.mixed(2, 2);
        let c = g.mixed(2, 2);
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn odd_elements_square_to_zero(seed in any::<u64>(), d in 0usize..=1) {
        let mut g = Gen::new(seed, 2, 3);
        let a = g.superpoly(2 * d + 1, 3);
        prop_assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 3);
        let a = g.mixed(3, 4);
        let again = SuperPoly::normalize(a.terms().map(|(w, c)| (c.clone(), w.to_vec())));
        prop_assert_eq!(&again, &a);
        // reversing k odd factors costs (-1)^(k(k-1)/2)
        let reversed = SuperPoly::normalize(a.terms().map(|(w, c)| {
            let k = w.len();
            let c = if (k * k.saturating_sub(1) / 2) % 2 == 1 { c.neg() } else { c.clone() };
            (c, w.iter().rev().copied().collect())
        }));
        prop_assert_eq!(reversed, a);
    }

    #[test]
    fn total_derivative_is_a_derivation(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 3);
        g.rational_pct = 30;
        let a = g.mixed(2, 2);
        let b = g.mixed(2, 2);
        let lhs = total_x(&a.mul(&b), table()).unwrap();
        let rhs = total_x(&a, table()).unwrap().mul(&b).add(&a.mul(&total_x(&b, table()).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn variational_derivative_kills_divergences(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 3);
        g.rational_pct = 20;
        let a = g.mixed(2, 3);
        let d = total_x(&a, table()).unwrap();
        for i in 0..2 {
            prop_assert!(var_deriv(&d, i, Kind::Even).unwrap().is_zero());
            prop_assert!(var_deriv(&d, i, Kind::Odd).unwrap().is_zero());
        }
    }

    #[test]
    fn adjoint_linearization_on_one_is_euler_lagrange(seed in any::<u64>(), deg in 0usize..=2) {
        let mut g = Gen::new(seed, 2, 4);
        let a = g.superpoly(deg, 3);
        let lhs = adjoint(&linearize(&a, 2).unwrap()).unwrap().apply_to_one(2);
        prop_assert_eq!(lhs, euler_lagrange(&a, 2).unwrap());
    }

    #[test]
    fn gcd_recovers_common_factor(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 1);
        let f = g.poly().numer().add(&Poly::var(JetVar::new(0, 0)));
        let a = g.poly().numer().clone();
        let b = g.poly().numer().clone();
        if f.is_zero() || a.is_zero() || b.is_zero() {
            return Ok(());
        }
        let h = f.mul(&a).gcd(&f.mul(&b));
        prop_assert!(h.div_exact(&f).is_some());
        prop_assert!(f.mul(&a).div_exact(&h).is_some());
        prop_assert!(f.mul(&b).div_exact(&h).is_some());
    }
}

#[test]
fn quotient_rule_matches_product_rule() {
    let u = wno::RationalExpr::var(JetVar::new(0, 0));
    let f = u.pow(2).add(&wno::RationalExpr::one());
    let inv = f.recip().unwrap();
    // D(f * 1/f) = 0
    assert!(f.total_x().mul(&inv).add(&f.mul(&inv.total_x())).is_zero());
}
