mod common;

use common::Gen;
use num_rational::BigRational;
use proptest::prelude::*;
use wno::jetcalc::euler_lagrange;
use wno::nonlocal::NonlocalVarTable;
use wno::schouten::{
    bracket_superfunctions, from_superfunction, is_hamiltonian, schouten_bracket, skew_check,
    to_superfunction, DiffOp, Tail, WNOperator,
};
use wno::RationalExpr;

fn local_op(g: &mut Gen, max_k: usize) -> WNOperator {
    let n = g.n;
    let mut op = WNOperator::zero(n);
    for i in 0..n {
        for j in 0..n {
            for _ in 0..g.range(0, 2) {
                let k = g.range(0, max_k);
                let c = g.coeff();
                op.local[i][j].add_term(c, k);
            }
        }
    }
    op
}

fn with_tail(g: &mut Gen, mut op: WNOperator) -> WNOperator {
    let n = g.n;
    let w = (0..n).map(|_| g.coeff()).collect();
    let z = (0..n).map(|_| g.coeff()).collect();
    op.tails.push(Tail {
        e: g.small_rat(),
        w,
        z,
    });
    op
}

fn bivector(g: &mut Gen) -> wno::SuperPoly {
    let mut table = NonlocalVarTable::new();
    to_superfunction(&local_op(g, 3), &mut table).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bracket_of_bivectors_is_symmetric(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 1, 2);
        let a = bivector(&mut g);
        let b = bivector(&mut g);
        let mut t = NonlocalVarTable::new();
        let ab = bracket_superfunctions(&a, &b, 1, &mut t).unwrap();
        let ba = bracket_superfunctions(&b, &a, 1, &mut t).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn bracket_is_bilinear(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 1, 2);
        let a = bivector(&mut g);
        let b = bivector(&mut g);
        let mut t = NonlocalVarTable::new();
        let mut br = |x: &wno::SuperPoly, y: &wno::SuperPoly| bracket_superfunctions(x, y, 1, &mut t).unwrap();
        let s = a.add(&b);
        let lhs = br(&s, &s);
        let rhs = br(&a, &a).add(&br(&a, &b).scale_rat(&BigRational::from_integer(2.into()))).add(&br(&b, &b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn scaling_scales_bracket_quadratically(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 1, 2);
        let p = local_op(&mut g, 3).skew_part();
        let c = g.small_rat();
        let mut t1 = NonlocalVarTable::new();
        let mut t2 = NonlocalVarTable::new();
        let b1 = schouten_bracket(&p, &p, &mut t1).unwrap();
        let b2 = schouten_bracket(&p.scale(&c), &p.scale(&c), &mut t2).unwrap();
        prop_assert_eq!(b2.el, b1.el.map(|x| x.scale_rat(&(&c * &c))));
    }

    #[test]
    fn encoding_round_trips_to_skew_part(seed in any::<u64>(), tail in any::<bool>()) {
        let mut g = Gen::new(seed, 2, 2);
        g.rational_pct = 20;
        let mut p = local_op(&mut g, 3);
        if tail {
            p = with_tail(&mut g, p);
        }
        let mut table = NonlocalVarTable::new();
        let a = to_superfunction(&p, &mut table).unwrap();
        let q = from_superfunction(&a, 2, &table).unwrap();
        let diff = q.add(&p.skew_part().scale(&BigRational::from_integer((-1).into())));
        prop_assert!(diff.zero_witness().is_none());
        prop_assert!(skew_check(&q).skew);
    }

    #[test]
    fn skew_part_is_skew(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 2, 2);
        g.rational_pct = 20;
        let p = local_op(&mut g, 3);
        let p = with_tail(&mut g, p);
        prop_assert!(skew_check(&p.skew_part()).skew);
        let sym = p.add(&p.adjoint());
        prop_assert_eq!(skew_check(&p).skew, sym.is_zero());
    }

    #[test]
    fn constant_coefficient_operators_are_hamiltonian(a in -5i64..=5, b in -5i64..=5, c in -5i64..=5) {
        let d = DiffOp::from_terms([
            (RationalExpr::int(a), 1),
            (RationalExpr::int(b), 3),
            (RationalExpr::int(c), 5),
        ]);
        let p = WNOperator { n: 1, local: vec![vec![d]], tails: vec![] };
        let mut table = NonlocalVarTable::new();
        prop_assert!(is_hamiltonian(&p, &mut table).unwrap().hamiltonian);
    }

    #[test]
    fn bracket_el_matches_local_euler_lagrange(seed in any::<u64>()) {
        let mut g = Gen::new(seed, 1, 2);
        let p = local_op(&mut g, 3).skew_part();
        let mut table = NonlocalVarTable::new();
        let out = schouten_bracket(&p, &p, &mut table).unwrap();
        prop_assert_eq!(out.el, euler_lagrange(&out.three_vector, 1).unwrap());
    }
}
