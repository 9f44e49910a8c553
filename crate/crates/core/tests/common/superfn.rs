//! Reads single-field superfunctions written by hand, e.g.
//! `2*p_3x + 4*u*p_x - (1/2)*u_x^2*p`.

use num_rational::BigRational;
use wno::algebra::poly::rat;
use wno::SuperPoly;

fn order(suffix: &str) -> usize {
    match suffix {
        "" => 0,
        "_x" => 1,
        s => s
            .strip_prefix('_')
            .and_then(|s| s.strip_suffix('x'))
            .and_then(|k| k.parse().ok())
            .unwrap_or_else(|| panic!("bad jet suffix {s:?}")),
    }
}

fn number(s: &str) -> BigRational {
    let s = s.trim_start_matches('(').trim_end_matches(')');
    match s.split_once('/') {
        Some((a, b)) => rat(a.parse().unwrap(), b.parse().unwrap()),
        None => rat(s.parse().unwrap(), 1),
    }
}

fn term(t: &str) -> SuperPoly {
    let mut out = SuperPoly::one();
    for f in t.split('*') {
        let (base, exp) = match f.split_once('^') {
            Some((b, e)) => (b, e.parse::<usize>().unwrap()),
            None => (f, 1),
        };
        let x = if let Some(rest) = base.strip_prefix('u') {
            SuperPoly::u(0, order(rest))
        } else if let Some(rest) = base.strip_prefix('p') {
            SuperPoly::p(0, order(rest))
        } else {
            SuperPoly::one().scale_rat(&number(base))
        };
        for _ in 0..exp {
            out = out.mul(&x);
        }
    }
    out
}

pub fn parse(src: &str) -> SuperPoly {
    let src = src.trim();
    if src == "0" {
        return SuperPoly::zero();
    }
    let mut out = SuperPoly::zero();
    let (mut neg, mut rest) = match src.strip_prefix('-') {
        Some(r) => (true, r.trim_start()),
        None => (false, src),
    };
    loop {
        let cut = [" + ", " - "]
            .iter()
            .filter_map(|sep| rest.find(sep).map(|i| (i, *sep)))
            .min();
        let (head, tail) = match cut {
            Some((i, sep)) => (&rest[..i], Some((&rest[i + 3..], sep == " - "))),
            None => (rest, None),
        };
        let t = term(head);
        out.add_assign(&if neg { t.neg() } else { t });
        match tail {
            Some((r, n)) => {
                rest = r;
                neg = n;
            }
            None => break,
        }
    }
    out
}
