//! Metric instances for the equivalence checks.

use wno::algebra::poly::rat;
use wno::geometry::{build_operator, check_conditions, Condition, MetricData};
use wno::nonlocal::NonlocalVarTable;
use wno::schouten::is_hamiltonian;
use wno::{JetVar, RationalExpr};

pub type Matrix = Vec<Vec<RationalExpr>>;

pub fn v(i: usize) -> RationalExpr {
    RationalExpr::var(JetVar::new(i, 0))
}

pub fn c(n: i64) -> RationalExpr {
    RationalExpr::int(n)
}

pub fn diag(d: &[RationalExpr]) -> Matrix {
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| if i == j { d[i].clone() } else { c(0) }).collect())
        .collect()
}

/// Unit sphere in stereographic coordinates.
pub fn sphere(n: usize) -> Matrix {
    let rho = (0..n).fold(RationalExpr::zero(), |a, i| a.add(&v(i).pow(2)));
    let a = rho.scale(&rat(1, 4)).add(&c(1)).pow(2);
    diag(&vec![a; n])
}

pub fn failing(m: &MetricData) -> Vec<Condition> {
    check_conditions(m)
        .unwrap()
        .into_iter()
        .filter(|v| !v.holds)
        .map(|v| v.condition)
        .collect()
}

pub fn hamiltonian(m: &MetricData) -> bool {
    let op = build_operator(m).unwrap();
    let mut table = NonlocalVarTable::new();
    is_hamiltonian(&op, &mut table).unwrap().hamiltonian
}

pub fn passing_instances() -> Vec<(&'static str, MetricData)> {
    vec![
        ("w = u", MetricData::new(diag(&[c(1)]), diag(&[v(0)])).unwrap()),
        ("w = u^2 + 1", MetricData::new(diag(&[c(1)]), diag(&[v(0).pow(2).add(&c(1))])).unwrap()),
        ("g = u, w = u", MetricData::new(diag(&[v(0)]), diag(&[v(0)])).unwrap()),
        ("sphere", MetricData::new(sphere(2), diag(&[c(1), c(1)])).unwrap()),
        ("flat rank one", MetricData::new(diag(&[c(1), c(1)]), diag(&[c(1), c(0)])).unwrap()),
        (
            "flat rank one, three fields",
            MetricData::new(diag(&[c(1), c(1), c(1)]), diag(&[c(0), c(2), c(0)])).unwrap(),
        ),
    ]
}

pub fn perturbed_instances() -> Vec<(&'static str, MetricData, Condition)> {
    let flat = || diag(&[c(1), c(1)]);
    vec![
        ("flat, W = I", MetricData::new(flat(), diag(&[c(1), c(1)])).unwrap(), Condition::Gauss),
        (
            "flat, nilpotent W",
            MetricData::new(flat(), vec![vec![c(0), c(1)], vec![c(0), c(0)]]).unwrap(),
            Condition::AffinorSymmetry,
        ),
        (
            "flat, W = diag(u2, 0)",
            MetricData::new(flat(), diag(&[v(1), c(0)])).unwrap(),
            Condition::Codazzi,
        ),
    ]
}
