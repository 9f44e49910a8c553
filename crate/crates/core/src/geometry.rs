//! First-order homogeneous operators
//! `g^{ij} D + Γ^{ij}_k u^k_x + w^i_k u^k_x D^{-1} w^j_h u^h_x`
//! and their metric conditions.
//!
//! Conventions:
//!
//! ```text
//! Γ^i_{jk}   = ½ g^{il} (∂_j g_{lk} + ∂_k g_{lj} - ∂_l g_{jk})
//! Γ^{ij}_k   = -g^{is} Γ^j_{sk}
//! R^i_{jkl}  = ∂_k Γ^i_{lj} - ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} - Γ^i_{lm} Γ^m_{kj}
//! R^{ij}_{kh} = g^{js} R^i_{skh}
//! ∇_i W^j_k  = ∂_i W^j_k + Γ^j_{il} W^l_k - Γ^l_{ik} W^j_l
//! ```
//!
//! so the unit sphere has `R^{12}_{12} = 1`.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::algebra::{JetVar, Names, RationalExpr};
use crate::error::GeometryError;
use crate::schouten::{DiffOp, Tail, WNOperator};

type Matrix = Vec<Vec<RationalExpr>>;
type Tensor3 = Vec<Vec<Vec<RationalExpr>>>;
type Tensor4 = Vec<Vec<Vec<Vec<RationalExpr>>>>;

/// Contravariant metric `g^{ij}` and affinor `W^i_k`, functions of `u` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricData {
    pub n: usize,
    pub g_upper: Matrix,
    pub w: Matrix,
}

impl MetricData {
    pub fn new(g_upper: Matrix, w: Matrix) -> Result<Self, GeometryError> {
        let n = g_upper.len();
        let square = |m: &Matrix| m.len() == n && m.iter().all(|row| row.len() == n);
        if !square(&g_upper) || !square(&w) {
            return Err(GeometryError::Shape { expected: n });
        }
        for (i, row) in g_upper.iter().chain(&w).enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.vars().iter().any(|v| v.order > 0 || v.field >= n) {
                    let which = if i < n { "g" } else { "w" };
                    return Err(GeometryError::JetDependence(format!(
                        "{which}[{},{}]",
                        i % n + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(MetricData { n, g_upper, w })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedGeometry {
    pub g_lower: Matrix,
    /// `[i][j][k] = Γ^i_{jk}`
    pub gamma_lc: Tensor3,
    /// `[i][j][k] = Γ^{ij}_k`
    pub gamma_upper: Tensor3,
    /// `[i][j][k][h] = R^{ij}_{kh}`
    pub riemann: Tensor4,
    /// `[i][j][k] = ∇_i W^j_k`
    pub nabla_w: Tensor3,
}

fn d(c: &RationalExpr, k: usize) -> RationalExpr {
    c.derivative(JetVar::new(k, 0))
}

/// Gauss–Jordan inverse over the field of rational functions.
pub fn invert(m: &Matrix) -> Result<Matrix, GeometryError> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    RationalExpr::one()
                } else {
                    RationalExpr::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(GeometryError::SingularMetric)?;
        a.swap(col, pivot);
        let inv = a[col][col].recip().expect("nonzero pivot");
        a[col] = a[col].iter().map(|c| c.mul(&inv)).collect();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            let pivot_row = a[col].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                *x = x.sub(&f.mul(p));
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn sum(it: impl Iterator<Item = RationalExpr>) -> RationalExpr {
    it.fold(RationalExpr::zero(), |acc, x| acc.add(&x))
}

pub fn derive_geometry(m: &MetricData) -> Result<DerivedGeometry, GeometryError> {
    let n = m.n;
    let g = &m.g_upper;
    let gl = invert(g)?;
    let half = BigRational::new(1.into(), 2.into());
    let range = || 0..n;

    let gamma_lc: Tensor3 = range()
        .map(|i| {
            range()
                .map(|j| {
                    range()
                        .map(|k| {
                            sum(range().map(|l| {
                                let bracket =
                                    d(&gl[l][k], j).add(&d(&gl[l][j], k)).sub(&d(&gl[j][k], l));
                                g[i][l].mul(&bracket)
                            }))
                            .scale(&half)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let gamma_upper: Tensor3 = range()
        .map(|i| {
            range()
                .map(|j| {
                    range()
                        .map(|k| sum(range().map(|s| g[i][s].mul(&gamma_lc[j][s][k]))).neg())
                        .collect()
                })
                .collect()
        })
        .collect();

    // R^i_{jkl}
    let r_mixed = |i: usize, j: usize, k: usize, l: usize| {
        let mut acc = d(&gamma_lc[i][l][j], k).sub(&d(&gamma_lc[i][k][j], l));
        for mm in range() {
            acc = acc
                .add(&gamma_lc[i][k][mm].mul(&gamma_lc[mm][l][j]))
                .sub(&gamma_lc[i][l][mm].mul(&gamma_lc[mm][k][j]));
        }
        acc
    };
    let mixed: Tensor4 = range()
        .map(|i| {
            range()
                .map(|j| range().map(|k| range().map(|l| r_mixed(i, j, k, l)).collect()).collect())
                .collect()
        })
        .collect();
    let riemann: Tensor4 = range()
        .map(|i| {
            range()
                .map(|j| {
                    range()
                        .map(|k| {
                            range()
                                .map(|h| sum(range().map(|s| g[j][s].mul(&mixed[i][s][k][h]))))
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let w = &m.w;
    let nabla_w: Tensor3 = range()
        .map(|i| {
            range()
                .map(|j| {
                    range()
                        .map(|k| {
                            let mut acc = d(&w[j][k], i);
                            for l in range() {
                                acc = acc
                                    .add(&gamma_lc[j][i][l].mul(&w[l][k]))
                                    .sub(&gamma_lc[l][i][k].mul(&w[j][l]));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    Ok(DerivedGeometry {
        g_lower: gl,
        gamma_lc,
        gamma_upper,
        riemann,
        nabla_w,
    })
}

/// Which of the six conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// `g^{ij} = g^{ji}`
    MetricSymmetric,
    /// `∂_k g^{ij} = Γ^{ij}_k + Γ^{ji}_k`
    Compatibility,
    /// `g^{is} Γ^{jk}_s = g^{js} Γ^{ik}_s`
    GammaSymmetry,
    /// `g^{is} W^j_s = g^{js} W^i_s`
    AffinorSymmetry,
    /// `∇_i W^j_k = ∇_k W^j_i`
    Codazzi,
    /// `R^{ij}_{kh} = W^i_k W^j_h - W^j_k W^i_h`
    Gauss,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::MetricSymmetric,
        Condition::Compatibility,
        Condition::GammaSymmetry,
        Condition::AffinorSymmetry,
        Condition::Codazzi,
        Condition::Gauss,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Condition::MetricSymmetric => "metric_symmetric",
            Condition::Compatibility => "compatibility",
            Condition::GammaSymmetry => "gamma_symmetry",
            Condition::AffinorSymmetry => "affinor_symmetry",
            Condition::Codazzi => "codazzi",
            Condition::Gauss => "gauss",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Condition::MetricSymmetric => "g^{ij} = g^{ji}",
            Condition::Compatibility => "d_k g^{ij} = G^{ij}_k + G^{ji}_k",
            Condition::GammaSymmetry => "g^{is} G^{jk}_s = g^{js} G^{ik}_s",
            Condition::AffinorSymmetry => "g^{is} W^j_s = g^{js} W^i_s",
            Condition::Codazzi => "nabla_i W^j_k = nabla_k W^j_i",
            Condition::Gauss => "R^{ij}_{kh} = W^i_k W^j_h - W^j_k W^i_h",
        }
    }
}

/// First index tuple where a condition fails, with `lhs - rhs` there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionWitness {
    pub indices: Vec<usize>,
    pub difference: RationalExpr,
}

impl ConditionWitness {
    pub fn render(&self, names: &Names) -> String {
        let idx: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        format!(
            "at ({}): lhs - rhs = {}",
            idx.join(","),
            self.difference.render(&|v| names.even(v))
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub holds: bool,
    pub witness: Option<ConditionWitness>,
}

fn first_failure(
    n: usize,
    arity: usize,
    diff: impl Fn(&[usize]) -> RationalExpr,
) -> Option<ConditionWitness> {
    let total = n.pow(arity as u32);
    for code in 0..total {
        let mut idx = vec![0; arity];
        let mut c = code;
        for slot in idx.iter_mut().rev() {
            *slot = c % n;
            c /= n;
        }
        let dv = diff(&idx);
        if !dv.is_zero() {
            return Some(ConditionWitness {
                indices: idx,
                difference: dv,
            });
        }
    }
    None
}

pub fn check_conditions(m: &MetricData) -> Result<Vec<ConditionVerdict>, GeometryError> {
    let geo = derive_geometry(m)?;
    let n = m.n;
    let g = &m.g_upper;
    let w = &m.w;
    let gu = &geo.gamma_upper;
    let verdicts = Condition::ALL
        .iter()
        .map(|&c| {
            let witness = match c {
                Condition::MetricSymmetric => first_failure(n, 2, |x| g[x[0]][x[1]].sub(&g[x[1]][x[0]])),
                Condition::Compatibility => first_failure(n, 3, |x| {
                    let (i, j, k) = (x[0], x[1], x[2]);
                    d(&g[i][j], k).sub(&gu[i][j][k]).sub(&gu[j][i][k])
                }),
                Condition::GammaSymmetry => first_failure(n, 3, |x| {
                    let (i, j, k) = (x[0], x[1], x[2]);
                    sum((0..n).map(|s| g[i][s].mul(&gu[j][k][s]).sub(&g[j][s].mul(&gu[i][k][s]))))
                }),
                Condition::AffinorSymmetry => first_failure(n, 2, |x| {
                    let (i, j) = (x[0], x[1]);
                    sum((0..n).map(|s| g[i][s].mul(&w[j][s]).sub(&g[j][s].mul(&w[i][s]))))
                }),
                Condition::Codazzi => first_failure(n, 3, |x| {
                    let (i, j, k) = (x[0], x[1], x[2]);
                    geo.nabla_w[i][j][k].sub(&geo.nabla_w[k][j][i])
                }),
                Condition::Gauss => first_failure(n, 4, |x| {
                    let (i, j, k, h) = (x[0], x[1], x[2], x[3]);
                    let ww = w[i][k].mul(&w[j][h]).sub(&w[j][k].mul(&w[i][h]));
                    geo.riemann[i][j][k][h].sub(&ww)
                }),
            };
            ConditionVerdict {
                condition: c,
                holds: witness.is_none(),
                witness,
            }
        })
        .collect();
    Ok(verdicts)
}

/// `g^{ij} D + Γ^{ij}_k u^k_x` plus the tail `w D^{-1} w`, `w^i = W^i_k u^k_x`.
pub fn build_operator(m: &MetricData) -> Result<WNOperator, GeometryError> {
    let geo = derive_geometry(m)?;
    let n = m.n;
    let ux = |k: usize| RationalExpr::var(JetVar::new(k, 1));
    let mut op = WNOperator::zero(n);
    for i in 0..n {
        for j in 0..n {
            let zeroth = sum((0..n).map(|k| geo.gamma_upper[i][j][k].mul(&ux(k))));
            op.local[i][j] = DiffOp::from_terms([(m.g_upper[i][j].clone(), 1), (zeroth, 0)]);
        }
    }
    let wv: Vec<RationalExpr> = (0..n)
        .map(|i| sum((0..n).map(|k| m.w[i][k].mul(&ux(k)))))
        .collect();
    if wv.iter().any(|c| !c.is_zero()) {
        op.tails.push(Tail {
            e: BigRational::one(),
            w: wv.clone(),
            z: wv,
        });
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;

    fn v(i: usize) -> RationalExpr {
        RationalExpr::var(JetVar::new(i, 0))
    }
    fn c(n: i64) -> RationalExpr {
        RationalExpr::int(n)
    }

    fn sphere() -> Matrix {
        let a = v(0)
            .pow(2)
            .add(&v(1).pow(2))
            .scale(&rat(1, 4))
            .add(&c(1))
            .pow(2);
        vec![vec![a.clone(), c(0)], vec![c(0), a]]
    }

    fn identity(n: usize) -> Matrix {
        (0..n)
            .map(|i| (0..n).map(|j| c((i == j) as i64)).collect())
            .collect()
    }

    #[test]
    fn constant_metric_is_flat() {
        let m = MetricData::new(vec![vec![c(2), c(1)], vec![c(1), c(3)]], identity(2)).unwrap();
        let g = derive_geometry(&m).unwrap();
        assert!(g.gamma_lc.iter().flatten().flatten().all(RationalExpr::is_zero));
        assert!(g.riemann.iter().flatten().flatten().flatten().all(RationalExpr::is_zero));
    }

    #[test]
    fn one_dimensional_christoffel() {
        let m = MetricData::new(vec![vec![v(0)]], vec![vec![c(0)]]).unwrap();
        let g = derive_geometry(&m).unwrap();
        // g_11 = 1/u, Γ^1_11 = ½ u · (-1/u²) = -1/(2u)
        let expected = c(-1).div(&v(0).scale(&rat(2, 1))).unwrap();
        assert_eq!(g.gamma_lc[0][0][0], expected);
        assert!(g.riemann[0][0][0][0].is_zero());
    }

    #[test]
    fn sphere_has_unit_curvature() {
        let m = MetricData::new(sphere(), identity(2)).unwrap();
        let g = derive_geometry(&m).unwrap();
        assert_eq!(g.riemann[0][1][0][1], c(1));
        assert_eq!(g.riemann[0][1][1][0], c(-1));
        assert!(check_conditions(&m).unwrap().iter().all(|v| v.holds));
    }

    #[test]
    fn singular_metric() {
        let m = MetricData::new(vec![vec![v(0), v(0)], vec![v(0), v(0)]], identity(2)).unwrap();
        assert_eq!(derive_geometry(&m), Err(GeometryError::SingularMetric));
    }

    #[test]
    fn jet_dependence_rejected() {
        let bad = RationalExpr::var(JetVar::new(0, 1));
        assert!(matches!(
            MetricData::new(vec![vec![bad]], vec![vec![c(0)]]),
            Err(GeometryError::JetDependence(_))
        ));
    }

    #[test]
    fn flat_identity_fails_gauss_only() {
        let m = MetricData::new(identity(2), identity(2)).unwrap();
        let failing: Vec<Condition> = check_conditions(&m)
            .unwrap()
            .into_iter()
            .filter(|v| !v.holds)
            .map(|v| v.condition)
            .collect();
        assert_eq!(failing, vec![Condition::Gauss]);
    }

    #[test]
    fn trivial_operator() {
        let m = MetricData::new(vec![vec![c(1)]], vec![vec![c(0)]]).unwrap();
        let op = build_operator(&m).unwrap();
        assert_eq!(op.local[0][0], DiffOp::term(c(1), 1));
        assert!(op.tails.is_empty());
    }
}
