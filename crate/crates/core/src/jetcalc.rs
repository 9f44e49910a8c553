//! Derivations on superfunctions: total x-derivative, variational
//! derivatives, linearization and its formal adjoint.

use num_rational::BigRational;
use num_traits::One;

use crate::algebra::{Factor, JetVar, SuperPoly, Word};
use crate::error::NonlocalError;
use crate::nonlocal::NonlocalVarTable;

/// Total derivative `D_x`. Jet orders go up by one; a nonlocal factor is
/// replaced in place by its defining density.
pub fn total_x(a: &SuperPoly, table: &NonlocalVarTable) -> Result<SuperPoly, NonlocalError> {
    let mut out = SuperPoly::zero();
    for (w, c) in a.terms() {
        let dc = c.total_x();
        if !dc.is_zero() {
            out.add_assign(&SuperPoly::monomial(dc, w));
        }
        for (j, f) in w.iter().enumerate() {
            match f {
                Factor::Jet(v) => {
                    let mut nw: Word = w.clone();
                    nw[j] = Factor::Jet(v.next());
                    out.add_assign(&SuperPoly::monomial(c.clone(), &nw));
                }
                Factor::Nonlocal(r) => {
                    let density = table.density(*r)?;
                    let piece = density.sandwich(&w[..j], &w[j + 1..]).scale(c);
                    out.add_assign(&piece);
                }
            }
        }
    }
    Ok(out)
}

/// `D_x^k`.
pub fn total_x_pow(
    a: &SuperPoly,
    k: usize,
    table: &NonlocalVarTable,
) -> Result<SuperPoly, NonlocalError> {
    let mut out = a.clone();
    for _ in 0..k {
        out = total_x(&out, table)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `δ/δu^i`
    Even,
    /// `δ/δp_i`
    Odd,
}

/// `sum_k (-1)^k D^k(∂a/∂v_k)` with nonlocal factors held fixed under the
/// partials (they still unfold under `D`).
pub(crate) fn variational_fixed(
    a: &SuperPoly,
    field: usize,
    kind: Kind,
    table: &NonlocalVarTable,
) -> Result<SuperPoly, NonlocalError> {
    let Some(top) = a.max_order(field) else {
        return Ok(SuperPoly::zero());
    };
    let partial = |k: usize| {
        let v = JetVar::new(field, k);
        match kind {
            Kind::Even => a.partial_even(v),
            Kind::Odd => a.partial_odd(v),
        }
    };
    // Horner: A_0 - D(A_1 - D(A_2 - ...))
    let mut acc = partial(top);
    for k in (0..top).rev() {
        acc = partial(k).sub(&total_x(&acc, table)?);
    }
    Ok(acc)
}

/// Variational derivative of a local superfunction.
pub fn var_deriv(a: &SuperPoly, field: usize, kind: Kind) -> Result<SuperPoly, NonlocalError> {
    if !a.is_local() {
        return Err(NonlocalError::NonlocalInput);
    }
    variational_fixed(a, field, kind, NonlocalVarTable::empty())
}

/// Euler–Lagrange tuple `(δ/δu^i, δ/δp_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ELResult {
    pub du: Vec<SuperPoly>,
    pub dp: Vec<SuperPoly>,
}

impl ELResult {
    pub fn zero(n: usize) -> Self {
        ELResult {
            du: vec![SuperPoly::zero(); n],
            dp: vec![SuperPoly::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.du.len()
    }

    pub fn is_zero(&self) -> bool {
        self.du.iter().chain(&self.dp).all(SuperPoly::is_zero)
    }

    pub fn add(&self, other: &ELResult) -> ELResult {
        ELResult {
            du: self.du.iter().zip(&other.du).map(|(a, b)| a.add(b)).collect(),
            dp: self.dp.iter().zip(&other.dp).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &ELResult) -> ELResult {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ELResult {
        ELResult {
            du: self.du.iter().map(SuperPoly::neg).collect(),
            dp: self.dp.iter().map(SuperPoly::neg).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> ELResult {
        ELResult {
            du: self.du.iter().map(&f).collect(),
            dp: self.dp.iter().map(&f).collect(),
        }
    }

    /// Components as `(label, value)` with one-based field indices.
    pub fn components(&self) -> Vec<(String, &SuperPoly)> {
        let mut out = Vec::new();
        for (i, a) in self.du.iter().enumerate() {
            out.push((format!("du[{}]", i + 1), a));
        }
        for (i, a) in self.dp.iter().enumerate() {
            out.push((format!("dp[{}]", i + 1), a));
        }
        out
    }
}

/// Euler–Lagrange tuple of a local superfunction in `n` fields.
pub fn euler_lagrange(a: &SuperPoly, n: usize) -> Result<ELResult, NonlocalError> {
    let mut el = ELResult::zero(n);
    for i in 0..n {
        el.du[i] = var_deriv(a, i, Kind::Even)?;
        el.dp[i] = var_deriv(a, i, Kind::Odd)?;
    }
    Ok(el)
}

/// Argument slot of a linear operator row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Even variation `φ^i` of `u^i`.
    Even(usize),
    /// Odd variation `ψ_j` of `p_j`.
    Odd(usize),
}

impl Slot {
    fn parity(self) -> u32 {
        match self {
            Slot::Even(_) => 0,
            Slot::Odd(_) => 1,
        }
    }
}

/// One scalar differential operator `sum_k coeffs[k] D^k` acting on a slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpRow {
    pub slot: Slot,
    pub coeffs: Vec<SuperPoly>,
}

impl OpRow {
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn trimmed(mut self) -> Self {
        let keep = self.order().map_or(0, |k| k + 1);
        self.coeffs.truncate(keep);
        self
    }
}

/// Linear differential operator in the `2n` slots `(φ^1..φ^n, ψ_1..ψ_n)`,
/// summed over slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizationOp {
    pub rows: Vec<OpRow>,
}

impl LinearizationOp {
    pub fn row(&self, slot: Slot) -> Option<&OpRow> {
        self.rows.iter().find(|r| r.slot == slot)
    }

    /// Value on the constant argument `1` in every slot: the order-zero
    /// coefficients, arranged as an EL tuple.
    pub fn apply_to_one(&self, n: usize) -> ELResult {
        let mut el = ELResult::zero(n);
        for r in &self.rows {
            let c0 = r.coeffs.first().cloned().unwrap_or_default();
            match r.slot {
                Slot::Even(i) => el.du[i] = el.du[i].add(&c0),
                Slot::Odd(j) => el.dp[j] = el.dp[j].add(&c0),
            }
        }
        el
    }
}

/// Fréchet derivative: rows `∂a/∂u^i_k D^k` and `(-1)^(|a|+1) ∂a/∂p_{j,k} D^k`.
pub fn linearize(a: &SuperPoly, n: usize) -> Result<LinearizationOp, NonlocalError> {
    if !a.is_local() {
        return Err(NonlocalError::NonlocalInput);
    }
    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        let top = a.max_order(i).unwrap_or(0);
        let coeffs = (0..=top)
            .map(|k| a.partial_even(JetVar::new(i, k)))
            .collect();
        rows.push(
            OpRow {
                slot: Slot::Even(i),
                coeffs,
            }
            .trimmed(),
        );
    }
    for j in 0..n {
        let top = a.max_order(j).unwrap_or(0);
        // the coefficient has degree |a| - 1, so the prefactor is its own
        // graded sign
        let coeffs = (0..=top)
            .map(|k| a.partial_odd(JetVar::new(j, k)).graded_sign(1))
            .collect();
        rows.push(
            OpRow {
                slot: Slot::Odd(j),
                coeffs,
            }
            .trimmed(),
        );
    }
    Ok(LinearizationOp { rows })
}

fn binomial(n: usize, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * BigRational::from_integer(((n - i) as i64).into())
            / BigRational::from_integer(((i + 1) as i64).into());
    }
    acc
}

/// Formal adjoint, row by row: `sum_k c_k D^k` becomes
/// `sum_k (-D)^k ∘ c_k`, and rows on odd slots pick up the graded sign
/// `(-1)^(|c| |ψ|)` of their coefficient.
pub fn adjoint(op: &LinearizationOp) -> Result<LinearizationOp, NonlocalError> {
    let table = NonlocalVarTable::empty();
    let mut rows = Vec::with_capacity(op.rows.len());
    for row in &op.rows {
        let top = row.coeffs.len();
        let mut out = vec![SuperPoly::zero(); top];
        for (k, c) in row.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // (-D)^k ∘ c = (-1)^k sum_m C(k,m) D^(k-m)(c) D^m
            let mut dc = c.clone();
            let mut derivs = vec![dc.clone()];
            for _ in 0..k {
                dc = total_x(&dc, table)?;
                derivs.push(dc.clone());
            }
            for (m, slot) in out.iter_mut().enumerate().take(k + 1) {
                let mut term = derivs[k - m].scale_rat(&binomial(k, m));
                if k % 2 == 1 {
                    term = term.neg();
                }
                *slot = slot.add(&term);
            }
        }
        let coeffs = out
            .into_iter()
            .map(|c| c.graded_sign(row.slot.parity()))
            .collect();
        rows.push(
            OpRow {
                slot: row.slot,
                coeffs,
            }
            .trimmed(),
        );
    }
    Ok(LinearizationOp { rows })
}
