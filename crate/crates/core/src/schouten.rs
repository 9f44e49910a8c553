//! Weakly nonlocal operators, their superfunction encoding and the
//! Schouten bracket.
//!
//! An operator `P^{ij} = Σ c_k D^k + Σ e w^i D^{-1} z^j` is encoded as
//! `Σ c_k p_i p_{j,k} + Σ e (w^i p_i) r` with `r_x = z^j p_j`. Only the skew
//! part of `P` survives the encoding.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::algebra::{Factor, JetVar, Names, NonlocalVar, RationalExpr, SuperPoly, Word};
use crate::error::NonlocalError;
use crate::jetcalc::ELResult;
use crate::nonlocal::{el_nonlocal, split_tails, NonlocalVarTable, TailKind, VarKind};

fn binomial(n: usize, k: usize) -> BigRational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

fn dx_pow(c: &RationalExpr, k: usize) -> RationalExpr {
    (0..k).fold(c.clone(), |acc, _| acc.total_x())
}

/// Scalar differential operator `Σ c_k D^k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiffOp(BTreeMap<usize, RationalExpr>);

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    /// `c D^k`
    pub fn term(c: RationalExpr, k: usize) -> Self {
        let mut d = DiffOp::zero();
        d.add_term(c, k);
        d
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (RationalExpr, usize)>) -> Self {
        let mut d = DiffOp::zero();
        for (c, k) in terms {
            d.add_term(c, k);
        }
        d
    }

    pub fn add_term(&mut self, c: RationalExpr, k: usize) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(k).or_default();
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `(c, k)` pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (&RationalExpr, usize)> {
        self.0.iter().map(|(k, c)| (c, *k))
    }

    pub fn coeff(&self, k: usize) -> RationalExpr {
        self.0.get(&k).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (c, k) in other.terms() {
            out.add_term(c.clone(), k);
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> DiffOp {
        DiffOp::from_terms(self.terms().map(|(c, o)| (c.scale(k), o)))
    }

    pub fn neg(&self) -> DiffOp {
        self.scale(&-BigRational::one())
    }

    /// `(-D)^a ∘ c ∘ D^b`
    pub fn sandwich(c: &RationalExpr, a: usize, b: usize) -> DiffOp {
        let sign = if a.is_multiple_of(2) {
            BigRational::one()
        } else {
            -BigRational::one()
        };
        let mut out = DiffOp::zero();
        for m in 0..=a {
            let coeff = dx_pow(c, a - m).scale(&(binomial(a, m) * &sign));
            out.add_term(coeff, m + b);
        }
        out
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (a, k) in self.terms() {
            for (b, m) in other.terms() {
                for l in 0..=k {
                    out.add_term(a.mul(&dx_pow(b, k - l)).scale(&binomial(k, l)), l + m);
                }
            }
        }
        out
    }

    /// Left multiplication by a function.
    pub fn left_mul(&self, c: &RationalExpr) -> DiffOp {
        DiffOp::from_terms(self.terms().map(|(a, k)| (c.mul(a), k)))
    }

    /// Formal adjoint `Σ (-D)^k ∘ c_k`.
    pub fn adjoint(&self) -> DiffOp {
        let mut out = DiffOp::zero();
        for (c, k) in self.terms() {
            out = out.add(&DiffOp::sandwich(c, k, 0));
        }
        out
    }

    pub fn render(&self, names: &Names) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let even = |v: JetVar| names.even(v);
        let mut out = String::new();
        for (i, (c, k)) in self.terms().enumerate() {
            let neg = c.render(&even).starts_with('-');
            let c = if neg { c.neg() } else { c.clone() };
            let s = c.render(&even);
            let s = if c.numer().len() > 1 && c.is_polynomial() {
                format!("({s})")
            } else {
                s
            };
            let body = match (k, s.as_str()) {
                (0, _) => s,
                (1, "1") => "D".to_string(),
                (k, "1") => format!("D^{k}"),
                (1, _) => format!("{s}*D"),
                (k, _) => format!("{s}*D^{k}"),
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

/// Nonlocal tail `e w^i D^{-1} z^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub e: BigRational,
    pub w: Vec<RationalExpr>,
    pub z: Vec<RationalExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WNOperator {
    pub n: usize,
    pub local: Vec<Vec<DiffOp>>,
    pub tails: Vec<Tail>,
}

impl WNOperator {
    pub fn zero(n: usize) -> Self {
        WNOperator {
            n,
            local: vec![vec![DiffOp::zero(); n]; n],
            tails: Vec::new(),
        }
    }

    pub fn add(&self, other: &WNOperator) -> WNOperator {
        assert_eq!(self.n, other.n, "operators on different field counts");
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.local[i][j] = self.local[i][j].add(&other.local[i][j]);
            }
        }
        out.tails.extend(other.tails.iter().cloned());
        out
    }

    pub fn scale(&self, k: &BigRational) -> WNOperator {
        WNOperator {
            n: self.n,
            local: self
                .local
                .iter()
                .map(|row| row.iter().map(|d| d.scale(k)).collect())
                .collect(),
            tails: self
                .tails
                .iter()
                .filter(|_| !k.is_zero())
                .map(|t| Tail {
                    e: &t.e * k,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// Formal adjoint: entries `(P^{ji})*`, tails `(e, w, z) -> (-e, z, w)`.
    pub fn adjoint(&self) -> WNOperator {
        let n = self.n;
        let mut out = WNOperator::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.local[i][j] = self.local[j][i].adjoint();
            }
        }
        out.tails = self
            .tails
            .iter()
            .map(|t| Tail {
                e: -t.e.clone(),
                w: t.z.clone(),
                z: t.w.clone(),
            })
            .collect();
        out
    }

    /// `(P - P*) / 2`
    pub fn skew_part(&self) -> WNOperator {
        self.add(&self.adjoint().scale(&-BigRational::one()))
            .scale(&BigRational::new(1.into(), 2.into()))
    }

    /// Whether this is the zero operator; otherwise the first nonzero entry.
    pub fn zero_witness(&self) -> Option<Witness> {
        let n = self.n;
        let shift = |v: JetVar| JetVar::new(v.field + n, v.order);
        for i in 0..n {
            for j in 0..n {
                let local = self.local[i][j].clone();
                // Σ e w^i(x) z^j(y) vanishes as a function of two independent
                // jet points exactly when the tails cancel
                let mut tensor = RationalExpr::zero();
                for t in &self.tails {
                    let term = t.w[i].mul(&t.z[j].map_vars(&shift)).scale(&t.e);
                    tensor = tensor.add(&term);
                }
                if !local.is_zero() || !tensor.is_zero() {
                    return Some(Witness {
                        row: i,
                        col: j,
                        local,
                        tails: tensor,
                    });
                }
            }
        }
        None
    }

    pub fn is_zero(&self) -> bool {
        self.zero_witness().is_none()
    }

    pub fn is_local(&self) -> bool {
        self.tails.iter().all(|t| t.e.is_zero())
    }
}

/// Nonzero entry of an operator. `tails` is `Σ e w^i ⊗ z^j`, with the
/// `z` factor written in primed variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub local: DiffOp,
    pub tails: RationalExpr,
}

impl Witness {
    pub fn render(&self, names: &Names) -> String {
        let n = names.fields.len();
        let mut s = format!("entry[{},{}]", self.row + 1, self.col + 1);
        if !self.local.is_zero() {
            s.push_str(&format!(" local: {}", self.local.render(names)));
        }
        if !self.tails.is_zero() {
            let name = |v: JetVar| {
                if v.field >= n && n > 0 {
                    let base = format!("{}'", names.fields[v.field - n]);
                    crate::algebra::poly::with_order_suffix(&base, v.order)
                } else {
                    names.even(v)
                }
            };
            s.push_str(&format!(" nonlocal: {}", self.tails.render(&name)));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewVerdict {
    pub skew: bool,
    pub witness: Option<Witness>,
}

/// `P + P* = 0`, with the first nonzero entry of `P + P*` as witness.
pub fn skew_check(p: &WNOperator) -> SkewVerdict {
    let witness = p.add(&p.adjoint()).zero_witness();
    SkewVerdict {
        skew: witness.is_none(),
        witness,
    }
}

fn odd_linear(v: &[RationalExpr]) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for (i, c) in v.iter().enumerate() {
        out.add_assign(&SuperPoly::p(i, 0).scale(c));
    }
    out
}

/// Superfunction of `p`; each tail registers `r` with `r_x = z^j p_j`.
pub fn to_superfunction(
    p: &WNOperator,
    table: &mut NonlocalVarTable,
) -> Result<SuperPoly, NonlocalError> {
    let mut out = SuperPoly::zero();
    for i in 0..p.n {
        for j in 0..p.n {
            for (c, k) in p.local[i][j].terms() {
                out.add_assign(&SuperPoly::p(i, 0).mul(&SuperPoly::p(j, k)).scale(c));
            }
        }
    }
    for t in &p.tails {
        if t.e.is_zero() {
            continue;
        }
        let zp = odd_linear(&t.z);
        let wp = odd_linear(&t.w);
        if zp.is_zero() || wp.is_zero() {
            continue;
        }
        let r = table.register_as(zp, VarKind::Tail)?;
        out.add_assign(&wp.mul(&SuperPoly::nonlocal(r)).scale_rat(&t.e));
    }
    Ok(out)
}

fn unsupported(what: &str) -> NonlocalError {
    NonlocalError::UnsupportedStructure(format!("not an operator encoding: {what}"))
}

/// Reads a bivector back as an operator; the result is skew-adjoint.
pub fn from_superfunction(
    a: &SuperPoly,
    n: usize,
    table: &NonlocalVarTable,
) -> Result<WNOperator, NonlocalError> {
    let mut q = WNOperator::zero(n);
    let mut local = SuperPoly::zero();
    let mut tails: BTreeMap<NonlocalVar, Vec<RationalExpr>> = BTreeMap::new();
    for term in split_tails(a) {
        match term.suffix.as_slice() {
            [] => local.add_assign(&term.prefix),
            [r] => {
                let z = table.density(*r)?;
                if !z.is_local() || z.terms().any(|(w, _)| !is_p(w, 0)) {
                    return Err(unsupported("tail density is not z^j p_j"));
                }
                let w = tails.entry(*r).or_insert_with(|| vec![RationalExpr::zero(); n]);
                let mut stack: Vec<(RationalExpr, JetVar)> = Vec::new();
                for (word, c) in term.prefix.terms() {
                    match word.as_slice() {
                        [Factor::Jet(v)] => stack.push((c.clone(), *v)),
                        _ => return Err(unsupported("tail prefix of degree other than 1")),
                    }
                }
                // c p_{i,a} r = D(c p_{i,a-1} r) - D(c) p_{i,a-1} r - c p_{i,a-1} z
                while let Some((c, v)) = stack.pop() {
                    if v.field >= n {
                        return Err(unsupported("field index out of range"));
                    }
                    if v.order == 0 {
                        w[v.field] = w[v.field].add(&c);
                        continue;
                    }
                    let below = JetVar::new(v.field, v.order - 1);
                    stack.push((c.total_x().neg(), below));
                    let pb = SuperPoly::p(below.field, below.order).scale(&c);
                    local.add_assign(&pb.mul(z).neg());
                }
            }
            _ => return Err(unsupported("more than one nonlocal factor")),
        }
    }
    for (word, c) in local.terms() {
        match word.as_slice() {
            [Factor::Jet(x), Factor::Jet(y)] if x.field < n && y.field < n => {
                let entry = &mut q.local[x.field][y.field];
                *entry = entry.add(&DiffOp::sandwich(c, x.order, y.order));
            }
            _ => return Err(unsupported("local term of degree other than 2")),
        }
    }
    for (r, w) in tails {
        let zp = table.density(r)?;
        let z: Vec<RationalExpr> = (0..n).map(|j| zp.coeff(&[Factor::Jet(JetVar::new(j, 0))])).collect();
        q.tails.push(Tail {
            e: BigRational::one(),
            w,
            z,
        });
    }
    Ok(q.skew_part())
}

fn is_p(w: &Word, order: usize) -> bool {
    matches!(w.as_slice(), [Factor::Jet(v)] if v.order == order)
}

/// Nonzero coefficient of the EL tuple of a bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientEntry {
    pub component: String,
    pub word: Word,
    pub coefficient: RationalExpr,
}

impl CoefficientEntry {
    pub fn render_monomial(&self, names: &Names) -> String {
        if self.word.is_empty() {
            return "1".to_string();
        }
        self.word
            .iter()
            .map(|f| names.factor(f))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn render_coefficient(&self, names: &Names) -> String {
        self.coefficient.render(&|v| names.even(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketOutcome {
    pub three_vector: SuperPoly,
    pub el: ELResult,
    pub trivial: bool,
    /// Set when a non-trivial verdict rests on treating distinct nonlocal
    /// monomials as linearly independent.
    pub independence_assumed: bool,
    pub coefficient_report: Vec<CoefficientEntry>,
    /// Number of terms of each shape in the three-vector.
    pub term_kinds: BTreeMap<TailKind, usize>,
}

/// Bracket of two superfunctions:
/// `(-1)^|a| δa/δu^i δb/δp_i + δa/δp_i δb/δu^i`.
pub fn bracket_superfunctions(
    a: &SuperPoly,
    b: &SuperPoly,
    n: usize,
    table: &mut NonlocalVarTable,
) -> Result<SuperPoly, NonlocalError> {
    let ea = el_nonlocal(a, n, table)?;
    let eb = el_nonlocal(b, n, table)?;
    let odd = a.degree().unwrap_or(0) % 2 == 1;
    let mut t = SuperPoly::zero();
    for i in 0..n {
        let first = ea.du[i].mul(&eb.dp[i]);
        t.add_assign(&if odd { first.neg() } else { first });
        t.add_assign(&ea.dp[i].mul(&eb.du[i]));
    }
    Ok(t)
}

/// Full bracket analysis of the three-vector `t`.
pub fn analyse_three_vector(
    t: SuperPoly,
    n: usize,
    table: &mut NonlocalVarTable,
) -> Result<BracketOutcome, NonlocalError> {
    let mut term_kinds = BTreeMap::new();
    for term in split_tails(&t) {
        *term_kinds.entry(term.kind()).or_insert(0) += term.prefix.len();
    }
    let el = el_nonlocal(&t, n, table)?;
    let trivial = el.is_zero();
    let mut coefficient_report = Vec::new();
    let mut nonlocal_left = false;
    for (label, comp) in el.components() {
        for (w, c) in comp.terms() {
            nonlocal_left |= w.iter().any(|f| matches!(f, Factor::Nonlocal(_)));
            coefficient_report.push(CoefficientEntry {
                component: label.clone(),
                word: w.clone(),
                coefficient: c.clone(),
            });
        }
    }
    Ok(BracketOutcome {
        three_vector: t,
        el,
        trivial,
        independence_assumed: !trivial && nonlocal_left,
        coefficient_report,
        term_kinds,
    })
}

pub fn schouten_bracket(
    p: &WNOperator,
    q: &WNOperator,
    table: &mut NonlocalVarTable,
) -> Result<BracketOutcome, NonlocalError> {
    assert_eq!(p.n, q.n, "operators on different field counts");
    let a = to_superfunction(p, table)?;
    let b = to_superfunction(q, table)?;
    let t = bracket_superfunctions(&a, &b, p.n, table)?;
    analyse_three_vector(t, p.n, table)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianVerdict {
    pub hamiltonian: bool,
    pub skew: SkewVerdict,
    pub bracket: BracketOutcome,
}

pub fn is_hamiltonian(
    p: &WNOperator,
    table: &mut NonlocalVarTable,
) -> Result<HamiltonianVerdict, NonlocalError> {
    let skew = skew_check(p);
    let bracket = schouten_bracket(p, p, table)?;
    Ok(HamiltonianVerdict {
        hamiltonian: skew.skew && bracket.trivial,
        skew,
        bracket,
    })
}
