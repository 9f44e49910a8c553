//! Formal nonlocal variables `r = D^{-1}(Z)`, explicit integration of
//! densities, and Euler–Lagrange tuples of nonlocal superfunctions.
//!
//! The variation of a nonlocal variable is `δr = D^{-1}(δZ)`, so for a
//! density `F = G·r` (right factor)
//!
//! ```text
//! ∫ G δr = -∫ g δZ,   g = D^{-1}(G)
//! ```
//!
//! and the EL tuple of `F` is the EL tuple with `r` held fixed plus the
//! variation of `-g·Z` taken with `g` frozen. For a degree-2 tail `W·r`
//! this gives `ℓ*_{W,r}(1) + ℓ*_{Z,s}(1)` with `s_x = W`; for a degree-3
//! tail `Y·r` it gives `ℓ*_{Y,r}(1) - ℓ*_{Z,y}(1)` with `y_x = Y`. The sign
//! of the second term is `(-1)^(|A|+1)` for a prefactor of degree `|A|`.
//! Products `Y·r·s` go through the same rule once per nonlocal factor; the
//! antiderivative `D^{-1}(Y s)` is expanded by parts as
//! `y s - D^{-1}(y W)` when `y_x = Y` integrates.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::algebra::{Factor, JetVar, Names, NonlocalVar, SuperPoly, Word};
use crate::error::NonlocalError;
use crate::jetcalc::{self, total_x, ELResult, Kind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// Introduced by an operator tail `w ∂⁻¹ z`.
    Tail,
    /// Antiderivative introduced while taking variational derivatives.
    Auxiliary,
}

#[derive(Clone, Debug)]
pub struct NonlocalEntry {
    pub var: NonlocalVar,
    pub density: SuperPoly,
    pub level: u32,
    pub kind: VarKind,
    pub label: String,
}

/// Append-only registry of nonlocal variables.
#[derive(Clone, Debug, Default)]
pub struct NonlocalVarTable {
    entries: Vec<NonlocalEntry>,
}

impl NonlocalVarTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Shared table with no variables, for purely local work.
    pub fn empty() -> &'static NonlocalVarTable {
        static EMPTY: OnceLock<NonlocalVarTable> = OnceLock::new();
        EMPTY.get_or_init(NonlocalVarTable::new)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NonlocalEntry] {
        &self.entries
    }

    pub fn entry(&self, v: NonlocalVar) -> Result<&NonlocalEntry, NonlocalError> {
        self.entries
            .get(v.id as usize)
            .filter(|e| e.var == v)
            .ok_or(NonlocalError::Unregistered(v.id))
    }

    pub fn density(&self, v: NonlocalVar) -> Result<&SuperPoly, NonlocalError> {
        Ok(&self.entry(v)?.density)
    }

    pub fn level(&self, v: NonlocalVar) -> Result<u32, NonlocalError> {
        Ok(self.entry(v)?.level)
    }

    /// Registers an auxiliary variable for `density`.
    pub fn register(&mut self, density: SuperPoly) -> Result<NonlocalVar, NonlocalError> {
        self.register_as(density, VarKind::Auxiliary)
    }

    /// Registers `r` with `r_x = density`; an identical density returns the
    /// existing variable.
    pub fn register_as(
        &mut self,
        density: SuperPoly,
        kind: VarKind,
    ) -> Result<NonlocalVar, NonlocalError> {
        let degree = match density.degree() {
            Some(0) => return Err(NonlocalError::EvenDensity),
            Some(d) => d,
            None if density.is_zero() => return Err(NonlocalError::EvenDensity),
            None => return Err(NonlocalError::InhomogeneousDensity),
        };
        if let Some(e) = self.entries.iter().find(|e| e.density == density) {
            return Ok(e.var);
        }
        let mut level = 1;
        for v in density.nonlocals() {
            level = level.max(self.level(v)? + 1);
        }
        let var = NonlocalVar {
            id: self.entries.len() as u32,
            degree,
        };
        let prefix = match kind {
            VarKind::Tail => "r",
            VarKind::Auxiliary if degree == 1 => "s",
            VarKind::Auxiliary => "y",
        };
        let k = self
            .entries
            .iter()
            .filter(|e| e.label.starts_with(prefix))
            .count();
        self.entries.push(NonlocalEntry {
            var,
            density,
            level,
            kind,
            label: format!("{prefix}{}", k + 1),
        });
        Ok(var)
    }

    /// Display names for the given field names and every registered
    /// variable.
    pub fn names(&self, fields: &[String]) -> Names {
        Names {
            fields: fields.to_vec(),
            nonlocals: self
                .entries
                .iter()
                .map(|e| (e.var.id, e.label.clone()))
                .collect(),
        }
    }
}

const MAX_INTEGRATION_STEPS: usize = 512;

fn top_order(f: &SuperPoly) -> Option<usize> {
    let e = f.even_vars().into_iter().map(|v| v.order).max();
    let o = f.odd_vars().into_iter().map(|v| v.order).max();
    e.max(o)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Cand {
    Even(JetVar),
    Odd(JetVar),
}

fn top_candidates(f: &SuperPoly, top: usize) -> Vec<Cand> {
    let mut c: Vec<Cand> = f
        .even_vars()
        .into_iter()
        .filter(|v| v.order == top)
        .map(Cand::Even)
        .collect();
    c.extend(
        f.odd_vars()
            .into_iter()
            .filter(|v| v.order == top)
            .map(Cand::Odd),
    );
    c
}

fn measure(f: &SuperPoly) -> (usize, usize) {
    match top_order(f) {
        None => (0, 0),
        Some(t) => (t, top_candidates(f, t).len()),
    }
}

fn free_of_order(a: &SuperPoly, order: usize) -> bool {
    a.even_vars().iter().all(|v| v.order < order) && a.odd_vars().iter().all(|v| v.order < order)
}

/// One reduction step removing the top variable `cand` from `f`.
fn reduction_step(f: &SuperPoly, cand: Cand) -> Option<SuperPoly> {
    match cand {
        Cand::Even(v) => {
            let a = f.partial_even(v);
            if v.order == 0 || !free_of_order(&a, v.order) {
                return None;
            }
            let below = JetVar::new(v.field, v.order - 1);
            let mut h = SuperPoly::zero();
            for (w, c) in a.terms() {
                h.add_assign(&SuperPoly::monomial(c.integrate(below)?, w));
            }
            Some(h)
        }
        Cand::Odd(v) => {
            let a = f.partial_odd(v);
            if v.order == 0 || !free_of_order(&a, v.order) {
                return None;
            }
            let below = JetVar::new(v.field, v.order - 1);
            if a.odd_vars().contains(&below) {
                return None;
            }
            Some(SuperPoly::p(below.field, below.order).mul(&a))
        }
    }
}

/// Greedy leading-order integration of a local density. Returns `(eta,
/// residual)` with `D(eta) + residual = y` exactly; the residual is zero
/// when the greedy reduction reaches the bottom.
pub fn partial_integrate(y: &SuperPoly) -> (SuperPoly, SuperPoly) {
    let table = NonlocalVarTable::empty();
    let mut eta = SuperPoly::zero();
    let mut f = y.clone();
    for _ in 0..MAX_INTEGRATION_STEPS {
        if f.is_zero() {
            break;
        }
        let Some(top) = top_order(&f) else { break };
        let before = measure(&f);
        let mut progressed = false;
        for cand in top_candidates(&f, top) {
            let Some(h) = reduction_step(&f, cand) else {
                continue;
            };
            let dh = total_x(&h, table).expect("local");
            let next = f.sub(&dh);
            if measure(&next) < before {
                f = next;
                eta.add_assign(&h);
                progressed = true;
                break;
            }
        }
        if !progressed {
            break;
        }
    }
    (eta, f)
}

/// Why [`integrate_density`] could not produce an antiderivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrationFailure {
    /// Part that was integrated before the reduction got stuck.
    pub partial: SuperPoly,
    /// `y - D(partial)`, the part with no local antiderivative found.
    pub residual: SuperPoly,
    /// True when the variational test already showed `y` is not exact.
    pub not_exact: bool,
}

/// Local antiderivative `eta` with `D(eta) = y`.
///
/// Exactness is checked first with variational derivatives; the
/// antiderivative itself comes from [`partial_integrate`] and is verified by
/// back-substitution.
pub fn integrate_density(y: &SuperPoly) -> Result<SuperPoly, IntegrationFailure> {
    if !y.is_local() {
        return Err(IntegrationFailure {
            partial: SuperPoly::zero(),
            residual: y.clone(),
            not_exact: false,
        });
    }
    let n = y.max_field().map_or(0, |m| m + 1);
    let exact = (0..n).all(|i| {
        jetcalc::var_deriv(y, i, Kind::Even).is_ok_and(|d| d.is_zero())
            && jetcalc::var_deriv(y, i, Kind::Odd).is_ok_and(|d| d.is_zero())
    });
    // constants are exact only as D(c x), which is outside the algebra
    let constant = y.terms().any(|(w, c)| w.is_empty() && c.as_constant().is_some());
    let (eta, residual) = partial_integrate(y);
    if exact && !constant && residual.is_zero() {
        let back = total_x(&eta, NonlocalVarTable::empty()).expect("local");
        debug_assert_eq!(&back, y);
        return Ok(eta);
    }
    Err(IntegrationFailure {
        partial: eta,
        residual,
        not_exact: !exact,
    })
}

/// A term split as local prefix times a product of nonlocal factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailTerm {
    pub prefix: SuperPoly,
    pub suffix: Vec<NonlocalVar>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Local,
    /// degree 2, one nonlocal factor: `W r`
    N,
    /// degree 3, one nonlocal factor: `Y1 r`
    T1,
    /// degree 3, two nonlocal factors: `Y2 r s`
    T2,
    Other,
}

impl TailTerm {
    pub fn to_superpoly(&self) -> SuperPoly {
        let factors: Vec<Factor> = self.suffix.iter().map(|v| Factor::Nonlocal(*v)).collect();
        self.prefix.sandwich(&[], &factors)
    }

    pub fn kind(&self) -> TailKind {
        let suffix_degree: u32 = self.suffix.iter().map(|v| v.degree).sum();
        let degree = self.prefix.degree().map(|d| d + suffix_degree);
        match (self.suffix.len(), degree) {
            (0, _) => TailKind::Local,
            (1, Some(2)) => TailKind::N,
            (1, Some(3)) => TailKind::T1,
            (2, Some(3)) => TailKind::T2,
            _ => TailKind::Other,
        }
    }
}

/// Groups the terms of `a` by their nonlocal suffix.
pub fn split_tails(a: &SuperPoly) -> Vec<TailTerm> {
    let mut groups: BTreeMap<Vec<NonlocalVar>, SuperPoly> = BTreeMap::new();
    for (w, c) in a.terms() {
        let cut = w
            .iter()
            .position(|f| matches!(f, Factor::Nonlocal(_)))
            .unwrap_or(w.len());
        let suffix: Vec<NonlocalVar> = w[cut..]
            .iter()
            .map(|f| match f {
                Factor::Nonlocal(v) => *v,
                Factor::Jet(_) => unreachable!("jets sort before nonlocals"),
            })
            .collect();
        groups
            .entry(suffix)
            .or_default()
            .add_assign(&SuperPoly::monomial(c.clone(), &w[..cut]));
    }
    groups
        .into_iter()
        .map(|(suffix, prefix)| TailTerm { prefix, suffix })
        .collect()
}

/// Outcome of rewriting an integrand `A·r` whose antiderivative would be a
/// level-2 variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DepthReduction {
    /// `A r = D(boundary) + sum(terms)`, the terms being of lower depth
    /// except for a possible non-integrable remainder `res·r`.
    Reduced {
        boundary: SuperPoly,
        terms: Vec<TailTerm>,
    },
    /// No part of `A` integrates; `var` is a fresh formal level-2 variable
    /// with `var_x = A r`.
    Formal { var: NonlocalVar, term: TailTerm },
}

/// Product rule `A r = D(a r) - a Z` with `a_x = A`, `r_x = Z`.
pub fn reduce_depth(
    term: &TailTerm,
    table: &mut NonlocalVarTable,
) -> Result<DepthReduction, NonlocalError> {
    if term.prefix.is_zero() {
        return Ok(DepthReduction::Reduced {
            boundary: SuperPoly::zero(),
            terms: Vec::new(),
        });
    }
    let [r] = term.suffix.as_slice() else {
        return formal_term(term, table);
    };
    let z = table.density(*r)?.clone();
    if !z.is_local() || !term.prefix.is_local() {
        return formal_term(term, table);
    }
    let (a, res) = partial_integrate(&term.prefix);
    if a.is_zero() {
        return formal_term(term, table);
    }
    let rr = SuperPoly::nonlocal(*r);
    let mut terms = vec![TailTerm {
        prefix: a.mul(&z).neg(),
        suffix: Vec::new(),
    }];
    if !res.is_zero() {
        terms.push(TailTerm {
            prefix: res,
            suffix: vec![*r],
        });
    }
    Ok(DepthReduction::Reduced {
        boundary: a.mul(&rr),
        terms,
    })
}

fn formal_term(
    term: &TailTerm,
    table: &mut NonlocalVarTable,
) -> Result<DepthReduction, NonlocalError> {
    let var = table.register(term.to_superpoly())?;
    Ok(DepthReduction::Formal {
        var,
        term: term.clone(),
    })
}

/// Formal antiderivative of `d`, normalised so that constant multiples
/// share one variable.
fn formal(d: &SuperPoly, table: &mut NonlocalVarTable) -> Result<SuperPoly, NonlocalError> {
    let Some((_, lead)) = d.terms().next() else {
        return Ok(SuperPoly::zero());
    };
    let k = lead.numer().leading_coeff();
    let var = table.register(d.scale_rat(&k.recip()))?;
    Ok(SuperPoly::nonlocal(var).scale_rat(&k))
}

/// `D^{-1}(g)` as an expression in jets and (possibly new) nonlocal
/// variables. Local parts are integrated explicitly where possible; the
/// product rule lowers `A·r` integrands; anything left becomes formal.
pub fn antiderivative(
    g: &SuperPoly,
    table: &mut NonlocalVarTable,
) -> Result<SuperPoly, NonlocalError> {
    let mut out = SuperPoly::zero();
    for term in split_tails(g) {
        if term.suffix.is_empty() {
            let (eta, res) = partial_integrate(&term.prefix);
            out.add_assign(&eta);
            out.add_assign(&formal(&res, table)?);
            continue;
        }
        match reduce_depth(&term, table)? {
            DepthReduction::Reduced { boundary, terms } => {
                out.add_assign(&boundary);
                for t in terms {
                    if t.suffix.is_empty() {
                        out.add_assign(&antiderivative(&t.prefix, table)?);
                    } else {
                        out.add_assign(&formal(&t.to_superpoly(), table)?);
                    }
                }
            }
            DepthReduction::Formal { .. } => {
                out.add_assign(&formal(&term.to_superpoly(), table)?);
            }
        }
    }
    Ok(out)
}

const MAX_EL_DEPTH: usize = 4;

/// Euler–Lagrange tuple of a superfunction that may contain nonlocal
/// variables. `n` is the number of fields.
pub fn el_nonlocal(
    t: &SuperPoly,
    n: usize,
    table: &mut NonlocalVarTable,
) -> Result<ELResult, NonlocalError> {
    for (w, c) in t.terms() {
        let count = w.iter().filter(|f| matches!(f, Factor::Nonlocal(_))).count();
        if count > 2 {
            let term = SuperPoly::monomial(c.clone(), w);
            return Err(NonlocalError::UnsupportedStructure(format!(
                "term {} has {count} nonlocal factors",
                term.render(&table.names(&[]))
            )));
        }
    }
    el_general(t, n, table, 0)
}

fn el_fixed(f: &SuperPoly, n: usize, table: &NonlocalVarTable) -> Result<ELResult, NonlocalError> {
    let mut el = ELResult::zero(n);
    for i in 0..n {
        el.du[i] = jetcalc::variational_fixed(f, i, Kind::Even, table)?;
        el.dp[i] = jetcalc::variational_fixed(f, i, Kind::Odd, table)?;
    }
    Ok(el)
}

fn el_general(
    f: &SuperPoly,
    n: usize,
    table: &mut NonlocalVarTable,
    depth: usize,
) -> Result<ELResult, NonlocalError> {
    let mut el = el_fixed(f, n, table)?;
    for v in f.nonlocals() {
        let coeff = f.right_partial_nonlocal(v);
        if coeff.is_zero() {
            continue;
        }
        let g = antiderivative(&coeff, table)?;
        let density = table.density(v)?.clone();
        el = el.add(&el_frozen(&g, &density, n, table, depth + 1)?);
    }
    Ok(el)
}

/// EL tuple of `-g·d` where only `d` is varied.
fn el_frozen(
    g: &SuperPoly,
    d: &SuperPoly,
    n: usize,
    table: &mut NonlocalVarTable,
    depth: usize,
) -> Result<ELResult, NonlocalError> {
    if depth > MAX_EL_DEPTH {
        return Err(NonlocalError::UnsupportedStructure(
            "nonlocal variables nested too deeply".to_string(),
        ));
    }
    if g.is_zero() {
        return Ok(ELResult::zero(n));
    }
    let minus_g = g.neg();
    // moving the odd variation past g costs (-1)^|g|
    let minus_g_odd = minus_g.graded_sign(1);
    let mut el = ELResult::zero(n);
    for i in 0..n {
        let Some(top) = d.max_order(i) else { continue };
        for (kind, pre) in [(Kind::Even, &minus_g), (Kind::Odd, &minus_g_odd)] {
            let partial = |k: usize| {
                let v = JetVar::new(i, k);
                let dd = match kind {
                    Kind::Even => d.partial_even(v),
                    Kind::Odd => d.partial_odd(v),
                };
                pre.mul(&dd)
            };
            let mut acc = partial(top);
            for k in (0..top).rev() {
                acc = partial(k).sub(&total_x(&acc, table)?);
            }
            match kind {
                Kind::Even => el.du[i] = acc,
                Kind::Odd => el.dp[i] = acc,
            }
        }
    }
    for w in d.nonlocals() {
        let coeff = minus_g.mul(&d.right_partial_nonlocal(w));
        if coeff.is_zero() {
            continue;
        }
        let gw = antiderivative(&coeff, table)?;
        let dw = table.density(w)?.clone();
        el = el.add(&el_frozen(&gw, &dw, n, table, depth + 1)?);
    }
    Ok(el)
}

/// Replaces every nonlocal variable whose density (after the same
/// replacement) integrates locally. Used to compare against purely local
/// computations.
pub fn localize(a: &SuperPoly, table: &NonlocalVarTable) -> Option<SuperPoly> {
    let mut out = a.clone();
    for _ in 0..16 {
        let vars = out.nonlocals();
        let Some(v) = vars.into_iter().next() else {
            return Some(out);
        };
        let density = localize(table.density(v).ok()?, table)?;
        let value = integrate_density(&density).ok()?;
        out = out.substitute(v, &value);
    }
    None
}

/// Names of all nonlocal factors appearing in `a`.
pub fn nonlocal_labels(a: &SuperPoly, table: &NonlocalVarTable) -> Vec<String> {
    a.nonlocals()
        .into_iter()
        .filter_map(|v| table.entry(v).ok().map(|e| e.label.clone()))
        .collect()
}

#[allow(dead_code)]
fn word_nonlocals(w: &Word) -> usize {
    w.iter().filter(|f| matches!(f, Factor::Nonlocal(_))).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;
    use crate::jetcalc::euler_lagrange;

    fn u(k: usize) -> SuperPoly {
        SuperPoly::u(0, k)
    }
    fn p(k: usize) -> SuperPoly {
        SuperPoly::p(0, k)
    }

    #[test]
    fn registration_deduplicates() {
        let mut t = NonlocalVarTable::new();
        let a = t.register(u(1).mul(&p(0))).unwrap();
        let b = t.register(u(1).mul(&p(0))).unwrap();
        assert_eq!(a, b);
        let c = t.register(u(0).mul(&p(0))).unwrap();
        assert_ne!(a, c);
        assert_eq!(t.level(a).unwrap(), 1);
        let y = t.register(p(1).mul(&SuperPoly::nonlocal(a))).unwrap();
        assert_eq!(t.level(y).unwrap(), 2);
        assert_eq!(y.degree, 2);
        assert_eq!(t.register(u(0)), Err(NonlocalError::EvenDensity));
    }

    #[test]
    fn integrates_mkdv_auxiliary() {
        let y = p(1).mul(&p(3)).neg();
        assert_eq!(integrate_density(&y).unwrap(), p(1).mul(&p(2)).neg());
        assert_eq!(integrate_density(&u(1)).unwrap(), u(0));
    }

    #[test]
    fn p_px_is_not_exact() {
        let f = integrate_density(&p(0).mul(&p(1))).unwrap_err();
        assert!(f.not_exact);
        // δ/δp (p p_x) = 2 p_x
        assert_eq!(
            jetcalc::var_deriv(&p(0).mul(&p(1)), 0, Kind::Odd).unwrap(),
            p(1).scale_rat(&rat(2, 1))
        );
    }

    #[test]
    fn ux_p_does_not_cycle() {
        let (eta, res) = partial_integrate(&u(1).mul(&p(0)));
        assert!(eta.is_zero());
        assert_eq!(res, u(1).mul(&p(0)));
    }

    #[test]
    fn rational_coefficient_integration() {
        // D(u_x / u) with u in the denominator is not reachable, but
        // D(p_x / (1 + u^2)) is: top variable p_2x carries a polynomial in u.
        let c = crate::RationalExpr::one()
            .div(&crate::RationalExpr::var(JetVar::new(0, 0)).pow(2).add(&crate::RationalExpr::one()))
            .unwrap();
        let eta = p(1).scale(&c);
        let y = total_x(&eta, NonlocalVarTable::empty()).unwrap();
        assert_eq!(integrate_density(&y).unwrap(), eta);
    }

    #[test]
    fn kn_tail_derivatives() {
        let mut t = NonlocalVarTable::new();
        let r = t.register_as(u(1).mul(&p(0)), VarKind::Tail).unwrap();
        let rr = SuperPoly::nonlocal(r);
        let n = u(1).mul(&p(0)).mul(&rr);
        let el = el_nonlocal(&n, 1, &mut t).unwrap();
        assert_eq!(el.du[0], p(1).mul(&rr).scale_rat(&rat(-2, 1)));
        assert_eq!(el.dp[0], u(1).mul(&rr).scale_rat(&rat(2, 1)));
        // s deduplicates to r
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn t_n_components() {
        let mut t = NonlocalVarTable::new();
        let r = t.register_as(u(1).mul(&p(0)), VarKind::Tail).unwrap();
        let rr = SuperPoly::nonlocal(r);
        let tn = p(1).mul(&p(3)).mul(&rr).neg();
        let el = el_nonlocal(&tn, 1, &mut t).unwrap();
        assert_eq!(el.du[0], p(0).mul(&p(1)).mul(&p(3)).neg());
        let expected = u(2)
            .scale_rat(&rat(3, 1))
            .mul(&p(0))
            .mul(&p(2))
            .add(&u(1).scale_rat(&rat(2, 1)).mul(&p(0)).mul(&p(3)))
            .add(&u(3).mul(&p(0)).mul(&p(1)))
            .add(&u(1).scale_rat(&rat(3, 1)).mul(&p(1)).mul(&p(2)));
        assert_eq!(el.dp[0], expected);
        // y1 = -p_x p_2x was integrated, so no auxiliary variable remains
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn mkdv_cancellation_witness() {
        let mut t = NonlocalVarTable::new();
        let r = t.register_as(u(1).mul(&p(0)), VarKind::Tail).unwrap();
        let tl = u(0).mul(&p(0)).mul(&p(1)).mul(&p(3));
        let tn = p(1).mul(&p(3)).mul(&SuperPoly::nonlocal(r)).neg();
        let total = el_nonlocal(&tl.add(&tn), 1, &mut t).unwrap();
        assert!(total.is_zero());
        let sum = euler_lagrange(&tl, 1).unwrap().add(&el_nonlocal(&tn, 1, &mut t).unwrap());
        assert!(sum.is_zero());
    }

    #[test]
    fn depth_reduction_product_rule() {
        let mut t = NonlocalVarTable::new();
        let z = u(0).mul(&p(1));
        let r = t.register_as(z.clone(), VarKind::Tail).unwrap();
        let rr = SuperPoly::nonlocal(r);
        // Y2 = D(y2) with y2 = u p_x
        let y2 = u(0).mul(&p(1));
        let big_y2 = total_x(&y2, &t).unwrap();
        let term = TailTerm {
            prefix: big_y2.clone(),
            suffix: vec![r],
        };
        match reduce_depth(&term, &mut t).unwrap() {
            DepthReduction::Reduced { boundary, terms } => {
                assert_eq!(boundary, y2.mul(&rr));
                assert_eq!(terms, vec![TailTerm { prefix: y2.mul(&z).neg(), suffix: vec![] }]);
                // D(y2 r) = Y2 r + y2 Z
                let lhs = total_x(&boundary, &t).unwrap();
                assert_eq!(lhs, big_y2.mul(&rr).add(&y2.mul(&z)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let empty = TailTerm { prefix: SuperPoly::zero(), suffix: vec![r] };
        assert_eq!(
            reduce_depth(&empty, &mut t).unwrap(),
            DepthReduction::Reduced { boundary: SuperPoly::zero(), terms: vec![] }
        );
        let before = t.len();
        let stuck = TailTerm { prefix: u(1).mul(&p(0)), suffix: vec![r] };
        match reduce_depth(&stuck, &mut t).unwrap() {
            DepthReduction::Formal { var, .. } => {
                assert_eq!(t.level(var).unwrap(), 2);
                assert_eq!(t.len(), before + 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn three_nonlocal_factors_rejected() {
        let mut t = NonlocalVarTable::new();
        let a = SuperPoly::nonlocal(t.register_as(u(1).mul(&p(0)), VarKind::Tail).unwrap());
        let b = SuperPoly::nonlocal(t.register_as(u(0).mul(&p(0)), VarKind::Tail).unwrap());
        let c = SuperPoly::nonlocal(t.register_as(u(2).mul(&p(0)), VarKind::Tail).unwrap());
        let bad = a.mul(&b).mul(&c);
        assert!(matches!(
            el_nonlocal(&bad, 1, &mut t),
            Err(NonlocalError::UnsupportedStructure(_))
        ));
    }
}
