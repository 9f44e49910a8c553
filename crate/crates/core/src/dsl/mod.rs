//! Operator description files.
//!
//! ```text
//! fields u;
//! operator KN { nonlocal[1,1]: 1*[u_x|u_x]; }
//! operator mkdv {
//!     local[1,1]: D^3 + (2/3)*u^2*D + (2/3)*u*u_x;
//!     nonlocal[1,1]: -(2/3)*[u_x|u_x];
//! }
//! firstorder flat { g[1,1]: 1; w[1,1]: u; }
//! ```
//!
//! `D` is the total derivative and composes as an operator, so `D*u`
//! means `u*D + u_x`. Derivatives are spelled `u_x`, `u_2x`, `u_xx`.

mod lexer;
mod print;

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::algebra::{JetVar, RationalExpr};
use crate::error::GeometryError;
use crate::geometry::MetricData;
use crate::schouten::{DiffOp, Tail, WNOperator};

pub use lexer::Pos;
use lexer::{lex, Tok, Token};
pub use print::print_file;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {}, column {}: {msg}", .pos.line, .pos.col)]
    Syntax { pos: Pos, msg: String },
    #[error("line {}, column {}: undeclared field '{name}'", .pos.line, .pos.col)]
    UndeclaredField { pos: Pos, name: String },
    #[error("line {}, column {}: index {index} out of range 1..{n}", .pos.line, .pos.col)]
    IndexOutOfRange { pos: Pos, index: String, n: usize },
    #[error("line {}, column {}: '{name}' is already defined", .pos.line, .pos.col)]
    Duplicate { pos: Pos, name: String },
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::UndeclaredField { .. } => "undeclared_field",
            ParseError::IndexOutOfRange { .. } => "index_out_of_range",
            ParseError::Duplicate { .. } => "duplicate_name",
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UndeclaredField { pos, .. }
            | ParseError::IndexOutOfRange { pos, .. }
            | ParseError::Duplicate { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpEntry {
    /// `local[i,j]: op;`
    Local { i: usize, j: usize, op: DiffOp },
    /// `nonlocal[i,j]: e*[w|z];`, a tail with one nonzero component each.
    Nonlocal {
        i: usize,
        j: usize,
        e: BigRational,
        w: RationalExpr,
        z: RationalExpr,
    },
    /// `nonlocal: e*[w1, w2|z1, z2];`
    NonlocalVector {
        e: BigRational,
        w: Vec<RationalExpr>,
        z: Vec<RationalExpr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorDef {
    pub name: String,
    pub entries: Vec<OpEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstOrderDef {
    pub name: String,
    pub g: Vec<(usize, usize, RationalExpr)>,
    pub w: Vec<(usize, usize, RationalExpr)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Operator(OperatorDef),
    FirstOrder(FirstOrderDef),
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Operator(o) => &o.name,
            Item::FirstOrder(f) => &f.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OperatorFile {
    pub fields: Vec<String>,
    pub items: Vec<Item>,
}

impl OperatorFile {
    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn item(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|it| it.name() == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.items.iter().map(Item::name).collect()
    }
}

impl OperatorDef {
    pub fn to_operator(&self, n: usize) -> WNOperator {
        let mut op = WNOperator::zero(n);
        for e in &self.entries {
            match e {
                OpEntry::Local { i, j, op: d } => op.local[*i][*j] = op.local[*i][*j].add(d),
                OpEntry::Nonlocal { i, j, e, w, z } => {
                    let mut wv = vec![RationalExpr::zero(); n];
                    let mut zv = vec![RationalExpr::zero(); n];
                    wv[*i] = w.clone();
                    zv[*j] = z.clone();
                    op.tails.push(Tail {
                        e: e.clone(),
                        w: wv,
                        z: zv,
                    });
                }
                OpEntry::NonlocalVector { e, w, z } => op.tails.push(Tail {
                    e: e.clone(),
                    w: w.clone(),
                    z: z.clone(),
                }),
            }
        }
        op
    }
}

impl FirstOrderDef {
    pub fn to_metric(&self, n: usize) -> Result<MetricData, GeometryError> {
        let fill = |entries: &[(usize, usize, RationalExpr)]| {
            let mut m = vec![vec![RationalExpr::zero(); n]; n];
            for (i, j, c) in entries {
                m[*i][*j] = m[*i][*j].add(c);
            }
            m
        };
        MetricData::new(fill(&self.g), fill(&self.w))
    }
}

pub fn parse(src: &str) -> Result<OperatorFile, ParseError> {
    let toks = lex(src)?;
    Parser {
        toks,
        at: 0,
        file: OperatorFile::default(),
        declared: false,
    }
    .file()
}

/// Field names that would clash with printed odd or nonlocal variables.
fn reserved(name: &str) -> bool {
    let digits_after = |prefix: &str| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
    };
    matches!(name, "D" | "p")
        || ["p", "r", "s", "y"].iter().any(|p| digits_after(p))
        || ["fields", "operator", "firstorder", "local", "nonlocal"].contains(&name)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    file: OperatorFile,
    declared: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(i) => format!("'{i}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::Eof => "end of file".to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<Pos, ParseError> {
        let pos = self.pos();
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(pos)
        } else {
            Err(ParseError::syntax(
                pos,
                format!("expected '{c}', found {}", Self::describe(self.peek())),
            ))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            t => Err(ParseError::syntax(
                pos,
                format!("expected {what}, found {}", Self::describe(&t)),
            )),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        let (s, pos) = self.ident(&format!("'{kw}'"))?;
        if s == kw {
            Ok(pos)
        } else {
            Err(ParseError::syntax(pos, format!("expected '{kw}', found '{s}'")))
        }
    }

    fn file(mut self) -> Result<OperatorFile, ParseError> {
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(s) if s == "fields" => self.fields()?,
                Tok::Ident(s) if s == "operator" || s == "firstorder" => {
                    if !self.declared {
                        return Err(ParseError::syntax(
                            pos,
                            format!("'{s}' before the fields declaration"),
                        ));
                    }
                    let item = if s == "operator" {
                        self.operator()?
                    } else {
                        self.firstorder()?
                    };
                    self.file.items.push(item);
                }
                t => {
                    return Err(ParseError::syntax(
                        pos,
                        format!(
                            "expected 'fields', 'operator' or 'firstorder', found {}",
                            Self::describe(&t)
                        ),
                    ))
                }
            }
        }
        Ok(self.file)
    }

    fn fields(&mut self) -> Result<(), ParseError> {
        let pos = self.keyword("fields")?;
        if self.declared {
            return Err(ParseError::syntax(pos, "fields declared twice"));
        }
        let mut seen = BTreeSet::new();
        loop {
            let (name, npos) = self.ident("a field name")?;
            if name.contains('_') || reserved(&name) {
                return Err(ParseError::syntax(
                    npos,
                    format!("'{name}' cannot be used as a field name"),
                ));
            }
            if !seen.insert(name.clone()) {
                return Err(ParseError::Duplicate { pos: npos, name });
            }
            self.file.fields.push(name);
            if !self.eat(',') {
                break;
            }
        }
        self.expect(';')?;
        self.declared = true;
        Ok(())
    }

    fn item_name(&mut self) -> Result<String, ParseError> {
        let (name, pos) = self.ident("a name")?;
        if self.file.item(&name).is_some() {
            return Err(ParseError::Duplicate { pos, name });
        }
        Ok(name)
    }

    fn operator(&mut self) -> Result<Item, ParseError> {
        self.keyword("operator")?;
        let name = self.item_name()?;
        self.expect('{')?;
        let mut entries = Vec::new();
        while !self.eat('}') {
            let (kw, pos) = self.ident("'local', 'nonlocal' or '}'")?;
            match kw.as_str() {
                "local" => {
                    let (i, j) = self.indices()?;
                    self.expect(':')?;
                    let op = self.diffexpr(true)?;
                    self.expect(';')?;
                    entries.push(OpEntry::Local { i, j, op });
                }
                "nonlocal" => {
                    let idx = if *self.peek() == Tok::Sym('[') {
                        Some(self.indices()?)
                    } else {
                        None
                    };
                    self.expect(':')?;
                    entries.push(self.tail(idx)?);
                    self.expect(';')?;
                }
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        format!("expected 'local' or 'nonlocal', found '{other}'"),
                    ))
                }
            }
        }
        Ok(Item::Operator(OperatorDef { name, entries }))
    }

    fn firstorder(&mut self) -> Result<Item, ParseError> {
        self.keyword("firstorder")?;
        let name = self.item_name()?;
        self.expect('{')?;
        let (mut g, mut w) = (Vec::new(), Vec::new());
        while !self.eat('}') {
            let (kw, pos) = self.ident("'g', 'w' or '}'")?;
            let target = match kw.as_str() {
                "g" => &mut g,
                "w" => &mut w,
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        format!("expected 'g' or 'w', found '{other}'"),
                    ))
                }
            };
            let (i, j) = self.indices()?;
            self.expect(':')?;
            let c = self.scalar_expr()?;
            self.expect(';')?;
            target.push((i, j, c));
        }
        if g.is_empty() {
            return Err(ParseError::syntax(self.toks[self.at - 1].pos, "firstorder block without g entries"));
        }
        Ok(Item::FirstOrder(FirstOrderDef { name, g, w }))
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                let n = self.file.n();
                match k.to_usize() {
                    Some(v) if (1..=n).contains(&v) => Ok(v - 1),
                    _ => Err(ParseError::IndexOutOfRange {
                        pos,
                        index: k.to_string(),
                        n,
                    }),
                }
            }
            t => Err(ParseError::syntax(
                pos,
                format!("expected an index, found {}", Self::describe(&t)),
            )),
        }
    }

    fn indices(&mut self) -> Result<(usize, usize), ParseError> {
        self.expect('[')?;
        let i = self.index()?;
        self.expect(',')?;
        let j = self.index()?;
        self.expect(']')?;
        Ok((i, j))
    }

    fn tail(&mut self, idx: Option<(usize, usize)>) -> Result<OpEntry, ParseError> {
        let pos = self.pos();
        let e = if *self.peek() == Tok::Sym('[') {
            BigRational::one()
        } else if *self.peek() == Tok::Sym('-') && *self.peek2() == Tok::Sym('[') {
            self.bump();
            -BigRational::one()
        } else {
            let c = self.term(false, true)?;
            self.expect('*')?;
            scalar_of(&c)
                .and_then(|c| c.as_constant())
                .ok_or_else(|| ParseError::syntax(pos, "tail coefficient must be a rational constant"))?
        };
        self.expect('[')?;
        let w = self.expr_list()?;
        self.expect('|')?;
        let z = self.expr_list()?;
        self.expect(']')?;
        let n = self.file.n();
        match idx {
            Some((i, j)) => {
                if w.len() != 1 || z.len() != 1 {
                    return Err(ParseError::syntax(
                        pos,
                        "an indexed tail takes one expression on each side of '|'",
                    ));
                }
                Ok(OpEntry::Nonlocal {
                    i,
                    j,
                    e,
                    w: w.into_iter().next().expect("one"),
                    z: z.into_iter().next().expect("one"),
                })
            }
            None => {
                if w.len() != n || z.len() != n {
                    return Err(ParseError::syntax(
                        pos,
                        format!("a vector tail takes {n} expressions on each side of '|'"),
                    ));
                }
                Ok(OpEntry::NonlocalVector { e, w, z })
            }
        }
    }

    fn expr_list(&mut self) -> Result<Vec<RationalExpr>, ParseError> {
        let mut out = vec![self.scalar_expr()?];
        while self.eat(',') {
            out.push(self.scalar_expr()?);
        }
        Ok(out)
    }

    fn scalar_expr(&mut self) -> Result<RationalExpr, ParseError> {
        let d = self.diffexpr(false)?;
        Ok(scalar_of(&d).expect("D rejected while parsing"))
    }

    fn diffexpr(&mut self, allow_d: bool) -> Result<DiffOp, ParseError> {
        let mut acc = if *self.peek() == Tok::Sym('-') || *self.peek() == Tok::Sym('+') {
            DiffOp::zero()
        } else {
            self.term(allow_d, false)?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term(allow_d, false)?);
            } else if self.eat('-') {
                acc = acc.add(&self.term(allow_d, false)?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    /// Product chain; with `stop_at_bracket` a `*` followed by `[` ends it.
    fn term(&mut self, allow_d: bool, stop_at_bracket: bool) -> Result<DiffOp, ParseError> {
        let mut acc = self.unary(allow_d)?;
        loop {
            let pos = self.pos();
            if *self.peek() == Tok::Sym('*') {
                if stop_at_bracket && *self.peek2() == Tok::Sym('[') {
                    return Ok(acc);
                }
                self.bump();
                let rhs = self.power(allow_d)?;
                acc = acc.compose(&rhs);
            } else if self.eat('/') {
                let rhs = self.power(allow_d)?;
                let c = scalar_of(&rhs)
                    .ok_or_else(|| ParseError::syntax(pos, "division by an operator"))?;
                let inv = c
                    .recip()
                    .ok_or_else(|| ParseError::syntax(pos, "division by zero"))?;
                acc = acc.left_mul(&inv);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, allow_d: bool) -> Result<DiffOp, ParseError> {
        if self.eat('-') {
            return Ok(self.unary(allow_d)?.neg());
        }
        if self.eat('+') {
            return self.unary(allow_d);
        }
        self.power(allow_d)
    }

    fn power(&mut self, allow_d: bool) -> Result<DiffOp, ParseError> {
        let base = self.atom(allow_d)?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let neg = self.eat('-');
        let k = match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                k
            }
            t => {
                return Err(ParseError::syntax(
                    pos,
                    format!("expected an integer exponent, found {}", Self::describe(&t)),
                ))
            }
        };
        let k = k
            .to_u32()
            .filter(|k| *k <= 64)
            .ok_or_else(|| ParseError::syntax(pos, "exponent too large"))?;
        let mut out = DiffOp::term(RationalExpr::one(), 0);
        for _ in 0..k {
            out = out.compose(&base);
        }
        if neg {
            let c = scalar_of(&out)
                .ok_or_else(|| ParseError::syntax(pos, "negative power of an operator"))?;
            let inv = c
                .recip()
                .ok_or_else(|| ParseError::syntax(pos, "division by zero"))?;
            out = DiffOp::term(inv, 0);
        }
        Ok(out)
    }

    fn atom(&mut self, allow_d: bool) -> Result<DiffOp, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                let c = RationalExpr::from(BigRational::from_integer(k));
                Ok(DiffOp::term(c, 0))
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.diffexpr(allow_d)?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "D" => {
                if !allow_d {
                    return Err(ParseError::syntax(pos, "'D' is only allowed in local entries"));
                }
                self.bump();
                Ok(DiffOp::term(RationalExpr::one(), 1))
            }
            Tok::Ident(s) => {
                self.bump();
                let v = self.jet_var(&s, pos)?;
                Ok(DiffOp::term(RationalExpr::var(v), 0))
            }
            t => Err(ParseError::syntax(
                pos,
                format!("expected an expression, found {}", Self::describe(&t)),
            )),
        }
    }

    fn jet_var(&self, s: &str, pos: Pos) -> Result<JetVar, ParseError> {
        let (base, suffix) = match s.split_once('_') {
            Some((b, suf)) => (b, Some(suf)),
            None => (s, None),
        };
        let field = self
            .file
            .fields
            .iter()
            .position(|f| f == base)
            .ok_or_else(|| ParseError::UndeclaredField {
                pos,
                name: base.to_string(),
            })?;
        let order = match suffix {
            None => 0,
            Some(suf) if !suf.is_empty() && suf.chars().all(|c| c == 'x') => suf.len(),
            Some(suf) => suf
                .strip_suffix('x')
                .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|k| *k <= 64)
                .ok_or_else(|| {
                    ParseError::syntax(pos, format!("bad derivative suffix in '{s}'; use _x, _2x, ..."))
                })?,
        };
        Ok(JetVar::new(field, order))
    }
}

fn scalar_of(d: &DiffOp) -> Option<RationalExpr> {
    match d.order() {
        None => Some(RationalExpr::zero()),
        Some(0) => Some(d.coeff(0)),
        Some(_) => None,
    }
}

/// `2`, `-1`, `(2/3)`, `-(2/3)`.
pub fn format_constant(e: &BigRational) -> String {
    let a = e.abs();
    let body = if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("({}/{})", a.numer(), a.denom())
    };
    if e.is_negative() {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::rat;

    const KN: &str = "fields u; operator KN { nonlocal[1,1]: 1*[u_x|u_x]; }";

    #[test]
    fn parses_kn() {
        let f = parse(KN).unwrap();
        let Some(Item::Operator(op)) = f.item("KN") else { panic!() };
        let w = op.to_operator(1);
        assert!(w.local[0][0].is_zero());
        assert_eq!(w.tails.len(), 1);
        assert_eq!(w.tails[0].w[0], RationalExpr::var(JetVar::new(0, 1)));
    }

    #[test]
    fn parses_mkdv() {
        let src = "fields u;\noperator mkdv2 { local[1,1]: D^3 + (2/3)*u^2*D + (2/3)*u*u_x; nonlocal[1,1]: -(2/3)*[u_x|u_x]; }";
        let f = parse(src).unwrap();
        let Some(Item::Operator(op)) = f.item("mkdv2") else { panic!() };
        let w = op.to_operator(1);
        assert_eq!(w.local[0][0].order(), Some(3));
        assert_eq!(w.tails[0].e, rat(-2, 3));
    }

    #[test]
    fn d_composes() {
        let f = parse("fields u; operator A { local[1,1]: D*u - u*D; }").unwrap();
        let Some(Item::Operator(op)) = f.item("A") else { panic!() };
        assert_eq!(
            op.to_operator(1).local[0][0],
            DiffOp::term(RationalExpr::var(JetVar::new(0, 1)), 0)
        );
    }

    #[test]
    fn diagnostics() {
        let e = parse("fields u;\noperator A { local[1,2]: D; }").unwrap_err();
        assert!(matches!(e, ParseError::IndexOutOfRange { .. }));
        assert_eq!(e.pos(), Pos { line: 2, col: 22 });
        let e = parse("fields u; operator A { local[1,1]: v*D; }").unwrap_err();
        assert!(matches!(e, ParseError::UndeclaredField { .. }));
        let e = parse("fields u; operator A { local[1,1]: 0.5*D; }").unwrap_err();
        assert_eq!(e.kind(), "syntax");
        let e = parse("fields u; operator A { } operator A { }").unwrap_err();
        assert_eq!(e.kind(), "duplicate_name");
        let e = parse("fields u; firstorder G { g[1,1]: D; }").unwrap_err();
        assert_eq!(e.kind(), "syntax");
        assert!(parse("operator A { }").is_err());
    }

    #[test]
    fn multi_field_spelling() {
        let f = parse("fields u1, u2; firstorder G { g[1,1]: 1 + u1^2; g[2,2]: 1/(1+u2); w[1,2]: u1; }").unwrap();
        let Some(Item::FirstOrder(g)) = f.item("G") else { panic!() };
        let m = g.to_metric(2).unwrap();
        assert!(m.g_upper[0][1].is_zero());
        assert_eq!(m.w[0][1], RationalExpr::var(JetVar::new(0, 0)));
        assert_eq!(
            parse("fields u; operator A { local[1,1]: u_xx*D; }").unwrap(),
            parse("fields u; operator A { local[1,1]: u_2x*D; }").unwrap()
        );
    }

    #[test]
    fn print_round_trip() {
        let src = "fields u1, u2;\noperator P { local[1,1]: D^3 - (u1 + 1)*D + u2_x/(1 + u1^2); local[2,1]: -3*D; nonlocal[1,2]: -(2/3)*[u1_x|u2]; nonlocal: 2*[u1_x, 0|u1_x, -u2_x]; }\nfirstorder F { g[1,1]: 1; g[2,2]: u1; w[2,1]: -u2/3; }\n";
        let f = parse(src).unwrap();
        let printed = print_file(&f);
        assert_eq!(parse(&printed).unwrap(), f, "{printed}");
    }
}
