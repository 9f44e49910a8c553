//! `check`, `bracket` and `geom`.

use std::path::Path;
use std::time::Instant;

use crate::algebra::Names;
use crate::dsl::{self, Item, OperatorFile};
use crate::error::{GeometryError, NonlocalError};
use crate::geometry::{build_operator, check_conditions};
use crate::nonlocal::{NonlocalVarTable, TailKind, VarKind};
use crate::report::{
    BracketReport, CoefficientReport, Command, ComponentReport, ConditionReport, CrossCheck,
    ErrorKind, ErrorReport, NonlocalReport, Report, SkewReport, Verdict,
};
use crate::schouten::{is_hamiltonian, schouten_bracket, skew_check, BracketOutcome, SkewVerdict, WNOperator};

#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    /// Include the full EL tuple in `check` reports.
    pub el: bool,
    /// Record wall-clock time; off by default so reports are byte-stable.
    pub timing: bool,
}

fn load(path: &Path, report: &mut Report) -> Option<OperatorFile> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            *report = report
                .clone()
                .with_error(ErrorKind::Io, format!("cannot read {}: {e}", path.display()));
            return None;
        }
    };
    match dsl::parse(&src) {
        Ok(f) => {
            report.fields = f.fields.clone();
            Some(f)
        }
        Err(e) => {
            let pos = e.pos();
            report.verdict = Verdict::Error;
            report.error = Some(ErrorReport {
                kind: ErrorKind::Parse,
                detail: Some(e.kind().to_string()),
                message: e.to_string(),
                line: Some(pos.line),
                column: Some(pos.col),
            });
            None
        }
    }
}

fn names_of(file: &OperatorFile) -> String {
    let names = file.names();
    if names.is_empty() {
        "none".to_string()
    } else {
        names.join(", ")
    }
}

fn resolve(file: &OperatorFile, name: &str, report: &mut Report) -> Option<WNOperator> {
    match file.item(name) {
        Some(Item::Operator(op)) => Some(op.to_operator(file.n())),
        Some(Item::FirstOrder(fo)) => match fo.to_metric(file.n()).and_then(|m| build_operator(&m)) {
            Ok(op) => Some(op),
            Err(e) => {
                *report = report.clone().with_error(geometry_kind(&e), e.to_string());
                None
            }
        },
        None => {
            *report = report.clone().with_error(
                ErrorKind::Usage,
                format!("no definition named '{name}' (available: {})", names_of(file)),
            );
            None
        }
    }
}

fn geometry_kind(e: &GeometryError) -> ErrorKind {
    match e {
        GeometryError::SingularMetric => ErrorKind::SingularMetric,
        _ => ErrorKind::Geometry,
    }
}

fn nonlocal_error(report: &Report, e: NonlocalError) -> Report {
    report.clone().with_error(ErrorKind::UnsupportedStructure, e.to_string())
}

fn skew_report(v: &SkewVerdict, names: &Names) -> SkewReport {
    SkewReport {
        skew_adjoint: v.skew,
        witness: v.witness.as_ref().map(|w| w.render(names)),
    }
}

fn kind_key(k: TailKind) -> &'static str {
    match k {
        TailKind::Local => "local",
        TailKind::N => "n",
        TailKind::T1 => "t1",
        TailKind::T2 => "t2",
        TailKind::Other => "other",
    }
}

fn bracket_report(b: &BracketOutcome, table: &NonlocalVarTable, fields: &[String], el: bool) -> BracketReport {
    let names = table.names(fields);
    BracketReport {
        three_vector: b.three_vector.render(&names),
        term_kinds: b
            .term_kinds
            .iter()
            .map(|(k, n)| (kind_key(*k).to_string(), *n))
            .collect(),
        nonlocal_variables: table
            .entries()
            .iter()
            .map(|e| NonlocalReport {
                name: e.label.clone(),
                density: e.density.render(&names),
                level: e.level,
                kind: match e.kind {
                    VarKind::Tail => "tail".to_string(),
                    VarKind::Auxiliary => "auxiliary".to_string(),
                },
            })
            .collect(),
        el: el.then(|| {
            b.el.components()
                .into_iter()
                .map(|(component, v)| ComponentReport {
                    component,
                    value: v.render(&names),
                })
                .collect()
        }),
        trivial: b.trivial,
        independence_assumed: b.independence_assumed,
        coefficient_report: b
            .coefficient_report
            .iter()
            .map(|c| CoefficientReport {
                component: c.component.clone(),
                monomial: c.render_monomial(&names),
                coefficient: c.render_coefficient(&names),
            })
            .collect(),
    }
}

const NOT_SKEW: &str = "operator is not skew-adjoint; the bracket only sees its skew part";

fn finish(mut report: Report, start: Option<Instant>) -> Report {
    if let Some(t) = start {
        report.timing_ms = Some(t.elapsed().as_secs_f64() * 1000.0);
    }
    report
}

pub fn cmd_check(path: &Path, name: &str, opts: Options) -> Report {
    let start = opts.timing.then(Instant::now);
    let mut report = Report::new(Command::Check, &path.display().to_string(), &[name]);
    let Some(file) = load(path, &mut report) else {
        return finish(report, start);
    };
    let Some(op) = resolve(&file, name, &mut report) else {
        return finish(report, start);
    };
    let mut table = NonlocalVarTable::new();
    let verdict = match is_hamiltonian(&op, &mut table) {
        Ok(v) => v,
        Err(e) => return finish(nonlocal_error(&report, e), start),
    };
    let names = table.names(&file.fields);
    report.skew = Some(skew_report(&verdict.skew, &names));
    if !verdict.skew.skew {
        report.warnings.push(NOT_SKEW.to_string());
    }
    report.bracket = Some(bracket_report(&verdict.bracket, &table, &file.fields, opts.el));
    report.verdict = if verdict.hamiltonian {
        Verdict::Hamiltonian
    } else {
        Verdict::NotHamiltonian
    };
    finish(report, start)
}

pub fn cmd_bracket(path: &Path, p: &str, q: &str, opts: Options) -> Report {
    let start = opts.timing.then(Instant::now);
    let mut report = Report::new(Command::Bracket, &path.display().to_string(), &[p, q]);
    let Some(file) = load(path, &mut report) else {
        return finish(report, start);
    };
    let Some(a) = resolve(&file, p, &mut report) else {
        return finish(report, start);
    };
    let Some(b) = resolve(&file, q, &mut report) else {
        return finish(report, start);
    };
    for (name, op) in [(p, &a), (q, &b)] {
        if !skew_check(op).skew {
            report.warnings.push(format!("{name}: {NOT_SKEW}"));
        }
    }
    let mut table = NonlocalVarTable::new();
    let outcome = match schouten_bracket(&a, &b, &mut table) {
        Ok(o) => o,
        Err(e) => return finish(nonlocal_error(&report, e), start),
    };
    report.bracket = Some(bracket_report(&outcome, &table, &file.fields, true));
    report.verdict = if outcome.trivial {
        Verdict::Trivial
    } else {
        Verdict::Nontrivial
    };
    finish(report, start)
}

pub fn cmd_geom(path: &Path, name: &str, opts: Options) -> Report {
    let start = opts.timing.then(Instant::now);
    let mut report = Report::new(Command::Geom, &path.display().to_string(), &[name]);
    let Some(file) = load(path, &mut report) else {
        return finish(report, start);
    };
    let fo = match file.item(name) {
        Some(Item::FirstOrder(fo)) => fo,
        Some(Item::Operator(_)) => {
            let r = report.with_error(ErrorKind::Usage, format!("'{name}' is not a firstorder block"));
            return finish(r, start);
        }
        None => {
            let msg = format!("no definition named '{name}' (available: {})", names_of(&file));
            return finish(report.with_error(ErrorKind::Usage, msg), start);
        }
    };
    let metric = match fo.to_metric(file.n()) {
        Ok(m) => m,
        Err(e) => return finish(report.clone().with_error(geometry_kind(&e), e.to_string()), start),
    };
    let verdicts = match check_conditions(&metric) {
        Ok(v) => v,
        Err(e) => return finish(report.clone().with_error(geometry_kind(&e), e.to_string()), start),
    };
    let names = Names {
        fields: file.fields.clone(),
        ..Names::default()
    };
    report.conditions = Some(
        verdicts
            .iter()
            .map(|v| ConditionReport {
                key: v.condition.key().to_string(),
                formula: v.condition.formula().to_string(),
                holds: v.holds,
                witness: v.witness.as_ref().map(|w| w.render(&names)),
            })
            .collect(),
    );
    let conditions_hold = verdicts.iter().all(|v| v.holds);
    let op = match build_operator(&metric) {
        Ok(op) => op,
        Err(e) => return finish(report.clone().with_error(geometry_kind(&e), e.to_string()), start),
    };
    let mut table = NonlocalVarTable::new();
    let h = match is_hamiltonian(&op, &mut table) {
        Ok(h) => h,
        Err(e) => return finish(nonlocal_error(&report, e), start),
    };
    report.skew = Some(skew_report(&h.skew, &table.names(&file.fields)));
    report.bracket = Some(bracket_report(&h.bracket, &table, &file.fields, opts.el));
    let agrees = conditions_hold == h.hamiltonian;
    if !agrees {
        report
            .warnings
            .push("metric conditions and bracket computation disagree".to_string());
    }
    report.cross_check = Some(CrossCheck {
        conditions_hold,
        hamiltonian: h.hamiltonian,
        agrees,
    });
    report.verdict = if conditions_hold && h.hamiltonian {
        Verdict::Hamiltonian
    } else {
        Verdict::NotHamiltonian
    };
    finish(report, start)
}
