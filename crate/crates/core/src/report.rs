//! Command reports. The JSON form carries every field; the text form is
//! rendered from the same structure.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

pub const SCHEMA: &str = "wno-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Bracket,
    Geom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hamiltonian,
    NotHamiltonian,
    Trivial,
    Nontrivial,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Io,
    Usage,
    Parse,
    UnsupportedStructure,
    SingularMetric,
    Geometry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub kind: ErrorKind,
    /// Finer classification, e.g. `index_out_of_range` for parse errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkewReport {
    pub skew_adjoint: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub component: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientReport {
    pub component: String,
    pub monomial: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonlocalReport {
    pub name: String,
    pub density: String,
    pub level: u32,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketReport {
    pub three_vector: String,
    pub term_kinds: BTreeMap<String, usize>,
    pub nonlocal_variables: Vec<NonlocalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub el: Option<Vec<ComponentReport>>,
    pub trivial: bool,
    pub independence_assumed: bool,
    pub coefficient_report: Vec<CoefficientReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub key: String,
    pub formula: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub conditions_hold: bool,
    pub hamiltonian: bool,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: String,
    pub command: Command,
    pub file: String,
    pub target: Vec<String>,
    pub fields: Vec<String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skew: Option<SkewReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<ConditionReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: Command, file: &str, target: &[&str]) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            command,
            file: file.to_string(),
            target: target.iter().map(|s| s.to_string()).collect(),
            fields: Vec::new(),
            verdict: Verdict::Error,
            skew: None,
            bracket: None,
            conditions: None,
            cross_check: None,
            warnings: Vec::new(),
            error: None,
            timing_ms: None,
        }
    }

    pub fn with_error(mut self, kind: ErrorKind, message: impl Into<String>) -> Self {
        self.verdict = Verdict::Error;
        self.error = Some(ErrorReport {
            kind,
            detail: None,
            message: message.into(),
            line: None,
            column: None,
        });
        self
    }

    /// 0 Hamiltonian or trivial, 1 not, 2 usage or parse error,
    /// 3 unsupported structure or singular metric.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Hamiltonian | Verdict::Trivial => 0,
            Verdict::NotHamiltonian | Verdict::Nontrivial => 1,
            Verdict::Error => match self.error.as_ref().map(|e| e.kind) {
                Some(ErrorKind::UnsupportedStructure | ErrorKind::SingularMetric | ErrorKind::Geometry) => 3,
                _ => 2,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let cmd = match self.command {
            Command::Check => "check",
            Command::Bracket => "bracket",
            Command::Geom => "geom",
        };
        let _ = writeln!(out, "{cmd} {} in {}", self.target.join(" "), self.file);
        if !self.fields.is_empty() {
            let _ = writeln!(out, "fields: {}", self.fields.join(", "));
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(e) = &self.error {
            let kind = serde_json::to_value(e.kind).expect("enum");
            let _ = writeln!(out, "error ({}): {}", kind.as_str().unwrap_or("error"), e.message);
            return out;
        }
        if let Some(conds) = &self.conditions {
            out.push_str("conditions:\n");
            for c in conds {
                let mark = if c.holds { "pass" } else { "FAIL" };
                let _ = writeln!(out, "  [{mark}] {:<16} {}", c.key, c.formula);
                if let Some(w) = &c.witness {
                    let _ = writeln!(out, "         {w}");
                }
            }
        }
        if let Some(s) = &self.skew {
            let _ = writeln!(out, "skew-adjoint: {}", yes_no(s.skew_adjoint));
            if let Some(w) = &s.witness {
                let _ = writeln!(out, "  P + P* nonzero at {w}");
            }
        }
        if let Some(b) = &self.bracket {
            if !b.nonlocal_variables.is_empty() {
                out.push_str("nonlocal variables:\n");
                for v in &b.nonlocal_variables {
                    let _ = writeln!(
                        out,
                        "  {}_x = {}  (level {}, {})",
                        v.name, v.density, v.level, v.kind
                    );
                }
            }
            let _ = writeln!(out, "three-vector: {}", b.three_vector);
            let kinds: Vec<String> = b.term_kinds.iter().map(|(k, n)| format!("{k} {n}")).collect();
            if !kinds.is_empty() {
                let _ = writeln!(out, "three-vector terms: {}", kinds.join(", "));
            }
            if let Some(el) = &b.el {
                out.push_str("EL tuple:\n");
                for c in el {
                    let _ = writeln!(out, "  {} = {}", c.component, c.value);
                }
            }
            if b.coefficient_report.is_empty() {
                out.push_str("nonzero EL coefficients: none\n");
            } else {
                out.push_str("nonzero EL coefficients:\n");
                for c in &b.coefficient_report {
                    let _ = writeln!(out, "  {}: {}  coefficient {}", c.component, c.monomial, c.coefficient);
                }
            }
            let _ = writeln!(
                out,
                "independence assumption: {}",
                if b.independence_assumed { "used" } else { "not used" }
            );
        }
        if let Some(x) = &self.cross_check {
            let _ = writeln!(
                out,
                "cross-check: conditions {}, bracket {}, agreement {}",
                if x.conditions_hold { "hold" } else { "fail" },
                if x.hamiltonian { "hamiltonian" } else { "not hamiltonian" },
                yes_no(x.agrees)
            );
        }
        match self.verdict {
            Verdict::Hamiltonian => out.push_str("HAMILTONIAN: yes\n"),
            Verdict::NotHamiltonian => out.push_str("HAMILTONIAN: no\n"),
            Verdict::Trivial => out.push_str("BRACKET TRIVIAL: yes\n"),
            Verdict::Nontrivial => out.push_str("BRACKET TRIVIAL: no\n"),
            Verdict::Error => {}
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(out, "time: {t:.1} ms");
        }
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_report() {
        let r = Report::new(Command::Check, "f", &["A"]);
        assert_eq!(r.clone().with_error(ErrorKind::Parse, "x").exit_code(), 2);
        assert_eq!(r.clone().with_error(ErrorKind::SingularMetric, "x").exit_code(), 3);
        let mut ok = r.clone();
        ok.verdict = Verdict::Hamiltonian;
        assert_eq!(ok.exit_code(), 0);
        ok.verdict = Verdict::Nontrivial;
        assert_eq!(ok.exit_code(), 1);
    }

    #[test]
    fn json_keys_are_stable() {
        let r = Report::new(Command::Bracket, "f", &["A", "B"]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["command"], "bracket");
        assert!(v.get("timing_ms").is_none());
    }
}
