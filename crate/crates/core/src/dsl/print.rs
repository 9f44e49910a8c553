use std::fmt::Write;

use crate::algebra::{Names, RationalExpr};

use super::{format_constant, Item, OpEntry, OperatorFile};

fn expr(c: &RationalExpr, names: &Names) -> String {
    c.render(&|v| names.even(v))
}

/// Source text that parses back to `f`.
pub fn print_file(f: &OperatorFile) -> String {
    let names = Names {
        fields: f.fields.clone(),
        ..Names::default()
    };
    let mut out = String::new();
    if !f.fields.is_empty() {
        let _ = writeln!(out, "fields {};", f.fields.join(", "));
    }
    for item in &f.items {
        out.push('\n');
        match item {
            Item::Operator(op) => {
                let _ = writeln!(out, "operator {} {{", op.name);
                for e in &op.entries {
                    match e {
                        OpEntry::Local { i, j, op } => {
                            let _ = writeln!(out, "    local[{},{}]: {};", i + 1, j + 1, op.render(&names));
                        }
                        OpEntry::Nonlocal { i, j, e, w, z } => {
                            let _ = writeln!(
                                out,
                                "    nonlocal[{},{}]: {}*[{}|{}];",
                                i + 1,
                                j + 1,
                                format_constant(e),
                                expr(w, &names),
                                expr(z, &names)
                            );
                        }
                        OpEntry::NonlocalVector { e, w, z } => {
                            let list = |v: &[RationalExpr]| {
                                v.iter().map(|c| expr(c, &names)).collect::<Vec<_>>().join(", ")
                            };
                            let _ = writeln!(
                                out,
                                "    nonlocal: {}*[{}|{}];",
                                format_constant(e),
                                list(w),
                                list(z)
                            );
                        }
                    }
                }
                out.push_str("}\n");
            }
            Item::FirstOrder(fo) => {
                let _ = writeln!(out, "firstorder {} {{", fo.name);
                for (key, entries) in [("g", &fo.g), ("w", &fo.w)] {
                    for (i, j, c) in entries.iter() {
                        let _ = writeln!(out, "    {key}[{},{}]: {};", i + 1, j + 1, expr(c, &names));
                    }
                }
                out.push_str("}\n");
            }
        }
    }
    out
}
