mod common;

use common::Gen;
use proptest::prelude::*;
use wno::dsl::{parse, print_file, FirstOrderDef, Item, OpEntry, OperatorDef, OperatorFile};
use wno::schouten::DiffOp;

fn random_file(seed: u64, n: usize) -> OperatorFile {
    let mut g = Gen::new(seed, n, 3);
    g.rational_pct = 25;
    let fields = if n == 1 {
        vec!["u".to_string()]
    } else {
        vec!["a".to_string(), "b".to_string()]
    };
    let mut items = Vec::new();
    for k in 0..g.range(1, 3) {
        let mut entries = Vec::new();
        for _ in 0..g.range(1, 3) {
            let (i, j) = (g.range(0, n - 1), g.range(0, n - 1));
            let entry = match g.range(0, 2) {
                0 => {
                    let mut op = DiffOp::zero();
                    for _ in 0..g.range(1, 3) {
                        let kk = g.range(0, 4);
                        op.add_term(g.coeff(), kk);
                    }
                    if op.is_zero() {
                        continue;
                    }
                    OpEntry::Local { i, j, op }
                }
                1 => OpEntry::Nonlocal {
                    i,
                    j,
                    e: g.small_rat(),
                    w: g.coeff(),
                    z: g.coeff(),
                },
                _ => OpEntry::NonlocalVector {
                    e: g.small_rat(),
                    w: (0..n).map(|_| g.coeff()).collect(),
                    z: (0..n).map(|_| g.coeff()).collect(),
                },
            };
            entries.push(entry);
        }
        items.push(Item::Operator(OperatorDef {
            name: format!("P{k}"),
            entries,
        }));
    }
    let mut fo = FirstOrderDef {
        name: "F".to_string(),
        g: Vec::new(),
        w: Vec::new(),
    };
    for i in 0..n {
        fo.g.push((i, i, g.coeff()));
        fo.w.push((i, g.range(0, n - 1), g.coeff()));
    }
    items.push(Item::FirstOrder(fo));
    OperatorFile { fields, items }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_files_parse_back(seed in any::<u64>(), n in 1usize..=2) {
        let f = random_file(seed, n);
        let text = print_file(&f);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(print_file(&back), text);
    }

    #[test]
    fn garbage_never_panics(s in "[a-zD0-9_\\[\\]{}();:,*+/^|#\n -]{0,80}") {
        let _ = parse(&s);
    }
}

#[test]
fn reserved_names_are_rejected() {
    for bad in ["fields D;", "fields p;", "fields r1;", "fields u_1;", "fields operator;"] {
        assert!(parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn comments_and_spellings() {
    let a = parse("fields u; # one field\noperator A { local[1,1]: u_xx*D; }").unwrap();
    let b = parse("fields u;\noperator A { local[1,1]: u_2x*D; }").unwrap();
    assert_eq!(a, b);
}
