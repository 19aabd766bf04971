mod common;

use common::*;
use lyapdl::syntax::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn term_print_parse_identity(t in arb_term()) {
        let text = t.to_string();
        let back = parse_term_with(&text, &decls());
        prop_assert_eq!(back.as_ref(), Ok(&t), "printed as {}", text);
    }

    #[test]
    fn formula_print_parse_identity(f in arb_formula()) {
        let text = f.to_string();
        let back = parse_formula_with(&text, &decls());
        prop_assert_eq!(back.as_ref(), Ok(&f), "printed as {}", text);
    }
}

#[test]
fn errors_carry_line_and_column() {
    let err = parse_formula("x > 0 &\n  y >").unwrap_err();
    assert_eq!(err.pos(), Pos { line: 2, col: 6 });
    let err = parse_formula("x >= 0 ] y").unwrap_err();
    assert_eq!(err.pos(), Pos { line: 1, col: 8 });
    assert!(err.to_string().contains("end of input"));
}
