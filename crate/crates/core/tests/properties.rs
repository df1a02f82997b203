mod common;

use common::*;
use noether2::io::{parse, print};
use noether2::{canonicalize, same, zero_test, Expr, Mode, ZeroTestConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent(e in expr(Mode::Derivative, &["u", "v"])) {
        let c = canonicalize(&e);
        prop_assert_eq!(canonicalize(&c), c.clone());
        prop_assert!(same(&c, &e));
    }

    #[test]
    fn ring_laws(
        a in expr(Mode::Shift, &["u"]),
        b in expr(Mode::Shift, &["u"]),
        c in expr(Mode::Shift, &["u"]),
    ) {
        prop_assert!(same(&(&a * (&b + &c)), &(&a * &b + &a * &c)));
        prop_assert!(same(&(&a + &b), &(&b + &a)));
        prop_assert!(canonicalize(&(&a - &a)).is_zero());
    }

    #[test]
    fn zero_test_agrees_with_canonical_form(e in expr(Mode::Derivative, &["u"])) {
        let verdict = zero_test(&e, &ZeroTestConfig { trials: 20, ..ZeroTestConfig::default() });
        prop_assert_eq!(verdict.status.is_zero(), canonicalize(&e).is_zero());
    }

    #[test]
    fn printed_expressions_reparse(
        e in expr(Mode::Derivative, &["u", "v"]),
        s in expr(Mode::Shift, &["u", "v"]),
    ) {
        for (kind, vars, e) in [("continuous", "x, t", e), ("discrete", "n, m", s)] {
            let mut p = parse(&format!(
                "kind: {kind}\nvars: {vars}\nfields: u, v\nparams: k\nlagrangian: 0\n"
            ))
            .unwrap();
            p.lagrangian = e.clone();
            let text = print(&p);
            let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
            prop_assert!(same(&back.lagrangian, &e), "{}", text);
            prop_assert_eq!(print(&back), text);
        }
    }
}

#[test]
fn exp_of_sum_is_product_of_exps() {
    let (a, b) = (jet("u", &[1, 0]), jet("u", &[0, 1]));
    assert!(same(&Expr::exp(&a + &b), &(Expr::exp(a) * Expr::exp(b))));
}
