//! Random AST generators shared by the round-trip tests.

#![allow(dead_code)]

use lyapdl::syntax::*;
use proptest::prelude::*;

pub const PARAMS: &[&str] = &["a", "b", "eps"];
pub const VARS: &[&str] = &["x", "y", "z"];

pub fn decls() -> Decls {
    Decls::with_params(PARAMS.iter().copied())
}

pub fn arb_const() -> impl Strategy<Value = Term> {
    (-40i64..40, prop_oneof![Just(1i64), Just(2), Just(3), Just(5), Just(7), Just(10)])
        .prop_map(|(n, d)| Term::Const(ratio(n, d)))
}

pub fn arb_leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        arb_const(),
        prop::sample::select(VARS).prop_map(Term::var),
        prop::sample::select(PARAMS).prop_map(Term::param),
    ]
}

pub fn arb_term() -> impl Strategy<Value = Term> {
    arb_leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (inner.clone(), 1i64..9, prop::bool::ANY).prop_map(|(a, d, neg)| {
                Term::div(a, ratio(if neg { -d } else { d }, 3))
            }),
            (inner.clone(), 0u32..4).prop_map(|(a, e)| Term::pow(a, e)),
            inner.clone().prop_map(Term::sin),
            inner.clone().prop_map(Term::cos),
            prop::collection::vec(inner, 1..3).prop_map(Term::Norm),
        ]
    })
}

pub fn arb_cmp() -> impl Strategy<Value = CmpOp> {
    prop::sample::select(vec![
        CmpOp::Lt,
        CmpOp::Le,
        CmpOp::Eq,
        CmpOp::Ge,
        CmpOp::Gt,
        CmpOp::Ne,
    ])
}

/// Programs over the state variables th, w; their right-hand sides do not
/// mention th or w outside the program, which keeps parameters distinct.
pub fn arb_program() -> impl Strategy<Value = HybridProgram> {
    (arb_term(), arb_term(), prop::option::of((arb_cmp(), arb_term())))
        .prop_map(|(r1, r2, dom)| HybridProgram {
            odes: vec![
                Ode {
                    var: "th".into(),
                    rhs: r1,
                },
                Ode {
                    var: "w".into(),
                    rhs: r2,
                },
            ],
            domain: Box::new(match dom {
                Some((op, t)) => Formula::Cmp(op, Term::var("th"), t),
                None => Formula::True,
            }),
        })
}

pub fn arb_radius() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::sample::select(PARAMS).prop_map(Term::param),
        (0i64..5).prop_map(Term::int),
        arb_term(),
    ]
}

pub fn arb_atom() -> impl Strategy<Value = Formula> {
    prop_oneof![
        4 => (arb_cmp(), arb_term(), arb_term()).prop_map(|(op, a, b)| Formula::Cmp(op, a, b)),
        1 => Just(Formula::True),
        1 => Just(Formula::False),
        1 => (
            prop::sample::select(vec![BallKind::Closed, BallKind::Boundary, BallKind::Complement]),
            arb_radius(),
            prop::bool::ANY,
        )
            .prop_map(|(kind, radius, pair)| Formula::InBall {
                vars: if pair {
                    vec!["x".into(), "y".into()]
                } else {
                    vec!["z".into()]
                },
                kind,
                radius,
            }),
        1 => (arb_radius(), arb_program(), arb_radius(), prop::bool::ANY).prop_map(
            |(pre, program, post, diamond)| Formula::BallModal {
                pre,
                program,
                post,
                diamond
            }
        ),
    ]
}

pub fn arb_formula() -> impl Strategy<Value = Formula> {
    arb_atom().prop_recursive(8, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (prop::sample::select(VARS), inner.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (prop::sample::select(VARS), inner.clone()).prop_map(|(x, a)| Formula::exists(x, a)),
            (arb_program(), inner.clone()).prop_map(|(p, a)| Formula::boxed(p, a)),
            (arb_program(), inner).prop_map(|(p, a)| Formula::diamond(p, a)),
        ]
    })
}

