//! Exact and floating-point evaluation of terms and quantifier-free formulas.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::poly::rational_to_f64;
use crate::syntax::{Formula, Rational, Term};

/// Exact value, or `None` for unbound names, trigonometry or norms.
pub fn eval_term_exact(t: &Term, env: &BTreeMap<String, Rational>) -> Option<Rational> {
    let go = |t: &Term| eval_term_exact(t, env);
    Some(match t {
        Term::Var(n) | Term::Param(n) => env.get(n)?.clone(),
        Term::Const(c) => c.clone(),
        Term::Neg(a) => -go(a)?,
        Term::Add(a, b) => go(a)? + go(b)?,
        Term::Sub(a, b) => go(a)? - go(b)?,
        Term::Mul(a, b) => go(a)? * go(b)?,
        Term::Div(a, d) => go(a)? / d,
        Term::Pow(a, e) => {
            let base = go(a)?;
            let mut acc = Rational::one();
            for _ in 0..*e {
                acc *= &base;
            }
            acc
        }
        Term::Sin(_) | Term::Cos(_) | Term::Norm(_) => return None,
    })
}

/// Exact truth value of a quantifier-free, modality-free formula.
pub fn eval_formula_exact(f: &Formula, env: &BTreeMap<String, Rational>) -> Option<bool> {
    let go = |g: &Formula| eval_formula_exact(g, env);
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => op.holds(&eval_term_exact(a, env)?, &eval_term_exact(b, env)?),
        Formula::Not(a) => !go(a)?,
        Formula::And(a, b) => go(a)? && go(b)?,
        Formula::Or(a, b) => go(a)? || go(b)?,
        Formula::Implies(a, b) => !go(a)? || go(b)?,
        _ => return None,
    })
}

pub fn eval_term_f64(t: &Term, env: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
    let go = |t: &Term| eval_term_f64(t, env);
    Some(match t {
        Term::Var(n) | Term::Param(n) => env(n)?,
        Term::Const(c) => rational_to_f64(c),
        Term::Neg(a) => -go(a)?,
        Term::Add(a, b) => go(a)? + go(b)?,
        Term::Sub(a, b) => go(a)? - go(b)?,
        Term::Mul(a, b) => go(a)? * go(b)?,
        Term::Div(a, d) => go(a)? / rational_to_f64(d),
        Term::Pow(a, e) => go(a)?.powi(*e as i32),
        Term::Sin(a) => go(a)?.sin(),
        Term::Cos(a) => go(a)?.cos(),
        Term::Norm(args) => {
            let mut s = 0.0;
            for a in args {
                let v = go(a)?;
                s += v * v;
            }
            s.sqrt()
        }
    })
}

/// Floating-point truth value of a quantifier-free, modality-free formula.
pub fn eval_formula_f64(f: &Formula, env: &dyn Fn(&str) -> Option<f64>) -> Option<bool> {
    let go = |g: &Formula| eval_formula_f64(g, env);
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => op.holds(&eval_term_f64(a, env)?, &eval_term_f64(b, env)?),
        Formula::Not(a) => !go(a)?,
        Formula::And(a, b) => go(a)? && go(b)?,
        Formula::Or(a, b) => go(a)? || go(b)?,
        Formula::Implies(a, b) => !go(a)? || go(b)?,
        _ => return None,
    })
}

/// Replaces every parameter with a known value by its constant.
pub fn instantiate_term(t: &Term, values: &BTreeMap<String, Rational>) -> Term {
    let go = |t: &Term| instantiate_term(t, values);
    match t {
        Term::Param(n) => match values.get(n) {
            Some(v) => Term::Const(v.clone()),
            None => t.clone(),
        },
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::Neg(a) => Term::neg(go(a)),
        Term::Add(a, b) => Term::add(go(a), go(b)),
        Term::Sub(a, b) => Term::sub(go(a), go(b)),
        Term::Mul(a, b) => Term::mul(go(a), go(b)),
        Term::Div(a, d) => Term::Div(Box::new(go(a)), d.clone()),
        Term::Pow(a, e) => Term::pow(go(a), *e),
        Term::Sin(a) => Term::sin(go(a)),
        Term::Cos(a) => Term::cos(go(a)),
        Term::Norm(args) => Term::Norm(args.iter().map(go).collect()),
    }
}

/// Parameter instantiation on formulas; parameters are never bound, so no
/// capture can occur.
pub fn instantiate(f: &Formula, values: &BTreeMap<String, Rational>) -> Formula {
    let go = |g: &Formula| instantiate(g, values);
    let prog = |p: &crate::syntax::HybridProgram| crate::syntax::HybridProgram {
        odes: p
            .odes
            .iter()
            .map(|o| crate::syntax::Ode {
                var: o.var.clone(),
                rhs: instantiate_term(&o.rhs, values),
            })
            .collect(),
        domain: Box::new(go(&p.domain)),
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(op, a, b) => Formula::Cmp(
            *op,
            instantiate_term(a, values),
            instantiate_term(b, values),
        ),
        Formula::Not(a) => Formula::not(go(a)),
        Formula::And(a, b) => Formula::and(go(a), go(b)),
        Formula::Or(a, b) => Formula::or(go(a), go(b)),
        Formula::Implies(a, b) => Formula::implies(go(a), go(b)),
        Formula::Forall(x, a) => Formula::forall(x, go(a)),
        Formula::Exists(x, a) => Formula::exists(x, go(a)),
        Formula::Box(p, a) => Formula::boxed(prog(p), go(a)),
        Formula::Diamond(p, a) => Formula::diamond(prog(p), go(a)),
        Formula::InBall { vars, kind, radius } => Formula::InBall {
            vars: vars.clone(),
            kind: *kind,
            radius: instantiate_term(radius, values),
        },
        Formula::BallModal {
            pre,
            program,
            post,
            diamond,
        } => Formula::BallModal {
            pre: instantiate_term(pre, values),
            program: prog(program),
            post: instantiate_term(post, values),
            diamond: *diamond,
        },
    }
}

pub fn is_zero_term(t: &Term) -> bool {
    matches!(t, Term::Const(c) if c.is_zero())
}
