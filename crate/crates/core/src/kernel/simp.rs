//! Bounded simplification pass: constant folding of ground comparisons,
//! propositional unit laws, negated comparisons, top-level splitting and
//! deduplication.

use crate::arith::eval::eval_formula_exact;
use crate::syntax::{Formula, Sequent};

fn is_ground_cmp(f: &Formula) -> bool {
    matches!(f, Formula::Cmp(..)) && f.free_names().is_empty()
}

pub fn simp_formula(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Cmp(..) if is_ground_cmp(f) => match eval_formula_exact(f, &Default::default()) {
            Some(true) => True,
            Some(false) => False,
            None => f.clone(),
        },
        Not(a) => match simp_formula(a) {
            True => False,
            False => True,
            Cmp(op, x, y) => Cmp(op.negate(), x, y),
            Not(b) => *b,
            other => Formula::not(other),
        },
        And(a, b) => match (simp_formula(a), simp_formula(b)) {
            (False, _) | (_, False) => False,
            (True, x) | (x, True) => x,
            (x, y) => Formula::and(x, y),
        },
        Or(a, b) => match (simp_formula(a), simp_formula(b)) {
            (True, _) | (_, True) => True,
            (False, x) | (x, False) => x,
            (x, y) => Formula::or(x, y),
        },
        Implies(a, b) => match (simp_formula(a), simp_formula(b)) {
            (False, _) | (_, True) => True,
            (True, x) => x,
            (x, False) => simp_formula(&Formula::not(x)),
            (x, y) => Formula::implies(x, y),
        },
        Forall(x, a) => match simp_formula(a) {
            True => True,
            body => Formula::forall(x, body),
        },
        Exists(x, a) => match simp_formula(a) {
            False => False,
            body => Formula::exists(x, body),
        },
        Box(p, a) => Formula::boxed(p.clone(), simp_formula(a)),
        Diamond(p, a) => Formula::diamond(p.clone(), simp_formula(a)),
        _ => f.clone(),
    }
}

fn split_and(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(a, b) => {
            split_and(*a, out);
            split_and(*b, out);
        }
        Formula::True => {}
        other => out.push(other),
    }
}

fn split_or(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Or(a, b) => {
            split_or(*a, out);
            split_or(*b, out);
        }
        Formula::False => {}
        other => out.push(other),
    }
}

fn dedup(fs: Vec<Formula>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in fs {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

pub fn simp_sequent(s: &Sequent) -> Sequent {
    let mut ante = Vec::new();
    for a in &s.antecedents {
        split_and(simp_formula(a), &mut ante);
    }
    let mut succ = Vec::new();
    for f in &s.succedents {
        split_or(simp_formula(f), &mut succ);
    }
    Sequent::new(dedup(ante), dedup(succ))
}
