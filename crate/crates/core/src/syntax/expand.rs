//! Expansion of ball notation into plain first-order dL.

use super::ast::*;

fn ball(vars: &[String], kind: BallKind, radius: &Term) -> Formula {
    let n = Term::norm_of(vars);
    let op = match kind {
        BallKind::Closed => CmpOp::Le,
        BallKind::Boundary => CmpOp::Eq,
        BallKind::Complement => CmpOp::Gt,
    };
    Formula::Cmp(op, n, radius.clone())
}

fn expand_program(p: &HybridProgram) -> HybridProgram {
    HybridProgram {
        odes: p.odes.clone(),
        domain: Box::new(expand(&p.domain)),
    }
}

/// Removes every `InBall` and `BallModal` node.
///
/// `x in B_r` becomes `norm(x) <= r` (`=` for `dB_`, `>` for `coB_`), and
/// `_p[P]_q` becomes `\forall x: (norm(x) <= p -> [P] norm(x) <= q)` over the
/// state variables of `P`.
pub fn expand(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Cmp(..) => f.clone(),
        Formula::Not(a) => Formula::not(expand(a)),
        Formula::And(a, b) => Formula::and(expand(a), expand(b)),
        Formula::Or(a, b) => Formula::or(expand(a), expand(b)),
        Formula::Implies(a, b) => Formula::implies(expand(a), expand(b)),
        Formula::Forall(x, a) => Formula::forall(x, expand(a)),
        Formula::Exists(x, a) => Formula::exists(x, expand(a)),
        Formula::Box(p, a) => Formula::boxed(expand_program(p), expand(a)),
        Formula::Diamond(p, a) => Formula::diamond(expand_program(p), expand(a)),
        Formula::InBall { vars, kind, radius } => ball(vars, *kind, radius),
        Formula::BallModal {
            pre,
            program,
            post,
            diamond,
        } => {
            let vars = program.state_vars();
            let prog = expand_program(program);
            let after = ball(&vars, BallKind::Closed, post);
            let modal = if *diamond {
                Formula::diamond(prog, after)
            } else {
                Formula::boxed(prog, after)
            };
            let body = Formula::implies(ball(&vars, BallKind::Closed, pre), modal);
            vars.iter()
                .rev()
                .fold(body, |acc, v| Formula::forall(v, acc))
        }
    }
}

pub fn expand_sequent(s: &Sequent) -> Sequent {
    Sequent::new(
        s.antecedents.iter().map(expand).collect(),
        s.succedents.iter().map(expand).collect(),
    )
}
