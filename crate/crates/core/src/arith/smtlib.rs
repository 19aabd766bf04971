//! SMT-LIB v2 export of first-order obligations as validity problems.

use std::fmt::Write;

use num_traits::Signed;
use thiserror::Error;

use crate::syntax::{expand_sequent, CmpOp, Formula, Rational, Sequent, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("trigonometric terms are not supported in SMT-LIB export")]
    TrigNotSupported,
    #[error("modalities cannot be exported")]
    Modality,
    #[error("norm is only exportable as a whole side of a comparison: {0}")]
    Norm(String),
}

fn real(c: &Rational) -> String {
    let lit = |n: &Rational| {
        if n.is_integer() {
            format!("{}.0", n.numer())
        } else {
            format!("(/ {}.0 {}.0)", n.numer(), n.denom())
        }
    };
    if c.is_negative() {
        format!("(- {})", lit(&-c))
    } else {
        lit(c)
    }
}

fn term(t: &Term) -> Result<String, ExportError> {
    Ok(match t {
        Term::Var(n) | Term::Param(n) => n.clone(),
        Term::Const(c) => real(c),
        Term::Neg(a) => format!("(- {})", term(a)?),
        Term::Add(a, b) => format!("(+ {} {})", term(a)?, term(b)?),
        Term::Sub(a, b) => format!("(- {} {})", term(a)?, term(b)?),
        Term::Mul(a, b) => format!("(* {} {})", term(a)?, term(b)?),
        Term::Div(a, d) => format!("(/ {} {})", term(a)?, real(d)),
        Term::Pow(_, 0) => "1.0".to_string(),
        Term::Pow(a, 1) => term(a)?,
        Term::Pow(a, e) => {
            let base = term(a)?;
            format!("(* {})", vec![base; *e as usize].join(" "))
        }
        Term::Sin(_) | Term::Cos(_) => return Err(ExportError::TrigNotSupported),
        Term::Norm(_) => return Err(ExportError::Norm(t.to_string())),
    })
}

fn sum_of_squares(args: &[Term]) -> Result<String, ExportError> {
    let sq: Vec<String> = args
        .iter()
        .map(|a| term(a).map(|s| format!("(* {s} {s})")))
        .collect::<Result<_, _>>()?;
    Ok(match sq.len() {
        0 => "0.0".to_string(),
        1 => sq[0].clone(),
        _ => format!("(+ {})", sq.join(" ")),
    })
}

fn op_symbol(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Eq | CmpOp::Ne => "=",
        CmpOp::Ge => ">=",
        CmpOp::Gt => ">",
    }
}

/// `norm(v) op e` as a polynomial condition on `|v|^2` and `e`.
fn norm_cmp(op: CmpOp, args: &[Term], e_term: &Term) -> Result<String, ExportError> {
    let (s, e) = (sum_of_squares(args)?, term(e_term)?);
    let e2 = format!("(* {e} {e})");
    Ok(match op {
        CmpOp::Le | CmpOp::Lt | CmpOp::Eq => {
            format!("(and (>= {e} 0.0) ({} {s} {e2}))", op_symbol(op))
        }
        CmpOp::Ge | CmpOp::Gt => format!("(or (< {e} 0.0) ({} {s} {e2}))", op_symbol(op)),
        CmpOp::Ne => format!("(not {})", norm_cmp(CmpOp::Eq, args, &e_term)?),
    })
}

fn formula(f: &Formula) -> Result<String, ExportError> {
    Ok(match f {
        Formula::True => "true".to_string(),
        Formula::False => "false".to_string(),
        Formula::Cmp(op, Term::Norm(args), e) if !e.has_norm() => norm_cmp(*op, args, e)?,
        Formula::Cmp(op, e, Term::Norm(args)) if !e.has_norm() => norm_cmp(op.flip(), args, e)?,
        Formula::Cmp(CmpOp::Ne, a, b) => format!("(not (= {} {}))", term(a)?, term(b)?),
        Formula::Cmp(op, a, b) => format!("({} {} {})", op_symbol(*op), term(a)?, term(b)?),
        Formula::Not(a) => format!("(not {})", formula(a)?),
        Formula::And(a, b) => format!("(and {} {})", formula(a)?, formula(b)?),
        Formula::Or(a, b) => format!("(or {} {})", formula(a)?, formula(b)?),
        Formula::Implies(a, b) => format!("(=> {} {})", formula(a)?, formula(b)?),
        Formula::Forall(x, a) => format!("(forall (({x} Real)) {})", formula(a)?),
        Formula::Exists(x, a) => format!("(exists (({x} Real)) {})", formula(a)?),
        Formula::Box(..) | Formula::Diamond(..) => return Err(ExportError::Modality),
        Formula::InBall { .. } | Formula::BallModal { .. } => {
            return formula(&crate::syntax::expand(f))
        }
    })
}

fn has_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::Exists(..) | Formula::BallModal { .. } => true,
        Formula::Not(a) => has_quantifier(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            has_quantifier(a) || has_quantifier(b)
        }
        _ => false,
    }
}

/// Validity of `goal` as an SMT-LIB script: the negated goal is asserted,
/// so `unsat` means valid.
pub fn export_obligation(goal: &Sequent, goal_id: &str) -> Result<String, ExportError> {
    if goal.has_modality() {
        return Err(ExportError::Modality);
    }
    let goal = expand_sequent(goal);
    let f = goal.as_formula();
    if f.has_trig() {
        return Err(ExportError::TrigNotSupported);
    }
    let body = formula(&f)?;
    let logic = if has_quantifier(&f) { "NRA" } else { "QF_NRA" };
    let mut out = String::new();
    writeln!(out, "(set-info :source |lyapdl obligation {goal_id}|)").unwrap();
    writeln!(out, "(set-logic {logic})").unwrap();
    for n in goal.free_names() {
        writeln!(out, "(declare-const {n} Real)").unwrap();
    }
    writeln!(out, "(assert (not {body}))").unwrap();
    writeln!(out, "(check-sat)").unwrap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_sequent_with, Decls};

    fn goal(text: &str) -> Sequent {
        parse_sequent_with(text, &Decls::default()).unwrap()
    }

    #[test]
    fn square_nonnegativity_script() {
        let s = export_obligation(&goal("|- \\forall x: x^2 >= 0"), "7").unwrap();
        assert_eq!(
            s,
            "(set-info :source |lyapdl obligation 7|)\n(set-logic NRA)\n\
             (assert (not (forall ((x Real)) (>= (* x x) 0.0))))\n(check-sat)\n"
        );
    }

    #[test]
    fn levelset_script_declares_free_names() {
        let s = export_obligation(
            &goal("eps > 0 |- \\exists k: (k > 0 & \\forall th: \\forall w: (norm(th, w) = eps -> th^2 + w^2 >= k))"),
            "3",
        )
        .unwrap();
        assert!(s.contains("(declare-const eps Real)"));
        assert!(s.contains("(exists ((k Real))"));
        assert!(s.contains("(forall ((th Real))"));
    }

    #[test]
    fn trig_is_rejected() {
        assert_eq!(
            export_obligation(&goal("|- sin(th) <= 1"), "1"),
            Err(ExportError::TrigNotSupported)
        );
    }
}
