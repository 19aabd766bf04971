//! Capture-avoiding substitution of a term for a variable or parameter name.
//!
//! Substitution never renames binders; when it would capture, it fails and
//! names the offending binder. ODE state variables count as binders of the
//! modality that owns them.

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substituting for `{var}` would be captured by binder `{binder}`")]
    Capture { var: String, binder: String },
    #[error("`{var}` occurs as a vector component and can only be replaced by a variable")]
    NotAVariable { var: String },
}

pub fn substitute_term(t: &Term, name: &str, repl: &Term) -> Term {
    let go = |t: &Term| substitute_term(t, name, repl);
    match t {
        Term::Var(n) | Term::Param(n) if n == name => repl.clone(),
        Term::Var(_) | Term::Param(_) | Term::Const(_) => t.clone(),
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

fn program_binds(
    prog: &HybridProgram,
    whole: &Formula,
    name: &str,
    repl: &Term,
) -> Result<bool, SubstError> {
    let state = prog.state_vars();
    if !whole.free_names().contains(name) {
        return Ok(false);
    }
    if let Some(v) = state.iter().find(|v| *v == name) {
        return Err(SubstError::Capture {
            var: name.to_string(),
            binder: v.clone(),
        });
    }
    if let Some(v) = state.iter().find(|v| repl.mentions(v)) {
        return Err(SubstError::Capture {
            var: name.to_string(),
            binder: v.clone(),
        });
    }
    Ok(true)
}

fn substitute_program(
    prog: &HybridProgram,
    name: &str,
    repl: &Term,
) -> Result<HybridProgram, SubstError> {
    Ok(HybridProgram {
        odes: prog
            .odes
            .iter()
            .map(|o| Ode {
                var: o.var.clone(),
                rhs: substitute_term(&o.rhs, name, repl),
            })
            .collect(),
        domain: Box::new(substitute(&prog.domain, name, repl)?),
    })
}

/// `f[name := repl]`.
pub fn substitute(f: &Formula, name: &str, repl: &Term) -> Result<Formula, SubstError> {
    if matches!(repl, Term::Var(n) if n == name) {
        return Ok(f.clone());
    }
    let go = |g: &Formula| substitute(g, name, repl);
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Cmp(op, a, b) => Formula::Cmp(
            *op,
            substitute_term(a, name, repl),
            substitute_term(b, name, repl),
        ),
        Formula::Not(a) => Formula::not(go(a)?),
        Formula::And(a, b) => Formula::and(go(a)?, go(b)?),
        Formula::Or(a, b) => Formula::or(go(a)?, go(b)?),
        Formula::Implies(a, b) => Formula::implies(go(a)?, go(b)?),
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let is_forall = matches!(f, Formula::Forall(..));
            if x == name || !body.free_names().contains(name) {
                return Ok(f.clone());
            }
            if repl.mentions(x) {
                return Err(SubstError::Capture {
                    var: name.to_string(),
                    binder: x.clone(),
                });
            }
            let body = go(body)?;
            if is_forall {
                Formula::forall(x, body)
            } else {
                Formula::exists(x, body)
            }
        }
        Formula::Box(prog, post) | Formula::Diamond(prog, post) => {
            if !program_binds(prog, f, name, repl)? {
                return Ok(f.clone());
            }
            let prog = substitute_program(prog, name, repl)?;
            let post = go(post)?;
            if matches!(f, Formula::Box(..)) {
                Formula::boxed(prog, post)
            } else {
                Formula::diamond(prog, post)
            }
        }
        Formula::InBall { vars, kind, radius } => {
            let vars = if vars.iter().any(|v| v == name) {
                match repl {
                    Term::Var(new) => vars
                        .iter()
                        .map(|v| if v == name { new.clone() } else { v.clone() })
                        .collect(),
                    _ => {
                        return Err(SubstError::NotAVariable {
                            var: name.to_string(),
                        })
                    }
                }
            } else {
                vars.clone()
            };
            Formula::InBall {
                vars,
                kind: *kind,
                radius: substitute_term(radius, name, repl),
            }
        }
        Formula::BallModal {
            pre,
            program,
            post,
            diamond,
        } => {
            if !program_binds(program, f, name, repl)? {
                return Ok(f.clone());
            }
            Formula::BallModal {
                pre: substitute_term(pre, name, repl),
                program: substitute_program(program, name, repl)?,
                post: substitute_term(post, name, repl),
                diamond: *diamond,
            }
        }
    })
}

/// Renames free occurrences of `from` to the variable `to`.
pub fn rename_free(f: &Formula, from: &str, to: &str) -> Result<Formula, SubstError> {
    substitute(f, from, &Term::var(to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn replaces_free_occurrences_only() {
        let f = parse_formula("x > 0 & \\forall x: x < y").unwrap();
        let g = substitute(&f, "x", &Term::int(3)).unwrap();
        assert_eq!(g, parse_formula("3 > 0 & \\forall x: x < y").unwrap());
    }

    #[test]
    fn capture_names_the_binder() {
        let f = parse_formula("\\forall x: x < y").unwrap();
        let err = substitute(&f, "y", &Term::var("x")).unwrap_err();
        assert_eq!(
            err,
            SubstError::Capture {
                var: "y".into(),
                binder: "x".into()
            }
        );
    }

    #[test]
    fn ode_state_is_a_binder() {
        let f = parse_formula("[{x' = a}] x > c").unwrap();
        assert!(substitute(&f, "c", &Term::var("x")).is_err());
        assert!(substitute(&f, "x", &Term::int(1)).is_err());
        let g = substitute(&f, "a", &Term::int(2)).unwrap();
        assert_eq!(g, parse_formula("[{x' = 2}] x > c").unwrap());
    }
}
