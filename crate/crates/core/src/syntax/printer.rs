//! Canonical text rendering. Output re-parses to the same tree (given the
//! same parameter declarations) with minimal parentheses.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ast::*;

/// Decimal if the denominator divides a power of ten, else `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let k = twos.max(fives);
    let scaled = (r * Rational::from_integer(BigInt::from(10).pow(k))).to_integer();
    let digits = scaled.abs().to_string();
    let k = k as usize;
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = padded.split_at(padded.len() - k);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Add(..) | Term::Sub(..) => 1,
        Term::Mul(..) | Term::Div(..) => 2,
        Term::Const(c) if !c.is_integer() && format_rational(c).contains('/') => 2,
        Term::Neg(_) => 3,
        Term::Const(c) if c.is_negative() => 3,
        Term::Pow(..) => 4,
        _ => 5,
    }
}

fn write_term_at(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    if term_level(t) < min {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(n) | Term::Param(n) => f.write_str(n),
            Term::Const(c) => f.write_str(&format_rational(c)),
            Term::Neg(t) => {
                let inner = t.to_string();
                let starts_numeric = inner.starts_with(|c: char| c.is_ascii_digit());
                if term_level(t) < 4 || starts_numeric || matches!(**t, Term::Const(_)) {
                    write!(f, "-({inner})")
                } else {
                    write!(f, "-{inner}")
                }
            }
            Term::Add(a, b) => {
                write_term_at(f, a, 1)?;
                f.write_str(" + ")?;
                write_term_at(f, b, 2)
            }
            Term::Sub(a, b) => {
                write_term_at(f, a, 1)?;
                f.write_str(" - ")?;
                write_term_at(f, b, 2)
            }
            Term::Mul(a, b) => {
                write_term_at(f, a, 2)?;
                f.write_str("*")?;
                write_term_at(f, b, 3)
            }
            Term::Div(a, d) => {
                match **a {
                    Term::Var(_) | Term::Param(_) | Term::Sin(_) | Term::Cos(_) | Term::Norm(_) => {
                        write!(f, "{a}")?
                    }
                    _ => write!(f, "({a})")?,
                }
                let ds = format_rational(d);
                if ds.contains('/') {
                    write!(f, "/({ds})")
                } else {
                    write!(f, "/{ds}")
                }
            }
            Term::Pow(a, e) => {
                let wrap = match &**a {
                    Term::Const(c) => c.is_negative() || format_rational(c).contains('/'),
                    other => term_level(other) < 5,
                };
                if wrap {
                    write!(f, "({a})^{e}")
                } else {
                    write!(f, "{a}^{e}")
                }
            }
            Term::Sin(a) => write!(f, "sin({a})"),
            Term::Cos(a) => write!(f, "cos({a})"),
            Term::Norm(args) => {
                f.write_str("norm(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for HybridProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, ode) in self.odes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}' = {}", ode.var, ode.rhs)?;
        }
        if *self.domain != Formula::True {
            write!(f, " & {}", self.domain)?;
        }
        f.write_str("}")
    }
}

fn formula_level(p: &Formula) -> u8 {
    match p {
        Formula::Forall(..) | Formula::Exists(..) => 0,
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) | Formula::Box(..) | Formula::Diamond(..) => 4,
        _ => 5,
    }
}

fn write_formula_at(f: &mut fmt::Formatter<'_>, p: &Formula, min: u8) -> fmt::Result {
    if formula_level(p) < min {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

fn radius_suffix(r: &Term) -> String {
    match r {
        Term::Var(n) | Term::Param(n) => n.clone(),
        Term::Const(c) if c.is_integer() && !c.is_negative() => c.to_string(),
        other => format!("({other})"),
    }
}

fn radius_atom(r: &Term) -> String {
    match r {
        Term::Var(n) | Term::Param(n) => n.clone(),
        Term::Const(c) if !c.is_negative() && !format_rational(c).contains('/') => {
            format_rational(c)
        }
        other => format!("({other})"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Cmp(op, a, b) => write!(f, "{a} {op} {b}"),
            Formula::Not(p) => {
                f.write_str("!")?;
                write_formula_at(f, p, 4)
            }
            Formula::And(a, b) => {
                write_formula_at(f, a, 4)?;
                f.write_str(" & ")?;
                write_formula_at(f, b, 3)
            }
            Formula::Or(a, b) => {
                write_formula_at(f, a, 3)?;
                f.write_str(" | ")?;
                write_formula_at(f, b, 2)
            }
            Formula::Implies(a, b) => {
                write_formula_at(f, a, 2)?;
                f.write_str(" -> ")?;
                write_formula_at(f, b, 1)
            }
            Formula::Forall(x, p) => write!(f, "\\forall {x}: {p}"),
            Formula::Exists(x, p) => write!(f, "\\exists {x}: {p}"),
            Formula::Box(prog, p) => {
                write!(f, "[{prog}] ")?;
                write_formula_at(f, p, 4)
            }
            Formula::Diamond(prog, p) => {
                write!(f, "<{prog}> ")?;
                write_formula_at(f, p, 4)
            }
            Formula::InBall { vars, kind, radius } => {
                if vars.len() == 1 {
                    f.write_str(&vars[0])?;
                } else {
                    write!(f, "({})", vars.join(", "))?;
                }
                write!(f, " in {}{}", kind.prefix(), radius_suffix(radius))
            }
            Formula::BallModal {
                pre,
                program,
                post,
                diamond,
            } => {
                let (open, close) = if *diamond { ("<", ">") } else { ("[", "]") };
                write!(
                    f,
                    "_{}{open}{program}{close}_{}",
                    radius_atom(pre),
                    radius_atom(post)
                )
            }
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: &[Formula]| {
            v.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let lhs = side(&self.antecedents);
        if lhs.is_empty() {
            write!(f, "|- {}", side(&self.succedents))
        } else {
            write!(f, "{lhs} |- {}", side(&self.succedents))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(format_rational(&ratio(69, 5)), "13.8");
        assert_eq!(format_rational(&ratio(-1, 40)), "-0.025");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&rat(-7)), "-7");
    }

    #[test]
    fn minimal_parentheses() {
        let t = Term::sub(
            Term::var("x"),
            Term::add(Term::var("y"), Term::var("z")),
        );
        assert_eq!(t.to_string(), "x - (y + z)");
        let t = Term::mul(Term::param("a"), Term::pow(Term::var("th"), 2));
        assert_eq!(t.to_string(), "a*th^2");
        assert_eq!(Term::neg(Term::int(2)).to_string(), "-(2)");
        assert_eq!(Term::pow(Term::int(-2), 2).to_string(), "(-2)^2");
        assert_eq!(Term::div(Term::int(2), rat(3)).to_string(), "(2)/3");
    }

    #[test]
    fn quantifier_operands_are_wrapped() {
        let f = Formula::and(
            Formula::forall("x", Formula::gt(Term::var("x"), Term::zero())),
            Formula::True,
        );
        assert_eq!(f.to_string(), "(\\forall x: x > 0) & true");
    }
}
