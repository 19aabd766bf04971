//! Multivariate polynomials with exact rational coefficients.
//!
//! Atoms are variables, parameters and `sin`/`cos` applications, so
//! trigonometric right-hand sides normalize too. `norm` is not polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::syntax::{HybridProgram, Rational, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("`{0}` is not polynomial")]
    NotPolynomial(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Param(String),
    Var(String),
    Sin(Term),
    Cos(Term),
}

impl Atom {
    fn to_term(&self) -> Term {
        match self {
            Atom::Param(n) => Term::Param(n.clone()),
            Atom::Var(n) => Term::Var(n.clone()),
            Atom::Sin(a) => Term::sin(a.clone()),
            Atom::Cos(a) => Term::cos(a.clone()),
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Atom::Param(n) | Atom::Var(n) => Some(n),
            _ => None,
        }
    }
}

pub type Monomial = BTreeMap<Atom, u32>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

fn degree(m: &Monomial) -> u32 {
    m.values().sum()
}

/// Graded order: higher total degree first, then lexicographic on atoms with
/// larger exponents first.
fn graded_cmp(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    degree(b).cmp(&degree(a)).then_with(|| {
        let ka: Vec<_> = a.iter().map(|(x, e)| (x, std::cmp::Reverse(*e))).collect();
        let kb: Vec<_> = b.iter().map(|(x, e)| (x, std::cmp::Reverse(*e))).collect();
        ka.cmp(&kb)
    })
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn atom(a: Atom) -> Poly {
        let mut m = Monomial::new();
        m.insert(a, 1);
        let mut p = Poly::zero();
        p.add_term(m, Rational::one());
        p
    }

    pub fn var(name: &str) -> Poly {
        Poly::atom(Atom::Var(name.to_string()))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(degree).max().unwrap_or(0)
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn has_trig(&self) -> bool {
        self.atoms()
            .iter()
            .any(|a| matches!(a, Atom::Sin(_) | Atom::Cos(_)))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    *m.entry(a.clone()).or_insert(0) += e;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn from_term(t: &Term) -> Result<Poly, PolyError> {
        Ok(match t {
            Term::Var(n) => Poly::atom(Atom::Var(n.clone())),
            Term::Param(n) => Poly::atom(Atom::Param(n.clone())),
            Term::Const(c) => Poly::constant(c.clone()),
            Term::Neg(a) => Poly::from_term(a)?.neg(),
            Term::Add(a, b) => Poly::from_term(a)?.add(&Poly::from_term(b)?),
            Term::Sub(a, b) => Poly::from_term(a)?.sub(&Poly::from_term(b)?),
            Term::Mul(a, b) => Poly::from_term(a)?.mul(&Poly::from_term(b)?),
            Term::Div(a, d) => Poly::from_term(a)?.scale(&d.recip()),
            Term::Pow(a, e) => Poly::from_term(a)?.pow(*e),
            Term::Sin(a) => Poly::atom(Atom::Sin(Poly::from_term(a)?.to_term())),
            Term::Cos(a) => Poly::atom(Atom::Cos(Poly::from_term(a)?.to_term())),
            Term::Norm(_) => return Err(PolyError::NotPolynomial(t.to_string())),
        })
    }

    /// Canonical term: monomials in graded order, subtraction for negative
    /// coefficients after the first, e.g. `-13.8*th^2 - 1.5*w^2`.
    pub fn to_term(&self) -> Term {
        let mut monos: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        monos.sort_by(|a, b| graded_cmp(a.0, b.0));
        let mut acc: Option<Term> = None;
        for (m, c) in monos {
            acc = Some(match acc {
                None => monomial_term(m, c),
                Some(prev) if c.is_negative() => Term::sub(prev, monomial_term(m, &-c)),
                Some(prev) => Term::add(prev, monomial_term(m, c)),
            });
        }
        acc.unwrap_or_else(Term::zero)
    }

    /// Replaces named atoms (variables or parameters) by polynomials.
    pub fn substitute(&self, values: &BTreeMap<String, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (a, e) in m {
                let factor = match a.name().and_then(|n| values.get(n)) {
                    Some(p) => p.pow(*e),
                    None => Poly::atom(a.clone()).pow(*e),
                };
                term = term.mul(&factor);
            }
            out = out.add(&term);
        }
        out
    }

    /// Partial derivative with respect to a named variable; the chain rule
    /// applies to `sin` and `cos` atoms.
    pub fn derivative(&self, x: &str) -> Result<Poly, PolyError> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (a, e) in m {
                let inner = match a {
                    Atom::Var(n) | Atom::Param(n) if n == x => Poly::constant(Rational::one()),
                    Atom::Var(_) | Atom::Param(_) => continue,
                    Atom::Sin(arg) => {
                        let d = Poly::from_term(arg)?.derivative(x)?;
                        Poly::atom(Atom::Cos(arg.clone())).mul(&d)
                    }
                    Atom::Cos(arg) => {
                        let d = Poly::from_term(arg)?.derivative(x)?;
                        Poly::atom(Atom::Sin(arg.clone())).mul(&d).neg()
                    }
                };
                if inner.is_zero() {
                    continue;
                }
                let mut rest = m.clone();
                if *e == 1 {
                    rest.remove(a);
                } else {
                    rest.insert(a.clone(), e - 1);
                }
                let mut base = Poly::zero();
                base.add_term(rest, c * Rational::from_integer((*e).into()));
                out = out.add(&base.mul(&inner));
            }
        }
        Ok(out)
    }

    /// Lie derivative along the vector field of `prog`.
    pub fn lie_derivative(&self, prog: &HybridProgram) -> Result<Poly, PolyError> {
        let mut out = Poly::zero();
        for ode in &prog.odes {
            let d = self.derivative(&ode.var)?;
            if d.is_zero() {
                continue;
            }
            out = out.add(&d.mul(&Poly::from_term(&ode.rhs)?));
        }
        Ok(out)
    }

    /// Floating-point value; `env` resolves variable and parameter names.
    pub fn eval_f64(&self, env: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = rational_to_f64(c);
            for (a, e) in m {
                let base = match a {
                    Atom::Var(n) | Atom::Param(n) => env(n)?,
                    Atom::Sin(t) => Poly::from_term(t).ok()?.eval_f64(env)?.sin(),
                    Atom::Cos(t) => Poly::from_term(t).ok()?.eval_f64(env)?.cos(),
                };
                v *= base.powi(*e as i32);
            }
            total += v;
        }
        Some(total)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn monomial_term(m: &Monomial, c: &Rational) -> Term {
    let mut body: Option<Term> = None;
    for (a, e) in m {
        let f = if *e == 1 {
            a.to_term()
        } else {
            Term::pow(a.to_term(), *e)
        };
        body = Some(match body {
            None => f,
            Some(b) => Term::mul(b, f),
        });
    }
    match body {
        None => Term::Const(c.clone()),
        Some(b) if c.is_one() => b,
        Some(b) if (-c).is_one() => Term::neg(b),
        Some(b) => Term::mul(Term::Const(c.clone()), b),
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term_with, Decls};

    fn p(s: &str) -> Poly {
        Poly::from_term(&parse_term_with(s, &Decls::default()).unwrap()).unwrap()
    }

    #[test]
    fn canonical_order_and_signs() {
        let q = p("w*w*1.5*-1 + th^2*(-13.8)");
        assert_eq!(q.to_string(), "-13.8*th^2 - 1.5*w^2");
        assert_eq!(p("(x + y)^2 - 2*x*y").to_string(), "x^2 + y^2");
        assert_eq!(p("x - x").to_string(), "0");
    }

    #[test]
    fn derivative_with_trig() {
        let q = p("sin(x)*x");
        assert_eq!(q.derivative("x").unwrap(), p("cos(x)*x + sin(x)"));
        assert_eq!(p("cos(2*x)").derivative("x").unwrap(), p("-2*sin(2*x)"));
    }

    #[test]
    fn norm_is_rejected() {
        let t = parse_term_with("norm(x, y)", &Decls::default()).unwrap();
        assert!(Poly::from_term(&t).is_err());
    }
}
