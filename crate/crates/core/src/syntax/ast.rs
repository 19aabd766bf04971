//! Abstract syntax for terms, formulas and purely continuous hybrid programs.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    /// State or bound variable.
    Var(String),
    /// Model parameter (symbolic constant).
    Param(String),
    Const(Rational),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Division by a nonzero rational constant only.
    Div(Box<Term>, Rational),
    Pow(Box<Term>, u32),
    Sin(Box<Term>),
    Cos(Box<Term>),
    /// Euclidean norm of a state vector.
    Norm(Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn param(name: &str) -> Term {
        Term::Param(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(rat(n))
    }

    pub fn num(r: Rational) -> Term {
        Term::Const(r)
    }

    pub fn zero() -> Term {
        Term::Const(Rational::zero())
    }

    pub fn one() -> Term {
        Term::Const(Rational::one())
    }

    pub fn neg(t: Term) -> Term {
        Term::Neg(Box::new(t))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, d: Rational) -> Term {
        assert!(!d.is_zero(), "division by zero constant");
        Term::Div(Box::new(a), d)
    }

    pub fn pow(a: Term, e: u32) -> Term {
        Term::Pow(Box::new(a), e)
    }

    pub fn sin(a: Term) -> Term {
        Term::Sin(Box::new(a))
    }

    pub fn cos(a: Term) -> Term {
        Term::Cos(Box::new(a))
    }

    pub fn norm_of(names: &[String]) -> Term {
        Term::Norm(names.iter().map(|n| Term::Var(n.clone())).collect())
    }

    /// Names of variables and parameters occurring in the term.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    pub fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(n) | Term::Param(n) => {
                out.insert(n.clone());
            }
            Term::Const(_) => {}
            Term::Neg(t) | Term::Div(t, _) | Term::Pow(t, _) | Term::Sin(t) | Term::Cos(t) => {
                t.collect_names(out)
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Term::Norm(ts) => ts.iter().for_each(|t| t.collect_names(out)),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.names().contains(name)
    }

    pub fn has_trig(&self) -> bool {
        match self {
            Term::Sin(_) | Term::Cos(_) => true,
            Term::Var(_) | Term::Param(_) | Term::Const(_) => false,
            Term::Neg(t) | Term::Div(t, _) | Term::Pow(t, _) => t.has_trig(),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.has_trig() || b.has_trig(),
            Term::Norm(ts) => ts.iter().any(Term::has_trig),
        }
    }

    pub fn has_norm(&self) -> bool {
        match self {
            Term::Norm(_) => true,
            Term::Var(_) | Term::Param(_) | Term::Const(_) => false,
            Term::Neg(t) | Term::Div(t, _) | Term::Pow(t, _) | Term::Sin(t) | Term::Cos(t) => {
                t.has_norm()
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.has_norm() || b.has_norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Ne => "!=",
        }
    }

    /// The operator `op'` with `!(a op b) <-> a op' b`.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    /// The operator `op'` with `a op b <-> b op' a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
            other => other,
        }
    }

    pub fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Ne => a != b,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BallKind {
    /// `x in B_p`: closed ball.
    Closed,
    /// `x in dB_p`: boundary sphere.
    Boundary,
    /// `x in coB_p`: complement.
    Complement,
}

impl BallKind {
    pub fn prefix(self) -> &'static str {
        match self {
            BallKind::Closed => "B_",
            BallKind::Boundary => "dB_",
            BallKind::Complement => "coB_",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ode {
    pub var: String,
    pub rhs: Term,
}

/// System of ODEs with an evolution-domain constraint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HybridProgram {
    pub odes: Vec<Ode>,
    pub domain: Box<Formula>,
}

impl HybridProgram {
    pub fn new(odes: Vec<(&str, Term)>) -> HybridProgram {
        HybridProgram {
            odes: odes
                .into_iter()
                .map(|(v, rhs)| Ode {
                    var: v.to_string(),
                    rhs,
                })
                .collect(),
            domain: Box::new(Formula::True),
        }
    }

    pub fn state_vars(&self) -> Vec<String> {
        self.odes.iter().map(|o| o.var.clone()).collect()
    }

    pub fn rhs_of(&self, var: &str) -> Option<&Term> {
        self.odes.iter().find(|o| o.var == var).map(|o| &o.rhs)
    }

    /// Same ODE with `extra` conjoined to the domain (`true` is dropped).
    pub fn with_domain_conjunct(&self, extra: Formula) -> HybridProgram {
        let domain = match *self.domain {
            Formula::True => extra,
            ref q => Formula::and(q.clone(), extra),
        };
        HybridProgram {
            odes: self.odes.clone(),
            domain: Box::new(domain),
        }
    }

    pub fn without_domain(&self) -> HybridProgram {
        HybridProgram {
            odes: self.odes.clone(),
            domain: Box::new(Formula::True),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Box(HybridProgram, Box<Formula>),
    Diamond(HybridProgram, Box<Formula>),
    /// Sugar: state vector membership in a ball, its boundary or complement.
    InBall {
        vars: Vec<String>,
        kind: BallKind,
        radius: Term,
    },
    /// Sugar: `_p[P]_q` (box) or `_p<P>_q` (diamond).
    BallModal {
        pre: Term,
        program: HybridProgram,
        post: Term,
        diamond: bool,
    },
}

impl Formula {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Lt, a, b)
    }

    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Le, a, b)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Eq, a, b)
    }

    pub fn ge(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Ge, a, b)
    }

    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Gt, a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn boxed(p: HybridProgram, f: Formula) -> Formula {
        Formula::Box(p, Box::new(f))
    }

    pub fn diamond(p: HybridProgram, f: Formula) -> Formula {
        Formula::Diamond(p, Box::new(f))
    }

    /// Right-nested conjunction; `true` for an empty list.
    pub fn conj(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter().rev();
        match it.next() {
            None => Formula::True,
            Some(last) => it.fold(last, |acc, f| Formula::and(f, acc)),
        }
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            f => vec![f],
        }
    }

    /// Free variable/parameter names.
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<String>, out: &mut BTreeSet<String>) {
        let add_term = |t: &Term, bound: &BTreeSet<String>, out: &mut BTreeSet<String>| {
            for n in t.names() {
                if !bound.contains(&n) {
                    out.insert(n);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                let fresh = bound.insert(v.clone());
                f.collect_free(bound, out);
                if fresh {
                    bound.remove(v);
                }
            }
            Formula::Box(p, f) | Formula::Diamond(p, f) => {
                // Free in the initial state: everything the ODE reads plus the
                // state itself; inside, state variables are rebound.
                for ode in &p.odes {
                    if !bound.contains(&ode.var) {
                        out.insert(ode.var.clone());
                    }
                    add_term(&ode.rhs, bound, out);
                }
                p.domain.collect_free(bound, out);
                f.collect_free(bound, out);
            }
            Formula::InBall { vars, radius, .. } => {
                for v in vars {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
                add_term(radius, bound, out);
            }
            Formula::BallModal {
                pre, program, post, ..
            } => {
                let state: Vec<String> = program.state_vars();
                let mut inner = bound.clone();
                inner.extend(state);
                add_term(pre, &inner, out);
                add_term(post, &inner, out);
                for ode in &program.odes {
                    add_term(&ode.rhs, &inner, out);
                }
                program.domain.collect_free(&mut inner, out);
            }
        }
    }

    pub fn has_modality(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) | Formula::InBall { .. } => false,
            Formula::Box(..) | Formula::Diamond(..) | Formula::BallModal { .. } => true,
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => f.has_modality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.has_modality() || b.has_modality()
            }
        }
    }

    pub fn has_trig(&self) -> bool {
        let mut found = false;
        self.visit_terms(&mut |t| found |= t.has_trig());
        found
    }

    /// Visits every term, including those inside programs.
    pub fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            Formula::Box(p, g) | Formula::Diamond(p, g) => {
                for o in &p.odes {
                    f(&o.rhs);
                }
                p.domain.visit_terms(f);
                g.visit_terms(f);
            }
            Formula::InBall { radius, .. } => f(radius),
            Formula::BallModal {
                pre, program, post, ..
            } => {
                f(pre);
                f(post);
                for o in &program.odes {
                    f(&o.rhs);
                }
                program.domain.visit_terms(f);
            }
        }
    }

    /// Complement of a comparison or negation, if syntactically available.
    pub fn complement(&self) -> Option<Formula> {
        match self {
            Formula::Cmp(op, a, b) => Some(Formula::Cmp(op.negate(), a.clone(), b.clone())),
            Formula::Not(f) => Some((**f).clone()),
            _ => None,
        }
    }

    /// `self` and `other` are syntactic complements of each other.
    pub fn is_complement_of(&self, other: &Formula) -> bool {
        match (self, other) {
            (Formula::Not(a), b) | (b, Formula::Not(a)) if **a == *b => true,
            (Formula::Cmp(..), Formula::Cmp(..)) => self.complement().as_ref() == Some(other),
            _ => false,
        }
    }
}

/// `A_1, ..., A_n |- B_1, ..., B_m`; order matters, duplicates allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct Sequent {
    pub antecedents: Vec<Formula>,
    pub succedents: Vec<Formula>,
}

impl Sequent {
    pub fn new(antecedents: Vec<Formula>, succedents: Vec<Formula>) -> Sequent {
        Sequent {
            antecedents,
            succedents,
        }
    }

    pub fn has_modality(&self) -> bool {
        self.antecedents
            .iter()
            .chain(self.succedents.iter())
            .any(Formula::has_modality)
    }

    pub fn free_names(&self) -> BTreeSet<String> {
        self.antecedents
            .iter()
            .chain(self.succedents.iter())
            .flat_map(|f| f.free_names())
            .collect()
    }

    /// The validity formula `/\ A -> \/ B`.
    pub fn as_formula(&self) -> Formula {
        let lhs = Formula::conj(self.antecedents.clone());
        let mut it = self.succedents.iter().rev().cloned();
        let rhs = match it.next() {
            None => Formula::False,
            Some(last) => it.fold(last, |acc, f| Formula::or(f, acc)),
        };
        if self.antecedents.is_empty() {
            rhs
        } else {
            Formula::implies(lhs, rhs)
        }
    }
}
