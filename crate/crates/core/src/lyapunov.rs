//! Lyapunov templates for the pendulum, their total derivatives, the
//! derivative's quadratic-form matrix and the stable-family constraints.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::eval::{eval_formula_exact, instantiate_term};
use crate::arith::poly::{Poly, PolyError};
use crate::arith::quadform::{Definiteness, QuadForm};
use crate::dynamics::PendulumParams;
use crate::syntax::{rat, Formula, HybridProgram, Rational, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LyapunovError {
    #[error("family constraints are derived for p22 = 1 only (got p22 = {0})")]
    UnsupportedP22(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateVariant {
    /// Quadratic part plus the potential term `-2c(1 - cos th)`.
    Trigonometric,
    /// Purely quadratic, for the linearized dynamics.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovTemplate {
    pub p11: Rational,
    pub p12: Rational,
    pub p22: Rational,
    pub variant: TemplateVariant,
}

impl LyapunovTemplate {
    /// Template with `p22 = 1` and `p11` resolved from the cross-term
    /// equality.
    pub fn resolved(params: &PendulumParams, p12: Rational, variant: TemplateVariant) -> Self {
        let p11 = resolve_p11(&ad_coefficient(params, variant), &params.b, &p12);
        LyapunovTemplate {
            p11,
            p12,
            p22: Rational::one(),
            variant,
        }
    }

    pub fn values(&self) -> BTreeMap<String, Rational> {
        [
            ("p11".to_string(), self.p11.clone()),
            ("p12".to_string(), self.p12.clone()),
            ("p22".to_string(), self.p22.clone()),
        ]
        .into()
    }
}

/// `a` for the trigonometric variant, `d` for the quadratic one.
pub fn ad_coefficient(params: &PendulumParams, variant: TemplateVariant) -> Rational {
    match variant {
        TemplateVariant::Trigonometric => params.a.clone(),
        TemplateVariant::Quadratic => params.d.clone(),
    }
}

fn ad_name(variant: TemplateVariant) -> &'static str {
    match variant {
        TemplateVariant::Trigonometric => "a",
        TemplateVariant::Quadratic => "d",
    }
}

fn th() -> Term {
    Term::var("th")
}

fn w() -> Term {
    Term::var("w")
}

fn scale(params: &PendulumParams) -> Rational {
    &params.m * &params.l * &params.l / rat(2)
}

/// `p11 th^2 + 2 p12 th w + p22 w^2` with the given coefficient terms.
fn quadratic_part(p11: Term, p12: Term, p22: Term) -> Term {
    Term::add(
        Term::add(
            Term::mul(p11, Term::pow(th(), 2)),
            Term::mul(Term::mul(Term::int(2), p12), Term::mul(th(), w())),
        ),
        Term::mul(p22, Term::pow(w(), 2)),
    )
}

/// `(m l^2/2)(p11 th^2 + 2 p12 th w + p22 w^2 - 2c(1 - cos th))`.
pub fn template_trig(p: &LyapunovTemplate, params: &PendulumParams) -> Term {
    let potential = Term::mul(
        Term::mul(Term::int(2), Term::Const(params.c.clone())),
        Term::sub(Term::one(), Term::cos(th())),
    );
    Term::mul(
        Term::Const(scale(params)),
        Term::sub(
            quadratic_part(
                Term::Const(p.p11.clone()),
                Term::Const(p.p12.clone()),
                Term::Const(p.p22.clone()),
            ),
            potential,
        ),
    )
}

/// `(m l^2/2)(-(d + b p12) th^2 + 2 p12 th w + w^2)`.
pub fn template_quad(p: &LyapunovTemplate, params: &PendulumParams) -> Term {
    let p11 = Term::neg(Term::add(
        Term::Const(params.d.clone()),
        Term::mul(Term::Const(params.b.clone()), Term::Const(p.p12.clone())),
    ));
    Term::mul(
        Term::Const(scale(params)),
        quadratic_part(p11, Term::Const(p.p12.clone()), Term::one()),
    )
}

/// The quadratic template over named parameters `m, l, d, b, p12`.
pub fn template_quad_symbolic() -> Term {
    let s = Term::div(
        Term::mul(Term::param("m"), Term::pow(Term::param("l"), 2)),
        rat(2),
    );
    let p11 = Term::neg(Term::add(
        Term::param("d"),
        Term::mul(Term::param("b"), Term::param("p12")),
    ));
    Term::mul(s, quadratic_part(p11, Term::param("p12"), Term::one()))
}

/// `grad V . f`, normalized to a canonical polynomial.
pub fn total_derivative(v: &Term, prog: &HybridProgram) -> Result<Term, PolyError> {
    Ok(Poly::from_term(v)?.lie_derivative(prog)?.to_term())
}

/// Replaces parameters in the program's right-hand sides by their values.
pub fn instantiate_program(
    prog: &HybridProgram,
    values: &BTreeMap<String, Rational>,
) -> HybridProgram {
    HybridProgram {
        odes: prog
            .odes
            .iter()
            .map(|o| crate::syntax::Ode {
                var: o.var.clone(),
                rhs: instantiate_term(&o.rhs, values),
            })
            .collect(),
        domain: prog.domain.clone(),
    }
}

/// Matrix `Q` with `V' = (m l^2/2) x'Qx` (plus the sine term for the
/// trigonometric variant):
/// `[[2 a p12, p11 + b p12 + a p22], [., 2(p12 + b p22)]]`, `a` read as `d`
/// for the quadratic variant.
pub fn q_matrix(p: &LyapunovTemplate, params: &PendulumParams) -> QuadForm {
    let a = ad_coefficient(params, p.variant);
    let b = &params.b;
    QuadForm::new(
        ["th", "w"],
        rat(2) * &a * &p.p12,
        &p.p11 + b * &p.p12 + &a * &p.p22,
        rat(2) * (&p.p12 + b * &p.p22),
    )
}

/// Matrix of the quadratic part of V (without the `m l^2/2` factor).
pub fn v_matrix(p: &LyapunovTemplate) -> QuadForm {
    QuadForm::new(["th", "w"], p.p11.clone(), p.p12.clone(), p.p22.clone())
}

/// `-a - b p12` (with `d` in place of `a` for the quadratic variant).
pub fn resolve_p11(ad: &Rational, b: &Rational, p12: &Rational) -> Rational {
    -ad - b * p12
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyConstraints {
    pub inequalities: Vec<Formula>,
    pub equality: Formula,
    pub wf: Formula,
}

fn p(name: &str) -> Term {
    Term::param(name)
}

/// The four family inequalities over parameters `p11, p12, b`.
///
/// `-p11/p12 < b` is stated multiplied through by `p12 > 0` as
/// `-p11 < b*p12`, since division is by constants only.
pub fn family_inequalities() -> Vec<Formula> {
    vec![
        Formula::gt(p("p11"), Term::pow(p("p12"), 2)),
        Formula::gt(p("p12"), Term::zero()),
        Formula::lt(Term::neg(p("p11")), Term::mul(p("b"), p("p12"))),
        Formula::lt(p("b"), Term::neg(p("p12"))),
    ]
}

/// `wf`: family inequalities, positive `g, l, m`, negative `a, b, c, d`.
pub fn build_wf() -> Formula {
    let mut parts = family_inequalities();
    for n in ["g", "l", "m"] {
        parts.push(Formula::gt(p(n), Term::zero()));
    }
    for n in ["a", "b", "c", "d"] {
        parts.push(Formula::lt(p(n), Term::zero()));
    }
    Formula::conj(parts)
}

pub fn family_constraints(t: &LyapunovTemplate) -> Result<FamilyConstraints, LyapunovError> {
    if !t.p22.is_one() {
        return Err(LyapunovError::UnsupportedP22(t.p22.to_string()));
    }
    let ad = ad_name(t.variant);
    let equality = Formula::eq(
        p(ad),
        Term::sub(Term::neg(p("p11")), Term::mul(p("b"), p("p12"))),
    );
    Ok(FamilyConstraints {
        inequalities: family_inequalities(),
        equality,
        wf: build_wf(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctCheck {
    pub formula: Formula,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub wf: Vec<ConjunctCheck>,
    pub equality: ConjunctCheck,
    /// `0 < p12 < sqrt(p11)`, reported separately from wf.
    pub strict_p12_bound: bool,
    pub member: bool,
    pub v_form: Option<Definiteness>,
    pub q_form: Option<Definiteness>,
}

impl MembershipReport {
    pub fn failing(&self) -> Vec<&Formula> {
        self.wf
            .iter()
            .chain(std::iter::once(&self.equality))
            .filter(|c| !c.holds)
            .map(|c| &c.formula)
            .collect()
    }
}

/// All parameter values a proof or check needs, keyed by name.
pub fn problem_values(t: &LyapunovTemplate, params: &PendulumParams) -> BTreeMap<String, Rational> {
    let mut v = params.values();
    v.extend(t.values());
    v
}

pub fn check_membership(
    t: &LyapunovTemplate,
    params: &PendulumParams,
) -> Result<MembershipReport, LyapunovError> {
    let fc = family_constraints(t)?;
    let env = problem_values(t, params);
    let check = |f: &Formula| ConjunctCheck {
        formula: f.clone(),
        holds: eval_formula_exact(f, &env).unwrap_or(false),
    };
    let wf: Vec<ConjunctCheck> = fc.wf.conjuncts().into_iter().map(check).collect();
    let equality = check(&fc.equality);
    // p12 < sqrt(p11) iff p12^2 < p11 once p12 > 0
    let strict_p12_bound = t.p12 > Rational::zero() && &t.p12 * &t.p12 < t.p11;
    let member = wf.iter().all(|c| c.holds) && equality.holds;
    let (v_form, q_form) = if member {
        (
            Some(v_matrix(t).definiteness()),
            Some(q_matrix(t, params).definiteness()),
        )
    } else {
        (None, None)
    };
    Ok(MembershipReport {
        wf,
        equality,
        strict_p12_bound,
        member,
        v_form,
        q_form,
    })
}

pub fn describe(c: &ConjunctCheck) -> String {
    let mark = if c.holds { "ok  " } else { "FAIL" };
    format!("{mark} {}", c.formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ratio;

    fn worked() -> PendulumParams {
        PendulumParams::new(rat(1), rat(1), ratio(1, 2), ratio(49, 5), rat(-4), rat(-3)).unwrap()
    }

    #[test]
    fn resolved_template_matches_hand_values() {
        let t = LyapunovTemplate::resolved(&worked(), rat(1), TemplateVariant::Quadratic);
        assert_eq!(t.p11, ratio(163, 10));
        let q = q_matrix(&t, &worked());
        assert_eq!((q.p.clone(), q.q.clone(), q.r.clone()), (ratio(-276, 10), rat(0), rat(-3)));
    }

    #[test]
    fn wf_has_eleven_conjuncts() {
        assert_eq!(build_wf().conjuncts().len(), 11);
    }

    #[test]
    fn p22_other_than_one_is_rejected() {
        let mut t = LyapunovTemplate::resolved(&worked(), rat(1), TemplateVariant::Quadratic);
        t.p22 = rat(2);
        assert!(family_constraints(&t).is_err());
    }
}
