//! Pattern oracle for first-order goals: recognized obligation shapes are
//! closed with a witness and evidence, everything else goes to the falsifier.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bounds::Bounds;
use super::eval::{eval_formula_exact, instantiate};
use super::falsify::{falsify_sequent, norm_constraint, possibly, Assignment, FalsifyError};
use super::interval::decide_formula;
use super::poly::{rational_to_f64, Atom, Poly};
use super::quadform::{Definiteness, QuadForm};
use crate::syntax::{expand_sequent, format_rational, CmpOp, Formula, Rational, Sequent, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pattern {
    Ground,
    LiteralEntailment,
    QuadraticSign,
    LevelsetK,
    DeltaBall,
    AnnulusMin,
    ProgressP,
    LevelsetEnclosure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WitnessRule {
    /// `coeff * of^2`.
    ScaledSquare { coeff: Rational, of: Term },
    /// `shrink * min(eps, sqrt(k / lambda_hi))`, or `shrink * eps` when the
    /// form has no positive eigenvalue.
    DeltaBall {
        eps: Term,
        k: Term,
        lambda_hi: Option<Rational>,
        shrink: Rational,
    },
    Constant(Rational),
}

impl WitnessRule {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Option<f64> {
        let term = |t: &Term| super::eval::eval_term_f64(t, lookup);
        match self {
            WitnessRule::ScaledSquare { coeff, of } => Some(rational_to_f64(coeff) * term(of)?.powi(2)),
            WitnessRule::DeltaBall {
                eps,
                k,
                lambda_hi,
                shrink,
            } => {
                let e = term(eps)?;
                let r = match lambda_hi {
                    Some(l) => e.min((term(k)? / rational_to_f64(l)).sqrt()),
                    None => e,
                };
                Some(rational_to_f64(shrink) * r)
            }
            WitnessRule::Constant(c) => Some(rational_to_f64(c)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WitnessRule::ScaledSquare { coeff, of } => {
                format!("{} * ({of})^2", format_sig(rational_to_f64(coeff)))
            }
            WitnessRule::DeltaBall {
                eps,
                k,
                lambda_hi: Some(l),
                ..
            } => format!(
                "(1 - 2^-10) * min({eps}, sqrt(({k}) / {}))",
                format_sig(rational_to_f64(l))
            ),
            WitnessRule::DeltaBall { eps, .. } => format!("(1 - 2^-10) * {eps}"),
            WitnessRule::Constant(c) => format_rational(c),
        }
    }
}

fn format_sig(x: f64) -> String {
    format!("{x:.6e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub var: String,
    pub rule: WitnessRule,
    pub text: String,
    /// Value with every free name of the rule set to its reference value
    /// (0.1 for radii).
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub pattern: Pattern,
    pub witness: Option<Witness>,
    pub evidence: String,
    pub samples_checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Valid(Certificate),
    CounterExample {
        assignment: Assignment,
        diagnostics: Vec<String>,
    },
    Unknown {
        reason: String,
        diagnostics: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("goal contains a modality")]
    Modality,
}

/// Grid size for witness verification.
pub const GRID: usize = 10_000;
/// Reference radius for reported witness values.
pub const REFERENCE_EPS: f64 = 0.1;
const SHRINK_NUM: i64 = 1023;
const SHRINK_DEN: i64 = 1024;

/// Outcome of one matcher: not this shape, or this shape but unprovable.
enum Miss {
    NoMatch,
    Reason(String),
}

type Attempt = Result<Certificate, Miss>;

/// Quadratic form of `t` over exactly the variables `x, y`.
pub fn quad_of(t: &Term, x: &str, y: &str) -> Option<QuadForm> {
    let p = Poly::from_term(t).ok()?;
    let ok = p.atoms().iter().all(|a| matches!(a, Atom::Var(n) if n == x || n == y));
    if !ok {
        return None;
    }
    QuadForm::from_poly(&p, [x, y])
}

fn is_zero(t: &Term) -> bool {
    matches!(t, Term::Const(c) if c.is_zero())
}

/// `e > 0` is literally among the antecedents, or `e` is a positive constant.
fn known_positive(ante: &[Formula], e: &Term) -> bool {
    if let Term::Const(c) = e {
        return c.is_positive();
    }
    ante.iter().flat_map(|a| a.conjuncts()).any(|a| match a {
        Formula::Cmp(CmpOp::Gt, l, r) => l == e && is_zero(r),
        Formula::Cmp(CmpOp::Lt, l, r) => is_zero(l) && r == e,
        _ => false,
    })
}

/// Does `x op1 0` entail `x op2 0`?
fn entails(op1: CmpOp, op2: CmpOp) -> bool {
    use CmpOp::*;
    op1 == op2
        || matches!(
            (op1, op2),
            (Lt, Le) | (Lt, Ne) | (Gt, Ge) | (Gt, Ne) | (Eq, Le) | (Eq, Ge)
        )
}

fn certificate(pattern: Pattern, evidence: String) -> Certificate {
    Certificate {
        pattern,
        witness: None,
        evidence,
        samples_checked: 0,
    }
}

fn ground(s: &Formula, bounds: &Bounds) -> Attempt {
    match decide_formula(s, &bounds.param_intervals()) {
        Some(true) if s.free_names().iter().all(|n| bounds.params.contains_key(n)) => Ok(certificate(
            Pattern::Ground,
            format!("`{s}` holds by exact interval evaluation over the parameter box"),
        )),
        Some(false) => Err(Miss::Reason(format!("`{s}` is false over the parameter box"))),
        _ => Err(Miss::NoMatch),
    }
}

fn literal(s: &Formula, ante: &[Formula]) -> Attempt {
    let Formula::Cmp(op_s, a, b) = s else {
        return Err(Miss::NoMatch);
    };
    let diff = |l: &Term, r: &Term| Poly::from_term(&Term::sub(l.clone(), r.clone())).ok();
    let ds = diff(a, b);
    for f in ante.iter().flat_map(|f| f.conjuncts()) {
        let Formula::Cmp(op_a, c, d) = f else {
            continue;
        };
        let op = if (a, b) == (c, d) {
            Some(*op_a)
        } else if (a, b) == (d, c) {
            Some(op_a.flip())
        } else {
            match (&ds, diff(c, d)) {
                (Some(x), Some(y)) if *x == y => Some(*op_a),
                (Some(x), Some(y)) if *x == y.neg() => Some(op_a.flip()),
                _ => None,
            }
        };
        if let Some(op) = op {
            if entails(op, *op_s) {
                return Ok(certificate(
                    Pattern::LiteralEntailment,
                    format!("antecedent `{f}` entails `{s}`"),
                ));
            }
        }
    }
    Err(Miss::NoMatch)
}

/// Deterministic points on the unit circle.
fn circle(i: usize, n: usize) -> (f64, f64) {
    let a = std::f64::consts::TAU * (i as f64 + 0.5) / n as f64;
    (a.cos(), a.sin())
}

fn quadratic_sign(s: &Formula) -> Attempt {
    let Formula::Cmp(op, a, b) = s else {
        return Err(Miss::NoMatch);
    };
    let Ok(p) = Poly::from_term(&Term::sub(a.clone(), b.clone())) else {
        return Err(Miss::NoMatch);
    };
    let vars: Vec<String> = p.atoms().iter().filter_map(|a| a.name().map(str::to_string)).collect();
    if vars.is_empty() || vars.len() > 2 || p.atoms().iter().any(|a| !matches!(a, Atom::Var(_))) {
        return Err(Miss::NoMatch);
    }
    let x = vars[0].as_str();
    let y = vars.get(1).map(String::as_str).unwrap_or("_");
    let Some(q) = QuadForm::from_poly(&p, [x, y]) else {
        return Err(Miss::NoMatch);
    };
    let d = q.definiteness();
    use Definiteness::*;
    let ok = match op {
        CmpOp::Le => matches!(d, NegativeDefinite | NegativeSemidefinite | Zero),
        CmpOp::Ge => matches!(d, PositiveDefinite | PositiveSemidefinite | Zero),
        _ => return Err(Miss::NoMatch),
    };
    if !ok {
        return Err(Miss::Reason(format!("`{s}`: the form {} is {d:?}", p.to_term())));
    }
    for i in 0..GRID {
        let (u, v) = circle(i, GRID);
        if !possibly(*op, q.eval_f64(u, v), 0.0) {
            return Err(Miss::Reason(format!("`{s}` failed the grid check at ({u}, {v})")));
        }
    }
    Ok(Certificate {
        pattern: Pattern::QuadraticSign,
        witness: None,
        evidence: format!(
            "lhs - rhs = {} is {d:?} by Sylvester (det = {})",
            p.to_term(),
            format_rational(&q.det())
        ),
        samples_checked: GRID,
    })
}

/// `exists z (z > 0? & z < E? & forall x forall y (norm guard -> post))`.
struct ExistsShape<'a> {
    z: &'a str,
    positive: bool,
    upper: Option<&'a Term>,
    x: &'a str,
    y: &'a str,
    region: Vec<(CmpOp, Term)>,
    post: &'a Formula,
}

fn exists_shape(s: &Formula) -> Option<ExistsShape<'_>> {
    let Formula::Exists(z, body) = s else {
        return None;
    };
    let zt = Term::Var(z.clone());
    let mut positive = false;
    let mut upper = None;
    let mut inner = None;
    for c in body.conjuncts() {
        match c {
            Formula::Cmp(CmpOp::Gt, l, r) if *l == zt && is_zero(r) => positive = true,
            Formula::Cmp(CmpOp::Lt, l, r) if *l == zt && !r.mentions(z) => upper = Some(r),
            Formula::Forall(..) if inner.is_none() => inner = Some(c),
            _ => return None,
        }
    }
    let Formula::Forall(x, f) = inner? else {
        return None;
    };
    let Formula::Forall(y, f) = f.as_ref() else {
        return None;
    };
    let Formula::Implies(guard, post) = f.as_ref() else {
        return None;
    };
    let region = guard
        .conjuncts()
        .into_iter()
        .map(|g| norm_constraint(g, x, y))
        .collect::<Option<Vec<_>>>()?;
    Some(ExistsShape {
        z,
        positive,
        upper,
        x,
        y,
        region,
        post,
    })
}

/// Radii of a norm region: `(circle, inner, outer)`.
fn radii(region: &[(CmpOp, Term)]) -> Option<(Option<&Term>, Option<&Term>, Option<&Term>)> {
    let (mut eq, mut lo, mut hi) = (None, None, None);
    for (op, e) in region {
        let slot = match op {
            CmpOp::Eq => &mut eq,
            CmpOp::Gt | CmpOp::Ge => &mut lo,
            CmpOp::Lt | CmpOp::Le => &mut hi,
            CmpOp::Ne => return None,
        };
        if slot.is_some() {
            return None;
        }
        *slot = Some(e);
    }
    Some((eq, lo, hi))
}

fn reference_lookup(n: &str) -> Option<f64> {
    let _ = n;
    Some(REFERENCE_EPS)
}

fn eval_ref(t: &Term) -> Option<f64> {
    super::eval::eval_term_f64(t, &reference_lookup)
}

/// Checks `pred` on a deterministic grid over `lo <= |x| <= hi` (both
/// possibly excluded), returning the number of points checked.
fn grid_check(
    lo: f64,
    hi: f64,
    lo_open: bool,
    hi_open: bool,
    pred: &dyn Fn(f64, f64) -> bool,
) -> Result<usize, (f64, f64)> {
    let (rings, spokes) = if lo == hi { (1, GRID) } else { (100, GRID / 100) };
    let lo = if lo_open { lo + (hi - lo) * 1e-9 } else { lo };
    let hi = if hi_open { hi - (hi - lo) * 1e-9 } else { hi };
    for i in 0..rings {
        let r = if rings == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (rings - 1) as f64
        };
        for j in 0..spokes {
            let (u, v) = circle(j, spokes);
            if !pred(r * u, r * v) {
                return Err((r * u, r * v));
            }
        }
    }
    Ok(rings * spokes)
}

/// LevelsetK, AnnulusMin and ProgressP: a lower bound `z` for a quadratic
/// over a norm region.
fn lower_bound(s: &Formula, ante: &[Formula]) -> Attempt {
    let sh = exists_shape(s).ok_or(Miss::NoMatch)?;
    let zt = Term::Var(sh.z.to_string());
    let f = match sh.post {
        Formula::Cmp(CmpOp::Ge, f, r) if *r == zt => f,
        Formula::Cmp(CmpOp::Le, l, f) if *l == zt => f,
        _ => return Err(Miss::NoMatch),
    };
    if sh.upper.is_some() || f.mentions(sh.z) || sh.region.iter().any(|(_, e)| e.mentions(sh.z)) {
        return Err(Miss::NoMatch);
    }
    let (circ, lo, hi) = radii(&sh.region).ok_or(Miss::NoMatch)?;
    let pattern = match (circ, lo, sh.positive) {
        (Some(_), _, _) => Pattern::LevelsetK,
        (None, Some(_), true) => Pattern::ProgressP,
        _ => Pattern::AnnulusMin,
    };
    let q = quad_of(f, sh.x, sh.y).ok_or_else(|| {
        Miss::Reason(format!("{pattern:?}: `{f}` is not a quadratic form in {}, {}", sh.x, sh.y))
    })?;
    let inner = circ.or(lo);
    let outer = circ.or(hi);
    let l = q.lambda_min_lower();
    let rule = if l.is_positive() {
        match inner {
            Some(e) if known_positive(ante, e) => WitnessRule::ScaledSquare {
                coeff: l.clone(),
                of: e.clone(),
            },
            Some(e) => {
                return Err(Miss::Reason(format!("{pattern:?}: `{e} > 0` is not among the antecedents")))
            }
            None if sh.positive => {
                return Err(Miss::Reason(format!("{pattern:?}: no inner radius keeps the bound positive")))
            }
            None => WitnessRule::Constant(Rational::zero()),
        }
    } else if sh.positive {
        return Err(Miss::Reason(format!(
            "{pattern:?}: the form of `{f}` is {:?}",
            q.definiteness()
        )));
    } else {
        match outer {
            Some(r) => WitnessRule::ScaledSquare {
                coeff: l.clone(),
                of: r.clone(),
            },
            None => return Err(Miss::Reason(format!("{pattern:?}: region is unbounded"))),
        }
    };
    let zref = rule.eval(&reference_lookup).ok_or(Miss::NoMatch)?;
    let r_in = inner.map_or(Some(0.0), eval_ref).ok_or(Miss::NoMatch)?;
    let r_out = match outer {
        Some(t) => eval_ref(t).ok_or(Miss::NoMatch)?,
        None => r_in.max(1.0),
    };
    let lo_open = matches!(sh.region.iter().find(|(op, _)| *op == CmpOp::Gt), Some(_));
    let hi_open = matches!(sh.region.iter().find(|(op, _)| *op == CmpOp::Lt), Some(_));
    let checked = if r_in <= r_out {
        grid_check(r_in, r_out, lo_open, hi_open, &|u, v| possibly(CmpOp::Ge, q.eval_f64(u, v), zref))
            .map_err(|(u, v)| Miss::Reason(format!("{pattern:?}: witness fails at ({u}, {v})")))?
    } else {
        0
    };
    let text = format!("{} = {}", sh.z, rule.describe());
    Ok(Certificate {
        pattern,
        evidence: format!(
            "`{f}` has form {:?} with certified lambda_min >= {}; on the region it is >= lambda_min * |x|^2",
            q.definiteness(),
            format_sig(rational_to_f64(&l))
        ),
        witness: Some(Witness {
            var: sh.z.to_string(),
            rule,
            text,
            reference: Some(zref),
        }),
        samples_checked: checked,
    })
}

/// `exists del (del > 0 & del < E & forall x y (norm <= del -> V < K))`.
fn delta_ball(s: &Formula, ante: &[Formula]) -> Attempt {
    let sh = exists_shape(s).ok_or(Miss::NoMatch)?;
    let zt = Term::Var(sh.z.to_string());
    let (Some(e), true) = (sh.upper, sh.positive) else {
        return Err(Miss::NoMatch);
    };
    let (v, k) = match sh.post {
        Formula::Cmp(CmpOp::Lt | CmpOp::Le, v, k) => (v, k),
        _ => return Err(Miss::NoMatch),
    };
    match radii(&sh.region) {
        Some((None, None, Some(r))) if *r == zt => {}
        _ => return Err(Miss::NoMatch),
    }
    if v.mentions(sh.z) || k.mentions(sh.z) || k.mentions(sh.x) || k.mentions(sh.y) {
        return Err(Miss::NoMatch);
    }
    let q = quad_of(v, sh.x, sh.y)
        .ok_or_else(|| Miss::Reason(format!("DeltaBall: `{v}` is not a quadratic form")))?;
    for t in [e, k] {
        if !known_positive(ante, t) {
            return Err(Miss::Reason(format!("DeltaBall: `{t} > 0` is not among the antecedents")));
        }
    }
    let hi = q.lambda_max_upper();
    let lambda_hi = hi.is_positive().then_some(hi);
    let rule = WitnessRule::DeltaBall {
        eps: e.clone(),
        k: k.clone(),
        lambda_hi: lambda_hi.clone(),
        shrink: Rational::new(SHRINK_NUM.into(), SHRINK_DEN.into()),
    };
    // reference k: the levelset value lambda_min * eps^2 where that is positive
    let lmin = rational_to_f64(&q.lambda_min_lower());
    let kref = if lmin > 0.0 { lmin * REFERENCE_EPS.powi(2) } else { REFERENCE_EPS };
    let (en, kn) = (e.clone(), k.clone());
    let lookup = |n: &str| {
        if Term::Var(n.to_string()) == kn && en != kn {
            Some(kref)
        } else {
            Some(REFERENCE_EPS)
        }
    };
    let dref = rule.eval(&lookup).ok_or(Miss::NoMatch)?;
    let kval = super::eval::eval_term_f64(k, &lookup).ok_or(Miss::NoMatch)?;
    let strict = matches!(sh.post, Formula::Cmp(CmpOp::Lt, ..));
    let op = if strict { CmpOp::Lt } else { CmpOp::Le };
    let checked = grid_check(0.0, dref, false, false, &|u, w| {
        op.holds(&q.eval_f64(u, w), &kval)
    })
    .map_err(|(u, w)| Miss::Reason(format!("DeltaBall: witness fails at ({u}, {w})")))?;
    let text = format!("{} = {}", sh.z, rule.describe());
    Ok(Certificate {
        pattern: Pattern::DeltaBall,
        evidence: format!(
            "`{v}` <= lambda_max * |x|^2 with certified lambda_max <= {}; the shrink factor keeps `{v} < {k}` strict",
            lambda_hi.as_ref().map_or("0".to_string(), |l| format_sig(rational_to_f64(l)))
        ),
        witness: Some(Witness {
            var: sh.z.to_string(),
            rule,
            text,
            reference: Some(dref),
        }),
        samples_checked: checked,
    })
}

/// `norm(x,y) <= E` from `V <= K`, `forall x' y' (norm = E -> V' >= K)`,
/// `K > 0`, `E > 0` with V a quadratic form: a point outside the E-circle
/// with `V <= K` scales to a point on it with `V < K`.
fn levelset_enclosure(s: &Formula, ante: &[Formula]) -> Attempt {
    let Formula::Cmp(CmpOp::Le, Term::Norm(args), e) = s else {
        return Err(Miss::NoMatch);
    };
    let [Term::Var(x), Term::Var(y)] = args.as_slice() else {
        return Err(Miss::NoMatch);
    };
    if e.mentions(x) || e.mentions(y) {
        return Err(Miss::NoMatch);
    }
    let conj: Vec<&Formula> = ante.iter().flat_map(|a| a.conjuncts()).collect();
    for c in &conj {
        let Formula::Cmp(CmpOp::Le | CmpOp::Lt, v, k) = c else {
            continue;
        };
        if k.mentions(x) || k.mentions(y) {
            continue;
        }
        let Some(qv) = quad_of(v, x, y) else {
            continue;
        };
        let bound = conj.iter().any(|f| circle_bound(f, e, k, &qv));
        if !bound {
            continue;
        }
        for t in [e, k] {
            if !known_positive(ante, t) {
                return Err(Miss::Reason(format!(
                    "LevelsetEnclosure: `{t} > 0` is not among the antecedents"
                )));
            }
        }
        return Ok(certificate(
            Pattern::LevelsetEnclosure,
            format!(
                "`{c}` and the bound on the circle of radius {e}: V is homogeneous of degree 2, so V <= {k} forces |x| <= {e}"
            ),
        ));
    }
    Err(Miss::NoMatch)
}

/// `forall a forall b (norm(a,b) = e -> V' >= k)` with V' the form `qv`.
fn circle_bound(f: &Formula, e: &Term, k: &Term, qv: &QuadForm) -> bool {
    let Some(sh) = exists_free_forall(f) else {
        return false;
    };
    let (a, b, region, post) = sh;
    if region.len() != 1 || region[0].0 != CmpOp::Eq || region[0].1 != *e {
        return false;
    }
    let v2 = match post {
        Formula::Cmp(CmpOp::Ge, v2, k2) if k2 == k => v2,
        Formula::Cmp(CmpOp::Le, k2, v2) if k2 == k => v2,
        _ => return false,
    };
    match quad_of(v2, a, b) {
        Some(q2) => q2.p == qv.p && q2.q == qv.q && q2.r == qv.r,
        None => false,
    }
}

fn exists_free_forall(f: &Formula) -> Option<(&str, &str, Vec<(CmpOp, Term)>, &Formula)> {
    let Formula::Forall(a, f) = f else {
        return None;
    };
    let Formula::Forall(b, f) = f.as_ref() else {
        return None;
    };
    let Formula::Implies(g, post) = f.as_ref() else {
        return None;
    };
    let region = g
        .conjuncts()
        .into_iter()
        .map(|c| norm_constraint(c, a, b))
        .collect::<Option<Vec<_>>>()?;
    Some((a, b, region, post))
}

/// Ground antecedent conjuncts over parameters that are false at the
/// parameter point.
pub fn false_parameter_conjuncts(goal: &Sequent, bounds: &Bounds) -> Vec<String> {
    let Some(values) = bounds.point_values() else {
        return Vec::new();
    };
    goal.antecedents
        .iter()
        .flat_map(|a| a.conjuncts())
        .filter(|c| !c.has_modality() && c.free_names().iter().all(|n| values.contains_key(n)))
        .filter(|c| eval_formula_exact(c, &values) == Some(false))
        .map(|c| c.to_string())
        .collect()
}

/// Decides a modality-free goal. Antecedents only serve as side conditions
/// of the recognized shapes, so false parameter assumptions are never used
/// to close a goal.
pub fn decide(goal: &Sequent, bounds: &Bounds, seed: u64) -> Result<Decision, DecideError> {
    if goal.has_modality() {
        return Err(DecideError::Modality);
    }
    let goal = expand_sequent(goal);
    let diagnostics = false_parameter_conjuncts(&goal, bounds);
    let inst = match bounds.point_values() {
        Some(v) => Sequent::new(
            goal.antecedents.iter().map(|f| instantiate(f, &v)).collect(),
            goal.succedents.iter().map(|f| instantiate(f, &v)).collect(),
        ),
        None => goal.clone(),
    };
    let ante = &inst.antecedents;
    let mut reason: Option<String> = None;
    for s in &inst.succedents {
        let attempts: [&dyn Fn() -> Attempt; 6] = [
            &|| ground(s, bounds),
            &|| literal(s, ante),
            &|| quadratic_sign(s),
            &|| lower_bound(s, ante),
            &|| delta_ball(s, ante),
            &|| levelset_enclosure(s, ante),
        ];
        for attempt in attempts {
            match attempt() {
                Ok(cert) => return Ok(Decision::Valid(cert)),
                Err(Miss::Reason(r)) => {
                    reason.get_or_insert(r);
                }
                Err(Miss::NoMatch) => {}
            }
        }
    }
    match falsify_sequent(&inst, bounds, GRID, seed, None) {
        Ok(report) => {
            if let Some(mut assignment) = report.counterexample {
                if let Some(v) = bounds.point_values() {
                    for (k, x) in v {
                        assignment.entry(k).or_insert(rational_to_f64(&x));
                    }
                }
                return Ok(Decision::CounterExample {
                    assignment,
                    diagnostics,
                });
            }
        }
        Err(FalsifyError::Modality) => return Err(DecideError::Modality),
        Err(e @ FalsifyError::Unbounded(_)) => {
            reason.get_or_insert(format!("falsifier: {e}"));
        }
    }
    Ok(Decision::Unknown {
        reason: reason.unwrap_or_else(|| "no recognized obligation shape".to_string()),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::syntax::{parse_sequent_with, ratio, Decls};

    const V: &str = "8.15*th^2 + th*w + 0.5*w^2";

    fn seq(text: &str, params: &[(&str, Rational)]) -> (Sequent, Bounds) {
        let decls = Decls::with_params(params.iter().map(|p| p.0));
        let values: BTreeMap<String, Rational> =
            params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        (parse_sequent_with(text, &decls).unwrap(), Bounds::point(&values))
    }

    fn valid(text: &str) -> Certificate {
        let (s, b) = seq(text, &[]);
        match decide(&s, &b, 7).unwrap() {
            Decision::Valid(c) => c,
            other => panic!("{text}: {other:?}"),
        }
    }

    /// Independent oracle: minimum of V over a dense circle.
    fn circle_min(r: f64) -> f64 {
        (0..100_000)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 100_000.0;
                let (x, y) = (r * a.cos(), r * a.sin());
                8.15 * x * x + x * y + 0.5 * y * y
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn levelset_witness_matches_circle_minimum() {
        let c = valid(&format!(
            "eps > 0 |- \\exists k: (k > 0 & \\forall th: \\forall w: (norm(th, w) = eps -> {V} >= k))"
        ));
        assert_eq!(c.pattern, Pattern::LevelsetK);
        let k = c.witness.unwrap().reference.unwrap();
        assert!((k - circle_min(0.1)).abs() / k < 1e-6, "{k}");
        assert_eq!(c.samples_checked, GRID);
    }

    #[test]
    fn progress_bound_on_the_annulus() {
        let c = valid(
            "|- \\exists p: (p > 0 & \\forall th: \\forall w: (norm(th, w) <= 1 & norm(th, w) > 0.1 -> 13.8*th^2 + 1.5*w^2 >= p))",
        );
        assert_eq!(c.pattern, Pattern::ProgressP);
        let p = c.witness.unwrap().reference.unwrap();
        assert!((p - 0.015).abs() < 1e-12, "{p}");
    }

    #[test]
    fn delta_ball_is_inside_levelset_and_eps_ball() {
        let c = valid(&format!(
            "eps > 0, k > 0 |- \\exists del: (del > 0 & del < eps & \\forall th: \\forall w: (norm(th, w) <= del -> {V} < k))"
        ));
        assert_eq!(c.pattern, Pattern::DeltaBall);
        let d = c.witness.unwrap().reference.unwrap();
        assert!(d > 0.0 && d < 0.1);
    }

    #[test]
    fn annulus_min_readings() {
        let lit = valid(&format!(
            "|- \\exists vmin: \\forall th: \\forall w: (norm(th, w) <= 1 -> {V} >= vmin)"
        ));
        assert_eq!(lit.pattern, Pattern::AnnulusMin);
        assert_eq!(lit.witness.unwrap().reference, Some(0.0));
        let ann = valid(&format!(
            "eps > 0 |- \\exists vmin: \\forall th: \\forall w: (norm(th, w) <= 1 & norm(th, w) > eps -> {V} >= vmin)"
        ));
        let r = ann.witness.unwrap().reference.unwrap();
        assert!((r - circle_min(0.1)).abs() / r < 1e-6);
    }

    #[test]
    fn levelset_enclosure() {
        let c = valid(&format!(
            "eps > 0, k > 0, \\forall th: \\forall w: (norm(th, w) = eps -> {V} >= k), {V} <= k |- norm(th, w) <= eps"
        ));
        assert_eq!(c.pattern, Pattern::LevelsetEnclosure);
    }

    #[test]
    fn literal_and_quadratic_sign() {
        assert_eq!(valid("x^2 < k |- x^2 <= k").pattern, Pattern::LiteralEntailment);
        assert_eq!(
            valid("|- -13.8*th^2 - 1.5*w^2 <= 0").pattern,
            Pattern::QuadraticSign
        );
        let (s, b) = seq("|- -13.8*th^2 + 7*w^2 <= 0", &[]);
        assert!(!matches!(decide(&s, &b, 1).unwrap(), Decision::Valid(_)));
    }

    #[test]
    fn false_parameter_inequality_is_refuted() {
        let (s, b) = seq("|- p11 > p12^2", &[("p11", ratio(1, 5)), ("p12", ratio(1, 2))]);
        assert!(matches!(decide(&s, &b, 1).unwrap(), Decision::CounterExample { .. }));
    }

    #[test]
    fn indefinite_form_reports_failing_assumption() {
        let (s, b) = seq(
            "b < 0, eps > 0 |- \\exists p: (p > 0 & \\forall th: \\forall w: (norm(th, w) <= 1 & norm(th, w) > eps -> 13.8*th^2 - b*w^2 >= p))",
            &[("b", ratio(5, 2))],
        );
        match decide(&s, &b, 1).unwrap() {
            Decision::Unknown { reason, diagnostics } => {
                assert!(reason.contains("Indefinite"), "{reason}");
                assert_eq!(diagnostics, vec!["b < 0".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }
}
