//! Seeded numeric falsifier. Absence of a counterexample is not a proof.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::bounds::Bounds;
use super::poly::rational_to_f64;
use crate::syntax::{expand, CmpOp, Formula, Sequent, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FalsifyError {
    #[error("variable `{0}` has no sampling box")]
    Unbounded(String),
    #[error("modalities cannot be sampled")]
    Modality,
}

pub type Assignment = BTreeMap<String, f64>;

/// Numeric value for an existential witness, given a name lookup.
pub type WitnessFn<'a> = dyn Fn(&dyn Fn(&str) -> Option<f64>) -> Option<f64> + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct FalsifyReport {
    pub samples: usize,
    /// Samples where every antecedent held.
    pub nonvacuous: usize,
    pub counterexample: Option<Assignment>,
}

/// Samples per inner quantifier on the fast pass and on confirmation.
const INNER: usize = 64;
const INNER_CONFIRM: usize = 4096;

#[derive(Debug, Clone)]
enum CTerm {
    Slot(usize),
    Const(f64),
    Neg(Box<CTerm>),
    Add(Box<CTerm>, Box<CTerm>),
    Sub(Box<CTerm>, Box<CTerm>),
    Mul(Box<CTerm>, Box<CTerm>),
    Pow(Box<CTerm>, i32),
    Sin(Box<CTerm>),
    Cos(Box<CTerm>),
    Norm(Vec<CTerm>),
}

#[derive(Debug, Clone)]
enum CForm {
    Const(bool),
    Cmp(CmpOp, CTerm, CTerm),
    Not(Box<CForm>),
    And(Box<CForm>, Box<CForm>),
    Or(Box<CForm>, Box<CForm>),
    Implies(Box<CForm>, Box<CForm>),
    /// `forall x y (norm(x,y) constraints & rest -> body)`.
    ForallPair {
        x: usize,
        y: usize,
        region: Vec<(CmpOp, CTerm)>,
        body: Box<CForm>,
    },
    Forall(usize, Box<CForm>),
    Exists {
        slot: usize,
        body: Box<CForm>,
        witnessed: bool,
    },
}

struct Compiler<'a> {
    slots: BTreeMap<String, usize>,
    witness_var: Option<&'a str>,
}

impl Compiler<'_> {
    fn slot(&mut self, n: &str) -> usize {
        let len = self.slots.len();
        *self.slots.entry(n.to_string()).or_insert(len)
    }

    fn term(&mut self, t: &Term) -> CTerm {
        let b = |c: CTerm| Box::new(c);
        match t {
            Term::Var(n) | Term::Param(n) => CTerm::Slot(self.slot(n)),
            Term::Const(c) => CTerm::Const(rational_to_f64(c)),
            Term::Neg(a) => CTerm::Neg(b(self.term(a))),
            Term::Add(x, y) => CTerm::Add(b(self.term(x)), b(self.term(y))),
            Term::Sub(x, y) => CTerm::Sub(b(self.term(x)), b(self.term(y))),
            Term::Mul(x, y) => CTerm::Mul(b(self.term(x)), b(self.term(y))),
            Term::Div(x, d) => CTerm::Mul(
                b(self.term(x)),
                b(CTerm::Const(1.0 / rational_to_f64(d))),
            ),
            Term::Pow(x, e) => CTerm::Pow(b(self.term(x)), *e as i32),
            Term::Sin(x) => CTerm::Sin(b(self.term(x))),
            Term::Cos(x) => CTerm::Cos(b(self.term(x))),
            Term::Norm(xs) => CTerm::Norm(xs.iter().map(|x| self.term(x)).collect()),
        }
    }

    fn form(&mut self, f: &Formula) -> Result<CForm, FalsifyError> {
        let b = |c: CForm| Box::new(c);
        Ok(match f {
            Formula::True => CForm::Const(true),
            Formula::False => CForm::Const(false),
            Formula::Cmp(op, x, y) => CForm::Cmp(*op, self.term(x), self.term(y)),
            Formula::Not(a) => CForm::Not(b(self.form(a)?)),
            Formula::And(x, y) => CForm::And(b(self.form(x)?), b(self.form(y)?)),
            Formula::Or(x, y) => CForm::Or(b(self.form(x)?), b(self.form(y)?)),
            Formula::Implies(x, y) => CForm::Implies(b(self.form(x)?), b(self.form(y)?)),
            Formula::Forall(x, body) => {
                if let Some(c) = self.pair(x, body)? {
                    return Ok(c);
                }
                let s = self.slot(x);
                CForm::Forall(s, b(self.form(body)?))
            }
            Formula::Exists(x, body) => {
                let s = self.slot(x);
                CForm::Exists {
                    slot: s,
                    body: b(self.form(body)?),
                    witnessed: self.witness_var == Some(x.as_str()),
                }
            }
            Formula::Box(..) | Formula::Diamond(..) => return Err(FalsifyError::Modality),
            Formula::InBall { .. } | Formula::BallModal { .. } => return self.form(&expand(f)),
        })
    }

    /// Recognizes `forall x forall y (G -> B)` where G constrains `norm(x,y)`.
    fn pair(&mut self, x: &str, body: &Formula) -> Result<Option<CForm>, FalsifyError> {
        let Formula::Forall(y, inner) = body else {
            return Ok(None);
        };
        let Formula::Implies(guard, post) = inner.as_ref() else {
            return Ok(None);
        };
        let mut region = Vec::new();
        let mut rest = Vec::new();
        for c in guard.conjuncts() {
            match norm_constraint(c, x, y) {
                Some((op, e)) => region.push((op, e)),
                None => rest.push(c.clone()),
            }
        }
        if region.is_empty() {
            return Ok(None);
        }
        let xs = self.slot(x);
        let ys = self.slot(y);
        let region = region
            .into_iter()
            .map(|(op, e)| (op, self.term(&e)))
            .collect();
        let post = if rest.is_empty() {
            self.form(post)?
        } else {
            CForm::Implies(
                Box::new(self.form(&Formula::conj(rest))?),
                Box::new(self.form(post)?),
            )
        };
        Ok(Some(CForm::ForallPair {
            x: xs,
            y: ys,
            region,
            body: Box::new(post),
        }))
    }
}

fn is_norm_of(t: &Term, x: &str, y: &str) -> bool {
    match t {
        Term::Norm(args) if args.len() == 2 => {
            let names: Vec<_> = args
                .iter()
                .filter_map(|a| match a {
                    Term::Var(n) => Some(n.as_str()),
                    _ => None,
                })
                .collect();
            names == [x, y] || names == [y, x]
        }
        _ => false,
    }
}

/// `norm(x,y) op e` with `e` free of `x, y`, normalized to norm on the left.
pub fn norm_constraint(f: &Formula, x: &str, y: &str) -> Option<(CmpOp, Term)> {
    let Formula::Cmp(op, a, b) = f else {
        return None;
    };
    let free = |t: &Term| !t.mentions(x) && !t.mentions(y);
    if is_norm_of(a, x, y) && free(b) {
        Some((*op, b.clone()))
    } else if is_norm_of(b, x, y) && free(a) {
        Some((op.flip(), a.clone()))
    } else {
        None
    }
}

/// Comparison that holds beyond floating-point noise.
fn definitely(op: CmpOp, a: f64, b: f64) -> bool {
    let d = b - a;
    let t = 1e-9 * (a.abs() + b.abs()) + 1e-12;
    match op {
        CmpOp::Lt => d > t,
        CmpOp::Le => d > t || a == b,
        CmpOp::Gt => -d > t,
        CmpOp::Ge => -d > t || a == b,
        CmpOp::Eq => a == b,
        CmpOp::Ne => d.abs() > t,
    }
}

/// Comparison that may hold up to floating-point noise.
pub(crate) fn possibly(op: CmpOp, a: f64, b: f64) -> bool {
    !definitely(op.negate(), a, b)
}

struct Evaluator<'a> {
    names: Vec<String>,
    boxes: Vec<Option<(f64, f64)>>,
    witness: Option<&'a WitnessFn<'a>>,
    inner: usize,
    rng: ChaCha8Rng,
}

impl Evaluator<'_> {
    fn term(&self, t: &CTerm, env: &[f64]) -> f64 {
        match t {
            CTerm::Slot(i) => env[*i],
            CTerm::Const(c) => *c,
            CTerm::Neg(a) => -self.term(a, env),
            CTerm::Add(a, b) => self.term(a, env) + self.term(b, env),
            CTerm::Sub(a, b) => self.term(a, env) - self.term(b, env),
            CTerm::Mul(a, b) => self.term(a, env) * self.term(b, env),
            CTerm::Pow(a, e) => self.term(a, env).powi(*e),
            CTerm::Sin(a) => self.term(a, env).sin(),
            CTerm::Cos(a) => self.term(a, env).cos(),
            CTerm::Norm(xs) => xs
                .iter()
                .map(|x| self.term(x, env).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    fn slot_box(&self, s: usize) -> Result<(f64, f64), FalsifyError> {
        self.boxes[s].ok_or_else(|| FalsifyError::Unbounded(self.names[s].clone()))
    }

    /// `positive`: the formula is wanted true, so comparisons are lenient.
    fn form(&mut self, f: &CForm, env: &mut Vec<f64>, positive: bool) -> Result<bool, FalsifyError> {
        Ok(match f {
            CForm::Const(b) => *b,
            CForm::Cmp(op, a, b) => {
                let (a, b) = (self.term(a, env), self.term(b, env));
                if positive {
                    possibly(*op, a, b)
                } else {
                    definitely(*op, a, b)
                }
            }
            CForm::Not(a) => !self.form(a, env, !positive)?,
            CForm::And(a, b) => self.form(a, env, positive)? && self.form(b, env, positive)?,
            CForm::Or(a, b) => self.form(a, env, positive)? || self.form(b, env, positive)?,
            CForm::Implies(a, b) => !self.form(a, env, !positive)? || self.form(b, env, positive)?,
            CForm::ForallPair { x, y, region, body } => {
                self.forall_pair(*x, *y, region, body, env, positive)?
            }
            CForm::Forall(s, body) => {
                let (lo, hi) = self.slot_box(*s)?;
                let old = env[*s];
                let mut all = true;
                for i in 0..self.inner {
                    env[*s] = match i {
                        0 => lo,
                        1 => hi,
                        _ => self.rng.gen_range(lo..=hi),
                    };
                    if !self.form(body, env, positive)? {
                        all = false;
                        break;
                    }
                }
                env[*s] = old;
                all
            }
            CForm::Exists {
                slot,
                body,
                witnessed,
            } => {
                let old = env[*slot];
                let value = match (witnessed, self.witness) {
                    (true, Some(w)) => {
                        let names = &self.names;
                        let lookup = |n: &str| names.iter().position(|m| m == n).map(|i| env[i]);
                        w(&lookup)
                    }
                    _ => None,
                };
                let found = if let Some(v) = value {
                    env[*slot] = v;
                    self.form(body, env, positive)?
                } else {
                    let (lo, hi) = self.slot_box(*slot)?;
                    let mut any = false;
                    for _ in 0..self.inner {
                        env[*slot] = self.rng.gen_range(lo..=hi);
                        if self.form(body, env, positive)? {
                            any = true;
                            break;
                        }
                    }
                    any
                };
                env[*slot] = old;
                found
            }
        })
    }

    fn forall_pair(
        &mut self,
        x: usize,
        y: usize,
        region: &[(CmpOp, CTerm)],
        body: &CForm,
        env: &mut Vec<f64>,
        positive: bool,
    ) -> Result<bool, FalsifyError> {
        let (mut lo, mut lo_strict) = (0.0f64, false);
        let (mut hi, mut hi_strict) = (f64::INFINITY, false);
        let mut eq: Option<f64> = None;
        for (op, e) in region {
            let v = self.term(e, env);
            match op {
                CmpOp::Le | CmpOp::Lt if v <= hi => {
                    hi_strict = *op == CmpOp::Lt;
                    hi = v;
                }
                CmpOp::Ge | CmpOp::Gt if v >= lo => {
                    lo_strict = *op == CmpOp::Gt;
                    lo = v;
                }
                CmpOp::Eq => match eq {
                    Some(prev) if prev != v => return Ok(true),
                    _ => eq = Some(v),
                },
                _ => {}
            }
        }
        if let Some(r) = eq {
            if r < lo || r > hi || (r == lo && lo_strict) || (r == hi && hi_strict) {
                return Ok(true);
            }
            lo = r;
            hi = r;
        } else if hi.is_infinite() {
            let (bx, by) = (self.slot_box(x)?, self.slot_box(y)?);
            let m = |b: (f64, f64)| b.0.abs().max(b.1.abs());
            hi = m(bx).hypot(m(by));
        }
        if lo > hi || (lo == hi && (lo_strict || hi_strict)) {
            return Ok(true);
        }
        let hi_r = if hi_strict { hi * (1.0 - 1e-12) } else { hi };
        let lo_r = if lo_strict { lo * (1.0 + 1e-12) + 1e-300 } else { lo };
        let (ox, oy) = (env[x], env[y]);
        let mut all = true;
        for i in 0..self.inner {
            let r = match i {
                0 => hi_r,
                1 => lo_r,
                _ => {
                    let u: f64 = self.rng.gen();
                    (lo_r * lo_r + u * (hi_r * hi_r - lo_r * lo_r)).sqrt()
                }
            };
            let a = self.rng.gen_range(0.0..std::f64::consts::TAU);
            env[x] = r * a.cos();
            env[y] = r * a.sin();
            if !self.form(body, env, positive)? {
                all = false;
                break;
            }
        }
        env[x] = ox;
        env[y] = oy;
        Ok(all)
    }
}

fn positive_hint(f: &Formula) -> Option<&str> {
    let Formula::Cmp(op, a, b) = f else {
        return None;
    };
    let nonneg = |t: &Term| matches!(t, Term::Const(c) if *c >= num_traits::Zero::zero());
    match (op, a, b) {
        (CmpOp::Gt | CmpOp::Ge, Term::Var(z), c) if nonneg(c) => Some(z),
        (CmpOp::Lt | CmpOp::Le, c, Term::Var(z)) if nonneg(c) => Some(z),
        _ => None,
    }
}

fn collect_pairs(t: &Term, out: &mut Vec<(String, String)>) {
    if let Term::Norm(args) = t {
        if let [Term::Var(x), Term::Var(y)] = args.as_slice() {
            out.push((x.clone(), y.clone()));
        }
    }
    match t {
        Term::Neg(a) | Term::Pow(a, _) | Term::Div(a, _) | Term::Sin(a) | Term::Cos(a) => {
            collect_pairs(a, out)
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
            collect_pairs(a, out);
            collect_pairs(b, out);
        }
        _ => {}
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    hi * 10f64.powf(rng.gen_range(-4.0..=0.0))
}

/// Samples the free names of `s` and looks for an assignment under which
/// every antecedent holds and no succedent does. With `witness`, an
/// existential over that variable is evaluated at the witness value.
pub fn falsify_sequent(
    s: &Sequent,
    bounds: &Bounds,
    n: usize,
    seed: u64,
    witness: Option<(&str, &WitnessFn<'_>)>,
) -> Result<FalsifyReport, FalsifyError> {
    let s = crate::syntax::expand_sequent(s);
    let mut c = Compiler {
        slots: BTreeMap::new(),
        witness_var: witness.map(|w| w.0),
    };
    let ante: Vec<CForm> = s.antecedents.iter().map(|f| c.form(f)).collect::<Result<_, _>>()?;
    let succ: Vec<CForm> = s.succedents.iter().map(|f| c.form(f)).collect::<Result<_, _>>()?;
    let mut names = vec![String::new(); c.slots.len()];
    for (k, v) in &c.slots {
        names[*v] = k.clone();
    }
    let boxes: Vec<Option<(f64, f64)>> = names
        .iter()
        .map(|n| bounds.param_box_f64(n).or_else(|| bounds.var_box(n)))
        .collect();
    let free = s.free_names();
    for n in &free {
        if boxes[c.slots[n]].is_none() {
            return Err(FalsifyError::Unbounded(n.clone()));
        }
    }
    let positive: Vec<&str> = s.antecedents.iter().filter_map(positive_hint).collect();
    let mut pairs = Vec::new();
    for f in s.antecedents.iter().chain(&s.succedents) {
        f.visit_terms(&mut |t| collect_pairs(t, &mut pairs));
    }
    pairs.retain(|(x, y)| x != y && free.contains(x) && free.contains(y));
    let mut paired = std::collections::BTreeSet::new();
    pairs.retain(|(x, y)| paired.insert(x.clone()) && paired.insert(y.clone()));

    let mut ev = Evaluator {
        names: names.clone(),
        boxes: boxes.clone(),
        witness: witness.map(|w| w.1),
        inner: INNER,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let mut env = vec![0.0; names.len()];
    let mut report = FalsifyReport {
        samples: n,
        nonvacuous: 0,
        counterexample: None,
    };
    for _ in 0..n {
        for name in &free {
            let i = c.slots[name];
            let (lo, hi) = boxes[i].expect("checked above");
            env[i] = if lo == hi {
                lo
            } else if positive.contains(&name.as_str()) && hi > 0.0 {
                if ev.rng.gen_bool(0.5) {
                    log_uniform(&mut ev.rng, hi)
                } else {
                    ev.rng.gen_range(lo.max(0.0)..=hi)
                }
            } else {
                ev.rng.gen_range(lo..=hi)
            };
        }
        for (x, y) in &pairs {
            let (bx, by) = (boxes[c.slots[x]].unwrap(), boxes[c.slots[y]].unwrap());
            let r = (-bx.0).min(bx.1).min(-by.0).min(by.1);
            if r > 0.0 && ev.rng.gen_bool(0.5) {
                let rad = log_uniform(&mut ev.rng, r);
                let a = ev.rng.gen_range(0.0..std::f64::consts::TAU);
                env[c.slots[x]] = rad * a.cos();
                env[c.slots[y]] = rad * a.sin();
            }
        }
        if violates(&mut ev, &ante, &succ, &mut env)? {
            ev.inner = INNER_CONFIRM;
            let confirmed = violates(&mut ev, &ante, &succ, &mut env)?;
            ev.inner = INNER;
            if confirmed {
                report.nonvacuous += 1;
                report.counterexample = Some(
                    free.iter()
                        .map(|n| (n.clone(), env[c.slots[n]]))
                        .collect(),
                );
                return Ok(report);
            }
        }
        if ante_holds(&mut ev, &ante, &mut env)? {
            report.nonvacuous += 1;
        }
    }
    Ok(report)
}

fn ante_holds(ev: &mut Evaluator, ante: &[CForm], env: &mut Vec<f64>) -> Result<bool, FalsifyError> {
    for a in ante {
        if !ev.form(a, env, false)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn violates(
    ev: &mut Evaluator,
    ante: &[CForm],
    succ: &[CForm],
    env: &mut Vec<f64>,
) -> Result<bool, FalsifyError> {
    if !ante_holds(ev, ante, env)? {
        return Ok(false);
    }
    for s in succ {
        if ev.form(s, env, true)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Falsifier for a single formula.
pub fn falsify(f: &Formula, bounds: &Bounds, n: usize, seed: u64) -> Result<Option<Assignment>, FalsifyError> {
    Ok(falsify_sequent(&Sequent::new(vec![], vec![f.clone()]), bounds, n, seed, None)?.counterexample)
}

/// Seed from `LYAPDL_SEED`, or a fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var("LYAPDL_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0x5eed)
}
