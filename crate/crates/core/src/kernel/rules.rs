//! Rule schemas: each rule maps the target sequent to its premises or to a
//! leaf certificate.

use std::collections::BTreeSet;

use super::rule::{Rule, Side};
use super::simp::simp_sequent;
use super::tree::{GoalId, KernelError, LeafCertificate, ProofTree, RuleApplication};
use crate::arith::decide::{decide, Decision};
use crate::arith::poly::Poly;
use crate::syntax::{substitute, CmpOp, Formula, HybridProgram, Sequent, Term};

pub(crate) enum Outcome {
    Premises(Vec<Sequent>),
    Leaf(LeafCertificate),
}

fn mismatch(rule: &Rule, reason: impl Into<String>) -> KernelError {
    KernelError::Mismatch {
        rule: rule.name(),
        reason: reason.into(),
    }
}

fn succ<'a>(s: &'a Sequent, i: usize, rule: &Rule) -> Result<&'a Formula, KernelError> {
    s.succedents.get(i).ok_or(KernelError::NoSuchFormula {
        rule: rule.name(),
        side: "succedent",
        index: i,
    })
}

fn ante<'a>(s: &'a Sequent, i: usize, rule: &Rule) -> Result<&'a Formula, KernelError> {
    s.antecedents.get(i).ok_or(KernelError::NoSuchFormula {
        rule: rule.name(),
        side: "antecedent",
        index: i,
    })
}

fn with_succ(s: &Sequent, i: usize, f: Formula) -> Sequent {
    let mut out = s.clone();
    out.succedents[i] = f;
    out
}

fn with_ante(s: &Sequent, i: usize, f: Formula) -> Sequent {
    let mut out = s.clone();
    out.antecedents[i] = f;
    out
}

fn subst(rule: &Rule, f: &Formula, x: &str, t: &Term) -> Result<Formula, KernelError> {
    substitute(f, x, t).map_err(|source| KernelError::Subst {
        rule: rule.name(),
        source,
    })
}

/// `base`, or `base_1`, `base_2`, ... avoiding `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !used.contains(n))
        .expect("unbounded")
}

fn is_const(f: &Formula, vars: &[String]) -> bool {
    let names = f.free_names();
    vars.iter().all(|v| !names.contains(v))
}

/// Antecedents and succedents that mention no state variable of `prog`.
fn const_part(s: &Sequent, prog: &HybridProgram) -> (Vec<Formula>, Vec<Formula>) {
    let vars = prog.state_vars();
    let keep = |fs: &[Formula]| {
        fs.iter()
            .filter(|f| is_const(f, &vars))
            .cloned()
            .collect::<Vec<_>>()
    };
    (keep(&s.antecedents), keep(&s.succedents))
}

fn modal<'a>(f: &'a Formula, rule: &Rule, want_box: bool) -> Result<(&'a HybridProgram, &'a Formula), KernelError> {
    match (f, want_box) {
        (Formula::Box(p, post), true) | (Formula::Diamond(p, post), false) => Ok((p, post)),
        _ => Err(mismatch(
            rule,
            format!(
                "expected a {} formula, found `{f}`",
                if want_box { "box" } else { "diamond" }
            ),
        )),
    }
}

fn domain_conjuncts(p: &HybridProgram) -> Vec<Formula> {
    p.domain
        .conjuncts()
        .into_iter()
        .filter(|f| **f != Formula::True)
        .cloned()
        .collect()
}

/// Lie derivative of `e` along the program, as a normalized term.
pub fn lie_term(e: &Term, prog: &HybridProgram) -> Result<Term, String> {
    Poly::from_term(e)
        .and_then(|p| p.lie_derivative(prog))
        .map(|p| p.to_term())
        .map_err(|e| e.to_string())
}

/// `-(Lie e)` as a normalized term.
pub fn neg_lie_term(e: &Term, prog: &HybridProgram) -> Result<Term, String> {
    Poly::from_term(e)
        .and_then(|p| p.lie_derivative(prog))
        .map(|p| p.neg().to_term())
        .map_err(|e| e.to_string())
}

fn norm_upper_bound(f: &Formula, vars: &[String]) -> bool {
    let is_norm = |t: &Term| match t {
        Term::Norm(args) => {
            let names: BTreeSet<String> = args
                .iter()
                .filter_map(|a| match a {
                    Term::Var(n) => Some(n.clone()),
                    _ => None,
                })
                .collect();
            args.len() == vars.len() && names == vars.iter().cloned().collect()
        }
        _ => false,
    };
    let free = |t: &Term| vars.iter().all(|v| !t.mentions(v));
    match f {
        Formula::Cmp(CmpOp::Le | CmpOp::Lt, n, r) => is_norm(n) && free(r),
        Formula::Cmp(CmpOp::Ge | CmpOp::Gt, r, n) => is_norm(n) && free(r),
        _ => false,
    }
}

/// Premise `phi` is available: present whole, or all its conjuncts are.
fn available(s: &Sequent, phi: &Formula) -> bool {
    let have: Vec<&Formula> = s.antecedents.iter().flat_map(|a| a.conjuncts()).collect();
    s.antecedents.contains(phi) || phi.conjuncts().iter().all(|c| have.contains(c))
}

pub(crate) fn schema(tree: &ProofTree, s: &Sequent, rule: &Rule) -> Result<Outcome, KernelError> {
    use Outcome::*;
    let used = s.free_names();
    Ok(match rule {
        Rule::Cut(f) => {
            let mut show = s.clone();
            show.succedents.push(f.clone());
            let mut use_ = s.clone();
            use_.antecedents.insert(0, f.clone());
            Premises(vec![show, use_])
        }
        Rule::DC(i, c) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, true)?;
            Premises(vec![
                with_succ(s, *i, Formula::boxed(p.clone(), c.clone())),
                with_succ(s, *i, Formula::boxed(p.with_domain_conjunct(c.clone()), post.clone())),
            ])
        }
        Rule::DCc(i, r) => {
            let (p, _) = modal(succ(s, *i, rule)?, rule, false)?;
            let boxed = Formula::boxed(p.clone(), r.clone());
            let mut use_ = s.clone();
            use_.antecedents.push(boxed.clone());
            let mut show = s.clone();
            show.succedents.insert(*i, boxed);
            Premises(vec![use_, show])
        }
        Rule::DomainDiamond(i, r) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, false)?;
            let strengthened = p.with_domain_conjunct(Formula::not(post.clone()));
            Premises(vec![
                with_succ(s, *i, Formula::diamond(p.clone(), r.clone())),
                with_succ(s, *i, Formula::boxed(strengthened, Formula::not(r.clone()))),
            ])
        }
        Rule::DW(i) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, true)?;
            // the target box mentions the state, so it is not in `d`
            let (mut a, d) = const_part(s, p);
            a.extend(domain_conjuncts(p));
            let mut succs = vec![post.clone()];
            succs.extend(d);
            Premises(vec![Sequent::new(a, succs)])
        }
        Rule::DiffInvariant(i) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, true)?;
            let Formula::Cmp(op @ (CmpOp::Le | CmpOp::Ge), e, g) = post else {
                return Err(mismatch(rule, format!("postcondition `{post}` is not `<=` or `>=`")));
            };
            let le = lie_term(e, p).map_err(|r| mismatch(rule, r))?;
            let lg = lie_term(g, p).map_err(|r| mismatch(rule, r))?;
            let (mut a, _) = const_part(s, p);
            a.extend(domain_conjuncts(p));
            Premises(vec![
                with_succ(s, *i, post.clone()),
                Sequent::new(a, vec![Formula::Cmp(*op, le, lg)]),
            ])
        }
        Rule::DV(i, pname) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, false)?;
            let vars = p.state_vars();
            let Formula::Cmp(CmpOp::Lt, e, c) = post else {
                return Err(mismatch(rule, format!("postcondition `{post}` is not `e < c`")));
            };
            if vars.iter().any(|v| c.mentions(v)) {
                return Err(mismatch(rule, "the bound mentions a state variable"));
            }
            if used.contains(pname) || vars.contains(pname) {
                return Err(mismatch(rule, format!("`{pname}` is not fresh")));
            }
            let mut region = domain_conjuncts(p);
            for a in &s.antecedents {
                if let Formula::Box(q, r) = a {
                    if q == p {
                        region.extend(r.conjuncts().into_iter().cloned());
                    }
                }
            }
            if !region.iter().any(|f| norm_upper_bound(f, &vars)) {
                return Err(mismatch(
                    rule,
                    "no norm upper bound on the state holds along the flow",
                ));
            }
            let w = neg_lie_term(e, p).map_err(|r| mismatch(rule, r))?;
            let pv = Term::var(pname);
            let mut body = Formula::implies(
                Formula::conj(region),
                Formula::implies(
                    Formula::cmp(CmpOp::Ge, e.clone(), c.clone()),
                    Formula::cmp(CmpOp::Ge, w, pv.clone()),
                ),
            );
            for v in vars.iter().rev() {
                body = Formula::forall(v, body);
            }
            let goal = Formula::exists(
                pname,
                Formula::and(Formula::gt(pv, Term::zero()), body),
            );
            let (a, _) = const_part(s, p);
            Premises(vec![Sequent::new(a, vec![goal])])
        }
        Rule::MExistsR(i, psi) => {
            let Formula::Exists(x, phi) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not an existential"));
            };
            let mut rest = s.clone();
            rest.succedents.remove(*i);
            if rest.free_names().contains(x) {
                return Err(mismatch(rule, format!("`{x}` is free in the context")));
            }
            let mut use_ = with_succ(s, *i, (**phi).clone());
            use_.antecedents.push(psi.clone());
            Premises(vec![with_succ(s, *i, Formula::exists(x, psi.clone())), use_])
        }
        Rule::ForallL(i, t) => {
            let Formula::Forall(x, body) = ante(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a universal"));
            };
            Premises(vec![with_ante(s, *i, subst(rule, body, x, t)?)])
        }
        Rule::ExistsR(i, t) => {
            let Formula::Exists(x, body) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not an existential"));
            };
            Premises(vec![with_succ(s, *i, subst(rule, body, x, t)?)])
        }
        Rule::ForallR(i, name) | Rule::ExistsL(i, name) => {
            let (f, is_r) = match rule {
                Rule::ForallR(..) => (succ(s, *i, rule)?, true),
                _ => (ante(s, *i, rule)?, false),
            };
            let (x, body) = match (f, is_r) {
                (Formula::Forall(x, b), true) | (Formula::Exists(x, b), false) => (x, b),
                _ => return Err(mismatch(rule, format!("unexpected shape `{f}`"))),
            };
            let y = match name {
                Some(n) if used.contains(n) => {
                    return Err(mismatch(rule, format!("`{n}` is not fresh")))
                }
                Some(n) => n.clone(),
                None => fresh_name(x, &used),
            };
            let inst = subst(rule, body, x, &Term::var(&y))?;
            Premises(vec![if is_r {
                with_succ(s, *i, inst)
            } else {
                with_ante(s, *i, inst)
            }])
        }
        Rule::ImpliesR(i) => {
            let Formula::Implies(a, b) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not an implication"));
            };
            let mut out = with_succ(s, *i, (**b).clone());
            out.antecedents.push((**a).clone());
            Premises(vec![out])
        }
        Rule::AndR(i) => {
            let Formula::And(a, b) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a conjunction"));
            };
            Premises(vec![with_succ(s, *i, (**a).clone()), with_succ(s, *i, (**b).clone())])
        }
        Rule::AndL(i) => {
            let Formula::And(a, b) = ante(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a conjunction"));
            };
            let mut out = with_ante(s, *i, (**a).clone());
            out.antecedents.insert(i + 1, (**b).clone());
            Premises(vec![out])
        }
        Rule::OrR(i) => {
            let Formula::Or(a, b) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a disjunction"));
            };
            let mut out = with_succ(s, *i, (**a).clone());
            out.succedents.insert(i + 1, (**b).clone());
            Premises(vec![out])
        }
        Rule::NotR(i) => {
            let Formula::Not(a) = succ(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a negation"));
            };
            let mut out = s.clone();
            out.succedents.remove(*i);
            out.antecedents.push((**a).clone());
            Premises(vec![out])
        }
        Rule::NotL(i) => {
            let Formula::Not(a) = ante(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not a negation"));
            };
            let mut out = s.clone();
            out.antecedents.remove(*i);
            out.succedents.push((**a).clone());
            Premises(vec![out])
        }
        Rule::ModusPonens(i) => {
            let Formula::Implies(a, b) = ante(s, *i, rule)? else {
                return Err(mismatch(rule, "target is not an implication"));
            };
            if !available(s, a) {
                return Err(mismatch(rule, format!("premise `{a}` is not among the antecedents")));
            }
            Premises(vec![with_ante(s, *i, (**b).clone())])
        }
        Rule::Weaken(side, i) => {
            let mut out = s.clone();
            match side {
                Side::Ante => {
                    ante(s, *i, rule)?;
                    out.antecedents.remove(*i);
                }
                Side::Succ => {
                    succ(s, *i, rule)?;
                    out.succedents.remove(*i);
                }
            }
            Premises(vec![out])
        }
        Rule::Simp => Premises(vec![simp_sequent(s)]),
        Rule::CloseById => Leaf(close_by_id(s).ok_or_else(|| mismatch(rule, "no formula occurs on both sides"))?),
        Rule::CloseByDuality => Leaf(close_by_duality(s).ok_or_else(|| {
            mismatch(rule, "no diamond with a complementary box in the succedent")
        })?),
        Rule::BoxMono(i) => {
            let (p, post) = modal(succ(s, *i, rule)?, rule, true)?;
            let mine = domain_conjuncts(p);
            let found = s.antecedents.iter().position(|a| match a {
                Formula::Box(q, r) => {
                    **r == *post
                        && q.odes == p.odes
                        && domain_conjuncts(q).iter().all(|c| mine.contains(c))
                }
                _ => false,
            });
            match found {
                Some(j) => Leaf(LeafCertificate::IdentityClose {
                    detail: format!("BoxMono: antecedent {j} has a weaker domain"),
                }),
                None => return Err(mismatch(rule, "no antecedent box with a weaker domain")),
            }
        }
        Rule::CloseByOracle => match decide(s, &tree.bounds, tree.seed)? {
            Decision::Valid(certificate) => Leaf(LeafCertificate::OracleWitness {
                certificate,
                falsifier: None,
            }),
            Decision::CounterExample {
                assignment,
                diagnostics,
            } => {
                return Err(KernelError::CounterExample {
                    assignment,
                    diagnostics,
                })
            }
            Decision::Unknown {
                reason,
                diagnostics,
            } => return Err(KernelError::Unknown { reason, diagnostics }),
        },
    })
}

fn close_by_id(s: &Sequent) -> Option<LeafCertificate> {
    let detail = |d: String| Some(LeafCertificate::IdentityClose { detail: d });
    if let Some(j) = s.succedents.iter().position(|f| *f == Formula::True) {
        return detail(format!("succedent {j} is true"));
    }
    if let Some(j) = s.antecedents.iter().position(|f| *f == Formula::False) {
        return detail(format!("antecedent {j} is false"));
    }
    for (i, a) in s.antecedents.iter().enumerate() {
        if let Some(j) = s.succedents.iter().position(|f| f == a) {
            return detail(format!("antecedent {i} = succedent {j}"));
        }
    }
    None
}

fn close_by_duality(s: &Sequent) -> Option<LeafCertificate> {
    for (i, d) in s.succedents.iter().enumerate() {
        let Formula::Diamond(p, post) = d else {
            continue;
        };
        for (j, b) in s.succedents.iter().enumerate() {
            if let Formula::Box(q, r) = b {
                if q == p && (r.is_complement_of(post)) {
                    return Some(LeafCertificate::IdentityClose {
                        detail: format!("succedent {j} is the dual of succedent {i}"),
                    });
                }
            }
        }
    }
    None
}

impl ProofTree {
    /// Applies a rule to an open goal, returning the new child goals.
    pub fn apply(&mut self, app: RuleApplication) -> Result<Vec<GoalId>, KernelError> {
        let s = self.open_goal(app.target)?.sequent.clone();
        let outcome = schema(self, &s, &app.rule)?;
        let target = app.target;
        self.nodes[target].applied = Some(app);
        self.history.push(target);
        Ok(match outcome {
            Outcome::Premises(seqs) => self.add_children(target, seqs),
            Outcome::Leaf(cert) => {
                self.close_leaf(target, cert);
                vec![]
            }
        })
    }

    pub fn apply_rule(&mut self, target: GoalId, rule: Rule) -> Result<Vec<GoalId>, KernelError> {
        self.apply(RuleApplication {
            rule,
            target,
            reconstructed: false,
        })
    }
}
