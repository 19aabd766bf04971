//! The canned proof: Part 1 proves stability and leaves `s -> a`, Part 3
//! reduces `s -> a` to reachability `r`, Part 2 proves `r`.
//!
//! Scripts are produced by running the steps against a live tree, so goal
//! ids in the emitted script are the ones a replay on a fresh tree assigns.
//! An oracle step that fails is still recorded; its goal stays open and the
//! remaining branches are attempted.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::formulas::*;
use super::problem::root_sequent;
use super::StabilityProblem;
use crate::kernel::{GoalId, KernelError, ProofTree, ReplayError, Rule, RuleApplication, Side};
use crate::syntax::{CmpOp, Formula, Sequent, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Part1,
    Part2,
    Part3,
    Full,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Part1 => "1",
            Part::Part2 => "2",
            Part::Part3 => "3",
            Part::Full => "full",
        })
    }
}

impl FromStr for Part {
    type Err = String;

    fn from_str(s: &str) -> Result<Part, String> {
        match s {
            "1" => Ok(Part::Part1),
            "2" => Ok(Part::Part2),
            "3" => Ok(Part::Part3),
            "full" => Ok(Part::Full),
            _ => Err(format!("unknown part `{s}` (expected 1, 2, 3 or full)")),
        }
    }
}

impl Part {
    /// The goal the part starts from.
    pub fn root(self, prob: &StabilityProblem) -> Sequent {
        let wf = prob.wf.clone();
        let s = stability_formula(prob);
        match self {
            Part::Part1 | Part::Full => root_sequent(prob),
            Part::Part3 => Sequent::new(vec![wf], vec![Formula::implies(s, attractivity_formula(prob))]),
            Part::Part2 => Sequent::new(vec![wf, s], vec![reachability_formula(prob)]),
        }
    }

    /// A tree holding only the part's root goal.
    pub fn fresh_tree(self, prob: &StabilityProblem) -> ProofTree {
        ProofTree::new(self.root(prob), prob.bounds(), prob.param_names(), prob.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofScript {
    pub name: Part,
    pub steps: Vec<RuleApplication>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProofError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("goal {goal}: no {what}")]
    Missing { goal: GoalId, what: String },
}

#[derive(Debug, Clone)]
pub struct ProofRun {
    pub tree: ProofTree,
    pub script: ProofScript,
    /// Oracle steps that did not close their goal, in script order.
    pub failures: Vec<ReplayError>,
    /// Goals deliberately left for another part.
    pub handoffs: Vec<GoalId>,
}

impl ProofRun {
    /// Every goal except the handoffs is closed.
    pub fn complete(&self) -> bool {
        self.failures.is_empty() && self.tree.open_goals() == self.handoffs
    }

    pub fn first_failure(&self) -> Option<&ReplayError> {
        self.failures.first()
    }
}

/// Steps left implicit in the hand-drawn derivation.
fn elided(rule: &Rule) -> bool {
    matches!(
        rule,
        Rule::Weaken(..) | Rule::AndL(_) | Rule::NotR(_) | Rule::NotL(_) | Rule::BoxMono(_)
    )
}

struct Builder<'a> {
    prob: &'a StabilityProblem,
    tree: ProofTree,
    steps: Vec<RuleApplication>,
    failures: Vec<ReplayError>,
}

impl<'a> Builder<'a> {
    fn apply(&mut self, goal: GoalId, rule: Rule) -> Result<Vec<GoalId>, ProofError> {
        let app = RuleApplication {
            reconstructed: elided(&rule),
            rule,
            target: goal,
        };
        self.steps.push(app.clone());
        let step = self.steps.len();
        let oracle = app.rule == Rule::CloseByOracle;
        match self.tree.apply(app) {
            Ok(ids) => Ok(ids),
            Err(source) => {
                let err = ReplayError { step, goal, source };
                if oracle && matches!(
                    err.source,
                    KernelError::CounterExample { .. } | KernelError::Unknown { .. }
                ) {
                    self.failures.push(err);
                    Ok(vec![])
                } else {
                    Err(err.into())
                }
            }
        }
    }

    fn one(&mut self, goal: GoalId, rule: Rule) -> Result<GoalId, ProofError> {
        Ok(self.apply(goal, rule)?[0])
    }

    fn two(&mut self, goal: GoalId, rule: Rule) -> Result<[GoalId; 2], ProofError> {
        let ids = self.apply(goal, rule)?;
        Ok([ids[0], ids[1]])
    }

    fn close(&mut self, goal: GoalId, rule: Rule) -> Result<(), ProofError> {
        self.apply(goal, rule).map(|_| ())
    }

    fn seq(&self, goal: GoalId) -> &Sequent {
        &self.tree.nodes[goal].sequent
    }

    fn missing(goal: GoalId, what: impl Into<String>) -> ProofError {
        ProofError::Missing {
            goal,
            what: what.into(),
        }
    }

    fn ante(&self, goal: GoalId, f: &Formula) -> Result<usize, ProofError> {
        self.seq(goal)
            .antecedents
            .iter()
            .position(|a| a == f)
            .ok_or_else(|| Self::missing(goal, format!("antecedent `{f}`")))
    }

    fn succ_where(
        &self,
        goal: GoalId,
        what: &str,
        pred: impl Fn(&Formula) -> bool,
    ) -> Result<usize, ProofError> {
        self.seq(goal)
            .succedents
            .iter()
            .position(pred)
            .ok_or_else(|| Self::missing(goal, what))
    }

    /// Drops modal formulas so the goal is first-order.
    fn weaken_modal(&mut self, mut goal: GoalId) -> Result<GoalId, ProofError> {
        loop {
            let s = self.seq(goal);
            let rule = if let Some(i) = s.succedents.iter().rposition(Formula::has_modality) {
                Rule::Weaken(Side::Succ, i)
            } else if let Some(i) = s.antecedents.iter().rposition(Formula::has_modality) {
                Rule::Weaken(Side::Ante, i)
            } else {
                return Ok(goal);
            };
            goal = self.one(goal, rule)?;
        }
    }

    fn oracle(&mut self, goal: GoalId) -> Result<(), ProofError> {
        let g = self.weaken_modal(goal)?;
        self.close(g, Rule::CloseByOracle)
    }

    /// Splits the antecedent `f` into its conjuncts.
    fn and_l_all(&mut self, goal: GoalId, f: &Formula) -> Result<GoalId, ProofError> {
        let Formula::And(a, b) = f else {
            return Ok(goal);
        };
        let i = self.ante(goal, f)?;
        let g = self.one(goal, Rule::AndL(i))?;
        let g = self.and_l_all(g, a)?;
        self.and_l_all(g, b)
    }

    /// Instantiates the state quantifiers of antecedent `f` with the state.
    fn instantiate_state(&mut self, mut goal: GoalId, f: &Formula) -> Result<GoalId, ProofError> {
        let i = self.ante(goal, f)?;
        for v in self.prob.program.state_vars() {
            goal = self.one(goal, Rule::ForallL(i, Term::var(&v)))?;
        }
        Ok(goal)
    }

    /// Skolemizes the state quantifiers of succedent 0.
    fn intro_state(&mut self, mut goal: GoalId) -> Result<GoalId, ProofError> {
        for v in self.prob.program.state_vars() {
            goal = self.one(goal, Rule::ForallR(0, Some(v)))?;
        }
        Ok(goal)
    }

    fn mp(&mut self, goal: GoalId, imp: &Formula) -> Result<GoalId, ProofError> {
        let i = self.ante(goal, imp)?;
        self.one(goal, Rule::ModusPonens(i))
    }
}

fn var(n: &str) -> Term {
    Term::var(n)
}

fn gt0(n: &str) -> Formula {
    Formula::gt(var(n), Term::zero())
}

/// Part 1 on `wf |- s & a`; returns the `wf |- s -> a` goal.
fn part1(b: &mut Builder, root: GoalId) -> Result<GoalId, ProofError> {
    let p = b.prob;
    let s = stability_formula(p);
    let imp = Formula::implies(s, attractivity_formula(p));

    let [show, use_] = b.two(root, Rule::Cut(mp_cut(p)))?;
    let g = b.one(use_, Rule::AndL(0))?;
    let g = b.mp(g, &imp)?;
    let [l, r] = b.two(g, Rule::AndR(0))?;
    b.close(l, Rule::CloseById)?;
    b.close(r, Rule::CloseById)?;

    let g = b.one(show, Rule::Weaken(Side::Succ, 0))?;
    let [gs, handoff] = b.two(g, Rule::AndR(0))?;
    stability(b, gs)?;
    Ok(handoff)
}

/// `wf |- s`.
fn stability(b: &mut Builder, goal: GoalId) -> Result<(), ProofError> {
    let p = b.prob;
    let v = p.v.clone();
    let g = b.one(goal, Rule::ForallR(0, Some("eps".into())))?;
    let g = b.one(g, Rule::ImpliesR(0))?;

    let [show, use_] = b.two(g, Rule::Cut(levelset_condition(p)))?;
    b.oracle(show)?;
    let g = b.one(use_, Rule::ExistsL(0, Some("k".into())))?;
    let g = b.one(g, Rule::AndL(0))?;

    let psi = delta_ball_condition(p);
    let [show, use_] = b.two(g, Rule::MExistsR(0, psi.clone()))?;
    b.oracle(show)?;
    let g = b.and_l_all(use_, &psi)?;
    let [l, r] = b.two(g, Rule::AndR(0))?;
    b.close(l, Rule::CloseById)?;
    let g = b.intro_state(r)?;
    let g = b.one(g, Rule::ImpliesR(0))?;
    let inner = Formula::implies(ball(p, var("del")), Formula::lt(v.clone(), var("k")));
    let g = b.instantiate_state(g, &forall_state(p, inner.clone()))?;
    let g = b.mp(g, &inner)?;

    // [IP] norm <= eps, from V < k
    let boundary = boundary_condition(p);
    let [show, use_] = b.two(g, Rule::DC(0, boundary.clone()))?;
    let h = b.one(show, Rule::DW(0))?;
    let h = b.instantiate_state(h, &forall_state(p, boundary))?;
    b.close(h, Rule::CloseById)?;

    let [show, use_] = b.two(use_, Rule::DC(0, Formula::le(v, var("k"))))?;
    let [init, lie] = b.two(show, Rule::DiffInvariant(0))?;
    b.oracle(init)?;
    b.oracle(lie)?;
    let h = b.one(use_, Rule::DW(0))?;
    b.oracle(h)
}

/// Part 3 on `wf |- s -> a`; returns the `wf, s |- r` goal.
fn part3(b: &mut Builder, goal: GoalId) -> Result<GoalId, ProofError> {
    let p = b.prob;
    let prog = ip(p);
    let s = stability_formula(p);
    let g = b.one(goal, Rule::ImpliesR(0))?;
    let [show, use_] = b.two(g, Rule::Cut(reachability_formula(p)))?;
    let handoff = b.one(show, Rule::Weaken(Side::Succ, 0))?;

    let g = b.one(use_, Rule::ExistsL(0, Some("del".into())))?;
    let g = b.one(g, Rule::AndL(0))?;
    let g = b.one(g, Rule::ExistsR(0, var("del")))?;
    let [l, r] = b.two(g, Rule::AndR(0))?;
    b.close(l, Rule::CloseById)?;
    let g = b.intro_state(r)?;
    let g = b.one(g, Rule::ImpliesR(0))?;
    let g = b.one(g, Rule::ForallR(0, Some("eps".into())))?;
    let g = b.one(g, Rule::ImpliesR(0))?;

    // stability at eps yields del1
    let i = b.ante(g, &s)?;
    let g = b.one(g, Rule::ForallL(i, var("eps")))?;
    let Formula::Forall(_, s_body) = &s else {
        unreachable!("s is universal")
    };
    let g = b.mp(g, s_body)?;
    let Formula::Implies(_, ex) = &**s_body else {
        unreachable!("s has an implication body")
    };
    let i = b.ante(g, ex)?;
    let g = b.one(g, Rule::ExistsL(i, Some("del1".into())))?;
    let g = b.one(g, Rule::AndL(i))?;

    // reachability of B_del1
    let reach_eps = Formula::forall(
        "eps",
        Formula::implies(gt0("eps"), Formula::diamond(prog.clone(), ball(p, var("eps")))),
    );
    let reach = Formula::implies(ball(p, var("del")), reach_eps.clone());
    let g = b.instantiate_state(g, &forall_state(p, reach.clone()))?;
    let g = b.mp(g, &reach)?;
    let i = b.ante(g, &reach_eps)?;
    let g = b.one(g, Rule::ForallL(i, var("del1")))?;
    let into = Formula::diamond(prog.clone(), ball(p, var("del1")));
    let g = b.mp(g, &Formula::implies(gt0("del1"), into))?;

    let [reached, stay] = b.two(g, Rule::DomainDiamond(0, ball(p, var("del1"))))?;
    b.close(reached, Rule::CloseById)?;
    let safe = Formula::implies(
        ball(p, var("del1")),
        Formula::boxed(prog.clone(), ball(p, var("eps"))),
    );
    let s1 = forall_state(p, safe.clone());
    let [show, use_] = b.two(stay, Rule::DC(0, s1.clone()))?;
    let h = b.one(show, Rule::DW(0))?;
    b.close(h, Rule::CloseById)?;
    let h = b.one(use_, Rule::DW(0))?;
    let h = b.one(h, Rule::NotR(0))?;
    let never = Formula::not(Formula::boxed(prog, ball(p, var("eps"))));
    let i = b.ante(h, &never)?;
    let h = b.one(h, Rule::NotL(i))?;
    let h = b.instantiate_state(h, &s1)?;
    let h = b.mp(h, &safe)?;
    b.close(h, Rule::CloseById)?;
    Ok(handoff)
}

/// Part 2 on `wf, s |- r`.
fn part2(b: &mut Builder, goal: GoalId) -> Result<(), ProofError> {
    let p = b.prob;
    let prog = ip(p);
    let v = p.v.clone();
    let s = stability_formula(p);

    let i = b.ante(goal, &s)?;
    let g = b.one(goal, Rule::ForallL(i, Term::one()))?;
    let g = b.one(g, Rule::Simp)?;
    let safe1 = forall_state(
        p,
        Formula::implies(
            ball(p, var("del")),
            Formula::boxed(prog.clone(), ball(p, Term::one())),
        ),
    );
    let ex = Formula::exists("del", Formula::and(gt0("del"), safe1.clone()));
    let i = b.ante(g, &ex)?;
    let g = b.one(g, Rule::ExistsL(i, Some("del".into())))?;
    let g = b.one(g, Rule::Simp)?;
    let g = b.one(g, Rule::ExistsR(0, var("del")))?;
    let [l, r] = b.two(g, Rule::AndR(0))?;
    b.close(l, Rule::CloseById)?;
    let g = b.intro_state(r)?;
    let g = b.one(g, Rule::ImpliesR(0))?;
    let g = b.one(g, Rule::ForallR(0, Some("eps".into())))?;
    let g = b.one(g, Rule::ImpliesR(0))?;

    let Formula::Forall(_, inner) = &safe1 else {
        unreachable!()
    };
    let Formula::Forall(_, imp) = &**inner else {
        unreachable!()
    };
    let g = b.instantiate_state(g, &safe1)?;
    let g = b.mp(g, imp)?;

    let annulus = annulus_condition(p);
    let [show, use_] = b.two(g, Rule::Cut(annulus.clone()))?;
    b.oracle(show)?;
    let g = b.one(use_, Rule::ExistsL(0, Some("vmin".into())))?;
    let Formula::Exists(_, annulus_all) = annulus else {
        unreachable!()
    };

    let is_dia = |f: &Formula| matches!(f, Formula::Diamond(..));
    let i = b.succ_where(g, "diamond", is_dia)?;
    let outside = Formula::gt(norm(p), var("eps"));
    let [use_, show] = b.two(g, Rule::DCc(i, outside))?;
    b.close(show, Rule::CloseByDuality)?;
    let i = b.succ_where(use_, "diamond", is_dia)?;
    let below = Formula::lt(v, var("vmin"));
    let [dia, bx] = b.two(use_, Rule::DomainDiamond(i, below))?;

    // outside B_eps and inside the unit ball, V stays at least vmin
    let [show, use_] = b.two(bx, Rule::DC(0, ball(p, Term::one())))?;
    b.close(show, Rule::BoxMono(0))?;
    let h = b.one(use_, Rule::DW(0))?;
    let h = b.one(h, Rule::Simp)?;
    let h = b.instantiate_state(h, &annulus_all)?;
    let Formula::Forall(_, a1) = &*annulus_all else {
        unreachable!()
    };
    let Formula::Forall(_, a2) = &**a1 else {
        unreachable!()
    };
    let h = b.mp(h, a2)?;
    b.close(h, Rule::CloseById)?;

    // V falls below vmin
    let i = b.succ_where(dia, "diamond", is_dia)?;
    let h = b.one(dia, Rule::DV(i, "p".into()))?;
    let (region, rate) = dv_parts(&b.seq(h).succedents[0])
        .ok_or_else(|| Builder::missing(h, "variant condition"))?;
    let progress = progress_condition(p, region.clone(), rate.clone());
    let [show, use_] = b.two(h, Rule::Cut(progress.clone()))?;
    let w = b.one(show, Rule::Weaken(Side::Succ, 0))?;
    b.oracle(w)?;
    let g = b.one(use_, Rule::ExistsL(0, Some("p".into())))?;
    let g = b.one(g, Rule::AndL(0))?;
    let g = b.one(g, Rule::ExistsR(0, var("p")))?;
    let [l, r] = b.two(g, Rule::AndR(0))?;
    b.close(l, Rule::CloseById)?;
    let g = b.intro_state(r)?;
    let g = b.one(g, Rule::ImpliesR(0))?;
    let g = b.one(g, Rule::ImpliesR(0))?;
    let step = Formula::implies(region, Formula::ge(rate, var("p")));
    let g = b.instantiate_state(g, &forall_state(p, step.clone()))?;
    let g = b.mp(g, &step)?;
    b.close(g, Rule::CloseById)
}

/// `(region, -V')` from `\exists p: (p > 0 & \forall x: (region -> (e >= c -> -V' >= p)))`.
fn dv_parts(f: &Formula) -> Option<(Formula, Term)> {
    let Formula::Exists(_, body) = f else {
        return None;
    };
    let Formula::And(_, mut q) = (**body).clone() else {
        return None;
    };
    while let Formula::Forall(_, inner) = *q {
        q = inner;
    }
    let Formula::Implies(region, rest) = *q else {
        return None;
    };
    let Formula::Implies(_, goal) = *rest else {
        return None;
    };
    let Formula::Cmp(CmpOp::Ge, rate, _) = *goal else {
        return None;
    };
    Some((*region, rate))
}

/// Runs the canned script for `part` on a fresh tree.
pub fn run_part(prob: &StabilityProblem, part: Part) -> Result<ProofRun, ProofError> {
    let mut b = Builder {
        prob,
        tree: part.fresh_tree(prob),
        steps: vec![],
        failures: vec![],
    };
    let root = b.tree.root().id;
    let handoffs = match part {
        Part::Part1 => vec![part1(&mut b, root)?],
        Part::Part3 => vec![part3(&mut b, root)?],
        Part::Part2 => {
            part2(&mut b, root)?;
            vec![]
        }
        Part::Full => {
            let h = part1(&mut b, root)?;
            let h = part3(&mut b, h)?;
            part2(&mut b, h)?;
            vec![]
        }
    };
    Ok(ProofRun {
        tree: b.tree,
        script: ProofScript {
            name: part,
            steps: b.steps,
        },
        failures: b.failures,
        handoffs,
    })
}

pub fn script_part1(prob: &StabilityProblem) -> Result<ProofScript, ProofError> {
    run_part(prob, Part::Part1).map(|r| r.script)
}

pub fn script_part2(prob: &StabilityProblem) -> Result<ProofScript, ProofError> {
    run_part(prob, Part::Part2).map(|r| r.script)
}

pub fn script_part3(prob: &StabilityProblem) -> Result<ProofScript, ProofError> {
    run_part(prob, Part::Part3).map(|r| r.script)
}

pub fn script_full(prob: &StabilityProblem) -> Result<ProofScript, ProofError> {
    run_part(prob, Part::Full).map(|r| r.script)
}

/// Parts 1, 3 and 2 on `wf |- s & a`.
pub fn prove_asymptotic_stability(prob: &StabilityProblem) -> Result<ProofRun, ProofError> {
    run_part(prob, Part::Full)
}
