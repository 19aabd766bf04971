//! The stability, attractivity and reachability formulas and the cut
//! conditions used by the part scripts, all in expanded form.

use crate::syntax::{expand, BallKind, Formula, HybridProgram, Term};

use super::{Reading, StabilityProblem};

fn var(n: &str) -> Term {
    Term::var(n)
}

/// `norm(th, w)` over the state of the problem.
pub fn norm(prob: &StabilityProblem) -> Term {
    Term::norm_of(&prob.program.state_vars())
}

fn in_ball(prob: &StabilityProblem, kind: BallKind, r: Term) -> Formula {
    expand(&Formula::InBall {
        vars: prob.program.state_vars(),
        kind,
        radius: r,
    })
}

/// `norm(x) <= r`.
pub fn ball(prob: &StabilityProblem, r: Term) -> Formula {
    in_ball(prob, BallKind::Closed, r)
}

/// Universal closure over the state variables.
pub fn forall_state(prob: &StabilityProblem, body: Formula) -> Formula {
    prob.program
        .state_vars()
        .iter()
        .rev()
        .fold(body, |acc, v| Formula::forall(v, acc))
}

fn ball_modal(prob: &StabilityProblem, pre: Term, post: Term) -> Formula {
    expand(&Formula::BallModal {
        pre,
        program: prob.program.clone(),
        post,
        diamond: false,
    })
}

fn pos(n: &str) -> Formula {
    Formula::gt(var(n), Term::zero())
}

/// `s`: `\forall eps: (eps > 0 -> \exists del: (del > 0 & _del[P]_eps))`.
pub fn stability_formula(prob: &StabilityProblem) -> Formula {
    Formula::forall(
        "eps",
        Formula::implies(
            pos("eps"),
            Formula::exists(
                "del",
                Formula::and(pos("del"), ball_modal(prob, var("del"), var("eps"))),
            ),
        ),
    )
}

fn eventually(prob: &StabilityProblem, post: Formula) -> Formula {
    Formula::exists(
        "del",
        Formula::and(
            pos("del"),
            forall_state(
                prob,
                Formula::implies(
                    ball(prob, var("del")),
                    Formula::forall("eps", Formula::implies(pos("eps"), post)),
                ),
            ),
        ),
    )
}

/// `a`: from `B_del`, every `B_eps` is reached and never left again.
pub fn attractivity_formula(prob: &StabilityProblem) -> Formula {
    let p = prob.program.clone();
    eventually(
        prob,
        Formula::diamond(p.clone(), Formula::boxed(p, ball(prob, var("eps")))),
    )
}

/// `r`: from `B_del`, every `B_eps` is reached.
pub fn reachability_formula(prob: &StabilityProblem) -> Formula {
    eventually(prob, Formula::diamond(prob.program.clone(), ball(prob, var("eps"))))
}

/// Root conclusion `s & a`.
pub fn asymptotic_stability(prob: &StabilityProblem) -> Formula {
    Formula::and(stability_formula(prob), attractivity_formula(prob))
}

/// Cut1: `s & (s -> a)`.
pub fn mp_cut(prob: &StabilityProblem) -> Formula {
    let s = stability_formula(prob);
    Formula::and(s.clone(), Formula::implies(s, attractivity_formula(prob)))
}

/// Cut2: a positive lower bound `k` of V on the sphere of radius `eps`.
pub fn levelset_condition(prob: &StabilityProblem) -> Formula {
    Formula::exists(
        "k",
        Formula::and(
            pos("k"),
            forall_state(
                prob,
                Formula::implies(
                    in_ball(prob, BallKind::Boundary, var("eps")),
                    Formula::ge(prob.v.clone(), var("k")),
                ),
            ),
        ),
    )
}

/// Matrix of the ball chosen inside the `k`-sublevel set, over `del`.
pub fn delta_ball_condition(prob: &StabilityProblem) -> Formula {
    Formula::conj(vec![
        pos("del"),
        Formula::lt(var("del"), var("eps")),
        forall_state(
            prob,
            Formula::implies(ball(prob, var("del")), Formula::lt(prob.v.clone(), var("k"))),
        ),
    ])
}

/// Differential cut of Part 1: on the sphere, V is at least `k`.
pub fn boundary_condition(prob: &StabilityProblem) -> Formula {
    Formula::implies(
        in_ball(prob, BallKind::Boundary, var("eps")),
        Formula::ge(prob.v.clone(), var("k")),
    )
}

/// Cut4: the minimum `vmin` of V on the unit ball, away from `B_eps` under
/// the annulus reading.
pub fn annulus_condition(prob: &StabilityProblem) -> Formula {
    let unit = ball(prob, Term::one());
    let region = match prob.reading {
        Reading::Annulus => Formula::and(
            unit,
            in_ball(prob, BallKind::Complement, var("eps")),
        ),
        Reading::Literal => unit,
    };
    Formula::exists(
        "vmin",
        forall_state(
            prob,
            Formula::implies(region, Formula::ge(prob.v.clone(), var("vmin"))),
        ),
    )
}

/// Cut5: V decreases at rate at least `p` on `region`; `rate` is `-V'`.
pub fn progress_condition(prob: &StabilityProblem, region: Formula, rate: Term) -> Formula {
    Formula::exists(
        "p",
        Formula::and(
            pos("p"),
            forall_state(prob, Formula::implies(region, Formula::ge(rate, var("p")))),
        ),
    )
}

/// The program as it appears in every modality of the proof.
pub fn ip(prob: &StabilityProblem) -> HybridProgram {
    prob.program.clone()
}
