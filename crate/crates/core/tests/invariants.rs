use lyapdl::arith::eval::eval_term_f64;
use lyapdl::arith::quadform::{Definiteness, QuadForm};
use lyapdl::dynamics::{simulate, PendulumParams, Surfaces, Variant};
use lyapdl::lyapunov::{check_membership, total_derivative};
use lyapdl::proofs::StabilityProblem;
use lyapdl::syntax::{rat, ratio, HybridProgram, Ode, Formula, Term};
use proptest::prelude::*;

/// Extremes of the form over 7200 points of the unit circle.
fn circle_extremes(q: &QuadForm) -> (f64, f64) {
    (0..7200)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 7200.0;
            q.eval_f64(t.cos(), t.sin())
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn quad(p11: Term, p12: Term, p22: Term) -> Term {
    let (th, w) = (Term::var("th"), Term::var("w"));
    Term::add(
        Term::add(
            Term::mul(p11, Term::pow(th.clone(), 2)),
            Term::mul(Term::mul(Term::int(2), p12), Term::mul(th.clone(), w.clone())),
        ),
        Term::mul(p22, Term::pow(w, 2)),
    )
}

fn eval_at(t: &Term, th: f64, w: f64) -> f64 {
    eval_term_f64(t, &|n: &str| match n {
        "th" => Some(th),
        "w" => Some(w),
        _ => None,
    })
    .expect("closed term")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn sylvester_agrees_with_sampling(p in -10i64..=10, q in -10i64..=10, r in -10i64..=10) {
        let form = QuadForm::new(["th", "w"], rat(p), rat(q), rat(r));
        let (lo, hi) = circle_extremes(&form);
        match form.definiteness() {
            Definiteness::PositiveDefinite => prop_assert!(lo > 0.0),
            Definiteness::NegativeDefinite => prop_assert!(hi < 0.0),
            Definiteness::PositiveSemidefinite => prop_assert!(lo > -1e-9 && lo < 1e-3),
            Definiteness::NegativeSemidefinite => prop_assert!(hi < 1e-9 && hi > -1e-3),
            Definiteness::Indefinite => prop_assert!(lo < 0.0 && hi > 0.0),
            Definiteness::Zero => prop_assert!(lo == 0.0 && hi == 0.0),
        }
    }

    #[test]
    fn total_derivative_matches_finite_differences(
        coeffs in prop::array::uniform7(-30i64..=30),
        th in -1.0f64..1.0,
        w in -1.0f64..1.0,
    ) {
        let c = |i: usize| Term::Const(ratio(coeffs[i], 10));
        let v = quad(c(0), c(1), c(2));
        let f1 = Term::add(Term::mul(c(3), Term::var("th")), Term::mul(c(4), Term::var("w")));
        let f2 = Term::add(
            Term::mul(c(5), Term::var("th")),
            Term::mul(c(6), Term::sin(Term::var("th"))),
        );
        let prog = HybridProgram {
            odes: vec![
                Ode { var: "th".into(), rhs: f1.clone() },
                Ode { var: "w".into(), rhs: f2.clone() },
            ],
            domain: Box::new(Formula::True),
        };
        let vdot = total_derivative(&v, &prog).unwrap();
        let h = 1e-6;
        let dv_dth = (eval_at(&v, th + h, w) - eval_at(&v, th - h, w)) / (2.0 * h);
        let dv_dw = (eval_at(&v, th, w + h) - eval_at(&v, th, w - h)) / (2.0 * h);
        let want = dv_dth * eval_at(&f1, th, w) + dv_dw * eval_at(&f2, th, w);
        let got = eval_at(&vdot, th, w);
        prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {}", got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn v_decreases_along_member_trajectories(
        k1 in -100i64..=-5,
        b in -40i64..=-10,
        p12 in 2i64..=15,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let b = ratio(b, 10);
        // m = l = 1, f = 0.5, so k2 = b - 0.5
        let k2 = &b - ratio(1, 2);
        let params = PendulumParams::new(rat(1), rat(1), ratio(1, 2), ratio(49, 5), ratio(k1, 10), k2).unwrap();
        let prob = StabilityProblem::new(params, ratio(p12, 10));
        prop_assume!(check_membership(&prob.template, &prob.params).unwrap().member);
        let s = Surfaces::new(&prob.params, Variant::Linear, &prob.v, &prob.values()).unwrap();
        let x0 = (0.5 * angle.cos(), 0.5 * angle.sin());
        let traj = simulate(&prob.params, Variant::Linear, x0, 1e-2, 10.0).unwrap();
        for pair in traj.states.windows(2) {
            prop_assert!(s.v(pair[1]) <= s.v(pair[0]) + 1e-8);
            prop_assert!(s.vdot(pair[0]) <= 1e-12);
        }
    }
}
