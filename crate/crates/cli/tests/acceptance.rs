//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use lyapdl::arith::eval::eval_term_f64;
use lyapdl::arith::falsify::seed_from_env;
use lyapdl::dynamics::{program, simulate, PendulumParams, Surfaces, Variant};
use lyapdl::kernel::{LeafCertificate, ProofTree};
use lyapdl::lyapunov::{
    check_membership, instantiate_program, q_matrix, template_quad, template_trig, total_derivative,
    LyapunovTemplate, TemplateVariant,
};
use lyapdl::proofs::{parse_problem, prove_asymptotic_stability, run_part, Part, StabilityProblem};
use lyapdl::syntax::{parse_formula_with, rat, ratio, Rational};
use num_traits::ToPrimitive;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 0.1;
const REL_TOL: f64 = 1e-3;
const FIDELITY_TOL: f64 = 1e-9;
const DESCENT_SLACK: f64 = 1e-8;
const HONESTY_SAMPLES: usize = 10_000;
const ROUND_TRIPS: u32 = 1_000;

type Outcome = Result<String, String>;

fn problem_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn f64_of(r: &Rational) -> f64 {
    r.to_f64().expect("finite rational")
}

fn witness_reference(tree: &ProofTree, var: &str) -> Option<f64> {
    tree.oracle_leaves().into_iter().find_map(|id| match &tree.nodes[id].certificate {
        Some(LeafCertificate::OracleWitness { certificate, .. }) => certificate
            .witness
            .as_ref()
            .filter(|w| w.var == var)
            .and_then(|w| w.reference),
        _ => None,
    })
}

/// Minimum of V over the circle of radius `eps`, by dense sampling.
fn circle_min(prob: &StabilityProblem, eps: f64) -> f64 {
    let v = template_quad(&prob.template, &prob.params);
    (0..100_000)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 100_000.0;
            let (th, w) = (eps * t.cos(), eps * t.sin());
            eval_term_f64(&v, &|n: &str| match n {
                "th" => Some(th),
                "w" => Some(w),
                _ => None,
            })
            .expect("V evaluates")
        })
        .fold(f64::INFINITY, f64::min)
}

fn rel_close(got: f64, want: f64) -> bool {
    ((got - want) / want).abs() <= REL_TOL
}

fn end_to_end() -> Outcome {
    let path = problem_path("worked.prob");
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_lyapdl"))
        .args(["prove", path.to_str().unwrap(), "--part", "full"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let stdout = String::from_utf8_lossy(&out.stdout);
    if out.status.code() != Some(0) || !stdout.contains("0 open goals, complete") {
        return Err(format!("prove exited {:?}: {stdout}", out.status.code()));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    let prob = StabilityProblem::worked_instance();
    let run = prove_asymptotic_stability(&prob).map_err(|e| e.to_string())?;
    let k = witness_reference(&run.tree, "k").ok_or("no k certificate")?;
    let p = witness_reference(&run.tree, "p").ok_or("no p certificate")?;
    let k_oracle = circle_min(&prob, EPS);
    // -V' = 13.8 th^2 + 1.5 w^2 is smallest along w on the circle
    let p_oracle = 1.5 * EPS * EPS;
    if !rel_close(k, k_oracle) || !rel_close(p, p_oracle) {
        return Err(format!("k = {k:e} (oracle {k_oracle:e}), p = {p:e} (oracle {p_oracle:e})"));
    }
    Ok(format!(
        "0 open goals in {:.2}s, k = {k:.4e} (oracle {k_oracle:.4e}), p = {p:.4e}",
        elapsed.as_secs_f64()
    ))
}

fn cross_term() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let params = random_params(&mut rng);
        let p12 = ratio(rng.gen_range(1..40), 10);
        for variant in [TemplateVariant::Quadratic, TemplateVariant::Trigonometric] {
            let t = LyapunovTemplate::resolved(&params, p12.clone(), variant);
            let q = q_matrix(&t, &params);
            if q.q != rat(0) {
                return Err(format!("off-diagonal {} for {params:?}", q.q));
            }
        }
    }
    let prob = StabilityProblem::worked_instance();
    let v = template_quad(&prob.template, &prob.params);
    let prog = instantiate_program(&program(Variant::Linear), &prob.params.values());
    let vdot = total_derivative(&v, &prog).map_err(|e| e.to_string())?.to_string();
    if vdot != "-13.8*th^2 - 1.5*w^2" {
        return Err(format!("V' prints as {vdot}"));
    }
    Ok(format!("off-diagonal 0 for 100 resolved templates, V' = {vdot}"))
}

fn trig_fidelity() -> Outcome {
    let prob = StabilityProblem::worked_instance();
    let pp = &prob.params;
    // an unresolved P so the cross term is present
    let t = LyapunovTemplate {
        p11: ratio(203, 10),
        p12: ratio(7, 5),
        p22: ratio(3, 2),
        variant: TemplateVariant::Trigonometric,
    };
    let v = template_trig(&t, pp);
    let vdot = total_derivative(&v, &program(Variant::Trig)).map_err(|e| e.to_string())?;
    let vals: BTreeMap<String, f64> = pp.values().iter().map(|(k, v)| (k.clone(), f64_of(v))).collect();
    let (m, l, g, a, b) = (vals["m"], vals["l"], vals["g"], vals["a"], vals["b"]);
    let (p11, p12, p22) = (f64_of(&t.p11), f64_of(&t.p12), f64_of(&t.p22));
    let q11 = 2.0 * a * p12;
    let q12 = p11 + b * p12 + a * p22;
    let q22 = 2.0 * (p12 + b * p22);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (th, w): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let got = eval_term_f64(&vdot, &|n: &str| match n {
            "th" => Some(th),
            "w" => Some(w),
            other => vals.get(other).copied(),
        })
        .ok_or("V' does not evaluate")?;
        let xqx = q11 * th * th + 2.0 * q12 * th * w + q22 * w * w;
        let want = m * l * l / 2.0 * xqx + m * l * ((g - g * p22) * w - g * p12 * th) * th.sin();
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    if worst < FIDELITY_TOL {
        Ok(format!("max deviation {worst:.2e} over 1000 points"))
    } else {
        Err(format!("max deviation {worst:e}"))
    }
}

/// Random physical parameters with `a < 0` and `b <= -1`.
fn random_params(rng: &mut ChaCha8Rng) -> PendulumParams {
    let m = ratio(rng.gen_range(5..=20), 10);
    let l = ratio(rng.gen_range(5..=20), 10);
    let f = ratio(rng.gen_range(0..=10), 10);
    let k1 = ratio(-rng.gen_range(5..=100), 10);
    let b = ratio(-rng.gen_range(10..=40), 10);
    // b = (f l + k2)/(m l)
    let k2 = &b * &m * &l - &f * &l;
    PendulumParams::new(m, l, f, ratio(49, 5), k1, k2).expect("positive m, l, g")
}

fn random_member(rng: &mut ChaCha8Rng) -> StabilityProblem {
    loop {
        let params = random_params(rng);
        let p12 = ratio(rng.gen_range(2..=15), 10);
        let prob = StabilityProblem::new(params, p12);
        if check_membership(&prob.template, &prob.params).is_ok_and(|r| r.member) {
            return prob;
        }
    }
}

fn sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..20 {
        let prob = random_member(&mut rng);
        let report = check_membership(&prob.template, &prob.params).map_err(|e| e.to_string())?;
        if !report.member {
            return Err(format!("instance {i}: not a member"));
        }
        let run = prove_asymptotic_stability(&prob).map_err(|e| format!("instance {i}: {e}"))?;
        if !run.complete() {
            return Err(format!("instance {i}: open goals {:?}", run.tree.open_goals()));
        }
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let x0 = (0.02 * angle.cos(), 0.02 * angle.sin());
        let traj = simulate(&prob.params, Variant::Linear, x0, 1e-3, 20.0).map_err(|e| e.to_string())?;
        let (th, w) = traj.last();
        if th.hypot(w) >= 1e-3 {
            return Err(format!("instance {i}: |x(20)| = {:e}", th.hypot(w)));
        }
        let s = Surfaces::new(&prob.params, Variant::Linear, &prob.v, &prob.values()).map_err(|e| e.to_string())?;
        let vs: Vec<f64> = traj.states.iter().map(|&x| s.v(x)).collect();
        if let Some(j) = vs.windows(2).position(|p| p[1] > p[0] + DESCENT_SLACK) {
            return Err(format!("instance {i}: V rises at step {j}"));
        }
    }
    Ok("20 instances: member, proved, |x(20)| < 1e-3, V monotone".into())
}

fn negative_control() -> Outcome {
    let text = std::fs::read_to_string(problem_path("unstable.prob")).map_err(|e| e.to_string())?;
    let prob = parse_problem(&text).map_err(|e| e.to_string())?;
    if f64_of(&prob.params.b) != 2.5 {
        return Err(format!("b = {}", prob.params.b));
    }
    let report = check_membership(&prob.template, &prob.params).map_err(|e| e.to_string())?;
    if report.member {
        return Err("wf holds".into());
    }
    let named = parse_formula_with("b < -p12", &lyapdl::syntax::Decls::with_params(prob.param_names()))
        .map_err(|e| e.to_string())?;
    if !report.failing().contains(&&named) {
        return Err("b < -p12 not among failing conjuncts".into());
    }
    let run = run_part(&prob, Part::Full).map_err(|e| e.to_string())?;
    let failure = run.first_failure().ok_or("proof did not fail")?;
    if !failure.to_string().contains("b < -p12") {
        return Err(format!("failure does not name the conjunct: {failure}"));
    }
    let traj = simulate(&prob.params, Variant::Linear, (0.02, 0.0), 1e-3, 5.0).map_err(|e| e.to_string())?;
    let max = traj.states.iter().map(|(t, w)| t.hypot(*w)).fold(0.0, f64::max);
    if max <= 1.0 {
        return Err(format!("max |x| = {max}"));
    }
    Ok(format!(
        "wf fails, proof fails at step {} naming b < -p12, max |x| on [0,5] = {max:.3e}",
        failure.step
    ))
}

fn honesty() -> Outcome {
    let seed = seed_from_env();
    let prob = StabilityProblem::worked_instance().with_seed(seed);
    let mut run = prove_asymptotic_stability(&prob).map_err(|e| e.to_string())?;
    let results = run.tree.honesty_check(HONESTY_SAMPLES, seed).map_err(|e| e.to_string())?;
    let leaves = run.tree.oracle_leaves().len();
    if results.len() != leaves {
        return Err(format!("{} of {leaves} leaves checked", results.len()));
    }
    if let Some(r) = results.iter().find(|r| r.counterexample.is_some()) {
        return Err(format!("goal {}: counterexample {:?}", r.goal, r.counterexample));
    }
    if let Some(r) = results.iter().find(|r| r.samples < HONESTY_SAMPLES) {
        return Err(format!("goal {}: only {} samples", r.goal, r.samples));
    }
    Ok(format!("{leaves} oracle leaves x {HONESTY_SAMPLES} samples, seed {seed}, 0 counterexamples"))
}

fn round_trip() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: ROUND_TRIPS,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let count = std::cell::Cell::new(0u32);
    runner
        .run(&common::arb_formula(), |f| {
            count.set(count.get() + 1);
            let text = f.to_string();
            match parse_formula_with(&text, &common::decls()) {
                Ok(back) if back == f => Ok(()),
                other => Err(TestCaseError::fail(format!("{text} -> {other:?}"))),
            }
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{} random formulas, 0 failures", count.get()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("end-to-end proof", end_to_end),
        ("cross-term cancellation", cross_term),
        ("trigonometric derivative fidelity", trig_fidelity),
        ("family soundness sweep", sweep),
        ("negative control b = +2.5", negative_control),
        ("oracle honesty", honesty),
        ("parser round-trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
