//! The `derive`, `prove` and `simulate` subcommands. Each returns the
//! process exit code and writes its report to `out`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lyapdl::arith::falsify::seed_from_env;
use lyapdl::arith::smtlib::export_obligation;
use lyapdl::dynamics::{
    sample_surfaces, simulate, write_grid_csv, write_trajectory_csv, GridSpec, Surfaces, Variant,
};
use lyapdl::kernel::{parse_script, print_script, LeafCertificate, ProofTree};
use lyapdl::lyapunov::{check_membership, describe, family_constraints};
use lyapdl::proofs::problem::print_problem;
use lyapdl::proofs::{parse_problem, run_part, Part, Reading, StabilityProblem};
use lyapdl::syntax::format_rational;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

fn load(path: &Path, err: &mut dyn Write) -> Result<StabilityProblem, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        EXIT_USAGE
    })?;
    parse_problem(&text).map_err(|e| {
        let _ = writeln!(err, "error: {}: {e}", path.display());
        EXIT_USAGE
    })
}

pub fn derive(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let prob = match load(path, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let t = &prob.template;
    let (fc, report) = match family_constraints(t).and_then(|fc| Ok((fc, check_membership(t, &prob.params)?))) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let p = &prob.params;
    let _ = write!(out, "{}", print_problem(&prob));
    let _ = writeln!(
        out,
        "# derived: a = {}, b = {}, c = {}, d = {}, p11 = {}, p22 = {}",
        format_rational(&p.a),
        format_rational(&p.b),
        format_rational(&p.c),
        format_rational(&p.d),
        format_rational(&t.p11),
        format_rational(&t.p22)
    );
    let _ = writeln!(out, "# equality: {}", fc.equality);
    let _ = writeln!(out, "# wf: {}", fc.wf);
    let _ = writeln!(out);
    let _ = writeln!(out, "family constraints:");
    for c in report.wf.iter().chain(std::iter::once(&report.equality)) {
        let _ = writeln!(out, "  {}", describe(c));
    }
    let _ = writeln!(
        out,
        "0 < p12 < sqrt(p11): {}",
        if report.strict_p12_bound { "yes" } else { "no" }
    );
    if let (Some(v), Some(q)) = (report.v_form, report.q_form) {
        let _ = writeln!(out, "V form: {v:?}, V' form: {q:?}");
    }
    if report.member {
        let _ = writeln!(out, "verdict: member of the stable family");
        EXIT_OK
    } else {
        let failing: Vec<String> = report.failing().iter().map(|f| f.to_string()).collect();
        let _ = writeln!(out, "verdict: not a member; failing: {}", failing.join(", "));
        EXIT_FAIL
    }
}

#[derive(Debug, Clone)]
pub struct ProveOpts {
    pub part: Part,
    pub script: Option<PathBuf>,
    pub emit_tree: Option<PathBuf>,
    pub literal: bool,
    pub falsify: usize,
    pub smtlib: Option<PathBuf>,
    pub print_script: bool,
}

/// Open goals that a part legitimately leaves for another part.
fn handoff_sequents(prob: &StabilityProblem, part: Part) -> Vec<lyapdl::syntax::Sequent> {
    match part {
        Part::Part1 => vec![Part::Part3.root(prob)],
        Part::Part3 => vec![Part::Part2.root(prob)],
        Part::Part2 | Part::Full => vec![],
    }
}

fn print_certificates(tree: &ProofTree, out: &mut dyn Write) {
    for id in tree.oracle_leaves() {
        let Some(LeafCertificate::OracleWitness { certificate, falsifier }) = &tree.nodes[id].certificate
        else {
            continue;
        };
        let witness = certificate
            .witness
            .as_ref()
            .map(|w| match w.reference {
                Some(r) => format!(" {} (= {r:.6e} at eps = 0.1)", w.text),
                None => format!(" {}", w.text),
            })
            .unwrap_or_default();
        let _ = write!(out, "  goal {id}: {:?}{witness}", certificate.pattern);
        if let Some(f) = falsifier {
            let _ = write!(out, " [falsifier clean: {} samples, seed {}]", f.samples, f.seed);
        }
        let _ = writeln!(out);
    }
}

pub fn prove(path: &Path, opts: &ProveOpts, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let prob = match load(path, err) {
        Ok(p) => p
            .with_seed(seed_from_env())
            .with_reading(if opts.literal { Reading::Literal } else { Reading::Annulus }),
        Err(code) => return code,
    };
    let mut failed = false;
    let mut tree = if let Some(script) = &opts.script {
        let text = match fs::read_to_string(script) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", script.display());
                return EXIT_USAGE;
            }
        };
        let mut tree = opts.part.fresh_tree(&prob);
        let steps = match parse_script(&text, &tree.decls()) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", script.display());
                return EXIT_USAGE;
            }
        };
        if let Err(e) = tree.replay(&steps) {
            let _ = writeln!(out, "replay failed: {e}");
            failed = true;
        }
        tree
    } else {
        let run = match run_part(&prob, opts.part) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(out, "replay failed: {e}");
                return EXIT_FAIL;
            }
        };
        for f in &run.failures {
            let _ = writeln!(out, "replay failed: {f}");
            failed = true;
        }
        if opts.print_script {
            let _ = write!(out, "{}", print_script(&run.script.steps));
        }
        run.tree
    };

    if opts.falsify > 0 {
        match tree.honesty_check(opts.falsify, prob.seed) {
            Ok(results) => {
                for r in results.iter().filter(|r| r.counterexample.is_some()) {
                    let _ = writeln!(
                        out,
                        "falsifier: goal {} has a counterexample {:?}",
                        r.goal, r.counterexample
                    );
                    failed = true;
                }
                let _ = writeln!(
                    out,
                    "falsifier: {} oracle leaves, {} samples each, seed {}",
                    results.len(),
                    opts.falsify,
                    prob.seed
                );
            }
            Err(e) => {
                let _ = writeln!(out, "falsifier: {e}");
                failed = true;
            }
        }
    }

    let open = tree.open_goals();
    let handoffs = handoff_sequents(&prob, opts.part);
    let open_seqs: Vec<_> = open.iter().map(|id| tree.nodes[*id].sequent.clone()).collect();
    let only_handoffs = open_seqs == handoffs;
    let _ = writeln!(
        out,
        "part {}: {} nodes, {} open goals{}",
        opts.part,
        tree.nodes.len(),
        open.len(),
        if tree.status().complete {
            ", complete".to_string()
        } else if only_handoffs {
            format!(", handed off: {open:?}")
        } else {
            format!(": {open:?}")
        }
    );
    let _ = writeln!(out, "certificates:");
    print_certificates(&tree, out);

    if let Some(p) = &opts.emit_tree {
        let json = serde_json::to_string_pretty(&tree.view()).expect("tree serializes");
        if let Err(e) = fs::write(p, json) {
            let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
            return EXIT_IO;
        }
    }
    if let Some(dir) = &opts.smtlib {
        if let Err(e) = export_leaves(&tree, dir) {
            let _ = writeln!(err, "error: {e}");
            return EXIT_IO;
        }
    }
    if failed || !only_handoffs {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

fn export_leaves(tree: &ProofTree, dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for id in tree.oracle_leaves() {
        let text = export_obligation(&tree.nodes[id].sequent, &id.to_string())
            .map_err(|e| format!("goal {id}: {e}"))?;
        let p = dir.join(format!("goal-{id}.smt2"));
        fs::write(&p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SimulateOpts {
    pub variant: Variant,
    pub x0: (f64, f64),
    pub dt: f64,
    pub t_end: f64,
    pub grid: GridSpec,
    pub out_dir: PathBuf,
}

/// Parses `lo:hi:n,lo:hi:n` (theta axis, then omega axis).
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let axis = |a: &str| -> Result<((f64, f64), usize), String> {
        let parts: Vec<&str> = a.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("axis `{a}` is not lo:hi:n"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
        if n == 0 || !(lo <= hi) {
            return Err(format!("axis `{a}` needs lo <= hi and n >= 1"));
        }
        Ok(((lo, hi), n))
    };
    let (t, o) = s
        .split_once(',')
        .ok_or_else(|| format!("grid `{s}` is not lo:hi:n,lo:hi:n"))?;
    let ((theta, n_theta), (omega, n_omega)) = (axis(t)?, axis(o)?);
    Ok(GridSpec {
        theta,
        omega,
        n_theta,
        n_omega,
    })
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("`{s}` is not th,w"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(a)?, num(b)?))
}

pub fn simulate_cmd(path: &Path, opts: &SimulateOpts, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let prob = match load(path, err) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let traj = match simulate(&prob.params, opts.variant, opts.x0, opts.dt, opts.t_end) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let (v, extra) = match opts.variant {
        Variant::Linear => (prob.v.clone(), prob.values()),
        Variant::Trig => {
            let t = lyapdl::lyapunov::LyapunovTemplate::resolved(
                &prob.params,
                prob.template.p12.clone(),
                lyapdl::lyapunov::TemplateVariant::Trigonometric,
            );
            (
                lyapdl::lyapunov::template_trig(&t, &prob.params),
                lyapdl::lyapunov::problem_values(&t, &prob.params),
            )
        }
    };
    let surfaces = match Surfaces::new(&prob.params, opts.variant, &v, &extra) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    let grid = sample_surfaces(&prob.params, opts.variant, &surfaces, &opts.grid);
    if let Err(e) = fs::create_dir_all(&opts.out_dir) {
        let _ = writeln!(err, "error: cannot create {}: {e}", opts.out_dir.display());
        return EXIT_IO;
    }
    let tp = opts.out_dir.join("trajectory.csv");
    let gp = opts.out_dir.join("grid.csv");
    for res in [
        write_trajectory_csv(&traj, &surfaces, &tp),
        write_grid_csv(&grid, &gp),
    ] {
        if let Err(e) = res {
            let _ = writeln!(err, "error: {e}");
            return EXIT_IO;
        }
    }
    let (th, w) = traj.last();
    let _ = writeln!(
        out,
        "{} steps, final state ({th:.6e}, {w:.6e}), |x| = {:.6e}",
        traj.times.len() - 1,
        th.hypot(w)
    );
    let _ = writeln!(out, "wrote {} and {}", tp.display(), gp.display());
    EXIT_OK
}
