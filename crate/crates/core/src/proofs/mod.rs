//! Stability problems for the pendulum and the canned three-part proof of
//! asymptotic stability.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::arith::bounds::Bounds;
use crate::dynamics::{program, PendulumParams, Variant};
use crate::lyapunov::{build_wf, problem_values, template_quad_symbolic, LyapunovTemplate, TemplateVariant};
use crate::syntax::{Formula, HybridProgram, ParseError, Rational, Term};

pub mod formulas;
pub mod problem;
pub mod script;

pub use formulas::*;
pub use problem::parse_problem;
pub use script::{
    prove_asymptotic_stability, run_part, script_full, script_part1, script_part2,
    script_part3, Part, ProofError, ProofRun, ProofScript,
};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Which region Cut4 minimizes V over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reading {
    /// `norm(x) <= 1 & norm(x) > eps`.
    #[default]
    Annulus,
    /// `norm(x) <= 1`.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("missing section `{0}:`")]
    MissingSection(&'static str),
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("{0}")]
    Dynamics(String),
    #[error("state dimension is {found}, expected 2")]
    Dimension { found: usize },
    #[error("V mentions `{0}`, which is neither a state variable nor a parameter")]
    StrayName(String),
    #[error("program does not match the linearized pendulum: {0}")]
    Program(String),
    #[error("conjecture is not `wf |- s & a` for this problem")]
    Conjecture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityProblem {
    pub params: PendulumParams,
    pub template: LyapunovTemplate,
    pub program: HybridProgram,
    pub v: Term,
    pub wf: Formula,
    pub reading: Reading,
    pub seed: u64,
}

impl StabilityProblem {
    /// Linearized pendulum with the quadratic template, `p11` resolved.
    pub fn new(params: PendulumParams, p12: Rational) -> StabilityProblem {
        let template = LyapunovTemplate::resolved(&params, p12, TemplateVariant::Quadratic);
        StabilityProblem {
            params,
            template,
            program: program(Variant::Linear),
            v: template_quad_symbolic(),
            wf: build_wf(),
            reading: Reading::Annulus,
            seed: DEFAULT_SEED,
        }
    }

    /// `m = l = 1, f = 0.5, g = 9.8, k1 = -4, k2 = -3, p12 = 1`.
    pub fn worked_instance() -> StabilityProblem {
        use crate::syntax::{rat, ratio};
        let params = PendulumParams::new(rat(1), rat(1), ratio(1, 2), ratio(49, 5), rat(-4), rat(-3))
            .expect("positive m, l, g");
        StabilityProblem::new(params, rat(1))
    }

    pub fn with_reading(mut self, reading: Reading) -> StabilityProblem {
        self.reading = reading;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> StabilityProblem {
        self.seed = seed;
        self
    }

    /// Replaces the program and V, checking they share a 2-dimensional state.
    pub fn with_system(mut self, prog: HybridProgram, v: Term) -> Result<StabilityProblem, ProblemError> {
        let vars = prog.state_vars();
        if vars.len() != 2 {
            return Err(ProblemError::Dimension { found: vars.len() });
        }
        let params = self.param_names();
        if let Some(n) = v
            .names()
            .into_iter()
            .find(|n| !vars.contains(n) && !params.contains(n))
        {
            return Err(ProblemError::StrayName(n));
        }
        self.program = prog;
        self.v = v;
        Ok(self)
    }

    pub fn values(&self) -> BTreeMap<String, Rational> {
        problem_values(&self.template, &self.params)
    }

    pub fn param_names(&self) -> BTreeSet<String> {
        self.values().into_keys().collect()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::point(&self.values())
    }
}
