//! Line-oriented proof scripts: `<n>: Rule(args) @ goal <id>`, `#` comments.

use std::fmt::Write;

use thiserror::Error;

use super::rule::{parse_rule, RuleParseError};
use super::tree::{GoalId, KernelError, ProofTree, RuleApplication};
use crate::syntax::Decls;

const RECONSTRUCTED: &str = "reconstructed";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("line {line}: expected `<n>: Rule(args) @ goal <id>`")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Rule {
        line: usize,
        #[source]
        source: RuleParseError,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: goal {goal}: {source}")]
pub struct ReplayError {
    pub step: usize,
    pub goal: GoalId,
    #[source]
    pub source: KernelError,
}

/// One script line; `step` is the number written in the script.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub step: usize,
    pub app: RuleApplication,
}

pub fn print_script(steps: &[RuleApplication]) -> String {
    let mut out = String::new();
    for (i, s) in steps.iter().enumerate() {
        write!(out, "{}: {} @ goal {}", i + 1, s.rule, s.target).unwrap();
        if s.reconstructed {
            write!(out, "  # {RECONSTRUCTED}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_script(text: &str, decls: &Decls) -> Result<Vec<Step>, ScriptError> {
    let mut steps = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let (code, comment) = match raw.find('#') {
            Some(i) => (&raw[..i], &raw[i + 1..]),
            None => (raw, ""),
        };
        let code = code.trim();
        if code.is_empty() {
            continue;
        }
        let bad = || ScriptError::Malformed { line };
        let (num, rest) = code.split_once(':').ok_or_else(bad)?;
        let step: usize = num.trim().parse().map_err(|_| bad())?;
        let (rule_text, goal) = rest.rsplit_once("@ goal").ok_or_else(bad)?;
        let target: GoalId = goal.trim().parse().map_err(|_| bad())?;
        let rule = parse_rule(rule_text, decls).map_err(|source| ScriptError::Rule { line, source })?;
        steps.push(Step {
            step,
            app: RuleApplication {
                rule,
                target,
                reconstructed: comment.trim() == RECONSTRUCTED,
            },
        });
    }
    Ok(steps)
}

impl ProofTree {
    pub fn decls(&self) -> Decls {
        Decls::with_params(self.params.iter().cloned())
    }

    /// Applies steps in order, stopping at the first failure.
    pub fn replay(&mut self, steps: &[Step]) -> Result<(), ReplayError> {
        for s in steps {
            self.apply(s.app.clone()).map_err(|source| ReplayError {
                step: s.step,
                goal: s.app.target,
                source,
            })?;
        }
        Ok(())
    }

    /// The applied rules in application order, as a replayable script.
    pub fn script(&self) -> Vec<RuleApplication> {
        self.history
            .iter()
            .filter_map(|id| self.nodes[*id].applied.clone())
            .collect()
    }
}
