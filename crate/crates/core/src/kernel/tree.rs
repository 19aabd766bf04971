use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rule::Rule;
use crate::arith::bounds::Bounds;
use crate::arith::decide::{Certificate, DecideError};
use crate::arith::falsify::Assignment;
use crate::syntax::{Sequent, SubstError};

pub type GoalId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("goal {0} does not exist")]
    UnknownGoal(GoalId),
    #[error("stale goal {0}: it already has a rule applied")]
    StaleGoal(GoalId),
    #[error("{rule}: no {side} formula at index {index}")]
    NoSuchFormula {
        rule: &'static str,
        side: &'static str,
        index: usize,
    },
    #[error("{rule} does not apply: {reason}")]
    Mismatch { rule: &'static str, reason: String },
    #[error("{rule}: {source}")]
    Subst {
        rule: &'static str,
        #[source]
        source: SubstError,
    },
    #[error("goal is not first-order")]
    NotFirstOrder,
    #[error("oracle found a counterexample {assignment:?}{}", fmt_diag(diagnostics))]
    CounterExample {
        assignment: Assignment,
        diagnostics: Vec<String>,
    },
    #[error("oracle could not decide the goal: {reason}{}", fmt_diag(diagnostics))]
    Unknown {
        reason: String,
        diagnostics: Vec<String>,
    },
}

fn fmt_diag(d: &[String]) -> String {
    if d.is_empty() {
        String::new()
    } else {
        format!("; false assumptions: {}", d.join(", "))
    }
}

impl From<DecideError> for KernelError {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::Modality => KernelError::NotFirstOrder,
        }
    }
}

/// Evidence attached to a leaf closed without premises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LeafCertificate {
    /// Closed by an axiom of the calculus; `detail` names the matching formulas.
    IdentityClose { detail: String },
    OracleWitness {
        certificate: Certificate,
        /// Filled in by a falsifier honesty run.
        falsifier: Option<FalsifierClean>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifierClean {
    pub seed: u64,
    pub samples: usize,
    pub nonvacuous: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub rule: Rule,
    pub target: GoalId,
    /// The step is not spelled out in the original derivation.
    #[serde(default)]
    pub reconstructed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofNode {
    pub id: GoalId,
    pub parent: Option<GoalId>,
    pub sequent: Sequent,
    pub applied: Option<RuleApplication>,
    pub children: Vec<GoalId>,
    pub closed: bool,
    pub certificate: Option<LeafCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofTree {
    pub nodes: Vec<ProofNode>,
    pub bounds: Bounds,
    /// Names parsed as parameters in rule arguments.
    pub params: BTreeSet<String>,
    pub seed: u64,
    /// Targets in application order.
    pub history: Vec<GoalId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofStatus {
    pub open_goals: Vec<GoalId>,
    pub closed: usize,
    pub complete: bool,
}

impl ProofTree {
    pub fn new(conjecture: Sequent, bounds: Bounds, params: BTreeSet<String>, seed: u64) -> ProofTree {
        ProofTree {
            nodes: vec![ProofNode {
                id: 0,
                parent: None,
                sequent: conjecture,
                applied: None,
                children: vec![],
                closed: false,
                certificate: None,
            }],
            bounds,
            params,
            seed,
            history: vec![],
        }
    }

    pub fn root(&self) -> &ProofNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: GoalId) -> Result<&ProofNode, KernelError> {
        self.nodes.get(id).ok_or(KernelError::UnknownGoal(id))
    }

    /// The goal must exist and have no rule applied yet.
    pub fn open_goal(&self, id: GoalId) -> Result<&ProofNode, KernelError> {
        let n = self.node(id)?;
        if n.applied.is_some() || n.closed {
            return Err(KernelError::StaleGoal(id));
        }
        Ok(n)
    }

    pub(crate) fn add_children(&mut self, parent: GoalId, seqs: Vec<Sequent>) -> Vec<GoalId> {
        let mut ids = Vec::new();
        for s in seqs {
            let id = self.nodes.len();
            self.nodes.push(ProofNode {
                id,
                parent: Some(parent),
                sequent: s,
                applied: None,
                children: vec![],
                closed: false,
                certificate: None,
            });
            ids.push(id);
        }
        self.nodes[parent].children = ids.clone();
        ids
    }

    pub(crate) fn close_leaf(&mut self, id: GoalId, cert: LeafCertificate) {
        self.nodes[id].certificate = Some(cert);
        self.nodes[id].closed = true;
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            if self.nodes[p].children.iter().all(|c| self.nodes[*c].closed) {
                self.nodes[p].closed = true;
                cur = self.nodes[p].parent;
            } else {
                break;
            }
        }
    }

    pub fn open_goals(&self) -> Vec<GoalId> {
        self.nodes
            .iter()
            .filter(|n| n.applied.is_none() && !n.closed)
            .map(|n| n.id)
            .collect()
    }

    pub fn status(&self) -> ProofStatus {
        ProofStatus {
            open_goals: self.open_goals(),
            closed: self.nodes.iter().filter(|n| n.closed).count(),
            complete: self.root().closed,
        }
    }

    /// Leaves closed by the oracle.
    pub fn oracle_leaves(&self) -> Vec<GoalId> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.certificate, Some(LeafCertificate::OracleWitness { .. })))
            .map(|n| n.id)
            .collect()
    }

    /// Structural invariants: parent links, premise counts and closure.
    pub fn validate(&self) -> Result<(), String> {
        for n in &self.nodes {
            for c in &n.children {
                if self.nodes.get(*c).and_then(|c| c.parent) != Some(n.id) {
                    return Err(format!("node {}: child {c} has a wrong parent", n.id));
                }
            }
            if let Some(app) = &n.applied {
                if app.rule.premises() != n.children.len() {
                    return Err(format!(
                        "node {}: {} has {} children",
                        n.id,
                        app.rule.name(),
                        n.children.len()
                    ));
                }
            }
            let expect = if n.children.is_empty() {
                n.certificate.is_some()
            } else {
                n.certificate.is_none() && n.children.iter().all(|c| self.nodes[*c].closed)
            };
            if n.closed != expect {
                return Err(format!("node {}: closure flag disagrees with its evidence", n.id));
            }
            if n.certificate.is_some() && !n.children.is_empty() {
                return Err(format!("node {}: certificate on an inner node", n.id));
            }
        }
        Ok(())
    }
}
