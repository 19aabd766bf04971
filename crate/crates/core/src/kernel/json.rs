//! Tree JSON (format 1) shared by the CLI, the HTTP API and the UI.

use serde::{Deserialize, Serialize};

use super::tree::{GoalId, LeafCertificate, ProofTree};

pub const TREE_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: GoalId,
    pub parent: Option<GoalId>,
    pub sequent: String,
    pub antecedents: Vec<String>,
    pub succedents: Vec<String>,
    pub rule: Option<String>,
    pub reconstructed: bool,
    pub children: Vec<GoalId>,
    /// `open`, `expanded` (rule applied, not yet closed) or `closed`.
    pub status: String,
    pub certificate: Option<LeafCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeView {
    pub format: u32,
    pub root: GoalId,
    pub complete: bool,
    pub open_goals: Vec<GoalId>,
    pub nodes: Vec<NodeView>,
}

impl ProofTree {
    pub fn view(&self) -> TreeView {
        let status = self.status();
        TreeView {
            format: TREE_FORMAT,
            root: 0,
            complete: status.complete,
            open_goals: status.open_goals,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeView {
                    id: n.id,
                    parent: n.parent,
                    sequent: n.sequent.to_string(),
                    antecedents: n.sequent.antecedents.iter().map(|f| f.to_string()).collect(),
                    succedents: n.sequent.succedents.iter().map(|f| f.to_string()).collect(),
                    rule: n.applied.as_ref().map(|a| a.rule.to_string()),
                    reconstructed: n.applied.as_ref().is_some_and(|a| a.reconstructed),
                    children: n.children.clone(),
                    status: if n.closed {
                        "closed"
                    } else if n.applied.is_some() {
                        "expanded"
                    } else {
                        "open"
                    }
                    .to_string(),
                    certificate: n.certificate.clone(),
                })
                .collect(),
        }
    }
}
