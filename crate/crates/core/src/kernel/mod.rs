//! Sequent-calculus proof kernel for the continuous fragment.

pub mod rule;
pub mod rules;
pub mod simp;
pub mod tree;

pub use rule::{parse_rule, Rule, RuleParseError, Side};
pub use rules::{fresh_name, lie_term, neg_lie_term};
pub use tree::{
    FalsifierClean, GoalId, KernelError, LeafCertificate, ProofNode, ProofStatus, ProofTree,
    RuleApplication,
};
pub mod script;

pub use script::{parse_script, print_script, ReplayError, ScriptError, Step};
pub mod applicable;

pub use applicable::RuleTemplate;
pub mod honesty;
pub mod json;

pub use honesty::HonestyResult;
pub use json::{NodeView, TreeView, TREE_FORMAT};
