use serde::{Deserialize, Serialize};

use super::rule::{Rule, Side};
use super::rules::{fresh_name, schema};
use super::tree::{GoalId, KernelError, ProofTree};
use crate::syntax::{CmpOp, Formula};

/// A rule that applies to a goal; `rule` is set when no argument is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTemplate {
    pub name: String,
    /// Script text with `?formula` / `?term` holes.
    pub text: String,
    pub rule: Option<Rule>,
}

fn hole(name: &str, args: &[String]) -> RuleTemplate {
    RuleTemplate {
        name: name.to_string(),
        text: format!("{name}({})", args.join(", ")),
        rule: None,
    }
}

impl ProofTree {
    fn passes(&self, id: GoalId, rule: &Rule) -> bool {
        schema(self, &self.nodes[id].sequent, rule).is_ok()
    }

    /// Rules applicable to an open goal; empty for closed or expanded goals.
    pub fn applicable_rules(&self, id: GoalId) -> Result<Vec<RuleTemplate>, KernelError> {
        let node = self.node(id)?;
        if node.applied.is_some() || node.closed {
            return Ok(vec![]);
        }
        let s = &node.sequent;
        let used = s.free_names();
        let mut out = Vec::new();
        let full = |out: &mut Vec<RuleTemplate>, rule: Rule| {
            if self.passes(id, &rule) {
                out.push(RuleTemplate {
                    name: rule.name().to_string(),
                    text: rule.to_string(),
                    rule: Some(rule),
                });
            }
        };
        for (i, f) in s.succedents.iter().enumerate() {
            let n = i.to_string();
            match f {
                Formula::Implies(..) => full(&mut out, Rule::ImpliesR(i)),
                Formula::And(..) => full(&mut out, Rule::AndR(i)),
                Formula::Or(..) => full(&mut out, Rule::OrR(i)),
                Formula::Not(..) => full(&mut out, Rule::NotR(i)),
                Formula::Forall(x, _) => full(&mut out, Rule::ForallR(i, Some(fresh_name(x, &used)))),
                Formula::Exists(..) => {
                    out.push(hole("ExistsR", &[n.clone(), "?term".into()]));
                    out.push(hole("MExistsR", &[n.clone(), "?formula".into()]));
                }
                Formula::Box(_, post) => {
                    out.push(hole("DC", &[n.clone(), "?formula".into()]));
                    full(&mut out, Rule::DW(i));
                    if matches!(**post, Formula::Cmp(CmpOp::Le | CmpOp::Ge, ..)) {
                        full(&mut out, Rule::DiffInvariant(i));
                    }
                    full(&mut out, Rule::BoxMono(i));
                }
                Formula::Diamond(..) => {
                    out.push(hole("DCc", &[n.clone(), "?formula".into()]));
                    out.push(hole("DomainDiamond", &[n.clone(), "?formula".into()]));
                    full(&mut out, Rule::DV(i, fresh_name("p", &used)));
                }
                _ => {}
            }
            full(&mut out, Rule::Weaken(Side::Succ, i));
        }
        for (i, f) in s.antecedents.iter().enumerate() {
            match f {
                Formula::Forall(..) => out.push(hole("ForallL", &[i.to_string(), "?term".into()])),
                Formula::Exists(x, _) => full(&mut out, Rule::ExistsL(i, Some(fresh_name(x, &used)))),
                Formula::And(..) => full(&mut out, Rule::AndL(i)),
                Formula::Not(..) => full(&mut out, Rule::NotL(i)),
                Formula::Implies(..) => full(&mut out, Rule::ModusPonens(i)),
                _ => {}
            }
            full(&mut out, Rule::Weaken(Side::Ante, i));
        }
        out.push(hole("Cut", &["?formula".into()]));
        if super::simp::simp_sequent(s) != *s {
            full(&mut out, Rule::Simp);
        }
        full(&mut out, Rule::CloseById);
        full(&mut out, Rule::CloseByDuality);
        if !s.has_modality() {
            out.push(RuleTemplate {
                name: "CloseByOracle".into(),
                text: Rule::CloseByOracle.to_string(),
                rule: Some(Rule::CloseByOracle),
            });
        }
        Ok(out)
    }
}
