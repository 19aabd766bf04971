//! Falsifier runs over oracle-closed leaves.

use super::tree::{FalsifierClean, GoalId, LeafCertificate, ProofTree};
use crate::arith::falsify::{falsify_sequent, Assignment, FalsifyError};

#[derive(Debug, Clone, PartialEq)]
pub struct HonestyResult {
    pub goal: GoalId,
    pub samples: usize,
    pub nonvacuous: usize,
    pub counterexample: Option<Assignment>,
}

impl ProofTree {
    /// Runs the falsifier with `n` samples on every oracle leaf, with the
    /// certificate's witness substituted, and records clean runs.
    pub fn honesty_check(&mut self, n: usize, seed: u64) -> Result<Vec<HonestyResult>, FalsifyError> {
        let mut out = Vec::new();
        for id in self.oracle_leaves() {
            let node = &self.nodes[id];
            let Some(LeafCertificate::OracleWitness { certificate, .. }) = &node.certificate else {
                continue;
            };
            let rule = certificate.witness.as_ref().map(|w| (w.var.clone(), w.rule.clone()));
            let f = |l: &dyn Fn(&str) -> Option<f64>| rule.as_ref().and_then(|r| r.1.eval(l));
            let witness = rule.as_ref().map(|(v, _)| (v.as_str(), &f as &_));
            let report = falsify_sequent(&node.sequent, &self.bounds, n, seed ^ id as u64, witness)?;
            if report.counterexample.is_none() {
                if let Some(LeafCertificate::OracleWitness { falsifier, .. }) = &mut self.nodes[id].certificate {
                    *falsifier = Some(FalsifierClean {
                        seed,
                        samples: report.samples,
                        nonvacuous: report.nonvacuous,
                    });
                }
            }
            out.push(HonestyResult {
                goal: id,
                samples: report.samples,
                nonvacuous: report.nonvacuous,
                counterexample: report.counterexample,
            });
        }
        Ok(out)
    }
}
