//! Problem files: `params:`, `program:` and `conjecture:` sections.
//!
//! ```text
//! params:
//!   m = 1
//!   l = 1
//!   f = 0.5
//!   g = 9.8
//!   k1 = -4
//!   k2 = -3
//!   p12 = 1
//! program:
//!   {th' = w, w' = d*th + b*w}
//! conjecture:
//!   wf |- s & a
//! ```
//!
//! `program:` and `conjecture:` may be omitted; they default to the values
//! shown. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{asymptotic_stability, ProblemError, StabilityProblem};
use crate::arith::eval::eval_term_exact;
use crate::arith::poly::Poly;
use crate::dynamics::PendulumParams;
use crate::syntax::{
    expand_sequent, format_rational, parse_program_with, parse_sequent_with, parse_term_with,
    Decls, HybridProgram, ParseError, Rational, Sequent,
};

const SECTIONS: [&str; 3] = ["params", "program", "conjecture"];
const REQUIRED: [&str; 7] = ["m", "l", "f", "g", "k1", "k2", "p12"];

struct Section {
    /// Line number of the first body line.
    first_line: usize,
    lines: Vec<(usize, String)>,
}

impl Section {
    fn text(&self) -> String {
        self.lines
            .iter()
            .map(|(_, l)| l.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn parse_err(&self, source: ParseError) -> ProblemError {
        ProblemError::Parse {
            line: self.first_line + source.pos().line.saturating_sub(1),
            source,
        }
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<&'static str, Section>, ProblemError> {
    let mut out: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split('#').next().unwrap_or("").trim_end();
        if code.trim().is_empty() {
            continue;
        }
        if !code.starts_with(char::is_whitespace) {
            if let Some(name) = code.strip_suffix(':').map(str::trim) {
                let Some(sec) = SECTIONS.iter().find(|s| **s == name) else {
                    return Err(ProblemError::Syntax {
                        line,
                        message: format!("unknown section `{name}`"),
                    });
                };
                if out.contains_key(sec) {
                    return Err(ProblemError::Syntax {
                        line,
                        message: format!("duplicate section `{name}`"),
                    });
                }
                out.insert(
                    sec,
                    Section {
                        first_line: line + 1,
                        lines: vec![],
                    },
                );
                current = Some(sec);
                continue;
            }
        }
        let Some(sec) = current else {
            return Err(ProblemError::Syntax {
                line,
                message: "text before the first section".into(),
            });
        };
        let s = out.get_mut(sec).expect("section exists");
        if s.lines.is_empty() {
            s.first_line = line;
        }
        s.lines.push((line, code.trim().to_string()));
    }
    Ok(out)
}

fn parse_params(sec: &Section) -> Result<BTreeMap<String, Rational>, ProblemError> {
    let mut vals = BTreeMap::new();
    for (line, l) in &sec.lines {
        let syntax = |message: String| ProblemError::Syntax {
            line: *line,
            message,
        };
        let (name, value) = l
            .split_once('=')
            .ok_or_else(|| syntax("expected `name = value`".into()))?;
        let name = name.trim();
        let term = parse_term_with(value.trim(), &Decls::default()).map_err(|source| {
            ProblemError::Parse {
                line: *line,
                source,
            }
        })?;
        let v = eval_term_exact(&term, &BTreeMap::new())
            .ok_or_else(|| syntax(format!("value of `{name}` is not a constant")))?;
        if vals.insert(name.to_string(), v).is_some() {
            return Err(syntax(format!("`{name}` given twice")));
        }
    }
    Ok(vals)
}

fn same_program(given: &HybridProgram, expected: &HybridProgram) -> Result<(), String> {
    if given.state_vars() != expected.state_vars() {
        return Err(format!(
            "state variables {:?}, expected {:?}",
            given.state_vars(),
            expected.state_vars()
        ));
    }
    if given.domain != expected.domain {
        return Err(format!("domain `{}`, expected `{}`", given.domain, expected.domain));
    }
    for (g, e) in given.odes.iter().zip(&expected.odes) {
        let norm = |t| Poly::from_term(t).map_err(|e| e.to_string());
        if norm(&g.rhs)? != norm(&e.rhs)? {
            return Err(format!("{}' = {}, expected {}' = {}", g.var, g.rhs, e.var, e.rhs));
        }
    }
    Ok(())
}

/// Root sequent `wf |- s & a` of the problem.
pub fn root_sequent(prob: &StabilityProblem) -> Sequent {
    Sequent::new(vec![prob.wf.clone()], vec![asymptotic_stability(prob)])
}

pub fn parse_problem(text: &str) -> Result<StabilityProblem, ProblemError> {
    let sections = split_sections(text)?;
    let params = sections
        .get("params")
        .ok_or(ProblemError::MissingSection("params"))?;
    let vals = parse_params(params)?;
    if let Some((line, l)) = params.lines.iter().find(|(_, l)| {
        let n = l.split('=').next().unwrap_or("").trim();
        !REQUIRED.contains(&n)
    }) {
        return Err(ProblemError::Syntax {
            line: *line,
            message: format!("unknown parameter in `{l}`"),
        });
    }
    let get = |n: &'static str| vals.get(n).cloned().ok_or(ProblemError::MissingParam(n));
    let pp = PendulumParams::new(get("m")?, get("l")?, get("f")?, get("g")?, get("k1")?, get("k2")?)
        .map_err(|e| ProblemError::Dynamics(e.to_string()))?;
    let prob = StabilityProblem::new(pp, get("p12")?);
    let decls = Decls::with_params(prob.param_names());

    if let Some(sec) = sections.get("program") {
        let given = parse_program_with(&sec.text(), &decls).map_err(|e| sec.parse_err(e))?;
        same_program(&given, &prob.program).map_err(ProblemError::Program)?;
    }
    if let Some(sec) = sections.get("conjecture") {
        let text = sec.text();
        let compact: String = text.split_whitespace().collect();
        if compact != "wf|-s&a" {
            let given = parse_sequent_with(&text, &decls).map_err(|e| sec.parse_err(e))?;
            if expand_sequent(&given) != root_sequent(&prob) {
                return Err(ProblemError::Conjecture);
            }
        }
    }
    Ok(prob)
}

/// Problem file text for `prob`; `parse_problem` reads it back.
pub fn print_problem(prob: &StabilityProblem) -> String {
    let p = &prob.params;
    let mut out = String::from("params:\n");
    for (n, v) in [
        ("m", &p.m),
        ("l", &p.l),
        ("f", &p.f),
        ("g", &p.g),
        ("k1", &p.k1),
        ("k2", &p.k2),
        ("p12", &prob.template.p12),
    ] {
        writeln!(out, "  {n} = {}", format_rational(v)).unwrap();
    }
    writeln!(out, "program:\n  {}", prob.program).unwrap();
    out.push_str("conjecture:\n  wf |- s & a\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ratio;

    const WORKED: &str = "# worked instance\nparams:\n  m = 1\n  l = 1\n  f = 0.5\n  g = 9.8\n  k1 = -4\n  k2 = -3\n  p12 = 1\nprogram:\n  {th' = w, w' = d*th + b*w}\nconjecture:\n  wf |- s & a\n";

    #[test]
    fn parses_worked_instance() {
        let p = parse_problem(WORKED).unwrap();
        assert_eq!(p, StabilityProblem::worked_instance());
        assert_eq!(p.template.p11, ratio(163, 10));
    }

    #[test]
    fn print_parse_round_trip() {
        let p = StabilityProblem::worked_instance();
        assert_eq!(parse_problem(&print_problem(&p)).unwrap(), p);
    }

    #[test]
    fn program_is_checked_up_to_normalization() {
        let ok = WORKED.replace("d*th + b*w", "b*w + th*d");
        assert!(parse_problem(&ok).is_ok());
        let bad = WORKED.replace("d*th + b*w", "d*th");
        assert!(matches!(parse_problem(&bad), Err(ProblemError::Program(_))));
    }

    #[test]
    fn errors_carry_lines() {
        let bad = WORKED.replace("f = 0.5", "f = 0.5 +");
        match parse_problem(&bad) {
            Err(ProblemError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let missing = WORKED.replace("  p12 = 1\n", "");
        assert_eq!(parse_problem(&missing), Err(ProblemError::MissingParam("p12")));
        assert!(matches!(
            parse_problem("garbage"),
            Err(ProblemError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn explicit_conjecture_must_match() {
        let wrong = WORKED.replace("wf |- s & a", "a < 0 |- 1 > 0");
        assert_eq!(parse_problem(&wrong), Err(ProblemError::Conjecture));
    }
}
