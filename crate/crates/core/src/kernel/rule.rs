use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{
    parse_formula_with, parse_term_with, split_top_level, Decls, Formula, ParseError, Term,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Ante,
    Succ,
}

/// A rule with its arguments. Indices address antecedents (`L` rules) or
/// succedents (`R` rules and the ODE rules) of the target goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "args")]
pub enum Rule {
    Cut(Formula),
    DC(usize, Formula),
    DCc(usize, Formula),
    DomainDiamond(usize, Formula),
    DW(usize),
    DV(usize, String),
    DiffInvariant(usize),
    MExistsR(usize, Formula),
    ForallL(usize, Term),
    ForallR(usize, Option<String>),
    ExistsL(usize, Option<String>),
    ExistsR(usize, Term),
    ImpliesR(usize),
    AndR(usize),
    AndL(usize),
    OrR(usize),
    NotR(usize),
    NotL(usize),
    ModusPonens(usize),
    Weaken(Side, usize),
    Simp,
    CloseById,
    CloseByDuality,
    BoxMono(usize),
    CloseByOracle,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Cut(_) => "Cut",
            Rule::DC(..) => "DC",
            Rule::DCc(..) => "DCc",
            Rule::DomainDiamond(..) => "DomainDiamond",
            Rule::DW(_) => "DW",
            Rule::DV(..) => "DV",
            Rule::DiffInvariant(_) => "DiffInvariant",
            Rule::MExistsR(..) => "MExistsR",
            Rule::ForallL(..) => "ForallL",
            Rule::ForallR(..) => "ForallR",
            Rule::ExistsL(..) => "ExistsL",
            Rule::ExistsR(..) => "ExistsR",
            Rule::ImpliesR(_) => "ImpliesR",
            Rule::AndR(_) => "AndR",
            Rule::AndL(_) => "AndL",
            Rule::OrR(_) => "OrR",
            Rule::NotR(_) => "NotR",
            Rule::NotL(_) => "NotL",
            Rule::ModusPonens(_) => "ModusPonens",
            Rule::Weaken(..) => "Weaken",
            Rule::Simp => "Simp",
            Rule::CloseById => "CloseById",
            Rule::CloseByDuality => "CloseByDuality",
            Rule::BoxMono(_) => "BoxMono",
            Rule::CloseByOracle => "CloseByOracle",
        }
    }

    fn args(&self) -> Vec<String> {
        let s = |x: &dyn ToString| x.to_string();
        match self {
            Rule::Cut(f) => vec![s(f)],
            Rule::DC(i, f) | Rule::DCc(i, f) | Rule::DomainDiamond(i, f) | Rule::MExistsR(i, f) => {
                vec![s(i), s(f)]
            }
            Rule::DV(i, n) => vec![s(i), n.clone()],
            Rule::ForallL(i, t) | Rule::ExistsR(i, t) => vec![s(i), s(t)],
            Rule::ForallR(i, n) | Rule::ExistsL(i, n) => {
                let mut v = vec![s(i)];
                v.extend(n.clone());
                v
            }
            Rule::DW(i)
            | Rule::DiffInvariant(i)
            | Rule::ImpliesR(i)
            | Rule::AndR(i)
            | Rule::AndL(i)
            | Rule::OrR(i)
            | Rule::NotR(i)
            | Rule::NotL(i)
            | Rule::ModusPonens(i)
            | Rule::BoxMono(i) => vec![s(i)],
            Rule::Weaken(side, i) => vec![
                match side {
                    Side::Ante => "ante".to_string(),
                    Side::Succ => "succ".to_string(),
                },
                s(i),
            ],
            Rule::Simp | Rule::CloseById | Rule::CloseByDuality | Rule::CloseByOracle => vec![],
        }
    }

    /// Number of premises the rule produces when it applies.
    pub fn premises(&self) -> usize {
        match self {
            Rule::Cut(_)
            | Rule::DC(..)
            | Rule::DCc(..)
            | Rule::DomainDiamond(..)
            | Rule::DiffInvariant(_)
            | Rule::MExistsR(..)
            | Rule::AndR(_) => 2,
            Rule::CloseById | Rule::CloseByDuality | Rule::BoxMono(_) | Rule::CloseByOracle => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.args().join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleParseError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("{rule}: expected {expected}")]
    Arity { rule: String, expected: &'static str },
    #[error("{rule}: bad index `{text}`")]
    Index { rule: String, text: String },
    #[error("{rule}: {source}")]
    Syntax {
        rule: String,
        #[source]
        source: ParseError,
    },
}

/// Parses `Name(arg, ...)`; formula and term arguments use `decls`.
pub fn parse_rule(text: &str, decls: &Decls) -> Result<Rule, RuleParseError> {
    let text = text.trim();
    let (name, inner) = match text.find('(') {
        Some(i) if text.ends_with(')') => (&text[..i], &text[i + 1..text.len() - 1]),
        _ => (text, ""),
    };
    let name = name.trim();
    let args: Vec<&str> = if inner.trim().is_empty() {
        vec![]
    } else {
        split_top_level(inner).into_iter().map(str::trim).collect()
    };
    let rname = name.to_string();
    let arity = |expected: &'static str| RuleParseError::Arity {
        rule: rname.clone(),
        expected,
    };
    let idx = |s: &str| {
        s.parse::<usize>().map_err(|_| RuleParseError::Index {
            rule: rname.clone(),
            text: s.to_string(),
        })
    };
    // formulas may contain top-level commas only inside parentheses, so
    // everything after the index is rejoined
    let rest = |from: usize| args[from..].join(", ");
    let formula = |s: &str| {
        parse_formula_with(s, decls).map_err(|e| RuleParseError::Syntax {
            rule: rname.clone(),
            source: e,
        })
    };
    let term = |s: &str| {
        parse_term_with(s, decls).map_err(|e| RuleParseError::Syntax {
            rule: rname.clone(),
            source: e,
        })
    };
    let one_index = |ctor: fn(usize) -> Rule| -> Result<Rule, RuleParseError> {
        match args.as_slice() {
            [i] => Ok(ctor(idx(i)?)),
            _ => Err(arity("an index")),
        }
    };
    let index_formula = |ctor: fn(usize, Formula) -> Rule| -> Result<Rule, RuleParseError> {
        if args.len() < 2 {
            return Err(arity("an index and a formula"));
        }
        Ok(ctor(idx(args[0])?, formula(&rest(1))?))
    };
    let index_term = |ctor: fn(usize, Term) -> Rule| -> Result<Rule, RuleParseError> {
        if args.len() != 2 {
            return Err(arity("an index and a term"));
        }
        Ok(ctor(idx(args[0])?, term(args[1])?))
    };
    let index_name = |ctor: fn(usize, Option<String>) -> Rule| -> Result<Rule, RuleParseError> {
        match args.as_slice() {
            [i] => Ok(ctor(idx(i)?, None)),
            [i, n] => Ok(ctor(idx(i)?, Some(n.to_string()))),
            _ => Err(arity("an index and an optional name")),
        }
    };
    let nullary = |r: Rule| {
        if args.is_empty() {
            Ok(r)
        } else {
            Err(arity("no arguments"))
        }
    };
    match name {
        "Cut" if !args.is_empty() => Ok(Rule::Cut(formula(&rest(0))?)),
        "Cut" => Err(arity("a formula")),
        "DC" => index_formula(Rule::DC),
        "DCc" => index_formula(Rule::DCc),
        "DomainDiamond" => index_formula(Rule::DomainDiamond),
        "MExistsR" => index_formula(Rule::MExistsR),
        "DW" => one_index(Rule::DW),
        "DiffInvariant" => one_index(Rule::DiffInvariant),
        "ImpliesR" => one_index(Rule::ImpliesR),
        "AndR" => one_index(Rule::AndR),
        "AndL" => one_index(Rule::AndL),
        "OrR" => one_index(Rule::OrR),
        "NotR" => one_index(Rule::NotR),
        "NotL" => one_index(Rule::NotL),
        "ModusPonens" => one_index(Rule::ModusPonens),
        "BoxMono" => one_index(Rule::BoxMono),
        "DV" => match args.as_slice() {
            [i, n] => Ok(Rule::DV(idx(i)?, n.to_string())),
            _ => Err(arity("an index and a name")),
        },
        "ForallL" => index_term(Rule::ForallL),
        "ExistsR" => index_term(Rule::ExistsR),
        "ForallR" => index_name(Rule::ForallR),
        "ExistsL" => index_name(Rule::ExistsL),
        "Weaken" => match args.as_slice() {
            [s, i] => {
                let side = match *s {
                    "ante" => Side::Ante,
                    "succ" => Side::Succ,
                    _ => return Err(arity("`ante` or `succ` and an index")),
                };
                Ok(Rule::Weaken(side, idx(i)?))
            }
            _ => Err(arity("`ante` or `succ` and an index")),
        },
        "Simp" => nullary(Rule::Simp),
        "CloseById" => nullary(Rule::CloseById),
        "CloseByDuality" => nullary(Rule::CloseByDuality),
        "CloseByOracle" => nullary(Rule::CloseByOracle),
        _ => Err(RuleParseError::UnknownRule(name.to_string())),
    }
}
