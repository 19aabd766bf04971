//! Terms, formulas, programs and sequents: representation, parsing,
//! printing, substitution and ball-notation expansion.

pub mod ast;
pub mod expand;
pub mod parser;
pub mod printer;
pub mod subst;

pub use ast::*;
pub use expand::{expand, expand_sequent};
pub use parser::{
    parse_formula, parse_formula_with, parse_program_with, parse_sequent_with, parse_term_with,
    split_top_level, Decls, ParseError, Pos,
};
pub use printer::format_rational;
pub use subst::{rename_free, substitute, substitute_term, SubstError};
