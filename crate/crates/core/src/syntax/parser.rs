//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := quant | formula ("->" | "|" | "&") formula | "!" formula
//!          | "[" program "]" formula | "<" program ">" formula
//!          | "_" atom ("[" program "]" | "<" program ">") "_" atom
//!          | vars "in" ("B_" | "dB_" | "coB_") atom | term cmp term
//! program := "{" ode ("," ode)* ("&" formula)? "}"
//! ode     := ident "'" "=" term
//! quant   := ("\forall" | "\exists") ident ":" formula
//! ```
//!
//! `->`, `|` and `&` are right-associative with increasing binding strength.
//! A quantifier body extends as far to the right as possible.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Copy)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {}, found {found}", expected.join(" | "))]
    Unexpected {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: Pos },
    #[error("unknown ball notation `{form}` at {pos}")]
    UnknownSugar { form: String, pos: Pos },
    #[error("invalid syntax at {pos}: {message}")]
    Invalid { message: String, pos: Pos },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Unexpected { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::UnknownSugar { pos, .. }
            | ParseError::Invalid { pos, .. } => *pos,
        }
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

/// Declaration context: which identifiers denote parameters and, when
/// `vars` is set, which other identifiers are allowed at all.
#[derive(Debug, Clone, Default)]
pub struct Decls {
    pub params: BTreeSet<String>,
    pub vars: Option<BTreeSet<String>>,
}

impl Decls {
    pub fn with_params<I: IntoIterator<Item = S>, S: Into<String>>(params: I) -> Decls {
        Decls {
            params: params.into_iter().map(Into::into).collect(),
            vars: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Rational),
    Prime,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Cmp(CmpOp),
    Bang,
    Amp,
    Bar,
    Arrow,
    Forall,
    Exists,
    Underscore,
    In,
    True,
    False,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(n) => write!(f, "number `{n}`"),
            Tok::Prime => f.write_str("`'`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::Cmp(op) => write!(f, "`{op}`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Forall => f.write_str("`\\forall`"),
            Tok::Exists => f.write_str("`\\exists`"),
            Tok::Underscore => f.write_str("`_`"),
            Tok::In => f.write_str("`in`"),
            Tok::True => f.write_str("`true`"),
            Tok::False => f.write_str("`false`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const RESERVED: &[&str] = &["in", "true", "false", "sin", "cos", "norm"];

fn lex(src: &str) -> ParseResult<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '\'' => Tok::Prime,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '_' => Tok::Underscore,
            '=' => Tok::Cmp(CmpOp::Eq),
            '-' if next == Some('>') => Tok::Arrow,
            '-' => Tok::Minus,
            '<' if next == Some('=') => Tok::Cmp(CmpOp::Le),
            '<' => Tok::Cmp(CmpOp::Lt),
            '>' if next == Some('=') => Tok::Cmp(CmpOp::Ge),
            '>' => Tok::Cmp(CmpOp::Gt),
            '!' if next == Some('=') => Tok::Cmp(CmpOp::Ne),
            '!' => Tok::Bang,
            '\\' => {
                let word: String = chars[i + 1..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphabetic())
                    .collect();
                let tok = match word.as_str() {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => {
                        return Err(ParseError::Unexpected {
                            pos,
                            expected: vec!["`\\forall`".into(), "`\\exists`".into()],
                            found: format!("`\\{word}`"),
                        })
                    }
                };
                advance(1 + word.len(), &mut i);
                out.push((tok, pos));
                continue;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[start..j].iter().collect();
                advance(j - start, &mut i);
                out.push((Tok::Number(parse_decimal(&text)), pos));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                advance(j - start, &mut i);
                let tok = match text.as_str() {
                    "in" => Tok::In,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(text),
                };
                out.push((tok, pos));
                continue;
            }
            other => {
                return Err(ParseError::Unexpected {
                    pos,
                    expected: vec!["a token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        let width = match tok {
            Tok::Arrow | Tok::Cmp(CmpOp::Le) | Tok::Cmp(CmpOp::Ge) | Tok::Cmp(CmpOp::Ne) => 2,
            _ => 1,
        };
        advance(width, &mut i);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Exact value of an unsigned decimal literal such as `13.8`.
pub fn parse_decimal(text: &str) -> Rational {
    match text.split_once('.') {
        None => Rational::from_integer(text.parse::<BigInt>().expect("digits")),
        Some((int, frac)) => {
            let digits: BigInt = format!("{int}{frac}").parse().expect("digits");
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            Rational::new(digits, scale)
        }
    }
}

struct Parser<'d> {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    decls: &'d Decls,
    /// Quantifier- or program-bound names currently in scope.
    bound: Vec<String>,
}

impl<'d> Parser<'d> {
    fn new(src: &str, decls: &'d Decls) -> ParseResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            decls,
            bound: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &[&str]) -> ParseResult<T> {
        Err(ParseError::Unexpected {
            pos: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> ParseResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(&[what])
        }
    }

    fn expect_ident(&mut self) -> ParseResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(&["identifier"]),
        }
    }

    fn finish(&mut self) -> ParseResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(&["end of input"])
        }
    }

    fn classify(&self, name: &str, pos: Pos) -> ParseResult<Term> {
        if self.bound.iter().any(|b| b == name) {
            return Ok(Term::Var(name.to_string()));
        }
        if self.decls.params.contains(name) {
            return Ok(Term::Param(name.to_string()));
        }
        match &self.decls.vars {
            Some(vars) if !vars.contains(name) => Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                pos,
            }),
            _ => Ok(Term::Var(name.to_string())),
        }
    }

    // ---- formulas ----

    fn formula(&mut self) -> ParseResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> ParseResult<Formula> {
        let lhs = self.conjunction()?;
        if *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.disjunction()?;
            return Ok(Formula::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> ParseResult<Formula> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.conjunction()?;
            return Ok(Formula::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> ParseResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall | Tok::Exists => {
                let is_forall = self.bump() == Tok::Forall;
                let var = self.expect_ident()?;
                self.expect(Tok::Colon, "`:`")?;
                self.bound.push(var.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                Ok(if is_forall {
                    Formula::forall(&var, body)
                } else {
                    Formula::exists(&var, body)
                })
            }
            Tok::LBracket => {
                self.bump();
                let prog = self.program()?;
                self.expect(Tok::RBracket, "`]`")?;
                let post = self.with_state(&prog, |p| p.unary())?;
                Ok(Formula::boxed(prog, post))
            }
            Tok::Cmp(CmpOp::Lt) if *self.peek_at(1) == Tok::LBrace => {
                self.bump();
                let prog = self.program()?;
                self.expect(Tok::Cmp(CmpOp::Gt), "`>`")?;
                let post = self.with_state(&prog, |p| p.unary())?;
                Ok(Formula::diamond(prog, post))
            }
            Tok::Underscore => self.ball_modal(),
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                if let Some(vars) = self.tuple_before_in() {
                    return self.in_ball(vars);
                }
                let save = self.pos;
                self.bump();
                let attempt = self.formula().and_then(|f| {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(f)
                });
                match attempt {
                    Ok(f) if !self.continues_term() => Ok(f),
                    _ => {
                        self.pos = save;
                        self.comparison()
                    }
                }
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::In => {
                self.bump();
                self.in_ball(vec![name])
            }
            _ => self.comparison(),
        }
    }

    fn with_state<T>(
        &mut self,
        prog: &HybridProgram,
        f: impl FnOnce(&mut Self) -> ParseResult<T>,
    ) -> ParseResult<T> {
        let n = self.bound.len();
        self.bound.extend(prog.state_vars());
        let out = f(self);
        self.bound.truncate(n);
        out
    }

    /// After a parenthesized formula: would the text continue as a term?
    fn continues_term(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret | Tok::Cmp(_)
        )
    }

    /// Recognizes `(a, b, ...) in` without consuming input.
    fn tuple_before_in(&self) -> Option<Vec<String>> {
        let mut k = 1;
        let mut vars = Vec::new();
        loop {
            match self.peek_at(k) {
                Tok::Ident(s) => vars.push(s.clone()),
                _ => return None,
            }
            k += 1;
            match self.peek_at(k) {
                Tok::Comma => k += 1,
                Tok::RParen => break,
                _ => return None,
            }
        }
        if *self.peek_at(k + 1) == Tok::In {
            Some(vars)
        } else {
            None
        }
    }

    fn in_ball(&mut self, vars: Vec<String>) -> ParseResult<Formula> {
        if *self.peek() == Tok::LParen {
            // skip `( a, b, ... )`
            while *self.peek() != Tok::RParen {
                self.bump();
            }
            self.bump();
        }
        self.expect(Tok::In, "`in`")?;
        let pos = self.here();
        let name = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                s
            }
            _ => return self.err(&["`B_`", "`dB_`", "`coB_`"]),
        };
        let (kind, rest) = if let Some(r) = name.strip_prefix("coB_") {
            (BallKind::Complement, r)
        } else if let Some(r) = name.strip_prefix("dB_") {
            (BallKind::Boundary, r)
        } else if let Some(r) = name.strip_prefix("B_") {
            (BallKind::Closed, r)
        } else {
            return Err(ParseError::UnknownSugar { form: name, pos });
        };
        let radius = self.radius_suffix(rest, pos)?;
        Ok(Formula::InBall { vars, kind, radius })
    }

    /// Radius written after `B_`: a name, a natural number, or `(term)`.
    fn radius_suffix(&mut self, rest: &str, pos: Pos) -> ParseResult<Term> {
        if rest.is_empty() {
            self.expect(Tok::LParen, "`(`")?;
            let t = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            Ok(t)
        } else if rest.chars().all(|c| c.is_ascii_digit()) {
            Ok(Term::Const(parse_decimal(rest)))
        } else if rest.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.classify(rest, pos)
        } else {
            Err(ParseError::UnknownSugar {
                form: rest.to_string(),
                pos,
            })
        }
    }

    fn radius_atom(&mut self) -> ParseResult<Term> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                self.classify(&s, pos)
            }
            Tok::Number(n) => {
                self.bump();
                Ok(Term::Const(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.err(&["radius"]),
        }
    }

    fn ball_modal(&mut self) -> ParseResult<Formula> {
        self.expect(Tok::Underscore, "`_`")?;
        let pre = self.radius_atom()?;
        let diamond = match self.peek() {
            Tok::LBracket => false,
            Tok::Cmp(CmpOp::Lt) => true,
            _ => return self.err(&["`[`", "`<`"]),
        };
        self.bump();
        let program = self.program()?;
        if diamond {
            self.expect(Tok::Cmp(CmpOp::Gt), "`>`")?;
        } else {
            self.expect(Tok::RBracket, "`]`")?;
        }
        self.expect(Tok::Underscore, "`_`")?;
        let post = self.radius_atom()?;
        Ok(Formula::BallModal {
            pre,
            program,
            post,
            diamond,
        })
    }

    fn comparison(&mut self) -> ParseResult<Formula> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return self.err(&["comparison operator"]),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Cmp(op, lhs, rhs))
    }

    fn program(&mut self) -> ParseResult<HybridProgram> {
        self.expect(Tok::LBrace, "`{`")?;
        // State variables are bound throughout the program; collect them first.
        let mut k = 0;
        let mut depth = 0i32;
        let mut state = Vec::new();
        loop {
            match self.peek_at(k) {
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => break,
                Tok::RBrace => depth -= 1,
                Tok::Eof => break,
                Tok::Ident(s) if depth == 0 && *self.peek_at(k + 1) == Tok::Prime => {
                    state.push(s.clone())
                }
                _ => {}
            }
            k += 1;
        }
        let n = self.bound.len();
        self.bound.extend(state);
        let out = self.program_body();
        self.bound.truncate(n);
        out
    }

    fn program_body(&mut self) -> ParseResult<HybridProgram> {
        let mut odes: Vec<Ode> = Vec::new();
        loop {
            let pos = self.here();
            let var = self.expect_ident()?;
            if self.decls.params.contains(&var) {
                return Err(ParseError::Invalid {
                    message: format!("parameter `{var}` cannot be a state variable"),
                    pos,
                });
            }
            if odes.iter().any(|o| o.var == var) {
                return Err(ParseError::Invalid {
                    message: format!("state variable `{var}` has two equations"),
                    pos,
                });
            }
            self.expect(Tok::Prime, "`'`")?;
            self.expect(Tok::Cmp(CmpOp::Eq), "`=`")?;
            let rhs = self.term()?;
            odes.push(Ode { var, rhs });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                _ => break,
            }
        }
        let domain = if *self.peek() == Tok::Amp {
            self.bump();
            self.formula()?
        } else {
            Formula::True
        };
        self.expect(Tok::RBrace, "`}`")?;
        Ok(HybridProgram {
            odes,
            domain: Box::new(domain),
        })
    }

    // ---- terms ----

    fn term(&mut self) -> ParseResult<Term> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Term::add(lhs, self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Term::sub(lhs, self.product()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> ParseResult<Term> {
        let mut lhs = self.signed()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Term::mul(lhs, self.signed()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.here();
                    match self.signed()? {
                        Term::Const(c) if !c.is_zero() => lhs = Term::Div(Box::new(lhs), c),
                        Term::Const(_) => {
                            return Err(ParseError::Invalid {
                                message: "division by zero".into(),
                                pos,
                            })
                        }
                        _ => {
                            return Err(ParseError::Invalid {
                                message: "divisor must be a nonzero rational constant".into(),
                                pos,
                            })
                        }
                    }
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn signed(&mut self) -> ParseResult<Term> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Number(_) = self.peek() {
                let lit = self.literal()?;
                return self.power_of(Term::Const(-lit));
            }
            return Ok(Term::neg(self.signed()?));
        }
        self.power()
    }

    /// Numeric literal, folding `n/m` into a single rational.
    fn literal(&mut self) -> ParseResult<Rational> {
        let n = match self.bump() {
            Tok::Number(n) => n,
            _ => unreachable!("literal called on a non-number"),
        };
        if *self.peek() == Tok::Slash {
            if let Tok::Number(d) = self.peek_at(1).clone() {
                let pos = self.toks[self.pos + 1].1;
                if d.is_zero() {
                    return Err(ParseError::Invalid {
                        message: "division by zero".into(),
                        pos,
                    });
                }
                self.bump();
                self.bump();
                return Ok(n / d);
            }
        }
        Ok(n)
    }

    fn power(&mut self) -> ParseResult<Term> {
        let base = self.primary()?;
        self.power_of(base)
    }

    fn power_of(&mut self, base: Term) -> ParseResult<Term> {
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.here();
            match self.bump() {
                Tok::Number(n) if n.is_integer() && !n.is_negative() => {
                    let e: u32 = n.to_integer().try_into().map_err(|_| ParseError::Invalid {
                        message: "exponent too large".into(),
                        pos,
                    })?;
                    return Ok(Term::pow(base, e));
                }
                _ => {
                    return Err(ParseError::Invalid {
                        message: "exponent must be a natural number".into(),
                        pos,
                    })
                }
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> ParseResult<Term> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Number(_) => Ok(Term::Const(self.literal()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "sin" | "cos" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let arg = self.term()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(if name == "sin" {
                            Term::sin(arg)
                        } else {
                            Term::cos(arg)
                        })
                    }
                    "norm" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let mut args = vec![self.term()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.term()?);
                        }
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Term::Norm(args))
                    }
                    _ => self.classify(&name, pos),
                }
            }
            _ => self.err(&["term"]),
        }
    }
}

pub fn parse_formula(text: &str) -> ParseResult<Formula> {
    parse_formula_with(text, &Decls::default())
}

pub fn parse_formula_with(text: &str, decls: &Decls) -> ParseResult<Formula> {
    let mut p = Parser::new(text, decls)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_term_with(text: &str, decls: &Decls) -> ParseResult<Term> {
    let mut p = Parser::new(text, decls)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_program_with(text: &str, decls: &Decls) -> ParseResult<HybridProgram> {
    let mut p = Parser::new(text, decls)?;
    let prog = p.program()?;
    p.finish()?;
    Ok(prog)
}

/// Parses `A, B |- C, D`; either side may be empty.
pub fn parse_sequent_with(text: &str, decls: &Decls) -> ParseResult<Sequent> {
    let (lhs, rhs) = match text.split_once("|-") {
        Some(parts) => parts,
        None => {
            return Err(ParseError::Unexpected {
                pos: Pos { line: 1, col: 1 },
                expected: vec!["`|-`".into()],
                found: "end of input".into(),
            })
        }
    };
    let side = |s: &str| -> ParseResult<Vec<Formula>> {
        split_top_level(s)
            .into_iter()
            .filter(|p| !p.trim().is_empty())
            .map(|p| parse_formula_with(p.trim(), decls))
            .collect()
    };
    Ok(Sequent::new(side(lhs)?, side(rhs)?))
}

/// Splits on commas that are not nested inside brackets of any kind.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}
