//! The line-oriented text format for theories, candidate equations and
//! theory morphisms.
//!
//! ```text
//! # comments start with '#'
//! theory monoid
//! op mul : 2
//! op e : 0
//! eq assoc (x y z) : mul(mul(x,y),z) = mul(x,mul(y,z))
//! eq left_unit (x) : mul(e(),x) = x
//! eq right_unit (x) : mul(x,e()) = x
//! end
//! ```
//!
//! A candidate file holds bare `eq` lines. A morphism file looks like
//!
//! ```text
//! morphism opposite
//! source monoid.thy
//! target monoid.thy
//! map mul (x y) : mul(y,x)
//! map e () : e()
//! end
//! ```

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::term::{Equation, Symbol, Term, Theory, TheoryMorphism};

/// 1-based position of a token in the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownSymbol { name: String },
    ArityMismatch { symbol: String, expected: usize, found: usize },
    UnboundVariable { name: String },
    DuplicateName { name: String },
    Syntax { message: String },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownSymbol { name } => write!(f, "unknown symbol `{}`", name),
            ParseErrorKind::ArityMismatch { symbol, expected, found } => write!(
                f,
                "arity mismatch: `{}` takes {} argument(s), found {}",
                symbol, expected, found
            ),
            ParseErrorKind::UnboundVariable { name } => write!(f, "unbound variable `{}`", name),
            ParseErrorKind::DuplicateName { name } => write!(f, "duplicate name `{}`", name),
            ParseErrorKind::Syntax { message } => write!(f, "syntax error: {}", message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { span, kind: ParseErrorKind::Syntax { message: message.into() } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(usize),
    LParen,
    RParen,
    Comma,
    Colon,
    Equals,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Number(n) => write!(f, "`{}`", n),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Equals => write!(f, "`=`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Tokens of one line, comments stripped.
struct Line<'a> {
    number: usize,
    text: &'a str,
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl<'a> Line<'a> {
    fn lex(number: usize, text: &'a str) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = |len| SourceSpan { line: number, column: i + 1, length: len };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                '=' => Some(Tok::Equals),
                _ => None,
            };
            if let Some(tok) = single {
                toks.push((tok, span(1)));
                i += 1;
            } else if is_ident_start(c) {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let sp = SourceSpan { line: number, column: start + 1, length: i - start };
                toks.push((Tok::Ident(word), sp));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let sp = SourceSpan { line: number, column: start + 1, length: i - start };
                let n = digits
                    .parse()
                    .map_err(|_| ParseError::syntax(sp, "number out of range"))?;
                toks.push((Tok::Number(n), sp));
            } else {
                return Err(ParseError::syntax(span(1), format!("unexpected character `{}`", c)));
            }
        }
        Ok(Line { number, text, toks, pos: 0 })
    }

    fn is_blank(&self) -> bool {
        self.toks.is_empty()
    }

    fn end_span(&self) -> SourceSpan {
        let content = self.text.split('#').next().unwrap_or("");
        SourceSpan {
            line: self.number,
            column: content.trim_end().chars().count() + 1,
            length: 0,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self, expected: &str) -> Result<(Tok, SourceSpan), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::syntax(
                self.end_span(),
                format!("expected {}, found end of line", expected),
            )),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        let expected = tok.to_string();
        let (found, span) = self.next(&expected)?;
        if found == tok {
            Ok(span)
        } else {
            Err(ParseError::syntax(span, format!("expected {}, found {}", expected, found)))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.next(what)? {
            (Tok::Ident(s), span) => Ok((s, span)),
            (other, span) => {
                Err(ParseError::syntax(span, format!("expected {}, found {}", what, other)))
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ParseError> {
        match self.next(what)? {
            (Tok::Number(n), _) => Ok(n),
            (other, span) => {
                Err(ParseError::syntax(span, format!("expected {}, found {}", what, other)))
            }
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some((tok, span)) => {
                Err(ParseError::syntax(*span, format!("unexpected {} at end of line", tok)))
            }
        }
    }

    /// `( name name ... )`, rejecting repeats.
    fn var_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut names: Vec<String> = Vec::new();
        loop {
            match self.next("variable or `)`")? {
                (Tok::RParen, _) => return Ok(names),
                (Tok::Ident(name), span) => {
                    if names.contains(&name) {
                        return Err(ParseError { span, kind: ParseErrorKind::DuplicateName { name } });
                    }
                    names.push(name);
                }
                (Tok::Comma, _) => {}
                (other, span) => {
                    return Err(ParseError::syntax(
                        span,
                        format!("expected variable or `)`, found {}", other),
                    ))
                }
            }
        }
    }

    fn term(&mut self, signature: &[Symbol], vars: &mut Vars<'_>) -> Result<Term, ParseError> {
        let (name, span) = self.ident("term")?;
        if self.peek() != Some(&Tok::LParen) {
            return vars.resolve(name, span, signature);
        }
        self.pos += 1;
        let symbol = signature
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| ParseError {
                span,
                kind: ParseErrorKind::UnknownSymbol { name: name.clone() },
            })?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
        } else {
            loop {
                args.push(self.term(signature, vars)?);
                match self.next("`,` or `)`")? {
                    (Tok::Comma, _) => continue,
                    (Tok::RParen, _) => break,
                    (other, sp) => {
                        return Err(ParseError::syntax(
                            sp,
                            format!("expected `,` or `)`, found {}", other),
                        ))
                    }
                }
            }
        }
        if args.len() != symbol.arity() {
            return Err(ParseError {
                span,
                kind: ParseErrorKind::ArityMismatch {
                    symbol: name,
                    expected: symbol.arity(),
                    found: args.len(),
                },
            });
        }
        Ok(Term::App(symbol, args))
    }
}

/// Variable resolution: either a fixed bound list or one that grows as new
/// names are met.
enum Vars<'a> {
    Bound(&'a [String]),
    Infer(&'a mut Vec<String>),
}

impl Vars<'_> {
    fn resolve(&mut self, name: String, span: SourceSpan, signature: &[Symbol]) -> Result<Term, ParseError> {
        match self {
            Vars::Bound(names) => match names.iter().position(|n| *n == name) {
                Some(i) => Ok(Term::Var(i)),
                None => Err(ParseError { span, kind: ParseErrorKind::UnboundVariable { name } }),
            },
            Vars::Infer(names) => {
                if let Some(i) = names.iter().position(|n| *n == name) {
                    return Ok(Term::Var(i));
                }
                if signature.iter().any(|s| s.name() == name) {
                    // constants must be written with parentheses
                    return Err(ParseError { span, kind: ParseErrorKind::UnboundVariable { name } });
                }
                names.push(name);
                Ok(Term::Var(names.len() - 1))
            }
        }
    }
}

fn lines(text: &str) -> impl Iterator<Item = Result<Line<'_>, ParseError>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Line::lex(i + 1, l))
        .filter(|l| !matches!(l, Ok(line) if line.is_blank()))
}

/// Parses `eq <name> (<vars>) : <term> = <term>` after the `eq` keyword.
fn equation_body(line: &mut Line<'_>, signature: &[Symbol]) -> Result<Equation, ParseError> {
    let (name, _) = line.ident("equation name")?;
    let names = line.var_list()?;
    line.expect(Tok::Colon)?;
    let mut vars = Vars::Bound(&names);
    let lhs = line.term(signature, &mut vars)?;
    line.expect(Tok::Equals)?;
    let rhs = line.term(signature, &mut vars)?;
    line.finish()?;
    Ok(Equation { name, var_count: names.len(), lhs, rhs })
}

fn end_of_input(text: &str) -> SourceSpan {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map(|l| l.chars().count()).unwrap_or(0) + 1;
    SourceSpan { line, column, length: 0 }
}

/// Parses a theory file.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let mut name: Option<String> = None;
    let mut signature: Vec<Symbol> = Vec::new();
    let mut equations: Vec<Equation> = Vec::new();
    let mut ended = false;

    for line in lines(text) {
        let mut line = line?;
        let (keyword, span) = line.ident("keyword")?;
        if ended {
            return Err(ParseError::syntax(span, "content after `end`"));
        }
        match (keyword.as_str(), &name) {
            ("theory", None) => {
                let (n, _) = line.ident("theory name")?;
                line.finish()?;
                name = Some(n);
            }
            ("theory", Some(_)) => return Err(ParseError::syntax(span, "duplicate `theory` header")),
            (_, None) => return Err(ParseError::syntax(span, "expected `theory <name>` header")),
            ("op", Some(_)) => {
                let (op, op_span) = line.ident("operation name")?;
                line.expect(Tok::Colon)?;
                let arity = line.number("arity")?;
                line.finish()?;
                if signature.iter().any(|s| s.name() == op) {
                    return Err(ParseError { span: op_span, kind: ParseErrorKind::DuplicateName { name: op } });
                }
                signature.push(Symbol::new(op, arity));
            }
            ("eq", Some(_)) => {
                let name_span = line.toks.get(line.pos).map(|t| t.1);
                let eq = equation_body(&mut line, &signature)?;
                if equations.iter().any(|e| e.name == eq.name) {
                    return Err(ParseError {
                        span: name_span.unwrap_or(span),
                        kind: ParseErrorKind::DuplicateName { name: eq.name },
                    });
                }
                equations.push(eq);
            }
            ("end", Some(_)) => {
                line.finish()?;
                ended = true;
            }
            (other, Some(_)) => {
                return Err(ParseError::syntax(span, format!("unknown keyword `{}`", other)))
            }
        }
    }
    let name = name.ok_or_else(|| ParseError::syntax(end_of_input(text), "missing `theory <name>` header"))?;
    if !ended {
        return Err(ParseError::syntax(end_of_input(text), "missing `end`"));
    }
    Ok(Theory::new(name, signature, equations).expect("parser validated the presentation"))
}

/// Parses a candidate file (bare `eq` lines) against `theory`'s signature.
/// Duplicates are kept.
pub fn parse_candidates(text: &str, theory: &Theory) -> Result<Vec<Equation>, ParseError> {
    let mut out = Vec::new();
    for line in lines(text) {
        let mut line = line?;
        let (keyword, span) = line.ident("`eq`")?;
        if keyword != "eq" {
            return Err(ParseError::syntax(span, format!("expected `eq`, found `{}`", keyword)));
        }
        out.push(equation_body(&mut line, theory.signature())?);
    }
    Ok(out)
}

/// Parses a single term. With `vars = Some(names)` every variable must be
/// listed; otherwise unseen identifiers become fresh variables, collected
/// in order of first occurrence.
pub fn parse_term(
    text: &str,
    theory: &Theory,
    vars: Option<&[String]>,
) -> Result<(Term, Vec<String>), ParseError> {
    if text.contains('\n') {
        return Err(ParseError::syntax(end_of_input(text), "a term must fit on one line"));
    }
    let mut line = Line::lex(1, text)?;
    let mut inferred = Vec::new();
    let (term, names) = match vars {
        Some(names) => {
            let t = line.term(theory.signature(), &mut Vars::Bound(names))?;
            (t, names.to_vec())
        }
        None => {
            let t = line.term(theory.signature(), &mut Vars::Infer(&mut inferred))?;
            (t, inferred)
        }
    };
    line.finish()?;
    Ok((term, names))
}

/// `source` and `target` paths named by a morphism file, as written.
pub fn morphism_endpoints(text: &str) -> Result<(String, String), ParseError> {
    let mut source = None;
    let mut target = None;
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut parts = content.splitn(2, char::is_whitespace);
        let slot = match parts.next() {
            Some("source") => &mut source,
            Some("target") => &mut target,
            _ => continue,
        };
        let path = parts.next().map(str::trim).unwrap_or("");
        if path.is_empty() {
            let span = SourceSpan { line: i + 1, column: raw.len() + 1, length: 0 };
            return Err(ParseError::syntax(span, "expected a path"));
        }
        *slot = Some(path.to_string());
    }
    let missing = |what: &str| ParseError::syntax(end_of_input(text), format!("missing `{}` line", what));
    Ok((source.ok_or_else(|| missing("source"))?, target.ok_or_else(|| missing("target"))?))
}

/// Parses a morphism file once its endpoint theories are loaded.
pub fn parse_theory_morphism(
    text: &str,
    source: Arc<Theory>,
    target: Arc<Theory>,
) -> Result<TheoryMorphism, ParseError> {
    let mut name = None;
    let mut assignment: IndexMap<String, Term> = IndexMap::new();
    let mut ended = false;
    let body = text.lines().enumerate().filter_map(|(i, raw)| {
        // endpoint lines carry paths, which are not tokens
        let first = raw.split_whitespace().next();
        if matches!(first, Some("source") | Some("target")) {
            return None;
        }
        Some(Line::lex(i + 1, raw)).filter(|l| !matches!(l, Ok(line) if line.is_blank()))
    });
    for line in body {
        let mut line = line?;
        let (keyword, span) = line.ident("keyword")?;
        if ended {
            return Err(ParseError::syntax(span, "content after `end`"));
        }
        match keyword.as_str() {
            "morphism" if name.is_none() => {
                name = Some(line.ident("morphism name")?.0);
                line.finish()?;
            }
            _ if name.is_none() => {
                return Err(ParseError::syntax(span, "expected `morphism <name>` header"))
            }
            "map" => {
                let (op, op_span) = line.ident("source symbol")?;
                let symbol = source.symbol(&op).cloned().ok_or_else(|| ParseError {
                    span: op_span,
                    kind: ParseErrorKind::UnknownSymbol { name: op.clone() },
                })?;
                let names = line.var_list()?;
                if names.len() != symbol.arity() {
                    return Err(ParseError {
                        span: op_span,
                        kind: ParseErrorKind::ArityMismatch {
                            symbol: op,
                            expected: symbol.arity(),
                            found: names.len(),
                        },
                    });
                }
                line.expect(Tok::Colon)?;
                let term = line.term(target.signature(), &mut Vars::Bound(&names))?;
                line.finish()?;
                if assignment.contains_key(&op) {
                    return Err(ParseError { span: op_span, kind: ParseErrorKind::DuplicateName { name: op } });
                }
                assignment.insert(op, term);
            }
            "end" => {
                line.finish()?;
                ended = true;
            }
            other => return Err(ParseError::syntax(span, format!("unknown keyword `{}`", other))),
        }
    }
    let name = name.ok_or_else(|| ParseError::syntax(end_of_input(text), "missing `morphism <name>` header"))?;
    if !ended {
        return Err(ParseError::syntax(end_of_input(text), "missing `end`"));
    }
    TheoryMorphism::new(name, source, target, assignment).map_err(|e| match e {
        crate::term::TermError::IncompleteMorphism(op) => ParseError {
            span: end_of_input(text),
            kind: ParseErrorKind::UnknownSymbol { name: op },
        },
        other => ParseError::syntax(end_of_input(text), other.to_string()),
    })
}

/// Renders `term` with the given variable names.
pub fn format_term(term: &Term, var_names: &[impl AsRef<str>]) -> String {
    let mut out = String::new();
    write_term(&mut out, term, var_names);
    out
}

fn write_term(out: &mut String, term: &Term, names: &[impl AsRef<str>]) {
    match term {
        Term::Var(i) => match names.get(*i) {
            Some(n) => out.push_str(n.as_ref()),
            None => out.push_str(&format!("x{}", i)),
        },
        Term::App(symbol, args) => {
            out.push_str(symbol.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_term(out, a, names);
            }
            out.push(')');
        }
    }
}

/// Canonical variable names for `count` variables.
pub fn default_var_names(count: usize) -> Vec<String> {
    const SHORT: [&str; 6] = ["x", "y", "z", "w", "u", "v"];
    if count <= SHORT.len() {
        SHORT[..count].iter().map(|s| s.to_string()).collect()
    } else {
        (0..count).map(|i| format!("x{}", i)).collect()
    }
}

/// The `eq` line for `eq` with canonical variable names.
pub fn format_equation(eq: &Equation) -> String {
    let names = default_var_names(eq.var_count);
    format!(
        "eq {} ({}) : {} = {}",
        eq.name,
        names.join(" "),
        format_term(&eq.lhs, &names),
        format_term(&eq.rhs, &names)
    )
}

/// Canonical text of a theory; `parse_theory` reads it back unchanged.
pub fn render_theory(theory: &Theory) -> String {
    let mut out = format!("theory {}\n", theory.name());
    for s in theory.signature() {
        out.push_str(&format!("op {} : {}\n", s.name(), s.arity()));
    }
    for eq in theory.equations() {
        out.push_str(&format_equation(eq));
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

/// Canonical text of a morphism file.
pub fn render_theory_morphism(f: &TheoryMorphism, source_path: &str, target_path: &str) -> String {
    let mut out = format!("morphism {}\nsource {}\ntarget {}\n", f.name(), source_path, target_path);
    for (op, term) in f.assignment() {
        let arity = f.source().symbol(op).map(Symbol::arity).unwrap_or(0);
        let names = default_var_names(arity);
        out.push_str(&format!("map {} ({}) : {}\n", op, names.join(" "), format_term(term, &names)));
    }
    out.push_str("end\n");
    out
}
