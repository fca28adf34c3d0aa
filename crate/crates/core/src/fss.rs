//! The textual FSS language.
//!
//! ```text
//! # comment to end of line
//! a : Car.
//! b : Car.
//! onRoad(a).          # unary sugar for onRoad(a, a)
//! frontOf(a, b).      # True
//! !leftOf(b, a).      # False
//! ?canSee(a, b).      # Unknown (recorded, no effect)
//! ```

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::logic::{
    Assertion, AssertionRecord, Category, PartialModel, Relation, SourceLoc, TruthValue, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message} (at `{token}`)")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub id: String,
    pub kind: String,
    pub location: SourceLoc,
}

#[derive(Debug, Clone)]
pub struct FssDocument {
    pub vocabulary: Arc<Vocabulary>,
    pub declarations: Vec<Declaration>,
    pub assertions: Vec<AssertionRecord>,
}

impl FssDocument {
    pub fn actor_ids(&self) -> impl Iterator<Item = &str> {
        self.declarations.iter().map(|d| d.id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Colon,
    Dot,
    Comma,
    LParen,
    RParen,
    Bang,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::Colon => f.write_str(":"),
            Tok::Dot => f.write_str("."),
            Tok::Comma => f.write_str(","),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Bang => f.write_str("!"),
            Tok::Question => f.write_str("?"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, SourceLoc)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c == '#' {
                    while self.chars.peek().is_some_and(|c| *c != '\n') {
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let loc = SourceLoc {
                line: self.line,
                column: self.column,
            };
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, loc));
                return Ok(out);
            };
            let tok = match c {
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '!' => Tok::Bang,
                '?' => Tok::Question,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&n) = self.chars.peek() {
                        if n.is_ascii_alphanumeric() || n == '_' {
                            s.push(n);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => {
                    return Err(ParseError {
                        line: loc.line,
                        column: loc.column,
                        message: "unexpected character".into(),
                        token: other.to_string(),
                    })
                }
            };
            out.push((tok, loc));
        }
    }
}

/// An assertion with the locations of its source and target identifiers.
type LocatedAssertion = (AssertionRecord, SourceLoc, SourceLoc);

struct Parser<'v> {
    toks: Vec<(Tok, SourceLoc)>,
    pos: usize,
    vocab: &'v Vocabulary,
}

impl Parser<'_> {
    fn peek(&self) -> &(Tok, SourceLoc) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, SourceLoc) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(tok: &Tok, loc: SourceLoc, message: impl Into<String>) -> ParseError {
        ParseError {
            line: loc.line,
            column: loc.column,
            message: message.into(),
            token: tok.to_string(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<SourceLoc, ParseError> {
        let (tok, loc) = self.next();
        if tok == want {
            Ok(loc)
        } else {
            Err(Self::error_at(&tok, loc, format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceLoc), ParseError> {
        match self.next() {
            (Tok::Ident(s), loc) => Ok((s, loc)),
            (tok, loc) => Err(Self::error_at(&tok, loc, format!("expected {what}"))),
        }
    }

    fn document(&mut self) -> Result<(Vec<Declaration>, Vec<LocatedAssertion>), ParseError> {
        let mut decls: Vec<Declaration> = Vec::new();
        let mut asserts = Vec::new();
        loop {
            let (tok, loc) = self.peek().clone();
            match tok {
                Tok::Eof => break,
                Tok::Bang | Tok::Question => {
                    self.next();
                    let value = if tok == Tok::Bang {
                        TruthValue::False
                    } else {
                        TruthValue::Unknown
                    };
                    asserts.push(self.assertion(value, loc)?);
                }
                Tok::Ident(name) => {
                    if self.toks[self.pos + 1].0 == Tok::Colon {
                        self.next();
                        self.next();
                        let (kind, kloc) = self.ident("actor kind")?;
                        if kind != "Car" {
                            return Err(Self::error_at(
                                &Tok::Ident(kind),
                                kloc,
                                "unsupported actor kind (only `Car`)",
                            ));
                        }
                        self.expect(Tok::Dot, "`.`")?;
                        if decls.iter().any(|d| d.id == name) {
                            return Err(Self::error_at(&Tok::Ident(name), loc, "duplicate actor declaration"));
                        }
                        decls.push(Declaration {
                            id: name,
                            kind,
                            location: loc,
                        });
                    } else {
                        asserts.push(self.assertion(TruthValue::True, loc)?);
                    }
                }
                _ => return Err(Self::error_at(&tok, loc, "expected a declaration or an assertion")),
            }
        }
        Ok((decls, asserts))
    }

    fn assertion(
        &mut self,
        value: TruthValue,
        start: SourceLoc,
    ) -> Result<LocatedAssertion, ParseError> {
        let (name, rloc) = self.ident("relation name")?;
        let relation = self
            .vocab
            .lookup(&name)
            .ok_or_else(|| Self::error_at(&Tok::Ident(name.clone()), rloc, "unknown relation"))?;
        self.expect(Tok::LParen, "`(`")?;
        let (src, sloc) = self.ident("actor id")?;
        let (tgt, tloc) = match self.peek().0 {
            Tok::Comma => {
                self.next();
                self.ident("actor id")?
            }
            _ => {
                if relation != Relation::OnRoad {
                    return Err(Self::error_at(
                        &Tok::Ident(name),
                        rloc,
                        "only onRoad may be used with a single argument",
                    ));
                }
                (src.clone(), sloc)
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Dot, "`.`")?;
        if relation == Relation::OnRoad && src != tgt {
            return Err(Self::error_at(
                &Tok::Ident(tgt),
                tloc,
                "onRoad relates an actor to itself",
            ));
        }
        Ok((
            AssertionRecord {
                assertion: Assertion::new(relation, &src, &tgt, value),
                location: Some(start),
            },
            sloc,
            tloc,
        ))
    }
}

/// Parse with the built-in vocabulary.
pub fn parse(text: &str) -> Result<FssDocument, ParseError> {
    parse_with_vocabulary(text, Vocabulary::builtin())
}

pub fn parse_with_vocabulary(text: &str, vocabulary: Arc<Vocabulary>) -> Result<FssDocument, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        pos: 0,
        vocab: &vocabulary,
    };
    let (declarations, raw) = p.document()?;
    let mut assertions = Vec::with_capacity(raw.len());
    for (rec, sloc, tloc) in raw {
        for (id, loc) in [(&rec.assertion.src, sloc), (&rec.assertion.tgt, tloc)] {
            if !declarations.iter().any(|d| &d.id == id) {
                return Err(ParseError {
                    line: loc.line,
                    column: loc.column,
                    message: "undeclared actor".into(),
                    token: id.clone(),
                });
            }
        }
        assertions.push(rec);
    }
    Ok(FssDocument {
        vocabulary,
        declarations,
        assertions,
    })
}

/// Fold a parsed document into a partial model, in document order. Validity
/// rules are not applied.
pub fn build_model(doc: &FssDocument) -> PartialModel {
    let mut m = PartialModel::with_vocabulary(doc.actor_ids(), doc.vocabulary.clone())
        .expect("parser rejects duplicate declarations");
    for rec in &doc.assertions {
        m.assert_in_place(rec.assertion.clone(), rec.location)
            .expect("parser checks actors and values");
    }
    m
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FormatOptions {
    /// Leave out the `False` entries the premise-free rules would derive
    /// anyway (self-loops other than `onRoad`).
    pub omit_implied: bool,
}

/// Pretty-print every non-`Unknown` entry, grouped by category.
pub fn format(model: &PartialModel) -> String {
    format_with(model, FormatOptions::default())
}

/// Like [`format`]. `onRoad(a, b)` with `a ≠ b` has no surface syntax and is
/// always skipped; `Error` entries print as a `r(a, b).` / `!r(a, b).` pair.
pub fn format_with(model: &PartialModel, opts: FormatOptions) -> String {
    let vocab = model.vocabulary();
    let objs = model.objects();
    let mut out = String::new();
    for o in objs {
        let _ = writeln!(out, "{o} : Car.");
    }
    for cat in Category::ALL {
        let mut lines = Vec::new();
        for (atom, v) in model.entries() {
            if vocab.category(atom.relation) != cat {
                continue;
            }
            let on_road = atom.relation == Relation::OnRoad;
            if on_road && atom.src != atom.tgt {
                continue;
            }
            if opts.omit_implied && !on_road && atom.src == atom.tgt && v == TruthValue::False {
                continue;
            }
            let name = vocab.name(atom.relation);
            let args = if on_road {
                objs[atom.src].clone()
            } else {
                format!("{}, {}", objs[atom.src], objs[atom.tgt])
            };
            match v {
                TruthValue::True => lines.push(format!("{name}({args}).")),
                TruthValue::False => lines.push(format!("!{name}({args}).")),
                TruthValue::Error => {
                    lines.push(format!("{name}({args})."));
                    lines.push(format!("!{name}({args})."));
                }
                TruthValue::Unknown => {}
            }
        }
        if !lines.is_empty() {
            let _ = writeln!(out, "# {}", cat.header());
            for l in lines {
                out.push_str(&l);
                out.push('\n');
            }
        }
    }
    out
}
