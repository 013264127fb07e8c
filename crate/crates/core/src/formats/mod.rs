//! Text formats: CTRS files, queries, models and certificates.

mod certificate;
mod ctrs;
mod lexer;
mod model;
mod query;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use certificate::{
    digest, parse_certificate, serialize_certificate, CertificateDocument, ClauseEntry, ObligationEntry,
};
pub use ctrs::{condition_type, parse_ctrs, print_ctrs};
pub use lexer::{tokenize, Tok, Token};
pub use model::{parse_model, parse_model_as, print_model, ModelBackend};
pub use query::{parse_property, parse_query};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, column: usize, end_line: usize, end_column: usize) -> Self {
        SourceSpan {
            file: file.to_string(),
            line,
            column,
            end_line,
            end_column,
        }
    }

    /// The position just past the end of `text`.
    pub fn end_of(file: &str, text: &str) -> Self {
        let line = text.lines().count().max(1) + usize::from(text.ends_with('\n'));
        let column = if text.ends_with('\n') {
            1
        } else {
            text.lines().last().map_or(1, |l| l.chars().count() + 1)
        };
        SourceSpan::new(file, line, column, line, column)
    }

    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line: self.line,
            column: self.column,
            end_line: other.end_line,
            end_column: other.end_column,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("symbol `{symbol}` used with arity {found} but earlier with arity {expected}")]
    ArityConflict {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("undeclared sort `{0}`")]
    UndeclaredSort(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unsupported fragment: {0} (queries must be existential positive)")]
    UnsupportedFragment(String),
    #[error("missing interpretation for {0}")]
    MissingInterpretation(String),
    #[error("duplicate interpretation for {0}")]
    DuplicateInterpretation(String),
    #[error("value {value} of `{symbol}` lies outside the carrier of {sort}")]
    OutsideCarrier { symbol: String, value: i64, sort: String },
    #[error("non-affine expression: {0}")]
    NonAffine(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(span: SourceSpan, kind: ParseErrorKind) -> Self {
        ParseError { span, kind }
    }

    pub fn syntax(span: SourceSpan, msg: impl Into<String>) -> Self {
        ParseError::new(span, ParseErrorKind::Syntax(msg.into()))
    }
}

/// Token stream with one-token lookahead.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    eof: SourceSpan,
}

impl Cursor {
    pub(crate) fn new(file: &str, text: &str) -> Self {
        Cursor {
            tokens: tokenize(file, text),
            pos: 0,
            eof: SourceSpan::end_of(file, text),
        }
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub(crate) fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|t| &t.tok)
    }

    pub(crate) fn span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map_or_else(|| self.eof.clone(), |t| t.span.clone())
    }

    pub(crate) fn prev_span(&self) -> SourceSpan {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.tokens.get(i))
            .map_or_else(|| self.eof.clone(), |t| t.span.clone())
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub(crate) fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self.peek().map_or_else(|| "end of input".to_string(), Tok::describe);
        ParseError::syntax(self.span(), format!("expected {wanted}, found {found}"))
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub(crate) fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    pub(crate) fn integer(&mut self) -> Result<i64, ParseError> {
        let span = self.span();
        let neg = self.eat(&Tok::Minus);
        let w = self.ident("an integer")?;
        let v: i64 = w
            .parse()
            .map_err(|_| ParseError::syntax(span.clone(), format!("expected an integer, found `{w}`")))?;
        Ok(if neg { -v } else { v })
    }
}
