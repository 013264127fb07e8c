//! Tokenizer shared by the CTRS, query and model readers.

use super::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Runs of letters, digits, `_` and `'`; numerals are identifiers too.
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Dot,
    Pipe,
    Arrow,
    ArrowStar,
    ArrowRoot,
    Subterm,
    EqEq,
    Eq,
    Implies,
    And,
    Or,
    Tilde,
    Bang,
    Le,
    Lt,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    At,
    Other(char),
}

impl Tok {
    pub fn describe(&self) -> String {
        let s = match self {
            Tok::Ident(s) => return format!("`{s}`"),
            Tok::Other(c) => return format!("`{c}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::ArrowStar => "->*",
            Tok::ArrowRoot => "->^",
            Tok::Subterm => "|>",
            Tok::EqEq => "==",
            Tok::Eq => "=",
            Tok::Implies => "=>",
            Tok::And => "/\\",
            Tok::Or => "\\/",
            Tok::Tilde => "~",
            Tok::Bang => "!",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::At => "@",
        };
        format!("`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

const SYMBOLS: [(&str, Tok); 30] = [
    ("->*", Tok::ArrowStar),
    ("->^", Tok::ArrowRoot),
    ("->", Tok::Arrow),
    ("|>", Tok::Subterm),
    ("==", Tok::EqEq),
    ("=>", Tok::Implies),
    ("/\\", Tok::And),
    ("\\/", Tok::Or),
    ("<=", Tok::Le),
    (">=", Tok::Ge),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (":", Tok::Colon),
    (";", Tok::Semi),
    (".", Tok::Dot),
    ("|", Tok::Pipe),
    ("=", Tok::Eq),
    ("~", Tok::Tilde),
    ("!", Tok::Bang),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("*", Tok::Star),
    ("/", Tok::Slash),
];

/// Splits `text` into tokens; `#` starts a comment running to the end of the
/// line. Never fails: unexpected characters become [`Tok::Other`].
pub fn tokenize(file: &str, text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, col, len| SourceSpan::new(file, line, col, line, col + len);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '@' {
            out.push(Token {
                tok: Tok::At,
                span: span(line, col, 1),
            });
            i += 1;
            col += 1;
            continue;
        }
        if is_ident_char(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let len = i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                span: span(line, col, len),
            });
            col += len;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let matched = SYMBOLS.iter().find(|(s, _)| rest.starts_with(s));
        let (tok, len) = match matched {
            Some((s, t)) => (t.clone(), s.chars().count()),
            None => (Tok::Other(c), 1),
        };
        out.push(Token {
            tok,
            span: span(line, col, len),
        });
        i += len;
        col += len;
    }
    out
}
