use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Semi,
    Bar,
    BarBar,
    Amp,
    Tilde,
    Arrow,
    LeftArrow,
    Iff,
    Eq,
    Neq,
    Question,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::BarBar => "||",
            Tok::Amp => "&",
            Tok::Tilde => "~",
            Tok::Arrow => "->",
            Tok::LeftArrow => "<-",
            Tok::Iff => "<->",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Question => "?",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let peek = |k: usize| chars.get(i + k).copied();
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
        if c == '#' || (c == '/' && peek(1) == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        let (tok, len) = match (c, peek(1), peek(2)) {
            ('<', Some('-'), Some('>')) => (Tok::Iff, 3),
            ('<', Some('-'), _) => (Tok::LeftArrow, 2),
            ('-', Some('>'), _) => (Tok::Arrow, 2),
            ('!', Some('='), _) => (Tok::Neq, 2),
            ('|', Some('|'), _) => (Tok::BarBar, 2),
            ('(', ..) => (Tok::LParen, 1),
            (')', ..) => (Tok::RParen, 1),
            ('{', ..) => (Tok::LBrace, 1),
            ('}', ..) => (Tok::RBrace, 1),
            (',', ..) => (Tok::Comma, 1),
            ('.', ..) => (Tok::Dot, 1),
            (':', ..) => (Tok::Colon, 1),
            (';', ..) => (Tok::Semi, 1),
            ('|', ..) => (Tok::Bar, 1),
            ('&', ..) => (Tok::Amp, 1),
            ('~', ..) => (Tok::Tilde, 1),
            ('=', ..) => (Tok::Eq, 1),
            ('?', ..) => (Tok::Question, 1),
            ('*', ..) => (Tok::Star, 1),
            ('/', ..) => (Tok::Slash, 1),
            _ => {
                return Err(Error::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
