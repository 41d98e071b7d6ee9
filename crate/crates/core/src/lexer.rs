//! Tokenizer shared by the signature, theorem-file and tactic parsers.

use crate::error::{Error, Pos, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u32),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Colon,
    Dot,
    Comma,
    Semi,
    Arrow,
    Implies,
    Turnstile,
    And,
    Or,
    Define,
    At,
    Star,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{}`", s),
            Tok::Num(n) => return write!(f, "`{}`", n),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Arrow => "`->`",
            Tok::Implies => "`=>`",
            Tok::Turnstile => "`|-`",
            Tok::And => "`/\\`",
            Tok::Or => "`\\/`",
            Tok::Define => "`:=`",
            Tok::At => "`@`",
            Tok::Star => "`*`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i].1 == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let (off, c) = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i].1 != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let next = chars.get(i + 1).map(|p| p.1);
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::Implies, 2),
            ('|', Some('-')) => (Tok::Turnstile, 2),
            ('/', Some('\\')) => (Tok::And, 2),
            ('\\', Some('/')) => (Tok::Or, 2),
            (':', Some('=')) => (Tok::Define, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBrack, 1),
            (']', _) => (Tok::RBrack, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('@', _) => (Tok::At, 1),
            ('*', _) => (Tok::Star, 1),
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                let end = chars.get(j).map(|p| p.0).unwrap_or(src.len());
                let n = src[off..end]
                    .parse::<u32>()
                    .map_err(|_| Error::syntax(pos, "number out of range"))?;
                (Tok::Num(n), j - i)
            }
            _ if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j].1) {
                    j += 1;
                }
                let end = chars.get(j).map(|p| p.0).unwrap_or(src.len());
                (Tok::Ident(src[off..end].to_string()), j - i)
            }
            _ => return Err(Error::syntax(pos, format!("unexpected character `{}`", c))),
        };
        let end = chars.get(i + len).map(|p| p.0).unwrap_or(src.len());
        out.push(Token { tok, pos, start: off, end });
        advance(&mut i, &mut line, &mut col, len);
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

/// Cursor over a token vector.
#[derive(Clone)]
pub struct Cursor<'a> {
    toks: &'a [Token],
    pub idx: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        Cursor { toks, idx: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.idx + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    pub fn token(&self) -> &Token {
        &self.toks[self.idx]
    }

    pub fn bump(&mut self) -> &Tok {
        let t = &self.toks[self.idx].tok;
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(Error::syntax(
                self.pos(),
                format!("expected {}, found {}", t, self.peek()),
            ))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            t => Err(Error::syntax(pos, format!("expected identifier, found {}", t))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_comments() {
        let toks = tokenize("of : tm -> ty -> type. % comment\n{x:A} |- /\\ \\/ := =>").unwrap();
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("of".into()),
                Tok::Colon,
                Tok::Ident("tm".into()),
                Tok::Arrow,
                Tok::Ident("ty".into()),
                Tok::Arrow,
                Tok::Ident("type".into()),
                Tok::Dot,
                Tok::LBrace,
                Tok::Ident("x".into()),
                Tok::Colon,
                Tok::Ident("A".into()),
                Tok::RBrace,
                Tok::Turnstile,
                Tok::And,
                Tok::Or,
                Tok::Define,
                Tok::Implies,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn bad_character() {
        assert!(matches!(tokenize("a # b"), Err(Error::Syntax { .. })));
    }
}
