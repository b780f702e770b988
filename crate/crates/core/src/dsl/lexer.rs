use std::fmt;

use crate::diag::Span;

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(u64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Dot,
    DotDot,
    Arrow,
    Pipe,
    At,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(_) => f.write_str("string"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::At => f.write_str("`@`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits source text into tokens. Bad characters are reported and skipped
/// so the parser still sees the rest of the file. The result always ends
/// with [`Tok::Eof`].
pub fn lex(src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut i = 0;
    let err = |span: Span, expected: &[&str], found: &str| ParseError::Syntax {
        span,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.to_string(),
    };

    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |t: Tok| Some((t, 1));
        let simple = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'{' => single(Tok::LBrace),
            b'}' => single(Tok::RBrace),
            b'[' => single(Tok::LBracket),
            b']' => single(Tok::RBracket),
            b';' => single(Tok::Semi),
            b':' => single(Tok::Colon),
            b',' => single(Tok::Comma),
            b'|' => single(Tok::Pipe),
            b'@' => single(Tok::At),
            b'=' => single(Tok::Eq),
            b'.' if bytes.get(i + 1) == Some(&b'.') => Some((Tok::DotDot, 2)),
            b'.' => single(Tok::Dot),
            b'-' if bytes.get(i + 1) == Some(&b'>') => Some((Tok::Arrow, 2)),
            _ => None,
        };
        if let Some((tok, len)) = simple {
            i += len;
            out.push(Token {
                tok,
                span: Span::new(start, i),
            });
            continue;
        }

        if c == b'<' && bytes.get(i + 1) == Some(&b'-') {
            i += 2;
            errors.push(err(Span::new(start, i), &["`->`"], "`<-`"));
            continue;
        }

        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: Span::new(start, i),
            });
            continue;
        }

        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let span = Span::new(start, i);
            match src[start..i].parse::<u64>() {
                Ok(n) => out.push(Token { tok: Tok::Int(n), span }),
                Err(_) => errors.push(err(span, &["integer that fits in 64 bits"], &src[start..i])),
            }
            continue;
        }

        if c == b'"' {
            i += 1;
            let mut value = String::new();
            let mut closed = false;
            while i < bytes.len() {
                match bytes[i] {
                    b'"' => {
                        i += 1;
                        closed = true;
                        break;
                    }
                    b'\\' => {
                        let esc = bytes.get(i + 1).copied();
                        match esc {
                            Some(b'"') => value.push('"'),
                            Some(b'\\') => value.push('\\'),
                            Some(b'n') => value.push('\n'),
                            _ => errors.push(err(
                                Span::new(i, (i + 2).min(bytes.len())),
                                &["`\\\"`", "`\\\\`", "`\\n`"],
                                "unknown escape",
                            )),
                        }
                        // Never split a multi-byte char.
                        i += 1;
                        if i < bytes.len() {
                            i += utf8_len(bytes[i]);
                        }
                    }
                    b => {
                        let len = utf8_len(b);
                        value.push_str(&src[i..(i + len).min(bytes.len())]);
                        i += len;
                    }
                }
            }
            let span = Span::new(start, i.min(bytes.len()));
            if closed {
                out.push(Token {
                    tok: Tok::Str(value),
                    span,
                });
            } else {
                errors.push(err(span, &["`\"`"], "end of file in string"));
            }
            i = i.min(bytes.len());
            continue;
        }

        let len = utf8_len(c).min(bytes.len() - i);
        let found = src.get(i..i + len).unwrap_or("?");
        errors.push(err(Span::new(i, i + len), &["token"], &format!("`{found}`")));
        i += len;
    }

    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    (out, errors)
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        0xf0..=0xf7 => 4,
        _ => 1,
    }
}
