use crate::source::{FileId, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(String),
    Str {
        value: String,
        offsets: Vec<u32>,
    },
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

const PUNCT: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", ",", ".", "=", "@", "+", "-", "*",
    "/", "%", "<", ">", "!",
];

pub fn tokenize(file: FileId, src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let span = |s: usize, e: usize| Span::new(file, s, e);
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let Some(end) = src[i + 2..].find("*/") else {
                return Err(LexError {
                    message: "unterminated comment".into(),
                    span: span(i, i + 2),
                });
            };
            i += end + 4;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(LexError {
                    message: "malformed number".into(),
                    span: span(start, i + 1),
                });
            }
            out.push(Token {
                kind: TokenKind::Int(src[start..i].to_string()),
                span: span(start, i),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(src[start..i].to_string()),
                span: span(start, i),
            });
            continue;
        }
        if c == b'"' {
            i += 1;
            let mut value = String::new();
            let mut offsets = Vec::new();
            loop {
                let Some(ch) = src[i..].chars().next() else {
                    return Err(LexError {
                        message: "unterminated string literal".into(),
                        span: span(start, i),
                    });
                };
                match ch {
                    '"' => {
                        offsets.push(i as u32);
                        i += 1;
                        break;
                    }
                    '\n' => {
                        return Err(LexError {
                            message: "unterminated string literal".into(),
                            span: span(start, i),
                        })
                    }
                    '\\' => {
                        let esc = src[i + 1..].chars().next();
                        let decoded = match esc {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\'') => '\'',
                            _ => {
                                return Err(LexError {
                                    message: "unsupported escape sequence".into(),
                                    span: span(i, i + 1 + esc.map_or(0, char::len_utf8)),
                                })
                            }
                        };
                        for _ in 0..decoded.len_utf8() {
                            offsets.push(i as u32);
                        }
                        value.push(decoded);
                        i += 2;
                    }
                    ch => {
                        for k in 0..ch.len_utf8() {
                            offsets.push((i + k) as u32);
                        }
                        value.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            out.push(Token {
                kind: TokenKind::Str { value, offsets },
                span: span(start, i),
            });
            continue;
        }
        if let Some(p) = PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            i += p.len();
            out.push(Token {
                kind: TokenKind::Punct(p),
                span: span(start, i),
            });
            continue;
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(LexError {
            message: format!("unexpected character `{ch}`"),
            span: span(i, i + ch.len_utf8()),
        });
    }
    out.push(Token {
        kind: TokenKind::Eof,
        span: span(bytes.len(), bytes.len()),
    });
    Ok(out)
}
