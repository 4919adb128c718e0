use std::fmt;

use serde::Serialize;

/// A source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    /// A number immediately followed by `i`.
    Imag(f64),
    /// `|...>` ket literal, contents only.
    Ket(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(x) => write!(f, "number {x}"),
            Tok::Imag(x) => write!(f, "number {x}i"),
            Tok::Ket(s) => write!(f, "`|{s}>`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// A positioned error message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

const SYMBOLS: &[&str] = &[
    "||", ".", ",", ";", ":", "=", "(", ")", "[", "]", "{", "}", "?", "!", "+", "-", "*", "/", "\\", "^",
];

/// Splits source text into tokens. `//` starts a comment. Identifiers may
/// not start with `#`, which is reserved for generated names, unless
/// `allow_reserved` is set.
pub fn lex(src: &str, allow_reserved: bool) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || (c == '#' && allow_reserved) {
            let start = i;
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'' || (allow_reserved && chars[j] == '~')) {
                j += 1;
            }
            let s: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start, &chars);
            out.push(Token { tok: Tok::Ident(s), pos });
            continue;
        }
        if c == '#' {
            return Err(Diagnostic::new(pos, "names starting with `#` are reserved"));
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[start..j].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| Diagnostic::new(pos, format!("malformed number `{text}`")))?;
            let imag = j < chars.len()
                && chars[j] == 'i'
                && !chars.get(j + 1).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_');
            let len = j - start + usize::from(imag);
            advance(&mut i, &mut line, &mut col, len, &chars);
            out.push(Token {
                tok: if imag { Tok::Imag(value) } else { Tok::Number(value) },
                pos,
            });
            continue;
        }
        if c == '|' && chars.get(i + 1) != Some(&'|') {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '>' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '>' {
                return Err(Diagnostic::new(pos, "unterminated ket, expected `>`"));
            }
            let s: String = chars[i + 1..j].iter().collect::<String>().trim().to_string();
            let n = j + 1 - i;
            advance(&mut i, &mut line, &mut col, n, &chars);
            out.push(Token { tok: Tok::Ket(s), pos });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(Diagnostic::new(pos, format!("unexpected character `{c}`")));
        };
        advance(&mut i, &mut line, &mut col, sym.chars().count(), &chars);
        out.push(Token { tok: Tok::Sym(sym), pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
