use super::error::{DutError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest first so that `<<` wins over `<`.
const PUNCT: [&str; 29] = [
    "<<", ">>", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", ";", "=", "+", "-", "*",
    "/", "%", "&", "|", "^", "<", ">", "!", "~", ",", "[", "]",
];

pub fn lex(src: &str) -> Result<Vec<Token>, DutError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += (i - start) as u32;
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            col += (i - start) as u32;
            let text: String = src[start..i].chars().filter(|&ch| ch != '_').collect();
            let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
                u64::from_str_radix(hex, 16)
            } else if let Some(bin) = text.strip_prefix("0b").or_else(|| text.strip_prefix("0B")) {
                u64::from_str_radix(bin, 2)
            } else {
                text.parse::<u64>()
            };
            match parsed {
                Ok(v) if v <= u32::MAX as u64 => out.push(Token { tok: Tok::Int(v), pos }),
                Ok(_) => return Err(DutError::syntax(pos, format!("integer literal `{text}` exceeds 32 bits"))),
                Err(_) => return Err(DutError::syntax(pos, format!("malformed integer literal `{text}`"))),
            }
            continue;
        }
        match PUNCT.iter().find(|p| src[i..].starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len() as u32;
                out.push(Token { tok: Tok::Punct(p), pos });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(DutError::syntax(pos, format!("unexpected character `{ch}`")));
            }
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
