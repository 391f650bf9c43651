use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Number(f64),
    Ident(String),
    /// `|i><j|_D`
    Dirac { row: usize, col: usize, dim: usize },
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub pos: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => push(&mut out, Token::Plus, start, &mut i),
            '-' => push(&mut out, Token::Minus, start, &mut i),
            '*' => push(&mut out, Token::Star, start, &mut i),
            '/' => push(&mut out, Token::Slash, start, &mut i),
            '(' => push(&mut out, Token::LParen, start, &mut i),
            ')' => push(&mut out, Token::RParen, start, &mut i),
            '|' => {
                let (tok, next) = dirac(src, start)?;
                out.push(Spanned { token: tok, pos: start });
                i = next;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let (value, next) = number(src, start)?;
                out.push(Spanned { token: Token::Number(value), pos: start });
                i = next;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Spanned { token: Token::Ident(src[start..i].to_string()), pos: start });
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

fn push(out: &mut Vec<Spanned>, token: Token, pos: usize, i: &mut usize) {
    out.push(Spanned { token, pos });
    *i += 1;
}

fn number(src: &str, start: usize) -> Result<(f64, usize), ExprError> {
    let bytes = src.as_bytes();
    let mut i = start;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    let text = &src[start..i];
    text.parse::<f64>()
        .map(|v| (v, i))
        .map_err(|_| ExprError::Syntax { pos: start, msg: format!("malformed number '{text}'") })
}

/// Parses `|i><j|_D` starting at the leading `|`.
fn dirac(src: &str, start: usize) -> Result<(Token, usize), ExprError> {
    let bytes = src.as_bytes();
    let malformed = |msg: &str| ExprError::Syntax { pos: start, msg: format!("malformed Dirac operator: {msg}") };
    let mut i = start + 1;
    let digits = |i: &mut usize| -> Option<usize> {
        let s = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        src[s..*i].parse().ok()
    };
    let row = digits(&mut i).ok_or_else(|| malformed("expected ket index"))?;
    for expected in [b'>', b'<'] {
        if bytes.get(i) != Some(&expected) {
            return Err(malformed(&format!("expected '{}'", expected as char)));
        }
        i += 1;
    }
    let col = digits(&mut i).ok_or_else(|| malformed("expected bra index"))?;
    for expected in [b'|', b'_'] {
        if bytes.get(i) != Some(&expected) {
            return Err(malformed(&format!("expected '{}'", expected as char)));
        }
        i += 1;
    }
    let dim = digits(&mut i).ok_or_else(|| malformed("expected dimension"))?;
    Ok((Token::Dirac { row, col, dim }, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_token() {
        let toks = tokenize("|0><1|_2").unwrap();
        assert_eq!(toks[0].token, Token::Dirac { row: 0, col: 1, dim: 2 });
    }

    #[test]
    fn scientific_numbers() {
        let toks = tokenize("1.5e-3 2E2 .5").unwrap();
        let vals: Vec<_> = toks.iter().map(|t| t.token.clone()).collect();
        assert_eq!(vals, vec![Token::Number(1.5e-3), Token::Number(200.0), Token::Number(0.5)]);
    }

    #[test]
    fn malformed_dirac() {
        assert!(tokenize("|0>1|_2").is_err());
        assert!(tokenize("|0><1|2").is_err());
    }
}
