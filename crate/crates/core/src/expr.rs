//! Tiny parser for polynomial strings such as `w1*w2 + w3`, `2*a0^2`, `1`, `0`.
//!
//! Terms are separated by `+` or `-`; factors inside a term by `*` or
//! whitespace. A factor is either an integer or `name` / `name^exp`. Names start
//! with a letter and may contain letters, digits, `_`, `<`, `>`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{input}` at byte {offset}: {reason}")]
pub struct ExprError {
    pub input: String,
    pub offset: usize,
    pub reason: String,
}

/// One parsed term: an integer coefficient and `(name, exponent)` factors.
pub type Term = (i64, Vec<(String, u32)>);

pub fn parse_terms(input: &str) -> Result<Vec<Term>, ExprError> {
    let err = |offset: usize, reason: &str| ExprError {
        input: input.to_string(),
        offset,
        reason: reason.to_string(),
    };
    let bytes = input.as_bytes();
    let mut terms = Vec::new();
    let mut i = 0;
    let mut sign = 1i64;
    let mut expect_term = true;
    let mut current: Option<Term> = None;

    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && bytes[*i].is_ascii_whitespace() {
            *i += 1;
        }
    };

    loop {
        skip_ws(&mut i);
        if i >= bytes.len() {
            break;
        }
        let c = bytes[i];
        match c {
            b'+' | b'-' => {
                if let Some(t) = current.take() {
                    terms.push(t);
                } else if !expect_term || !terms.is_empty() {
                    return Err(err(i, "dangling operator"));
                }
                sign = if c == b'-' { -1 } else { 1 };
                expect_term = true;
                i += 1;
            }
            b'*' => {
                if current.is_none() {
                    return Err(err(i, "`*` without a left factor"));
                }
                i += 1;
                skip_ws(&mut i);
                if i >= bytes.len() || matches!(bytes[i], b'+' | b'-' | b'*') {
                    return Err(err(i, "`*` without a right factor"));
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: i64 = input[start..i]
                    .parse()
                    .map_err(|_| err(start, "integer out of range"))?;
                let t = current.get_or_insert((sign, Vec::new()));
                t.0 = t.0.checked_mul(n).ok_or_else(|| err(start, "coefficient overflow"))?;
                expect_term = false;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'<' | b'>'))
                {
                    i += 1;
                }
                let name = input[start..i].to_string();
                let mut exp = 1u32;
                skip_ws(&mut i);
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    skip_ws(&mut i);
                    let es = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if es == i {
                        return Err(err(es, "expected exponent after `^`"));
                    }
                    exp = input[es..i].parse().map_err(|_| err(es, "exponent out of range"))?;
                }
                current.get_or_insert((sign, Vec::new())).1.push((name, exp));
                expect_term = false;
            }
            _ => return Err(err(i, "unexpected character")),
        }
    }
    match current {
        Some(t) => terms.push(t),
        None if terms.is_empty() && expect_term && input.trim().is_empty() => {
            return Err(err(0, "empty expression"))
        }
        None => return Err(err(input.len(), "expression ends with an operator")),
    }
    Ok(terms)
}
