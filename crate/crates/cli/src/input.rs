//! Whitespace-separated integer input.

use std::fmt;

use num_bigint::BigInt;

/// Parsed input values. Machine integers when every token fits, big integers
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Values {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: not an integer: {:?}",
            self.line, self.column, self.token
        )
    }
}

impl std::error::Error for ParseError {}

fn is_integer(tok: &str) -> bool {
    let digits = tok.strip_prefix(['+', '-']).unwrap_or(tok);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Splits `text` on ASCII whitespace. Lines and columns in errors are 1-based;
/// columns count characters.
pub fn parse_values(text: &str) -> Result<Values, ParseError> {
    let mut tokens = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut start = None;
        for (ci, (bi, ch)) in line.char_indices().chain([(line.len(), ' ')]).enumerate() {
            if ch.is_ascii_whitespace() {
                if let Some((s, col)) = start.take() {
                    tokens.push((&line[s..bi], li + 1, col));
                }
            } else if start.is_none() {
                start = Some((bi, ci + 1));
            }
        }
    }
    if let Some(&(tok, line, column)) = tokens.iter().find(|(t, _, _)| !is_integer(t)) {
        return Err(ParseError {
            line,
            column,
            token: tok.to_string(),
        });
    }
    let small: Option<Vec<i64>> = tokens.iter().map(|(t, _, _)| t.parse().ok()).collect();
    Ok(match small {
        Some(v) => Values::Small(v),
        None => Values::Big(
            tokens
                .iter()
                .map(|(t, _, _)| t.parse().expect("validated integer token"))
                .collect(),
        ),
    })
}
