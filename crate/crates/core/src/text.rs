//! Plain-text sequence format.
//!
//! Alphabets with `q <= 10` use one character per symbol (`0`-`9`, `*` for a
//! wildcard). Larger alphabets use comma-separated integers with `*` tokens.
//! Whitespace is ignored when parsing.

use thiserror::Error;

use crate::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("unexpected token '{token}' at symbol {position}")]
    BadToken { token: String, position: usize },
    #[error("symbol {symbol} at position {position} is outside the alphabet of size {q}")]
    OutOfAlphabet { symbol: Symbol, position: usize, q: usize },
    #[error("wildcard at position {0} is not allowed in a transmitted sequence")]
    Wildcard(usize),
}

fn compact(q: usize) -> bool {
    q <= 10
}

/// Formats cells where `None` is the wildcard.
pub fn format_cells(cells: &[Option<Symbol>], q: usize) -> String {
    if compact(q) {
        cells
            .iter()
            .map(|c| match c {
                Some(s) => char::from_digit(*s, 10).expect("q <= 10"),
                None => '*',
            })
            .collect()
    } else {
        cells
            .iter()
            .map(|c| match c {
                Some(s) => s.to_string(),
                None => "*".to_string(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn format_symbols(symbols: &[Symbol], q: usize) -> String {
    let cells: Vec<Option<Symbol>> = symbols.iter().copied().map(Some).collect();
    format_cells(&cells, q)
}

pub fn parse_cells(text: &str, q: usize) -> Result<Vec<Option<Symbol>>, TextError> {
    let tokens: Vec<String> = if compact(q) {
        text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
    } else {
        let stripped: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if stripped.is_empty() {
            Vec::new()
        } else {
            stripped.split(',').map(String::from).collect()
        }
    };
    tokens
        .into_iter()
        .enumerate()
        .map(|(position, token)| {
            if token == "*" {
                return Ok(None);
            }
            let symbol: Symbol = token
                .parse()
                .map_err(|_| TextError::BadToken { token: token.clone(), position })?;
            if symbol as usize >= q {
                return Err(TextError::OutOfAlphabet { symbol, position, q });
            }
            Ok(Some(symbol))
        })
        .collect()
}

/// Parses a wildcard-free sequence.
pub fn parse_symbols(text: &str, q: usize) -> Result<Vec<Symbol>, TextError> {
    parse_cells(text, q)?
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(TextError::Wildcard(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compact_format() {
        let cells = [None, Some(0), Some(1), None];
        assert_eq!(format_cells(&cells, 2), "*01*");
        assert_eq!(parse_cells("*0\n1 *", 2).unwrap(), cells);
        assert!(matches!(parse_cells("012", 2), Err(TextError::OutOfAlphabet { symbol: 2, .. })));
        assert!(matches!(parse_cells("0x", 2), Err(TextError::BadToken { position: 1, .. })));
        assert_eq!(parse_symbols("*1", 2), Err(TextError::Wildcard(0)));
    }

    #[test]
    fn wide_format() {
        let cells = [Some(11), None, Some(0)];
        assert_eq!(format_cells(&cells, 12), "11,*,0");
        assert_eq!(parse_cells("11, *,0\n", 12).unwrap(), cells);
        assert_eq!(parse_cells("", 12).unwrap(), vec![]);
    }

    proptest! {
        #[test]
        fn round_trip(q in 2usize..40, raw in proptest::collection::vec(proptest::option::of(0u32..1000), 0..60)) {
            let cells: Vec<Option<Symbol>> = raw.into_iter().map(|c| c.map(|s| s % q as u32)).collect();
            prop_assert_eq!(parse_cells(&format_cells(&cells, q), q).unwrap(), cells);
        }
    }
}
