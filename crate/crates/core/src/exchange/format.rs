//! Matrix JSON (`{"mutable": n, "frozen": m, "b": [[…], …]}`), the plain-text
//! format (`n m` then rows), and the inline `"0 1;-1 0"` form.

use serde::{Deserialize, Serialize};

use super::ExchangeMatrix;
use crate::error::{MatrixError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub mutable: usize,
    pub frozen: usize,
    pub b: Vec<Vec<i64>>,
}

impl From<&ExchangeMatrix> for MatrixJson {
    fn from(b: &ExchangeMatrix) -> Self {
        Self {
            mutable: b.mutable(),
            frozen: b.frozen(),
            b: b.rows(),
        }
    }
}

impl TryFrom<MatrixJson> for ExchangeMatrix {
    type Error = MatrixError;

    fn try_from(json: MatrixJson) -> Result<Self> {
        ExchangeMatrix::from_rows(json.mutable, json.frozen, &json.b)
    }
}

impl Serialize for ExchangeMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExchangeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(deserializer)?;
        ExchangeMatrix::try_from(json).map_err(serde::de::Error::custom)
    }
}

impl ExchangeMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        let json: MatrixJson = serde_json::from_str(text).map_err(|e| MatrixError::Parse(e.to_string()))?;
        Self::try_from(json)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixJson::from(self)).expect("plain data serializes")
    }

    /// Parses the `n m` header followed by `n + m` whitespace-separated rows.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut numbers = text.split_whitespace().map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| MatrixError::Parse(format!("not an integer: {tok:?}")))
        });
        let mut header = || -> Result<usize> {
            let v = numbers
                .next()
                .ok_or_else(|| MatrixError::Parse("missing `n m` header".into()))??;
            usize::try_from(v).map_err(|_| MatrixError::Parse(format!("negative size {v}")))
        };
        let n = header()?;
        let m = header()?;
        let entries = numbers.collect::<Result<Vec<i64>>>()?;
        Self::new(n, m, entries)
    }

    /// Rows separated by `;`, entries by whitespace; the last `frozen` indices
    /// are frozen.
    pub fn from_inline(text: &str, frozen: usize) -> Result<Self> {
        let rows = text
            .split(';')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(|r| {
                r.split_whitespace()
                    .map(|tok| {
                        tok.parse::<i64>()
                            .map_err(|_| MatrixError::Parse(format!("not an integer: {tok:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let size = rows.len();
        let n = size
            .checked_sub(frozen)
            .ok_or_else(|| MatrixError::Parse(format!("{frozen} frozen indices but only {size} rows")))?;
        Self::from_rows(n, frozen, &rows)
    }

    /// JSON if the text starts with `{`, plain text otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let a3 = ExchangeMatrix::path(3).unwrap();
        let text = a3.to_json();
        assert_eq!(text, r#"{"mutable":3,"frozen":0,"b":[[0,1,0],[-1,0,1],[0,-1,0]]}"#);
        assert_eq!(ExchangeMatrix::from_json(&text).unwrap(), a3);
    }

    #[test]
    fn text_round_trip() {
        let ice = ExchangeMatrix::from_rows(1, 1, &[vec![0, 2], vec![-1, 0]]).unwrap();
        let text = ice.to_string();
        assert_eq!(text, "1 1\n0 2\n-1 0\n");
        assert_eq!(ExchangeMatrix::from_text(&text).unwrap(), ice);
        assert_eq!(ExchangeMatrix::parse(&text).unwrap(), ice);
    }

    #[test]
    fn inline() {
        let a2 = ExchangeMatrix::from_inline("0 1;-1 0", 0).unwrap();
        assert_eq!(a2, ExchangeMatrix::kronecker(1));
        let ice = ExchangeMatrix::from_inline("0 1; -1 0;", 1).unwrap();
        assert_eq!((ice.mutable(), ice.frozen()), (1, 1));
        assert!(ExchangeMatrix::from_inline("0 1;-1 0", 3).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(ExchangeMatrix::from_text("2 0\n0 x\n"), Err(MatrixError::Parse(_))));
        assert!(matches!(ExchangeMatrix::from_text(""), Err(MatrixError::Parse(_))));
        assert!(matches!(ExchangeMatrix::from_text("2 0\n0 1\n-1"), Err(MatrixError::Shape { .. })));
        assert!(ExchangeMatrix::from_json(r#"{"mutable":2,"frozen":0,"b":[[0,1],[1,0]]}"#).is_err());
        assert!(ExchangeMatrix::from_json("{").is_err());
    }
}
