//! Initial-value bindings for oracle runs.
//!
//! Plain text, one binding per line: `name = v` for scalars and
//! `name = [v0, v1, ...]` for arrays. Blank lines and `#`/`//` comments are
//! ignored.

use crate::concrete::Value;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputBindings {
    pub scalars: BTreeMap<String, Value>,
    pub arrays: BTreeMap<String, Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("inputs line {line}: {message}")]
pub struct InputError {
    pub line: usize,
    pub message: String,
}

impl InputBindings {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let mut out = InputBindings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let err = |message: String| InputError { line, message };
            let mut s = raw;
            if let Some(i) = s.find('#') {
                s = &s[..i];
            }
            if let Some(i) = s.find("//") {
                s = &s[..i];
            }
            let s = s.trim();
            if s.is_empty() {
                continue;
            }
            let Some((name, value)) = s.split_once('=') else {
                return Err(err(format!("expected `name = value`, got `{s}`")));
            };
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("bad name `{name}`")));
            }
            let value = value.trim();
            if let Some(list) = value.strip_prefix('[') {
                let Some(list) = list.strip_suffix(']') else {
                    return Err(err("unterminated `[`".into()));
                };
                let mut vals = Vec::new();
                let list = list.trim();
                if !list.is_empty() {
                    for item in list.split(',') {
                        let item = item.trim();
                        vals.push(
                            item.parse::<Value>()
                                .map_err(|_| err(format!("bad integer `{item}`")))?,
                        );
                    }
                }
                if out.arrays.insert(name.to_string(), vals).is_some() {
                    return Err(err(format!("duplicate binding for `{name}`")));
                }
            } else {
                let v = value
                    .parse::<Value>()
                    .map_err(|_| err(format!("bad integer `{value}`")))?;
                if out.scalars.insert(name.to_string(), v).is_some() {
                    return Err(err(format!("duplicate binding for `{name}`")));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_arrays_and_comments() {
        let b = InputBindings::parse("# fixture\nA = [1, 2, 3]\nn = 7 // trailing\n\ng = -4\n")
            .unwrap();
        assert_eq!(b.arrays["A"], vec![1, 2, 3]);
        assert_eq!(b.scalars["n"], 7);
        assert_eq!(b.scalars["g"], -4);
    }

    #[test]
    fn empty_array_and_errors() {
        assert_eq!(InputBindings::parse("A = []").unwrap().arrays["A"], Vec::<i64>::new());
        assert!(InputBindings::parse("A = [1,").is_err());
        assert!(InputBindings::parse("A = x").is_err());
        assert!(InputBindings::parse("A = 1\nA = 2").is_err());
    }
}
