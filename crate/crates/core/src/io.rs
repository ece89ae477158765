//! Reading and writing artifacts in canonical form.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::canon::{from_json_str, to_canonical_string, write_atomic};
use crate::error::{Error, Result};

/// Canonical JSON document followed by a newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = to_canonical_string(value);
    s.push('\n');
    s.into_bytes()
}

/// One canonical JSON document per line.
pub fn to_jsonl_bytes<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut s = String::new();
    for it in items {
        s.push_str(&to_canonical_string(it));
        s.push('\n');
    }
    s.into_bytes()
}

pub fn from_jsonl_str<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            from_json_str(line).map_err(|e| match e {
                Error::Parse { pointer, message } => Error::Parse {
                    pointer: format!("line {}{pointer}", n + 1),
                    message,
                },
                other => other,
            })
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json_str(&read_text(path)?)
}

pub fn save_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_atomic(path, &to_jsonl_bytes(items))
}

pub fn load_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    from_jsonl_str(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn jsonl_errors_name_the_line() {
        let text = "{\"a\":1}\n{\"a\":\"x\"}\n";
        let err = from_jsonl_str::<BTreeMap<String, u32>>(text).unwrap_err();
        match err {
            Error::Parse { pointer, .. } => assert_eq!(pointer, "line 2/a"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let items = vec![BTreeMap::from([("k".to_string(), 1.5)]), BTreeMap::new()];
        let bytes = to_jsonl_bytes(&items);
        let back: Vec<BTreeMap<String, f64>> = from_jsonl_str(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(back, items);
        assert_eq!(to_jsonl_bytes(&back), bytes);
    }
}
