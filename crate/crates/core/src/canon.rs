//! Canonical JSON: lexicographically sorted keys, no insignificant
//! whitespace, every float written with exactly six decimals.
//!
//! Canonical bytes are the basis for content hashes, so the writer never
//! depends on map iteration order or float shortest-repr heuristics.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    // serde_json's default Map is a BTreeMap, so object keys come out sorted.
    let v = serde_json::to_value(value).expect("artifact types serialize to JSON");
    let mut out = Vec::with_capacity(1024);
    v.serialize(&mut serde_json::Serializer::with_formatter(&mut out, SixDecimals))
        .expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

struct SixDecimals;

impl serde_json::ser::Formatter for SixDecimals {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f64) -> std::io::Result<()> {
        let mut buf = [0u8; 512];
        let mut cur = std::io::Cursor::new(&mut buf[..]);
        write!(cur, "{x:.6}")?;
        let n = cur.position() as usize;
        if &buf[..n] == b"-0.000000" {
            w.write_all(b"0.000000")
        } else {
            w.write_all(&buf[..n])
        }
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, x: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(x))
    }
}

/// Rounds to the six-decimal grid the canonical writer uses.
pub fn quantize(x: f64) -> f64 {
    format!("{x:.6}").parse().unwrap()
}

pub fn from_json_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    match serde_json::from_str(s) {
        Ok(value) => Ok(value),
        Err(_) => Err(locate_error::<T>(s)),
    }
}

fn locate_error<T: DeserializeOwned>(s: &str) -> Error {
    let mut de = serde_json::Deserializer::from_str(s);
    match serde_path_to_error::deserialize::<_, T>(&mut de) {
        Err(e) => Error::Parse {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        },
        Ok(_) => Error::Parse {
            pointer: String::new(),
            message: de
                .end()
                .err()
                .map_or_else(|| "invalid JSON".to_string(), |e| e.to_string()),
        },
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut ptr = String::new();
    for seg in path.iter() {
        ptr.push('/');
        match seg {
            Segment::Seq { index } => write!(ptr, "{index}").unwrap(),
            Segment::Map { key } => ptr.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => ptr.push_str(variant),
            Segment::Unknown => ptr.push('?'),
        }
    }
    ptr
}

/// Round-trips a value through its canonical text so the in-memory value is
/// exactly what a reader of the file would get.
pub fn canonicalize<T: Serialize + DeserializeOwned>(value: &T) -> Result<T> {
    from_json_str(&to_canonical_string(value))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn content_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(to_canonical_string(value).as_bytes())
}

/// Writes via a sibling temp file and rename so readers never observe a
/// partially written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Sample {
        zeta: f64,
        alpha: Vec<u32>,
        name: String,
        neg: f64,
    }

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let s = Sample {
            zeta: 1.5,
            alpha: vec![1, 2],
            name: "a\"b".into(),
            neg: -0.0000001,
        };
        assert_eq!(
            to_canonical_string(&s),
            r#"{"alpha":[1,2],"name":"a\"b","neg":0.000000,"zeta":1.500000}"#
        );
    }

    #[test]
    fn parse_error_carries_pointer() {
        let err = from_json_str::<Sample>(r#"{"zeta":1.0,"alpha":[1,"x"],"name":"n","neg":0}"#).unwrap_err();
        match err {
            Error::Parse { pointer, .. } => assert_eq!(pointer, "/alpha/1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_input_is_rejected() {
        assert!(matches!(
            from_json_str::<Sample>(r#"{"zeta":1.0,"alpha":[1,"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn quantize_is_idempotent_under_the_writer() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 123.456_789_5, -2.5e-7, f64::MAX, -f64::MAX] {
            let q = quantize(x);
            assert_eq!(quantize(q), q);
            assert_eq!(to_canonical_string(&x), to_canonical_string(&q));
        }
    }
}
