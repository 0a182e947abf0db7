//! Content-addressed store of optimised gate parameters.
//!
//! Keys are SHA-256 digests of a canonical description of the optimisation
//! problem. Floats are stored by their IEEE-754 bit patterns so a cache hit
//! reproduces the fresh computation bit for bit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT: u32 = 1;

/// An f64 serialised as 16 hex digits of its bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Bits(pub f64);

impl From<Bits> for String {
    fn from(b: Bits) -> String {
        format!("{:016x}", b.0.to_bits())
    }
}

impl TryFrom<String> for Bits {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        u64::from_str_radix(&s, 16).map(|u| Bits(f64::from_bits(u))).map_err(|e| format!("bad float bits '{s}': {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Entry {
    CzAdiabatic { theta1: Bits, theta2: Bits, residual: Bits },
    Not { drive_frequency: Bits, omega1: Bits, omega2: Bits, infidelity: Bits, leakage: Bits },
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct File {
    format: u32,
    entries: BTreeMap<String, Entry>,
}

#[derive(Debug, Default)]
pub struct Cache {
    path: Option<PathBuf>,
    entries: BTreeMap<String, Entry>,
    dirty: bool,
}

/// Problem description hashed into a cache key.
#[derive(Serialize)]
struct KeyMaterial<'a> {
    crate_version: &'a str,
    problem: &'a str,
    params: Vec<(&'a str, Bits)>,
}

pub fn key(problem: &str, params: &[(&str, f64)]) -> String {
    let material = KeyMaterial {
        crate_version: env!("CARGO_PKG_VERSION"),
        problem,
        params: params.iter().map(|&(k, v)| (k, Bits(v))).collect(),
    };
    let canonical = serde_json::to_vec(&material).expect("key material serialises");
    hex::encode(Sha256::digest(&canonical))
}

impl Cache {
    /// Opens `path`; a missing file is an empty cache, an unreadable one is
    /// reported on stderr and ignored.
    pub fn open(path: Option<&Path>) -> Self {
        let Some(path) = path else { return Self::default() };
        let entries = match std::fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str::<File>(&text) {
                Ok(f) if f.format == FORMAT => f.entries,
                Ok(_) => BTreeMap::new(),
                Err(e) => {
                    eprintln!("warning: ignoring unreadable cache {}: {e}", path.display());
                    BTreeMap::new()
                }
            },
            Err(_) => BTreeMap::new(),
        };
        Self { path: Some(path.to_path_buf()), entries, dirty: false }
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, entry: Entry) {
        if self.path.is_some() && self.entries.get(&key) != Some(&entry) {
            self.entries.insert(key, entry);
            self.dirty = true;
        }
    }

    /// Writes through a temporary file and rename.
    pub fn save(&self) -> std::io::Result<()> {
        let (Some(path), true) = (&self.path, self.dirty) else { return Ok(()) };
        let file = File { format: FORMAT, entries: self.entries.clone() };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        let tmp = path.with_file_name(format!(
            ".{}.{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("tleak-cache"),
            std::process::id()
        ));
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_round_trip() {
        for x in [0.1, -3.5e-300, f64::MAX, 1.0 / 3.0] {
            let s: String = Bits(x).into();
            assert_eq!(Bits::try_from(s).unwrap().0.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn keys_separate_problems() {
        let a = key("cz-adiabatic", &[("duration", 40.0)]);
        assert_eq!(a, key("cz-adiabatic", &[("duration", 40.0)]));
        assert_ne!(a, key("cz-adiabatic", &[("duration", 40.000000001)]));
        assert_ne!(a, key("not", &[("duration", 40.0)]));
        assert_eq!(a.len(), 64);
    }
}
