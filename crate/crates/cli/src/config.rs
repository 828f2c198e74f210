//! Optional `key = value` configuration files. Keys are the long flag names.

use std::collections::BTreeMap;
use std::path::Path;

use opaug::{Error, Result};

pub const KEYS: &[&str] = &[
    "n", "nx", "ny", "edges", "boundary", "gamma", "noise", "methods", "trials", "samples", "seed", "threads", "out",
    "format", "timing",
];

/// Parses a configuration file body. Blank lines and lines starting with `#`
/// are ignored; unknown and repeated keys are errors.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("config line {}: key {key:?} given twice", i + 1)));
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys() {
        let c = parse("# run\nn = 64\nnoise=gamma:1,0.45\n\n").unwrap();
        assert_eq!(c["n"], "64");
        assert_eq!(c["noise"], "gamma:1,0.45");
    }

    #[test]
    fn rejects_unknown_and_repeated() {
        assert!(parse("size = 3").is_err());
        assert!(parse("n = 3\nn = 4").is_err());
        assert!(parse("n 3").is_err());
    }
}
