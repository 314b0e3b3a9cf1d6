//! Flat JSON config files layered under command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

/// Prefix of per-constant config keys, e.g. `"constants.c5": 2.0`.
pub const CONSTANT_PREFIX: &str = "constants.";

pub trait FromJson: Sized {
    fn from_json(v: &Value) -> Option<Self>;
    /// Parse one comma-separated item of a string list.
    fn from_item(s: &str) -> Option<Self>;
}

impl FromJson for f64 {
    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => Self::from_item(s),
            _ => None,
        }
    }

    fn from_item(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl FromJson for u64 {
    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Number(n) => n.as_u64(),
            Value::String(s) => Self::from_item(s),
            _ => None,
        }
    }

    fn from_item(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl FromJson for usize {
    fn from_json(v: &Value) -> Option<Self> {
        u64::from_json(v).and_then(|x| usize::try_from(x).ok())
    }

    fn from_item(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl FromJson for String {
    fn from_json(v: &Value) -> Option<Self> {
        v.as_str().map(String::from)
    }

    fn from_item(s: &str) -> Option<Self> {
        Some(s.trim().to_string())
    }
}

impl FromJson for PathBuf {
    fn from_json(v: &Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }

    fn from_item(s: &str) -> Option<Self> {
        Some(PathBuf::from(s))
    }
}

/// Keys of a loaded config file that have not been consumed yet.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, Value>,
    origin: String,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).with_context(|| format!("config {origin} is not valid JSON"))?;
        let Value::Object(map) = v else { bail!("config {origin} must be a JSON object") };
        let mut entries = BTreeMap::new();
        for (k, v) in map {
            if matches!(v, Value::Object(_)) {
                bail!("config {origin}: key `{k}` holds a nested object; use flat keys such as `{CONSTANT_PREFIX}c5`");
            }
            entries.insert(k, v);
        }
        Ok(Self { entries, origin: origin.to_string() })
    }

    /// `flag` if given, otherwise the config value.
    pub fn value<T: FromJson>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let from_file = match self.entries.remove(key) {
            Some(v) => Some(T::from_json(&v).ok_or_else(|| anyhow!("config {}: bad value {v} for `{key}`", self.origin))?),
            None => None,
        };
        Ok(flag.or(from_file))
    }

    /// Like [`value`](Self::value) for list flags; an empty flag list counts as absent.
    pub fn list<T: FromJson>(&mut self, key: &str, flag: Vec<T>) -> Result<Option<Vec<T>>> {
        let from_file = match self.entries.remove(key) {
            Some(v) => Some(parse_list(&v).ok_or_else(|| anyhow!("config {}: bad list {v} for `{key}`", self.origin))?),
            None => None,
        };
        Ok(if flag.is_empty() { from_file } else { Some(flag) })
    }

    /// Constant overrides from the file, then from `--constants` flags.
    pub fn constants(&mut self, flags: &[String]) -> Result<BTreeMap<String, f64>> {
        let keys: Vec<String> = self.entries.keys().filter(|k| k.starts_with(CONSTANT_PREFIX)).cloned().collect();
        let mut out = BTreeMap::new();
        for k in keys {
            let v = self.entries.remove(&k).expect("key listed");
            let x = f64::from_json(&v).ok_or_else(|| anyhow!("config {}: bad value {v} for `{k}`", self.origin))?;
            out.insert(k[CONSTANT_PREFIX.len()..].to_string(), x);
        }
        for item in flags {
            let (k, v) = item.split_once('=').ok_or_else(|| anyhow!("--constants expects key=value (got `{item}`)"))?;
            let x = f64::from_item(v).ok_or_else(|| anyhow!("--constants {k}: `{v}` is not a number"))?;
            out.insert(k.trim().to_string(), x);
        }
        Ok(out)
    }

    /// Rejects any key no option consumed.
    pub fn finish(self) -> Result<()> {
        if let Some(k) = self.entries.keys().next() {
            bail!("config {}: unknown key `{k}`", self.origin);
        }
        Ok(())
    }
}

fn parse_list<T: FromJson>(v: &Value) -> Option<Vec<T>> {
    match v {
        Value::Array(items) => items.iter().map(T::from_json).collect(),
        Value::String(s) => s.split(',').map(T::from_item).collect(),
        other => T::from_json(other).map(|x| vec![x]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file() {
        let mut c = ConfigFile::parse(r#"{"trials": 10, "n": [101, 1001], "t": "0.1,0.5"}"#, "test").unwrap();
        assert_eq!(c.value::<usize>("trials", Some(3)).unwrap(), Some(3));
        assert_eq!(c.list::<usize>("n", vec![]).unwrap(), Some(vec![101, 1001]));
        assert_eq!(c.list::<f64>("t", vec![]).unwrap(), Some(vec![0.1, 0.5]));
        assert_eq!(c.value::<u64>("seed", None).unwrap(), None);
        c.finish().unwrap();
    }

    #[test]
    fn leftovers_and_nesting_are_rejected() {
        let c = ConfigFile::parse(r#"{"bogus": 1}"#, "test").unwrap();
        assert!(c.finish().is_err());
        assert!(ConfigFile::parse(r#"{"constants": {"c5": 1}}"#, "test").is_err());
        assert!(ConfigFile::parse("[1]", "test").is_err());
    }

    #[test]
    fn constants_merge() {
        let mut c = ConfigFile::parse(r#"{"constants.c5": 2, "constants.c0": 3}"#, "test").unwrap();
        let m = c.constants(&["c5=4".into()]).unwrap();
        assert_eq!(m["c5"], 4.0);
        assert_eq!(m["c0"], 3.0);
        c.finish().unwrap();
    }

    #[test]
    fn large_seeds_are_exact() {
        let mut c = ConfigFile::parse(r#"{"seed": 18446744073709551615}"#, "test").unwrap();
        assert_eq!(c.value::<u64>("seed", None).unwrap(), Some(u64::MAX));
    }
}
