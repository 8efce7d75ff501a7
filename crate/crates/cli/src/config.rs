//! Flat key=value config files: defaults for flags the user did not pass.
//! Keys use the long flag spelling (e.g. `n-jobs=5000`). Explicit CLI
//! flags always win.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct Overrides {
    map: HashMap<String, String>,
}

impl Overrides {
    pub fn load(path: Option<&Path>) -> Result<Overrides> {
        let Some(path) = path else {
            return Ok(Overrides::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value, got {raw:?}", path.display(), i + 1);
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Overrides { map })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => match v.parse() {
                Ok(parsed) => Ok(Some(parsed)),
                Err(e) => bail!("config key {key}: bad value {v:?}: {e}"),
            },
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.parsed(key)
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key)
    }

    pub fn u32(&self, key: &str) -> Result<Option<u32>> {
        self.parsed(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key)
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.parsed(key)
    }

    /// Comma-separated list values, e.g. `horizons=1,3,7,14,30`.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|e| anyhow::anyhow!("config key {key}: bad item {item:?}: {e}"))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_keys_comments_and_lists() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# defaults\nn-jobs = 5000\nseed=9\nhorizons=1,3,7").unwrap();
        let o = Overrides::load(Some(f.path())).unwrap();
        assert_eq!(o.usize("n-jobs").unwrap(), Some(5000));
        assert_eq!(o.u64("seed").unwrap(), Some(9));
        assert_eq!(o.list::<u32>("horizons").unwrap(), Some(vec![1, 3, 7]));
        assert_eq!(o.usize("missing").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines_and_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "not a pair").unwrap();
        assert!(Overrides::load(Some(f.path())).is_err());

        let mut f2 = tempfile::NamedTempFile::new().unwrap();
        writeln!(f2, "n-jobs=abc").unwrap();
        let o = Overrides::load(Some(f2.path())).unwrap();
        assert!(o.usize("n-jobs").is_err());
    }
}
