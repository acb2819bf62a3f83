//! Layered run configuration: built-in defaults, then a `key = value` file,
//! then `--set key=value` overrides, then dedicated flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use vfnet::{Error, Result, TrainConfig, WindowKind};

/// Every recognised key, in echo order, with its default (if any).
const KEYS: &[(&str, Option<&str>)] = &[
    ("seed", Some("0")),
    ("learning_rate", Some("0.001")),
    ("beta1", Some("0.9")),
    ("beta2", Some("0.999")),
    ("adam_eps", Some("1e-8")),
    ("batch_size", Some("32")),
    ("epochs", Some("30")),
    ("test_fraction", Some("0.2")),
    ("sample_rate_hz", Some("16000")),
    ("window_size", Some("256")),
    ("hop", Some("128")),
    ("window_kind", Some("hann")),
    ("floor_eps", Some("1e-10")),
    ("segment_width", Some("120")),
    ("filter_heights", Some("3,5,7,9")),
    ("channels_per_height", Some("64")),
    ("pool_regions", Some("8")),
    ("hidden_units", Some("128")),
    ("clips_per_class", Some("10")),
    ("manifest", None),
    ("store", None),
    ("train_store", None),
    ("eval_store", None),
    ("train_out", None),
    ("test_out", None),
    ("params", None),
    ("out_dir", None),
    ("wav", None),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

fn known(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _)| *k).find(|k| *k == key)
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .filter_map(|(k, v)| v.map(|v| (*k, v.to_string())))
            .collect();
        Self { values }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = known(key).ok_or_else(|| Error::InvalidConfig(format!("unknown key {key:?}")))?;
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got {pair:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", i + 1))
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
        self.merge_text(&text).map_err(|e| e.at_path(path))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::InvalidConfig(format!("missing value for {key}")))?;
        raw.parse()
            .map_err(|_| Error::InvalidConfig(format!("{key} = {raw:?} is not a valid value")))
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        self.get(key)
            .map(PathBuf::from)
            .ok_or_else(|| Error::InvalidConfig(format!("{key} is required (--{})", key.replace('_', "-"))))
    }

    pub fn optional_path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn seed(&self) -> Result<u64> {
        self.parse("seed")
    }

    pub fn clips_per_class(&self) -> Result<usize> {
        match self.parse("clips_per_class")? {
            0 => Err(Error::InvalidConfig("clips_per_class must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut cfg = TrainConfig {
            learning_rate: self.parse("learning_rate")?,
            beta1: self.parse("beta1")?,
            beta2: self.parse("beta2")?,
            adam_eps: self.parse("adam_eps")?,
            batch_size: self.parse("batch_size")?,
            epochs: self.parse("epochs")?,
            seed: self.seed()?,
            test_fraction: self.parse("test_fraction")?,
            channels_per_height: self.parse("channels_per_height")?,
            pool_regions: self.parse("pool_regions")?,
            hidden_units: self.parse("hidden_units")?,
            ..TrainConfig::default()
        };
        cfg.dsp.sample_rate_hz = self.parse("sample_rate_hz")?;
        cfg.dsp.window_size = self.parse("window_size")?;
        cfg.dsp.hop = self.parse("hop")?;
        cfg.dsp.window_kind = self.parse::<WindowKind>("window_kind")?;
        cfg.dsp.floor_eps = self.parse("floor_eps")?;
        cfg.dsp.segment_width = self.parse("segment_width")?;
        let heights = self.get("filter_heights").unwrap_or("");
        cfg.filter_heights = heights
            .split(',')
            .map(|h| h.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidConfig(format!("filter_heights = {heights:?} is not a list of integers")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `key = value` lines for every set key, in a fixed order.
    pub fn render(&self) -> String {
        KEYS.iter()
            .filter_map(|(k, _)| self.values.get(k).map(|v| format!("{k} = {v}\n")))
            .collect()
    }

    pub fn echo_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::from(e).at_path(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_library_defaults() {
        assert_eq!(RunConfig::default().train_config().unwrap(), TrainConfig::default());
    }

    #[test]
    fn layering_order() {
        let mut cfg = RunConfig::default();
        cfg.merge_text("# comment\nepochs = 5   # trailing\n\nbatch_size=8\n").unwrap();
        cfg.set_pair("epochs=7").unwrap();
        let t = cfg.train_config().unwrap();
        assert_eq!(t.epochs, 7);
        assert_eq!(t.batch_size, 8);
        assert!(cfg.render().contains("epochs = 7\n"));
    }

    #[test]
    fn rendered_config_reloads_identically() {
        let mut cfg = RunConfig::default();
        cfg.set("filter_heights", "2,4").unwrap();
        cfg.set("out_dir", "/tmp/x").unwrap();
        let mut again = RunConfig::default();
        again.merge_text(&cfg.render()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.train_config().unwrap().filter_heights, vec![2, 4]);
    }

    #[test]
    fn bad_input_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.merge_text("nonsense\n").is_err());
        assert!(cfg.merge_text("colour = red\n").is_err());
        cfg.set("epochs", "many").unwrap();
        assert!(cfg.train_config().is_err());
        assert!(RunConfig::default().path("manifest").is_err());
    }
}
