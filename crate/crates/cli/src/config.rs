//! Layered run configuration.
//!
//! Every key is resolved from, in order of precedence: command line flag,
//! config file, preset (setting a/b plus per-family window and tolerance),
//! built-in default. The config file is flat `key = value` text with `#`
//! comments; relative paths in it are taken relative to the file itself.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use tire::{AeSettings, Family, Mode, Preset, Scoring, Settings};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Default,
    Preset,
    File,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::Preset => "preset",
            Source::File => "config",
            Source::Flag => "flag",
        })
    }
}

/// Keys understood in config files and `--explain-config` output.
pub const KEYS: &[&str] = &[
    "mode",
    "setting",
    "window",
    "delta",
    "spectrum_len",
    "h_td",
    "s_td",
    "lambda_td",
    "h_fd",
    "s_fd",
    "lambda_fd",
    "K",
    "epochs",
    "batch_size",
    "learning_rate",
    "seed",
    "tau",
    "alpha",
    "beta",
    "smoothing",
    "matched_filter",
    "scoring",
    "out",
    "truth",
];

const PATH_KEYS: &[&str] = &["out", "truth"];

#[derive(Debug, Clone, Default)]
pub struct Layer {
    values: BTreeMap<String, String>,
}

impl Layer {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut layer = Layer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Usage(format!("{}:{}: unknown key '{key}'", path.display(), i + 1)));
            }
            if PATH_KEYS.contains(&key) {
                layer.set(key, base.join(value).display());
            } else {
                layer.set(key, value);
            }
        }
        Ok(layer)
    }
}

fn preset_layer(preset: Preset, family: Option<Family>) -> Layer {
    let base = Settings::preset(preset, 1);
    let mut layer = Layer::default();
    layer.set("h_td", base.td.hidden);
    layer.set("s_td", base.td.shared);
    layer.set("lambda_td", base.td.lambda);
    layer.set("h_fd", base.fd.hidden);
    layer.set("s_fd", base.fd.shared);
    layer.set("lambda_fd", base.fd.lambda);
    layer.set("K", base.k);
    if let Some(f) = family {
        let (n, delta) = tire::family_window_delta(f);
        layer.set("window", n);
        layer.set("delta", delta);
    }
    layer
}

fn default_layer() -> Layer {
    let base = Settings::preset(Preset::A, 1);
    let mut layer = Layer::default();
    layer.set("mode", base.mode);
    layer.set("setting", Preset::A);
    layer.set("K", base.k);
    layer.set("epochs", base.epochs);
    layer.set("batch_size", base.batch_size);
    layer.set("learning_rate", base.learning_rate);
    layer.set("seed", base.seed);
    layer.set("tau", base.tau);
    layer.set("smoothing", base.smoothing);
    layer.set("matched_filter", base.matched_filter);
    layer.set("scoring", base.scoring);
    layer
}

/// Fully resolved configuration with the origin of every value.
#[derive(Debug, Clone)]
pub struct Resolved {
    values: BTreeMap<String, (String, Source)>,
}

impl Resolved {
    /// Merges the layers; `family` supplies the window/tolerance preset.
    pub fn build(flags: &Layer, file: Option<&Layer>, family: Option<Family>) -> Result<Self, CliError> {
        let setting_raw = flags
            .get("setting")
            .or_else(|| file.and_then(|f| f.get("setting")))
            .unwrap_or("a");
        let preset: Preset = setting_raw.parse().map_err(|e: tire::Error| CliError::Usage(e.to_string()))?;
        let mut values = BTreeMap::new();
        let layers = [
            (Some(default_layer()), Source::Default),
            (Some(preset_layer(preset, family)), Source::Preset),
            (file.cloned(), Source::File),
            (Some(flags.clone()), Source::Flag),
        ];
        for (layer, source) in layers {
            if let Some(layer) = layer {
                for (k, v) in layer.values {
                    values.insert(k, (v, source));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value '{v}' for {key}"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str, hint: &str) -> Result<T, CliError> {
        self.parse(key)?
            .ok_or_else(|| CliError::Usage(format!("missing {key}: {hint}")))
    }

    pub fn delta(&self) -> Result<usize, CliError> {
        self.require("delta", "set --delta (or use a synthetic family preset)")
    }

    pub fn delta_opt(&self) -> Result<Option<usize>, CliError> {
        self.parse("delta")
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        let window: usize = self.require("window", "set --window N for user data")?;
        let mode: Mode = self.require("mode", "")?;
        let ae = |h: &str, s: &str, l: &str| -> Result<AeSettings, CliError> {
            Ok(AeSettings {
                hidden: self.require(h, "")?,
                shared: self.require(s, "")?,
                lambda: self.require(l, "")?,
            })
        };
        let settings = Settings {
            mode,
            window,
            spectrum_len: self.parse("spectrum_len")?,
            td: ae("h_td", "s_td", "lambda_td")?,
            fd: ae("h_fd", "s_fd", "lambda_fd")?,
            k: self.require("K", "")?,
            epochs: self.require("epochs", "")?,
            batch_size: self.require("batch_size", "")?,
            learning_rate: self.require("learning_rate", "")?,
            seed: self.require("seed", "")?,
            alpha: self.parse("alpha")?,
            beta: self.parse("beta")?,
            tau: self.require("tau", "")?,
            smoothing: self.require("smoothing", "")?,
            matched_filter: self.require("matched_filter", "")?,
            scoring: self.require::<Scoring>("scoring", "")?,
        };
        settings.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(settings)
    }

    /// `key = value  # source` for every known key, unset keys marked.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            match self.values.get(*key) {
                Some((v, src)) => out.push_str(&format!("{key} = {v}  # {src}\n")),
                None => out.push_str(&format!("# {key} unset\n")),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_order() {
        let mut file = Layer::default();
        file.set("K", 4);
        file.set("epochs", 7);
        file.set("window", 30);
        let mut flags = Layer::default();
        flags.set("K", 6);
        let r = Resolved::build(&flags, Some(&file), Some(Family::JumpingMean)).unwrap();
        assert_eq!(r.raw("K"), Some("6"));
        assert_eq!(r.raw("epochs"), Some("7"));
        assert_eq!(r.raw("window"), Some("30"));
        assert_eq!(r.raw("delta"), Some("15"));
        assert_eq!(r.raw("batch_size"), Some("64"));
        let s = r.settings().unwrap();
        assert_eq!((s.k, s.epochs, s.window), (6, 7, 30));
    }

    #[test]
    fn setting_b_from_file() {
        let mut file = Layer::default();
        file.set("setting", "b");
        let r = Resolved::build(&Layer::default(), Some(&file), Some(Family::GaussianMixtures)).unwrap();
        let s = r.settings().unwrap();
        assert_eq!((s.td.hidden, s.td.shared, s.fd.hidden), (3, 2, 1));
        assert!(r.explain().contains("h_td = 3  # preset"));
    }

    #[test]
    fn user_data_needs_window() {
        let r = Resolved::build(&Layer::default(), None, None).unwrap();
        assert!(matches!(r.settings(), Err(CliError::Usage(_))));
        assert!(r.delta().is_err());
    }

    #[test]
    fn config_file_paths_are_relative_to_it() {
        let dir = std::env::temp_dir().join(format!("tire-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "# comment\nwindow = 12\nout = results\nsmoothing = false\n").unwrap();
        let layer = Layer::parse_file(&path).unwrap();
        assert_eq!(layer.get("out"), Some(dir.join("results").display().to_string().as_str()));
        assert_eq!(layer.get("window"), Some("12"));
        fs::write(&path, "bogus = 1\n").unwrap();
        assert!(Layer::parse_file(&path).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }
}
