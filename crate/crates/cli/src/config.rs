//! Tool configuration: defaults, then a JSON file, then `TECHLEV_*`
//! environment variables, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use techlev::chains::BranchKey;
use techlev::loc::{DepSizeMode, LanguageProfile};
use techlev::metrics::{SizeClass, DEFAULT_SIZE_THRESHOLD};
use techlev::stats::{KdeOptions, DEFAULT_GRID_POINTS};

use crate::error::{CliError, Result};

pub const ENV_PREFIX: &str = "TECHLEV_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaThresholds {
    pub small: f64,
    pub large: f64,
}

impl Default for LambdaThresholds {
    fn default() -> Self {
        // Four for small libraries; the same absolute dependency size is
        // 12.5% for a library eight times larger.
        Self { small: 4.0, large: 0.125 }
    }
}

impl LambdaThresholds {
    pub fn for_class(&self, class: SizeClass) -> f64 {
        match class {
            SizeClass::SmallMedium => self.small,
            SizeClass::Large => self.large,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdeConfig {
    pub bandwidth: Option<f64>,
    pub grid_points: usize,
    pub circular: bool,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self { bandwidth: None, grid_points: DEFAULT_GRID_POINTS, circular: false }
    }
}

impl KdeConfig {
    pub fn options(&self) -> KdeOptions {
        KdeOptions { bandwidth: self.bandwidth, grid_points: self.grid_points, circular: self.circular }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub manifest_path: Option<PathBuf>,
    pub vuln_db_path: Option<PathBuf>,
    pub language_profile: LanguageProfile,
    pub loc_filter_min: u64,
    pub size_class_threshold: u64,
    pub lambda_thresholds: LambdaThresholds,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub remote_repo_url: Option<String>,
    pub dep_mode: DepSizeMode,
    pub branch_key: BranchKey,
    pub kde: KdeConfig,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            manifest_path: None,
            vuln_db_path: None,
            language_profile: LanguageProfile::java(),
            loc_filter_min: 100,
            size_class_threshold: DEFAULT_SIZE_THRESHOLD,
            lambda_thresholds: LambdaThresholds::default(),
            output_dir: PathBuf::from("techlev-out"),
            cache_dir: PathBuf::from(".techlev-cache"),
            remote_repo_url: None,
            dep_mode: DepSizeMode::Direct,
            branch_key: BranchKey::FirstToken,
            kde: KdeConfig::default(),
        }
    }
}

fn parse_env<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("{ENV_PREFIX}{key}={value:?}: {e}")))
}

fn parse_enum<T: serde::de::DeserializeOwned>(key: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|e| CliError::Config(format!("{ENV_PREFIX}{key}={value:?}: {e}")))
}

impl ToolConfig {
    /// Reads the optional file, then applies the `TECHLEV_*` entries of
    /// `env`. Relative paths in the file are taken from its directory.
    pub fn load(path: Option<&Path>, env: &BTreeMap<String, String>) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        config.apply_env(env)?;
        config.validate()?;
        Ok(config)
    }

    fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: ToolConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.manifest_path.as_mut().map(rebase);
        config.vuln_db_path.as_mut().map(rebase);
        rebase(&mut config.output_dir);
        rebase(&mut config.cache_dir);
        Ok(config)
    }

    pub fn apply_env(&mut self, env: &BTreeMap<String, String>) -> Result<()> {
        for (name, value) in env {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            match key {
                "MANIFEST_PATH" => self.manifest_path = Some(value.into()),
                "VULN_DB_PATH" => self.vuln_db_path = Some(value.into()),
                "LOC_FILTER_MIN" => self.loc_filter_min = parse_env(key, value)?,
                "SIZE_CLASS_THRESHOLD" => self.size_class_threshold = parse_env(key, value)?,
                "LAMBDA_SMALL" => self.lambda_thresholds.small = parse_env(key, value)?,
                "LAMBDA_LARGE" => self.lambda_thresholds.large = parse_env(key, value)?,
                "OUTPUT_DIR" => self.output_dir = value.into(),
                "CACHE_DIR" => self.cache_dir = value.into(),
                "REMOTE_REPO_URL" => self.remote_repo_url = Some(value.clone()),
                "DEP_MODE" => self.dep_mode = parse_enum(key, value)?,
                "BRANCH_KEY" => self.branch_key = parse_enum(key, value)?,
                "KDE_BANDWIDTH" => self.kde.bandwidth = Some(parse_env(key, value)?),
                "KDE_GRID_POINTS" => self.kde.grid_points = parse_env(key, value)?,
                "KDE_CIRCULAR" => self.kde.circular = parse_env(key, value)?,
                // Logging is configured separately.
                "LOG" => {}
                other => log::warn!("ignoring unknown setting {ENV_PREFIX}{other}"),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for (name, v) in [("small", self.lambda_thresholds.small), ("large", self.lambda_thresholds.large)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("lambda threshold `{name}` must be positive, got {v}"));
            }
        }
        if self.size_class_threshold == 0 {
            return bad("size_class_threshold must be positive".into());
        }
        if self.kde.grid_points < 2 {
            return bad("kde.grid_points must be at least 2".into());
        }
        if let Some(h) = self.kde.bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("kde.bandwidth must be positive, got {h}"));
            }
        }
        self.language_profile
            .validate()
            .map_err(|e| CliError::Config(format!("language_profile: {e}")))
    }

    /// Input files needed by `measure`.
    pub fn require_inputs(&self) -> Result<&Path> {
        let manifest = self
            .manifest_path
            .as_deref()
            .ok_or_else(|| CliError::Config("manifest_path is not set".into()))?;
        if !manifest.is_file() {
            return Err(CliError::Config(format!("manifest not found: {}", manifest.display())));
        }
        if let Some(db) = &self.vuln_db_path {
            if !db.is_file() {
                return Err(CliError::Config(format!("vulnerability database not found: {}", db.display())));
            }
        }
        Ok(manifest)
    }
}
