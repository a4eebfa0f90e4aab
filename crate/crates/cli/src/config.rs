//! Run configuration, read from one JSON file.

use std::path::{Path, PathBuf};

use mav_core::market_data::{Format, QuoteToken};
use mav_core::misalignment::ThresholdMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_fee_bps() -> f64 {
    8.0
}

fn default_k_range() -> [usize; 2] {
    [2, 10]
}

fn default_restarts() -> usize {
    16
}

fn default_threshold() -> ThresholdMode {
    ThresholdMode::Iqr
}

/// Paths are relative to the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pool_file: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_format: Option<Format>,
    pub cex_file: PathBuf,
    #[serde(default)]
    pub quote_token: QuoteToken,
    #[serde(default = "default_fee_bps")]
    pub fee_bps: f64,
    #[serde(default = "default_threshold")]
    pub threshold: ThresholdMode,
    /// Trailing window, in minutes, for a rolling IQR threshold. Off when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rolling_window: Option<usize>,
    #[serde(default = "default_k_range")]
    pub k_range: [usize; 2],
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A validated config with its location and raw bytes (for the manifest).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub raw: Vec<u8>,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_slice(&raw)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            config,
            base_dir,
            raw,
        })
    }

    pub fn pool_path(&self) -> PathBuf {
        self.base_dir.join(&self.config.pool_file)
    }

    pub fn cex_path(&self) -> PathBuf {
        self.base_dir.join(&self.config.cex_file)
    }

    pub fn pool_format(&self) -> Format {
        self.config
            .pool_format
            .unwrap_or_else(|| Format::from_path(&self.config.pool_file))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.pool_file.as_os_str().is_empty() || self.cex_file.as_os_str().is_empty() {
            return bad("pool_file and cex_file must be nonempty".into());
        }
        if !(self.fee_bps.is_finite() && self.fee_bps >= 0.0) {
            return bad(format!(
                "fee_bps must be non-negative, got {}",
                self.fee_bps
            ));
        }
        if let ThresholdMode::Fixed(t) = self.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("fixed threshold must be non-negative, got {t}"));
            }
        }
        if let Some(w) = self.rolling_window {
            if w < 4 {
                return bad(format!(
                    "rolling_window must be at least 4 minutes, got {w}"
                ));
            }
        }
        let [lo, hi] = self.k_range;
        if lo < 1 || hi < lo + 2 {
            return bad(format!(
                "k_range [{lo}, {hi}] must start at 1 or more and span at least 3 values"
            ));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let c: RunConfig =
            serde_json::from_str(r#"{"pool_file":"s.csv","cex_file":"b.csv"}"#).unwrap();
        assert_eq!(c.fee_bps, 8.0);
        assert_eq!(c.k_range, [2, 10]);
        assert_eq!(c.restarts, 16);
        assert_eq!(c.threshold, ThresholdMode::Iqr);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn threshold_forms() {
        let c: RunConfig = serde_json::from_str(
            r#"{"pool_file":"s.csv","cex_file":"b.csv","threshold":{"mode":"fixed","value":2.5},"rolling_window":60}"#,
        )
        .unwrap();
        assert_eq!(c.threshold, ThresholdMode::Fixed(2.5));
        assert_eq!(c.rolling_window, Some(60));
    }

    #[test]
    fn rejects_bad_values() {
        for body in [
            r#"{"pool_file":"s.csv","cex_file":"b.csv","fee_bps":-1}"#,
            r#"{"pool_file":"","cex_file":"b.csv"}"#,
            r#"{"pool_file":"s.csv","cex_file":"b.csv","k_range":[2,3]}"#,
            r#"{"pool_file":"s.csv","cex_file":"b.csv","restarts":0}"#,
        ] {
            let c: RunConfig = serde_json::from_str(body).unwrap();
            assert!(c.validate().is_err(), "{body}");
        }
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"pool_file":"s","cex_file":"b","colour":1}"#
        )
        .is_err());
    }
}
