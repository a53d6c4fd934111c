//! Session configuration: a TOML file (path from `--config` or
//! `COLORGNS_CONFIG`) overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use colorgns::enveloping::DEFAULT_LEVEL_CAP;
use colorgns::grading::MAX_RANK;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_ENV: &str = "COLORGNS_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[default]
    Text,
}

/// Contents of a config file. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub rank: Option<u8>,
    pub tol: Option<f64>,
    /// Per-command tolerance overrides, keyed by subcommand name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub level_cap: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }
}

/// Flag values; `None` defers to the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub rank: Option<u8>,
    pub tol: Option<f64>,
    pub level_cap: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub skip_validate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionConfig {
    pub rank: Option<u8>,
    /// Flag-level tolerance; beats everything else.
    pub tol: Option<f64>,
    pub file_tol: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub level_cap: usize,
    pub seed: u64,
    pub format: Format,
    pub skip_validate: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            rank: None,
            tol: None,
            file_tol: None,
            tolerances: BTreeMap::new(),
            level_cap: DEFAULT_LEVEL_CAP,
            seed: 0,
            format: Format::Text,
            skip_validate: false,
        }
    }
}

impl SessionConfig {
    pub fn resolve(file: ConfigFile, flags: &Overrides) -> Result<Self, CliError> {
        let cfg = SessionConfig {
            rank: flags.rank.or(file.rank),
            tol: flags.tol,
            file_tol: file.tol,
            tolerances: file.tolerances,
            level_cap: flags.level_cap.or(file.level_cap).unwrap_or(DEFAULT_LEVEL_CAP),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            format: flags.format.or(file.format).unwrap_or_default(),
            skip_validate: flags.skip_validate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(n) = self.rank {
            if n == 0 || n > MAX_RANK {
                return Err(CliError::Input(format!("rank n = {n} out of range 1..={MAX_RANK}")));
            }
        }
        let tols = self.tol.iter().chain(&self.file_tol).chain(self.tolerances.values());
        for &t in tols {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Input(format!("tolerance {t} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Flag, then the per-command entry, then the file-wide value, then the
    /// command's default.
    pub fn tol_for(&self, command: &str, default: f64) -> f64 {
        self.tol
            .or_else(|| self.tolerances.get(command).copied())
            .or(self.file_tol)
            .unwrap_or(default)
    }

    pub fn require_rank(&self) -> Result<u8, CliError> {
        self.rank
            .ok_or_else(|| CliError::Input("rank n is not set (pass --n or set rank in the config file)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigFile = toml::from_str("rank = 2\ntol = 1e-7\nseed = 5\n[tolerances]\ncheck-rep = 1e-5\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = SessionConfig::resolve(file.clone(), &flags).unwrap();
        assert_eq!(cfg.rank, Some(2));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.tol_for("check-rep", 1.0), 1e-5);
        assert_eq!(cfg.tol_for("check-pd", 1.0), 1e-7);
        let cfg = SessionConfig::resolve(
            file,
            &Overrides {
                tol: Some(1e-3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.tol_for("check-rep", 1.0), 1e-3);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |s: &str| SessionConfig::resolve(toml::from_str(s).unwrap(), &Overrides::default());
        assert!(bad("rank = 0").is_err());
        assert!(bad("tol = -1.0").is_err());
        assert!(bad("[tolerances]\ncheck-pd = 0.0").is_err());
        assert!(toml::from_str::<ConfigFile>("colour = 1").is_err());
    }
}
