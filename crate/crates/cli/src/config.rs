//! Optional TOML configuration. Flags override every key.

use std::path::{Path, PathBuf};

use folmt_harness::parse::ParseMode;
use folmt_harness::prompt::PromptStrategy;
use folmt_harness::sut::SutConfig;
use folmt_harness::LabelPolicy;
use folmt_core::rewrite::Category;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub dataset: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub sample: Option<PathBuf>,
    pub run_log: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub strategy: Option<PromptStrategy>,
    pub max_domain: Option<usize>,
    pub parse_mode: Option<ParseMode>,
    /// Name of the system that audits reported violations.
    pub auditor: Option<String>,
    /// Name of the system used for model-based translation in `generate`.
    pub translator: Option<String>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub suts: Vec<SutConfig>,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<CliConfig, CliError> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let cfg: CliConfig = toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let mut names: Vec<&str> = cfg.suts.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::usage(format!("{}: duplicate SUT name `{}`", path.display(), w[0])));
        }
        Ok(cfg)
    }

    /// The seed from the flag or the file; commands that need one fail without it.
    pub fn require_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        flag.or(self.seed)
            .ok_or_else(|| CliError::usage("missing `seed`: pass --seed or set `seed` in the config"))
    }

    pub fn sut(&self, name: &str) -> Result<SutConfig, CliError> {
        if let Some(c) = self.suts.iter().find(|s| s.name == name) {
            return Ok(c.clone());
        }
        builtin_sut(name).ok_or_else(|| {
            let mut known: Vec<String> = self.suts.iter().map(|s| s.name.clone()).collect();
            known.extend(BUILTIN.iter().map(|s| s.to_string()));
            CliError::usage(format!("unknown SUT `{name}` (known: {})", known.join(", ")))
        })
    }
}

const BUILTIN: [&str; 4] = ["mock-gold", "mock-flip-c", "mock-hashed", "mock-auditor"];

/// Scripted systems available without a config file.
fn builtin_sut(name: &str) -> Option<SutConfig> {
    let policy = match name {
        "mock-gold" | "mock-auditor" => LabelPolicy::Gold,
        "mock-flip-c" => LabelPolicy::FlipFollowUps {
            categories: vec![Category::C],
        },
        "mock-hashed" => LabelPolicy::Hashed { seed: 0 },
        _ => return None,
    };
    Some(SutConfig::mock(name, policy))
}
