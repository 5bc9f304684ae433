use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// JSON run configuration. Every field is optional; command-line flags take
/// precedence over values found here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scdb_cases: Option<PathBuf>,
    pub scdb_votes: Option<PathBuf>,
    pub opinion_dir: Option<PathBuf>,
    pub opinion_manifest: Option<PathBuf>,
    pub corpus_dir: Option<PathBuf>,
    pub court_tag: Option<String>,
    pub bench: Option<Vec<String>>,
    pub registry: Option<PathBuf>,
    pub stub_profile: Option<PathBuf>,
    pub max_attempts: Option<u32>,
    pub temperature: Option<f64>,
    pub max_new_tokens: Option<u32>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Referenced input paths must exist.
    pub fn validate(&self) -> anyhow::Result<()> {
        let inputs = [
            ("scdb_cases", &self.scdb_cases),
            ("scdb_votes", &self.scdb_votes),
            ("opinion_dir", &self.opinion_dir),
            ("opinion_manifest", &self.opinion_manifest),
            ("corpus_dir", &self.corpus_dir),
            ("registry", &self.registry),
            ("stub_profile", &self.stub_profile),
        ];
        for (name, path) in inputs {
            if let Some(p) = path {
                anyhow::ensure!(p.exists(), "config `{name}` path {} does not exist", p.display());
            }
        }
        if let Some(t) = self.temperature {
            anyhow::ensure!(t >= 0.0, "config temperature must be >= 0");
        }
        if let Some(0) = self.max_attempts {
            anyhow::bail!("config max_attempts must be >= 1");
        }
        Ok(())
    }
}
