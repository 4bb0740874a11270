//! Optional TOML run configuration. Command-line flags override file values,
//! which override built-in defaults.

use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Backend URL, or `stub` for the in-process stub.
    pub backend: Option<String>,
    pub wordnet: Option<PathBuf>,
    /// Lexicon for the stub backend (`form<TAB>tag` lines).
    pub lexicon: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub budgets: Option<Vec<usize>>,
    pub select: Option<Vec<String>>,
    pub replace: Option<Vec<String>>,
    pub mlm_top_k: Option<usize>,
    pub overshoot: Option<usize>,
    pub jobs: Option<usize>,
    pub batch_size: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: FileConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.wordnet, &mut config.lexicon].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

/// Flag value, else file value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
