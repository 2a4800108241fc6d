use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use harmonize_search::SearchConfig;
use serde::Deserialize;
use thiserror::Error;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "PORTAL_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("no config file: pass one or set {CONFIG_ENV}")]
    Missing,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Corpus loaded at startup. Until it is indexed, data endpoints answer 503.
    pub corpus: Option<PathBuf>,
    /// Coverage TSV served with the startup corpus.
    pub report: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    /// Enables `POST /v1/admin/reload`.
    pub admin: bool,
    pub cors_origin: Option<String>,
    pub search: SearchConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            corpus: None,
            report: None,
            registry: None,
            admin: false,
            cors_origin: None,
            search: SearchConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Relative paths in the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<ServiceConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut config: ServiceConfig =
            toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.corpus, &mut config.report, &mut config.registry].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    /// `explicit` if given, else the file named by `PORTAL_CONFIG`.
    pub fn resolve(explicit: Option<&Path>) -> Result<ServiceConfig, ConfigError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Self::load(Path::new(&p)),
                None => Err(ConfigError::Missing),
            },
        }
    }
}
