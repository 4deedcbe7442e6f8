use std::path::{Path, PathBuf};

use activecanvas_core::EngineConfig;

use crate::error::ServiceError;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub port: u16,
    pub data_dir: PathBuf,
    pub engine: EngineConfig,
}

/// Reads an engine config file. `.json` is parsed as JSON, anything else as TOML.
pub fn load_engine_config(path: &Path) -> Result<EngineConfig, ServiceError> {
    let fail = |detail: String| ServiceError::Config {
        path: path.to_path_buf(),
        detail,
    };
    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let config: EngineConfig = if is_json {
        serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?
    } else {
        toml::from_str(&text).map_err(|e| fail(e.to_string()))?
    };
    config.validate().map_err(|e| fail(e.to_string()))?;
    Ok(config)
}
