use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use vdrig::retarget::{Ablation, RetargetConfig};
use vdrig::rig::RigConfig;

/// Contents of a `--config` file. Every section and key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub rig: RigConfig,
    pub retarget: RetargetConfig,
    pub ablation: Ablation,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(p) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(p).with_context(|| format!("config {}", p.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("config {}", p.display()))?;
        cfg.retarget.validate()?;
        Ok(cfg)
    }
}
