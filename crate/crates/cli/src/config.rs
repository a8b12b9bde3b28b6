//! Optional TOML defaults. Command-line flags take precedence.

use std::path::Path;

use serde::Deserialize;

pub const VOXEL_SIZE: f64 = 0.01;
pub const N_PTS: usize = 100_000;
pub const N_VOX: usize = 100_000;
pub const N_LOC: usize = 27;
pub const CENTER_K: usize = 18;
pub const NMS_IOU: f64 = 0.5;
pub const LEVELS: usize = 4;
pub const FIRST_STRIDE: u32 = 2;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub voxel_size: Option<f64>,
    pub n_pts: Option<usize>,
    pub n_vox: Option<usize>,
    pub n_loc: Option<usize>,
    pub k: Option<usize>,
    pub nms_iou: Option<f64>,
    pub levels: Option<usize>,
    pub first_stride: Option<u32>,
    pub mode: Option<String>,
    pub thresholds: Option<Vec<f64>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
