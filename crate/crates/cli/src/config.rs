use std::path::Path;

use edgeband_core::dirac_point::DEFAULT_TOL;
use edgeband_core::edge::EdgeOptions;
use edgeband_core::potential::PotentialSpec;
use serde::{Deserialize, Serialize};

/// Everything a run depends on. Every field has a default, and the resolved
/// form written next to the outputs spells all of them out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    /// Plane-wave cutoff: Fourier indices `|m| <= m_max`.
    pub m_max: usize,
    pub k_samples: usize,
    pub bands: usize,
    /// Dirac point index for single-point commands.
    pub n: usize,
    /// Dirac points tracked by `bifurcation`.
    pub points: Vec<usize>,
    pub delta_list: Vec<f64>,
    pub tolerances: Tolerances,
    pub zero_mode: ZeroModeGrid,
    pub grid: EdgeGrid,
    pub output_dir: Option<String>,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative degeneracy tolerance for Dirac point certification.
    pub degeneracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroModeGrid {
    /// Half-width of the envelope grid; derived from the decay rate when absent.
    pub x_max: Option<f64>,
    pub intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeGrid {
    pub half_length: Option<f64>,
    pub h: f64,
    pub levels: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: serde_json::from_str("{}").expect("empty potential spec"),
            m_max: 24,
            k_samples: 129,
            bands: 6,
            n: 0,
            points: vec![0, 1, 2],
            delta_list: vec![0.5, 1.0, 2.0, 5.0],
            tolerances: Tolerances::default(),
            zero_mode: ZeroModeGrid::default(),
            grid: EdgeGrid::default(),
            output_dir: None,
            plots: false,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { degeneracy: DEFAULT_TOL }
    }
}

impl Default for ZeroModeGrid {
    fn default() -> Self {
        ZeroModeGrid { x_max: None, intervals: 8192 }
    }
}

impl Default for EdgeGrid {
    fn default() -> Self {
        let d = EdgeOptions::default();
        EdgeGrid { half_length: d.half_length, h: d.h, levels: d.levels }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.k_samples < 3 {
            return Err("k_samples must be at least 3".into());
        }
        if self.bands == 0 {
            return Err("bands must be positive".into());
        }
        if self.points.is_empty() {
            return Err("points must not be empty".into());
        }
        if self.delta_list.is_empty() || self.delta_list.iter().any(|d| !(*d > 0.0)) {
            return Err("delta_list must hold positive values".into());
        }
        if !(self.tolerances.degeneracy > 0.0) {
            return Err("tolerances.degeneracy must be positive".into());
        }
        Ok(())
    }

    pub fn edge_options(&self) -> EdgeOptions {
        EdgeOptions {
            half_length: self.grid.half_length,
            h: self.grid.h,
            levels: self.grid.levels,
            m_max: self.m_max,
            k_samples: self.k_samples,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
