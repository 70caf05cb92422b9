//! Run configuration: parameter set plus per-command options, loaded from JSON.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use wandlab_core::params::ParameterSet;
use wandlab_core::render::RasterJob;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderOptions {
    /// [re_min, re_max, im_min, im_max]
    #[serde(default = "default_window")]
    pub window: [f64; 4],
    #[serde(default = "default_side")]
    pub width: u32,
    #[serde(default = "default_side")]
    pub height: u32,
    #[serde(default = "default_steps")]
    pub max_steps: u32,
    #[serde(default = "default_escape")]
    pub escape_level: u32,
    #[serde(default)]
    pub overlay_graph: bool,
}

fn default_window() -> [f64; 4] {
    [0.0, 4.0, -2.0, 2.0]
}
fn default_side() -> u32 {
    400
}
fn default_steps() -> u32 {
    64
}
fn default_escape() -> u32 {
    wandlab_core::render::DEFAULT_ESCAPE_LEVEL
}

impl Default for RenderOptions {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

impl RenderOptions {
    pub fn job(&self) -> RasterJob {
        let w = self.window;
        let mut j = RasterJob::new((w[0], w[1]), (w[2], w[3]), self.width, self.height);
        j.max_steps = self.max_steps;
        j.escape_level = self.escape_level;
        j.overlay_graph = self.overlay_graph;
        j
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThinOptions {
    #[serde(default = "default_r0")]
    pub r0: f64,
    /// Sample centers; the built-in comparison centers when absent.
    #[serde(default)]
    pub centers: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_strong")]
    pub strong_lambda_over_pi: u64,
}

fn default_r0() -> f64 {
    wandlab_core::graph::thin::DEFAULT_R0
}
fn default_strong() -> u64 {
    10
}

impl Default for ThinOptions {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

impl ThinOptions {
    pub fn centers(&self) -> Option<Vec<Complex64>> {
        self.centers.as_ref().map(|c| c.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    params: Option<Value>,
    #[serde(default)]
    n_disks: Option<u64>,
    #[serde(default)]
    n: Option<u64>,
    #[serde(default)]
    render: Option<RenderOptions>,
    #[serde(default)]
    thin: Option<ThinOptions>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ParameterSet,
    pub n_disks: u64,
    pub n: Option<u64>,
    pub render: RenderOptions,
    pub thin: ThinOptions,
    pub source: String,
}

pub const DEFAULT_N_DISKS: u64 = 10;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParameterSet::new(4),
            n_disks: DEFAULT_N_DISKS,
            n: None,
            render: RenderOptions::default(),
            thin: ThinOptions::default(),
            source: "<defaults>".into(),
        }
    }
}

impl RunConfig {
    /// A config file, or a bare parameter-set file (one with `lambda_over_pi`
    /// at the top level). Relative parameter paths resolve against the file.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = RunConfig { source: path.display().to_string(), ..RunConfig::default() };
        if v.get("lambda_over_pi").is_some() {
            cfg.params = ParameterSet::from_json(&text).map_err(|e| e.to_string())?;
            return Ok(cfg);
        }
        let raw: RawConfig = serde_json::from_value(v).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.params = match raw.params {
            None => ParameterSet::new(4),
            Some(Value::String(p)) => {
                let full = path.parent().unwrap_or(Path::new(".")).join(p);
                let t = std::fs::read_to_string(&full).map_err(|e| format!("{}: {e}", full.display()))?;
                ParameterSet::from_json(&t).map_err(|e| e.to_string())?
            }
            Some(obj) => ParameterSet::from_json(&obj.to_string()).map_err(|e| e.to_string())?,
        };
        cfg.n_disks = raw.n_disks.unwrap_or(DEFAULT_N_DISKS);
        cfg.n = raw.n;
        cfg.render = raw.render.unwrap_or_default();
        cfg.thin = raw.thin.unwrap_or_default();
        if cfg.n_disks == 0 {
            return Err("n_disks must be at least 1".into());
        }
        Ok(cfg)
    }

    pub fn resolved(&self) -> Value {
        serde_json::json!({
            "params": self.params.to_json_value(),
            "n_disks": self.n_disks,
            "n": self.n,
            "render": self.render,
            "thin": self.thin,
        })
    }

    /// SHA-256 of the resolved configuration (sorted keys).
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&self.resolved()).expect("config serializes");
        format!("{:x}", Sha256::digest(s.as_bytes()))
    }
}
