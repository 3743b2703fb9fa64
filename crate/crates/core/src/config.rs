//! TOML run configuration shared by the command-line tools.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdv_oracle::SolverConfig;
use crate::potentials::{Family, PotentialSpec, Well};
use crate::scattering::ScatterGrids;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `sharp-step`, `tanh-step`, `tanh-step-plus-wells` or `tabulated`.
    pub family: String,
    pub c: f64,
    #[serde(default = "default_m0")]
    pub m0: u32,
    #[serde(default = "default_n0")]
    pub n0: u32,
    #[serde(default = "default_steepness")]
    pub steepness: f64,
    #[serde(default)]
    pub wells: Vec<Well>,
    /// Two-column `x, q` CSV, relative to the config file.
    #[serde(default)]
    pub table: Option<PathBuf>,
}

fn default_m0() -> u32 {
    4
}
fn default_n0() -> u32 {
    7
}
fn default_steepness() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterSection {
    pub dk: f64,
    pub k_max: f64,
    pub chi_points: usize,
    pub chi_log_points: usize,
}

impl Default for ScatterSection {
    fn default() -> Self {
        let g = ScatterGrids::default();
        Self {
            dk: g.dk,
            k_max: g.k_max,
            chi_points: g.chi_points,
            chi_log_points: g.chi_log_points,
        }
    }
}

impl ScatterSection {
    pub fn grids(&self) -> ScatterGrids {
        ScatterGrids {
            dk: self.dk,
            k_max: self.k_max,
            chi_points: self.chi_points,
            chi_log_points: self.chi_log_points,
        }
    }
}

/// Evaluation grid for `q^sol` when no oracle grid is configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteSection {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
}

fn default_times() -> Vec<f64> {
    vec![5.0, 10.0, 20.0, 40.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    #[serde(default)]
    pub beta: f64,
    /// Defaults to a quarter of the smallest velocity gap.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_t0")]
    pub t0: f64,
}

fn default_t0() -> f64 {
    5.0
}

impl Default for RegionSection {
    fn default() -> Self {
        Self {
            beta: 0.0,
            eps: None,
            t0: default_t0(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhpSection {
    #[serde(default)]
    pub j: usize,
    /// Pole of the rational approximants; defaults to `(c + κ_1)/2`.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_probe_x")]
    pub probe_x: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_probe_x() -> Vec<f64> {
    vec![-2.0, 0.0, 3.0]
}
fn default_seed() -> u64 {
    20240611
}

impl Default for RhpSection {
    fn default() -> Self {
        Self {
            j: 0,
            tau: None,
            times: default_times(),
            probe_x: default_probe_x(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub scatter: ScatterSection,
    #[serde(default)]
    pub region: RegionSection,
    #[serde(default)]
    pub asymptote: Option<AsymptoteSection>,
    #[serde(default)]
    pub oracle: Option<SolverConfig>,
    #[serde(default)]
    pub rhp: RhpSection,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base = base.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        let p = &self.potential;
        let family = match p.family.as_str() {
            "sharp-step" => Family::SharpStep,
            "tanh-step" => Family::TanhStep { steepness: p.steepness },
            "tanh-step-plus-wells" => Family::TanhStepPlusWells {
                steepness: p.steepness,
                wells: p.wells.clone(),
            },
            "tabulated" => {
                let table = p
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated family needs `table`".into()))?;
                return PotentialSpec::tabulated_from_csv(&self.base.join(table), p.c, p.m0, p.n0);
            }
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        PotentialSpec::new(family, p.c, p.m0, p.n0)
    }
}
