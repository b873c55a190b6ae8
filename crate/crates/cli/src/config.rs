//! Fully resolved run description. Every artifact is a function of a
//! [`RunConfig`] alone, so the echoed config replays a run exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use classicality_core::criteria::{Criterion, Model, Scheme, SchemeGrid, SchemeShape, SieveFamily};
use classicality_core::numerics::GridSpec;

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSet {
    Single(SchemeShape),
    #[serde(rename = "sweep")]
    Grid {
        grid: SchemeGrid,
        refine_levels: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    Sieve { model: Model, family: SieveFamily, grid: GridSpec, times: Vec<f64>, drift_tol: f64 },
    Criterion { model: Model, criterion: Criterion, schemes: SchemeSet },
    Stationary { model: Model, scheme: Scheme },
    Overlap { model: Model, a: Scheme, b: Scheme },
    Tables { temperatures: Vec<f64>, phis: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    pub task: Task,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn new(task: Task, out: PathBuf, format: Option<Format>) -> RunConfig {
        let format = format.unwrap_or_else(|| Format::from_path(&out));
        RunConfig { version: CONFIG_VERSION, task, out, format }
    }

    /// Where the config echo of this run goes: `<out>.config.json`.
    pub fn echo_path(&self) -> PathBuf {
        let mut p = self.out.clone().into_os_string();
        p.push(".config.json");
        PathBuf::from(p)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is always serialisable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Validation(format!("config version {} (expected {CONFIG_VERSION})", cfg.version)));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Model/scheme consistency and parameter ranges, checked before any work.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::Validation(m));
        match &self.task {
            Task::Sieve { model, family, grid, times, drift_tol } => {
                let expect = match family {
                    SieveFamily::Squeezed => (true, 1),
                    SieveFamily::Qbm(_) => (false, 2),
                };
                if (model.is_oscillator(), grid.axes.len()) != expect {
                    return invalid(format!(
                        "sieve family {family:?} does not fit model {model:?} with {} axes",
                        grid.axes.len()
                    ));
                }
                if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) {
                    return invalid(format!("sieve times {times:?}"));
                }
                if !(*drift_tol >= 0.0) {
                    return invalid(format!("drift tolerance {drift_tol}"));
                }
                GridSpec::new(grid.axes.clone(), grid.refine_levels)?;
            }
            Task::Criterion { model, criterion, schemes } => {
                let osc_set = matches!(
                    schemes,
                    SchemeSet::Single(SchemeShape::Osc { .. }) | SchemeSet::Grid { grid: SchemeGrid::S { .. }, .. }
                );
                if osc_set != model.is_oscillator() {
                    return invalid(format!("schemes {schemes:?} do not fit model {model:?}"));
                }
                if let SchemeSet::Single(shape) = schemes {
                    shape.with_eta(1.0)?;
                }
                if let Criterion::EfficiencyThresholdAsymptotic { .. } = criterion {
                    if model.is_oscillator() {
                        return invalid("the asymptotic threshold is defined for the QBM model only".into());
                    }
                }
                model.horizon()?;
            }
            Task::Stationary { model, scheme } => model.check(scheme)?,
            Task::Overlap { model, a, b } => {
                model.check(a)?;
                model.check(b)?;
            }
            Task::Tables { temperatures, phis } => {
                if temperatures.is_empty() || phis.is_empty() || temperatures.iter().any(|t| !(*t > 0.0)) {
                    return invalid(format!("tables over T = {temperatures:?}, phi = {phis:?}"));
                }
            }
        }
        Ok(())
    }
}
