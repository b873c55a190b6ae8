//! Command-line flags and their translation into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use classicality_core::criteria::{Criterion, Model, PurityTarget, Scheme, SchemeGrid, SchemeShape, SieveFamily};
use classicality_core::numerics::{Axis, GridSpec};
use classicality_core::qbm::SieveScale;

use crate::config::{Format, RunConfig, SchemeSet, Task};
use crate::parse;
use crate::run::qbm_scheme;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "classicality", version, about = "Classicality criteria for continuously monitored Gaussian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unconditional purity over a family of initial pure states.
    Sieve(SieveArgs),
    /// Time for conditional evolution from a hot start to reach a purity.
    PurificationTime(PurificationArgs),
    /// Minimal detector efficiency for a target purity.
    EfficiencyThreshold(ThresholdArgs),
    /// Time for purity to fall once monitoring stops.
    PurityLoss(LossArgs),
    /// Conditional stationary state and its moments.
    Stationary(StationaryArgs),
    /// Overlap between the stationary states of two homodyne angles.
    Overlap(OverlapArgs),
    /// Stationary-state tables over temperatures and angles.
    Tables(TablesArgs),
    /// Re-run from an emitted config file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Oscillator at zero temperature.
    Osc0,
    /// Oscillator at Bose occupation `--n`.
    Osc,
    /// High-temperature quantum Brownian motion at `--T`.
    Qbm,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Bose occupation (oscillator).
    #[arg(long, value_parser = parse::number, allow_hyphen_values = true)]
    pub n: Option<f64>,
    /// Temperature (QBM).
    #[arg(long = "T", value_parser = parse::number, allow_hyphen_values = true)]
    pub temperature: Option<f64>,
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<Model, CliError> {
        let bad = |m: &str| Err(CliError::Validation(m.into()));
        match (self.model, self.n, self.temperature) {
            (_, Some(_), Some(_)) => bad("--n and --T are exclusive"),
            (ModelKind::Osc0, None, None) => Ok(Model::OscillatorT0),
            (ModelKind::Osc0, _, _) => bad("osc0 takes neither --n nor --T"),
            (ModelKind::Osc, Some(n), None) => Ok(Model::OscillatorFiniteT { n }),
            (ModelKind::Osc, _, _) => bad("osc needs --n"),
            (ModelKind::Qbm, None, Some(t)) => Ok(Model::QbmHighT { temperature: t }),
            (ModelKind::Qbm, _, _) => bad("qbm needs --T"),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Data file; `.json` selects JSON unless `--format` says otherwise.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl OutArgs {
    fn config(&self, task: Task) -> RunConfig {
        let format = self.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
        RunConfig::new(task, self.out.clone(), format)
    }
}

/// Scheme selection: a single scheme or a grid over `s` (oscillator) or
/// `r`, `φ` (QBM).
#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, value_parser = parse::number)]
    pub s: Option<f64>,
    /// `lo:hi:count`.
    #[arg(long, value_parser = parse::range)]
    pub s_grid: Option<Axis>,
    #[arg(long, value_parser = parse::number)]
    pub r: Option<f64>,
    #[arg(long, value_parser = parse::range)]
    pub r_grid: Option<Axis>,
    /// Radians, or `1.35p2` for units of π/2, or `0.5pi`.
    #[arg(long, value_parser = parse::angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, value_parser = parse::angle_range, allow_hyphen_values = true)]
    pub phi_grid: Option<Axis>,
    /// Zoom-in passes around the grid optimum.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
}

impl SchemeArgs {
    pub fn resolve(&self, model: &Model) -> Result<SchemeSet, CliError> {
        let bad = |m: &str| Err(CliError::Validation(m.into()));
        let refine_levels = self.refine;
        if model.is_oscillator() {
            if self.r.is_some() || self.r_grid.is_some() || self.phi.is_some() || self.phi_grid.is_some() {
                return bad("oscillator schemes take --s or --s-grid only");
            }
            match (self.s, self.s_grid) {
                (Some(s), None) => Ok(SchemeSet::Single(SchemeShape::Osc { s })),
                (None, Some(s)) => Ok(SchemeSet::Grid { grid: SchemeGrid::S { s }, refine_levels }),
                _ => bad("give exactly one of --s, --s-grid"),
            }
        } else {
            if self.s.is_some() || self.s_grid.is_some() {
                return bad("QBM schemes take --r/--r-grid and --phi/--phi-grid");
            }
            match (self.r, self.r_grid, self.phi, self.phi_grid) {
                (_, Some(_), _, _) if self.r.is_some() => bad("--r and --r-grid are exclusive"),
                (_, _, Some(_), Some(_)) => bad("--phi and --phi-grid are exclusive"),
                (r, None, Some(phi), None) => Ok(SchemeSet::Single(SchemeShape::Qbm { r: r.unwrap_or(1.0), phi })),
                (r, None, None, Some(phi)) => {
                    Ok(SchemeSet::Grid { grid: SchemeGrid::Phi { r: r.unwrap_or(1.0), phi }, refine_levels })
                }
                (None, Some(r), None, Some(phi)) => {
                    Ok(SchemeSet::Grid { grid: SchemeGrid::RPhi { r, phi }, refine_levels })
                }
                _ => bad("give --phi or --phi-grid (with --r-grid only together with --phi-grid)"),
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Squeezing grid `lo:hi:count` (oscillator).
    #[arg(long, value_parser = parse::range, allow_hyphen_values = true)]
    pub xi: Option<Axis>,
    /// `A` grid (QBM).
    #[arg(long = "A", value_parser = parse::range)]
    pub a: Option<Axis>,
    /// `C` grid (QBM).
    #[arg(long = "C", value_parser = parse::range, allow_hyphen_values = true)]
    pub c: Option<Axis>,
    /// Scale of `A` (QBM).
    #[arg(long, value_enum, default_value = "four-t")]
    pub scale: ScaleArg,
    /// Comma-separated evaluation times.
    #[arg(long, value_parser = parse::list, required = true)]
    pub t: Vec<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    /// Largest tolerated shift of the optimum between times.
    #[arg(long, default_value_t = 0.05)]
    pub drift_tol: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    FourT,
    SqrtFourT,
}

#[derive(Debug, Args)]
pub struct PurificationArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Purity level, or `half` for half way to the asymptote.
    #[arg(long, default_value = "0.5")]
    pub target: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["fixed_time", "asymptotic"]))]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 0.5)]
    pub p_thr: f64,
    /// Purity must be reached at this time.
    #[arg(long, value_parser = parse::number)]
    pub fixed_time: Option<f64>,
    /// Purity must be reached by the stationary state.
    #[arg(long)]
    pub asymptotic: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub target: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_parser = parse::number)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, value_parser = parse::angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[arg(long = "T", value_parser = parse::number, allow_hyphen_values = true)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, value_parser = parse::angle, default_value = "0", allow_hyphen_values = true)]
    pub phi_a: f64,
    #[arg(long, value_parser = parse::angle, default_value = "1.35p2", allow_hyphen_values = true)]
    pub phi_b: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long = "T-list", value_parser = parse::list, default_value = "1e6,1e4,1e2,1")]
    pub temperatures: Vec<Vec<f64>>,
    #[arg(long, value_parser = parse::angle_list, default_value = "0,1.35p2")]
    pub phi_list: Vec<Vec<f64>>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write the data somewhere else than the recorded path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn flatten(v: &[Vec<f64>]) -> Vec<f64> {
    v.iter().flatten().copied().collect()
}

impl Command {
    /// Resolves the flags into a validated config.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let cfg = match self {
            Command::Sieve(a) => {
                let model = a.model.resolve()?;
                let (family, axes) = match (model.is_oscillator(), a.xi, a.a, a.c) {
                    (true, Some(xi), None, None) => (SieveFamily::Squeezed, vec![xi]),
                    (false, None, Some(aa), Some(cc)) => {
                        let scale = match a.scale {
                            ScaleArg::FourT => SieveScale::FourT,
                            ScaleArg::SqrtFourT => SieveScale::SqrtFourT,
                        };
                        (SieveFamily::Qbm(scale), vec![aa, cc])
                    }
                    (true, ..) => return Err(CliError::Validation("oscillator sieve needs --xi only".into())),
                    (false, ..) => return Err(CliError::Validation("QBM sieve needs --A and --C".into())),
                };
                let grid = GridSpec::new(axes, a.refine)?;
                let times = flatten(&a.t);
                a.out.config(Task::Sieve { model, family, grid, times, drift_tol: a.drift_tol })
            }
            Command::PurificationTime(a) => {
                let model = a.model.resolve()?;
                let target = match a.target.trim() {
                    "half" => PurityTarget::HalfWay,
                    t => PurityTarget::Level(parse::number(t).map_err(CliError::Validation)?),
                };
                let schemes = a.scheme.resolve(&model)?;
                a.out.config(Task::Criterion {
                    model,
                    criterion: Criterion::PurificationTime { eta: a.eta, target },
                    schemes,
                })
            }
            Command::EfficiencyThreshold(a) => {
                let model = a.model.resolve()?;
                let criterion = match a.fixed_time {
                    Some(t_thr) => Criterion::EfficiencyThresholdFixedTime { p_thr: a.p_thr, t_thr },
                    None => Criterion::EfficiencyThresholdAsymptotic { p_thr: a.p_thr },
                };
                let schemes = a.scheme.resolve(&model)?;
                a.out.config(Task::Criterion { model, criterion, schemes })
            }
            Command::PurityLoss(a) => {
                let model = a.model.resolve()?;
                let schemes = a.scheme.resolve(&model)?;
                a.out.config(Task::Criterion {
                    model,
                    criterion: Criterion::PurityLossTime { eta: a.eta, target: a.target },
                    schemes,
                })
            }
            Command::Stationary(a) => {
                let model = a.model.resolve()?;
                let scheme: Scheme = match (model.is_oscillator(), a.s, a.phi) {
                    (true, Some(s), None) => SchemeShape::Osc { s }.with_eta(a.eta)?,
                    (false, None, Some(phi)) => qbm_scheme(a.eta, a.r, phi)?,
                    (true, ..) => return Err(CliError::Validation("oscillator needs --s".into())),
                    (false, ..) => return Err(CliError::Validation("QBM needs --phi".into())),
                };
                a.out.config(Task::Stationary { model, scheme })
            }
            Command::Overlap(a) => {
                let model = Model::QbmHighT { temperature: a.temperature };
                let (sa, sb) = (qbm_scheme(a.eta, a.r, a.phi_a)?, qbm_scheme(a.eta, a.r, a.phi_b)?);
                a.out.config(Task::Overlap { model, a: sa, b: sb })
            }
            Command::Tables(a) => {
                a.out.config(Task::Tables { temperatures: flatten(&a.temperatures), phis: flatten(&a.phi_list) })
            }
            Command::Replay(a) => {
                let text = std::fs::read_to_string(&a.config)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", a.config.display())))?;
                let mut cfg = RunConfig::from_json(&text)?;
                if let Some(out) = a.out {
                    cfg.out = out;
                }
                cfg
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
