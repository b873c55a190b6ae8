//! Classicality criteria over a common model abstraction, and scheme sweeps.
//!
//! Every criterion is written once against [`Model`], which hides whether
//! the conditional flow is the oscillator closed form or the QBM ODE.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{overlap, GaussianShape};
use crate::numerics::{bisect, first_crossing, grid_argopt_by, Axis, Curve, Direction, FnCurve, GridSpec, Sense};
use crate::oscillator::{self, conditional_shape_finite_t, OscBath, OscScheme};
use crate::outcome::CriterionOutcome;
use crate::qbm::{self, QbmBath, QbmScheme, QbmTrajectory, SieveCoords, SieveScale};

/// Oscillator trajectories are followed to this time (spontaneous-emission units).
pub const OSC_HORIZON: f64 = 50.0;
const OSC_KNOTS: usize = 4001;
/// "Infinitely hot" oscillator start at zero temperature; divided by `1 + 2n`
/// in a thermal bath.
pub const OSC_HOT_START: GaussianShape = GaussianShape::new(1e-8, 1e-8, 0.0);
/// Width of the efficiency bracket returned by the threshold criteria.
pub const ETA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    OscillatorT0,
    OscillatorFiniteT { n: f64 },
    QbmHighT { temperature: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Osc(OscScheme),
    Qbm(QbmScheme),
}

/// A measurement family parametrised by its overall efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeShape {
    Osc { s: f64 },
    Qbm { r: f64, phi: f64 },
}

impl SchemeShape {
    pub fn with_eta(&self, eta: f64) -> Result<Scheme> {
        match *self {
            SchemeShape::Osc { s } => Ok(Scheme::Osc(OscScheme::from_s(eta, s)?)),
            SchemeShape::Qbm { r, phi } => Ok(Scheme::Qbm(QbmScheme::new(eta, r, phi)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evolution {
    Conditional,
    Unconditional,
}

enum Bath {
    Osc(OscBath),
    Qbm(QbmBath),
}

/// Purity along a trajectory, as a dense function of time.
pub enum PurityCurve {
    Oscillator(FnCurve<Box<dyn Fn(f64) -> f64 + Send + Sync>>),
    Qbm(QbmTrajectory),
}

impl Curve for PurityCurve {
    fn value(&self, t: f64) -> f64 {
        match self {
            PurityCurve::Oscillator(c) => c.value(t),
            PurityCurve::Qbm(c) => c.value(t),
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            PurityCurve::Oscillator(c) => c.knots(),
            PurityCurve::Qbm(c) => c.knots(),
        }
    }
}

impl Model {
    fn bath(&self) -> Result<Bath> {
        Ok(match *self {
            Model::OscillatorT0 => Bath::Osc(OscBath::ZERO_TEMPERATURE),
            Model::OscillatorFiniteT { n } => Bath::Osc(OscBath::new(n)?),
            Model::QbmHighT { temperature } => Bath::Qbm(QbmBath::new(temperature)?),
        })
    }

    pub fn is_oscillator(&self) -> bool {
        !matches!(self, Model::QbmHighT { .. })
    }

    /// Checks that `scheme` belongs to this model.
    pub fn check(&self, scheme: &Scheme) -> Result<()> {
        match (self.is_oscillator(), scheme) {
            (true, Scheme::Osc(_)) | (false, Scheme::Qbm(_)) => Ok(()),
            _ => Err(Error::OutOfRange(format!("scheme {scheme:?} does not match model {self:?}"))),
        }
    }

    pub fn unmonitored(&self) -> Scheme {
        if self.is_oscillator() {
            Scheme::Osc(OscScheme::UNMONITORED)
        } else {
            Scheme::Qbm(QbmScheme::unmonitored())
        }
    }

    /// Start state for purification: the hot limit for the oscillator (far
    /// hotter than the bath), the thermal state for QBM.
    pub fn hot_start(&self) -> Result<GaussianShape> {
        Ok(match self.bath()? {
            Bath::Osc(b) => {
                let c = OSC_HOT_START.alpha * b.stationary_coefficient();
                GaussianShape::new(c, c, 0.0)
            }
            Bath::Qbm(b) => qbm::thermal_state(&b),
        })
    }

    /// Time up to which trajectories are followed.
    pub fn horizon(&self) -> Result<f64> {
        Ok(match self.bath()? {
            Bath::Osc(_) => OSC_HORIZON,
            Bath::Qbm(b) => qbm::TAU_MAX / b.scale(),
        })
    }

    /// Shape at time `t` under `scheme`.
    pub fn shape_at(&self, start: &GaussianShape, scheme: &Scheme, t: f64) -> Result<GaussianShape> {
        self.check(scheme)?;
        match (self.bath()?, scheme) {
            (Bath::Osc(b), Scheme::Osc(s)) => {
                let (a, bb) = conditional_shape_finite_t(start.alpha, start.beta, &b, s, t)?;
                Ok(GaussianShape::new(a, bb, 0.0))
            }
            (Bath::Qbm(b), Scheme::Qbm(s)) => Ok(qbm::evolve(start, s, &b, t)?.final_shape()),
            _ => unreachable!("checked above"),
        }
    }

    pub fn purity_at(&self, start: &GaussianShape, scheme: &Scheme, t: f64) -> Result<f64> {
        Ok(self.shape_at(start, scheme, t)?.det().max(0.0).sqrt())
    }

    pub fn purity_trajectory(
        &self,
        start: &GaussianShape,
        scheme: &Scheme,
        evolution: Evolution,
    ) -> Result<PurityCurve> {
        self.check(scheme)?;
        let scheme = match evolution {
            Evolution::Conditional => *scheme,
            Evolution::Unconditional => self.unmonitored(),
        };
        match (self.bath()?, scheme) {
            (Bath::Osc(b), Scheme::Osc(s)) => {
                // validate once so the closure cannot fail
                oscillator::purity_at(start, &b, &s, 0.0)?;
                let start = *start;
                let f: Box<dyn Fn(f64) -> f64 + Send + Sync> =
                    Box::new(move |t| oscillator::purity_at(&start, &b, &s, t).unwrap_or(f64::NAN));
                Ok(PurityCurve::Oscillator(FnCurve::uniform(f, 0.0, OSC_HORIZON, OSC_KNOTS)))
            }
            (Bath::Qbm(b), Scheme::Qbm(s)) => {
                Ok(PurityCurve::Qbm(qbm::evolve(start, &s, &b, qbm::TAU_MAX / b.scale())?))
            }
            _ => unreachable!("checked above"),
        }
    }

    /// Conditional stationary state under `scheme`.
    pub fn stationary(&self, scheme: &Scheme) -> Result<GaussianShape> {
        self.check(scheme)?;
        match (self.bath()?, scheme) {
            (Bath::Osc(b), Scheme::Osc(_)) => {
                let c = b.stationary_coefficient();
                Ok(GaussianShape::new(c, c, 0.0))
            }
            (Bath::Qbm(b), Scheme::Qbm(s)) => qbm::stationary_numeric(s, &b),
            _ => unreachable!("checked above"),
        }
    }

    fn time_tol(&self) -> Result<f64> {
        Ok(self.horizon()? * 1e-12)
    }
}

/// Purity level a purification run aims for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityTarget {
    Level(f64),
    /// Half way between the start purity and the conditional asymptote.
    HalfWay,
}

impl PurityTarget {
    pub fn resolve(&self, model: &Model, scheme: &Scheme, start: &GaussianShape) -> Result<f64> {
        match *self {
            PurityTarget::Level(p) => Ok(p),
            PurityTarget::HalfWay => {
                let p0 = start.det().max(0.0).sqrt();
                let p_inf = model.stationary(scheme)?.det().max(0.0).sqrt();
                Ok(0.5 * (p0 + p_inf))
            }
        }
    }
}

/// Time for the conditional purity to rise through `target`.
pub fn purification_time(
    model: &Model,
    scheme: &Scheme,
    start: &GaussianShape,
    target: PurityTarget,
) -> Result<CriterionOutcome> {
    let level = target.resolve(model, scheme, start)?;
    let curve = model.purity_trajectory(start, scheme, Evolution::Conditional)?;
    Ok(first_crossing(&curve, level, Direction::Upward, model.time_tol()?))
}

/// Bisection for the smallest efficiency in `[0, 1]` with `purity(η) ≥ p_thr`.
fn threshold<F: Fn(f64) -> Result<f64>>(purity: F, p_thr: f64) -> Result<CriterionOutcome> {
    if purity(1.0)? < p_thr {
        return Ok(CriterionOutcome::NotAttainable);
    }
    if purity(0.0)? >= p_thr {
        return Ok(CriterionOutcome::Finite(0.0));
    }
    let failure = RefCell::new(None);
    let eta = bisect(
        |eta| match purity(eta) {
            Ok(p) => p - p_thr,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        ETA_TOL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(CriterionOutcome::Finite(eta?))
}

/// Smallest efficiency for which the conditional purity exceeds `p_thr` at `t_thr`.
pub fn efficiency_threshold_fixed_time(
    model: &Model,
    shape: &SchemeShape,
    start: &GaussianShape,
    p_thr: f64,
    t_thr: f64,
) -> Result<CriterionOutcome> {
    if !(t_thr >= 0.0) {
        return Err(Error::OutOfRange(format!("t_thr = {t_thr}")));
    }
    threshold(|eta| model.purity_at(start, &shape.with_eta(eta)?, t_thr), p_thr)
}

/// Smallest efficiency whose conditional stationary state has purity `p_thr`.
///
/// A scheme with no stationary state at full efficiency (the state keeps
/// spreading along an unmeasured direction) counts as unattainable.
pub fn efficiency_threshold_asymptotic(model: &Model, shape: &SchemeShape, p_thr: f64) -> Result<CriterionOutcome> {
    if !(p_thr > 0.0 && p_thr < 1.0) {
        return Err(Error::OutOfRange(format!("P_thr = {p_thr}")));
    }
    let purity = |eta: f64| Ok(model.stationary(&shape.with_eta(eta)?)?.det().max(0.0).sqrt());
    match purity(1.0) {
        Err(Error::NotConverged { .. }) => return Ok(CriterionOutcome::NotAttainable),
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    threshold(purity, p_thr)
}

/// Start of a purity-loss run: the conditional stationary state, or where the
/// conditional flow from the hot start ends up when there is none.
fn conditioned_state(model: &Model, scheme: &Scheme) -> Result<GaussianShape> {
    match model.stationary(scheme) {
        Err(Error::NotConverged { .. }) => model.shape_at(&model.hot_start()?, scheme, model.horizon()?),
        other => other,
    }
}

/// Time for the unconditional purity to fall through `target` once
/// monitoring with `scheme` stops.
pub fn purity_loss_time(model: &Model, scheme: &Scheme, target: f64) -> Result<CriterionOutcome> {
    let start = conditioned_state(model, scheme)?;
    if start.det().max(0.0).sqrt() <= target {
        return Ok(CriterionOutcome::Finite(0.0));
    }
    let free = model.unmonitored();
    let probe = model.shape_at(&start, &free, model.horizon()? * 1e-2)?;
    let moved = start
        .as_array()
        .iter()
        .zip(probe.as_array())
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
        .fold(0.0, f64::max);
    if moved <= 1e-12 {
        return Ok(CriterionOutcome::Infinite);
    }
    let curve = model.purity_trajectory(&start, &free, Evolution::Unconditional)?;
    Ok(first_crossing(&curve, target, Direction::Downward, model.time_tol()?))
}

/// Overlap of the conditional stationary states of two schemes.
pub fn stationary_overlap(model: &Model, a: &Scheme, b: &Scheme) -> Result<f64> {
    overlap(&model.stationary(a)?, &model.stationary(b)?)
}

/// Value at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepValue {
    Number(f64),
    Outcome(CriterionOutcome),
    /// A purity held as its deficit `1 − P`, so that purities equal to within
    /// round-off still rank correctly.
    PurityDeficit(f64),
}

impl SweepValue {
    pub fn objective(&self) -> f64 {
        match self {
            SweepValue::Number(v) => *v,
            SweepValue::Outcome(o) => o.objective(),
            SweepValue::PurityDeficit(d) => -d,
        }
    }

    /// Plain number for tabulation: the finite value, the horizon for
    /// `NotReached`, NaN otherwise.
    pub fn number(&self) -> f64 {
        match *self {
            SweepValue::Number(v) | SweepValue::Outcome(CriterionOutcome::Finite(v)) => v,
            SweepValue::PurityDeficit(d) => 1.0 - d,
            SweepValue::Outcome(CriterionOutcome::NotReached(h)) => h,
            SweepValue::Outcome(CriterionOutcome::Infinite) => f64::INFINITY,
            SweepValue::Outcome(CriterionOutcome::NotAttainable) => f64::NAN,
        }
    }

    pub fn status(&self) -> Option<&'static str> {
        match self {
            SweepValue::Number(_) | SweepValue::PurityDeficit(_) => None,
            SweepValue::Outcome(o) => Some(o.status()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub at: Vec<f64>,
    pub value: SweepValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub grid: GridSpec,
    /// Coarse grid in grid order (first axis outermost).
    pub points: Vec<SweepPoint>,
    /// Best point after refinement.
    pub argopt: Option<SweepPoint>,
    pub sense: Sense,
}

/// Evaluates `f` on the grid and refines around the optimum. Failing points
/// are kept (as `NotAttainable` with the error text) and left out of the
/// ranking.
pub fn sweep<F>(axes: &[&str], grid: &GridSpec, sense: Sense, f: F) -> Result<SweepResult>
where
    F: Fn(&[f64]) -> Result<SweepValue> + Sync,
{
    if axes.len() != grid.axes.len() {
        return Err(Error::OutOfRange(format!("{} axis names for {} grid axes", axes.len(), grid.axes.len())));
    }
    let eval = |p: &[f64]| match f(p) {
        Ok(value) => SweepPoint { at: p.to_vec(), value, error: None },
        Err(e) => SweepPoint {
            at: p.to_vec(),
            value: SweepValue::Outcome(CriterionOutcome::NotAttainable),
            error: Some(e.to_string()),
        },
    };
    let opt = grid_argopt_by(eval, |pt: &SweepPoint| pt.value.objective(), grid, sense);
    Ok(SweepResult {
        axes: axes.iter().map(|s| s.to_string()).collect(),
        grid: grid.clone(),
        points: opt.surface.into_iter().map(|(_, pt)| pt).collect(),
        argopt: opt.best.map(|(_, pt)| pt),
        sense,
    })
}

/// Family of pure initial states for the predictability sieve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SieveFamily {
    /// Oscillator squeezed states `(e^ξ, e^-ξ, 0)`; one axis `xi`.
    Squeezed,
    /// QBM states on axes `(A, C)`.
    Qbm(SieveScale),
}

/// Unconditional purity at time `t` for every initial state on the grid;
/// the optimum is the most predictable state.
pub fn predictability_sieve(model: &Model, family: SieveFamily, grid: &GridSpec, t: f64) -> Result<SweepResult> {
    let free = model.unmonitored();
    match (family, model.bath()?) {
        (SieveFamily::Squeezed, Bath::Osc(_)) => sweep(&["xi"], grid, Sense::Max, |p| {
            let start = oscillator::sieve_state_from_xi(p[0]);
            Ok(SweepValue::Number(model.purity_at(&start, &free, t)?))
        }),
        (SieveFamily::Qbm(scale), Bath::Qbm(bath)) => sweep(&["A", "C"], grid, Sense::Max, |p| {
            let start = qbm::sieve_state(&SieveCoords { a: p[0], c: p[1], scale }, &bath)?;
            // sieve states are pure by construction: ln det = 0 exactly
            Ok(SweepValue::PurityDeficit(qbm::free_purity_deficit(&start, 0.0, &bath, t)?))
        }),
        _ => Err(Error::OutOfRange(format!("sieve family {family:?} does not match model {model:?}"))),
    }
}

/// Sieve optimum at each of several times and how far it wanders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveDrift {
    pub per_time: Vec<(f64, SweepResult)>,
    /// Largest distance of any optimum from the first one.
    pub max_shift: f64,
    pub drifted: bool,
}

pub fn sieve_drift(model: &Model, family: SieveFamily, grid: &GridSpec, times: &[f64], tol: f64) -> Result<SieveDrift> {
    let per_time =
        times.iter().map(|&t| Ok((t, predictability_sieve(model, family, grid, t)?))).collect::<Result<Vec<_>>>()?;
    let optima: Vec<&[f64]> = per_time.iter().filter_map(|(_, r)| r.argopt.as_ref().map(|p| p.at.as_slice())).collect();
    let max_shift = optima
        .iter()
        .map(|p| p.iter().zip(optima[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(SieveDrift { per_time, max_shift, drifted: max_shift > tol })
}

/// A criterion with everything fixed except the measurement scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "criterion", rename_all = "snake_case")]
pub enum Criterion {
    PurificationTime { eta: f64, target: PurityTarget },
    EfficiencyThresholdFixedTime { p_thr: f64, t_thr: f64 },
    EfficiencyThresholdAsymptotic { p_thr: f64 },
    PurityLossTime { eta: f64, target: f64 },
}

impl Criterion {
    /// Minimise times and thresholds, maximise the purity-loss time.
    pub fn sense(&self) -> Sense {
        match self {
            Criterion::PurityLossTime { .. } => Sense::Max,
            _ => Sense::Min,
        }
    }

    pub fn evaluate(&self, model: &Model, shape: &SchemeShape) -> Result<CriterionOutcome> {
        match *self {
            Criterion::PurificationTime { eta, target } => {
                purification_time(model, &shape.with_eta(eta)?, &model.hot_start()?, target)
            }
            Criterion::EfficiencyThresholdFixedTime { p_thr, t_thr } => {
                efficiency_threshold_fixed_time(model, shape, &model.hot_start()?, p_thr, t_thr)
            }
            Criterion::EfficiencyThresholdAsymptotic { p_thr } => efficiency_threshold_asymptotic(model, shape, p_thr),
            Criterion::PurityLossTime { eta, target } => purity_loss_time(model, &shape.with_eta(eta)?, target),
        }
    }
}

/// Grid of measurement schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "over", rename_all = "snake_case")]
pub enum SchemeGrid {
    /// Oscillator scheme parameter `s`.
    S { s: Axis },
    /// QBM angle at fixed `r`.
    Phi { r: f64, phi: Axis },
    /// QBM `(r, φ)`.
    RPhi { r: Axis, phi: Axis },
}

impl SchemeGrid {
    fn layout(&self) -> (Vec<&'static str>, Vec<Axis>) {
        match self {
            SchemeGrid::S { s } => (vec!["s"], vec![*s]),
            SchemeGrid::Phi { phi, .. } => (vec!["phi"], vec![*phi]),
            SchemeGrid::RPhi { r, phi } => (vec!["r", "phi"], vec![*r, *phi]),
        }
    }

    fn shape(&self, p: &[f64]) -> SchemeShape {
        match *self {
            SchemeGrid::S { .. } => SchemeShape::Osc { s: p[0] },
            SchemeGrid::Phi { r, .. } => SchemeShape::Qbm { r, phi: p[0] },
            SchemeGrid::RPhi { .. } => SchemeShape::Qbm { r: p[0], phi: p[1] },
        }
    }
}

/// Evaluates `criterion` over a grid of schemes and reports the optimum.
pub fn scheme_sweep(
    criterion: &Criterion,
    model: &Model,
    grid: &SchemeGrid,
    refine_levels: usize,
) -> Result<SweepResult> {
    if model.is_oscillator() != matches!(grid, SchemeGrid::S { .. }) {
        return Err(Error::OutOfRange(format!("scheme grid {grid:?} does not match model {model:?}")));
    }
    let (names, axes) = grid.layout();
    let spec = GridSpec::new(axes, refine_levels)?;
    sweep(&names, &spec, criterion.sense(), |p| Ok(SweepValue::Outcome(criterion.evaluate(model, &grid.shape(p))?)))
}
