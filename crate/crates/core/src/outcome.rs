use serde::{Deserialize, Serialize};

/// Result of a time- or threshold-valued classicality criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum CriterionOutcome {
    /// A time, or an efficiency for the threshold criteria.
    Finite(f64),
    /// The level was not crossed before the integration horizon.
    NotReached(f64),
    /// The target cannot be met by any admissible parameter.
    NotAttainable,
    /// The state is an exact fixed point; the level is never crossed.
    Infinite,
}

impl CriterionOutcome {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            CriterionOutcome::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CriterionOutcome::Finite(_) => "finite",
            CriterionOutcome::NotReached(_) => "not_reached",
            CriterionOutcome::NotAttainable => "not_attainable",
            CriterionOutcome::Infinite => "infinite",
        }
    }

    /// Numeric value used when ranking outcomes: never-crossed counts as an
    /// infinitely long time, and an unattainable target is left out (NaN).
    pub fn objective(&self) -> f64 {
        match *self {
            CriterionOutcome::Finite(v) => v,
            CriterionOutcome::NotReached(_) | CriterionOutcome::Infinite => f64::INFINITY,
            CriterionOutcome::NotAttainable => f64::NAN,
        }
    }
}
