//! Stationary-state tables for x-homodyne and the loss-optimal angle, with
//! per-cell comparison against reference values.

use rayon::prelude::*;
use serde::Serialize;

use classicality_core::qbm::{self, QbmBath, QbmScheme, PHI_LOSS_OPTIMUM};
use classicality_core::Result;

pub const QUANTITIES: [&str; 6] = ["alpha_ss", "beta_ss", "gamma_ss", "dx", "dp", "cxp"];

/// Reference `(α, β, γ, Δx, Δp, C_xp)` at `η = r = 1`, keyed by `(T, φ)`.
const REFERENCE: [(f64, f64, [f64; 6]); 8] = [
    (1e6, 0.0, [2826.0, 0.0007, -0.999, 0.018, 37.968, 0.509]),
    (1e4, 0.0, [280.0, 0.0070, -0.992, 0.059, 11.977, 0.508]),
    (1e2, 0.0, [26.4, 0.0707, -0.931, 0.188, 3.633, 0.466]),
    (1.0, 0.0, [1.53, 0.8002, -0.480, 0.632, 0.877, 0.241]),
    (1e6, PHI_LOSS_OPTIMUM, [1500.0, 0.0007, -0.281, 0.018, 27.792, 0.144]),
    (1e4, PHI_LOSS_OPTIMUM, [149.0, 0.0072, -0.280, 0.060, 8.656, 0.141]),
    (1e2, PHI_LOSS_OPTIMUM, [14.0, 0.0741, -0.270, 0.192, 2.694, 0.140]),
    (1.0, PHI_LOSS_OPTIMUM, [1.05, 0.9561, -0.112, 0.694, 0.728, 0.056]),
];

pub fn reference(temperature: f64, phi: f64) -> Option<[f64; 6]> {
    REFERENCE
        .iter()
        .find(|(t, p, _)| (t - temperature).abs() <= 1e-9 * t && (p - phi).abs() <= 1e-9)
        .map(|(_, _, r)| *r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub temperature: f64,
    pub phi: f64,
    pub values: [f64; 6],
    pub reference: Option<[f64; 6]>,
    pub rel_error: Option<[f64; 6]>,
}

/// Stationary state and its moments at `η = r = 1`.
pub fn stationary_row(temperature: f64, phi: f64) -> Result<TableRow> {
    let bath = QbmBath::new(temperature)?;
    let shape = qbm::stationary_numeric(&QbmScheme::new(1.0, 1.0, phi)?, &bath)?;
    let m = shape.moments()?;
    let values = [shape.alpha, shape.beta, shape.gamma, m.dx, m.dp, m.cxp];
    let reference = reference(temperature, phi);
    let rel_error = reference.map(|r| std::array::from_fn(|i| ((values[i] - r[i]) / r[i]).abs()));
    Ok(TableRow { temperature, phi, values, reference, rel_error })
}

/// All `(T, φ)` rows, `T` outermost, computed in parallel.
pub fn compute(temperatures: &[f64], phis: &[f64]) -> Result<Vec<TableRow>> {
    let cells: Vec<(f64, f64)> = temperatures.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    cells.into_par_iter().map(|(t, p)| stationary_row(t, p)).collect()
}
