//! Zero-mean Gaussian Wigner functions.
//!
//! A state is described by the quadratic form in the exponent of its Wigner
//! function, `W(x, p) ∝ exp(-α x² - β p² - 2γ x p)`, with ħ = 1. In these
//! units the purity is `sqrt(αβ - γ²)` and a pure state has `αβ - γ² = 1`.
//! Means are not tracked: nothing computed here depends on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for every physicality decision.
pub const EPS_PHYS: f64 = 1e-9;

/// Coefficients `(α, β, γ)` of the Gaussian quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianShape {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Physical second moments of a Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// Position dispersion Δx.
    pub dx: f64,
    /// Momentum dispersion Δp.
    pub dp: f64,
    /// Symmetrised covariance `<xp + px>/2 - <x><p>`.
    pub cxp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Physicality {
    ProperPure,
    ProperMixed,
    /// Infinite variance along some direction, e.g. the thermal start of a free particle.
    Degenerate,
    Unphysical,
}

impl GaussianShape {
    /// The vacuum/coherent state in vacuum-normalised units.
    pub const COHERENT: GaussianShape = GaussianShape { alpha: 1.0, beta: 1.0, gamma: 0.0 };

    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        GaussianShape { alpha, beta, gamma }
    }

    pub fn det(&self) -> f64 {
        self.alpha * self.beta - self.gamma * self.gamma
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        GaussianShape::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }

    /// Purity `Tr ρ² = sqrt(αβ - γ²)`.
    ///
    /// Determinants in `[-EPS_PHYS, 0)` are rounded to zero; anything more
    /// negative is rejected.
    pub fn purity(&self) -> Result<f64> {
        let det = self.det();
        if !det.is_finite() {
            return Err(Error::InvalidState(format!("non-finite shape {self:?}")));
        }
        if det < -EPS_PHYS {
            return Err(Error::InvalidState(format!("negative determinant {det:e}")));
        }
        Ok(det.max(0.0).sqrt())
    }

    /// Dispersions and covariance, from inverting the 2×2 quadratic form.
    pub fn moments(&self) -> Result<Moments> {
        let det = self.positive_det()?;
        Ok(Moments {
            dx: (self.beta / (2.0 * det)).sqrt(),
            dp: (self.alpha / (2.0 * det)).sqrt(),
            cxp: -self.gamma / (2.0 * det),
        })
    }

    /// The pure state with the same dispersion ratios and tilt (`det = 1`).
    pub fn purify(&self) -> Result<GaussianShape> {
        let det = self.positive_det()?;
        let k = det.sqrt().recip();
        Ok(GaussianShape::new(self.alpha * k, self.beta * k, self.gamma * k))
    }

    pub fn classify(&self) -> Physicality {
        let det = self.det();
        if !self.is_finite()
            || self.alpha < -EPS_PHYS
            || self.beta < -EPS_PHYS
            || !(-EPS_PHYS..=1.0 + EPS_PHYS).contains(&det)
        {
            return Physicality::Unphysical;
        }
        if det <= EPS_PHYS || self.alpha <= EPS_PHYS {
            return Physicality::Degenerate;
        }
        if (det - 1.0).abs() <= EPS_PHYS {
            Physicality::ProperPure
        } else {
            Physicality::ProperMixed
        }
    }

    fn positive_det(&self) -> Result<f64> {
        let det = self.det();
        if det.is_finite() && det > 0.0 && self.alpha > 0.0 && self.beta > 0.0 {
            Ok(det)
        } else {
            Err(Error::Degenerate { det })
        }
    }
}

impl Moments {
    /// Reassembles the quadratic form; inverse of [`GaussianShape::moments`].
    pub fn to_shape(&self) -> Result<GaussianShape> {
        // covariance matrix S = M^{-1} / 2
        let s_det = self.dx * self.dx * self.dp * self.dp - self.cxp * self.cxp;
        if !(s_det > 0.0) {
            return Err(Error::Degenerate { det: s_det });
        }
        let k = 1.0 / (2.0 * s_det);
        Ok(GaussianShape::new(self.dp * self.dp * k, self.dx * self.dx * k, -self.cxp * k))
    }
}

/// `det(M_a + M_b)` for two quadratic forms.
fn det_of_sum(a: &GaussianShape, b: &GaussianShape) -> f64 {
    let s = GaussianShape::new(a.alpha + b.alpha, a.beta + b.beta, a.gamma + b.gamma);
    s.det()
}

/// Modulus of the scalar product between the purified versions of `a` and `b`.
///
/// For pure Gaussians `|<ψ_a|ψ_b>|² = 2π ∫ W_a W_b = 2 / sqrt(det(M_a + M_b))`.
pub fn overlap(a: &GaussianShape, b: &GaussianShape) -> Result<f64> {
    let pa = a.purify()?;
    let pb = b.purify()?;
    // symmetric in (a, b) because the sum is computed component-wise
    let sq = 2.0 / det_of_sum(&pa, &pb).sqrt();
    Ok(sq.sqrt().min(1.0))
}

/// Normalised Hilbert–Schmidt overlap `Tr(ρ_a ρ_b) / sqrt(P_a P_b)` of the
/// unpurified states.
pub fn mixed_overlap(a: &GaussianShape, b: &GaussianShape) -> Result<f64> {
    let da = a.positive_det()?;
    let db = b.positive_det()?;
    Ok(2.0 * (da * db).powf(0.25) / det_of_sum(a, b).sqrt())
}
