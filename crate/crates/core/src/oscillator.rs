//! Underdamped harmonic oscillator under continuous homodyne/heterodyne
//! monitoring of its emitted phonons, after the rotating-wave approximation.
//!
//! Units: time in spontaneous-emission times, phase space normalised so that
//! the vacuum has `α = β = 1`. The local-oscillator phase is fixed to zero,
//! so a scheme is the pair of channel efficiencies `(η_x, η_y)`. The
//! conditional flow keeps `γ = 0` and has a closed form.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianShape, EPS_PHYS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscScheme {
    pub eta_x: f64,
    pub eta_y: f64,
}

impl OscScheme {
    /// No measurement at all: unconditional evolution.
    pub const UNMONITORED: OscScheme = OscScheme { eta_x: 0.0, eta_y: 0.0 };

    pub fn new(eta_x: f64, eta_y: f64) -> Result<OscScheme> {
        let ok = (0.0..=1.0).contains(&eta_x) && (0.0..=1.0).contains(&eta_y) && eta_x + eta_y <= 1.0 + EPS_PHYS;
        if ok {
            Ok(OscScheme { eta_x, eta_y })
        } else {
            Err(Error::OutOfRange(format!("oscillator scheme (eta_x, eta_y) = ({eta_x}, {eta_y})")))
        }
    }

    /// `η_x = η cos²(sπ/2)`, `η_y = η sin²(sπ/2)`: `s = 0` is x-homodyne,
    /// `s = 1/2` heterodyne, `s = 1` y-homodyne.
    pub fn from_s(eta: f64, s: f64) -> Result<OscScheme> {
        if !(0.0..=1.0).contains(&eta) || !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange(format!("(eta, s) = ({eta}, {s})")));
        }
        let (sin, cos) = (s * FRAC_PI_2).sin_cos();
        Ok(OscScheme { eta_x: eta * cos * cos, eta_y: eta * sin * sin })
    }

    pub fn eta(&self) -> f64 {
        self.eta_x + self.eta_y
    }

    /// `dP/dt` at `t = 0` from an infinitely hot start: `sqrt(η_x η_y)`.
    pub fn initial_purity_gain_rate(&self) -> f64 {
        (self.eta_x * self.eta_y).sqrt()
    }
}

/// Thermal bath at Bose occupation `n` of the oscillator mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscBath {
    pub n: f64,
}

impl OscBath {
    pub const ZERO_TEMPERATURE: OscBath = OscBath { n: 0.0 };

    pub fn new(n: f64) -> Result<OscBath> {
        if n >= 0.0 && n.is_finite() {
            Ok(OscBath { n })
        } else {
            Err(Error::OutOfRange(format!("Bose occupation n = {n}")))
        }
    }

    /// Bose occupation at temperature `kT / ħω`.
    pub fn from_temperature(kt_over_hw: f64) -> Result<OscBath> {
        if !(kt_over_hw > 0.0) {
            return Err(Error::OutOfRange(format!("temperature {kt_over_hw}")));
        }
        OscBath::new(1.0 / (1.0 / kt_over_hw).exp_m1())
    }

    /// `1 + 2n`, the factor relating finite-T coefficients to the T = 0 flow.
    pub fn thermal_factor(&self) -> f64 {
        1.0 + 2.0 * self.n
    }

    /// Stationary coefficient `α_ss = β_ss = 1/(1 + 2n)`.
    pub fn stationary_coefficient(&self) -> f64 {
        1.0 / self.thermal_factor()
    }
}

/// Closed-form flow of one inverse variance under a channel of efficiency `eta`.
///
/// Written with `e^{-t}` so that long times do not overflow; valid for
/// negative `t` as well (backward flow).
fn relax(x0: f64, eta: f64, t: f64) -> f64 {
    let lead = x0 * (1.0 - eta) + eta;
    let decay = (-t).exp();
    (lead - decay * (1.0 - x0) * eta) / (lead + decay * (1.0 - x0) * (1.0 - eta))
}

/// Inverse variances `(α(t), β(t))` at zero temperature.
pub fn conditional_shape(alpha0: f64, beta0: f64, scheme: &OscScheme, t: f64) -> (f64, f64) {
    (relax(alpha0, scheme.eta_x, t), relax(beta0, scheme.eta_y, t))
}

/// Finite-temperature flow: the T = 0 flow applied to `(1 + 2n)·α`, `(1 + 2n)·β`.
pub fn conditional_shape_finite_t(
    alpha0: f64,
    beta0: f64,
    bath: &OscBath,
    scheme: &OscScheme,
    t: f64,
) -> Result<(f64, f64)> {
    if !(alpha0 >= 0.0 && beta0 >= 0.0) || alpha0 * beta0 > 1.0 + EPS_PHYS {
        return Err(Error::InvalidState(format!("(alpha0, beta0) = ({alpha0}, {beta0})")));
    }
    let k = bath.thermal_factor();
    let (a, b) = (k * alpha0, k * beta0);
    let (a, b) = conditional_shape(a, b, scheme, t);
    Ok((a / k, b / k))
}

/// Pure squeezed state `(e^ξ, e^-ξ, 0)`.
pub fn sieve_state_from_xi(xi: f64) -> GaussianShape {
    GaussianShape::new(xi.exp(), (-xi).exp(), 0.0)
}

/// Purity `sqrt(αβ)` along the flow (finite or zero temperature).
pub fn purity_at(start: &GaussianShape, bath: &OscBath, scheme: &OscScheme, t: f64) -> Result<f64> {
    let (a, b) = conditional_shape_finite_t(start.alpha, start.beta, bath, scheme, t)?;
    Ok((a * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn scheme_from_s_examples() {
        let h = OscScheme::from_s(1.0, 0.5).unwrap();
        assert_relative_eq!(h.eta_x, 0.5, max_relative = 1e-15);
        assert_relative_eq!(h.eta_y, 0.5, max_relative = 1e-15);
        let x = OscScheme::from_s(0.7, 0.0).unwrap();
        assert_eq!((x.eta_x, x.eta_y), (0.7, 0.0));
        let a = OscScheme::from_s(0.8, 0.3).unwrap();
        let b = OscScheme::from_s(0.8, 0.7).unwrap();
        assert_relative_eq!(a.eta_x, b.eta_y, max_relative = 1e-14);
        assert_relative_eq!(a.eta_y, b.eta_x, max_relative = 1e-14);
        assert!(OscScheme::from_s(1.2, 0.5).is_err());
        assert!(OscScheme::from_s(0.5, -0.1).is_err());
        assert!(OscScheme::new(0.7, 0.7).is_err());
    }

    #[test]
    fn coherent_state_is_fixed() {
        for &(ex, ey) in &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (0.1, 0.3)] {
            let s = OscScheme::new(ex, ey).unwrap();
            for &t in &[0.0, 0.3, 7.0, 50.0] {
                let (a, b) = conditional_shape(1.0, 1.0, &s, t);
                assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unconditional_flow_matches_relaxation_formula() {
        for &(a0, t) in &[(0.01, 0.5), (0.3, 2.0), (0.9, 10.0)] {
            let (a, b) = conditional_shape(a0, 2.0 * a0, &OscScheme::UNMONITORED, t);
            assert_relative_eq!(a, 1.0 / (1.0 - (-t).exp() * (1.0 - 1.0 / a0)), max_relative = 1e-12);
            let b0 = 2.0 * a0;
            assert_relative_eq!(b, 1.0 / (1.0 - (-t).exp() * (1.0 - 1.0 / b0)), max_relative = 1e-12);
        }
    }

    #[test]
    fn hot_start_limit() {
        let s = OscScheme::new(0.3, 0.6).unwrap();
        for &t in &[0.1, 1.0, 4.0] {
            let (a, b) = conditional_shape(1e-12, 1e-12, &s, t);
            let em1 = t.exp_m1();
            assert!((a - em1 / (em1 + 1.0 / 0.3)).abs() < 1e-6);
            assert!((b - em1 / (em1 + 1.0 / 0.6)).abs() < 1e-6);
        }
        // the degenerate start itself needs no limit
        let (a, _) = conditional_shape(0.0, 0.0, &s, 1.0);
        assert_relative_eq!(a, 1f64.exp_m1() / (1f64.exp_m1() + 1.0 / 0.3), max_relative = 1e-14);
    }

    #[test]
    fn finite_temperature_asymptote() {
        for &n in &[1.0, 1e3, 1e6] {
            let bath = OscBath::new(n).unwrap();
            let k = 1.0 / (1.0 + 2.0 * n);
            for &(ex, ey) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)] {
                let s = OscScheme::new(ex, ey).unwrap();
                let (a, b) = conditional_shape_finite_t(1e-3 * k, k, &bath, &s, 200.0).unwrap();
                assert!((a - k).abs() < 1e-9 * k && (b - k).abs() < 1e-9 * k);
            }
            let p = purity_at(&GaussianShape::new(k, k, 0.0), &bath, &OscScheme::UNMONITORED, 1e3).unwrap();
            assert_relative_eq!(p, k, max_relative = 1e-12);
        }
    }

    #[test]
    fn finite_temperature_coherent_start_loses_purity() {
        let bath = OscBath::new(3.0).unwrap();
        assert!(conditional_shape_finite_t(2.0, 1.0, &bath, &OscScheme::UNMONITORED, 1.0).is_err());
        assert!(conditional_shape_finite_t(-0.1, 1.0, &bath, &OscScheme::UNMONITORED, 1.0).is_err());
        // a coherent start decays to the thermal purity
        let p = purity_at(&GaussianShape::COHERENT, &bath, &OscScheme::UNMONITORED, 60.0).unwrap();
        assert_relative_eq!(p, bath.stationary_coefficient(), max_relative = 1e-12);
        let k = bath.stationary_coefficient();
        let (a, b) = conditional_shape_finite_t(k, k, &bath, &OscScheme::UNMONITORED, 3.0).unwrap();
        assert_relative_eq!(a, k, max_relative = 1e-14);
        assert_relative_eq!(b, k, max_relative = 1e-14);
    }

    #[test]
    fn zero_occupation_reduces_to_zero_temperature() {
        let s = OscScheme::new(0.2, 0.5).unwrap();
        let a = conditional_shape_finite_t(0.1, 0.4, &OscBath::ZERO_TEMPERATURE, &s, 1.3).unwrap();
        assert_eq!(a, conditional_shape(0.1, 0.4, &s, 1.3));
    }

    #[test]
    fn bose_occupation_at_high_temperature() {
        let bath = OscBath::from_temperature(1e6).unwrap();
        assert!((bath.n - (1e6 - 0.5)).abs() < 1e-3);
    }

    #[test]
    fn initial_gain_rate() {
        assert_eq!(OscScheme::new(0.5, 0.5).unwrap().initial_purity_gain_rate(), 0.5);
        assert_eq!(OscScheme::new(0.7, 0.0).unwrap().initial_purity_gain_rate(), 0.0);
        assert_eq!(OscScheme::new(0.25, 0.25).unwrap().initial_purity_gain_rate(), 0.25);
        // matches dP/dt at t = 0+ of the closed form from a hot start
        let s = OscScheme::new(0.3, 0.2).unwrap();
        let h = 1e-7;
        let (a, b) = conditional_shape(0.0, 0.0, &s, h);
        assert!(((a * b).sqrt() / h - s.initial_purity_gain_rate()).abs() < 1e-6);
    }

    #[test]
    fn xi_sieve_family() {
        assert_eq!(sieve_state_from_xi(0.0), GaussianShape::COHERENT);
        let s = sieve_state_from_xi(1.0);
        assert_relative_eq!(s.alpha, std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(s.beta, 1.0 / std::f64::consts::E, max_relative = 1e-15);
        for xi in [-2.0, -0.3, 0.0, 0.7, 2.0] {
            assert!((sieve_state_from_xi(xi).purity().unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn squeezed_states_lose_purity_initially() {
        let bath = OscBath::ZERO_TEMPERATURE;
        for xi in [-1.5, -0.2, 0.2, 1.5] {
            let s = sieve_state_from_xi(xi);
            let p = purity_at(&s, &bath, &OscScheme::UNMONITORED, 1e-4).unwrap();
            assert!(p < 1.0 - 1e-8, "xi = {xi}: {p}");
        }
        let p = purity_at(&GaussianShape::COHERENT, &bath, &OscScheme::UNMONITORED, 5.0).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
    }

    fn scheme() -> impl Strategy<Value = OscScheme> {
        (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(eta, s)| OscScheme::from_s(eta, s).unwrap())
    }

    proptest! {
        #[test]
        fn semigroup(a0 in 1e-6f64..1.0, b0 in 1e-6f64..1.0, s in scheme(), t1 in 0.0f64..10.0, t2 in 0.0f64..10.0) {
            let (a, b) = conditional_shape(a0, b0, &s, t1 + t2);
            let (a1, b1) = conditional_shape(a0, b0, &s, t1);
            let (a2, b2) = conditional_shape(a1, b1, &s, t2);
            prop_assert!((a - a2).abs() <= 1e-10 * a.abs());
            prop_assert!((b - b2).abs() <= 1e-10 * b.abs());
        }

        #[test]
        fn unconditional_relaxation_is_monotone(a0 in 1e-3f64..0.999, t in 0.0f64..20.0, dt in 1e-3f64..1.0) {
            let (a1, _) = conditional_shape(a0, a0, &OscScheme::UNMONITORED, t);
            let (a2, _) = conditional_shape(a0, a0, &OscScheme::UNMONITORED, t + dt);
            prop_assert!(a2 > a1 || (1.0 - a1) < 1e-12);
            prop_assert!(a2 <= 1.0);
        }
    }
}
