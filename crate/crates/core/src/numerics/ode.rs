//! Dormand–Prince 5(4) with step-size control and fifth-order dense output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Integration horizon.
    pub t_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rtol: 1e-9, atol: 1e-12, h_init: 1e-3, h_min: 1e-14, h_max: 1.0, t_max: 50.0 }
    }
}

impl IntegratorConfig {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.t_max >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("integrator config {self:?}")))
        }
    }
}

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error weights (5th minus 4th order)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = if self.h > 0.0 { (t - self.t0) / self.h } else { 0.0 };
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }
}

/// Solution of an initial-value problem, queryable anywhere on `[t0, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseTrajectory<const N: usize> {
    t0: f64,
    y0: [f64; N],
    segments: Vec<Segment<N>>,
    t_end: f64,
    y_end: [f64; N],
}

impl<const N: usize> DenseTrajectory<N> {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn final_state(&self) -> [f64; N] {
        self.y_end
    }

    /// Accepted step boundaries, including both ends.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = Vec::with_capacity(self.segments.len() + 1);
        k.push(self.t0);
        k.extend(self.segments.iter().map(|s| s.t0 + s.h));
        k
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    /// Interpolated state; `t` is clamped to the integrated interval.
    pub fn at(&self, t: f64) -> [f64; N] {
        if self.segments.is_empty() || t <= self.t0 {
            return self.y0;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let idx = self.segments.partition_point(|s| s.t0 + s.h < t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        seg.eval(t)
    }
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t0 + cfg.t_max`.
pub fn integrate<const N: usize, F>(rhs: F, t0: f64, y0: [f64; N], cfg: &IntegratorConfig) -> Result<DenseTrajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate_until(rhs, t0, y0, cfg, |_, _, _| false)
}

/// Like [`integrate`], but stops after the first accepted step for which
/// `stop(t, y, dydt)` returns true.
pub fn integrate_until<const N: usize, F, S>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    cfg: &IntegratorConfig,
    mut stop: S,
) -> Result<DenseTrajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N], &[f64; N]) -> bool,
{
    cfg.validate()?;
    let t_final = t0 + cfg.t_max;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = cfg.h_init.min(cfg.h_max);
    let mut segments = Vec::new();

    while t < t_final {
        let last = t + h >= t_final;
        let h_step = if last { t_final - t } else { h };

        let k2 = rhs(t + C2 * h_step, &axpy(&y, h_step, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h_step, &axpy(&y, h_step, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h_step, &axpy(&y, h_step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * h_step, &axpy(&y, h_step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(t + h_step, &axpy(&y, h_step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h_step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h_step, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h_step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h = h_step * 0.1;
            if h < cfg.h_min {
                return Err(Error::StepUnderflow { t_reached: t });
            }
            continue;
        }

        let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
        if err <= 1.0 {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h_step * k1[i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h_step * k7[i] - bspl;
                r[4][i] = h_step * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            segments.push(Segment { t0: t, h: h_step, r });
            t = if last { t_final } else { t + h_step };
            y = y_new;
            k1 = k7;
            if stop(t, &y, &k1) {
                break;
            }
            // a truncated final step must not shrink the controller's step
            h = (h.max(h_step) * fac).min(cfg.h_max);
        } else {
            h = h_step * fac.min(1.0);
            if h < cfg.h_min {
                return Err(Error::StepUnderflow { t_reached: t });
            }
        }
    }

    Ok(DenseTrajectory { t0, y0, segments, t_end: t, y_end: y })
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (a, k) in terms {
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}
