use crate::outcome::CriterionOutcome;

use super::roots::bisect;

/// A scalar function of time known on `[knots[0], knots[last]]`.
///
/// Knots are where the curve is checked for a crossing; between two knots it
/// is assumed to cross the level at most once.
pub trait Curve {
    fn value(&self, t: f64) -> f64;
    fn knots(&self) -> Vec<f64>;
}

/// A closure sampled on a uniform grid.
pub struct FnCurve<F> {
    f: F,
    t0: f64,
    t1: f64,
    n: usize,
}

impl<F: Fn(f64) -> f64> FnCurve<F> {
    pub fn uniform(f: F, t0: f64, t1: f64, n: usize) -> Self {
        FnCurve { f, t0, t1, n: n.max(2) }
    }
}

impl<F: Fn(f64) -> f64> Curve for FnCurve<F> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn knots(&self) -> Vec<f64> {
        let step = (self.t1 - self.t0) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.t1 } else { self.t0 + i as f64 * step }).collect()
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }

    fn knots(&self) -> Vec<f64> {
        (**self).knots()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Upward,
    Downward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Upward => 1.0,
            Direction::Downward => -1.0,
        }
    }
}

/// Earliest time at which `curve` reaches `level` moving in `direction`,
/// located to within `tol`.
///
/// A curve that already starts at or beyond the level gives `Finite(t0)`;
/// one that never gets there gives `NotReached(horizon)`.
pub fn first_crossing<C: Curve>(curve: &C, level: f64, direction: Direction, tol: f64) -> CriterionOutcome {
    let knots = curve.knots();
    let Some(&t0) = knots.first() else {
        return CriterionOutcome::NotReached(0.0);
    };
    let g = |t: f64| direction.sign() * (curve.value(t) - level);
    if g(t0) >= 0.0 {
        return CriterionOutcome::Finite(t0);
    }
    for w in knots.windows(2) {
        if g(w[1]) >= 0.0 {
            // g(w[0]) < 0 <= g(w[1]) so the bracket is valid
            let t = bisect(&g, w[0], w[1], tol).unwrap_or(w[1]);
            return CriterionOutcome::Finite(t);
        }
    }
    CriterionOutcome::NotReached(*knots.last().unwrap())
}
