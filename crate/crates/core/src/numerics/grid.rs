use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zoom factor between successive refinement passes.
const ZOOM: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Axis> {
        let axis = Axis { lo, hi, count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count >= 2 && self.lo < self.hi && self.lo.is_finite() && self.hi.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("grid axis {self:?}")))
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + i as f64 * step }).collect()
    }

    /// Window of width `width` around `center`, shifted to stay inside this axis.
    fn window(&self, center: f64, width: f64) -> Axis {
        let width = width.min(self.hi - self.lo);
        let lo = (center - 0.5 * width).clamp(self.lo, self.hi - width);
        Axis { lo, hi: lo + width, count: self.count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
    pub refine_levels: usize,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>, refine_levels: usize) -> Result<GridSpec> {
        if axes.is_empty() {
            return Err(Error::OutOfRange("grid needs at least one axis".into()));
        }
        for a in &axes {
            a.validate()?;
        }
        Ok(GridSpec { axes, refine_levels })
    }

    pub fn one_d(lo: f64, hi: f64, count: usize, refine_levels: usize) -> Result<GridSpec> {
        GridSpec::new(vec![Axis::new(lo, hi, count)?], refine_levels)
    }

    /// Cartesian product of the axis points, first axis outermost.
    pub fn points(&self) -> Vec<Vec<f64>> {
        cartesian(&self.axes)
    }
}

fn cartesian(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let pts = axis.points();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    fn strictly_better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOpt<T = f64> {
    /// Best point and its value, `None` when every grid value was NaN.
    pub best: Option<(Vec<f64>, T)>,
    /// The coarse scan, in grid order.
    pub surface: Vec<(Vec<f64>, T)>,
    /// Best objective after each pass (coarse scan first).
    pub history: Vec<f64>,
}

impl<T> GridOpt<T> {
    pub fn point(&self) -> Option<&[f64]> {
        self.best.as_ref().map(|(p, _)| p.as_slice())
    }
}

impl GridOpt<f64> {
    pub fn value(&self) -> Option<f64> {
        self.best.as_ref().map(|(_, v)| *v)
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn scan<T, F>(f: &F, points: Vec<Vec<f64>>) -> Vec<(Vec<f64>, T)>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    points
        .into_par_iter()
        .map(|p| {
            let v = f(&p);
            (p, v)
        })
        .collect()
}

fn update<T: Clone, K: Fn(&T) -> f64>(
    best: &mut Option<(Vec<f64>, T)>,
    candidates: &[(Vec<f64>, T)],
    key: &K,
    sense: Sense,
) {
    for (p, v) in candidates {
        let kv = key(v);
        if kv.is_nan() {
            continue;
        }
        let replace = match best {
            None => true,
            Some((bp, bv)) => {
                let kb = key(bv);
                sense.strictly_better(kv, kb) || (kv == kb && lex_less(p, bp))
            }
        };
        if replace {
            *best = Some((p.clone(), v.clone()));
        }
    }
}

/// Coarse grid scan followed by `refine_levels` zoomed re-scans around the
/// incumbent. NaN values are skipped. Ties go to the lexicographically
/// smallest point.
pub fn grid_argopt<F>(f: F, spec: &GridSpec, sense: Sense) -> GridOpt
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    grid_argopt_by(f, |v| *v, spec, sense)
}

/// As [`grid_argopt`] for any value type, ranked by `key`.
pub fn grid_argopt_by<T, F, K>(f: F, key: K, spec: &GridSpec, sense: Sense) -> GridOpt<T>
where
    T: Clone + Send,
    F: Fn(&[f64]) -> T + Sync,
    K: Fn(&T) -> f64,
{
    let objective = |best: &Option<(Vec<f64>, T)>| best.as_ref().map_or(f64::NAN, |(_, v)| key(v));
    let surface = scan(&f, spec.points());
    let mut best = None;
    update(&mut best, &surface, &key, sense);
    let mut history = vec![objective(&best)];

    for level in 1..=spec.refine_levels {
        let Some((center, _)) = best.clone() else { break };
        let axes: Vec<Axis> =
            spec.axes.iter().zip(&center).map(|(a, &c)| a.window(c, (a.hi - a.lo) / ZOOM.powi(level as i32))).collect();
        let pass = scan(&f, cartesian(&axes));
        update(&mut best, &pass, &key, sense);
        history.push(objective(&best));
    }

    GridOpt { best, surface, history }
}
