//! Parsers for numeric flag values: angles, ranges and lists.

use std::f64::consts::{FRAC_PI_2, PI};

use classicality_core::numerics::Axis;

/// An angle in radians, or in units of `π/2` with a `p2` suffix (`1.35p2`),
/// or of `π` with a `pi` suffix (`pi`, `0.5pi`).
pub fn angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (body, unit) = if let Some(b) = s.strip_suffix("p2") {
        (b, FRAC_PI_2)
    } else if let Some(b) = s.strip_suffix("pi") {
        (b, PI)
    } else {
        (s, 1.0)
    };
    let k = match body {
        "" if unit != 1.0 => 1.0,
        "-" if unit != 1.0 => -1.0,
        _ => body.parse::<f64>().map_err(|_| format!("not an angle: {s:?}"))?,
    };
    let v = k * unit;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite angle: {s:?}"))
    }
}

pub fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

/// `lo:hi:count`, endpoints parsed with `endpoint`.
fn range_with(s: &str, endpoint: fn(&str) -> Result<f64, String>) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("expected lo:hi:count, got {s:?}"));
    };
    let count: usize = count.trim().parse().map_err(|_| format!("bad point count in {s:?}"))?;
    Axis::new(endpoint(lo)?, endpoint(hi)?, count).map_err(|e| e.to_string())
}

pub fn range(s: &str) -> Result<Axis, String> {
    range_with(s, number)
}

pub fn angle_range(s: &str) -> Result<Axis, String> {
    range_with(s, angle)
}

/// Comma-separated list.
fn list_with(s: &str, item: fn(&str) -> Result<f64, String>) -> Result<Vec<f64>, String> {
    let v = s.split(',').map(item).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        Err("empty list".into())
    } else {
        Ok(v)
    }
}

pub fn list(s: &str) -> Result<Vec<f64>, String> {
    list_with(s, number)
}

pub fn angle_list(s: &str) -> Result<Vec<f64>, String> {
    list_with(s, angle)
}
