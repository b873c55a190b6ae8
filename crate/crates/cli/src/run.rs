//! Execution of a [`RunConfig`] into a data artifact and summary lines.

use serde::Serialize;

use classicality_core::criteria::{self, Criterion, Model, Scheme, SchemeShape, SweepResult, SweepValue};
use classicality_core::gaussian::{overlap, GaussianShape};
use classicality_core::numerics::Sense;
use classicality_core::CriterionOutcome;

use crate::config::{Format, RunConfig, SchemeSet, Task};
use crate::output::{sig12, to_json, write_atomic, Table};
use crate::tables::{self, TableRow, QUANTITIES};
use crate::CliError;

pub struct Artifact {
    pub data: Vec<u8>,
    pub summary: Vec<String>,
}

/// Runs `cfg`, writes the data file and the config echo, and returns the
/// summary lines.
pub fn run(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    cfg.validate()?;
    let artifact = execute(cfg)?;
    write_atomic(&cfg.out, &artifact.data)?;
    write_atomic(&cfg.echo_path(), cfg.to_json().as_bytes())?;
    Ok(artifact.summary)
}

pub fn execute(cfg: &RunConfig) -> Result<Artifact, CliError> {
    match &cfg.task {
        Task::Sieve { model, family, grid, times, drift_tol } => {
            let drift = criteria::sieve_drift(model, *family, grid, times, *drift_tol)?;
            let mut summary: Vec<String> =
                drift.per_time.iter().map(|(t, r)| format!("t={} {}", sig12(*t), describe_opt(r))).collect();
            summary.push(format!(
                "argmax drift over t: {} ({})",
                sig12(drift.max_shift),
                if drift.drifted { "exceeds tolerance" } else { "within tolerance" }
            ));
            let data = match cfg.format {
                Format::Json => to_json(&drift),
                Format::Csv => {
                    let first = &drift.per_time[0].1;
                    let mut table = Table::new(first.axes.iter().cloned().chain(["t".into(), "purity".into()]));
                    for (t, r) in &drift.per_time {
                        for p in &r.points {
                            let mut row: Vec<String> = p.at.iter().map(|&x| sig12(x)).collect();
                            row.push(sig12(*t));
                            row.push(sig12(p.value.number()));
                            table.push(row);
                        }
                    }
                    table.to_csv()?
                }
            };
            Ok(Artifact { data, summary })
        }
        Task::Criterion { model, criterion, schemes } => match schemes {
            SchemeSet::Single(shape) => single(cfg.format, model, criterion, shape),
            SchemeSet::Grid { grid, refine_levels } => {
                let res = criteria::scheme_sweep(criterion, model, grid, *refine_levels)?;
                let summary = vec![describe_opt(&res)];
                let data = match cfg.format {
                    Format::Json => to_json(&res),
                    Format::Csv => sweep_csv(&res)?,
                };
                Ok(Artifact { data, summary })
            }
        },
        Task::Stationary { model, scheme } => {
            let shape = model.stationary(scheme)?;
            let rec = StationaryRecord::new(&shape)?;
            let summary = vec![format!(
                "alpha_ss={} beta_ss={} gamma_ss={} purity={}",
                sig12(rec.alpha_ss),
                sig12(rec.beta_ss),
                sig12(rec.gamma_ss),
                sig12(rec.purity)
            )];
            Ok(Artifact { data: record(cfg.format, &rec)?, summary })
        }
        Task::Overlap { model, a, b } => {
            let (sa, sb) = (model.stationary(a)?, model.stationary(b)?);
            let rec = OverlapRecord {
                overlap: overlap(&sa, &sb)?,
                purity_a: sa.det().max(0.0).sqrt(),
                purity_b: sb.det().max(0.0).sqrt(),
                overlap_a_coherent: overlap(&sa, &GaussianShape::COHERENT)?,
                overlap_b_coherent: overlap(&sb, &GaussianShape::COHERENT)?,
            };
            let summary = vec![format!(
                "overlap={} (with coherent state: {}, {})",
                sig12(rec.overlap),
                sig12(rec.overlap_a_coherent),
                sig12(rec.overlap_b_coherent)
            )];
            Ok(Artifact { data: record(cfg.format, &rec)?, summary })
        }
        Task::Tables { temperatures, phis } => {
            let rows = tables::compute(temperatures, phis)?;
            let summary = vec![describe_tables(&rows)];
            let data = match cfg.format {
                Format::Json => to_json(&rows),
                Format::Csv => tables_csv(&rows)?,
            };
            Ok(Artifact { data, summary })
        }
    }
}

fn single(format: Format, model: &Model, criterion: &Criterion, shape: &SchemeShape) -> Result<Artifact, CliError> {
    let outcome = criterion.evaluate(model, shape)?;
    let (names, at): (Vec<&str>, Vec<f64>) = match *shape {
        SchemeShape::Osc { s } => (vec!["s"], vec![s]),
        SchemeShape::Qbm { r, phi } => (vec!["r", "phi"], vec![r, phi]),
    };
    let summary = vec![format!("{} value={}", outcome.status(), sig12(SweepValue::Outcome(outcome).number()))];
    let data = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Single<'a> {
                scheme: &'a SchemeShape,
                outcome: CriterionOutcome,
            }
            to_json(&Single { scheme: shape, outcome })
        }
        Format::Csv => {
            let mut table = Table::new(names.into_iter().chain(["value", "status"]));
            let mut row: Vec<String> = at.iter().map(|&x| sig12(x)).collect();
            row.push(sig12(SweepValue::Outcome(outcome).number()));
            row.push(outcome.status().into());
            table.push(row);
            table.to_csv()?
        }
    };
    Ok(Artifact { data, summary })
}

fn describe_opt(res: &SweepResult) -> String {
    let word = match res.sense {
        Sense::Max => "argmax",
        Sense::Min => "argmin",
    };
    match &res.argopt {
        None => format!("{word}: none (no admissible point)"),
        Some(p) => {
            let coords: Vec<String> = res.axes.iter().zip(&p.at).map(|(n, x)| format!("{n}={}", sig12(*x))).collect();
            let status = p.value.status().map(|s| format!(" ({s})")).unwrap_or_default();
            format!("{word} {} value={}{status}", coords.join(" "), sig12(p.value.number()))
        }
    }
}

fn sweep_csv(res: &SweepResult) -> Result<Vec<u8>, CliError> {
    let mut table = Table::new(res.axes.iter().cloned().chain(["value".into(), "status".into()]));
    for p in &res.points {
        let mut row: Vec<String> = p.at.iter().map(|&x| sig12(x)).collect();
        row.push(sig12(p.value.number()));
        row.push(p.value.status().unwrap_or("finite").into());
        table.push(row);
    }
    table.to_csv()
}

#[derive(Serialize)]
struct StationaryRecord {
    alpha_ss: f64,
    beta_ss: f64,
    gamma_ss: f64,
    dx: f64,
    dp: f64,
    cxp: f64,
    purity: f64,
}

impl StationaryRecord {
    fn new(shape: &GaussianShape) -> Result<StationaryRecord, CliError> {
        let m = shape.moments()?;
        Ok(StationaryRecord {
            alpha_ss: shape.alpha,
            beta_ss: shape.beta,
            gamma_ss: shape.gamma,
            dx: m.dx,
            dp: m.dp,
            cxp: m.cxp,
            purity: shape.purity()?,
        })
    }
}

#[derive(Serialize)]
struct OverlapRecord {
    overlap: f64,
    purity_a: f64,
    purity_b: f64,
    overlap_a_coherent: f64,
    overlap_b_coherent: f64,
}

/// A flat record as JSON, or as a one-row CSV with its field names as header.
fn record<T: Serialize>(format: Format, rec: &T) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => Ok(to_json(rec)),
        Format::Csv => {
            let serde_json::Value::Object(map) = serde_json::to_value(rec).expect("record serialises") else {
                unreachable!("records are structs")
            };
            let mut table = Table::new(map.keys().cloned());
            table.push(map.values().map(|v| sig12(v.as_f64().unwrap_or(f64::NAN))).collect());
            table.to_csv()
        }
    }
}

fn tables_csv(rows: &[TableRow]) -> Result<Vec<u8>, CliError> {
    let mut table = Table::new(["T", "phi", "quantity", "value", "reference", "rel_error"]);
    for r in rows {
        for (i, q) in QUANTITIES.iter().enumerate() {
            let opt = |v: Option<[f64; 6]>| v.map(|a| sig12(a[i])).unwrap_or_default();
            table.push(vec![
                sig12(r.temperature),
                sig12(r.phi),
                q.to_string(),
                sig12(r.values[i]),
                opt(r.reference),
                opt(r.rel_error),
            ]);
        }
    }
    table.to_csv()
}

fn describe_tables(rows: &[TableRow]) -> String {
    let errs: Vec<(f64, &TableRow, &str)> = rows
        .iter()
        .filter_map(|r| r.rel_error.map(|e| (r, e)))
        .flat_map(|(r, e)| e.into_iter().zip(QUANTITIES).map(move |(x, q)| (x, r, q)))
        .collect();
    let Some(&(worst, row, q)) = errs.iter().max_by(|a, b| a.0.total_cmp(&b.0)) else {
        return format!("{} rows, no reference values to compare", rows.len());
    };
    let over = errs.iter().filter(|(e, _, _)| *e > 0.02).count();
    format!(
        "{} rows; {over} of {} reference cells differ by more than 2%; worst {q} at T={} phi={}: {}",
        rows.len(),
        errs.len(),
        sig12(row.temperature),
        sig12(row.phi),
        sig12(worst)
    )
}

/// Scheme descriptor for a stationary or overlap run.
pub fn qbm_scheme(eta: f64, r: f64, phi: f64) -> Result<Scheme, CliError> {
    Ok(SchemeShape::Qbm { r, phi }.with_eta(eta)?)
}
