//! CSV series for plotting. Numbers use Rust's shortest round-trip
//! formatting so files reload bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ldprice_core::{DispatchSolution, DurationPrice};

use crate::pipeline::{RunError, RunOutput, TOTAL_ROW};

/// Uniform sample count of the time and duration grids before breakpoints
/// are merged in.
pub const GRID_POINTS: usize = 501;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const DURATION_FILE: &str = "duration.csv";
pub const SETTLEMENT_FILE: &str = "settlement.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct TimeRow {
    pub t: f64,
    pub load: f64,
    pub lambda: f64,
    /// `None` past `T − m_floor` or when duration pricing was not run.
    pub pi_time: Option<f64>,
    pub outputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationRow {
    pub m: f64,
    pub pi_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub plant_ids: Vec<String>,
    pub time: Vec<TimeRow>,
    /// Empty unless duration pricing was run.
    pub duration: Vec<DurationRow>,
}

impl Series {
    pub fn build(
        primary: &DispatchSolution,
        duration: Option<(&DispatchSolution, &DurationPrice)>,
    ) -> Self {
        let horizon = primary.horizon();
        let mut ts = uniform(horizon);
        ts.extend_from_slice(primary.times());
        if let Some((sol, _)) = duration {
            ts.extend_from_slice(sol.times());
        }
        let ts = sorted_unique(ts, horizon);

        let time = ts
            .iter()
            .map(|&t| TimeRow {
                t,
                load: primary.load().value_at(t),
                lambda: primary.lambda().value_at(t),
                pi_time: duration.and_then(|(_, price)| price.time_price(t).ok()),
                outputs: primary.outputs().iter().map(|p| p.value_at(t)).collect(),
            })
            .collect();

        let duration = match duration {
            None => Vec::new(),
            Some((sol, price)) => {
                let mut ms = uniform(horizon);
                ms.extend(sol.times().iter().map(|&t| horizon - t));
                ms.retain(|&m| m > price.m_floor());
                sorted_unique(ms, horizon)
                    .into_iter()
                    .filter_map(|m| {
                        let pi_measure = price.measure_price(m).ok()?;
                        Some(DurationRow { m, pi_measure })
                    })
                    .collect()
            }
        };

        Series {
            plant_ids: primary
                .plants()
                .iter()
                .map(|p| p.id().to_string())
                .collect(),
            time,
            duration,
        }
    }
}

fn uniform(horizon: f64) -> Vec<f64> {
    let last = GRID_POINTS - 1;
    (0..GRID_POINTS)
        .map(|i| {
            if i == last {
                horizon
            } else {
                horizon * i as f64 / last as f64
            }
        })
        .collect()
}

/// Sorts and drops points closer than `1e-12·T` to their predecessor.
fn sorted_unique(mut xs: Vec<f64>, horizon: f64) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    let tol = 1e-12 * horizon;
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        match out.last() {
            Some(&prev) if x - prev <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

pub fn timeseries_csv(series: &Series) -> String {
    let mut s = String::from("t,load,lambda,pi_time");
    for id in &series.plant_ids {
        let _ = write!(s, ",P_{id}");
    }
    s.push('\n');
    for row in &series.time {
        let _ = write!(s, "{},{},{},", row.t, row.load, row.lambda);
        if let Some(pi) = row.pi_time {
            let _ = write!(s, "{pi}");
        }
        for p in &row.outputs {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

pub fn duration_csv(series: &Series) -> String {
    let mut s = String::from("m,pi_measure\n");
    for row in &series.duration {
        let _ = writeln!(s, "{},{}", row.m, row.pi_measure);
    }
    s
}

/// Plant rows per mechanism, each block closed by a `total` market row.
pub fn settlement_csv(out: &RunOutput) -> String {
    let mut s = String::from("mechanism,plant,cost,revenue,profit,profit_rate\n");
    for report in &out.reports {
        let mech = report.mechanism.as_str();
        for p in &report.plants {
            let _ = write!(
                s,
                "{mech},{},{},{},{},",
                p.plant, p.generation_cost, p.revenue, p.profit
            );
            push_opt(&mut s, p.profit_rate);
        }
        let _ = write!(
            s,
            "{mech},{TOTAL_ROW},{},{},{},",
            report.total_cost, report.total_revenue, report.total_profit
        );
        push_opt(&mut s, report.market_profit_rate);
    }
    s
}

fn push_opt(s: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(s, "{v}");
    }
    s.push('\n');
}

/// Writes the three CSV files into `dir`, creating it if needed.
pub fn emit_series(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let io_err = |path: &Path, e: std::io::Error| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let files = [
        (TIMESERIES_FILE, timeseries_csv(&out.series)),
        (DURATION_FILE, duration_csv(&out.series)),
        (SETTLEMENT_FILE, settlement_csv(out)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run, RunRequest};
    use ldprice_core::builtin_case_study;

    fn case() -> RunOutput {
        run(&builtin_case_study(), &RunRequest::default()).unwrap()
    }

    fn parse_row(line: &str) -> Vec<f64> {
        line.split(',').map(|c| c.parse().unwrap()).collect()
    }

    fn close(row: &[f64], expect: &[f64]) -> bool {
        row.len() == expect.len()
            && row
                .iter()
                .zip(expect)
                .all(|(a, b)| (a - b).abs() < 1e-12 * b.abs().max(1.0))
    }

    #[test]
    fn timeseries_first_row() {
        let csv = timeseries_csv(&case().series);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("t,load,lambda,pi_time,P_plant1,P_plant2,P_plant3")
        );
        let first = parse_row(lines.next().unwrap());
        assert!(
            close(&first, &[0.0, 350.0, 0.32, 0.32, 250.0, 90.0, 10.0]),
            "{first:?}"
        );
        assert_eq!(csv.lines().count(), 1 + GRID_POINTS);
    }

    #[test]
    fn pi_time_blank_past_floor() {
        let csv = timeseries_csv(&case().series);
        let last = csv.lines().last().unwrap();
        let cells: Vec<&str> = last.split(',').collect();
        assert_eq!(cells[0], "1");
        assert_eq!(cells[3], "");
        let second_last = csv.lines().rev().nth(1).unwrap();
        assert!(!second_last.split(',').nth(3).unwrap().is_empty());
    }

    #[test]
    fn duration_last_row_is_anchor() {
        let csv = duration_csv(&case().series);
        assert_eq!(csv.lines().next(), Some("m,pi_measure"));
        let last = parse_row(csv.lines().last().unwrap());
        assert_eq!(last[0], 1.0);
        assert!((last[1] - 0.32).abs() < 1e-12);
        let first = parse_row(csv.lines().nth(1).unwrap());
        assert!(first[0] > 1e-6);
    }

    #[test]
    fn settlement_rows() {
        let csv = settlement_csv(&case());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 4);
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(&cells[..2], &["spot", "plant1"]);
        let nums: Vec<f64> = cells[2..].iter().map(|c| c.parse().unwrap()).collect();
        assert!(close(
            &nums,
            &[
                139.61666666666667,
                247.33333333333334,
                107.71666666666667,
                107.71666666666667 / 139.61666666666667
            ]
        ));
        assert!(lines[4].starts_with("spot,total,"));
        assert!(lines[5].starts_with("duration,plant1,"));
    }

    #[test]
    fn grids_contain_breakpoints() {
        let out = case();
        for t in [0.0, 0.5, 1.0] {
            assert!(out.series.time.iter().any(|r| r.t == t));
        }
        let mut ts = vec![0.3, 0.1, 0.1 + 1e-15, 0.2];
        ts = sorted_unique(ts, 1.0);
        assert_eq!(ts, vec![0.1, 0.2, 0.3]);
    }
}
