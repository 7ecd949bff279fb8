//! Trajectory, MSD and snapshot files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_rational::Rational64;

use super::IoError;
use crate::dynamics::{Record, Trajectory};
use crate::metrics::{MsdResult, Series};
use crate::system::ParticleSystem;

pub const TRAJECTORY_HEADER: &str = "t,centroid_x,centroid_y,edges,lit_count";
pub const MSD_HEADER: &str = "lag,msd";

/// Decimal with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

fn fraction(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn trajectory_csv(records: &[Record]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            significant(r.centroid_x, 12),
            fraction(r.centroid_y),
            r.edges,
            r.lit_count
        )
        .unwrap();
    }
    out
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<(), IoError> {
    write(path, &trajectory_csv(&trajectory.records))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<Record>, IoError> {
    let bad = |line: usize, reason: &str| IoError::Csv { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRAJECTORY_HEADER => {}
        _ => return Err(bad(1, "expected header t,centroid_x,centroid_y,edges,lit_count")),
    }
    let mut out: Vec<Record> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(bad(i + 1, "expected 5 fields"));
        }
        let t: u64 = f[0].parse().map_err(|_| bad(i + 1, "bad t"))?;
        if out.last().is_some_and(|r| r.t >= t) {
            return Err(bad(i + 1, "t must be strictly increasing"));
        }
        out.push(Record {
            t,
            centroid_x: f[1].parse().map_err(|_| bad(i + 1, "bad centroid_x"))?,
            centroid_y: f[2].parse().map_err(|_| bad(i + 1, "bad centroid_y"))?,
            edges: f[3].parse().map_err(|_| bad(i + 1, "bad edges"))?,
            lit_count: f[4].parse().map_err(|_| bad(i + 1, "bad lit_count"))?,
        });
    }
    if out.is_empty() {
        return Err(bad(2, "no rows"));
    }
    Ok(out)
}

pub fn read_series(path: &Path) -> Result<Series, IoError> {
    let records = parse_trajectory_csv(&read(path)?).map_err(|e| e.in_file(path))?;
    Ok(Series::new(
        records.iter().map(|r| r.t).collect(),
        records.iter().map(|r| (r.centroid_x, r.centroid_y_f64())).collect(),
    ))
}

pub fn msd_csv(result: &MsdResult) -> String {
    let mut out = String::from(MSD_HEADER);
    out.push('\n');
    for (lag, m) in result.lags.iter().zip(&result.msd) {
        writeln!(out, "{lag},{}", significant(*m, 12)).unwrap();
    }
    out
}

pub fn write_snapshot(path: &Path, system: &ParticleSystem) -> Result<(), IoError> {
    write(path, &system.to_snapshot())
}

pub fn read_snapshot(path: &Path) -> Result<ParticleSystem, IoError> {
    ParticleSystem::from_snapshot(&read(path)?).map_err(|e| IoError::Snapshot {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn write(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

pub fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(3f64.sqrt() / 4.0, 12), "0.433012701892");
        assert_eq!(significant(-12.5, 12), "-12.5000000000");
        assert_eq!(significant(123456789.0, 3), "123456789");
    }

    #[test]
    fn csv_round_trip() {
        let recs = vec![
            Record { t: 0, centroid_x: 0.0, centroid_y: Rational64::new(0, 1), edges: 3, lit_count: 2 },
            Record { t: 10, centroid_x: -0.25, centroid_y: Rational64::new(7, 6), edges: 2, lit_count: 3 },
        ];
        let text = trajectory_csv(&recs);
        assert!(text.starts_with("t,centroid_x,centroid_y,edges,lit_count\n0,0,0/1,3,2\n"));
        assert_eq!(parse_trajectory_csv(&text).unwrap(), recs);
        let swapped = text.replace("\n10,", "\n0,");
        assert!(matches!(parse_trajectory_csv(&swapped), Err(IoError::Csv { line: 3, .. })));
        assert!(parse_trajectory_csv("a,b\n").is_err());
    }
}
