use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plan::SweepAxis;
use super::trial::TrialRecord;
use super::Aggregate;
use crate::error::{Error, Result};

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 18] = [
    "cell_index",
    "trial_index",
    "seed",
    "method",
    "m",
    "n",
    "d",
    "s",
    "s_prime",
    "sigma",
    "lambda_or_mu_or_eps",
    "error_l2",
    "error_e",
    "objective",
    "bound",
    "feasibility_margin",
    "converged",
    "wall_time_ms",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" => Ok(ReportFormat::Plotdata),
            other => Err(Error::Parse(format!("unknown report format {other:?}; expected csv, json or plotdata"))),
        }
    }
}

pub fn to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    parse_csv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    columns: &'a [&'a str],
    records: &'a [TrialRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregate: Option<&'a Aggregate>,
}

pub fn to_json(records: &[TrialRecord], aggregate: Option<&Aggregate>) -> Result<String> {
    let report = JsonReport { columns: &CSV_COLUMNS, records, aggregate };
    Ok(serde_json::to_string_pretty(&report)?)
}

fn axis_value(r: &TrialRecord, axis: SweepAxis) -> f64 {
    match axis {
        SweepAxis::M => r.m as f64,
        SweepAxis::S => r.s as f64,
        SweepAxis::Sigma => r.sigma,
        SweepAxis::SPrime => r.s_prime as f64,
    }
}

/// First axis taking more than one value across the records (`m` if none).
pub fn infer_axis(records: &[TrialRecord]) -> SweepAxis {
    [SweepAxis::M, SweepAxis::S, SweepAxis::Sigma, SweepAxis::SPrime]
        .into_iter()
        .find(|&a| {
            let first = records.first().map(|r| axis_value(r, a));
            records.iter().any(|r| Some(axis_value(r, a)) != first)
        })
        .unwrap_or(SweepAxis::M)
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}

/// Blocks of `(x, median error_l2)` pairs sorted by `x`, one block per method
/// and combination of the remaining axes.
pub fn to_plotdata(records: &[TrialRecord], axis: Option<SweepAxis>) -> String {
    let axis = axis.unwrap_or_else(|| infer_axis(records));
    let others: Vec<SweepAxis> = [SweepAxis::M, SweepAxis::S, SweepAxis::Sigma, SweepAxis::SPrime]
        .into_iter()
        .filter(|&a| a != axis)
        .collect();
    // Key: method, then the other axis values as exact bit patterns.
    let mut blocks: BTreeMap<(String, Vec<u64>), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in records {
        let key = (
            r.method.name().to_string(),
            others.iter().map(|&a| axis_value(r, a).to_bits()).collect(),
        );
        // Axis values are nonnegative, so their bit patterns sort numerically.
        let x = axis_value(r, axis);
        blocks.entry(key).or_default().entry(x.to_bits()).or_default().push(r.error_l2);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# sweep axis: {}", axis.name());
    for (i, ((method, fixed), points)) in blocks.into_iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = write!(out, "# method: {method}");
        for (a, bits) in others.iter().zip(&fixed) {
            let _ = write!(out, "  {}: {}", a.name(), f64::from_bits(*bits));
        }
        out.push('\n');
        let _ = writeln!(out, "# x = {}, y = median error_l2", axis.name());
        for (bits, ys) in points {
            let mut finite: Vec<f64> = ys.into_iter().filter(|v| v.is_finite()).collect();
            let _ = writeln!(out, "{} {:?}", f64::from_bits(bits), median(&mut finite));
        }
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_report(
    records: &[TrialRecord],
    aggregate: Option<&Aggregate>,
    format: ReportFormat,
    path: impl AsRef<Path>,
    axis: Option<SweepAxis>,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::invalid("report needs at least one record"));
    }
    let text = match format {
        ReportFormat::Csv => to_csv(records)?,
        ReportFormat::Json => to_json(records, aggregate)?,
        ReportFormat::Plotdata => to_plotdata(records, axis),
    };
    write_text(path.as_ref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::plan::MethodKind;

    fn record(cell: usize, m: usize, err: f64) -> TrialRecord {
        TrialRecord {
            cell_index: cell,
            trial_index: 0,
            seed: 0xDEAD_BEEF_0123_4567,
            method: MethodKind::Ads,
            m,
            n: 16,
            d: 16,
            s: 2,
            s_prime: 0,
            sigma: 0.05,
            lambda_or_mu_or_eps: 0.1 + 1e-17 * cell as f64,
            error_l2: err,
            error_e: if cell % 2 == 0 { None } else { Some(1e-300) },
            objective: 1.0 / 3.0,
            bound: if cell == 1 { Some(12.5) } else { None },
            feasibility_margin: -2.5e-12,
            converged: cell != 2,
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn header_matches_schema() {
        let csv = to_csv(&[record(0, 8, 0.1)]).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(to_csv(&[]).unwrap().trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let records: Vec<_> = (0..4).map(|c| record(c, 8 + c, 0.1 * c as f64 + 1e-9)).collect();
        let mut with_nan = records.clone();
        with_nan[2].error_l2 = f64::NAN;
        for rs in [records, with_nan] {
            let text = to_csv(&rs).unwrap();
            let back = parse_csv(&text).unwrap();
            assert_eq!(to_csv(&back).unwrap(), text);
        }
    }

    #[test]
    fn plotdata_sorted_by_x() {
        let records = vec![record(0, 32, 0.3), record(1, 8, 0.9), record(2, 16, 0.5), record(3, 8, 0.7)];
        let text = to_plotdata(&records, None);
        assert!(text.starts_with("# sweep axis: m"));
        let xs: Vec<f64> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .map(|l| l.split(' ').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(xs, vec![8.0, 16.0, 32.0]);
        assert!(text.contains("8 0.8"));
    }

    #[test]
    fn unwritable_path_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let target = blocker.join("out.csv");
        let err = emit_report(&[record(0, 8, 0.1)], None, ReportFormat::Csv, &target, None).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
