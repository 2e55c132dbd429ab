use crate::error::{Error, Result};

use super::probe::GrowthReport;
use super::verify::VerifyReport;

/// Twelve significant digits in scientific notation.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

const HEADER: [&str; 9] = [
    "experiment_id",
    "n",
    "seed",
    "mixed_norm",
    "opnorm",
    "opnorm_exact",
    "ratio",
    "slope",
    "verdict",
];

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One line per (n, seed); slope and verdict are filled on the last line.
pub fn growth_csv(experiment_id: &str, report: &GrowthReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_err)?;
    let last = report.rows.len().saturating_sub(1);
    for (i, row) in report.rows.iter().enumerate() {
        let (slope, verdict) = if i == last {
            (format_sig12(report.slope), report.verdict.to_string())
        } else {
            (String::new(), String::new())
        };
        w.write_record([
            experiment_id.to_string(),
            row.n.to_string(),
            row.seed.to_string(),
            format_sig12(row.mixed_norm),
            format_sig12(row.opnorm),
            row.opnorm_exact.to_string(),
            format_sig12(row.ratio),
            slope,
            verdict,
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// One line per instance (`seed` holds the instance index); the last line's
/// verdict is `admissible` or `inadmissible`.
pub fn verify_csv(experiment_id: &str, report: &VerifyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(csv_err)?;
    let last = report.rows.len().saturating_sub(1);
    for (i, row) in report.rows.iter().enumerate() {
        let verdict = match (i == last, report.admissibility.admissible) {
            (false, _) => "",
            (true, true) => "admissible",
            (true, false) => "inadmissible",
        };
        w.write_record([
            experiment_id.to_string(),
            row.dims[0].to_string(),
            row.index.to_string(),
            format_sig12(row.mixed_norm),
            format_sig12(row.opnorm),
            row.opnorm_exact.to_string(),
            format_sig12(row.ratio),
            String::new(),
            verdict.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{GrowthPoint, GrowthRow, Verdict};
    use crate::opnorm::Method;

    #[test]
    fn sig12() {
        assert_eq!(format_sig12(std::f64::consts::SQRT_2), "1.41421356237e0");
        assert_eq!(format_sig12(0.0), "0.00000000000e0");
    }

    #[test]
    fn growth_layout() {
        let row = |n| GrowthRow {
            n,
            seed: 3,
            mixed_norm: 2.0,
            opnorm: 1.0,
            opnorm_exact: true,
            method: Method::ExactEnumeration,
            ratio: 2.0,
        };
        let report = GrowthReport {
            rows: vec![row(2), row(4)],
            points: vec![GrowthPoint { n: 2, ratio: 2.0 }, GrowthPoint { n: 4, ratio: 2.0 }],
            slope: 0.0,
            r_squared: 1.0,
            verdict: Verdict::Bounded,
            warnings: vec![],
        };
        let text = growth_csv("e1", &report).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "experiment_id,n,seed,mixed_norm,opnorm,opnorm_exact,ratio,slope,verdict");
        assert_eq!(lines[1], "e1,2,3,2.00000000000e0,1.00000000000e0,true,2.00000000000e0,,");
        assert_eq!(lines[2], "e1,4,3,2.00000000000e0,1.00000000000e0,true,2.00000000000e0,0.00000000000e0,bounded");
    }
}
