//! Report serialization. JSON carries the full structures; CSV flattens to
//! one row per entry with stable headers. Numbers use Rust's shortest
//! round-trip formatting, so equal inputs always produce byte-equal files.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::ladder::LadderComparison;
use crate::experiments::landscape::LandscapeGrid;
use crate::experiments::sweep::ProbabilityReport;
use crate::experiments::tune::TuningReport;

/// Pretty JSON plus a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl ProbabilityReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "d_max_mb",
            "method",
            "oracle_vmaf",
            "p_valid_mean",
            "p_valid_std",
            "p_optimal_mean",
            "p_optimal_std",
            "best_vmaf",
        ])?;
        for row in &self.rows {
            csv.write_record([
                num(row.d_max_mb),
                row.method.to_string(),
                num(row.oracle_vmaf),
                num(row.p_valid_mean),
                num(row.p_valid_std),
                num(row.p_optimal_mean),
                num(row.p_optimal_std),
                opt_num(row.best_vmaf),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

impl LandscapeGrid {
    /// Energy matrix, row-major: first column names the row's level, the
    /// header names the column levels.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["level".to_string()];
        header.extend(self.col_labels.iter().cloned());
        csv.write_record(&header)?;
        let m = self.col_labels.len();
        for (i, row_label) in self.row_labels.iter().enumerate() {
            let mut record = vec![row_label.clone()];
            for j in 0..m {
                record.push(num(self.cells[i * m + j].energy));
            }
            csv.write_record(&record)?;
        }
        csv.flush()?;
        Ok(())
    }
}

impl LadderComparison {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "d_max_mb",
            "balance_choices",
            "balance_vmaf",
            "balance_data_mb",
            "ladder_choice",
            "ladder_vmaf",
            "ladder_data_mb",
            "vmaf_gain",
        ])?;
        for row in &self.rows {
            csv.write_record([
                num(row.d_max_mb),
                row.balance_choices.as_ref().map(|c| c.join("|")).unwrap_or_default(),
                opt_num(row.balance_vmaf),
                opt_num(row.balance_data_mb),
                row.ladder_choice.clone().unwrap_or_default(),
                opt_num(row.ladder_vmaf),
                opt_num(row.ladder_data_mb),
                opt_num(row.vmaf_gain),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

impl TuningReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["mu1", "mu2", "mu3", "p_valid_mean", "p_optimal_mean", "selected"])?;
        for (i, row) in self.rows.iter().enumerate() {
            csv.write_record([
                num(row.mu1),
                num(row.mu2),
                num(row.mu3),
                num(row.p_valid_mean),
                num(row.p_optimal_mean),
                (if i == self.selected { "1" } else { "0" }).to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ladder::ladder_compare;
    use crate::experiments::landscape::energy_landscape;
    use crate::experiments::sweep::{probability_sweep, SweepParams};
    use crate::formulation::PenaltyConfig;
    use crate::instance::{reference_instance, DataBudget, DEFAULT_UNIT_MB};

    fn csv_string(write: impl FnOnce(&mut Vec<u8>)) -> String {
        let mut buf = Vec::new();
        write(&mut buf);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn landscape_csv_shape() {
        let t = reference_instance();
        let budget = DataBudget::with_default_unit(10.0).unwrap();
        let grid = energy_landscape(&t, &budget, &PenaltyConfig::dpa()).unwrap();
        let text = csv_string(|b| grid.write_csv(b).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "level,1080p,720p,480p,360p");
        assert!(lines[1].starts_with("1080p,"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 5);
        }
    }

    #[test]
    fn ladder_csv_blanks_infeasible_cells() {
        let t = reference_instance();
        let cmp = ladder_compare(&t, &[2.0, 10.0], DEFAULT_UNIT_MB).unwrap();
        let text = csv_string(|b| cmp.write_csv(b).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "d_max_mb,balance_choices,balance_vmaf,balance_data_mb,ladder_choice,ladder_vmaf,ladder_data_mb,vmaf_gain"
        );
        assert_eq!(lines[1], "2,,,,,,,");
        assert!(lines[2].starts_with("10,720p|480p,183.72,9.52,480p,"));
    }

    #[test]
    fn sweep_csv_and_json_round_out() {
        let t = reference_instance();
        let params = SweepParams { shots: 20, trials: 1, sweeps: 30, seed: 8 };
        let report =
            probability_sweep(&t, &[10.0], DEFAULT_UNIT_MB, &[PenaltyConfig::dpa()], &params)
                .unwrap();
        let text = csv_string(|b| report.write_csv(b).unwrap());
        assert!(text.starts_with(
            "d_max_mb,method,oracle_vmaf,p_valid_mean,p_valid_std,p_optimal_mean,p_optimal_std,best_vmaf\n"
        ));
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("10,dpa,183.72,"));
        let mut json = Vec::new();
        write_json(&mut json, &report).unwrap();
        let text = String::from_utf8(json).unwrap();
        assert!(text.ends_with("}\n"));
        let back: ProbabilityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
