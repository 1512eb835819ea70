//! Adaptive per-segment selection versus a fixed quality ladder.
//!
//! The ladder baseline picks one level and streams every segment at it —
//! the best such level is the highest-VMAF column whose total download fits
//! the cap. The adaptive side is the exact per-segment optimum at the same
//! cap. Caps where a side has no feasible answer report that side as absent
//! rather than failing the run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DataBudget, SegmentTable};
use crate::solvers::mckp_oracle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub d_max_mb: f64,
    /// Per-segment labels of the adaptive optimum, if the cap is feasible.
    pub balance_choices: Option<Vec<String>>,
    pub balance_vmaf: Option<f64>,
    pub balance_data_mb: Option<f64>,
    /// Label of the best fixed level that fits, if any does.
    pub ladder_choice: Option<String>,
    pub ladder_vmaf: Option<f64>,
    pub ladder_data_mb: Option<f64>,
    /// `balance_vmaf - ladder_vmaf` when both sides are feasible.
    pub vmaf_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderComparison {
    pub unit_mb: f64,
    pub rows: Vec<LadderRow>,
}

/// Highest-VMAF level whose column sum fits the cap (smallest level index on
/// a VMAF tie), with its totals.
fn best_ladder_level(table: &SegmentTable, cap: f64) -> Option<(usize, f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for level in 0..table.num_levels() {
        let mut vmaf = 0.0;
        let mut data = 0.0;
        for segment in 0..table.num_segments() {
            let v = table.variant(segment, level);
            vmaf += v.vmaf;
            data += v.data_mb;
        }
        if data <= cap + 1e-9 && best.map_or(true, |(_, bv, _)| vmaf > bv) {
            best = Some((level, vmaf, data));
        }
    }
    best
}

pub fn ladder_compare(
    table: &SegmentTable,
    caps: &[f64],
    unit_mb: f64,
) -> Result<LadderComparison> {
    let mut rows = Vec::with_capacity(caps.len());
    for &cap in caps {
        let budget = DataBudget::new(cap, unit_mb)?;
        let balance = match mckp_oracle(table, &budget) {
            Ok(sol) => Some(sol),
            Err(Error::Infeasible { .. }) => None,
            Err(e) => return Err(e),
        };
        let ladder = best_ladder_level(table, cap);
        let vmaf_gain = match (&balance, &ladder) {
            (Some(b), Some((_, lv, _))) => Some(b.total_vmaf - lv),
            _ => None,
        };
        rows.push(LadderRow {
            d_max_mb: cap,
            balance_choices: balance.as_ref().map(|b| {
                b.choices
                    .iter()
                    .enumerate()
                    .map(|(segment, &level)| table.variant(segment, level).label.clone())
                    .collect()
            }),
            balance_vmaf: balance.as_ref().map(|b| b.total_vmaf),
            balance_data_mb: balance.as_ref().map(|b| b.total_data_mb),
            ladder_choice: ladder.map(|(level, _, _)| table.variant(0, level).label.clone()),
            ladder_vmaf: ladder.map(|(_, vmaf, _)| vmaf),
            ladder_data_mb: ladder.map(|(_, _, data)| data),
            vmaf_gain,
        });
    }
    Ok(LadderComparison { unit_mb, rows })
}
