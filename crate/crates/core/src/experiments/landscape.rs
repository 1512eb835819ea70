//! Exhaustive energy surface over the quality choices of a two-segment
//! instance.
//!
//! Each cell fixes one level per segment and evaluates the penalized model
//! energy. Slack models have extra degrees of freedom the plot must project
//! out; a cell's energy is taken at the slack register value minimizing the
//! penalty for that cell's data usage, so cells within budget show a clean
//! zero-penalty surface and over-budget cells show the residual penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{build_model, slack_bit_count, PenaltyConfig, PenaltyMethod};
use crate::instance::{DataBudget, SegmentTable};
use crate::qubo::{QuboModel, VarRole};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    /// Level chosen for the first segment (grid row).
    pub row_level: usize,
    /// Level chosen for the second segment (grid column).
    pub col_level: usize,
    pub energy: f64,
    pub total_vmaf: f64,
    pub total_data_mb: f64,
    pub within_budget: bool,
    /// Penalty-minimizing slack register value (slack method only).
    pub slack_units: Option<u64>,
}

/// Row-major grid: rows follow the first segment's levels, columns the
/// second's. `min_row`/`min_col` locate the lowest-energy cell (first in
/// row-major order on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub method: PenaltyMethod,
    pub d_max_mb: f64,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<LandscapeCell>,
    pub min_row: usize,
    pub min_col: usize,
}

impl LandscapeGrid {
    pub fn cell(&self, row: usize, col: usize) -> &LandscapeCell {
        &self.cells[row * self.col_labels.len() + col]
    }

    pub fn min_cell(&self) -> &LandscapeCell {
        self.cell(self.min_row, self.min_col)
    }
}

fn var_index(model: &QuboModel, want: VarRole) -> Result<usize> {
    model
        .roles()
        .iter()
        .position(|r| *r == want)
        .ok_or(Error::RegistryMismatch { index: model.num_vars() })
}

/// Evaluates every (level, level) pair of a two-segment instance.
pub fn energy_landscape(
    table: &SegmentTable,
    budget: &DataBudget,
    config: &PenaltyConfig,
) -> Result<LandscapeGrid> {
    if table.num_segments() != 2 {
        return Err(Error::LandscapeShape(table.num_segments()));
    }
    let model = build_model(table, budget, config)?;
    let m = table.num_levels();
    let decision: Vec<Vec<usize>> = (0..2)
        .map(|segment| {
            (0..m)
                .map(|level| var_index(&model, VarRole::Decision { segment, level }))
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let slack_vars: Option<(Vec<usize>, u64)> = match config.method {
        PenaltyMethod::Dpa => None,
        PenaltyMethod::Slack => {
            let max_units = budget.max_units()?;
            let k = slack_bit_count(max_units, config.slack_bits);
            let vars = (0..k)
                .map(|bit| var_index(&model, VarRole::Slack { bit }))
                .collect::<Result<Vec<usize>>>()?;
            Some((vars, max_units))
        }
    };
    let mut cells = Vec::with_capacity(m * m);
    let (mut min_row, mut min_col, mut min_energy) = (0usize, 0usize, f64::INFINITY);
    for i in 0..m {
        for j in 0..m {
            let mut x = vec![false; model.num_vars()];
            x[decision[0][i]] = true;
            x[decision[1][j]] = true;
            let a = table.variant(0, i);
            let b = table.variant(1, j);
            let total_vmaf = a.vmaf + b.vmaf;
            let total_data = a.data_mb + b.data_mb;
            let slack_units = if let Some((vars, max_units)) = &slack_vars {
                let used = budget.units(a.data_mb) + budget.units(b.data_mb);
                let residual = max_units.saturating_sub(used);
                let top = (1u64 << vars.len()) - 1;
                let s = residual.min(top);
                for (bit, &var) in vars.iter().enumerate() {
                    x[var] = (s >> bit) & 1 == 1;
                }
                Some(s)
            } else {
                None
            };
            let energy = model.energy(&x)?;
            if energy < min_energy {
                min_energy = energy;
                min_row = i;
                min_col = j;
            }
            cells.push(LandscapeCell {
                row_level: i,
                col_level: j,
                energy,
                total_vmaf,
                total_data_mb: total_data,
                within_budget: total_data <= budget.d_max_mb + 1e-9,
                slack_units,
            });
        }
    }
    let labels = |segment: usize| -> Vec<String> {
        (0..m).map(|l| table.variant(segment, l).label.clone()).collect()
    };
    Ok(LandscapeGrid {
        method: config.method,
        d_max_mb: budget.d_max_mb,
        row_labels: labels(0),
        col_labels: labels(1),
        cells,
        min_row,
        min_col,
    })
}
