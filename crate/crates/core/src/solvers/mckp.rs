//! Exact oracles for the underlying selection problem: pick one level per
//! segment, maximize total VMAF, stay within the data budget.
//!
//! Two independent routes compute the optimum. The product search checks
//! every combination against the exact MB budget; the dynamic program works
//! on quantized integer units and scales past small instances.
//! [`mckp_oracle`] runs the DP and, whenever the instance is small enough,
//! the product search too, and insists they agree — a disagreement (only
//! possible when a quantization boundary separates the two resolutions)
//! surfaces as an error instead of a silently wrong "exact" answer.

use crate::error::{Error, Result};
use crate::instance::{DataBudget, SegmentTable};

/// Optimal one-per-segment selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MckpSolution {
    /// Chosen level index per segment.
    pub choices: Vec<usize>,
    pub total_vmaf: f64,
    pub total_data_mb: f64,
}

/// Combination count above which the product search refuses to run.
pub const PRODUCT_SEARCH_LIMIT: u128 = 1_000_000;

/// DP state-space cap (segments x capacity units).
const DP_CELL_LIMIT: u128 = 20_000_000;

/// Tolerance when cross-checking the two routes' optimum values.
pub const ORACLE_EPS: f64 = 1e-9;

fn infeasible(table: &SegmentTable, d_max_mb: f64) -> Error {
    Error::Infeasible { min_usage_mb: table.min_total_data(), d_max_mb }
}

fn totals(table: &SegmentTable, choices: &[usize]) -> (f64, f64) {
    let mut vmaf = 0.0;
    let mut data = 0.0;
    for (i, &j) in choices.iter().enumerate() {
        let v = table.variant(i, j);
        vmaf += v.vmaf;
        data += v.data_mb;
    }
    (vmaf, data)
}

/// Checks every combination against the exact MB budget. Ties on VMAF keep
/// the lexicographically smallest choice vector.
pub fn mckp_product_search(table: &SegmentTable, d_max_mb: f64) -> Result<MckpSolution> {
    let n = table.num_segments();
    let m = table.num_levels();
    let combos = (m as u128).pow(n as u32);
    if combos > PRODUCT_SEARCH_LIMIT {
        return Err(Error::TooLarge(format!(
            "product search over {combos} combinations (limit {PRODUCT_SEARCH_LIMIT})"
        )));
    }
    let mut choices = vec![0usize; n];
    let mut best: Option<MckpSolution> = None;
    loop {
        let (vmaf, data) = totals(table, &choices);
        if data <= d_max_mb && best.as_ref().map_or(true, |b| vmaf > b.total_vmaf) {
            best = Some(MckpSolution { choices: choices.clone(), total_vmaf: vmaf, total_data_mb: data });
        }
        // Lexicographic odometer: first combination visited among ties wins.
        let mut pos = n;
        loop {
            if pos == 0 {
                return best.ok_or_else(|| infeasible(table, d_max_mb));
            }
            pos -= 1;
            choices[pos] += 1;
            if choices[pos] < m {
                break;
            }
            choices[pos] = 0;
        }
    }
}

/// Dynamic program over quantized units. Exact at the quantized resolution;
/// ties on VMAF resolve to the lexicographically smallest choice vector.
pub fn mckp_dp(table: &SegmentTable, budget: &DataBudget) -> Result<MckpSolution> {
    let n = table.num_segments();
    let m = table.num_levels();
    let cap = budget.max_units()?;
    if (n as u128 + 1) * (cap as u128 + 1) > DP_CELL_LIMIT {
        return Err(Error::TooLarge(format!(
            "DP table of {} segments x {} units; use a coarser unit_mb",
            n, cap
        )));
    }
    let cap = cap as usize;
    let units: Vec<Vec<usize>> = table
        .segments()
        .iter()
        .map(|s| s.variants.iter().map(|v| budget.units(v.data_mb) as usize).collect())
        .collect();
    // best[i][w]: max VMAF from segments i.. with w units available.
    let width = cap + 1;
    let mut best = vec![f64::NEG_INFINITY; (n + 1) * width];
    for w in 0..width {
        best[n * width + w] = 0.0;
    }
    for i in (0..n).rev() {
        for w in 0..width {
            let mut cell = f64::NEG_INFINITY;
            for j in 0..m {
                let u = units[i][j];
                if u <= w {
                    let v = table.variant(i, j).vmaf + best[(i + 1) * width + (w - u)];
                    if v > cell {
                        cell = v;
                    }
                }
            }
            best[i * width + w] = cell;
        }
    }
    if best[cap] == f64::NEG_INFINITY {
        return Err(infeasible(table, budget.d_max_mb));
    }
    // Front-to-back reconstruction: the smallest level index that still
    // achieves the optimum gives the lexicographically smallest vector.
    let mut choices = Vec::with_capacity(n);
    let mut w = cap;
    for i in 0..n {
        let target = best[i * width + w];
        let mut picked = None;
        for j in 0..m {
            let u = units[i][j];
            if u <= w && table.variant(i, j).vmaf + best[(i + 1) * width + (w - u)] == target {
                picked = Some(j);
                break;
            }
        }
        let j = picked.expect("reconstruction follows a reachable DP cell");
        w -= units[i][j];
        choices.push(j);
    }
    let (total_vmaf, total_data_mb) = totals(table, &choices);
    Ok(MckpSolution { choices, total_vmaf, total_data_mb })
}

/// The cross-checked oracle: DP result, verified against the product search
/// whenever the combination count allows it.
pub fn mckp_oracle(table: &SegmentTable, budget: &DataBudget) -> Result<MckpSolution> {
    let dp = mckp_dp(table, budget);
    let product = match mckp_product_search(table, budget.d_max_mb) {
        Err(Error::TooLarge(_)) => None,
        other => Some(other),
    };
    match (dp, product) {
        (Ok(dp), None) => Ok(dp),
        (Ok(dp), Some(Ok(ps))) => {
            if (dp.total_vmaf - ps.total_vmaf).abs()
                > ORACLE_EPS * dp.total_vmaf.abs().max(ps.total_vmaf.abs()).max(1.0)
            {
                return Err(Error::OracleMismatch(format!(
                    "DP optimum {} vs product-search optimum {}",
                    dp.total_vmaf, ps.total_vmaf
                )));
            }
            Ok(dp)
        }
        (Err(Error::Infeasible { min_usage_mb, d_max_mb }), Some(Err(Error::Infeasible { .. })))
        | (Err(Error::Infeasible { min_usage_mb, d_max_mb }), None) => {
            Err(Error::Infeasible { min_usage_mb, d_max_mb })
        }
        (Ok(dp), Some(Err(Error::Infeasible { .. }))) => Err(Error::OracleMismatch(format!(
            "DP found {:?} feasible, product search found nothing within budget",
            dp.choices
        ))),
        (Err(Error::Infeasible { .. }), Some(Ok(ps))) => Err(Error::OracleMismatch(format!(
            "product search found {:?} feasible, DP found nothing within budget",
            ps.choices
        ))),
        (Err(e), _) | (_, Some(Err(e))) => Err(e),
    }
}
