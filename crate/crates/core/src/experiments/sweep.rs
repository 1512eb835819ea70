//! Valid/optimal probability versus data cap.
//!
//! For each (cap, penalty config) pair the sweep runs `trials` independent
//! annealing runs of `shots` chains, decodes every final state, and reports
//! the across-trial mean and sample standard deviation of two per-trial
//! fractions: `p_valid` (decoded assignment picks one level per segment and
//! fits the cap) and `p_optimal` (valid *and* matches the exact oracle's
//! VMAF). Trial `t` of cap index `c` under method `m` always anneals with
//! seed `derive(master, [c, m, t])`, so adding caps, reordering configs, or
//! changing thread counts never perturbs existing cells.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formulation::{build_model, decode, PenaltyConfig, PenaltyMethod, SolutionClass};
use crate::instance::{DataBudget, SegmentTable};
use crate::solvers::seed;
use crate::solvers::{autoscale_schedule, mckp_oracle, simulated_anneal, DEFAULT_SWEEPS};

/// Cap count used by [`default_cap_sweep`].
pub const DEFAULT_SWEEP_CAPS: usize = 8;

/// Sampler budget for one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepParams {
    pub shots: usize,
    pub trials: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl SweepParams {
    pub fn new(seed: u64) -> Self {
        SweepParams { shots: 1000, trials: 10, sweeps: DEFAULT_SWEEPS, seed }
    }
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams::new(0)
    }
}

/// Aggregated result for one (cap, method) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub d_max_mb: f64,
    pub method: PenaltyMethod,
    /// Exact optimum VMAF at this cap.
    pub oracle_vmaf: f64,
    pub p_valid_mean: f64,
    pub p_valid_std: f64,
    pub p_optimal_mean: f64,
    pub p_optimal_std: f64,
    /// Highest VMAF among valid samples across all trials, if any were valid.
    pub best_vmaf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub unit_mb: f64,
    pub shots: usize,
    pub trials: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// One row per cap (outer, in the order given) and config (inner).
    pub rows: Vec<SweepCell>,
}

/// Evenly spaced caps from the cheapest feasible usage to the cost of
/// all-highest-quality, endpoints included.
pub fn default_cap_sweep(table: &SegmentTable) -> Vec<f64> {
    let lo = table.min_total_data();
    let hi = table.max_total_data();
    let k = DEFAULT_SWEEP_CAPS;
    (0..k)
        .map(|i| {
            // Pin the endpoints exactly so the extreme caps admit precisely
            // the cheapest / the full-quality selection; interpolation could
            // otherwise land a hair below `hi` and exclude the top choice.
            if i == 0 {
                lo
            } else if i == k - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (k - 1) as f64
            }
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn method_tag(method: PenaltyMethod) -> u64 {
    match method {
        PenaltyMethod::Slack => 0,
        PenaltyMethod::Dpa => 1,
    }
}

/// Runs the sweep. Every cap must be feasible (at or above the cheapest
/// total usage); an infeasible cap surfaces the oracle's error.
pub fn probability_sweep(
    table: &SegmentTable,
    caps: &[f64],
    unit_mb: f64,
    configs: &[PenaltyConfig],
    params: &SweepParams,
) -> Result<ProbabilityReport> {
    let mut rows = Vec::with_capacity(caps.len() * configs.len());
    for (cap_idx, &cap) in caps.iter().enumerate() {
        let budget = DataBudget::new(cap, unit_mb)?;
        let oracle = mckp_oracle(table, &budget)?;
        for config in configs {
            let model = build_model(table, &budget, config)?;
            let schedule = autoscale_schedule(&model)?.with_sweeps(params.sweeps);
            let mut p_valid = Vec::with_capacity(params.trials);
            let mut p_optimal = Vec::with_capacity(params.trials);
            let mut best_vmaf: Option<f64> = None;
            for trial in 0..params.trials {
                let trial_seed = seed::derive(
                    params.seed,
                    &[cap_idx as u64, method_tag(config.method), trial as u64],
                );
                let samples = simulated_anneal(&model, params.shots, &schedule, trial_seed)?;
                let mut valid = 0usize;
                let mut optimal = 0usize;
                for record in &samples.records {
                    let assignment = decode(&model, &record.bits, table, &budget)?;
                    match crate::formulation::classify(&assignment, oracle.total_vmaf) {
                        SolutionClass::Invalid => {}
                        SolutionClass::Valid => valid += record.occurrences,
                        SolutionClass::Optimal => {
                            valid += record.occurrences;
                            optimal += record.occurrences;
                        }
                    }
                    if assignment.valid
                        && best_vmaf.map_or(true, |b| assignment.total_vmaf > b)
                    {
                        best_vmaf = Some(assignment.total_vmaf);
                    }
                }
                p_valid.push(valid as f64 / params.shots as f64);
                p_optimal.push(optimal as f64 / params.shots as f64);
            }
            let (pv_mean, pv_std) = mean_std(&p_valid);
            let (po_mean, po_std) = mean_std(&p_optimal);
            rows.push(SweepCell {
                d_max_mb: cap,
                method: config.method,
                oracle_vmaf: oracle.total_vmaf,
                p_valid_mean: pv_mean,
                p_valid_std: pv_std,
                p_optimal_mean: po_mean,
                p_optimal_std: po_std,
                best_vmaf,
            });
        }
    }
    Ok(ProbabilityReport {
        unit_mb,
        shots: params.shots,
        trials: params.trials,
        sweeps: params.sweeps,
        seed: params.seed,
        rows,
    })
}
