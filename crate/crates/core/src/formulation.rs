//! Turning a segment table plus a data budget into a quadratic binary model.
//!
//! The decision variables are one bit per (segment, level): `x[i][j] = 1`
//! means segment `i` streams at level `j`. The maximize-sense objective is
//! the summed VMAF of the selected variants. Two soft constraints are folded
//! in as penalties:
//!
//! * **one-hot** — each segment must select exactly one level. Every segment
//!   contributes `-lambda0 * (sum_j x[i][j] - 1)^2`, expanded to `+lambda0`
//!   per variable, `-2*lambda0` per same-segment pair, and `-lambda0` of
//!   constant offset.
//! * **data cap** — total size must stay within the budget, encoded one of
//!   two ways ([`PenaltyMethod`]):
//!   * [`PenaltyMethod::Slack`]: sizes are quantized to integer units and the
//!     inequality is closed into an equality with a binary-expanded slack
//!     `S = sum_k 2^k s_k`, penalized as
//!     `-lambda1 * (U_max - sum u[i][j] x[i][j] - S)^2`. Exact once quantized,
//!     but costs extra variables and produces unit-scale coefficients that
//!     square, so the energy range is wide.
//!   * [`PenaltyMethod::Dpa`]: no extra variables. Usage is normalized
//!     against a threshold `D_thr = D_max / mu3` as
//!     `r = (usage - D_thr) / (D_max - D_thr)` and penalized by
//!     `mu1 * r - mu2 * r^2`. The term is applied verbatim over the whole
//!     usage range: `r = 0` at the threshold, `r = 1` at the cap (net
//!     `mu1 - mu2`, negative for the default constants), and for usage below
//!     the threshold `r` goes negative, so the linear part mildly penalizes
//!     underuse as well — that asymmetry is part of the method's definition,
//!     not an accident of this implementation.
//!
//! [`build`] assembles objective + penalties and canonicalizes to a
//! minimize-sense model (coefficients negated), which is what every solver
//! in this crate consumes. [`decode`] maps a solver bitstring back to
//! per-segment choices and [`classify`] grades it against the exact optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DataBudget, SegmentTable};
use crate::qubo::{QuboBuilder, QuboModel, Sense, VarRole};

/// How the data-cap inequality is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMethod {
    Slack,
    Dpa,
}

impl std::fmt::Display for PenaltyMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PenaltyMethod::Slack => "slack",
            PenaltyMethod::Dpa => "dpa",
        })
    }
}

/// Width of the slack register.
///
/// `Compact` sizes it as `ceil(log2(U_max))` bits — enough for budgets that
/// are not exact powers of two, and one unit short of representing `U_max`
/// itself when they are. `Full` uses `ceil(log2(U_max + 1))` bits, which
/// covers every residual `0..=U_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlackBits {
    Compact,
    Full,
}

pub const DEFAULT_MU1: f64 = 5.6;
pub const DEFAULT_MU2: f64 = 8.9;
pub const DEFAULT_MU3: f64 = 1.69;

/// Penalty weights and method selection. `lambda0`/`lambda1` default to
/// twice the largest VMAF in the table when left as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub method: PenaltyMethod,
    pub lambda0: Option<f64>,
    pub lambda1: Option<f64>,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub slack_bits: SlackBits,
}

impl PenaltyConfig {
    pub fn slack() -> Self {
        PenaltyConfig {
            method: PenaltyMethod::Slack,
            lambda0: None,
            lambda1: None,
            mu1: DEFAULT_MU1,
            mu2: DEFAULT_MU2,
            mu3: DEFAULT_MU3,
            slack_bits: SlackBits::Compact,
        }
    }

    pub fn dpa() -> Self {
        PenaltyConfig { method: PenaltyMethod::Dpa, ..PenaltyConfig::slack() }
    }

    pub fn with_mu(mut self, mu1: f64, mu2: f64, mu3: f64) -> Self {
        self.mu1 = mu1;
        self.mu2 = mu2;
        self.mu3 = mu3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l0) = self.lambda0 {
            if !(l0 > 0.0) || !l0.is_finite() {
                return Err(Error::BadConfig(format!("lambda0 {l0} must be positive")));
            }
        }
        if let Some(l1) = self.lambda1 {
            if !(l1 > 0.0) || !l1.is_finite() {
                return Err(Error::BadConfig(format!("lambda1 {l1} must be positive")));
            }
        }
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::BadConfig(format!("{name} {v} must be positive")));
            }
        }
        if !(self.mu3 > 1.0) || !self.mu3.is_finite() {
            return Err(Error::BadConfig(format!(
                "mu3 {} must exceed 1 so the threshold sits below the cap",
                self.mu3
            )));
        }
        Ok(())
    }

    /// One-hot weight, defaulted to `2 * max vmaf`.
    pub fn resolved_lambda0(&self, table: &SegmentTable) -> f64 {
        self.lambda0.unwrap_or(2.0 * table.max_vmaf())
    }

    /// Slack weight (per squared unit of residual), same default.
    pub fn resolved_lambda1(&self, table: &SegmentTable) -> f64 {
        self.lambda1.unwrap_or(2.0 * table.max_vmaf())
    }
}

/// Maximize-sense builder holding just the VMAF objective, with one decision
/// variable per (segment, level) registered in row-major order.
pub fn build_objective(table: &SegmentTable) -> QuboBuilder {
    let mut b = QuboBuilder::new(Sense::Maximize);
    for (i, seg) in table.segments().iter().enumerate() {
        for (j, var) in seg.variants.iter().enumerate() {
            let idx = b.push_var(VarRole::Decision { segment: i, level: j });
            b.add_linear(idx, var.vmaf).expect("fresh index");
        }
    }
    b
}

/// Variable indices of the decision bits, grouped by segment.
fn decision_vars(b: &QuboBuilder, table: &SegmentTable) -> Result<Vec<Vec<usize>>> {
    let mut by_segment = vec![Vec::new(); table.num_segments()];
    for (idx, role) in b.roles().iter().enumerate() {
        if let VarRole::Decision { segment, level } = *role {
            if segment >= table.num_segments() || level >= table.num_levels() {
                return Err(Error::RegistryMismatch { index: idx });
            }
            by_segment[segment].push(idx);
        }
    }
    Ok(by_segment)
}

/// Adds `-lambda0 * (sum_j x[i][j] - 1)^2` per segment (maximize sense).
pub fn add_onehot_penalty(
    b: &mut QuboBuilder,
    table: &SegmentTable,
    lambda0: f64,
) -> Result<()> {
    for vars in decision_vars(b, table)? {
        for (a, &i) in vars.iter().enumerate() {
            b.add_linear(i, lambda0)?;
            for &j in &vars[a + 1..] {
                b.add_quadratic(i, j, -2.0 * lambda0)?;
            }
        }
        b.add_offset(-lambda0);
    }
    Ok(())
}

fn ceil_log2(n: u64) -> usize {
    debug_assert!(n >= 1);
    (64 - (n - 1).leading_zeros()) as usize
}

/// Number of slack bits for a budget of `max_units`.
pub fn slack_bit_count(max_units: u64, mode: SlackBits) -> usize {
    match mode {
        SlackBits::Compact => ceil_log2(max_units),
        SlackBits::Full => ceil_log2(max_units + 1),
    }
}

/// Registers the slack bits and adds the quantized equality penalty
/// `-lambda1 * (U_max - sum u[i][j] x[i][j] - sum 2^k s_k)^2` (maximize
/// sense). Must run after the decision variables exist.
pub fn add_slack_penalty(
    b: &mut QuboBuilder,
    table: &SegmentTable,
    budget: &DataBudget,
    lambda1: f64,
    mode: SlackBits,
) -> Result<()> {
    let max_units = budget.max_units()?;
    // Weighted variables of the affine residual: decisions carry their
    // quantized size, slack bits carry their power of two.
    let mut weighted: Vec<(usize, f64)> = Vec::new();
    for vars in decision_vars(b, table)? {
        for idx in vars {
            if let VarRole::Decision { segment, level } = b.roles()[idx] {
                let units = budget.units(table.variant(segment, level).data_mb);
                weighted.push((idx, units as f64));
            }
        }
    }
    let num_bits = slack_bit_count(max_units, mode);
    for bit in 0..num_bits {
        let idx = b.push_var(VarRole::Slack { bit });
        weighted.push((idx, (1u64 << bit) as f64));
    }
    let a = max_units as f64;
    b.add_offset(-lambda1 * a * a);
    for (pos, &(i, w)) in weighted.iter().enumerate() {
        b.add_linear(i, lambda1 * w * (2.0 * a - w))?;
        for &(j, w2) in &weighted[pos + 1..] {
            b.add_quadratic(i, j, -2.0 * lambda1 * w * w2)?;
        }
    }
    Ok(())
}

/// Scalar value of the threshold penalty at a given usage (maximize sense):
/// `mu1 * r - mu2 * r^2` with `r = (usage - D_max/mu3) / (D_max - D_max/mu3)`.
pub fn dpa_term(usage_mb: f64, d_max_mb: f64, mu1: f64, mu2: f64, mu3: f64) -> f64 {
    let thr = d_max_mb / mu3;
    let r = (usage_mb - thr) / (d_max_mb - thr);
    mu1 * r - mu2 * r * r
}

/// Adds the threshold penalty over the decision variables (maximize sense).
/// Works on exact MB sizes; no quantization and no extra variables.
pub fn add_dpa_penalty(
    b: &mut QuboBuilder,
    table: &SegmentTable,
    budget: &DataBudget,
    mu1: f64,
    mu2: f64,
    mu3: f64,
) -> Result<()> {
    if !(mu3 > 1.0) {
        return Err(Error::BadConfig(format!("mu3 {mu3} must exceed 1")));
    }
    let thr = budget.d_max_mb / mu3;
    let scale = budget.d_max_mb - thr;
    // r = sum_t a_t x_t - c  with a_t = data_t / scale, c = thr / scale.
    let mut weighted: Vec<(usize, f64)> = Vec::new();
    for vars in decision_vars(b, table)? {
        for idx in vars {
            if let VarRole::Decision { segment, level } = b.roles()[idx] {
                weighted.push((idx, table.variant(segment, level).data_mb / scale));
            }
        }
    }
    let c = thr / scale;
    b.add_offset(-mu1 * c - mu2 * c * c);
    for (pos, &(i, a)) in weighted.iter().enumerate() {
        b.add_linear(i, mu1 * a + 2.0 * mu2 * c * a - mu2 * a * a)?;
        for &(j, a2) in &weighted[pos + 1..] {
            b.add_quadratic(i, j, -2.0 * mu2 * a * a2)?;
        }
    }
    Ok(())
}

/// Objective + one-hot + data-cap penalty, canonicalized to minimization.
pub fn build_model(table: &SegmentTable, budget: &DataBudget, config: &PenaltyConfig) -> Result<QuboModel> {
    config.validate()?;
    let mut b = build_objective(table);
    add_onehot_penalty(&mut b, table, config.resolved_lambda0(table))?;
    match config.method {
        PenaltyMethod::Slack => add_slack_penalty(
            &mut b,
            table,
            budget,
            config.resolved_lambda1(table),
            config.slack_bits,
        )?,
        PenaltyMethod::Dpa => {
            add_dpa_penalty(&mut b, table, budget, config.mu1, config.mu2, config.mu3)?
        }
    }
    Ok(b.finish().negated())
}

/// Summary of a built model's resolved penalty parameters, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodEcho {
    Slack { lambda0: f64, lambda1: f64, mode: SlackBits, num_bits: usize },
    Dpa { lambda0: f64, mu1: f64, mu2: f64, mu3: f64 },
}

pub fn config_echo(
    table: &SegmentTable,
    budget: &DataBudget,
    config: &PenaltyConfig,
) -> Result<MethodEcho> {
    config.validate()?;
    Ok(match config.method {
        PenaltyMethod::Slack => MethodEcho::Slack {
            lambda0: config.resolved_lambda0(table),
            lambda1: config.resolved_lambda1(table),
            mode: config.slack_bits,
            num_bits: slack_bit_count(budget.max_units()?, config.slack_bits),
        },
        PenaltyMethod::Dpa => MethodEcho::Dpa {
            lambda0: config.resolved_lambda0(table),
            mu1: config.mu1,
            mu2: config.mu2,
            mu3: config.mu3,
        },
    })
}

/// Per-segment outcome of decoding a bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentChoice {
    /// Exactly one level selected.
    Level(usize),
    /// Zero or several levels selected; carries how many.
    Violation { selected: usize },
}

/// A decoded solution. Totals sum the table rows of *every* selected
/// decision bit, so violating assignments still report what they spend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub choices: Vec<SegmentChoice>,
    pub total_vmaf: f64,
    pub total_data_mb: f64,
    /// One level per segment *and* within the data budget (exact MB sums).
    pub valid: bool,
    /// Slack register contents (index = bit), present only for slack models.
    pub slack_bits: Option<Vec<bool>>,
}

impl Assignment {
    /// Level indices when the assignment selects exactly one per segment.
    pub fn levels(&self) -> Option<Vec<usize>> {
        self.choices
            .iter()
            .map(|c| match c {
                SegmentChoice::Level(j) => Some(*j),
                SegmentChoice::Violation { .. } => None,
            })
            .collect()
    }
}

/// Maps a solver bitstring back to segment choices via the model registry.
pub fn decode(
    model: &QuboModel,
    x: &[bool],
    table: &SegmentTable,
    budget: &DataBudget,
) -> Result<Assignment> {
    if x.len() != model.num_vars() {
        return Err(Error::LengthMismatch { expected: model.num_vars(), found: x.len() });
    }
    let n = table.num_segments();
    let mut selected: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut slack: Vec<(usize, bool)> = Vec::new();
    let mut total_vmaf = 0.0;
    let mut total_data = 0.0;
    for (idx, role) in model.roles().iter().enumerate() {
        match *role {
            VarRole::Decision { segment, level } => {
                if segment >= n || level >= table.num_levels() {
                    return Err(Error::RegistryMismatch { index: idx });
                }
                if x[idx] {
                    selected[segment].push(level);
                    let v = table.variant(segment, level);
                    total_vmaf += v.vmaf;
                    total_data += v.data_mb;
                }
            }
            VarRole::Slack { bit } => slack.push((bit, x[idx])),
        }
    }
    let choices: Vec<SegmentChoice> = selected
        .iter()
        .map(|levels| match levels.as_slice() {
            [one] => SegmentChoice::Level(*one),
            other => SegmentChoice::Violation { selected: other.len() },
        })
        .collect();
    let one_hot = choices.iter().all(|c| matches!(c, SegmentChoice::Level(_)));
    let slack_bits = if slack.is_empty() {
        None
    } else {
        slack.sort_by_key(|&(bit, _)| bit);
        Some(slack.into_iter().map(|(_, v)| v).collect())
    };
    Ok(Assignment {
        choices,
        total_vmaf,
        total_data_mb: total_data,
        valid: one_hot && total_data <= budget.d_max_mb,
        slack_bits,
    })
}

/// Grading of a decoded assignment against the exact optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionClass {
    Invalid,
    Valid,
    Optimal,
}

/// Tolerance for calling a valid assignment optimal.
pub const OPTIMALITY_EPS: f64 = 1e-9;

pub fn classify(assignment: &Assignment, oracle_vmaf: f64) -> SolutionClass {
    if !assignment.valid {
        SolutionClass::Invalid
    } else if assignment.total_vmaf >= oracle_vmaf - OPTIMALITY_EPS {
        SolutionClass::Optimal
    } else {
        SolutionClass::Valid
    }
}
