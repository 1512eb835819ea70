//! Experiment drivers: energy landscapes, fixed-ladder comparisons,
//! valid/optimal probability sweeps, and penalty-constant tuning. Every
//! driver is deterministic for a fixed master seed — per-entry seeds are
//! derived from the entry's position, never from scheduling order.

pub mod ladder;
pub mod landscape;
pub mod report;
pub mod sweep;
pub mod tune;

pub use ladder::{ladder_compare, LadderComparison, LadderRow};
pub use landscape::{energy_landscape, LandscapeCell, LandscapeGrid};
pub use report::write_json;
pub use sweep::{
    default_cap_sweep, probability_sweep, ProbabilityReport, SweepCell, SweepParams,
    DEFAULT_SWEEP_CAPS,
};
pub use tune::{default_tune_grid, tune_dpa, TuneGrid, TuneRow, TuningReport};
