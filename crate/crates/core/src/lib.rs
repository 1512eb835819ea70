//! Data-cap-aware bitrate selection, formulated for binary quadratic solvers.
//!
//! The problem: a streaming session spans `N` segments, each offered at `M`
//! quality variants with a perceptual score and a download size, and the whole
//! session must fit a data budget. This crate builds the selection problem as
//! a quadratic model over binary choice variables — maximize total score,
//! keep one choice per segment, stay under the cap — with two interchangeable
//! budget encodings (binary slack variables, or a rational penalty term),
//! solves it exactly (enumeration and a dynamic-programming oracle) or
//! approximately (seeded simulated annealing), and packages the experiment
//! drivers behind the `balance` command line.

pub mod error;
pub mod experiments;
pub mod formulation;
pub mod instance;
pub mod qubo;
pub mod solvers;

pub use error::{Error, Result};
pub use experiments::{
    default_cap_sweep, default_tune_grid, energy_landscape, ladder_compare, probability_sweep,
    tune_dpa, write_json, LadderComparison, LadderRow, LandscapeCell, LandscapeGrid,
    ProbabilityReport, SweepCell, SweepParams, TuneGrid, TuneRow, TuningReport,
};
pub use formulation::{
    build_model, classify, config_echo, decode, Assignment, MethodEcho, PenaltyConfig,
    PenaltyMethod, SegmentChoice, SlackBits, SolutionClass, DEFAULT_MU1, DEFAULT_MU2, DEFAULT_MU3,
    OPTIMALITY_EPS,
};
pub use instance::{
    load_table, reference_instance, save_table, synth_instance, DataBudget, QualityVariant,
    Segment, SegmentTable, TableFormat, DEFAULT_UNIT_MB,
};
pub use qubo::{IsingModel, QuboBuilder, QuboExport, QuboModel, Sense, VarRole};
pub use solvers::{
    autoscale_schedule, enumerate_exact, mckp_oracle, simulated_anneal, AnnealSchedule, BetaCurve,
    ExactSolution, MckpSolution, SampleRecord, SampleSet,
};
