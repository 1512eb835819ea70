//! Solvers: exhaustive enumeration, an exact selection oracle, and a seeded
//! annealing sampler.

pub mod anneal;
pub mod exact;
pub mod mckp;
pub mod seed;

pub use anneal::{
    autoscale_schedule, simulated_anneal, AnnealSchedule, BetaCurve, SampleRecord, SampleSet,
    DEFAULT_SWEEPS,
};
pub use exact::{enumerate_exact, enumerate_spectrum, ExactSolution, ENUMERATION_LIMIT};
pub use mckp::{mckp_dp, mckp_oracle, mckp_product_search, MckpSolution};
