//! Seeded single-flip Metropolis annealing.
//!
//! Each shot is an independent chain: uniform random start, one pass over
//! the variables per sweep, inverse temperature rising along the schedule,
//! and the *final* state recorded (no best-so-far bookkeeping — the point is
//! to sample what the schedule actually freezes into). Shot `k` draws from a
//! ChaCha8 stream keyed by `seed::mix(master_seed, k)`, so the sample set is
//! bit-identical for a fixed `(model, shots, schedule, seed)` no matter how
//! many threads run the shots or in what order they finish.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboModel;
use crate::solvers::seed;

pub const DEFAULT_SWEEPS: usize = 1000;

/// Target acceptance probability for the smallest uphill move at the end of
/// an autoscaled schedule.
pub const FINAL_ACCEPT_PROB: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaCurve {
    Geometric,
    Linear,
}

/// Annealing schedule: `sweeps` inverse temperatures from `beta_initial` to
/// `beta_final`, and how many independent `restarts` each shot runs (the
/// lowest-energy final state wins; defaults to 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub curve: BetaCurve,
    pub restarts: usize,
}

impl AnnealSchedule {
    pub fn new(sweeps: usize, beta_initial: f64, beta_final: f64, curve: BetaCurve) -> Self {
        AnnealSchedule { sweeps, beta_initial, beta_final, curve, restarts: 1 }
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::BadConfig("schedule needs at least one sweep".into()));
        }
        if self.restarts == 0 {
            return Err(Error::BadConfig("schedule needs at least one restart".into()));
        }
        for (name, b) in [("beta_initial", self.beta_initial), ("beta_final", self.beta_final)] {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::BadConfig(format!("{name} {b} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// The per-sweep inverse temperatures, endpoints hit exactly.
    pub fn betas(&self) -> Vec<f64> {
        let s = self.sweeps;
        if s == 1 {
            return vec![self.beta_final];
        }
        let mut betas = Vec::with_capacity(s);
        for t in 0..s {
            let frac = t as f64 / (s - 1) as f64;
            let beta = match self.curve {
                BetaCurve::Geometric => {
                    (self.beta_initial.ln() + frac * (self.beta_final / self.beta_initial).ln())
                        .exp()
                }
                BetaCurve::Linear => {
                    self.beta_initial + frac * (self.beta_final - self.beta_initial)
                }
            };
            betas.push(beta);
        }
        betas[0] = self.beta_initial;
        betas[s - 1] = self.beta_final;
        betas
    }
}

/// Derives a schedule from the model's coefficient magnitudes: the first
/// sweep should accept almost any move (`beta_initial = 1 / dE_max`, with
/// `dE_max` bounding any single-flip change), the last should accept the
/// smallest resolvable uphill move with probability [`FINAL_ACCEPT_PROB`]
/// (`beta_final = ln(1/p) / dE_min`, with `dE_min` the smallest nonzero
/// coefficient magnitude). Errors on a model with no nonzero terms.
pub fn autoscale_schedule(model: &QuboModel) -> Result<AnnealSchedule> {
    let mut reach = vec![0.0f64; model.num_vars()];
    let mut de_min = f64::INFINITY;
    for (&i, &q) in model.linear() {
        if q != 0.0 {
            reach[i] += q.abs();
            de_min = de_min.min(q.abs());
        }
    }
    for (&(i, j), &q) in model.quadratic() {
        if q != 0.0 {
            reach[i] += q.abs();
            reach[j] += q.abs();
            de_min = de_min.min(q.abs());
        }
    }
    let de_max = reach.iter().fold(0.0f64, |a, &b| a.max(b));
    if de_max == 0.0 {
        return Err(Error::FlatModel);
    }
    Ok(AnnealSchedule::new(
        DEFAULT_SWEEPS,
        1.0 / de_max,
        (1.0 / FINAL_ACCEPT_PROB).ln() / de_min,
        BetaCurve::Geometric,
    ))
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn string_to_bits(s: &str) -> std::result::Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("bitstring character {other:?}")),
        })
        .collect()
}

mod bitstring_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::bits_to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        super::string_to_bits(&s).map_err(serde::de::Error::custom)
    }
}

/// One distinct final state and how many shots ended there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    #[serde(with = "bitstring_serde")]
    pub bits: Vec<bool>,
    pub energy: f64,
    pub occurrences: usize,
}

/// Collected final states of an annealing run, sorted by (energy, bits).
/// Wall time is kept for callers that want it but never serialized, so
/// written reports stay byte-stable across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub sampler_id: String,
    pub seed: u64,
    pub shots: usize,
    pub records: Vec<SampleRecord>,
    #[serde(skip)]
    pub wall_time: Duration,
}

pub const SAMPLER_ID: &str = "metropolis-anneal";

impl SampleSet {
    /// Lowest-energy record (ties already resolved toward the smaller
    /// bitstring by the sort order).
    pub fn best(&self) -> Option<&SampleRecord> {
        self.records.first()
    }
}

struct Flat {
    h: Vec<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    offset: f64,
}

impl Flat {
    fn of(model: &QuboModel) -> Flat {
        let n = model.num_vars();
        let mut h = vec![0.0; n];
        for (&i, &q) in model.linear() {
            h[i] += q;
        }
        let mut adjacency = vec![Vec::new(); n];
        for (&(i, j), &q) in model.quadratic() {
            adjacency[i].push((j, q));
            adjacency[j].push((i, q));
        }
        Flat { h, adjacency, offset: model.offset() }
    }

    fn energy(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for (i, &hi) in self.h.iter().enumerate() {
            if x[i] {
                e += hi;
                for &(j, q) in &self.adjacency[i] {
                    if j > i && x[j] {
                        e += q;
                    }
                }
            }
        }
        e
    }
}

fn run_chain(flat: &Flat, betas: &[f64], rng: &mut ChaCha8Rng) -> (Vec<bool>, f64) {
    let n = flat.h.len();
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
    // field[i] = single-flip gap: energy(x with x_i=1) - energy(x with x_i=0).
    let mut field = flat.h.clone();
    for i in 0..n {
        if x[i] {
            for &(j, q) in &flat.adjacency[i] {
                field[j] += q;
            }
        }
    }
    for &beta in betas {
        for i in 0..n {
            let de = if x[i] { -field[i] } else { field[i] };
            // One uniform draw per uphill proposal; downhill moves are free.
            let accept = de <= 0.0 || rng.gen::<f64>() < (-beta * de).exp();
            if accept {
                x[i] = !x[i];
                let sign = if x[i] { 1.0 } else { -1.0 };
                for &(j, q) in &flat.adjacency[i] {
                    field[j] += sign * q;
                }
            }
        }
    }
    let e = flat.energy(&x);
    (x, e)
}

/// Runs `shots` independent chains and tallies their final states.
pub fn simulated_anneal(
    model: &QuboModel,
    shots: usize,
    schedule: &AnnealSchedule,
    master_seed: u64,
) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::BadConfig("shots must be at least 1".into()));
    }
    schedule.validate()?;
    let start = Instant::now();
    let betas = schedule.betas();
    let flat = Flat::of(model);
    let finals: Vec<Vec<bool>> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(master_seed, shot as u64));
            let mut best: Option<(Vec<bool>, f64)> = None;
            for _ in 0..schedule.restarts {
                let (x, e) = run_chain(&flat, &betas, &mut rng);
                if best.as_ref().map_or(true, |(_, be)| e < *be) {
                    best = Some((x, e));
                }
            }
            best.expect("at least one restart ran").0
        })
        .collect();
    // Merge in shot order; identical states collapse into one record.
    let mut counts: std::collections::BTreeMap<Vec<bool>, usize> = std::collections::BTreeMap::new();
    for x in finals {
        *counts.entry(x).or_insert(0) += 1;
    }
    let mut records: Vec<SampleRecord> = counts
        .into_iter()
        .map(|(bits, occurrences)| {
            let energy = model.energy(&bits).expect("chain states match the model");
            SampleRecord { bits, energy, occurrences }
        })
        .collect();
    records.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
    Ok(SampleSet {
        sampler_id: SAMPLER_ID.to_string(),
        seed: master_seed,
        shots,
        records,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{QuboBuilder, Sense, VarRole};
    use approx::assert_abs_diff_eq;

    fn single_var_model() -> QuboModel {
        let mut b = QuboBuilder::new(Sense::Minimize);
        b.push_var(VarRole::Slack { bit: 0 });
        b.add_linear(0, -5.0).unwrap();
        b.finish()
    }

    #[test]
    fn autoscale_single_var() {
        let s = autoscale_schedule(&single_var_model()).unwrap();
        assert_abs_diff_eq!(s.beta_initial, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.beta_final, 1000f64.ln() / 5.0, epsilon = 1e-12);
        assert_eq!(s.sweeps, DEFAULT_SWEEPS);
        assert_eq!(s.curve, BetaCurve::Geometric);
    }

    #[test]
    fn autoscale_is_scale_covariant() {
        let mut b = QuboBuilder::new(Sense::Minimize);
        for bit in 0..3 {
            b.push_var(VarRole::Slack { bit });
        }
        b.add_linear(0, 2.0).unwrap();
        b.add_linear(1, -7.0).unwrap();
        b.add_quadratic(0, 2, 3.0).unwrap();
        let m = b.finish();
        let mut scaled_b = QuboBuilder::new(Sense::Minimize);
        for bit in 0..3 {
            scaled_b.push_var(VarRole::Slack { bit });
        }
        scaled_b.add_linear(0, 20.0).unwrap();
        scaled_b.add_linear(1, -70.0).unwrap();
        scaled_b.add_quadratic(0, 2, 30.0).unwrap();
        let scaled = scaled_b.finish();
        let s1 = autoscale_schedule(&m).unwrap();
        let s10 = autoscale_schedule(&scaled).unwrap();
        assert_abs_diff_eq!(s10.beta_initial, s1.beta_initial / 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s10.beta_final, s1.beta_final / 10.0, epsilon = 1e-12);
        assert!(s1.beta_final > s1.beta_initial);
    }

    #[test]
    fn autoscale_rejects_flat_model() {
        let mut b = QuboBuilder::new(Sense::Minimize);
        b.push_var(VarRole::Slack { bit: 0 });
        b.add_offset(3.0);
        assert!(matches!(autoscale_schedule(&b.finish()), Err(Error::FlatModel)));
    }

    #[test]
    fn beta_curves_hit_endpoints() {
        let s = AnnealSchedule::new(5, 0.1, 10.0, BetaCurve::Geometric);
        let betas = s.betas();
        assert_eq!(betas.len(), 5);
        assert_eq!(betas[0], 0.1);
        assert_eq!(betas[4], 10.0);
        for w in betas.windows(2) {
            assert!(w[1] > w[0]);
        }
        let lin = AnnealSchedule::new(3, 1.0, 2.0, BetaCurve::Linear).betas();
        assert_eq!(lin, vec![1.0, 1.5, 2.0]);
        assert_eq!(AnnealSchedule::new(1, 0.5, 4.0, BetaCurve::Geometric).betas(), vec![4.0]);
    }

    #[test]
    fn single_var_lands_in_ground_state() {
        let m = single_var_model();
        let schedule = autoscale_schedule(&m).unwrap();
        let ss = simulated_anneal(&m, 100, &schedule, 11).unwrap();
        assert_eq!(ss.shots, 100);
        let ground: usize = ss
            .records
            .iter()
            .filter(|r| r.bits == vec![true])
            .map(|r| r.occurrences)
            .sum();
        assert!(ground >= 95, "only {ground}/100 shots reached the ground state");
        assert_eq!(ss.records.iter().map(|r| r.occurrences).sum::<usize>(), 100);
    }

    #[test]
    fn identical_seeds_identical_samples() {
        let m = single_var_model();
        let schedule = AnnealSchedule::new(50, 0.1, 3.0, BetaCurve::Geometric);
        let a = simulated_anneal(&m, 64, &schedule, 123).unwrap();
        let b = simulated_anneal(&m, 64, &schedule, 123).unwrap();
        assert_eq!(a.records, b.records);
        let c = simulated_anneal(&m, 64, &schedule, 124).unwrap();
        assert!(a.records != c.records || a.seed != c.seed);
    }

    #[test]
    fn parallelism_does_not_change_samples() {
        let m = single_var_model();
        let schedule = AnnealSchedule::new(40, 0.1, 2.0, BetaCurve::Linear);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| simulated_anneal(&m, 200, &schedule, 5).unwrap());
        let b = pool4.install(|| simulated_anneal(&m, 200, &schedule, 5).unwrap());
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn flat_model_samples_all_states_at_offset_energy() {
        let mut b = QuboBuilder::new(Sense::Minimize);
        for bit in 0..4 {
            b.push_var(VarRole::Slack { bit });
        }
        b.add_offset(1.5);
        let m = b.finish();
        let schedule = AnnealSchedule::new(10, 0.5, 1.0, BetaCurve::Linear);
        let ss = simulated_anneal(&m, 50, &schedule, 3).unwrap();
        for r in &ss.records {
            assert_eq!(r.energy, 1.5);
        }
        assert_eq!(ss.records.iter().map(|r| r.occurrences).sum::<usize>(), 50);
    }

    #[test]
    fn records_sorted_and_energies_reevaluated() {
        let mut b = QuboBuilder::new(Sense::Minimize);
        for bit in 0..3 {
            b.push_var(VarRole::Slack { bit });
        }
        b.add_linear(0, 1.0).unwrap();
        b.add_linear(1, -1.0).unwrap();
        b.add_quadratic(0, 2, 0.5).unwrap();
        let m = b.finish();
        let schedule = AnnealSchedule::new(5, 0.05, 0.2, BetaCurve::Geometric);
        let ss = simulated_anneal(&m, 300, &schedule, 9).unwrap();
        for w in ss.records.windows(2) {
            assert!(
                w[0].energy < w[1].energy
                    || (w[0].energy == w[1].energy && w[0].bits < w[1].bits)
            );
        }
        for r in &ss.records {
            assert_eq!(r.energy, m.energy(&r.bits).unwrap());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = single_var_model();
        let good = AnnealSchedule::new(5, 0.1, 1.0, BetaCurve::Linear);
        assert!(simulated_anneal(&m, 0, &good, 1).is_err());
        let mut bad = good.clone();
        bad.sweeps = 0;
        assert!(simulated_anneal(&m, 10, &bad, 1).is_err());
        let mut bad = good.clone();
        bad.beta_final = -1.0;
        assert!(simulated_anneal(&m, 10, &bad, 1).is_err());
        let mut bad = good;
        bad.restarts = 0;
        assert!(simulated_anneal(&m, 10, &bad, 1).is_err());
    }

    #[test]
    fn restarts_keep_best_final_state() {
        // Frustrated pair with a trap: state 10 is a local minimum (energy
        // -1), state 01 the global one (-2). A frozen chain lands in the trap
        // from half of the uniform starts, so extra restarts raise the hit
        // rate sharply.
        let mut b = QuboBuilder::new(Sense::Minimize);
        b.push_var(VarRole::Slack { bit: 0 });
        b.push_var(VarRole::Slack { bit: 1 });
        b.add_linear(0, -1.0).unwrap();
        b.add_linear(1, -2.0).unwrap();
        b.add_quadratic(0, 1, 4.0).unwrap();
        let m = b.finish();
        let frozen = AnnealSchedule {
            sweeps: 1,
            beta_initial: 1e6,
            beta_final: 1e6,
            curve: BetaCurve::Linear,
            restarts: 1,
        };
        let ground = |ss: &SampleSet| -> usize {
            ss.records
                .iter()
                .filter(|r| r.bits == vec![false, true])
                .map(|r| r.occurrences)
                .sum()
        };
        let single = simulated_anneal(&m, 400, &frozen, 77).unwrap();
        let multi = simulated_anneal(&m, 400, &AnnealSchedule { restarts: 4, ..frozen }, 77).unwrap();
        // Expected hit rates: 1/2 for one restart, 15/16 for four.
        assert!(ground(&single) < 280, "single-restart hits: {}", ground(&single));
        assert!(ground(&multi) > 330, "multi-restart hits: {}", ground(&multi));
    }

    #[test]
    fn sample_set_json_round_trip() {
        let m = single_var_model();
        let schedule = AnnealSchedule::new(20, 0.1, 2.0, BetaCurve::Geometric);
        let ss = simulated_anneal(&m, 30, &schedule, 2).unwrap();
        let json = serde_json::to_string(&ss).unwrap();
        assert!(!json.contains("wall_time"));
        let back: SampleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back.records, ss.records);
        assert_eq!(back.shots, ss.shots);
    }
}
