//! Exhaustive enumeration over all bitstrings.

use crate::error::{Error, Result};
use crate::qubo::QuboModel;

/// Hard cap on exhaustive enumeration; 2^24 evaluations.
pub const ENUMERATION_LIMIT: usize = 24;

/// A bitstring with its stored-objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub bits: Vec<bool>,
    pub energy: f64,
}

fn check_size(model: &QuboModel) -> Result<usize> {
    let n = model.num_vars();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooManyVars { num_vars: n, limit: ENUMERATION_LIMIT });
    }
    Ok(n)
}

/// Decodes counter `code` so that counting order equals lexicographic order
/// of the bit vector (`bits[0]` is the most significant digit).
fn bits_of(code: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| code >> (n - 1 - i) & 1 == 1).collect()
}

/// Global minimum of the stored objective, breaking ties toward the
/// lexicographically smallest bitstring.
pub fn enumerate_exact(model: &QuboModel) -> Result<ExactSolution> {
    let n = check_size(model)?;
    let (linear, quadratic) = model.flat_terms();
    let offset = model.offset();
    let mut best: Option<ExactSolution> = None;
    let mut x = vec![false; n];
    for code in 0..(1u64 << n) {
        for i in 0..n {
            x[i] = code >> (n - 1 - i) & 1 == 1;
        }
        let mut e = offset;
        for &(i, q) in &linear {
            if x[i] {
                e += q;
            }
        }
        for &(i, j, q) in &quadratic {
            if x[i] && x[j] {
                e += q;
            }
        }
        // Strict improvement keeps the first (lexicographically smallest)
        // bitstring among exact ties.
        if best.as_ref().map_or(true, |b| e < b.energy) {
            best = Some(ExactSolution { bits: x.clone(), energy: e });
        }
    }
    Ok(best.expect("at least the all-zero string was evaluated"))
}

/// Every bitstring with its energy, sorted by (energy, bitstring).
pub fn enumerate_spectrum(model: &QuboModel) -> Result<Vec<ExactSolution>> {
    let n = check_size(model)?;
    let mut all = Vec::with_capacity(1usize << n);
    for code in 0..(1u64 << n) {
        let bits = bits_of(code, n);
        let energy = model.energy(&bits)?;
        all.push(ExactSolution { bits, energy });
    }
    all.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
    Ok(all)
}
