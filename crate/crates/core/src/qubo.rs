//! Sparse quadratic binary models and their spin-variable twin.
//!
//! A model is `f(x) = offset + sum_i q_ii x_i + sum_{i<j} q_ij x_i x_j` over
//! `x in {0,1}^n`, tagged with whether the interesting direction is the
//! maximum or the minimum. Construction goes through [`QuboBuilder`]; a
//! finished [`QuboModel`] is immutable, so it can be shared freely between
//! solvers and report writers.
//!
//! Every variable carries a [`VarRole`] describing what its bit means, which
//! is what lets a solution bitstring be decoded back into segment choices
//! without dragging the original table around.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// What a variable's bit encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarRole {
    /// Picks quality level `level` for segment `segment`.
    Decision { segment: usize, level: usize },
    /// Slack bit with weight `2^bit` in the inequality encoding.
    Slack { bit: usize },
}

/// Mutable model under construction. Coefficients accumulate: adding to the
/// same index (or pair) twice sums the contributions.
#[derive(Debug, Clone)]
pub struct QuboBuilder {
    sense: Sense,
    roles: Vec<VarRole>,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboBuilder {
    pub fn new(sense: Sense) -> Self {
        QuboBuilder {
            sense,
            roles: Vec::new(),
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Registers a new variable and returns its index.
    pub fn push_var(&mut self, role: VarRole) -> usize {
        self.roles.push(role);
        self.roles.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.roles.len() {
            return Err(Error::VarOutOfBounds { index: i, num_vars: self.roles.len() });
        }
        Ok(())
    }

    pub fn add_linear(&mut self, i: usize, coeff: f64) -> Result<()> {
        self.check_var(i)?;
        *self.linear.entry(i).or_insert(0.0) += coeff;
        Ok(())
    }

    /// Adds a coupling between two distinct variables; the pair is stored
    /// with the smaller index first regardless of argument order.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) -> Result<()> {
        self.check_var(i)?;
        self.check_var(j)?;
        if i == j {
            return Err(Error::DiagonalQuadratic(i));
        }
        let key = (i.min(j), i.max(j));
        *self.quadratic.entry(key).or_insert(0.0) += coeff;
        Ok(())
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    /// Freezes the builder into an immutable model.
    pub fn finish(self) -> QuboModel {
        QuboModel {
            sense: self.sense,
            roles: self.roles,
            linear: self.linear,
            quadratic: self.quadratic,
            offset: self.offset,
        }
    }
}

/// Immutable quadratic binary model. See the module docs for the energy form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    sense: Sense,
    roles: Vec<VarRole>,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboModel {
    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    /// Role of each variable, indexed by variable number.
    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Evaluates `f(x)` exactly as stored, independent of sense.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.roles.len() {
            return Err(Error::LengthMismatch { expected: self.roles.len(), found: x.len() });
        }
        let mut e = self.offset;
        for (&i, &q) in &self.linear {
            if x[i] {
                e += q;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x[i] && x[j] {
                e += q;
            }
        }
        Ok(e)
    }

    /// Same model with every coefficient negated and the sense flipped;
    /// the argmax set of one is the argmin set of the other.
    pub fn negated(&self) -> QuboModel {
        QuboModel {
            sense: match self.sense {
                Sense::Maximize => Sense::Minimize,
                Sense::Minimize => Sense::Maximize,
            },
            roles: self.roles.clone(),
            linear: self.linear.iter().map(|(&i, &q)| (i, -q)).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &q)| (k, -q)).collect(),
            offset: -self.offset,
        }
    }

    /// Spin-variable form under `x_i = (1 + s_i) / 2`, energy-equal up to
    /// floating-point rounding of the algebra.
    pub fn to_ising(&self) -> IsingModel {
        let mut h: BTreeMap<usize, f64> = BTreeMap::new();
        let mut j_map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut offset = self.offset;
        for (&i, &q) in &self.linear {
            *h.entry(i).or_insert(0.0) += q / 2.0;
            offset += q / 2.0;
        }
        for (&(i, j), &q) in &self.quadratic {
            *j_map.entry((i, j)).or_insert(0.0) += q / 4.0;
            *h.entry(i).or_insert(0.0) += q / 4.0;
            *h.entry(j).or_insert(0.0) += q / 4.0;
            offset += q / 4.0;
        }
        IsingModel { h, j: j_map, offset }
    }

    /// Flat copies of the terms, for hot loops that should not walk B-trees.
    pub(crate) fn flat_terms(&self) -> (Vec<(usize, f64)>, Vec<(usize, usize, f64)>) {
        let linear = self.linear.iter().map(|(&i, &q)| (i, q)).collect();
        let quadratic = self.quadratic.iter().map(|(&(i, j), &q)| (i, j, q)).collect();
        (linear, quadratic)
    }

    /// Serialization-friendly view; see [`QuboExport`].
    pub fn export(&self) -> QuboExport {
        QuboExport {
            num_vars: self.roles.len(),
            sense: self.sense,
            offset: self.offset,
            linear: self.linear.iter().map(|(&i, &q)| (i.to_string(), q)).collect(),
            quadratic: self.quadratic.iter().map(|(&(i, j), &q)| (i, j, q)).collect(),
            registry: self
                .roles
                .iter()
                .enumerate()
                .map(|(i, &r)| (i.to_string(), r))
                .collect(),
        }
    }

    /// Inverse of [`QuboModel::export`].
    pub fn from_export(e: QuboExport) -> Result<QuboModel> {
        let mut roles = vec![None; e.num_vars];
        for (k, role) in &e.registry {
            let i: usize = k
                .parse()
                .map_err(|_| Error::BadTable(format!("registry key {k:?} is not an index")))?;
            if i >= e.num_vars {
                return Err(Error::VarOutOfBounds { index: i, num_vars: e.num_vars });
            }
            roles[i] = Some(*role);
        }
        let roles: Vec<VarRole> = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.ok_or(Error::RegistryMismatch { index: i }))
            .collect::<Result<_>>()?;
        let mut b = QuboBuilder::new(e.sense);
        for role in roles {
            b.push_var(role);
        }
        b.add_offset(e.offset);
        for (k, q) in &e.linear {
            let i: usize = k
                .parse()
                .map_err(|_| Error::BadTable(format!("linear key {k:?} is not an index")))?;
            b.add_linear(i, *q)?;
        }
        for &(i, j, q) in &e.quadratic {
            b.add_quadratic(i, j, q)?;
        }
        Ok(b.finish())
    }
}

/// JSON shape for a model: string-keyed sparse linear map, `[i, j, q]`
/// triples for couplings, and the full variable registry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboExport {
    pub num_vars: usize,
    pub sense: Sense,
    pub offset: f64,
    pub linear: BTreeMap<String, f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub registry: BTreeMap<String, VarRole>,
}

/// Spin model `E(s) = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j` over
/// `s in {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub h: BTreeMap<usize, f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    /// Evaluates the spin energy; entries must be exactly +1 or -1.
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if let Some(idx) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::BadSpin(idx));
        }
        let mut e = self.offset;
        for (&i, &hi) in &self.h {
            e += hi * f64::from(spins[i]);
        }
        for (&(i, j), &jij) in &self.j {
            e += jij * f64::from(spins[i]) * f64::from(spins[j]);
        }
        Ok(e)
    }
}

/// Spin vector corresponding to a bit vector: 1 -> +1, 0 -> -1.
pub fn bits_to_spins(x: &[bool]) -> Vec<i8> {
    x.iter().map(|&b| if b { 1 } else { -1 }).collect()
}
