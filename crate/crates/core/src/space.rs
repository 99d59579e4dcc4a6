//! Mixed-integer search space and the midpoint-threshold encoding.
//!
//! Coordinates `0..n_continuous` are continuous; each remaining coordinate
//! takes values from an ordered finite set. Binary variables are simply the
//! set `{0, 1}`.

use crate::error::{Error, Result};

/// Admissible values of one discrete coordinate and the midpoints between
/// consecutive values.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSet {
    values: Vec<f64>,
    midpoints: Vec<f64>,
}

impl DiscreteSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "a discrete set needs at least two values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace("discrete values must be finite".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpace(
                "discrete values must be strictly increasing".into(),
            ));
        }
        let midpoints = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self { values, midpoints })
    }

    /// All integers in `lo..=hi`.
    pub fn integer_range(lo: i64, hi: i64) -> Result<Self> {
        Self::new((lo..=hi).map(|z| z as f64).collect())
    }

    pub fn binary() -> Self {
        Self {
            values: vec![0.0, 1.0],
            midpoints: vec![0.5],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values == [0.0, 1.0]
    }

    /// True when consecutive gaps agree to a relative tolerance of 1e-12.
    pub fn is_evenly_spaced(&self) -> bool {
        let first = self.values[1] - self.values[0];
        self.values
            .windows(2)
            .all(|w| ((w[1] - w[0]) - first).abs() <= 1e-12 * first.abs().max(1.0))
    }

    /// Index `k` of the value selected by the encoding.
    #[inline]
    pub fn encode_index(&self, x: f64) -> usize {
        self.midpoints.partition_point(|&l| l < x)
    }

    #[inline]
    pub fn encode(&self, x: f64) -> f64 {
        self.values[self.encode_index(x)]
    }

    /// True when `x` encodes to the smallest or largest admissible value.
    pub fn is_edge(&self, x: f64) -> bool {
        let k = self.encode_index(x);
        k == 0 || k + 1 == self.values.len()
    }

    /// Midpoint closest to `x`; ties resolve to the lower midpoint.
    pub fn nearest_midpoint(&self, x: f64) -> f64 {
        let idx = self.midpoints.partition_point(|&l| l < x);
        if idx == 0 {
            return self.midpoints[0];
        }
        if idx == self.midpoints.len() {
            return self.midpoints[idx - 1];
        }
        let below = self.midpoints[idx - 1];
        let above = self.midpoints[idx];
        if x - below <= above - x {
            below
        } else {
            above
        }
    }

    /// Largest midpoint strictly below `x` and smallest midpoint at or above
    /// `x`.
    pub fn bracketing_midpoints(&self, x: f64) -> Option<(f64, f64)> {
        let idx = self.midpoints.partition_point(|&l| l < x);
        if idx == 0 || idx == self.midpoints.len() {
            None
        } else {
            Some((self.midpoints[idx - 1], self.midpoints[idx]))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpace {
    n_continuous: usize,
    discrete: Vec<DiscreteSet>,
}

/// A point of the search space; every discrete coordinate holds an
/// admissible value.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasiblePoint(Vec<f64>);

impl FeasiblePoint {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for FeasiblePoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl SearchSpace {
    pub fn new(n_continuous: usize, discrete: Vec<DiscreteSet>) -> Result<Self> {
        if n_continuous + discrete.len() == 0 {
            return Err(Error::InvalidSpace("search space has no dimensions".into()));
        }
        Ok(Self {
            n_continuous,
            discrete,
        })
    }

    pub fn continuous(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn binary(n: usize) -> Result<Self> {
        Self::new(0, vec![DiscreteSet::binary(); n])
    }

    pub fn dim(&self) -> usize {
        self.n_continuous + self.discrete.len()
    }

    pub fn n_continuous(&self) -> usize {
        self.n_continuous
    }

    pub fn n_discrete(&self) -> usize {
        self.discrete.len()
    }

    pub fn discrete_sets(&self) -> &[DiscreteSet] {
        &self.discrete
    }

    /// The discrete set of coordinate `j`, or `None` for a continuous one.
    pub fn discrete_set(&self, j: usize) -> Option<&DiscreteSet> {
        j.checked_sub(self.n_continuous)
            .and_then(|k| self.discrete.get(k))
    }

    fn require_discrete(&self, j: usize) -> Result<&DiscreteSet> {
        self.discrete_set(j)
            .ok_or_else(|| Error::Usage(format!("coordinate {j} is not a discrete dimension")))
    }

    /// Discrete coordinates paired with their global indices.
    pub fn discrete_dims(&self) -> impl Iterator<Item = (usize, &DiscreteSet)> {
        self.discrete
            .iter()
            .enumerate()
            .map(move |(k, set)| (self.n_continuous + k, set))
    }

    /// No continuous coordinates and at least one discrete one.
    pub fn is_fully_discrete(&self) -> bool {
        self.n_continuous == 0 && !self.discrete.is_empty()
    }

    pub fn is_binary_domain(&self) -> bool {
        self.is_fully_discrete() && self.discrete.iter().all(DiscreteSet::is_binary)
    }

    pub fn encode(&self, v: &[f64]) -> Result<FeasiblePoint> {
        if v.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let mut out = v.to_vec();
        for (j, set) in self.discrete_dims() {
            out[j] = set.encode(v[j]);
        }
        Ok(FeasiblePoint(out))
    }

    /// Checks that `values` already lies in the space.
    pub fn feasible(&self, values: Vec<f64>) -> Result<FeasiblePoint> {
        let point = self.encode(&values)?;
        if point.0 != values {
            return Err(Error::Usage(
                "point has inadmissible discrete values".into(),
            ));
        }
        Ok(point)
    }

    pub fn nearest_midpoint(&self, j: usize, m: f64) -> Result<f64> {
        Ok(self.require_discrete(j)?.nearest_midpoint(m))
    }

    pub fn bracketing_midpoints(&self, j: usize, m: f64) -> Result<(f64, f64)> {
        self.require_discrete(j)?
            .bracketing_midpoints(m)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "coordinate {j} at {m} encodes to an extreme value; no bracketing midpoints"
                ))
            })
    }
}
