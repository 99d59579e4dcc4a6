//! Ask/tell protocol shared by every optimizer in the crate.
//!
//! All optimizers minimize. Fitness values only need a partial order; plain
//! `f64` works, and [`crate::benchmarks::RankKey`] gives an exact order for
//! objectives that exceed `f64` precision.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::space::FeasiblePoint;

/// Per-iteration view of the search distribution, used for traces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Snapshot {
    pub sigma: Option<f64>,
    pub mean: Vec<f64>,
    /// `σ A_j √C_jj`, or the Bernoulli standard deviation for the
    /// probability-vector baselines.
    pub marginal_std: Vec<f64>,
}

/// Outcome of one [`AskTell::step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<F> {
    pub evaluations: usize,
    pub best_point: FeasiblePoint,
    pub best_value: F,
}

pub trait AskTell<F: PartialOrd + Clone> {
    /// Candidate points to evaluate next.
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>>;

    /// Fitness values for the points of the last `ask`, in the same order.
    fn tell(&mut self, values: &[F]) -> Result<()>;

    fn snapshot(&self) -> Snapshot;

    /// True when the smallest eigenvalue of `σ² C` is below `floor`.
    /// Optimizers without a Gaussian model never trigger this.
    fn covariance_below(&self, _floor: f64) -> bool {
        false
    }

    /// One ask, evaluate, tell round.
    fn step(
        &mut self,
        rng: &mut RandomStream,
        f: &mut dyn FnMut(&FeasiblePoint) -> F,
    ) -> Result<StepRecord<F>> {
        let points = self.ask(rng)?;
        let values: Vec<F> = points.iter().map(|p| f(p)).collect();
        let best = best_index(&values)?;
        let record = StepRecord {
            evaluations: points.len(),
            best_point: points[best].clone(),
            best_value: values[best].clone(),
        };
        self.tell(&values)?;
        Ok(record)
    }
}

fn compare<F: PartialOrd>(a: &F, b: &F) -> Result<Ordering> {
    a.partial_cmp(b)
        .ok_or_else(|| Error::Protocol("fitness values are not comparable (NaN?)".into()))
}

/// Indices sorted by ascending fitness; equal values keep draw order.
pub(crate) fn ranking<F: PartialOrd>(values: &[F]) -> Result<Vec<usize>> {
    for w in values.windows(2) {
        compare(&w[0], &w[1])?;
    }
    if let Some(first) = values.first() {
        compare(first, first)?;
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    Ok(idx)
}

/// Index of the first minimal value.
pub(crate) fn best_index<F: PartialOrd>(values: &[F]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::Protocol("no fitness values".into()));
    }
    let mut best = 0;
    for i in 1..values.len() {
        if compare(&values[i], &values[best])? == Ordering::Less {
            best = i;
        }
    }
    Ok(best)
}

pub(crate) fn check_told<F>(expected: usize, values: &[F]) -> Result<()> {
    if values.len() != expected {
        return Err(Error::Protocol(format!(
            "expected {expected} fitness values, got {}",
            values.len()
        )));
    }
    Ok(())
}
