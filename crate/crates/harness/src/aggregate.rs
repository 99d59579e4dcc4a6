//! Per-cell statistics over trial records.

use std::collections::BTreeMap;

use serde::Serialize;

/// The fields of a trial that aggregation needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub algo: String,
    pub problem: String,
    pub dim: usize,
    pub success: bool,
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algo: String,
    pub problem: String,
    pub dim: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
    /// Median evaluations over successful trials divided by the success rate.
    pub adjusted_median: Option<f64>,
    pub adjusted_q25: Option<f64>,
    pub adjusted_q75: Option<f64>,
}

/// Linear-interpolation percentile (type 7) of sorted data, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    match sorted.len() {
        0 => None,
        1 => Some(sorted[0]),
        n => {
            let h = (n - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
        }
    }
}

/// One row per `(algo, problem, dim)` cell, sorted by that key.
pub fn aggregate(outcomes: &[Outcome]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(&str, &str, usize), Vec<&Outcome>> = BTreeMap::new();
    for o in outcomes {
        cells
            .entry((o.algo.as_str(), o.problem.as_str(), o.dim))
            .or_default()
            .push(o);
    }
    cells
        .into_iter()
        .map(|((algo, problem, dim), rows)| summarize_cell(algo, problem, dim, &rows))
        .collect()
}

fn summarize_cell(algo: &str, problem: &str, dim: usize, rows: &[&Outcome]) -> SummaryRow {
    let mut evals: Vec<f64> = rows
        .iter()
        .filter(|o| o.success)
        .map(|o| o.evaluations as f64)
        .collect();
    evals.sort_by(f64::total_cmp);
    let trials = rows.len();
    let successes = evals.len();
    let success_rate = successes as f64 / trials as f64;
    let median = percentile(&evals, 0.5);
    let q25 = percentile(&evals, 0.25);
    let q75 = percentile(&evals, 0.75);
    let adjust = |v: Option<f64>| v.map(|x| x / success_rate);
    SummaryRow {
        algo: algo.to_owned(),
        problem: problem.to_owned(),
        dim,
        trials,
        successes,
        success_rate,
        median,
        q25,
        q75,
        adjusted_median: adjust(median),
        adjusted_q25: adjust(q25),
        adjusted_q75: adjust(q75),
    }
}
