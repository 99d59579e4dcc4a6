//! A single seeded trial: initialization, the optimization loop and the
//! termination rules.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use cmawm::baselines::{Cga, OnePlusOneEa, Pbil};
use cmawm::benchmarks::{Problem, RankKey};
use cmawm::cma_wm::{CmaWm, PopulationHyperparams, PostProcess};
use cmawm::elitist::{ElitistHyperparams, ElitistOptions, ElitistWm, MeanUpdate};
use cmawm::{AskTell, RandomStream};
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, ConfigError, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Target,
    Budget,
    EigenvalueFloor,
    /// The covariance lost positive definiteness or a margin correction
    /// could not be computed.
    Numerical,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::Target => "target",
            Reason::Budget => "budget",
            Reason::EigenvalueFloor => "eigenvalue-floor",
            Reason::Numerical => "numerical",
        })
    }
}

/// Distribution quantities after one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub evaluations: u64,
    pub best_f: f64,
    pub sigma: Option<f64>,
    pub abs_mean: Vec<f64>,
    pub marginal_std: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub algo: Algorithm,
    pub problem: String,
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub evaluations: u64,
    pub best_f: f64,
    pub reason: Reason,
    pub trace: Option<Vec<TraceRow>>,
}

type Optimizer = Box<dyn AskTell<RankKey>>;

fn initial_mean(problem: &Problem, rng: &mut RandomStream) -> Vec<f64> {
    let space = problem.space();
    (0..space.dim())
        .map(|j| match space.discrete_set(j) {
            Some(set) if set.is_binary() => 0.5,
            _ => rng.uniform_range(1.0, 3.0),
        })
        .collect()
}

fn build(cfg: &RunConfig, problem: &Problem, rng: &mut RandomStream) -> cmawm::Result<Optimizer> {
    let space = problem.space().clone();
    let n = space.dim();
    Ok(match cfg.algo {
        Algorithm::CmaWm => {
            let post = if !cfg.postprocess {
                PostProcess::None
            } else if space.is_binary_domain() {
                PostProcess::ResetSigma
            } else if space.is_fully_discrete() {
                PostProcess::RescaleA
            } else {
                PostProcess::None
            };
            let m0 = initial_mean(problem, rng);
            let hyper = PopulationHyperparams::default_for(&space)?;
            Box::new(CmaWm::new(space, hyper, m0, 1.0)?.with_post_process(post)?)
        }
        Algorithm::ElitistWm => {
            let mut options = ElitistOptions::default_for(&space);
            options.post_process &= cfg.postprocess;
            if cfg.ablate_mean_v {
                options.mean_update = MeanUpdate::Raw;
            }
            let m0 = initial_mean(problem, rng);
            let hyper = ElitistHyperparams::default_for(n);
            Box::new(ElitistWm::<RankKey>::new(space, hyper, options, m0, 1.0)?)
        }
        Algorithm::Cga => Box::new(Cga::new(&space)?),
        Algorithm::Pbil => Box::new(Pbil::new(&space)?),
        Algorithm::Ea => Box::new(OnePlusOneEa::<RankKey>::new(&space)?),
    })
}

/// Runs trial `index` of `cfg` with seed `cfg.seed + index`.
///
/// Configuration problems are reported before any evaluation. Numerical
/// breakdowns inside the optimizer end the trial with [`Reason::Numerical`].
pub fn run_trial(cfg: &RunConfig, index: usize) -> Result<TrialRecord, ConfigError> {
    let problem = cfg.validate()?;
    let seed = cfg.trial_seed(index);
    let mut rng = RandomStream::new(seed);
    let mut opt = build(cfg, &problem, &mut rng)?;
    let budget = cfg.budget();

    let mut evaluations = 0u64;
    let mut best: Option<(RankKey, f64, bool)> = None;
    let mut trace = cfg.trace.then(Vec::new);
    let mut iteration = 0u64;

    let reason = loop {
        let points = match opt.ask(&mut rng) {
            Ok(p) => p,
            Err(e) => {
                log::debug!("trial {index}: ask failed: {e}");
                break Reason::Numerical;
            }
        };
        if evaluations + points.len() as u64 > budget {
            break Reason::Budget;
        }
        let mut keys = Vec::with_capacity(points.len());
        for p in &points {
            let value = problem.evaluate(p);
            let key = problem.rank_key(p);
            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                best = Some((key, value, problem.is_solved(p, value, cfg.target)));
            }
            keys.push(key);
        }
        evaluations += points.len() as u64;
        if let Err(e) = opt.tell(&keys) {
            log::debug!("trial {index}: tell failed: {e}");
            break Reason::Numerical;
        }
        iteration += 1;
        let best_f = best.as_ref().map_or(f64::NAN, |b| b.1);
        if let Some(rows) = trace.as_mut() {
            let snap = opt.snapshot();
            rows.push(TraceRow {
                iteration,
                evaluations,
                best_f,
                sigma: snap.sigma,
                abs_mean: snap.mean.iter().map(|m| m.abs()).collect(),
                marginal_std: snap.marginal_std,
            });
        }
        if best.as_ref().is_some_and(|b| b.2) {
            break Reason::Target;
        }
        if evaluations >= budget {
            break Reason::Budget;
        }
        if opt.covariance_below(cfg.eig_floor) {
            break Reason::EigenvalueFloor;
        }
    };

    Ok(TrialRecord {
        algo: cfg.algo,
        problem: problem.name().to_owned(),
        dim: problem.dim(),
        trial: index,
        seed,
        success: reason == Reason::Target,
        evaluations,
        best_f: best.map_or(f64::NAN, |b| b.1),
        reason,
        trace,
    })
}

/// Runs every trial of `cfg` on up to `jobs` threads. Records come back in
/// trial order.
pub fn run_trials(cfg: &RunConfig, jobs: usize) -> Result<Vec<TrialRecord>, ConfigError> {
    cfg.validate()?;
    let jobs = jobs.clamp(1, cfg.trials);
    if jobs == 1 {
        return (0..cfg.trials).map(|i| run_trial(cfg, i)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<TrialRecord, ConfigError>>>> =
        Mutex::new((0..cfg.trials).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfg.trials {
                    break;
                }
                let rec = run_trial(cfg, i);
                slots.lock().expect("slot lock poisoned")[i] = Some(rec);
            });
        }
    });
    slots
        .into_inner()
        .expect("slot lock poisoned")
        .into_iter()
        .map(|r| r.expect("every trial index is claimed once"))
        .collect()
}
