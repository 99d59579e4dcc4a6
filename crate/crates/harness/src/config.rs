//! Run configuration: a TOML run matrix, CLI overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cmawm::benchmarks::{Problem, ProblemKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Problem(#[from] cmawm::Error),
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CmaWm,
    ElitistWm,
    Cga,
    Pbil,
    Ea,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CmaWm => "cma-wm",
            Algorithm::ElitistWm => "elitist-wm",
            Algorithm::Cga => "cga",
            Algorithm::Pbil => "pbil",
            Algorithm::Ea => "ea",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Algorithm::Cga | Algorithm::Pbil | Algorithm::Ea)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experimental cell: a single algorithm on a single problem size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub algo: Algorithm,
    #[serde(serialize_with = "problem_name")]
    pub problem: ProblemKind,
    pub dim: usize,
    pub n_co: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub budget_mult: f64,
    pub target: f64,
    pub eig_floor: f64,
    pub postprocess: bool,
    pub ablate_mean_v: bool,
    pub trace: bool,
}

impl RunConfig {
    /// Defaults of the experimental protocol for one cell.
    pub fn new(algo: Algorithm, problem: ProblemKind, dim: usize) -> Self {
        Self {
            algo,
            problem,
            dim,
            n_co: None,
            trials: 50,
            seed: 0,
            budget_mult: 1e5,
            target: 1e-10,
            eig_floor: 1e-30,
            postprocess: true,
            ablate_mean_v: false,
            trace: false,
        }
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_co(mut self, n_co: usize) -> Self {
        self.n_co = Some(n_co);
        self
    }

    pub fn postprocess(mut self, on: bool) -> Self {
        self.postprocess = on;
        self
    }

    pub fn ablate_mean_v(mut self, on: bool) -> Self {
        self.ablate_mean_v = on;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn budget_mult(mut self, mult: f64) -> Self {
        self.budget_mult = mult;
        self
    }

    /// `N × budget_mult`, rounded down.
    pub fn budget(&self) -> u64 {
        (self.dim as f64 * self.budget_mult).floor() as u64
    }

    pub fn trial_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }

    /// Builds the problem and checks that the algorithm can run on it.
    pub fn validate(&self) -> Result<Problem, ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if !(self.budget_mult > 0.0) || !self.budget_mult.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "budget multiplier must be positive, got {}",
                self.budget_mult
            )));
        }
        if self.budget() == 0 {
            return Err(ConfigError::Invalid(
                "budget N × multiplier is below one evaluation".into(),
            ));
        }
        if !self.target.is_finite() {
            return Err(ConfigError::Invalid("target must be finite".into()));
        }
        if !(self.eig_floor >= 0.0) {
            return Err(ConfigError::Invalid(
                "eigenvalue floor must be non-negative".into(),
            ));
        }
        let problem = Problem::new(self.problem, self.dim, self.n_co)?;
        if self.algo.is_baseline() && !problem.space().is_binary_domain() {
            return Err(ConfigError::Invalid(format!(
                "{} needs a purely binary problem, {} is not",
                self.algo, self.problem
            )));
        }
        if self.ablate_mean_v && self.algo != Algorithm::ElitistWm {
            return Err(ConfigError::Invalid(
                "the mean-update ablation only applies to elitist-wm".into(),
            ));
        }
        Ok(problem)
    }
}

fn problem_name<S: serde::Serializer>(p: &ProblemKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(p.name())
}

/// A scalar or a list in the config file.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Contents of a config file. Every field is optional; CLI flags win.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub algo: Option<OneOrMany<Algorithm>>,
    pub problem: Option<OneOrMany<String>>,
    pub dim: Option<OneOrMany<usize>>,
    pub n_co: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub budget_mult: Option<f64>,
    pub target: Option<f64>,
    pub eig_floor: Option<f64>,
    pub postprocess: Option<bool>,
    pub ablate_mean_v: Option<bool>,
    pub trace: Option<bool>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// Values given on the command line; `None` falls back to the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub algo: Option<Algorithm>,
    pub problem: Option<String>,
    pub dim: Option<usize>,
    pub n_co: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub budget_mult: Option<f64>,
    pub target: Option<f64>,
    pub eig_floor: Option<f64>,
    pub no_postprocess: bool,
    pub ablate_mean_v: bool,
    pub trace: bool,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Every cell of the run matrix plus where and how to run it.
#[derive(Clone, Debug)]
pub struct RunMatrix {
    pub cells: Vec<RunConfig>,
    pub out: PathBuf,
    pub jobs: usize,
}

pub fn resolve(file: FileConfig, cli: Overrides) -> Result<RunMatrix, ConfigError> {
    let algos = match cli.algo {
        Some(a) => vec![a],
        None => file.algo.map(|a| a.to_vec()).unwrap_or_default(),
    };
    let problems = match cli.problem {
        Some(p) => vec![p],
        None => file.problem.map(|p| p.to_vec()).unwrap_or_default(),
    };
    let dims = match cli.dim {
        Some(d) => vec![d],
        None => file.dim.map(|d| d.to_vec()).unwrap_or_default(),
    };
    if algos.is_empty() || problems.is_empty() || dims.is_empty() {
        return Err(ConfigError::Invalid(
            "algorithm, problem and dimension must be given on the command line or in the config file".into(),
        ));
    }
    let out = cli
        .out
        .or(file.out)
        .ok_or_else(|| ConfigError::Invalid("an output directory is required".into()))?;
    let jobs = cli.jobs.or(file.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(ConfigError::Invalid("jobs must be at least 1".into()));
    }

    let mut cells = Vec::new();
    for &algo in &algos {
        for name in &problems {
            let kind: ProblemKind = name.parse()?;
            for &dim in &dims {
                let mut cfg = RunConfig::new(algo, kind, dim);
                cfg.n_co = cli.n_co.or(file.n_co);
                if let Some(t) = cli.trials.or(file.trials) {
                    cfg.trials = t;
                }
                if let Some(s) = cli.seed.or(file.seed) {
                    cfg.seed = s;
                }
                if let Some(b) = cli.budget_mult.or(file.budget_mult) {
                    cfg.budget_mult = b;
                }
                if let Some(t) = cli.target.or(file.target) {
                    cfg.target = t;
                }
                if let Some(e) = cli.eig_floor.or(file.eig_floor) {
                    cfg.eig_floor = e;
                }
                cfg.postprocess = !cli.no_postprocess && file.postprocess.unwrap_or(true);
                cfg.ablate_mean_v = cli.ablate_mean_v || file.ablate_mean_v.unwrap_or(false);
                cfg.trace = cli.trace || file.trace.unwrap_or(false);
                cfg.validate()?;
                cells.push(cfg);
            }
        }
    }
    Ok(RunMatrix { cells, out, jobs })
}
