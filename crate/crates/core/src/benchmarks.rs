//! Benchmark objectives for mixed-integer, integer and binary domains.
//!
//! Mixed problems split `N` into `N/2` continuous and `N/2` discrete
//! coordinates unless told otherwise. Integer coordinates range over
//! `[-10, 10]`. The three binary functions are maximized; optimizers see
//! them through [`RankKey`], which negates them and keeps BinVal exact for
//! any `N`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::space::{DiscreteSet, SearchSpace};

/// Bits of BinVal packed into [`RankKey::major`]; the rest go to `minor`.
const MAJOR_BITS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    SphereOneMax,
    SphereLeadingOnes,
    EllipsoidOneMax,
    EllipsoidLeadingOnes,
    SphereInt,
    EllipsoidInt,
    OneMax,
    LeadingOnes,
    BinVal,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 9] = [
        ProblemKind::SphereOneMax,
        ProblemKind::SphereLeadingOnes,
        ProblemKind::EllipsoidOneMax,
        ProblemKind::EllipsoidLeadingOnes,
        ProblemKind::SphereInt,
        ProblemKind::EllipsoidInt,
        ProblemKind::OneMax,
        ProblemKind::LeadingOnes,
        ProblemKind::BinVal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::SphereOneMax => "sphere-one-max",
            ProblemKind::SphereLeadingOnes => "sphere-leading-ones",
            ProblemKind::EllipsoidOneMax => "ellipsoid-one-max",
            ProblemKind::EllipsoidLeadingOnes => "ellipsoid-leading-ones",
            ProblemKind::SphereInt => "sphere-int",
            ProblemKind::EllipsoidInt => "ellipsoid-int",
            ProblemKind::OneMax => "one-max",
            ProblemKind::LeadingOnes => "leading-ones",
            ProblemKind::BinVal => "bin-val",
        }
    }

    pub fn sense(self) -> Sense {
        if self.is_pure_binary() {
            Sense::Maximize
        } else {
            Sense::Minimize
        }
    }

    fn is_pure_binary(self) -> bool {
        matches!(
            self,
            ProblemKind::OneMax | ProblemKind::LeadingOnes | ProblemKind::BinVal
        )
    }

    fn is_integer(self) -> bool {
        matches!(self, ProblemKind::SphereInt | ProblemKind::EllipsoidInt)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown problem `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Lexicographic minimization key. Derived ordering compares `major` first.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct RankKey {
    pub major: f64,
    pub minor: f64,
}

impl RankKey {
    pub fn scalar(v: f64) -> Self {
        Self {
            major: v,
            minor: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    kind: ProblemKind,
    n_co: usize,
    space: SearchSpace,
}

impl Problem {
    /// `n_co` defaults to `N/2` for mixed problems and 0 for the integer
    /// problems; the binary problems never have continuous coordinates.
    pub fn new(kind: ProblemKind, dim: usize, n_co: Option<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        let n_co = if kind.is_pure_binary() {
            match n_co {
                None | Some(0) => 0,
                Some(k) => {
                    return Err(Error::InvalidSpace(format!(
                        "{kind} has no continuous coordinates, got n_co = {k}"
                    )))
                }
            }
        } else if kind.is_integer() {
            n_co.unwrap_or(0)
        } else {
            match n_co {
                Some(k) => k,
                None if dim % 2 == 0 => dim / 2,
                None => {
                    return Err(Error::InvalidSpace(format!(
                        "{kind} splits N evenly, got odd N = {dim}"
                    )))
                }
            }
        };
        if n_co >= dim {
            return Err(Error::InvalidSpace(format!(
                "n_co = {n_co} leaves no discrete coordinates for N = {dim}"
            )));
        }
        let set = if kind.is_integer() {
            DiscreteSet::integer_range(-10, 10)?
        } else {
            DiscreteSet::binary()
        };
        let space = SearchSpace::new(n_co, vec![set; dim - n_co])?;
        Ok(Self { kind, n_co, space })
    }

    pub fn by_name(name: &str, dim: usize, n_co: Option<usize>) -> Result<Self> {
        Self::new(name.parse()?, dim, n_co)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn n_continuous(&self) -> usize {
        self.n_co
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn sense(&self) -> Sense {
        self.kind.sense()
    }

    /// Objective value in its native sense.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let (co, disc) = x.split_at(self.n_co);
        match self.kind {
            ProblemKind::SphereOneMax => sphere(co) + disc.len() as f64 - one_max(disc),
            ProblemKind::SphereLeadingOnes => sphere(co) + disc.len() as f64 - leading_ones(disc),
            ProblemKind::EllipsoidOneMax => ellipsoid(co) + disc.len() as f64 - one_max(disc),
            ProblemKind::EllipsoidLeadingOnes => {
                ellipsoid(co) + disc.len() as f64 - leading_ones(disc)
            }
            ProblemKind::SphereInt => sphere(x),
            ProblemKind::EllipsoidInt => ellipsoid(x),
            ProblemKind::OneMax => one_max(x),
            ProblemKind::LeadingOnes => leading_ones(x),
            ProblemKind::BinVal => bin_val(x),
        }
    }

    /// Minimization key with the exact order of the native objective.
    pub fn rank_key(&self, x: &[f64]) -> RankKey {
        match self.kind {
            ProblemKind::BinVal => {
                let split = x.len().saturating_sub(MAJOR_BITS);
                let (high, low) = x.split_at(x.len() - split);
                RankKey {
                    major: -bin_val(high),
                    minor: -bin_val(low),
                }
            }
            k if k.sense() == Sense::Maximize => RankKey::scalar(-self.evaluate(x)),
            _ => RankKey::scalar(self.evaluate(x)),
        }
    }

    /// Optimal native value.
    pub fn optimum_value(&self) -> f64 {
        let n = self.dim();
        match self.kind {
            ProblemKind::OneMax | ProblemKind::LeadingOnes => n as f64,
            ProblemKind::BinVal => 2f64.powi(n as i32) - 1.0,
            _ => 0.0,
        }
    }

    /// A global optimizer of the objective.
    pub fn optimum_point(&self) -> Vec<f64> {
        if self.kind.is_integer() {
            vec![0.0; self.dim()]
        } else {
            let mut x = vec![1.0; self.dim()];
            x[..self.n_co].fill(0.0);
            x
        }
    }

    /// Minimization problems succeed at `f ≤ target`; the binary ones only
    /// at the all-ones string.
    pub fn is_solved(&self, x: &[f64], value: f64, target: f64) -> bool {
        match self.sense() {
            Sense::Minimize => value <= target,
            Sense::Maximize => x.iter().all(|&b| b == 1.0),
        }
    }
}

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `Σ (1000^{(j−1)/(n−1)} x_j)²`; a single coordinate has weight 1.
fn ellipsoid(x: &[f64]) -> f64 {
    let n = x.len();
    if n <= 1 {
        return sphere(x);
    }
    x.iter()
        .enumerate()
        .map(|(j, v)| {
            let w = 1000f64.powf(j as f64 / (n - 1) as f64);
            (w * v).powi(2)
        })
        .sum()
}

fn one_max(x: &[f64]) -> f64 {
    x.iter().sum()
}

fn leading_ones(x: &[f64]) -> f64 {
    x.iter().take_while(|&&b| b == 1.0).count() as f64
}

/// Exact for up to 53 bits.
fn bin_val(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, &b| 2.0 * acc + b)
}
