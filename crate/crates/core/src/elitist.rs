//! (1+1)-CMA-ES with margin.
//!
//! One candidate per iteration, accepted when it is not worse than the
//! incumbent. The step-size follows a smoothed success rate, the mean jumps
//! to the encoded candidate on success, and the margin correction only
//! touches the diagonal `A` so that the discretized mean stays put.

use crate::cma_wm::{rescale_a, scaled_covariance_below};
use crate::error::{Error, Result};
use crate::margin::{apply_margin_elitist, apply_margin_fixed_mean, validate_alpha, EdgeRule};
use crate::numerics::{factor_sqrt, LowerTriangular, SymmetricMatrix};
use crate::optimizer::{check_told, AskTell, Snapshot};
use crate::rng::RandomStream;
use crate::space::{FeasiblePoint, SearchSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct ElitistHyperparams {
    pub d_sigma: f64,
    pub p_target: f64,
    pub c_p: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub p_thresh: f64,
    pub alpha: f64,
}

impl ElitistHyperparams {
    pub fn default_for(n: usize) -> Self {
        let nf = n as f64;
        Self {
            d_sigma: 1.0 + nf / 2.0,
            p_target: 2.0 / 11.0,
            c_p: 1.0 / 12.0,
            c_c: 2.0 / (nf + 2.0),
            c_1: 2.0 / (nf * nf + 6.0),
            p_thresh: 0.44,
            alpha: 1.0 / nf,
        }
    }

    pub fn validate(&self, space: &SearchSpace) -> Result<()> {
        let unit = |name: &str, x: f64, lo_open: bool| -> Result<()> {
            let ok = if lo_open {
                x > 0.0 && x <= 1.0
            } else {
                (0.0..=1.0).contains(&x)
            };
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidHyperparams(format!(
                    "{name} out of range: {x}"
                )))
            }
        };
        unit("c_p", self.c_p, true)?;
        unit("c_c", self.c_c, true)?;
        unit("c_1", self.c_1, true)?;
        unit("p_thresh", self.p_thresh, false)?;
        if !(self.p_target > 0.0 && self.p_target < 1.0) {
            return Err(Error::InvalidHyperparams(
                "p_target must lie in (0, 1)".into(),
            ));
        }
        if !(self.d_sigma > 0.0) {
            return Err(Error::InvalidHyperparams("d_sigma must be positive".into()));
        }
        if space.n_discrete() > 0 {
            validate_alpha(self.alpha)?;
        }
        let interior = space.discrete_sets().iter().any(|s| s.len() > 2);
        if interior && self.alpha >= 1.0 / 3.0 {
            return Err(Error::InvalidHyperparams(
                "margin must be below 1/3 when interior corrections can occur".into(),
            ));
        }
        Ok(())
    }
}

/// What the mean becomes after a successful iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MeanUpdate {
    /// `m ← v̄` (the encoded candidate).
    #[default]
    Discretized,
    /// `m ← v` (ablation: the raw candidate before encoding).
    Raw,
}

/// How the covariance square root follows the covariance update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FactorUpdate {
    /// Fresh Cholesky factorization after every accepted step, O(N³).
    #[default]
    Refactor,
    /// Rank-one Cholesky update, O(N²).
    RankOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElitistOptions {
    pub mean_update: MeanUpdate,
    pub factor_update: FactorUpdate,
    pub edge_rule: EdgeRule,
    /// Rescale `(σ, A)` after the margin correction. Meant for fully
    /// discrete domains.
    pub post_process: bool,
}

impl ElitistOptions {
    /// Post-process on exactly when the domain has no continuous part.
    pub fn default_for(space: &SearchSpace) -> Self {
        Self {
            mean_update: MeanUpdate::Discretized,
            factor_update: FactorUpdate::Refactor,
            edge_rule: EdgeRule::Equality,
            post_process: space.is_fully_discrete(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElitistState<F> {
    pub m: Vec<f64>,
    pub c: SymmetricMatrix,
    pub sigma: f64,
    pub a: Vec<f64>,
    pub p_c: Vec<f64>,
    pub p_succ: f64,
    /// Fitness of the incumbent; `None` until the initial mean is evaluated.
    pub f_best: Option<F>,
    pub t: u64,
}

impl<F> ElitistState<F> {
    pub fn marginal_std(&self) -> Vec<f64> {
        (0..self.m.len())
            .map(|j| self.sigma * self.a[j] * self.c.diag(j).sqrt())
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Pending {
    Initial,
    Candidate {
        y: Vec<f64>,
        v: Vec<f64>,
        v_bar: FeasiblePoint,
    },
}

#[derive(Clone, Debug)]
pub struct ElitistWm<F> {
    space: SearchSpace,
    hyper: ElitistHyperparams,
    options: ElitistOptions,
    state: ElitistState<F>,
    factor: LowerTriangular,
    pending: Option<Pending>,
}

impl<F: PartialOrd + Clone> ElitistWm<F> {
    /// Starts from `C = I`, `A = I`, `p_c = 0`, `p_succ = p_target`, with the
    /// discrete coordinates of `m0` replaced by their encoding. The first
    /// `ask` returns this mean so that its fitness can be recorded.
    pub fn new(
        space: SearchSpace,
        hyper: ElitistHyperparams,
        options: ElitistOptions,
        m0: Vec<f64>,
        sigma0: f64,
    ) -> Result<Self> {
        hyper.validate(&space)?;
        if !(sigma0 > 0.0) {
            return Err(Error::Domain(format!(
                "initial step-size must be positive, got {sigma0}"
            )));
        }
        if options.mean_update == MeanUpdate::Discretized {
            for (j, set) in space.discrete_dims() {
                if set.len() > 2 && !set.is_evenly_spaced() {
                    return Err(Error::InvalidSpace(format!(
                        "coordinate {j}: the elitist margin correction needs evenly spaced \
                         values; remap the set to equally spaced integers first"
                    )));
                }
            }
        }
        let m = space.encode(&m0)?.into_inner();
        let n = space.dim();
        let state = ElitistState {
            m,
            c: SymmetricMatrix::identity(n),
            sigma: sigma0,
            a: vec![1.0; n],
            p_c: vec![0.0; n],
            p_succ: hyper.p_target,
            f_best: None,
            t: 0,
        };
        Ok(Self {
            space,
            hyper,
            options,
            state,
            factor: LowerTriangular::identity(n),
            pending: None,
        })
    }

    pub fn state(&self) -> &ElitistState<F> {
        &self.state
    }

    pub fn hyperparams(&self) -> &ElitistHyperparams {
        &self.hyper
    }

    pub fn options(&self) -> &ElitistOptions {
        &self.options
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    /// The covariance factor currently used for sampling.
    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    /// Candidate built from a given standard-normal vector.
    pub fn ask_with_normal(&mut self, xi: &[f64]) -> Result<FeasiblePoint> {
        let n = self.space.dim();
        if xi.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: xi.len(),
            });
        }
        if self.state.f_best.is_none() {
            return Err(Error::Protocol(
                "the initial mean has not been evaluated".into(),
            ));
        }
        let st = &self.state;
        let y = self.factor.mul_vec(xi);
        let v: Vec<f64> = (0..n)
            .map(|j| st.m[j] + st.sigma * (st.a[j] * y[j]))
            .collect();
        let v_bar = self.space.encode(&v)?;
        self.pending = Some(Pending::Candidate {
            y,
            v,
            v_bar: v_bar.clone(),
        });
        Ok(v_bar)
    }

    fn update(&mut self, y: Vec<f64>, v: Vec<f64>, v_bar: FeasiblePoint, value: F) -> Result<()> {
        let h = &self.hyper;
        let st = &mut self.state;
        let f_best = st.f_best.as_ref().expect("initial mean evaluated");
        let success = match value.partial_cmp(f_best) {
            Some(o) => o.is_le(),
            None => {
                return Err(Error::Protocol(
                    "fitness values are not comparable (NaN?)".into(),
                ))
            }
        };

        st.p_succ = (1.0 - h.c_p) * st.p_succ + if success { h.c_p } else { 0.0 };
        st.sigma *= ((st.p_succ - h.p_target) / ((1.0 - h.p_target) * h.d_sigma)).exp();

        if success {
            st.m = match self.options.mean_update {
                MeanUpdate::Discretized => v_bar.into_inner(),
                MeanUpdate::Raw => v,
            };
            st.f_best = Some(value);
            let stalled = st.p_succ >= h.p_thresh;
            let cc = h.c_c;
            let path_coeff = if stalled {
                0.0
            } else {
                (cc * (2.0 - cc)).sqrt()
            };
            for (p, yj) in st.p_c.iter_mut().zip(&y) {
                *p = (1.0 - cc) * *p + path_coeff * yj;
            }
            let delta = if stalled {
                h.c_1 * cc * (2.0 - cc)
            } else {
                0.0
            };
            let decay = 1.0 - h.c_1 + delta;
            st.c.scale_add_outer(decay, [(h.c_1, st.p_c.as_slice())]);
            match self.options.factor_update {
                FactorUpdate::Refactor => self.factor = factor_sqrt(&st.c)?,
                FactorUpdate::RankOne => self.factor.rank_one_update(decay, h.c_1, &st.p_c),
            }
        }

        match self.options.mean_update {
            MeanUpdate::Discretized => {
                let rule = self.options.edge_rule;
                apply_margin_elitist(
                    &self.space,
                    &st.m,
                    &mut st.a,
                    &st.c,
                    st.sigma,
                    h.alpha,
                    rule,
                )?
            }
            MeanUpdate::Raw => {
                let rule = self.options.edge_rule;
                apply_margin_fixed_mean(
                    &self.space,
                    &st.m,
                    &mut st.a,
                    &st.c,
                    st.sigma,
                    h.alpha,
                    rule,
                )?
            }
        }
        if self.options.post_process {
            postprocess_discrete(&mut st.sigma, &mut st.a);
        }
        st.t += 1;
        Ok(())
    }
}

/// `σ ← σ · min A`, `A ← A / min A`; every product `σ A_j` is kept.
pub fn postprocess_discrete(sigma: &mut f64, a: &mut [f64]) {
    rescale_a(sigma, a);
}

impl<F: PartialOrd + Clone> AskTell<F> for ElitistWm<F> {
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>> {
        if self.state.f_best.is_none() {
            self.pending = Some(Pending::Initial);
            return Ok(vec![self.space.feasible(self.state.m.clone())?]);
        }
        let xi = rng.standard_normal_vec(self.space.dim());
        Ok(vec![self.ask_with_normal(&xi)?])
    }

    fn tell(&mut self, values: &[F]) -> Result<()> {
        check_told(1, values)?;
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("tell called without a pending ask".into()))?;
        let value = values[0].clone();
        match pending {
            Pending::Initial => {
                if value.partial_cmp(&value).is_none() {
                    return Err(Error::Protocol("initial fitness is not comparable".into()));
                }
                self.state.f_best = Some(value);
                Ok(())
            }
            Pending::Candidate { y, v, v_bar } => self.update(y, v, v_bar, value),
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            sigma: Some(self.state.sigma),
            mean: self.state.m.clone(),
            marginal_std: self.state.marginal_std(),
        }
    }

    fn covariance_below(&self, floor: f64) -> bool {
        scaled_covariance_below(&self.state.c, self.state.sigma, floor)
    }
}
