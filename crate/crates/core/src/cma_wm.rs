//! (μ/μ_w, λ)-CMA-ES with margin.
//!
//! Each iteration draws `λ` samples `x_i = m + σ y_i` and their corrected
//! counterparts `v_i = m + σ A y_i`, evaluates the encoded `v̄_i`, and
//! recombines the uncorrected `x_i`. The margin correction then adjusts
//! `m` and `A` for the discrete coordinates.

use crate::error::{Error, Result};
use crate::margin::{apply_margin_population, validate_alpha};
use crate::numerics::{
    expected_chi_norm, factor_sqrt, min_eigenvalue, LowerTriangular, SymmetricMatrix,
};
use crate::optimizer::{check_told, ranking, AskTell, Snapshot};
use crate::rng::RandomStream;
use crate::space::{FeasiblePoint, SearchSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationHyperparams {
    pub lambda: usize,
    pub mu: usize,
    /// All `λ` recombination weights; the first `μ` are positive and sum
    /// to one, the rest are non-positive (active update).
    pub weights: Vec<f64>,
    pub mu_w: f64,
    pub c_m: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub alpha: f64,
}

impl PopulationHyperparams {
    /// Defaults for `space`: `λ = 4 + ⌊3 ln N⌋` and `α = 1/(λN)`.
    pub fn default_for(space: &SearchSpace) -> Result<Self> {
        let n = space.dim();
        if n < 2 {
            return Err(Error::InvalidHyperparams(
                "default population settings need N >= 2".into(),
            ));
        }
        let lambda = 4 + (3.0 * (n as f64).ln()).floor() as usize;
        Self::with_lambda(space, lambda)
    }

    /// Tutorial defaults for an explicit population size.
    pub fn with_lambda(space: &SearchSpace, lambda: usize) -> Result<Self> {
        let n = space.dim();
        if lambda < 2 {
            return Err(Error::InvalidHyperparams(
                "lambda must be at least 2".into(),
            ));
        }
        let nf = n as f64;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=lambda)
            .map(|i| (0.5 * (lambda as f64 + 1.0)).ln() - (i as f64).ln())
            .collect();
        let pos_sum: f64 = raw[..mu].iter().sum();
        let pos_sq: f64 = raw[..mu].iter().map(|w| w * w).sum();
        let mu_w = pos_sum * pos_sum / pos_sq;
        let neg_sum: f64 = raw[mu..].iter().map(|w| w.abs()).sum();
        let neg_sq: f64 = raw[mu..].iter().map(|w| w * w).sum();
        let mu_w_neg = if neg_sq > 0.0 {
            neg_sum * neg_sum / neg_sq
        } else {
            0.0
        };

        let c_sigma = (mu_w + 2.0) / (nf + mu_w + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_w - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_w / nf) / (nf + 4.0 + 2.0 * mu_w / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_w);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_w - 2.0 + 1.0 / mu_w) / ((nf + 2.0).powi(2) + mu_w));

        let alpha_mu_neg = 1.0 + c_1 / c_mu;
        let alpha_mu_eff_neg = 1.0 + 2.0 * mu_w_neg / (mu_w + 2.0);
        let alpha_posdef_neg = (1.0 - c_1 - c_mu) / (nf * c_mu);
        let neg_scale = alpha_mu_neg.min(alpha_mu_eff_neg).min(alpha_posdef_neg);

        let weights = raw
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                if i < mu {
                    w / pos_sum
                } else if neg_sum > 0.0 {
                    neg_scale * w / neg_sum
                } else {
                    0.0
                }
            })
            .collect();

        let hyper = Self {
            lambda,
            mu,
            weights,
            mu_w,
            c_m: 1.0,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            alpha: 1.0 / (lambda as f64 * nf),
        };
        hyper.validate(space)?;
        Ok(hyper)
    }

    pub fn validate(&self, space: &SearchSpace) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidHyperparams(msg.into()));
        if self.weights.len() != self.lambda || self.mu == 0 || self.mu > self.lambda {
            return bad("weights must have length lambda and 1 <= mu <= lambda");
        }
        let (pos, neg) = self.weights.split_at(self.mu);
        if pos.iter().any(|&w| !(w > 0.0)) || neg.iter().any(|&w| w > 0.0) {
            return bad("first mu weights must be positive and the rest non-positive");
        }
        if self.weights.windows(2).any(|w| w[0] < w[1]) {
            return bad("weights must be non-increasing");
        }
        if (pos.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return bad("positive weights must sum to one");
        }
        for (name, r) in [
            ("c_m", self.c_m),
            ("c_sigma", self.c_sigma),
            ("c_c", self.c_c),
            ("c_1", self.c_1),
            ("c_mu", self.c_mu),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidHyperparams(format!(
                    "{name} must lie in (0, 1], got {r}"
                )));
            }
        }
        if !(self.d_sigma > 0.0) {
            return bad("d_sigma must be positive");
        }
        validate_alpha(self.alpha)?;
        if space.discrete_sets().iter().any(|s| s.len() > 2) && self.alpha >= 1.0 / 3.0 {
            return bad("margin must be below 1/3 when interior corrections can occur");
        }
        Ok(())
    }
}

/// Full state of the Gaussian search model.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionState {
    pub m: Vec<f64>,
    pub c: SymmetricMatrix,
    pub sigma: f64,
    pub a: Vec<f64>,
    pub p_sigma: Vec<f64>,
    pub p_c: Vec<f64>,
    pub t: u64,
}

impl DistributionState {
    pub fn new(m: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!(
                "initial step-size must be positive, got {sigma}"
            )));
        }
        let n = m.len();
        Ok(Self {
            c: SymmetricMatrix::identity(n),
            a: vec![1.0; n],
            p_sigma: vec![0.0; n],
            p_c: vec![0.0; n],
            m,
            sigma,
            t: 0,
        })
    }

    pub fn marginal_std(&self) -> Vec<f64> {
        (0..self.m.len())
            .map(|j| self.sigma * self.a[j] * self.c.diag(j).sqrt())
            .collect()
    }
}

/// Reparameterization applied after the margin correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PostProcess {
    None,
    /// `σ ← σ min A`, `A ← A / min A`.
    RescaleA,
    /// Binary domains only: `m ← (m − ½)/σ + ½`, `σ ← 1`.
    ResetSigma,
}

/// One candidate of an iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_bar: FeasiblePoint,
}

#[derive(Clone, Debug)]
pub struct CmaWm {
    space: SearchSpace,
    hyper: PopulationHyperparams,
    state: DistributionState,
    factor: LowerTriangular,
    post: PostProcess,
    expected_norm: f64,
    pending: Option<Vec<Sample>>,
}

impl CmaWm {
    pub fn new(
        space: SearchSpace,
        hyper: PopulationHyperparams,
        m0: Vec<f64>,
        sigma0: f64,
    ) -> Result<Self> {
        if m0.len() != space.dim() {
            return Err(Error::Shape {
                expected: space.dim(),
                got: m0.len(),
            });
        }
        hyper.validate(&space)?;
        let state = DistributionState::new(m0, sigma0)?;
        let factor = LowerTriangular::identity(space.dim());
        let expected_norm = expected_chi_norm(space.dim())?;
        Ok(Self {
            space,
            hyper,
            state,
            factor,
            post: PostProcess::None,
            expected_norm,
            pending: None,
        })
    }

    pub fn with_post_process(mut self, post: PostProcess) -> Result<Self> {
        if post == PostProcess::ResetSigma && !self.space.is_binary_domain() {
            return Err(Error::Usage(
                "sigma-reset post-process requires a purely binary search space".into(),
            ));
        }
        self.post = post;
        Ok(self)
    }

    pub fn state(&self) -> &DistributionState {
        &self.state
    }

    pub fn hyperparams(&self) -> &PopulationHyperparams {
        &self.hyper
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    /// Samples pending evaluation, if an `ask` is outstanding.
    pub fn pending(&self) -> Option<&[Sample]> {
        self.pending.as_deref()
    }

    /// Builds the candidates of this iteration from given standard-normal
    /// vectors instead of the random stream.
    pub fn ask_with_normals(&mut self, normals: Vec<Vec<f64>>) -> Result<Vec<FeasiblePoint>> {
        let n = self.space.dim();
        if normals.len() != self.hyper.lambda {
            return Err(Error::Shape {
                expected: self.hyper.lambda,
                got: normals.len(),
            });
        }
        let st = &self.state;
        let mut samples = Vec::with_capacity(normals.len());
        for xi in normals {
            if xi.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: xi.len(),
                });
            }
            let y = self.factor.mul_vec(&xi);
            let x: Vec<f64> = (0..n).map(|j| st.m[j] + st.sigma * y[j]).collect();
            let v: Vec<f64> = (0..n)
                .map(|j| st.m[j] + st.sigma * (st.a[j] * y[j]))
                .collect();
            let v_bar = self.space.encode(&v)?;
            samples.push(Sample { xi, y, x, v, v_bar });
        }
        let points = samples.iter().map(|s| s.v_bar.clone()).collect();
        self.pending = Some(samples);
        Ok(points)
    }

    fn update(&mut self, samples: &[Sample], order: &[usize]) -> Result<()> {
        let n = self.space.dim();
        let h = &self.hyper;
        let st = &mut self.state;
        let mu = h.mu;

        // Mean: m + c_m Σ w_i (x_{i:λ} − m).
        let mut shift = vec![0.0; n];
        let mut xi_w = vec![0.0; n];
        let mut y_w = vec![0.0; n];
        for (rank, &i) in order[..mu].iter().enumerate() {
            let w = h.weights[rank];
            let s = &samples[i];
            for j in 0..n {
                shift[j] += w * (s.x[j] - st.m[j]);
                xi_w[j] += w * s.xi[j];
                y_w[j] += w * s.y[j];
            }
        }
        for j in 0..n {
            st.m[j] += h.c_m * shift[j];
        }

        let cs = h.c_sigma;
        let ps_coeff = (cs * (2.0 - cs) * h.mu_w).sqrt();
        for j in 0..n {
            st.p_sigma[j] = (1.0 - cs) * st.p_sigma[j] + ps_coeff * xi_w[j];
        }
        let ps_norm = norm(&st.p_sigma);

        let t1 = (st.t + 1) as f64;
        let h_sigma = ps_norm / (1.0 - (1.0 - cs).powf(2.0 * t1)).sqrt()
            < (1.4 + 2.0 / (n as f64 + 1.0)) * self.expected_norm;
        let h_sigma = if h_sigma { 1.0 } else { 0.0 };

        let cc = h.c_c;
        let pc_coeff = h_sigma * (cc * (2.0 - cc) * h.mu_w).sqrt();
        for j in 0..n {
            st.p_c[j] = (1.0 - cc) * st.p_c[j] + pc_coeff * y_w[j];
        }

        let weight_sum: f64 = h.weights.iter().sum();
        let decay = 1.0 - h.c_mu * weight_sum - h.c_1 + (1.0 - h_sigma) * h.c_1 * cc * (2.0 - cc);
        let rank_mu: Vec<(f64, &[f64])> = order
            .iter()
            .enumerate()
            .map(|(rank, &i)| {
                let w = h.weights[rank];
                let s = &samples[i];
                let xi_sq: f64 = s.xi.iter().map(|z| z * z).sum();
                // ξ = 0 implies y = 0, so the term vanishes either way.
                let w_circ = if w >= 0.0 {
                    w
                } else if xi_sq > 0.0 {
                    w * n as f64 / xi_sq
                } else {
                    0.0
                };
                (h.c_mu * w_circ, s.y.as_slice())
            })
            .collect();
        let rank_one = (h.c_1, st.p_c.as_slice());
        st.c.scale_add_outer(decay, rank_mu.into_iter().chain(std::iter::once(rank_one)));

        st.sigma *= ((cs / h.d_sigma) * (ps_norm / self.expected_norm - 1.0)).exp();
        Ok(())
    }

    fn post_process(&mut self) {
        let st = &mut self.state;
        match self.post {
            PostProcess::None => {}
            PostProcess::RescaleA => rescale_a(&mut st.sigma, &mut st.a),
            PostProcess::ResetSigma => {
                for (j, set) in self.space.discrete_dims() {
                    let ell = set.midpoints()[0];
                    st.m[j] = (st.m[j] - ell) / st.sigma + ell;
                }
                st.sigma = 1.0;
            }
        }
    }
}

/// `σ ← σ · min A`, `A ← A / min A`; leaves every product `σ A_j` unchanged
/// up to rounding and makes `min A = 1`.
pub fn rescale_a(sigma: &mut f64, a: &mut [f64]) {
    let a_min = a.iter().copied().fold(f64::INFINITY, f64::min);
    if !(a_min > 0.0) || !a_min.is_finite() {
        return;
    }
    *sigma *= a_min;
    for x in a.iter_mut() {
        *x /= a_min;
    }
}

/// Binary-domain reparameterization applied to a population state:
/// `m_j ← (m_j − ℓ_j)/σ + ℓ_j`, `σ ← 1`.
pub fn binary_postprocess(state: &mut DistributionState, space: &SearchSpace) -> Result<()> {
    if !space.is_binary_domain() {
        return Err(Error::Usage(
            "binary post-process requires a purely binary search space".into(),
        ));
    }
    for (j, set) in space.discrete_dims() {
        let ell = set.midpoints()[0];
        state.m[j] = (state.m[j] - ell) / state.sigma + ell;
    }
    state.sigma = 1.0;
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `σ² λ_min(C) < floor`, using a Gershgorin bound to skip the
/// eigen-decomposition when the answer is clearly no.
pub(crate) fn scaled_covariance_below(c: &SymmetricMatrix, sigma: f64, floor: f64) -> bool {
    let s2 = sigma * sigma;
    if s2 * c.gershgorin_lower_bound() >= floor {
        return false;
    }
    s2 * min_eigenvalue(c) < floor
}

impl<F: PartialOrd + Clone> AskTell<F> for CmaWm {
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>> {
        let n = self.space.dim();
        let normals = (0..self.hyper.lambda)
            .map(|_| rng.standard_normal_vec(n))
            .collect();
        self.ask_with_normals(normals)
    }

    fn tell(&mut self, values: &[F]) -> Result<()> {
        let samples = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("tell called without a pending ask".into()))?;
        if let Err(e) = check_told(samples.len(), values) {
            self.pending = Some(samples);
            return Err(e);
        }
        let order = ranking(values)?;
        self.update(&samples, &order)?;
        let st = &mut self.state;
        apply_margin_population(
            &self.space,
            &mut st.m,
            &mut st.a,
            &st.c,
            st.sigma,
            self.hyper.alpha,
        )?;
        self.post_process();
        self.state.t += 1;
        self.factor = factor_sqrt(&self.state.c)?;
        Ok(())
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
