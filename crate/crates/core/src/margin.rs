//! Margin correction.
//!
//! After each distribution update the marginal `v_j ~ N(m_j, σ² A_j² C_jj)`
//! of every discrete coordinate is adjusted so that the probability of
//! sampling a value other than `encode(m)_j` stays at least `α`.
//!
//! Two variants exist. The population variant moves the mean towards the
//! nearest midpoint in the extreme-value case and moves both `m_j` and
//! `A_j` in the interior case. The elitist variant keeps the (discretized)
//! mean fixed and only enlarges `A_j`.

use crate::error::{Error, Result};
use crate::numerics::{chi2_ppf_1dof, normal_cdf, normal_quantile, normal_sf, SymmetricMatrix};
use crate::space::{DiscreteSet, SearchSpace};

/// Post-update distribution parameters seen by the correction.
#[derive(Clone, Copy, Debug)]
pub struct MarginInputs<'a> {
    pub m: &'a [f64],
    pub c: &'a SymmetricMatrix,
    pub sigma: f64,
    pub a: &'a [f64],
    pub alpha: f64,
}

impl<'a> MarginInputs<'a> {
    pub fn new(
        m: &'a [f64],
        c: &'a SymmetricMatrix,
        sigma: f64,
        a: &'a [f64],
        alpha: f64,
    ) -> Result<Self> {
        let n = m.len();
        if c.order() != n || a.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: if c.order() != n { c.order() } else { a.len() },
            });
        }
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!(
                "step-size must be positive, got {sigma}"
            )));
        }
        if a.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("diagonal correction must be positive".into()));
        }
        validate_alpha(alpha)?;
        Ok(Self {
            m,
            c,
            sigma,
            a,
            alpha,
        })
    }

    /// Standard deviation `σ A_j √C_jj` of the marginal of `v_j`.
    pub fn marginal_std(&self, j: usize) -> f64 {
        self.sigma * self.a[j] * self.c.diag(j).sqrt()
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidHyperparams(format!(
            "margin must lie in (0, 0.5), got {alpha}"
        )))
    }
}

/// Half-width of the `γ` confidence interval of `v_j`:
/// `√(χ²_ppf(γ) σ² A_j² C_jj)`.
pub fn confidence_radius(inputs: &MarginInputs<'_>, j: usize, gamma: f64) -> Result<f64> {
    let q = chi2_ppf_1dof(gamma)?;
    Ok((q * inputs.sigma * inputs.sigma * inputs.a[j] * inputs.a[j] * inputs.c.diag(j)).sqrt())
}

/// `(Pr(v_j ≤ ℓ_low), Pr(ℓ_up < v_j))` under the marginal of `v_j`.
pub fn tail_probabilities(
    inputs: &MarginInputs<'_>,
    j: usize,
    ell_low: f64,
    ell_up: f64,
) -> Result<(f64, f64)> {
    let s = inputs.marginal_std(j);
    gaussian_tails(inputs.m[j], s, ell_low, ell_up)
        .map_err(|_| Error::DegenerateMarginal { dim: j, std: s })
}

fn gaussian_tails(mean: f64, std: f64, ell_low: f64, ell_up: f64) -> Result<(f64, f64)> {
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::DegenerateMarginal { dim: 0, std });
    }
    Ok((
        normal_cdf((ell_low - mean) / std),
        normal_sf((ell_up - mean) / std),
    ))
}

/// Raises each tail to at least `α/2` and rescales the excess so the three
/// pieces (low tail, middle, upper tail) still sum to one.
pub fn redistribute_tails(p_low: f64, p_up: f64, alpha: f64) -> Result<(f64, f64)> {
    let p_mid = 1.0 - p_low - p_up;
    let half = 0.5 * alpha;
    let low = p_low.max(half);
    let up = p_up.max(half);
    let denominator = low + up + p_mid - 3.0 * half;
    if !(denominator > 0.0) {
        return Err(Error::CorrectionInfeasible { denominator });
    }
    let ratio = (1.0 - low - up - p_mid) / denominator;
    Ok((low + ratio * (low - half), up + ratio * (up - half)))
}

/// Interior case: the new `(m_j, A_j)` whose tails beyond `ℓ_low` and
/// `ℓ_up` equal `targets = (p''_low, p''_up)`.
pub fn correct_interior(
    inputs: &MarginInputs<'_>,
    j: usize,
    ell_low: f64,
    ell_up: f64,
    targets: (f64, f64),
) -> Result<(f64, f64)> {
    let (p_low, p_up) = targets;
    if !(p_low > 0.0 && p_low < 0.5 && p_up > 0.0 && p_up < 0.5) {
        return Err(Error::Domain(format!(
            "tail targets must lie in (0, 0.5), got ({p_low}, {p_up})"
        )));
    }
    // √χ²_ppf(1 − 2p) = Φ⁻¹(1 − p) = −Φ⁻¹(p); the last form keeps precision
    // for small p.
    let sqrt_q_low = -normal_quantile(p_low)?;
    let sqrt_q_up = -normal_quantile(p_up)?;
    let sum = sqrt_q_low + sqrt_q_up;
    if sum < 1e-12 {
        return Err(Error::DegenerateMarginal {
            dim: j,
            std: f64::INFINITY,
        });
    }
    let m_new = (ell_low * sqrt_q_up + ell_up * sqrt_q_low) / sum;
    let scale = inputs.sigma * inputs.c.diag(j).sqrt();
    if !(scale > 0.0) {
        return Err(Error::DegenerateMarginal { dim: j, std: scale });
    }
    let a_new = (ell_up - ell_low) / (scale * sum);
    Ok((m_new, a_new))
}

/// `sign` with `sign(0) = 0`.
fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Extreme-value case of the population variant: pulls `m_j` towards the
/// nearest midpoint until it lies inside the `1 − 2α` confidence interval.
pub fn correct_edge_population(
    inputs: &MarginInputs<'_>,
    set: &DiscreteSet,
    j: usize,
) -> Result<f64> {
    let m = inputs.m[j];
    let ell = set.nearest_midpoint(m);
    let ci = confidence_radius(inputs, j, 1.0 - 2.0 * inputs.alpha)?;
    Ok(ell + signum0(m - ell) * (m - ell).abs().min(ci))
}

/// How the elitist edge case sets `A_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeRule {
    /// Put the nearest midpoint exactly on the `1 − 2α` confidence
    /// boundary, so the change probability is exactly `α`.
    #[default]
    Equality,
    /// Only enlarge `A_j` when the midpoint lies outside the interval.
    Ratchet,
}

/// Extreme-value case of the elitist variant: scales `A_j` so the nearest
/// midpoint sits on the `1 − 2α` confidence boundary.
pub fn correct_edge_elitist(
    inputs: &MarginInputs<'_>,
    set: &DiscreteSet,
    j: usize,
    rule: EdgeRule,
) -> Result<f64> {
    let m = inputs.m[j];
    let dist = (m - set.nearest_midpoint(m)).abs();
    let q = chi2_ppf_1dof(1.0 - 2.0 * inputs.alpha)?;
    if q <= 0.0 {
        return Err(Error::Domain(
            "chi-squared quantile vanished; margin too large".into(),
        ));
    }
    let ci = confidence_radius(inputs, j, 1.0 - 2.0 * inputs.alpha)?;
    if rule == EdgeRule::Ratchet && dist <= ci {
        return Ok(inputs.a[j]);
    }
    let scale = inputs.sigma * (inputs.c.diag(j) * q).sqrt();
    if !(scale > 0.0) {
        return Err(Error::DegenerateMarginal { dim: j, std: scale });
    }
    Ok(dist / scale)
}

/// Population margin correction over all discrete coordinates. Modifies
/// `m` and `a` in place; continuous coordinates are untouched.
pub fn apply_margin_population(
    space: &SearchSpace,
    m: &mut [f64],
    a: &mut [f64],
    c: &SymmetricMatrix,
    sigma: f64,
    alpha: f64,
) -> Result<()> {
    for (j, set) in space.discrete_dims() {
        let inputs = MarginInputs::new(m, c, sigma, a, alpha)?;
        if set.is_edge(m[j]) {
            m[j] = correct_edge_population(&inputs, set, j)?;
        } else {
            let (lo, up) = space.bracketing_midpoints(j, m[j])?;
            let (p_low, p_up) = tail_probabilities(&inputs, j, lo, up)?;
            let targets = redistribute_tails(p_low, p_up, alpha)?;
            let (m_new, a_new) = correct_interior(&inputs, j, lo, up, targets)?;
            m[j] = m_new;
            a[j] = a_new;
        }
    }
    Ok(())
}

/// Elitist margin correction. `m` must hold admissible values in every
/// discrete coordinate and interior sets must be evenly spaced; only `a`
/// changes.
pub fn apply_margin_elitist(
    space: &SearchSpace,
    m: &[f64],
    a: &mut [f64],
    c: &SymmetricMatrix,
    sigma: f64,
    alpha: f64,
    rule: EdgeRule,
) -> Result<()> {
    for (j, set) in space.discrete_dims() {
        let inputs = MarginInputs::new(m, c, sigma, a, alpha)?;
        if set.is_edge(m[j]) {
            a[j] = correct_edge_elitist(&inputs, set, j, rule)?;
        } else {
            let (lo, up) = space.bracketing_midpoints(j, m[j])?;
            let (p_low, p_up) = tail_probabilities(&inputs, j, lo, up)?;
            if (p_low - p_up).abs() > 1e-12 {
                return Err(Error::Usage(format!(
                    "elitist margin expects a discretized mean on an evenly spaced set \
                     (coordinate {j}: tails {p_low} vs {p_up})"
                )));
            }
            let targets = redistribute_tails(p_low, p_up, alpha)?;
            let (_, a_new) = correct_interior(&inputs, j, lo, up, targets)?;
            a[j] = a_new;
        }
    }
    Ok(())
}

/// Mean-preserving correction for a mean that is not discretized (the
/// `m = v` ablation). Extreme values use the elitist edge rule; interior
/// values enlarge `A_j` until both tails are at least `α/2`.
pub fn apply_margin_fixed_mean(
    space: &SearchSpace,
    m: &[f64],
    a: &mut [f64],
    c: &SymmetricMatrix,
    sigma: f64,
    alpha: f64,
    rule: EdgeRule,
) -> Result<()> {
    let z = -normal_quantile(0.5 * alpha)?;
    for (j, set) in space.discrete_dims() {
        let inputs = MarginInputs::new(m, c, sigma, a, alpha)?;
        if set.is_edge(m[j]) {
            a[j] = correct_edge_elitist(&inputs, set, j, rule)?;
        } else {
            let (lo, up) = space.bracketing_midpoints(j, m[j])?;
            let far = (m[j] - lo).max(up - m[j]);
            let scale = sigma * c.diag(j).sqrt();
            if !(scale > 0.0) {
                return Err(Error::DegenerateMarginal { dim: j, std: scale });
            }
            a[j] = a[j].max(far / (scale * z));
        }
    }
    Ok(())
}

/// `Pr(encode(v)_j ≠ encode(m)_j)` for `v_j ~ N(m_j, std²)`.
pub fn change_probability(set: &DiscreteSet, mean: f64, std: f64) -> f64 {
    let k = set.encode_index(mean);
    let mids = set.midpoints();
    let below = if k > 0 {
        normal_cdf((mids[k - 1] - mean) / std)
    } else {
        0.0
    };
    let above = if k < mids.len() {
        normal_sf((mids[k] - mean) / std)
    } else {
        0.0
    };
    below + above
}
