//! Scalar special functions and dense symmetric linear algebra.
//!
//! The covariance square root is the lower Cholesky factor `L` with
//! `C = L Lᵀ`; samples are drawn as `y = L ξ`. This choice is fixed so that
//! a given seed always produces the same sequence of candidate solutions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 − Φ(x)` without cancellation for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

// Rational approximation coefficients (P. J. Acklam), relative error 1.15e-9
// before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.02425;

fn tail_rational(q: f64) -> f64 {
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation followed by one Halley step against
/// `Φ` evaluated through `erfc`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    let x = if p < P_LOW {
        tail_rational((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail_rational((-2.0 * (1.0 - p).ln()).sqrt())
    };
    // Halley refinement; in the upper half the residual is taken on the
    // survival function so that it stays accurate near p = 1.
    let e = if x > 0.0 {
        (1.0 - p) - normal_sf(x)
    } else {
        normal_cdf(x) - p
    };
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// `γ`-quantile of the χ² distribution with one degree of freedom.
pub fn chi2_ppf_1dof(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "chi-squared quantile requires 0 <= gamma < 1, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let z = normal_quantile(0.5 * (1.0 + gamma))?;
    Ok(z * z)
}

/// Series approximation of `E‖N(0, I_n)‖`.
pub fn expected_chi_norm(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let n = n as f64;
    Ok(n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n)))
}

/// Dense symmetric matrix stored row-major in full.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn identity(order: usize) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            entries[i * order + i] = 1.0;
        }
        Self { order, entries }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::identity(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries, symmetrizing by averaging with
    /// the transpose. Fails if the entry count is not a perfect square.
    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Shape {
                expected: order * order,
                got: entries.len(),
            });
        }
        let mut m = Self { order, entries };
        m.symmetrize();
        Ok(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.entries[i * self.order + i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// `self ← scale · self + Σ coeff_k · v_k v_kᵀ`, followed by exact
    /// symmetrization.
    pub fn scale_add_outer<'a, I>(&mut self, scale: f64, terms: I)
    where
        I: IntoIterator<Item = (f64, &'a [f64])>,
    {
        let n = self.order;
        for e in self.entries.iter_mut() {
            *e *= scale;
        }
        for (coeff, v) in terms {
            debug_assert_eq!(v.len(), n);
            for i in 0..n {
                let ci = coeff * v[i];
                let row = &mut self.entries[i * n..(i + 1) * n];
                for (r, &vj) in row.iter_mut().zip(v) {
                    *r += ci * vj;
                }
            }
        }
        self.symmetrize();
    }

    fn symmetrize(&mut self) {
        let n = self.order;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.entries[i * n + j] + self.entries[j * n + i]);
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg;
            }
        }
    }

    /// Lower bound on the smallest eigenvalue from Gershgorin discs.
    pub fn gershgorin_lower_bound(&self) -> f64 {
        let n = self.order;
        (0..n)
            .map(|i| {
                let row = &self.entries[i * n..(i + 1) * n];
                let off: f64 = row
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, x)| x.abs())
                    .sum();
                row[i] - off
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Lower-triangular factor `L` with `C = L Lᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangular {
    order: usize,
    entries: Vec<f64>,
}

impl LowerTriangular {
    pub fn identity(order: usize) -> Self {
        let SymmetricMatrix { entries, .. } = SymmetricMatrix::identity(order);
        Self { order, entries }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    /// `L x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order;
        (0..n)
            .map(|i| {
                self.entries[i * n..=i * n + i]
                    .iter()
                    .zip(x)
                    .map(|(l, xi)| l * xi)
                    .sum()
            })
            .collect()
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let n = self.order;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.get(i, k) * self.get(j, k)).sum();
                entries[i * n + j] = s;
                entries[j * n + i] = s;
            }
        }
        SymmetricMatrix { order: n, entries }
    }

    /// Updates the factor in O(n²) so that it factors `scale · C + beta · v vᵀ`
    /// where `C` is the matrix currently factored. Requires `scale > 0`,
    /// `beta ≥ 0`.
    pub fn rank_one_update(&mut self, scale: f64, beta: f64, v: &[f64]) {
        let n = self.order;
        let root = scale.sqrt();
        for e in self.entries.iter_mut() {
            *e *= root;
        }
        let mut x: Vec<f64> = v.iter().map(|vi| beta.sqrt() * vi).collect();
        for k in 0..n {
            let lkk = self.entries[k * n + k];
            let r = lkk.hypot(x[k]);
            let c = r / lkk;
            let s = x[k] / lkk;
            self.entries[k * n + k] = r;
            for i in (k + 1)..n {
                let lik = (self.entries[i * n + k] + s * x[i]) / c;
                self.entries[i * n + k] = lik;
                x[i] = c * x[i] - s * lik;
            }
        }
    }
}

/// Cholesky factorization `C = L Lᵀ`.
pub fn factor_sqrt(c: &SymmetricMatrix) -> Result<LowerTriangular> {
    let n = c.order;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = c.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Factorization { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = c.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(LowerTriangular {
        order: n,
        entries: l,
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(c: &SymmetricMatrix) -> f64 {
    let m = DMatrix::from_row_slice(c.order, c.order, &c.entries);
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_quantile(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0, 40.0);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.75).unwrap() - 0.674_489_750_2).abs() < 1e-9);
        assert!((normal_quantile(0.9).unwrap() - 1.281_551_565_5).abs() < 1e-9);
        assert!((normal_quantile(0.75).unwrap() - bisect_quantile(0.75)).abs() < 1e-11);
    }

    #[test]
    fn quantile_rejects_outside_unit_interval() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_grid_round_trip() {
        for k in 1..1000 {
            let p = 0.001 * k as f64;
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() <= 1e-9, "p={p}");
        }
    }

    #[test]
    fn quantile_far_tails() {
        for p in [1e-300, 1e-20, 1e-10, 1e-5] {
            let x = normal_quantile(p).unwrap();
            assert!(((normal_cdf(x) - p) / p).abs() < 1e-9);
            if p >= 1e-10 {
                let y = normal_quantile(1.0 - p).unwrap();
                assert!((normal_sf(y) - p).abs() / p < 1e-5);
            }
        }
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_ppf_1dof(0.0).unwrap(), 0.0);
        assert!((chi2_ppf_1dof(0.5).unwrap() - 0.454_936_42).abs() < 1e-8);
        assert!((chi2_ppf_1dof(0.8).unwrap() - 1.642_374_42).abs() < 1e-8);
        assert!(chi2_ppf_1dof(1.0).is_err());
        assert!(chi2_ppf_1dof(-1e-12).is_err());
    }

    #[test]
    fn chi2_strictly_increasing() {
        let mut prev = -1.0;
        for k in 0..1000 {
            let q = chi2_ppf_1dof(k as f64 / 1000.0).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn expected_norm_examples() {
        assert!((expected_chi_norm(1).unwrap() - 0.797_619_05).abs() < 1e-8);
        assert!((expected_chi_norm(4).unwrap() - 1.880_952_38).abs() < 1e-8);
        assert!((expected_chi_norm(100).unwrap() - 9.975_047_62).abs() < 1e-8);
        assert!(expected_chi_norm(0).is_err());
        for n in 2..500 {
            let e = expected_chi_norm(n).unwrap();
            assert!(e > ((n - 1) as f64).sqrt() && e < (n as f64).sqrt());
        }
    }

    #[test]
    fn cholesky_diagonal_cases() {
        let l = factor_sqrt(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(l, LowerTriangular::identity(3));
        let l = factor_sqrt(&SymmetricMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 1), 3.0);
        assert_eq!(l.get(1, 0), 0.0);
    }

    #[test]
    fn cholesky_reports_offending_pivot() {
        let c = SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        match factor_sqrt(&c) {
            Err(Error::Factorization { index, pivot }) => {
                assert_eq!(index, 1);
                assert!((pivot + 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!(
            (min_eigenvalue(&SymmetricMatrix::from_diagonal(&[1.0, 2.0, 3.0])) - 1.0).abs() < 1e-12
        );
        assert!((min_eigenvalue(&SymmetricMatrix::identity(4)) - 1.0).abs() < 1e-12);
        let c = SymmetricMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((min_eigenvalue(&c) - 1.0).abs() < 1e-12);
        assert!(c.gershgorin_lower_bound() <= 1.0);
    }

    #[test]
    fn outer_update_is_symmetric() {
        let mut c = SymmetricMatrix::identity(3);
        let v = [0.1, -0.7, 0.3];
        let w = [1.0, 0.2, 0.9];
        c.scale_add_outer(0.9, [(0.3, &v[..]), (-0.05, &w[..])]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c.get(i, j).to_bits(), c.get(j, i).to_bits());
            }
        }
        let expect = 0.9 + 0.3 * 0.49 - 0.05 * 0.04;
        assert!((c.get(1, 1) - expect).abs() < 1e-15);
    }
}
