//! Straight-line reimplementation of the population update on a continuous
//! problem, compared against the optimizer over a few iterations.

use cmawm::cma_wm::{CmaWm, PopulationHyperparams};
use cmawm::{AskTell, RandomStream, SearchSpace};

const N: usize = 5;

struct Oracle {
    m: Vec<f64>,
    sigma: f64,
    c: Vec<Vec<f64>>,
    ps: Vec<f64>,
    pc: Vec<f64>,
    t: u32,
}

fn cholesky(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (c[i][i] - s).sqrt();
            } else {
                l[i][j] = (c[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

fn sphere(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| (i as f64 + 1.0) * v * v)
        .sum()
}

impl Oracle {
    fn step(&mut self, xis: &[Vec<f64>]) {
        let n = N as f64;
        let lambda = 4 + (3.0 * n.ln()).floor() as usize;
        assert_eq!(xis.len(), lambda);
        let mu = lambda / 2;
        let lf = lambda as f64;
        let wp: Vec<f64> = (1..=lambda)
            .map(|i| ((lf + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let sp: f64 = wp[..mu].iter().sum();
        let mueff = sp * sp / wp[..mu].iter().map(|w| w * w).sum::<f64>();
        let sn: f64 = wp[mu..].iter().sum();
        let mueff_neg = sn * sn / wp[mu..].iter().map(|w| w * w).sum::<f64>();
        let cs = (mueff + 2.0) / (n + mueff + 5.0);
        let ds = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
        let c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mueff);
        let cmu =
            (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) * (n + 2.0) + mueff));
        let neg_scale = (1.0 + c1 / cmu)
            .min(1.0 + 2.0 * mueff_neg / (mueff + 2.0))
            .min((1.0 - c1 - cmu) / (n * cmu));
        let w: Vec<f64> = (0..lambda)
            .map(|i| {
                if i < mu {
                    wp[i] / sp
                } else {
                    neg_scale * wp[i] / sn.abs()
                }
            })
            .collect();
        let chi = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

        let l = cholesky(&self.c);
        let ys: Vec<Vec<f64>> = xis
            .iter()
            .map(|xi| {
                (0..N)
                    .map(|i| (0..=i).map(|k| l[i][k] * xi[k]).sum())
                    .collect()
            })
            .collect();
        let xs: Vec<Vec<f64>> = ys
            .iter()
            .map(|y| (0..N).map(|i| self.m[i] + self.sigma * y[i]).collect())
            .collect();
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| sphere(&xs[a]).partial_cmp(&sphere(&xs[b])).unwrap());

        let mut yw = vec![0.0; N];
        let mut xiw = vec![0.0; N];
        for r in 0..mu {
            for i in 0..N {
                yw[i] += w[r] * ys[order[r]][i];
                xiw[i] += w[r] * xis[order[r]][i];
            }
        }
        for i in 0..N {
            self.m[i] += self.sigma * yw[i];
            self.ps[i] = (1.0 - cs) * self.ps[i] + (cs * (2.0 - cs) * mueff).sqrt() * xiw[i];
        }
        let ps_norm = self.ps.iter().map(|p| p * p).sum::<f64>().sqrt();
        self.t += 1;
        let hs = ps_norm / (1.0 - (1.0 - cs).powi(2 * self.t as i32)).sqrt()
            < (1.4 + 2.0 / (n + 1.0)) * chi;
        let hs = if hs { 1.0 } else { 0.0 };
        for i in 0..N {
            self.pc[i] = (1.0 - cc) * self.pc[i] + hs * (cc * (2.0 - cc) * mueff).sqrt() * yw[i];
        }
        let wsum: f64 = w.iter().sum();
        let mut c = self.c.clone();
        for i in 0..N {
            for j in 0..N {
                let mut v =
                    (1.0 + (1.0 - hs) * c1 * cc * (2.0 - cc) - c1 - cmu * wsum) * self.c[i][j];
                v += c1 * self.pc[i] * self.pc[j];
                for r in 0..lambda {
                    let k = order[r];
                    let wr = if w[r] >= 0.0 {
                        w[r]
                    } else {
                        w[r] * n / xis[k].iter().map(|z| z * z).sum::<f64>()
                    };
                    v += cmu * wr * ys[k][i] * ys[k][j];
                }
                c[i][j] = v;
            }
        }
        self.c = c;
        self.sigma *= ((cs / ds) * (ps_norm / chi - 1.0)).exp();
    }
}

#[test]
fn matches_straight_line_oracle() {
    let space = SearchSpace::continuous(N).unwrap();
    let hyper = PopulationHyperparams::default_for(&space).unwrap();
    let m0 = vec![1.0, -2.0, 0.5, 3.0, -1.5];
    let mut opt = CmaWm::new(space, hyper.clone(), m0.clone(), 0.8).unwrap();
    let mut oracle = Oracle {
        m: m0,
        sigma: 0.8,
        c: (0..N)
            .map(|i| (0..N).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect(),
        ps: vec![0.0; N],
        pc: vec![0.0; N],
        t: 0,
    };
    let mut rng = RandomStream::new(11);
    for _ in 0..3 {
        let xis: Vec<Vec<f64>> = (0..hyper.lambda)
            .map(|_| rng.standard_normal_vec(N))
            .collect();
        let points = opt.ask_with_normals(xis.clone()).unwrap();
        let values: Vec<f64> = points.iter().map(|p| sphere(p.as_slice())).collect();
        AskTell::<f64>::tell(&mut opt, &values).unwrap();
        oracle.step(&xis);

        let st = opt.state();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
        assert!(
            close(st.sigma, oracle.sigma),
            "{} vs {}",
            st.sigma,
            oracle.sigma
        );
        for i in 0..N {
            assert!(close(st.m[i], oracle.m[i]));
            assert!(close(st.p_sigma[i], oracle.ps[i]));
            assert!(close(st.p_c[i], oracle.pc[i]));
            for j in 0..N {
                assert!(close(st.c.get(i, j), oracle.c[i][j]), "C[{i}][{j}]");
            }
        }
    }
}
