//! Bit-string baselines: compact GA, PBIL and the (1+1)-EA.
//!
//! Like every optimizer in the crate they minimize; a maximization problem
//! is handed over with its values negated. Learning and mutation rates are
//! `1/N`, and the probability vectors are clamped to `[1/N, 1 − 1/N]`.

use crate::error::{Error, Result};
use crate::optimizer::{best_index, check_told, AskTell, Snapshot};
use crate::rng::RandomStream;
use crate::space::{FeasiblePoint, SearchSpace};

/// Marginal probabilities of sampling a one, kept inside
/// `[1/N, 1 − 1/N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl ProbabilityVector {
    /// All entries at one half.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("probability vector needs N >= 2".into()));
        }
        let margin = 1.0 / n as f64;
        Ok(Self {
            p: vec![0.5; n],
            lower: margin,
            upper: 1.0 - margin,
        })
    }

    pub fn from_probs(p: Vec<f64>) -> Result<Self> {
        let mut pv = Self::uniform(p.len())?;
        pv.p = p;
        pv.clamp();
        Ok(pv)
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    fn clamp(&mut self) {
        for x in self.p.iter_mut() {
            *x = x.clamp(self.lower, self.upper);
        }
    }

    fn sample(&self, rng: &mut RandomStream) -> Vec<f64> {
        self.p
            .iter()
            .map(|&p| if rng.uniform() < p { 1.0 } else { 0.0 })
            .collect()
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            sigma: None,
            mean: self.p.clone(),
            marginal_std: self.p.iter().map(|p| (p * (1.0 - p)).sqrt()).collect(),
        }
    }
}

fn require_binary(space: &SearchSpace) -> Result<usize> {
    if !space.is_binary_domain() {
        return Err(Error::Usage(
            "baseline optimizers need a purely binary space".into(),
        ));
    }
    Ok(space.dim())
}

/// Compact genetic algorithm: two samples per iteration, the winner pulls
/// each differing bit by `1/N`.
#[derive(Clone, Debug)]
pub struct Cga {
    pv: ProbabilityVector,
    rate: f64,
    pending: Option<[Vec<f64>; 2]>,
}

impl Cga {
    pub fn new(space: &SearchSpace) -> Result<Self> {
        let n = require_binary(space)?;
        Ok(Self {
            pv: ProbabilityVector::uniform(n)?,
            rate: 1.0 / n as f64,
            pending: None,
        })
    }

    pub fn with_probabilities(pv: ProbabilityVector) -> Self {
        let rate = 1.0 / pv.len() as f64;
        Self {
            pv,
            rate,
            pending: None,
        }
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.pv
    }

    /// Moves every bit where `winner` and `loser` differ towards the winner.
    pub fn update(&mut self, winner: &[f64], loser: &[f64]) {
        for ((p, &w), &l) in self.pv.p.iter_mut().zip(winner).zip(loser) {
            if w != l {
                *p += if w > l { self.rate } else { -self.rate };
            }
        }
        self.pv.clamp();
    }
}

impl<F: PartialOrd + Clone> AskTell<F> for Cga {
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>> {
        let a = self.pv.sample(rng);
        let b = self.pv.sample(rng);
        let out = vec![bits(a.clone()), bits(b.clone())];
        self.pending = Some([a, b]);
        Ok(out)
    }

    fn tell(&mut self, values: &[F]) -> Result<()> {
        check_told(2, values)?;
        let [a, b] = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("tell called without a pending ask".into()))?;
        match values[0].partial_cmp(&values[1]) {
            Some(std::cmp::Ordering::Less) => self.update(&a, &b),
            Some(std::cmp::Ordering::Greater) => self.update(&b, &a),
            Some(std::cmp::Ordering::Equal) => {}
            None => return Err(Error::Protocol("fitness values are not comparable".into())),
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        self.pv.snapshot()
    }
}

/// Population-based incremental learning with a single-best update.
#[derive(Clone, Debug)]
pub struct Pbil {
    pv: ProbabilityVector,
    lambda: usize,
    rate: f64,
    pending: Option<Vec<Vec<f64>>>,
}

impl Pbil {
    /// `λ = 4 + ⌊3 ln N⌋`, learning rate `1/N`.
    pub fn new(space: &SearchSpace) -> Result<Self> {
        let n = require_binary(space)?;
        let lambda = 4 + (3.0 * (n as f64).ln()).floor() as usize;
        Ok(Self {
            pv: ProbabilityVector::uniform(n)?,
            lambda,
            rate: 1.0 / n as f64,
            pending: None,
        })
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.pv
    }

    /// `p ← (1 − r) p + r · best`, then clamp.
    pub fn update(&mut self, best: &[f64]) {
        for (p, &b) in self.pv.p.iter_mut().zip(best) {
            *p = (1.0 - self.rate) * *p + self.rate * b;
        }
        self.pv.clamp();
    }
}

impl<F: PartialOrd + Clone> AskTell<F> for Pbil {
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>> {
        let samples: Vec<Vec<f64>> = (0..self.lambda).map(|_| self.pv.sample(rng)).collect();
        let out = samples.iter().cloned().map(bits).collect();
        self.pending = Some(samples);
        Ok(out)
    }

    fn tell(&mut self, values: &[F]) -> Result<()> {
        let samples = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("tell called without a pending ask".into()))?;
        check_told(samples.len(), values)?;
        let best = best_index(values)?;
        self.update(&samples[best]);
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        self.pv.snapshot()
    }
}

/// (1+1)-EA with standard bit mutation at rate `1/N`; ties are accepted.
#[derive(Clone, Debug)]
pub struct OnePlusOneEa<F> {
    n: usize,
    rate: f64,
    parent: Option<(Vec<f64>, F)>,
    pending: Option<Vec<f64>>,
}

impl<F: PartialOrd + Clone> OnePlusOneEa<F> {
    /// The first `ask` returns a uniformly random bit string.
    pub fn new(space: &SearchSpace) -> Result<Self> {
        let n = require_binary(space)?;
        Ok(Self {
            n,
            rate: 1.0 / n as f64,
            parent: None,
            pending: None,
        })
    }

    /// Starts from a known parent and its fitness.
    pub fn with_parent(space: &SearchSpace, parent: Vec<f64>, fitness: F) -> Result<Self> {
        let mut ea = Self::new(space)?;
        ea.parent = Some((parent, fitness));
        Ok(ea)
    }

    pub fn parent(&self) -> Option<(&[f64], &F)> {
        self.parent.as_ref().map(|(x, f)| (x.as_slice(), f))
    }
}

impl<F: PartialOrd + Clone> AskTell<F> for OnePlusOneEa<F> {
    fn ask(&mut self, rng: &mut RandomStream) -> Result<Vec<FeasiblePoint>> {
        let child: Vec<f64> = match &self.parent {
            None => (0..self.n)
                .map(|_| if rng.uniform() < 0.5 { 1.0 } else { 0.0 })
                .collect(),
            Some((x, _)) => x
                .iter()
                .map(|&b| {
                    if rng.uniform() < self.rate {
                        1.0 - b
                    } else {
                        b
                    }
                })
                .collect(),
        };
        self.pending = Some(child.clone());
        Ok(vec![bits(child)])
    }

    fn tell(&mut self, values: &[F]) -> Result<()> {
        check_told(1, values)?;
        let child = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("tell called without a pending ask".into()))?;
        let value = values[0].clone();
        let accept = match &self.parent {
            None => true,
            Some((_, f)) => value
                .partial_cmp(f)
                .ok_or_else(|| Error::Protocol("fitness values are not comparable".into()))?
                .is_le(),
        };
        if accept {
            self.parent = Some((child, value));
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            sigma: None,
            mean: self
                .parent
                .as_ref()
                .map(|(x, _)| x.clone())
                .unwrap_or_default(),
            marginal_std: Vec::new(),
        }
    }
}

fn bits(v: Vec<f64>) -> FeasiblePoint {
    // Every entry is 0.0 or 1.0 by construction.
    SearchSpace::binary(v.len())
        .and_then(|s| s.feasible(v))
        .expect("bit strings are feasible")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn onemax_neg(x: &FeasiblePoint) -> f64 {
        -x.iter().sum::<f64>()
    }

    #[test]
    fn cga_update_examples() {
        let mut cga = Cga::with_probabilities(ProbabilityVector::uniform(10).unwrap());
        let mut w = vec![0.0; 10];
        let mut l = vec![0.0; 10];
        w[0] = 1.0;
        l[1] = 1.0;
        w[2] = 1.0;
        l[2] = 1.0;
        cga.update(&w, &l);
        let p = cga.probabilities().probs();
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert!((p[1] - 0.4).abs() < 1e-15);
        assert_eq!(p[2], 0.5);
        assert_eq!(p[3], 0.5);

        let mut top = vec![0.5; 10];
        top[0] = 0.9;
        let mut cga = Cga::with_probabilities(ProbabilityVector::from_probs(top).unwrap());
        cga.update(&w, &l);
        assert!((cga.probabilities().probs()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn cga_ties_do_nothing() {
        let space = SearchSpace::binary(6).unwrap();
        let mut cga = Cga::new(&space).unwrap();
        let mut rng = RandomStream::new(4);
        AskTell::<f64>::ask(&mut cga, &mut rng).unwrap();
        cga.tell(&[1.0, 1.0]).unwrap();
        assert_eq!(cga.probabilities().probs(), &[0.5; 6]);
    }

    #[test]
    fn pbil_update_examples() {
        let space = SearchSpace::binary(10).unwrap();
        let mut pbil = Pbil::new(&space).unwrap();
        pbil.update(&[1.0; 10]);
        for &p in pbil.probabilities().probs() {
            assert!((p - 0.55).abs() < 1e-15);
        }
        let mut frozen = Pbil::new(&space).unwrap().with_rate(0.0);
        frozen.update(&[1.0; 10]);
        assert_eq!(frozen.probabilities().probs(), &[0.5; 10]);
    }

    #[test]
    fn pbil_two_steps_match_recursion() {
        let space = SearchSpace::binary(10).unwrap();
        let mut pbil = Pbil::new(&space).unwrap();
        pbil.update(&[1.0; 10]);
        pbil.update(&[1.0; 10]);
        // 1 − p_t = (1 − r)^t (1 − p_0)
        let expect = 1.0 - 0.9f64.powi(2) * 0.5;
        for &p in pbil.probabilities().probs() {
            assert!((p - expect).abs() < 1e-15);
        }
        assert_eq!(pbil.lambda(), 4 + (3.0 * 10f64.ln()).floor() as usize);
    }

    #[test]
    fn ea_acceptance_rule() {
        let space = SearchSpace::binary(4).unwrap();
        let mut ea = OnePlusOneEa::with_parent(&space, vec![1.0, 0.0, 0.0, 0.0], -1.0).unwrap();
        let mut rng = RandomStream::new(2);
        ea.ask(&mut rng).unwrap();
        ea.tell(&[0.0]).unwrap();
        assert_eq!(ea.parent().unwrap().0, &[1.0, 0.0, 0.0, 0.0]);
        let child = ea.ask(&mut rng).unwrap()[0].clone();
        ea.tell(&[-1.0]).unwrap();
        assert_eq!(ea.parent().unwrap().0, child.as_slice());
    }

    #[test]
    fn probabilities_stay_in_margin() {
        let space = SearchSpace::binary(8).unwrap();
        let mut rng = RandomStream::new(7);
        let mut cga = Cga::new(&space).unwrap();
        let mut pbil = Pbil::new(&space).unwrap();
        for _ in 0..2000 {
            cga.step(&mut rng, &mut onemax_neg).unwrap();
            pbil.step(&mut rng, &mut onemax_neg).unwrap();
            for p in cga
                .probabilities()
                .probs()
                .iter()
                .chain(pbil.probabilities().probs())
            {
                assert!((1.0 / 8.0..=7.0 / 8.0).contains(p));
            }
        }
    }

    #[test]
    fn rejects_non_binary_space() {
        let space = SearchSpace::continuous(3).unwrap();
        assert!(Cga::new(&space).is_err());
        assert!(Pbil::new(&space).is_err());
        assert!(OnePlusOneEa::<f64>::new(&space).is_err());
    }
}
