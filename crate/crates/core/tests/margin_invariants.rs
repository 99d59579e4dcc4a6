use std::time::Instant;

use cmawm::margin::{
    apply_margin_elitist, apply_margin_population, correct_interior, redistribute_tails,
    tail_probabilities, EdgeRule, MarginInputs,
};
use cmawm::numerics::SymmetricMatrix;
use cmawm::{DiscreteSet, RandomStream, SearchSpace};

const STATES: usize = 1000;
const N: usize = 3;

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `Pr(encode(v) ≠ encode(m))` for `v ~ N(m, std²)`, from the set values
/// directly (ties go to the lower value).
fn change_prob(values: &[f64], m: f64, std: f64) -> f64 {
    let mids: Vec<f64> = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let k = mids.iter().take_while(|&&b| m > b).count();
    let low = if k > 0 {
        phi((mids[k - 1] - m) / std)
    } else {
        0.0
    };
    let up = if k < mids.len() {
        phi((m - mids[k]) / std)
    } else {
        0.0
    };
    low + up
}

fn random_cov(rng: &mut RandomStream) -> SymmetricMatrix {
    let b: Vec<f64> = (0..N * N).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
    let mut c = vec![0.0; N * N];
    for i in 0..N {
        for j in 0..N {
            let dot: f64 = (0..N).map(|k| b[i * N + k] * b[j * N + k]).sum();
            c[i * N + j] = dot + if i == j { 0.05 } else { 0.0 };
        }
    }
    SymmetricMatrix::from_row_major(N, c).unwrap()
}

struct State {
    c: SymmetricMatrix,
    sigma: f64,
    a: Vec<f64>,
    alpha: f64,
}

fn random_state(rng: &mut RandomStream) -> State {
    State {
        c: random_cov(rng),
        sigma: 10f64.powf(rng.uniform_range(-4.0, 1.0)),
        a: (0..N)
            .map(|_| 10f64.powf(rng.uniform_range(-1.0, 1.0)))
            .collect(),
        alpha: 10f64.powf(rng.uniform_range(-3.0, (0.3f64).log10())),
    }
}

#[derive(Clone, Copy, Debug)]
enum Case {
    Edge,
    Interior,
}

fn set_for(binary: bool) -> DiscreteSet {
    if binary {
        DiscreteSet::binary()
    } else {
        DiscreteSet::integer_range(-5, 5).unwrap()
    }
}

/// Continuous mean in the requested region of `set`.
fn population_mean(rng: &mut RandomStream, set: &DiscreteSet, case: Case) -> f64 {
    let mids = set.midpoints();
    let (first, last) = (mids[0], mids[mids.len() - 1]);
    match case {
        Case::Edge if rng.uniform() < 0.5 => rng.uniform_range(first - 3.0, first),
        Case::Edge => rng.uniform_range(last + 1e-9, last + 3.0),
        Case::Interior => rng.uniform_range(first + 1e-9, last),
    }
}

/// Admissible mean in the requested region of `set`.
fn elitist_mean(rng: &mut RandomStream, set: &DiscreteSet, case: Case) -> f64 {
    let v = set.values();
    match case {
        Case::Edge if rng.uniform() < 0.5 => v[0],
        Case::Edge => v[v.len() - 1],
        Case::Interior => v[1 + (rng.next_u64() % (v.len() as u64 - 2)) as usize],
    }
}

fn check_population(binary: bool, case: Case, seed: u64) {
    let set = set_for(binary);
    let space = SearchSpace::new(0, vec![set.clone(); N]).unwrap();
    let mut rng = RandomStream::new(seed);
    for _ in 0..STATES {
        let s = random_state(&mut rng);
        let mut m: Vec<f64> = (0..N)
            .map(|_| population_mean(&mut rng, &set, case))
            .collect();
        let mut a = s.a.clone();
        apply_margin_population(&space, &mut m, &mut a, &s.c, s.sigma, s.alpha).unwrap();
        for j in 0..N {
            let std = s.sigma * a[j] * s.c.diag(j).sqrt();
            let p = change_prob(set.values(), m[j], std);
            assert!(
                p >= s.alpha - 1e-9,
                "{case:?} binary={binary}: p={p} < alpha={}",
                s.alpha
            );
        }
    }
}

fn check_elitist(binary: bool, case: Case, seed: u64) {
    let set = set_for(binary);
    let space = SearchSpace::new(0, vec![set.clone(); N]).unwrap();
    let mut rng = RandomStream::new(seed);
    for _ in 0..STATES {
        let s = random_state(&mut rng);
        let m: Vec<f64> = (0..N).map(|_| elitist_mean(&mut rng, &set, case)).collect();
        let before: Vec<u64> = m.iter().map(|x| x.to_bits()).collect();
        for rule in [EdgeRule::Equality, EdgeRule::Ratchet] {
            let mut a = s.a.clone();
            apply_margin_elitist(&space, &m, &mut a, &s.c, s.sigma, s.alpha, rule).unwrap();
            assert_eq!(m.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), before);
            for j in 0..N {
                let std = s.sigma * a[j] * s.c.diag(j).sqrt();
                let p = change_prob(set.values(), m[j], std);
                assert!(
                    p >= s.alpha - 1e-9,
                    "{case:?} binary={binary}: p={p} < alpha={}",
                    s.alpha
                );
            }
        }
    }
}

#[test]
fn change_probability_stays_above_margin() {
    let start = Instant::now();
    check_population(true, Case::Edge, 1);
    check_population(false, Case::Edge, 2);
    check_population(false, Case::Interior, 3);
    check_elitist(true, Case::Edge, 4);
    check_elitist(false, Case::Edge, 5);
    check_elitist(false, Case::Interior, 6);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "suite took {elapsed:.1} s");
}

#[test]
fn interior_round_trip() {
    let set = DiscreteSet::integer_range(-5, 5).unwrap();
    let mut rng = RandomStream::new(7);
    let mut worst = 0.0f64;
    for _ in 0..STATES {
        let s = random_state(&mut rng);
        let m: Vec<f64> = (0..N)
            .map(|_| population_mean(&mut rng, &set, Case::Interior))
            .collect();
        let j = (rng.next_u64() % N as u64) as usize;
        let (lo, up) = set.bracketing_midpoints(m[j]).unwrap();
        let inputs = MarginInputs::new(&m, &s.c, s.sigma, &s.a, s.alpha).unwrap();
        let (p_low, p_up) = tail_probabilities(&inputs, j, lo, up).unwrap();
        let targets = redistribute_tails(p_low, p_up, s.alpha).unwrap();
        let (m_new, a_new) = correct_interior(&inputs, j, lo, up, targets).unwrap();
        let std = s.sigma * a_new * s.c.diag(j).sqrt();
        let low = phi((lo - m_new) / std);
        let high = phi((m_new - up) / std);
        worst = worst
            .max((low - targets.0).abs())
            .max((high - targets.1).abs());
    }
    assert!(worst < 1e-9, "max tail error {worst:e}");
}
