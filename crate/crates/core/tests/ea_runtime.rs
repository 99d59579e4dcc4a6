use cmawm::baselines::OnePlusOneEa;
use cmawm::benchmarks::{Problem, ProblemKind};
use cmawm::{AskTell, RandomStream};

#[test]
fn one_max_runtime_is_in_the_n_log_n_band() {
    let n = 50;
    let problem = Problem::new(ProblemKind::OneMax, n, None).unwrap();
    let mut evals: Vec<usize> = (0..50)
        .map(|seed| {
            let mut ea = OnePlusOneEa::<f64>::new(problem.space()).unwrap();
            let mut rng = RandomStream::new(seed);
            let mut used = 0;
            loop {
                let rec = ea
                    .step(&mut rng, &mut |x| -problem.evaluate(x.as_slice()))
                    .unwrap();
                used += rec.evaluations;
                if rec.best_value == -(n as f64) {
                    break used;
                }
            }
        })
        .collect();
    evals.sort_unstable();
    let median = 0.5 * (evals[24] + evals[25]) as f64;
    let nln = n as f64 * (n as f64).ln();
    assert!(median >= nln && median <= 10.0 * nln, "median {median}");
}
