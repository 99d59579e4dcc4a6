use cmawm::benchmarks::{Problem, ProblemKind};
use cmawm::elitist::{ElitistHyperparams, ElitistOptions, ElitistWm, FactorUpdate};
use cmawm::{AskTell, RandomStream};

fn run(problem: &Problem, update: FactorUpdate, iterations: usize) -> ElitistWm<f64> {
    let space = problem.space().clone();
    let n = space.dim();
    let mut options = ElitistOptions::default_for(&space);
    options.factor_update = update;
    let m0: Vec<f64> = (0..n)
        .map(|j| if j < problem.n_continuous() { 2.0 } else { 0.0 })
        .collect();
    let mut opt =
        ElitistWm::new(space, ElitistHyperparams::default_for(n), options, m0, 1.0).unwrap();
    let mut rng = RandomStream::new(3);
    for _ in 0..iterations {
        opt.step(&mut rng, &mut |x| problem.evaluate(x.as_slice()))
            .unwrap();
    }
    opt
}

#[test]
fn rank_one_update_tracks_refactorization() {
    for kind in [ProblemKind::EllipsoidOneMax, ProblemKind::SphereInt] {
        let problem = Problem::new(kind, 8, None).unwrap();
        let a = run(&problem, FactorUpdate::Refactor, 100);
        let b = run(&problem, FactorUpdate::RankOne, 100);
        let (sa, sb) = (a.state(), b.state());
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * (1.0 + x.abs());
        assert_eq!(sa.t, sb.t);
        assert!(close(sa.sigma, sb.sigma));
        for i in 0..8 {
            assert!(close(sa.m[i], sb.m[i]), "{kind:?} m[{i}]");
            assert!(close(sa.a[i], sb.a[i]));
            for j in 0..8 {
                assert!(close(sa.c.get(i, j), sb.c.get(i, j)));
                assert!(close(a.factor().get(i, j), b.factor().get(i, j)));
            }
        }
    }
}
