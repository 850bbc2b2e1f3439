use fbmc_core::filter::BuiltinFilter;
use fbmc_core::optimizer::{default_seed, poll_step, run_design, DesignOptions, DesignProblem, MeshSchedule, SearchState};
use fbmc_core::{Complex, FbmcConfig};

fn published(b: BuiltinFilter) -> Vec<Complex> {
    b.coeffs().iter().map(|v| Complex::new(*v, 0.0)).collect()
}

#[test]
fn poll_recovers_a_perturbed_seed() {
    let problem = DesignProblem::new(FbmcConfig::standard(), 30.0).unwrap();
    let reference = problem.fitness(&published(BuiltinFilter::G30));
    let mut q = published(BuiltinFilter::G30);
    q[5].re += 0.05;
    let state = SearchState::new(&problem, q, 0.05);
    assert!(state.best_fitness < reference);
    let next = poll_step(&state, &problem, MeshSchedule::default());
    assert!(next.best_fitness >= reference - 1e-12);
    assert_eq!(next.mesh, 0.1);
}

#[test]
fn infeasible_candidates_are_rejected() {
    let problem = DesignProblem::new(FbmcConfig::new(32, 4, 15).unwrap(), 30.0).unwrap();
    let mut q = published(BuiltinFilter::G30);
    q[1].re += 0.5;
    assert_eq!(problem.fitness(&q), f64::NEG_INFINITY);
    assert!(problem.self_sinr_db(&q, 1e-3).unwrap().is_finite());
}

#[test]
fn rectangular_prototype_interferes_heavily() {
    let problem = DesignProblem::new(FbmcConfig::standard(), 30.0).unwrap();
    let mut rect = vec![Complex::new(0.0, 0.0); 15];
    rect[0] = Complex::new(1.0, 0.0);
    assert_eq!(problem.fitness(&rect), f64::NEG_INFINITY);
    let raw = problem.self_sinr_db(&rect, problem.noise_var()).unwrap();
    // regression anchor
    assert!((raw + 1.77).abs() < 0.01, "{raw}");
}

#[test]
fn design_from_default_seed_improves_and_stays_feasible() {
    let cfg = FbmcConfig::new(32, 4, 15).unwrap();
    let problem = DesignProblem::new(cfg, 30.0).unwrap();
    let seed = default_seed(15);
    let options = DesignOptions {
        max_evals: 20_000,
        ..DesignOptions::default()
    };
    let out = run_design(&problem, &seed, &options).unwrap();
    // coordinate polling stalls where the c0 and c2 bounds are both active
    assert!(out.report.fitness_db > problem.fitness(&seed));
    assert!(problem.is_feasible(&out.q));
    assert_eq!(out.q[0], Complex::new(1.0, 0.0));
    let h = &out.report.history;
    assert!(h.windows(2).all(|w| w[1].fitness_db >= w[0].fitness_db));
    let again = run_design(&problem, &out.q, &DesignOptions { max_evals: 0, ..options }).unwrap();
    assert_eq!(again.q, out.q);
    let f = out.filter(&cfg, "designed").unwrap();
    assert_eq!(f.num_taps(), 15);
}
