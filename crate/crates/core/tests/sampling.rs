use gmcycles::fourier::{pack, GenCoefficients};
use gmcycles::sampler::*;

fn opts(count: usize, seed: u64, threads: usize) -> SamplingOptions<f64> {
    let mut o = SamplingOptions::new(count, seed);
    o.threads = Some(threads);
    o
}

#[test]
fn same_seed_gives_identical_records() {
    let a = run_sampling(&opts(12, 5, 1)).unwrap();
    let b = run_sampling(&opts(12, 5, 1)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().enumerate().all(|(i, r)| r.seed_index == i as u64));
}

#[test]
fn thread_count_does_not_change_records() {
    let a = run_sampling(&opts(16, 9, 1)).unwrap();
    let b = run_sampling(&opts(16, 9, 4)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn split_runs_concatenate_to_full_run() {
    let full = run_sampling(&opts(10, 3, 2)).unwrap();
    let mut head = opts(4, 3, 2);
    let mut tail = opts(6, 3, 2);
    head.first_index = 0;
    tail.first_index = 4;
    let joined = [run_sampling(&head).unwrap(), run_sampling(&tail).unwrap()].concat();
    assert_eq!(full, joined);
}

#[test]
fn accepted_records_satisfy_filter_and_sign_law() {
    let recs = run_sampling(&opts(30, 17, 2)).unwrap();
    assert!(recs.iter().any(|r| r.accepted));
    for r in recs.iter().filter(|r| r.accepted) {
        assert!(r.objective < 1e-4);
        assert!((0..4).all(|i| r.x[5 * i] > 0.0));
        let l = r.lambda.unwrap();
        assert_eq!(r.stable, l < 1.0);
        assert_eq!(r.stable, r.c1.unwrap() - r.c2.unwrap() < 0.0);
    }
    for r in recs.iter().filter(|r| !r.accepted) {
        assert!(r.rejection.is_some());
    }
}

#[test]
fn strict_positivity_only_removes_records() {
    let loose = run_sampling(&opts(20, 23, 2)).unwrap();
    let mut o = opts(20, 23, 2);
    o.strict_positivity = true;
    let strict = run_sampling(&o).unwrap();
    for (a, b) in loose.iter().zip(&strict) {
        assert_eq!(a.x, b.x);
        assert!(a.accepted || !b.accepted);
    }
}

#[test]
fn enforced_constant_beta_m_drives_harmonics_down() {
    let mut o = opts(10, 31, 2);
    o.enforce_constant_beta_m = true;
    for r in run_sampling(&o).unwrap().iter().filter(|r| r.accepted) {
        let harmonics: f64 = r.x[16..20].iter().map(|v| v * v).sum();
        assert!(harmonics < 1e-4);
    }
}

#[test]
fn objective_is_nonnegative_and_pack_invariant() {
    let mut obj = Objective::new(2, false);
    for s in 0..1000 {
        let x = initial_point::<f64>(77, s, 30, -2.0, 2.0);
        let f = obj.eval(&x);
        assert!(f >= 0.0);
        let c = gmcycles::fourier::unpack(&x, 2, 1.0).unwrap();
        assert_eq!(obj.eval(&pack(&c, 2).unwrap()), f);
    }
}

#[test]
fn minimizer_descends_monotonically_from_random_start() {
    let x0 = initial_point::<f64>(42, 0, 30, 0.5, 1.5);
    let mut obj = Objective::new(2, false);
    let f0 = obj.eval(&x0);
    let mut hist = Vec::new();
    let m = nelder_mead(|x| obj.eval(x), &x0, &NelderMeadOptions::for_dimension(30), Some(&mut hist));
    assert!(m.value <= f0);
    assert!(hist.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn exact_solution_start_is_kept() {
    let c = GenCoefficients::equilibrium_constants(1.0, (1.1, 0.6), 0.4, 2.0);
    let x = pack(&c, 2).unwrap();
    let mut obj = Objective::new(2, false);
    let m = nelder_mead(|y| obj.eval(y), &x, &NelderMeadOptions::for_dimension(30), None);
    assert_eq!((m.x, m.value), (x, 0.0));
}

#[test]
fn summary_counts_are_consistent() {
    let recs = run_sampling(&opts(40, 2, 2)).unwrap();
    let s = summarize(&recs, 2);
    let c = &s.counts;
    assert_eq!(c.total, 40);
    assert_eq!(c.stable + c.unstable, c.accepted);
    assert_eq!(c.accepted + c.rejected_tolerance + c.rejected_positivity + c.optimizer_failures, c.total);
    assert!(s.r_lambda.iter().flatten().all(|r| (-1.0..=1.0).contains(r)));
    let json = serde_json::to_string(&s).unwrap();
    assert_eq!(serde_json::from_str::<StatsSummary<f64>>(&json).unwrap(), s);
    for r in &recs {
        let line = serde_json::to_string(r).unwrap();
        assert_eq!(&serde_json::from_str::<SampleRecord<f64>>(&line).unwrap(), r);
    }
}
