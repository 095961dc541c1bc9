use gmcycles::fourier::*;
use gmcycles::model::{eval_field, eval_jacobian, Growth, Mortality, ModelSpec, Predation, State};
use gmcycles::sampler::{run_sampling, SamplingOptions};
use num_complex::Complex;
use proptest::prelude::*;

fn series(kappa: usize) -> impl Strategy<Value = FourierSeries<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), kappa + 1).prop_map(|c| {
        FourierSeries::new(1.7, c.into_iter().map(|(a, b)| Complex::new(a, b)).collect()).unwrap()
    })
}

fn model() -> impl Strategy<Value = ModelSpec<f64>> {
    let growth = prop_oneof![
        (0.2f64..3.0).prop_map(|k1| Growth::Linear { k1 }),
        (0.2f64..3.0, 0.5f64..2.5).prop_map(|(k1, p)| Growth::Power { k1, p }),
        (0.2f64..3.0, 0.1f64..1.0).prop_map(|(k1, k2)| Growth::Logistic { k1, k2 }),
        (0.2f64..3.0, 0.05f64..0.3, 2.0f64..4.0).prop_map(|(k1, k2, k3)| Growth::Allee { k1, k2, k3 }),
    ];
    let predation = prop_oneof![
        (0.2f64..3.0).prop_map(|k1| Predation::HollingI { k1 }),
        (0.2f64..3.0, 0.2f64..2.0).prop_map(|(k1, k2)| Predation::HollingII { k1, k2 }),
        (0.2f64..3.0, 0.2f64..2.0).prop_map(|(k1, k2)| Predation::HollingIII { k1, k2 }),
        (0.2f64..3.0, 0.2f64..2.0, 0.1f64..1.0).prop_map(|(k1, k2, k3)| Predation::HollingIV { k1, k2, k3 }),
        (0.2f64..3.0, 0.5f64..2.0, 0.5f64..2.0).prop_map(|(k1, p, q)| Predation::Power { k1, p, q }),
    ];
    let mortality = prop_oneof![
        (0.2f64..2.0).prop_map(|k| Mortality::Linear { k }),
        (0.2f64..2.0, 0.5f64..2.0).prop_map(|(k, q)| Mortality::Power { k, q }),
    ];
    (growth, predation, mortality).prop_map(|(g, p, m)| ModelSpec::new(g, p, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_of_band_limited_samples_is_exact(s in series(6), log_n in 4u32..8) {
        let n = 1usize << log_n;
        let samples: Vec<f64> = (0..n).map(|j| s.evaluate(s.period() * j as f64 / n as f64)).collect();
        let back = dft(&samples, s.period(), 6).unwrap();
        for k in 0..=6 {
            prop_assert!((back.coeff(k) - s.coeff(k)).norm() < 1e-12);
        }
        for (j, v) in samples.iter().enumerate() {
            prop_assert!((back.evaluate(s.period() * j as f64 / n as f64) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_is_pointwise_product(a in series(4), b in series(4), t in prop::collection::vec(0.0f64..10.0, 100)) {
        let c = convolve(&a, &b).unwrap();
        prop_assert_eq!(c.kappa(), 8);
        for t in t {
            prop_assert!((c.evaluate(t) - a.evaluate(t) * b.evaluate(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn pack_unpack_roundtrip(x in prop::collection::vec(-5.0f64..5.0, 30)) {
        let c = unpack(&x, 2, 1.0).unwrap();
        prop_assert_eq!(pack(&c, 2).unwrap(), x);
    }

    #[test]
    fn jacobian_matches_finite_differences(m in model(), x in 0.3f64..2.0, y in 0.3f64..2.0) {
        let s = State::new(x, y).unwrap();
        let jac = eval_jacobian(&m, &s).unwrap();
        let h = 1e-6;
        let f = |x: f64, y: f64| eval_field(&m, &State::new(x, y).unwrap()).unwrap();
        let (fxp, fxm) = (f(x + h, y), f(x - h, y));
        let (fyp, fym) = (f(x, y + h), f(x, y - h));
        let fd = [
            [(fxp.0 - fxm.0) / (2.0 * h), (fyp.0 - fym.0) / (2.0 * h)],
            [(fxp.1 - fxm.1) / (2.0 * h), (fyp.1 - fym.1) / (2.0 * h)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let scale = 1.0 + jac[(i, j)].abs();
                prop_assert!((jac[(i, j)] - fd[i][j]).abs() < 1e-6 * scale, "{i}{j}: {} vs {}", jac[(i, j)], fd[i][j]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn sampler_is_schedule_independent(seed in any::<u64>(), threads in 2usize..5) {
        let mut one = SamplingOptions::<f64>::new(6, seed);
        one.threads = Some(1);
        let mut many = one.clone();
        many.threads = Some(threads);
        prop_assert_eq!(run_sampling(&one).unwrap(), run_sampling(&many).unwrap());
    }
}
