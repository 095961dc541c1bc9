#![allow(dead_code)]

use gmcycles::fourier::{dft, GenCoefficients};
use gmcycles::genfunc::{compute_gen_functions, GeneralizedFunctions};
use gmcycles::model::{Growth, Mortality, ModelSpec, Predation, State};
use gmcycles::orbit::{find_limit_cycle, CycleOptions, PeriodicOrbit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rm() -> ModelSpec<f64> {
    ModelSpec::rosenzweig_macarthur()
}

pub fn lv() -> ModelSpec<f64> {
    ModelSpec::lotka_volterra()
}

pub fn rm_orbit() -> PeriodicOrbit<f64> {
    find_limit_cycle(&rm(), &State::new(1.0, 1.0).unwrap(), &CycleOptions::default()).unwrap()
}

pub fn lv_orbit() -> PeriodicOrbit<f64> {
    find_limit_cycle(&lv(), &State::new(1.2, 1.0).unwrap(), &CycleOptions::default()).unwrap()
}

pub fn rm_gen_functions() -> GeneralizedFunctions<f64> {
    compute_gen_functions(&rm(), &rm_orbit()).unwrap()
}

pub fn coefficients(gf: &GeneralizedFunctions<f64>, kappa: usize) -> GenCoefficients<f64> {
    let f = |s: &[f64]| dft(s, gf.period, kappa).unwrap();
    GenCoefficients {
        beta_s: f(&gf.beta_s),
        beta_1: f(&gf.beta_1),
        beta_2: f(&gf.beta_2),
        beta_m: f(&gf.beta_m),
        s_x: f(&gf.s_x),
        g_x: f(&gf.g_x),
    }
}

/// `X - ln X + Y - ln Y`, conserved by the all-ones Lotka-Volterra model.
pub fn lv_invariant(x: f64, y: f64) -> f64 {
    x - x.ln() + y - y.ln()
}

/// Logistic prey with Holling II predation whose coexistence equilibrium lies left of the
/// hump of the prey isocline, so a stable limit cycle exists. Returns the model and a start
/// slightly off the equilibrium.
pub fn random_cycling_holling_ii(count: usize, seed: u64) -> Vec<(ModelSpec<f64>, State<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(0.5..2.0);
            let k = rng.random_range(3.0..6.0);
            let h = rng.random_range(0.5..1.5);
            let a = rng.random_range(0.8..2.0);
            let u = rng.random_range(0.3..0.7);
            let x_star = u * (k - h) / 2.0;
            let d = a * x_star / (h + x_star);
            let y_star = r * (1.0 - x_star / k) * (h + x_star) / a;
            let m = ModelSpec::new(
                Growth::Logistic { k1: r, k2: r / k },
                Predation::HollingII { k1: a, k2: h },
                Mortality::Linear { k: d },
            )
            .unwrap();
            (m, State::new(1.1 * x_star, y_star).unwrap())
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
