//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use gmcycles::floquet::{multiplier_from_gen_functions, DEFAULT_KAPPA};
use gmcycles::fourier::*;
use gmcycles::genfunc::*;
use gmcycles::model::*;
use gmcycles::orbit::*;
use gmcycles::sampler::*;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rm_reproduction() -> Outcome {
    let t0 = Instant::now();
    let (m, o) = (rm(), rm_orbit());
    let mono = monodromy(&m, &o, 1e-12).map_err(|e| e.to_string())?;
    let gf = compute_gen_functions(&m, &o).map_err(|e| e.to_string())?;
    let fr = multiplier_from_gen_functions(&gf, DEFAULT_KAPPA).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let lam = mono.multiplier_modulus();
    let gap = (fr.lambda - lam).abs() / lam;
    check(
        lam < 1.0 && gap < 1e-3 && elapsed < Duration::from_secs(10),
        format!("T={:.6}, monodromy |λ|={lam:.6e}, formula λ={:.6e}, relative gap {gap:.2e}, {elapsed:.2?}", o.period(), fr.lambda),
    )
}

fn liouville() -> Outcome {
    let mut worst = monodromy(&rm(), &rm_orbit(), 1e-12).map_err(|e| e.to_string())?.liouville_gap();
    for (m, start) in random_cycling_holling_ii(5, 2024) {
        let o = find_limit_cycle(&m, &start, &CycleOptions::default()).map_err(|e| e.to_string())?;
        worst = worst.max(monodromy(&m, &o, 1e-12).map_err(|e| e.to_string())?.liouville_gap());
    }
    check(worst < 1e-6, format!("max relative gap {worst:.2e} over RM and 5 random Holling II cycles"))
}

fn lv_neutrality() -> Outcome {
    let o = lv_orbit();
    let mono = monodromy(&lv(), &o, 1e-12).map_err(|e| e.to_string())?;
    let dev = (mono.multiplier_modulus() - 1.0).abs();
    let h0 = lv_invariant(1.2, 1.0);
    let drift = (0..o.n()).map(|j| (lv_invariant(o.gamma1()[j], o.gamma2()[j]) - h0).abs()).fold(0.0, f64::max);
    check(dev < 1e-4 && drift < 1e-6, format!("|λ-1|={dev:.2e}, first-integral drift {drift:.2e}"))
}

fn moduli_flow() -> Outcome {
    let gf = rm_gen_functions();
    let res = moduli_residual(&gf).map_err(|e| e.to_string())?.max();
    let n = gf.n();
    let tr = integrate_moduli_flow(&ElasticitySeries::from(&gf), gf.scales(0), gf.period, n, 1e-12)
        .map_err(|e| e.to_string())?;
    let repro = tr
        .series()
        .iter()
        .zip(gf.beta_series())
        .map(|(f, e)| max_abs_diff(&f[..n], e) / max_abs(e))
        .fold(0.0, f64::max);
    check(res < 1e-4 && repro < 1e-5, format!("residual {res:.2e}, flow reproduction {repro:.2e} (n={n})"))
}

fn algebraic_conditions() -> Outcome {
    let gf = rm_gen_functions();
    let mut res = Vec::new();
    for k in [4, 8, 12, 17] {
        res.push(algebraic_residuals(&coefficients(&gf, k), k).map_err(|e| e.to_string())?.max_abs());
    }
    let monotone = res.windows(2).all(|w| w[1] < w[0]);
    check(
        res[3] < 1e-3 && monotone,
        format!("max |residual| at κ=4,8,12,17: {}", res.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(", ")),
    )
}

fn specific_forms() -> Outcome {
    let n = 256;
    let curves = [
        (0.1, 1.0),
        (0.3, 0.7),
    ]
    .map(|(amp, y)| {
        let g1: Vec<f64> = (0..n).map(|j| 1.0 + amp * (std::f64::consts::TAU * j as f64 / n as f64).cos()).collect();
        let g2: Vec<f64> = (0..n).map(|j| y + 0.2 * (std::f64::consts::TAU * j as f64 / n as f64).sin()).collect();
        PeriodicOrbit::from_samples(2.5, g1, g2).unwrap()
    });
    let models = [
        ModelSpec::new(Growth::Logistic { k1: 2.0, k2: 0.5 }, Predation::HollingII { k1: 1.0, k2: 1.0 }, Mortality::Linear { k: 0.5 }),
        ModelSpec::new(Growth::Allee { k1: 1.0, k2: 0.2, k3: 3.0 }, Predation::HollingIII { k1: 1.3, k2: 0.7 }, Mortality::Linear { k: 0.5 }),
        ModelSpec::new(Growth::Logistic { k1: 1.0, k2: 0.2 }, Predation::HollingIV { k1: 0.9, k2: 0.4, k3: 0.3 }, Mortality::Linear { k: 0.5 }),
        ModelSpec::new(Growth::Allee { k1: 0.5, k2: 0.1, k3: 2.5 }, Predation::HollingII { k1: 2.0, k2: 0.3 }, Mortality::Linear { k: 0.5 }),
    ];
    let mut worst: f64 = specific_terms(&rm(), &rm_orbit()).map_err(|e| e.to_string())?.max_gap();
    for m in models {
        let m = m.map_err(|e| e.to_string())?;
        for c in &curves {
            worst = worst.max(specific_terms(&m, c).map_err(|e| e.to_string())?.max_gap());
        }
    }
    check(worst < 1e-10, format!("max pointwise gap {worst:.2e} (logistic, Allee, Holling II/III/IV; RM orbit and synthetic curves)"))
}

fn power_law_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut singular, mut worst) = (0usize, 0.0f64);
    for _ in 0..1000 {
        let mut r = || rng.random_range(0.1..3.0);
        let t = PowerLawTargets { beta_1: r(), beta_2: r(), s_x: r(), g_x: r(), g_y: r(), m_y: r() };
        let (m, eq) = match realize_power_law(&t) {
            Ok(v) => v,
            Err(gmcycles::Error::Singular(_)) => {
                singular += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let p = equilibrium_gen_params(&m, &eq).map_err(|e| e.to_string())?;
        let pairs: [(f64, f64); 8] = [
            (p.beta_1, t.beta_1),
            (p.beta_2, t.beta_2),
            (p.s_x, t.s_x),
            (p.g_x, t.g_x),
            (p.g_y, t.g_y),
            (p.m_y, t.m_y),
            (p.beta_s, t.beta_1),
            (p.beta_m, t.beta_2),
        ];
        for (got, want) in pairs {
            worst = worst.max((got - want).abs() / want.abs());
        }
    }
    check(worst < 1e-10, format!("1000 draws, {singular} singular excluded, max relative error {worst:.2e}"))
}

struct SamplingRun {
    summary: StatsSummary<f64>,
    elapsed: Duration,
}

fn sampling_run() -> Result<SamplingRun, String> {
    let opts = SamplingOptions::<f64>::new(5000, 42);
    let t0 = Instant::now();
    let recs = run_sampling(&opts).map_err(|e| e.to_string())?;
    Ok(SamplingRun { summary: summarize(&recs, opts.kappa_m), elapsed: t0.elapsed() })
}

fn sampling_statistics(run: &SamplingRun) -> Outcome {
    let s = &run.summary;
    let acc = s.acceptance_fraction().unwrap_or(0.0);
    let stab = s.stable_fraction().unwrap_or(0.0);
    let mean_obj = s.mean_accepted_objective.unwrap_or(f64::INFINITY);
    check(
        (0.40..=0.75).contains(&acc) && (0.50..=0.70).contains(&stab) && mean_obj < 1e-5 && run.elapsed < Duration::from_secs(600),
        format!(
            "accepted {}/{} ({acc:.3}), stable {}/{} ({stab:.3}), mean objective {mean_obj:.2e}, {:.1?}",
            s.counts.accepted, s.counts.total, s.counts.stable, s.counts.accepted, run.elapsed
        ),
    )
}

fn correlation_signs(run: &SamplingRun) -> Outcome {
    let s = &run.summary;
    let idx = |n: &str| s.coordinate(n).ok_or_else(|| format!("no coordinate {n}"));
    let (gx, sx) = (idx("g_x(0)")?, idx("s_x(0)")?);
    let r_gx = s.r_lambda[gx].ok_or("r(λ, g_x(0)) undefined")?;
    let r_sx = s.r_lambda[sx].ok_or("r(λ, s_x(0)) undefined")?;
    let st = s.stable.as_ref().ok_or("no stable records")?.mean[sx];
    let un = s.unstable.as_ref().ok_or("no unstable records")?.mean[sx];
    check(
        r_gx < 0.0 && r_sx > 0.0 && un > st,
        format!("r(λ,ĝx(0))={r_gx:.4}, r(λ,ŝx(0))={r_sx:.4}, mean ŝx(0) unstable {un:.4} vs stable {st:.4}"),
    )
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_dft: f64 = 0.0;
    let mut worst_conv: f64 = 0.0;
    let mut worst_jac: f64 = 0.0;
    for _ in 0..200 {
        let mut coeffs = |k: usize| -> FourierSeries<f64> {
            FourierSeries::new(1.3, (0..=k).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                .unwrap()
        };
        let s = coeffs(6);
        let samples: Vec<f64> = (0..64).map(|j| s.evaluate(1.3 * j as f64 / 64.0)).collect();
        let back = dft(&samples, 1.3, 6).map_err(|e| e.to_string())?;
        for k in 0..=6 {
            worst_dft = worst_dft.max((back.coeff(k) - s.coeff(k)).norm());
        }
        let (a, b) = (coeffs(4), coeffs(4));
        let c = convolve(&a, &b).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let t = rng.random_range(0.0..5.0);
            worst_conv = worst_conv.max((c.evaluate(t) - a.evaluate(t) * b.evaluate(t)).abs());
        }
    }
    let models = [
        rm(),
        ModelSpec::new(Growth::Allee { k1: 1.0, k2: 0.2, k3: 3.0 }, Predation::HollingIV { k1: 0.9, k2: 0.4, k3: 0.3 }, Mortality::Power { k: 0.5, q: 1.4 })
            .unwrap(),
        ModelSpec::new(Growth::Power { k1: 1.2, p: 0.8 }, Predation::Power { k1: 1.0, p: 1.3, q: 0.7 }, Mortality::Linear { k: 0.4 }).unwrap(),
    ];
    for m in &models {
        for _ in 0..50 {
            let (x, y) = (rng.random_range(0.3..2.0), rng.random_range(0.3..2.0));
            let jac = eval_jacobian(m, &State::new(x, y).unwrap()).map_err(|e| e.to_string())?;
            let h = 1e-6;
            let f = |x: f64, y: f64| eval_field(m, &State::new(x, y).unwrap()).unwrap();
            let (xp, xm, yp, ym) = (f(x + h, y), f(x - h, y), f(x, y + h), f(x, y - h));
            let fd = [[(xp.0 - xm.0) / (2.0 * h), (yp.0 - ym.0) / (2.0 * h)], [(xp.1 - xm.1) / (2.0 * h), (yp.1 - ym.1) / (2.0 * h)]];
            for i in 0..2 {
                for j in 0..2 {
                    worst_jac = worst_jac.max((jac[(i, j)] - fd[i][j]).abs() / (1.0 + jac[(i, j)].abs()));
                }
            }
        }
    }
    let mut pack_ok = true;
    for _ in 0..200 {
        let x: Vec<f64> = (0..30).map(|_| rng.random_range(-5.0..5.0)).collect();
        let c = unpack(&x, 2, 1.0).map_err(|e| e.to_string())?;
        pack_ok &= pack(&c, 2).map_err(|e| e.to_string())? == x;
    }
    let mut one = SamplingOptions::<f64>::new(24, 7);
    one.threads = Some(1);
    let mut many = one.clone();
    many.threads = Some(4);
    let deterministic = run_sampling(&one).map_err(|e| e.to_string())? == run_sampling(&many).map_err(|e| e.to_string())?;
    check(
        worst_dft < 1e-12 && worst_conv < 1e-12 && worst_jac < 1e-6 && pack_ok && deterministic,
        format!(
            "dft round-trip {worst_dft:.1e}, convolution vs product {worst_conv:.1e}, Jacobian vs finite differences {worst_jac:.1e}, pack/unpack {}, 1 vs 4 threads {}",
            if pack_ok { "exact" } else { "MISMATCH" },
            if deterministic { "identical" } else { "DIFFERENT" }
        ),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} [{tag}] {name}: {detail}");
    };
    report(1, "RM cycle and multiplier", rm_reproduction());
    report(2, "Liouville identity", liouville());
    report(3, "Lotka-Volterra neutrality", lv_neutrality());
    report(4, "moduli flow", moduli_flow());
    report(5, "algebraic moduli conditions", algebraic_conditions());
    report(6, "specific-form identities", specific_forms());
    report(7, "power-law realization round-trip", power_law_roundtrip());
    match sampling_run() {
        Ok(run) => {
            report(8, "sampling statistics", sampling_statistics(&run));
            report(9, "correlation signs", correlation_signs(&run));
        }
        Err(e) => {
            report(8, "sampling statistics", Err(e.clone()));
            report(9, "correlation signs", Err(e));
        }
    }
    report(10, "property suites", property_suites());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
