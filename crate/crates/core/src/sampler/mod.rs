//! Random search for periodic generalized models in Fourier-coefficient space: minimize the
//! coefficient-space moduli residual from uniform random starts, keep solutions with small
//! residual and positive mean scales, and classify them by their Floquet multiplier.

mod nelder_mead;
mod stats;

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{c_constants, multiplier};
use crate::fourier::{algebraic_residuals, packed_len, unpack};
use crate::Real;

pub use nelder_mead::{nelder_mead, Minimum, NelderMeadOptions};
pub use stats::{pearson, summarize, ClassStats, Counts, Histogram, StatsSummary, HIST_BINS};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GMCYCLES_THREADS";

/// Reusable buffers for the sampler objective. Coefficients are stored two-sided,
/// index `k` at offset `k + width`.
#[derive(Debug, Clone)]
pub struct Objective<T> {
    kappa_m: usize,
    period: T,
    enforce_constant_beta_m: bool,
    series: [Vec<Complex<T>>; 6],
    d_s1: Vec<Complex<T>>,
    d_2m: Vec<Complex<T>>,
    sx_m1: Vec<Complex<T>>,
    growth: Vec<Complex<T>>,
    coupling: Vec<Complex<T>>,
    inner: Vec<Complex<T>>,
}

impl<T: Real> Objective<T> {
    pub fn new(kappa_m: usize, enforce_constant_beta_m: bool) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let w1 = 2 * kappa_m + 1;
        let w2 = 4 * kappa_m + 1;
        Self {
            kappa_m,
            period: T::one(),
            enforce_constant_beta_m,
            series: std::array::from_fn(|_| vec![z; w1]),
            d_s1: vec![z; w1],
            d_2m: vec![z; w1],
            sx_m1: vec![z; w1],
            growth: vec![z; w2],
            coupling: vec![z; w2],
            inner: vec![z; w2],
        }
    }

    pub fn dim(&self) -> usize {
        packed_len(self.kappa_m)
    }

    /// Sum of squared residual moduli over `|k| ≤ κ_M` for `c_s, c_1, c_2`, plus
    /// `2 Σ_{k≥1} |β̂_m(k)|²` when constant `β_m` is enforced. Same value as
    /// [`objective`]; allocation free.
    pub fn eval(&mut self, x: &[T]) -> T {
        let km = self.kappa_m;
        let per = 2 * km + 1;
        assert_eq!(x.len(), 6 * per, "packed vector length");
        let z = Complex::new(T::zero(), T::zero());
        for (i, s) in self.series.iter_mut().enumerate() {
            let chunk = &x[i * per..(i + 1) * per];
            s[km] = Complex::new(chunk[0], T::zero());
            for k in 1..=km {
                let c = Complex::new(chunk[2 * k - 1], chunk[2 * k]);
                s[km + k] = c;
                s[km - k] = c.conj();
            }
        }
        let [bs, b1, b2, bm, sx, gx] = &self.series;
        for j in 0..per {
            self.d_s1[j] = bs[j] - b1[j];
            self.d_2m[j] = b2[j] - bm[j];
            self.sx_m1[j] = sx[j];
        }
        self.sx_m1[km] = self.sx_m1[km] - T::one();

        // Full-width products: index k1 + k2 + 2κ_M.
        self.growth.iter_mut().for_each(|c| *c = z);
        self.coupling.iter_mut().for_each(|c| *c = z);
        for i in 0..per {
            let (a, d) = (bs[i], self.d_s1[i]);
            for j in 0..per {
                self.growth[i + j] = self.growth[i + j] + a * self.d_s1[j];
                self.coupling[i + j] = self.coupling[i + j] + d * gx[j];
            }
        }
        for j in 0..4 * km + 1 {
            self.inner[j] = self.coupling[j];
        }
        for j in 0..per {
            // Width-κ_M sequences sit at offset κ_M inside the width-2κ_M buffer.
            self.inner[j + km] = self.inner[j + km] + self.d_2m[j] - self.d_s1[j];
        }

        let omega = T::TAU() / self.period;
        let two = T::lit(2.0);
        let mut total = T::zero();
        for n in 0..=km {
            let ikw = Complex::new(T::zero(), omega * T::from_usize_lossy(n));
            let (mut rs, mut r1, mut r2) = (z, z, z);
            // Outer product restricted to index n: Σ_k a(k) b(n - k), |k| ≤ κ_M.
            for i in 0..per {
                let inner_idx = n + 3 * km - i;
                rs = rs + self.sx_m1[i] * self.growth[inner_idx];
                r1 = r1 + b1[i] * self.inner[inner_idx];
                r2 = r2 + b2[i] * self.coupling[inner_idx];
            }
            let cs = rs - ikw * bs[km + n];
            let c1 = r1 - ikw * b1[km + n];
            let c2 = r2 - ikw * b2[km + n];
            let mut sq = cs.norm_sqr() + c1.norm_sqr() + c2.norm_sqr();
            if self.enforce_constant_beta_m && n > 0 {
                sq = sq + bm[km + n].norm_sqr();
            }
            total = total + if n == 0 { sq } else { two * sq };
        }
        total
    }
}

/// Reference objective through [`algebraic_residuals`] with `T = 1`.
pub fn objective<T: Real>(x: &[T], kappa_m: usize) -> Result<T> {
    let c = unpack(x, kappa_m, T::one())?;
    Ok(algebraic_residuals(&c, kappa_m)?.sum_of_squares())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Positivity,
    Tolerance,
    OptimizerFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SampleRecord<T> {
    pub seed_index: u64,
    pub x: Vec<T>,
    pub objective: T,
    /// Present whenever the optimizer returned a finite point.
    pub lambda: Option<T>,
    pub c1: Option<T>,
    pub c2: Option<T>,
    pub stable: bool,
    pub accepted: bool,
    pub rejection: Option<Rejection>,
    pub converged: bool,
    pub evals: usize,
}

#[derive(Debug, Clone)]
pub struct SamplingOptions<T> {
    pub count: usize,
    pub seed: u64,
    /// Index of the first sample; later samples follow consecutively.
    pub first_index: u64,
    pub kappa_m: usize,
    pub tol: T,
    pub lo: T,
    pub hi: T,
    pub enforce_constant_beta_m: bool,
    /// Also require the four β functions to be positive on a 256-point grid.
    pub strict_positivity: bool,
    /// Worker cap; `None` reads the environment, then uses every core.
    pub threads: Option<usize>,
    pub optimizer: NelderMeadOptions<T>,
}

impl<T: Real> SamplingOptions<T> {
    pub fn new(count: usize, seed: u64) -> Self {
        let kappa_m = 2;
        Self {
            count,
            seed,
            first_index: 0,
            kappa_m,
            tol: T::lit(1e-4),
            lo: T::lit(0.5),
            hi: T::lit(1.5),
            enforce_constant_beta_m: false,
            strict_positivity: false,
            threads: None,
            optimizer: NelderMeadOptions::for_dimension(packed_len(kappa_m)),
        }
    }

    /// Changes `κ_M` and resizes the optimizer budget accordingly.
    pub fn with_kappa_m(mut self, kappa_m: usize) -> Self {
        let per_dim = self.optimizer.max_evals / packed_len(self.kappa_m);
        self.kappa_m = kappa_m;
        self.optimizer.max_evals = per_dim * packed_len(kappa_m);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        if !(self.lo < self.hi) {
            return Err(Error::InvalidParameter(format!("empty range [{}, {}]", self.lo, self.hi)));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Starting point of sample `index`: a ChaCha8 stream keyed by `seed`, stream number `index`.
pub fn initial_point<T: Real>(seed: u64, index: u64, dim: usize, lo: T, hi: T) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    (0..dim).map(|_| T::lit(rng.random_range(lo..hi))).collect()
}

fn positive_on_grid<T: Real>(x: &[T], kappa_m: usize) -> bool {
    let Ok(c) = unpack(x, kappa_m, T::one()) else { return false };
    let m = 256;
    [&c.beta_s, &c.beta_1, &c.beta_2, &c.beta_m].iter().all(|s| {
        (0..m).all(|j| s.evaluate(T::from_usize_lossy(j) / T::from_usize_lossy(m)) > T::zero())
    })
}

/// Minimizes from `x0` and classifies the result.
pub fn sample_from<T: Real>(x0: &[T], seed_index: u64, opts: &SamplingOptions<T>, obj: &mut Objective<T>) -> SampleRecord<T> {
    let km = opts.kappa_m;
    let m = nelder_mead(|x| obj.eval(x), x0, &opts.optimizer, None);
    let per = 2 * km + 1;
    let finite = m.x.iter().all(|v| v.is_finite()) && m.value.is_finite();
    let (mut lambda, mut c1, mut c2, mut stable) = (None, None, None, false);
    if finite {
        if let Ok(c) = unpack(&m.x, km, T::one()) {
            if let Ok((a, b)) = c_constants(&c.beta_s, &c.s_x, &c.beta_1, &c.g_x) {
                if let Ok(fr) = multiplier(a, b, T::one()) {
                    lambda = Some(fr.lambda);
                    c1 = Some(a);
                    c2 = Some(b);
                    stable = fr.stable;
                }
            }
        }
    }
    let zeroth_positive = (0..4).all(|i| m.x[i * per] > T::zero());
    let rejection = if !finite || !(m.value < opts.tol) {
        Some(if !finite || !m.converged { Rejection::OptimizerFailure } else { Rejection::Tolerance })
    } else if !zeroth_positive || (opts.strict_positivity && !positive_on_grid(&m.x, km)) {
        Some(Rejection::Positivity)
    } else if lambda.is_none() {
        Some(Rejection::OptimizerFailure)
    } else {
        None
    };
    SampleRecord {
        seed_index,
        objective: m.value,
        x: m.x,
        lambda,
        c1,
        c2,
        stable,
        accepted: rejection.is_none(),
        rejection,
        converged: m.converged,
        evals: m.evals,
    }
}

/// Worker count: explicit request, else the environment cap, else all cores.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    let n = requested.or(env).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    n.max(1)
}

/// Runs `opts.count` independent samples. Records are sorted by `seed_index` and do not
/// depend on the worker count or schedule.
pub fn run_sampling<T: Real>(opts: &SamplingOptions<T>) -> Result<Vec<SampleRecord<T>>> {
    run_sampling_with_progress(opts, &|_, _| {})
}

/// As [`run_sampling`], calling `progress(done, count)` after each finished sample.
pub fn run_sampling_with_progress<T: Real>(
    opts: &SamplingOptions<T>,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<SampleRecord<T>>> {
    opts.validate()?;
    let threads = resolve_threads(opts.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let dim = packed_len(opts.kappa_m);
    let done = AtomicUsize::new(0);
    let first = opts.first_index;
    let records = pool.install(|| {
        (0..opts.count as u64)
            .into_par_iter()
            .map_init(
                || Objective::new(opts.kappa_m, opts.enforce_constant_beta_m),
                |obj, i| {
                    let index = first + i;
                    let x0 = initial_point(opts.seed, index, dim, opts.lo, opts.hi);
                    let r = sample_from(&x0, index, opts, obj);
                    progress(done.fetch_add(1, Ordering::Relaxed) + 1, opts.count);
                    r
                },
            )
            .collect::<Vec<_>>()
    });
    Ok(records)
}
