//! Floquet multiplier of a planar cycle from generalized data, `λ = exp(T (C1 - C2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{dft, FourierSeries};
use crate::genfunc::GeneralizedFunctions;
use crate::Real;

/// Default truncation for the C-constants computed from orbit samples.
pub const DEFAULT_KAPPA: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult<T> {
    #[serde(rename = "C1")]
    pub c1: T,
    #[serde(rename = "C2")]
    pub c2: T,
    #[serde(rename = "T")]
    pub period: T,
    pub lambda: T,
    /// `λ < 1`, equivalently `C1 < C2`.
    pub stable: bool,
    /// `exp` over- or underflowed and `λ` was clamped to the representable range.
    #[serde(default)]
    pub saturated: bool,
}

/// Zeroth coefficient of `â ∗ (b̂ - 1̂)`:
/// `â(0)(b̂(0) - 1) + 2 Σ_{k≥1} (Re â(k) Re b̂(k) + Im â(k) Im b̂(k))`.
fn zeroth_of_product<T: Real>(a: &FourierSeries<T>, b: &FourierSeries<T>) -> T {
    let kmax = a.kappa().min(b.kappa()) as isize;
    let tail: T = (1..=kmax)
        .map(|k| {
            let (x, y) = (a.coeff(k), b.coeff(k));
            x.re * y.re + x.im * y.im
        })
        .sum();
    a.coeff(0).re * (b.coeff(0).re - T::one()) + T::lit(2.0) * tail
}

/// `(C1, C2)` from the series of `β_s, s_x` and `β_1, g_x`.
pub fn c_constants<T: Real>(
    beta_s: &FourierSeries<T>,
    s_x: &FourierSeries<T>,
    beta_1: &FourierSeries<T>,
    g_x: &FourierSeries<T>,
) -> Result<(T, T)> {
    let p = beta_s.period();
    for s in [s_x, beta_1, g_x] {
        if (s.period() - p).abs() > T::lit(1e-12) * p {
            return Err(Error::PeriodMismatch(p.to_f64_lossy(), s.period().to_f64_lossy()));
        }
    }
    Ok((zeroth_of_product(beta_s, s_x), zeroth_of_product(beta_1, g_x)))
}

/// `λ = exp(T (C1 - C2))`. `λ = 1` is classified unstable.
pub fn multiplier<T: Real>(c1: T, c2: T, period: T) -> Result<FloquetResult<T>> {
    if !(period > T::zero() && period.is_finite()) {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    let expo = period * (c1 - c2);
    let (lambda, saturated) = clamp_exp(expo);
    Ok(FloquetResult { c1, c2, period, lambda, stable: c1 - c2 < T::zero(), saturated })
}

fn clamp_exp<T: Real>(e: T) -> (T, bool) {
    let v = e.exp();
    if v == T::zero() {
        (T::min_positive_value(), true)
    } else if !v.is_finite() {
        (T::max_value(), true)
    } else {
        (v, false)
    }
}

/// Multiplier from sampled generalized functions at truncation `kappa`.
pub fn multiplier_from_gen_functions<T: Real>(gf: &GeneralizedFunctions<T>, kappa: usize) -> Result<FloquetResult<T>> {
    let f = |s: &[T]| dft(s, gf.period, kappa);
    let (c1, c2) = c_constants(&f(&gf.beta_s)?, &f(&gf.s_x)?, &f(&gf.beta_1)?, &f(&gf.g_x)?)?;
    multiplier(c1, c2, gf.period)
}

/// `exp ∫₀ᵀ [β_s(s_x-1) - β_1(g_x-1) + β_2(g_y-1) - β_m(m_y-1)] dt` by the trapezoid rule,
/// valid without assuming `g_y ≡ 1 ≡ m_y`.
pub fn general_multiplier<T: Real>(gf: &GeneralizedFunctions<T>) -> T {
    let integrand = gf.floquet_integrand();
    let mean = integrand.iter().copied().sum::<T>() / T::from_usize_lossy(integrand.len());
    (gf.period * mean).exp()
}

/// Period means of `β_s(s_x-1) + β_2(g_y-1)` and `β_1(g_x-1) + β_m(m_y-1)`. They reduce to
/// [`c_constants`] when `g_y ≡ 1 ≡ m_y`, and `λ = exp(T (C1 - C2))` holds in general.
pub fn general_constants<T: Real>(gf: &GeneralizedFunctions<T>) -> (T, T) {
    let one = T::one();
    let n = T::from_usize_lossy(gf.n());
    let mut c1 = T::zero();
    let mut c2 = T::zero();
    for j in 0..gf.n() {
        c1 = c1 + gf.beta_s[j] * (gf.s_x[j] - one) + gf.beta_2[j] * (gf.g_y[j] - one);
        c2 = c2 + gf.beta_1[j] * (gf.g_x[j] - one) + gf.beta_m[j] * (gf.m_y[j] - one);
    }
    (c1 / n, c2 / n)
}

/// `λ(T)` for each listed period with fixed `C1, C2`.
pub fn period_sensitivity<T: Real>(c1: T, c2: T, periods: &[T]) -> Vec<T> {
    periods.iter().map(|&p| clamp_exp(p * (c1 - c2)).0).collect()
}
