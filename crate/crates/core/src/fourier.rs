//! Truncated complex Fourier series of real `T`-periodic functions, discrete convolution,
//! and the algebraic (coefficient-space) form of the moduli flow.
//!
//! Coefficients follow `f(t) = Σ_k c(k) exp(2πikt/T)` with
//! `c(k) = (1/T) ∫₀ᵀ f(s) exp(-2πiks/T) ds`. Only `c(0..=κ)` is stored; negative indices
//! are implied by `c(-k) = conj(c(k))`.

use std::ops::{Add, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// In-place iterative radix-2 FFT, `X(k) = Σ_j x(j) exp(∓2πijk/n)` (no normalization).
fn fft_in_place<T: Real>(buf: &mut [Complex<T>], inverse: bool) -> Result<()> {
    let n = buf.len();
    if !n.is_power_of_two() {
        return Err(Error::GridSize(n));
    }
    if n <= 1 {
        return Ok(());
    }
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { T::one() } else { -T::one() };
    let two_pi = T::TAU();
    // Twiddles for the largest stage; smaller stages stride through the table.
    let twiddles: Vec<Complex<T>> = (0..n / 2)
        .map(|m| Complex::from_polar(T::one(), sign * two_pi * T::from_usize_lossy(m) / T::from_usize_lossy(n)))
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for m in 0..len / 2 {
                let w = twiddles[m * stride];
                let u = buf[start + m];
                let v = buf[start + m + len / 2] * w;
                buf[start + m] = u + v;
                buf[start + m + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// All `n` normalized DFT coefficients `c(k) = (1/n) Σ_j x_j exp(-2πijk/n)`, index `k mod n`.
pub fn full_dft<T: Real>(samples: &[T]) -> Result<Vec<Complex<T>>> {
    let mut buf: Vec<Complex<T>> = samples.iter().map(|&x| Complex::new(x, T::zero())).collect();
    fft_in_place(&mut buf, false)?;
    let inv_n = T::one() / T::from_usize_lossy(samples.len());
    buf.iter_mut().for_each(|c| *c = *c * inv_n);
    Ok(buf)
}

/// Time derivative of uniformly sampled periodic data by differentiating its DFT.
/// The Nyquist mode is discarded.
pub fn spectral_derivative<T: Real>(samples: &[T], period: T) -> Result<Vec<T>> {
    let n = samples.len();
    let mut c = full_dft(samples)?;
    let omega = T::TAU() / period;
    for (idx, ck) in c.iter_mut().enumerate() {
        let k: isize = if idx < n / 2 {
            idx as isize
        } else if idx == n / 2 {
            0
        } else {
            idx as isize - n as isize
        };
        if idx == n / 2 {
            *ck = Complex::new(T::zero(), T::zero());
        } else {
            let factor = Complex::new(T::zero(), omega * T::from_isize(k).expect("index fits"));
            *ck = *ck * factor;
        }
    }
    fft_in_place(&mut c, true)?;
    Ok(c.into_iter().map(|z| z.re).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FourierSeriesRepr<T> {
    #[serde(rename = "T")]
    period: T,
    kappa: usize,
    re: Vec<T>,
    im: Vec<T>,
}

/// Truncated Fourier series of a real periodic function, coefficients `c(0..=κ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FourierSeriesRepr<T>", into = "FourierSeriesRepr<T>")]
#[serde(bound = "T: Real")]
pub struct FourierSeries<T> {
    period: T,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> TryFrom<FourierSeriesRepr<T>> for FourierSeries<T> {
    type Error = Error;
    fn try_from(r: FourierSeriesRepr<T>) -> Result<Self> {
        if r.re.len() != r.kappa + 1 || r.im.len() != r.kappa + 1 {
            return Err(Error::Dimension { expected: r.kappa + 1, got: r.re.len().min(r.im.len()) });
        }
        let coeffs = r.re.into_iter().zip(r.im).map(|(a, b)| Complex::new(a, b)).collect();
        FourierSeries::new(r.period, coeffs)
    }
}

impl<T: Real> From<FourierSeries<T>> for FourierSeriesRepr<T> {
    fn from(f: FourierSeries<T>) -> Self {
        Self {
            period: f.period,
            kappa: f.kappa(),
            re: f.coeffs.iter().map(|c| c.re).collect(),
            im: f.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

fn same_period<T: Real>(a: T, b: T) -> Result<()> {
    if (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(Error::PeriodMismatch(a.to_f64_lossy(), b.to_f64_lossy()))
    }
}

impl<T: Real> FourierSeries<T> {
    /// Builds a series from `c(0..=κ)`; the imaginary part of `c(0)` is dropped.
    pub fn new(period: T, mut coeffs: Vec<Complex<T>>) -> Result<Self> {
        if !(period > T::zero() && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(T::zero(), T::zero()));
        }
        coeffs[0].im = T::zero();
        Ok(Self { period, coeffs })
    }

    pub fn constant(period: T, value: T) -> Self {
        Self { period, coeffs: vec![Complex::new(value, T::zero())] }
    }

    /// The convolution identity `1̂`.
    pub fn one(period: T) -> Self {
        Self::constant(period, T::one())
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn kappa(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c(0..=κ)`
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `c(k)` for any integer `k`; zero outside the truncation.
    pub fn coeff(&self, k: isize) -> Complex<T> {
        let idx = k.unsigned_abs();
        match self.coeffs.get(idx) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Real-series view `(a_k, b_k)` with `c(k) = (a_k - i b_k)/2`.
    pub fn real_coefficients(&self) -> Vec<(T, T)> {
        let two = T::lit(2.0);
        self.coeffs.iter().map(|c| (two * c.re, -two * c.im)).collect()
    }

    /// Symmetric partial sum `Σ_{|k|≤κ} c(k) exp(2πikt/T)`.
    pub fn evaluate(&self, t: T) -> T {
        let theta = T::TAU() * t / self.period;
        let step = Complex::from_polar(T::one(), theta);
        let mut rot = step;
        let mut acc = T::zero();
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            if k % 32 == 0 {
                // Refresh the rotation to keep its modulus from drifting.
                rot = Complex::from_polar(T::one(), theta * T::from_usize_lossy(k));
            }
            acc = acc + (*c * rot).re;
            rot = rot * step;
        }
        self.coeffs[0].re + T::lit(2.0) * acc
    }

    /// Copy with truncation `min(κ, kappa)`, or zero-padded to `kappa`.
    pub fn with_kappa(&self, kappa: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(kappa + 1, Complex::new(T::zero(), T::zero()));
        Self { period: self.period, coeffs }
    }

    /// Drops trailing coefficients whose modulus is below `threshold`.
    pub fn trimmed(&self, threshold: T) -> Self {
        let last = self.coeffs.iter().rposition(|c| c.norm() > threshold).unwrap_or(0);
        Self { period: self.period, coeffs: self.coeffs[..=last].to_vec() }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { period: self.period, coeffs: self.coeffs.iter().map(|c| *c * s).collect() }
    }

    /// Adds `v` to the constant term.
    pub fn shift(&self, v: T) -> Self {
        let mut out = self.clone();
        out.coeffs[0].re = out.coeffs[0].re + v;
        out
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        same_period(self.period, other.period)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len as isize).map(|k| op(self.coeff(k), other.coeff(k))).collect();
        Ok(Self { period: self.period, coeffs })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Sum of `|c(k)|²` over `|k| ≤ κ` (Parseval).
    pub fn power(&self) -> T {
        let tail: T = self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum();
        self.coeffs[0].norm_sqr() + T::lit(2.0) * tail
    }
}

impl<T: Real> Add for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    /// Panics on a period mismatch; use [`FourierSeries::try_add`] for fallible addition.
    fn add(self, rhs: Self) -> FourierSeries<T> {
        self.try_add(rhs).expect("matching periods")
    }
}

impl<T: Real> Sub for &FourierSeries<T> {
    type Output = FourierSeries<T>;
    /// Panics on a period mismatch; use [`FourierSeries::try_sub`] for fallible subtraction.
    fn sub(self, rhs: Self) -> FourierSeries<T> {
        self.try_sub(rhs).expect("matching periods")
    }
}

/// Fourier coefficients `c(0..=κ)` of uniformly spaced samples of one period, via FFT.
pub fn dft<T: Real>(samples: &[T], period: T, kappa: usize) -> Result<FourierSeries<T>> {
    let n = samples.len();
    if !n.is_power_of_two() {
        return Err(Error::GridSize(n));
    }
    if 2 * kappa >= n {
        return Err(Error::Aliasing { kappa, n });
    }
    let mut c = full_dft(samples)?;
    c.truncate(kappa + 1);
    FourierSeries::new(period, c)
}

/// Band-limited trigonometric interpolant of the samples (all modes below Nyquist),
/// with negligible trailing modes removed.
pub fn interpolant<T: Real>(samples: &[T], period: T) -> Result<FourierSeries<T>> {
    let n = samples.len();
    let full = dft(samples, period, n / 2 - 1)?;
    let scale = full.coefficients().iter().fold(T::zero(), |m, c| m.max(c.norm()));
    Ok(full.trimmed(scale * T::epsilon()))
}

/// `(a ∗ b)(n)` for `0 ≤ n ≤ n_max`, summing over every index pair of the truncated inputs.
fn convolve_upto<T: Real>(a: &FourierSeries<T>, b: &FourierSeries<T>, n_max: usize) -> Vec<Complex<T>> {
    let (ka, kb) = (a.kappa() as isize, b.kappa() as isize);
    (0..=n_max as isize)
        .map(|n| {
            let lo = (-ka).max(n - kb);
            let hi = ka.min(n + kb);
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in lo..=hi {
                acc = acc + a.coeff(k) * b.coeff(n - k);
            }
            if n == 0 {
                acc.im = T::zero();
            }
            acc
        })
        .collect()
}

/// Discrete convolution of two truncated sequences; the result has truncation `κ_a + κ_b`.
pub fn convolve<T: Real>(a: &FourierSeries<T>, b: &FourierSeries<T>) -> Result<FourierSeries<T>> {
    same_period(a.period, b.period)?;
    Ok(FourierSeries { period: a.period, coeffs: convolve_upto(a, b, a.kappa() + b.kappa()) })
}

/// Fourier coefficients of `β_s, β_1, β_2, β_m, s_x, g_x` (the sampler's unknowns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GenCoefficients<T> {
    pub beta_s: FourierSeries<T>,
    pub beta_1: FourierSeries<T>,
    pub beta_2: FourierSeries<T>,
    pub beta_m: FourierSeries<T>,
    pub s_x: FourierSeries<T>,
    pub g_x: FourierSeries<T>,
}

impl<T: Real> GenCoefficients<T> {
    pub const NAMES: [&'static str; 6] = ["beta_s", "beta_1", "beta_2", "beta_m", "s_x", "g_x"];

    /// The six series in packing order.
    pub fn series(&self) -> [&FourierSeries<T>; 6] {
        [&self.beta_s, &self.beta_1, &self.beta_2, &self.beta_m, &self.s_x, &self.g_x]
    }

    pub fn period(&self) -> T {
        self.beta_s.period()
    }

    /// Equilibrium-consistent constants (`β_s = β_1`, `β_2 = β_m`) with constant elasticities.
    pub fn equilibrium_constants(period: T, beta_sm: (T, T), s_x: T, g_x: T) -> Self {
        let c = |v| FourierSeries::constant(period, v);
        Self {
            beta_s: c(beta_sm.0),
            beta_1: c(beta_sm.0),
            beta_2: c(beta_sm.1),
            beta_m: c(beta_sm.1),
            s_x: c(s_x),
            g_x: c(g_x),
        }
    }
}

/// Residuals `c_s, c_1, c_2` of the coefficient-space moduli conditions, indices `0..=κ_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResidualSet<T> {
    pub c_s: Vec<Complex<T>>,
    pub c_1: Vec<Complex<T>>,
    pub c_2: Vec<Complex<T>>,
}

impl<T: Real> ResidualSet<T> {
    pub fn kappa_m(&self) -> usize {
        self.c_s.len() - 1
    }

    /// Largest modulus over all three sequences and all `|k| ≤ κ_M`.
    pub fn max_abs(&self) -> T {
        self.c_s
            .iter()
            .chain(&self.c_1)
            .chain(&self.c_2)
            .fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// `Σ_{|k|≤κ_M} (Re c)² + (Im c)²` summed over the three sequences.
    pub fn sum_of_squares(&self) -> T {
        let two = T::lit(2.0);
        [&self.c_s, &self.c_1, &self.c_2]
            .iter()
            .map(|seq| {
                let tail: T = seq.iter().skip(1).map(|c| c.norm_sqr()).sum();
                seq[0].norm_sqr() + two * tail
            })
            .sum()
    }
}

/// Residuals of the coefficient-space moduli conditions under `g_y ≡ 1 ≡ m_y`:
///
/// ```text
/// c_s(k) = -(2πik/T) β̂_s(k) + [β̂_s ∗ (β̂_s - β̂_1) ∗ (ŝ_x - 1̂)](k)
/// c_1(k) = -(2πik/T) β̂_1(k) + [β̂_1 ∗ ((β̂_s - β̂_1) ∗ ĝ_x + (β̂_2 - β̂_m) - (β̂_s - β̂_1))](k)
/// c_2(k) = -(2πik/T) β̂_2(k) + [β̂_2 ∗ ((β̂_s - β̂_1) ∗ ĝ_x)](k)
/// ```
///
/// Inner convolutions keep their full width; only the outer product is restricted to `|k| ≤ κ_M`.
pub fn algebraic_residuals<T: Real>(c: &GenCoefficients<T>, kappa_m: usize) -> Result<ResidualSet<T>> {
    let period = c.period();
    for s in c.series() {
        same_period(period, s.period())?;
    }
    let d_s1 = &c.beta_s - &c.beta_1;
    let d_2m = &c.beta_2 - &c.beta_m;
    let sx_m1 = c.s_x.shift(-T::one());

    let growth = convolve(&c.beta_s, &d_s1)?;
    let coupling = convolve(&d_s1, &c.g_x)?;
    let pred_inner = &(&coupling + &d_2m) - &d_s1;

    let rhs_s = convolve_upto(&growth, &sx_m1, kappa_m);
    let rhs_1 = convolve_upto(&c.beta_1, &pred_inner, kappa_m);
    let rhs_2 = convolve_upto(&c.beta_2, &coupling, kappa_m);

    let omega = T::TAU() / period;
    let lhs = |f: &FourierSeries<T>, k: usize| {
        let ik = Complex::new(T::zero(), omega * T::from_usize_lossy(k));
        -(ik * f.coeff(k as isize))
    };
    let build = |f: &FourierSeries<T>, rhs: Vec<Complex<T>>| -> Vec<Complex<T>> {
        rhs.into_iter().enumerate().map(|(k, r)| lhs(f, k) + r).collect()
    };
    Ok(ResidualSet {
        c_s: build(&c.beta_s, rhs_s),
        c_1: build(&c.beta_1, rhs_1),
        c_2: build(&c.beta_2, rhs_2),
    })
}

/// Number of reals in a packed coefficient vector: `6 (2κ_M + 1)`.
pub fn packed_len(kappa_m: usize) -> usize {
    6 * (2 * kappa_m + 1)
}

/// Packs each series as `c(0), Re c(1), Im c(1), …, Re c(κ_M), Im c(κ_M)`, in the order
/// `β_s, β_1, β_2, β_m, s_x, g_x`.
pub fn pack<T: Real>(c: &GenCoefficients<T>, kappa_m: usize) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(packed_len(kappa_m));
    for s in c.series() {
        if s.kappa() > kappa_m {
            return Err(Error::Dimension { expected: kappa_m, got: s.kappa() });
        }
        out.push(s.coeff(0).re);
        for k in 1..=kappa_m as isize {
            let ck = s.coeff(k);
            out.push(ck.re);
            out.push(ck.im);
        }
    }
    Ok(out)
}

/// Inverse of [`pack`].
pub fn unpack<T: Real>(x: &[T], kappa_m: usize, period: T) -> Result<GenCoefficients<T>> {
    let per = 2 * kappa_m + 1;
    if x.len() != 6 * per {
        return Err(Error::Dimension { expected: 6 * per, got: x.len() });
    }
    let series = |i: usize| -> Result<FourierSeries<T>> {
        let chunk = &x[i * per..(i + 1) * per];
        let mut coeffs = vec![Complex::new(chunk[0], T::zero())];
        coeffs.extend(chunk[1..].chunks_exact(2).map(|p| Complex::new(p[0], p[1])));
        FourierSeries::new(period, coeffs)
    };
    Ok(GenCoefficients {
        beta_s: series(0)?,
        beta_1: series(1)?,
        beta_2: series(2)?,
        beta_m: series(3)?,
        s_x: series(4)?,
        g_x: series(5)?,
    })
}
