//! Scale functions (normalized fluxes) and elasticities along a periodic orbit, and the
//! moduli-space flow they must satisfy.
//!
//! With `γ = (γ1, γ2)` the orbit:
//! `β_s = S/γ1`, `β_1 = G/γ1`, `β_2 = G/γ2`, `β_m = M/γ2`,
//! `s_x = γ1 S'/S`, `g_x = γ1 ∂_X G / G`, `g_y = γ2 ∂_Y G / G`, `m_y = γ2 M'/M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{interpolant, spectral_derivative, FourierSeries};
use crate::io::{read_periodic_csv, write_periodic_csv};
use crate::model::{eval_field, ModelSpec};
use crate::ode::{dopri5, OdeOptions};
use crate::orbit::PeriodicOrbit;
use crate::Real;

/// The four scale functions at one instant (or their time derivatives).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales<T> {
    pub beta_s: T,
    pub beta_1: T,
    pub beta_2: T,
    pub beta_m: T,
}

impl<T: Real> Scales<T> {
    pub const NAMES: [&'static str; 4] = ["beta_s", "beta_1", "beta_2", "beta_m"];

    pub fn to_array(self) -> [T; 4] {
        [self.beta_s, self.beta_1, self.beta_2, self.beta_m]
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self { beta_s: a[0], beta_1: a[1], beta_2: a[2], beta_m: a[3] }
    }

    pub fn max(self) -> T {
        self.to_array().into_iter().fold(T::zero(), T::max)
    }
}

/// The four elasticities at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elasticities<T> {
    pub s_x: T,
    pub g_x: T,
    pub g_y: T,
    pub m_y: T,
}

/// `d/dt` of the scale functions given the elasticities:
///
/// ```text
/// β_s' = β_s (β_s - β_1)(s_x - 1)
/// β_m' = β_m (β_2 - β_m)(m_y - 1)
/// β_1' = β_1 [(β_s - β_1) g_x - (β_s - β_1) + (β_2 - β_m) g_y]
/// β_2' = β_2 [(β_2 - β_m) g_y - (β_2 - β_m) + (β_s - β_1) g_x]
/// ```
pub fn moduli_rhs<T: Real>(b: &Scales<T>, e: &Elasticities<T>) -> Scales<T> {
    let one = T::one();
    let dx = b.beta_s - b.beta_1;
    let dy = b.beta_2 - b.beta_m;
    Scales {
        beta_s: b.beta_s * dx * (e.s_x - one),
        beta_1: b.beta_1 * (dx * e.g_x - dx + dy * e.g_y),
        beta_2: b.beta_2 * (dy * e.g_y - dy + dx * e.g_x),
        beta_m: b.beta_m * dy * (e.m_y - one),
    }
}

/// Scale and elasticity functions sampled on the orbit grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GeneralizedFunctions<T> {
    pub period: T,
    pub beta_s: Vec<T>,
    pub beta_1: Vec<T>,
    pub beta_2: Vec<T>,
    pub beta_m: Vec<T>,
    pub s_x: Vec<T>,
    pub g_x: Vec<T>,
    pub g_y: Vec<T>,
    pub m_y: Vec<T>,
}

const CSV_NAMES: [&str; 8] = ["beta_s", "beta_1", "beta_2", "beta_m", "s_x", "g_x", "g_y", "m_y"];

impl<T: Real> GeneralizedFunctions<T> {
    pub fn n(&self) -> usize {
        self.beta_s.len()
    }

    pub fn time(&self, j: usize) -> T {
        self.period * T::from_usize_lossy(j) / T::from_usize_lossy(self.n())
    }

    pub fn scales(&self, j: usize) -> Scales<T> {
        Scales { beta_s: self.beta_s[j], beta_1: self.beta_1[j], beta_2: self.beta_2[j], beta_m: self.beta_m[j] }
    }

    pub fn elasticities(&self, j: usize) -> Elasticities<T> {
        Elasticities { s_x: self.s_x[j], g_x: self.g_x[j], g_y: self.g_y[j], m_y: self.m_y[j] }
    }

    fn columns(&self) -> [&[T]; 8] {
        [&self.beta_s, &self.beta_1, &self.beta_2, &self.beta_m, &self.s_x, &self.g_x, &self.g_y, &self.m_y]
    }

    pub fn beta_series(&self) -> [&[T]; 4] {
        [&self.beta_s, &self.beta_1, &self.beta_2, &self.beta_m]
    }

    /// `β_s(s_x - 1) - β_1(g_x - 1) + β_2(g_y - 1) - β_m(m_y - 1)`, the trace of the
    /// variational matrix in scaled coordinates.
    pub fn floquet_integrand(&self) -> Vec<T> {
        let one = T::one();
        (0..self.n())
            .map(|j| {
                self.beta_s[j] * (self.s_x[j] - one) - self.beta_1[j] * (self.g_x[j] - one)
                    + self.beta_2[j] * (self.g_y[j] - one)
                    - self.beta_m[j] * (self.m_y[j] - one)
            })
            .collect()
    }

    /// `max_j max(|g_y - 1|, |m_y - 1|)`
    pub fn predator_elasticity_deviation(&self) -> T {
        self.g_y.iter().chain(&self.m_y).fold(T::zero(), |m, v| m.max((*v - T::one()).abs()))
    }

    pub fn to_csv(&self) -> String {
        write_periodic_csv(self.period, &CSV_NAMES, &self.columns())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (period, cols) = read_periodic_csv(text, &CSV_NAMES)?;
        let mut it = cols.into_iter();
        let mut next = || it.next().unwrap_or_default();
        let gf = Self {
            period,
            beta_s: next(),
            beta_1: next(),
            beta_2: next(),
            beta_m: next(),
            s_x: next(),
            g_x: next(),
            g_y: next(),
            m_y: next(),
        };
        if gf.beta_series().iter().any(|s| s.iter().any(|v| !(*v > T::zero()))) {
            return Err(Error::Parse("scale functions must be positive".into()));
        }
        Ok(gf)
    }
}

/// Pointwise scale functions and elasticities along the orbit.
pub fn compute_gen_functions<T: Real>(model: &ModelSpec<T>, orbit: &PeriodicOrbit<T>) -> Result<GeneralizedFunctions<T>> {
    let n = orbit.n();
    let mut gf = GeneralizedFunctions {
        period: orbit.period(),
        beta_s: Vec::with_capacity(n),
        beta_1: Vec::with_capacity(n),
        beta_2: Vec::with_capacity(n),
        beta_m: Vec::with_capacity(n),
        s_x: Vec::with_capacity(n),
        g_x: Vec::with_capacity(n),
        g_y: Vec::with_capacity(n),
        m_y: Vec::with_capacity(n),
    };
    for j in 0..n {
        let st = orbit.state(j);
        let (x, y) = (st.x, st.y);
        let s = model.growth.rate(x);
        if !(s > T::zero()) {
            return Err(Error::NonPositiveGrowth { t: orbit.time(j).to_f64_lossy() });
        }
        let g = model.predation.rate(x, y);
        let m = model.mortality.rate(y);
        if !(g > T::zero() && m > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "predation or mortality vanishes at t={}",
                orbit.time(j)
            )));
        }
        gf.beta_s.push(s / x);
        gf.beta_1.push(g / x);
        gf.beta_2.push(g / y);
        gf.beta_m.push(m / y);
        gf.s_x.push(x * model.growth.deriv(x) / s);
        gf.g_x.push(x * model.predation.dx(x, y) / g);
        gf.g_y.push(y * model.predation.dy(x, y) / g);
        gf.m_y.push(y * model.mortality.deriv(y) / m);
    }
    Ok(gf)
}

/// Scale functions sampled at `t_j = j · duration / steps`, `j = 0..=steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModuliTrajectory<T> {
    pub times: Vec<T>,
    pub beta_s: Vec<T>,
    pub beta_1: Vec<T>,
    pub beta_2: Vec<T>,
    pub beta_m: Vec<T>,
}

impl<T: Real> ModuliTrajectory<T> {
    pub fn series(&self) -> [&[T]; 4] {
        [&self.beta_s, &self.beta_1, &self.beta_2, &self.beta_m]
    }
}

/// Elasticity time series, interpolated trigonometrically when integrating the flow.
#[derive(Debug, Clone)]
pub struct ElasticitySeries<T> {
    pub period: T,
    pub s_x: Vec<T>,
    pub g_x: Vec<T>,
    pub g_y: Vec<T>,
    pub m_y: Vec<T>,
}

impl<T: Real> From<&GeneralizedFunctions<T>> for ElasticitySeries<T> {
    fn from(gf: &GeneralizedFunctions<T>) -> Self {
        Self { period: gf.period, s_x: gf.s_x.clone(), g_x: gf.g_x.clone(), g_y: gf.g_y.clone(), m_y: gf.m_y.clone() }
    }
}

/// Integrates the moduli flow with prescribed periodic elasticities from `beta0`.
pub fn integrate_moduli_flow<T: Real>(
    elasticities: &ElasticitySeries<T>,
    beta0: Scales<T>,
    duration: T,
    steps: usize,
    tol: T,
) -> Result<ModuliTrajectory<T>> {
    if beta0.to_array().iter().any(|b| !(*b > T::zero())) {
        return Err(Error::InvalidParameter("initial scale functions must be positive".into()));
    }
    if steps == 0 || !(duration > T::zero()) {
        return Err(Error::InvalidParameter("need positive duration and at least one step".into()));
    }
    let p = elasticities.period;
    let fs: [FourierSeries<T>; 4] = [
        interpolant(&elasticities.s_x, p)?,
        interpolant(&elasticities.g_x, p)?,
        interpolant(&elasticities.g_y, p)?,
        interpolant(&elasticities.m_y, p)?,
    ];
    let rhs = |t: T, b: &[T; 4]| -> Result<[T; 4]> {
        for (i, v) in b.iter().enumerate() {
            if !(*v > T::zero()) {
                return Err(Error::ModuliExit { name: Scales::<T>::NAMES[i], t: t.to_f64_lossy() });
            }
        }
        let e = Elasticities {
            s_x: fs[0].evaluate(t),
            g_x: fs[1].evaluate(t),
            g_y: fs[2].evaluate(t),
            m_y: fs[3].evaluate(t),
        };
        Ok(moduli_rhs(&Scales::from_array(*b), &e).to_array())
    };
    let sol = dopri5(rhs, T::zero(), beta0.to_array(), duration, &OdeOptions::with_tol(tol))?;
    let mut out = ModuliTrajectory {
        times: Vec::with_capacity(steps + 1),
        beta_s: Vec::with_capacity(steps + 1),
        beta_1: Vec::with_capacity(steps + 1),
        beta_2: Vec::with_capacity(steps + 1),
        beta_m: Vec::with_capacity(steps + 1),
    };
    for j in 0..=steps {
        let t = duration * T::from_usize_lossy(j) / T::from_usize_lossy(steps);
        let b = sol.eval(t);
        if let Some(i) = b.iter().position(|v| !(*v > T::zero())) {
            return Err(Error::ModuliExit { name: Scales::<T>::NAMES[i], t: t.to_f64_lossy() });
        }
        out.times.push(t);
        out.beta_s.push(b[0]);
        out.beta_1.push(b[1]);
        out.beta_2.push(b[2]);
        out.beta_m.push(b[3]);
    }
    Ok(out)
}

/// Max-norm residual of each flow equation, with the time derivative taken spectrally.
pub fn moduli_residual<T: Real>(gf: &GeneralizedFunctions<T>) -> Result<Scales<T>> {
    let d: Vec<Vec<T>> = gf
        .beta_series()
        .iter()
        .map(|s| spectral_derivative(s, gf.period))
        .collect::<Result<_>>()?;
    let mut worst = [T::zero(); 4];
    for j in 0..gf.n() {
        let r = moduli_rhs(&gf.scales(j), &gf.elasticities(j)).to_array();
        for i in 0..4 {
            worst[i] = worst[i].max((d[i][j] - r[i]).abs());
        }
    }
    Ok(Scales::from_array(worst))
}

/// Max residual of `s_x' = -s_x (s_x - 1)(β_s - β_1) + γ1' S''(γ1) / β_s` along the orbit,
/// with `s_x'` differentiated spectrally and `γ1'` taken from the vector field.
pub fn second_order_check<T: Real>(model: &ModelSpec<T>, orbit: &PeriodicOrbit<T>) -> Result<T> {
    let gf = compute_gen_functions(model, orbit)?;
    let lhs = spectral_derivative(&gf.s_x, gf.period)?;
    let one = T::one();
    let mut worst = T::zero();
    for (j, l) in lhs.iter().enumerate() {
        let st = orbit.state(j);
        let (dx, _) = eval_field(model, &st)?;
        let sx = gf.s_x[j];
        let rhs = -sx * (sx - one) * (gf.beta_s[j] - gf.beta_1[j])
            + dx * model.growth.second_deriv(st.x) / gf.beta_s[j];
        worst = worst.max((*l - rhs).abs());
    }
    Ok(worst)
}

/// `β_s(s_x - 1)` and `β_1(g_x - 1)` from the generic definitions next to their closed forms
/// `S' - S/γ1` and `∂_X G - G/γ1` written out per functional form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpecificTerms<T> {
    pub growth_generic: Vec<T>,
    pub growth_closed: Vec<T>,
    pub predation_generic: Vec<T>,
    pub predation_closed: Vec<T>,
}

impl<T: Real> SpecificTerms<T> {
    /// Largest pointwise gap between generic and closed-form series.
    pub fn max_gap(&self) -> T {
        let gap = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
        gap(&self.growth_generic, &self.growth_closed).max(gap(&self.predation_generic, &self.predation_closed))
    }
}

pub fn specific_terms<T: Real>(model: &ModelSpec<T>, orbit: &PeriodicOrbit<T>) -> Result<SpecificTerms<T>> {
    let gf = compute_gen_functions(model, orbit)?;
    let one = T::one();
    let n = orbit.n();
    let mut out = SpecificTerms {
        growth_generic: Vec::with_capacity(n),
        growth_closed: Vec::with_capacity(n),
        predation_generic: Vec::with_capacity(n),
        predation_closed: Vec::with_capacity(n),
    };
    for j in 0..n {
        let st = orbit.state(j);
        out.growth_generic.push(gf.beta_s[j] * (gf.s_x[j] - one));
        out.growth_closed.push(model.growth.closed_scale_term(st.x));
        out.predation_generic.push(gf.beta_1[j] * (gf.g_x[j] - one));
        out.predation_closed.push(model.predation.closed_scale_term(st.x, st.y));
    }
    Ok(out)
}
