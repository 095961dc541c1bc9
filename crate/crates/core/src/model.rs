//! Specific predator-prey models `X' = S(X) - G(X,Y)`, `Y' = G(X,Y) - M(Y)` built from a
//! closed menu of functional forms, and their equilibrium generalized parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::Real;

/// Prey growth `S(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Growth<T> {
    /// `k1 X`
    Linear { k1: T },
    /// `k1 X^p`
    Power { k1: T, p: T },
    /// `k1 X - k2 X²`
    Logistic { k1: T, k2: T },
    /// `k1 X (k2 - X)(X - k3)` with `0 < k2 < k3` (strong Allee effect)
    Allee { k1: T, k2: T, k3: T },
}

/// Predation `G(X, Y)`. Every Holling form is linear in `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Predation<T> {
    /// `k1 X Y`
    #[serde(alias = "holling1", alias = "holling_i")]
    HollingI { k1: T },
    /// `k1 X Y / (k2 + X)`
    #[serde(alias = "holling2", alias = "holling_ii")]
    HollingII { k1: T, k2: T },
    /// `k1 X² Y / (k2 + X²)`
    #[serde(alias = "holling3", alias = "holling_iii")]
    HollingIII { k1: T, k2: T },
    /// `k1 X² Y / (k2 + X + k3 X²)`
    #[serde(alias = "holling4", alias = "holling_iv")]
    HollingIV { k1: T, k2: T, k3: T },
    /// `k1 X^p Y^q`, used to realize arbitrary generalized parameters.
    Power { k1: T, p: T, q: T },
}

/// Predator mortality `M(Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Mortality<T> {
    /// `k Y`
    Linear { k: T },
    /// `k Y^q`
    Power { k: T, q: T },
}

fn require_positive<T: Real>(what: &str, values: &[T]) -> Result<()> {
    for v in values {
        if !(v.is_finite() && *v > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "{what}: parameters must be finite and strictly positive, got {v}"
            )));
        }
    }
    Ok(())
}

impl<T: Real> Growth<T> {
    fn validate(&self) -> Result<()> {
        match *self {
            Growth::Linear { k1 } => require_positive("linear growth", &[k1]),
            Growth::Power { k1, p } => require_positive("power growth", &[k1, p]),
            Growth::Logistic { k1, k2 } => require_positive("logistic growth", &[k1, k2]),
            Growth::Allee { k1, k2, k3 } => {
                require_positive("Allee growth", &[k1, k2, k3])?;
                if k2 < k3 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "Allee growth requires k2 < k3, got k2={k2}, k3={k3}"
                    )))
                }
            }
        }
    }

    pub fn rate(&self, x: T) -> T {
        match *self {
            Growth::Linear { k1 } => k1 * x,
            Growth::Power { k1, p } => k1 * x.powf(p),
            Growth::Logistic { k1, k2 } => k1 * x - k2 * x * x,
            Growth::Allee { k1, k2, k3 } => k1 * x * (k2 - x) * (x - k3),
        }
    }

    /// `S'(X)`
    pub fn deriv(&self, x: T) -> T {
        let two = T::lit(2.0);
        match *self {
            Growth::Linear { k1 } => k1,
            Growth::Power { k1, p } => k1 * p * x.powf(p - T::one()),
            Growth::Logistic { k1, k2 } => k1 - two * k2 * x,
            Growth::Allee { k1, k2, k3 } => {
                k1 * (-T::lit(3.0) * x * x + two * (k2 + k3) * x - k2 * k3)
            }
        }
    }

    /// `S''(X)`
    pub fn second_deriv(&self, x: T) -> T {
        let two = T::lit(2.0);
        match *self {
            Growth::Linear { .. } => T::zero(),
            Growth::Power { k1, p } => k1 * p * (p - T::one()) * x.powf(p - two),
            Growth::Logistic { k2, .. } => -two * k2,
            Growth::Allee { k1, k2, k3 } => k1 * (-T::lit(6.0) * x + two * (k2 + k3)),
        }
    }

    /// Closed form of `β_s (s_x - 1) = S'(X) - S(X)/X` for this form.
    pub fn closed_scale_term(&self, x: T) -> T {
        match *self {
            Growth::Linear { .. } => T::zero(),
            Growth::Power { k1, p } => k1 * (p - T::one()) * x.powf(p - T::one()),
            Growth::Logistic { k2, .. } => -k2 * x,
            Growth::Allee { k1, k2, k3 } => k1 * x * (k2 + k3 - T::lit(2.0) * x),
        }
    }
}

impl<T: Real> Predation<T> {
    fn validate(&self) -> Result<()> {
        match *self {
            Predation::HollingI { k1 } => require_positive("Holling I", &[k1]),
            Predation::HollingII { k1, k2 } => require_positive("Holling II", &[k1, k2]),
            Predation::HollingIII { k1, k2 } => require_positive("Holling III", &[k1, k2]),
            Predation::HollingIV { k1, k2, k3 } => require_positive("Holling IV", &[k1, k2, k3]),
            Predation::Power { k1, p, q } => require_positive("power predation", &[k1, p, q]),
        }
    }

    pub fn rate(&self, x: T, y: T) -> T {
        match *self {
            Predation::HollingI { k1 } => k1 * x * y,
            Predation::HollingII { k1, k2 } => k1 * x * y / (k2 + x),
            Predation::HollingIII { k1, k2 } => k1 * x * x * y / (k2 + x * x),
            Predation::HollingIV { k1, k2, k3 } => k1 * x * x * y / (k2 + x + k3 * x * x),
            Predation::Power { k1, p, q } => k1 * x.powf(p) * y.powf(q),
        }
    }

    /// `∂G/∂X`
    pub fn dx(&self, x: T, y: T) -> T {
        let two = T::lit(2.0);
        match *self {
            Predation::HollingI { k1 } => k1 * y,
            Predation::HollingII { k1, k2 } => k1 * k2 * y / ((k2 + x) * (k2 + x)),
            Predation::HollingIII { k1, k2 } => {
                let d = k2 + x * x;
                two * k1 * k2 * x * y / (d * d)
            }
            Predation::HollingIV { k1, k2, k3 } => {
                let d = k2 + x + k3 * x * x;
                k1 * x * (two * k2 + x) * y / (d * d)
            }
            Predation::Power { k1, p, q } => k1 * p * x.powf(p - T::one()) * y.powf(q),
        }
    }

    /// `∂G/∂Y`
    pub fn dy(&self, x: T, y: T) -> T {
        match *self {
            Predation::HollingI { k1 } => k1 * x,
            Predation::HollingII { k1, k2 } => k1 * x / (k2 + x),
            Predation::HollingIII { k1, k2 } => k1 * x * x / (k2 + x * x),
            Predation::HollingIV { k1, k2, k3 } => k1 * x * x / (k2 + x + k3 * x * x),
            Predation::Power { k1, p, q } => k1 * q * x.powf(p) * y.powf(q - T::one()),
        }
    }

    /// Closed form of `β_1 (g_x - 1) = ∂G/∂X - G/X` for this form.
    pub fn closed_scale_term(&self, x: T, y: T) -> T {
        match *self {
            Predation::HollingI { .. } => T::zero(),
            Predation::HollingII { k1, k2 } => -k1 * x * y / ((k2 + x) * (k2 + x)),
            Predation::HollingIII { k1, k2 } => {
                let d = k2 + x * x;
                k1 * x * y * (k2 - x * x) / (d * d)
            }
            Predation::HollingIV { k1, k2, k3 } => {
                let d = k2 + x + k3 * x * x;
                k1 * x * y * (k2 - k3 * x * x) / (d * d)
            }
            Predation::Power { k1, p, q } => {
                k1 * (p - T::one()) * x.powf(p - T::one()) * y.powf(q)
            }
        }
    }

    /// Whether `G` is linear in `Y`, which makes `g_y ≡ 1`.
    pub fn is_linear_in_predator(&self) -> bool {
        match *self {
            Predation::Power { q, .. } => q == T::one(),
            _ => true,
        }
    }
}

impl<T: Real> Mortality<T> {
    fn validate(&self) -> Result<()> {
        match *self {
            Mortality::Linear { k } => require_positive("linear mortality", &[k]),
            Mortality::Power { k, q } => require_positive("power mortality", &[k, q]),
        }
    }

    pub fn rate(&self, y: T) -> T {
        match *self {
            Mortality::Linear { k } => k * y,
            Mortality::Power { k, q } => k * y.powf(q),
        }
    }

    /// `M'(Y)`
    pub fn deriv(&self, y: T) -> T {
        match *self {
            Mortality::Linear { k } => k,
            Mortality::Power { k, q } => k * q * y.powf(q - T::one()),
        }
    }

    pub fn is_linear(&self) -> bool {
        match *self {
            Mortality::Linear { .. } => true,
            Mortality::Power { q, .. } => q == T::one(),
        }
    }
}

/// A specific predator-prey model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub growth: Growth<T>,
    pub predation: Predation<T>,
    pub mortality: Mortality<T>,
}

/// Prey and predator densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> State<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if x > T::zero() && y > T::zero() && x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidParameter(format!(
                "state must be strictly positive, got ({x}, {y})"
            )))
        }
    }
}

/// Scale parameters and elasticities at a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqGenParams<T> {
    pub beta_s: T,
    pub beta_1: T,
    pub beta_2: T,
    pub beta_m: T,
    pub s_x: T,
    pub g_x: T,
    pub g_y: T,
    pub m_y: T,
}

/// Target generalized parameters for [`realize_power_law`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawTargets<T> {
    pub beta_1: T,
    pub beta_2: T,
    pub s_x: T,
    pub g_x: T,
    pub g_y: T,
    pub m_y: T,
}

/// Scaled field residual accepted by [`equilibrium_gen_params`].
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

impl<T: Real> ModelSpec<T> {
    pub fn new(growth: Growth<T>, predation: Predation<T>, mortality: Mortality<T>) -> Result<Self> {
        let m = Self { growth, predation, mortality };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.growth.validate()?;
        self.predation.validate()?;
        self.mortality.validate()
    }

    /// Rosenzweig-MacArthur: logistic growth (2, 0.5), Holling II (1, 1), linear mortality 0.5.
    pub fn rosenzweig_macarthur() -> Self {
        Self {
            growth: Growth::Logistic { k1: T::lit(2.0), k2: T::lit(0.5) },
            predation: Predation::HollingII { k1: T::one(), k2: T::one() },
            mortality: Mortality::Linear { k: T::lit(0.5) },
        }
    }

    /// Lotka-Volterra with every rate constant equal to one.
    pub fn lotka_volterra() -> Self {
        Self {
            growth: Growth::Linear { k1: T::one() },
            predation: Predation::HollingI { k1: T::one() },
            mortality: Mortality::Linear { k: T::one() },
        }
    }

    /// Built-in models by name: `"rm"` or `"lv"`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rm" => Some(Self::rosenzweig_macarthur()),
            "lv" => Some(Self::lotka_volterra()),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    /// Predation linear in `Y` and linear mortality, i.e. `g_y ≡ 1 ≡ m_y`.
    pub fn has_unit_predator_elasticities(&self) -> bool {
        self.predation.is_linear_in_predator() && self.mortality.is_linear()
    }
}

/// `(S(X) - G(X,Y), G(X,Y) - M(Y))`
pub fn eval_field<T: Real>(model: &ModelSpec<T>, state: &State<T>) -> Result<(T, T)> {
    let (x, y) = (state.x, state.y);
    let g = model.predation.rate(x, y);
    let dx = model.growth.rate(x) - g;
    let dy = g - model.mortality.rate(y);
    if dx.is_finite() && dy.is_finite() {
        Ok((dx, dy))
    } else {
        Err(Error::NonFinite { x: x.to_f64_lossy(), y: y.to_f64_lossy() })
    }
}

/// Analytic Jacobian of [`eval_field`].
pub fn eval_jacobian<T: Real>(model: &ModelSpec<T>, state: &State<T>) -> Result<Mat2<T>> {
    let (x, y) = (state.x, state.y);
    let gx = model.predation.dx(x, y);
    let gy = model.predation.dy(x, y);
    let j = Mat2::new(
        model.growth.deriv(x) - gx,
        -gy,
        gx,
        gy - model.mortality.deriv(y),
    );
    if j.0.iter().flatten().all(|v| v.is_finite()) {
        Ok(j)
    } else {
        Err(Error::NonFinite { x: x.to_f64_lossy(), y: y.to_f64_lossy() })
    }
}

fn scaled_gap<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale > T::zero() {
        (a - b).abs() / scale
    } else {
        T::zero()
    }
}

/// Scale parameters (normalized fluxes) and elasticities (logarithmic derivatives)
/// at an equilibrium.
///
/// The equilibrium test compares each flux balance relative to the flux magnitude,
/// `|S - G| / max(|S|, |G|)` and `|G - M| / max(|G|, |M|)`, against [`EQUILIBRIUM_TOL`].
pub fn equilibrium_gen_params<T: Real>(model: &ModelSpec<T>, eq: &State<T>) -> Result<EqGenParams<T>> {
    let (x, y) = (eq.x, eq.y);
    let s = model.growth.rate(x);
    let g = model.predation.rate(x, y);
    let m = model.mortality.rate(y);
    for (name, v) in [("S", s), ("G", g), ("M", m)] {
        if !v.is_finite() {
            return Err(Error::NonFinite { x: x.to_f64_lossy(), y: y.to_f64_lossy() });
        }
        if v == T::zero() {
            return Err(Error::ZeroRate(name));
        }
    }
    let residual = scaled_gap(s, g).max(scaled_gap(g, m));
    if residual >= T::lit(EQUILIBRIUM_TOL) {
        return Err(Error::NotEquilibrium { residual: residual.to_f64_lossy() });
    }
    Ok(EqGenParams {
        beta_s: s / x,
        beta_1: g / x,
        beta_2: g / y,
        beta_m: m / y,
        s_x: x * model.growth.deriv(x) / s,
        g_x: x * model.predation.dx(x, y) / g,
        g_y: y * model.predation.dy(x, y) / g,
        m_y: y * model.mortality.deriv(y) / m,
    })
}

/// Builds `S = p_S X^{s_x}`, `G = X^{g_x} Y^{g_y}`, `M = p_M Y^{m_y}` and an equilibrium
/// `(X*, Y*)` whose generalized parameters are the given targets.
///
/// `G/X = β1` and `G/Y = β2` form a log-linear system in `(ln X*, ln Y*)` with matrix
/// `[[g_x - 1, g_y], [g_x, g_y - 1]]`; its determinant `-(g_x + g_y - 1)` must not vanish.
/// The prefactors then follow from `S/X = β1` and `M/Y = β2`.
pub fn realize_power_law<T: Real>(t: &PowerLawTargets<T>) -> Result<(ModelSpec<T>, State<T>)> {
    require_positive(
        "power-law targets",
        &[t.beta_1, t.beta_2, t.s_x, t.g_x, t.g_y, t.m_y],
    )?;
    let one = T::one();
    let det = -(t.g_x + t.g_y - one);
    let scale = T::one().max(t.g_x.abs()).max(t.g_y.abs());
    if det.abs() <= T::lit(1e-12) * scale {
        return Err(Error::Singular(det.to_f64_lossy()));
    }
    let (l1, l2) = (t.beta_1.ln(), t.beta_2.ln());
    // Cramer's rule on [[g_x - 1, g_y], [g_x, g_y - 1]] (lx, ly) = (l1, l2).
    let lx = (l1 * (t.g_y - one) - t.g_y * l2) / det;
    let ly = ((t.g_x - one) * l2 - t.g_x * l1) / det;
    let (x, y) = (lx.exp(), ly.exp());
    let p_s = t.beta_1 * x.powf(one - t.s_x);
    let p_m = t.beta_2 * y.powf(one - t.m_y);
    for v in [x, y, p_s, p_m] {
        if !(v.is_normal() && v > T::zero()) {
            return Err(Error::Singular(det.to_f64_lossy()));
        }
    }
    let model = ModelSpec {
        growth: Growth::Power { k1: p_s, p: t.s_x },
        predation: Predation::Power { k1: one, p: t.g_x, q: t.g_y },
        mortality: Mortality::Power { k: p_m, q: t.m_y },
    };
    Ok((model, State { x, y }))
}

/// Jacobian of the normalized system at `(x, y) = (1, 1)`.
pub fn equilibrium_jacobian<T: Real>(p: &EqGenParams<T>) -> Mat2<T> {
    Mat2::new(
        p.beta_1 * (p.s_x - p.g_x),
        -p.beta_1 * p.g_y,
        p.beta_2 * p.g_x,
        p.beta_2 * (p.g_y - p.m_y),
    )
}
