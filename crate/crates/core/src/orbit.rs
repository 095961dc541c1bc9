//! Trajectories, attracting limit cycles, and the monodromy matrix of the variational
//! equation `M' = DF(γ(t)) M`, `M(0) = Id`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_periodic_csv, write_periodic_csv};
use crate::linalg::Mat2;
use crate::model::{eval_field, eval_jacobian, ModelSpec, State};
use crate::ode::{dopri5, DenseSolution, OdeOptions};
use crate::Real;

/// Relative return distance `|γ(T) - γ(0)| / |γ(0)|` accepted as closed.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Slack below zero tolerated for intermediate Runge-Kutta stages.
pub const POSITIVITY_SLACK: f64 = 1e-9;

pub type Trajectory<T> = DenseSolution<T, 2>;

fn checked_state<T: Real>(t: T, y: &[T]) -> Result<State<T>> {
    let slack = -T::lit(POSITIVITY_SLACK);
    if y.iter().any(|v| !(*v >= slack)) {
        return Err(Error::LeftPositiveQuadrant { t: t.to_f64_lossy() });
    }
    Ok(State { x: y[0].max(T::zero()), y: y[1].max(T::zero()) })
}

fn field_rhs<T: Real>(model: &ModelSpec<T>) -> impl FnMut(T, &[T; 2]) -> Result<[T; 2]> + '_ {
    move |t, y| {
        let s = checked_state(t, y)?;
        let (dx, dy) = eval_field(model, &s)?;
        Ok([dx, dy])
    }
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if tol >= T::lit(1e-12) && tol <= T::lit(1e-3) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance {tol} outside [1e-12, 1e-3]")))
    }
}

/// Adaptive Dormand-Prince solution of the model from `start` over `[0, duration]`,
/// with absolute and relative tolerance `tol`.
pub fn integrate<T: Real>(model: &ModelSpec<T>, start: &State<T>, duration: T, tol: T) -> Result<Trajectory<T>> {
    State::new(start.x, start.y)?;
    check_tol(tol)?;
    if !(duration > T::zero()) {
        return Err(Error::InvalidParameter(format!("duration must be positive, got {duration}")));
    }
    dopri5(field_rhs(model), T::zero(), [start.x, start.y], duration, &OdeOptions::with_tol(tol))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OrbitRepr<T> {
    #[serde(rename = "T")]
    period: T,
    n: usize,
    gamma1: Vec<T>,
    gamma2: Vec<T>,
}

/// One period of a cycle sampled at `t_j = j T / n`, `j = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OrbitRepr<T>", into = "OrbitRepr<T>")]
#[serde(bound = "T: Real")]
pub struct PeriodicOrbit<T> {
    period: T,
    gamma1: Vec<T>,
    gamma2: Vec<T>,
}

impl<T: Real> TryFrom<OrbitRepr<T>> for PeriodicOrbit<T> {
    type Error = Error;
    fn try_from(r: OrbitRepr<T>) -> Result<Self> {
        if r.gamma1.len() != r.n {
            return Err(Error::Dimension { expected: r.n, got: r.gamma1.len() });
        }
        PeriodicOrbit::from_samples(r.period, r.gamma1, r.gamma2)
    }
}

impl<T: Real> From<PeriodicOrbit<T>> for OrbitRepr<T> {
    fn from(o: PeriodicOrbit<T>) -> Self {
        Self { period: o.period, n: o.gamma1.len(), gamma1: o.gamma1, gamma2: o.gamma2 }
    }
}

impl<T: Real> PeriodicOrbit<T> {
    /// Wraps samples of a closed curve. Checks positivity and the power-of-two grid;
    /// closure is a property of the source, see [`PeriodicOrbit::closure_error`].
    pub fn from_samples(period: T, gamma1: Vec<T>, gamma2: Vec<T>) -> Result<Self> {
        if !(period > T::zero() && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        if gamma1.len() != gamma2.len() {
            return Err(Error::Dimension { expected: gamma1.len(), got: gamma2.len() });
        }
        let n = gamma1.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if gamma1.iter().chain(&gamma2).any(|v| !(*v > T::zero() && v.is_finite())) {
            return Err(Error::InvalidParameter("orbit samples must be strictly positive".into()));
        }
        Ok(Self { period, gamma1, gamma2 })
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn n(&self) -> usize {
        self.gamma1.len()
    }

    pub fn gamma1(&self) -> &[T] {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &[T] {
        &self.gamma2
    }

    pub fn time(&self, j: usize) -> T {
        self.period * T::from_usize_lossy(j) / T::from_usize_lossy(self.n())
    }

    pub fn state(&self, j: usize) -> State<T> {
        State { x: self.gamma1[j], y: self.gamma2[j] }
    }

    /// Relative distance between `γ(0)` and the model flow of `γ(0)` after `duration`.
    pub fn return_distance(&self, model: &ModelSpec<T>, duration: T, tol: T) -> Result<T> {
        let p = [self.gamma1[0], self.gamma2[0]];
        let sol = integrate(model, &self.state(0), duration, tol)?;
        Ok(rel_dist(&sol.y_end(), &p))
    }

    /// Relative closure error after one full period.
    pub fn closure_error(&self, model: &ModelSpec<T>, tol: T) -> Result<T> {
        self.return_distance(model, self.period, tol)
    }

    pub fn to_csv(&self) -> String {
        write_periodic_csv(self.period, &["gamma1", "gamma2"], &[&self.gamma1, &self.gamma2])
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (period, mut cols) = read_periodic_csv(text, &["gamma1", "gamma2"])?;
        let gamma2 = cols.pop().unwrap_or_default();
        let gamma1 = cols.pop().unwrap_or_default();
        Self::from_samples(period, gamma1, gamma2)
    }

    /// Mean of a function of the state over one period (uniform-grid trapezoid).
    pub fn mean_of(&self, f: impl Fn(State<T>) -> T) -> T {
        let s: T = (0..self.n()).map(|j| f(self.state(j))).sum();
        s / T::from_usize_lossy(self.n())
    }
}

fn rel_dist<T: Real>(a: &[T; 2], b: &[T; 2]) -> T {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    d / (b[0] * b[0] + b[1] * b[1]).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct CycleOptions<T> {
    /// Transient discarded before locating the section.
    pub burn_in: T,
    /// Averaging window that fixes the section `X = mean X`.
    pub window: T,
    /// Grid size of the returned orbit (power of two).
    pub n: usize,
    pub tol: T,
    /// Time searched for section returns after the averaging window.
    pub search_horizon: T,
}

impl<T: Real> Default for CycleOptions<T> {
    fn default() -> Self {
        Self {
            burn_in: T::lit(200.0),
            window: T::lit(50.0),
            n: 1024,
            tol: T::lit(1e-10),
            search_horizon: T::lit(2000.0),
        }
    }
}

/// Upward crossings `(t, state)` of `X = x_ref` on a dense solution.
fn upward_crossings<T: Real>(sol: &Trajectory<T>, x_ref: T) -> Vec<(T, [T; 2])> {
    let g = |y: &[T; 2]| y[0] - x_ref;
    sol.upward_brackets(g)
        .into_iter()
        .map(|(a, b)| {
            let tc = sol.refine_root(g, a, b, T::lit(1e-12) * T::one().max(b.abs()));
            (tc, sol.eval(tc))
        })
        .collect()
}

/// Locates an attracting cycle by Poincaré returns to `{X = X_ref, X increasing}` and
/// samples one period on a uniform grid.
///
/// After the burn-in, `X_ref` is the mean of `X` over the averaging window; returns are
/// followed until successive section points agree. The phase is then normalized so that
/// `γ(0)` sits on the upward crossing of the exact one-period mean of `γ1`.
pub fn find_limit_cycle<T: Real>(
    model: &ModelSpec<T>,
    start: &State<T>,
    opts: &CycleOptions<T>,
) -> Result<PeriodicOrbit<T>> {
    if opts.n < 4 || !opts.n.is_power_of_two() {
        return Err(Error::GridSize(opts.n));
    }
    let tol = opts.tol;
    let burn = integrate(model, start, opts.burn_in, tol)?;
    let after_burn = burn.y_end();
    let window = integrate(model, &State { x: after_burn[0], y: after_burn[1] }, opts.window, tol)?;

    let m = 4096;
    let xs: Vec<T> = (0..m)
        .map(|i| window.eval(opts.window * T::from_usize_lossy(i) / T::from_usize_lossy(m))[0])
        .collect();
    let x_ref = xs.iter().copied().sum::<T>() / T::from_usize_lossy(m);
    let (lo, hi) = xs.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo <= T::lit(1e-7) * x_ref.abs().max(T::one()) {
        return Err(Error::NoCycleFound(format!(
            "prey density settles at {x_ref} (amplitude {}) after the burn-in",
            hi - lo
        )));
    }

    let return_tol = T::lit(100.0) * tol;
    let mut crossings: Vec<(T, [T; 2])> = Vec::new();
    let mut t_offset = T::zero();
    let mut state = window.y_end();
    let mut diffs: Vec<T> = Vec::new();
    let converged = loop {
        if t_offset >= opts.search_horizon {
            break false;
        }
        let chunk = integrate(model, &State { x: state[0], y: state[1] }, opts.window, tol)?;
        for (tc, yc) in upward_crossings(&chunk, x_ref) {
            crossings.push((t_offset + tc, yc));
        }
        state = chunk.y_end();
        t_offset = t_offset + opts.window;

        diffs = crossings.windows(2).map(|w| rel_dist(&w[1].1, &w[0].1)).collect();
        if let Some(&last) = diffs.last() {
            if last <= return_tol {
                break true;
            }
            // Three successive non-decreasing gaps: the return map is not contracting.
            if diffs.len() >= 4 {
                let tail = &diffs[diffs.len() - 4..];
                if tail.windows(2).all(|w| w[1] >= w[0]) {
                    return Err(Error::NotConverged(format!(
                        "section returns are not contracting (last gap {last:e})"
                    )));
                }
            }
        }
    };
    if crossings.len() < 2 {
        return Err(Error::NoCycleFound(format!(
            "fewer than two section crossings within {} time units",
            opts.search_horizon
        )));
    }
    if !converged {
        return Err(Error::NotConverged(format!(
            "section returns still differ by {:e} after {} time units",
            diffs.last().copied().unwrap_or(T::infinity()),
            opts.search_horizon
        )));
    }
    let (t_a, _) = crossings[crossings.len() - 2];
    let (t_b, p) = crossings[crossings.len() - 1];
    let period = t_b - t_a;

    // Re-anchor the phase on the one-period mean of γ1.
    let first = integrate(model, &State { x: p[0], y: p[1] }, period, tol)?;
    let n = opts.n;
    let grid = |j: usize| period * T::from_usize_lossy(j) / T::from_usize_lossy(n);
    let mean_x = (0..n).map(|j| first.eval(grid(j))[0]).sum::<T>() / T::from_usize_lossy(n);
    let anchor = match upward_crossings(&first, mean_x).first() {
        Some(&(_, y)) => y,
        None => p,
    };

    let sol = integrate(model, &State { x: anchor[0], y: anchor[1] }, period, tol)?;
    let closure = rel_dist(&sol.y_end(), &anchor);
    if closure >= T::lit(CLOSURE_TOL) {
        return Err(Error::NotConverged(format!("orbit does not close: return distance {closure:e}")));
    }
    let (gamma1, gamma2): (Vec<T>, Vec<T>) = (0..n)
        .map(|j| {
            let y = sol.eval(grid(j));
            (y[0], y[1])
        })
        .unzip();
    PeriodicOrbit::from_samples(period, gamma1, gamma2)
}

/// Monodromy matrix and Floquet multipliers of a cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MonodromyResult<T> {
    pub matrix: Mat2<T>,
    pub eigenvalues: [Complex<T>; 2],
    /// Eigenvalue farther from 1.
    pub nontrivial_multiplier: Complex<T>,
    /// `|μ - 1|` for the eigenvalue taken as the trivial multiplier.
    pub trivial_deviation: T,
    /// `∫₀ᵀ Tr DF(γ(t)) dt`, integrated alongside the variational equation.
    pub trace_integral: T,
    /// Both eigenvalues farther than 1e-2 from 1.
    pub far_from_one: bool,
    /// The eigenvalues form a complex pair.
    pub complex_pair: bool,
}

impl<T: Real> MonodromyResult<T> {
    /// `|det M(T) - exp(∫Tr)| / exp(∫Tr)`
    pub fn liouville_gap(&self) -> T {
        let e = self.trace_integral.exp();
        (self.matrix.det() - e).abs() / e
    }

    /// Modulus of the nontrivial multiplier.
    pub fn multiplier_modulus(&self) -> T {
        self.nontrivial_multiplier.norm()
    }
}

/// Integrates `M' = DF(γ(t)) M` over one period together with the orbit itself and
/// the running trace integral.
pub fn monodromy<T: Real>(model: &ModelSpec<T>, orbit: &PeriodicOrbit<T>, tol: T) -> Result<MonodromyResult<T>> {
    check_tol(tol)?;
    let z = T::zero();
    let o = T::one();
    let y0 = [orbit.gamma1[0], orbit.gamma2[0], o, z, z, o, z];
    let rhs = |t: T, y: &[T; 7]| -> Result<[T; 7]> {
        let s = checked_state(t, &y[..2])?;
        let (dx, dy) = eval_field(model, &s)?;
        let a = eval_jacobian(model, &s)?;
        let m = Mat2::new(y[2], y[3], y[4], y[5]);
        let dm = a * m;
        Ok([dx, dy, dm[(0, 0)], dm[(0, 1)], dm[(1, 0)], dm[(1, 1)], a.trace()])
    };
    let sol = dopri5(rhs, z, y0, orbit.period, &OdeOptions::with_tol(tol))?;
    let y = sol.y_end();
    let matrix = Mat2::new(y[2], y[3], y[4], y[5]);
    let eigenvalues = matrix.eigenvalues();
    let one = Complex::new(o, z);
    let d0 = (eigenvalues[0] - one).norm();
    let d1 = (eigenvalues[1] - one).norm();
    let (nontrivial, trivial_deviation) = if d0 >= d1 { (eigenvalues[0], d1) } else { (eigenvalues[1], d0) };
    let near = T::lit(1e-2);
    Ok(MonodromyResult {
        matrix,
        eigenvalues,
        nontrivial_multiplier: nontrivial,
        trivial_deviation,
        trace_integral: y[6],
        far_from_one: d0 > near && d1 > near,
        complex_pair: eigenvalues[0].im != z,
    })
}

/// `∫₀ᵀ Tr DF(γ(t)) dt` by the uniform-grid trapezoid rule on the orbit samples.
pub fn trace_integral<T: Real>(model: &ModelSpec<T>, orbit: &PeriodicOrbit<T>) -> Result<T> {
    let mut acc = T::zero();
    for j in 0..orbit.n() {
        acc = acc + eval_jacobian(model, &orbit.state(j))?.trace();
    }
    Ok(acc * orbit.period / T::from_usize_lossy(orbit.n()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_start_is_constant() {
        let rm = ModelSpec::<f64>::rosenzweig_macarthur();
        let eq = State::new(1.0, 3.0).unwrap();
        let sol = integrate(&rm, &eq, 20.0, 1e-10).unwrap();
        assert_eq!(sol.y_end(), [1.0, 3.0]);
        assert!(matches!(
            find_limit_cycle(&rm, &eq, &CycleOptions::default()),
            Err(Error::NoCycleFound(_))
        ));
    }

    #[test]
    fn integrate_validates_inputs() {
        let rm = ModelSpec::<f64>::rosenzweig_macarthur();
        let s = State { x: 1.0, y: 1.0 };
        assert!(integrate(&rm, &s, 1.0, 1e-2).is_err());
        assert!(integrate(&rm, &s, -1.0, 1e-8).is_err());
        assert!(integrate(&rm, &State { x: -1.0, y: 1.0 }, 1.0, 1e-8).is_err());
    }

    #[test]
    fn orbit_requires_positive_power_of_two_samples() {
        assert!(PeriodicOrbit::from_samples(1.0, vec![1.0; 6], vec![1.0; 6]).is_err());
        assert!(PeriodicOrbit::from_samples(1.0, vec![1.0, 1.0, -1.0, 1.0], vec![1.0; 4]).is_err());
        let o = PeriodicOrbit::from_samples(2.0, vec![1.0; 8], vec![2.0; 8]).unwrap();
        assert_eq!(o.time(4), 1.0);
    }

    #[test]
    fn stable_focus_has_no_cycle() {
        // Strong self-limitation: the coexistence equilibrium is a stable focus.
        let m = ModelSpec::new(
            crate::model::Growth::Logistic { k1: 1.0, k2: 1.0 },
            crate::model::Predation::HollingII { k1: 1.0, k2: 1.0 },
            crate::model::Mortality::Linear { k: 0.3 },
        )
        .unwrap();
        let r = find_limit_cycle(&m, &State { x: 0.5, y: 0.5 }, &CycleOptions::default());
        assert!(matches!(r, Err(Error::NoCycleFound(_))), "{r:?}");
    }
}
