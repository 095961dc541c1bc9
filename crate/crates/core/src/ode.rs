//! Dormand-Prince 5(4) integrator with step-size control and continuous output.
//!
//! States are fixed-size arrays; the right-hand side may fail, which aborts the
//! integration with its error.

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest admissible step; `None` means the whole interval.
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> OdeOptions<T> {
    /// Absolute and relative tolerance both set to `tol`.
    pub fn with_tol(tol: T) -> Self {
        Self { rtol: tol, atol: tol, h_max: None, max_steps: 1_000_000 }
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
struct Segment<T, const N: usize> {
    t0: T,
    h: T,
    rcont: [[T; N]; 5],
}

impl<T: Real, const N: usize> Segment<T, N> {
    fn eval(&self, t: T) -> [T; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }

    fn t1(&self) -> T {
        self.t0 + self.h
    }
}

/// Dense solution on `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<T, const N: usize> {
    segments: Vec<Segment<T, N>>,
    y_start: [T; N],
    t_start: T,
    y_end: [T; N],
    t_end: T,
    pub evaluations: usize,
}

impl<T: Real, const N: usize> DenseSolution<T, N> {
    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn y_end(&self) -> [T; N] {
        self.y_end
    }

    pub fn y_start(&self) -> [T; N] {
        self.y_start
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    /// Accepted step boundaries `(t, y)`, starting with the initial point.
    pub fn nodes(&self) -> impl Iterator<Item = (T, [T; N])> + '_ {
        std::iter::once((self.t_start, self.y_start))
            .chain(self.segments.iter().map(|s| (s.t1(), s.eval(s.t1()))))
    }

    /// Interpolated state; `t` is clamped to the integration interval.
    pub fn eval(&self, t: T) -> [T; N] {
        if self.segments.is_empty() || t <= self.t_start {
            return self.y_start;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let idx = self.segments.partition_point(|s| s.t1() < t);
        self.segments[idx.min(self.segments.len() - 1)].eval(t)
    }

    /// Step boundaries bracketing sign changes `g(a) < 0 <= g(b)` of a scalar function of the state.
    pub fn upward_brackets<G>(&self, g: G) -> Vec<(T, T)>
    where
        G: Fn(&[T; N]) -> T,
    {
        let mut out = Vec::new();
        let mut prev = (self.t_start, g(&self.y_start));
        for s in &self.segments {
            let t1 = s.t1();
            let v = g(&s.eval(t1));
            if prev.1 < T::zero() && v >= T::zero() {
                out.push((prev.0, t1));
            }
            prev = (t1, v);
        }
        out
    }

    /// Bisection for the root of `g` on the dense output inside `[a, b]`, to width `tol`.
    pub fn refine_root<G>(&self, g: G, mut a: T, mut b: T, tol: T) -> T
    where
        G: Fn(&[T; N]) -> T,
    {
        let mut ga = g(&self.eval(a));
        for _ in 0..200 {
            if (b - a).abs() <= tol {
                break;
            }
            let mid = a + (b - a) / T::lit(2.0);
            let gm = g(&self.eval(mid));
            if (gm < T::zero()) == (ga < T::zero()) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        a + (b - a) / T::lit(2.0)
    }
}

struct Tableau<T> {
    c: [T; 7],
    a: [[T; 6]; 7],
    b: [T; 7],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        let z = T::zero();
        Self {
            c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), T::one(), T::one()],
            a: [
                [z; 6],
                [l(0.2), z, z, z, z, z],
                [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
                [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
                [
                    l(19372.0 / 6561.0),
                    l(-25360.0 / 2187.0),
                    l(64448.0 / 6561.0),
                    l(-212.0 / 729.0),
                    z,
                    z,
                ],
                [
                    l(9017.0 / 3168.0),
                    l(-355.0 / 33.0),
                    l(46732.0 / 5247.0),
                    l(49.0 / 176.0),
                    l(-5103.0 / 18656.0),
                    z,
                ],
                [
                    l(35.0 / 384.0),
                    z,
                    l(500.0 / 1113.0),
                    l(125.0 / 192.0),
                    l(-2187.0 / 6784.0),
                    l(11.0 / 84.0),
                ],
            ],
            b: [
                l(35.0 / 384.0),
                z,
                l(500.0 / 1113.0),
                l(125.0 / 192.0),
                l(-2187.0 / 6784.0),
                l(11.0 / 84.0),
                z,
            ],
            e: [
                l(71.0 / 57600.0),
                z,
                l(-71.0 / 16695.0),
                l(71.0 / 1920.0),
                l(-17253.0 / 339200.0),
                l(22.0 / 525.0),
                l(-1.0 / 40.0),
            ],
            d: [
                l(-12715105075.0 / 11282082432.0),
                z,
                l(87487479700.0 / 32700410799.0),
                l(-10690763975.0 / 1880347072.0),
                l(701980252875.0 / 199316789632.0),
                l(-1453857185.0 / 822651844.0),
                l(69997945.0 / 29380423.0),
            ],
        }
    }
}

fn err_norm<T: Real, const N: usize>(err: &[T; N], y0: &[T; N], y1: &[T; N], opts: &OdeOptions<T>) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc = acc + r * r;
    }
    (acc / T::from_usize_lossy(N)).sqrt()
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t1 > t0`.
pub fn dopri5<T, const N: usize, F>(
    mut f: F,
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<DenseSolution<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("integration interval [{t0}, {t1}] is empty")));
    }
    let tab = Tableau::<T>::new();
    let span = t1 - t0;
    let h_max = opts.h_max.unwrap_or(span).min(span);
    let mut evaluations = 0usize;

    let mut t = t0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    k[0] = f(t, &y)?;
    evaluations += 1;

    // Initial step from the local scale of the solution and its derivative.
    let mut h = {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs();
            d0 = d0 + (y[i] / sc) * (y[i] / sc);
            d1 = d1 + (k[0][i] / sc) * (k[0][i] / sc);
        }
        let (d0, d1) = (d0.sqrt(), d1.sqrt());
        let guess = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        guess.min(h_max)
    };

    let mut segments = Vec::new();
    let mut steps = 0usize;
    let mut rejected_last = false;
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(10.0);
    let fifth = T::lit(0.2);

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps { t: t.to_f64_lossy() });
        }
        if h <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
            return Err(Error::StepSizeUnderflow { t: t.to_f64_lossy() });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        for s in 1..7 {
            let ys: [T; N] = std::array::from_fn(|i| {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + h * tab.a[s][j] * kj[i];
                }
                acc
            });
            k[s] = f(t + tab.c[s] * h, &ys)?;
            evaluations += 1;
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        let y_new: [T; N] = std::array::from_fn(|i| {
            let mut acc = y[i];
            for j in 0..6 {
                acc = acc + h * tab.b[j] * k[j][i];
            }
            acc
        });
        let err: [T; N] = std::array::from_fn(|i| {
            let mut acc = T::zero();
            for j in 0..7 {
                acc = acc + h * tab.e[j] * k[j][i];
            }
            acc
        });
        let en = err_norm(&err, &y, &y_new, opts);
        steps += 1;

        if en.is_finite() && en <= T::one() {
            let ydiff: [T; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [T; N] = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
            let r4: [T; N] = std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]);
            let r5: [T; N] = std::array::from_fn(|i| {
                let mut acc = T::zero();
                for j in 0..7 {
                    acc = acc + tab.d[j] * k[j][i];
                }
                h * acc
            });
            segments.push(Segment { t0: t, h, rcont: [y, ydiff, bspl, r4, r5] });
            t = if last { t1 } else { t + h };
            y = y_new;
            k[0] = k[6];

            let mut fac = if en > T::zero() { safety * en.powf(-fifth) } else { fac_max };
            fac = fac.min(fac_max).max(fac_min);
            if rejected_last {
                fac = fac.min(T::one());
            }
            rejected_last = false;
            h = (h * fac).min(h_max);
        } else {
            let fac = if en.is_finite() {
                (safety * en.powf(-fifth)).max(fac_min)
            } else {
                fac_min
            };
            h = h * fac.min(T::one());
            rejected_last = true;
        }
    }

    Ok(DenseSolution { segments, y_start: y0, t_start: t0, y_end: y, t_end: t1, evaluations })
}
