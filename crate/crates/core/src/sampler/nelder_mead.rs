//! Derivative-free downhill simplex minimization.

use crate::Real;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions<T> {
    pub max_evals: usize,
    /// Stop once the best value drops below this.
    pub ftol: T,
    /// Stop once every vertex is within this max-norm distance of the best vertex.
    pub xtol: T,
    pub initial_edge: T,
    /// Rebuilds of the simplex around the best point after a collapse above `ftol`.
    pub restarts: usize,
    pub reflection: T,
    pub expansion: T,
    pub contraction: T,
    pub shrink: T,
}

impl<T: Real> NelderMeadOptions<T> {
    pub fn for_dimension(dim: usize) -> Self {
        Self {
            max_evals: 2000 * dim,
            ftol: T::lit(1e-10),
            xtol: T::lit(1e-8),
            initial_edge: T::lit(0.05),
            restarts: 1,
            reflection: T::one(),
            expansion: T::lit(2.0),
            contraction: T::lit(0.5),
            shrink: T::lit(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    /// False when the evaluation budget ran out.
    pub converged: bool,
}

struct Simplex<T> {
    dim: usize,
    pts: Vec<T>,
    vals: Vec<T>,
    sum: Vec<T>,
}

impl<T: Real> Simplex<T> {
    fn vertex(&self, i: usize) -> &[T] {
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    fn recompute_sum(&mut self) {
        let d = self.dim;
        self.sum.iter_mut().for_each(|s| *s = T::zero());
        for i in 0..=d {
            for j in 0..d {
                self.sum[j] = self.sum[j] + self.pts[i * d + j];
            }
        }
    }

    fn replace(&mut self, i: usize, x: &[T], f: T) {
        let d = self.dim;
        for j in 0..d {
            let old = self.pts[i * d + j];
            self.sum[j] = self.sum[j] - old + x[j];
            self.pts[i * d + j] = x[j];
        }
        self.vals[i] = f;
    }

    /// Indices of the best, worst and second-worst vertices.
    fn ranks(&self) -> (usize, usize, usize) {
        let (mut b, mut w) = (0, 0);
        for i in 1..self.vals.len() {
            if self.vals[i] < self.vals[b] {
                b = i;
            }
            if self.vals[i] >= self.vals[w] {
                w = i;
            }
        }
        let mut sw = if w == 0 { 1 } else { 0 };
        for i in 0..self.vals.len() {
            if i != w && self.vals[i] > self.vals[sw] {
                sw = i;
            }
        }
        (b, w, sw)
    }

    fn diameter_from(&self, b: usize) -> T {
        let best = self.vertex(b);
        let mut worst = T::zero();
        for i in 0..=self.dim {
            if i != b {
                for (a, c) in self.vertex(i).iter().zip(best) {
                    worst = worst.max((*a - *c).abs());
                }
            }
        }
        worst
    }
}

/// Minimizes `f` from `x0`. When `history` is given, the best value after every iteration
/// is appended to it.
pub fn nelder_mead<T, F>(mut f: F, x0: &[T], opts: &NelderMeadOptions<T>, mut history: Option<&mut Vec<T>>) -> Minimum<T>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    let f0 = eval(x0, &mut evals);
    if dim == 0 || f0 < opts.ftol {
        return Minimum { x: x0.to_vec(), value: f0, evals, converged: true };
    }

    let mut s = Simplex { dim, pts: vec![T::zero(); (dim + 1) * dim], vals: vec![T::zero(); dim + 1], sum: vec![T::zero(); dim] };
    let build = |s: &mut Simplex<T>, base: &[T], fbase: T, evals: &mut usize, eval: &mut dyn FnMut(&[T], &mut usize) -> T| {
        s.pts[..dim].copy_from_slice(base);
        s.vals[0] = fbase;
        for i in 1..=dim {
            let row = &mut s.pts[i * dim..(i + 1) * dim];
            row.copy_from_slice(base);
            row[i - 1] = row[i - 1] + opts.initial_edge;
        }
        for i in 1..=dim {
            let v = eval(&s.pts[i * dim..(i + 1) * dim], evals);
            s.vals[i] = v;
        }
        s.recompute_sum();
    };
    build(&mut s, x0, f0, &mut evals, &mut eval);

    let mut restarts_left = opts.restarts;
    let mut centroid = vec![T::zero(); dim];
    let mut xr = vec![T::zero(); dim];
    let mut xe = vec![T::zero(); dim];
    let inv_n = T::one() / T::from_usize_lossy(dim);
    let converged = loop {
        let (b, w, sw) = s.ranks();
        if let Some(h) = history.as_deref_mut() {
            h.push(s.vals[b]);
        }
        if s.vals[b] < opts.ftol {
            break true;
        }
        if s.diameter_from(b) < opts.xtol {
            if restarts_left == 0 {
                break true;
            }
            restarts_left -= 1;
            let best = s.vertex(b).to_vec();
            let fb = s.vals[b];
            build(&mut s, &best, fb, &mut evals, &mut eval);
            continue;
        }
        if evals >= opts.max_evals {
            break false;
        }

        let (fb, fw, fsw) = (s.vals[b], s.vals[w], s.vals[sw]);
        let worst = s.vertex(w).to_vec();
        for j in 0..dim {
            centroid[j] = (s.sum[j] - worst[j]) * inv_n;
            xr[j] = centroid[j] + opts.reflection * (centroid[j] - worst[j]);
        }
        let fr = eval(&xr, &mut evals);
        if fr < fb {
            for j in 0..dim {
                xe[j] = centroid[j] + opts.expansion * (xr[j] - centroid[j]);
            }
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                s.replace(w, &xe, fe);
            } else {
                s.replace(w, &xr, fr);
            }
            continue;
        }
        if fr < fsw {
            s.replace(w, &xr, fr);
            continue;
        }
        // Contraction, outside when the reflected point beats the worst vertex.
        let outside = fr < fw;
        for j in 0..dim {
            let towards = if outside { xr[j] } else { worst[j] };
            xe[j] = centroid[j] + opts.contraction * (towards - centroid[j]);
        }
        let fc = eval(&xe, &mut evals);
        if (outside && fc <= fr) || (!outside && fc < fw) {
            s.replace(w, &xe, fc);
            continue;
        }
        let best = s.vertex(b).to_vec();
        for i in 0..=dim {
            if i == b {
                continue;
            }
            for j in 0..dim {
                let p = &mut s.pts[i * dim + j];
                *p = best[j] + opts.shrink * (*p - best[j]);
            }
            let v = eval(&s.pts[i * dim..(i + 1) * dim], &mut evals);
            s.vals[i] = v;
        }
        s.recompute_sum();
    };
    let (b, _, _) = s.ranks();
    Minimum { x: s.vertex(b).to_vec(), value: s.vals[b], evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
    }

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2)).sum::<f64>();
        let r = nelder_mead(f, &[5.0, 5.0, 5.0], &NelderMeadOptions::for_dimension(3), None);
        assert!(r.converged && r.value < 1e-10);
        assert!((r.x[2] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn rosenbrock_two_dimensional() {
        let mut o = NelderMeadOptions::for_dimension(2);
        o.ftol = 1e-14;
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &o, None);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn exact_start_returns_immediately() {
        let r = nelder_mead(|x: &[f64]| x[0] * x[0], &[0.0], &NelderMeadOptions::for_dimension(1), None);
        assert_eq!((r.x, r.value, r.evals), (vec![0.0], 0.0, 1));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut o = NelderMeadOptions::for_dimension(4);
        o.max_evals = 30;
        let r = nelder_mead(rosenbrock, &[3.0, -2.0, 1.0, 0.5], &o, None);
        assert!(!r.converged);
        assert!(r.value <= rosenbrock(&[3.0, -2.0, 1.0, 0.5]));
    }

    #[test]
    fn history_is_monotone() {
        let mut h = Vec::new();
        nelder_mead(rosenbrock, &[0.3, 0.1, -0.5], &NelderMeadOptions::for_dimension(3), Some(&mut h));
        assert!(h.len() > 10);
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
    }
}
