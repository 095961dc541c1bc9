//! Summary statistics of a sampling run: class means and variances, correlation of each
//! coordinate with the multiplier, and per-class histograms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Rejection, SampleRecord};
use crate::error::{Error, Result};
use crate::fourier::GenCoefficients;
use crate::io::fmt_real;
use crate::Real;

pub const HIST_BINS: usize = 64;

/// Pearson correlation coefficient.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Dimension { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("correlation needs at least two points".into()));
    }
    let n = T::from_usize_lossy(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (*x - ma, *y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa == T::zero() || sbb == T::zero() {
        return Err(Error::ZeroVariance);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub accepted: usize,
    pub stable: usize,
    pub unstable: usize,
    pub rejected_tolerance: usize,
    pub rejected_positivity: usize,
    pub optimizer_failures: usize,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ClassStats<T> {
    pub count: usize,
    pub mean: Vec<T>,
    /// Population variance.
    pub variance: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Histogram<T> {
    pub coordinate: String,
    pub class: String,
    pub lo: T,
    pub hi: T,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StatsSummary<T> {
    pub counts: Counts,
    pub coordinates: Vec<String>,
    pub mean_accepted_objective: Option<T>,
    pub stable: Option<ClassStats<T>>,
    pub unstable: Option<ClassStats<T>>,
    /// Pearson r of each coordinate with λ over accepted records; absent when undefined.
    pub r_lambda: Vec<Option<T>>,
    pub histograms: Vec<Histogram<T>>,
}

/// Names of the packed coordinates, e.g. `beta_s(0)`, `Re s_x(2)`.
pub fn coordinate_names(kappa_m: usize) -> Vec<String> {
    let mut out = Vec::new();
    for name in GenCoefficients::<f64>::NAMES {
        out.push(format!("{name}(0)"));
        for k in 1..=kappa_m {
            out.push(format!("Re {name}({k})"));
            out.push(format!("Im {name}({k})"));
        }
    }
    out
}

fn class_stats<T: Real>(rows: &[&SampleRecord<T>], dim: usize) -> Option<ClassStats<T>> {
    if rows.is_empty() {
        return None;
    }
    let n = T::from_usize_lossy(rows.len());
    let mean: Vec<T> = (0..dim).map(|i| rows.iter().map(|r| r.x[i]).sum::<T>() / n).collect();
    let variance = (0..dim)
        .map(|i| rows.iter().map(|r| (r.x[i] - mean[i]).powi(2)).sum::<T>() / n)
        .collect();
    Some(ClassStats { count: rows.len(), mean, variance })
}

fn histogram<T: Real>(values: impl Iterator<Item = T> + Clone, coordinate: &str, class: &str) -> Histogram<T> {
    let (lo, hi) = values.clone().fold((T::infinity(), T::neg_infinity()), |(l, h), v| (l.min(v), h.max(v)));
    let mut counts = vec![0usize; HIST_BINS];
    let width = (hi - lo) / T::from_usize_lossy(HIST_BINS);
    for v in values {
        let bin = if width > T::zero() {
            ((v - lo) / width).to_usize().unwrap_or(0).min(HIST_BINS - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    Histogram { coordinate: coordinate.to_string(), class: class.to_string(), lo, hi, counts }
}

/// Aggregates sample records. Only accepted records enter the class statistics.
pub fn summarize<T: Real>(records: &[SampleRecord<T>], kappa_m: usize) -> StatsSummary<T> {
    let coordinates = coordinate_names(kappa_m);
    let dim = coordinates.len();
    let mut counts = Counts { total: records.len(), ..Counts::default() };
    for r in records {
        match r.rejection {
            None => {
                counts.accepted += 1;
                if r.stable {
                    counts.stable += 1;
                } else {
                    counts.unstable += 1;
                }
            }
            Some(Rejection::Tolerance) => counts.rejected_tolerance += 1,
            Some(Rejection::Positivity) => counts.rejected_positivity += 1,
            Some(Rejection::OptimizerFailure) => counts.optimizer_failures += 1,
        }
        if !r.converged {
            counts.not_converged += 1;
        }
    }
    let accepted: Vec<&SampleRecord<T>> = records.iter().filter(|r| r.accepted && r.x.len() == dim).collect();
    let stable: Vec<_> = accepted.iter().copied().filter(|r| r.stable).collect();
    let unstable: Vec<_> = accepted.iter().copied().filter(|r| !r.stable).collect();
    let mean_accepted_objective = (!accepted.is_empty())
        .then(|| accepted.iter().map(|r| r.objective).sum::<T>() / T::from_usize_lossy(accepted.len()));

    let lambdas: Vec<T> = accepted.iter().map(|r| r.lambda.unwrap_or(T::nan())).collect();
    let r_lambda = (0..dim)
        .map(|i| {
            let col: Vec<T> = accepted.iter().map(|r| r.x[i]).collect();
            pearson(&col, &lambdas).ok().filter(|v| v.is_finite())
        })
        .collect();

    let mut histograms = Vec::new();
    for (class, rows) in [("stable", &stable), ("unstable", &unstable)] {
        if rows.is_empty() {
            continue;
        }
        for (i, name) in coordinates.iter().enumerate() {
            histograms.push(histogram(rows.iter().map(|r| r.x[i]), name, class));
        }
    }
    StatsSummary {
        counts,
        coordinates,
        mean_accepted_objective,
        stable: class_stats(&stable, dim),
        unstable: class_stats(&unstable, dim),
        r_lambda,
        histograms,
    }
}

impl<T: Real> StatsSummary<T> {
    /// Histogram rows `coordinate,class,bin_lo,bin_hi,count`.
    pub fn hist_csv(&self) -> String {
        let mut out = String::from("coordinate,class,bin_lo,bin_hi,count\n");
        for h in &self.histograms {
            let width = (h.hi - h.lo) / T::from_usize_lossy(HIST_BINS);
            for (b, c) in h.counts.iter().enumerate() {
                let lo = h.lo + width * T::from_usize_lossy(b);
                let hi = if b + 1 == HIST_BINS { h.hi } else { h.lo + width * T::from_usize_lossy(b + 1) };
                let _ = writeln!(out, "\"{}\",{},{},{},{c}", h.coordinate, h.class, fmt_real(lo), fmt_real(hi));
            }
        }
        out
    }

    /// Index of a named coordinate.
    pub fn coordinate(&self, name: &str) -> Option<usize> {
        self.coordinates.iter().position(|c| c == name)
    }

    pub fn stable_fraction(&self) -> Option<f64> {
        (self.counts.accepted > 0).then(|| self.counts.stable as f64 / self.counts.accepted as f64)
    }

    pub fn acceptance_fraction(&self) -> Option<f64> {
        (self.counts.total > 0).then(|| self.counts.accepted as f64 / self.counts.total as f64)
    }
}
