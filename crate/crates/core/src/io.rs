//! Column CSV with a leading `# T=<period>` line, shared by orbit and generalized-function
//! exports. Numbers are written with 17 significant digits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::Real;

/// Full-precision decimal representation.
pub fn fmt_real<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

/// Writes `# T=…`, the header, then one row per grid point with `t_j = j T / n` first.
pub fn write_periodic_csv<T: Real>(period: T, names: &[&str], columns: &[&[T]]) -> String {
    let n = columns.first().map_or(0, |c| c.len());
    let mut out = String::new();
    let _ = writeln!(out, "# T={}", fmt_real(period));
    let _ = writeln!(out, "t,{}", names.join(","));
    for j in 0..n {
        let t = period * T::from_usize_lossy(j) / T::from_usize_lossy(n);
        out.push_str(&fmt_real(t));
        for c in columns {
            out.push(',');
            out.push_str(&fmt_real(c[j]));
        }
        out.push('\n');
    }
    out
}

fn parse_real<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    T::from_f64(v).ok_or_else(|| Error::Parse(format!("out of range: {s}")))
}

/// Inverse of [`write_periodic_csv`]: returns the period and the named columns (time
/// column dropped), checking the header against `names`.
pub fn read_periodic_csv<T: Real>(text: &str, names: &[&str]) -> Result<(T, Vec<Vec<T>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let period = first
        .strip_prefix("# T=")
        .ok_or_else(|| Error::Parse("missing '# T=' line".into()))
        .and_then(parse_real)?;
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let expected = format!("t,{}", names.join(","));
    if header.trim() != expected {
        return Err(Error::Parse(format!("unexpected header {header:?}, want {expected:?}")));
    }
    let mut cols = vec![Vec::new(); names.len()];
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(Error::Parse(format!("row has {} fields: {line:?}", fields.len())));
        }
        for (c, f) in cols.iter_mut().zip(&fields[1..]) {
            c.push(parse_real(f)?);
        }
    }
    Ok((period, cols))
}
