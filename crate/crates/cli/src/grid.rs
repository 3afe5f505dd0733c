//! Grid and range flags.

use pdmp::Interval;

use crate::config::parse_list;
use crate::error::{CliError, Result};

/// `lo:hi[:step]` (inclusive, default step 1) or an explicit list `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let grid = if text.contains(':') {
        let parts = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::usage(format!("bad grid '{text}'"))))
            .collect::<Result<Vec<_>>>()?;
        let (lo, hi, step) = match parts[..] {
            [lo, hi] => (lo, hi, 1.0),
            [lo, hi, step] => (lo, hi, step),
            _ => return Err(CliError::usage(format!("grid '{text}' is not lo:hi[:step]"))),
        };
        if !(step > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(CliError::usage(format!("grid '{text}' needs finite ends and a positive step")));
        }
        // tolerate rounding at the upper end
        let n = ((hi - lo) / step + 1e-9).floor();
        if n < 0.0 {
            Vec::new()
        } else {
            (0..=n as usize).map(|k| lo + step * k as f64).collect()
        }
    } else if text.is_empty() {
        Vec::new()
    } else {
        parse_list(text)?
    };
    if grid.is_empty() {
        return Err(CliError::usage(format!("time grid '{text}' is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage(format!("grid '{text}' must be increasing")));
    }
    Ok(grid)
}

/// `lo:hi`; either end may be `inf` or `-inf`.
pub fn parse_range(text: &str) -> Result<Interval> {
    let bad = || CliError::usage(format!("range '{text}' is not lo:hi"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok(Interval::new(lo, hi))
}
