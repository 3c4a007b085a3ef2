//! Cesàro-style averaging of almost periodic signals.
//!
//! Observables of the regularized theory typically oscillate in
//! `u = 1/eps` without converging as `eps -> 0`. The meaningful datum is
//! the mean of the oscillation: partial means
//! `M(T) = (1/T) ∫_0^T f(u) du` settle like `M(T) = M + c/T + o(1/T)`
//! for almost periodic `f`, so the estimator fits `M(T)` against `1/T`
//! over the final decade of the window and reports the intercept. The
//! spread of `M(T)` over the same decade gives an honest error band.

use crate::error::{Error, Result};
use crate::quad;

/// Result of a mean estimate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MeanEstimate {
    /// Extrapolated mean (intercept of the partial-mean fit in 1/T).
    pub value: f64,
    /// Smallest partial mean over the final decade.
    pub band_lo: f64,
    /// Largest partial mean over the final decade.
    pub band_hi: f64,
    /// Length of the averaging window.
    pub t_max: f64,
}

/// Estimate the mean of `f` from uniform samples `f(j * du)`,
/// `j = 0..n`. Needs a window long enough that the final decade
/// `[T_max/10, T_max]` holds at least ten partial means.
pub fn cesaro_mean(samples: &[f64], du: f64) -> Result<MeanEstimate> {
    if !(du > 0.0) {
        return Err(Error::Parameter(format!("sample spacing must be positive, got {du}")));
    }
    let n = samples.len();
    if n < 111 {
        return Err(Error::Parameter(format!(
            "need at least 111 samples for a final-decade fit, got {n}"
        )));
    }
    let t_max = (n - 1) as f64 * du;
    let cum = quad::cumulative_trapezoid(samples, du);
    let start = ((n - 1) as f64 / 10.0).ceil() as usize; // u >= T_max/10
    // Least squares of M(T) = a + b / T over the final decade.
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0f64, 0.0, 0.0, 0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0.0f64;
    for j in start..n {
        let t = j as f64 * du;
        let m = cum[j] / t;
        lo = lo.min(m);
        hi = hi.max(m);
        let x = 1.0 / t;
        sx += x;
        sy += m;
        sxx += x * x;
        sxy += x * m;
        count += 1.0;
    }
    let denom = count * sxx - sx * sx;
    let slope = (count * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / count;
    Ok(MeanEstimate {
        value: intercept,
        band_lo: lo,
        band_hi: hi,
        t_max,
    })
}

/// Almost-periodicity diagnostic: translation defects
/// `D(s) = sup_u |f(u + s) - f(u)|` over a range of shifts.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ApDiagnostic {
    /// Shift with the smallest defect (an almost period candidate).
    pub best_shift: f64,
    /// Defect at the best shift.
    pub best_defect: f64,
    /// Largest defect seen over the scanned range.
    pub worst_defect: f64,
}

/// Scan translation defects for all sample-aligned shifts in
/// `[min_shift, max_shift]`. For an almost periodic signal the best
/// defect is small (almost periods recur), and every defect is bounded
/// by `2 sup |f|`.
pub fn ap_diagnostic(
    samples: &[f64],
    du: f64,
    min_shift: f64,
    max_shift: f64,
) -> Result<ApDiagnostic> {
    if !(du > 0.0) {
        return Err(Error::Parameter("sample spacing must be positive".into()));
    }
    if !(min_shift > 0.0) || max_shift <= min_shift {
        return Err(Error::Parameter(format!(
            "need 0 < min_shift < max_shift, got ({min_shift}, {max_shift})"
        )));
    }
    let n = samples.len();
    let lo = (min_shift / du).ceil() as usize;
    let hi = (max_shift / du).floor() as usize;
    if hi >= n / 2 {
        return Err(Error::Parameter(
            "shift range too large for the sample window".into(),
        ));
    }
    if lo > hi {
        return Err(Error::Parameter("no sample-aligned shifts in range".into()));
    }
    let mut best = (0usize, f64::INFINITY);
    let mut worst = 0.0f64;
    for s in lo..=hi {
        let mut defect = 0.0f64;
        for i in 0..n - s {
            defect = defect.max((samples[i + s] - samples[i]).abs());
        }
        if defect < best.1 {
            best = (s, defect);
        }
        worst = worst.max(defect);
    }
    Ok(ApDiagnostic {
        best_shift: best.0 as f64 * du,
        best_defect: best.1,
        worst_defect: worst,
    })
}

/// Sample a function on the uniform grid used by [`cesaro_mean`].
pub fn sample<F: Fn(f64) -> f64>(f: F, du: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / du).round() as usize;
    (0..=n).map(|j| f(j as f64 * du)).collect()
}
