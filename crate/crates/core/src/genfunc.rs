//! Scalar nonlinear generalized functions on an interval.
//!
//! A generalized function is represented by a *family* of smooth
//! functions indexed by the regularization scale `eps`, sampled on a
//! fixed uniform grid. Nonlinear operations (products, powers) act
//! rung-by-rung on the family; differentiation uses a fourth-order
//! central stencil; the pairing with a test function is a trapezoid sum.
//! Whether two families describe "the same" object in the limit is
//! decided by the association diagnostic: pair the difference against
//! test functions along a geometric ladder of scales and examine the
//! decay.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::profile::Mollifier;
use crate::quad;

/// Uniform sampling grid on a closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    n: usize,
}

impl GridSpec {
    /// `n` sample points (including both endpoints), `n >= 5` so the
    /// five-point derivative stencil fits.
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::Parameter(format!(
                "grid needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < 5 {
            return Err(Error::Parameter(format!(
                "grid needs at least 5 samples, got {n}"
            )));
        }
        Ok(GridSpec { lo, hi, n })
    }

    /// Default working grid: [-1, 1] with 65537 points. Fine enough that
    /// the five-point stencil resolves kernels down to eps ~ 0.003.
    pub fn default_lab() -> Self {
        GridSpec::new(-1.0, 1.0, 65537).unwrap()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }
}

/// Geometric ladder of regularization scales `eps_j = eps0 * ratio^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonLadder {
    eps0: f64,
    ratio: f64,
    rungs: usize,
}

impl EpsilonLadder {
    pub fn new(eps0: f64, ratio: f64, rungs: usize) -> Result<Self> {
        if !(eps0.is_finite() && eps0 > 0.0) {
            return Err(Error::Parameter(format!("eps0 must be positive, got {eps0}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Parameter(format!(
                "ladder ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if rungs < 2 {
            return Err(Error::Parameter(format!(
                "ladder needs at least 2 rungs, got {rungs}"
            )));
        }
        Ok(EpsilonLadder { eps0, ratio, rungs })
    }

    /// Default ladder for interval experiments: halving from 0.025, four
    /// rungs. The coarsest rung still keeps the kernels well inside
    /// [-1, 1] and resolved by the default grid.
    pub fn default_lab() -> Self {
        EpsilonLadder::new(0.025, 0.5, 4).unwrap()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn rungs(&self) -> usize {
        self.rungs
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.rungs)
            .map(|j| self.eps0 * self.ratio.powi(j as i32))
            .collect()
    }
}

type Generator = dyn Fn(f64, &GridSpec) -> Vec<f64>;

/// A generalized function: a scale-indexed family of sampled smooth
/// functions on a shared grid. Cheap to clone; evaluated samples are
/// cached per scale.
#[derive(Clone)]
pub struct Representative {
    grid: GridSpec,
    gen: Rc<Generator>,
    cache: Rc<RefCell<HashMap<u64, Rc<Vec<f64>>>>>,
}

impl std::fmt::Debug for Representative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Representative")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Representative {
    /// Build from an arbitrary generator `(eps, x) -> value`.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + 'static,
    {
        Self::from_generator(grid, move |eps, g| {
            (0..g.len()).map(|i| f(eps, g.point(i))).collect()
        })
    }

    /// Build from a scale-independent smooth function (e.g. a test
    /// function or a coordinate).
    pub fn smooth<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(f64) -> f64 + 'static,
    {
        Self::from_fn(grid, move |_eps, x| f(x))
    }

    /// Smoothed Heaviside step for the given mollifier.
    pub fn heaviside(grid: GridSpec, moll: Mollifier) -> Self {
        Self::from_fn(grid, move |eps, x| moll.step_kernel(eps, x))
    }

    /// Smoothed Dirac delta for the given mollifier.
    pub fn dirac(grid: GridSpec, moll: Mollifier) -> Self {
        Self::from_fn(grid, move |eps, x| moll.delta_kernel(eps, x))
    }

    fn from_generator<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(f64, &GridSpec) -> Vec<f64> + 'static,
    {
        Representative {
            grid,
            gen: Rc::new(f),
            cache: Rc::new(RefCell::new(HashMap::new())),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Samples of the family member at scale `eps` (cached).
    pub fn samples(&self, eps: f64) -> Rc<Vec<f64>> {
        assert!(eps > 0.0 && eps.is_finite(), "scale must be positive");
        let key = eps.to_bits();
        if let Some(v) = self.cache.borrow().get(&key) {
            return Rc::clone(v);
        }
        let v = Rc::new((self.gen)(eps, &self.grid));
        self.cache.borrow_mut().insert(key, Rc::clone(&v));
        v
    }

    fn check_grid(&self, other: &Representative) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(
                "representatives live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise product, rung by rung.
    pub fn product(&self, other: &Representative) -> Result<Representative> {
        self.check_grid(other)?;
        let (a, b) = (self.clone(), other.clone());
        Ok(Representative::from_generator(self.grid, move |eps, _| {
            let (xa, xb) = (a.samples(eps), b.samples(eps));
            xa.iter().zip(xb.iter()).map(|(u, v)| u * v).collect()
        }))
    }

    /// Pointwise integer power.
    pub fn power(&self, n: u32) -> Representative {
        let a = self.clone();
        Representative::from_generator(self.grid, move |eps, _| {
            a.samples(eps).iter().map(|u| u.powi(n as i32)).collect()
        })
    }

    /// Apply a smooth function pointwise (composition `F ∘ f_eps`).
    pub fn compose<F>(&self, f: F) -> Representative
    where
        F: Fn(f64) -> f64 + 'static,
    {
        let a = self.clone();
        Representative::from_generator(self.grid, move |eps, _| {
            a.samples(eps).iter().map(|u| f(*u)).collect()
        })
    }

    /// Linear combination `c1 * self + c2 * other`.
    pub fn combine(&self, c1: f64, other: &Representative, c2: f64) -> Result<Representative> {
        self.check_grid(other)?;
        let (a, b) = (self.clone(), other.clone());
        Ok(Representative::from_generator(self.grid, move |eps, _| {
            let (xa, xb) = (a.samples(eps), b.samples(eps));
            xa.iter()
                .zip(xb.iter())
                .map(|(u, v)| c1 * u + c2 * v)
                .collect()
        }))
    }

    pub fn sub(&self, other: &Representative) -> Result<Representative> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> Representative {
        let a = self.clone();
        Representative::from_generator(self.grid, move |eps, _| {
            a.samples(eps).iter().map(|u| c * u).collect()
        })
    }

    /// Derivative, rung by rung: fourth-order central differences in the
    /// interior, fourth-order one-sided stencils at the two points next
    /// to each boundary.
    pub fn derivative(&self) -> Representative {
        let a = self.clone();
        Representative::from_generator(self.grid, move |eps, g| {
            fd4(&a.samples(eps), g.spacing())
        })
    }

    /// Pairing `∫ f_eps g_eps dx` at scale `eps` (trapezoid rule).
    pub fn pair(&self, other: &Representative, eps: f64) -> Result<f64> {
        self.check_grid(other)?;
        let (xa, xb) = (self.samples(eps), other.samples(eps));
        let prod: Vec<f64> = xa.iter().zip(xb.iter()).map(|(u, v)| u * v).collect();
        Ok(quad::trapezoid(&prod, self.grid.spacing()))
    }

    /// Pairings along a whole ladder.
    pub fn pair_ladder(&self, other: &Representative, ladder: &EpsilonLadder) -> Result<Vec<f64>> {
        ladder.values().iter().map(|&e| self.pair(other, e)).collect()
    }
}

/// Fourth-order first derivative of uniformly spaced samples.
pub fn fd4(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least 5 samples for the 5-point stencil");
    let mut out = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
    }
    out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4]
        - f[n - 5])
        * c;
    out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
        + 3.0 * f[n - 5])
        * c;
    out
}

/// Outcome of an association test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Pairings converge to the candidate within tolerance.
    Associated,
    /// Pairings converge, but to something measurably different.
    NotAssociated,
    /// The ladder does not resolve the limit at the requested tolerance.
    Inconclusive,
}

/// Result of comparing ladder pairings against a candidate limit.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AssociationReport {
    /// `(eps, pairing value)` per rung, coarsest first.
    pub values: Vec<(f64, f64)>,
    /// Fitted convergence order from successive differences, if the
    /// differences are not already at round-off.
    pub slope: Option<f64>,
    /// Extrapolated limit of the pairings.
    pub limit: f64,
    /// Candidate limit the family was tested against.
    pub candidate: f64,
    /// Absolute tolerance used for the verdict.
    pub tol: f64,
    pub verdict: Verdict,
}

/// Minimum fitted convergence order for the extrapolation to be trusted.
pub const MIN_ASSOCIATION_SLOPE: f64 = 0.5;

/// Decide association of ladder pairing `values` with `candidate`.
///
/// Successive differences `|v_{j+1} - v_j|` are fitted to `C eps^p` on
/// the geometric ladder; if the fitted order `p` is at least
/// [`MIN_ASSOCIATION_SLOPE`] the limit is Richardson-extrapolated from
/// the last two rungs, otherwise the last rung is used as the estimate.
/// Verdicts: `Associated` if the trusted limit is within `tol` of the
/// candidate; `NotAssociated` if it is off by more than `10 * tol`;
/// `Inconclusive` otherwise (including untrusted fits that happen to
/// land near the candidate).
pub fn associate(
    values: &[f64],
    ladder: &EpsilonLadder,
    candidate: f64,
    tol: f64,
) -> Result<AssociationReport> {
    let eps = ladder.values();
    if values.len() != eps.len() {
        return Err(Error::Shape(format!(
            "{} pairing values for a {}-rung ladder",
            values.len(),
            eps.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("association tolerance must be positive".into()));
    }
    let pairs: Vec<(f64, f64)> = eps.iter().copied().zip(values.iter().copied()).collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();

    // All rungs already agree down to quadrature/stencil noise: the
    // family has converged and no decay fit is meaningful.
    if diffs.iter().all(|d| *d <= 1e-8 * scale) {
        let limit = *values.last().unwrap();
        let gap = (limit - candidate).abs();
        let verdict = if gap <= tol {
            Verdict::Associated
        } else if gap > 10.0 * tol {
            Verdict::NotAssociated
        } else {
            Verdict::Inconclusive
        };
        return Ok(AssociationReport {
            values: pairs,
            slope: None,
            limit,
            candidate,
            tol,
            verdict,
        });
    }

    // Least-squares slope of log |diff| against log eps. Differences at
    // round-off are excluded from the fit.
    let pts: Vec<(f64, f64)> = diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 1e-14 * scale)
        .map(|(j, d)| (eps[j].ln(), d.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };

    let trusted = slope.map(|s| s >= MIN_ASSOCIATION_SLOPE).unwrap_or(false);
    let limit = if trusted {
        // v_j ~ L + C eps_j^p with eps descending by `ratio`:
        // L = (v_last - r^p v_prev) / (1 - r^p).
        let p = slope.unwrap();
        let rp = ladder.ratio().powf(p);
        let vl = values[values.len() - 1];
        let vp = values[values.len() - 2];
        (vl - rp * vp) / (1.0 - rp)
    } else {
        *values.last().unwrap()
    };

    let gap = (limit - candidate).abs();
    let verdict = if trusted && gap <= tol {
        Verdict::Associated
    } else if gap > 10.0 * tol {
        Verdict::NotAssociated
    } else {
        Verdict::Inconclusive
    };

    Ok(AssociationReport {
        values: pairs,
        slope,
        limit,
        candidate,
        tol,
        verdict,
    })
}
