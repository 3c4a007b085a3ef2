//! Smooth plateau profiles, mollifier weights, and their position-space
//! kernels.
//!
//! The regularization scheme is built around a single radial profile
//! `F(r)`: identically 1 on `[0, r_inner]`, identically 0 on
//! `[r_outer, ∞)`, and a smooth monotone transition in between, realized
//! as a quotient of bump functions. The same shape serves two roles:
//!
//! * as a *spectral* cutoff (mollifier): mode `k` of a field is weighted
//!   by `F(ε‖k‖)`, so all modes inside the plateau pass unchanged;
//! * as a *spatial* damper: the interaction density is multiplied by
//!   `F(ε‖x‖)`, switching the coupling off far from the origin.
//!
//! One dimensional position-space kernels (the smoothed delta and the
//! smoothed step) are obtained from the profile by Fourier cosine/sine
//! integrals, evaluated with composite Gauss–Legendre quadrature.

use crate::error::{Error, Result};
use crate::quad;

/// Beyond `TAIL_CUT * eps` the smoothed step and delta are replaced by
/// their exact limits (0, 1, and 0 respectively). At that distance the
/// residual tail of the transition profile used here is far below 1e-12,
/// so the replacement is invisible at working tolerances and makes the
/// plateau property exact.
pub const TAIL_CUT: f64 = 256.0;

/// Sharpness of the bump quotient; `B(s) = exp(-BUMP_RATE / s)`.
const BUMP_RATE: f64 = 2.0;

fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-BUMP_RATE / s).exp()
    }
}

/// Radial plateau profile with unit plateau `[0, r_inner]` and support
/// `[0, r_outer]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProfile {
    r_inner: f64,
    r_outer: f64,
}

impl SpectralProfile {
    /// Construct a plateau profile. Requires `0 < r_inner < r_outer`.
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner.is_finite() && r_outer.is_finite()) || r_inner <= 0.0 || r_outer <= r_inner {
            return Err(Error::Parameter(format!(
                "plateau profile needs 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
            )));
        }
        Ok(SpectralProfile { r_inner, r_outer })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    /// Profile value at radius `r >= 0` (the profile is even; negative
    /// arguments are folded).
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.r_inner {
            1.0
        } else if r >= self.r_outer {
            0.0
        } else {
            let up = bump(self.r_outer - r);
            let dn = bump(r - self.r_inner);
            up / (up + dn)
        }
    }
}

/// Spectral mollifier: a plateau profile together with the scale
/// convention `weight(eps, k) = F(eps * ‖k‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    profile: SpectralProfile,
}

impl Mollifier {
    pub fn new(profile: SpectralProfile) -> Self {
        Mollifier { profile }
    }

    pub fn profile(&self) -> &SpectralProfile {
        &self.profile
    }

    /// Weight of a mode with radial wavenumber `k_norm` at regularization
    /// scale `eps`.
    pub fn weight(&self, eps: f64, k_norm: f64) -> f64 {
        self.profile.value(eps * k_norm)
    }

    /// Largest scale at which a mode set with maximal wavenumber
    /// `k_norm_max` is weighted identically 1 (the plateau regime).
    pub fn plateau_scale(&self, k_norm_max: f64) -> f64 {
        if k_norm_max <= 0.0 {
            f64::INFINITY
        } else {
            self.profile.r_inner / k_norm_max
        }
    }

    /// Smoothed one-dimensional delta: the inverse Fourier transform of
    /// the weight, `(1/π) ∫_0^{r_outer/eps} F(eps k) cos(k x) dk`.
    ///
    /// Exactly 0 for `|x| > TAIL_CUT * eps` (see [`TAIL_CUT`]).
    pub fn delta_kernel(&self, eps: f64, x: f64) -> f64 {
        assert!(eps > 0.0, "scale must be positive");
        let x = x.abs();
        if x > TAIL_CUT * eps {
            return 0.0;
        }
        let kmax = self.profile.r_outer / eps;
        let panels = oscillation_panels(kmax * x);
        quad::integrate_gl(
            |k| self.profile.value(eps * k) * (k * x).cos(),
            0.0,
            kmax,
            panels,
            64,
        ) / std::f64::consts::PI
    }

    /// Smoothed step (primitive of the smoothed delta, normalized so that
    /// the limits at -∞/+∞ are 0/1):
    /// `1/2 + (1/π) ∫_0^{r_outer/eps} F(eps k) sin(k x)/k dk`.
    ///
    /// Exactly 0 or 1 for `|x| > TAIL_CUT * eps`.
    pub fn step_kernel(&self, eps: f64, x: f64) -> f64 {
        assert!(eps > 0.0, "scale must be positive");
        if x > TAIL_CUT * eps {
            return 1.0;
        }
        if x < -TAIL_CUT * eps {
            return 0.0;
        }
        let kmax = self.profile.r_outer / eps;
        let panels = oscillation_panels(kmax * x.abs());
        0.5 + quad::integrate_gl(
            |k| self.profile.value(eps * k) * sinc_times(k, x),
            0.0,
            kmax,
            panels,
            64,
        ) / std::f64::consts::PI
    }
}

/// `sin(k x)/k`, continuous at `k = 0`.
fn sinc_times(k: f64, x: f64) -> f64 {
    if k.abs() < 1e-300 {
        x
    } else {
        (k * x).sin() / k
    }
}

/// Enough 64-node panels to resolve a total phase of `phase` radians.
fn oscillation_panels(phase: f64) -> usize {
    (phase / 40.0).ceil().max(8.0) as usize
}

/// Spatial damper: the same plateau shape read as a function of position,
/// `chi(eps, x) = F(eps * ‖x‖)`. With `eps -> 0` the damper opens up and
/// the interaction acts on all of space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Damper {
    profile: SpectralProfile,
    enabled: bool,
}

impl Damper {
    pub fn new(profile: SpectralProfile, enabled: bool) -> Self {
        Damper { profile, enabled }
    }

    /// A damper that is identically 1 (no spatial cutoff).
    pub fn disabled() -> Self {
        Damper {
            // Shape is irrelevant when disabled.
            profile: SpectralProfile::new(1.0, 2.0).unwrap(),
            enabled: false,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Damping factor at position norm `x_norm` and scale `eps`.
    pub fn value(&self, eps: f64, x_norm: f64) -> f64 {
        if self.enabled {
            self.profile.value(eps * x_norm)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn profile() -> SpectralProfile {
        SpectralProfile::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(SpectralProfile::new(-1.0, 2.0).is_err());
        assert!(SpectralProfile::new(0.0, 2.0).is_err());
        assert!(SpectralProfile::new(2.0, 2.0).is_err());
        assert!(SpectralProfile::new(3.0, 2.0).is_err());
        assert!(SpectralProfile::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn plateau_and_support_are_exact() {
        let p = profile();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.value(5.0), 0.0);
        // Even in the radial argument.
        assert_eq!(p.value(-0.7), 1.0);
    }

    #[test]
    fn transition_is_monotone_and_symmetric() {
        let p = profile();
        // Quotient construction puts the half-way point at the midpoint.
        assert_abs_diff_eq!(p.value(1.5), 0.5, epsilon = 1e-15);
        let mut prev = 1.0;
        for i in 1..200 {
            let r = 1.0 + i as f64 * 0.005;
            let v = p.value(r);
            assert!(v <= prev + 1e-15, "profile must be non-increasing");
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
        // Mirror symmetry about the midpoint: F(m + s) + F(m - s) = 1.
        for s in [0.1, 0.25, 0.4] {
            assert_abs_diff_eq!(p.value(1.5 + s) + p.value(1.5 - s), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn transition_joins_smoothly_at_the_edges() {
        // Numerical first derivative stays tiny right at the junctions,
        // consistent with a C^inf glue.
        let p = profile();
        let h = 1e-4;
        for r in [1.0005, 1.9995] {
            let d = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
            assert!(d.abs() < 1e-3, "derivative near junction too large: {d}");
        }
    }

    #[test]
    fn mollifier_weight_scales_with_eps() {
        let m = Mollifier::new(profile());
        assert_eq!(m.weight(0.4, 2.0), 1.0); // 0.8 inside plateau
        assert_eq!(m.weight(1.2, 2.0), 0.0); // 2.4 outside support
        assert_abs_diff_eq!(m.weight(0.75, 2.0), profile().value(1.5), epsilon = 1e-16);
        assert_abs_diff_eq!(m.plateau_scale(2.0), 0.5, epsilon = 1e-16);
    }

    #[test]
    fn delta_kernel_has_unit_mass_and_even_symmetry() {
        let m = Mollifier::new(profile());
        let eps = 0.05;
        // Independent trapezoid over the full support of the kernel.
        let n = 20000;
        let half = TAIL_CUT * eps;
        let h = 2.0 * half / n as f64;
        let samples: Vec<f64> = (0..=n)
            .map(|i| m.delta_kernel(eps, -half + i as f64 * h))
            .collect();
        assert_abs_diff_eq!(quad::trapezoid(&samples, h), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            m.delta_kernel(eps, 0.3),
            m.delta_kernel(eps, -0.3),
            epsilon = 1e-14
        );
    }

    #[test]
    fn delta_kernel_peak_scales_inversely_with_eps() {
        // kernel_eps(0) = c / eps for the fixed profile, so halving eps
        // doubles the peak.
        let m = Mollifier::new(profile());
        let a = m.delta_kernel(0.05, 0.0);
        let b = m.delta_kernel(0.025, 0.0);
        assert_abs_diff_eq!(a / b, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn step_kernel_limits_and_midpoint() {
        let m = Mollifier::new(profile());
        let eps = 0.02;
        assert_abs_diff_eq!(m.step_kernel(eps, 0.0), 0.5, epsilon = 1e-13);
        // Odd symmetry about the midpoint height 1/2.
        assert_abs_diff_eq!(
            m.step_kernel(eps, 0.3) + m.step_kernel(eps, -0.3),
            1.0,
            epsilon = 1e-13
        );
        // Tails: measured decay of this profile family. The approach to
        // the limit is slow (spectral sidelobes): about 1e-6 by
        // |x| = 50 eps and below 1e-10 only past |x| ~ 200 eps.
        assert!((1.0 - m.step_kernel(eps, 50.0 * eps)).abs() < 1e-4);
        assert!(m.step_kernel(eps, -50.0 * eps).abs() < 1e-4);
        assert!((1.0 - m.step_kernel(eps, 200.0 * eps)).abs() < 1e-10);
        assert!(m.step_kernel(eps, -200.0 * eps).abs() < 1e-10);
        // Outside the hard cut the limits are exact.
        assert_eq!(m.step_kernel(eps, TAIL_CUT * eps * 1.01), 1.0);
        assert_eq!(m.step_kernel(eps, -TAIL_CUT * eps * 1.01), 0.0);
    }

    #[test]
    fn step_kernel_becomes_sharp_as_eps_shrinks() {
        let m = Mollifier::new(profile());
        // At fixed x = 1 and shrinking eps the step approaches 1 fast.
        let gaps: Vec<f64> = [0.05, 0.02, 0.01]
            .iter()
            .map(|&e| (1.0 - m.step_kernel(e, 1.0)).abs())
            .collect();
        assert!(gaps[0] < 1e-4);
        assert!(gaps[1] < 1e-6);
        assert!(gaps[2] < 1e-9);
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn damper_disabled_is_identity() {
        let d = Damper::disabled();
        assert_eq!(d.value(0.3, 123.0), 1.0);
        let e = Damper::new(profile(), true);
        assert_eq!(e.value(0.1, 5.0), 1.0); // 0.5 inside plateau
        assert_eq!(e.value(1.0, 5.0), 0.0); // 5.0 outside support
    }
}
