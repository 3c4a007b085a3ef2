//! Mollified free field operators on the truncated Fock space.
//!
//! The field at regularization scale `eps` keeps every box mode but
//! weights mode `k` by the mollifier profile `w_k = F(eps ‖k‖)`:
//!
//! ```text
//! φ_eps(x, t) = Σ_k w_k ( α_k(x,t) a⁺_k + conj(α_k(x,t)) a_k ),
//! α_k(x, t)   = e^{-i(k·x - k0 t)} / sqrt(2 k0 V).
//! ```
//!
//! The normalization is fixed by the canonical commutation relation: with
//! π = ∂_t φ one gets `[φ(x), π(x')] = i δ_eps(x - x') 1` on states away
//! from the particle cutoff, where `δ_eps` is the mollified box delta
//! `δ_eps(r) = (1/V) Σ_k w_k² e^{i k·r}`. In the plateau regime (every
//! retained mode has unit weight) `δ_eps` is the exact reproducing kernel
//! of the band-limited box functions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, ModeSet, SparseOp};
use crate::profile::Mollifier;

type C64 = Complex64;

/// Positive-frequency expansion coefficients of a smeared field kernel:
/// one complex coefficient per mode of a [`ModeSet`].
#[derive(Debug, Clone)]
pub struct KernelCoeffs {
    pub coeffs: Vec<C64>,
}

/// A mollified field over a fixed basis: the basis, the mollifier shape,
/// and the scale.
#[derive(Debug, Clone)]
pub struct FieldSet<'a> {
    basis: &'a FockBasis,
    moll: Mollifier,
    eps: f64,
}

impl<'a> FieldSet<'a> {
    pub fn new(basis: &'a FockBasis, moll: Mollifier, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Parameter(format!("scale must be positive, got {eps}")));
        }
        Ok(FieldSet { basis, moll, eps })
    }

    pub fn basis(&self) -> &FockBasis {
        self.basis
    }

    pub fn modes(&self) -> &ModeSet {
        self.basis.modes()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.moll
    }

    /// Mollifier weight of each mode at this scale.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.modes();
        (0..m.len()).map(|i| self.moll.weight(self.eps, m.k_norm(i))).collect()
    }

    /// True when every retained mode sits on the unit plateau of the
    /// profile, i.e. the mollifier acts as the identity on the mode set.
    pub fn is_plateau(&self) -> bool {
        self.eps <= self.moll.plateau_scale(self.modes().k_norm_max())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.modes().space_dim() {
            return Err(Error::Shape(format!(
                "point has {} coordinates in {} spatial dimensions",
                x.len(),
                self.modes().space_dim()
            )));
        }
        Ok(())
    }

    /// Mode coefficients of the smeared delta kernel at `(x, t)`:
    /// `c_k = w_k e^{-i(k·x - k0 t)} / (2 k0 sqrt(V))`. These are the
    /// positive-frequency data from which the field operators below are
    /// built (up to the Klein-Gordon normalization `sqrt(2 k0)`).
    pub fn kernel_coeffs(&self, x: &[f64], t: f64) -> Result<KernelCoeffs> {
        self.check_point(x)?;
        let m = self.modes();
        let sqrt_v = m.volume().sqrt();
        let w = self.weights();
        let coeffs = (0..m.len())
            .map(|i| {
                let k = m.k(i);
                let k0 = m.k0(i);
                let phase: f64 = k0 * t - k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                C64::from_polar(w[i] / (2.0 * k0 * sqrt_v), phase)
            })
            .collect();
        Ok(KernelCoeffs { coeffs })
    }

    /// Ladder amplitudes `α_k = sqrt(2 k0) c_k = w_k e^{-i(k·x - k0 t)}
    /// / sqrt(2 k0 V)`. This Klein-Gordon rescaling of the kernel
    /// coefficients is what makes `[φ, π] = i δ_eps` come out right.
    fn ladder_amplitudes(&self, x: &[f64], t: f64) -> Result<Vec<C64>> {
        let m = self.modes();
        let c = self.kernel_coeffs(x, t)?;
        Ok(c
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| z * (2.0 * m.k0(i)).sqrt())
            .collect())
    }

    fn hermitian_pair(&self, amps: &[C64]) -> Result<SparseOp> {
        let up = self.basis.a_plus(amps)?;
        let down = self.basis.a_minus(amps)?;
        Ok(up.add_scaled(&down, C64::new(1.0, 0.0)))
    }

    /// Field operator `φ_eps(x, t)`.
    pub fn phi(&self, x: &[f64], t: f64) -> Result<SparseOp> {
        let amps = self.ladder_amplitudes(x, t)?;
        self.hermitian_pair(&amps)
    }

    /// Conjugate momentum `π_eps(x, t) = ∂_t φ_eps(x, t)`.
    pub fn pi(&self, x: &[f64], t: f64) -> Result<SparseOp> {
        let m = self.modes();
        let amps: Vec<C64> = self
            .ladder_amplitudes(x, t)?
            .iter()
            .enumerate()
            .map(|(i, z)| z * C64::new(0.0, m.k0(i)))
            .collect();
        self.hermitian_pair(&amps)
    }

    /// Spatial derivative `∂φ_eps/∂x_axis (x, t)`.
    pub fn grad_phi(&self, axis: usize, x: &[f64], t: f64) -> Result<SparseOp> {
        if axis >= self.modes().space_dim() {
            return Err(Error::Parameter(format!(
                "axis {axis} out of range for {}-dimensional space",
                self.modes().space_dim()
            )));
        }
        let m = self.modes();
        let amps: Vec<C64> = self
            .ladder_amplitudes(x, t)?
            .iter()
            .enumerate()
            .map(|(i, z)| z * C64::new(0.0, -m.k(i)[axis]))
            .collect();
        self.hermitian_pair(&amps)
    }

    /// Spatial Laplacian `Δφ_eps(x, t)` (each mode picks up `-‖k‖²`).
    pub fn lap_phi(&self, x: &[f64], t: f64) -> Result<SparseOp> {
        let m = self.modes();
        let amps: Vec<C64> = self
            .ladder_amplitudes(x, t)?
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let k2: f64 = m.k(i).iter().map(|c| c * c).sum();
                z * (-k2)
            })
            .collect();
        self.hermitian_pair(&amps)
    }

    /// Mollified box delta `δ_eps(r) = (1/V) Σ_k w_k² e^{i k·r}` (real by
    /// the k ↔ -k symmetry of the mode set).
    pub fn delta_kernel(&self, r: &[f64]) -> Result<f64> {
        self.check_point(r)?;
        let m = self.modes();
        let w = self.weights();
        let mut acc = 0.0;
        for i in 0..m.len() {
            let kr: f64 = m.k(i).iter().zip(r).map(|(a, b)| a * b).sum();
            acc += w[i] * w[i] * kr.cos();
        }
        Ok(acc / m.volume())
    }

    /// Largest entry of `[φ(x,t), π(x',t)] - i δ_eps(x-x') 1` on the
    /// margin-one safe subspace.
    pub fn ccr_residual(&self, x: &[f64], xp: &[f64], t: f64) -> Result<f64> {
        let phi = self.phi(x, t)?;
        let pi = self.pi(xp, t)?;
        let r: Vec<f64> = x.iter().zip(xp).map(|(a, b)| a - b).collect();
        let delta = self.delta_kernel(&r)?;
        let comm = phi.commutator(&pi);
        let target = SparseOp::identity(self.basis.dim()).scale(C64::new(0.0, delta));
        let resid = comm.add_scaled(&target, C64::new(-1.0, 0.0));
        let safe = self.basis.safe_indices(1)?;
        Ok(resid.max_abs_on(&safe))
    }
}

/// Klein-Gordon pairing of two positive-frequency coefficient vectors:
/// `<f, g>_KG = Σ_k 2 k0 conj(f_k) g_k V` — the mode-space form of
/// `i ∫ (∂_t conj(f) g - conj(f) ∂_t g) dx` for the `e^{+i k0 t}`
/// phase convention used here, hence independent of the common
/// reference time.
pub fn kg_pair(modes: &ModeSet, f: &KernelCoeffs, g: &KernelCoeffs) -> Result<C64> {
    if f.coeffs.len() != modes.len() || g.coeffs.len() != modes.len() {
        return Err(Error::Shape("coefficient vectors do not match the mode set".into()));
    }
    Ok((0..modes.len())
        .map(|i| f.coeffs[i].conj() * g.coeffs[i] * (2.0 * modes.k0(i) * modes.volume()))
        .sum())
}

/// Evaluate the positive-frequency function with the given coefficients:
/// `F(x, t) = Σ_k c_k e^{-i(k·x - k0 t)}`.
pub fn eval_positive_frequency(modes: &ModeSet, c: &KernelCoeffs, x: &[f64], t: f64) -> C64 {
    (0..modes.len())
        .map(|i| {
            let kx: f64 = modes.k(i).iter().zip(x).map(|(a, b)| a * b).sum();
            c.coeffs[i] * C64::from_polar(1.0, modes.k0(i) * t - kx)
        })
        .sum()
}

/// Unitary implementing the box translation `x -> x + a`: diagonal in the
/// occupation basis with phases `exp(-i Σ_m n_m k_m · a)`.
pub fn translation_op(basis: &FockBasis, a: &[f64]) -> Result<SparseOp> {
    let modes = basis.modes();
    if a.len() != modes.space_dim() {
        return Err(Error::Shape(format!(
            "translation vector has {} coordinates in {} dimensions",
            a.len(),
            modes.space_dim()
        )));
    }
    let ka: Vec<f64> = (0..modes.len())
        .map(|i| modes.k(i).iter().zip(a).map(|(u, v)| u * v).sum())
        .collect();
    let cols = (0..basis.dim())
        .map(|j| {
            let phase: f64 = basis
                .occupation(j)
                .iter()
                .zip(&ka)
                .map(|(&n, &p)| n as f64 * p)
                .sum();
            vec![(j, C64::from_polar(1.0, -phase))]
        })
        .collect::<Vec<_>>();
    Ok(SparseOp::from_cols(basis.dim(), cols))
}
