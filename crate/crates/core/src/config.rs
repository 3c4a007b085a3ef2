//! TOML run configuration with strict validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{basis_size, FockBasis, ModeSet};
use crate::genfunc::{EpsilonLadder, GridSpec};
use crate::hamiltonian::QuadratureGrid;
use crate::profile::{Damper, Mollifier, SpectralProfile};

/// Top-level run configuration. Unknown keys are rejected so that typos
/// cannot silently fall back to defaults.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for any randomized spot checks.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub mollifier: ProfileConfig,
    #[serde(default)]
    pub damper: DamperConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub genfunc: GenfuncConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub average: AverageConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
}

fn default_seed() -> u64 {
    42
}

/// Physical model: box, modes, cutoff, mass, interaction.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Spatial dimension (1..=3).
    #[serde(default = "one")]
    pub space_dim: usize,
    /// Side length of the periodic box.
    pub box_length: f64,
    /// Mode labels run over {-n_max, .., n_max}^d.
    pub n_max: i64,
    /// Hard cutoff on the total particle number.
    pub particle_cutoff: u32,
    pub mass: f64,
    /// Coupling constant g of the interaction g/(N+1) φ^{N+1}.
    pub coupling: f64,
    /// Field power N in the field equation (N = 3 gives a φ⁴ density).
    pub field_power: u32,
    /// Reference time at which Heisenberg and interaction pictures agree.
    #[serde(default)]
    pub tau: f64,
    /// Subtract the free vacuum energy from assembled Hamiltonians.
    #[serde(default = "yes")]
    pub vacuum_shift: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// Plateau profile radii.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            r_inner: 1.0,
            r_outer: 2.0,
        }
    }
}

/// Spatial damper settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DamperConfig {
    #[serde(default)]
    pub enabled: bool,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for DamperConfig {
    fn default() -> Self {
        DamperConfig {
            enabled: false,
            r_inner: 1.0,
            r_outer: 2.0,
        }
    }
}

/// Scale ladder for field-level experiments.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub eps0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        // First two rungs off the plateau (for the default mode set),
        // last two on it.
        LadderConfig {
            eps0: 0.8,
            ratio: 0.5,
            rungs: 4,
        }
    }
}

/// Interval-experiment settings (grid on [lo, hi] and its own ladder).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GenfuncConfig {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub eps0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for GenfuncConfig {
    fn default() -> Self {
        GenfuncConfig {
            lo: -1.0,
            hi: 1.0,
            samples: 65537,
            eps0: 0.025,
            ratio: 0.5,
            rungs: 4,
        }
    }
}

/// Time offsets and finite-difference steps for dynamics checks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub time_offsets: Vec<f64>,
    pub fd_step: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            time_offsets: vec![1.0, 2.0, 5.0],
            fd_step: 1e-4,
        }
    }
}

/// Scale sweep in `u = 1/eps`: uniform samples on `[u_min, u_max]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub u_min: f64,
    pub u_max: f64,
    pub du: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            u_min: 1.0,
            u_max: 45.0,
            du: 0.05,
        }
    }
}

/// Averaging window for scale sweeps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AverageConfig {
    pub du: f64,
    pub t_max: f64,
}

impl Default for AverageConfig {
    fn default() -> Self {
        AverageConfig {
            du: 0.01,
            t_max: 1000.0,
        }
    }
}

/// Output location. The directory can be overridden with the
/// `SCALARLAB_OUT` environment variable.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
        }
    }
}

/// Capacity guards.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    /// Largest admissible basis dimension (including the internal
    /// extension basis used when assembling quadratic terms).
    pub max_basis_dim: usize,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        LimitsConfig {
            max_basis_dim: 20_000,
        }
    }
}

impl RunConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The default laboratory setup: 5 modes on a 2π box, particle
    /// cutoff 4, φ⁴ interaction at g = 0.2.
    pub fn default_lab() -> Self {
        RunConfig {
            seed: default_seed(),
            model: ModelConfig {
                space_dim: 1,
                box_length: 2.0 * std::f64::consts::PI,
                n_max: 2,
                particle_cutoff: 4,
                mass: 1.0,
                coupling: 0.2,
                field_power: 3,
                tau: 0.0,
                vacuum_shift: true,
            },
            mollifier: ProfileConfig::default(),
            damper: DamperConfig::default(),
            ladder: LadderConfig::default(),
            genfunc: GenfuncConfig::default(),
            schedule: ScheduleConfig::default(),
            sweep: SweepConfig::default(),
            average: AverageConfig::default(),
            output: OutputConfig::default(),
            limits: LimitsConfig::default(),
        }
    }

    /// Cross-field validation beyond what construction of the individual
    /// objects enforces.
    pub fn validate(&self) -> Result<()> {
        // Constructing the pieces surfaces most range errors.
        let modes = self.mode_set()?;
        self.spectral_profile()?;
        self.damper()?;
        self.interaction()?;
        self.field_ladder()?;
        self.genfunc_grid()?;
        self.genfunc_ladder()?;
        self.quadrature_grid()?;
        if !(self.schedule.fd_step > 0.0) {
            return Err(Error::Config("schedule.fd_step must be positive".into()));
        }
        if self.schedule.time_offsets.is_empty() {
            return Err(Error::Config("schedule.time_offsets must not be empty".into()));
        }
        if !(self.average.du > 0.0) || !(self.average.t_max > 200.0 * self.average.du) {
            return Err(Error::Config(
                "average window must satisfy 0 < du and t_max > 200 du".into(),
            ));
        }
        if !(self.sweep.du > 0.0)
            || !(self.sweep.u_min > 0.0)
            || !(self.sweep.u_max > self.sweep.u_min + 200.0 * self.sweep.du)
        {
            return Err(Error::Config(
                "sweep must satisfy 0 < u_min and u_max > u_min + 200 du".into(),
            ));
        }
        // Capacity check covering the extension basis.
        let ext = basis_size(modes.len(), self.model.particle_cutoff + 2);
        if ext > self.limits.max_basis_dim as u128 {
            return Err(Error::Capacity(format!(
                "extension basis needs {ext} states (limit {})",
                self.limits.max_basis_dim
            )));
        }
        Ok(())
    }

    pub fn mode_set(&self) -> Result<ModeSet> {
        ModeSet::new(
            self.model.space_dim,
            self.model.n_max,
            self.model.box_length,
            self.model.mass,
        )
        .map_err(promote)
    }

    pub fn fock_basis(&self) -> Result<FockBasis> {
        FockBasis::new(
            self.mode_set()?,
            self.model.particle_cutoff,
            self.limits.max_basis_dim,
        )
    }

    pub fn spectral_profile(&self) -> Result<SpectralProfile> {
        SpectralProfile::new(self.mollifier.r_inner, self.mollifier.r_outer).map_err(promote)
    }

    pub fn mollifier_profile(&self) -> Result<Mollifier> {
        Ok(Mollifier::new(self.spectral_profile()?))
    }

    pub fn damper(&self) -> Result<Damper> {
        if !self.damper.enabled {
            return Ok(Damper::disabled());
        }
        Ok(Damper::new(
            SpectralProfile::new(self.damper.r_inner, self.damper.r_outer).map_err(promote)?,
            true,
        ))
    }

    pub fn interaction(&self) -> Result<crate::hamiltonian::InteractionSpec> {
        crate::hamiltonian::InteractionSpec::new(
            self.model.coupling,
            self.model.field_power,
            self.damper()?,
        )
        .map_err(promote)
    }

    pub fn field_ladder(&self) -> Result<EpsilonLadder> {
        EpsilonLadder::new(self.ladder.eps0, self.ladder.ratio, self.ladder.rungs).map_err(promote)
    }

    pub fn genfunc_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.genfunc.lo, self.genfunc.hi, self.genfunc.samples).map_err(promote)
    }

    pub fn genfunc_ladder(&self) -> Result<EpsilonLadder> {
        EpsilonLadder::new(self.genfunc.eps0, self.genfunc.ratio, self.genfunc.rungs)
            .map_err(promote)
    }

    pub fn quadrature_grid(&self) -> Result<QuadratureGrid> {
        QuadratureGrid::exact_for(
            self.model.space_dim,
            self.model.box_length,
            self.model.n_max,
            self.model.field_power,
        )
        .map_err(promote)
    }

    /// Predicted dimensions `(nominal, extension)` of the working bases.
    pub fn basis_dims(&self) -> Result<(u128, u128)> {
        let modes = self.mode_set()?;
        Ok((
            basis_size(modes.len(), self.model.particle_cutoff),
            basis_size(modes.len(), self.model.particle_cutoff + 2),
        ))
    }
}

/// Parameter errors found while validating a config are configuration
/// errors from the caller's point of view.
fn promote(e: Error) -> Error {
    match e {
        Error::Parameter(m) => Error::Config(m),
        other => other,
    }
}
