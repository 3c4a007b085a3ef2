//! scalarlab: a numerical laboratory for regularized canonical
//! quantization of a self-interacting scalar boson field.
//!
//! The crate studies a scalar field with a `g φ^N` nonlinearity on a
//! periodic box, quantized on a Fock space that is truncated both in
//! momentum (finitely many modes) and in particle number (hard cutoff).
//! Fields are mollified in momentum space by a smooth plateau profile and
//! the interaction can be damped in position space; everything depends on
//! a regularization scale `eps`, and the interesting questions are asked
//! along ladders of shrinking scales.
//!
//! Module map:
//!
//! * [`profile`] — plateau profiles, mollifier weights, damper, and the
//!   smoothed step/delta kernels on the line;
//! * [`genfunc`] — scale-indexed families of functions on an interval,
//!   nonlinear operations, and the association diagnostic;
//! * [`fock`] — truncated Fock basis and sparse ladder-operator algebra;
//! * [`field`] — mollified free fields, canonical commutators,
//!   Klein-Gordon pairing, translations;
//! * [`hamiltonian`] — quadrature assembly of regularized Hamiltonians;
//! * [`dynamics`] — propagators, scattering operator, interaction-picture
//!   identities, field-equation residuals;
//! * [`average`] — Cesàro-style mean extraction for scale sweeps;
//! * [`config`], [`output`], [`runner`] — the config-driven command line
//!   lab on top of the library.

pub mod average;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod fock;
pub mod genfunc;
pub mod hamiltonian;
pub mod linalg;
pub mod output;
pub mod profile;
pub mod quad;
pub mod runner;

pub use error::{Error, Result};
