//! Simulation of molecular vibrational excitations during vibronic
//! transitions, through the Gaussian-state picture of photon-number sampling.
//!
//! The pipeline:
//!
//! 1. [`vibronic`] turns normal modes, frequencies and geometries of two
//!    electronic states into [`DoktorovParams`] (`U_L`, `sigma`, `U_R`, `beta`).
//! 2. [`gaussian`] prepares the post-transition state by applying the
//!    Doktorov operator to the vacuum (optionally pre-excited with
//!    [`excitation::pre_excite`]).
//! 3. [`lhaf`] evaluates photon-number pattern probabilities through loop
//!    hafnians.
//! 4. [`sampler`] draws exact samples and computes marginal and joint
//!    distributions; [`dynamics`] evolves the state and moves to localized
//!    modes.
//!
//! [`cli`] holds the file formats and the command implementations behind the
//! `vibex` binary.
//!
//! Mode indices are 0-based throughout the library; files and the command
//! line use 1-based mode numbers.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod excitation;
pub mod gaussian;
pub mod io;
pub mod lhaf;
pub mod sampler;
pub mod units;
pub mod vibronic;

pub use dynamics::{evolve, time_series, LocalizationMap};
pub use error::{Error, Result};
pub use excitation::{drive_displacement, pre_excite, DriveSpec};
pub use gaussian::{apply, apply_doktorov, GaussianState, SymplecticMap};
pub use lhaf::{loop_hafnian, loop_hafnian_reference, pattern_probability, PreparedState};
pub use num_complex::Complex64;
pub use sampler::{
    joint_probability_table, sample, single_mode_marginals, Distribution, PhotonPattern, SampleRun,
    SamplerConfig,
};
pub use vibronic::{doktorov_params, DoktorovParams, DuschinskyData, MoleculeData};
