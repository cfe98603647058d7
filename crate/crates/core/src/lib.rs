//! Scattering and bound-state properties of strongly interacting Rydberg
//! slow-light polaritons in one dimension.
//!
//! Units: ħ = 1, energies are angular frequencies, lengths are whatever
//! unit `c` and `C₆` are expressed in.

pub mod error;
pub mod manybody;
pub mod modes;
pub mod numerics;
pub mod params;
pub mod potential;
pub mod regimes;
pub mod schroedinger;
pub mod tmatrix;

pub use error::{Error, Result};
pub use params::{DerivedScales, RegimeLabel, SystemParams, Thresholds};
pub use potential::{Interaction, ReducedPotential};
pub use regimes::Regime;
