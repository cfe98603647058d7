//! Low-energy many-body description: contact coupling, diluteness and the
//! collision phase seen by a probe photon.

use std::f64::consts::PI;

use crate::{Error, Result};

/// V₁D = g₁D δ(r) with g₁D = −2/(m a₁D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoPotential {
    pub a1d: f64,
    pub g1d: f64,
    pub mass: f64,
}

pub fn pseudo_coupling(a1d: f64, mass: f64) -> Result<PseudoPotential> {
    if a1d == 0.0 {
        return Err(Error::DivergentCoupling);
    }
    if mass == 0.0 || !mass.is_finite() {
        return Err(Error::InvalidParameter { name: "mass", reason: "must be finite and nonzero".into() });
    }
    if !a1d.is_finite() {
        return Err(Error::InvalidParameter { name: "a1d", reason: "must be finite".into() });
    }
    Ok(PseudoPotential { a1d, g1d: -2.0 / (mass * a1d), mass })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diluteness {
    /// n·r₀
    pub ratio: f64,
    pub valid: bool,
}

/// n·r₀ compared against `threshold` (0.1 by default in the thresholds).
pub fn diluteness(density: f64, range: f64, threshold: f64) -> Result<Diluteness> {
    if !(density >= 0.0) {
        return Err(Error::InvalidParameter { name: "density", reason: "must be >= 0".into() });
    }
    if !(range > 0.0) {
        return Err(Error::InvalidParameter { name: "r0", reason: "must be > 0".into() });
    }
    let ratio = density * range;
    Ok(Diluteness { ratio, valid: ratio < threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossover {
    LiebLiniger,
    SuperTonks,
    Crossing,
}

impl std::fmt::Display for Crossover {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Crossover::LiebLiniger => "lieb-liniger",
            Crossover::SuperTonks => "super-tonks",
            Crossover::Crossing => "crossing",
        })
    }
}

pub fn crossover_label(a1d: f64) -> Crossover {
    if a1d < 0.0 {
        Crossover::LiebLiniger
    } else if a1d > 0.0 {
        Crossover::SuperTonks
    } else {
        Crossover::Crossing
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionPhase {
    /// In (0, π).
    pub phase: f64,
    /// cot φ = 0, the optimal π-phase-shift point.
    pub optimal: bool,
}

/// φ = arccot(−a₁D Δω/v_g) on the branch (0, π).
pub fn collision_phase(delta_omega: f64, v_g: f64, a1d: f64) -> Result<CollisionPhase> {
    if !(v_g > 0.0) {
        return Err(Error::InvalidParameter { name: "v_g", reason: "must be > 0".into() });
    }
    let x = a1d * delta_omega / v_g;
    Ok(CollisionPhase { phase: PI / 2.0 + x.atan(), optimal: x == 0.0 })
}
