//! Bare van der Waals interaction, the saturated effective potential and its
//! dimensionless form W(u) with u = r/ξ.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::integrate_adaptive;
use crate::params::{DerivedScales, Sign, SystemParams};
use crate::{Error, Result};

/// Sign of the reduced interaction for s = −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// W(0) < 0: a single well.
    Attractive,
    /// W(0) > 0: a soft barrier.
    Repulsive,
}

impl std::str::FromStr for Interaction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attractive" => Ok(Interaction::Attractive),
            "repulsive" => Ok(Interaction::Repulsive),
            _ => Err(Error::Config(format!("unknown branch '{s}'"))),
        }
    }
}

impl std::fmt::Display for Interaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interaction::Attractive => "attractive",
            Interaction::Repulsive => "repulsive",
        })
    }
}

/// W(u) = σ·s·strength/(u⁶ − s), strength = (ξ/λ̄)².
///
/// The reduced equation is −ψ″ + Wψ = ε̃ψ with ε̃ = mξ²ω̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPotential {
    pub strength: f64,
    pub s: Sign,
    pub sigma: Sign,
}

impl ReducedPotential {
    /// Regular (s = −1) potential with ξ/λ̄ = `ratio`.
    pub fn from_ratio(ratio: f64, kind: Interaction) -> Self {
        let sigma = match kind {
            Interaction::Attractive => Sign::Plus,
            Interaction::Repulsive => Sign::Minus,
        };
        Self { strength: ratio * ratio, s: Sign::Minus, sigma }
    }

    /// ξ/λ̄
    pub fn ratio(&self) -> f64 {
        self.strength.sqrt()
    }

    pub fn is_regular(&self) -> bool {
        self.s == Sign::Minus
    }

    pub fn interaction(&self) -> Interaction {
        if self.value(0.0) < 0.0 {
            Interaction::Attractive
        } else {
            Interaction::Repulsive
        }
    }

    /// Coefficient C of the far tail W ≈ C/u⁶.
    pub fn tail_coefficient(&self) -> f64 {
        self.sigma.value() * self.s.value() * self.strength
    }

    pub fn value(&self, u: f64) -> f64 {
        let s = self.s.value();
        self.tail_coefficient() / (u.powi(6) - s)
    }

    pub fn require_regular(&self) -> Result<()> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(Error::SingularConfiguration)
        }
    }

    /// Same potential with the overall sign flipped.
    pub fn flipped(&self) -> Self {
        let sigma = match self.sigma {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        Self { sigma, ..*self }
    }
}

pub fn v_bare(c6: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::Singular("bare interaction is infinite at r = 0".into()));
    }
    Ok(c6 / r.powi(6))
}

/// V/(1 − χ̄V) with the r → 0 limit −1/χ̄.
pub fn v_eff(p: &SystemParams, chibar: f64, r: f64) -> Result<f64> {
    if chibar == 0.0 {
        return v_bare(p.c6, r);
    }
    if r == 0.0 {
        return Ok(-1.0 / chibar);
    }
    let cv = chibar * p.c6 / r.powi(6);
    let den = 1.0 - cv;
    if den.abs() < 1e-12 {
        return Err(Error::Singular(
            "V_eff pole at r = xi; sign(chi_bar*C6) = +1 is rejected by validate_interaction".into(),
        ));
    }
    // 1/χ̄ · cv/(1 − cv) avoids overflow of V at small r
    Ok(cv / (chibar * den))
}

/// Packages the dimensionless potential for the scales at a point (K, ω).
pub fn reduce(p: &SystemParams, scales: &DerivedScales) -> Result<ReducedPotential> {
    let am = scales.alpha * scales.m;
    if !p.is_lossless() || scales.chibar.im != 0.0 || am.im != 0.0 {
        return Err(Error::RequiresLossless);
    }
    let s = Sign::of(scales.chibar.re * p.c6);
    if s == Sign::Plus {
        return Err(Error::SingularConfiguration);
    }
    let sigma = Sign::of(am.re * scales.chibar.re);
    Ok(ReducedPotential { strength: scales.strength * scales.strength, s, sigma })
}

/// Reduced energy ε̃ = mξ²ω̄.
pub fn reduced_energy(scales: &DerivedScales, omega_bar: f64) -> f64 {
    scales.m.re * scales.xi * scales.xi * omega_bar
}

/// ∫ e^{iku}/(1+u⁶) du by residues at e^{iπ/6}, i, e^{i5π/6}.
fn sextic_transform(k: f64) -> f64 {
    let k = k.abs();
    let z0 = Complex64::from_polar(1.0, PI / 6.0);
    let t = z0 * (Complex64::i() * k * z0).exp();
    PI / 3.0 * (2.0 * t.im + (-k).exp())
}

/// Ŵ(k) = ∫ e^{iku} W(u) du, exact for s = −1.
pub fn v_eff_fourier(red: &ReducedPotential, k: f64) -> Result<f64> {
    red.require_regular()?;
    Ok(-red.sigma.value() * red.strength * sextic_transform(k))
}

/// Ŵ(k) by adaptive quadrature on [0, U] plus the mapped tail u = U/t.
pub fn v_eff_fourier_quadrature(red: &ReducedPotential, k: f64) -> Result<f64> {
    red.require_regular()?;
    let cut = 20.0;
    let tol = 1e-12 * red.strength.max(1e-300);
    let inner = |u: f64| (k * u).cos() * red.value(u);
    let tail = |t: f64| {
        if t == 0.0 {
            0.0
        } else {
            let u = cut / t;
            (k * u).cos() * red.value(u) * cut / (t * t)
        }
    };
    // split [0, cut] at unit intervals so oscillations stay resolved
    let mut total = 0.0;
    let panels = (cut * (1.0 + k.abs() / PI)).ceil() as usize;
    for i in 0..panels {
        let a = cut * i as f64 / panels as f64;
        let b = cut * (i + 1) as f64 / panels as f64;
        total += integrate_adaptive(&inner, a, b, tol / panels as f64)?;
    }
    total += integrate_adaptive(&tail, 0.0, 1.0, tol)?;
    Ok(2.0 * total)
}

pub fn profile(red: &ReducedPotential, us: &[f64]) -> Vec<(f64, f64)> {
    us.iter().map(|&u| (u, red.value(u))).collect()
}
