//! Closed-form coefficients of the effective theory in the low-energy and
//! far-detuned regimes, the adiabatic-elimination reduction, and the
//! electric-field amplitude relations.

use std::fmt;

use num_complex::Complex64;

use crate::params::{classify_regime, RegimeMargins, SystemParams, Thresholds};
use crate::{Error, Result};

/// Which set of closed-form expressions to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    LowEnergy,
    FarDetuned,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LowEnergy => "low-energy",
            Regime::FarDetuned => "far-detuned",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low-energy" | "low" => Ok(Regime::LowEnergy),
            "far-detuned" | "far" => Ok(Regime::FarDetuned),
            _ => Err(Error::Config(format!("unknown regime '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCoefficients {
    pub chibar: Complex64,
    pub alpha: Complex64,
    pub omega_bar: Complex64,
    pub alpha_b: Complex64,
    pub omega_bar_b: Complex64,
    pub zeta: f64,
    /// ζ was forced to zero at ω = cK where ω̄_B has a pole.
    pub zeta_at_pole: bool,
    pub regime: Regime,
    pub valid: bool,
    pub margins: RegimeMargins,
}

/// Saturation susceptibility
/// χ̄(ω) = (Δ − ω/2 − Ω²/(Δ−ω)) / (ω(Δ − ω/2) + 2Ω²).
pub fn chibar_full(p: &SystemParams, omega: f64) -> Result<Complex64> {
    let d = p.detuning();
    let o2 = p.omega_rabi * p.omega_rabi;
    let den = omega * (d - omega / 2.0) + 2.0 * o2;
    if den.norm() <= f64::EPSILON * (2.0 * o2 + (omega * d).norm()) {
        return Err(Error::Singular("chi_bar denominator w(D - w/2) + 2 W^2 = 0".into()));
    }
    let dw = d - omega;
    if dw.norm() == 0.0 {
        return Err(Error::Singular("chi_bar pole at w = Delta".into()));
    }
    Ok((d - omega / 2.0 - o2 / dw) / den)
}

/// ω = 0 value Δ/(2Ω²) − 1/(2Δ).
pub fn chibar_low_energy(p: &SystemParams) -> Complex64 {
    let d = p.detuning();
    let o2 = p.omega_rabi * p.omega_rabi;
    d / (2.0 * o2) - 1.0 / (2.0 * d)
}

/// Far-detuned form 1/(ω + 2Ω²/Δ).
pub fn chibar_far_detuned(p: &SystemParams, omega: f64) -> Result<Complex64> {
    let den = omega + 2.0 * p.omega_rabi * p.omega_rabi / p.detuning();
    if den.norm() == 0.0 {
        return Err(Error::Singular("w + 2 W^2/Delta = 0".into()));
    }
    Ok(1.0 / den)
}

/// Second-pole strength ζ = √|ω̄ α_B² / (ω̄_B α²)|, zero where ω̄ = 0.
pub fn zeta(omega_bar: Complex64, alpha: Complex64, alpha_b: Complex64, omega_bar_b: Complex64) -> f64 {
    if omega_bar.norm() == 0.0 || alpha_b.norm() == 0.0 {
        return 0.0;
    }
    (omega_bar * alpha_b * alpha_b / (omega_bar_b * alpha * alpha)).norm().sqrt()
}

/// ωΔ/2Ω² for γ = 0.
pub fn far_x(p: &SystemParams, omega: f64) -> f64 {
    omega * p.delta / (2.0 * p.omega_rabi * p.omega_rabi)
}

/// cKΔ/2g² for γ = 0.
pub fn far_y(p: &SystemParams, k: f64) -> f64 {
    p.c * k * p.delta / (2.0 * p.g * p.g)
}

pub fn omega_from_far_x(p: &SystemParams, x: f64) -> f64 {
    2.0 * p.omega_rabi * p.omega_rabi * x / p.delta
}

pub fn k_from_far_y(p: &SystemParams, y: f64) -> f64 {
    2.0 * p.g * p.g * y / (p.c * p.delta)
}

pub fn coeffs_low_energy(p: &SystemParams, k: f64, omega: f64, th: &Thresholds) -> RegimeCoefficients {
    let d = p.detuning();
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    let s3 = (g2 + o2).powi(3);
    let alpha = Complex64::from(g2 * g2 / ((g2 + o2) * (g2 + o2)));
    let omega_bar = Complex64::from(omega - p.group_velocity() * k);
    let w = omega - p.c * k;
    let alpha_b = -(w * w) * o2.powi(3) / (4.0 * d * d * s3);
    let cls = classify_regime(p, k, omega, th);
    let (omega_bar_b, zeta_v, at_pole) = if w == 0.0 {
        (Complex64::new(f64::INFINITY, 0.0), 0.0, true)
    } else {
        let ob = 4.0 * o2 * g2 * g2 * d * d / (s3 * w);
        (ob, zeta(omega_bar, alpha, alpha_b, ob), false)
    };
    RegimeCoefficients {
        chibar: chibar_low_energy(p),
        alpha,
        omega_bar,
        alpha_b,
        omega_bar_b,
        zeta: zeta_v,
        zeta_at_pole: at_pole,
        regime: Regime::LowEnergy,
        valid: cls.label.admits(Regime::LowEnergy),
        margins: cls.margins,
    }
}

pub fn coeffs_far_detuned(p: &SystemParams, k: f64, omega: f64, th: &Thresholds) -> Result<RegimeCoefficients> {
    let d = p.detuning();
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    let s3 = (g2 + o2).powi(3);
    let x = omega * d / (2.0 * o2);
    let y = p.c * k * d / (2.0 * g2);
    let one_y = 1.0 - y;
    if one_y.norm() == 0.0 {
        return Err(Error::Singular("cK Delta / 2g^2 = 1".into()));
    }
    let one_x = 1.0 + x;
    if one_x.norm() == 0.0 {
        return Err(Error::Singular("w Delta / 2W^2 = -1".into()));
    }
    let alpha = one_y / (one_x * one_x);
    let z = x / one_x - (1.0 + 2.0 * x) * y / one_x + y * y;
    let omega_bar = z * 2.0 * o2 / d;
    let ck = p.c * k;
    let w = omega - ck;
    let shift = 1.0 + ck / (2.0 * d);
    let alpha_b = -(o2.powi(3)) * shift * (w * w) / (4.0 * d * d * s3 * one_y * one_y);
    let (omega_bar_b, zeta_v, at_pole) = if w == 0.0 {
        (Complex64::new(f64::INFINITY, 0.0), 0.0, true)
    } else {
        let ob = -(shift * shift) * one_y * 4.0 * o2 * g2 * g2 / s3 * d * d / (ck - omega);
        (ob, zeta(omega_bar, alpha, alpha_b, ob), false)
    };
    let cls = classify_regime(p, k, omega, th);
    Ok(RegimeCoefficients {
        chibar: chibar_far_detuned(p, omega)?,
        alpha,
        omega_bar,
        alpha_b,
        omega_bar_b,
        zeta: zeta_v,
        zeta_at_pole: at_pole,
        regime: Regime::FarDetuned,
        valid: cls.label.admits(Regime::FarDetuned),
        margins: cls.margins,
    })
}

pub fn coeffs(p: &SystemParams, k: f64, omega: f64, regime: Regime, th: &Thresholds) -> Result<RegimeCoefficients> {
    match regime {
        Regime::LowEnergy => Ok(coeffs_low_energy(p, k, omega, th)),
        Regime::FarDetuned => coeffs_far_detuned(p, k, omega, th),
    }
}

/// Inverts ω̄(K, ω) for ω at fixed K (γ = 0).
pub fn omega_from_omega_bar(p: &SystemParams, k: f64, omega_bar: f64, regime: Regime) -> Result<f64> {
    if !p.is_lossless() {
        return Err(Error::RequiresLossless);
    }
    match regime {
        Regime::LowEnergy => Ok(omega_bar + p.group_velocity() * k),
        Regime::FarDetuned => {
            let y = far_y(p, k);
            let z = omega_bar * p.delta / (2.0 * p.omega_rabi * p.omega_rabi);
            let den = (1.0 - y) * (1.0 - y) - z;
            if den == 0.0 {
                return Err(Error::Singular("no finite w for this w_bar".into()));
            }
            Ok(omega_from_far_x(p, (z + y * (1.0 - y)) / den))
        }
    }
}

/// Ratio ψ_ee/ψ of the electric-field amplitude to the polariton wavefunction.
pub fn efield_ratio(p: &SystemParams, k: f64, omega: f64, regime: Regime) -> Result<Complex64> {
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    match regime {
        Regime::LowEnergy => Ok(Complex64::from(o2 / g2)),
        Regime::FarDetuned => {
            let d = p.detuning();
            let den = g2 - p.c * k * d / 2.0;
            if den.norm() == 0.0 {
                return Err(Error::Singular("g^2 - cK Delta/2 = 0".into()));
            }
            Ok((o2 + omega * d / 2.0) / den)
        }
    }
}

/// Coefficients from adiabatic elimination of the p-level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticCoefficients {
    /// αm/ħ²
    pub alpha_m: Complex64,
    pub chibar: Complex64,
    /// ω̄m/ħ
    pub omega_bar_m: Complex64,
    pub k: f64,
    pub omega: f64,
}

pub fn coeffs_adiabatic(p: &SystemParams, k: f64, omega: f64) -> Result<AdiabaticCoefficients> {
    let d = p.detuning();
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    let ck = p.c * k;
    let c2 = p.c * p.c;
    let sat = omega + 2.0 * o2 / d;
    if sat.norm() == 0.0 {
        return Err(Error::Singular("factor (w + 2 W^2/Delta) vanishes".into()));
    }
    let chan = omega - ck + 2.0 * g2 / d;
    if chan.norm() == 0.0 {
        return Err(Error::Singular("factor (w - cK + 2 g^2/Delta) vanishes".into()));
    }
    let lead = omega + (g2 + o2) / d;
    let alpha_m = g2 * o2 / (c2 * d * d) * (2.0 * lead - ck) / (sat * sat);
    let bracket = ck - 2.0 * lead;
    let num = 2.0 * omega * (o2 + g2) / d + omega * (omega - ck) - 2.0 * o2 * ck / d;
    let omega_bar_m = bracket * bracket * num / (4.0 * c2 * sat * chan);
    Ok(AdiabaticCoefficients { alpha_m, chibar: 1.0 / sat, omega_bar_m, k, omega })
}
