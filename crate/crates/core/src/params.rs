//! Physical parameters, derived scales and regime classification.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;

use crate::regimes::{self, Regime};
use crate::{Error, Result};

/// Physical inputs. `gamma` is the p-level half-decay rate; the complex
/// detuning `Δ = δ − iγ` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g: f64,
    pub omega_rabi: f64,
    pub delta: f64,
    pub gamma: f64,
    pub c: f64,
    pub c6: f64,
}

impl SystemParams {
    pub fn new(g: f64, omega_rabi: f64, delta: f64, gamma: f64, c: f64, c6: f64) -> Result<Self> {
        let p = Self { g, omega_rabi, delta, gamma, c, c6 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.to_string() });
        let all = [self.g, self.omega_rabi, self.delta, self.gamma, self.c, self.c6];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("params", "all values must be finite");
        }
        if self.g <= 0.0 {
            return bad("g", "must be > 0");
        }
        if self.omega_rabi <= 0.0 {
            return bad("omega_rabi", "must be > 0");
        }
        if self.c <= 0.0 {
            return bad("c", "must be > 0");
        }
        if self.gamma < 0.0 {
            return bad("gamma", "must be >= 0");
        }
        if self.delta == 0.0 {
            return bad("delta", "must be nonzero");
        }
        if self.c6 == 0.0 {
            return bad("c6", "must be nonzero");
        }
        Ok(())
    }

    /// Complex detuning Δ = δ − iγ.
    pub fn detuning(&self) -> Complex64 {
        Complex64::new(self.delta, -self.gamma)
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma == 0.0
    }

    pub fn group_velocity(&self) -> f64 {
        let o2 = self.omega_rabi * self.omega_rabi;
        o2 / (o2 + self.g * self.g) * self.c
    }

    pub fn omega_c(&self) -> f64 {
        let d = self.detuning().norm();
        d.min(2.0 * self.omega_rabi * self.omega_rabi / d)
    }

    pub fn q_c(&self) -> f64 {
        self.omega_c() / self.group_velocity()
    }

    /// Polariton mass m = (g²+Ω²)³/(2c²g²ΔΩ²).
    pub fn mass(&self) -> Complex64 {
        let g2 = self.g * self.g;
        let o2 = self.omega_rabi * self.omega_rabi;
        let num = (g2 + o2).powi(3);
        num / (2.0 * self.c * self.c * g2 * o2 * self.detuning())
    }

    /// Parses a plain `key = value` file. Lines starting with `#` are comments.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 6] = [None; 6];
        const KEYS: [&str; 6] = ["g", "omega_rabi", "delta", "gamma", "c", "c6"];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
            let key = key.trim();
            let idx =
                KEYS.iter().position(|k| *k == key).ok_or_else(|| Error::Config(format!("unknown key '{key}'")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{}'", value.trim())))?;
            vals[idx] = Some(v);
        }
        let get = |i: usize| vals[i].ok_or_else(|| Error::Config(format!("missing key '{}'", KEYS[i])));
        let p = Self {
            g: get(0)?,
            omega_rabi: get(1)?,
            delta: get(2)?,
            gamma: vals[3].unwrap_or(0.0),
            c: get(4)?,
            c6: get(5)?,
        };
        p.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::Config(format!("key '{name}': {reason}")),
            other => other,
        })?;
        Ok(p)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_config_str(&text)
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "g = {}\nomega_rabi = {}\ndelta = {}\ngamma = {}\nc = {}\nc6 = {}\n",
            self.g, self.omega_rabi, self.delta, self.gamma, self.c, self.c6
        )
    }
}

/// Margin thresholds for the regime windows and the diluteness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub regime: f64,
    pub dilute: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { regime: 0.1, dilute: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    LowEnergy,
    FarDetuned,
    Both,
    Outside,
}

impl RegimeLabel {
    pub fn admits(self, regime: Regime) -> bool {
        matches!(
            (self, regime),
            (RegimeLabel::Both, _)
                | (RegimeLabel::LowEnergy, Regime::LowEnergy)
                | (RegimeLabel::FarDetuned, Regime::FarDetuned)
        )
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeLabel::LowEnergy => "low-energy",
            RegimeLabel::FarDetuned => "far-detuned",
            RegimeLabel::Both => "both",
            RegimeLabel::Outside => "outside",
        };
        f.write_str(s)
    }
}

/// Margin ratios |ω|/ω_c, |K|/q_c, Ω/|Δ|, |ω|/|Δ|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeMargins {
    pub omega_over_omega_c: f64,
    pub k_over_q_c: f64,
    pub rabi_over_detuning: f64,
    pub omega_over_detuning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: RegimeLabel,
    pub margins: RegimeMargins,
}

pub fn margins(p: &SystemParams, k: f64, omega: f64) -> RegimeMargins {
    let d = p.detuning().norm();
    RegimeMargins {
        omega_over_omega_c: omega.abs() / p.omega_c(),
        k_over_q_c: k.abs() / p.q_c(),
        rabi_over_detuning: p.omega_rabi / d,
        omega_over_detuning: omega.abs() / d,
    }
}

pub fn classify_regime(p: &SystemParams, k: f64, omega: f64, th: &Thresholds) -> Classification {
    let m = margins(p, k, omega);
    let low = m.omega_over_omega_c < th.regime && m.k_over_q_c < th.regime;
    let far = m.rabi_over_detuning < th.regime && m.omega_over_detuning < th.regime;
    let label = match (low, far) {
        (true, true) => RegimeLabel::Both,
        (true, false) => RegimeLabel::LowEnergy,
        (false, true) => RegimeLabel::FarDetuned,
        (false, false) => RegimeLabel::Outside,
    };
    Classification { label, margins: m }
}

/// Characteristic scales at a point (K, ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub v_g: f64,
    pub omega_c: f64,
    pub q_c: f64,
    pub m: Complex64,
    pub xi: f64,
    pub lambda_bar: f64,
    /// ξ/λ̄
    pub strength: f64,
    /// Optical depth per blockade radius; absent for γ = 0.
    pub kappa_xi: Option<f64>,
    pub r0: f64,
    pub chibar: Complex64,
    pub alpha: Complex64,
    /// Whether (K, ω) lies inside the window of the requested regime.
    pub in_window: bool,
}

pub fn derive_scales(p: &SystemParams, k: f64, omega: f64, regime: Regime, th: &Thresholds) -> Result<DerivedScales> {
    let coeffs = regimes::coeffs(p, k, omega, regime, th)?;
    scales_from(p, coeffs.chibar, coeffs.alpha, coeffs.valid)
}

pub(crate) fn scales_from(
    p: &SystemParams,
    chibar: Complex64,
    alpha: Complex64,
    in_window: bool,
) -> Result<DerivedScales> {
    if chibar.norm() == 0.0 {
        return Err(Error::ZeroCrossing);
    }
    let m = p.mass();
    let xi = (p.c6 * chibar).norm().powf(1.0 / 6.0);
    let am = alpha * m;
    if am.norm() == 0.0 {
        return Err(Error::Singular("alpha*m = 0".into()));
    }
    let lambda_bar = (chibar / am).norm().sqrt();
    let strength = xi / lambda_bar;
    let kappa_xi = (p.gamma > 0.0).then(|| 2.0 * xi * p.detuning().norm() / (lambda_bar * p.gamma));
    let r0 = xi.max((am * p.c6).norm().powf(0.25));
    Ok(DerivedScales {
        v_g: p.group_velocity(),
        omega_c: p.omega_c(),
        q_c: p.q_c(),
        m,
        xi,
        lambda_bar,
        strength,
        kappa_xi,
        r0,
        chibar,
        alpha,
        in_window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    /// sign(χ̄C₆) from the exact saturation susceptibility.
    pub s: Sign,
    pub chibar: f64,
    /// Potential is bounded everywhere (s = −1).
    pub regular: bool,
    /// χ̄ was evaluated with γ > 0 and only its real part entered the sign.
    pub lossy: bool,
}

pub fn validate_interaction(p: &SystemParams, omega: f64) -> Result<SingularityReport> {
    let chibar = regimes::chibar_full(p, omega)?;
    let s = Sign::of(chibar.re * p.c6);
    Ok(SingularityReport { s, chibar: chibar.re, regular: s == Sign::Minus, lossy: !p.is_lossless() })
}
