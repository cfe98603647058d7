//! Tolerance and solver overrides given as `--tol key=value`.

use rydpol::schroedinger::{SolverConfig, SpectrumConfig};
use rydpol::tmatrix::TMatrixConfig;
use rydpol::Thresholds;

/// Where the strength of a self-consistent spectrum is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthAt {
    /// ξ/λ̄ at K = ω = 0.
    Origin,
    /// ξ/λ̄ at the deepest branch's own K = 0 solution.
    Bound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub thresholds: Thresholds,
    pub solver: SolverConfig,
    pub tmatrix: TMatrixConfig,
    pub damping: f64,
    pub max_iter: usize,
    pub spectrum_tol: f64,
    pub max_branches: usize,
    pub strength_at: StrengthAt,
    /// Fit grid extent in units of 1/ξ and its point count.
    pub fit_qmax: f64,
    pub fit_points: usize,
    /// Reference Δk·λ̄ for the collision phase column.
    pub dk_ref: f64,
    pub fail_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            solver: SolverConfig::default(),
            tmatrix: TMatrixConfig::default(),
            damping: 0.5,
            max_iter: 200,
            spectrum_tol: 1e-8,
            max_branches: 6,
            strength_at: StrengthAt::Origin,
            fit_qmax: 10.0,
            fit_points: 60,
            dk_ref: 0.1,
            fail_fraction: 0.05,
        }
    }
}

pub const KEYS: &[&str] = &[
    "regime_threshold",
    "dilute_threshold",
    "step",
    "u_max",
    "match_tol",
    "cutoff",
    "points_per_panel",
    "max_panel_width",
    "eta",
    "refine_tol",
    "unitarity_tol",
    "damping",
    "max_iter",
    "spectrum_tol",
    "max_branches",
    "strength_at",
    "fit_qmax",
    "fit_points",
    "dk_ref",
    "fail_fraction",
];

impl Settings {
    /// Applies one `key=value` override; errors name the offending key.
    pub fn apply(&mut self, item: &str) -> Result<(), String> {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("tolerance '{item}' must be key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        let real = || -> Result<f64, String> {
            let v: f64 = value.parse().map_err(|_| format!("tolerance key '{key}': bad value '{value}'"))?;
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(format!("tolerance key '{key}': value must be finite and >= 0"))
            }
        };
        let positive = || -> Result<f64, String> {
            let v = real()?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(format!("tolerance key '{key}': value must be > 0"))
            }
        };
        let count = || -> Result<usize, String> {
            match value.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(format!("tolerance key '{key}': expected a positive integer, got '{value}'")),
            }
        };
        match key {
            "regime_threshold" => self.thresholds.regime = positive()?,
            "dilute_threshold" => self.thresholds.dilute = positive()?,
            "step" => self.solver.step = positive()?,
            "u_max" => self.solver.u_max = positive()?,
            "match_tol" => self.solver.match_tol = positive()?,
            "cutoff" => self.tmatrix.cutoff = positive()?,
            "points_per_panel" => self.tmatrix.points_per_panel = count()?,
            "max_panel_width" => self.tmatrix.max_panel_width = positive()?,
            "eta" => self.tmatrix.eta = real()?,
            "refine_tol" => self.tmatrix.refine_tol = positive()?,
            "unitarity_tol" => self.tmatrix.unitarity_tol = positive()?,
            "damping" => {
                let d = positive()?;
                if d > 1.0 {
                    return Err(format!("tolerance key '{key}': damping must lie in (0, 1]"));
                }
                self.damping = d;
            }
            "max_iter" => self.max_iter = count()?,
            "spectrum_tol" => self.spectrum_tol = positive()?,
            "max_branches" => self.max_branches = count()?,
            "strength_at" => {
                self.strength_at = match value {
                    "origin" => StrengthAt::Origin,
                    "bound" => StrengthAt::Bound,
                    _ => return Err(format!("tolerance key '{key}': expected origin or bound")),
                }
            }
            "fit_qmax" => self.fit_qmax = positive()?,
            "fit_points" => self.fit_points = count()?,
            "dk_ref" => self.dk_ref = real()?,
            "fail_fraction" => self.fail_fraction = real()?,
            _ => return Err(format!("unknown tolerance key '{key}' (known: {})", KEYS.join(", "))),
        }
        Ok(())
    }

    pub fn spectrum(&self) -> SpectrumConfig {
        SpectrumConfig {
            solver: self.solver,
            damping: self.damping,
            max_iter: self.max_iter,
            tol: self.spectrum_tol,
            max_branches: self.max_branches,
            thresholds: self.thresholds,
        }
    }

    /// Key/value listing for metadata blocks, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("regime_threshold", self.thresholds.regime.to_string()),
            ("dilute_threshold", self.thresholds.dilute.to_string()),
            ("step", self.solver.step.to_string()),
            ("u_max", self.solver.u_max.to_string()),
            ("match_tol", self.solver.match_tol.to_string()),
            ("cutoff", self.tmatrix.cutoff.to_string()),
            ("points_per_panel", self.tmatrix.points_per_panel.to_string()),
            ("max_panel_width", self.tmatrix.max_panel_width.to_string()),
            ("eta", self.tmatrix.eta.to_string()),
            ("refine_tol", self.tmatrix.refine_tol.to_string()),
            ("unitarity_tol", self.tmatrix.unitarity_tol.to_string()),
            ("damping", self.damping.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("spectrum_tol", self.spectrum_tol.to_string()),
            ("max_branches", self.max_branches.to_string()),
            (
                "strength_at",
                match self.strength_at {
                    StrengthAt::Origin => "origin".into(),
                    StrengthAt::Bound => "bound".into(),
                },
            ),
            ("fit_qmax", self.fit_qmax.to_string()),
            ("fit_points", self.fit_points.to_string()),
            ("dk_ref", self.dk_ref.to_string()),
            ("fail_fraction", self.fail_fraction.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_errors() {
        let mut s = Settings::default();
        s.apply("regime_threshold=0.01").unwrap();
        s.apply(" strength_at = bound ").unwrap();
        assert_eq!(s.thresholds.regime, 0.01);
        assert_eq!(s.strength_at, StrengthAt::Bound);
        assert!(s.apply("bogus=1").unwrap_err().contains("'bogus'"));
        assert!(s.apply("step=-1").unwrap_err().contains("'step'"));
        assert!(s.apply("step").is_err());
        assert!(s.apply("damping=2").is_err());
        assert_eq!(s.entries().len(), KEYS.len());
    }
}
