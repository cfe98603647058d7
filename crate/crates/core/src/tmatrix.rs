//! Even-channel Lippmann–Schwinger equation in momentum space,
//!
//! T(k, k′) = V(k, k′) + (1/2π) ∫₀^∞ dq V(k, q) T(q, k′)/(ε̃ − q² + i0),
//!
//! with V(k, q) = Ŵ(k − q) + Ŵ(k + q). The pole at q² = ε̃ is handled by
//! subtracting the on-shell value and adding the analytic principal value.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::numerics::{gauss_legendre, map_rule};
use crate::potential::{v_eff_fourier, ReducedPotential};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TMatrixConfig {
    /// Momentum cutoff Λ in units of 1/ξ.
    pub cutoff: f64,
    pub points_per_panel: usize,
    /// Widest panel allowed above the on-shell region.
    pub max_panel_width: f64,
    /// Finite regulator; zero selects principal-value subtraction.
    pub eta: f64,
    /// Allowed relative change of the on-shell element when the grid is doubled.
    pub refine_tol: f64,
    pub residual_tol: f64,
    pub unitarity_tol: f64,
}

impl Default for TMatrixConfig {
    fn default() -> Self {
        Self {
            cutoff: 40.0,
            points_per_panel: 12,
            max_panel_width: 4.0,
            eta: 0.0,
            refine_tol: 1e-4,
            residual_tol: 1e-10,
            unitarity_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TMatrixSolution {
    pub potential: ReducedPotential,
    pub energy: f64,
    /// √ε̃ for ε̃ > 0 and η = 0.
    pub k_on: Option<f64>,
    pub eta: f64,
    pub cutoff: f64,
    /// Quadrature nodes; with a pole the last entry is k_on itself.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Effective propagator weights G̃_j including 1/2π.
    prop: Vec<C>,
    pub t: DMatrix<C>,
    /// max|A T − V|/max|V| of the discretized system.
    pub residual: f64,
    /// ‖A‖₁‖A⁻¹‖₁ of the system matrix.
    pub condition: f64,
    pub near_singular: bool,
    /// Relative change of T(k_on, k_on) when the grid is doubled.
    pub refinement_change: Option<f64>,
}

/// Panel breakpoints: [0, k], [k, 2k], then geometric growth capped at the
/// maximum width up to Λ.
fn breakpoints(k_on: Option<f64>, cfg: &TMatrixConfig) -> Result<Vec<f64>> {
    let mut b = vec![0.0];
    if let Some(k) = k_on {
        if 2.0 * k >= cfg.cutoff {
            return Err(Error::Convergence(format!(
                "grid too coarse near the pole: k = {k} against cutoff {}",
                cfg.cutoff
            )));
        }
        b.push(k);
        b.push(2.0 * k);
    }
    let mut x = *b.last().unwrap();
    let mut width = if x > 0.0 { x } else { 0.25 };
    while x < cfg.cutoff {
        width = width.min(cfg.max_panel_width);
        x = (x + width).min(cfg.cutoff);
        if cfg.cutoff - x < 0.25 * width {
            x = cfg.cutoff;
        }
        b.push(x);
        width *= 2.0;
    }
    Ok(b)
}

fn grid(k_on: Option<f64>, cfg: &TMatrixConfig, points: usize) -> Result<Vec<(f64, f64)>> {
    let rule = gauss_legendre(points);
    let b = breakpoints(k_on, cfg)?;
    let mut out = Vec::new();
    for w in b.windows(2) {
        map_rule(&rule, w[0], w[1], &mut out);
    }
    Ok(out)
}

/// PV∫₀^Λ dq/(k² − q²) − iπ/(2k).
fn pole_integral(k: f64, cutoff: f64) -> C {
    C::new(((cutoff + k) / (cutoff - k)).ln() / (2.0 * k), -PI / (2.0 * k))
}

/// Nodes, weights and propagator weights G̃.
struct Discretization {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    prop: Vec<C>,
}

fn discretize(energy: f64, k_on: Option<f64>, cfg: &TMatrixConfig, points: usize) -> Result<Discretization> {
    let g = grid(k_on, cfg, points)?;
    let mut nodes: Vec<f64> = g.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = g.iter().map(|p| p.1).collect();
    let e = C::new(energy, cfg.eta);
    let mut prop: Vec<C> = g.iter().map(|&(q, w)| w / (e - q * q) / (2.0 * PI)).collect();
    if let Some(k) = k_on {
        let sum: C = g.iter().map(|&(q, w)| C::from(w / (energy - q * q))).sum();
        prop.push(-(sum - pole_integral(k, cfg.cutoff)) / (2.0 * PI));
        nodes.push(k);
        weights.push(0.0);
    }
    Ok(Discretization { nodes, weights, prop })
}

fn kernel(red: &ReducedPotential, k: f64, q: f64) -> f64 {
    // the regular check is done once by the caller
    v_eff_fourier(red, k - q).unwrap_or(0.0) + v_eff_fourier(red, k + q).unwrap_or(0.0)
}

fn kernel_matrix(red: &ReducedPotential, nodes: &[f64]) -> DMatrix<C> {
    let n = nodes.len();
    DMatrix::from_fn(n, n, |i, j| C::from(kernel(red, nodes[i], nodes[j])))
}

/// A = 1 − V G̃
fn system_matrix(v: &DMatrix<C>, prop: &[C]) -> DMatrix<C> {
    let n = prop.len();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C::from(id) - v[(i, j)] * prop[j]
    })
}

fn one_norm(m: &DMatrix<C>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn check_input(red: &ReducedPotential, energy: f64, cfg: &TMatrixConfig) -> Result<Option<f64>> {
    red.require_regular()?;
    if !energy.is_finite() {
        return Err(Error::InvalidParameter { name: "energy", reason: "not finite".into() });
    }
    if cfg.eta < 0.0 {
        return Err(Error::InvalidParameter { name: "eta", reason: "must be >= 0".into() });
    }
    if cfg.eta > 0.0 || energy < 0.0 {
        return Ok(None);
    }
    if energy == 0.0 {
        return Err(Error::OnShell);
    }
    Ok(Some(energy.sqrt()))
}

/// On-shell element alone, used for the refinement check.
fn onshell_element(red: &ReducedPotential, energy: f64, k: f64, cfg: &TMatrixConfig, points: usize) -> Result<C> {
    let d = discretize(energy, Some(k), cfg, points)?;
    let v = kernel_matrix(red, &d.nodes);
    let n = d.nodes.len();
    let a = system_matrix(&v, &d.prop);
    let rhs = DVector::from_fn(n, |i, _| v[(i, n - 1)]);
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::Singular("T-matrix system".into()))?;
    Ok(x[n - 1])
}

/// Solves the even-channel equation at reduced energy ε̃ for all grid columns.
pub fn solve_t(red: &ReducedPotential, energy: f64, cfg: &TMatrixConfig) -> Result<TMatrixSolution> {
    let k_on = check_input(red, energy, cfg)?;
    let d = discretize(energy, k_on, cfg, cfg.points_per_panel)?;
    let n = d.nodes.len();
    let v = kernel_matrix(red, &d.nodes);
    let a = system_matrix(&v, &d.prop);
    let inv = a.clone().lu().try_inverse().ok_or_else(|| Error::Singular("T-matrix system".into()))?;
    let t = &inv * &v;
    let vmax = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let residual = if vmax == 0.0 { 0.0 } else { (&a * &t - &v).iter().fold(0.0f64, |m, z| m.max(z.norm())) / vmax };
    let condition = one_norm(&a) * one_norm(&inv);
    let near_singular = !condition.is_finite() || condition > 1e12;
    if residual > cfg.residual_tol && !near_singular {
        return Err(Error::Convergence(format!("linear residual {residual:e}")));
    }
    let refinement_change = match k_on {
        Some(k) => {
            let fine = onshell_element(red, energy, k, cfg, 2 * cfg.points_per_panel)?;
            let coarse = t[(n - 1, n - 1)];
            let scale = fine.norm().max(1e-300);
            let change = if fine == coarse { 0.0 } else { (fine - coarse).norm() / scale };
            if change > cfg.refine_tol && !near_singular {
                return Err(Error::Convergence(format!("on-shell element changes by {change:e} on grid doubling")));
            }
            Some(change)
        }
        None => None,
    };
    Ok(TMatrixSolution {
        potential: *red,
        energy,
        k_on,
        eta: cfg.eta,
        cutoff: cfg.cutoff,
        nodes: d.nodes,
        weights: d.weights,
        prop: d.prop,
        t,
        residual,
        condition,
        near_singular,
        refinement_change,
    })
}

impl TMatrixSolution {
    /// T(k_on, k_on).
    pub fn on_shell(&self) -> Result<C> {
        if self.k_on.is_none() {
            return Err(Error::Config("no on-shell point: energy <= 0 or eta > 0".into()));
        }
        let n = self.nodes.len();
        Ok(self.t[(n - 1, n - 1)])
    }

    /// S = 1 − i T_on/(2k).
    pub fn smatrix(&self) -> Result<C> {
        let k = self.k_on.ok_or_else(|| Error::Config("no on-shell point".into()))?;
        Ok(C::from(1.0) - C::i() * self.on_shell()? / (2.0 * k))
    }

    /// T(q, k_on) at any q ≥ 0 through the Nyström interpolation formula.
    pub fn half_shell(&self, q: f64) -> Result<C> {
        let k = self.k_on.ok_or_else(|| Error::Config("no on-shell point".into()))?;
        let col = self.nodes.len() - 1;
        let sum: C = self
            .nodes
            .iter()
            .zip(&self.prop)
            .enumerate()
            .map(|(j, (&qj, &g))| kernel(&self.potential, q, qj) * g * self.t[(j, col)])
            .sum();
        Ok(kernel(&self.potential, q, k) + sum)
    }

    /// max|T − Tᵀ| relative to max|T|.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.t.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        (&self.t - self.t.transpose()).iter().fold(0.0f64, |m, z| m.max(z.norm())) / scale
    }
}

/// Even-channel phase φ = arg(S)/2 in (−π/2, π/2], with ψ ∝ cos(ku + φ).
pub fn onshell_phase(sol: &TMatrixSolution, unitarity_tol: f64) -> Result<f64> {
    let s = sol.smatrix()?;
    let dev = s.norm() - 1.0;
    if dev.abs() > unitarity_tol {
        return Err(Error::Unitarity(dev));
    }
    Ok(0.5 * s.arg())
}

/// Phase shift at momentum k.
pub fn phase_shift(red: &ReducedPotential, k: f64, cfg: &TMatrixConfig) -> Result<f64> {
    let sol = solve_t(red, k * k, cfg)?;
    onshell_phase(&sol, cfg.unitarity_tol)
}

/// Phase shifts over a set of momenta, solved in parallel.
pub fn phase_scan(red: &ReducedPotential, ks: &[f64], cfg: &TMatrixConfig) -> Vec<Result<(f64, f64)>> {
    ks.par_iter()
        .map(|&k| {
            let sol = solve_t(red, k * k, cfg)?;
            let phi = onshell_phase(&sol, cfg.unitarity_tol)?;
            Ok((phi, sol.smatrix()?.norm() - 1.0))
        })
        .collect()
}

/// On-shell V + V G₀ V with the same principal-value quadrature.
pub fn second_born(red: &ReducedPotential, k: f64, cfg: &TMatrixConfig) -> Result<C> {
    check_input(red, k * k, &TMatrixConfig { eta: 0.0, ..*cfg })?;
    let d = discretize(k * k, Some(k), &TMatrixConfig { eta: 0.0, ..*cfg }, cfg.points_per_panel)?;
    let v0 = kernel(red, k, k);
    let second: C = d.nodes.iter().zip(&d.prop).map(|(&q, &g)| kernel(red, k, q).powi(2) * g).sum();
    Ok(v0 + second)
}

/// Wavefunction samples at u = r/ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSample {
    pub u: f64,
    /// cos(k u) + ∫G T, normalized so that ψ → e^{iφ} cos(ku + φ).
    pub psi: C,
    /// (Wψ)(u)·u⁶/(σ s strength)
    pub psi_ss: C,
    /// W(u) too small for the reconstruction of ψ_ss.
    pub masked: bool,
}

/// Reconstructs ψ from the half-shell T-matrix through the free propagator, and
/// ψ_ss from the Fourier transform of Wψ = ∫ e^{iqu} T(q, k) dq/2π.
pub fn wavefunction_from_t(sol: &TMatrixSolution, us: &[f64]) -> Result<Vec<WaveSample>> {
    let k = sol.k_on.ok_or_else(|| Error::Config("wavefunction needs an on-shell solution".into()))?;
    let red = &sol.potential;
    let upper = sol.cutoff;
    // quadrature rule dense enough for cos(q u) up to the largest u
    let umax = us.iter().cloned().fold(1.0f64, f64::max);
    let width = (1.0 / umax).min(0.5);
    let rule = gauss_legendre(12);
    let mut b = vec![0.0, k];
    let mut x = k;
    while x < upper {
        x = (x + width).min(upper);
        b.push(x);
    }
    let mut pts = Vec::new();
    for w in b.windows(2) {
        map_rule(&rule, w[0], w[1], &mut pts);
    }
    let half: Vec<C> = pts.iter().map(|&(q, _)| sol.half_shell(q)).collect::<Result<_>>()?;
    let t_on = sol.on_shell()?;
    let l = pole_integral(k, upper);
    let norm = red.tail_coefficient();
    let w0 = red.value(0.0).abs();
    Ok(us
        .iter()
        .map(|&u| {
            let f_on = (k * u).cos() * t_on;
            let mut scat = f_on * l;
            let mut wpsi = C::from(0.0);
            for (&(q, w), &tq) in pts.iter().zip(&half) {
                let f = (q * u).cos() * tq;
                scat += (f - f_on) * (w / (k * k - q * q));
                wpsi += f * w;
            }
            let psi = C::from((k * u).cos()) + scat / (2.0 * PI);
            let wpsi = wpsi / (2.0 * PI);
            let masked = norm == 0.0 || red.value(u).abs() < 1e-14 * w0;
            let psi_ss = if masked { C::from(f64::NAN) } else { wpsi * u.powi(6) / norm };
            WaveSample { u, psi, psi_ss, masked }
        })
        .collect())
}
