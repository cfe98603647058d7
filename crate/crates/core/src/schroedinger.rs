//! Relative-motion problem −ψ″ + W(u)ψ = ε̃ψ on the half-line with ψ′(0) = 0:
//! scattering length, phase shifts, bound states and the self-consistent
//! spectrum in which the potential depends on the pair energy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::numerics::{brent, gauss_legendre, integrate_adaptive, map_rule};
use crate::params::{derive_scales, scales_from, SystemParams, Thresholds};
use crate::potential::{reduce, Interaction, ReducedPotential};
use crate::regimes::{self, Regime, RegimeCoefficients};
use crate::{Error, Result};

/// An even potential in reduced units.
pub trait EvenPotential: Sync {
    fn at(&self, u: f64) -> f64;
}

impl EvenPotential for ReducedPotential {
    fn at(&self, u: f64) -> f64 {
        self.value(u)
    }
}

/// Barrier (height > 0) or well (height < 0) of half-width `half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWell {
    pub half_width: f64,
    pub height: f64,
}

impl SquareWell {
    /// Narrow well with the same integral ∫V du = `coupling` as g·δ(u).
    pub fn contact(coupling: f64, half_width: f64) -> Self {
        Self { half_width, height: coupling / (2.0 * half_width) }
    }

    /// Exact zero-energy scattering length.
    pub fn exact_scattering_length(&self) -> f64 {
        let b = self.half_width;
        if self.height > 0.0 {
            let k = self.height.sqrt();
            b - 1.0 / (k * (k * b).tanh())
        } else {
            let k = (-self.height).sqrt();
            b + 1.0 / (k * (k * b).tan())
        }
    }
}

impl EvenPotential for SquareWell {
    fn at(&self, u: f64) -> f64 {
        let d = u.abs() - self.half_width;
        if d.abs() <= 1e-9 * self.half_width {
            // midpoint value at the edge keeps the integrator second order
            0.5 * self.height
        } else if d < 0.0 {
            self.height
        } else {
            0.0
        }
    }
}

/// Step and matching radius of the fixed-step integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub step: f64,
    pub u_max: f64,
    /// Relative agreement required between matching at u_max and u_max/2.
    pub match_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { step: 1e-3, u_max: 30.0, match_tol: 1e-5 }
    }
}

impl SolverConfig {
    fn points(&self) -> usize {
        (self.u_max / self.step).round() as usize
    }
}

/// Potential tabulated on the integration grid.
struct Table {
    h: f64,
    w: Vec<f64>,
}

impl Table {
    fn new<P: EvenPotential + ?Sized>(pot: &P, cfg: &SolverConfig) -> Self {
        let n = cfg.points();
        let h = cfg.u_max / n as f64;
        Self { h, w: (0..=n).map(|i| pot.at(i as f64 * h)).collect() }
    }

    fn u_at(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Numerov integration up to grid index `end`; returns (ψ_{end−1}, ψ_end, nodes).
    fn shoot(&self, e: f64, end: usize, mut record: Option<&mut Vec<f64>>) -> (f64, f64, usize) {
        let h2 = self.h * self.h / 12.0;
        let f = |i: usize| self.w[i] - e;
        let mut prev = 1.0;
        let mut cur = (1.0 + 5.0 * h2 * f(0)) / (1.0 - h2 * f(1));
        if let Some(r) = record.as_deref_mut() {
            r.push(prev);
            r.push(cur);
        }
        let mut nodes = usize::from(cur * prev < 0.0);
        let mut scale = 1.0;
        for i in 1..end {
            let next = (2.0 * (1.0 + 5.0 * h2 * f(i)) * cur - (1.0 - h2 * f(i - 1)) * prev) / (1.0 - h2 * f(i + 1));
            if next * cur < 0.0 {
                nodes += 1;
            }
            prev = cur;
            cur = next;
            if cur.abs() > 1e150 {
                prev *= 1e-150;
                cur *= 1e-150;
                scale *= 1e150;
            }
            if let Some(r) = record.as_deref_mut() {
                r.push(cur * scale);
            }
        }
        (prev, cur, nodes)
    }

    fn last(&self) -> usize {
        self.w.len() - 1
    }
}

/// Even-parity solution at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub u: Vec<f64>,
    /// Normalized to max|ψ| = 1.
    pub psi: Vec<f64>,
    /// ψ′/ψ at the last grid point.
    pub log_derivative: f64,
    pub energy: f64,
}

pub fn solve_radial<P: EvenPotential + ?Sized>(pot: &P, energy: f64, cfg: &SolverConfig) -> RadialSolution {
    let t = Table::new(pot, cfg);
    let mut psi = Vec::with_capacity(t.w.len());
    t.shoot(energy, t.last(), Some(&mut psi));
    let n = psi.len();
    let d = (psi[n - 1] - psi[n - 2]) / t.h;
    let log_derivative = d / psi[n - 1];
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in psi.iter_mut() {
        *v /= peak;
    }
    RadialSolution { u: (0..n).map(|i| t.u_at(i)).collect(), psi, log_derivative, energy }
}

/// ∫_U^∞ f(u) du via u = U/t on (0, 1].
fn tail_integral<F: Fn(f64) -> f64>(f: F, cut: f64) -> Result<f64> {
    let g = |t: f64| if t == 0.0 { 0.0 } else { f(cut / t) * cut / (t * t) };
    integrate_adaptive(&g, 0.0, 1.0, 1e-16)
}

/// Zero-energy scattering length (reduced units, ψ ∝ u − a) when matching at `end`.
fn scattering_length_at<P: EvenPotential + ?Sized>(pot: &P, t: &Table, end: usize) -> Result<(f64, usize)> {
    let (prev, cur, nodes) = t.shoot(0.0, end, None);
    let slope = cur - prev;
    if slope == 0.0 {
        return Err(Error::Convergence("zero slope at matching radius".into()));
    }
    let cut = t.u_at(end);
    let a = cut - cur * t.h / slope;
    let nodes = nodes + usize::from(a > cut);
    // first-order variable-phase correction da/du = W (u − a)²
    let rule = gauss_legendre(24);
    let mut pts = Vec::new();
    map_rule(&rule, 0.0, 1.0, &mut pts);
    let corr: f64 = pts
        .iter()
        .map(|&(s, w)| {
            let u = cut / s;
            w * pot.at(u) * (u - a).powi(2) * cut / (s * s)
        })
        .sum();
    Ok((a + corr, nodes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    /// a₁D/ξ
    pub a_reduced: f64,
    /// a₁D/λ̄ (for a ReducedPotential; equals a_reduced·ξ/λ̄)
    pub a_over_lambda: f64,
    /// Bound states implied by the zero-energy node count.
    pub n_bound: usize,
    /// |a(u_max) − a(u_max/2)| relative to max(|a|, 1).
    pub error_estimate: f64,
}

pub fn scattering_length_generic<P: EvenPotential + ?Sized>(pot: &P, cfg: &SolverConfig) -> Result<(f64, usize, f64)> {
    let t = Table::new(pot, cfg);
    let (a, nodes) = scattering_length_at(pot, &t, t.last())?;
    let (a_half, _) = scattering_length_at(pot, &t, t.last() / 2)?;
    let err = (a - a_half).abs() / a.abs().max(1.0);
    if !a.is_finite() || err > cfg.match_tol {
        return Err(Error::Convergence(format!(
            "scattering length not converged in u_max: a = {a}, a(u_max/2) = {a_half}"
        )));
    }
    Ok((a, nodes, err))
}

pub fn scattering_length(red: &ReducedPotential, cfg: &SolverConfig) -> Result<ScatteringResult> {
    red.require_regular()?;
    let (a, n_bound, err) = scattering_length_generic(red, cfg)?;
    Ok(ScatteringResult { a_reduced: a, a_over_lambda: a * red.ratio(), n_bound, error_estimate: err })
}

/// Phase θ with ψ ∝ cos(θ) from two samples at u_N − h and u_N.
fn match_phase(prev: f64, cur: f64, k: f64, h: f64) -> f64 {
    let (s, c) = (k * h).sin_cos();
    let a_sin = (prev - cur * c) / s;
    a_sin.atan2(cur)
}

fn wrap_half_pi(x: f64) -> f64 {
    let mut y = x.rem_euclid(PI);
    if y > PI / 2.0 {
        y -= PI;
    }
    y
}

/// Even-channel phase shift φ with ψ ∝ cos(ku + φ) at large u; φ ∈ (−π/2, π/2].
pub fn phase_shift_generic<P: EvenPotential + ?Sized>(pot: &P, k: f64, cfg: &SolverConfig) -> Result<f64> {
    if k <= 0.0 {
        return Err(Error::Config("phase shift needs k > 0".into()));
    }
    let t = Table::new(pot, cfg);
    let end = t.last();
    let (prev, cur, _) = t.shoot(k * k, end, None);
    let cut = t.u_at(end);
    let theta = match_phase(prev, cur, k, t.h);
    let phi0 = theta - k * cut;
    // dφ/du = −W cos²(ku + φ)/k beyond the matching radius
    let tail = tail_integral(|u| pot.at(u) * (k * u + phi0).cos().powi(2), cut)?;
    let phi = phi0 - tail / k;
    if !phi.is_finite() {
        return Err(Error::Convergence(format!("phase matching failed at k = {k}")));
    }
    Ok(wrap_half_pi(phi))
}

pub fn phase_shift(red: &ReducedPotential, k: f64, cfg: &SolverConfig) -> Result<f64> {
    red.require_regular()?;
    phase_shift_generic(red, k, cfg)
}

/// Node count at energy e < 0, including a node beyond the matching radius,
/// and the sign-carrying coefficient of the growing exponential.
fn count_and_growth(t: &Table, e: f64) -> (usize, f64) {
    let kappa = (-e).sqrt();
    let (prev, cur, nodes) = t.shoot(e, t.last(), None);
    let x = kappa * t.h;
    let sh = 2.0 * x.sinh();
    let a = (cur * x.exp() - prev) / sh;
    let b = (prev - cur * (-x).exp()) / sh;
    let extra = a != 0.0 && -b / a > 1.0;
    let rho = a.hypot(b).max(1e-300);
    (nodes + usize::from(extra), a / rho)
}

/// All even bound-state energies, deepest first.
pub fn bound_states_frozen(red: &ReducedPotential, cfg: &SolverConfig) -> Result<Vec<f64>> {
    red.require_regular()?;
    if red.interaction() == Interaction::Repulsive {
        return Ok(Vec::new());
    }
    let t = Table::new(red, cfg);
    let (_, total) = scattering_length_at(red, &t, t.last()).unwrap_or((0.0, 0));
    let floor = -red.strength;
    let top = -1e-13 * red.strength.max(1.0);
    let total = total.max(count_and_growth(&t, top).0);
    (0..total)
        .map(|n| eigenvalue(&t, n, floor, top))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Energy of the n-th even state, or `None` if it is absent.
pub fn bound_state(red: &ReducedPotential, n: usize, cfg: &SolverConfig) -> Result<Option<f64>> {
    red.require_regular()?;
    if red.interaction() == Interaction::Repulsive {
        return Ok(None);
    }
    let t = Table::new(red, cfg);
    eigenvalue(&t, n, -red.strength, -1e-13 * red.strength.max(1.0))
}

fn eigenvalue(t: &Table, n: usize, floor: f64, top: f64) -> Result<Option<f64>> {
    let (c_top, _) = count_and_growth(t, top);
    if c_top <= n {
        return Ok(None);
    }
    let mut lo = floor;
    let mut hi = top;
    let mut c_lo = count_and_growth(t, lo).0;
    let mut c_hi = c_top;
    if c_lo > n {
        return Err(Error::Convergence("states below the potential minimum".into()));
    }
    for _ in 0..200 {
        if c_lo == n && c_hi == n + 1 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let c = count_and_growth(t, mid).0;
        if c <= n {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    if !(c_lo == n && c_hi == n + 1) {
        return Err(Error::Convergence(format!("could not isolate state {n}")));
    }
    brent(|e| count_and_growth(t, e).1, lo, hi, 1e-14 * floor.abs()).map(Some)
}

/// Analytic continuation of the weak-coupling law a₁D = (3/π)(−χ̄⁵/C₆)^{1/6}/(αm).
///
/// The sixth root is taken as χ̄·(−1/(C₆χ̄))^{1/6}, the branch that reduces to
/// (3/π)χ̄/(αmξ) for γ = 0 in both signs of χ̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuedLength {
    pub value: Complex64,
    /// Argument of the sixth root lies on the negative real axis.
    pub on_branch_cut: bool,
}

pub fn continued_a1d_weak(p: &SystemParams, coeffs: &RegimeCoefficients) -> ContinuedLength {
    let arg = -1.0 / (p.c6 * coeffs.chibar);
    let on_branch_cut = arg.im.abs() <= 1e-8 * arg.norm() && arg.re < 0.0;
    let root = coeffs.chibar * arg.powf(1.0 / 6.0);
    let value = 3.0 / PI * root / (coeffs.alpha * p.mass());
    ContinuedLength { value, on_branch_cut }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    /// ξ/λ̄
    pub ratio: f64,
    pub result: std::result::Result<ScatteringResult, Error>,
    /// A divergence of a₁D lies between this point and the previous one.
    pub resonance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub kind: Interaction,
    pub points: Vec<ScanPoint>,
    /// Indices i with a divergence between points i−1 and i.
    pub divergences: Vec<usize>,
    /// Indices i with a continuous sign change of a₁D between i−1 and i.
    pub zero_crossings: Vec<usize>,
}

/// a₁D/λ̄ over a grid of ξ/λ̄ values.
pub fn scan_scattering_length(ratios: &[f64], kind: Interaction, cfg: &SolverConfig) -> ScanResult {
    let results: Vec<_> =
        ratios.par_iter().map(|&t| scattering_length(&ReducedPotential::from_ratio(t, kind), cfg)).collect();
    let mut points: Vec<ScanPoint> =
        ratios.iter().zip(results).map(|(&ratio, result)| ScanPoint { ratio, result, resonance: false }).collect();
    let mut divergences = Vec::new();
    let mut zero_crossings = Vec::new();
    for i in 1..points.len() {
        let (Ok(a), Ok(b)) = (&points[i - 1].result, &points[i].result) else { continue };
        let flipped = a.a_over_lambda.signum() != b.a_over_lambda.signum();
        // a divergence comes with a new bound state; one without a sign
        // change implies a zero crossing in the same interval
        let diverged = a.n_bound != b.n_bound;
        if diverged {
            divergences.push(i);
            points[i].resonance = true;
        }
        if flipped != diverged {
            zero_crossings.push(i);
        }
    }
    ScanResult { kind, points, divergences, zero_crossings }
}

/// Settings for the self-consistent spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub solver: SolverConfig,
    pub damping: f64,
    pub max_iter: usize,
    /// Residual target in units of ω_c.
    pub tol: f64,
    pub max_branches: usize,
    pub thresholds: Thresholds,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            damping: 0.5,
            max_iter: 200,
            tol: 1e-8,
            max_branches: 6,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub n: usize,
    pub reduced_energy: f64,
    pub omega: f64,
    pub k: f64,
    pub group_velocity: Option<f64>,
    /// |ω̄(K, ω_n) − ε̃_n/(mξ²)|
    pub residual: f64,
    /// ξ/λ̄ at the solution point.
    pub strength: f64,
}

/// Evaluation of the self-consistency problem at one pair energy.
struct Frozen {
    omega_bar: f64,
    /// ε̃_n/(mξ²), zero when the state is absent.
    target: f64,
    reduced_energy: Option<f64>,
    strength: f64,
}

fn frozen_at(p: &SystemParams, k: f64, omega: f64, regime: Regime, n: usize, cfg: &SpectrumConfig) -> Result<Frozen> {
    let coeffs = regimes::coeffs(p, k, omega, regime, &cfg.thresholds)?;
    let scales = scales_from(p, coeffs.chibar, coeffs.alpha, coeffs.valid)?;
    let red = reduce(p, &scales)?;
    let e = bound_state(&red, n, &cfg.solver)?;
    let mxi2 = scales.m.re * scales.xi * scales.xi;
    Ok(Frozen {
        omega_bar: coeffs.omega_bar.re,
        target: e.unwrap_or(0.0) / mxi2,
        reduced_energy: e,
        strength: scales.strength,
    })
}

/// Interval of ω on which bound states of the given regime can live.
fn omega_window(p: &SystemParams, k: f64, regime: Regime) -> Result<(f64, f64)> {
    let edge = regimes::omega_from_omega_bar(p, k, 0.0, regime)?;
    match regime {
        Regime::LowEnergy => Ok((edge, edge)),
        Regime::FarDetuned => {
            let floor = regimes::omega_from_far_x(p, -1.0);
            Ok((floor, edge))
        }
    }
}

fn solve_branch(
    p: &SystemParams,
    k: f64,
    regime: Regime,
    n: usize,
    cfg: &SpectrumConfig,
    start: Option<f64>,
) -> Result<Option<BoundState>> {
    let omega_c = p.omega_c();
    let finish = |omega: f64| -> Result<Option<BoundState>> {
        let f = frozen_at(p, k, omega, regime, n, cfg)?;
        let Some(e) = f.reduced_energy else { return Ok(None) };
        Ok(Some(BoundState {
            n,
            reduced_energy: e,
            omega,
            k,
            group_velocity: None,
            residual: (f.omega_bar - f.target).abs(),
            strength: f.strength,
        }))
    };
    if regime == Regime::LowEnergy {
        // coefficients do not depend on ω here
        let f = frozen_at(p, k, 0.0, regime, n, cfg)?;
        if f.reduced_energy.is_none() {
            return Ok(None);
        }
        let omega = regimes::omega_from_omega_bar(p, k, f.target, regime)?;
        return finish(omega);
    }
    let (floor, edge) = omega_window(p, k, regime)?;
    let inside = |w: f64| {
        let lo = floor.min(edge);
        let hi = floor.max(edge);
        let margin = 1e-9 * (hi - lo);
        w.clamp(lo + margin, hi - margin)
    };
    let residual = |w: f64| -> f64 {
        match frozen_at(p, k, w, regime, n, cfg) {
            Ok(f) => (f.omega_bar - f.target) / omega_c,
            Err(_) => f64::NAN,
        }
    };
    // damped fixed point ω ← (1−d)ω + d·ω(ω̄ = ε̃_n/(mξ²)), Brent does the rest
    let mut w = inside(start.unwrap_or(edge));
    let mut history = Vec::new();
    let mut last_step = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let f = frozen_at(p, k, w, regime, n, cfg)?;
        if f.reduced_energy.is_none() {
            break;
        }
        let phi = inside(regimes::omega_from_omega_bar(p, k, f.target, regime)?);
        let next = inside((1.0 - cfg.damping) * w + cfg.damping * phi);
        history.push((f.omega_bar - f.target).abs() / omega_c);
        let step = (next - w).abs();
        w = next;
        // hand over to the bracketing stage once close or when contraction is poor
        if step <= 1e-7 * omega_c || (history.len() > 4 && step > 0.5 * last_step) {
            break;
        }
        last_step = step;
    }
    let polish = |lo: f64, hi: f64| brent(residual, lo, hi, 1e-11 * omega_c);
    if !history.is_empty() {
        // bracket around the iterate and polish
        let mut d = (0.5 * last_step.min((edge - floor).abs())).max(1e-9 * (edge - floor).abs());
        for _ in 0..40 {
            let lo = inside(w - d);
            let hi = inside(w + d);
            let (rl, rh) = (residual(lo), residual(hi));
            if rl.is_finite() && rh.is_finite() && rl.signum() != rh.signum() {
                let root = polish(lo, hi)?;
                if let Some(bs) = finish(root)? {
                    if bs.residual < cfg.tol * omega_c {
                        return Ok(Some(bs));
                    }
                }
                break;
            }
            d *= 2.0;
            if d > (edge - floor).abs() {
                break;
            }
        }
    }
    // fallback: scan the window for a sign change of the residual
    let samples = 48;
    let s_at = |j: usize| 1e-6f64.powf(1.0 - j as f64 / samples as f64);
    let omega_at = |s: f64| inside(floor + (edge - floor) * s);
    let mut prev: Option<(f64, f64)> = None;
    for j in 0..=samples {
        let wj = omega_at(s_at(j));
        let rj = residual(wj);
        if let Some((wp, rp)) = prev {
            if rj.is_finite() && rp.is_finite() && rj.signum() != rp.signum() {
                let root = polish(wp, wj)?;
                if let Some(bs) = finish(root)? {
                    if bs.residual < cfg.tol * omega_c {
                        return Ok(Some(bs));
                    }
                }
            }
        }
        prev = Some((wj, rj));
    }
    if history.len() == cfg.max_iter {
        return Err(Error::Convergence(format!(
            "branch {n} at K = {k}: no convergence, residual history {:?}",
            &history[history.len().saturating_sub(5)..]
        )));
    }
    Ok(None)
}

/// Self-consistent bound states at total momentum K; each branch carries
/// its group velocity from a central difference in K.
pub fn self_consistent_spectrum(
    p: &SystemParams,
    k: f64,
    regime: Regime,
    cfg: &SpectrumConfig,
) -> Result<Vec<BoundState>> {
    if !p.is_lossless() {
        return Err(Error::RequiresLossless);
    }
    let dk = 1e-4 * p.q_c();
    let mut out = Vec::new();
    for n in 0..cfg.max_branches {
        let Some(mut bs) = solve_branch(p, k, regime, n, cfg, None)? else { break };
        let plus = solve_branch(p, k + dk, regime, n, cfg, Some(bs.omega))?;
        let minus = solve_branch(p, k - dk, regime, n, cfg, Some(bs.omega))?;
        if let (Some(a), Some(b)) = (plus, minus) {
            bs.group_velocity = Some((a.omega - b.omega) / (2.0 * dk));
        }
        out.push(bs);
    }
    Ok(out)
}

/// Rescales C₆ so that ξ/λ̄ at (K, ω) = (0, 0) equals `ratio`.
pub fn with_origin_strength(p: &SystemParams, ratio: f64, regime: Regime, th: &Thresholds) -> Result<SystemParams> {
    let sc = derive_scales(p, 0.0, 0.0, regime, th)?;
    let c6 = p.c6 * (ratio / sc.strength).powi(6);
    SystemParams::new(p.g, p.omega_rabi, p.delta, p.gamma, p.c, c6)
}

/// Rescales C₆ so that ξ/λ̄ evaluated at the self-consistent K = 0 solution of
/// branch `n` equals `ratio`. Returns the parameters and that solution's ω.
pub fn with_bound_state_strength(
    p: &SystemParams,
    ratio: f64,
    n: usize,
    regime: Regime,
    cfg: &SpectrumConfig,
) -> Result<(SystemParams, f64)> {
    let red = ReducedPotential::from_ratio(ratio, Interaction::Attractive);
    let e = bound_state(&red, n, &cfg.solver)?
        .ok_or_else(|| Error::Convergence(format!("no state {n} at strength {ratio}")))?
        / red.strength;
    // ω̄(0, ω)·m·λ̄(ω)² = ε̃_n/strength fixes ω independently of C₆
    let th = cfg.thresholds;
    let g = |w: f64| -> f64 {
        match regimes::coeffs(p, 0.0, w, regime, &th) {
            Ok(c) => {
                let ml2 = p.mass().re.signum() * (c.chibar / c.alpha).norm();
                c.omega_bar.re * ml2 - e
            }
            Err(_) => f64::NAN,
        }
    };
    let omega = match regime {
        Regime::LowEnergy => {
            let c = regimes::coeffs_low_energy(p, 0.0, 0.0, &th);
            e / (p.mass().re.signum() * (c.chibar / c.alpha).norm())
        }
        Regime::FarDetuned => {
            let (floor, edge) = omega_window(p, 0.0, regime)?;
            let lo = floor + 1e-12 * (edge - floor);
            brent(g, lo, edge, 1e-15 * p.omega_c())?
        }
    };
    let c = regimes::coeffs(p, 0.0, omega, regime, &th)?;
    let lam2 = (c.chibar / (c.alpha * p.mass())).norm();
    let xi6 = (ratio * ratio * lam2).powi(3);
    let c6 = p.c6.signum() * xi6 / c.chibar.norm();
    Ok((SystemParams::new(p.g, p.omega_rabi, p.delta, p.gamma, p.c, c6)?, omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn weak_coupling_laws() {
        for &t in &[0.05, 0.1] {
            let law = 3.0 / PI / t;
            let rep = scattering_length(&ReducedPotential::from_ratio(t, Interaction::Repulsive), &cfg()).unwrap();
            let att = scattering_length(&ReducedPotential::from_ratio(t, Interaction::Attractive), &cfg()).unwrap();
            assert_relative_eq!(rep.a_over_lambda, -law, max_relative = 0.05);
            assert_relative_eq!(att.a_over_lambda, law, max_relative = 0.05);
        }
    }

    #[test]
    fn contact_oracle() {
        for &g in &[0.5, 1.0, -0.7] {
            let well = SquareWell::contact(g, 1e-2);
            let (a, _, _) = scattering_length_generic(&well, &cfg()).unwrap();
            assert_relative_eq!(a, -2.0 / g, max_relative = 0.01);
        }
    }

    #[test]
    fn square_well_exact() {
        let well = SquareWell { half_width: 1.0, height: 0.8 };
        let (a, _, _) = scattering_length_generic(&well, &cfg()).unwrap();
        assert_relative_eq!(a, well.exact_scattering_length(), max_relative = 1e-5);
        let well = SquareWell { half_width: 1.0, height: -0.8 };
        let (a, _, _) = scattering_length_generic(&well, &cfg()).unwrap();
        assert_relative_eq!(a, well.exact_scattering_length(), max_relative = 1e-5);
    }

    #[test]
    fn free_phase_is_zero() {
        let free = SquareWell { half_width: 0.0, height: 0.0 };
        for &k in &[0.01, 0.5, 3.0] {
            assert!(phase_shift_generic(&free, k, &cfg()).unwrap().abs() < 1e-7);
        }
    }

    #[test]
    fn delta_phase_shift() {
        let g = 0.6;
        let well = SquareWell::contact(g, 1e-2);
        let k = 0.4;
        let phi = phase_shift_generic(&well, k, &cfg()).unwrap();
        assert_relative_eq!(phi.tan(), -g / (2.0 * k), max_relative = 5e-3);
    }

    #[test]
    fn low_momentum_phase_matches_scattering_length() {
        let red = ReducedPotential::from_ratio(0.7, Interaction::Repulsive);
        let a = scattering_length(&red, &cfg()).unwrap().a_reduced;
        let k = 1e-3;
        let phi = phase_shift(&red, k, &SolverConfig { u_max: 60.0, ..cfg() }).unwrap();
        assert_relative_eq!(k * phi.tan(), 1.0 / a, max_relative = 0.02);
    }

    #[test]
    fn born_phase_is_odd_in_potential_sign() {
        let red = ReducedPotential::from_ratio(0.02, Interaction::Attractive);
        let a = phase_shift(&red, 0.5, &cfg()).unwrap();
        let b = phase_shift(&red.flipped(), 0.5, &cfg()).unwrap();
        assert!((a + b).abs() < 1e-3 * a.abs());
    }

    #[test]
    fn bound_state_counts() {
        let count =
            |t: f64| bound_states_frozen(&ReducedPotential::from_ratio(t, Interaction::Attractive), &cfg()).unwrap();
        assert_eq!(count(0.5).len(), 1);
        assert_eq!(count(5.0).len(), 2);
        let e = count(0.1);
        assert_eq!(e.len(), 1);
        assert_relative_eq!(e[0], -(PI / 3.0).powi(2) * 0.1f64.powi(4), max_relative = 0.1);
        let e = count(8.0);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn node_theorem() {
        for i in 0..12 {
            let t = 0.3 + 0.7 * i as f64;
            let red = ReducedPotential::from_ratio(t, Interaction::Attractive);
            let states = bound_states_frozen(&red, &cfg()).unwrap();
            let zero = scattering_length(&red, &cfg()).unwrap();
            assert_eq!(states.len(), zero.n_bound, "t = {t}");
        }
    }

    #[test]
    fn repulsive_has_no_bound_states() {
        let red = ReducedPotential::from_ratio(3.0, Interaction::Repulsive);
        assert!(bound_states_frozen(&red, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn continued_length_reduces_to_weak_law() {
        let th = Thresholds::default();
        // Ω > δ with C₆δ > 0: repulsive
        let p = SystemParams::new(1.0, 2.0, 1.0, 0.0, 1.0, 1e-3).unwrap();
        let c = regimes::coeffs_low_energy(&p, 0.0, 0.0, &th);
        let sc = derive_scales(&p, 0.0, 0.0, Regime::LowEnergy, &th).unwrap();
        assert_eq!(reduce(&p, &sc).unwrap().interaction(), Interaction::Repulsive);
        let a = continued_a1d_weak(&p, &c);
        let law = 3.0 / PI * sc.lambda_bar * sc.lambda_bar / sc.xi;
        assert!(!a.on_branch_cut);
        assert_relative_eq!(a.value.re, -law, max_relative = 1e-13);
        assert_eq!(a.value.im, 0.0);
        // far detuned with C₆δ < 0: attractive, positive length
        let p = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4).unwrap();
        let c = regimes::coeffs_far_detuned(&p, 0.0, 0.0, &th).unwrap();
        let sc = derive_scales(&p, 0.0, 0.0, Regime::FarDetuned, &th).unwrap();
        let a = continued_a1d_weak(&p, &c);
        assert_relative_eq!(a.value.re, 3.0 / PI * sc.lambda_bar.powi(2) / sc.xi, max_relative = 1e-13);
        // singular sign: the sixth root sits on its branch cut
        let q = SystemParams { c6: 1e-4, ..p };
        assert!(continued_a1d_weak(&q, &c).on_branch_cut);
    }

    #[test]
    fn continued_length_with_loss() {
        let th = Thresholds::default();
        let base = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4).unwrap();
        let a0 = continued_a1d_weak(&base, &regimes::coeffs_far_detuned(&base, 0.0, 0.0, &th).unwrap()).value;
        let mut last = f64::INFINITY;
        for &g in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let p = SystemParams { gamma: g, ..base };
            let a = continued_a1d_weak(&p, &regimes::coeffs_far_detuned(&p, 0.0, 0.0, &th).unwrap()).value;
            assert!(a.im != 0.0);
            let d = (a.norm() - a0.norm()).abs();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-3 * a0.norm());
    }
}
