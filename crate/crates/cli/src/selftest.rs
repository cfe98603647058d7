//! Quick internal consistency checks run by `--self-test`.

use std::f64::consts::PI;

use rydpol::manybody::pseudo_coupling;
use rydpol::modes::{default_qgrid, fit_three_term};
use rydpol::params::{derive_scales, Sign};
use rydpol::regimes::{
    chibar_full, coeffs_adiabatic, coeffs_far_detuned, coeffs_low_energy, k_from_far_y, omega_from_far_x,
};
use rydpol::schroedinger::{
    bound_states_frozen, phase_shift, scan_scattering_length, scattering_length, scattering_length_generic,
    self_consistent_spectrum, with_bound_state_strength, SolverConfig, SpectrumConfig, SquareWell,
};
use rydpol::tmatrix::{onshell_phase, solve_t, TMatrixConfig};
use rydpol::{Interaction, ReducedPotential, Regime, SystemParams, Thresholds};

use crate::studies::phase_distance;

/// Test-only perturbations that must make at least one check fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hooks {
    /// Scales the mass used when converting a₁D back to a contact coupling.
    pub mass_scale: f64,
}

impl Default for Hooks {
    fn default() -> Self {
        Self { mass_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn a_red(t: f64, kind: Interaction, cfg: &SolverConfig) -> rydpol::Result<f64> {
    scattering_length(&ReducedPotential::from_ratio(t, kind), cfg).map(|r| r.a_over_lambda)
}

fn weak_coupling(cfg: &SolverConfig) -> rydpol::Result<Check> {
    let mut worst: f64 = 0.0;
    for t in [0.05, 0.1] {
        let law = 3.0 / PI / t;
        worst = worst.max(rel(a_red(t, Interaction::Attractive, cfg)?, law));
        worst = worst.max(rel(a_red(t, Interaction::Repulsive, cfg)?, -law));
    }
    Ok(check("weak coupling law", worst < 0.05, format!("max relative error {worst:.3e}")))
}

fn strong_repulsion(cfg: &SolverConfig) -> rydpol::Result<Check> {
    let t: f64 = 5.0;
    // (αmC₆)^{1/4} = λ̄ (ξ/λ̄)^{3/2}
    let reference = 0.7 * t.powf(1.5);
    let e = rel(a_red(t, Interaction::Repulsive, cfg)?, reference);
    Ok(check("strong repulsion", e < 0.1, format!("relative deviation {e:.3e}")))
}

fn repulsive_scan(cfg: &SolverConfig) -> Check {
    let ratios: Vec<f64> = (0..40).map(|i| 0.05 * (8.0f64 / 0.05).powf(i as f64 / 39.0)).collect();
    let scan = scan_scattering_length(&ratios, Interaction::Repulsive, cfg);
    let failed = scan.points.iter().filter(|p| p.result.is_err()).count();
    check(
        "single zero crossing",
        scan.zero_crossings.len() == 1 && scan.divergences.is_empty() && failed == 0,
        format!("{} crossings, {} divergences", scan.zero_crossings.len(), scan.divergences.len()),
    )
}

fn bound_counts(cfg: &SolverConfig) -> rydpol::Result<Check> {
    let n =
        |t: f64| bound_states_frozen(&ReducedPotential::from_ratio(t, Interaction::Attractive), cfg).map(|v| v.len());
    let (a, b) = (n(0.5)?, n(5.0)?);
    Ok(check("bound-state counts", a == 1 && b >= 2, format!("{a} at 0.5, {b} at 5")))
}

fn delta_oracle(cfg: &SolverConfig, hooks: &Hooks) -> rydpol::Result<Check> {
    let mass = 4.0;
    let mut worst: f64 = 0.0;
    for g in [0.8, -0.6] {
        let well = SquareWell::contact(g, 1e-2);
        let (a, _, _) = scattering_length_generic(&well, cfg)?;
        worst = worst.max(rel(a, -2.0 / g));
        // physical coupling g/m recovered from a with the (possibly perturbed) mass
        let back = pseudo_coupling(a, mass * hooks.mass_scale)?.g1d;
        worst = worst.max(rel(back * mass, g));
    }
    Ok(check("contact oracle", worst < 0.01, format!("max relative error {worst:.3e}")))
}

fn fit_and_formulas() -> rydpol::Result<Vec<Check>> {
    let th = Thresholds::default();
    let fit = |p: &SystemParams, k: f64, w: f64| {
        let xi = (p.c6 * chibar_full(p, w)?).norm().powf(1.0 / 6.0);
        fit_three_term(p, k, w, &default_qgrid(10.0 / xi, 60))
    };
    let sets = [(1.0, 1.0, 2.0), (2.0, 0.7, 1.3), (1.0, 0.3, -1.0), (1.5, 0.05, 1.0), (0.8, 0.04, -2.0)];
    let mut residual: f64 = 0.0;
    for (g, o, d) in sets {
        let p = SystemParams::new(g, o, d, 0.0, 1.0, 1.0)?;
        for (kr, wr) in [(0.0, 0.0), (0.05, -0.03), (-0.2, 0.1)] {
            residual = residual.max(fit(&p, kr * p.q_c(), wr * p.omega_c())?.residual);
        }
    }
    // low-energy formulas converge linearly in the margin
    let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0)?;
    let err = |m: f64| -> rydpol::Result<f64> {
        let (k, w) = (-m * p.q_c(), m * p.omega_c());
        let f = fit(&p, k, w)?;
        let c = coeffs_low_energy(&p, k, w, &th);
        Ok(((c.chibar - f.chibar) / f.chibar).norm().max(((c.alpha - f.alpha) / f.alpha).norm()))
    };
    let (e1, e2) = (err(0.02)?, err(0.01)?);
    // far-detuned formulas at margin 0.01
    let q = SystemParams::new(1.0, 0.01, 1.0, 0.0, 1.0, -1e-4)?;
    let (k, w) = (k_from_far_y(&q, 0.2), omega_from_far_x(&q, -0.3));
    let f = fit(&q, k, w)?;
    let c = coeffs_far_detuned(&q, k, w, &th)?;
    let far = ((c.chibar - f.chibar) / f.chibar).norm().max(((c.alpha - f.alpha) / f.alpha).norm());
    Ok(vec![
        check("three-term fit", residual < 1e-6, format!("max residual {residual:.3e}")),
        check("low-energy convergence", e1 / e2 > 1.6 && e2 < 0.05, format!("errors {e1:.3e} -> {e2:.3e}")),
        check("far-detuned formulas", far < 5e-3, format!("relative error {far:.3e}")),
    ])
}

fn solver_equivalence(cfg: &SolverConfig) -> Check {
    let tm = TMatrixConfig::default();
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for t in [0.5, 1.0, 5.0] {
        let red = ReducedPotential::from_ratio(t, Interaction::Attractive);
        for k in [0.1, 1.0] {
            let r = phase_shift(&red, k, cfg).and_then(|a| {
                let sol = solve_t(&red, k * k, &tm)?;
                Ok(phase_distance(a, onshell_phase(&sol, tm.unitarity_tol)?))
            });
            match r {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    worst = f64::INFINITY;
                    detail = format!(" ({e} at t={t}, k={k})");
                }
            }
        }
    }
    check("ODE and T-matrix phases", worst < 1e-3, format!("max difference {worst:.3e}{detail}"))
}

fn adiabatic() -> rydpol::Result<Check> {
    let th = Thresholds::default();
    let diff = |ratio: f64| -> rydpol::Result<f64> {
        let p = SystemParams::new(1.0, ratio, 1.0, 0.0, 1.0, 1.0)?;
        let (k, w) = (k_from_far_y(&p, 0.2), omega_from_far_x(&p, -0.3));
        let a = coeffs_adiabatic(&p, k, w)?;
        let f = coeffs_far_detuned(&p, k, w, &th)?;
        let m = p.mass();
        Ok(((a.alpha_m - f.alpha * m) / (f.alpha * m)).norm())
    };
    let (a, b) = (diff(0.04)?, diff(0.02)?);
    Ok(check("adiabatic limit", a / b >= 3.0, format!("reduction {:.2}", a / b)))
}

fn signs() -> rydpol::Result<Check> {
    let p = SystemParams::new(2.0, 1.0, 1.0, 0.0, 1.0, 1.0)?;
    let zero = chibar_full(&p, 0.0)?.norm();
    let mut quadrants = true;
    for (o, d) in [(0.5, 1.0), (2.0, 1.0), (0.5, -1.0), (2.0, -1.0)] {
        let p = SystemParams::new(1.0, o, d, 0.0, 1.0, 1.0)?;
        let chi = chibar_full(&p, 0.0)?.re;
        let expect = if o < d.abs() { d.signum() } else { -d.signum() };
        quadrants &= Sign::of(chi).value() == expect;
    }
    Ok(check(
        "saturation sign",
        zero < 1e-12 && quadrants,
        format!("|chi| at Omega=|delta| {zero:.1e}, quadrants {}", if quadrants { "ok" } else { "wrong" }),
    ))
}

fn zeta_checks() -> rydpol::Result<Check> {
    let th = Thresholds::default();
    let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0)?;
    let mut low: f64 = 0.0;
    for (kr, wr) in [(0.1, 0.0), (-0.1, 0.1), (0.05, -0.08)] {
        low = low.max(coeffs_low_energy(&p, kr * p.q_c(), wr * p.omega_c(), &th).zeta);
    }
    let q = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4)?;
    let w = omega_from_far_x(&q, -0.3);
    let mut last = -1.0;
    let mut monotone = true;
    for y in [0.2, 0.4, 0.6, 0.8, 0.9] {
        let z = coeffs_far_detuned(&q, k_from_far_y(&q, y), w, &th)?.zeta;
        monotone &= z > last;
        last = z;
    }
    Ok(check("second-pole weight", low < 1e-2 && monotone, format!("low-energy max {low:.2e}, monotone {monotone}")))
}

fn group_velocity() -> rydpol::Result<Check> {
    let p = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4)?;
    let cfg = SpectrumConfig { max_branches: 1, ..SpectrumConfig::default() };
    let (q, _) = with_bound_state_strength(&p, 5.0, 0, Regime::FarDetuned, &cfg)?;
    let states = self_consistent_spectrum(&q, 0.0, Regime::FarDetuned, &cfg)?;
    let ratio = states.first().and_then(|s| s.group_velocity).map(|g| g / q.group_velocity());
    Ok(match ratio {
        Some(r) => check("bound-state group velocity", r > 1.0, format!("dω/dK = {r:.4} v_g")),
        None => check("bound-state group velocity", false, "no ground branch".into()),
    })
}

fn step_halving(cfg: &SolverConfig) -> rydpol::Result<Check> {
    let half = SolverConfig { step: cfg.step / 2.0, ..*cfg };
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 5.0] {
        let red = ReducedPotential::from_ratio(t, Interaction::Attractive);
        let a = scattering_length(&red, cfg)?.a_over_lambda;
        let b = scattering_length(&red, &half)?.a_over_lambda;
        worst = worst.max(rel(a, b));
    }
    let red = ReducedPotential::from_ratio(5.0, Interaction::Attractive);
    let e = |c: &SolverConfig| -> rydpol::Result<f64> {
        Ok(bound_states_frozen(&red, c)?.first().copied().unwrap_or(f64::NAN))
    };
    worst = worst.max(rel(e(cfg)?, e(&half)?));
    Ok(check("step halving", worst < 1e-4, format!("max relative change {worst:.3e}")))
}

fn scales_sanity() -> rydpol::Result<Check> {
    let p = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4)?;
    let s = derive_scales(&p, 0.0, 0.0, Regime::FarDetuned, &Thresholds::default())?;
    let ok = s.xi > 0.0 && s.lambda_bar > 0.0 && s.strength > 0.0;
    Ok(check("derived scales", ok, format!("xi {:.3e}, lambda {:.3e}", s.xi, s.lambda_bar)))
}

/// Runs every check; a check that errors is reported as failed.
pub fn run_checks(hooks: &Hooks) -> Vec<Check> {
    let cfg = SolverConfig::default();
    let wrap =
        |name: &'static str, r: rydpol::Result<Check>| r.unwrap_or_else(|e| check(name, false, format!("error: {e}")));
    let mut out = vec![
        wrap("derived scales", scales_sanity()),
        wrap("weak coupling law", weak_coupling(&cfg)),
        wrap("strong repulsion", strong_repulsion(&cfg)),
        repulsive_scan(&cfg),
        wrap("bound-state counts", bound_counts(&cfg)),
        wrap("contact oracle", delta_oracle(&cfg, hooks)),
    ];
    match fit_and_formulas() {
        Ok(c) => out.extend(c),
        Err(e) => out.push(check("three-term fit", false, format!("error: {e}"))),
    }
    out.push(solver_equivalence(&cfg));
    out.push(wrap("adiabatic limit", adiabatic()));
    out.push(wrap("saturation sign", signs()));
    out.push(wrap("second-pole weight", zeta_checks()));
    out.push(wrap("bound-state group velocity", group_velocity()));
    out.push(wrap("step halving", step_halving(&cfg)));
    out
}
