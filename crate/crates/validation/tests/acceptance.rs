//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::error::Error;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rydpol::manybody::pseudo_coupling;
use rydpol::modes::{chi_exact, default_qgrid, fit_three_term, PairPropagatorFit};
use rydpol::params::{validate_interaction, Sign};
use rydpol::regimes::{
    chibar_full, coeffs_adiabatic, coeffs_far_detuned, coeffs_low_energy, k_from_far_y, omega_from_far_x,
};
use rydpol::schroedinger::{
    bound_states_frozen, phase_shift, phase_shift_generic, scattering_length, scattering_length_generic,
    self_consistent_spectrum, with_bound_state_strength, SolverConfig, SpectrumConfig, SquareWell,
};
use rydpol::tmatrix::{solve_t, TMatrixConfig};
use rydpol::{Interaction, ReducedPotential, Regime, SystemParams, Thresholds};

type Check = Result<(bool, String), Box<dyn Error>>;
type Criterion = (u32, fn() -> Check, Option<Duration>);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).norm() / b.norm()
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn a_over_lambda(t: f64, kind: Interaction) -> rydpol::Result<f64> {
    scattering_length(&ReducedPotential::from_ratio(t, kind), &SolverConfig::default()).map(|r| r.a_over_lambda)
}

fn weak_coupling() -> Check {
    let mut worst: f64 = 0.0;
    for t in [0.05, 0.1] {
        let law = 3.0 / PI / t;
        worst = worst.max(rel(a_over_lambda(t, Interaction::Repulsive)?, -law));
        worst = worst.max(rel(a_over_lambda(t, Interaction::Attractive)?, law));
    }
    Ok((worst < 0.05, format!("max relative error {worst:.2e}")))
}

fn strong_repulsion() -> Check {
    let mut worst: f64 = 0.0;
    for t in [5.0f64, 6.5, 8.0] {
        // (αmC₆)^{1/4}/λ̄ = (ξ/λ̄)^{3/2}
        worst = worst.max(rel(a_over_lambda(t, Interaction::Repulsive)?, 0.7 * t.powf(1.5)));
    }
    Ok((worst < 0.1, format!("max deviation from 0.7 law {worst:.2e}")))
}

fn sign_changes(a: &[f64]) -> Vec<(usize, f64, f64)> {
    (1..a.len()).filter(|&i| a[i].signum() != a[i - 1].signum()).map(|i| (i, a[i - 1], a[i])).collect()
}

fn single_zero_crossing() -> Check {
    let ts = log_grid(0.05, 8.0, 120);
    let a: Vec<f64> = ts.iter().map(|&t| a_over_lambda(t, Interaction::Repulsive)).collect::<rydpol::Result<_>>()?;
    let changes = sign_changes(&a);
    let at = changes.first().map(|c| ts[c.0]).unwrap_or(f64::NAN);
    Ok((changes.len() == 1, format!("{} sign changes, first near xi/lambda = {at:.3}", changes.len())))
}

fn resonances_and_counts() -> Check {
    let cfg = SolverConfig::default();
    let ts = log_grid(0.05, 8.0, 160);
    let mut a = Vec::with_capacity(ts.len());
    let mut count = Vec::with_capacity(ts.len());
    for &t in &ts {
        let red = ReducedPotential::from_ratio(t, Interaction::Attractive);
        a.push(scattering_length(&red, &cfg)?.a_over_lambda);
        count.push(bound_states_frozen(&red, &cfg)?.len());
    }
    // on the attractive branch a₁D passes +∞ → −∞ at a resonance and + → − at a zero
    let divergences: Vec<usize> =
        sign_changes(&a).into_iter().filter(|c| c.1 < 0.0 && c.2 > 0.0).map(|c| c.0).collect();
    let increments: Vec<usize> = (1..ts.len()).filter(|&i| count[i] > count[i - 1]).collect();
    let matched = divergences.iter().all(|&i| increments.iter().any(|&j| j.abs_diff(i) <= 1));
    let n =
        |t: f64| bound_states_frozen(&ReducedPotential::from_ratio(t, Interaction::Attractive), &cfg).map(|v| v.len());
    let (n05, n5) = (n(0.5)?, n(5.0)?);
    let ok = matched && divergences.len() == increments.len() && n05 == 1 && n5 == 2;
    Ok((
        ok,
        format!(
            "{} divergences, {} count increments, count {n05} at 0.5, {n5} at 5",
            divergences.len(),
            increments.len()
        ),
    ))
}

fn delta_oracle() -> Check {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for g in [0.3, 1.0, -0.5, -1.5] {
        let well = SquareWell::contact(g, 5e-3);
        let (a, _, _) = scattering_length_generic(&well, &cfg)?;
        worst = worst.max(rel(a, -2.0 / g));
        let k = 0.3;
        let phi = phase_shift_generic(&well, k, &cfg)?;
        worst = worst.max(rel(phi.tan(), -g / (2.0 * k)));
    }
    // a₁D → g₁D with the physical mass, then back through the well
    let p = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4)?;
    let m = p.mass().re;
    let mut trip: f64 = 0.0;
    for a in [2.5, -4.0] {
        let g1d = pseudo_coupling(a, m)?.g1d;
        let (back, _, _) = scattering_length_generic(&SquareWell::contact(m * g1d, 5e-3), &cfg)?;
        trip = trip.max(rel(back, a));
    }
    Ok((worst < 0.01 && trip < 0.01, format!("oracle error {worst:.2e}, round trip {trip:.2e}")))
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    loop {
        let g = rng.gen_range(0.5..3.0);
        let delta: f64 = rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let omega = rng.gen_range(0.02..2.0) * delta.abs();
        let c6 = 10f64.powf(rng.gen_range(-4.0..0.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        // keep clear of the χ̄ = 0 line
        if (omega / delta.abs() - 1.0).abs() > 0.05 {
            return SystemParams::new(g, omega, delta, 0.0, 1.0, c6).unwrap();
        }
    }
}

fn xi_of(p: &SystemParams, omega: f64) -> rydpol::Result<f64> {
    Ok((p.c6 * chibar_full(p, omega)?).norm().powf(1.0 / 6.0))
}

fn fit(p: &SystemParams, k: f64, omega: f64) -> rydpol::Result<PairPropagatorFit> {
    fit_three_term(p, k, omega, &default_qgrid(10.0 / xi_of(p, omega)?, 60))
}

/// Max deviation of the three-term form from χ at momenta off the fit grid
/// and away from the poles.
fn off_grid_residual(p: &SystemParams, f: &PairPropagatorFit, qmax: f64) -> rydpol::Result<f64> {
    let m = p.mass();
    let poles = [f.omega_bar * m, f.omega_bar_b * m];
    let mut worst: f64 = 0.0;
    for i in 0..97 {
        let q = qmax * (i as f64 + 0.81) / 97.0;
        let x = q * q;
        if poles.iter().any(|pl| pl.is_finite() && (pl.re - x).abs() < 0.02 * pl.norm().max(1e-3 * qmax * qmax)) {
            continue;
        }
        let exact = chi_exact(p, q, f.k, f.omega, 0.0)?;
        worst = worst.max((f.eval(m, q) - exact).norm() / exact.norm());
    }
    Ok(worst)
}

fn three_term() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut residual: f64 = 0.0;
    let sets = 24;
    for _ in 0..sets {
        let p = random_params(&mut rng);
        let k = rng.gen_range(-0.3..0.3) * p.q_c();
        let w = rng.gen_range(-0.3..0.3) * p.omega_c();
        let f = fit(&p, k, w)?;
        residual = residual.max(off_grid_residual(&p, &f, 10.0 / xi_of(&p, w)?)?);
    }
    let th = Thresholds::default();
    let mut low: f64 = 0.0;
    for (g, o, d) in [(1.0, 1.0, 2.0), (2.0, 0.7, 1.3), (1.0, 0.3, -1.0), (1.5, 2.0, 1.0)] {
        let p = SystemParams::new(g, o, d, 0.0, 1.0, 1.0)?;
        for (kr, wr) in [(0.01, 0.0), (0.0, 0.01), (-0.01, 0.01), (0.01, -0.01)] {
            let (k, w) = (kr * p.q_c(), wr * p.omega_c());
            let f = fit(&p, k, w)?;
            let c = coeffs_low_energy(&p, k, w, &th);
            let scale = w.abs() + p.group_velocity() * k.abs();
            low = low
                .max(crel(c.chibar, f.chibar))
                .max(crel(c.alpha, f.alpha))
                .max((c.omega_bar - f.omega_bar).norm() / f.omega_bar.norm().max(scale));
        }
    }
    // far-detuned window taken as Ω ≪ |Δ| ≲ g; ω̄ is measured in units of 2Ω²/|Δ| since it passes through zero
    let mut far: f64 = 0.0;
    for (g, d) in [(1.0, 1.0f64), (2.0, -1.5), (4.0, 3.0)] {
        let p = SystemParams::new(g, 0.01 * d.abs(), d, 0.0, 1.0, -d.signum() * 1e-3)?;
        let unit = 2.0 * p.omega_rabi * p.omega_rabi / d.abs();
        for (y, x) in [(0.0, -0.3), (0.2, 0.3), (0.5, -0.5)] {
            let (k, w) = (k_from_far_y(&p, y), omega_from_far_x(&p, x));
            let f = fit(&p, k, w)?;
            let c = coeffs_far_detuned(&p, k, w, &th)?;
            far = far
                .max(crel(c.chibar, f.chibar))
                .max(crel(c.alpha, f.alpha))
                .max((c.omega_bar - f.omega_bar).norm() / f.omega_bar.norm().max(unit));
        }
    }
    let ok = residual < 1e-6 && low < 5e-3 && far < 5e-3;
    Ok((
        ok,
        format!("{sets} sets, off-grid residual {residual:.2e}; low-energy formulas {low:.2e}; far-detuned formulas {far:.2e}"),
    ))
}

fn solver_equivalence() -> Check {
    let cfg = SolverConfig::default();
    let tm = TMatrixConfig::default();
    let (mut phase, mut unit): (f64, f64) = (0.0, 0.0);
    for kind in [Interaction::Attractive, Interaction::Repulsive] {
        for t in [0.5, 1.0, 5.0] {
            let red = ReducedPotential::from_ratio(t, kind);
            for k in log_grid(0.05, 2.0, 8) {
                let ode = phase_shift(&red, k, &cfg)?;
                let sol = solve_t(&red, k * k, &tm)?;
                // S = 1 − iT/(2k) built here from the on-shell element
                let s = Complex64::new(1.0, 0.0) - Complex64::i() * sol.on_shell().unwrap() / (2.0 * k);
                let d = (ode - 0.5 * s.arg()).rem_euclid(PI);
                phase = phase.max(d.min(PI - d));
                unit = unit.max((s.norm() - 1.0).abs());
            }
        }
    }
    Ok((phase < 1e-3 && unit < 1e-6, format!("max phase difference {phase:.2e} rad, max ||S|-1| {unit:.2e}")))
}

fn adiabatic_limit() -> Check {
    let th = Thresholds::default();
    let diffs = |ratio: f64| -> rydpol::Result<[f64; 3]> {
        let p = SystemParams::new(1.0, ratio, 1.0, 0.0, 1.0, -1e-3)?;
        let (k, w) = (k_from_far_y(&p, 0.2), omega_from_far_x(&p, -0.3));
        let a = coeffs_adiabatic(&p, k, w)?;
        let f = coeffs_far_detuned(&p, k, w, &th)?;
        let m = p.mass();
        Ok([crel(a.alpha_m, f.alpha * m), crel(a.chibar, chibar_full(&p, w)?), crel(a.omega_bar_m, f.omega_bar * m)])
    };
    let (a, b) = (diffs(0.04)?, diffs(0.02)?);
    let ratios: Vec<f64> =
        a.iter().zip(&b).map(|(x, y)| if *x == 0.0 && *y == 0.0 { f64::INFINITY } else { x / y }).collect();
    let ok = ratios.iter().all(|r| *r >= 3.0);
    Ok((
        ok,
        format!("reduction factors alpha_m {:.2}, chibar {:.2}, omega_bar_m {:.2}", ratios[0], ratios[1], ratios[2]),
    ))
}

fn saturation_sign() -> Check {
    let mut zero: f64 = 0.0;
    for (g, o) in [(1.0, 0.5), (2.0, 1.3), (0.7, 2.0)] {
        for d in [o, -o] {
            zero = zero.max(chibar_full(&SystemParams::new(g, o, d, 0.0, 1.0, 1.0)?, 0.0)?.norm());
        }
    }
    // above the crossing (Ω > |δ|) the interaction is regular exactly when C₆δ > 0
    let mut quadrants = true;
    for d in [1.0, -1.0] {
        for c6 in [1.0, -1.0] {
            let p = SystemParams::new(1.0, 2.0, d, 0.0, 1.0, c6)?;
            let r = validate_interaction(&p, 0.0)?;
            quadrants &= r.regular == (c6 * d > 0.0) && (r.s == Sign::Minus) == r.regular;
            let q = SystemParams { omega_rabi: 0.5, ..p };
            quadrants &= validate_interaction(&q, 0.0)?.regular == (c6 * d < 0.0);
        }
    }
    Ok((zero < 1e-12 && quadrants, format!("max |chibar| at Omega=|delta| {zero:.1e}, quadrants {quadrants}")))
}

fn zeta_shape() -> Check {
    // g ≫ Ω with Ω/Δ = 0.5
    let mut low: f64 = 0.0;
    for (g, d) in [(5.0, 1.0f64), (10.0, -1.0), (20.0, 2.0)] {
        let p = SystemParams::new(g, 0.5 * d.abs(), d, 0.0, 1.0, -d.signum())?;
        for kr in [-0.1, -0.05, 0.0, 0.05, 0.1] {
            for wr in [-0.1, -0.05, 0.0, 0.05, 0.1] {
                let (k, w) = (kr * p.q_c(), wr * p.omega_c());
                low = low.max(fit(&p, k, w)?.zeta());
            }
        }
    }
    let th = Thresholds::default();
    let mut monotone = true;
    for o in [0.5, 0.05] {
        let p = SystemParams::new(10.0, o, 1.0, 0.0, 1.0, -1.0)?;
        let w = omega_from_far_x(&p, -0.3);
        let (mut last, mut last_exact) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 1..20 {
            let k = k_from_far_y(&p, 0.05 * i as f64);
            let z = coeffs_far_detuned(&p, k, w, &th)?.zeta;
            monotone &= z > last;
            last = z;
            if o < 0.1 {
                let e = fit(&p, k, w)?.zeta();
                monotone &= e > last_exact;
                last_exact = e;
            }
        }
    }
    Ok((
        low < 1e-2 && monotone,
        format!("max zeta in low-energy window {low:.2e}, far-detuned scan monotone {monotone}"),
    ))
}

fn group_velocity() -> Check {
    let p = SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4)?;
    let cfg = SpectrumConfig { max_branches: 1, ..SpectrumConfig::default() };
    let (q, _) = with_bound_state_strength(&p, 5.0, 0, Regime::FarDetuned, &cfg)?;
    let deepest = |k: f64| -> rydpol::Result<f64> {
        self_consistent_spectrum(&q, k, Regime::FarDetuned, &cfg)?
            .first()
            .map(|s| s.omega)
            .ok_or_else(|| rydpol::Error::Convergence("no bound state".into()))
    };
    let dk = 1e-3 * q.q_c();
    let slope = (deepest(dk)? - deepest(-dk)?) / (2.0 * dk);
    let vg = q.group_velocity();
    Ok((slope > vg, format!("d omega/dK = {:.4} v_g", slope / vg)))
}

fn reproducibility() -> Check {
    let dir = std::env::temp_dir().join(format!("rydpol-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let cfg = dir.join("params.cfg");
    std::fs::write(&cfg, "g = 1\nomega_rabi = 0.05\ndelta = 1\nc = 1\nc6 = -1e-4\n")?;
    let run = |name: &str| -> Result<Vec<u8>, Box<dyn Error>> {
        let out = dir.join(name);
        let code = rydpol_cli::main_with_args([
            "rydpol",
            "--study",
            "scan-a1d",
            "--grid",
            "0.05:8:40:log",
            "--config",
            cfg.to_str().ok_or("non-utf8 temp path")?,
            "--out",
            out.to_str().ok_or("non-utf8 temp path")?,
        ]);
        if code != 0 {
            return Err(format!("cli exited with {code}").into());
        }
        Ok(std::fs::read(out)?)
    };
    let identical = run("a.csv")? == run("b.csv")?;
    std::fs::remove_dir_all(&dir)?;

    let coarse = SolverConfig::default();
    let fine = SolverConfig { step: coarse.step / 2.0, ..coarse };
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 5.0] {
        let red = ReducedPotential::from_ratio(t, Interaction::Attractive);
        worst = worst
            .max(rel(scattering_length(&red, &coarse)?.a_over_lambda, scattering_length(&red, &fine)?.a_over_lambda));
        worst = worst.max(rel(bound_states_frozen(&red, &coarse)?[0], bound_states_frozen(&red, &fine)?[0]));
    }
    Ok((identical && worst < 1e-4, format!("byte-identical {identical}, step-halving change {worst:.2e}")))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, weak_coupling, Some(Duration::from_secs(10))),
        (2, strong_repulsion, Some(Duration::from_secs(30))),
        (3, single_zero_crossing, None),
        (4, resonances_and_counts, Some(Duration::from_secs(120))),
        (5, delta_oracle, None),
        (6, three_term, None),
        (7, solver_equivalence, None),
        (8, adiabatic_limit, None),
        (9, saturation_sign, None),
        (10, zeta_shape, None),
        (11, group_velocity, None),
        (12, reproducibility, None),
    ];
    let mut failed = 0;
    for (n, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let ok = ok && in_time;
        failed += usize::from(!ok);
        println!(
            "criterion {n}: {} ({detail}; {:.2} s{})",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time limit" }
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
