use rydpol::modes::{default_qgrid, fit_three_term};
use rydpol::regimes::{chibar_full, coeffs_low_energy, far_x};
use rydpol::schroedinger::{self_consistent_spectrum, with_bound_state_strength, with_origin_strength, SpectrumConfig};
use rydpol::{Error, Regime, SystemParams, Thresholds};

fn params() -> SystemParams {
    SystemParams::new(1.0, 0.05, 1.0, 0.0, 1.0, -1e-4).unwrap()
}

fn cfg() -> SpectrumConfig {
    SpectrumConfig::default()
}

#[test]
fn weak_origin_strength_has_one_branch() {
    let p = with_origin_strength(&params(), 0.5, Regime::FarDetuned, &Thresholds::default()).unwrap();
    let states = self_consistent_spectrum(&p, 0.0, Regime::FarDetuned, &cfg()).unwrap();
    assert_eq!(states.len(), 1);
    let s = &states[0];
    // below the scattering continuum, which starts at ω̄ = 0
    assert!(far_x(&p, s.omega) < 0.0);
    assert!(s.reduced_energy < 0.0);
    assert!(s.residual < 1e-8 * p.omega_c());
    let gv = s.group_velocity.unwrap() / p.group_velocity();
    assert!(gv > 1.0 && gv < 2.0, "{gv}");
}

#[test]
fn strong_origin_strength_binds_nothing_at_rest() {
    let p = with_origin_strength(&params(), 5.0, Regime::FarDetuned, &Thresholds::default()).unwrap();
    assert!(self_consistent_spectrum(&p, 0.0, Regime::FarDetuned, &cfg()).unwrap().is_empty());
}

#[test]
fn bound_referenced_strength_is_reproduced() {
    let (p, omega) = with_bound_state_strength(&params(), 5.0, 0, Regime::FarDetuned, &cfg()).unwrap();
    let states = self_consistent_spectrum(&p, 0.0, Regime::FarDetuned, &cfg()).unwrap();
    let ground = &states[0];
    assert!((ground.omega - omega).abs() < 1e-8 * p.omega_c());
    assert!((ground.strength - 5.0).abs() < 1e-6);
    assert!(ground.group_velocity.unwrap() > p.group_velocity());
}

#[test]
fn lossy_parameters_are_refused() {
    let p = SystemParams { gamma: 0.01, ..params() };
    assert_eq!(self_consistent_spectrum(&p, 0.0, Regime::FarDetuned, &cfg()), Err(Error::RequiresLossless));
}

#[test]
fn low_energy_formulas_converge_linearly() {
    let th = Thresholds::default();
    for (g, o, d) in [(1.0, 1.0, 2.0), (2.0, 0.7, 1.3), (1.0, 0.3, -1.0)] {
        let p = SystemParams::new(g, o, d, 0.0, 1.0, 1.0).unwrap();
        let err = |m: f64| {
            let (k, w) = (-m * p.q_c(), m * p.omega_c());
            let xi = (p.c6 * chibar_full(&p, w).unwrap()).norm().powf(1.0 / 6.0);
            let f = fit_three_term(&p, k, w, &default_qgrid(10.0 / xi, 60)).unwrap();
            let c = coeffs_low_energy(&p, k, w, &th);
            ((c.chibar - f.chibar) / f.chibar).norm().max(((c.alpha - f.alpha) / f.alpha).norm())
        };
        let (e1, e2, e3) = (err(0.04), err(0.02), err(0.01));
        assert!(e1 / e2 > 1.7 && e2 / e3 > 1.7, "{e1} {e2} {e3}");
        assert!(err(1e-3) < 5e-3);
    }
}
