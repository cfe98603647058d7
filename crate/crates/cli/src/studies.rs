//! The named studies. Each returns a table whose rows follow grid order.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rydpol::manybody::{collision_phase, crossover_label, pseudo_coupling};
use rydpol::modes::{default_qgrid, fit_three_term, PairPropagatorFit};
use rydpol::params::{classify_regime, derive_scales};
use rydpol::regimes::{self, chibar_full, coeffs_adiabatic, far_x, far_y, k_from_far_y, omega_from_far_x};
use rydpol::schroedinger::{
    self, scan_scattering_length, self_consistent_spectrum, with_bound_state_strength, with_origin_strength,
};
use rydpol::tmatrix;
use rydpol::{Interaction, ReducedPotential, Regime, SystemParams};

use crate::grid::GridSpec;
use crate::settings::{Settings, StrengthAt};
use crate::table::{Cell, Status, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Coeffs,
    ZetaMap,
    ScanA1d,
    Spectrum,
    TmatrixCheck,
    AdiabaticCheck,
}

impl Study {
    pub const ALL: [Study; 6] =
        [Study::Coeffs, Study::ZetaMap, Study::ScanA1d, Study::Spectrum, Study::TmatrixCheck, Study::AdiabaticCheck];

    fn name(self) -> &'static str {
        match self {
            Study::Coeffs => "coeffs",
            Study::ZetaMap => "zeta-map",
            Study::ScanA1d => "scan-a1d",
            Study::Spectrum => "spectrum",
            Study::TmatrixCheck => "tmatrix-check",
            Study::AdiabaticCheck => "adiabatic-check",
        }
    }

    fn needs_params(self) -> bool {
        !matches!(self, Study::ScanA1d | Study::TmatrixCheck)
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Study::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Study::ALL.iter().map(|s| s.name()).collect();
            format!("unknown study '{s}' (known: {})", names.join(", "))
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] rydpol::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub study: Study,
    pub params: Option<SystemParams>,
    pub config_path: Option<PathBuf>,
    pub grids: Vec<GridSpec>,
    pub regime: Regime,
    pub branch: Interaction,
    /// ξ/λ̄ values (tmatrix-check uses all, spectrum the first).
    pub strengths: Vec<f64>,
    /// Reduced point (cKΔ/2g², ωΔ/2Ω²) for adiabatic-check.
    pub point: (f64, f64),
    pub settings: Settings,
}

impl StudySpec {
    pub fn new(study: Study) -> Self {
        Self {
            study,
            params: None,
            config_path: None,
            grids: Vec::new(),
            regime: Regime::FarDetuned,
            branch: Interaction::Attractive,
            strengths: Vec::new(),
            point: (0.2, -0.3),
            settings: Settings::default(),
        }
    }

    fn params(&self) -> Result<SystemParams, StudyError> {
        self.params.ok_or_else(|| StudyError::Usage(format!("study {} needs --config or RYDPOL_CONFIG", self.study)))
    }

    fn axis(&self, i: usize, name: &str, min_count: usize) -> Result<Vec<f64>, StudyError> {
        let g = self
            .grids
            .get(i)
            .ok_or_else(|| StudyError::Usage(format!("study {} needs a --grid for {name}", self.study)))?;
        let v = g.values();
        if v.is_empty() {
            return Err(StudyError::Usage(format!("grid for {name} is empty")));
        }
        if v.len() < min_count {
            return Err(StudyError::Usage(format!("grid for {name} needs at least {min_count} points")));
        }
        Ok(v)
    }

    fn optional_axis(&self, i: usize, name: &str, default: f64) -> Result<Vec<f64>, StudyError> {
        if self.grids.len() > i {
            self.axis(i, name, 1)
        } else {
            Ok(vec![default])
        }
    }
}

/// Runs a study; per-point failures are reported in the rows.
pub fn run_study(spec: &StudySpec) -> Result<Table, StudyError> {
    if spec.study.needs_params() {
        spec.params()?;
    }
    let mut table = match spec.study {
        Study::Coeffs => coeffs_study(spec)?,
        Study::ZetaMap => zeta_study(spec)?,
        Study::ScanA1d => scan_study(spec)?,
        Study::Spectrum => spectrum_study(spec)?,
        Study::TmatrixCheck => tmatrix_study(spec)?,
        Study::AdiabaticCheck => adiabatic_study(spec)?,
    };
    let mut meta = vec![("study".to_string(), spec.study.to_string())];
    if let Some(p) = spec.params {
        meta.push(("parameters".into(), p.to_config_string().trim().replace('\n', "; ")));
    }
    for (i, g) in spec.grids.iter().enumerate() {
        meta.push((format!("grid{i}"), g.to_string()));
    }
    meta.push(("regime".into(), spec.regime.to_string()));
    for (k, v) in spec.settings.entries() {
        meta.push((format!("tol.{k}"), v));
    }
    meta.append(&mut table.metadata);
    table.metadata = meta;
    table.meta("failures", format!("{}/{}", table.failures(), table.rows.len()));
    Ok(table)
}

fn fit_grid(p: &SystemParams, omega: f64, settings: &Settings) -> Vec<f64> {
    let xi = chibar_full(p, omega)
        .map(|c| (p.c6 * c).norm().powf(1.0 / 6.0))
        .ok()
        .filter(|x| *x > 0.0 && x.is_finite())
        .unwrap_or(1.0 / p.q_c());
    default_qgrid(settings.fit_qmax / xi, settings.fit_points)
}

fn exact_fit(p: &SystemParams, k: f64, omega: f64, settings: &Settings) -> rydpol::Result<PairPropagatorFit> {
    fit_three_term(p, k, omega, &fit_grid(p, omega, settings))
}

fn nan_cells(n: usize) -> Vec<Cell> {
    vec![Cell::Num(f64::NAN); n]
}

fn cartesian(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn coeffs_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let p = spec.params()?;
    let ks = spec.axis(0, "K/q_c", 1)?;
    let ws = spec.optional_axis(1, "omega/omega_c", 0.0)?;
    let mut t = Table::new(&[
        "k_over_qc",
        "omega_over_omegac",
        "window",
        "chibar_re",
        "chibar_im",
        "alpha_re",
        "alpha_im",
        "omega_bar_re",
        "omega_bar_im",
        "zeta",
        "fit_chibar",
        "fit_alpha",
        "fit_omega_bar",
        "fit_zeta",
        "fit_residual",
    ]);
    let th = spec.settings.thresholds;
    let rows: Vec<(Vec<Cell>, Status)> = cartesian(&ks, &ws)
        .par_iter()
        .map(|&(kr, wr)| {
            let k = kr * p.q_c();
            let w = wr * p.omega_c();
            let label = classify_regime(&p, k, w, &th).label;
            let mut cells = vec![Cell::Num(kr), Cell::Num(wr), Cell::Text(label.to_string())];
            let c = match regimes::coeffs(&p, k, w, spec.regime, &th) {
                Ok(c) => c,
                Err(e) => {
                    cells.extend(nan_cells(12));
                    return (cells, Status::Failed(e.to_string()));
                }
            };
            cells.extend([
                c.chibar.re.into(),
                c.chibar.im.into(),
                c.alpha.re.into(),
                c.alpha.im.into(),
                c.omega_bar.re.into(),
                c.omega_bar.im.into(),
                c.zeta.into(),
            ]);
            let mut status = if label.admits(spec.regime) { Status::Ok } else { Status::Note("outside window".into()) };
            if !p.is_lossless() {
                cells.extend(nan_cells(5));
                return (cells, Status::Note("no exact fit for gamma>0".into()));
            }
            match exact_fit(&p, k, w, &spec.settings) {
                Ok(f) => cells.extend([
                    f.chibar.re.into(),
                    f.alpha.re.into(),
                    f.omega_bar.re.into(),
                    f.zeta().into(),
                    f.residual.into(),
                ]),
                Err(e) => {
                    cells.extend(nan_cells(5));
                    status = Status::Failed(format!("exact fit: {e}"));
                }
            }
            (cells, status)
        })
        .collect();
    for (c, s) in rows {
        t.push(c, s);
    }
    Ok(t)
}

/// Physical (K, ω) from the study axes of a regime.
fn physical_point(p: &SystemParams, regime: Regime, a: f64, b: f64) -> (f64, f64) {
    match regime {
        Regime::FarDetuned => (k_from_far_y(p, a), omega_from_far_x(p, b)),
        Regime::LowEnergy => (a * p.q_c(), b * p.omega_c()),
    }
}

fn axis_names(regime: Regime) -> (&'static str, &'static str) {
    match regime {
        Regime::FarDetuned => ("y", "x"),
        Regime::LowEnergy => ("k_over_qc", "omega_over_omegac"),
    }
}

fn zeta_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let p = spec.params()?;
    let (na, nb) = axis_names(spec.regime);
    let a = spec.axis(0, na, 1)?;
    let b = spec.optional_axis(1, nb, 0.0)?;
    let th = spec.settings.thresholds;
    let mut t = Table::new(&[na, nb, "k", "omega", "window", "zeta", "zeta_exact"]);
    let rows: Vec<(Vec<Cell>, Status)> = cartesian(&a, &b)
        .par_iter()
        .map(|&(u, v)| {
            let (k, w) = physical_point(&p, spec.regime, u, v);
            let label = classify_regime(&p, k, w, &th).label;
            let mut cells = vec![u.into(), v.into(), k.into(), w.into(), Cell::Text(label.to_string())];
            let zeta = match regimes::coeffs(&p, k, w, spec.regime, &th) {
                Ok(c) => c.zeta,
                Err(e) => {
                    cells.extend(nan_cells(2));
                    return (cells, Status::Failed(e.to_string()));
                }
            };
            cells.push(zeta.into());
            if !p.is_lossless() {
                cells.push(f64::NAN.into());
                return (cells, Status::Note("no exact fit for gamma>0".into()));
            }
            match exact_fit(&p, k, w, &spec.settings) {
                Ok(f) => {
                    cells.push(f.zeta().into());
                    let st = if label.admits(spec.regime) { Status::Ok } else { Status::Note("outside window".into()) };
                    (cells, st)
                }
                Err(e) => {
                    cells.push(f64::NAN.into());
                    (cells, Status::Failed(format!("exact fit: {e}")))
                }
            }
        })
        .collect();
    for (c, s) in rows {
        t.push(c, s);
    }
    Ok(t)
}

fn scan_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let ratios = spec.axis(0, "strength", 2)?;
    if ratios.iter().any(|&r| r <= 0.0) {
        return Err(StudyError::Usage("strength grid must be positive".into()));
    }
    let scan = scan_scattering_length(&ratios, spec.branch, &spec.settings.solver);
    let mut t = Table::new(&[
        "strength",
        "a1d_over_lambda",
        "n_bound",
        "resonance_flag",
        "g1d_reduced",
        "crossover",
        "collision_phase",
        "error_estimate",
    ]);
    for pt in &scan.points {
        match &pt.result {
            Ok(r) => {
                let a = r.a_over_lambda;
                // coupling in units of 1/(m λ̄)
                let g = pseudo_coupling(a, 1.0).map(|pp| pp.g1d).unwrap_or(f64::INFINITY);
                let phase = collision_phase(spec.settings.dk_ref, 1.0, a).map(|c| c.phase).unwrap_or(f64::NAN);
                t.push(
                    vec![
                        pt.ratio.into(),
                        a.into(),
                        Cell::Int(r.n_bound as i64),
                        Cell::Int(i64::from(pt.resonance)),
                        g.into(),
                        Cell::Text(crossover_label(a).to_string()),
                        phase.into(),
                        r.error_estimate.into(),
                    ],
                    Status::Ok,
                );
            }
            Err(e) => {
                let mut cells =
                    vec![pt.ratio.into(), f64::NAN.into(), Cell::Int(-1), Cell::Int(i64::from(pt.resonance))];
                cells.extend([f64::NAN.into(), Cell::Text("unknown".into()), f64::NAN.into(), f64::NAN.into()]);
                t.push(cells, Status::Failed(e.to_string()));
            }
        }
    }
    let at = |idx: &[usize]| idx.iter().map(|&i| format!("{:.6e}", scan.points[i].ratio)).collect::<Vec<_>>().join(" ");
    t.meta("branch", spec.branch);
    t.meta("divergences", scan.divergences.len());
    t.meta("divergences_at", at(&scan.divergences));
    t.meta("zero_crossings", scan.zero_crossings.len());
    t.meta("zero_crossings_at", at(&scan.zero_crossings));
    t.meta("dk_ref", spec.settings.dk_ref);
    Ok(t)
}

fn spectrum_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let p = spec.params()?;
    if !p.is_lossless() {
        return Err(rydpol::Error::RequiresLossless.into());
    }
    let (na, _) = axis_names(spec.regime);
    let axis = spec.axis(0, na, 1)?;
    let strength = spec.strengths.first().copied().unwrap_or(0.5);
    let cfg = spec.settings.spectrum();
    let th = spec.settings.thresholds;
    let (q, reference) = match spec.settings.strength_at {
        StrengthAt::Origin => (with_origin_strength(&p, strength, spec.regime, &th)?, None),
        StrengthAt::Bound => {
            let (q, w) = with_bound_state_strength(&p, strength, 0, spec.regime, &cfg)?;
            (q, Some(w))
        }
    };
    let reduce_omega = |w: f64| match spec.regime {
        Regime::FarDetuned => far_x(&q, w),
        Regime::LowEnergy => w / q.omega_c(),
    };
    let mut t =
        Table::new(&[na, "branch", "x_n", "edge", "gv_over_vg", "residual", "reduced_energy", "local_strength"]);
    let results: Vec<_> = axis
        .par_iter()
        .map(|&a| {
            let (k, _) = physical_point(&q, spec.regime, a, 0.0);
            let edge = regimes::omega_from_omega_bar(&q, k, 0.0, spec.regime).map(reduce_omega);
            (a, edge, self_consistent_spectrum(&q, k, spec.regime, &cfg))
        })
        .collect();
    for (a, edge, res) in results {
        let edge = edge.unwrap_or(f64::NAN);
        match res {
            Ok(states) if states.is_empty() => {
                let mut cells = vec![a.into(), Cell::Int(-1), f64::NAN.into(), edge.into()];
                cells.extend(nan_cells(4));
                t.push(cells, Status::Note("no bound state".into()));
            }
            Ok(states) => {
                for s in states {
                    let gv = s.group_velocity.map(|g| g / q.group_velocity()).unwrap_or(f64::NAN);
                    let status = if s.group_velocity.is_some() {
                        Status::Ok
                    } else {
                        Status::Note("group velocity unavailable".into())
                    };
                    t.push(
                        vec![
                            a.into(),
                            Cell::Int(s.n as i64),
                            reduce_omega(s.omega).into(),
                            edge.into(),
                            gv.into(),
                            (s.residual / q.omega_c()).into(),
                            s.reduced_energy.into(),
                            s.strength.into(),
                        ],
                        status,
                    );
                }
            }
            Err(e) => {
                let mut cells = vec![a.into(), Cell::Int(-1), f64::NAN.into(), edge.into()];
                cells.extend(nan_cells(4));
                t.push(cells, Status::Failed(e.to_string()));
            }
        }
    }
    t.meta("target_strength", strength);
    t.meta("rescaled_c6", format!("{:.12e}", q.c6));
    if let Some(w) = reference {
        t.meta("reference_x", format!("{:.12e}", reduce_omega(w)));
    }
    Ok(t)
}

/// |φ₁ − φ₂| modulo π.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn tmatrix_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let ks = spec.axis(0, "k xi", 1)?;
    if ks.iter().any(|&k| k <= 0.0) {
        return Err(StudyError::Usage("momenta must be positive".into()));
    }
    let strengths = if spec.strengths.is_empty() { vec![0.5, 1.0, 5.0] } else { spec.strengths.clone() };
    let cfg = spec.settings.tmatrix;
    let solver = spec.settings.solver;
    let branch = spec.branch;
    let mut t = Table::new(&["strength", "k", "phi_ode", "phi_tmatrix", "abs_diff", "unitarity", "refinement_change"]);
    let rows: Vec<(Vec<Cell>, Status)> = cartesian(&strengths, &ks)
        .par_iter()
        .map(|&(s, k)| {
            let red = ReducedPotential::from_ratio(s, branch);
            let ode = schroedinger::phase_shift(&red, k, &solver);
            let sol = tmatrix::solve_t(&red, k * k, &cfg);
            let mut cells = vec![s.into(), k.into()];
            match (ode, sol) {
                (Ok(a), Ok(sol)) => {
                    let unit = sol.smatrix().map(|z| z.norm() - 1.0).unwrap_or(f64::NAN);
                    match tmatrix::onshell_phase(&sol, cfg.unitarity_tol) {
                        Ok(b) => {
                            cells.extend([
                                a.into(),
                                b.into(),
                                phase_distance(a, b).into(),
                                unit.into(),
                                sol.refinement_change.unwrap_or(f64::NAN).into(),
                            ]);
                            let st = if sol.near_singular {
                                Status::Note(format!("near singular, condition {:.3e}", sol.condition))
                            } else {
                                Status::Ok
                            };
                            (cells, st)
                        }
                        Err(e) => {
                            cells.extend([a.into(), f64::NAN.into(), f64::NAN.into(), unit.into(), f64::NAN.into()]);
                            (cells, Status::Failed(e.to_string()))
                        }
                    }
                }
                (a, b) => {
                    let msg =
                        [a.err(), b.err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
                    cells.extend(nan_cells(5));
                    (cells, Status::Failed(msg))
                }
            }
        })
        .collect();
    for (c, s) in rows {
        t.push(c, s);
    }
    t.meta("branch", branch);
    Ok(t)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).norm() / b.norm()
    }
}

fn adiabatic_study(spec: &StudySpec) -> Result<Table, StudyError> {
    let base = spec.params()?;
    let ratios = spec.axis(0, "Omega/|Delta|", 2)?;
    if ratios.iter().any(|&r| r <= 0.0) {
        return Err(StudyError::Usage("Omega/|Delta| must be positive".into()));
    }
    let (y, x) = spec.point;
    let th = spec.settings.thresholds;
    let mut t = Table::new(&[
        "rabi_over_detuning",
        "y",
        "x",
        "rel_alpha_m_exact",
        "rel_alpha_m_formula",
        "rel_chibar",
        "rel_omega_bar_m_exact",
        "rel_omega_bar_m_formula",
    ]);
    let rows: Vec<(Vec<Cell>, Status)> = ratios
        .par_iter()
        .map(|&r| {
            let mut cells = vec![r.into(), y.into(), x.into()];
            let run = || -> Result<Vec<Cell>, rydpol::Error> {
                let p = SystemParams::new(base.g, r * base.detuning().norm(), base.delta, base.gamma, base.c, base.c6)?;
                let k = k_from_far_y(&p, y);
                let w = omega_from_far_x(&p, x);
                debug_assert!((far_y(&p, k) - y).abs() < 1e-12 && (far_x(&p, w) - x).abs() < 1e-12);
                let ad = coeffs_adiabatic(&p, k, w)?;
                let formula = regimes::coeffs_far_detuned(&p, k, w, &th)?;
                let exact = exact_fit(&p, k, w, &spec.settings)?;
                let m = p.mass();
                Ok(vec![
                    rel(ad.alpha_m, exact.alpha * m).into(),
                    rel(ad.alpha_m, formula.alpha * m).into(),
                    rel(ad.chibar, chibar_full(&p, w)?).into(),
                    rel(ad.omega_bar_m, exact.omega_bar * m).into(),
                    rel(ad.omega_bar_m, formula.omega_bar * m).into(),
                ])
            };
            match run() {
                Ok(c) => {
                    cells.extend(c);
                    (cells, Status::Ok)
                }
                Err(e) => {
                    cells.extend(nan_cells(5));
                    (cells, Status::Failed(e.to_string()))
                }
            }
        })
        .collect();
    for (c, s) in rows {
        t.push(c, s);
    }
    t.meta("point", format!("y={y} x={x}"));
    Ok(t)
}

/// Scales of the parameter file at K = ω = 0.
pub fn describe(p: &SystemParams, regime: Regime, settings: &Settings) -> Vec<(String, String)> {
    let mut out = vec![
        ("v_g".to_string(), format!("{:.12e}", p.group_velocity())),
        ("omega_c".to_string(), format!("{:.12e}", p.omega_c())),
        ("q_c".to_string(), format!("{:.12e}", p.q_c())),
    ];
    if let Ok(s) = derive_scales(p, 0.0, 0.0, regime, &settings.thresholds) {
        out.push(("origin_xi".into(), format!("{:.12e}", s.xi)));
        out.push(("origin_lambda_bar".into(), format!("{:.12e}", s.lambda_bar)));
        out.push(("origin_strength".into(), format!("{:.12e}", s.strength)));
    }
    out
}
