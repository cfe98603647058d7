//! Exact single-polariton modes and the exact pair propagator, together with
//! the extraction of its three-term structure χ̄ + two poles in q².

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::params::SystemParams;
use crate::regimes;
use crate::{Error, Result};

type C = Complex64;

/// Polariton branch labels; `Dark` is the branch with ε → 0 as q → 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lower,
    Dark,
    Upper,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Lower, Branch::Dark, Branch::Upper];

    pub fn index(self) -> usize {
        match self {
            Branch::Lower => 0,
            Branch::Dark => 1,
            Branch::Upper => 2,
        }
    }
}

/// Eigen-decomposition of the single-particle Hamiltonian at momentum q.
///
/// Basis order is (e, p, s). Column α of `ubar` is the mode vector of branch
/// α; `u` is its inverse, so `u` maps field amplitudes to mode amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub q: C,
    /// Energies ordered as [lower, dark, upper].
    pub energies: [C; 3],
    pub u: Matrix3<C>,
    pub ubar: Matrix3<C>,
    /// Two eigenvalues closer than the degeneracy tolerance.
    pub degenerate: bool,
}

impl ModeDecomposition {
    pub fn energy(&self, b: Branch) -> C {
        self.energies[b.index()]
    }

    /// Rydberg weight Ū_s^α U_α^s of branch α.
    pub fn rydberg_weight(&self, b: Branch) -> C {
        let a = b.index();
        self.ubar[(2, a)] * self.u[(a, 2)]
    }
}

pub fn hamiltonian(p: &SystemParams, q: C) -> Matrix3<C> {
    let z = C::new(0.0, 0.0);
    let g = C::from(p.g);
    let om = C::from(p.omega_rabi);
    Matrix3::new(q * p.c, g, z, g, p.detuning(), om, z, om, z)
}

/// Roots of ε³ + a2 ε² + a1 ε + a0, polished by Newton steps.
fn cubic_roots(a2: C, a1: C, a0: C) -> [C; 3] {
    let poly = |e: C| ((e + a2) * e + a1) * e + a0;
    let dpoly = |e: C| (3.0 * e + 2.0 * a2) * e + a1;
    let shift = -a2 / 3.0;
    let pp = a1 - a2 * a2 / 3.0;
    let qq = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (qq / 2.0).powu(2) + (pp / 3.0).powu(3);
    let sq = disc.sqrt();
    let cand1 = -qq / 2.0 + sq;
    let cand2 = -qq / 2.0 - sq;
    let base = if cand1.norm() >= cand2.norm() { cand1 } else { cand2 };
    let w = C::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = if base.norm() == 0.0 {
        [shift; 3]
    } else {
        let u = base.cbrt();
        let v = -pp / (3.0 * u);
        [u + v + shift, w * u + w * w * v + shift, w * w * u + w * v + shift]
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let d = dpoly(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = poly(*r) / d;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm() {
                break;
            }
        }
    }
    roots
}

fn cross(a: Vector3<C>, b: Vector3<C>) -> Vector3<C> {
    Vector3::new(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
}

fn null_vector(h: &Matrix3<C>, e: C) -> Vector3<C> {
    let m = h - Matrix3::identity() * e;
    let rows: Vec<Vector3<C>> = (0..3).map(|i| m.row(i).transpose()).collect();
    let cands = [cross(rows[0], rows[1]), cross(rows[0], rows[2]), cross(rows[1], rows[2])];
    cands.into_iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap()
}

pub(crate) fn modes_complex(p: &SystemParams, q: C) -> ModeDecomposition {
    let h = hamiltonian(p, q);
    let cq = q * p.c;
    let d = p.detuning();
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    let mut e = cubic_roots(-(cq + d), -(g2 + o2 - cq * d), cq * o2);
    let real_problem = p.is_lossless() && q.im == 0.0;
    if real_problem {
        for r in e.iter_mut() {
            r.im = 0.0;
        }
    }
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let scale = 1.0 + e.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let degenerate = (0..3).any(|i| (e[i] - e[(i + 1) % 3]).norm() < 1e-10 * scale);
    let mut r = Matrix3::<C>::zeros();
    for (a, &ea) in e.iter().enumerate() {
        let mut v = null_vector(&h, ea);
        let norm2 = v.dot(&v);
        let n = if norm2.norm() > 1e-300 { norm2.sqrt() } else { C::from(v.norm()) };
        v /= n;
        if real_problem {
            for x in v.iter_mut() {
                x.im = 0.0;
            }
        }
        r.set_column(a, &v);
    }
    let u = r.try_inverse().unwrap_or_else(|| r.transpose());
    ModeDecomposition { q, energies: e, u, ubar: r, degenerate }
}

pub fn single_particle_modes(p: &SystemParams, q: f64) -> ModeDecomposition {
    modes_complex(p, C::from(q))
}

/// Largest relative eigen-residual ‖Hv − εv‖/‖H‖ over branches.
pub fn eigen_residual(p: &SystemParams, m: &ModeDecomposition) -> f64 {
    let h = hamiltonian(p, m.q);
    let hn = h.norm();
    (0..3)
        .map(|a| {
            let v = m.ubar.column(a).into_owned();
            (h * v - v * m.energies[a]).norm() / (hn * v.norm())
        })
        .fold(0.0, f64::max)
}

pub(crate) fn chi_complex(p: &SystemParams, q: C, k: f64, omega: C, eta: f64) -> Result<C> {
    let m1 = modes_complex(p, C::from(k / 2.0) + q);
    let m2 = modes_complex(p, C::from(k / 2.0) - q);
    let mut sum = C::new(0.0, 0.0);
    let scale = 1.0 + omega.norm() + m1.energies.iter().chain(&m2.energies).map(|e| e.norm()).sum::<f64>();
    for a in Branch::ALL {
        for b in Branch::ALL {
            let den = omega - m1.energy(a) - m2.energy(b) + C::new(0.0, eta);
            if eta == 0.0 && den.norm() < 1e-13 * scale {
                return Err(Error::OnShell);
            }
            sum += m1.rydberg_weight(a) * m2.rydberg_weight(b) / den;
        }
    }
    Ok(sum)
}

/// Exact pair propagator χ_q(K, ω) with regulator +iη.
pub fn chi_exact(p: &SystemParams, q: f64, k: f64, omega: f64, eta: f64) -> Result<C> {
    chi_complex(p, C::from(q), k, C::from(omega), eta)
}

/// Pole positions of χ in x = q², from the pair resonance condition
/// ω − cK = g²[ε/h(ε) + (ω−ε)/h(ω−ε)] with h(e) = e² − Δe − Ω².
pub fn pair_poles(p: &SystemParams, k: f64, omega: f64) -> Vec<C> {
    let d = p.detuning();
    let g2 = p.g * p.g;
    let o2 = p.omega_rabi * p.omega_rabi;
    let a = C::from(omega / 2.0);
    let w = C::from(omega - p.c * k);
    // polynomials in t = ε − ω/2, coefficient i multiplies t^i
    let h0 = a * a - d * a - o2;
    let b = 2.0 * a - d;
    let hp = [h0, b, C::from(1.0)];
    let hm = [h0, -b, C::from(1.0)];
    let mut prod = [C::new(0.0, 0.0); 5];
    for i in 0..3 {
        for j in 0..3 {
            prod[i + j] += hp[i] * hm[j];
        }
    }
    let mut cross_terms = [C::new(0.0, 0.0); 4];
    for i in 0..3 {
        // (a + t) h₋ + (a − t) h₊
        cross_terms[i] += a * (hm[i] + hp[i]);
        cross_terms[i + 1] += hm[i] - hp[i];
    }
    let c0 = w * prod[0] - g2 * cross_terms[0];
    let c2 = w * prod[2] - g2 * cross_terms[2];
    let c4 = w * prod[4];
    let scale = c0.norm().max(c2.norm()).max(1e-300);
    let taus: Vec<C> = if c4.norm() <= 1e-14 * scale {
        if c2.norm() == 0.0 {
            vec![]
        } else {
            vec![-c0 / c2]
        }
    } else {
        let disc = (c2 * c2 - 4.0 * c4 * c0).sqrt();
        let s = if (c2.conj() * disc).re >= 0.0 { -(c2 + disc) / 2.0 } else { -(c2 - disc) / 2.0 };
        if s.norm() == 0.0 {
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0)]
        } else {
            vec![s / c4, c0 / s]
        }
    };
    taus.into_iter()
        .filter_map(|tau| {
            let e = a + tau.sqrt();
            let h = e * e - d * e - o2;
            if h.norm() == 0.0 {
                return None;
            }
            let pm = (e - g2 * e / h) / p.c;
            let qq = pm - k / 2.0;
            let x = qq * qq;
            x.is_finite().then_some(x)
        })
        .collect()
}

/// Three-term structure χ = χ̄ + α/(ω̄ − q²/m) + α_B/(ω̄_B − q²/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPropagatorFit {
    pub chibar: C,
    pub alpha: C,
    pub omega_bar: C,
    pub alpha_b: C,
    pub omega_bar_b: C,
    /// Max relative deviation of the three-term form from χ over the grid.
    pub residual: f64,
    /// The two poles nearly coincide.
    pub ill_conditioned: bool,
    pub k: f64,
    pub omega: f64,
}

impl PairPropagatorFit {
    pub fn zeta(&self) -> f64 {
        regimes::zeta(self.omega_bar, self.alpha, self.alpha_b, self.omega_bar_b)
    }

    /// Three-term form at momentum q.
    pub fn eval(&self, mass: C, q: f64) -> C {
        let x = q * q;
        let mut v = self.chibar + self.alpha * mass / (self.omega_bar * mass - x);
        if self.alpha_b.norm() > 0.0 {
            v += self.alpha_b * mass / (self.omega_bar_b * mass - x);
        }
        v
    }
}

/// Residue of χ(x) at `pole`, from the mean of χ(x)(x − P) on a circle.
fn contour_residue(p: &SystemParams, k: f64, omega: f64, pole: C, radius: f64) -> Result<C> {
    const N: usize = 64;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..N {
        let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / N as f64;
        let dx = C::from_polar(radius, th);
        let x = pole + dx;
        let f = chi_complex(p, x.sqrt(), k, C::from(omega), 0.0)?;
        acc += f * dx;
    }
    Ok(acc / N as f64)
}

pub fn fit_three_term(p: &SystemParams, k: f64, omega: f64, qgrid: &[f64]) -> Result<PairPropagatorFit> {
    let mut xs: Vec<f64> = qgrid.iter().map(|q| q * q).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    if xs.len() < 12 {
        return Err(Error::Config(format!("three-term fit needs at least 12 distinct q^2 values, got {}", xs.len())));
    }
    let poles = pair_poles(p, k, omega);
    if poles.is_empty() {
        return Err(Error::Convergence("no pair pole found".into()));
    }
    let xscale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let sep = if poles.len() == 2 { (poles[0] - poles[1]).norm() } else { f64::INFINITY };
    let ill = sep < 1e-6 * poles.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let mut residues = Vec::with_capacity(poles.len());
    for &pole in &poles {
        let r = if sep.is_finite() && !ill { 0.25 * sep } else { 0.25 * pole.norm().max(xscale) };
        residues.push(-contour_residue(p, k, omega, pole, r)?);
    }
    let mut terms: Vec<(C, C)> = poles.into_iter().zip(residues).collect();
    terms.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    for &x in &xs {
        for &(pole, _) in &terms {
            if (C::from(x) - pole).norm() <= 1e-9 * pole.norm().max(xscale * 1e-6) {
                return Err(Error::Config(format!("q grid point q^2 = {x} sits on a pole")));
            }
        }
    }
    let chi: Vec<C> =
        xs.iter().map(|&x| chi_complex(p, C::from(x.sqrt()), k, C::from(omega), 0.0)).collect::<Result<_>>()?;
    let pole_part = |x: f64| -> C { terms.iter().map(|&(pl, a)| a / (pl - x)).sum() };
    let chibar = xs.iter().zip(&chi).map(|(&x, &c)| c - pole_part(x)).sum::<C>() / xs.len() as f64;
    let residual = xs
        .iter()
        .zip(&chi)
        .map(|(&x, &c)| (c - chibar - pole_part(x)).norm() / c.norm().max(1e-300))
        .fold(0.0, f64::max);
    let m = p.mass();
    let (p1, a1) = terms[0];
    let (alpha_b, omega_bar_b) = match terms.get(1) {
        Some(&(p2, a2)) => (a2 / m, p2 / m),
        None => (C::new(0.0, 0.0), C::new(f64::INFINITY, 0.0)),
    };
    Ok(PairPropagatorFit {
        chibar,
        alpha: a1 / m,
        omega_bar: p1 / m,
        alpha_b,
        omega_bar_b,
        residual,
        ill_conditioned: ill,
        k,
        omega,
    })
}

/// ζ from the exact three-term structure.
pub fn zeta_exact(p: &SystemParams, k: f64, omega: f64, qgrid: &[f64]) -> Result<f64> {
    Ok(fit_three_term(p, k, omega, qgrid)?.zeta())
}

/// Default fit grid: `n` momenta spread over [0, qmax].
pub fn default_qgrid(qmax: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| qmax * (i as f64 + 0.37) / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> SystemParams {
        SystemParams::new(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn dark_state_at_zero_momentum() {
        let p = SystemParams::new(1.7, 0.6, 0.9, 0.0, 1.0, 1.0).unwrap();
        let m = single_particle_modes(&p, 0.0);
        assert!(m.energy(Branch::Dark).norm() < 1e-14);
        let v = m.ubar.column(1);
        let ratio = v[2] / v[0];
        assert_relative_eq!(ratio.re, -p.g / p.omega_rabi, epsilon = 1e-12);
        assert!(v[1].norm() < 1e-14);
    }

    #[test]
    fn unit_parameters_eigenvalues() {
        let m = single_particle_modes(&params(), 0.0);
        assert_relative_eq!(m.energy(Branch::Lower).re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(m.energy(Branch::Upper).re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn dark_slope_is_group_velocity() {
        let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0).unwrap();
        let h = 1e-5;
        let e1 = single_particle_modes(&p, h).energy(Branch::Dark).re;
        let e0 = single_particle_modes(&p, -h).energy(Branch::Dark).re;
        assert_relative_eq!((e1 - e0) / (2.0 * h), p.group_velocity(), max_relative = 1e-8);
    }

    #[test]
    fn decomposition_invariants() {
        let p = SystemParams::new(2.0, 0.7, -1.3, 0.0, 1.0, 1.0).unwrap();
        for i in 0..50 {
            let q = -5.0 + 0.2 * i as f64;
            let m = single_particle_modes(&p, q);
            assert!(eigen_residual(&p, &m) < 1e-12);
            let id = m.ubar * m.u;
            assert!((id - Matrix3::identity()).norm() < 1e-12);
            let tr: f64 = m.energies.iter().map(|e| e.re).sum();
            assert_relative_eq!(tr, p.c * q + p.delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn chi_symmetric_in_q() {
        let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0).unwrap();
        let a = chi_exact(&p, 0.8, 0.3, -0.05, 1e-6).unwrap();
        let b = chi_exact(&p, -0.8, 0.3, -0.05, 1e-6).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn chi_large_momentum_is_saturation() {
        let p = SystemParams::new(1.0, 0.2, 3.0, 0.0, 1.0, 1.0).unwrap();
        let omega = 0.01 * p.omega_c();
        let cb = regimes::chibar_full(&p, omega).unwrap();
        let xi = (p.c6 * cb.re).abs().powf(1.0 / 6.0);
        let err = |q: f64| ((chi_exact(&p, q, 0.0, omega, 0.0).unwrap() - cb) / cb).norm();
        assert!(err(1e3 / xi) < 1e-6);
        // approach is algebraic, ∝ 1/q²
        let ratio = err(1e2 / xi) / err(1e3 / xi);
        assert!((ratio - 100.0).abs() < 5.0, "{ratio}");
    }

    #[test]
    fn chi_diverges_on_dark_pair_resonance() {
        let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0).unwrap();
        let k = 0.4;
        let e = single_particle_modes(&p, k / 2.0).energy(Branch::Dark).re;
        assert_eq!(chi_exact(&p, 0.0, k, 2.0 * e, 0.0).unwrap_err(), Error::OnShell);
        let a = chi_exact(&p, 0.0, k, 2.0 * e, 1e-4).unwrap().norm();
        let b = chi_exact(&p, 0.0, k, 2.0 * e, 1e-6).unwrap().norm();
        assert!(b > 50.0 * a);
    }

    #[test]
    fn three_term_structure_is_exact() {
        let p = SystemParams::new(2.0, 0.7, 1.3, 0.0, 1.0, 1.0).unwrap();
        let fit = fit_three_term(&p, 0.2, -0.03, &default_qgrid(10.0, 40)).unwrap();
        assert!(fit.residual < 1e-9, "{}", fit.residual);
        let cb = regimes::chibar_full(&p, -0.03).unwrap();
        assert!((fit.chibar - cb).norm() < 1e-6 * cb.norm());
    }

    #[test]
    fn too_few_grid_points() {
        let p = params();
        assert!(fit_three_term(&p, 0.0, 0.0, &default_qgrid(1.0, 8)).is_err());
    }
}
