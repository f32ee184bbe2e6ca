//! Semiclassical trial density matrices built from coherent states: the
//! bulk part γ₁ (and its restriction γ̃₁) plus the dyadic annulus orbitals
//! γ₂, γ̃₂ that carry surplus electrons of negative ions.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::RadialFunction;
use crate::profile::{AnnulusProfile, CoherentProfile};
use crate::quad::GaussLegendre;
use crate::smear::convolve_g2;
use crate::tf::TFAtom;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    /// R̃ = factor·Z^{-1/3}.
    pub r_tilde_factor: f64,
    /// Offset K of the annulus orbital family.
    pub k_offset: u32,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            r_tilde_factor: 100.0,
            k_offset: 20,
        }
    }
}

/// Immutable trial-state description for one atom.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSpec {
    #[serde(skip)]
    pub atom: TFAtom,
    pub profile: CoherentProfile,
    pub annulus: AnnulusProfile,
    /// Phase-space occupancy radius squared over two: A(p,q) = 1{p²/2 ≤ W(q)}
    /// with W = [V_Z − u′]₊.
    #[serde(skip)]
    pub occupied: RadialFunction,
    /// Classical density ρ_cl(q) = 2(2π)⁻³·|{p : A(p,q) = 1}|.
    #[serde(skip)]
    pub rho_cl: RadialFunction,
    /// Ã keeps the points with |q| ≤ R̃ − R.
    pub q_cut: f64,
    pub eps_rtilde: f64,
    #[serde(skip)]
    smeared: OnceLock<RadialFunction>,
}

impl TrialSpec {
    pub fn new(atom: TFAtom, opts: &TrialOptions) -> Result<Self> {
        let sys = atom.sys;
        let profile = CoherentProfile::new(sys.r)?;
        let r_tilde = opts.r_tilde_factor * sys.z.powf(-1.0 / 3.0);
        if !(r_tilde > 2.0 * sys.r) {
            return invalid(format!(
                "R_tilde = {r_tilde:e} must exceed twice the coherent length {:e}",
                sys.r
            ));
        }
        let annulus = AnnulusProfile::new(r_tilde, opts.k_offset)?;
        let occupied = atom.occupied_potential();
        let rho_cl = occupied.map(|_, w| classical_density(w));
        let q_cut = r_tilde - sys.r;
        let eps_rtilde = restriction_loss(&rho_cl, q_cut, sys.z);
        Ok(Self {
            atom,
            profile,
            annulus,
            occupied,
            rho_cl,
            q_cut,
            eps_rtilde,
            smeared: OnceLock::new(),
        })
    }

    pub fn r_tilde(&self) -> f64 {
        self.annulus.r_tilde
    }

    /// Fermi momentum (2W(|q|))^{1/2} of the occupied p-ball.
    pub fn fermi_momentum(&self, q: f64) -> f64 {
        (2.0 * self.occupied.value(q).max(0.0)).sqrt()
    }

    /// ρ_R = ρ_cl ∗ g_R², the density of γ₁. Computed once.
    pub fn smeared_density(&self) -> Result<&RadialFunction> {
        if let Some(s) = self.smeared.get() {
            return Ok(s);
        }
        let s = convolve_g2(&self.rho_cl, self.profile.r)?;
        Ok(self.smeared.get_or_init(|| s))
    }
}

/// 2(2π)⁻³·(4π/3)(2w)^{3/2} = (2w)^{3/2}/(3π²).
pub fn classical_density(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        (2.0 * w).powf(1.5) / (3.0 * PI * PI)
    }
}

/// ε_R̃ = 1 − ∫_{|q| ≤ q_cut} ρ_cl / Z, clamped to [0, 1].
fn restriction_loss(rho_cl: &RadialFunction, q_cut: f64, z: f64) -> f64 {
    (1.0 - rho_cl.integrate_within(q_cut) / z).clamp(0.0, 1.0)
}

/// tr γ₁ = ∫ρ_cl.
pub fn trace_gamma1(spec: &TrialSpec) -> f64 {
    spec.rho_cl.integrate()
}

/// tr γ = ∫Ã dΩ + (N − Z)‖f̃‖² + ε_R̃·Z‖f̃‖², the annulus orbitals being
/// counted with their numerical norm. For N < Z there is no annulus part and
/// tr γ₁ is returned.
pub fn trace_gamma_total(spec: &TrialSpec) -> f64 {
    let sys = spec.atom.sys;
    if sys.n < sys.z {
        return trace_gamma1(spec);
    }
    let inner = spec.rho_cl.integrate_within(spec.q_cut);
    let norm = spec.annulus.norm;
    inner + (sys.n - sys.z) * norm + spec.eps_rtilde * sys.z * norm
}

/// Smallest R̃ (in units of Z^{-1/3}) for which ε_R̃ < `target`.
pub fn r_tilde_star(spec: &TrialSpec, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return invalid(format!("target must lie in (0, 1), got {target}"));
    }
    let sys = spec.atom.sys;
    let scale = sys.z.powf(-1.0 / 3.0);
    let eps = |f: f64| restriction_loss(&spec.rho_cl, f * scale - sys.r, sys.z);
    let lo_start = 2.0 * sys.r / scale;
    let hi_limit = spec.rho_cl.grid.r_max() / scale;
    if eps(hi_limit) >= target {
        return Err(Error::Grid(format!(
            "density mass outside the grid end exceeds {target}; extend t_max"
        )));
    }
    if eps(lo_start) < target {
        return Ok(lo_start);
    }
    let (mut lo, mut hi) = (lo_start, hi_limit);
    while hi - lo > 1e-6 * hi {
        let mid = (lo * hi).sqrt();
        if eps(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KineticUpper {
    /// 2(2π)⁻³∫∫_A p²/2 dp dq.
    pub phase_space: f64,
    /// tr γ₁·‖∇g‖²/R².
    pub penalty: f64,
}

/// ∫_{|p| ≤ P} p²/2 d³p by Gauss-Legendre in |p| (exact for this degree).
fn ball_kinetic(p_fermi: f64, rule: &GaussLegendre) -> f64 {
    rule.integrate(0.0, p_fermi, |p| 4.0 * PI * p * p * p * p / 2.0)
}

fn phase_space_kinetic(spec: &TrialSpec, q_cut: f64) -> f64 {
    let rule = GaussLegendre::new(4);
    let pref = 2.0 / (2.0 * PI).powi(3);
    let density = spec
        .occupied
        .map(|_, w| pref * ball_kinetic((2.0 * w.max(0.0)).sqrt(), &rule));
    density.integrate_within(q_cut)
}

pub fn kinetic_upper(spec: &TrialSpec) -> KineticUpper {
    KineticUpper {
        phase_space: phase_space_kinetic(spec, f64::INFINITY),
        penalty: trace_gamma1(spec) * spec.profile.kinetic(),
    }
}

/// −Z∫ρ_R/|x|.
pub fn external_upper(spec: &TrialSpec) -> Result<f64> {
    let rho = spec.smeared_density()?;
    Ok(-spec.atom.sys.z * rho.integrate_weighted(|r| 1.0 / r))
}

/// D(ρ_R, ρ_R).
pub fn hartree_upper(spec: &TrialSpec) -> Result<f64> {
    Ok(spec.smeared_density()?.self_energy())
}

/// Terms of the restricted state γ̃₁ next to those of γ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub kinetic_full: f64,
    pub kinetic_restricted: f64,
    pub hartree_full: f64,
    pub hartree_restricted: f64,
    /// tr[(−Z/|x|)(γ̃₁ − γ₁)]. Every removed coherent state sits at
    /// |q| > R̃ − R > R, where its potential energy is exactly −Z/|q|.
    pub external_shift: f64,
}

pub fn restriction_report(spec: &TrialSpec) -> Result<RestrictionReport> {
    let z = spec.atom.sys.z;
    let cut = spec.q_cut;
    let restricted = spec
        .rho_cl
        .map(|r, v| if r <= cut { v } else { 0.0 });
    let hartree_restricted = convolve_g2(&restricted, spec.profile.r)?.self_energy();
    let outside = spec.rho_cl.integrate_weighted(|r| 1.0 / r)
        - spec.rho_cl.integrate_weighted_within(cut, |r| 1.0 / r);
    Ok(RestrictionReport {
        kinetic_full: phase_space_kinetic(spec, f64::INFINITY),
        kinetic_restricted: phase_space_kinetic(spec, cut),
        hartree_full: hartree_upper(spec)?,
        hartree_restricted,
        external_shift: z * outside.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma2Bounds {
    pub kinetic_bound: f64,
    pub interaction_bound: f64,
    pub external_sign: Sign,
}

/// Kinetic and interaction bounds of the annulus orbitals for `surplus`
/// electrons.
pub fn gamma2_bounds(annulus: &AnnulusProfile, surplus: f64) -> Gamma2Bounds {
    let k = annulus.k_offset as i32;
    Gamma2Bounds {
        kinetic_bound: 2.0 / 3.0 * 0.25f64.powi(k + 1) * annulus.grad_norm_sq,
        interaction_bound: PI / 4.0 * surplus * 0.5f64.powi(k) * annulus.xi_moment,
        external_sign: Sign::Negative,
    }
}

pub fn gamma2_diagnostics(spec: &TrialSpec) -> Result<Gamma2Bounds> {
    let sys = spec.atom.sys;
    if sys.n <= sys.z {
        return invalid(format!(
            "annulus orbitals exist only for N > Z (N = {}, Z = {})",
            sys.n, sys.z
        ));
    }
    Ok(gamma2_bounds(&spec.annulus, sys.n - sys.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AtomSystem;
    use crate::tf::{solve_atom, TfOptions};
    use approx::assert_relative_eq;

    fn spec(z: f64, lambda: f64) -> TrialSpec {
        let sys = AtomSystem::new(z, lambda, 0.5, 5.0 / 9.0).unwrap();
        let atom = solve_atom(&sys, &TfOptions::default()).unwrap();
        TrialSpec::new(atom, &TrialOptions::default()).unwrap()
    }

    #[test]
    fn classical_density_is_tf_density() {
        let s = spec(10.0, 1.0);
        for i in (0..s.rho_cl.grid.n).step_by(97) {
            assert_relative_eq!(
                s.rho_cl.values[i],
                s.atom.rho.values[i],
                max_relative = 1e-12,
                epsilon = 1e-300
            );
        }
        assert_relative_eq!(trace_gamma1(&s), 10.0, max_relative = 1e-6);
    }

    #[test]
    fn negative_ion_trace() {
        let s = spec(10.0, 1.2);
        assert_relative_eq!(trace_gamma1(&s), 10.0, max_relative = 1e-6);
        assert_relative_eq!(trace_gamma_total(&s), 12.0, max_relative = 1e-6);
        assert!(s.eps_rtilde > 0.0 && s.eps_rtilde < 1e-3);
        let star = r_tilde_star(&s, 1e-3).unwrap();
        assert!(star > 10.0 && star < 100.0, "{star}");
    }

    #[test]
    fn kinetic_identity_and_penalty() {
        let s = spec(100.0, 1.0);
        let k = kinetic_upper(&s);
        assert_relative_eq!(k.phase_space, s.atom.energy.kinetic, max_relative = 1e-10);
        let expected = 100f64.powf(1.0 + 10.0 / 9.0) * PI * PI;
        assert_relative_eq!(k.penalty, expected, max_relative = 1e-6);
    }

    #[test]
    fn gamma2_requires_surplus() {
        assert!(gamma2_diagnostics(&spec(10.0, 1.0)).is_err());
        let g = gamma2_diagnostics(&spec(10.0, 1.5)).unwrap();
        assert_eq!(g.external_sign, Sign::Negative);
        assert!(g.kinetic_bound < 1e-10 && g.interaction_bound < 1e-5);
    }

    #[test]
    fn smeared_terms() {
        let s = spec(10.0, 1.0);
        let point = s.atom.energy.external;
        let ext = external_upper(&s).unwrap();
        assert!(ext < 0.0 && ext.abs() <= point.abs());
        let d = hartree_upper(&s).unwrap();
        assert!(d > 0.0 && d <= 1.1 * s.atom.energy.hartree);
        let rep = restriction_report(&s).unwrap();
        assert!(rep.kinetic_restricted <= rep.kinetic_full);
        assert!(rep.hartree_restricted <= rep.hartree_full);
        assert!(rep.external_shift >= 0.0);
    }
}
