//! Upper and lower energy expressions around the Thomas-Fermi energy and the
//! sweeps that track their remainders in Z.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::{
    external_upper, gamma2_bounds, hartree_upper, kinetic_upper, restriction_report,
    trace_gamma1, trace_gamma_total, Gamma2Bounds, TrialOptions, TrialSpec,
};
use crate::corrections::{correction_report, fit_exponent, CorrectionOptions, ExponentFit};
use crate::error::{invalid, Result};
use crate::grid::RadialFunction;
use crate::hole::{mollify, scan_grid, sup_norm_scan};
use crate::model::AtomSystem;
use crate::quad::GaussLegendre;
use crate::tf::{build_atom, solve_universal_with, TFAtom, TFUniversalSolution, TfOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    pub tf: TfOptions,
    pub trial: TrialOptions,
    pub corrections: CorrectionOptions,
    pub hole_points: usize,
    /// Inside r_core = factor/Z the lower-bound trace uses the
    /// nonrelativistic symbol, where the relativistic one is not integrable.
    pub core_radius: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            tf: TfOptions::default(),
            trial: TrialOptions::default(),
            corrections: CorrectionOptions::default(),
            hole_points: 41,
            core_radius: 1.0,
        }
    }
}

/// ∫_{|p| ≤ P} (T(p) − v) d³p with T = E_c − c² and T(P) = v.
fn ball_trace(v: f64, c: f64, rule: &GaussLegendre) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let c2 = c * c;
    let p_max = (v * (v + 2.0 * c2)).sqrt() / c;
    rule.integrate(0.0, p_max, |p| {
        let t = c2 * p * p / (c * (c2 + p * p).sqrt() + c2);
        4.0 * PI * p * p * (t - v)
    })
}

/// 2(2π)⁻³∫∫ min(E_c(p) − c² − V(q), 0) dp dq.
pub fn weyl_negative_trace_c(c: f64, v: &RadialFunction) -> Result<f64> {
    if !(c > 0.0) {
        return invalid("speed of light must be positive");
    }
    let rule = GaussLegendre::new(24);
    let pref = 2.0 / (2.0 * PI).powi(3);
    Ok(v.map(|_, x| pref * ball_trace(x, c, &rule)).integrate())
}

pub fn weyl_negative_trace(sys: &AtomSystem, v: &RadialFunction) -> Result<f64> {
    weyl_negative_trace_c(sys.c, v)
}

fn ball_trace_nonrelativistic(v: f64) -> f64 {
    let v = v.max(0.0);
    -8.0 * PI / 15.0 * v * (2.0 * v).powf(1.5)
}

/// The c → ∞ limit: −(8π/15)·2(2π)⁻³∫[V]₊(2[V]₊)^{3/2}.
pub fn weyl_nonrelativistic(v: &RadialFunction) -> f64 {
    let pref = 2.0 / (2.0 * PI).powi(3);
    v.map(|_, x| pref * ball_trace_nonrelativistic(x)).integrate()
}

/// Relativistic symbol for |q| ≥ r_core and p²/2 inside. For Coulomb-like V
/// the relativistic trace density grows like |q|⁻⁴ at the origin.
pub fn weyl_trace_with_core(c: f64, v: &RadialFunction, r_core: f64) -> Result<f64> {
    if !(c > 0.0) {
        return invalid("speed of light must be positive");
    }
    if !(r_core >= 0.0) {
        return invalid("core radius must be nonnegative");
    }
    let rule = GaussLegendre::new(24);
    let pref = 2.0 / (2.0 * PI).powi(3);
    Ok(v.map(|r, x| {
        if r < r_core {
            pref * ball_trace_nonrelativistic(x)
        } else {
            pref * ball_trace(x, c, &rule)
        }
    })
    .integrate())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperLedger {
    pub kinetic_phase_space: f64,
    pub kinetic_penalty: f64,
    pub external: f64,
    /// Attraction lost by dropping coherent states beyond R̃ − R (N > Z).
    pub external_restriction: f64,
    pub hartree: f64,
    pub gamma2: Option<Gamma2Bounds>,
    pub phi2_term: f64,
    pub phi1_deficit: f64,
    pub hartree_lift: f64,
    pub trace_gamma1: f64,
    pub trace_total: f64,
    pub eps_rtilde: f64,
}

impl UpperLedger {
    pub fn total(&self) -> f64 {
        let g2 = self
            .gamma2
            .map(|g| g.kinetic_bound + g.interaction_bound)
            .unwrap_or(0.0);
        self.kinetic_phase_space
            + self.kinetic_penalty
            + self.external
            + self.external_restriction
            + self.hartree
            + g2
            + self.phi2_term
            + self.phi1_deficit
            + self.hartree_lift
    }
}

pub fn upper_bound(spec: &TrialSpec, opts: &BoundOptions) -> Result<UpperLedger> {
    let sys = spec.atom.sys;
    let kin = kinetic_upper(spec);
    let corr = correction_report(spec, &opts.corrections)?;
    let (gamma2, external_restriction) = if sys.n > sys.z {
        let rep = restriction_report(spec)?;
        let surplus = sys.n - sys.z + spec.eps_rtilde * sys.z;
        (Some(gamma2_bounds(&spec.annulus, surplus)), rep.external_shift)
    } else {
        (None, 0.0)
    };
    Ok(UpperLedger {
        kinetic_phase_space: kin.phase_space,
        kinetic_penalty: kin.penalty,
        external: external_upper(spec)?,
        external_restriction,
        hartree: hartree_upper(spec)?,
        gamma2,
        phi2_term: corr.phi2_term,
        phi1_deficit: corr.phi1_deficit,
        hartree_lift: corr.hartree_lift,
        trace_gamma1: trace_gamma1(spec),
        trace_total: trace_gamma_total(spec),
        eps_rtilde: spec.eps_rtilde,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerLedger {
    /// Phase-space trace of E_c − c² − (V_δ − u′), nonrelativistic in the
    /// core.
    pub weyl: f64,
    /// −u′N.
    pub chemical: f64,
    pub hartree: f64,
    pub sup_hole: f64,
    pub hole_electrons: f64,
    pub hole_term: f64,
    /// sup L / Z, the measured hole constant.
    pub k_hole: f64,
}

impl LowerLedger {
    pub fn total(&self) -> f64 {
        self.weyl + self.chemical - self.hartree - self.hole_term
    }
}

/// V_δ − u′ with V_δ = Z/|x| − ρ_δ∗|x|⁻¹.
pub fn mollified_potential(atom: &TFAtom, rho_delta: &RadialFunction) -> RadialFunction {
    let z = atom.sys.z;
    let up = atom.u_prime;
    rho_delta.newton_potential().map(|r, x| z / r - x - up)
}

pub fn lower_bound(atom: &TFAtom, opts: &BoundOptions) -> Result<LowerLedger> {
    let sys = atom.sys;
    let rho_delta = mollify(&atom.rho, sys.r)?;
    let v = mollified_potential(atom, &rho_delta);
    let weyl = weyl_trace_with_core(sys.c, &v, opts.core_radius / sys.z)?;
    let scan = sup_norm_scan(&rho_delta, &scan_grid(sys.z, opts.hole_points), sys.z)?;
    let sup_hole = scan.sup_l.max(scan.center_potential);
    let hole_electrons = sys.n.min(2.0 * sys.z + 1.0);
    Ok(LowerLedger {
        weyl,
        chemical: -atom.u_prime * sys.n,
        hartree: atom.energy.hartree,
        sup_hole,
        hole_electrons,
        hole_term: sup_hole * hole_electrons,
        k_hole: sup_hole / sys.z,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub sys: AtomSystem,
    pub e_tf: f64,
    pub e_upper: f64,
    pub e_lower: f64,
    pub upper: UpperLedger,
    pub lower: LowerLedger,
    pub remainder_upper: f64,
    /// (e_upper − e_tf)/Z^{7/3}.
    pub upper_ratio: f64,
    /// (e_tf − e_lower)/Z^{7/3}.
    pub lower_ratio: f64,
}

pub fn energy_report(
    sys: &AtomSystem,
    universal: &TFUniversalSolution,
    opts: &BoundOptions,
) -> Result<EnergyReport> {
    let atom = build_atom(sys, universal)?;
    let e_tf = atom.energy.total;
    let lower = lower_bound(&atom, opts)?;
    let spec = TrialSpec::new(atom, &opts.trial)?;
    let upper = upper_bound(&spec, opts)?;
    let e_upper = upper.total();
    let e_lower = lower.total();
    let s = sys.z.powf(7.0 / 3.0);
    Ok(EnergyReport {
        sys: *sys,
        e_tf,
        e_upper,
        e_lower,
        upper,
        lower,
        remainder_upper: e_upper - e_tf,
        upper_ratio: (e_upper - e_tf) / s,
        lower_ratio: (e_tf - e_lower) / s,
    })
}

/// Count of places where a sequence fails to decrease.
pub fn inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] >= w[0]).count()
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub lambda: f64,
    pub kappa: f64,
    pub delta: f64,
    pub reports: Vec<EnergyReport>,
    /// Fit of e_upper − e_tf against Z.
    pub remainder_fit: ExponentFit,
    /// max (e_upper − e_tf)/Z^{20/9} over the sweep.
    pub k_upper: f64,
    pub k_hole: f64,
    pub upper_inversions: usize,
    pub lower_inversions: usize,
    pub exponent_ok: bool,
    pub trends_ok: bool,
}

pub fn sandwich_report(
    lambda: f64,
    z_sweep: &[f64],
    kappa: f64,
    delta: f64,
    opts: &BoundOptions,
) -> Result<SandwichReport> {
    if z_sweep.len() < 4 {
        return invalid(format!("a sweep needs at least 4 points, got {}", z_sweep.len()));
    }
    if z_sweep.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("Z sweep must be strictly increasing");
    }
    if z_sweep[z_sweep.len() - 1] < 10.0 * z_sweep[0] {
        return invalid("Z sweep must span at least one decade");
    }
    let universal = solve_universal_with(lambda.min(1.0), &opts.tf)?;
    let reports: Vec<EnergyReport> = z_sweep
        .par_iter()
        .map(|&z| {
            let sys = AtomSystem::new(z, lambda, kappa, delta)?;
            energy_report(&sys, &universal, opts)
        })
        .collect::<Result<_>>()?;
    let remainder_fit = fit_exponent(
        &reports
            .iter()
            .map(|r| (r.sys.z, r.remainder_upper))
            .collect::<Vec<_>>(),
    )?;
    let k_upper = reports
        .iter()
        .map(|r| r.remainder_upper / r.sys.z.powf(20.0 / 9.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let k_hole = reports
        .iter()
        .map(|r| r.lower.k_hole)
        .fold(f64::NEG_INFINITY, f64::max);
    let ups: Vec<f64> = reports.iter().map(|r| r.upper_ratio).collect();
    let lows: Vec<f64> = reports.iter().map(|r| r.lower_ratio).collect();
    let upper_inversions = inversions(&ups);
    let lower_inversions = inversions(&lows);
    Ok(SandwichReport {
        lambda,
        kappa,
        delta,
        remainder_fit,
        k_upper,
        k_hole,
        upper_inversions,
        lower_inversions,
        exponent_ok: remainder_fit.slope <= 20.0 / 9.0 + 0.1,
        trends_ok: upper_inversions + lower_inversions <= 1,
        reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaScan {
    pub z: f64,
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub remainders: Vec<f64>,
    pub best_delta: f64,
    /// The minimizing δ is 5/9 or one of its grid neighbours.
    pub optimum_near_five_ninths: bool,
}

/// Upper remainder e_upper − e_tf across δ at fixed Z.
pub fn delta_scan(z: f64, lambda: f64, kappa: f64, deltas: &[f64], opts: &BoundOptions) -> Result<DeltaScan> {
    if deltas.len() < 2 || deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("delta grid must be increasing with at least two points");
    }
    let universal = solve_universal_with(lambda.min(1.0), &opts.tf)?;
    let remainders: Vec<f64> = deltas
        .par_iter()
        .map(|&d| {
            let sys = AtomSystem::new(z, lambda, kappa, d)?;
            let atom = build_atom(&sys, &universal)?;
            let e_tf = atom.energy.total;
            let spec = TrialSpec::new(atom, &opts.trial)?;
            Ok(upper_bound(&spec, opts)?.total() - e_tf)
        })
        .collect::<Result<_>>()?;
    let ibest = remainders
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let target = 5.0 / 9.0;
    let itarget = deltas
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(DeltaScan {
        z,
        lambda,
        deltas: deltas.to_vec(),
        best_delta: deltas[ibest],
        optimum_near_five_ninths: ibest.abs_diff(itarget) <= 1,
        remainders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LogGrid;
    use approx::assert_relative_eq;

    #[test]
    fn empty_potential_has_no_trace() {
        let grid = LogGrid::spanning(1e-4, 10.0, 200).unwrap();
        let v = RadialFunction::zeros(grid);
        assert_eq!(weyl_negative_trace_c(1.0, &v).unwrap(), 0.0);
        assert_eq!(weyl_nonrelativistic(&v), 0.0);
    }

    #[test]
    fn large_c_limit() {
        let grid = LogGrid::spanning(1e-4, 20.0, 800).unwrap();
        let v = RadialFunction::from_fn(grid, |r| 3.0 * (-r).exp()).unwrap();
        let nr = weyl_nonrelativistic(&v);
        let rel = weyl_negative_trace_c(1e4, &v).unwrap();
        assert_relative_eq!(rel, nr, max_relative = 1e-6);
        // Relativistic kinetic energy is smaller, so the trace is deeper.
        assert!(weyl_negative_trace_c(2.0, &v).unwrap() < nr);
    }

    #[test]
    fn sweep_preconditions() {
        let o = BoundOptions::default();
        assert!(sandwich_report(1.0, &[20.0, 40.0, 80.0], 0.5, 5.0 / 9.0, &o).is_err());
        assert!(sandwich_report(1.0, &[20.0, 40.0, 30.0, 320.0], 0.5, 5.0 / 9.0, &o).is_err());
        assert_eq!(inversions(&[3.0, 2.0, 2.5, 1.0]), 1);
    }
}
