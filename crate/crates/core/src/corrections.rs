//! Bound integrals for the relativistic corrections of the coherent trial
//! state: the φ₂ term, the φ₁ deficit and the lift of the Hartree energy.
//!
//! For one coherent state with momentum p every bound has the form
//!
//!   I(p) = ∬ dξ dξ′ |ĝ_R(ξ−p)| |ĝ_R(ξ′−p)| u(|ξ|) v(|ξ′|) / |ξ−ξ′|².
//!
//! Expanding |ξ−ξ′|⁻² = (2ab)⁻¹ Σ_l (2l+1) Q_l(z) P_l(cos θ), z = (a²+b²)/(2ab),
//! and the moduli in Legendre polynomials about p reduces I(p) to
//!
//!   I(p) = Σ_l (2l+1)/2 ∬ ab u(a) v(b) Q_l(z) H_l(a) H_l(b) da db,
//!   H_l(a) = 2π ∫₋₁¹ |ĝ_R(|aω − p|)| P_l(μ) dμ,
//!
//! which is evaluated with midpoint cells in (a, b). The logarithmic diagonal
//! of Q_l is integrated analytically over each cell.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::TrialSpec;
use crate::error::{invalid, Error, Result};
use crate::grid::RadialFunction;
use crate::model::{dispersion_c, DispersionValues};
use crate::quad::{legendre_table, GaussLegendre};

/// Constant of (f, |x|⁻¹ f) = (2π²)⁻¹ ∬ f̂(ξ)* f̂(ξ′)/|ξ−ξ′|² dξ dξ′.
pub const COULOMB_MOMENTUM: f64 = 1.0 / (2.0 * PI * PI);

/// 2^{-3/2} π^{-5/2}, the Fourier bound on the Hartree potential of a
/// density of mass Z (per unit Z).
pub fn hartree_constant() -> f64 {
    2f64.powf(-1.5) * PI.powf(-2.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOptions {
    /// Cell width near |ξ| = p, in units of 1/R.
    pub fine_width: f64,
    /// Half-width of the uniformly resolved band around p, in units of 1/R.
    pub fine_half: f64,
    /// Growth factor of cell widths outside the band.
    pub growth: f64,
    /// Outer cutoff of |ξ| in units of c.
    pub xi_max_over_c: f64,
    /// Number of momentum nodes on [0, p_switch].
    pub p_nodes: usize,
    /// Beyond p_switch/R the slowly varying asymptotic form is used.
    pub p_switch: f64,
    pub l_base: usize,
    pub l_per_pr: f64,
    pub l_cap: usize,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        Self {
            fine_width: 0.05,
            fine_half: 8.0,
            growth: 1.1,
            xi_max_over_c: 100.0,
            p_nodes: 40,
            p_switch: 10.0,
            l_base: 20,
            l_per_pr: 3.0,
            l_cap: 120,
        }
    }
}

/// Momentum-space bilinear forms at one p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumForms {
    pub p: f64,
    /// B(φ₂, φ₂).
    pub phi2: f64,
    /// B(1 − φ₁φ₁′) = 2B(d, 1) − B(d, d), d = 1 − φ₁.
    pub deficit: f64,
    /// B(1, 1), independent of p.
    pub flat: f64,
}

/// Cell edges and midpoints in |ξ|.
#[derive(Debug, Clone)]
struct Cells {
    edges: Vec<f64>,
    mid: Vec<f64>,
    width: Vec<f64>,
}

fn build_cells(p: f64, r: f64, c: f64, opts: &CorrectionOptions) -> Cells {
    let h0 = opts.fine_width / r;
    let half = opts.fine_half / r;
    let lo = (p - half).max(0.0);
    let hi = p + half;
    let n_fine = ((hi - lo) / h0).ceil() as usize;
    let h = (hi - lo) / n_fine as f64;
    let mut lower = Vec::new();
    let mut e = lo;
    let mut w = h;
    while e > 0.0 {
        w *= opts.growth;
        e = (e - w).max(0.0);
        if e < 0.5 * w {
            e = 0.0;
        }
        lower.push(e);
    }
    lower.reverse();
    let mut edges = lower;
    for i in 0..=n_fine {
        edges.push(lo + i as f64 * h);
    }
    let top = (opts.xi_max_over_c * c).max(4.0 * hi);
    let mut e = hi;
    let mut w = h;
    while e < top {
        w *= opts.growth;
        e += w;
        edges.push(e);
    }
    let mid = edges.windows(2).map(|s| 0.5 * (s[0] + s[1])).collect();
    let width = edges.windows(2).map(|s| s[1] - s[0]).collect();
    Cells { edges, mid, width }
}

/// Q_0..=Q_lmax at z = 1 + zm1, zm1 > 0.
fn legendre_q(lmax: usize, zm1: f64, out: &mut [f64]) {
    let z = 1.0 + zm1;
    let q0 = 0.5 * (2.0 / zm1).ln_1p();
    let ln_rho = (z + (zm1 * (z + 1.0)).sqrt()).ln();
    for v in out[..=lmax].iter_mut() {
        *v = 0.0;
    }
    out[0] = q0;
    if lmax == 0 {
        return;
    }
    if lmax as f64 * ln_rho < 6.9 {
        out[1] = z * q0 - 1.0;
        for l in 1..lmax {
            let lf = l as f64;
            out[l + 1] = ((2.0 * lf + 1.0) * z * out[l] - lf * out[l - 1]) / (lf + 1.0);
        }
        return;
    }
    // Miller's backward recurrence, truncated where Q_l is below 1e-17·Q_0.
    let keep = lmax.min((40.0 / ln_rho).ceil() as usize);
    let start = keep + (37.0 / ln_rho).ceil() as usize + 2;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut kept = vec![0.0; keep + 1];
    for l in (1..=start).rev() {
        let lf = l as f64;
        let prev = ((2.0 * lf + 1.0) * z * cur - (lf + 1.0) * next) / lf;
        next = cur;
        cur = prev;
        if l - 1 <= keep {
            kept[l - 1] = cur;
        }
        if l <= keep {
            kept[l] = next;
        }
    }
    let s = q0 / kept[0];
    for l in 0..=keep {
        out[l] = kept[l] * s;
    }
}

/// Average of ln|a − b| over the cell [a0,a1]×[b0,b1].
fn mean_log_distance(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let phi = |x: f64| {
        if x == 0.0 {
            0.0
        } else {
            0.5 * x * x * x.abs().ln() - 0.75 * x * x
        }
    };
    (phi(a1 - b0) - phi(a0 - b0) - phi(a1 - b1) + phi(a0 - b1)) / ((a1 - a0) * (b1 - b0))
}

/// H_l(a) for l ≤ lmax at the cell midpoints.
fn angular_moments(
    p: f64,
    r: f64,
    a: &[f64],
    lmax: usize,
    modulus: &(dyn Fn(f64) -> f64 + Sync),
) -> Vec<Vec<f64>> {
    let rule = GaussLegendre::new(8);
    a.par_iter()
        .map(|&a| {
            let mut h = vec![0.0; lmax + 1];
            if p == 0.0 {
                h[0] = 4.0 * PI * modulus(a);
                return h;
            }
            // Break [−1, 1] where k = |aω − p| crosses a zero nπ/R of ĝ_R
            // and into pieces short enough for P_lmax.
            let kmin = (a - p).abs();
            let kmax = a + p;
            let mut breaks = vec![-1.0, 1.0];
            let n_first = ((kmin * r / PI).floor() as i64 + 1).max(2);
            let mut n = n_first;
            loop {
                let k = n as f64 * PI / r;
                if k >= kmax {
                    break;
                }
                breaks.push(((a * a + p * p - k * k) / (2.0 * a * p)).clamp(-1.0, 1.0));
                n += 1;
            }
            let pieces = (lmax / 2).max(4);
            for j in 1..pieces {
                breaks.push(-1.0 + 2.0 * j as f64 / pieces as f64);
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let mut pl = vec![0.0; lmax + 1];
            for w in breaks.windows(2) {
                if w[1] - w[0] < 1e-15 {
                    continue;
                }
                for (mu, wt) in rule.mapped(w[0], w[1]) {
                    let k = (a * a + p * p - 2.0 * a * p * mu).max(0.0).sqrt();
                    let m = modulus(k);
                    if m == 0.0 {
                        continue;
                    }
                    legendre_table(lmax, mu, &mut pl);
                    for l in 0..=lmax {
                        h[l] += 2.0 * PI * wt * m * pl[l];
                    }
                }
            }
            h
        })
        .collect()
}

/// The matrix M_ij = Σ_l (2l+1)/2 Q̄_l(i,j) H_l(a_i) H_l(a_j), with the bar
/// denoting the cell average near the diagonal.
fn coupling_matrix(cells: &Cells, h: &[Vec<f64>], lmax: usize) -> Vec<f64> {
    let n = cells.mid.len();
    let mut harmonic = vec![0.0; lmax + 1];
    for l in 1..=lmax {
        harmonic[l] = harmonic[l - 1] + 1.0 / l as f64;
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut q = vec![0.0; lmax + 1];
            let mut row = vec![0.0; n];
            let a = cells.mid[i];
            for j in i..n {
                let b = cells.mid[j];
                let near = j - i <= 2;
                let mut s = 0.0;
                if i == j {
                    // Q_l = ln(2a) − H_l − ln|a−b| + O((a−b)²).
                    let ml = mean_log_distance(
                        cells.edges[i],
                        cells.edges[i + 1],
                        cells.edges[j],
                        cells.edges[j + 1],
                    );
                    for l in 0..=lmax {
                        let ql = (2.0 * a).ln() - harmonic[l] - ml;
                        s += (l as f64 + 0.5) * ql * h[i][l] * h[j][l];
                    }
                } else {
                    let d = b - a;
                    let zm1 = d * d / (2.0 * a * b);
                    legendre_q(lmax, zm1, &mut q);
                    let shift = if near {
                        d.abs().ln()
                            - mean_log_distance(
                                cells.edges[i],
                                cells.edges[i + 1],
                                cells.edges[j],
                                cells.edges[j + 1],
                            )
                    } else {
                        0.0
                    };
                    for l in 0..=lmax {
                        s += (l as f64 + 0.5) * (q[l] + shift) * h[i][l] * h[j][l];
                    }
                }
                row[j] = s;
            }
            row
        })
        .collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            m[i * n + j] = rows[i][j];
            m[j * n + i] = rows[i][j];
        }
    }
    m
}

fn bilinear(m: &[f64], weights: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let n = weights.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[i * n + j] * weights[j] * v[j];
        }
        total += weights[i] * u[i] * row;
    }
    total
}

/// Checks the chain |1 − φ₁φ₁′| ≤ |3EE′ − c²(E+E′+c²)|/(NN′)
/// ≤ (3c²ab + 2c³(a+b))/(NN′) ≤ (3c²ab + 2c³(a+b))/(2c⁴).
pub fn kernel_chain(a: &DispersionValues, b: &DispersionValues, c: f64) -> Result<()> {
    let c2 = c * c;
    let da = a.one_minus_phi1();
    let db = b.one_minus_phi1();
    let k0 = da + db - da * db;
    let nn = a.nc * b.nc;
    let k1 = (3.0 * a.ec * b.ec - c2 * (a.ec + b.ec + c2)).abs() / nn;
    let num = 3.0 * c2 * a.p * b.p + 2.0 * c2 * c * (a.p + b.p);
    let k2 = num / nn;
    let k3 = num / (2.0 * c2 * c2);
    let slack = |x: f64| x * (1.0 + 1e-9) + 1e-15;
    for (lhs, rhs) in [(k0, k1), (k1, k2), (k2, k3)] {
        if lhs > slack(rhs) {
            return Err(Error::KernelInequality {
                xi: a.p,
                xi_prime: b.p,
                lhs,
                rhs,
            });
        }
    }
    Ok(())
}

/// The three bilinear forms at momentum p for profile modulus `modulus`
/// (|ĝ_R| for the trial state).
pub fn momentum_forms_with(
    p: f64,
    r: f64,
    c: f64,
    opts: &CorrectionOptions,
    modulus: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<MomentumForms> {
    if !(p >= 0.0 && r > 0.0 && c > 0.0) {
        return invalid("momentum forms need p >= 0, R > 0, c > 0");
    }
    let cells = build_cells(p, r, c, opts);
    let lmax = if p == 0.0 {
        0
    } else {
        ((opts.l_per_pr * p * r) as usize + opts.l_base).min(opts.l_cap)
    };
    let h = angular_moments(p, r, &cells.mid, lmax, modulus);
    let m = coupling_matrix(&cells, &h, lmax);
    let disp: Vec<DispersionValues> = cells
        .mid
        .iter()
        .map(|&a| dispersion_c(a, c))
        .collect::<Result<_>>()?;
    for i in (0..disp.len()).step_by(7) {
        for j in (0..disp.len()).step_by(7) {
            kernel_chain(&disp[i], &disp[j], c)?;
        }
    }
    let weights: Vec<f64> = cells
        .mid
        .iter()
        .zip(&cells.width)
        .map(|(a, w)| a * w)
        .collect();
    let ones = vec![1.0; disp.len()];
    let d: Vec<f64> = disp.iter().map(|x| x.one_minus_phi1()).collect();
    let f2: Vec<f64> = disp.iter().map(|x| x.phi2).collect();
    let phi2 = bilinear(&m, &weights, &f2, &f2);
    let d1 = bilinear(&m, &weights, &d, &ones);
    let dd = bilinear(&m, &weights, &d, &d);
    let flat = bilinear(&m, &weights, &ones, &ones);
    Ok(MomentumForms {
        p,
        phi2,
        deficit: 2.0 * d1 - dd,
        flat,
    })
}

/// [`momentum_forms_with`] for the coherent profile |ĝ_R|.
pub fn momentum_forms(p: f64, r: f64, c: f64, opts: &CorrectionOptions) -> Result<MomentumForms> {
    let scale = r.powf(1.5);
    let modulus = move |k: f64| scale * crate::profile::g_hat_unit(k * r).abs();
    momentum_forms_with(p, r, c, opts, &modulus)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectionReport {
    pub z: f64,
    pub lambda: f64,
    /// Z·tr(φ₂γ₁) bound.
    pub phi2_term: f64,
    /// |Z tr[(|x|⁻¹ − φ₁)γ₁]| bound.
    pub phi1_deficit: f64,
    pub hartree_lift: f64,
    pub hartree_deficit_part: f64,
    pub hartree_phi2_part: f64,
    /// Spread of B(1,1) across the momentum nodes relative to its p = 0 value.
    pub flat_spread: f64,
    pub forms: Vec<MomentumForms>,
}

/// J(P) = ∫₀^P 4πp² I(p) dp for one form, with the table on [0, p_s] and the
/// asymptotic continuation I(p) ≈ w(p)·flat·(1 + (ratio − 1)(p_s/p)²).
struct FormIntegral {
    p: Vec<f64>,
    i: Vec<f64>,
    cum: Vec<f64>,
    p_s: f64,
    ratio: f64,
    flat: f64,
    weight: fn(&DispersionValues) -> f64,
    c: f64,
}

impl FormIntegral {
    fn new(p: Vec<f64>, i: Vec<f64>, flat: f64, weight: fn(&DispersionValues) -> f64, c: f64) -> Result<Self> {
        let mut cum = vec![0.0; p.len()];
        for j in 1..p.len() {
            // Exact integral of 4πp² times the linear interpolant.
            let (p0, p1) = (p[j - 1], p[j]);
            let (i0, i1) = (i[j - 1], i[j]);
            let s = (i1 - i0) / (p1 - p0);
            let m3 = (p1.powi(3) - p0.powi(3)) / 3.0;
            let m4 = (p1.powi(4) - p0.powi(4)) / 4.0;
            cum[j] = cum[j - 1] + 4.0 * PI * ((i0 - s * p0) * m3 + s * m4);
        }
        let p_s = *p.last().unwrap();
        let w = weight(&dispersion_c(p_s, c)?);
        let ratio = if w > 0.0 { i.last().unwrap() / (w * flat) } else { 1.0 };
        Ok(Self {
            p,
            i,
            cum,
            p_s,
            ratio,
            flat,
            weight,
            c,
        })
    }

    fn asymptotic(&self, p: f64) -> f64 {
        let w = dispersion_c(p, self.c).map(|d| (self.weight)(&d)).unwrap_or(0.0);
        w * self.flat * (1.0 + (self.ratio - 1.0) * (self.p_s / p).powi(2))
    }

    fn eval(&self, big_p: f64) -> f64 {
        if big_p <= 0.0 {
            return 0.0;
        }
        if big_p <= self.p_s {
            let j = self.p.partition_point(|&x| x < big_p).max(1);
            let (p0, p1) = (self.p[j - 1], self.p[j]);
            let (i0, i1) = (self.i[j - 1], self.i[j]);
            let s = (i1 - i0) / (p1 - p0);
            let m3 = (big_p.powi(3) - p0.powi(3)) / 3.0;
            let m4 = (big_p.powi(4) - p0.powi(4)) / 4.0;
            return self.cum[j - 1] + 4.0 * PI * ((i0 - s * p0) * m3 + s * m4);
        }
        let rule = GaussLegendre::new(8);
        let span = (big_p / self.p_s).ln();
        let panels = (span / 0.25).ceil().max(1.0) as usize;
        let mut extra = 0.0;
        for k in 0..panels {
            let t0 = span * k as f64 / panels as f64;
            let t1 = span * (k + 1) as f64 / panels as f64;
            extra += rule.integrate(t0, t1, |t| {
                let p = self.p_s * t.exp();
                4.0 * PI * p * p * p * self.asymptotic(p)
            });
        }
        self.cum[self.cum.len() - 1] + extra
    }
}

/// All three correction bounds for the trial state.
pub fn correction_report(spec: &TrialSpec, opts: &CorrectionOptions) -> Result<CorrectionReport> {
    let sys = spec.atom.sys;
    let (r, c) = (sys.r, sys.c);
    let p_s = opts.p_switch / r;
    let n = opts.p_nodes.max(4);
    let nodes: Vec<f64> = (0..=n).map(|j| p_s * (j as f64 / n as f64).powi(2)).collect();
    let forms: Vec<MomentumForms> = nodes
        .iter()
        .map(|&p| momentum_forms(p, r, c, opts))
        .collect::<Result<_>>()?;
    let flat = forms[0].flat;
    let flat_spread = forms
        .iter()
        .map(|f| ((f.flat - flat) / flat).abs())
        .fold(0.0, f64::max);
    let phi2 = FormIntegral::new(
        nodes.clone(),
        forms.iter().map(|f| f.phi2).collect(),
        flat,
        |d| d.phi2 * d.phi2,
        c,
    )?;
    let deficit = FormIntegral::new(
        nodes.clone(),
        forms.iter().map(|f| f.deficit).collect(),
        flat,
        |d| {
            let x = d.one_minus_phi1();
            2.0 * x - x * x
        },
        c,
    )?;
    let pref = 2.0 / (2.0 * PI).powi(3);
    let phase = |form: &FormIntegral| -> Result<f64> {
        let values = spec
            .occupied
            .values
            .iter()
            .map(|&w| pref * form.eval((2.0 * w.max(0.0)).sqrt()))
            .collect();
        Ok(RadialFunction::new(spec.occupied.grid, values)?.integrate())
    };
    let t_phi2 = phase(&phi2)?;
    let t_def = phase(&deficit)?;
    let z = sys.z;
    let hc = hartree_constant();
    Ok(CorrectionReport {
        z,
        lambda: sys.lambda,
        phi2_term: z * COULOMB_MOMENTUM * t_phi2,
        phi1_deficit: z * COULOMB_MOMENTUM * t_def,
        hartree_lift: z * hc * (t_def + t_phi2),
        hartree_deficit_part: z * hc * t_def,
        hartree_phi2_part: z * hc * t_phi2,
        flat_spread,
        forms,
    })
}

pub fn phi2_bound(spec: &TrialSpec) -> Result<f64> {
    Ok(correction_report(spec, &CorrectionOptions::default())?.phi2_term)
}

pub fn phi1_deficit_bound(spec: &TrialSpec) -> Result<f64> {
    Ok(correction_report(spec, &CorrectionOptions::default())?.phi1_deficit)
}

pub fn hartree_lift_bound(spec: &TrialSpec) -> Result<f64> {
    Ok(correction_report(spec, &CorrectionOptions::default())?.hartree_lift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation in log(value).
    pub residual: f64,
}

/// Least-squares line through (ln Z, ln value).
pub fn fit_exponent(records: &[(f64, f64)]) -> Result<ExponentFit> {
    if records.len() < 2 {
        return invalid("an exponent fit needs at least two records");
    }
    if records.iter().any(|&(z, v)| !(z > 0.0) || !(v > 0.0)) {
        return invalid("exponent fit needs positive Z and positive values");
    }
    let n = records.len() as f64;
    let xs: Vec<f64> = records.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("exponent fit needs distinct Z values");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_functions() {
        let mut q = vec![0.0; 41];
        for &zm1 in &[1e-6, 1e-3, 0.2, 3.0] {
            legendre_q(40, zm1, &mut q);
            let z: f64 = 1.0 + zm1;
            // Q_1 and Q_2 from their closed forms.
            let q0 = 0.5 * ((z + 1.0) / (z - 1.0)).ln();
            assert_relative_eq!(q[1], z * q0 - 1.0, max_relative = 1e-8);
            assert_relative_eq!(q[2], 0.5 * (3.0 * z * z - 1.0) * q0 - 1.5 * z, max_relative = 1e-6);
            assert!(q.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn log_cell_average() {
        // Numerical average over a unit cell on the diagonal.
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = (i as f64 + 0.5) / n as f64;
                let b = (j as f64 + 0.25) / n as f64;
                s += (a - b).abs().ln();
            }
        }
        s /= (n * n) as f64;
        assert_relative_eq!(mean_log_distance(0.0, 1.0, 0.0, 1.0), -1.5, max_relative = 1e-12);
        assert!((s + 1.5).abs() < 2e-3);
    }

    #[test]
    fn exact_power_law() {
        let f = fit_exponent(&[(1.0, 1.0), (10.0, 1e3), (100.0, 1e6)]).unwrap();
        assert_relative_eq!(f.slope, 3.0, max_relative = 1e-12);
        assert!(f.residual < 1e-12);
        let f = fit_exponent(&[(1.0, 2.0), (10.0, 2.0)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert!(fit_exponent(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn rest_kernel_is_zero() {
        let d = dispersion_c(0.0, 3.0).unwrap();
        kernel_chain(&d, &d, 3.0).unwrap();
        assert_eq!(d.one_minus_phi1(), 0.0);
    }

    #[test]
    fn flat_form_is_translation_invariant() {
        let r = 0.2;
        let opts = CorrectionOptions::default();
        let f0 = momentum_forms(0.0, r, 40.0, &opts).unwrap();
        for &p in &[3.0, 20.0, 50.0] {
            let f = momentum_forms(p, r, 40.0, &opts).unwrap();
            assert_relative_eq!(f.flat, f0.flat, max_relative = 1e-2);
        }
    }
}
