//! Exchange holes of spherically symmetric densities: the smallest ball about
//! x carrying mass 1/2, and the Coulomb potential of the density inside it.
//!
//! For a sphere |y| = s and the ball B_R(x), |x| = d, the surface fraction
//! inside the ball is (R² − (s−d)²)/(4sd) and the mean of 1/|x−y| over the
//! part inside is (min(R, s+d) − |s−d|)/(2sd), so masses and potentials are
//! one-dimensional integrals over s.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::RadialFunction;
use crate::quad::{adaptive, Tolerance};
use crate::smear::convolve_g2;

/// A spherically symmetric density.
pub trait RadialDensity: Sync {
    fn density(&self, r: f64) -> f64;
    /// Radius beyond which the density vanishes.
    fn outer_radius(&self) -> f64;
    fn total_mass(&self) -> f64;
    /// Radii where the density is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl RadialDensity for RadialFunction {
    fn density(&self, r: f64) -> f64 {
        self.value(r)
    }

    fn outer_radius(&self) -> f64 {
        match self.values.iter().rposition(|v| *v != 0.0) {
            Some(i) => self.grid.r((i + 1).min(self.grid.n - 1)),
            None => 0.0,
        }
    }

    fn total_mass(&self) -> f64 {
        self.integrate()
    }
}

/// Constant density of total `mass` on the ball of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBall {
    pub radius: f64,
    pub mass: f64,
}

impl RadialDensity for UniformBall {
    fn density(&self, r: f64) -> f64 {
        if r <= self.radius {
            self.mass / (4.0 / 3.0 * PI * self.radius.powi(3))
        } else {
            0.0
        }
    }

    fn outer_radius(&self) -> f64 {
        self.radius
    }

    fn total_mass(&self) -> f64 {
        self.mass
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.radius]
    }
}

fn tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_segments: 4000,
    }
}

/// ∫ over s ∈ [lo, hi] of 4πs²σ(s)·w(s), with s = t² to tame the s^{-1/2}
/// behaviour of Coulomb-like densities at the origin.
fn shell_integral(
    sigma: &dyn RadialDensity,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    w: impl Fn(f64) -> f64,
) -> Result<f64> {
    let hi = hi.min(sigma.outer_radius());
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = vec![lo.sqrt(), hi.sqrt()];
    for &b in breaks.iter().chain(sigma.kinks().iter()) {
        if b > lo && b < hi {
            pts.push(b.sqrt());
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    adaptive(
        |t| {
            let s = t * t;
            2.0 * t * 4.0 * PI * s * s * sigma.density(s) * w(s)
        },
        &pts,
        tolerance(),
    )
}

/// ∫_{B_R(x)} σ for |x| = d.
pub fn enclosed_mass(sigma: &dyn RadialDensity, d: f64, radius: f64) -> Result<f64> {
    if !(d >= 0.0 && radius >= 0.0) {
        return invalid("distance and radius must be nonnegative");
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    if d == 0.0 {
        return shell_integral(sigma, 0.0, radius, &[], |_| 1.0);
    }
    let lo = (d - radius).max(0.0);
    let breaks = [radius - d, d];
    shell_integral(sigma, lo, d + radius, &breaks, |s| {
        if s + d <= radius {
            1.0
        } else {
            ((radius * radius - (s - d) * (s - d)) / (4.0 * s * d)).clamp(0.0, 1.0)
        }
    })
}

/// ∫_{B_R(x)} σ(y)/|x−y| dy for |x| = d.
pub fn ball_potential(sigma: &dyn RadialDensity, d: f64, radius: f64) -> Result<f64> {
    if !(d >= 0.0 && radius >= 0.0) {
        return invalid("distance and radius must be nonnegative");
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    if d == 0.0 {
        return shell_integral(sigma, 0.0, radius, &[], |s| 1.0 / s);
    }
    let lo = (d - radius).max(0.0);
    let breaks = [radius - d, d];
    shell_integral(sigma, lo, d + radius, &breaks, |s| {
        let top = radius.min(s + d);
        ((top - (s - d).abs()) / (2.0 * s * d)).max(0.0)
    })
}

/// Smallest R with ∫_{B_R(x)} σ = 1/2.
pub fn hole_radius(sigma: &dyn RadialDensity, d: f64) -> Result<f64> {
    let mass = sigma.total_mass();
    if !(mass >= 0.5) {
        return Err(Error::HoleUndefined { mass });
    }
    if !(d >= 0.0) {
        return invalid("distance must be nonnegative");
    }
    let mut lo = 0.0;
    let mut hi = d + sigma.outer_radius();
    // The full ball may fall short of 1/2 by quadrature error; grow once.
    if enclosed_mass(sigma, d, hi)? < 0.5 {
        hi *= 1.0 + 1e-6;
        if enclosed_mass(sigma, d, hi)? < 0.5 - 1e-8 {
            return Err(Error::HoleUndefined { mass });
        }
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if enclosed_mass(sigma, d, mid)? >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

/// L_σ(x).
pub fn hole_potential(sigma: &dyn RadialDensity, d: f64) -> Result<f64> {
    let r = hole_radius(sigma, d)?;
    ball_potential(sigma, d, r)
}

/// Hole data at one distance, with L split at |y| = cut into the near part
/// A₁ and the remainder A₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolePoint {
    pub x: f64,
    pub radius: f64,
    pub potential: f64,
    pub a1: f64,
    pub a2: f64,
}

pub fn hole_point(sigma: &dyn RadialDensity, d: f64, cut: f64) -> Result<HolePoint> {
    let radius = hole_radius(sigma, d)?;
    let potential = ball_potential(sigma, d, radius)?;
    let a1 = ball_potential(sigma, d, cut.min(radius))?;
    Ok(HolePoint {
        x: d,
        radius,
        potential,
        a1,
        a2: (potential - a1).max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoleScan {
    pub points: Vec<HolePoint>,
    pub sup_l: f64,
    pub argmax: f64,
    /// The maximum sits on the first or last scan point.
    pub at_boundary: bool,
    /// L at the nucleus, where a monotonically decreasing L peaks.
    pub center_potential: f64,
}

/// Log grid on [10⁻³/Z, 10³·Z^{-1/3}].
pub fn scan_grid(z: f64, points: usize) -> Vec<f64> {
    let lo = 1e-3 / z;
    let hi = 1e3 * z.powf(-1.0 / 3.0);
    let n = points.max(2);
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// sup of L over `grid`, with the A₁/A₂ split at 1/Z.
pub fn sup_norm_scan(sigma: &dyn RadialDensity, grid: &[f64], z: f64) -> Result<HoleScan> {
    if grid.is_empty() {
        return invalid("scan grid is empty");
    }
    let points: Vec<HolePoint> = grid
        .par_iter()
        .map(|&d| hole_point(sigma, d, 1.0 / z))
        .collect::<Result<_>>()?;
    let (imax, best) = points
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
            if p.potential > acc.1 {
                (i, p.potential)
            } else {
                acc
            }
        });
    let center_potential = hole_potential(sigma, 0.0)?;
    Ok(HoleScan {
        sup_l: best,
        center_potential,
        argmax: points[imax].x,
        at_boundary: imax == 0 || imax == points.len() - 1,
        points,
    })
}

/// ρ_δ = σ ∗ g²_width.
pub fn mollify(sigma: &RadialFunction, width: f64) -> Result<RadialFunction> {
    convolve_g2(sigma, width)
}

/// σ_s(x) = s³σ(sx) on the correspondingly scaled grid.
pub fn rescale(sigma: &RadialFunction, s: f64) -> RadialFunction {
    RadialFunction {
        grid: sigma.grid.scaled(1.0 / s),
        values: sigma.values.iter().map(|v| v * s * s * s).collect(),
    }
}
