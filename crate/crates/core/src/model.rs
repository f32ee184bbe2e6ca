//! Atomic configuration, relativistic dispersion and the Pauli-spinor
//! multipliers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive, Tolerance};

/// Coupling below which the Brown-Ravenhall operator is bounded below, 2/(π/2 + 2/π).
pub const KAPPA_CRIT_MODEL: f64 = 2.0 / (PI / 2.0 + 2.0 / PI);
/// Coupling limit of the energy asymptotics, 2/π. The smaller of the two is
/// the one enforced.
pub const KAPPA_CRIT_THEOREM: f64 = 2.0 / PI;

/// γ_TF = (3π²)^{2/3}/2.
pub fn gamma_tf() -> f64 {
    (3.0 * PI * PI).powf(2.0 / 3.0) / 2.0
}

pub fn kappa_crit() -> f64 {
    KAPPA_CRIT_MODEL.min(KAPPA_CRIT_THEOREM)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSystem {
    pub z: f64,
    pub n: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub c: f64,
    pub delta: f64,
    pub r: f64,
}

impl AtomSystem {
    pub fn new(z: f64, lambda: f64, kappa: f64, delta: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return invalid(format!("Z must be positive, got {z}"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {lambda}"));
        }
        if !(kappa > 0.0 && kappa < kappa_crit()) {
            return invalid(format!(
                "kappa must lie in (0, {:.6}), got {kappa}",
                kappa_crit()
            ));
        }
        if !(delta > 1.0 / 3.0 && delta < 2.0 / 3.0) {
            return invalid(format!("delta must lie in (1/3, 2/3), got {delta}"));
        }
        Ok(Self {
            z,
            n: lambda * z,
            lambda,
            kappa,
            c: z / kappa,
            delta,
            r: z.powf(-delta),
        })
    }

    pub fn neutral(z: f64) -> Result<Self> {
        Self::new(z, 1.0, 0.5, 5.0 / 9.0)
    }

    pub fn lambda_eff(&self) -> f64 {
        self.lambda.min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionValues {
    pub p: f64,
    pub ec: f64,
    pub nc: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl DispersionValues {
    /// E_c − c² without cancellation.
    pub fn kinetic(&self, c: f64) -> f64 {
        let cp = c * self.p;
        cp * cp / (self.ec + c * c)
    }

    /// 1 − φ₁ without cancellation.
    pub fn one_minus_phi1(&self) -> f64 {
        self.phi2 * self.phi2 / (1.0 + self.phi1)
    }
}

/// Dispersion values at speed of light `c`.
pub fn dispersion_c(p: f64, c: f64) -> Result<DispersionValues> {
    if !(p >= 0.0) || !p.is_finite() {
        return invalid(format!("momentum must be nonnegative, got {p}"));
    }
    if !(c > 0.0) {
        return invalid(format!("speed of light must be positive, got {c}"));
    }
    let c2 = c * c;
    let cp = c * p;
    let ec = c * (c2 + p * p).sqrt();
    let nc = (2.0 * ec * (ec + c2)).sqrt();
    let phi1 = (ec + c2) / nc;
    let phi2 = cp / nc;
    Ok(DispersionValues {
        p,
        ec,
        nc,
        phi1,
        phi2,
    })
}

pub fn dispersion(p: f64, sys: &AtomSystem) -> Result<DispersionValues> {
    dispersion_c(p, sys.c)
}

/// |c²φ₁² + 2cpφ₁φ₂ − c²φ₂² − E_c|.
pub fn reduction_identity_residual_c(p: f64, c: f64) -> Result<f64> {
    let d = dispersion_c(p, c)?;
    let c2 = c * c;
    let lhs = c2 * d.phi1 * d.phi1 + 2.0 * c * p * d.phi1 * d.phi2 - c2 * d.phi2 * d.phi2;
    Ok((lhs - d.ec).abs())
}

pub fn reduction_identity_residual(p: f64, sys: &AtomSystem) -> Result<f64> {
    reduction_identity_residual_c(p, sys.c)
}

/// Relative cell width used when the angular kernel is requested on the
/// diagonal: one spacing of the default 64 points/decade momentum grid.
pub const DIAGONAL_CELL_LOG10: f64 = 1.0 / 64.0;

/// 2π∫₋₁¹ dμ |ξ−ξ′|⁻² for |ξ| = a, |ξ′| = b.
///
/// For a = b the pointwise value is infinite; the cell average over the square
/// [a·10^{-w/2}, a·10^{w/2}]² with w = [`DIAGONAL_CELL_LOG10`] is returned
/// instead.
pub fn coulomb_angular_kernel(xi: f64, xi_prime: f64) -> Result<f64> {
    if !(xi >= 0.0 && xi_prime >= 0.0) {
        return invalid("kernel arguments must be nonnegative");
    }
    if xi == 0.0 && xi_prime == 0.0 {
        return invalid("angular kernel undefined at xi = xi' = 0");
    }
    if xi == 0.0 || xi_prime == 0.0 {
        let m = xi.max(xi_prime);
        return Ok(4.0 * PI / (m * m));
    }
    if xi == xi_prime {
        let f = 10f64.powf(0.5 * DIAGONAL_CELL_LOG10);
        return shell_averaged_kernel(xi / f, xi * f, xi / f, xi * f);
    }
    Ok(angular_kernel_offdiag(xi, xi_prime))
}

fn angular_kernel_offdiag(a: f64, b: f64) -> f64 {
    let s = a + b;
    let d = (a - b).abs();
    2.0 * PI / (a * b) * (s / d).ln()
}

/// Average of the angular kernel over the cell [a0,a1]×[b0,b1].
pub fn shell_averaged_kernel(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<f64> {
    if !(a0 > 0.0 && a1 > a0 && b0 > 0.0 && b1 > b0) {
        return invalid("shell bounds must be positive and increasing");
    }
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-10,
        max_segments: 4000,
    };
    let mut failure: Option<Error> = None;
    let total = adaptive(
        |a| {
            let mut pts = vec![b0];
            if a > b0 && a < b1 {
                pts.push(a);
            }
            pts.push(b1);
            match adaptive(|b| angular_kernel_offdiag(a, b), &pts, tol) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &[a0, a1],
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(total / ((a1 - a0) * (b1 - b0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rest_state() {
        let d = dispersion_c(0.0, 1.0).unwrap();
        assert_eq!((d.ec, d.nc, d.phi1, d.phi2), (1.0, 2.0, 1.0, 0.0));
        assert_eq!(reduction_identity_residual_c(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_momentum() {
        let d = dispersion_c(1.0, 1.0).unwrap();
        assert_relative_eq!(d.ec, 2f64.sqrt(), max_relative = 1e-15);
        assert!(reduction_identity_residual_c(1.0, 1.0).unwrap() <= 1e-12);
        let r = reduction_identity_residual_c(37.5, 100.0).unwrap();
        assert!(r <= 1e-12 * dispersion_c(37.5, 100.0).unwrap().ec);
    }

    #[test]
    fn ultrarelativistic() {
        let d = dispersion_c(1e6, 1.0).unwrap();
        assert!((d.ec / 1e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_momentum_rejected() {
        assert!(matches!(dispersion_c(-1.0, 1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn system_validation() {
        let s = AtomSystem::new(100.0, 1.2, 0.5, 5.0 / 9.0).unwrap();
        assert_eq!(s.c, 200.0);
        assert_eq!(s.r, 100f64.powf(-5.0 / 9.0));
        assert!((s.n - 120.0).abs() < 1e-12);
        // Between the two quoted critical values.
        assert!(AtomSystem::new(10.0, 1.0, 0.7, 0.5).is_err());
        assert!(AtomSystem::new(10.0, 1.0, 0.5, 0.3).is_err());
        assert!(AtomSystem::new(10.0, 0.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn angular_kernel_closed_form() {
        let k = coulomb_angular_kernel(1.0, 2.0).unwrap();
        assert_relative_eq!(k, PI / 2.0 * 9f64.ln(), max_relative = 1e-14);
        let k = coulomb_angular_kernel(1.0, 1e6).unwrap();
        assert_relative_eq!(k, 4.0 * PI * 1e-12, max_relative = 1e-6);
        assert!(coulomb_angular_kernel(0.0, 0.0).is_err());
        let diag = coulomb_angular_kernel(1.0, 1.0).unwrap();
        assert!(diag.is_finite() && diag > 0.0);
    }
}
