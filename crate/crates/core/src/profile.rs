//! Localization profiles: the coherent-state profile g on the unit ball and
//! the annulus profile f̃ used for the surplus orbitals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quad::{adaptive, GaussLegendre, Tolerance};

/// (2π)^{-3/2}·4π∫₀^{r_max} f(r) r² j₀(kr) dr, split into panels fine enough
/// for the oscillation at k.
pub fn hankel0(f: impl Fn(f64) -> f64, r_lo: f64, r_hi: f64, k: f64) -> f64 {
    let rule = gl32();
    let panels = 1 + ((r_hi - r_lo) * k / 20.0).ceil() as usize;
    let w = (r_hi - r_lo) / panels as f64;
    let mut sum = 0.0;
    for j in 0..panels {
        let a = r_lo + j as f64 * w;
        sum += rule.integrate(a, a + w, |r| {
            let kr = k * r;
            let j0 = if kr.abs() < 1e-8 { 1.0 - kr * kr / 6.0 } else { kr.sin() / kr };
            f(r) * r * r * j0
        });
    }
    4.0 * PI * sum / (2.0 * PI).powf(1.5)
}

fn gl32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// g(r) = (2π)^{-1/2} sin(πr)/r on the unit ball.
pub fn g_unit(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else if r < 1e-8 {
        (2.0 * PI).powf(-0.5) * PI
    } else {
        (2.0 * PI).powf(-0.5) * (PI * r).sin() / r
    }
}

fn g_unit_prime(r: f64) -> f64 {
    if r >= 1.0 || r == 0.0 {
        return 0.0;
    }
    let s = PI * r;
    (2.0 * PI).powf(-0.5) * (s * s.cos() - s.sin()) / (r * r)
}

const KHAT_STEP: f64 = 0.02;
const KHAT_MAX: f64 = 400.0;

/// ĝ tabulated from the numeric Hankel transform on a uniform grid.
fn g_hat_table() -> &'static Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = (KHAT_MAX / KHAT_STEP).round() as usize + 3;
        (0..n)
            .map(|j| hankel0(g_unit, 0.0, 1.0, j as f64 * KHAT_STEP))
            .collect()
    })
}

/// ĝ(k) for the unit profile (unitary Fourier convention).
pub fn g_hat_unit(k: f64) -> f64 {
    let k = k.abs();
    if k >= KHAT_MAX {
        // Integration by parts at the kink r = 1.
        let k2 = k * k;
        let pi2 = PI * PI;
        return -k.sin() / (k * k2) * (1.0 + pi2 / k2 + pi2 * pi2 / (k2 * k2));
    }
    let t = g_hat_table();
    let x = k / KHAT_STEP;
    let i = (x.floor() as usize).max(1) - 1;
    let u = x - i as f64;
    let f = &t[i..i + 4];
    let (u0, u1, u2, u3) = (u, u - 1.0, u - 2.0, u - 3.0);
    -f[0] * u1 * u2 * u3 / 6.0 + f[1] * u0 * u2 * u3 / 2.0 - f[2] * u0 * u1 * u3 / 2.0
        + f[3] * u0 * u1 * u2 / 6.0
}

/// T(x) = ∫₀^{min(x,1)} u·g(u)² du, tabulated.
pub fn t_moment(x: f64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    const N: usize = 4096;
    let table = TABLE.get_or_init(|| {
        let rule = gl32();
        let h = 1.0 / N as f64;
        let mut out = vec![0.0; N + 1];
        for i in 0..N {
            let a = i as f64 * h;
            out[i + 1] = out[i] + rule.integrate(a, a + h, |u| u * g_unit(u).powi(2));
        }
        out
    });
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return table[N];
    }
    // Near zero T ≈ πx²/4; elsewhere cubic interpolation.
    let pos = x * N as f64;
    if pos < 1.0 {
        return table[1] * x * x * (N * N) as f64;
    }
    let i = (pos.floor() as usize).clamp(1, N - 2) - 1;
    let u = pos - i as f64;
    let f = &table[i..i + 4];
    let (u0, u1, u2, u3) = (u, u - 1.0, u - 2.0, u - 3.0);
    -f[0] * u1 * u2 * u3 / 6.0 + f[1] * u0 * u2 * u3 / 2.0 - f[2] * u0 * u1 * u3 / 2.0
        + f[3] * u0 * u1 * u2 / 6.0
}

/// Potential of the unit charge smeared by g²: ∫ g(y)²/|x−y| dy at |x| = s.
pub fn smeared_unit_potential(s: f64) -> f64 {
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-12,
        max_segments: 200,
    };
    let sq = |u: f64| 2.0 * (PI * u).sin().powi(2);
    if s >= 1.0 {
        return 1.0 / s;
    }
    let inner = adaptive(sq, &[0.0, s], tol).unwrap_or(f64::NAN);
    let outer = adaptive(|u| sq(u) / u, &[s, 1.0], tol).unwrap_or(f64::NAN);
    if s == 0.0 {
        outer
    } else {
        inner / s + outer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherentProfile {
    pub r: f64,
    /// ∫g² (numerical).
    pub norm: f64,
    /// ∫|∇g|² for the unit profile (numerical).
    pub grad_norm_sq: f64,
}

impl CoherentProfile {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("coherent length must be positive, got {r}"));
        }
        let rule = GaussLegendre::new(64);
        let norm = rule.integrate(0.0, 1.0, |u| 4.0 * PI * u * u * g_unit(u).powi(2));
        let grad_norm_sq = rule.integrate(0.0, 1.0, |u| 4.0 * PI * u * u * g_unit_prime(u).powi(2));
        Ok(Self {
            r,
            norm,
            grad_norm_sq,
        })
    }

    /// g_R(x) = R^{-3/2} g(x/R).
    pub fn value(&self, x: f64) -> f64 {
        self.r.powf(-1.5) * g_unit(x / self.r)
    }

    /// ĝ_R(k) = R^{3/2} ĝ(kR).
    pub fn g_hat(&self, k: f64) -> f64 {
        self.r.powf(1.5) * g_hat_unit(k * self.r)
    }

    /// ∫|∇g_R|² = ∫|∇g|²/R².
    pub fn kinetic(&self) -> f64 {
        self.grad_norm_sq / (self.r * self.r)
    }
}

/// Profile f̃ on R̃ ≤ |x| ≤ 2R̃ and its dyadic orbital family.
///
/// f̃(x) = (2πR̃)^{-1/2}|x|^{-1} sin(π(|x| − R̃)/R̃), which vanishes on both
/// sphere boundaries and is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusProfile {
    pub r_tilde: f64,
    pub k_offset: u32,
    /// ∫f̃² (numerical).
    pub norm: f64,
    /// ∫|∇f̃|² (numerical).
    pub grad_norm_sq: f64,
    /// ∫|f̂̃(ξ)|²|ξ| dξ (numerical, via the Hankel transform).
    pub xi_moment: f64,
}

impl AnnulusProfile {
    pub fn new(r_tilde: f64, k_offset: u32) -> Result<Self> {
        if !(r_tilde > 0.0 && r_tilde.is_finite()) {
            return invalid(format!("annulus radius must be positive, got {r_tilde}"));
        }
        let (norm, grad1, moment1) = unit_annulus_integrals();
        Ok(Self {
            r_tilde,
            k_offset,
            norm,
            grad_norm_sq: grad1 / (r_tilde * r_tilde),
            xi_moment: moment1 / r_tilde,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        annulus_unit(x / self.r_tilde) * self.r_tilde.powf(-1.5)
    }

    /// φ_k(x) = 2^{-3k/2} f̃(x/2^k).
    pub fn orbital(&self, k: u32, x: f64) -> f64 {
        let s = 2f64.powi(k as i32);
        s.powf(-1.5) * self.value(x / s)
    }
}

fn annulus_unit(r: f64) -> f64 {
    if !(1.0..=2.0).contains(&r) {
        return 0.0;
    }
    (2.0 * PI).powf(-0.5) * (PI * (r - 1.0)).sin() / r
}

fn annulus_unit_prime(r: f64) -> f64 {
    if !(1.0..=2.0).contains(&r) {
        return 0.0;
    }
    let s = PI * (r - 1.0);
    (2.0 * PI).powf(-0.5) * (PI * r * s.cos() - s.sin()) / (r * r)
}

fn annulus_hat_unit(k: f64) -> f64 {
    hankel0(annulus_unit, 1.0, 2.0, k)
}

fn unit_annulus_integrals() -> (f64, f64, f64) {
    static CACHE: OnceLock<(f64, f64, f64)> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let rule = GaussLegendre::new(64);
        let norm = rule.integrate(1.0, 2.0, |r| 4.0 * PI * r * r * annulus_unit(r).powi(2));
        let grad = rule.integrate(1.0, 2.0, |r| 4.0 * PI * r * r * annulus_unit_prime(r).powi(2));
        // ∫ 4πk³|f̂|² dk, panels of length π up to K, then the k^{-3} tail
        // of the oscillation-averaged integrand.
        let kmax = 400.0 * PI;
        let panels = 400;
        let mut moment = 0.0;
        for j in 0..panels {
            let a = j as f64 * PI;
            moment += rule.integrate(a, a + PI, |k| {
                let f = annulus_hat_unit(k);
                4.0 * PI * k * k * k * f * f
            });
        }
        // At large k, f̂ ≈ −sin k (1 + 2cos k)/k³ and the square of the
        // oscillating factor averages to 1.
        let tail = 4.0 * PI / (2.0 * kmax * kmax);
        (norm, grad, moment + tail)
    })
}
