use std::f64::consts::PI;

use approx::assert_relative_eq;
use reltf::corrections::{momentum_forms_with, CorrectionOptions};
use reltf::profile::{g_hat_unit, smeared_unit_potential, t_moment, AnnulusProfile, CoherentProfile};

/// ĝ(k) = sin k / (k(π² − k²)) for g = (2π)^{-1/2} sin(πr)/r on the unit ball.
fn g_hat_closed(k: f64) -> f64 {
    if (k - PI).abs() < 1e-6 {
        return 1.0 / (2.0 * PI * PI);
    }
    if k < 1e-6 {
        return 1.0 / (PI * PI);
    }
    k.sin() / (k * (PI * PI - k * k))
}

#[test]
fn g_hat_matches_closed_form() {
    for i in 0..4000 {
        let k = 0.0137 + i as f64 * 0.1;
        let got = g_hat_unit(k);
        let want = g_hat_closed(k);
        assert!(
            (got - want).abs() <= 1e-9 * (1.0 + 1.0 / k.powi(3)).min(1.0) + 1e-12,
            "k = {k}: {got} vs {want}"
        );
    }
    // Beyond the table the asymptotic branch takes over.
    for k in [401.3, 1234.5, 1e5 + 0.7] {
        assert_relative_eq!(g_hat_unit(k), g_hat_closed(k), max_relative = 1e-9);
    }
}

#[test]
fn profile_norms_are_exact() {
    // ∫g² = 1 and ∫|∇g|² = π², the same for the annulus profile.
    let g = CoherentProfile::new(1.0).unwrap();
    assert_relative_eq!(g.norm, 1.0, max_relative = 1e-12);
    assert_relative_eq!(g.grad_norm_sq, PI * PI, max_relative = 1e-10);
    let a = AnnulusProfile::new(1.0, 20).unwrap();
    assert_relative_eq!(a.norm, 1.0, max_relative = 1e-12);
    assert_relative_eq!(a.grad_norm_sq, PI * PI, max_relative = 1e-10);
    let scaled = AnnulusProfile::new(3.0, 20).unwrap();
    assert_relative_eq!(scaled.grad_norm_sq, PI * PI / 9.0, max_relative = 1e-10);
}

#[test]
fn smeared_potential_closed_values() {
    // ∫g²/|y| = 2∫₀¹ sin²(πu)/u du = ln(2π) + γ_E − Ci(2π).
    let ci_2pi = -0.022_560_661_746_346_1;
    let euler = 0.577_215_664_901_532_9;
    let want = (2.0 * PI).ln() + euler - ci_2pi;
    assert_relative_eq!(smeared_unit_potential(0.0), want, max_relative = 1e-10);
    assert_relative_eq!(smeared_unit_potential(1.5), 1.0 / 1.5, max_relative = 1e-14);
    // T(1) = ∫₀¹ u g² du = 1/(4π)·∫g²/|y|.
    assert_relative_eq!(t_moment(1.0), want / (4.0 * PI), max_relative = 1e-8);
}

#[test]
fn signed_flat_form_is_the_self_potential() {
    // With the signed profile, ∬ĝ(ξ)ĝ(ξ′)/|ξ−ξ′|² = 2π²·(g_R, |x|⁻¹g_R).
    let r = 0.25f64;
    let scale = r.powf(1.5);
    let signed = move |k: f64| scale * g_hat_unit(k * r);
    let opts = CorrectionOptions::default();
    let f = momentum_forms_with(0.0, r, 50.0, &opts, &signed).unwrap();
    let want = 2.0 * PI * PI * smeared_unit_potential(0.0) / r;
    assert_relative_eq!(f.flat, want, max_relative = 1e-2);
}
