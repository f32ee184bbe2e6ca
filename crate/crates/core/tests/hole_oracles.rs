use std::f64::consts::PI;

use approx::assert_relative_eq;
use reltf::hole::{
    ball_potential, enclosed_mass, hole_point, hole_radius, hole_potential, mollify, rescale,
    scan_grid, sup_norm_scan, RadialDensity,
};
use reltf::model::AtomSystem;
use reltf::quad::GaussLegendre;
use reltf::tf::{solve_atom, TfOptions};

/// e^{-r}/(8π), unit mass, truncated where it is below 1e-26.
struct Exponential;

impl RadialDensity for Exponential {
    fn density(&self, r: f64) -> f64 {
        if r > 60.0 {
            0.0
        } else {
            (-r).exp() / (8.0 * PI)
        }
    }
    fn outer_radius(&self) -> f64 {
        60.0
    }
    fn total_mass(&self) -> f64 {
        1.0
    }
}

/// ∫_{B_R(x)} σ(y)·|x−y|^{-k} dy in spherical coordinates about x, with
/// panels in the radial and polar directions.
fn cubature(sigma: &dyn RadialDensity, d: f64, radius: f64, k: i32) -> f64 {
    let rule = GaussLegendre::new(20);
    let panels = 64;
    let mut total = 0.0;
    for i in 0..panels {
        let r0 = radius * i as f64 / panels as f64;
        let r1 = radius * (i + 1) as f64 / panels as f64;
        total += rule.integrate(r0, r1, |rho| {
            let mut ang = 0.0;
            for j in 0..panels {
                let m0 = -1.0 + 2.0 * j as f64 / panels as f64;
                let m1 = -1.0 + 2.0 * (j + 1) as f64 / panels as f64;
                ang += rule.integrate(m0, m1, |mu| {
                    let s = (d * d + rho * rho + 2.0 * d * rho * mu).max(0.0).sqrt();
                    sigma.density(s)
                });
            }
            2.0 * PI * rho.powi(2 - k) * ang
        });
    }
    total
}

#[test]
fn bipolar_factors_match_cubature() {
    let s = Exponential;
    for &(d, radius) in &[(0.3, 0.2), (0.5, 1.7), (2.0, 1.0), (4.0, 3.5), (1.0, 1.0)] {
        let m = enclosed_mass(&s, d, radius).unwrap();
        let v = ball_potential(&s, d, radius).unwrap();
        assert_relative_eq!(m, cubature(&s, d, radius, 0), max_relative = 1e-8);
        assert_relative_eq!(v, cubature(&s, d, radius, 1), max_relative = 1e-8);
    }
}

#[test]
fn hole_of_exponential_density() {
    // Centered: mass inside r is 1 − e^{-r}(1 + r + r²/2).
    let r = hole_radius(&Exponential, 0.0).unwrap();
    let inside = 1.0 - (-r).exp() * (1.0 + r + r * r / 2.0);
    assert_relative_eq!(inside, 0.5, epsilon = 1e-10);
    // Potential at the center: ∫_{|y|<r} e^{-|y|}/(8π|y|) = (1 − e^{-r}(1 + r))/2.
    let l = hole_potential(&Exponential, 0.0).unwrap();
    assert_relative_eq!(l, 0.5 * (1.0 - (-r).exp() * (1.0 + r)), max_relative = 1e-9);
}

fn tf_density(z: f64, lambda: f64) -> reltf::grid::RadialFunction {
    let sys = AtomSystem::new(z, lambda, 0.5, 5.0 / 9.0).unwrap();
    solve_atom(&sys, &TfOptions::default()).unwrap().rho
}

#[test]
fn scaling_laws() {
    // σ_s(x) = s³σ(sx): R_s(x) = R(sx)/s and L_s(x) = s·L(sx).
    let rho = tf_density(10.0, 1.0);
    for s in [2.0, 5.0] {
        let scaled = rescale(&rho, s);
        for x in [1e-3, 0.05, 0.4, 2.0] {
            let r = hole_radius(&rho, s * x).unwrap();
            let rs = hole_radius(&scaled, x).unwrap();
            assert_relative_eq!(rs, r / s, max_relative = 1e-6);
            let l = hole_potential(&rho, s * x).unwrap();
            let ls = hole_potential(&scaled, x).unwrap();
            assert_relative_eq!(ls, s * l, max_relative = 1e-6);
        }
    }
}

#[test]
fn newton_replacement_outside_the_support() {
    let sys = AtomSystem::new(20.0, 0.5, 0.5, 5.0 / 9.0).unwrap();
    let atom = solve_atom(&sys, &TfOptions::default()).unwrap();
    let width = sys.r;
    let smeared = mollify(&atom.rho, width).unwrap();
    assert_relative_eq!(smeared.integrate(), atom.rho.integrate(), max_relative = 1e-6);
    let u = atom.rho.newton_potential();
    let us = smeared.newton_potential();
    let edge = atom.r0 + width;
    let end = u.grid.r_max();
    assert!(end > edge);
    for f in [0.1, 0.5, 0.9] {
        let r = edge + f * (end - edge);
        assert_relative_eq!(us.value(r), u.value(r), max_relative = 1e-6);
        assert_relative_eq!(u.value(r), sys.n / r, max_relative = 1e-6);
    }
}

#[test]
fn mollifier_tends_to_identity() {
    let rho = tf_density(10.0, 1.0);
    let l1 = |w: f64| {
        let m = mollify(&rho, w).unwrap();
        m.map(|r, v| (v - rho.value(r)).abs()).integrate() / rho.integrate()
    };
    let coarse = l1(1e-2);
    let fine = l1(1e-3);
    assert!(fine < coarse);
    assert!(fine <= 1e-3, "L1 residual {fine}");
}

#[test]
fn hole_radius_grows_outside_the_bulk() {
    let z = 10.0;
    let rho = tf_density(z, 1.0);
    let bulk = z.powf(-1.0 / 3.0);
    let grid: Vec<f64> = scan_grid(z, 41).into_iter().filter(|&x| x >= bulk).collect();
    let radii: Vec<f64> = grid.iter().map(|&x| hole_radius(&rho, x).unwrap()).collect();
    for w in radii.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-9), "{} then {}", w[0], w[1]);
    }
}

#[test]
fn near_part_is_bounded_by_half_charge() {
    let z = 100.0;
    let rho = tf_density(z, 1.0);
    let scan = sup_norm_scan(&rho, &scan_grid(z, 21), z).unwrap();
    for p in &scan.points {
        assert!(p.a2 <= z / 2.0, "x = {}: A2 = {}", p.x, p.a2);
        assert!(p.a1 <= p.potential + 1e-12);
    }
    // L peaks at the nucleus.
    assert!(scan.at_boundary);
    assert!(scan.center_potential >= scan.sup_l);
    let p = hole_point(&rho, 0.1, 1.0 / z).unwrap();
    assert_relative_eq!(p.a1 + p.a2, p.potential, max_relative = 1e-12);
}
