//! The TF solver against an independent shooting code.
//!
//! With t = u² and w = 2·dy/dt the equation y″ = y^{3/2}/√t becomes the
//! regular system dy/du = u·w, dw/du = 4·y^{3/2}, so plain RK4 in u needs no
//! special handling at the origin.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use reltf::model::AtomSystem;
use reltf::tf::{build_atom, euler_lagrange_residual, solve_universal, solve_universal_with, TfOptions};

const DU: f64 = 2e-4;

enum Fate {
    /// y reached zero at (t, t·dy/dt).
    Crossed(f64, f64),
    /// y turned upward.
    Turned,
    Survived,
}

struct Trajectory {
    u: Vec<f64>,
    y: Vec<f64>,
    fate: Fate,
}

fn shoot(slope: f64, u_max: f64) -> Trajectory {
    let rhs = |u: f64, y: f64, w: f64| (u * w, 4.0 * y.max(0.0).powf(1.5));
    let (mut u, mut y, mut w) = (0.0, 1.0, 2.0 * slope);
    let mut out = Trajectory {
        u: vec![u],
        y: vec![y],
        fate: Fate::Survived,
    };
    while u < u_max {
        let (k1y, k1w) = rhs(u, y, w);
        let (k2y, k2w) = rhs(u + DU / 2.0, y + DU / 2.0 * k1y, w + DU / 2.0 * k1w);
        let (k3y, k3w) = rhs(u + DU / 2.0, y + DU / 2.0 * k2y, w + DU / 2.0 * k2w);
        let (k4y, k4w) = rhs(u + DU, y + DU * k3y, w + DU * k3w);
        let yn = y + DU / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        let wn = w + DU / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if yn <= 0.0 {
            // Linear interpolation of the crossing.
            let f = y / (y - yn);
            let uc = u + f * DU;
            let wc = w + f * (wn - w);
            out.fate = Fate::Crossed(uc * uc, uc * uc * wc / 2.0);
            return out;
        }
        if wn > 0.0 {
            out.fate = Fate::Turned;
            return out;
        }
        u += DU;
        y = yn;
        w = wn;
        out.u.push(u);
        out.y.push(y);
    }
    out
}

/// Slope of the neutral solution: too steep crosses zero, too shallow turns.
fn neutral_slope() -> f64 {
    let (mut lo, mut hi) = (-1.7, -1.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, 12.0).fate {
            Fate::Crossed(..) => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

fn b_unit() -> f64 {
    0.5 * (0.75 * PI).powf(2.0 / 3.0)
}

#[test]
fn neutral_slope_matches_shooting() {
    let oracle = neutral_slope();
    let solver = solve_universal(1.0, 1e-10).unwrap();
    assert_relative_eq!(oracle, -1.588071, epsilon = 2e-5);
    assert_relative_eq!(solver.slope0, oracle, epsilon = 1e-5);
}

#[test]
fn neutral_energy_by_virial_quadrature() {
    // E = −T and T = (3/5)(Z²/b)∫y^{5/2} t^{-1/2} dt = (6/5)(Z²/b)∫y^{5/2} du.
    let slope = neutral_slope();
    // Stop well before the trajectory departs from the separatrix.
    let tr = shoot(slope, 6.0);
    let n = tr.u.len();
    let mut integral = 0.0;
    for i in 1..n {
        integral += 0.5 * DU * (tr.y[i - 1].powf(2.5) + tr.y[i].powf(2.5));
    }
    // Sommerfeld tail y ≈ 144/u⁶ beyond the last point.
    let u_end = tr.u[n - 1];
    integral += 144f64.powf(2.5) / (14.0 * u_end.powi(14));
    let oracle = -1.2 * integral / b_unit();
    assert_relative_eq!(oracle, -0.768745, epsilon = 1e-3);

    let u = solve_universal(1.0, 1e-10).unwrap();
    let atom = build_atom(&AtomSystem::neutral(1.0).unwrap(), &u).unwrap();
    assert_relative_eq!(atom.energy.total, oracle, epsilon = 1e-3);
    // Virial theorem of the solver's own energy split.
    assert_relative_eq!(atom.energy.kinetic, -atom.energy.total, max_relative = 1e-3);
}

#[test]
fn ionic_boundary_matches_shooting() {
    let lambda = 0.5;
    let u = solve_universal(lambda, 1e-10).unwrap();
    assert!(u.boundary_residual <= 1e-6, "residual {}", u.boundary_residual);
    match shoot(u.slope0, 40.0).fate {
        Fate::Crossed(t0, ty) => {
            assert_relative_eq!(t0, u.t0, max_relative = 1e-4);
            // Charge enclosed at t0 is λ: 1 + t0·y′(t0) = λ.
            assert_relative_eq!(1.0 + ty, lambda, epsilon = 1e-4);
        }
        _ => panic!("ionic slope does not reach zero"),
    }
}

#[test]
fn euler_lagrange_holds_on_the_grid() {
    for lambda in [0.5, 1.0] {
        let u = solve_universal(lambda, 1e-10).unwrap();
        let sys = AtomSystem::new(30.0, lambda, 0.5, 5.0 / 9.0).unwrap();
        let atom = build_atom(&sys, &u).unwrap();
        assert!(euler_lagrange_residual(&atom) < 1e-3, "lambda = {lambda}");
        assert_relative_eq!(atom.electrons(), atom.rho.integrate(), max_relative = 1e-5);
    }
}

#[test]
fn grid_refinement_is_stable() {
    let coarse = solve_universal(1.0, 1e-10).unwrap();
    let fine = solve_universal_with(
        1.0,
        &TfOptions {
            nodes: 8000,
            max_step: 5e-4,
            ..TfOptions::default()
        },
    )
    .unwrap();
    assert_relative_eq!(coarse.slope0, fine.slope0, epsilon = 1e-7);
}
