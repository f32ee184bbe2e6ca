use approx::assert_relative_eq;
use reltf::bounds::{
    energy_report, lower_bound, mollified_potential, upper_bound, weyl_negative_trace_c,
    weyl_nonrelativistic, weyl_trace_with_core, BoundOptions,
};
use reltf::coherent::{TrialOptions, TrialSpec};
use reltf::corrections::fit_exponent;
use reltf::hole::mollify;
use reltf::model::AtomSystem;
use reltf::tf::{build_atom, solve_universal};

#[test]
fn weyl_trace_of_the_tf_potential_is_the_tf_energy() {
    // For the exact TF potential, the phase-space trace of p²/2 − (V − u′)
    // is T − ∫(V − u′)ρ, hence trace − u′N − D(ρ, ρ) = E_TF.
    for lambda in [0.5, 1.0] {
        let u = solve_universal(lambda, 1e-10).unwrap();
        let sys = AtomSystem::new(40.0, lambda, 0.5, 5.0 / 9.0).unwrap();
        let atom = build_atom(&sys, &u).unwrap();
        let w = atom.potential.map(|_, v| v - atom.u_prime);
        let trace = weyl_nonrelativistic(&w);
        let e = trace - atom.u_prime * atom.electrons() - atom.energy.hartree;
        assert_relative_eq!(e, atom.energy.total, max_relative = 1e-5);
    }
}

#[test]
fn weyl_trace_approaches_nonrelativistic_limit() {
    let z = 80.0;
    let u = solve_universal(1.0, 1e-10).unwrap();
    let atom = build_atom(&AtomSystem::neutral(z).unwrap(), &u).unwrap();
    // Capped at ten times the TF energy scale so the relativistic trace is finite.
    let cap = 10.0 * z.powf(4.0 / 3.0);
    let v = atom.potential.map(|_, x| x.min(cap));
    let c = 1e3 * z.powf(2.0 / 3.0);
    let rel = weyl_negative_trace_c(c, &v).unwrap();
    let nr = weyl_nonrelativistic(&v);
    assert_relative_eq!(rel / nr, 1.0, epsilon = 1e-3);
}

#[test]
fn mollified_trace_is_close_to_tf_semiclassics() {
    let z = 80.0;
    let u = solve_universal(1.0, 1e-10).unwrap();
    let sys = AtomSystem::neutral(z).unwrap();
    let atom = build_atom(&sys, &u).unwrap();
    let rho_delta = mollify(&atom.rho, sys.r).unwrap();
    let v = mollified_potential(&atom, &rho_delta);
    let trace = weyl_trace_with_core(sys.c, &v, 1.0 / z).unwrap();
    let tf = atom.energy.total + atom.energy.hartree;
    assert!(((trace - tf) / tf).abs() <= 0.05, "{trace} vs {tf}");
    // Smearing raises V and relativity deepens the trace.
    assert!(trace < tf);
}

#[test]
fn lower_subtractions_scale_as_expected() {
    let opts = BoundOptions::default();
    let u = solve_universal(1.0, 1e-10).unwrap();
    let mut d = Vec::new();
    let mut hole = Vec::new();
    for z in [20.0, 80.0, 320.0] {
        let atom = build_atom(&AtomSystem::neutral(z).unwrap(), &u).unwrap();
        let low = lower_bound(&atom, &opts).unwrap();
        d.push((z, low.hartree));
        hole.push((z, low.hole_term));
        assert!(low.k_hole > 0.0 && low.k_hole < 3.0);
    }
    let fd = fit_exponent(&d).unwrap();
    let fh = fit_exponent(&hole).unwrap();
    assert!((fd.slope - 7.0 / 3.0).abs() <= 0.05, "D slope {}", fd.slope);
    assert!(fh.slope <= 2.1, "hole slope {}", fh.slope);
}

#[test]
fn neutral_upper_remainder_is_positive() {
    let opts = BoundOptions::default();
    let u = solve_universal(1.0, 1e-10).unwrap();
    let sys = AtomSystem::new(80.0, 1.0, 0.5, 5.0 / 9.0).unwrap();
    let r = energy_report(&sys, &u, &opts).unwrap();
    assert!(r.e_upper.is_finite() && r.e_lower.is_finite());
    assert!(r.remainder_upper > 0.0);
    assert!(r.e_lower < r.e_tf && r.e_tf < r.e_upper);
    assert!(r.upper.kinetic_penalty > 0.0 && r.upper.external < 0.0 && r.upper.hartree > 0.0);
    assert!(r.upper.phi2_term >= 0.0 && r.upper.phi1_deficit >= 0.0 && r.upper.hartree_lift >= 0.0);
    assert!(r.upper.gamma2.is_none());
}

#[test]
fn negative_ion_books_the_surplus() {
    let opts = BoundOptions::default();
    let u = solve_universal(1.0, 1e-10).unwrap();
    let sys = AtomSystem::new(20.0, 1.2, 0.5, 5.0 / 9.0).unwrap();
    let atom = build_atom(&sys, &u).unwrap();
    let spec = TrialSpec::new(atom, &TrialOptions::default()).unwrap();
    let up = upper_bound(&spec, &opts).unwrap();
    let g = up.gamma2.expect("surplus orbitals");
    assert!(g.kinetic_bound > 0.0 && g.interaction_bound > 0.0);
    assert!(up.external_restriction >= 0.0);
    assert_relative_eq!(up.trace_total, sys.n, max_relative = 1e-6);
}
