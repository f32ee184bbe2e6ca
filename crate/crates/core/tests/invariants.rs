use std::sync::OnceLock;

use approx::assert_relative_eq;
use proptest::prelude::*;
use reltf::bounds::{weyl_negative_trace_c, weyl_nonrelativistic};
use reltf::coherent::{kinetic_upper, trace_gamma1, TrialOptions, TrialSpec};
use reltf::corrections::kernel_chain;
use reltf::grid::{LogGrid, RadialFunction};
use reltf::model::{dispersion_c, gamma_tf, reduction_identity_residual_c, AtomSystem};
use reltf::packets::{expectation, positivity_sample, LatticeOptions, WavePacket};
use reltf::tf::{build_atom, solve_universal, TFUniversalSolution};

fn neutral() -> &'static TFUniversalSolution {
    static U: OnceLock<TFUniversalSolution> = OnceLock::new();
    U.get_or_init(|| solve_universal(1.0, 1e-10).unwrap())
}

fn ionic() -> &'static TFUniversalSolution {
    static U: OnceLock<TFUniversalSolution> = OnceLock::new();
    U.get_or_init(|| solve_universal(0.5, 1e-10).unwrap())
}

fn spec(z: f64, lambda: f64) -> TrialSpec {
    let sys = AtomSystem::new(z, lambda, 0.5, 5.0 / 9.0).unwrap();
    let u = if lambda < 1.0 { ionic() } else { neutral() };
    TrialSpec::new(build_atom(&sys, u).unwrap(), &TrialOptions::default()).unwrap()
}

proptest! {
    #[test]
    fn spinor_map_is_unitary(lp in -6.0f64..6.0, lc in 0.0f64..4.0) {
        let (p, c) = (10f64.powf(lp), 10f64.powf(lc));
        let d = dispersion_c(p, c).unwrap();
        prop_assert!((d.phi1 * d.phi1 + d.phi2 * d.phi2 - 1.0).abs() <= 4.0 * f64::EPSILON);
        prop_assert!(reduction_identity_residual_c(p, c).unwrap() <= 1e-12 * d.ec);
        // Stable and naive forms of the kinetic energy agree.
        prop_assert!((d.kinetic(c) - (d.ec - c * c)).abs() <= 1e-9 * d.ec);
    }

    #[test]
    fn kernel_chain_holds(la in -3.0f64..5.0, lb in -3.0f64..5.0, lc in 0.0f64..3.0) {
        let c = 10f64.powf(lc);
        let a = dispersion_c(10f64.powf(la), c).unwrap();
        let b = dispersion_c(10f64.powf(lb), c).unwrap();
        prop_assert!(kernel_chain(&a, &b, c).is_ok());
    }

    #[test]
    fn weyl_trace_is_monotone_in_the_potential(
        a in 0.1f64..50.0,
        extra in 0.0f64..20.0,
        width in 0.2f64..3.0,
        lc in 0.0f64..2.0,
    ) {
        let grid = LogGrid::spanning(1e-4, 40.0, 600).unwrap();
        let v1 = RadialFunction::from_fn(grid, |r| a * (-r / width).exp()).unwrap();
        let v2 = RadialFunction::from_fn(grid, |r| (a + extra / (1.0 + r)) * (-r / width).exp()).unwrap();
        let c = 10f64.powf(lc);
        let t1 = weyl_negative_trace_c(c, &v1).unwrap();
        let t2 = weyl_negative_trace_c(c, &v2).unwrap();
        prop_assert!(t1 <= 0.0 && t2 <= t1 * (1.0 - 1e-12));
        // Relativistic kinetic energy is smaller, so the trace is deeper.
        prop_assert!(t1 <= weyl_nonrelativistic(&v1));
    }

    #[test]
    fn phase_space_kinetic_is_tf_kinetic(lz in 0.0f64..4.0) {
        let s = spec(10f64.powf(lz), 1.0);
        let want = 0.6 * gamma_tf() * s.rho_cl.map(|_, v| v.powf(5.0 / 3.0)).integrate();
        prop_assert!((kinetic_upper(&s).phase_space - want).abs() <= 1e-6 * want);
        prop_assert!((trace_gamma1(&s) - s.atom.sys.z).abs() <= 1e-6 * s.atom.sys.z);
    }

    #[test]
    fn tf_energy_scales_exactly(lz in 0.0f64..4.0) {
        let z = 10f64.powf(lz);
        for (lambda, u) in [(1.0, neutral()), (0.5, ionic())] {
            let e = |z: f64| build_atom(&AtomSystem::new(z, lambda, 0.5, 5.0 / 9.0).unwrap(), u)
                .unwrap().energy.total / z.powf(7.0 / 3.0);
            prop_assert!(((e(z) - e(1.0)) / e(1.0)).abs() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn packet_expectation_is_a_probability(seed in any::<u64>()) {
        let s = spec(20.0, 1.0);
        let out = positivity_sample(&s, 2, seed).unwrap();
        prop_assert!(out.min >= -1e-8 && out.max <= 1.0 + 1e-8);
    }
}

#[test]
fn occupation_falls_with_the_boost() {
    let s = spec(20.0, 1.0);
    let r = s.profile.r;
    let opts = LatticeOptions::default();
    let spacing = r / opts.points_per_r as f64;
    let q = [0.5 * r, 0.0, 0.0];
    let pf = s.fermi_momentum(0.5 * r);
    let values: Vec<f64> = [0.0, 0.5, 1.5, 2.5]
        .iter()
        .map(|f| {
            let u = WavePacket::coherent(spacing, r, q, [0.0, 0.0, f * pf], 1).unwrap();
            expectation(&s, &u, &opts).unwrap()
        })
        .collect();
    for w in values.windows(2) {
        assert!(w[1] < w[0], "{values:?}");
    }
}

#[test]
fn ionic_trace_is_the_electron_count() {
    let s = spec(50.0, 0.5);
    assert_relative_eq!(trace_gamma1(&s), 25.0, max_relative = 1e-6);
}
