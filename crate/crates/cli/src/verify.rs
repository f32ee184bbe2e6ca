//! The identity suite behind `reltf verify`.

use anyhow::Result;
use reltf::coherent::{kinetic_upper, trace_gamma1, trace_gamma_total, TrialSpec};
use reltf::corrections::kernel_chain;
use reltf::model::{dispersion_c, gamma_tf, reduction_identity_residual_c, AtomSystem};
use reltf::packets::positivity_sample;
use reltf::tf::{build_atom, scaling_check, solve_universal_with};
use reltf::Error;
use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};

#[derive(Debug, Clone, Serialize)]
pub struct Identity {
    pub name: &'static str,
    /// Worst deviation found.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ledger {
    pub schema_version: u32,
    pub z: f64,
    pub lambda: f64,
    pub seed: u64,
    pub identities: Vec<Identity>,
    pub all_pass: bool,
}

impl Ledger {
    pub fn failures(&self) -> impl Iterator<Item = &Identity> {
        self.identities.iter().filter(|i| !i.pass)
    }
}

/// 512 log-spaced momenta on [1e-4, 1e4]·c.
fn momentum_grid(c: f64) -> impl Iterator<Item = f64> {
    (0..512).map(move |i| c * 10f64.powf(-4.0 + 8.0 * i as f64 / 511.0))
}

pub fn run(cfg: &RunConfig) -> Result<Ledger> {
    let sys = AtomSystem::new(cfg.z, cfg.lambda, cfg.kappa, cfg.delta)?;
    let speeds = [sys.c, 1.0, 137.035999];
    let mut out = Vec::new();
    let mut push = |name: &'static str, value: f64, default_tol: f64| {
        let tolerance = cfg.tolerance.unwrap_or(default_tol);
        out.push(Identity {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        });
    };

    let mut unitarity: f64 = 0.0;
    let mut reduction: f64 = 0.0;
    for &c in &speeds {
        for p in momentum_grid(c) {
            let d = dispersion_c(p, c)?;
            unitarity = unitarity.max((d.phi1 * d.phi1 + d.phi2 * d.phi2 - 1.0).abs());
            reduction = reduction.max(reduction_identity_residual_c(p, c)? / d.ec);
        }
    }
    push("unitarity", unitarity, 1e-12);
    push("reduction", reduction, 1e-12);

    let mut chain: f64 = 0.0;
    for &c in &speeds {
        let ps: Vec<_> = momentum_grid(c).step_by(8).collect();
        for &a in &ps {
            for &b in &ps {
                match kernel_chain(&dispersion_c(a, c)?, &dispersion_c(b, c)?, c) {
                    Ok(()) => {}
                    Err(Error::KernelInequality { lhs, rhs, .. }) => {
                        chain = chain.max((lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    push("kernel_chain", chain, 1e-9);

    let universal = solve_universal_with(sys.lambda_eff(), &cfg.tf)?;
    let atom = build_atom(&sys, &universal)?;
    let scaling = scaling_check(cfg.lambda, 1.0, cfg.z.max(1.0), &cfg.tf)?;
    push("tf_scaling", scaling, 1e-6);

    let spec = TrialSpec::new(atom, &cfg.trial_options())?;
    let electrons = sys.n.min(sys.z);
    push("trace_gamma1", ((trace_gamma1(&spec) - electrons) / electrons).abs(), 1e-6);
    push("trace_total", ((trace_gamma_total(&spec) - sys.n) / sys.n).abs(), 1e-6);

    let tf_kinetic = 0.6 * gamma_tf() * spec.rho_cl.map(|_, v| v.powf(5.0 / 3.0)).integrate();
    let ps = kinetic_upper(&spec).phase_space;
    push("kinetic_identity", ((ps - tf_kinetic) / tf_kinetic).abs(), 1e-6);

    let sample = positivity_sample(&spec, cfg.trials, cfg.seed)?;
    let excess = (-sample.min).max(sample.max - 1.0).max(0.0);
    push("positivity", excess, 1e-8);

    let all_pass = out.iter().all(|i| i.pass);
    Ok(Ledger {
        schema_version: SCHEMA_VERSION,
        z: cfg.z,
        lambda: cfg.lambda,
        seed: cfg.seed,
        identities: out,
        all_pass,
    })
}
