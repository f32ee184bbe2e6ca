#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod verify;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use reltf::bounds::{delta_scan, sandwich_report};
use reltf::coherent::TrialSpec;
use reltf::corrections::{correction_report, fit_exponent};
use reltf::hole::{mollify, scan_grid, sup_norm_scan, HoleScan};
use reltf::model::AtomSystem;
use reltf::tf::{build_atom, euler_lagrange_residual, solve_universal_with};
use serde::Serialize;

use crate::config::{Format, Overrides, RunConfig, SCHEMA_VERSION};
use crate::output::{Chart, OutputDir, Series};

/// Bad flags or config values; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A checked property failed; exits with code 1 after all outputs are written.
#[derive(Debug)]
struct AssertionFailure(String);

impl std::fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AssertionFailure {}

#[derive(Parser)]
#[command(name = "reltf", version, about = "Relativistic Thomas-Fermi energy bounds toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the TF problem for one atom.
    #[command(long_about = "Solve the TF problem for one atom.\n\n\
        Writes density.csv (columns: r, rho), potential.csv (columns: r, potential, \
        occupied = [V - u']_+) and energy.json.")]
    Tf {
        #[command(flatten)]
        args: Overrides,
    },
    /// Run the identity suite and write a pass/fail ledger.
    #[command(long_about = "Run the identity suite and write a pass/fail ledger.\n\n\
        Identities: unitarity, reduction, kernel_chain, tf_scaling, trace_gamma1, \
        trace_total, kinetic_identity, positivity. Writes verify.json. Exit code 1 \
        if any identity exceeds its tolerance.")]
    Verify {
        #[command(flatten)]
        args: Overrides,
    },
    /// Upper/lower energy sweep over Z with remainder fits and plots.
    #[command(long_about = "Upper/lower energy sweep over Z with remainder fits and plots.\n\n\
        Writes sweep.csv (columns: z, lambda, e_tf, e_upper, e_lower, upper_ratio, \
        lower_ratio, remainder_upper, phi2_term, phi1_deficit, hartree_lift, k_hole), \
        sweep.json (fits and assertion flags), remainder.svg and corrections.svg. \
        With --delta-scan-Z also delta_scan.json. Exit code 1 if the remainder \
        exponent or the ratio trends fail.")]
    Sweep {
        #[command(flatten)]
        args: Overrides,
    },
    /// Exchange-hole sup-norm scans of rho and its mollification.
    #[command(long_about = "Exchange-hole sup-norm scans of rho and its mollification.\n\n\
        Writes hole_Z<Z>.csv per charge (columns: density, x, radius, potential, a1, a2) \
        and hole.json with sup L / Z per charge.")]
    Hole {
        #[command(flatten)]
        args: Overrides,
    },
    /// Relativistic correction bounds over the Z sweep.
    #[command(long_about = "Relativistic correction bounds over the Z sweep.\n\n\
        Writes corrections.csv (columns: z, phi2_term, phi1_deficit, hartree_lift, \
        phi2_ratio, deficit_ratio, lift_ratio, flat_spread; ratios are divided by \
        Z^(7/3)), corrections.json and corrections.svg.")]
    Corrections {
        #[command(flatten)]
        args: Overrides,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<AssertionFailure>() {
            return 1;
        }
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<std::io::Error>() {
            return 3;
        }
        if let Some(reltf::Error::InvalidInput(_)) = cause.downcast_ref::<reltf::Error>() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Tf { args } => {
            if args.config.is_none() && (args.lambda.is_none() || args.z.is_none()) {
                return Err(UsageError(
                    "tf needs --lambda and --Z (or --config)\n\nUsage: reltf tf --lambda <LAMBDA> --Z <Z> [OPTIONS]".into(),
                )
                .into());
            }
            cmd_tf(&RunConfig::resolve(&args)?)
        }
        Command::Verify { args } => cmd_verify(&RunConfig::resolve(&args)?),
        Command::Sweep { args } => cmd_sweep(&RunConfig::resolve(&args)?),
        Command::Hole { args } => cmd_hole(&RunConfig::resolve(&args)?),
        Command::Corrections { args } => cmd_corrections(&RunConfig::resolve(&args)?),
    }
}

fn system(cfg: &RunConfig, z: f64) -> Result<AtomSystem> {
    Ok(AtomSystem::new(z, cfg.lambda, cfg.kappa, cfg.delta)?)
}

fn cmd_tf(cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct DensityRow {
        r: f64,
        rho: f64,
    }
    #[derive(Serialize)]
    struct PotentialRow {
        r: f64,
        potential: f64,
        occupied: f64,
    }
    #[derive(Serialize)]
    struct Summary {
        schema_version: u32,
        z: f64,
        n: f64,
        lambda: f64,
        lambda_eff: f64,
        slope0: f64,
        /// None for the neutral solution, whose support is unbounded.
        t0: Option<f64>,
        r0: Option<f64>,
        u_prime: f64,
        boundary_residual: f64,
        euler_lagrange_residual: f64,
        electrons: f64,
        energy: reltf::tf::TfEnergy,
        energy_per_z73: f64,
    }
    let sys = system(cfg, cfg.z)?;
    let universal = solve_universal_with(sys.lambda_eff(), &cfg.tf).context("solving the TF equation")?;
    let atom = build_atom(&sys, &universal)?;
    let mut out = OutputDir::create(&cfg.output)?;
    let grid = atom.rho.grid;
    if cfg.wants(Format::Csv) {
        let density: Vec<DensityRow> = (0..grid.n)
            .map(|i| DensityRow {
                r: grid.r(i),
                rho: atom.rho.values[i],
            })
            .collect();
        out.csv("density.csv", &density)?;
        let occ = atom.occupied_potential();
        let potential: Vec<PotentialRow> = (0..grid.n)
            .map(|i| PotentialRow {
                r: grid.r(i),
                potential: atom.potential.values[i],
                occupied: occ.values[i],
            })
            .collect();
        out.csv("potential.csv", &potential)?;
    }
    let finite = |v: f64| v.is_finite().then_some(v);
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        z: sys.z,
        n: sys.n,
        lambda: sys.lambda,
        lambda_eff: sys.lambda_eff(),
        slope0: universal.slope0,
        t0: finite(universal.t0),
        r0: finite(atom.r0),
        u_prime: atom.u_prime,
        boundary_residual: universal.boundary_residual,
        euler_lagrange_residual: euler_lagrange_residual(&atom),
        electrons: atom.electrons(),
        energy: atom.energy,
        energy_per_z73: atom.energy.total / sys.z.powf(7.0 / 3.0),
    };
    out.json("energy.json", &summary)?;
    out.manifest("tf", cfg)?;
    println!(
        "E_TF = {:.8} (Z = {}, lambda = {}), outputs in {}",
        atom.energy.total,
        sys.z,
        sys.lambda,
        cfg.output.display()
    );
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let ledger = verify::run(cfg)?;
    let mut out = OutputDir::create(&cfg.output)?;
    out.json("verify.json", &ledger)?;
    out.manifest("verify", cfg)?;
    for i in &ledger.identities {
        println!(
            "{:<18} {} value {:.3e} tolerance {:.1e}",
            i.name,
            if i.pass { "pass" } else { "FAIL" },
            i.value,
            i.tolerance
        );
    }
    let failed: Vec<&str> = ledger.failures().map(|i| i.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AssertionFailure(format!("identities out of tolerance: {}", failed.join(", "))).into())
    }
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        z: f64,
        lambda: f64,
        e_tf: f64,
        e_upper: f64,
        e_lower: f64,
        upper_ratio: f64,
        lower_ratio: f64,
        remainder_upper: f64,
        phi2_term: f64,
        phi1_deficit: f64,
        hartree_lift: f64,
        k_hole: f64,
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        schema_version: u32,
        lambda: f64,
        kappa: f64,
        delta: f64,
        z_sweep: &'a [f64],
        remainder_fit: reltf::corrections::ExponentFit,
        remainder_exponent_limit: f64,
        k_upper: f64,
        k_hole: f64,
        upper_inversions: usize,
        lower_inversions: usize,
        exponent_ok: bool,
        trends_ok: bool,
        /// The lower expression is a semiclassical surrogate, not a rigorous bound.
        lower_is_surrogate: bool,
        reports: &'a [reltf::bounds::EnergyReport],
    }
    cfg.require_sweep()?;
    let opts = cfg.bound_options();
    let rep = sandwich_report(cfg.lambda, &cfg.z_sweep, cfg.kappa, cfg.delta, &opts)?;
    let mut out = OutputDir::create(&cfg.output)?;
    let rows: Vec<Row> = rep
        .reports
        .iter()
        .map(|r| Row {
            z: r.sys.z,
            lambda: r.sys.lambda,
            e_tf: r.e_tf,
            e_upper: r.e_upper,
            e_lower: r.e_lower,
            upper_ratio: r.upper_ratio,
            lower_ratio: r.lower_ratio,
            remainder_upper: r.remainder_upper,
            phi2_term: r.upper.phi2_term,
            phi1_deficit: r.upper.phi1_deficit,
            hartree_lift: r.upper.hartree_lift,
            k_hole: r.lower.k_hole,
        })
        .collect();
    if cfg.wants(Format::Csv) {
        out.csv("sweep.csv", &rows)?;
    }
    let limit = 20.0 / 9.0 + 0.1;
    out.json(
        "sweep.json",
        &Summary {
            schema_version: SCHEMA_VERSION,
            lambda: rep.lambda,
            kappa: rep.kappa,
            delta: rep.delta,
            z_sweep: &cfg.z_sweep,
            remainder_fit: rep.remainder_fit,
            remainder_exponent_limit: limit,
            k_upper: rep.k_upper,
            k_hole: rep.k_hole,
            upper_inversions: rep.upper_inversions,
            lower_inversions: rep.lower_inversions,
            exponent_ok: rep.exponent_ok,
            trends_ok: rep.trends_ok,
            lower_is_surrogate: true,
            reports: &rep.reports,
        },
    )?;
    if cfg.wants(Format::Svg) {
        out.svg(
            "remainder.svg",
            &Chart {
                title: format!("Sandwich ratios, lambda = {}", cfg.lambda),
                x_label: "Z".into(),
                y_label: "ratio / Z^(7/3)".into(),
                log_x: true,
                log_y: true,
                series: vec![
                    Series {
                        name: "(e_upper - e_tf)".into(),
                        points: rows.iter().map(|r| (r.z, r.upper_ratio)).collect(),
                    },
                    Series {
                        name: "(e_tf - e_lower)".into(),
                        points: rows.iter().map(|r| (r.z, r.lower_ratio)).collect(),
                    },
                ],
            },
        )?;
        out.svg("corrections.svg", &corrections_chart(&rows.iter().map(|r| (r.z, r.phi2_term, r.phi1_deficit, r.hartree_lift)).collect::<Vec<_>>()))?;
    }
    if let Some(z) = cfg.delta_scan_z {
        let scan = delta_scan(z, cfg.lambda, cfg.kappa, &cfg.delta_grid, &opts)?;
        out.json("delta_scan.json", &scan)?;
    }
    out.manifest("sweep", cfg)?;
    println!(
        "remainder exponent {:.4} (limit {:.4}), inversions upper {} lower {}, outputs in {}",
        rep.remainder_fit.slope,
        limit,
        rep.upper_inversions,
        rep.lower_inversions,
        cfg.output.display()
    );
    if rep.exponent_ok && rep.trends_ok {
        Ok(())
    } else {
        Err(AssertionFailure(format!(
            "sweep checks failed: exponent_ok = {}, trends_ok = {}",
            rep.exponent_ok, rep.trends_ok
        ))
        .into())
    }
}

fn corrections_chart(rows: &[(f64, f64, f64, f64)]) -> Chart {
    let s = |name: &str, f: fn(&(f64, f64, f64, f64)) -> f64| Series {
        name: name.into(),
        points: rows.iter().map(|r| (r.0, f(r) / r.0.powf(7.0 / 3.0))).collect(),
    };
    Chart {
        title: "Correction bounds".into(),
        x_label: "Z".into(),
        y_label: "bound / Z^(7/3)".into(),
        log_x: true,
        log_y: true,
        series: vec![
            s("phi2", |r| r.1),
            s("phi1 deficit", |r| r.2),
            s("Hartree lift", |r| r.3),
        ],
    }
}

fn cmd_hole(cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        density: &'static str,
        x: f64,
        radius: f64,
        potential: f64,
        a1: f64,
        a2: f64,
    }
    #[derive(Serialize)]
    struct Entry {
        z: f64,
        sup_l_rho: f64,
        sup_l_rho_delta: f64,
        k_rho: f64,
        k_rho_delta: f64,
        max_a2_over_z: f64,
        at_boundary: bool,
        center_potential_rho: f64,
        center_potential_rho_delta: f64,
    }
    #[derive(Serialize)]
    struct Summary {
        schema_version: u32,
        lambda: f64,
        entries: Vec<Entry>,
        /// Largest sup L / Z over the sweep for either density.
        k_bound: f64,
    }
    cfg.require_sweep()?;
    let universal = solve_universal_with(cfg.lambda.min(1.0), &cfg.tf)?;
    let mut out = OutputDir::create(&cfg.output)?;
    let mut entries = Vec::new();
    for &z in &cfg.z_sweep {
        let sys = system(cfg, z)?;
        let atom = build_atom(&sys, &universal)?;
        let grid = scan_grid(z, cfg.hole_points);
        let plain = sup_norm_scan(&atom.rho, &grid, z)?;
        let smooth = sup_norm_scan(&mollify(&atom.rho, sys.r)?, &grid, z)?;
        if cfg.wants(Format::Csv) {
            let rows = |name: &'static str, s: &HoleScan| {
                s.points
                    .iter()
                    .map(move |p| Row {
                        density: name,
                        x: p.x,
                        radius: p.radius,
                        potential: p.potential,
                        a1: p.a1,
                        a2: p.a2,
                    })
                    .collect::<Vec<_>>()
            };
            let mut all = rows("rho", &plain);
            all.extend(rows("rho_delta", &smooth));
            out.csv(&format!("hole_Z{z}.csv"), &all)?;
        }
        let sup = |s: &HoleScan| s.sup_l.max(s.center_potential);
        let max_a2 = plain
            .points
            .iter()
            .chain(&smooth.points)
            .map(|p| p.a2)
            .fold(0.0, f64::max);
        entries.push(Entry {
            z,
            sup_l_rho: sup(&plain),
            sup_l_rho_delta: sup(&smooth),
            k_rho: sup(&plain) / z,
            k_rho_delta: sup(&smooth) / z,
            max_a2_over_z: max_a2 / z,
            at_boundary: plain.at_boundary || smooth.at_boundary,
            center_potential_rho: plain.center_potential,
            center_potential_rho_delta: smooth.center_potential,
        });
    }
    let k_bound = entries
        .iter()
        .map(|e| e.k_rho.max(e.k_rho_delta))
        .fold(0.0, f64::max);
    out.json(
        "hole.json",
        &Summary {
            schema_version: SCHEMA_VERSION,
            lambda: cfg.lambda,
            entries,
            k_bound,
        },
    )?;
    out.manifest("hole", cfg)?;
    println!("sup L / Z <= {k_bound:.4} over the sweep, outputs in {}", cfg.output.display());
    Ok(())
}

fn cmd_corrections(cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        z: f64,
        phi2_term: f64,
        phi1_deficit: f64,
        hartree_lift: f64,
        phi2_ratio: f64,
        deficit_ratio: f64,
        lift_ratio: f64,
        flat_spread: f64,
    }
    #[derive(Serialize)]
    struct Fit {
        name: &'static str,
        slope: f64,
        limit: f64,
        slope_ok: bool,
        ratio_decreasing: bool,
    }
    #[derive(Serialize)]
    struct Summary {
        schema_version: u32,
        lambda: f64,
        kappa: f64,
        delta: f64,
        fits: Vec<Fit>,
    }
    cfg.require_sweep()?;
    let universal = solve_universal_with(cfg.lambda.min(1.0), &cfg.tf)?;
    let mut rows = Vec::new();
    for &z in &cfg.z_sweep {
        let sys = system(cfg, z)?;
        let spec = TrialSpec::new(build_atom(&sys, &universal)?, &cfg.trial_options())?;
        let rep = correction_report(&spec, &cfg.corrections)?;
        let s = z.powf(7.0 / 3.0);
        rows.push(Row {
            z,
            phi2_term: rep.phi2_term,
            phi1_deficit: rep.phi1_deficit,
            hartree_lift: rep.hartree_lift,
            phi2_ratio: rep.phi2_term / s,
            deficit_ratio: rep.phi1_deficit / s,
            lift_ratio: rep.hartree_lift / s,
            flat_spread: rep.flat_spread,
        });
    }
    let fit = |name: &'static str, limit: f64, get: fn(&Row) -> (f64, f64)| -> Result<Fit> {
        let recs: Vec<(f64, f64)> = rows.iter().map(|r| (r.z, get(r).0)).collect();
        let slope = fit_exponent(&recs)?.slope;
        let ratios: Vec<f64> = rows.iter().map(|r| get(r).1).collect();
        Ok(Fit {
            name,
            slope,
            limit,
            slope_ok: slope <= limit,
            ratio_decreasing: ratios.windows(2).all(|w| w[1] < w[0]),
        })
    };
    let d = cfg.delta;
    let fits = vec![
        fit("phi2_term", 4.0 / 3.0 + d + 0.1, |r| (r.phi2_term, r.phi2_ratio))?,
        fit("phi1_deficit", 5.0 / 3.0 + d + 0.1, |r| (r.phi1_deficit, r.deficit_ratio))?,
        fit("hartree_lift", 5.0 / 3.0 + d + 0.1, |r| (r.hartree_lift, r.lift_ratio))?,
    ];
    let mut out = OutputDir::create(&cfg.output)?;
    if cfg.wants(Format::Csv) {
        out.csv("corrections.csv", &rows)?;
    }
    if cfg.wants(Format::Svg) {
        out.svg(
            "corrections.svg",
            &corrections_chart(
                &rows
                    .iter()
                    .map(|r| (r.z, r.phi2_term, r.phi1_deficit, r.hartree_lift))
                    .collect::<Vec<_>>(),
            ),
        )?;
    }
    for f in &fits {
        println!(
            "{:<14} slope {:.4} (limit {:.4}) ratio decreasing {}",
            f.name, f.slope, f.limit, f.ratio_decreasing
        );
    }
    let ok = fits.iter().all(|f| f.slope_ok && f.ratio_decreasing);
    out.json(
        "corrections.json",
        &Summary {
            schema_version: SCHEMA_VERSION,
            lambda: cfg.lambda,
            kappa: cfg.kappa,
            delta: cfg.delta,
            fits,
        },
    )?;
    out.manifest("corrections", cfg)?;
    if ok {
        Ok(())
    } else {
        Err(AssertionFailure("correction exponents or trends out of bounds".into()).into())
    }
}
