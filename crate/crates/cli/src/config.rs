use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use reltf::bounds::BoundOptions;
use reltf::coherent::TrialOptions;
use reltf::corrections::CorrectionOptions;
use reltf::model::AtomSystem;
use reltf::tf::TfOptions;
use serde::{Deserialize, Serialize};

use crate::UsageError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub z: f64,
    pub kappa: f64,
    pub delta: f64,
    pub z_sweep: Vec<f64>,
    pub r_tilde_factor: f64,
    pub k_offset: u32,
    pub tf: TfOptions,
    pub corrections: CorrectionOptions,
    pub hole_points: usize,
    /// Trials of the random wave-packet positivity probe.
    pub trials: usize,
    pub seed: u64,
    /// Replaces every identity tolerance in `verify` when set.
    pub tolerance: Option<f64>,
    /// Fixed Z of the optional δ-scan in `sweep`.
    pub delta_scan_z: Option<f64>,
    pub delta_grid: Vec<f64>,
    pub output: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            z: 10.0,
            kappa: 0.5,
            delta: 5.0 / 9.0,
            z_sweep: vec![20.0, 40.0, 80.0, 160.0, 320.0],
            r_tilde_factor: TrialOptions::default().r_tilde_factor,
            k_offset: TrialOptions::default().k_offset,
            tf: TfOptions::default(),
            corrections: CorrectionOptions::default(),
            hole_points: 41,
            trials: 200,
            seed: 7,
            tolerance: None,
            delta_scan_z: None,
            delta_grid: vec![0.40, 0.50, 5.0 / 9.0, 0.60],
            output: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// N/Z.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Nuclear charge.
    #[arg(long = "Z", value_name = "Z")]
    pub z: Option<f64>,
    /// Z/c.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Coherent length exponent, R = Z^-delta.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated charges.
    #[arg(long = "Z-sweep", value_name = "Z,..", value_delimiter = ',')]
    pub z_sweep: Option<Vec<f64>>,
    /// Cutoff radius R~ in units of Z^-1/3.
    #[arg(long)]
    pub r_tilde_factor: Option<f64>,
    /// Offset K of the annulus orbital family.
    #[arg(long = "K", value_name = "K")]
    pub k_offset: Option<u32>,
    /// Relative tolerance of the TF shooting.
    #[arg(long)]
    pub tf_tolerance: Option<f64>,
    /// Nodes of the TF log grid.
    #[arg(long)]
    pub grid_nodes: Option<usize>,
    #[arg(long)]
    pub hole_points: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override every identity tolerance of `verify`.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Run a delta scan at this Z as part of `sweep`.
    #[arg(long = "delta-scan-Z", value_name = "Z")]
    pub delta_scan_z: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub delta_grid: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        set!(lambda, z, kappa, delta, z_sweep, r_tilde_factor, k_offset, hole_points, trials, seed, delta_grid, formats);
        if o.tolerance.is_some() {
            c.tolerance = o.tolerance;
        }
        if o.delta_scan_z.is_some() {
            c.delta_scan_z = o.delta_scan_z;
        }
        if let Some(t) = o.tf_tolerance {
            c.tf.tolerance = t;
        }
        if let Some(n) = o.grid_nodes {
            c.tf.nodes = n;
        }
        if let Some(p) = &o.out {
            c.output = p.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| -> Result<()> { Err(UsageError(m).into()) };
        AtomSystem::new(self.z, self.lambda, self.kappa, self.delta)
            .map_err(|e| UsageError(e.to_string()))?;
        for &z in &self.z_sweep {
            AtomSystem::new(z, self.lambda, self.kappa, self.delta)
                .map_err(|e| UsageError(format!("Z sweep entry {z}: {e}")))?;
        }
        if self.z_sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return usage("Z sweep must be sorted ascending without repeats".into());
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0) {
                return usage(format!("tolerance must be nonnegative, got {t}"));
            }
        }
        if self.trials == 0 {
            return usage("trials must be at least 1".into());
        }
        if self.hole_points < 2 {
            return usage("hole_points must be at least 2".into());
        }
        Ok(())
    }

    /// The sweep checks of `sweep`, `hole` and `corrections`.
    pub fn require_sweep(&self) -> Result<()> {
        let s = &self.z_sweep;
        if s.len() < 4 {
            return Err(UsageError(format!("a sweep needs at least 4 points, got {}", s.len())).into());
        }
        if s[s.len() - 1] < 10.0 * s[0] {
            return Err(UsageError("the Z sweep must span at least one decade".into()).into());
        }
        Ok(())
    }

    pub fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            tf: self.tf,
            trial: self.trial_options(),
            corrections: self.corrections,
            hole_points: self.hole_points,
            ..BoundOptions::default()
        }
    }

    pub fn trial_options(&self) -> TrialOptions {
        TrialOptions {
            r_tilde_factor: self.r_tilde_factor,
            k_offset: self.k_offset,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}
