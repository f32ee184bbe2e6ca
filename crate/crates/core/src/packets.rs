//! Lattice evaluation of (u, γ₁u) for two-component wave packets.
//!
//! On a cubic lattice of spacing Δx the coherent-state overlaps
//! ⟨F_{p,q,τ}, u⟩ for fixed q are the discrete Fourier transform of the
//! windowed packet g_R(·−q)u, so
//!
//!   (u, γ₁u) ≈ Σ_q ΔV Σ_k a_k(q)·ΔV·|DFT_k|²/M³,
//!
//! where a_k(q) is the fraction of momentum bin k inside the occupied ball.
//! With g_R and u discretely normalized the discrete Parseval identity pins the
//! result to [0, 1] for any packet.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

use crate::coherent::TrialSpec;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeOptions {
    /// Lattice points per coherent length R.
    pub points_per_r: usize,
    /// Sub-samples per axis for momentum bins cut by the Fermi sphere.
    pub bin_subsamples: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            points_per_r: 3,
            bin_subsamples: 6,
        }
    }
}

/// Two-spinor packet sampled on the box lo..lo+dims of the lattice.
#[derive(Debug, Clone)]
pub struct WavePacket {
    pub spacing: f64,
    pub lo: [i64; 3],
    pub dims: [usize; 3],
    pub values: Vec<[Complex64; 2]>,
}

impl WavePacket {
    /// Samples `f` on the lattice box whose extent covers the ball of radius
    /// `radius` about `center`, then normalizes Σ ΔV |u|² = 1.
    pub fn sample(
        spacing: f64,
        center: [f64; 3],
        radius: f64,
        f: impl Fn([f64; 3]) -> [Complex64; 2],
    ) -> Result<Self> {
        if !(spacing > 0.0 && radius > 0.0) {
            return invalid("packet spacing and radius must be positive");
        }
        let mut lo = [0i64; 3];
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let l = ((center[a] - radius) / spacing).floor() as i64;
            let h = ((center[a] + radius) / spacing).ceil() as i64;
            lo[a] = l;
            dims[a] = (h - l + 1) as usize;
        }
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let x = [
                        (lo[0] + i as i64) as f64 * spacing,
                        (lo[1] + j as i64) as f64 * spacing,
                        (lo[2] + k as i64) as f64 * spacing,
                    ];
                    values.push(f(x));
                }
            }
        }
        let dv = spacing.powi(3);
        let norm: f64 = values
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr())
            .sum::<f64>()
            * dv;
        if !(norm > 0.0 && norm.is_finite()) {
            return invalid("packet vanishes on the lattice");
        }
        let s = norm.sqrt().recip();
        for v in &mut values {
            v[0] *= s;
            v[1] *= s;
        }
        Ok(Self {
            spacing,
            lo,
            dims,
            values,
        })
    }

    /// u at lattice site n (zero outside the box).
    fn at(&self, n: [i64; 3]) -> [Complex64; 2] {
        let zero = [Complex64::new(0.0, 0.0); 2];
        let mut idx = 0usize;
        for a in 0..3 {
            let d = n[a] - self.lo[a];
            if d < 0 || d as usize >= self.dims[a] {
                return zero;
            }
            idx = idx * self.dims[a] + d as usize;
        }
        self.values[idx]
    }

    /// Coherent state F_{p,q} with spin component `spin`.
    pub fn coherent(spacing: f64, r: f64, q: [f64; 3], p: [f64; 3], spin: usize) -> Result<Self> {
        Self::sample(spacing, q, r, |x| {
            let d = ((x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2) + (x[2] - q[2]).powi(2)).sqrt();
            let g = crate::profile::g_unit(d / r) * r.powf(-1.5);
            let phase = p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
            let mut out = [Complex64::new(0.0, 0.0); 2];
            out[spin.min(1)] = Complex64::from_polar(g, phase);
            out
        })
    }
}

/// Fraction of the cube [c ± h/2]³ inside the ball |p| ≤ radius.
fn ball_fraction(c: [f64; 3], h: f64, radius: f64, sub: usize) -> f64 {
    let mut near = 0.0;
    let mut far = 0.0;
    for &x in &c {
        let lo = x - h / 2.0;
        let hi = x + h / 2.0;
        let n = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
        near += n * n;
        far += lo.abs().max(hi.abs()).powi(2);
    }
    let r2 = radius * radius;
    if far <= r2 {
        return 1.0;
    }
    if near >= r2 {
        return 0.0;
    }
    let step = h / sub as f64;
    let mut inside = 0usize;
    for i in 0..sub {
        let x = c[0] - h / 2.0 + (i as f64 + 0.5) * step;
        for j in 0..sub {
            let y = c[1] - h / 2.0 + (j as f64 + 0.5) * step;
            for k in 0..sub {
                let z = c[2] - h / 2.0 + (k as f64 + 0.5) * step;
                if x * x + y * y + z * z <= r2 {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 / (sub * sub * sub) as f64
}

struct Fft3 {
    m: usize,
    plan: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft3 {
    fn new(m: usize) -> Self {
        let plan = FftPlanner::new().plan_fft_forward(m);
        Self {
            m,
            plan,
            scratch: vec![Complex64::new(0.0, 0.0); m * m * m],
        }
    }

    /// In-place 3D transform of a row-major m³ buffer.
    fn run(&mut self, buf: &mut [Complex64]) {
        let m = self.m;
        // Last axis is contiguous.
        self.plan.process(buf);
        // Middle axis.
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    self.scratch[(i * m + k) * m + j] = buf[(i * m + j) * m + k];
                }
            }
        }
        self.plan.process(&mut self.scratch);
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    buf[(i * m + j) * m + k] = self.scratch[(i * m + k) * m + j];
                }
            }
        }
        // First axis.
        for j in 0..m {
            for k in 0..m {
                for i in 0..m {
                    self.scratch[(j * m + k) * m + i] = buf[(i * m + j) * m + k];
                }
            }
        }
        self.plan.process(&mut self.scratch);
        for j in 0..m {
            for k in 0..m {
                for i in 0..m {
                    buf[(i * m + j) * m + k] = self.scratch[(j * m + k) * m + i];
                }
            }
        }
    }
}

/// Discretely normalized window of g_R on offsets −w..=w per axis.
fn window(spacing: f64, r: f64) -> (i64, Vec<f64>) {
    let w = ((r / spacing) * (1.0 - 1e-12)).floor() as i64;
    let mut vals = Vec::new();
    for i in -w..=w {
        for j in -w..=w {
            for k in -w..=w {
                let d = ((i * i + j * j + k * k) as f64).sqrt() * spacing;
                vals.push(crate::profile::g_unit(d / r));
            }
        }
    }
    let dv = spacing.powi(3);
    let norm = vals.iter().map(|v| v * v).sum::<f64>() * dv;
    let s = norm.sqrt().recip();
    vals.iter_mut().for_each(|v| *v *= s);
    (w, vals)
}

/// (u, γ₁u) on the lattice of `u`. The packet spacing must match
/// R/points_per_r.
pub fn expectation(spec: &TrialSpec, u: &WavePacket, opts: &LatticeOptions) -> Result<f64> {
    let r = spec.profile.r;
    let spacing = r / opts.points_per_r as f64;
    if ((u.spacing - spacing) / spacing).abs() > 1e-12 {
        return invalid(format!(
            "packet spacing {} does not match the lattice spacing {spacing}",
            u.spacing
        ));
    }
    let (w, g) = window(spacing, r);
    let width = (2 * w + 1) as usize;
    let m = width.next_power_of_two();
    let mut fft = Fft3::new(m);
    let dv = spacing.powi(3);
    let dp = 2.0 * PI / (m as f64 * spacing);
    let freq = |k: usize| {
        let f = if k < m / 2 { k as i64 } else { k as i64 - m as i64 };
        f as f64 * dp
    };
    let mut bufs = [
        vec![Complex64::new(0.0, 0.0); m * m * m],
        vec![Complex64::new(0.0, 0.0); m * m * m],
    ];
    let mut total = 0.0;
    for qi in (u.lo[0] - w)..(u.lo[0] + u.dims[0] as i64 + w) {
        for qj in (u.lo[1] - w)..(u.lo[1] + u.dims[1] as i64 + w) {
            for qk in (u.lo[2] - w)..(u.lo[2] + u.dims[2] as i64 + w) {
                for b in &mut bufs {
                    b.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                }
                let mut any = false;
                let mut gi = 0;
                for di in -w..=w {
                    for dj in -w..=w {
                        for dk in -w..=w {
                            let gv = g[gi];
                            gi += 1;
                            let s = u.at([qi + di, qj + dj, qk + dk]);
                            if s[0].norm_sqr() + s[1].norm_sqr() == 0.0 {
                                continue;
                            }
                            any = true;
                            let idx = (((di + w) as usize * m) + (dj + w) as usize) * m
                                + (dk + w) as usize;
                            bufs[0][idx] = s[0] * gv;
                            bufs[1][idx] = s[1] * gv;
                        }
                    }
                }
                if !any {
                    continue;
                }
                let q = [qi as f64 * spacing, qj as f64 * spacing, qk as f64 * spacing];
                let pf = spec.fermi_momentum((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt());
                if pf == 0.0 {
                    continue;
                }
                fft.run(&mut bufs[0]);
                fft.run(&mut bufs[1]);
                let mut acc = 0.0;
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..m {
                            let idx = (a * m + b) * m + c;
                            let power = bufs[0][idx].norm_sqr() + bufs[1][idx].norm_sqr();
                            if power == 0.0 {
                                continue;
                            }
                            let frac = ball_fraction(
                                [freq(a), freq(b), freq(c)],
                                dp,
                                pf,
                                opts.bin_subsamples,
                            );
                            acc += frac * power;
                        }
                    }
                }
                total += dv * dv * acc / (m * m * m) as f64;
            }
        }
    }
    Ok(total)
}

/// Extremes of (u, γ₁u) over random packets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivitySample {
    pub trials: usize,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
}

/// Random normalized packet: one or two Gaussians with random widths,
/// centers, spinor coefficients and a momentum boost, placed at a random
/// distance from the nucleus.
pub fn random_packet(spec: &TrialSpec, rng: &mut ChaCha8Rng, opts: &LatticeOptions) -> Result<WavePacket> {
    let r = spec.profile.r;
    let spacing = r / opts.points_per_r as f64;
    let scale = spec.atom.sys.z.powf(-1.0 / 3.0);
    let dist = scale * 10f64.powf(rng.gen_range(-1.5..0.7));
    let dir = unit_vector(rng);
    let c0 = [dist * dir[0], dist * dir[1], dist * dir[2]];
    let pf = spec.fermi_momentum(dist);
    let boost_len = rng.gen_range(0.0..1.5) * pf.min(0.5 * PI / spacing);
    let bdir = unit_vector(rng);
    let boost = [boost_len * bdir[0], boost_len * bdir[1], boost_len * bdir[2]];
    let parts = rng.gen_range(1..=2);
    let mut comps = Vec::with_capacity(parts);
    for _ in 0..parts {
        let sigma = rng.gen_range(0.3..0.4) * r;
        let off: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.25..0.25) * r);
        let coef: [Complex64; 2] = std::array::from_fn(|_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        comps.push(([c0[0] + off[0], c0[1] + off[1], c0[2] + off[2]], sigma, coef));
    }
    let reach = 0.25 * 3f64.sqrt() * r + 2.5 * 0.4 * r;
    WavePacket::sample(spacing, c0, reach, |x| {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (c, sigma, coef) in &comps {
            let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
            if d2 > (2.5 * sigma).powi(2) {
                continue;
            }
            let env = (-d2 / (2.0 * sigma * sigma)).exp();
            let phase = boost[0] * x[0] + boost[1] * x[1] + boost[2] * x[2];
            let e = Complex64::from_polar(env, phase);
            out[0] += coef[0] * e;
            out[1] += coef[1] * e;
        }
        out
    })
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn positivity_sample(spec: &TrialSpec, trial_count: usize, seed: u64) -> Result<PositivitySample> {
    positivity_sample_with(spec, trial_count, seed, &LatticeOptions::default())
}

pub fn positivity_sample_with(
    spec: &TrialSpec,
    trial_count: usize,
    seed: u64,
    opts: &LatticeOptions,
) -> Result<PositivitySample> {
    if trial_count == 0 {
        return invalid("trial_count must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for _ in 0..trial_count {
        let u = random_packet(spec, &mut rng, opts)?;
        let v = expectation(spec, &u, opts)?;
        min = min.min(v);
        max = max.max(v);
    }
    Ok(PositivitySample {
        trials: trial_count,
        seed,
        min,
        max,
    })
}
