//! Logarithmic radial grids and spherically symmetric functions sampled on
//! them.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{cumulative_uniform, simpson_uniform, GaussLegendre};

/// Nodes r_i = r_min·exp(i·h), i = 0..n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub r_min: f64,
    pub h: f64,
    pub n: usize,
}

impl LogGrid {
    pub fn new(r_min: f64, h: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && h > 0.0 && n >= 4) {
            return invalid(format!(
                "log grid needs r_min > 0, h > 0, n >= 4 (got {r_min}, {h}, {n})"
            ));
        }
        Ok(Self { r_min, h, n })
    }

    pub fn spanning(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > r_min) {
            return invalid("grid end must exceed its start");
        }
        Self::new(r_min, (r_max / r_min).ln() / (n as f64 - 1.0), n)
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_min * (i as f64 * self.h).exp()
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.n - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r(i)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            r_min: self.r_min * factor,
            ..*self
        }
    }

    /// Fractional node position of r.
    pub fn position(&self, r: f64) -> f64 {
        (r / self.r_min).ln() / self.h
    }
}

/// A radial function f(|x|) tabulated on a [`LogGrid`]. Below the grid it is
/// continued as a power law fitted to the first two nodes, above the grid it
/// is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    pub grid: LogGrid,
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: LogGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("radial function has non-finite samples");
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: LogGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: LogGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n],
        }
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.r(i), v))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, v| s * v)
    }

    /// Exponent α of f ∝ r^α fitted to the first two nodes.
    fn head_exponent(&self) -> Option<f64> {
        let (f0, f1) = (self.values[0], self.values[1]);
        if f0 != 0.0 && f1 != 0.0 && f0.signum() == f1.signum() {
            Some((f1 / f0).ln() / self.grid.h)
        } else {
            None
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let g = &self.grid;
        if r <= g.r_min {
            if r <= 0.0 {
                return self.values[0];
            }
            return match self.head_exponent() {
                Some(a) => self.values[0] * (r / g.r_min).powf(a),
                None => self.values[0],
            };
        }
        let x = g.position(r);
        let last = (g.n - 1) as f64;
        if x > last {
            return 0.0;
        }
        // Cubic Lagrange interpolation in log r.
        let i = (x.floor() as usize).clamp(1, g.n - 3) - 1;
        let u = x - i as f64;
        let f = &self.values[i..i + 4];
        let (u0, u1, u2, u3) = (u, u - 1.0, u - 2.0, u - 3.0);
        -f[0] * u1 * u2 * u3 / 6.0 + f[1] * u0 * u2 * u3 / 2.0 - f[2] * u0 * u1 * u3 / 2.0
            + f[3] * u0 * u1 * u2 / 6.0
    }

    /// Index of the last node whose value is nonzero, plus one (capped).
    fn support_end(&self) -> usize {
        match self.values.iter().rposition(|v| *v != 0.0) {
            Some(i) => (i + 1).min(self.grid.n - 1),
            None => 0,
        }
    }

    /// ∫ f(x)·w(|x|) d³x over the grid, with the head below r_min integrated
    /// as a power law.
    pub fn integrate_weighted(&self, w: impl Fn(f64) -> f64) -> f64 {
        let end = self.support_end();
        if end == 0 {
            return 0.0;
        }
        let g: Vec<f64> = (0..=end)
            .map(|i| {
                let r = self.grid.r(i);
                4.0 * PI * r * r * r * self.values[i] * w(r)
            })
            .collect();
        simpson_uniform(&g, self.grid.h) + head(&g, self.grid.h)
    }

    /// ∫ f d³x.
    pub fn integrate(&self) -> f64 {
        self.integrate_weighted(|_| 1.0)
    }

    /// ∫_{|x| ≤ r_cut} f(x)·w(|x|) d³x. The partial cell past the last node
    /// is integrated with Gauss-Legendre on the interpolant.
    pub fn integrate_weighted_within(&self, r_cut: f64, w: impl Fn(f64) -> f64) -> f64 {
        let gr = &self.grid;
        if r_cut >= gr.r_max() {
            return self.integrate_weighted(w);
        }
        let rule = GaussLegendre::new(8);
        let shell = |a: f64, b: f64| {
            rule.integrate(a, b, |r| 4.0 * PI * r * r * self.value(r) * w(r))
        };
        if r_cut <= gr.r(2) {
            return shell(0.0, r_cut.max(0.0));
        }
        let j = gr.position(r_cut).floor() as usize;
        let g: Vec<f64> = (0..=j)
            .map(|i| {
                let r = gr.r(i);
                4.0 * PI * r * r * r * self.values[i] * w(r)
            })
            .collect();
        simpson_uniform(&g, gr.h) + head(&g, gr.h) + shell(gr.r(j), r_cut)
    }

    /// ∫_{|x| ≤ r_cut} f d³x.
    pub fn integrate_within(&self, r_cut: f64) -> f64 {
        self.integrate_weighted_within(r_cut, |_| 1.0)
    }

    /// Electrostatic potential U(r) = Q(r)/r + ∫_r^∞ 4π s f(s) ds of the
    /// charge density f (Newton's shell theorem).
    pub fn newton_potential(&self) -> RadialFunction {
        let gr = &self.grid;
        let inner: Vec<f64> = (0..gr.n)
            .map(|i| {
                let r = gr.r(i);
                4.0 * PI * r * r * r * self.values[i]
            })
            .collect();
        let outer: Vec<f64> = (0..gr.n)
            .map(|i| {
                let r = gr.r(i);
                4.0 * PI * r * r * self.values[i]
            })
            .collect();
        let q0 = head(&inner, gr.h);
        let q = cumulative_uniform(&inner, gr.h);
        let o = cumulative_uniform(&outer, gr.h);
        let o_total = o[gr.n - 1];
        let values = (0..gr.n)
            .map(|i| (q0 + q[i]) / gr.r(i) + (o_total - o[i]))
            .collect();
        RadialFunction {
            grid: *gr,
            values,
        }
    }

    /// D(f, f) = ½∫∫ f(x)f(y)/|x−y|.
    pub fn self_energy(&self) -> f64 {
        let u = self.newton_potential();
        0.5 * self.pair_integral(&u)
    }

    /// ∫ f·g d³x for two functions on the same grid.
    pub fn pair_integral(&self, other: &RadialFunction) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let prod = RadialFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        };
        prod.integrate()
    }

    /// Two-column CSV with a header naming the units.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &str) -> std::io::Result<()> {
        writeln!(out, "{header}")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.17e},{:.17e}", self.grid.r(i), v)?;
        }
        Ok(())
    }
}

/// Integral below the first node of samples g(τ) ∝ e^{ατ}, i.e. g₀/α.
fn head(g: &[f64], h: f64) -> f64 {
    if g.len() < 2 || g[0] == 0.0 || g[1] == 0.0 || g[0].signum() != g[1].signum() {
        return 0.0;
    }
    let a = (g[1] / g[0]).ln() / h;
    if a > 0.05 {
        g[0] / a
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> LogGrid {
        LogGrid::spanning(1e-6, 60.0, 4000).unwrap()
    }

    #[test]
    fn gaussian_integrals() {
        let f = RadialFunction::from_fn(grid(), |r| (-r * r).exp()).unwrap();
        assert_relative_eq!(f.integrate(), PI.powf(1.5), max_relative = 1e-10);
        let u = f.newton_potential();
        for &r in &[0.1, 1.0, 3.0] {
            let exact = PI.powf(1.5) * erf_approx(r) / r;
            assert_relative_eq!(u.value(r), exact, max_relative = 1e-8);
        }
    }

    fn erf_approx(x: f64) -> f64 {
        let n = 20000;
        let h = x / n as f64;
        let v: Vec<f64> = (0..=n).map(|i| (-(i as f64 * h).powi(2)).exp()).collect();
        2.0 / PI.sqrt() * simpson_uniform(&v, h)
    }

    #[test]
    fn interpolation_and_extrapolation() {
        let f = RadialFunction::from_fn(grid(), |r| r.powf(-1.5) * (-r).exp()).unwrap();
        for &r in &[1e-3, 0.5, 7.3] {
            assert_relative_eq!(f.value(r), r.powf(-1.5) * (-r).exp(), max_relative = 1e-7);
        }
        let r = 2e-7;
        assert_relative_eq!(f.value(r), r.powf(-1.5), max_relative = 1e-5);
        assert_eq!(f.value(100.0), 0.0);
    }

    #[test]
    fn compact_support_is_integrated_to_its_edge() {
        let g = LogGrid::spanning(1e-6, 2.0, 3001).unwrap();
        let f = RadialFunction::from_fn(g, |r| if r <= 1.0 { 1.0 - r } else { 0.0 }).unwrap();
        // ∫ 4πr²(1−r) dr over [0,1] = 4π(1/3 − 1/4) = π/3; r = 1 is not a node
        // so only moderate accuracy is expected.
        assert_relative_eq!(f.integrate(), PI / 3.0, max_relative = 1e-4);
    }

    #[test]
    fn partial_integrals() {
        let f = RadialFunction::from_fn(grid(), |r| (-r).exp()).unwrap();
        // ∫_0^a 4πr²e^{-r} dr = 4π(2 − e^{-a}(a² + 2a + 2))
        for &a in &[1e-7f64, 1e-3, 0.37, 2.0, 13.3, 1e3] {
            let exact = if a < 1e-2 {
                4.0 * PI * a.powi(3) * (1.0 / 3.0 - a / 4.0 + a * a / 10.0)
            } else {
                4.0 * PI * (2.0 - (-a).exp() * (a * a + 2.0 * a + 2.0))
            };
            assert_relative_eq!(f.integrate_within(a), exact, max_relative = 1e-7);
        }
    }
}
