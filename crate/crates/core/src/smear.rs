//! Radial convolution with the squared, rescaled coherent profile.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::RadialFunction;
use crate::profile::t_moment;
use crate::quad::{adaptive, Tolerance};

/// (f ∗ g_w²)(r) on the grid of `f`.
///
/// For radial f and h, (f∗h)(r) = (2π/r)∫ s f(s) ∫_{|r−s|}^{r+s} t h(t) dt ds,
/// and for h = g_w² the inner integral is (T((r+s)/w) − T(|r−s|/w))/w.
pub fn convolve_g2(f: &RadialFunction, width: f64) -> Result<RadialFunction> {
    let grid = f.grid;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "smearing width must be positive, got {width}"
        )));
    }
    if width < grid.r_min * (grid.h.exp() - 1.0) * 4.0 {
        return Err(Error::Grid(format!(
            "smearing width {width:e} is below the grid resolution near the origin; \
             lower r_min below {:e}",
            width / 4.0
        )));
    }
    let peak = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = Tolerance {
        abs: 1e-15 * peak * width * width,
        rel: 1e-10,
        max_segments: 400,
    };
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let r = grid.r(i);
        let lo = (r - width).max(0.0);
        let hi = r + width;
        let mut pts = vec![lo];
        if width - r > lo && width - r < hi {
            pts.push(width - r);
        }
        if r > lo {
            pts.push(r);
        }
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        let kernel = |s: f64| {
            let outer = t_moment((r + s) / width);
            let inner = t_moment((r - s).abs() / width);
            s * f.value(s) * (outer - inner)
        };
        let v = adaptive(kernel, &pts, tol)?;
        values.push(2.0 * PI / (r * width) * v);
    }
    RadialFunction::new(grid, values)
}
