//! Two-group likelihood-ratio setting: statistics `g1(T)/g0(T)` and the
//! null upper tail of that ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pvalues::gaussian_upper_tail;

pub fn gaussian_density(u: f64, mean: f64) -> f64 {
    let z = u - mean;
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `g1(t)/g0(t)` for `g0 = N(0,1)`, `g1 = N(mu,1)`, i.e. `exp(mu t - mu^2/2)`.
///
/// Computed in log space; a ratio that overflows is reported as `f64::MAX`,
/// which still orders above every finite statistic.
pub fn gaussian_likelihood_ratio(t: f64, mu: f64) -> f64 {
    let log_ratio = mu * t - 0.5 * mu * mu;
    if log_ratio >= f64::MAX.ln() {
        f64::MAX
    } else {
        log_ratio.exp()
    }
}

/// Closed form of `P_{T~N(0,1)}(g1(T) > t g0(T))` for the Gaussian shift pair.
pub fn gaussian_lr_tail(t: f64, mu: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t == f64::INFINITY {
        return 0.0;
    }
    if mu == 0.0 {
        return if t < 1.0 { 1.0 } else { 0.0 };
    }
    let cut = (t.ln() + 0.5 * mu * mu) / mu;
    if mu > 0.0 {
        gaussian_upper_tail(cut)
    } else {
        gaussian_upper_tail(-cut)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Uniform scan resolution used to bracket the boundaries of `{g1 > t g0}`.
    pub scan_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_depth: 48,
            scan_points: 4096,
        }
    }
}

/// Densities of the two-group model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DensityPair {
    GaussianShift {
        mu: f64,
    },
    /// Densities tabulated on a common increasing grid, linear in between and
    /// zero outside.
    Tabulated {
        grid: Vec<f64>,
        g0: Vec<f64>,
        g1: Vec<f64>,
    },
}

fn interp(grid: &[f64], values: &[f64], u: f64) -> f64 {
    if u < grid[0] || u > grid[grid.len() - 1] {
        return 0.0;
    }
    let upper = grid.partition_point(|&g| g < u);
    if upper == 0 {
        return values[0];
    }
    let w = (u - grid[upper - 1]) / (grid[upper] - grid[upper - 1]);
    values[upper - 1] + w * (values[upper] - values[upper - 1])
}

impl DensityPair {
    pub fn validate(&self) -> Result<()> {
        if let DensityPair::Tabulated { grid, g0, g1 } = self {
            if grid.len() < 2 || g0.len() != grid.len() || g1.len() != grid.len() {
                return Err(Error::param("grid", grid.len(), "tabulated densities need matching lengths >= 2"));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::param("grid", "", "grid must be strictly increasing"));
            }
            if g0.iter().chain(g1).any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::param("density", "", "densities must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn g0(&self, u: f64) -> f64 {
        match self {
            DensityPair::GaussianShift { .. } => gaussian_density(u, 0.0),
            DensityPair::Tabulated { grid, g0, .. } => interp(grid, g0, u),
        }
    }

    pub fn g1(&self, u: f64) -> f64 {
        match self {
            DensityPair::GaussianShift { mu } => gaussian_density(u, *mu),
            DensityPair::Tabulated { grid, g1, .. } => interp(grid, g1, u),
        }
    }
}

/// `F0bar(t) = ∫ 1{g1(u) > t g0(u)} g0(u) du` for `t >= 0`.
///
/// The Gaussian shift pair uses its monotone closed form; tabulated pairs go
/// through [`lr_tail_quadrature`] on their grid.
pub fn lrt_oracle_tail(t: f64, pair: &DensityPair) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param("t", t, "likelihood-ratio threshold must be >= 0"));
    }
    pair.validate()?;
    match pair {
        DensityPair::GaussianShift { mu } => Ok(gaussian_lr_tail(t, *mu)),
        DensityPair::Tabulated { grid, .. } => {
            let support = (grid[0], grid[grid.len() - 1]);
            lr_tail_quadrature(
                t,
                &|u| pair.g0(u),
                &|u| pair.g1(u),
                support,
                QuadratureOptions::default(),
            )
        }
    }
}

/// Quadrature for `∫_support 1{g1 > t g0} g0`.
///
/// The indicator is discontinuous, so the sign changes of `g1 - t g0` are
/// bracketed on a uniform scan and refined by bisection first; `g0` is then
/// integrated by adaptive Simpson over each region where the indicator is on.
pub fn lr_tail_quadrature(
    t: f64,
    g0: &dyn Fn(f64) -> f64,
    g1: &dyn Fn(f64) -> f64,
    support: (f64, f64),
    opts: QuadratureOptions,
) -> Result<f64> {
    let (lo, hi) = support;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("support", format!("({lo}, {hi})"), "need a finite nonempty interval"));
    }
    let inside = |u: f64| g1(u) > t * g0(u);
    let steps = opts.scan_points.max(2);
    let h = (hi - lo) / steps as f64;

    let mut regions: Vec<(f64, f64)> = Vec::new();
    let mut start = if inside(lo) { Some(lo) } else { None };
    let mut prev = lo;
    for s in 1..=steps {
        let u = if s == steps { hi } else { lo + s as f64 * h };
        let now = inside(u);
        if now != start.is_some() {
            let edge = bisect_edge(&inside, prev, u, !now);
            match start.take() {
                Some(a) => regions.push((a, edge)),
                None => start = Some(edge),
            }
        }
        prev = u;
    }
    if let Some(a) = start {
        regions.push((a, hi));
    }

    let mut total = 0.0;
    let tol = opts.abs_tol / regions.len().max(1) as f64;
    for (a, b) in regions {
        total += adaptive_simpson(g0, a, b, tol, opts.max_depth)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Boundary between `a` (where `inside == state_a`) and `b`.
fn bisect_edge(inside: &dyn Fn(f64) -> bool, mut a: f64, mut b: f64, state_a: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if inside(mid) == state_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, (f64, f64, f64)> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err((a, b, delta.abs()));
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
    }
    if b <= a {
        return Ok(0.0);
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth).map_err(|(x0, x1, err)| {
        Error::Numerical(format!(
            "adaptive Simpson did not converge on [{x0}, {x1}] (local error {err:e}, tolerance {tol:e})"
        ))
    })
}
