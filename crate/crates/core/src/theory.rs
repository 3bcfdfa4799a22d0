//! Closed-form quantities: the FDR sandwich, the boundary constants of the
//! power/impossibility results and the phase classification.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fma_ge, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrBounds {
    pub lower: f64,
    pub upper: f64,
    /// `alpha (n+1) / m` is an integer, in which case both bounds coincide.
    pub exact: bool,
}

/// `m0/(n+1) * floor(alpha (n+1)/m) <= FDR <= alpha m0/m` for semi-supervised
/// BH under exchangeability.
///
/// The integer test runs in the scalar type of `alpha`, so it is exact for
/// rational levels.
pub fn fdr_bounds<A: Scalar>(alpha: A, n: usize, m: usize, m0: usize) -> Result<FdrBounds> {
    if !(alpha > A::zero() && alpha < A::one()) {
        return Err(Error::param("alpha", alpha, "level must lie in (0, 1)"));
    }
    if n == 0 || m == 0 || m0 > m {
        return Err(Error::param("m0", format!("n={n}, m={m}, m0={m0}"), "need n, m >= 1 and m0 <= m"));
    }
    let scaled = alpha * A::from_count(n + 1) / A::from_count(m);
    let exact = scaled.is_integer_value();
    let upper = (alpha * A::from_count(m0) / A::from_count(m)).to_f64_lossy();
    let lower = if exact {
        upper
    } else {
        (A::from_count(m0) * scaled.floor_value() / A::from_count(n + 1)).to_f64_lossy()
    };
    Ok(FdrBounds { lower, upper, exact })
}

fn check_open_unit<T: Float>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v < T::one() {
        Ok(())
    } else {
        Err(Error::param(name, v.to_f64().unwrap_or(f64::NAN), "must lie in (0, 1)"))
    }
}

fn lit<T: Float>(v: f64) -> T {
    T::from(v).expect("float literal")
}

/// Sample-size ratio `n/m` above which semi-supervised BH at `alpha` contains
/// the oracle at `alpha (1 - eta)` with probability at least 3/4:
/// `28 ln 2 (1 + eta) / (alpha eta^2)`.
pub fn gamma_star<T: Float>(alpha: T, eta: T) -> Result<T> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("eta", eta)?;
    Ok(lit::<T>(28.0) * lit::<T>(2.0).ln() * (T::one() + eta) / (alpha * eta * eta))
}

/// Ratio below which no procedure can mimic the oracle:
/// `(1 + (alpha (1 - eta))^{-1/2})^{-3} / 64`, for `alpha < 1/4`.
pub fn gamma_lower_star<T: Float>(alpha: T, eta: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < lit(0.25)) {
        return Err(Error::param("alpha", alpha.to_f64().unwrap_or(f64::NAN), "must lie in (0, 1/4)"));
    }
    check_open_unit("eta", eta)?;
    let base = T::one() + (alpha * (T::one() - eta)).sqrt().recip();
    Ok(base.powi(-3) / lit(64.0))
}

/// Lower bound `1 - (1/2)^{3 gamma/gamma* - 1}` on the containment
/// probability, clipped at 0 where the bound says nothing.
pub fn power_guarantee_prob<T: Float>(gamma: T, alpha: T, eta: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::param("gamma", gamma.to_f64().unwrap_or(f64::NAN), "must be positive"));
    }
    let exponent = lit::<T>(3.0) * gamma / gamma_star(alpha, eta)? - T::one();
    Ok((T::one() - lit::<T>(0.5).powf(exponent)).max(T::zero()))
}

/// Null-sample size `m / (alpha max(1, k))` around which the power of the
/// semi-supervised procedure catches up with the oracle.
pub fn rule_of_thumb_n(m: usize, alpha: f64, k: usize) -> f64 {
    m as f64 / (alpha * k.max(1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseRegion {
    MimicPossibleGeneral,
    MimicImpossibleGeneral,
    MimicPossibleFavorable,
}

impl PhaseRegion {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseRegion::MimicPossibleGeneral => "MimicPossibleGeneral",
            PhaseRegion::MimicImpossibleGeneral => "MimicImpossibleGeneral",
            PhaseRegion::MimicPossibleFavorable => "MimicPossibleFavorable",
        }
    }

    pub fn is_possible(&self) -> bool {
        !matches!(self, PhaseRegion::MimicImpossibleGeneral)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    /// Detectable alternatives assumed; 0 means none.
    pub k: usize,
    pub region: PhaseRegion,
}

/// Classification with unit constants: general boundary `n = m/alpha`,
/// favorable boundary `n = m/(alpha k)`. Boundaries count as possible.
/// There are at most `m` detectable alternatives, so `k` is capped at `m`.
pub fn classify_phase(n: usize, m: usize, alpha: f64, k: usize) -> PhasePoint {
    let (nf, mf) = (n as f64, m as f64);
    let k_eff = k.min(m);
    let region = if fma_ge(alpha, nf, mf) {
        PhaseRegion::MimicPossibleGeneral
    } else if k_eff >= 1 && fma_ge(alpha, nf * k_eff as f64, mf) {
        PhaseRegion::MimicPossibleFavorable
    } else {
        PhaseRegion::MimicImpossibleGeneral
    };
    PhasePoint {
        n,
        m,
        alpha,
        k,
        region,
    }
}

/// One row of a phase table: the classified point plus every boundary line,
/// both the unit-constant ones and the ones carrying the theoretical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub point: PhasePoint,
    pub rule_of_thumb_n: f64,
    /// `m / alpha`
    pub general_boundary_n: f64,
    /// `gamma*(alpha, eta) m / max(1, k)`; absent unless `0 < eta < 1`.
    pub gamma_star_n: Option<f64>,
    /// `gamma_*(alpha, eta) m`; absent when `alpha >= 1/4`.
    pub gamma_lower_n: Option<f64>,
}

/// Cross product of the grids, ordered by `k`, then `m`, then `n`.
pub fn phase_diagram(
    n_grid: &[usize],
    m_grid: &[usize],
    alpha: f64,
    k_values: &[usize],
    eta: f64,
) -> Result<Vec<PhaseRow>> {
    if n_grid.is_empty() || m_grid.is_empty() || k_values.is_empty() {
        return Err(Error::param("grid", "", "phase grids must be nonempty"));
    }
    check_open_unit("alpha", alpha)?;
    let g_star = gamma_star(alpha, eta).ok();
    let g_lower = gamma_lower_star(alpha, eta).ok();
    let mut rows = Vec::with_capacity(n_grid.len() * m_grid.len() * k_values.len());
    for &k in k_values {
        for &m in m_grid {
            for &n in n_grid {
                rows.push(PhaseRow {
                    point: classify_phase(n, m, alpha, k),
                    rule_of_thumb_n: rule_of_thumb_n(m, alpha, k.min(m)),
                    general_boundary_n: m as f64 / alpha,
                    gamma_star_n: g_star.map(|g| g * m as f64 / k.min(m).max(1) as f64),
                    gamma_lower_n: g_lower.map(|g| g * m as f64),
                });
            }
        }
    }
    Ok(rows)
}
