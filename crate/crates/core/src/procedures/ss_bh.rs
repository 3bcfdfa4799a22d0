use serde::{Deserialize, Serialize};

use super::{check_level, within_level, RejectionSet};
use crate::error::Result;
use crate::pvalues::{MergedScan, NullTrainingSample, TestStatistics};
use crate::scalar::Scalar;

/// State of the descending merge scan when it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsBhDiagnostics {
    /// Number of rejected test statistics.
    pub k: usize,
    /// Null values ranked at or above the rejection threshold.
    pub v: usize,
    /// `(V+1)/(n+1) * m/K` at each test position visited, bottom-up.
    pub fdp_path: Vec<f64>,
    /// Merged rank at which the scan stopped, `K + V`.
    pub stop_index: usize,
}

impl SsBhDiagnostics {
    /// Estimated FDP at the stopping point, 1 when nothing is rejected.
    pub fn final_fdp(&self) -> f64 {
        if self.k == 0 {
            1.0
        } else {
            *self.fdp_path.last().unwrap_or(&1.0)
        }
    }
}

/// Semi-supervised BH at level `alpha`.
///
/// Both samples are sorted once in decreasing order and merged; tied null
/// values rank above test values. The scan walks up from the smallest test
/// statistic and stops at the first `K` whose estimated FDP
/// `(V+1)/(n+1) * m/K` is at most `alpha`, evaluating only at test positions.
/// The result is the set of BH on the conservative empirical p-values.
pub fn ss_bh<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
    alpha: A,
) -> Result<(RejectionSet, SsBhDiagnostics)> {
    check_level(alpha)?;
    let xv = x.values();
    let (m, n) = (xv.len(), y.len());
    let (x_desc, above) = MergedScan::values_only(xv, y.values());
    let denom = A::from_count(n + 1);
    let m_f = m as f64;

    let mut fdp_path = Vec::new();
    let mut stop = None;
    for k in (1..=m).rev() {
        let v = above[k - 1];
        let p_hat = A::from_count(v + 1) / denom;
        fdp_path.push((v + 1) as f64 / (n + 1) as f64 * m_f / k as f64);
        if within_level(p_hat, k, m, alpha) {
            stop = Some((k, v, p_hat));
            break;
        }
    }

    let Some((k, v, p_hat)) = stop else {
        let v = above.first().copied().unwrap_or(0);
        let diag = SsBhDiagnostics {
            k: 0,
            v,
            fdp_path,
            stop_index: v,
        };
        return Ok((RejectionSet::empty(), diag));
    };

    let cut = x_desc[k - 1];
    let mut indices: Vec<usize> = (0..m).filter(|&i| xv[i] >= cut).collect();
    indices.sort_unstable();
    let rejections = RejectionSet {
        indices,
        threshold_p: p_hat.to_f64_lossy(),
    };
    let diag = SsBhDiagnostics {
        k: rejections.k_hat(),
        v,
        fdp_path,
        stop_index: k + v,
    };
    Ok((rejections, diag))
}
