//! Rejection procedures.
//!
//! Every procedure returns a [`RejectionSet`] of 0-based indices into the test
//! sample. Step-up comparisons go through one helper, `p * m <= alpha * k`,
//! evaluated in the p-value scalar type, so the merge-scan implementation of
//! the semi-supervised procedure and plain BH on empirical p-values agree
//! bit for bit in any scalar type.

mod baselines;
mod blackbox;
mod locfdr;
mod randomized;
mod ss_bh;

pub use baselines::{by_procedure, harmonic_number, split_bh, split_pvalues};
pub use blackbox::{blackbox_bh, blackbox_n, BlackboxOutcome, NullSampler};
pub use locfdr::{local_fdr, locfdr_oracle};
pub use randomized::{
    equicorrelated_extend, randomized_bh, randomized_n, EquicorrSpec, RandomizedOutcome,
    DEFAULT_N_MAX,
};
pub use ss_bh::{ss_bh, SsBhDiagnostics};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pvalues::PValues;
use crate::scalar::Scalar;

/// Indices (0-based, ascending) of the rejected hypotheses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RejectionSet {
    pub indices: Vec<usize>,
    /// Largest rejected p-value (or score); 0 when nothing is rejected.
    pub threshold_p: f64,
}

impl RejectionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn k_hat(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &RejectionSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }
}

pub(crate) fn check_level<A: Scalar>(alpha: A) -> Result<()> {
    if alpha > A::zero() && alpha < A::one() {
        Ok(())
    } else {
        Err(Error::param("alpha", alpha, "level must lie in (0, 1)"))
    }
}

/// `p <= alpha * k / m`, written without division.
#[inline]
pub(crate) fn within_level<A: Scalar>(p: A, k: usize, m: usize, alpha: A) -> bool {
    p * A::from_count(m) <= alpha * A::from_count(k)
}

/// Benjamini–Hochberg step-up: `k = max{k : p_(k) <= alpha k / m}`, rejecting
/// every `i` with `p_i <= alpha k / m`.
pub fn bh_stepup<A: Scalar>(p: &PValues<A>, alpha: A) -> Result<RejectionSet> {
    check_level(alpha)?;
    let values = &p.values;
    if let Some(i) = values
        .iter()
        .position(|v| !(*v >= A::zero() && *v <= A::one()))
    {
        return Err(Error::param("p", values[i], "p-values must lie in [0, 1]"));
    }
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let k_hat = (1..=m)
        .rev()
        .find(|&k| within_level(values[order[k - 1]], k, m, alpha))
        .unwrap_or(0);
    if k_hat == 0 {
        return Ok(RejectionSet::empty());
    }
    let indices: Vec<usize> = (0..m)
        .filter(|&i| within_level(values[i], k_hat, m, alpha))
        .collect();
    let threshold_p = indices
        .iter()
        .map(|&i| values[i].to_f64_lossy())
        .fold(0.0, f64::max);
    Ok(RejectionSet {
        indices,
        threshold_p,
    })
}
