//! Oracle local-fdr comparator for the two-group model.
//!
//! Rejects the largest prefix of the ascending local-fdr values whose running
//! mean stays at or below `alpha`. Used as a comparator only.

use std::cmp::Ordering;

use super::RejectionSet;
use crate::error::{Error, Result};

/// `pi0 g0(t) / (pi0 g0(t) + (1 - pi0) g1(t))` for every statistic.
pub fn local_fdr(
    t: &[f64],
    g0: impl Fn(f64) -> f64,
    g1: impl Fn(f64) -> f64,
    pi0: f64,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::param("pi0", pi0, "null proportion must lie in [0, 1]"));
    }
    t.iter()
        .enumerate()
        .map(|(index, &ti)| {
            let null = pi0 * g0(ti);
            let total = null + (1.0 - pi0) * g1(ti);
            if !(total > 0.0) {
                Err(Error::UndefinedLfdr { index })
            } else {
                Ok(null / total)
            }
        })
        .collect()
}

pub fn locfdr_oracle(
    t: &[f64],
    g0: impl Fn(f64) -> f64,
    g1: impl Fn(f64) -> f64,
    pi0: f64,
    alpha: f64,
) -> Result<RejectionSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", alpha, "level must lie in (0, 1)"));
    }
    let lfdr = local_fdr(t, g0, g1, pi0)?;
    let mut order: Vec<usize> = (0..lfdr.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        lfdr[a]
            .partial_cmp(&lfdr[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut sum = 0.0;
    let mut keep = 0;
    for (k, &i) in order.iter().enumerate() {
        sum += lfdr[i];
        if sum <= alpha * (k + 1) as f64 {
            keep = k + 1;
        }
    }
    let mut indices = order[..keep].to_vec();
    indices.sort_unstable();
    let threshold_p = order[..keep].last().map_or(0.0, |&i| lfdr[i]);
    Ok(RejectionSet {
        indices,
        threshold_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrt::gaussian_density;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn g0(u: f64) -> f64 {
        gaussian_density(u, 0.0)
    }

    fn g1(u: f64) -> f64 {
        gaussian_density(u, 3.0)
    }

    #[test]
    fn degenerate_proportions() {
        let t = [0.5, 2.0, 4.0];
        assert!(locfdr_oracle(&t, g0, g1, 1.0, 0.5).unwrap().is_empty());
        assert_eq!(locfdr_oracle(&t, g0, g1, 0.0, 0.5).unwrap().indices, vec![0, 1, 2]);
    }

    #[test]
    fn vanishing_densities_are_an_error() {
        let zero = |_: f64| 0.0;
        assert_eq!(
            locfdr_oracle(&[1.0], zero, zero, 0.5, 0.1).unwrap_err(),
            Error::UndefinedLfdr { index: 0 }
        );
    }

    /// Independent brute force: for every prefix size recompute the mean of
    /// the k smallest local fdr values from scratch.
    fn brute_force(lfdr: &[f64], alpha: f64) -> Vec<usize> {
        let mut best = Vec::new();
        for k in 1..=lfdr.len() {
            let mut idx: Vec<usize> = (0..lfdr.len()).collect();
            idx.sort_by(|&a, &b| lfdr[a].partial_cmp(&lfdr[b]).unwrap().then(a.cmp(&b)));
            let prefix = &idx[..k];
            let mean = prefix.iter().map(|&i| lfdr[i]).sum::<f64>() / k as f64;
            if mean <= alpha {
                best = prefix.to_vec();
            }
        }
        best.sort_unstable();
        best
    }

    #[test]
    fn matches_brute_force_on_two_group_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let t: Vec<f64> = (0..50)
                .map(|i| {
                    let z: f64 = rng.sample(StandardNormal);
                    if i < 45 { z } else { z + 3.0 }
                })
                .collect();
            let lfdr = local_fdr(&t, g0, g1, 0.9).unwrap();
            let got = locfdr_oracle(&t, g0, g1, 0.9, 0.2).unwrap();
            assert_eq!(got.indices, brute_force(&lfdr, 0.2));
        }
    }
}
