//! Naive baselines: BY-corrected semi-supervised BH and split-sample BH.

use super::{bh_stepup, check_level, ss_bh, RejectionSet};
use crate::error::{Error, Result};
use crate::pvalues::{NullTrainingSample, PValueKind, PValues, TestStatistics};
use crate::scalar::Scalar;

/// `c_m = 1 + 1/2 + ... + 1/m` by direct summation.
pub fn harmonic_number(m: usize) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

/// Semi-supervised BH at the reduced level `alpha / c_m`.
///
/// `c_m` is summed in `f64` and converted to the level scalar, because exact
/// harmonic numbers overflow 64-bit rationals beyond m = 40 or so.
pub fn by_procedure<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
    alpha: A,
) -> Result<RejectionSet> {
    check_level(alpha)?;
    let m = x.len();
    let level = if m == 1 {
        alpha
    } else {
        let c_m = A::from_f64_approx(harmonic_number(m))
            .ok_or_else(|| Error::Numerical(format!("harmonic number of {m} not representable")))?;
        alpha / c_m
    };
    Ok(ss_bh(x, y, level)?.0)
}

/// Conservative p-values where test `i` only sees block `i` of the null
/// sample. Blocks are consecutive, of size `floor(n/m)`; the trailing
/// `n mod m` values are dropped.
pub fn split_pvalues<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
) -> Result<PValues<A>> {
    let (m, n) = (x.len(), y.len());
    let block = n / m;
    if block == 0 {
        return Err(Error::InsufficientNullSample { n, m });
    }
    let denom = A::from_count(block + 1);
    let values = x
        .values()
        .iter()
        .zip(y.values().chunks_exact(block))
        .map(|(&xi, chunk)| {
            let count = chunk.iter().filter(|&&v| v >= xi).count();
            A::from_count(count + 1) / denom
        })
        .collect();
    Ok(PValues {
        values,
        kind: PValueKind::ConservativeEmpirical,
        n_used: block,
    })
}

pub fn split_bh<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
    alpha: A,
) -> Result<RejectionSet> {
    check_level(alpha)?;
    bh_stepup(&split_pvalues::<S, A>(x, y)?, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn xs(v: &[f64]) -> TestStatistics<f64> {
        TestStatistics::new(v.to_vec()).unwrap()
    }

    fn ys(v: &[f64]) -> NullTrainingSample<f64> {
        NullTrainingSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic_number(1), 1.0);
        assert!((harmonic_number(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn by_with_one_test_is_ss_bh() {
        let (x, y) = (xs(&[2.5]), ys(&[0.0, 1.0, 2.0, 3.0]));
        assert_eq!(by_procedure(&x, &y, 0.5).unwrap(), ss_bh(&x, &y, 0.5).unwrap().0);
    }

    #[test]
    fn split_blocks_and_remainder() {
        // n = m: one comparison per test, p in {1/2, 1}
        let p: PValues<Rational64> = split_pvalues(&xs(&[1.0, 1.0, 1.0]), &ys(&[0.0, 2.0, 1.0])).unwrap();
        assert_eq!(
            p.values,
            vec![Rational64::new(1, 2), Rational64::new(1, 1), Rational64::new(1, 1)]
        );
        // n = 2m + 1: blocks of two, last value ignored
        let p: PValues<Rational64> =
            split_pvalues(&xs(&[0.5, 0.5]), &ys(&[0.0, 1.0, 0.0, 0.0, 100.0])).unwrap();
        assert_eq!(p.n_used, 2);
        assert_eq!(p.values, vec![Rational64::new(2, 3), Rational64::new(1, 3)]);
        assert_eq!(
            split_bh(&xs(&[1.0, 2.0]), &ys(&[0.0]), 0.5).unwrap_err(),
            Error::InsufficientNullSample { n: 1, m: 2 }
        );
    }

    #[test]
    fn split_with_one_test_is_ss_bh() {
        let (x, y) = (xs(&[2.5]), ys(&[0.0, 1.0, 2.0, 3.0]));
        assert_eq!(split_bh(&x, &y, 0.5).unwrap().indices, ss_bh(&x, &y, 0.5).unwrap().0.indices);
    }

    proptest! {
        #[test]
        fn by_is_contained_in_ss_bh(
            x in prop::collection::vec(-20i16..40, 1..40),
            y in prop::collection::vec(-20i16..20, 1..80),
            a in 1u32..99,
        ) {
            let x = xs(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let y = ys(&y.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let alpha = a as f64 / 100.0;
            let by = by_procedure(&x, &y, alpha).unwrap();
            prop_assert!(by.is_subset_of(&ss_bh(&x, &y, alpha).unwrap().0));
        }

        #[test]
        fn split_pvalues_are_coarser(
            x in prop::collection::vec(-20i16..40, 1..10),
            extra in prop::collection::vec(-20i16..20, 0..40),
        ) {
            let m = x.len();
            let y: Vec<f64> = (0..m).map(|i| i as f64).chain(extra.iter().map(|&v| v as f64)).collect();
            let x = xs(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let y = ys(&y);
            let block = y.len() / m;
            let p: PValues<Rational64> = split_pvalues(&x, &y).unwrap();
            for v in p.values {
                // granularity 1/(block+1)
                prop_assert!((v * Rational64::from_integer(block as i64 + 1)).is_integer());
            }
        }
    }
}
