use num_integer::Integer;
use num_rational::Rational64;

use super::{ss_bh, RejectionSet, SsBhDiagnostics};
use crate::error::{Error, Result};
use crate::pvalues::{NullTrainingSample, TestStatistics};
use crate::scalar::Scalar;

/// Source of i.i.d. draws from the null distribution.
pub trait NullSampler<S> {
    fn sample(&mut self, n: usize) -> Result<Vec<S>>;

    /// Seed of the underlying generator, when there is one to record.
    fn seed(&self) -> Option<u64> {
        None
    }
}

impl<S, F> NullSampler<S> for F
where
    F: FnMut(usize) -> Result<Vec<S>>,
{
    fn sample(&mut self, n: usize) -> Result<Vec<S>> {
        self(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlackboxOutcome {
    pub rejections: RejectionSet,
    pub diagnostics: SsBhDiagnostics,
    pub n_used: usize,
    pub seed: Option<u64>,
}

fn reduced_level(alpha_num: u64, alpha_den: u64) -> Result<(u64, u64)> {
    if alpha_num == 0 || alpha_den == 0 || alpha_num >= alpha_den {
        return Err(Error::param(
            "alpha",
            format!("{alpha_num}/{alpha_den}"),
            "level must be a fraction in (0, 1)",
        ));
    }
    let g = alpha_num.gcd(&alpha_den);
    Ok((alpha_num / g, alpha_den / g))
}

/// Smallest `n >= 1` such that `(n + 1) * alpha / m` is an integer, for
/// `alpha = alpha_num / alpha_den`.
///
/// With `alpha = a/b` reduced, `(n+1) a / (b m)` is an integer iff
/// `b m / gcd(a, b m)` divides `n + 1`.
pub fn blackbox_n(alpha_num: u64, alpha_den: u64, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::EmptyTestSample);
    }
    let (a, b) = reduced_level(alpha_num, alpha_den)?;
    let bm = b as u128 * m as u128;
    let step = bm / (a as u128).gcd(&bm);
    // b >= 2, so step >= 2 and n = step - 1 >= 1
    usize::try_from(step - 1)
        .map_err(|_| Error::Numerical(format!("required null sample size {step} overflows")))
}

/// Draws the minimal exact-level null sample and runs semi-supervised BH with
/// the level held as an exact rational.
pub fn blackbox_bh<S: Scalar>(
    x: &TestStatistics<S>,
    alpha_num: u64,
    alpha_den: u64,
    sampler: &mut impl NullSampler<S>,
) -> Result<BlackboxOutcome> {
    let (a, b) = reduced_level(alpha_num, alpha_den)?;
    let n = blackbox_n(a, b, x.len())?;
    let draws = sampler.sample(n)?;
    if draws.len() != n {
        return Err(Error::Sampler(format!("asked for {n} draws, got {}", draws.len())));
    }
    let y = NullTrainingSample::new(draws)?;
    let level = Rational64::new(a as i64, b as i64);
    let (rejections, diagnostics) = ss_bh(x, &y, level)?;
    Ok(BlackboxOutcome {
        rejections,
        diagnostics,
        n_used: n,
        seed: sampler.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: u64, b: u64, m: usize) -> usize {
        (1..).find(|&n: &usize| ((n as u64 + 1) * a).is_multiple_of(b * m as u64)).unwrap()
    }

    #[test]
    fn hand_examples() {
        assert_eq!(blackbox_n(1, 2, 2).unwrap(), 3);
        assert_eq!(blackbox_n(1, 5, 3).unwrap(), 14);
        assert_eq!(blackbox_n(1, 2, 1).unwrap(), 1);
        // non-reduced input is normalized
        assert_eq!(blackbox_n(2, 4, 2).unwrap(), 3);
        assert!(blackbox_n(3, 2, 2).is_err());
        assert!(blackbox_n(0, 2, 2).is_err());
    }

    #[test]
    fn agrees_with_scan() {
        for a in 1..12u64 {
            for b in (a + 1)..15 {
                for m in 1..9 {
                    assert_eq!(blackbox_n(a, b, m).unwrap(), brute(a, b, m), "{a}/{b} m={m}");
                }
            }
        }
    }

    #[test]
    fn draws_the_exact_sample_size() {
        let x = TestStatistics::new(vec![10.0, -10.0]).unwrap();
        let mut calls = Vec::new();
        let mut sampler = |n: usize| {
            calls.push(n);
            Ok((0..n).map(|i| i as f64 / 10.0).collect())
        };
        let out = blackbox_bh(&x, 1, 2, &mut sampler).unwrap();
        assert_eq!(out.n_used, 3);
        assert_eq!(calls, vec![3]);
        assert_eq!(out.rejections.indices, vec![0]);
    }

    #[test]
    fn short_sampler_output_is_an_error() {
        let x = TestStatistics::new(vec![1.0]).unwrap();
        let mut sampler = |_n: usize| Ok(vec![0.0]);
        assert!(matches!(blackbox_bh(&x, 1, 5, &mut sampler), Err(Error::Sampler(_))));
    }
}
