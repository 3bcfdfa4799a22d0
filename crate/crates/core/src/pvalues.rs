//! Test statistics, null training samples and the three p-value families.
//!
//! All empirical constructions count `#{j : y[j] >= x[i]}`. A null value tied
//! with a test statistic counts against it, which is the conservative
//! direction: ties can only raise an empirical p-value.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn validate<S: Scalar>(values: &[S], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite_value()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// The sample under test, `X_1..X_m`. Larger values are more significant.
#[derive(Debug, Clone, PartialEq)]
pub struct TestStatistics<S>(Vec<S>);

impl<S: Scalar> TestStatistics<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTestSample);
        }
        validate(&values, "test statistics")?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

/// The null training sample `Y_1..Y_n`, draws from the unknown null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTrainingSample<S>(Vec<S>);

impl<S: Scalar> NullTrainingSample<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyNullSample);
        }
        validate(&values, "null training sample")?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueKind {
    Oracle,
    NaiveEmpirical,
    ConservativeEmpirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PValues<A> {
    pub values: Vec<A>,
    pub kind: PValueKind,
    /// Size of the null sample behind the values; 0 for oracle p-values.
    pub n_used: usize,
}

impl<A> PValues<A> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Monotone upper-tail table, linearly interpolated between grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedTail {
    grid: Vec<f64>,
    tail: Vec<f64>,
}

impl TabulatedTail {
    /// `grid` must be strictly increasing and `tail` nonincreasing in `[0, 1]`.
    pub fn new(grid: Vec<f64>, tail: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != tail.len() {
            return Err(Error::InvalidNullModel(
                "tabulated tail needs at least two points and equal lengths".into(),
            ));
        }
        if grid.iter().chain(&tail).any(|v| !v.is_finite()) {
            return Err(Error::InvalidNullModel("non-finite grid or tail value".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidNullModel("grid is not strictly increasing".into()));
        }
        if tail.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidNullModel("tail is not nonincreasing".into()));
        }
        if tail.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidNullModel("tail values must lie in [0, 1]".into()));
        }
        Ok(Self { grid, tail })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfSupport { value: t, lo, hi });
        }
        let upper = self.grid.partition_point(|&g| g < t);
        if upper == 0 {
            return Ok(self.tail[0]);
        }
        let (x0, x1) = (self.grid[upper - 1], self.grid[upper]);
        let (f0, f1) = (self.tail[upper - 1], self.tail[upper]);
        let w = (t - x0) / (x1 - x0);
        Ok(f0 + w * (f1 - f0))
    }
}

/// Known null upper-tail function `t -> P(X >= t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NullModel {
    StandardGaussian,
    Gaussian { mean: f64, sd: f64 },
    Student { df: f64 },
    /// Tail of the likelihood ratio `g1(T)/g0(T)` with `T ~ N(0,1)`,
    /// `g0 = N(0,1)` and `g1 = N(mu,1)`.
    GaussianLikelihoodRatio { mu: f64 },
    Tabulated(TabulatedTail),
}

/// Upper tail of the standard Gaussian.
pub fn gaussian_upper_tail(t: f64) -> f64 {
    0.5 * libm::erfc(t / std::f64::consts::SQRT_2)
}

impl NullModel {
    pub fn upper_tail(&self, t: f64) -> Result<f64> {
        match self {
            NullModel::StandardGaussian => Ok(gaussian_upper_tail(t)),
            NullModel::Gaussian { mean, sd } => {
                if !(*sd > 0.0) {
                    return Err(Error::InvalidNullModel(format!("sd must be positive, got {sd}")));
                }
                Ok(gaussian_upper_tail((t - mean) / sd))
            }
            NullModel::Student { df } => {
                let dist = StudentsT::new(0.0, 1.0, *df)
                    .map_err(|e| Error::InvalidNullModel(e.to_string()))?;
                Ok(dist.sf(t))
            }
            NullModel::GaussianLikelihoodRatio { mu } => Ok(crate::lrt::gaussian_lr_tail(t, *mu)),
            NullModel::Tabulated(table) => table.eval(t),
        }
    }
}

/// Descending merge of the test statistics against the null sample.
///
/// `order[r]` is the index of the `r`-th largest statistic (ties broken by
/// lower index first) and `above[r]` is `#{j : y[j] >= x[order[r]]}`.
#[derive(Debug, Clone)]
pub(crate) struct MergedScan {
    pub order: Vec<usize>,
    pub above: Vec<usize>,
}

fn descending<S: PartialOrd>(a: &S, b: &S) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

/// Walks the descending `x` against the descending `y`, counting null values
/// at or above each test value.
fn count_above<S: PartialOrd + Copy>(x_desc: impl Iterator<Item = S>, y_desc: &[S]) -> Vec<usize> {
    let mut j = 0;
    x_desc
        .map(|v| {
            while j < y_desc.len() && y_desc[j] >= v {
                j += 1;
            }
            j
        })
        .collect()
}

fn sorted_desc<S: PartialOrd + Copy>(v: &[S]) -> Vec<S> {
    let mut out = v.to_vec();
    out.sort_unstable_by(descending);
    out
}

impl MergedScan {
    pub fn new<S: PartialOrd + Copy>(x: &[S], y: &[S]) -> Self {
        // Sorting (value, index) pairs keeps the comparisons on contiguous
        // memory, which matters once the samples no longer fit in cache.
        let mut keyed: Vec<(S, usize)> = x.iter().copied().zip(0..).collect();
        keyed.sort_unstable_by(|a, b| descending(&a.0, &b.0).then(a.1.cmp(&b.1)));
        let above = count_above(keyed.iter().map(|p| p.0), &sorted_desc(y));
        let order = keyed.into_iter().map(|p| p.1).collect();
        Self { order, above }
    }

    /// Only the sorted test values and their counts, without the permutation.
    pub fn values_only<S: PartialOrd + Copy>(x: &[S], y: &[S]) -> (Vec<S>, Vec<usize>) {
        let x_desc = sorted_desc(x);
        let above = count_above(x_desc.iter().copied(), &sorted_desc(y));
        (x_desc, above)
    }

    /// Counts in the original index order of `x`.
    pub fn counts_by_index(&self) -> Vec<usize> {
        let mut counts = vec![0; self.order.len()];
        for (&i, &c) in self.order.iter().zip(&self.above) {
            counts[i] = c;
        }
        counts
    }
}

/// Oracle p-values `F0(x_i)` from a known null model.
pub fn oracle_pvalues(x: &TestStatistics<f64>, f0: &NullModel) -> Result<PValues<f64>> {
    let values = x
        .values()
        .iter()
        .map(|&t| f0.upper_tail(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PValues {
        values,
        kind: PValueKind::Oracle,
        n_used: 0,
    })
}

/// `(1/n) #{j : y[j] >= x[i]}`. Not super-uniform: it is 0 with positive
/// probability under the null.
pub fn naive_empirical_pvalues<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
) -> PValues<A> {
    let n = A::from_count(y.len());
    let values = MergedScan::new(x.values(), y.values())
        .counts_by_index()
        .into_iter()
        .map(|c| A::from_count(c) / n)
        .collect();
    PValues {
        values,
        kind: PValueKind::NaiveEmpirical,
        n_used: y.len(),
    }
}

/// `(1 + #{j : y[j] >= x[i]}) / (n + 1)`, computed with one sort of each
/// sample and a single merge pass.
pub fn conservative_empirical_pvalues<S: Scalar, A: Scalar>(
    x: &TestStatistics<S>,
    y: &NullTrainingSample<S>,
) -> PValues<A> {
    let denom = A::from_count(y.len() + 1);
    let values = MergedScan::new(x.values(), y.values())
        .counts_by_index()
        .into_iter()
        .map(|c| A::from_count(c + 1) / denom)
        .collect();
    PValues {
        values,
        kind: PValueKind::ConservativeEmpirical,
        n_used: y.len(),
    }
}

/// Empirical null upper tail `(1 + #{j : y[j] >= t}) / (n + 1)`.
pub fn empirical_upper_tail<S: Scalar, A: Scalar>(y: &NullTrainingSample<S>, t: S) -> A {
    let count = y.values().iter().filter(|&&v| v >= t).count();
    A::from_count(count + 1) / A::from_count(y.len() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn xs(v: &[f64]) -> TestStatistics<f64> {
        TestStatistics::new(v.to_vec()).unwrap()
    }

    fn ys(v: &[f64]) -> NullTrainingSample<f64> {
        NullTrainingSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_empty_input() {
        assert_eq!(
            TestStatistics::new(vec![1.0, f64::NAN]).unwrap_err(),
            Error::NonFinite {
                what: "test statistics",
                index: 1
            }
        );
        assert!(matches!(
            NullTrainingSample::new(vec![f64::INFINITY]),
            Err(Error::NonFinite { .. })
        ));
        assert_eq!(
            NullTrainingSample::<f64>::new(vec![]).unwrap_err(),
            Error::EmptyNullSample
        );
        assert_eq!(
            TestStatistics::<f64>::new(vec![]).unwrap_err(),
            Error::EmptyTestSample
        );
    }

    #[test]
    fn oracle_gaussian_values() {
        let p = oracle_pvalues(&xs(&[0.0, 1e12, 1.6448536]), &NullModel::StandardGaussian).unwrap();
        assert_eq!(p.kind, PValueKind::Oracle);
        assert_eq!(p.n_used, 0);
        assert!((p.values[0] - 0.5).abs() < 1e-15);
        assert!(p.values[1].abs() < 1e-12);
        // 30-digit reference: 0.5*erfc(1.6448536/sqrt(2)) = 0.05000000277965745...
        assert!((p.values[2] - 0.05).abs() < 1e-6);
        assert!((p.values[2] - 0.050_000_002_779_657_45).abs() < 1e-12);
    }

    #[test]
    fn naive_examples() {
        let y = ys(&[0.1, 0.5, 0.9]);
        let p: PValues<Rational64> = naive_empirical_pvalues(&xs(&[0.4, 2.0, -1.0]), &y);
        assert_eq!(p.values, vec![r(2, 3), r(0, 1), r(1, 1)]);
        assert_eq!(p.kind, PValueKind::NaiveEmpirical);
        assert_eq!(p.n_used, 3);
    }

    #[test]
    fn conservative_examples() {
        let y = ys(&[0.1, 0.5, 0.9]);
        let p: PValues<Rational64> = conservative_empirical_pvalues(&xs(&[0.4, 2.0, -1.0]), &y);
        assert_eq!(p.values, vec![r(3, 4), r(1, 4), r(1, 1)]);
        assert_eq!(p.kind, PValueKind::ConservativeEmpirical);
    }

    #[test]
    fn tied_null_values_count_against_the_statistic() {
        let y = ys(&[1.0, 2.0, 2.0]);
        let p: PValues<Rational64> = conservative_empirical_pvalues(&xs(&[2.0]), &y);
        assert_eq!(p.values, vec![r(3, 4)]);
    }

    #[test]
    fn empirical_tail_examples() {
        let y = ys(&[1.0, 2.0, 3.0]);
        assert_eq!(empirical_upper_tail::<f64, Rational64>(&y, 2.5), r(2, 4));
        assert_eq!(empirical_upper_tail::<f64, Rational64>(&y, -1e300), r(1, 1));
        assert_eq!(empirical_upper_tail::<f64, Rational64>(&y, 1e300), r(1, 4));
    }

    #[test]
    fn tabulated_tail_interpolates_and_refuses_extrapolation() {
        let table = TabulatedTail::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0]).unwrap();
        let model = NullModel::Tabulated(table);
        assert!((model.upper_tail(0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(model.upper_tail(2.0).unwrap(), 0.0);
        assert!(matches!(
            oracle_pvalues(&xs(&[3.0]), &model),
            Err(Error::OutOfSupport { .. })
        ));
        assert!(TabulatedTail::new(vec![0.0, 1.0], vec![0.2, 0.5]).is_err());
        assert!(TabulatedTail::new(vec![1.0, 0.0], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn student_and_shifted_tails() {
        let t = NullModel::Student { df: 3.0 };
        assert!((t.upper_tail(0.0).unwrap() - 0.5).abs() < 1e-12);
        let g = NullModel::Gaussian { mean: 2.0, sd: 1.0 };
        assert!((g.upper_tail(2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    fn sample() -> impl Strategy<Value = (Vec<i32>, Vec<i32>)> {
        (
            prop::collection::vec(-20i32..20, 1..40),
            prop::collection::vec(-20i32..20, 1..40),
        )
    }

    proptest! {
        #[test]
        fn conservative_is_affine_in_naive((x, y) in sample()) {
            let x = xs(&x.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let y = ys(&y.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let n = Rational64::from_integer(y.len() as i64);
            let naive: PValues<Rational64> = naive_empirical_pvalues(&x, &y);
            let cons: PValues<Rational64> = conservative_empirical_pvalues(&x, &y);
            let naive_f: PValues<f64> = naive_empirical_pvalues(&x, &y);
            let cons_f: PValues<f64> = conservative_empirical_pvalues(&x, &y);
            let nf = y.len() as f64;
            for i in 0..x.len() {
                prop_assert_eq!(cons.values[i], (n * naive.values[i] + 1) / (n + 1));
                prop_assert!((cons_f.values[i] - (nf * naive_f.values[i] + 1.0) / (nf + 1.0)).abs() < 1e-12);
                prop_assert!(cons.values[i] >= Rational64::new(1, y.len() as i64 + 1));
                // matches the definition by direct counting
                let count = y.values().iter().filter(|&&v| v >= x.values()[i]).count() as i64;
                prop_assert_eq!(cons.values[i], Rational64::new(count + 1, y.len() as i64 + 1));
            }
        }

        #[test]
        fn all_kinds_are_monotone_in_the_statistic((x, y) in sample()) {
            let x = xs(&x.iter().map(|&v| v as f64 / 4.0).collect::<Vec<_>>());
            let y = ys(&y.iter().map(|&v| v as f64 / 4.0).collect::<Vec<_>>());
            let naive: PValues<f64> = naive_empirical_pvalues(&x, &y);
            let cons: PValues<f64> = conservative_empirical_pvalues(&x, &y);
            let oracle = oracle_pvalues(&x, &NullModel::StandardGaussian).unwrap();
            let v = x.values();
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] <= v[j] {
                        prop_assert!(naive.values[i] >= naive.values[j]);
                        prop_assert!(cons.values[i] >= cons.values[j]);
                        prop_assert!(oracle.values[i] >= oracle.values[j]);
                    }
                }
            }
        }
    }
}
