use rand::Rng;
use rand_distr::StandardNormal;

use super::{ss_bh, RejectionSet, SsBhDiagnostics};
use crate::error::{Error, Result};
use crate::pvalues::{NullTrainingSample, TestStatistics};
use crate::scalar::Scalar;

/// Default cap on the number of generated null coordinates.
pub const DEFAULT_N_MAX: usize = 10_000_000;

const REL_TOL: f64 = 1e-12;

/// Known equicorrelation of the test statistics, `rho` in `[-1/m, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicorrSpec {
    rho: f64,
    m: usize,
}

impl EquicorrSpec {
    pub fn new(rho: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyTestSample);
        }
        if !(rho < 0.0) || !rho.is_finite() {
            return Err(Error::param("rho", rho, "correlation must be negative"));
        }
        if rho * (m as f64) < -1.0 - REL_TOL {
            return Err(Error::RhoTooNegative { rho, m });
        }
        Ok(Self { rho, m })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

fn admissible(rho: f64, len: usize) -> bool {
    len <= 1 || rho * (len - 1) as f64 >= -1.0 - REL_TOL
}

/// Largest `n >= 1` with `rho >= -1/(n + m - 1)`, i.e. `floor(-1/rho - m + 1)`.
pub fn randomized_n(spec: &EquicorrSpec, n_max: usize) -> Result<usize> {
    let m = spec.m;
    let raw = -1.0 / spec.rho - m as f64 + 1.0;
    if raw > n_max as f64 + 1.0 {
        return Err(Error::NullSampleTooLarge {
            requested: if raw >= usize::MAX as f64 { usize::MAX } else { raw as usize },
            cap: n_max,
        });
    }
    let mut n = (raw + 1e-9).floor().max(0.0) as usize;
    while n >= 1 && !admissible(spec.rho, n + m) {
        n -= 1;
    }
    if n < 1 {
        return Err(Error::RhoTooNegative { rho: spec.rho, m });
    }
    if n > n_max {
        return Err(Error::NullSampleTooLarge {
            requested: n,
            cap: n_max,
        });
    }
    Ok(n)
}

/// Extends a `rho`-equicorrelated standard Gaussian vector to `target_len`
/// coordinates with the sequential conditional recursion
///
/// `T_{k+1} = rho/(1+(k-1)rho) * (T_1+...+T_k) + sqrt(1 - k rho^2/(1+(k-1)rho)) * U`.
///
/// The running sum is updated in place, so each new coordinate costs O(1).
pub fn equicorrelated_extend<R: Rng + ?Sized>(
    t: &[f64],
    rho: f64,
    target_len: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if target_len < t.len() {
        return Err(Error::param("target_len", target_len, "must be at least the input length"));
    }
    if !rho.is_finite() || !(-1.0..1.0).contains(&rho) || !admissible(rho, target_len) {
        return Err(Error::InadmissibleCorrelation { rho, len: target_len });
    }
    let mut out = Vec::with_capacity(target_len);
    out.extend_from_slice(t);
    let mut sum: f64 = t.iter().sum();
    for k in t.len()..target_len {
        let kf = k as f64;
        let denom = 1.0 + (kf - 1.0) * rho;
        let var = 1.0 - kf * rho * rho / denom;
        if !(denom > 0.0) || var < -REL_TOL {
            return Err(Error::InadmissibleCorrelation { rho, len: target_len });
        }
        let u: f64 = rng.sample(StandardNormal);
        let next = rho / denom * sum + var.max(0.0).sqrt() * u;
        sum += next;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedOutcome {
    pub rejections: RejectionSet,
    pub diagnostics: SsBhDiagnostics,
    pub n_used: usize,
}

/// BH for equicorrelated Gaussian statistics with known `rho < 0`: generates
/// the largest admissible exchangeable null sample and applies
/// semi-supervised BH.
pub fn randomized_bh<A: Scalar, R: Rng + ?Sized>(
    x: &TestStatistics<f64>,
    spec: &EquicorrSpec,
    alpha: A,
    rng: &mut R,
    n_max: usize,
) -> Result<RandomizedOutcome> {
    if x.len() != spec.m {
        return Err(Error::param("m", x.len(), "test sample length differs from the correlation spec"));
    }
    let n = randomized_n(spec, n_max)?;
    let extended = equicorrelated_extend(x.values(), spec.rho, spec.m + n, rng)?;
    let y = NullTrainingSample::new(extended[spec.m..].to_vec())?;
    let (rejections, diagnostics) = ss_bh(x, &y, alpha)?;
    Ok(RandomizedOutcome {
        rejections,
        diagnostics,
        n_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn null_sample_size() {
        let n = randomized_n(&EquicorrSpec::new(-0.01, 10).unwrap(), DEFAULT_N_MAX).unwrap();
        assert_eq!(n, 91);
        let n = randomized_n(&EquicorrSpec::new(-0.2, 5).unwrap(), DEFAULT_N_MAX).unwrap();
        assert_eq!(n, 1);
        let n = randomized_n(&EquicorrSpec::new(-0.05, 5).unwrap(), DEFAULT_N_MAX).unwrap();
        assert_eq!(n, 16);
        assert!(matches!(
            EquicorrSpec::new(-0.3, 5),
            Err(Error::RhoTooNegative { .. })
        ));
        assert!(matches!(
            randomized_n(&EquicorrSpec::new(-1e-9, 5).unwrap(), 1000),
            Err(Error::NullSampleTooLarge { cap: 1000, .. })
        ));
    }

    #[test]
    fn extension_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = [0.3, -0.2];
        assert_eq!(equicorrelated_extend(&t, -0.1, 2, &mut rng).unwrap(), t.to_vec());
        // rho = 0: new coordinates are the raw normal draws
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let ext = equicorrelated_extend(&t, 0.0, 5, &mut a).unwrap();
        let raw: Vec<f64> = (0..3).map(|_| b.sample(StandardNormal)).collect();
        assert_eq!(&ext[2..], &raw[..]);
        assert!(matches!(
            equicorrelated_extend(&t, -0.5, 4, &mut rng),
            Err(Error::InadmissibleCorrelation { .. })
        ));
        // boundary rho = -1/(len-1) is admissible
        assert!(equicorrelated_extend(&t, -0.25, 5, &mut rng).is_ok());
    }

    #[test]
    fn randomized_bh_uses_the_computed_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = EquicorrSpec::new(-0.01, 4).unwrap();
        let x = TestStatistics::new(vec![8.0, 0.1, -0.3, 0.2]).unwrap();
        let out = randomized_bh(&x, &spec, 0.5, &mut rng, DEFAULT_N_MAX).unwrap();
        assert_eq!(out.n_used, 97);
        assert!(out.rejections.contains(0));
        let wrong = EquicorrSpec::new(-0.01, 3).unwrap();
        assert!(randomized_bh(&x, &wrong, 0.5, &mut rng, DEFAULT_N_MAX).is_err());
    }
}
