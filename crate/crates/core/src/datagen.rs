//! Seeded scenario generators.
//!
//! The alternatives are always the last `m1` test indices. The procedures are
//! equivariant under relabelling, so the placement only fixes the layout of
//! `h0_mask`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lrt::gaussian_likelihood_ratio;
use crate::procedures::NullSampler;
use crate::pvalues::{NullModel, NullTrainingSample, TestStatistics};
use crate::rng::{replicate_rng, ReplicateRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    GaussianIid,
    GaussianNegEquicorr,
    StudentIid,
    LrtTwoGroup,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::GaussianIid => "GaussianIid",
            Family::GaussianNegEquicorr => "GaussianNegEquicorr",
            Family::StudentIid => "StudentIid",
            Family::LrtTwoGroup => "LrtTwoGroup",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GaussianIid" | "gaussian" | "gaussian_iid" => Ok(Family::GaussianIid),
            "GaussianNegEquicorr" | "equicorr" | "gaussian_neg_equicorr" => Ok(Family::GaussianNegEquicorr),
            "StudentIid" | "student" | "student_iid" => Ok(Family::StudentIid),
            "LrtTwoGroup" | "lrt" | "lrt_two_group" => Ok(Family::LrtTwoGroup),
            _ => Err(Error::param("family", s, "unknown scenario family")),
        }
    }
}

fn default_df() -> f64 {
    3.0
}

/// Full generative description of one simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub m: usize,
    pub n: usize,
    pub m1: usize,
    pub family: Family,
    /// Location shift of the alternatives (mean of `g1` for the LRT family).
    pub effect: f64,
    /// Degrees of freedom, Student family only.
    #[serde(default = "default_df")]
    pub df: f64,
    /// Null proportion for the two-group comparator; defaults to `(m - m1)/m`.
    #[serde(default)]
    pub pi0: Option<f64>,
    pub alpha: f64,
    pub seed: u64,
    /// Allows alternatives in the negatively equicorrelated family, shifted
    /// after the exchangeable null construction.
    #[serde(default)]
    pub allow_equicorr_alternatives: bool,
}

impl ScenarioSpec {
    pub fn gaussian(m: usize, n: usize, m1: usize, effect: f64, alpha: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            m1,
            family: Family::GaussianIid,
            effect,
            df: default_df(),
            pi0: None,
            alpha,
            seed,
            allow_equicorr_alternatives: false,
        }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn m0(&self) -> usize {
        self.m - self.m1
    }

    pub fn pi0(&self) -> f64 {
        self.pi0.unwrap_or(self.m0() as f64 / self.m as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::EmptyTestSample);
        }
        if self.m1 > self.m {
            return Err(Error::param("m1", self.m1, "cannot exceed m"));
        }
        if !self.effect.is_finite() {
            return Err(Error::param("effect", self.effect, "must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", self.alpha, "level must lie in (0, 1)"));
        }
        if let Some(p) = self.pi0 {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("pi0", p, "must lie in [0, 1]"));
            }
        }
        match self.family {
            Family::StudentIid if !(self.df > 0.0) => {
                Err(Error::param("df", self.df, "degrees of freedom must be positive"))
            }
            Family::GaussianNegEquicorr if self.n + self.m < 2 => Err(Error::param(
                "n",
                self.n,
                "equicorrelation needs at least two coordinates",
            )),
            Family::GaussianNegEquicorr if self.m1 > 0 && !self.allow_equicorr_alternatives => {
                Err(Error::Unsupported(
                    "alternatives in the negatively equicorrelated family need allow_equicorr_alternatives".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Exact upper tail of the null marginal.
    pub fn null_model(&self) -> NullModel {
        match self.family {
            Family::GaussianIid | Family::GaussianNegEquicorr => NullModel::StandardGaussian,
            Family::StudentIid => NullModel::Student { df: self.df },
            Family::LrtTwoGroup => NullModel::GaussianLikelihoodRatio { mu: self.effect },
        }
    }

    /// Equicorrelation of the Example construction, `-1/(n+m-1)`.
    pub fn equicorrelation(&self) -> f64 {
        -1.0 / (self.n + self.m - 1) as f64
    }

    /// `true` at null indices, `false` at the last `m1`.
    pub fn h0_mask(&self) -> Vec<bool> {
        (0..self.m).map(|i| i < self.m0()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Null training sample; may be empty when the scenario has `n = 0`.
    pub y: Vec<f64>,
    pub x: TestStatistics<f64>,
    pub h0_mask: Vec<bool>,
    /// Raw measurements `T_i` behind likelihood-ratio statistics.
    pub raw: Option<Vec<f64>>,
}

impl Dataset {
    pub fn nts(&self) -> Result<NullTrainingSample<f64>> {
        NullTrainingSample::new(self.y.clone())
    }

    pub fn m1(&self) -> usize {
        self.h0_mask.iter().filter(|&&null| !null).count()
    }
}

fn normals(rng: &mut ReplicateRng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_family(spec: &ScenarioSpec, family: Family) -> Result<()> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::Unsupported(format!(
            "generator for {} called with a {} scenario",
            family.as_str(),
            spec.family.as_str()
        )));
    }
    Ok(())
}

fn shift_alternatives(x: &mut [f64], spec: &ScenarioSpec) {
    for v in &mut x[spec.m0()..] {
        *v += spec.effect;
    }
}

/// Null `N(0,1)`, alternatives `N(effect, 1)`, everything independent.
pub fn gen_gaussian_iid(spec: &ScenarioSpec, replicate: u64) -> Result<Dataset> {
    check_family(spec, Family::GaussianIid)?;
    let mut rng = replicate_rng(spec.seed, replicate);
    let y = normals(&mut rng, spec.n);
    let mut x = normals(&mut rng, spec.m);
    shift_alternatives(&mut x, spec);
    Ok(Dataset {
        y,
        x: TestStatistics::new(x)?,
        h0_mask: spec.h0_mask(),
        raw: None,
    })
}

/// Maximal negative equicorrelation `-1/(n+m-1)` across all `n + m`
/// coordinates: `sqrt(1 + 1/(n+m-1)) (W_i - mean(W))` with `W` i.i.d. normal.
/// The first `n` coordinates form the null sample.
pub fn gen_gaussian_neg_equicorr(spec: &ScenarioSpec, replicate: u64) -> Result<Dataset> {
    check_family(spec, Family::GaussianNegEquicorr)?;
    let mut rng = replicate_rng(spec.seed, replicate);
    let total = spec.n + spec.m;
    let w = normals(&mut rng, total);
    let mean = w.iter().sum::<f64>() / total as f64;
    let scale = (1.0 + 1.0 / (total - 1) as f64).sqrt();
    let mut z: Vec<f64> = w.iter().map(|v| scale * (v - mean)).collect();
    let mut x = z.split_off(spec.n);
    shift_alternatives(&mut x, spec);
    Ok(Dataset {
        y: z,
        x: TestStatistics::new(x)?,
        h0_mask: spec.h0_mask(),
        raw: None,
    })
}

/// Null Student `t(df)`, alternatives shifted by `effect`.
pub fn gen_student_iid(spec: &ScenarioSpec, replicate: u64) -> Result<Dataset> {
    check_family(spec, Family::StudentIid)?;
    let dist = StudentT::new(spec.df).map_err(|_| Error::param("df", spec.df, "invalid degrees of freedom"))?;
    let mut rng = replicate_rng(spec.seed, replicate);
    let y: Vec<f64> = (0..spec.n).map(|_| dist.sample(&mut rng)).collect();
    let mut x: Vec<f64> = (0..spec.m).map(|_| dist.sample(&mut rng)).collect();
    shift_alternatives(&mut x, spec);
    Ok(Dataset {
        y,
        x: TestStatistics::new(x)?,
        h0_mask: spec.h0_mask(),
        raw: None,
    })
}

/// Two-group likelihood-ratio statistics with `g0 = N(0,1)`, `g1 = N(effect,1)`.
///
/// The ratio is formed in log space (see
/// [`gaussian_likelihood_ratio`](crate::lrt::gaussian_likelihood_ratio)), so
/// density underflow never produces an undefined statistic and no draw has to
/// be rejected.
pub fn gen_lrt_two_group(spec: &ScenarioSpec, replicate: u64) -> Result<Dataset> {
    check_family(spec, Family::LrtTwoGroup)?;
    let mu = spec.effect;
    let mut rng = replicate_rng(spec.seed, replicate);
    let y = normals(&mut rng, spec.n)
        .into_iter()
        .map(|t| gaussian_likelihood_ratio(t, mu))
        .collect();
    let mut raw = normals(&mut rng, spec.m);
    shift_alternatives(&mut raw, spec);
    let x = raw.iter().map(|&t| gaussian_likelihood_ratio(t, mu)).collect();
    Ok(Dataset {
        y,
        x: TestStatistics::new(x)?,
        h0_mask: spec.h0_mask(),
        raw: Some(raw),
    })
}

pub fn generate(spec: &ScenarioSpec, replicate: u64) -> Result<Dataset> {
    match spec.family {
        Family::GaussianIid => gen_gaussian_iid(spec, replicate),
        Family::GaussianNegEquicorr => gen_gaussian_neg_equicorr(spec, replicate),
        Family::StudentIid => gen_student_iid(spec, replicate),
        Family::LrtTwoGroup => gen_lrt_two_group(spec, replicate),
    }
}

/// Blackbox null sampler of likelihood ratios: `T ~ N(0,1)`, emit `g1(T)/g0(T)`.
#[derive(Debug, Clone)]
pub struct LrtNullSampler {
    mu: f64,
    seed: u64,
    rng: ReplicateRng,
}

impl LrtNullSampler {
    pub fn new(mu: f64, seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            mu,
            seed,
            rng: ReplicateRng::seed_from_u64(seed),
        }
    }
}

impl NullSampler<f64> for LrtNullSampler {
    fn sample(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(normals(&mut self.rng, n)
            .into_iter()
            .map(|t| gaussian_likelihood_ratio(t, self.mu))
            .collect())
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrt::gaussian_lr_tail;

    #[test]
    fn mask_and_determinism() {
        let spec = ScenarioSpec::gaussian(10, 5, 3, 2.0, 0.5, 7);
        let a = generate(&spec, 4).unwrap();
        let b = generate(&spec, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&spec, 5).unwrap());
        assert_eq!(a.h0_mask.iter().filter(|&&v| !v).count(), 3);
        assert!(a.h0_mask[..7].iter().all(|&v| v));
        assert_eq!(a.y.len(), 5);
    }

    #[test]
    fn two_point_equicorrelation_is_exact_anticorrelation() {
        let spec = ScenarioSpec::gaussian(1, 1, 0, 0.0, 0.5, 3).with_family(Family::GaussianNegEquicorr);
        for r in 0..20 {
            let d = generate(&spec, r).unwrap();
            assert!((d.y[0] + d.x.values()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn equicorrelated_alternatives_need_the_flag() {
        let mut spec = ScenarioSpec::gaussian(4, 3, 1, 1.0, 0.5, 3).with_family(Family::GaussianNegEquicorr);
        assert!(matches!(generate(&spec, 0), Err(Error::Unsupported(_))));
        spec.allow_equicorr_alternatives = true;
        assert!(generate(&spec, 0).is_ok());
    }

    #[test]
    fn lrt_statistics_are_monotone_in_raw_values() {
        let mut spec = ScenarioSpec::gaussian(20, 5, 5, 2.0, 0.2, 11).with_family(Family::LrtTwoGroup);
        let d = generate(&spec, 0).unwrap();
        let raw = d.raw.as_ref().unwrap();
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                if raw[i] < raw[j] {
                    assert!(d.x.values()[i] < d.x.values()[j]);
                }
            }
        }
        spec.effect = 0.0;
        let d = generate(&spec, 0).unwrap();
        assert!(d.x.values().iter().chain(&d.y).all(|&v| v == 1.0));
        // null model of the family is the monotone reduction
        let model = ScenarioSpec::gaussian(2, 1, 0, 2.0, 0.2, 0).with_family(Family::LrtTwoGroup).null_model();
        assert_eq!(model.upper_tail(1.0).unwrap(), gaussian_lr_tail(1.0, 2.0));
    }

    #[test]
    fn spec_json_uses_the_field_names() {
        let spec = ScenarioSpec::gaussian(10, 20, 5, 1.5, 0.5, 99).with_family(Family::StudentIid);
        let json = serde_json::to_value(&spec).unwrap();
        for key in ["m", "n", "m1", "family", "effect", "df", "pi0", "alpha", "seed"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["family"], "StudentIid");
        let back: ScenarioSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
        let minimal: ScenarioSpec = serde_json::from_str(
            r#"{"m":2,"n":3,"m1":0,"family":"GaussianIid","effect":0.0,"alpha":0.5,"seed":1}"#,
        )
        .unwrap();
        assert_eq!(minimal.df, 3.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(generate(&ScenarioSpec::gaussian(3, 3, 4, 1.0, 0.5, 0), 0).is_err());
        let mut s = ScenarioSpec::gaussian(3, 3, 0, 1.0, 0.5, 0).with_family(Family::StudentIid);
        s.df = 0.0;
        assert!(generate(&s, 0).is_err());
        assert!(gen_student_iid(&ScenarioSpec::gaussian(3, 3, 0, 1.0, 0.5, 0), 0).is_err());
    }

    #[test]
    fn blackbox_sampler_is_seeded() {
        let mut a = LrtNullSampler::new(2.0, 5);
        let mut b = LrtNullSampler::new(2.0, 5);
        assert_eq!(a.sample(10).unwrap(), b.sample(10).unwrap());
        assert_eq!(a.seed(), Some(5));
    }
}
