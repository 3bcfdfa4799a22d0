//! FDP/TDP, Monte-Carlo aggregation and the containment, dominance and
//! detectability estimands.

use num_rational::Rational64;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, StudentsT};

use crate::datagen::{generate, Dataset, Family, ScenarioSpec};
use crate::error::{Error, Result};
use crate::lrt::{gaussian_density, gaussian_likelihood_ratio};
use crate::procedures::{
    bh_stepup, blackbox_bh, by_procedure, locfdr_oracle, randomized_bh, split_bh, ss_bh,
    EquicorrSpec, RejectionSet, DEFAULT_N_MAX,
};
use crate::pvalues::{naive_empirical_pvalues, oracle_pvalues, NullTrainingSample};
use crate::rng::stream_rng;

/// False rejections over `max(1, |R|)`.
pub fn fdp(r: &RejectionSet, h0_mask: &[bool]) -> f64 {
    let false_rej = r.indices.iter().filter(|&&i| h0_mask[i]).count();
    false_rej as f64 / r.k_hat().max(1) as f64
}

/// True rejections over `max(1, m1)`.
pub fn tdp(r: &RejectionSet, h0_mask: &[bool]) -> f64 {
    let m1 = h0_mask.iter().filter(|&&null| !null).count();
    let true_rej = r.indices.iter().filter(|&&i| !h0_mask[i]).count();
    true_rej as f64 / m1.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    SsBh,
    OracleBh,
    NaiveBh,
    ByBh,
    SplitBh,
    Locfdr,
    BlackboxBh,
    RandomizedBh,
}

impl Procedure {
    pub const ALL: [Procedure; 8] = [
        Procedure::SsBh,
        Procedure::OracleBh,
        Procedure::NaiveBh,
        Procedure::ByBh,
        Procedure::SplitBh,
        Procedure::Locfdr,
        Procedure::BlackboxBh,
        Procedure::RandomizedBh,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Procedure::SsBh => "ss_bh",
            Procedure::OracleBh => "oracle_bh",
            Procedure::NaiveBh => "naive_bh",
            Procedure::ByBh => "by_bh",
            Procedure::SplitBh => "split_bh",
            Procedure::Locfdr => "locfdr",
            Procedure::BlackboxBh => "blackbox_bh",
            Procedure::RandomizedBh => "randomized_bh",
        }
    }

    /// Whether the procedure reads the null training sample of the dataset.
    pub fn needs_nts(&self) -> bool {
        matches!(
            self,
            Procedure::SsBh | Procedure::NaiveBh | Procedure::ByBh | Procedure::SplitBh
        )
    }
}

impl std::fmt::Display for Procedure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Procedure::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::param("procedure", s, "unknown procedure"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub fdp: f64,
    pub tdp: f64,
    pub rejections: usize,
    /// Oracle BH at level `alpha (1 - eta)` is contained in this rejection set.
    pub contained: bool,
    /// TDP of oracle BH at level `alpha (1 - eta)`.
    pub oracle_tdp: f64,
}

/// One row of the outcome stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub replicate: u64,
    pub procedure: Procedure,
    #[serde(flatten)]
    pub outcome: ReplicateOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub procedure: Procedure,
    pub fdr_hat: f64,
    pub se_fdr: f64,
    pub sd_fdp: f64,
    pub tdr_hat: f64,
    pub se_tdr: f64,
    pub sd_tdp: f64,
    pub reps: usize,
    /// Replicates where the procedure failed and was left out.
    pub failures: usize,
    pub containment: f64,
    pub tdp_dominance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    /// One entry per requested procedure, in request order.
    pub summaries: Vec<MetricsSummary>,
    /// Ordered by replicate, then by request order.
    pub outcomes: Vec<OutcomeRecord>,
}

impl MonteCarloResult {
    pub fn summary(&self, procedure: Procedure) -> Option<&MetricsSummary> {
        self.summaries.iter().find(|s| s.procedure == procedure)
    }

    pub fn outcomes_of(&self, procedure: Procedure) -> Vec<ReplicateOutcome> {
        self.outcomes
            .iter()
            .filter(|o| o.procedure == procedure)
            .map(|o| o.outcome.clone())
            .collect()
    }
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn sd(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    fn se(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sd() / (self.count as f64).sqrt()
        }
    }
}

/// Standard error of a frequency estimated from `reps` Bernoulli draws.
pub fn binomial_se(p: f64, reps: usize) -> f64 {
    if reps == 0 {
        0.0
    } else {
        (p * (1.0 - p) / reps as f64).sqrt()
    }
}

/// The level as an exact rational, so that boundary cases such as
/// `(V+1)/(n+1) * m/K = alpha` compare exactly.
pub fn exact_level(alpha: f64) -> Result<Rational64> {
    let level = Rational64::approximate_float(alpha)
        .ok_or_else(|| Error::param("alpha", alpha, "not representable as a rational"))?;
    if level <= Rational64::from_integer(0) || level >= Rational64::from_integer(1) {
        return Err(Error::param("alpha", alpha, "level must lie in (0, 1)"));
    }
    Ok(level)
}

const BLACKBOX_STREAM: u64 = 1;
const RANDOMIZED_STREAM: u64 = 2;

struct Context<'a> {
    spec: &'a ScenarioSpec,
    alpha: f64,
    level: Rational64,
    oracle_level: f64,
    student: Option<StudentsT>,
}

fn validate_request(spec: &ScenarioSpec, procedures: &[Procedure], eta: f64) -> Result<()> {
    spec.validate()?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::param("eta", eta, "must lie in [0, 1)"));
    }
    for p in procedures {
        if p.needs_nts() && spec.n == 0 {
            return Err(Error::EmptyNullSample);
        }
        match p {
            Procedure::SplitBh if spec.n < spec.m => {
                return Err(Error::InsufficientNullSample { n: spec.n, m: spec.m })
            }
            Procedure::RandomizedBh if spec.family != Family::GaussianNegEquicorr => {
                return Err(Error::Unsupported(
                    "randomized_bh needs the negatively equicorrelated family".into(),
                ))
            }
            Procedure::BlackboxBh if spec.family == Family::GaussianNegEquicorr => {
                return Err(Error::Unsupported(
                    "blackbox_bh draws independent null values; not defined for the equicorrelated family".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

fn oracle_set(ds: &Dataset, spec: &ScenarioSpec, level: f64) -> Result<RejectionSet> {
    if level <= 0.0 {
        return Ok(RejectionSet::empty());
    }
    let p = oracle_pvalues(&ds.x, &spec.null_model())?;
    bh_stepup(&p, level)
}

fn null_draws(spec: &ScenarioSpec, replicate: u64, n: usize) -> Result<Vec<f64>> {
    let mut rng = stream_rng(spec.seed, replicate, BLACKBOX_STREAM);
    Ok(match spec.family {
        Family::GaussianIid | Family::GaussianNegEquicorr => {
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
        Family::StudentIid => {
            let dist = StudentT::new(spec.df).map_err(|e| Error::Sampler(e.to_string()))?;
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
        Family::LrtTwoGroup => (0..n)
            .map(|_| gaussian_likelihood_ratio(StandardNormal.sample(&mut rng), spec.effect))
            .collect(),
    })
}

fn run_procedure(
    proc_: Procedure,
    ds: &Dataset,
    ctx: &Context<'_>,
    replicate: u64,
) -> Result<RejectionSet> {
    let spec = ctx.spec;
    let nts = || NullTrainingSample::new(ds.y.clone());
    match proc_ {
        Procedure::SsBh => Ok(ss_bh(&ds.x, &nts()?, ctx.level)?.0),
        Procedure::OracleBh => oracle_set(ds, spec, ctx.alpha),
        Procedure::NaiveBh => {
            let p = naive_empirical_pvalues::<f64, Rational64>(&ds.x, &nts()?);
            bh_stepup(&p, ctx.level)
        }
        Procedure::ByBh => by_procedure(&ds.x, &nts()?, ctx.alpha),
        Procedure::SplitBh => split_bh(&ds.x, &nts()?, ctx.level),
        Procedure::Locfdr => {
            let pi0 = spec.pi0();
            let mu = spec.effect;
            match (spec.family, &ctx.student) {
                (Family::LrtTwoGroup, _) => {
                    let raw = ds.raw.as_ref().ok_or_else(|| {
                        Error::Numerical("likelihood-ratio dataset without raw values".into())
                    })?;
                    locfdr_oracle(raw, |u| gaussian_density(u, 0.0), |u| gaussian_density(u, mu), pi0, ctx.alpha)
                }
                (Family::StudentIid, Some(t)) => {
                    locfdr_oracle(ds.x.values(), |u| t.pdf(u), |u| t.pdf(u - mu), pi0, ctx.alpha)
                }
                _ => locfdr_oracle(
                    ds.x.values(),
                    |u| gaussian_density(u, 0.0),
                    |u| gaussian_density(u, mu),
                    pi0,
                    ctx.alpha,
                ),
            }
        }
        Procedure::BlackboxBh => {
            let (a, b) = (*ctx.level.numer() as u64, *ctx.level.denom() as u64);
            let mut sampler = |n: usize| null_draws(spec, replicate, n);
            Ok(blackbox_bh(&ds.x, a, b, &mut sampler)?.rejections)
        }
        Procedure::RandomizedBh => {
            let eq = EquicorrSpec::new(spec.equicorrelation(), spec.m)?;
            let mut rng = stream_rng(spec.seed, replicate, RANDOMIZED_STREAM);
            Ok(randomized_bh(&ds.x, &eq, ctx.level, &mut rng, DEFAULT_N_MAX)?.rejections)
        }
    }
}

type ReplicateResult = Vec<Result<ReplicateOutcome>>;

fn run_replicate(ctx: &Context<'_>, procedures: &[Procedure], replicate: u64) -> Result<ReplicateResult> {
    let ds = generate(ctx.spec, replicate)?;
    let oracle = oracle_set(&ds, ctx.spec, ctx.oracle_level)?;
    let oracle_tdp = tdp(&oracle, &ds.h0_mask);
    Ok(procedures
        .iter()
        .map(|&p| {
            let r = run_procedure(p, &ds, ctx, replicate)?;
            Ok(ReplicateOutcome {
                fdp: fdp(&r, &ds.h0_mask),
                tdp: tdp(&r, &ds.h0_mask),
                rejections: r.k_hat(),
                contained: oracle.is_subset_of(&r),
                oracle_tdp,
            })
        })
        .collect())
}

/// Monte-Carlo estimate of FDR and TDR for each procedure.
///
/// Replicates run on the current rayon pool; aggregation is a sequential fold
/// in replicate order, so results do not depend on the thread count. The
/// oracle reference for `contained` and `oracle_tdp` runs at `alpha (1 - eta)`.
/// A procedure failing on a replicate is counted in `failures` and left out of
/// its averages; a data-generation failure aborts the run.
pub fn monte_carlo(
    spec: &ScenarioSpec,
    procedures: &[Procedure],
    reps: usize,
    eta: f64,
) -> Result<MonteCarloResult> {
    if reps == 0 {
        return Err(Error::param("reps", reps, "need at least one replicate"));
    }
    validate_request(spec, procedures, eta)?;
    let student = match spec.family {
        Family::StudentIid => Some(
            StudentsT::new(0.0, 1.0, spec.df).map_err(|_| Error::param("df", spec.df, "invalid degrees of freedom"))?,
        ),
        _ => None,
    };
    let ctx = Context {
        spec,
        alpha: spec.alpha,
        level: exact_level(spec.alpha)?,
        oracle_level: spec.alpha * (1.0 - eta),
        student,
    };

    let per_rep: Vec<Result<ReplicateResult>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| run_replicate(&ctx, procedures, r))
        .collect();

    let mut fdp_acc = vec![Welford::default(); procedures.len()];
    let mut tdp_acc = vec![Welford::default(); procedures.len()];
    let mut contained = vec![0usize; procedures.len()];
    let mut dominated = vec![0usize; procedures.len()];
    let mut failures = vec![0usize; procedures.len()];
    let mut outcomes = Vec::with_capacity(reps * procedures.len());
    for (r, rep) in per_rep.into_iter().enumerate() {
        for (j, res) in rep?.into_iter().enumerate() {
            match res {
                Ok(o) => {
                    fdp_acc[j].push(o.fdp);
                    tdp_acc[j].push(o.tdp);
                    contained[j] += o.contained as usize;
                    dominated[j] += (o.oracle_tdp > o.tdp) as usize;
                    outcomes.push(OutcomeRecord {
                        replicate: r as u64,
                        procedure: procedures[j],
                        outcome: o,
                    });
                }
                Err(e) => {
                    log::debug!("replicate {r}: {} failed: {e}", procedures[j]);
                    failures[j] += 1;
                }
            }
        }
    }
    for (j, &f) in failures.iter().enumerate() {
        if f > 0 {
            log::warn!("{}: {f} of {reps} replicates failed and were excluded", procedures[j]);
        }
    }

    let summaries = procedures
        .iter()
        .enumerate()
        .map(|(j, &procedure)| {
            let done = fdp_acc[j].count;
            let freq = |c: usize| if done == 0 { 0.0 } else { c as f64 / done as f64 };
            MetricsSummary {
                procedure,
                fdr_hat: fdp_acc[j].mean,
                se_fdr: fdp_acc[j].se(),
                sd_fdp: fdp_acc[j].sd(),
                tdr_hat: tdp_acc[j].mean,
                se_tdr: tdp_acc[j].se(),
                sd_tdp: tdp_acc[j].sd(),
                reps: done,
                failures: failures[j],
                containment: freq(contained[j]),
                tdp_dominance: freq(dominated[j]),
            }
        })
        .collect();
    Ok(MonteCarloResult { summaries, outcomes })
}

/// Frequency of replicates where the reference oracle set is contained in the
/// procedure's rejections.
pub fn containment_frequency(outcomes: &[ReplicateOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.contained).count() as f64 / outcomes.len() as f64
}

/// Frequency of replicates where the reference oracle TDP strictly exceeds the
/// procedure's TDP.
pub fn tdp_dominance_frequency(outcomes: &[ReplicateOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.oracle_tdp > o.tdp).count() as f64 / outcomes.len() as f64
}

/// Largest `k` such that at most a fraction `beta` of replicates has oracle BH
/// at level `alpha/2` rejecting fewer than `k` alternatives. Capped at `m1`.
pub fn detectability_k(spec: &ScenarioSpec, beta: f64, reps: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", beta, "must lie in [0, 1]"));
    }
    if reps == 0 {
        return Err(Error::param("reps", reps, "need at least one replicate"));
    }
    spec.validate()?;
    if spec.m1 == 0 {
        return Ok(0);
    }
    let level = spec.alpha / 2.0;
    let counts: Vec<usize> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let ds = generate(spec, r)?;
            let set = oracle_set(&ds, spec, level)?;
            Ok(set.indices.iter().filter(|&&i| !ds.h0_mask[i]).count())
        })
        .collect::<Result<_>>()?;
    // hist[c] = number of replicates detecting exactly c alternatives
    let mut hist = vec![0usize; spec.m1 + 1];
    for c in counts {
        hist[c] += 1;
    }
    let mut below = 0usize;
    let mut best = 0;
    for k in 1..=spec.m1 {
        below += hist[k - 1];
        if below as f64 <= beta * reps as f64 {
            best = k;
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> RejectionSet {
        RejectionSet {
            indices: v.to_vec(),
            threshold_p: 0.0,
        }
    }

    #[test]
    fn fdp_and_tdp_hand_counts() {
        // 1-based {1,2,3} with null {2}; alternatives {1,3}
        let mask = [false, true, false];
        assert_eq!(fdp(&set(&[]), &mask), 0.0);
        assert!((fdp(&set(&[0, 1, 2]), &mask) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(fdp(&set(&[0, 1]), &[true, true]), 1.0);
        assert_eq!(tdp(&set(&[0, 1]), &[true, true]), 0.0);
        assert_eq!(tdp(&set(&[0]), &[false, false]), 0.5);
        assert_eq!(tdp(&set(&[0, 2]), &mask), 1.0);
    }

    #[test]
    fn welford_matches_two_pass() {
        let v = [0.0, 0.5, 1.0, 0.25, 0.75, 0.0];
        let mut w = Welford::default();
        v.iter().for_each(|&x| w.push(x));
        let mean = v.iter().sum::<f64>() / 6.0;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((w.mean - mean).abs() < 1e-15);
        assert!((w.sd() - var.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_replicate_summary_is_the_outcome() {
        let spec = ScenarioSpec::gaussian(10, 20, 5, 3.0, 0.5, 1);
        let res = monte_carlo(&spec, &[Procedure::SsBh, Procedure::OracleBh], 1, 0.0).unwrap();
        for (s, o) in res.summaries.iter().zip(&res.outcomes) {
            assert_eq!(s.fdr_hat, o.outcome.fdp);
            assert_eq!(s.tdr_hat, o.outcome.tdp);
            assert_eq!((s.sd_fdp, s.se_fdr, s.reps), (0.0, 0.0, 1));
        }
    }

    #[test]
    fn contained_implies_no_dominance() {
        let spec = ScenarioSpec::gaussian(10, 30, 5, 2.0, 0.5, 3);
        let res = monte_carlo(&spec, &[Procedure::SsBh], 300, 0.3).unwrap();
        for o in res.outcomes_of(Procedure::SsBh) {
            if o.contained {
                assert!(o.tdp >= o.oracle_tdp);
            }
        }
        let outs = res.outcomes_of(Procedure::SsBh);
        assert!(containment_frequency(&outs) <= 1.0 - tdp_dominance_frequency(&outs) + 1e-12);
    }

    #[test]
    fn full_null_has_no_dominance_and_detectability_edges() {
        let spec = ScenarioSpec::gaussian(5, 10, 0, 0.0, 0.5, 3);
        let res = monte_carlo(&spec, &[Procedure::SsBh], 50, 0.0).unwrap();
        assert_eq!(tdp_dominance_frequency(&res.outcomes_of(Procedure::SsBh)), 0.0);
        assert_eq!(detectability_k(&spec, 0.05, 10).unwrap(), 0);
        let alt = ScenarioSpec::gaussian(10, 10, 5, 2.0, 0.5, 3);
        assert_eq!(detectability_k(&alt, 1.0, 200).unwrap(), 5);
    }

    #[test]
    fn requests_are_validated() {
        let spec = ScenarioSpec::gaussian(5, 0, 0, 0.0, 0.5, 3);
        assert_eq!(monte_carlo(&spec, &[Procedure::SsBh], 5, 0.0).unwrap_err(), Error::EmptyNullSample);
        assert!(monte_carlo(&spec, &[Procedure::OracleBh], 5, 0.0).is_ok());
        assert!(monte_carlo(&spec, &[Procedure::RandomizedBh], 5, 0.0).is_err());
        assert!(monte_carlo(&spec, &[Procedure::OracleBh], 0, 0.0).is_err());
        assert!("ss_bh".parse::<Procedure>().is_ok());
        assert!("nope".parse::<Procedure>().is_err());
    }

    #[test]
    fn every_procedure_runs() {
        let spec = ScenarioSpec::gaussian(4, 40, 2, 2.0, 0.4, 9);
        let procs = [
            Procedure::SsBh,
            Procedure::OracleBh,
            Procedure::NaiveBh,
            Procedure::ByBh,
            Procedure::SplitBh,
            Procedure::Locfdr,
            Procedure::BlackboxBh,
        ];
        let res = monte_carlo(&spec, &procs, 20, 0.0).unwrap();
        assert!(res.summaries.iter().all(|s| s.reps == 20 && s.failures == 0));
        let eq = ScenarioSpec::gaussian(4, 6, 0, 0.0, 0.5, 9).with_family(Family::GaussianNegEquicorr);
        let res = monte_carlo(&eq, &[Procedure::RandomizedBh], 20, 0.0).unwrap();
        assert_eq!(res.summaries[0].reps, 20);
    }
}
