//! Multiple testing with a null training sample.
//!
//! Empirical p-values calibrated on an i.i.d. or exchangeable sample from the
//! null distribution, the semi-supervised Benjamini–Hochberg procedure built
//! on them, comparators (oracle BH, naive, BY-corrected and split variants,
//! local fdr), the blackbox and randomized extensions, closed-form FDR bounds
//! and power boundaries, scenario generators and a Monte-Carlo harness.
//!
//! ```
//! use ssmt_core::{ss_bh, NullTrainingSample64, TestStatistics64};
//!
//! let y = NullTrainingSample64::new(vec![1.0, 2.0, 3.0]).unwrap();
//! let x = TestStatistics64::new(vec![4.0, 0.5]).unwrap();
//! let (rejected, diag) = ss_bh(&x, &y, 0.5).unwrap();
//! assert_eq!(rejected.indices, vec![0]);
//! assert_eq!((diag.k, diag.v), (1, 0));
//! ```

// `!(a > b)` is used on purpose so NaN lands on the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod lrt;
pub mod procedures;
pub mod pvalues;
pub mod rng;
pub mod scalar;
pub mod theory;

pub use num_rational::Rational64;

pub use datagen::{generate, Dataset, Family, LrtNullSampler, ScenarioSpec};
pub use error::{Error, Result};
pub use evaluation::{
    containment_frequency, detectability_k, fdp, monte_carlo, tdp, tdp_dominance_frequency,
    MetricsSummary, MonteCarloResult, Procedure, ReplicateOutcome,
};
pub use lrt::{lrt_oracle_tail, DensityPair};
pub use procedures::{
    bh_stepup, blackbox_bh, blackbox_n, by_procedure, equicorrelated_extend, locfdr_oracle,
    randomized_bh, randomized_n, split_bh, ss_bh, EquicorrSpec, NullSampler, RejectionSet,
    SsBhDiagnostics,
};
pub use pvalues::{
    conservative_empirical_pvalues, naive_empirical_pvalues, oracle_pvalues, NullModel,
    NullTrainingSample, PValueKind, PValues, TestStatistics,
};
pub use scalar::Scalar;
pub use theory::{classify_phase, fdr_bounds, phase_diagram, FdrBounds, PhaseRegion};

pub type TestStatistics64 = TestStatistics<f64>;
pub type TestStatistics32 = TestStatistics<f32>;
pub type NullTrainingSample64 = NullTrainingSample<f64>;
pub type NullTrainingSample32 = NullTrainingSample<f32>;
pub type PValues64 = PValues<f64>;
pub type PValues32 = PValues<f32>;
/// P-values held exactly, for boundary-sensitive step-up comparisons.
pub type PValuesExact = PValues<Rational64>;
