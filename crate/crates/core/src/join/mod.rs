//! Join invariants of two parametrized varieties `X, Y ⊂ P^n`.
//!
//! "General" always means: sampled at random, certified to avoid the
//! degenerate configurations that are testable, and agreeing across a
//! configurable number of independent trials.

mod analyze;
mod census;
mod degree;
mod lines;
mod tangent;

pub use analyze::{
    analyze, analyze_with, error_kind, AnalyzeOptions, Dims, InclusionSummary, JoinReport, Profile, Section,
    REPORT_SCHEMA,
};
pub(crate) use analyze::{skipped, Runner};
pub use census::{
    census_at, lies_on, collinearity_data, collinearity_system, fiber_census, fiber_census_with_dim,
    CensusResult, CollinearityData, FiberCensus,
};
pub use degree::{ballico_plane_test, degree_ej, ruled_join_point, BallicoResult, DegreeResult};
pub use lines::{joined_profile, sample_join_line, JoinLine, LineCertificate};
pub use tangent::{
    constrained_pair, constrained_pair_test, ej_dimension, strange_pair_test, t_invariant,
    terracini_inclusion, terracini_inclusion_trials, terracini_span, w_tangent_checks, DimMethod,
    EjDimension, InclusionReport, StrangeResult, WCheckReport, WCheckSide, DEFAULT_W_POINTS,
};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bivar::BivarError;
use crate::field::{FieldError, FieldSpec};
use crate::oracle::OracleError;
use crate::proj::ProjError;
use crate::variety::{ParamVariety, VarietyError};

pub const DEFAULT_TRIALS: usize = 3;
/// Bounded resampling for any "general" configuration.
pub(crate) const MAX_RESAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("X lives in P^{0}, Y in P^{1}")]
    AmbientMismatch(usize, usize),
    #[error("X is over {0}, Y over {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("X = Y is a linear space")]
    LinearSelfJoin,
    #[error("no general configuration found after {0} samples")]
    GeneralPositionUncertain(usize),
    #[error("trials disagree on {what}: {values:?}")]
    TrialDisagreement { what: String, values: Vec<i64> },
    #[error("the join is defective: dimension {dim} < {expected}")]
    JoinDefective { dim: i64, expected: i64 },
    #[error("{what} is not an integer")]
    NonIntegralRatio { what: String },
    #[error("census identity fails: {0}")]
    CensusIdentity(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("check failed: {0}")]
    CheckFailure(String),
    #[error("both weights are zero")]
    ZeroWeights,
    #[error(transparent)]
    Variety(#[from] VarietyError),
    #[error(transparent)]
    Bivar(#[from] BivarError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Enumeration limits for the finite-field oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub primes: Vec<u64>,
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            primes: vec![31, 53],
            budget: crate::oracle::DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinInstance {
    pub x: ParamVariety,
    pub y: ParamVariety,
    pub seed: u64,
    pub trials: usize,
    pub oracle: OracleConfig,
}

impl JoinInstance {
    pub fn new(x: ParamVariety, y: ParamVariety, seed: u64, trials: usize) -> Result<Self, JoinError> {
        if x.ambient() != y.ambient() {
            return Err(JoinError::AmbientMismatch(x.ambient(), y.ambient()));
        }
        if x.field() != y.field() {
            return Err(JoinError::FieldMismatch(x.field(), y.field()));
        }
        let inst = JoinInstance {
            x,
            y,
            seed,
            trials: trials.max(1),
            oracle: OracleConfig::default(),
        };
        if inst.same_variety() && (inst.x.source_dim() == 0 || inst.x.degree() == 1) {
            return Err(JoinError::LinearSelfJoin);
        }
        Ok(inst)
    }

    pub fn with_oracle(mut self, oracle: OracleConfig) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn field(&self) -> FieldSpec {
        self.x.field()
    }

    pub fn ambient(&self) -> usize {
        self.x.ambient()
    }

    /// `X` and `Y` have identical parametrizations.
    pub fn same_variety(&self) -> bool {
        self.x.forms() == self.y.forms()
    }

    pub fn expected_dim(&self) -> i64 {
        (self.x.source_dim() + self.y.source_dim() + 1) as i64
    }

    pub fn curves_only(&self) -> bool {
        self.x.source_dim() <= 1 && self.y.source_dim() <= 1
    }

    pub fn swapped(&self) -> JoinInstance {
        JoinInstance {
            x: self.y.clone(),
            y: self.x.clone(),
            ..self.clone()
        }
    }

    pub fn reduce_mod(&self, p: u64) -> Result<JoinInstance, JoinError> {
        let f = FieldSpec::prime(p)?;
        Ok(JoinInstance {
            x: self.x.reduce_into(f)?,
            y: self.y.reduce_into(f)?,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Generic {
    /// Special configurations only raise the value.
    Min,
    /// Special configurations only lower the value.
    Max,
}

/// Generic value of an integer invariant: all `trials` samples agree, or
/// after doubling the sample the extreme value is a strict majority.
pub(crate) fn consensus<R: Rng + ?Sized>(
    what: &str,
    trials: usize,
    rng: &mut R,
    pick: Generic,
    sample: impl FnMut(&mut R) -> Result<i64, JoinError>,
) -> Result<i64, JoinError> {
    consensus_by(what, trials, rng, pick, |v| vec![*v], sample)
}

/// [`consensus`] for any ordered value; `summary` flattens a value for the
/// error report.
pub(crate) fn consensus_by<R: Rng + ?Sized, T: Ord + Clone>(
    what: &str,
    trials: usize,
    rng: &mut R,
    pick: Generic,
    summary: impl Fn(&T) -> Vec<i64>,
    mut sample: impl FnMut(&mut R) -> Result<T, JoinError>,
) -> Result<T, JoinError> {
    let trials = trials.max(1);
    let mut values = Vec::new();
    for _ in 0..trials {
        values.push(sample(rng)?);
    }
    if values.iter().all(|v| *v == values[0]) {
        return Ok(values.swap_remove(0));
    }
    for _ in 0..2 * trials {
        values.push(sample(rng)?);
    }
    let v = match pick {
        Generic::Min => values.iter().min(),
        Generic::Max => values.iter().max(),
    }
    .expect("nonempty")
    .clone();
    if 2 * values.iter().filter(|x| **x == v).count() > values.len() {
        Ok(v)
    } else {
        Err(JoinError::TrialDisagreement {
            what: what.to_string(),
            values: values.iter().flat_map(&summary).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn consensus_rules() {
        let mut rng = rng_from(0);
        let mut seq = [4, 4, 4].into_iter();
        assert_eq!(consensus("a", 3, &mut rng, Generic::Min, |_| Ok(seq.next().unwrap())), Ok(4));
        // one special sample, then six generic ones
        let mut seq = [5, 4, 4, 4, 4, 4, 4, 4, 4].into_iter();
        assert_eq!(consensus("a", 3, &mut rng, Generic::Min, |_| Ok(seq.next().unwrap())), Ok(4));
        let mut seq = [1, 2, 3, 1, 2, 3, 2, 3, 3].into_iter();
        assert!(matches!(
            consensus("a", 3, &mut rng, Generic::Min, |_| Ok(seq.next().unwrap())),
            Err(JoinError::TrialDisagreement { .. })
        ));
    }
}
