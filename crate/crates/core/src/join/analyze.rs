use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use super::{
    ballico_plane_test, constrained_pair, degree_ej, ej_dimension, fiber_census_with_dim, joined_profile,
    strange_pair_test, t_invariant, terracini_inclusion_trials, w_tangent_checks, BallicoResult, DegreeResult,
    EjDimension, FiberCensus, JoinError, JoinInstance, StrangeResult, WCheckReport,
};
use crate::field::FieldSpec;
use crate::oracle::{oracle_dimension, OracleDimension};
use crate::seed::{section_rng, section_seed, SeededRng};
use crate::variety::{validate_variety, ValidationReport};

pub const REPORT_SCHEMA: u32 = 1;

/// Outcome of one report section. `Undefined` marks an invariant that
/// does not exist for the instance, such as a census over a defective join.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Section<T> {
    Ok { seed: u64, value: T },
    Undefined { seed: u64, kind: String, message: String },
    Error { seed: u64, kind: String, message: String },
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Section::Ok { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Applies `f` to the value, keeping the other outcomes.
    pub fn map_ref<U>(&self, f: impl FnOnce(&T) -> U) -> Section<U> {
        match self {
            Section::Ok { seed, value } => Section::Ok {
                seed: *seed,
                value: f(value),
            },
            Section::Undefined { seed, kind, message } => Section::Undefined {
                seed: *seed,
                kind: kind.clone(),
                message: message.clone(),
            },
            Section::Error { seed, kind, message } => Section::Error {
                seed: *seed,
                kind: kind.clone(),
                message: message.clone(),
            },
            Section::Skipped { reason } => Section::Skipped { reason: reason.clone() },
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Section::Error { .. })
    }

    pub fn kind(&self) -> Option<&str> {
        match self {
            Section::Undefined { kind, .. } | Section::Error { kind, .. } => Some(kind),
            _ => None,
        }
    }
}

/// Variant name of an error, looking through wrapper variants.
pub fn error_kind(e: &JoinError) -> String {
    let d = format!("{e:?}");
    let mut tokens = d.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty());
    let first = tokens.next().unwrap_or("Unknown");
    match first {
        "Variety" | "Bivar" | "Proj" | "Field" | "Oracle" | "Poly" => tokens.next().unwrap_or(first).to_string(),
        _ => first.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub x: usize,
    pub y: usize,
    pub expected: i64,
    pub computed: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub m_x: usize,
    pub m_y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionSummary {
    pub configurations: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinReport {
    pub schema: u32,
    pub x: String,
    pub y: String,
    pub field: FieldSpec,
    pub ambient: usize,
    pub seed: u64,
    pub trials: usize,
    pub oracle_primes: Vec<u64>,
    pub dims: Dims,
    pub validation: Section<Vec<ValidationReport>>,
    pub ej_dimension: Section<EjDimension>,
    pub profile: Section<Profile>,
    pub t_invariant: Section<i64>,
    pub strange_pair: Section<StrangeResult>,
    pub constrained_pair: Section<bool>,
    pub census: Section<FiberCensus>,
    pub degree: Section<DegreeResult>,
    pub terracini_inclusion: Section<InclusionSummary>,
    pub w_checks: Section<WCheckReport>,
    pub ballico: Section<BallicoResult>,
    pub oracle_dimension: Section<OracleDimension>,
    /// Wall-clock milliseconds per section; excluded from replay comparisons.
    pub timings_ms: BTreeMap<String, f64>,
}

impl JoinReport {
    /// Whether any section ended in an error.
    pub fn has_errors(&self) -> bool {
        self.validation.is_error()
            || self.ej_dimension.is_error()
            || self.profile.is_error()
            || self.t_invariant.is_error()
            || self.strange_pair.is_error()
            || self.constrained_pair.is_error()
            || self.census.is_error()
            || self.degree.is_error()
            || self.terracini_inclusion.is_error()
            || self.w_checks.is_error()
            || self.ballico.is_error()
            || self.oracle_dimension.is_error()
    }
}

/// Tunables for [`analyze_with`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub inclusion_configurations: usize,
    pub w_points: usize,
    pub oracle_cross_check: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            inclusion_configurations: 10,
            w_points: 10,
            oracle_cross_check: true,
        }
    }
}

/// Runs named sections, each on its own derived seed, recording timings.
pub(crate) struct Runner<'a> {
    pub(crate) seed: u64,
    pub(crate) timings: &'a mut BTreeMap<String, f64>,
}

impl Runner<'_> {
    pub(crate) fn run<T>(&mut self, name: &str, f: impl FnOnce(&mut SeededRng) -> Result<T, JoinError>) -> Section<T> {
        let seed = section_seed(self.seed, name);
        let mut rng = section_rng(self.seed, name);
        let start = Instant::now();
        let out = f(&mut rng);
        self.timings.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
        match out {
            Ok(value) => Section::Ok { seed, value },
            Err(JoinError::Precondition(reason)) => Section::Skipped { reason },
            Err(e @ JoinError::JoinDefective { .. }) => Section::Undefined {
                seed,
                kind: error_kind(&e),
                message: e.to_string(),
            },
            Err(e) => Section::Error {
                seed,
                kind: error_kind(&e),
                message: e.to_string(),
            },
        }
    }
}

pub(crate) fn skipped<T>(reason: &str) -> Section<T> {
    Section::Skipped { reason: reason.into() }
}

pub fn analyze(inst: &JoinInstance) -> JoinReport {
    analyze_with(inst, &AnalyzeOptions::default())
}

/// Runs every section, each on its own seed; a failing section does not
/// stop the others.
pub fn analyze_with(inst: &JoinInstance, opts: &AnalyzeOptions) -> JoinReport {
    let mut timings = BTreeMap::new();
    let mut r = Runner {
        seed: inst.seed,
        timings: &mut timings,
    };
    let (kx, ky) = (inst.x.source_dim(), inst.y.source_dim());
    let expected = inst.expected_dim();
    let n = inst.ambient() as i64;

    let validation = r.run("validation", |rng| {
        Ok(vec![validate_variety(&inst.x, rng)?, validate_variety(&inst.y, rng)?])
    });
    let ej = r.run("ej_dimension", |rng| ej_dimension(inst, rng));
    let dim = ej.value().map(|d| d.dim);
    let profile = r.run("profile", |rng| {
        let (m_x, m_y) = joined_profile(inst, rng)?;
        Ok(Profile { m_x, m_y })
    });
    let t = r.run("t_invariant", |rng| t_invariant(inst, rng));
    let strange = r.run("strange_pair", |rng| strange_pair_test(inst, rng));
    let constrained = match (dim, t.value()) {
        (Some(d), Some(&tv)) => r.run("constrained_pair", |_| Ok(constrained_pair(d, kx, ky, tv))),
        _ => skipped("needs the join dimension and t"),
    };
    let census = match dim {
        Some(d) => r.run("census", |rng| fiber_census_with_dim(inst, d, rng)),
        None => skipped("needs the join dimension"),
    };
    let degree = match (dim, &census) {
        (Some(d), _) if d == n => r.run("degree", |rng| degree_ej(inst, d, 0, None, rng)),
        (Some(d), _) if d < expected => r.run("degree", |rng| degree_ej(inst, d, 0, None, rng)),
        (Some(d), Section::Ok { value, .. }) => {
            r.run("degree", |rng| degree_ej(inst, d, value.deg_pi, value.p_off, rng))
        }
        _ => skipped("needs the join dimension and deg π"),
    };
    let inclusion = r.run("terracini_inclusion", |rng| {
        let failures = terracini_inclusion_trials(inst, opts.inclusion_configurations, rng)?;
        Ok(InclusionSummary {
            configurations: opts.inclusion_configurations,
            failures,
        })
    });
    let w = if inst.curves_only() {
        r.run("w_checks", |rng| w_tangent_checks(inst, opts.w_points, rng))
    } else {
        skipped("tangent checks run on curves")
    };
    let ballico = r.run("ballico", |rng| ballico_plane_test(inst, rng));
    let oracle = if !opts.oracle_cross_check {
        skipped("disabled")
    } else if inst.field().is_rationals() {
        r.run("oracle_dimension", |_| Ok(oracle_dimension(inst, &inst.oracle)?))
    } else {
        skipped("the oracle already decided the dimension")
    };

    JoinReport {
        schema: REPORT_SCHEMA,
        x: inst.x.label().to_string(),
        y: inst.y.label().to_string(),
        field: inst.field(),
        ambient: inst.ambient(),
        seed: inst.seed,
        trials: inst.trials,
        oracle_primes: inst.oracle.primes.clone(),
        dims: Dims {
            x: kx,
            y: ky,
            expected,
            computed: dim,
        },
        validation,
        ej_dimension: ej,
        profile,
        t_invariant: t,
        strange_pair: strange,
        constrained_pair: constrained,
        census,
        degree,
        terracini_inclusion: inclusion,
        w_checks: w,
        ballico,
        oracle_dimension: oracle,
        timings_ms: timings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::ParamVariety;

    fn skew() -> JoinInstance {
        let q = FieldSpec::rationals();
        JoinInstance::new(
            ParamVariety::parse("L1", 1, &["s0", "s1", "0", "0"], q).unwrap(),
            ParamVariety::parse("L2", 1, &["0", "0", "s0", "s1"], q).unwrap(),
            42,
            3,
        )
        .unwrap()
    }

    #[test]
    fn skew_lines_report_and_replay() {
        let a = analyze(&skew());
        assert!(!a.has_errors(), "{a:#?}");
        let c = a.census.value().unwrap();
        assert_eq!((c.m_x, c.m_y, c.b, c.deg_pi), (1, 1, 1, 1));
        assert_eq!(a.degree.value().unwrap().degree, 1);
        assert_eq!(a.t_invariant.value(), Some(&-1));
        assert_eq!(a.constrained_pair.value(), Some(&false));
        assert!(!a.strange_pair.value().unwrap().is_strange);
        assert!(matches!(a.ballico, Section::Skipped { .. }));
        let mut b = analyze(&skew());
        b.timings_ms = a.timings_ms.clone();
        assert_eq!(a, b);
    }

    #[test]
    fn error_kinds() {
        assert_eq!(error_kind(&JoinError::JoinDefective { dim: 2, expected: 3 }), "JoinDefective");
        assert_eq!(
            error_kind(&JoinError::Bivar(crate::bivar::BivarError::PositiveDimensional)),
            "PositiveDimensional"
        );
    }
}
