//! The commands behind the `joindeg` binary. Each returns a serializable
//! report together with the process exit code.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::field::FieldSpec;
use crate::instance::{resolve_seed, InstanceError, InstanceFile, MAX_BUDGET};
use crate::join::{
    analyze, census_at, ej_dimension, fiber_census_with_dim, skipped, FiberCensus, JoinError, JoinInstance,
    JoinReport, Runner, Section,
};
use crate::oracle::{
    enumerate_points, instance_mod, oracle_census, oracle_degree_slice, oracle_dimension, random_join_point,
    OracleCensus, OracleDegree, OracleDimension, OracleError, MAX_PRIME,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SECTION: u8 = 2;
pub const EXIT_DISAGREE: u8 = 3;

pub const TOOL: &str = "joindeg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_POINTS: usize = 5;
/// Prime used to cross-check rational instances.
pub const CROSSCHECK_PRIME: u64 = 31;
pub const ORACLE_DEGREE_TRIALS: usize = 100;
const MAX_POINTS: usize = 100;
/// Draws of `z` allowed per requested point before giving up.
const DRAWS_PER_POINT: usize = 40;
const JOIN_POINT_ATTEMPTS: usize = 64;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("--prime {p}: {reason}")]
    Prime { p: u64, reason: String },
    #[error("--field-override: {0}")]
    FieldOverride(String),
    #[error("--budget must be in 1..={MAX_BUDGET}, got {0}")]
    Budget(u64),
    #[error("--points must be in 1..={MAX_POINTS}, got {0}")]
    Points(usize),
    #[error("crosscheck needs curves or points, got dimensions {0} and {1}")]
    NotCurves(usize, usize),
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        EXIT_INPUT
    }
}

/// A report document: tool identity, the effective instance (seed, trials
/// and field as actually used) and the command output.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<T> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub instance: InstanceFile,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub report: ReportFile<T>,
    pub exit: u8,
}

impl<T: Serialize> Outcome<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Drops every `timings_ms` entry so two runs can be compared.
pub fn scrub_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("timings_ms");
            m.values_mut().for_each(scrub_timings);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(scrub_timings),
        _ => {}
    }
}

/// `Q`, or a prime written in decimal.
pub fn parse_field(s: &str) -> Result<FieldSpec, CommandError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("q") {
        return Ok(FieldSpec::rationals());
    }
    let p: u64 = s
        .trim_start_matches(['F', 'f'])
        .parse()
        .map_err(|_| CommandError::FieldOverride(format!("expected Q or a prime, got {s:?}")))?;
    FieldSpec::prime(p).map_err(|e| CommandError::FieldOverride(e.to_string()))
}

fn checked_prime(p: u64) -> Result<FieldSpec, CommandError> {
    let f = FieldSpec::prime(p).map_err(|e| CommandError::Prime { p, reason: e.to_string() })?;
    if p > MAX_PRIME {
        return Err(CommandError::Prime {
            p,
            reason: format!("exceeds the enumeration cap {MAX_PRIME}"),
        });
    }
    Ok(f)
}

/// Seed overrides shared by every command. `env` is the raw value of
/// `JOINDEG_SEED`, if set.
#[derive(Debug, Clone, Default)]
pub struct SeedFlags {
    pub seed: Option<u64>,
    pub env: Option<String>,
}

fn effective(file: &InstanceFile, seeds: &SeedFlags) -> Result<InstanceFile, CommandError> {
    let mut f = file.clone();
    f.seed = resolve_seed(seeds.seed, seeds.env.as_deref(), file.seed)?;
    Ok(f)
}

fn report<T>(command: &'static str, instance: InstanceFile, body: T, exit: u8) -> Outcome<T> {
    Outcome {
        report: ReportFile {
            schema: crate::join::REPORT_SCHEMA,
            tool: TOOL,
            version: VERSION,
            command,
            instance,
            body,
        },
        exit,
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeFlags {
    pub seeds: SeedFlags,
    pub trials: Option<usize>,
    pub field: Option<FieldSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeBody {
    pub report: JoinReport,
}

pub fn cmd_analyze(file: &InstanceFile, flags: &AnalyzeFlags) -> Result<Outcome<AnalyzeBody>, CommandError> {
    let mut f = effective(file, &flags.seeds)?;
    if let Some(t) = flags.trials {
        f.trials = t;
    }
    if let Some(field) = flags.field {
        f.field = field;
    }
    f.check()?;
    let inst = f.build()?;
    let r = analyze(&inst);
    let exit = if r.has_errors() { EXIT_SECTION } else { EXIT_OK };
    Ok(report("analyze", f, AnalyzeBody { report: r }, exit))
}

#[derive(Debug, Clone)]
pub struct OracleFlags {
    pub seeds: SeedFlags,
    pub prime: u64,
    pub budget: Option<u64>,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSizes {
    pub x_points: usize,
    pub y_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleBody {
    pub prime: u64,
    pub budget: u64,
    pub tables: Section<TableSizes>,
    pub censuses: Section<Vec<OracleCensus>>,
    pub dimension: Section<OracleDimension>,
    pub degree: Section<OracleDegree>,
    pub timings_ms: BTreeMap<String, f64>,
}

fn check_points(points: usize) -> Result<(), CommandError> {
    if points == 0 || points > MAX_POINTS {
        return Err(CommandError::Points(points));
    }
    Ok(())
}

pub fn cmd_oracle(file: &InstanceFile, flags: &OracleFlags) -> Result<Outcome<OracleBody>, CommandError> {
    checked_prime(flags.prime)?;
    check_points(flags.points)?;
    let budget = flags.budget.unwrap_or_else(|| file.oracle_config().budget);
    if budget == 0 || budget > MAX_BUDGET {
        return Err(CommandError::Budget(budget));
    }
    let f = effective(file, &flags.seeds)?;
    let inst = f.build()?;
    let p = flags.prime;
    let mut timings = BTreeMap::new();
    let mut r = Runner {
        seed: inst.seed,
        timings: &mut timings,
    };
    let reduced = r.run("oracle_tables", |_| {
        let red = instance_mod(&inst, p)?;
        let xt = enumerate_points(&red.x, budget)?;
        let yt = enumerate_points(&red.y, budget)?;
        Ok((red, xt, yt))
    });
    let tables = reduced.map_ref(|(_, x, y)| TableSizes {
        x_points: x.len(),
        y_points: y.len(),
    });
    let (censuses, dimension, degree) = match reduced.value() {
        None => (
            skipped("needs the point tables"),
            skipped("needs the point tables"),
            skipped("needs the point tables"),
        ),
        Some((red, xt, yt)) => {
            let censuses = r.run("oracle_census", |rng| {
                (0..flags.points)
                    .map(|_| {
                        let z = random_join_point(xt, yt, JOIN_POINT_ATTEMPTS, rng)
                            .ok_or_else(|| OracleError::NoJoinLineThroughZ("any sampled point".into()))?;
                        Ok(oracle_census(xt, yt, &z)?)
                    })
                    .collect::<Result<Vec<_>, JoinError>>()
            });
            let mut config = red.oracle.clone();
            config.budget = budget;
            let dimension = r.run("oracle_dimension", |_| Ok(oracle_dimension(red, &config)?));
            let degree = match dimension.value() {
                Some(d) => r.run("oracle_degree", |rng| {
                    Ok(oracle_degree_slice(red, d.dim, ORACLE_DEGREE_TRIALS, budget, rng)?)
                }),
                None => skipped("needs the oracle dimension"),
            };
            (censuses, dimension, degree)
        }
    };
    let failed = tables.is_error() || censuses.is_error() || dimension.is_error() || degree.is_error();
    let body = OracleBody {
        prime: p,
        budget,
        tables,
        censuses,
        dimension,
        degree,
        timings_ms: timings,
    };
    Ok(report("oracle", f, body, if failed { EXIT_SECTION } else { EXIT_OK }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "AGREE")]
    Agree,
    #[serde(rename = "DISAGREE")]
    Disagree,
    /// A section failed before the paths could be compared.
    #[serde(rename = "ERROR")]
    Error,
}

impl Verdict {
    fn of(same: bool) -> Verdict {
        if same {
            Verdict::Agree
        } else {
            Verdict::Disagree
        }
    }
}

/// The counts compared between the two paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub b: usize,
    pub m_x: Option<usize>,
    pub m_y: Option<usize>,
}

impl Counts {
    fn verdicts(&self, other: &Counts) -> BTreeMap<&'static str, Verdict> {
        BTreeMap::from([
            ("P", Verdict::of(self.p == other.p)),
            ("S", Verdict::of(self.s == other.s)),
            ("T", Verdict::of(self.t == other.t)),
            ("b", Verdict::of(self.b == other.b)),
            ("m_X", Verdict::of(self.m_x == other.m_x)),
            ("m_Y", Verdict::of(self.m_y == other.m_y)),
        ])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    pub z: String,
    pub exact: Counts,
    pub oracle: Counts,
    pub verdicts: BTreeMap<&'static str, Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointChecks {
    pub checks: Vec<PointCheck>,
    /// Draws discarded because the exact counts there differ from the
    /// generic ones.
    pub non_general: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailingDatum {
    pub z: String,
    pub prime: u64,
    pub quantity: String,
    pub exact: Counts,
    pub oracle: Counts,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckBody {
    pub prime: u64,
    /// Terracini span over `Q`, finiteness of the pair fibre over `F_p`.
    pub exact_dimension: Section<i64>,
    pub oracle_dimension: Section<OracleDimension>,
    pub exact_census: Section<FiberCensus>,
    pub points: Section<PointChecks>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub verdict: Verdict,
    pub failing: Option<FailingDatum>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct CrosscheckFlags {
    pub seeds: SeedFlags,
    pub prime: Option<u64>,
    pub points: usize,
}

impl Default for CrosscheckFlags {
    fn default() -> Self {
        CrosscheckFlags {
            seeds: SeedFlags::default(),
            prime: None,
            points: DEFAULT_POINTS,
        }
    }
}

fn crosscheck_prime(inst: &JoinInstance, flag: Option<u64>) -> Result<u64, CommandError> {
    let p = match (inst.field().modulus(), flag) {
        (Some(q), Some(p)) if p != q => {
            return Err(CommandError::Prime {
                p,
                reason: format!("the instance is over F_{q}"),
            })
        }
        (Some(q), _) => q,
        (None, p) => p.unwrap_or(CROSSCHECK_PRIME),
    };
    checked_prime(p)?;
    Ok(p)
}

fn oracle_counts(c: &OracleCensus) -> Counts {
    let profile = c.profile();
    Counts {
        p: c.fiber,
        s: c.s,
        t: c.t,
        b: c.b,
        m_x: profile.map(|p| p.0),
        m_y: profile.map(|p| p.1),
    }
}

fn check_points_at(
    inst: &JoinInstance,
    generic: &FiberCensus,
    p: u64,
    points: usize,
    rng: &mut crate::seed::SeededRng,
) -> Result<PointChecks, JoinError> {
    let red = instance_mod(inst, p)?;
    let xt = enumerate_points(&red.x, inst.oracle.budget)?;
    let yt = enumerate_points(&red.y, inst.oracle.budget)?;
    let mut checks = Vec::new();
    let mut non_general = 0;
    let draws = points * DRAWS_PER_POINT;
    for _ in 0..draws {
        if checks.len() == points {
            break;
        }
        let Some(z) = random_join_point(&xt, &yt, JOIN_POINT_ATTEMPTS, rng) else {
            break;
        };
        let at = match census_at(&red, &z, rng) {
            Ok(c) if (c.p, c.s, c.t) == (generic.p, generic.s, generic.t) => c,
            _ => {
                non_general += 1;
                continue;
            }
        };
        let exact = Counts {
            p: at.p,
            s: at.s,
            t: at.t,
            b: generic.b,
            m_x: Some(generic.m_x),
            m_y: Some(generic.m_y),
        };
        let oracle = oracle_counts(&oracle_census(&xt, &yt, &z)?);
        checks.push(PointCheck {
            z: z.to_string(),
            verdicts: exact.verdicts(&oracle),
            exact,
            oracle,
        });
    }
    if checks.len() < points {
        return Err(JoinError::GeneralPositionUncertain(draws));
    }
    Ok(PointChecks { checks, non_general })
}

/// Runs the exact census and the finite-field census on the same points
/// and compares every count.
pub fn cmd_crosscheck(file: &InstanceFile, flags: &CrosscheckFlags) -> Result<Outcome<CrosscheckBody>, CommandError> {
    check_points(flags.points)?;
    let f = effective(file, &flags.seeds)?;
    let inst = f.build()?;
    if !inst.curves_only() {
        return Err(CommandError::NotCurves(inst.x.source_dim(), inst.y.source_dim()));
    }
    let p = crosscheck_prime(&inst, flags.prime)?;
    let expected = inst.expected_dim();
    let mut timings = BTreeMap::new();
    let mut r = Runner {
        seed: inst.seed,
        timings: &mut timings,
    };
    let exact_dimension = r.run("ej_dimension", |rng| {
        let d = ej_dimension(&inst, rng)?;
        if inst.field().is_rationals() {
            Ok(d.terracini)
        } else {
            d.fiber
                .ok_or_else(|| JoinError::Precondition("no fibre dimension for this instance".into()))
        }
    });
    let oracle_dim = r.run("oracle_dimension", |_| Ok(oracle_dimension(&inst, &inst.oracle)?));
    let exact_census = match exact_dimension.value() {
        Some(&d) => r.run("census", |rng| fiber_census_with_dim(&inst, d, rng)),
        None => skipped("needs the join dimension"),
    };
    let points = match exact_census.value() {
        Some(generic) => r.run("points", |rng| check_points_at(&inst, generic, p, flags.points, rng)),
        None => skipped("needs the exact census"),
    };

    let mut verdicts = BTreeMap::new();
    let mut failing = None;
    let mut errored = false;
    match (exact_dimension.value(), oracle_dim.value()) {
        (Some(&e), Some(o)) => {
            verdicts.insert("dimension".to_string(), Verdict::of(e == o.dim));
            let (ed, od) = (e < expected, o.dim < expected);
            verdicts.insert("defective".to_string(), Verdict::of(ed == od));
        }
        _ => errored = true,
    }
    match &points {
        Section::Ok { value, .. } => {
            for q in ["P", "S", "T", "b", "m_X", "m_Y"] {
                let bad = value.checks.iter().find(|c| c.verdicts[q] == Verdict::Disagree);
                verdicts.insert(q.to_string(), Verdict::of(bad.is_none()));
                if let (Some(c), None) = (bad, &failing) {
                    failing = Some(FailingDatum {
                        z: c.z.clone(),
                        prime: p,
                        quantity: q.to_string(),
                        exact: c.exact.clone(),
                        oracle: c.oracle.clone(),
                    });
                }
            }
        }
        Section::Skipped { .. } if matches!(exact_census, Section::Undefined { .. }) => {}
        _ => errored = true,
    }
    errored |= exact_census.is_error();
    let disagree = verdicts.values().any(|v| *v == Verdict::Disagree);
    let (verdict, exit) = if disagree {
        (Verdict::Disagree, EXIT_DISAGREE)
    } else if errored {
        (Verdict::Error, EXIT_SECTION)
    } else {
        (Verdict::Agree, EXIT_OK)
    };
    let body = CrosscheckBody {
        prime: p,
        exact_dimension,
        oracle_dimension: oracle_dim,
        exact_census,
        points,
        verdicts,
        verdict,
        failing,
        timings_ms: timings,
    };
    Ok(report("crosscheck", f, body, exit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(field: &str, x: &[&str], y: &[&str]) -> InstanceFile {
        let v = serde_json::json!({
            "schema": 1, "ambient": x.len() - 1, "field": serde_json::from_str::<serde_json::Value>(field).unwrap(),
            "X": {"source_dim": 1, "components": x},
            "Y": {"source_dim": 1, "components": y},
            "seed": 11
        });
        InstanceFile::from_json(&v.to_string()).unwrap()
    }

    #[test]
    fn field_flag() {
        assert_eq!(parse_field("Q").unwrap(), FieldSpec::rationals());
        assert_eq!(parse_field("31").unwrap(), FieldSpec::prime(31).unwrap());
        assert_eq!(parse_field("F5").unwrap(), FieldSpec::prime(5).unwrap());
        assert!(parse_field("4").is_err());
        assert!(parse_field("x").is_err());
    }

    #[test]
    fn skew_lines_crosscheck_agrees() {
        let f = file("\"Q\"", &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        let out = cmd_crosscheck(&f, &CrosscheckFlags::default()).unwrap();
        assert_eq!(out.exit, EXIT_OK, "{}", out.to_json());
        assert_eq!(out.report.body.verdict, Verdict::Agree);
        assert_eq!(out.report.body.points.value().unwrap().checks.len(), DEFAULT_POINTS);
    }

    #[test]
    fn oracle_rejects_composite_prime() {
        let f = file("\"Q\"", &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        let flags = OracleFlags {
            seeds: SeedFlags::default(),
            prime: 4,
            budget: None,
            points: 5,
        };
        let e = cmd_oracle(&f, &flags).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_INPUT);
    }

    #[test]
    fn oracle_field_mismatch_is_a_section_error() {
        let f = file("{\"p\": 5}", &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        let flags = OracleFlags {
            seeds: SeedFlags::default(),
            prime: 7,
            budget: None,
            points: 5,
        };
        let out = cmd_oracle(&f, &flags).unwrap();
        assert_eq!(out.exit, EXIT_SECTION);
        assert_eq!(out.report.body.tables.kind(), Some("FieldMismatch"));
    }

    #[test]
    fn analyze_overrides_are_recorded() {
        let f = file("\"Q\"", &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        let flags = AnalyzeFlags {
            seeds: SeedFlags {
                seed: None,
                env: Some("99".into()),
            },
            trials: Some(1),
            field: None,
        };
        let out = cmd_analyze(&f, &flags).unwrap();
        assert_eq!((out.report.instance.seed, out.report.instance.trials), (99, 1));
        assert_eq!(out.report.body.report.seed, 99);
        assert!(cmd_analyze(&f, &AnalyzeFlags { trials: Some(0), ..flags }).is_err());
    }
}
