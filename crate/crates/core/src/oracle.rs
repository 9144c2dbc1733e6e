//! Brute-force counts over a prime field: enumerate rational points and
//! the join lines through them, with no elimination anywhere.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldElem, FieldSpec};
use crate::join::{JoinInstance, OracleConfig};
use crate::poly::binary_divisor;
use crate::proj::{random_subspace, ProjPoint};
use crate::variety::{tangent_space, ParamVariety};

pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Largest prime the oracle enumerates over.
pub const MAX_PRIME: u64 = 101;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the oracle needs a prime field, got {0}")]
    NotPrimeField(FieldSpec),
    #[error("prime {p} exceeds the enumeration cap {max}")]
    PrimeTooLarge { p: u64, max: u64 },
    #[error("instance is over {0}, oracle asked for {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("enumeration needs {needed} steps, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("no rational join line passes through {0}")]
    NoJoinLineThroughZ(String),
    #[error("growth estimates disagree: {0:?}")]
    Inconclusive(Vec<(u64, u64)>),
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("cannot reduce modulo {p}: {reason}")]
    Reduction { p: u64, reason: String },
}

type Pt = Vec<u64>;

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Scales so the first nonzero entry is 1; `None` for the zero vector.
fn normalize(v: &[u64], p: u64) -> Option<Pt> {
    let lead = *v.iter().find(|c| **c != 0)?;
    let inv = inv_mod(lead, p);
    Some(v.iter().map(|c| c * inv % p).collect())
}

/// Normalized representatives of `P^k(F_p)`.
fn projective_points(p: u64, k: usize) -> Vec<Pt> {
    let mut out = Vec::new();
    for lead in 0..=k {
        let free = k - lead;
        let total = p.pow(free as u32);
        for mut idx in 0..total {
            let mut v = vec![0; k + 1];
            v[lead] = 1;
            for c in v.iter_mut().skip(lead + 1) {
                *c = idx % p;
                idx /= p;
            }
            out.push(v);
        }
    }
    out
}

fn projective_size(p: u64, k: usize) -> u64 {
    (0..=k as u32).map(|i| p.pow(i)).sum()
}

fn line_key(u: &[u64], v: &[u64], p: u64) -> Option<Pt> {
    let mut m = Vec::new();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            m.push((u[i] * v[j] % p + p - u[j] * v[i] % p) % p);
        }
    }
    normalize(&m, p)
}

fn line_points(u: &[u64], v: &[u64], p: u64) -> Vec<Pt> {
    let mut out = vec![normalize(u, p).expect("nonzero")];
    for a in 0..p {
        let w: Vec<u64> = u.iter().zip(v).map(|(x, y)| (a * x + y) % p).collect();
        out.push(normalize(&w, p).expect("independent"));
    }
    out
}

fn modulus_of(f: FieldSpec) -> Result<u64, OracleError> {
    let p = f.modulus().ok_or(OracleError::NotPrimeField(f))?;
    if p > MAX_PRIME {
        return Err(OracleError::PrimeTooLarge { p, max: MAX_PRIME });
    }
    Ok(p)
}

fn residues(v: &[FieldElem]) -> Pt {
    v.iter().map(|c| c.as_residue().expect("prime field")).collect()
}

fn point_of(p: &ProjPoint) -> Result<Pt, OracleError> {
    let f = p.field();
    let m = modulus_of(f)?;
    Ok(normalize(&residues(p.coords()), m).expect("nonzero point"))
}

fn format_pt(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("[{}]", parts.join(":"))
}

/// Rational points of a parametrized variety, each with its parameters.
#[derive(Debug, Clone)]
pub struct PointTable {
    pub p: u64,
    pub ambient: usize,
    points: Vec<Pt>,
    params: Vec<Vec<Pt>>,
    index: HashMap<Pt, usize>,
}

impl PointTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, pt: &ProjPoint) -> bool {
        point_of(pt).is_ok_and(|v| self.index.contains_key(&v))
    }

    /// Parameters mapping to the `i`-th point.
    pub fn params(&self, i: usize) -> &[Pt] {
        &self.params[i]
    }
}

/// Evaluates the parametrization at every point of `P^k(F_p)`, skipping
/// base points, and deduplicates the images.
pub fn enumerate_points(v: &ParamVariety, budget: u64) -> Result<PointTable, OracleError> {
    let f = v.field();
    let p = modulus_of(f)?;
    let needed = projective_size(p, v.source_dim());
    if needed > budget {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut table = PointTable {
        p,
        ambient: v.ambient(),
        points: Vec::new(),
        params: Vec::new(),
        index: HashMap::new(),
    };
    for a in projective_points(p, v.source_dim()) {
        let param: Vec<FieldElem> = a.iter().map(|c| f.from_i64(*c as i64)).collect();
        let Some(img) = normalize(&residues(&v.eval_vector(&param)), p) else {
            continue;
        };
        let i = *table.index.entry(img.clone()).or_insert_with(|| {
            table.points.push(img);
            table.params.push(Vec::new());
            table.points.len() - 1
        });
        table.params[i].push(a);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCensus {
    pub z: String,
    /// Rational join lines through `z`.
    pub b: usize,
    /// `Σ |L ∩ X| · |L ∩ Y|` over those lines.
    pub fiber: usize,
    pub s: usize,
    pub t: usize,
    /// `(|L ∩ X|, |L ∩ Y|)` per line, sorted.
    pub profiles: Vec<(usize, usize)>,
    /// `z` lies on `X` or `Y`.
    pub non_general: bool,
}

impl OracleCensus {
    /// The common profile, if all lines share one.
    pub fn profile(&self) -> Option<(usize, usize)> {
        let first = *self.profiles.first()?;
        self.profiles.iter().all(|p| *p == first).then_some(first)
    }
}

fn group_by_line(t: &PointTable, z: &[u64]) -> BTreeMap<Pt, Vec<usize>> {
    let mut out: BTreeMap<Pt, Vec<usize>> = BTreeMap::new();
    for (i, x) in t.points.iter().enumerate() {
        if let Some(k) = line_key(z, x, t.p) {
            out.entry(k).or_default().push(i);
        }
    }
    out
}

/// Join lines through `z` and the table points on each. A line counts
/// unless its only pair is a point paired with itself.
pub fn oracle_census(x: &PointTable, y: &PointTable, z: &ProjPoint) -> Result<OracleCensus, OracleError> {
    let zp = point_of(z)?;
    if zp.len() != x.ambient + 1 || x.p != y.p {
        return Err(OracleError::FieldMismatch(z.field(), z.field()));
    }
    let gx = group_by_line(x, &zp);
    let gy = group_by_line(y, &zp);
    let mut profiles = Vec::new();
    for (key, xs) in &gx {
        let Some(ys) = gy.get(key) else { continue };
        if xs.len() == 1 && ys.len() == 1 && x.points[xs[0]] == y.points[ys[0]] {
            continue;
        }
        profiles.push((xs.len(), ys.len()));
    }
    if profiles.is_empty() {
        return Err(OracleError::NoJoinLineThroughZ(format_pt(&zp)));
    }
    profiles.sort();
    Ok(OracleCensus {
        z: format_pt(&zp),
        b: profiles.len(),
        fiber: profiles.iter().map(|(a, b)| a * b).sum(),
        s: profiles.iter().map(|(a, _)| a).sum(),
        t: profiles.iter().map(|(_, b)| b).sum(),
        profiles,
        non_general: x.index.contains_key(&zp) || y.index.contains_key(&zp),
    })
}

/// A random rational point on a join line through two table points, off
/// both tables. `None` when `attempts` draws all fail.
pub fn random_join_point<R: Rng + ?Sized>(
    x: &PointTable,
    y: &PointTable,
    attempts: usize,
    rng: &mut R,
) -> Option<ProjPoint> {
    if x.is_empty() || y.is_empty() || x.p != y.p {
        return None;
    }
    let p = x.p;
    let f = FieldSpec::prime(p).ok()?;
    for _ in 0..attempts {
        let a = &x.points[rng.gen_range(0..x.len())];
        let b = &y.points[rng.gen_range(0..y.len())];
        let (u, v) = (rng.gen_range(1..p), rng.gen_range(1..p));
        let w: Vec<u64> = a.iter().zip(b).map(|(a, b)| (u * a + v * b) % p).collect();
        let Some(w) = normalize(&w, p) else { continue };
        if x.index.contains_key(&w) || y.index.contains_key(&w) {
            continue;
        }
        return ProjPoint::new(w.iter().map(|c| f.from_i64(*c as i64)).collect()).ok();
    }
    None
}

/// Rational points on rational join lines. For a self-join of curves the
/// tangent lines are added, as limits of secants.
pub fn join_union(inst: &JoinInstance, budget: u64) -> Result<HashSet<Pt>, OracleError> {
    let xt = enumerate_points(&inst.x, budget)?;
    let yt = enumerate_points(&inst.y, budget)?;
    let p = xt.p;
    let pairs = (xt.len() as u64) * (yt.len() as u64);
    if pairs > budget {
        return Err(OracleError::BudgetExceeded { needed: pairs, budget });
    }
    let mut lines: HashMap<Pt, (Pt, Pt)> = HashMap::new();
    for x in &xt.points {
        for y in &yt.points {
            if let Some(k) = line_key(x, y, p) {
                lines.entry(k).or_insert_with(|| (x.clone(), y.clone()));
            }
        }
    }
    if inst.same_variety() && inst.x.source_dim() == 1 {
        for (i, x) in xt.points.iter().enumerate() {
            let f = inst.field();
            let param: Vec<FieldElem> = xt.params[i][0].iter().map(|c| f.from_i64(*c as i64)).collect();
            let Ok(frame) = tangent_space(&inst.x, &param) else { continue };
            if frame.space.rank() != 2 {
                continue;
            }
            let other = frame
                .space
                .basis()
                .iter()
                .map(|b| residues(b))
                .find(|b| line_key(x, b, p).is_some())
                .expect("rank two");
            let k = line_key(x, &other, p).expect("independent");
            lines.entry(k).or_insert((x.clone(), other));
        }
    }
    let needed = lines.len() as u64 * (p + 1);
    if needed > budget {
        return Err(OracleError::BudgetExceeded { needed, budget });
    }
    let mut union = HashSet::new();
    for (u, v) in lines.values() {
        union.extend(line_points(u, v, p));
    }
    Ok(union)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleDimension {
    pub dim: i64,
    /// `(prime, points on join lines)`.
    pub counts: Vec<(u64, u64)>,
    /// Decided from one prime by the smallest projective space the count fits in.
    pub heuristic: bool,
}

/// Reduces a rational instance modulo `p`, rejecting primes that hit a
/// denominator or create a base point.
pub fn reduce_instance(inst: &JoinInstance, p: u64) -> Result<JoinInstance, OracleError> {
    let fail = |reason: String| OracleError::Reduction { p, reason };
    let r = inst.reduce_mod(p).map_err(|e| fail(e.to_string()))?;
    for v in [&r.x, &r.y] {
        if v.source_dim() == 1 && binary_divisor(v.forms()).is_none_or(|d| d.degree() > 0) {
            return Err(fail(format!("{} acquires a base point", v.label())));
        }
    }
    Ok(r)
}

/// Instance over `F_p`: reduced from `Q`, or checked to already be there.
pub fn instance_mod(inst: &JoinInstance, p: u64) -> Result<JoinInstance, OracleError> {
    let f = inst.field();
    match f.modulus() {
        None => reduce_instance(inst, p),
        Some(q) if q == p => Ok(inst.clone()),
        Some(_) => Err(OracleError::FieldMismatch(
            f,
            FieldSpec::prime(p).map_err(|e| OracleError::Reduction { p, reason: e.to_string() })?,
        )),
    }
}

/// Dimension of the join from point counts: a growth fit across primes
/// for rational instances, a single-prime estimate otherwise.
pub fn oracle_dimension(inst: &JoinInstance, config: &OracleConfig) -> Result<OracleDimension, OracleError> {
    if let Some(p) = inst.field().modulus() {
        let n = join_union(inst, config.budget)?.len() as u64;
        let dim = (0..=inst.ambient())
            .find(|e| n <= projective_size(p, *e))
            .unwrap_or(inst.ambient()) as i64;
        return Ok(OracleDimension {
            dim,
            counts: vec![(p, n)],
            heuristic: true,
        });
    }
    if config.primes.len() < 2 {
        return Err(OracleError::Inconclusive(Vec::new()));
    }
    let mut counts = Vec::new();
    for &p in &config.primes {
        let r = reduce_instance(inst, p)?;
        counts.push((p, join_union(&r, config.budget)?.len() as u64));
    }
    let fits: Vec<i64> = counts
        .windows(2)
        .map(|w| {
            let ((p1, n1), (p2, n2)) = (w[0], w[1]);
            ((n2 as f64 / n1 as f64).ln() / (p2 as f64 / p1 as f64).ln()).round() as i64
        })
        .collect();
    if fits.iter().any(|d| *d != fits[0]) {
        return Err(OracleError::Inconclusive(counts));
    }
    Ok(OracleDimension {
        dim: fits[0],
        counts,
        heuristic: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleDegree {
    pub degree: usize,
    pub trials: usize,
    pub shortcut: bool,
}

/// Largest number of rational join points on a random slice of
/// complementary dimension. Rational counts can only fall short of the
/// degree, so the maximum over trials approaches it from below.
pub fn oracle_degree_slice<R: Rng + ?Sized>(
    inst: &JoinInstance,
    dim_ej: i64,
    trials: usize,
    budget: u64,
    rng: &mut R,
) -> Result<OracleDegree, OracleError> {
    if trials == 0 {
        return Err(OracleError::ZeroTrials);
    }
    let n = inst.ambient();
    let p = modulus_of(inst.field())?;
    if dim_ej >= n as i64 {
        return Ok(OracleDegree {
            degree: 1,
            trials,
            shortcut: true,
        });
    }
    let union = join_union(inst, budget)?;
    let d = n - dim_ej.max(0) as usize;
    let per = projective_size(p, d);
    if per.saturating_mul(trials as u64) > budget {
        return Err(OracleError::BudgetExceeded {
            needed: per.saturating_mul(trials as u64),
            budget,
        });
    }
    let coeffs = projective_points(p, d);
    let mut best = 0;
    for _ in 0..trials {
        let s = random_subspace(inst.field(), n, dim_ej.max(0) as usize, rng)
            .expect("codimension at most n");
        let basis: Vec<Pt> = s.basis().iter().map(|b| residues(b)).collect();
        let count = coeffs
            .iter()
            .filter(|c| {
                let w: Vec<u64> = (0..=n)
                    .map(|j| c.iter().zip(&basis).map(|(a, b)| a * b[j] % p).sum::<u64>() % p)
                    .collect();
                normalize(&w, p).is_some_and(|w| union.contains(&w))
            })
            .count();
        best = best.max(count);
    }
    Ok(OracleDegree {
        degree: best,
        trials,
        shortcut: false,
    })
}
