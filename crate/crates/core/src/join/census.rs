use rand::Rng;
use serde::Serialize;

use super::lines::sample_join_line;
use super::{consensus_by, joined_profile, Generic, JoinError, JoinInstance, JoinLine, MAX_RESAMPLES};
use crate::bivar::{incidence_count, incidence_is_finite, BivarError, BivarSystem, Provenance};
use crate::field::{primitive_integer_vector, random_nonzero, random_scalar, FieldElem, FieldSpec};
use crate::linalg::Matrix;
use crate::poly::{binary_divisor, BiPoly, HomPoly, UniPoly};
use crate::proj::{LinearSubspace, ProjPoint};
use crate::variety::ParamVariety;

const CHART_BOX: i64 = 16;

/// Counts attached to the projection `π` over one general point of the
/// join, combined with the joined profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberCensus {
    pub m_x: usize,
    pub m_y: usize,
    /// Ordered parameter pairs `(s, t)` over the point.
    pub p: usize,
    /// Distinct `s`-values.
    pub s: usize,
    /// Distinct `t`-values.
    pub t: usize,
    /// Join lines through the point.
    pub b: usize,
    pub deg_beta: usize,
    pub deg_alpha_x: usize,
    pub deg_alpha_y: usize,
    pub deg_pi: usize,
    pub p_off: Option<usize>,
    pub p_diag: Option<usize>,
    pub certified: bool,
    pub z: Vec<ProjPoint>,
}

impl FiberCensus {
    /// The census forced by a profile and a line count.
    pub fn from_profile(m_x: usize, m_y: usize, b: usize) -> FiberCensus {
        FiberCensus {
            m_x,
            m_y,
            p: m_x * m_y * b,
            s: m_x * b,
            t: m_y * b,
            b,
            deg_beta: b,
            deg_alpha_x: m_x * b,
            deg_alpha_y: m_y * b,
            deg_pi: m_x * m_y * b,
            p_off: None,
            p_diag: None,
            certified: true,
            z: Vec::new(),
        }
    }

    /// Derives `b = S / m_X` and checks `T = m_Y b` and `P = m_X m_Y b`.
    pub fn from_counts(m_x: usize, m_y: usize, p: usize, s: usize, t: usize) -> Result<FiberCensus, JoinError> {
        if m_x == 0 || m_y == 0 {
            return Err(JoinError::CensusIdentity(format!("empty profile ({m_x}, {m_y})")));
        }
        if s % m_x != 0 {
            return Err(JoinError::NonIntegralRatio {
                what: format!("S / m_X = {s} / {m_x}"),
            });
        }
        let b = s / m_x;
        if b == 0 {
            return Err(JoinError::CensusIdentity("no join line through the point".into()));
        }
        if t != m_y * b {
            return Err(JoinError::CensusIdentity(format!("T = {t}, m_Y b = {}", m_y * b)));
        }
        if p != m_x * m_y * b {
            return Err(JoinError::CensusIdentity(format!("P = {p}, m_X m_Y b = {}", m_x * m_y * b)));
        }
        Ok(FiberCensus::from_profile(m_x, m_y, b))
    }

    pub fn identities_hold(&self) -> bool {
        self.b >= 1
            && self.p == self.m_x * self.m_y * self.b
            && self.s == self.m_x * self.b
            && self.t == self.m_y * self.b
    }
}

/// Exact counts over one point `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusResult {
    pub z: ProjPoint,
    pub p: usize,
    pub p_off: usize,
    pub p_diag: usize,
    pub s: usize,
    pub t: usize,
    pub certified: bool,
    pub shears: Vec<String>,
    pub chart_attempts: usize,
}

/// Generators of a pair incidence system in chart parameters `(s, t)`.
#[derive(Debug, Clone)]
pub struct CollinearityData {
    /// Rank-one conditions on `[A x(s) | A y(t)]`.
    pub i_gens: Vec<BiPoly>,
    /// `x(s) = y(t)`.
    pub j_gens: Vec<BiPoly>,
    pub chart_attempts: usize,
}

/// One side of a pair system restricted to a random affine chart.
struct Side {
    comps: Vec<UniPoly>,
    /// Image of the chart's missing parameter.
    at_inf: Option<Vec<FieldElem>>,
    point: bool,
}

fn random_chart<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Matrix {
    loop {
        let rows = (0..2)
            .map(|_| (0..2).map(|_| random_scalar(field, rng, CHART_BOX)).collect())
            .collect();
        let m = Matrix::new(field, 2, rows);
        if m.is_invertible() {
            return m;
        }
    }
}

fn chart_side<R: Rng + ?Sized>(v: &ParamVariety, rng: &mut R) -> Result<Side, JoinError> {
    match v.source_dim() {
        0 => Ok(Side {
            comps: v.chart_curve(&Matrix::identity(v.field(), 1))?,
            at_inf: None,
            point: true,
        }),
        1 => {
            let m = random_chart(v.field(), rng);
            let inf = v.eval_vector(&[m.get(0, 1).clone(), m.get(1, 1).clone()]);
            Ok(Side {
                comps: v.chart_curve(&m)?.iter().map(primitive_uni).collect(),
                at_inf: Some(inf),
                point: false,
            })
        }
        k => Err(JoinError::Precondition(format!(
            "exact pair systems need curves, got source dimension {k}"
        ))),
    }
}

fn primitive_uni(u: &UniPoly) -> UniPoly {
    UniPoly::new(u.field(), primitive_integer_vector(u.coeffs()))
}

fn apply_forms(a: &Matrix, comps: &[UniPoly]) -> Vec<UniPoly> {
    let f = a.field();
    a.rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(comps)
                .fold(UniPoly::zero(f), |acc, (c, u)| acc.add(&u.scale(c)))
        })
        .collect()
}

fn apply_vec(a: &Matrix, v: &[FieldElem]) -> Vec<FieldElem> {
    a.apply(v)
}

/// 2×2 minors `u_i w_j − u_j w_i`, with `u` in `s` and `w` in `t`.
fn cross_minors(u: &[UniPoly], w: &[UniPoly]) -> Vec<BiPoly> {
    let mut out = Vec::new();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let a = BiPoly::from_uni_s(&u[i]).mul(&BiPoly::from_uni_t(&w[j]));
            let b = BiPoly::from_uni_s(&u[j]).mul(&BiPoly::from_uni_t(&w[i]));
            let m = a.sub(&b);
            if !m.is_zero() {
                out.push(m);
            }
        }
    }
    out
}

/// Minors `c_i w_j − c_j w_i` for a constant vector `c`.
fn const_minors(c: &[FieldElem], w: &[UniPoly]) -> Vec<UniPoly> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let m = w[j].scale(&c[i]).sub(&w[i].scale(&c[j]));
            if !m.is_zero() {
                out.push(m);
            }
        }
    }
    out
}

fn gcd_list(polys: &[UniPoly]) -> Result<Option<UniPoly>, JoinError> {
    let mut g: Option<UniPoly> = None;
    for p in polys {
        g = Some(match g {
            None => p.monic(),
            Some(g) => g.gcd(p).map_err(BivarError::from)?,
        });
    }
    Ok(g)
}

fn proportional(a: &[FieldElem], b: &[FieldElem]) -> bool {
    let f = a[0].field();
    crate::linalg::rank_of(f, a.len(), &[a.to_vec(), b.to_vec()]) <= 1
}

/// True when the chart point at infinity of `this` could pair with some
/// point of `other` in the system, so the affine chart might lose a
/// solution. Pairs where the two points coincide are ignored.
fn loses_solution(a: &Matrix, this: &Side, other: &Side) -> Result<bool, JoinError> {
    let Some(xi) = &this.at_inf else {
        return Ok(false);
    };
    let ai = apply_vec(a, xi);
    if ai.iter().all(|c| c.is_zero()) {
        return Ok(true);
    }
    let bw = apply_forms(a, &other.comps);
    if other.point {
        let b: Vec<FieldElem> = bw.iter().map(|u| u.coeff(0)).collect();
        let y: Vec<FieldElem> = other.comps.iter().map(|u| u.coeff(0)).collect();
        return Ok(proportional(&ai, &b) && !proportional(xi, &y));
    }
    let hits = const_minors(&ai, &bw);
    let Some(g) = gcd_list(&hits)? else {
        return Ok(true);
    };
    let g = g.squarefree_part().map_err(BivarError::from)?;
    let same = gcd_list(&const_minors(xi, &other.comps))?;
    let rest = match same {
        Some(h) => g.div_exact(&g.gcd(&h).map_err(BivarError::from)?).map_err(BivarError::from)?,
        None => UniPoly::one(g.field()),
    };
    if !rest.is_constant() {
        return Ok(true);
    }
    if let Some(yi) = &other.at_inf {
        let bi = apply_vec(a, yi);
        if proportional(&ai, &bi) && !proportional(xi, yi) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Pair system for "the vectors `A x(s)` and `A y(t)` are dependent", where
/// the rows of `A` are linear forms. Charts are redrawn until neither
/// point at infinity can carry a solution.
pub(crate) fn pair_system<R: Rng + ?Sized>(
    inst: &JoinInstance,
    a: &Matrix,
    rng: &mut R,
) -> Result<CollinearityData, JoinError> {
    pair_system_guarded(inst, a, true, rng)
}

/// `guard = false` skips the chart check; only fit for questions that no
/// single lost solution can change.
pub(crate) fn pair_system_guarded<R: Rng + ?Sized>(
    inst: &JoinInstance,
    a: &Matrix,
    guard: bool,
    rng: &mut R,
) -> Result<CollinearityData, JoinError> {
    let field = inst.field();
    let a = &Matrix::new(field, a.ncols(), a.rows().iter().map(|r| primitive_integer_vector(r)).collect());
    for attempt in 1..=MAX_RESAMPLES {
        let xs = chart_side(&inst.x, rng)?;
        let ys = chart_side(&inst.y, rng)?;
        if guard && (loses_solution(a, &xs, &ys)? || loses_solution(a, &ys, &xs)?) {
            continue;
        }
        let prim = |v: Vec<BiPoly>| v.iter().map(BiPoly::primitive).collect::<Vec<_>>();
        let mut i_gens = prim(cross_minors(&apply_forms(a, &xs.comps), &apply_forms(a, &ys.comps)));
        let mut j_gens = prim(cross_minors(&xs.comps, &ys.comps));
        for (side, dummy) in [(&xs, BiPoly::s(field)), (&ys, BiPoly::t(field))] {
            if side.point {
                i_gens.push(dummy.clone());
                j_gens.push(dummy);
            }
        }
        return Ok(CollinearityData {
            i_gens,
            j_gens,
            chart_attempts: attempt,
        });
    }
    Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
}

/// Projection from `z` as a matrix of linear forms vanishing at `z`.
fn projection_from(z: &ProjPoint) -> Matrix {
    let eqs = LinearSubspace::point(z).equations();
    Matrix::new(z.field(), z.ambient() + 1, eqs)
}

/// Collinearity data for `x(s), y(t), z` in random charts.
pub fn collinearity_data<R: Rng + ?Sized>(
    inst: &JoinInstance,
    z: &ProjPoint,
    rng: &mut R,
) -> Result<CollinearityData, JoinError> {
    if z.ambient() != inst.ambient() {
        return Err(JoinError::AmbientMismatch(inst.ambient(), z.ambient()));
    }
    pair_system(inst, &projection_from(z), rng)
}

pub fn collinearity_system<R: Rng + ?Sized>(
    inst: &JoinInstance,
    z: &ProjPoint,
    rng: &mut R,
) -> Result<BivarSystem, JoinError> {
    let d = collinearity_data(inst, z, rng)?;
    Ok(BivarSystem::new(d.i_gens, Provenance::Collinearity)?)
}

/// Whether `z` lies on a point or curve variety.
pub fn lies_on(v: &ParamVariety, z: &ProjPoint) -> bool {
    match v.source_dim() {
        0 => v.eval(&[v.field().one()]).is_some_and(|p| p == *z),
        1 => {
            let c = z.coords();
            let f = v.forms();
            let mut minors: Vec<HomPoly> = Vec::new();
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    minors.push(f[j].scale(&c[i]).sub(&f[i].scale(&c[j])));
                }
            }
            binary_divisor(&minors).map_or(true, |d| d.degree() > 0)
        }
        _ => false,
    }
}

/// Whether only finitely many pairs are collinear with `z`.
pub(crate) fn finite_fiber_at<R: Rng + ?Sized>(inst: &JoinInstance, z: &ProjPoint, rng: &mut R) -> Result<bool, JoinError> {
    let data = pair_system_guarded(inst, &projection_from(z), false, rng)?;
    Ok(incidence_is_finite(&data.i_gens, &data.j_gens)?)
}

/// Exact census over a given point.
pub fn census_at<R: Rng + ?Sized>(inst: &JoinInstance, z: &ProjPoint, rng: &mut R) -> Result<CensusResult, JoinError> {
    for (v, name) in [(&inst.x, "X"), (&inst.y, "Y")] {
        if lies_on(v, z) {
            return Err(JoinError::Precondition(format!("{z} lies on {name}")));
        }
    }
    let data = collinearity_data(inst, z, rng)?;
    let ic = match incidence_count(&data.i_gens, &data.j_gens, Provenance::Collinearity, rng) {
        Err(BivarError::PositiveDimensional) => {
            // infinitely many pairs over z: the fibres of the join are positive-dimensional
            let expected = inst.expected_dim();
            return Err(JoinError::JoinDefective {
                dim: expected - 1,
                expected,
            });
        }
        r => r?,
    };
    Ok(CensusResult {
        z: z.clone(),
        p: ic.p,
        p_off: ic.p_off,
        p_diag: ic.p_diag,
        s: ic.s,
        t: ic.t,
        certified: ic.certified,
        shears: ic.shears,
        chart_attempts: data.chart_attempts,
    })
}

/// A random point on a certified join line, off both varieties.
pub(crate) fn sample_general_z<R: Rng + ?Sized>(
    inst: &JoinInstance,
    rng: &mut R,
) -> Result<(JoinLine, ProjPoint), JoinError> {
    let f = inst.field();
    for _ in 0..MAX_RESAMPLES {
        let l = sample_join_line(inst, rng)?;
        let (a, b) = (random_nonzero(f, rng, CHART_BOX), random_nonzero(f, rng, CHART_BOX));
        let v: Vec<FieldElem> = l
            .x
            .coords()
            .iter()
            .zip(l.y.coords())
            .map(|(x, y)| &(&a * x) + &(&b * y))
            .collect();
        let Ok(z) = ProjPoint::new(v) else { continue };
        if !lies_on(&inst.x, &z) && !lies_on(&inst.y, &z) {
            return Ok((l, z));
        }
    }
    Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
}

/// Fibre census, first deciding the dimension of the join.
pub fn fiber_census<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<FiberCensus, JoinError> {
    let dim = super::ej_dimension(inst, rng)?.dim;
    fiber_census_with_dim(inst, dim, rng)
}

/// Fibre census given the dimension of the join.
pub fn fiber_census_with_dim<R: Rng + ?Sized>(
    inst: &JoinInstance,
    dim: i64,
    rng: &mut R,
) -> Result<FiberCensus, JoinError> {
    let expected = inst.expected_dim();
    if dim < expected {
        return Err(JoinError::JoinDefective { dim, expected });
    }
    if !inst.curves_only() {
        return Err(JoinError::Precondition("exact census needs curves or points".into()));
    }
    let (m_x, m_y) = joined_profile(inst, rng)?;
    let mut seen: Vec<CensusResult> = Vec::new();
    let (p, s, t) = consensus_by(
        "census (P, S, T)",
        inst.trials,
        rng,
        Generic::Min,
        |&(p, s, t)| vec![p as i64, s as i64, t as i64],
        |r| {
            let (_, z) = sample_general_z(inst, r)?;
            let c = census_at(inst, &z, r)?;
            let key = (c.p, c.s, c.t);
            seen.push(c);
            Ok(key)
        },
    )?;
    let mut out = FiberCensus::from_counts(m_x, m_y, p, s, t)?;
    let agreeing: Vec<&CensusResult> = seen.iter().filter(|c| (c.p, c.s, c.t) == (p, s, t)).collect();
    out.p_off = Some(agreeing[0].p_off);
    out.p_diag = Some(agreeing[0].p_diag);
    out.certified = agreeing.iter().all(|c| c.certified);
    out.z = agreeing.iter().map(|c| c.z.clone()).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn inst(k: (usize, usize), x: &[&str], y: &[&str], f: FieldSpec) -> JoinInstance {
        JoinInstance::new(
            ParamVariety::parse("X", k.0, x, f).unwrap(),
            ParamVariety::parse("Y", k.1, y, f).unwrap(),
            5,
            3,
        )
        .unwrap()
    }

    #[test]
    fn combiner_arithmetic() {
        let c = FiberCensus::from_profile(3, 2, 2);
        assert_eq!((c.deg_alpha_x, c.deg_alpha_y, c.deg_beta, c.deg_pi), (6, 4, 2, 12));
        assert!(c.identities_hold());
        assert_eq!(FiberCensus::from_counts(3, 2, 12, 6, 4).unwrap(), c);
        assert!(matches!(
            FiberCensus::from_counts(2, 2, 4, 3, 2),
            Err(JoinError::NonIntegralRatio { .. })
        ));
        assert!(matches!(
            FiberCensus::from_counts(2, 2, 5, 2, 2),
            Err(JoinError::CensusIdentity(_))
        ));
    }

    #[test]
    fn skew_lines_and_cubic() {
        let q = FieldSpec::rationals();
        let mut rng = rng_from(3);
        let skew = inst((1, 1), &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"], q);
        let c = fiber_census_with_dim(&skew, 3, &mut rng).unwrap();
        assert_eq!((c.p, c.s, c.t, c.b), (1, 1, 1, 1));
        let cu = ["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"];
        let cubic = inst((1, 1), &cu, &cu, q);
        let c = fiber_census_with_dim(&cubic, 3, &mut rng).unwrap();
        assert_eq!((c.m_x, c.m_y, c.p, c.s, c.t, c.b), (2, 2, 4, 2, 2, 1));
        assert_eq!((c.p_off, c.p_diag), (Some(2), Some(2)));
    }

    #[test]
    fn cubic_mod_31_and_cone() {
        let f = FieldSpec::prime(31).unwrap();
        let mut rng = rng_from(4);
        let cu = ["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"];
        let cubic = inst((1, 1), &cu, &cu, f);
        let c = fiber_census_with_dim(&cubic, 3, &mut rng).unwrap();
        assert_eq!((c.p, c.s, c.t, c.b), (4, 2, 2, 1));
        // cone over a plane conic with an external vertex
        let q = FieldSpec::rationals();
        let cone = inst((0, 1), &["0", "0", "0", "1"], &["s0^2", "s0*s1", "s1^2", "0"], q);
        let c = fiber_census_with_dim(&cone, 2, &mut rng).unwrap();
        assert_eq!((c.m_x, c.m_y, c.p, c.b), (1, 1, 1, 1));
    }

    #[test]
    fn defective_conic_in_char_two() {
        let f = FieldSpec::prime(2).unwrap();
        let mut rng = rng_from(5);
        let c = ["s0^2", "s0*s1", "s1^2"];
        let conic = inst((1, 1), &c, &c, f);
        let z = ProjPoint::from_i64s(f, &[1, 1, 0]).unwrap();
        assert!(matches!(census_at(&conic, &z, &mut rng), Err(JoinError::JoinDefective { .. })));
    }
}
