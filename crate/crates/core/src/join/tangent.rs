use rand::Rng;
use serde::Serialize;

use super::census::finite_fiber_at;
use super::census::sample_general_z;
use super::lines::sample_smooth;
use super::{consensus, Generic, JoinError, JoinInstance, MAX_RESAMPLES};
use std::collections::HashSet;

use crate::field::{random_element_in, FieldElem, FieldSpec};
use crate::linalg::rank_of;
use crate::oracle::{oracle_dimension, OracleError};
use crate::proj::{intersect, span_of, LinearSubspace};
use crate::variety::{tangent_space, ParamVariety};

const STRANGE_BATCH: usize = 25;
const STRANGE_VERIFY: usize = 50;
const STRANGE_MAX_BATCHES: usize = 8;
const LAMBDA_BOX: i64 = 40;
pub const DEFAULT_W_POINTS: usize = 25;

fn tangent_at(v: &ParamVariety, param: &[FieldElem]) -> Result<LinearSubspace, JoinError> {
    Ok(tangent_space(v, param)?.space)
}

/// Span of the tangent spaces at `x(xp)` and `y(yp)`, with its dimension.
pub fn terracini_span(
    inst: &JoinInstance,
    xp: &[FieldElem],
    yp: &[FieldElem],
) -> Result<(LinearSubspace, i64), JoinError> {
    let s = span_of(&[tangent_at(&inst.x, xp)?, tangent_at(&inst.y, yp)?])?;
    let d = s.dim();
    Ok((s, d))
}

/// Smooth `x ∈ X`, `y ∈ Y` with `x ≠ y`.
fn sample_pair<R: Rng + ?Sized>(
    inst: &JoinInstance,
    rng: &mut R,
) -> Result<(Vec<FieldElem>, Vec<FieldElem>), JoinError> {
    for _ in 0..MAX_RESAMPLES {
        let (xp, x) = sample_smooth(&inst.x, rng)?;
        let (yp, y) = sample_smooth(&inst.y, rng)?;
        if x != y {
            return Ok((xp, yp));
        }
    }
    Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
}

fn random_terracini<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<i64, JoinError> {
    let (xp, yp) = sample_pair(inst, rng)?;
    Ok(terracini_span(inst, &xp, &yp)?.1)
}

/// Generic `dim(T_X,x ∩ T_Y,y)`, −1 when empty.
pub fn t_invariant<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<i64, JoinError> {
    let t = consensus("t(X,Y)", inst.trials, rng, Generic::Min, |r| {
        let (xp, yp) = sample_pair(inst, r)?;
        Ok(intersect(&tangent_at(&inst.x, &xp)?, &tangent_at(&inst.y, &yp)?)?.dim())
    })?;
    let bound = inst.x.source_dim().min(inst.y.source_dim()) as i64;
    if t > bound {
        return Err(JoinError::CheckFailure(format!("t = {t} exceeds min(dim X, dim Y) = {bound}")));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrangeResult {
    pub is_strange: bool,
    pub subspace: Option<LinearSubspace>,
    /// Points sampled on each side before the answer settled.
    pub sampled: usize,
    /// Fresh points per side the answer was verified on.
    pub verified: usize,
}

fn fold_tangents<R: Rng + ?Sized>(
    inst: &JoinInstance,
    mut acc: LinearSubspace,
    count: usize,
    rng: &mut R,
) -> Result<LinearSubspace, JoinError> {
    for _ in 0..count {
        for v in [&inst.x, &inst.y] {
            if acc.is_empty() {
                return Ok(acc);
            }
            let (p, _) = sample_smooth(v, rng)?;
            acc = intersect(&acc, &tangent_at(v, &p)?)?;
        }
    }
    Ok(acc)
}

/// Whether every tangent space of `X` and of `Y` contains one common
/// linear space. A positive answer is certified only on the sampled
/// points.
pub fn strange_pair_test<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<StrangeResult, JoinError> {
    let f = inst.field();
    let n = inst.ambient();
    let mut acc = LinearSubspace::whole(f, n);
    let mut stable = 0;
    let mut sampled = 0;
    for _ in 0..STRANGE_MAX_BATCHES {
        let next = fold_tangents(inst, acc.clone(), STRANGE_BATCH, rng)?;
        sampled += STRANGE_BATCH;
        if next.is_empty() {
            return Ok(StrangeResult {
                is_strange: false,
                subspace: None,
                sampled,
                verified: 0,
            });
        }
        stable = if next == acc { stable + 1 } else { 0 };
        acc = next;
        if stable >= 2 {
            let check = fold_tangents(inst, acc.clone(), STRANGE_VERIFY, rng)?;
            if check == acc {
                return Ok(StrangeResult {
                    is_strange: true,
                    subspace: Some(acc),
                    sampled,
                    verified: STRANGE_VERIFY,
                });
            }
            acc = check;
            stable = 0;
        }
    }
    Ok(StrangeResult {
        is_strange: !acc.is_empty(),
        subspace: (!acc.is_empty()).then_some(acc),
        sampled,
        verified: 0,
    })
}

/// The constrained-pair inequality `dim EJ > dim X + dim Y − t`.
pub fn constrained_pair(dim_ej: i64, dim_x: usize, dim_y: usize, t: i64) -> bool {
    dim_ej > dim_x as i64 + dim_y as i64 - t
}

pub fn constrained_pair_test<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<bool, JoinError> {
    let dim = ej_dimension(inst, rng)?.dim;
    let t = t_invariant(inst, rng)?;
    Ok(constrained_pair(dim, inst.x.source_dim(), inst.y.source_dim(), t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimMethod {
    Terracini,
    Oracle,
    /// Finite versus infinite fibre of the pair system over a general point.
    FiberDimension,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EjDimension {
    pub dim: i64,
    pub method: DimMethod,
    /// Generic Terracini span dimension; a lower bound in positive characteristic.
    pub terracini: i64,
    pub oracle: Option<i64>,
    /// `(prime, rational points on join lines)`.
    pub oracle_counts: Vec<(u64, u64)>,
    /// Single-prime estimate, not a growth fit.
    pub heuristic: bool,
    pub fiber: Option<i64>,
}

fn fiber_dimension<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<i64, JoinError> {
    let expected = inst.expected_dim();
    consensus("fibre dimension", inst.trials, rng, Generic::Max, |r| {
        let (_, z) = sample_general_z(inst, r)?;
        Ok(if finite_fiber_at(inst, &z, r)? { expected } else { expected - 1 })
    })
}

/// Dimension of the embedded join. Over `Q` the generic Terracini span
/// decides; over `F_p` the brute-force union count does, with the fibre
/// dimension of the pair system as a cross-check and fallback.
pub fn ej_dimension<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<EjDimension, JoinError> {
    let terracini = consensus("Terracini span", inst.trials, rng, Generic::Max, |r| random_terracini(inst, r))?;
    if inst.field().is_rationals() {
        return Ok(EjDimension {
            dim: terracini,
            method: DimMethod::Terracini,
            terracini,
            oracle: None,
            oracle_counts: Vec::new(),
            heuristic: false,
            fiber: None,
        });
    }
    let fiber = if inst.curves_only() {
        Some(fiber_dimension(inst, rng)?)
    } else {
        None
    };
    match oracle_dimension(inst, &inst.oracle) {
        Ok(o) => Ok(EjDimension {
            dim: o.dim,
            method: DimMethod::Oracle,
            terracini,
            oracle: Some(o.dim),
            oracle_counts: o.counts,
            heuristic: o.heuristic,
            fiber,
        }),
        Err(OracleError::BudgetExceeded { .. }) if fiber.is_some() => Ok(EjDimension {
            dim: fiber.expect("checked"),
            method: DimMethod::FiberDimension,
            terracini,
            oracle: None,
            oracle_counts: Vec::new(),
            heuristic: false,
            fiber,
        }),
        Err(e) => Err(e.into()),
    }
}

/// A point of the open segment: `λ ∉ {0, 1}`. `F_2` has none.
fn random_lambda<R: Rng + ?Sized>(f: FieldSpec, rng: &mut R) -> Result<FieldElem, JoinError> {
    let avoid = HashSet::from([f.zero(), f.one()]);
    random_element_in(f, rng, &avoid, LAMBDA_BOX)
        .map_err(|_| JoinError::Precondition(format!("{f} has no λ outside {{0, 1}}")))
}

fn lin(a: &FieldElem, u: &[FieldElem], b: &FieldElem, v: &[FieldElem]) -> Vec<FieldElem> {
    u.iter().zip(v).map(|(x, y)| &(a * x) + &(b * y)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub terracini_rank: usize,
    pub ej_rank: usize,
    pub stacked_rank: usize,
    pub holds: bool,
}

/// Rows of the local join map `(s, t, λ) ↦ λx(s) + (1−λ)y(t)`.
fn ej_rows(inst: &JoinInstance, xp: &[FieldElem], yp: &[FieldElem], lambda: &FieldElem) -> Vec<Vec<FieldElem>> {
    let f = inst.field();
    let mu = &f.one() - lambda;
    let tx = inst.x.tangent_rows(xp);
    let ty = inst.y.tangent_rows(yp);
    let (x, y) = (&tx[0], &ty[0]);
    let mut rows = vec![lin(lambda, x, &mu, y), lin(&f.one(), x, &(-f.one()), y)];
    rows.extend(tx[1..].iter().map(|r| r.iter().map(|c| lambda * c).collect()));
    rows.extend(ty[1..].iter().map(|r| r.iter().map(|c| &mu * c).collect()));
    rows
}

/// Stacked-rank test: the Terracini span lies in the row space of the
/// local join map at the parameter `λ`.
pub fn terracini_inclusion(
    inst: &JoinInstance,
    xp: &[FieldElem],
    yp: &[FieldElem],
    lambda: &FieldElem,
) -> Result<InclusionReport, JoinError> {
    let f = inst.field();
    let cols = inst.ambient() + 1;
    let mut ter = inst.x.tangent_rows(xp);
    ter.extend(inst.y.tangent_rows(yp));
    let ej = ej_rows(inst, xp, yp, lambda);
    let mut stacked = ej.clone();
    stacked.extend(ter.iter().cloned());
    let (terracini_rank, ej_rank, stacked_rank) =
        (rank_of(f, cols, &ter), rank_of(f, cols, &ej), rank_of(f, cols, &stacked));
    Ok(InclusionReport {
        terracini_rank,
        ej_rank,
        stacked_rank,
        holds: stacked_rank == ej_rank,
    })
}

/// Runs the inclusion test at `count` random configurations; returns the
/// number of failures.
pub fn terracini_inclusion_trials<R: Rng + ?Sized>(
    inst: &JoinInstance,
    count: usize,
    rng: &mut R,
) -> Result<usize, JoinError> {
    let mut failures = 0;
    for _ in 0..count {
        let (xp, yp) = sample_pair(inst, rng)?;
        let l = random_lambda(inst.field(), rng)?;
        if !terracini_inclusion(inst, &xp, &yp, &l)?.holds {
            failures += 1;
        }
    }
    Ok(failures)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WCheckSide {
    pub points: usize,
    pub rank: usize,
    pub expected_rank: usize,
    pub first_projection: bool,
    pub slice_over_x: bool,
    pub slice_over_z: bool,
    /// Second reading of the duplicated item: second projection equals the
    /// Terracini span. Reported, not asserted.
    pub second_projection_is_terracini: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WCheckReport {
    pub x_side: WCheckSide,
    pub y_side: WCheckSide,
}

fn pair_vec(a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    a.iter().chain(b).cloned().collect()
}

fn factor(s: &LinearSubspace, first: bool, n: usize) -> LinearSubspace {
    let rows: Vec<Vec<FieldElem>> = s
        .basis()
        .iter()
        .map(|v| if first { v[..=n].to_vec() } else { v[n + 1..].to_vec() })
        .collect();
    LinearSubspace::from_vectors(s.field(), n, &rows)
}

fn w_side<R: Rng + ?Sized>(inst: &JoinInstance, points: usize, rng: &mut R) -> Result<WCheckSide, JoinError> {
    let f = inst.field();
    let n = inst.ambient();
    let zero = vec![f.zero(); n + 1];
    let expected_rank = inst.x.source_dim() + inst.y.source_dim() + 3;
    let mut side = WCheckSide {
        points,
        rank: 0,
        expected_rank,
        first_projection: true,
        slice_over_x: true,
        slice_over_z: true,
        second_projection_is_terracini: true,
    };
    for i in 0..points {
        // a point of the good open set: x off the tangent space at y
        let mut found = None;
        for _ in 0..MAX_RESAMPLES {
            let (xp, x) = sample_smooth(&inst.x, rng)?;
            let (yp, y) = sample_smooth(&inst.y, rng)?;
            let ty = tangent_at(&inst.y, &yp)?;
            if x != y && !ty.contains_point(&x) {
                found = Some((xp, yp, ty));
                break;
            }
        }
        let (xp, yp, ty) = found.ok_or(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))?;
        let tx = tangent_at(&inst.x, &xp)?;
        let l = random_lambda(f, rng)?;
        let mu = &f.one() - &l;
        let rx = inst.x.tangent_rows(&xp);
        let ry = inst.y.tangent_rows(&yp);
        let (x, y) = (&rx[0], &ry[0]);
        let z = lin(&l, x, &mu, y);
        let mut rows = vec![
            pair_vec(x, &zero),
            pair_vec(&zero, &z),
            pair_vec(&zero, &lin(&f.one(), x, &(-f.one()), y)),
        ];
        rows.extend(rx[1..].iter().map(|d| pair_vec(d, &d.iter().map(|c| &l * c).collect::<Vec<_>>())));
        rows.extend(ry[1..].iter().map(|d| pair_vec(&zero, &d.iter().map(|c| &mu * c).collect::<Vec<_>>())));
        let tw = LinearSubspace::from_vectors(f, 2 * n + 1, &rows);
        side.rank = tw.rank();
        let fail = |what: &str| JoinError::CheckFailure(format!("{what} at sample {i}"));
        if tw.rank() != expected_rank {
            return Err(fail(&format!("tangent rank {} != {expected_rank}", tw.rank())));
        }
        if factor(&tw, true, n) != tx {
            return Err(fail("first projection differs from the tangent space of X"));
        }
        let mut over_x = vec![pair_vec(x, &zero)];
        over_x.extend((0..=n).map(|j| {
            let mut e = zero.clone();
            e[j] = f.one();
            pair_vec(&zero, &e)
        }));
        let cut = intersect(&tw, &LinearSubspace::from_vectors(f, 2 * n + 1, &over_x))?;
        let want = span_of(&[ty.clone(), LinearSubspace::from_vectors(f, n, &[x.clone()])])?;
        if factor(&cut, false, n) != want {
            return Err(fail("slice over x differs from span(T_Y, x)"));
        }
        let mut over_z = vec![pair_vec(&zero, &z)];
        over_z.extend((0..=n).map(|j| {
            let mut e = zero.clone();
            e[j] = f.one();
            pair_vec(&e, &zero)
        }));
        let cut = intersect(&tw, &LinearSubspace::from_vectors(f, 2 * n + 1, &over_z))?;
        let want = span_of(&[intersect(&tx, &ty)?, LinearSubspace::from_vectors(f, n, &[x.clone()])])?;
        if factor(&cut, true, n) != want {
            return Err(fail("slice over z differs from span(T_X ∩ T_Y, x)"));
        }
        let ter = span_of(&[tx, ty])?;
        side.second_projection_is_terracini &= factor(&tw, false, n) == ter;
    }
    Ok(side)
}

/// Tangent-space checks on the incidence `{(x, z) : z on a join line
/// through x}`, parametrized by `(s, t, λ) ↦ (x(s), λx(s) + (1−λ)y(t))`,
/// for both orderings of the pair.
pub fn w_tangent_checks<R: Rng + ?Sized>(
    inst: &JoinInstance,
    points: usize,
    rng: &mut R,
) -> Result<WCheckReport, JoinError> {
    if !inst.field().is_rationals() {
        return Err(JoinError::Precondition("tangent checks run in characteristic 0".into()));
    }
    Ok(WCheckReport {
        x_side: w_side(inst, points, rng)?,
        y_side: w_side(&inst.swapped(), points, rng)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::proj::ProjPoint;
    use crate::seed::rng_from;

    fn inst(x: &[&str], y: &[&str], f: FieldSpec) -> JoinInstance {
        JoinInstance::new(
            ParamVariety::parse("X", 1, x, f).unwrap(),
            ParamVariety::parse("Y", 1, y, f).unwrap(),
            2,
            3,
        )
        .unwrap()
    }

    const CUBIC: [&str; 4] = ["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"];
    const CONIC: [&str; 3] = ["s0^2", "s0*s1", "s1^2"];

    #[test]
    fn skew_lines_and_cubic_over_q() {
        let q = FieldSpec::rationals();
        let mut rng = rng_from(7);
        let skew = inst(&["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"], q);
        assert_eq!(t_invariant(&skew, &mut rng).unwrap(), -1);
        let d = ej_dimension(&skew, &mut rng).unwrap();
        assert_eq!((d.dim, d.method), (3, DimMethod::Terracini));
        assert!(!strange_pair_test(&skew, &mut rng).unwrap().is_strange);
        assert!(!constrained_pair_test(&skew, &mut rng).unwrap());
        let w = w_tangent_checks(&skew, 5, &mut rng).unwrap();
        assert!(w.x_side.slice_over_z && w.y_side.slice_over_x);

        let cubic = inst(&CUBIC, &CUBIC, q);
        assert_eq!(t_invariant(&cubic, &mut rng).unwrap(), -1);
        assert_eq!(ej_dimension(&cubic, &mut rng).unwrap().dim, 3);
        assert!(!strange_pair_test(&cubic, &mut rng).unwrap().is_strange);
        assert_eq!(terracini_inclusion_trials(&cubic, 20, &mut rng).unwrap(), 0);
        w_tangent_checks(&cubic, 5, &mut rng).unwrap();
    }

    #[test]
    fn char_two_conic() {
        let f = FieldSpec::prime(2).unwrap();
        let mut rng = rng_from(8);
        let c = inst(&CONIC, &CONIC, f);
        let s = strange_pair_test(&c, &mut rng).unwrap();
        assert!(s.is_strange);
        assert_eq!(s.subspace.unwrap().as_point().unwrap(), ProjPoint::from_i64s(f, &[0, 1, 0]).unwrap());
        assert_eq!(t_invariant(&c, &mut rng).unwrap(), 0);
        let d = ej_dimension(&c, &mut rng).unwrap();
        assert_eq!((d.dim, d.terracini, d.fiber), (2, 2, Some(2)));
        assert!(!constrained_pair(d.dim, 1, 1, 0));
        let xp = [f.one(), f.zero()];
        let yp = [f.zero(), f.one()];
        assert_eq!(terracini_span(&c, &xp, &yp).unwrap().1, 2);
    }

    #[test]
    fn char_five_constrained_curve() {
        let f = FieldSpec::prime(5).unwrap();
        let mut rng = rng_from(9);
        let v = ["s0^10", "s0^9*s1", "s0^5*s1^5", "s1^10"];
        let c = inst(&v, &v, f);
        let d = ej_dimension(&c, &mut rng).unwrap();
        assert_eq!((d.terracini, d.dim, d.method), (2, 3, DimMethod::Oracle));
        let t = t_invariant(&c, &mut rng).unwrap();
        assert_eq!(t, 0);
        assert!(constrained_pair(d.dim, 1, 1, t));
    }
}
