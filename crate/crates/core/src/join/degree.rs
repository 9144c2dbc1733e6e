use rand::Rng;
use serde::Serialize;

use super::census::pair_system;
use super::lines::sample_smooth;
use super::{consensus, Generic, JoinError, JoinInstance, MAX_RESAMPLES};
use crate::bivar::{incidence_count, BivarError, Provenance};
use crate::field::FieldElem;
use crate::linalg::{rank_of, Matrix};
use crate::proj::{random_subspace, LinearSubspace, ProjPoint};
use crate::variety::{plane_section_count, sample_point, VarietyError};

/// `a·[x, 0] + b·[0, y]` in `P^{2n+1}`.
pub fn ruled_join_point(
    inst: &JoinInstance,
    xp: &[FieldElem],
    yp: &[FieldElem],
    a: &FieldElem,
    b: &FieldElem,
) -> Result<ProjPoint, JoinError> {
    if a.is_zero() && b.is_zero() {
        return Err(JoinError::ZeroWeights);
    }
    let x = inst.x.eval_vector(xp);
    let y = inst.y.eval_vector(yp);
    let v: Vec<FieldElem> = x.iter().map(|c| a * c).chain(y.iter().map(|c| b * c)).collect();
    Ok(ProjPoint::new(v)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeResult {
    pub degree: usize,
    pub dim_ej: i64,
    /// The join fills the ambient space.
    pub shortcut: bool,
    /// Pairs `(s, t)` whose join line meets the slice.
    pub slice_p: Option<usize>,
    pub slice_p_off: Option<usize>,
    pub deg_pi: usize,
    pub certified: bool,
}

/// Degree of the embedded join of two curves, from the pairs whose line
/// meets a random codimension-3 slice, divided by `deg π`.
///
/// `census_p_off` is the off-diagonal pair count over a general point; when
/// given, the off-diagonal ratio must give the same degree.
pub fn degree_ej<R: Rng + ?Sized>(
    inst: &JoinInstance,
    dim_ej: i64,
    deg_pi: usize,
    census_p_off: Option<usize>,
    rng: &mut R,
) -> Result<DegreeResult, JoinError> {
    let n = inst.ambient() as i64;
    let expected = inst.expected_dim();
    if dim_ej < expected {
        return Err(JoinError::JoinDefective { dim: dim_ej, expected });
    }
    if dim_ej == n {
        return Ok(DegreeResult {
            degree: 1,
            dim_ej,
            shortcut: true,
            slice_p: None,
            slice_p_off: None,
            deg_pi,
            certified: true,
        });
    }
    if !inst.curves_only() || dim_ej != 3 {
        return Err(JoinError::Precondition(format!(
            "slice degree needs curves and a threefold join, got dimension {dim_ej}"
        )));
    }
    if deg_pi == 0 {
        return Err(JoinError::Precondition("deg π must be positive".into()));
    }
    let f = inst.field();
    let slice = random_subspace(f, inst.ambient(), 3, rng)?;
    let forms = Matrix::new(f, inst.ambient() + 1, slice.equations());
    let data = pair_system(inst, &forms, rng)?;
    let ic = match incidence_count(&data.i_gens, &data.j_gens, Provenance::Slice, rng) {
        Err(BivarError::PositiveDimensional) => {
            return Err(JoinError::JoinDefective { dim: expected - 1, expected })
        }
        r => r?,
    };
    if ic.p % deg_pi != 0 {
        return Err(JoinError::NonIntegralRatio {
            what: format!("slice pairs / deg π = {} / {deg_pi}", ic.p),
        });
    }
    let degree = ic.p / deg_pi;
    if let Some(off) = census_p_off.filter(|o| *o > 0) {
        if ic.p_off != degree * off {
            return Err(JoinError::CensusIdentity(format!(
                "off-diagonal slice pairs {} != degree {degree} × {off}",
                ic.p_off
            )));
        }
    }
    Ok(DegreeResult {
        degree,
        dim_ej,
        shortcut: false,
        slice_p: Some(ic.p),
        slice_p_off: Some(ic.p_off),
        deg_pi,
        certified: ic.certified,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BallicoResult {
    /// The generic plane meets `Y` only where forced.
    pub holds: bool,
    /// Generic number of points of `Y` on `span(a, b, c)`.
    pub count: usize,
    /// 1 when `X ≠ Y`; 3 for a self-join, where `a, b, c` all lie on `Y`.
    pub forced: usize,
}

const NONDEGENERACY_SAMPLES: usize = 4;

/// For general `a, b ∈ X` and `c ∈ Y`, whether the plane `span(a, b, c)`
/// meets `Y` in `c` alone. Expected to agree with `b = 1`.
pub fn ballico_plane_test<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<BallicoResult, JoinError> {
    let n = inst.ambient();
    let ky = inst.y.source_dim();
    if inst.x.source_dim() != 1 {
        return Err(JoinError::Precondition("X must be a curve".into()));
    }
    if ky > 2 || ky + 3 > n {
        return Err(JoinError::Precondition(format!("dim Y = {ky} needs dim Y ≤ 2 and ≤ n − 3 = {}", n as i64 - 3)));
    }
    let f = inst.field();
    let mut pts = Vec::new();
    for _ in 0..NONDEGENERACY_SAMPLES * (n + 1) {
        pts.push(sample_point(&inst.x, rng).1.coords().to_vec());
        pts.push(sample_point(&inst.y, rng).1.coords().to_vec());
    }
    if rank_of(f, n + 1, &pts) < n + 1 {
        return Err(JoinError::Precondition("X ∪ Y lies in a hyperplane".into()));
    }
    let forced = if inst.same_variety() { 3 } else { 1 };
    let count = consensus("plane section count", inst.trials, rng, Generic::Min, |r| {
        for _ in 0..MAX_RESAMPLES {
            let (_, a) = sample_smooth(&inst.x, r)?;
            let (_, b) = sample_smooth(&inst.x, r)?;
            let (_, c) = sample_smooth(&inst.y, r)?;
            let plane = LinearSubspace::from_vectors(f, n, &[a.coords().to_vec(), b.coords().to_vec(), c.coords().to_vec()]);
            if plane.rank() != 3 {
                continue;
            }
            return match plane_section_count(&inst.y, &plane, r) {
                Ok(k) => Ok(k as i64),
                Err(VarietyError::PositiveDimensionalSection) => Ok(i64::MAX),
                Err(e) => Err(e.into()),
            };
        }
        Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
    })?;
    if count == i64::MAX {
        return Err(VarietyError::PositiveDimensionalSection.into());
    }
    Ok(BallicoResult {
        holds: count as usize == forced,
        count: count as usize,
        forced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::join::fiber_census_with_dim;
    use crate::proj::{line_through, ruled_projection};
    use crate::seed::rng_from;
    use crate::variety::ParamVariety;

    fn inst(x: &[&str], y: &[&str]) -> JoinInstance {
        let q = FieldSpec::rationals();
        JoinInstance::new(
            ParamVariety::parse("X", 1, x, q).unwrap(),
            ParamVariety::parse("Y", 1, y, q).unwrap(),
            11,
            3,
        )
        .unwrap()
    }

    #[test]
    fn ruled_points_project_onto_the_line() {
        let skew = inst(&["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        let q = FieldSpec::rationals();
        let (xp, yp) = (vec![q.from_i64(2), q.from_i64(3)], vec![q.from_i64(-1), q.from_i64(5)]);
        let (one, zero) = (q.one(), q.zero());
        let x = skew.x.eval(&xp).unwrap();
        let y = skew.y.eval(&yp).unwrap();
        assert_eq!(ruled_projection(&ruled_join_point(&skew, &xp, &yp, &one, &zero).unwrap()).unwrap(), x);
        // the a − b convention sends [0, y] to −y, the same point
        assert_eq!(ruled_projection(&ruled_join_point(&skew, &xp, &yp, &zero, &one).unwrap()).unwrap(), y);
        let w = ruled_join_point(&skew, &xp, &yp, &one, &one).unwrap();
        assert!(line_through(&x, &y).unwrap().contains(&ruled_projection(&w).unwrap()));
        assert_eq!(ruled_join_point(&skew, &xp, &yp, &zero, &zero), Err(JoinError::ZeroWeights));
    }

    #[test]
    fn disjoint_conics_degree_and_plane_test() {
        let mut rng = rng_from(12);
        let c = inst(&["s0^2", "s1^2", "s0*s1", "0", "0"], &["0", "0", "s0*s1", "s0^2", "s1^2"]);
        let census = fiber_census_with_dim(&c, 3, &mut rng).unwrap();
        assert_eq!(census.deg_pi, 1);
        let d = degree_ej(&c, 3, census.deg_pi, census.p_off, &mut rng).unwrap();
        assert_eq!(d.degree * census.deg_pi, 4);
        let bt = ballico_plane_test(&c, &mut rng).unwrap();
        assert_eq!(bt.holds, census.b == 1);
    }

    #[test]
    fn rational_normal_quartic_secant() {
        let mut rng = rng_from(13);
        let v = ["s0^4", "s0^3*s1", "s0^2*s1^2", "s0*s1^3", "s1^4"];
        let c = inst(&v, &v);
        let census = fiber_census_with_dim(&c, 3, &mut rng).unwrap();
        assert_eq!((census.m_x, census.b, census.deg_pi), (2, 1, 4));
        let d = degree_ej(&c, 3, census.deg_pi, census.p_off, &mut rng).unwrap();
        assert_eq!(d.degree, 3);
        let bt = ballico_plane_test(&c, &mut rng).unwrap();
        assert!(bt.holds);
        assert_eq!(bt.forced, 3);
    }
}
