use rand::Rng;
use serde::Serialize;

use super::{consensus_by, Generic, JoinError, JoinInstance, MAX_RESAMPLES};
use crate::field::FieldElem;
use crate::proj::{line_through, ProjLine, ProjPoint};
use crate::variety::{line_intersection_profile, sample_point, tangent_space, ParamVariety, VarietyError};

/// What was verified about a sampled join line. `None` marks a check that
/// does not apply (surfaces have no exact line profile).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineCertificate {
    pub x_smooth: bool,
    pub y_smooth: bool,
    pub x_transversal: Option<bool>,
    pub y_transversal: Option<bool>,
    pub outside_union: bool,
    pub resamples: usize,
}

#[derive(Debug, Clone)]
pub struct JoinLine {
    pub x_param: Vec<FieldElem>,
    pub y_param: Vec<FieldElem>,
    pub x: ProjPoint,
    pub y: ProjPoint,
    pub line: ProjLine,
    /// `(|L ∩ X|, |L ∩ Y|)` when both are points or curves.
    pub profile: Option<(usize, usize)>,
    pub certificate: LineCertificate,
}

pub(crate) fn sample_smooth<R: Rng + ?Sized>(
    v: &ParamVariety,
    rng: &mut R,
) -> Result<(Vec<FieldElem>, ProjPoint), JoinError> {
    for _ in 0..MAX_RESAMPLES {
        let (a, p) = sample_point(v, rng);
        if tangent_space(v, &a).is_ok() {
            return Ok((a, p));
        }
    }
    Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
}

/// Profile of one variety on a line; `Ok(None)` when not computable.
fn side_profile(v: &ParamVariety, l: &ProjLine) -> Result<Option<(usize, bool)>, JoinError> {
    if v.source_dim() > 1 {
        return Ok(None);
    }
    match line_intersection_profile(v, l) {
        Ok(r) => Ok(Some(r)),
        Err(VarietyError::LineInsideVariety) => Ok(Some((0, false))),
        Err(e) => Err(e.into()),
    }
}

/// A random line joining smooth points `x ∈ X`, `y ∈ Y`, `x ≠ y`, meeting
/// both varieties transversally and lying in neither.
pub fn sample_join_line<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<JoinLine, JoinError> {
    for attempt in 0..MAX_RESAMPLES {
        let (xp, x) = sample_smooth(&inst.x, rng)?;
        let (yp, y) = sample_smooth(&inst.y, rng)?;
        let Ok(line) = line_through(&x, &y) else {
            continue;
        };
        let px = side_profile(&inst.x, &line)?;
        let py = side_profile(&inst.y, &line)?;
        let ok = |p: &Option<(usize, bool)>| p.map_or(true, |(c, t)| t && c > 0);
        if !ok(&px) || !ok(&py) {
            continue;
        }
        let profile = match (px, py) {
            (Some((a, _)), Some((b, _))) => Some((a, b)),
            _ => None,
        };
        return Ok(JoinLine {
            x_param: xp,
            y_param: yp,
            x,
            y,
            line,
            profile,
            certificate: LineCertificate {
                x_smooth: true,
                y_smooth: true,
                x_transversal: px.map(|p| p.1),
                y_transversal: py.map(|p| p.1),
                outside_union: true,
                resamples: attempt,
            },
        });
    }
    Err(JoinError::GeneralPositionUncertain(MAX_RESAMPLES))
}

/// `(m_X, m_Y)`: distinct points of `X` and `Y` on a general join line.
pub fn joined_profile<R: Rng + ?Sized>(inst: &JoinInstance, rng: &mut R) -> Result<(usize, usize), JoinError> {
    if !inst.curves_only() {
        return Err(JoinError::Precondition(
            "exact profile needs source dimension at most 1 on both sides".into(),
        ));
    }
    let (mx, my) = consensus_by(
        "joined profile",
        inst.trials,
        rng,
        Generic::Min,
        |&(a, b)| vec![a as i64, b as i64],
        |r| Ok(sample_join_line(inst, r)?.profile.expect("curves have profiles")),
    )?;
    Ok((mx, my))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::seed::rng_from;

    fn inst(x: &[&str], y: &[&str]) -> JoinInstance {
        let q = FieldSpec::rationals();
        JoinInstance::new(
            ParamVariety::parse("X", 1, x, q).unwrap(),
            ParamVariety::parse("Y", 1, y, q).unwrap(),
            1,
            3,
        )
        .unwrap()
    }

    #[test]
    fn profiles() {
        let mut rng = rng_from(1);
        let skew = inst(&["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]);
        assert_eq!(joined_profile(&skew, &mut rng).unwrap(), (1, 1));
        let c = ["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"];
        let cubic = inst(&c, &c);
        assert_eq!(joined_profile(&cubic, &mut rng).unwrap(), (2, 2));
        let conics = inst(
            &["s0^2", "s1^2", "s0*s1", "0", "0"],
            &["0", "0", "s0*s1", "s0^2", "s1^2"],
        );
        assert_eq!(joined_profile(&conics, &mut rng).unwrap(), (1, 1));
        let l = sample_join_line(&cubic, &mut rng).unwrap();
        assert_ne!(l.x, l.y);
        assert_eq!(l.profile, Some((2, 2)));
    }

    #[test]
    fn linear_self_join_is_rejected() {
        let q = FieldSpec::rationals();
        let l = ParamVariety::parse("L", 1, &["s0", "s1", "0"], q).unwrap();
        assert_eq!(JoinInstance::new(l.clone(), l, 0, 3), Err(JoinError::LinearSelfJoin));
    }
}
