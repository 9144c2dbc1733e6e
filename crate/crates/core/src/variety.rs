//! Varieties given by a parametrization `P^k → P^n`, `k ≤ 2`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bivar::{count_solutions, BivarError, BivarSystem, Provenance};
use crate::field::{random_scalar, FieldElem, FieldError, FieldSpec};
use crate::linalg::{dot, Matrix};
use crate::poly::{binary_divisor, parse_forms, BiPoly, HomPoly, ParseError, PolyError, UniPoly};
use crate::proj::{LinearSubspace, ProjLine, ProjPoint};

const PARAM_BOX: i64 = 20;
const SURFACE_BASEPOINT_SAMPLES: usize = 1000;
const INJECTIVITY_TRIALS: usize = 3;
const SMOOTH_SPOT_CHECKS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error("source dimension {0} is unsupported (0, 1 or 2)")]
    UnsupportedSourceDim(usize),
    #[error("degenerate parametrization: {0}")]
    DegenerateForms(String),
    #[error("the forms have a common zero ({0})")]
    BasePointFound(String),
    #[error("a general point has {0} parameter preimages")]
    NonBirationalParam(usize),
    #[error("tangent rank {rank} at a parameter where {expected} is needed")]
    SingularParameter { rank: usize, expected: usize },
    #[error("the line lies inside the variety")]
    LineInsideVariety,
    #[error("the section is not a finite set of points")]
    PositiveDimensionalSection,
    #[error("ambient of the variety is P^{0}, of the subspace P^{1}")]
    AmbientMismatch(usize, usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bivar(#[from] BivarError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamVariety {
    label: String,
    k: usize,
    forms: Vec<HomPoly>,
}

impl ParamVariety {
    pub fn new(label: impl Into<String>, k: usize, forms: Vec<HomPoly>) -> Result<Self, VarietyError> {
        if k > 2 {
            return Err(VarietyError::UnsupportedSourceDim(k));
        }
        if forms.len() < 2 {
            return Err(VarietyError::DegenerateForms(format!(
                "{} components, need at least 2",
                forms.len()
            )));
        }
        let (nv, d, f) = (forms[0].nvars(), forms[0].degree(), forms[0].field());
        if forms.iter().any(|g| g.nvars() != k + 1 || g.degree() != d || g.field() != f) || nv != k + 1 {
            return Err(VarietyError::DegenerateForms(
                "components differ in variables, degree or field".into(),
            ));
        }
        if forms.iter().all(|g| g.is_zero()) {
            return Err(VarietyError::DegenerateForms("every component is zero".into()));
        }
        Ok(ParamVariety {
            label: label.into(),
            k,
            forms,
        })
    }

    /// Parses component strings in `s0..s{k}`.
    pub fn parse<S: AsRef<str>>(
        label: impl Into<String>,
        k: usize,
        components: &[S],
        field: FieldSpec,
    ) -> Result<Self, VarietyError> {
        if k > 2 {
            return Err(VarietyError::UnsupportedSourceDim(k));
        }
        let forms = parse_forms(components, k + 1, field)?;
        ParamVariety::new(label, k, forms)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source_dim(&self) -> usize {
        self.k
    }

    pub fn ambient(&self) -> usize {
        self.forms.len() - 1
    }

    pub fn degree(&self) -> u32 {
        self.forms[0].degree()
    }

    pub fn field(&self) -> FieldSpec {
        self.forms[0].field()
    }

    pub fn forms(&self) -> &[HomPoly] {
        &self.forms
    }

    pub fn reduce_into(&self, target: FieldSpec) -> Result<ParamVariety, VarietyError> {
        let forms = self
            .forms
            .iter()
            .map(|f| f.reduce_into(target))
            .collect::<Result<Vec<_>, _>>()?;
        ParamVariety::new(self.label.clone(), self.k, forms)
    }

    /// Affine coordinates of the image point, or `None` at a base point.
    pub fn eval_vector(&self, param: &[FieldElem]) -> Vec<FieldElem> {
        self.forms
            .iter()
            .map(|f| f.eval(param).expect("parameter arity checked by caller"))
            .collect()
    }

    pub fn eval(&self, param: &[FieldElem]) -> Option<ProjPoint> {
        ProjPoint::new(self.eval_vector(param)).ok()
    }

    /// Rows `x(param)` and `∂x/∂s_i(param)`.
    pub fn tangent_rows(&self, param: &[FieldElem]) -> Vec<Vec<FieldElem>> {
        let mut rows = vec![self.eval_vector(param)];
        if self.degree() > 0 {
            for i in 0..=self.k {
                rows.push(
                    self.forms
                        .iter()
                        .map(|f| f.partial_derivative(i).expect("index").eval(param).expect("arity"))
                        .collect(),
                );
            }
        }
        rows
    }

    /// Curve components restricted to the chart `[1:s]` after the source
    /// change `M`; constants for a point.
    pub fn chart_curve(&self, m: &Matrix) -> Result<Vec<UniPoly>, VarietyError> {
        match self.k {
            0 => Ok(self
                .forms
                .iter()
                .map(|f| UniPoly::constant(f.eval(&[f.field().one()]).expect("arity")))
                .collect()),
            1 => self
                .forms
                .iter()
                .map(|f| Ok(f.substitute_linear(m)?.dehomogenize_binary()))
                .collect(),
            k => Err(VarietyError::UnsupportedSourceDim(k)),
        }
    }

    /// Pulls linear forms on `P^n` back to the source.
    fn pullback(&self, linear: &[Vec<FieldElem>]) -> Vec<HomPoly> {
        linear
            .iter()
            .map(|l| {
                self.forms
                    .iter()
                    .zip(l)
                    .fold(HomPoly::zero(self.field(), self.k + 1, self.degree()), |acc, (f, c)| {
                        acc.add(&f.scale(c))
                    })
            })
            .collect()
    }

    fn coefficient_rank(&self) -> usize {
        let mut monos: Vec<Vec<u32>> = self.forms.iter().flat_map(|f| f.terms().map(|(e, _)| e.clone())).collect();
        monos.sort();
        monos.dedup();
        let rows: Vec<Vec<FieldElem>> = self
            .forms
            .iter()
            .map(|f| monos.iter().map(|e| f.coefficient(e)).collect())
            .collect();
        Matrix::new(self.field(), monos.len(), rows).rank()
    }
}

pub fn random_param<R: Rng + ?Sized>(field: FieldSpec, k: usize, rng: &mut R) -> Vec<FieldElem> {
    if k == 0 {
        return vec![field.one()];
    }
    loop {
        let v: Vec<FieldElem> = (0..=k).map(|_| random_scalar(field, rng, PARAM_BOX)).collect();
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub label: String,
    pub source_dim: usize,
    pub ambient: usize,
    pub degree: u32,
    pub basepoint_free: bool,
    /// How the base-point check was decided.
    pub basepoint_method: String,
    pub injectivity_count: usize,
    pub linear: bool,
    pub nondegenerate: bool,
    pub smooth_spot_checks: usize,
    pub singular_spot_checks: usize,
}

fn surface_basepoints<R: Rng + ?Sized>(v: &ParamVariety, rng: &mut R) -> Result<Option<String>, VarietyError> {
    let f = v.field();
    for _ in 0..SURFACE_BASEPOINT_SAMPLES {
        let p = random_param(f, 2, rng);
        if v.eval(&p).is_none() {
            return Ok(Some(format!("at sampled parameter {p:?}")));
        }
    }
    // exact: affine chart s0 = 1, then the line s0 = 0
    let affine: Vec<BiPoly> = v.forms.iter().map(|g| g.dehomogenize_ternary()).filter(|g| !g.is_zero()).collect();
    if !crate::bivar::is_inconsistent(&BivarSystem::new(pad(affine, f), Provenance::Other)?) {
        return Ok(Some("in the chart s0 = 1".into()));
    }
    let at_inf: Vec<HomPoly> = v.forms.iter().map(|g| g.restrict_first_to_zero()).collect();
    match binary_divisor(&at_inf) {
        None => Ok(Some("along s0 = 0".into())),
        Some(d) if d.degree() > 0 => Ok(Some("on the line s0 = 0".into())),
        Some(_) => Ok(None),
    }
}

fn pad(mut g: Vec<BiPoly>, f: FieldSpec) -> Vec<BiPoly> {
    while g.len() < 2 {
        g.push(BiPoly::zero(f));
    }
    g
}

/// Number of parameters mapping to `x(a)`.
fn preimage_count<R: Rng + ?Sized>(v: &ParamVariety, a: &[FieldElem], rng: &mut R) -> Result<usize, VarietyError> {
    let xa = v.eval_vector(a);
    let n = v.forms.len();
    let mut minors = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            minors.push(v.forms[i].scale(&xa[j]).sub(&v.forms[j].scale(&xa[i])));
        }
    }
    match v.k {
        0 => Ok(1),
        1 => Ok(binary_divisor(&minors).map_or(usize::MAX, |d| d.distinct_points())),
        _ => {
            let f = v.field();
            let affine: Vec<BiPoly> = minors.iter().map(|g| g.dehomogenize_ternary()).filter(|g| !g.is_zero()).collect();
            let sys = BivarSystem::new(pad(affine, f), Provenance::Other)?;
            let inf: Vec<HomPoly> = minors.iter().map(|g| g.restrict_first_to_zero()).collect();
            let at_inf = binary_divisor(&inf).map_or(usize::MAX, |d| d.distinct_points());
            match count_solutions(&sys, rng) {
                Ok(c) => Ok(c.p.saturating_add(at_inf)),
                Err(BivarError::NotZeroDimensional(_)) => Ok(usize::MAX),
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// Checks base-point freeness and generic injectivity; reports linearity,
/// nondegeneracy and smoothness at a few random parameters.
pub fn validate_variety<R: Rng + ?Sized>(
    v: &ParamVariety,
    rng: &mut R,
) -> Result<ValidationReport, VarietyError> {
    let (basepoint, method) = match v.k {
        0 => (None, "constant point"),
        1 => {
            let d = binary_divisor(&v.forms).expect("not all zero");
            let bp = (d.degree() > 0).then(|| format!("gcd of the components has degree {}", d.degree()));
            (bp, "binary gcd")
        }
        _ => (surface_basepoints(v, rng)?, "samples plus bivariate elimination"),
    };
    if let Some(where_) = basepoint {
        return Err(VarietyError::BasePointFound(where_));
    }
    let f = v.field();
    let mut count = usize::MAX;
    for _ in 0..INJECTIVITY_TRIALS {
        let a = random_param(f, v.k, rng);
        count = count.min(preimage_count(v, &a, rng)?);
        if count == 1 {
            break;
        }
    }
    if count != 1 {
        return Err(VarietyError::NonBirationalParam(count));
    }
    let mut smooth = 0;
    let mut singular = 0;
    for _ in 0..SMOOTH_SPOT_CHECKS {
        let a = random_param(f, v.k, rng);
        match tangent_space(v, &a) {
            Ok(_) => smooth += 1,
            Err(_) => singular += 1,
        }
    }
    Ok(ValidationReport {
        label: v.label.clone(),
        source_dim: v.k,
        ambient: v.ambient(),
        degree: v.degree(),
        basepoint_free: true,
        basepoint_method: method.into(),
        injectivity_count: count,
        linear: v.k == 0 || v.degree() == 1,
        nondegenerate: v.coefficient_rank() == v.ambient() + 1,
        smooth_spot_checks: smooth,
        singular_spot_checks: singular,
    })
}

/// A random parameter and its image.
pub fn sample_point<R: Rng + ?Sized>(v: &ParamVariety, rng: &mut R) -> (Vec<FieldElem>, ProjPoint) {
    loop {
        let a = random_param(v.field(), v.k, rng);
        if let Some(p) = v.eval(&a) {
            return (a, p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentFrame {
    pub param: Vec<FieldElem>,
    pub point: ProjPoint,
    pub space: LinearSubspace,
}

/// Embedded tangent space: the span of the point and the partials of the
/// parametrization. The point is included explicitly because Euler's
/// relation fails to put it in the span of the partials when the
/// characteristic divides the degree.
pub fn tangent_space(v: &ParamVariety, param: &[FieldElem]) -> Result<TangentFrame, VarietyError> {
    let point = v.eval(param).ok_or_else(|| VarietyError::BasePointFound("at the given parameter".into()))?;
    let space = LinearSubspace::from_vectors(v.field(), v.ambient(), &v.tangent_rows(param));
    if space.rank() < v.k + 1 {
        return Err(VarietyError::SingularParameter {
            rank: space.rank(),
            expected: v.k + 1,
        });
    }
    Ok(TangentFrame {
        param: param.to_vec(),
        point,
        space,
    })
}

/// Pulled-back section forms `Σ l_j x_j` for linear forms cutting `sub`.
fn section_forms(v: &ParamVariety, sub: &LinearSubspace) -> Result<Vec<HomPoly>, VarietyError> {
    if sub.ambient() != v.ambient() {
        return Err(VarietyError::AmbientMismatch(v.ambient(), sub.ambient()));
    }
    Ok(v.pullback(&sub.equations()))
}

/// Number of distinct points of a curve (or point) on a line, and whether
/// they are all transversal.
pub fn line_intersection_profile(v: &ParamVariety, line: &ProjLine) -> Result<(usize, bool), VarietyError> {
    let sub = line.as_subspace();
    match v.k {
        0 => {
            let p = v.eval(&[v.field().one()]).expect("validated point");
            Ok((usize::from(sub.contains_point(&p)), true))
        }
        1 => {
            let forms = section_forms(v, &sub)?;
            let Some(d) = binary_divisor(&forms) else {
                return Err(VarietyError::LineInsideVariety);
            };
            let count = d.distinct_points();
            // second basis of the same equations: partial sums
            let mut mixed = Vec::with_capacity(forms.len());
            let mut acc = HomPoly::zero(v.field(), 2, v.degree());
            for f in &forms {
                acc = acc.add(f);
                mixed.push(acc.clone());
            }
            let again = binary_divisor(&mixed).map_or(usize::MAX, |d| d.distinct_points());
            Ok((count, d.is_squarefree() && again == count))
        }
        k => Err(VarietyError::UnsupportedSourceDim(k)),
    }
}

/// Distinct parameter points of `v` whose image lies in `plane`.
pub fn plane_section_count<R: Rng + ?Sized>(
    v: &ParamVariety,
    plane: &LinearSubspace,
    rng: &mut R,
) -> Result<usize, VarietyError> {
    let forms = section_forms(v, plane)?;
    match v.k {
        0 => Ok(usize::from(forms.iter().all(|f| f.is_zero()))),
        1 => binary_divisor(&forms)
            .map(|d| d.distinct_points())
            .ok_or(VarietyError::PositiveDimensionalSection),
        _ => {
            let f = v.field();
            let affine: Vec<BiPoly> = forms.iter().map(|g| g.dehomogenize_ternary()).filter(|g| !g.is_zero()).collect();
            if affine.is_empty() {
                return Err(VarietyError::PositiveDimensionalSection);
            }
            let inf: Vec<HomPoly> = forms.iter().map(|g| g.restrict_first_to_zero()).collect();
            let at_inf = binary_divisor(&inf)
                .map(|d| d.distinct_points())
                .ok_or(VarietyError::PositiveDimensionalSection)?;
            let sys = BivarSystem::new(pad(affine, f), Provenance::Slice)?;
            match count_solutions(&sys, rng) {
                Ok(c) => Ok(c.p + at_inf),
                Err(BivarError::NotZeroDimensional(_)) => Err(VarietyError::PositiveDimensionalSection),
                Err(e) => Err(e.into()),
            }
        }
    }
}

/// `l(x(param))` for a linear form `l`.
pub fn eval_linear(v: &ParamVariety, l: &[FieldElem], param: &[FieldElem]) -> FieldElem {
    dot(v.field(), l, &v.eval_vector(param))
}
