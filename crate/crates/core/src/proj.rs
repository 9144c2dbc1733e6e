//! Projective linear algebra: points, lines with Plücker keys, and linear
//! subspaces stored as canonical echelon bases.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::field::{random_scalar, FieldElem, FieldSpec};
use crate::linalg::Matrix;

const RANDOM_BOX: i64 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("a line needs two distinct points")]
    CoincidentPoints,
    #[error("ambient dimensions differ ({0} and {1})")]
    AmbientMismatch(usize, usize),
    #[error("point lies in the projection center")]
    CenterPoint,
    #[error("codimension {codim} is outside 0..={n}")]
    BadCodimension { codim: usize, n: usize },
    #[error("vector of length {0} cannot live in P^n with n + 1 = 2k")]
    OddLength(usize),
}

/// Normalizes so the first nonzero entry is 1; `None` for the zero vector.
pub fn normalize(v: &[FieldElem]) -> Option<Vec<FieldElem>> {
    let lead = v.iter().find(|x| !x.is_zero())?;
    let inv = lead.inverse().expect("nonzero");
    Some(v.iter().map(|x| x * &inv).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    coords: Vec<FieldElem>,
}

impl ProjPoint {
    pub fn new(coords: Vec<FieldElem>) -> Result<Self, ProjError> {
        normalize(&coords)
            .map(|coords| ProjPoint { coords })
            .ok_or(ProjError::ZeroVector)
    }

    pub fn from_i64s(field: FieldSpec, v: &[i64]) -> Result<Self, ProjError> {
        ProjPoint::new(v.iter().map(|&x| field.from_i64(x)).collect())
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.coords
    }

    /// `n` for a point of `P^n`.
    pub fn ambient(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn field(&self) -> FieldSpec {
        self.coords[0].field()
    }
}

impl serde::Serialize for ProjPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for LinearSubspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// All 2×2 minors `p_ij = a_i b_j − a_j b_i`, `i < j`, in lexicographic order.
pub fn plucker_minors(a: &[FieldElem], b: &[FieldElem]) -> Vec<FieldElem> {
    let n = a.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(&(&a[i] * &b[j]) - &(&a[j] * &b[i]));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ProjLine {
    a: ProjPoint,
    b: ProjPoint,
    plucker: Vec<FieldElem>,
}

impl PartialEq for ProjLine {
    fn eq(&self, other: &Self) -> bool {
        self.plucker == other.plucker
    }
}

impl Eq for ProjLine {}

impl std::hash::Hash for ProjLine {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.plucker.hash(state)
    }
}

impl ProjLine {
    pub fn points(&self) -> (&ProjPoint, &ProjPoint) {
        (&self.a, &self.b)
    }

    /// Normalized Plücker vector; equal lines have equal keys.
    pub fn plucker(&self) -> &[FieldElem] {
        &self.plucker
    }

    pub fn ambient(&self) -> usize {
        self.a.ambient()
    }

    pub fn as_subspace(&self) -> LinearSubspace {
        LinearSubspace::from_vectors(
            self.a.field(),
            self.ambient(),
            &[self.a.coords.clone(), self.b.coords.clone()],
        )
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        let m = Matrix::new(
            p.field(),
            p.coords.len(),
            vec![self.a.coords.clone(), self.b.coords.clone(), p.coords.clone()],
        );
        m.rank() <= 2
    }

    /// The quadratic relations `p_ij p_kl − p_ik p_jl + p_il p_jk = 0` for
    /// all `i < j < k < l`.
    pub fn satisfies_plucker_relations(&self) -> bool {
        let n = self.ambient() + 1;
        let idx = |i: usize, j: usize| -> usize {
            // position of (i, j) in lexicographic order
            i * (2 * n - i - 1) / 2 + (j - i - 1)
        };
        let p = &self.plucker;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in k + 1..n {
                        let v = &(&(&p[idx(i, j)] * &p[idx(k, l)]) - &(&p[idx(i, k)] * &p[idx(j, l)]))
                            + &(&p[idx(i, l)] * &p[idx(j, k)]);
                        if !v.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

pub fn line_through(x: &ProjPoint, y: &ProjPoint) -> Result<ProjLine, ProjError> {
    if x.ambient() != y.ambient() {
        return Err(ProjError::AmbientMismatch(x.ambient(), y.ambient()));
    }
    let p = normalize(&plucker_minors(x.coords(), y.coords())).ok_or(ProjError::CoincidentPoints)?;
    Ok(ProjLine {
        a: x.clone(),
        b: y.clone(),
        plucker: p,
    })
}

/// Linear subspace of `P^n`, kept as its reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearSubspace {
    field: FieldSpec,
    n: usize,
    basis: Vec<Vec<FieldElem>>,
}

impl LinearSubspace {
    pub fn from_vectors(field: FieldSpec, n: usize, vectors: &[Vec<FieldElem>]) -> Self {
        let (basis, _) = Matrix::new(field, n + 1, vectors.to_vec()).rref();
        LinearSubspace { field, n, basis }
    }

    pub fn empty(field: FieldSpec, n: usize) -> Self {
        LinearSubspace {
            field,
            n,
            basis: Vec::new(),
        }
    }

    pub fn whole(field: FieldSpec, n: usize) -> Self {
        LinearSubspace::from_vectors(field, n, Matrix::identity(field, n + 1).rows())
    }

    pub fn point(p: &ProjPoint) -> Self {
        LinearSubspace::from_vectors(p.field(), p.ambient(), &[p.coords.clone()])
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[Vec<FieldElem>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Projective dimension; −1 for the empty subspace.
    pub fn dim(&self) -> i64 {
        self.basis.len() as i64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn contains_vector(&self, v: &[FieldElem]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        Matrix::new(self.field, self.n + 1, rows).rank() == self.rank()
    }

    pub fn contains_point(&self, p: &ProjPoint) -> bool {
        self.contains_vector(p.coords())
    }

    pub fn contains(&self, other: &LinearSubspace) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// Linear forms cutting out the subspace (a basis of the annihilator).
    pub fn equations(&self) -> Vec<Vec<FieldElem>> {
        if self.basis.is_empty() {
            return Matrix::identity(self.field, self.n + 1).into_rows();
        }
        Matrix::new(self.field, self.n + 1, self.basis.clone()).nullspace()
    }

    /// The single point of a 0-dimensional subspace.
    pub fn as_point(&self) -> Option<ProjPoint> {
        (self.rank() == 1).then(|| ProjPoint::new(self.basis[0].clone()).expect("nonzero row"))
    }
}

impl fmt::Display for LinearSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.as_point() {
            return write!(f, "{p}");
        }
        write!(f, "span{{")?;
        for (i, r) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", ProjPoint::new(r.clone()).expect("nonzero row"))?;
        }
        write!(f, "}}")
    }
}

pub fn span_of(parts: &[LinearSubspace]) -> Result<LinearSubspace, ProjError> {
    let Some(first) = parts.first() else {
        return Err(ProjError::ZeroVector);
    };
    let mut rows = Vec::new();
    for p in parts {
        if p.n != first.n {
            return Err(ProjError::AmbientMismatch(first.n, p.n));
        }
        rows.extend(p.basis.iter().cloned());
    }
    Ok(LinearSubspace::from_vectors(first.field, first.n, &rows))
}

pub fn intersect(u: &LinearSubspace, v: &LinearSubspace) -> Result<LinearSubspace, ProjError> {
    if u.n != v.n {
        return Err(ProjError::AmbientMismatch(u.n, v.n));
    }
    if u.is_empty() || v.is_empty() {
        return Ok(LinearSubspace::empty(u.field, u.n));
    }
    // (a, b) with a·U = b·V: the left kernel of the stacked basis
    let mut rows = u.basis.clone();
    rows.extend(v.basis.iter().cloned());
    let stacked = Matrix::new(u.field, u.n + 1, rows);
    let kernel = stacked.transpose().nullspace();
    let vectors: Vec<Vec<FieldElem>> = kernel
        .iter()
        .map(|k| {
            let mut acc = vec![u.field.zero(); u.n + 1];
            for (c, row) in k.iter().zip(&u.basis) {
                for (a, x) in acc.iter_mut().zip(row) {
                    *a = &*a + &(c * x);
                }
            }
            acc
        })
        .collect();
    Ok(LinearSubspace::from_vectors(u.field, u.n, &vectors))
}

/// Projection `P^{2n+1} ⇢ P^n`, `[a, b] ↦ [a − b]`, defined off the
/// center `a = b`.
pub fn ruled_projection(q: &ProjPoint) -> Result<ProjPoint, ProjError> {
    let len = q.coords.len();
    if len % 2 != 0 {
        return Err(ProjError::OddLength(len));
    }
    let h = len / 2;
    let diff: Vec<FieldElem> = (0..h).map(|i| &q.coords[i] - &q.coords[h + i]).collect();
    ProjPoint::new(diff).map_err(|_| ProjError::CenterPoint)
}

/// Row space of a random full-rank `(n + 1 − codim) × (n + 1)` matrix.
pub fn random_subspace<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    codim: usize,
    rng: &mut R,
) -> Result<LinearSubspace, ProjError> {
    if codim > n {
        return Err(ProjError::BadCodimension { codim, n });
    }
    let k = n + 1 - codim;
    loop {
        let rows: Vec<Vec<FieldElem>> = (0..k)
            .map(|_| (0..=n).map(|_| random_scalar(field, rng, RANDOM_BOX)).collect())
            .collect();
        let s = LinearSubspace::from_vectors(field, n, &rows);
        if s.rank() == k {
            return Ok(s);
        }
    }
}

/// A random point of `P^n`.
pub fn random_point<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> ProjPoint {
    loop {
        let v: Vec<FieldElem> = (0..=n).map(|_| random_scalar(field, rng, RANDOM_BOX)).collect();
        if let Ok(p) = ProjPoint::new(v) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[i64]) -> ProjPoint {
        ProjPoint::from_i64s(FieldSpec::rationals(), v).unwrap()
    }

    fn sub(rows: &[&[i64]]) -> LinearSubspace {
        let q = FieldSpec::rationals();
        let n = rows[0].len() - 1;
        let v: Vec<Vec<FieldElem>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| q.from_i64(x)).collect())
            .collect();
        LinearSubspace::from_vectors(q, n, &v)
    }

    #[test]
    fn lines() {
        let q = FieldSpec::rationals();
        let l = line_through(&pt(&[1, 0, 0]), &pt(&[0, 1, 0])).unwrap();
        assert_eq!(l.plucker(), &[q.one(), q.zero(), q.zero()]);
        assert_eq!(line_through(&pt(&[1, 2, 3]), &pt(&[2, 4, 6])), Err(ProjError::CoincidentPoints));
        let m = line_through(&pt(&[1, 1, 1]), &pt(&[1, 2, 3])).unwrap();
        assert_eq!(m.plucker(), &[q.from_i64(1), q.from_i64(2), q.from_i64(1)]);
        assert!(m.contains(&pt(&[2, 3, 4])));
        assert!(!m.contains(&pt(&[0, 0, 1])));
        // the same line from other points
        assert_eq!(m, line_through(&pt(&[2, 3, 4]), &pt(&[0, 1, 2])).unwrap());
        let r = line_through(&pt(&[1, 2, 0, 5, 1]), &pt(&[3, 0, 1, 1, 7])).unwrap();
        assert!(r.satisfies_plucker_relations());
    }

    #[test]
    fn spans_and_intersections() {
        let a = sub(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let b = sub(&[&[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let c = sub(&[&[1, 0, 0, 0], &[0, 0, 1, 0]]);
        assert_eq!(span_of(&[a.clone(), b.clone()]).unwrap().dim(), 3);
        assert_eq!(span_of(&[a.clone(), a.clone()]).unwrap(), a);
        assert_eq!(span_of(&[a.clone(), c.clone()]).unwrap().dim(), 2);
        assert_eq!(intersect(&a, &b).unwrap().dim(), -1);
        assert_eq!(intersect(&a, &c).unwrap(), LinearSubspace::point(&pt(&[1, 0, 0, 0])));
        let plane = sub(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]);
        assert_eq!(intersect(&plane, &a).unwrap(), a);
        let plane2 = sub(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]]);
        assert_eq!(intersect(&plane, &plane2).unwrap().dim(), 1);
        assert_eq!(span_of(&[a.clone(), sub(&[&[1, 0, 0]])]), Err(ProjError::AmbientMismatch(3, 2)));
    }

    #[test]
    fn projection_from_the_center() {
        assert_eq!(ruled_projection(&pt(&[1, 2, 0, 0, 0, 0])).unwrap(), pt(&[1, 2, 0]));
        assert_eq!(ruled_projection(&pt(&[0, 0, 0, 3, 1, 2])).unwrap(), pt(&[3, 1, 2]));
        assert_eq!(ruled_projection(&pt(&[1, 1, 1, 1, 1, 1])), Err(ProjError::CenterPoint));
    }

    #[test]
    fn random_subspaces() {
        let q = FieldSpec::rationals();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(random_subspace(q, 4, 0, &mut rng).unwrap().dim(), 4);
        assert_eq!(random_subspace(q, 4, 4, &mut rng).unwrap().dim(), 0);
        let a = random_subspace(q, 5, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_subspace(q, 5, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.equations().iter().all(|e| a
            .basis()
            .iter()
            .all(|v| crate::linalg::dot(q, e, v).is_zero())));
    }
}
