use std::collections::BTreeMap;
use std::fmt;

use super::{BiPoly, PolyError, UniPoly};
use crate::field::{FieldElem, FieldError, FieldSpec};
use crate::linalg::Matrix;

/// Homogeneous form of fixed degree in `nvars` variables, stored sparsely.
/// Every stored exponent vector sums to `degree`; zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HomPoly {
    field: FieldSpec,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, FieldElem>,
}

impl HomPoly {
    pub fn new(
        field: FieldSpec,
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, FieldElem)>,
    ) -> Result<Self, PolyError> {
        let mut out = HomPoly::zero(field, nvars, degree);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::ArityMismatch {
                    expected: nvars,
                    got: e.len(),
                });
            }
            let d: u32 = e.iter().sum();
            if d != degree {
                return Err(PolyError::NotHomogeneous {
                    expected: degree,
                    found: d,
                });
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn zero(field: FieldSpec, nvars: usize, degree: u32) -> Self {
        HomPoly {
            field,
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The coordinate form `x_i`.
    pub fn variable(field: FieldSpec, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        HomPoly::new(field, nvars, 1, [(e, field.one())]).expect("well-formed")
    }

    pub fn constant(c: FieldElem, nvars: usize) -> Self {
        let f = c.field();
        HomPoly::new(f, nvars, 0, [(vec![0; nvars], c)]).expect("well-formed")
    }

    fn add_term(&mut self, e: Vec<u32>, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElem)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> FieldElem {
        self.terms.get(e).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, pt: &[FieldElem]) -> Result<FieldElem, PolyError> {
        if pt.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                expected: self.nvars,
                got: pt.len(),
            });
        }
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in pt.iter().zip(e) {
                if k > 0 {
                    t = &t * &x.pow(k as u64);
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Formal partial derivative. Exponents divisible by the characteristic
    /// drop out.
    pub fn partial_derivative(&self, i: usize) -> Result<HomPoly, PolyError> {
        if i >= self.nvars {
            return Err(PolyError::VariableOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        let mut out = HomPoly::zero(self.field, self.nvars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * &self.field.from_i64(e[i] as i64));
        }
        Ok(out)
    }

    pub fn add(&self, other: &HomPoly) -> HomPoly {
        assert_eq!(
            (self.nvars, self.degree),
            (other.nvars, other.degree),
            "adding forms of different shape"
        );
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &HomPoly) -> HomPoly {
        self.add(&other.scale(&-self.field.one()))
    }

    pub fn scale(&self, c: &FieldElem) -> HomPoly {
        let mut out = HomPoly::zero(self.field, self.nvars, self.degree);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = HomPoly::zero(self.field, self.nvars, self.degree + other.degree);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> HomPoly {
        let mut acc = HomPoly::constant(self.field.one(), self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `f(M·x)`: variable `x_i` becomes `Σ_j M[i][j] x_j`.
    pub fn substitute_linear(&self, m: &Matrix) -> Result<HomPoly, PolyError> {
        if m.nrows() != self.nvars || m.ncols() != self.nvars || !m.is_invertible() {
            return Err(PolyError::SingularMatrix);
        }
        let images: Vec<HomPoly> = (0..self.nvars)
            .map(|i| {
                HomPoly::new(
                    self.field,
                    self.nvars,
                    1,
                    (0..self.nvars).map(|j| {
                        let mut e = vec![0; self.nvars];
                        e[j] = 1;
                        (e, m.get(i, j).clone())
                    }),
                )
                .expect("linear form")
            })
            .collect();
        Ok(self.compose(&images))
    }

    /// Substitutes forms of a common degree for the variables.
    pub fn compose(&self, images: &[HomPoly]) -> HomPoly {
        assert_eq!(images.len(), self.nvars);
        let nv = images[0].nvars;
        let img_deg = images[0].degree;
        let mut out = HomPoly::zero(self.field, nv, self.degree * img_deg);
        for (e, c) in &self.terms {
            let mut t = HomPoly::constant(c.clone(), nv);
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = t.mul(&img.pow(k));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Checks `Σ x_i ∂f/∂x_i = d·f` by expanding both sides.
    pub fn euler_relation_holds(&self) -> bool {
        let mut lhs = HomPoly::zero(self.field, self.nvars, self.degree);
        for i in 0..self.nvars {
            let d = self.partial_derivative(i).expect("index in range");
            let xi = HomPoly::variable(self.field, self.nvars, i);
            let term = xi.mul(&d);
            if term.is_zero() {
                continue;
            }
            lhs = lhs.add(&term);
        }
        lhs == self.scale(&self.field.from_i64(self.degree as i64))
    }

    /// Binary form restricted to the chart `s0 = 1`.
    pub fn dehomogenize_binary(&self) -> UniPoly {
        assert_eq!(self.nvars, 2, "binary form expected");
        let mut c = vec![self.field.zero(); self.degree as usize + 1];
        for (e, a) in &self.terms {
            c[e[1] as usize] = a.clone();
        }
        UniPoly::new(self.field, c)
    }

    /// Ternary form restricted to the chart `s0 = 1`, with `(s1, s2) = (s, t)`.
    pub fn dehomogenize_ternary(&self) -> BiPoly {
        assert_eq!(self.nvars, 3, "ternary form expected");
        BiPoly::from_terms(
            self.field,
            self.terms.iter().map(|(e, c)| ((e[1], e[2]), c.clone())),
        )
    }

    /// The form with `s0 = 0`, in the remaining variables.
    pub fn restrict_first_to_zero(&self) -> HomPoly {
        assert!(self.nvars >= 2, "nothing left after dropping s0");
        let mut out = HomPoly::zero(self.field, self.nvars - 1, self.degree);
        for (e, c) in &self.terms {
            if e[0] == 0 {
                out.add_term(e[1..].to_vec(), c.clone());
            }
        }
        out
    }

    /// Coefficientwise image in another field (e.g. reduction mod p).
    pub fn reduce_into(&self, target: FieldSpec) -> Result<HomPoly, FieldError> {
        let mut out = HomPoly::zero(target, self.nvars, self.degree);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.reduce_into(target)?);
        }
        Ok(out)
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*s{i}")?,
                    _ => write!(f, "*s{i}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

/// Common zero locus of binary forms on P¹: the affine gcd in the chart
/// `s0 = 1` together with the multiplicity of the point `[0:1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDivisor {
    pub affine: UniPoly,
    pub at_infinity: u32,
}

impl BinaryDivisor {
    pub fn degree(&self) -> usize {
        self.affine.degree().unwrap_or(0) + self.at_infinity as usize
    }

    /// Number of distinct points of P¹ over the algebraic closure.
    pub fn distinct_points(&self) -> usize {
        self.affine.distinct_root_count().unwrap_or(0) + usize::from(self.at_infinity > 0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.at_infinity <= 1 && self.affine.is_squarefree().unwrap_or(true)
    }
}

/// Gcd of binary forms as a divisor on P¹; `None` when every form vanishes
/// identically.
pub fn binary_divisor(forms: &[HomPoly]) -> Option<BinaryDivisor> {
    let mut affine: Option<UniPoly> = None;
    let mut at_inf = u32::MAX;
    for f in forms.iter().filter(|f| !f.is_zero()) {
        let u = f.dehomogenize_binary();
        let inf = f.degree() - u.degree().unwrap_or(0) as u32;
        at_inf = at_inf.min(inf);
        affine = Some(match affine {
            None => u.monic(),
            Some(g) => g.gcd(&u).expect("nonzero operands"),
        });
    }
    affine.map(|a| BinaryDivisor {
        affine: a,
        at_infinity: at_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(field: FieldSpec, nvars: usize, terms: &[(&[u32], i64)]) -> HomPoly {
        let d = terms[0].0.iter().sum();
        HomPoly::new(
            field,
            nvars,
            d,
            terms.iter().map(|(e, c)| (e.to_vec(), field.from_i64(*c))),
        )
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let q = FieldSpec::rationals();
        let f = form(q, 2, &[(&[2, 1], 1)]);
        assert_eq!(f.eval(&[q.from_i64(2), q.from_i64(3)]).unwrap(), q.from_i64(12));
        let g = form(q, 2, &[(&[3, 0], 1), (&[0, 3], -1)]);
        assert!(g.eval(&[q.one(), q.one()]).unwrap().is_zero());
        let f5 = FieldSpec::prime(5).unwrap();
        let h = form(f5, 3, &[(&[1, 1, 1], 1)]);
        let pt = [f5.from_i64(2), f5.from_i64(3), f5.from_i64(4)];
        assert_eq!(h.eval(&pt).unwrap(), f5.from_i64(4));
        assert!(matches!(
            h.eval(&pt[..2]),
            Err(PolyError::ArityMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn derivatives() {
        let q = FieldSpec::rationals();
        let f = form(q, 2, &[(&[2, 1], 1)]);
        assert_eq!(f.partial_derivative(0).unwrap(), form(q, 2, &[(&[1, 1], 2)]));
        let f7 = FieldSpec::prime(7).unwrap();
        let g = form(f7, 2, &[(&[7, 0], 1)]);
        assert!(g.partial_derivative(0).unwrap().is_zero());
        let h = form(q, 2, &[(&[3, 0], 1)]);
        assert!(h.partial_derivative(1).unwrap().is_zero());
        assert!(h.partial_derivative(2).is_err());
    }

    #[test]
    fn non_homogeneous_rejected() {
        let q = FieldSpec::rationals();
        let r = HomPoly::new(q, 2, 2, [(vec![2, 0], q.one()), (vec![1, 0], q.one())]);
        assert_eq!(r, Err(PolyError::NotHomogeneous { expected: 2, found: 1 }));
    }

    #[test]
    fn linear_substitution() {
        let q = FieldSpec::rationals();
        let f = form(q, 2, &[(&[1, 1], 1)]);
        assert_eq!(f.substitute_linear(&Matrix::identity(q, 2)).unwrap(), f);
        let swap = Matrix::new(q, 2, vec![vec![q.zero(), q.one()], vec![q.one(), q.zero()]]);
        assert_eq!(f.substitute_linear(&swap).unwrap(), f);
        let sing = Matrix::new(q, 2, vec![vec![q.one(), q.one()], vec![q.one(), q.one()]]);
        assert_eq!(f.substitute_linear(&sing), Err(PolyError::SingularMatrix));
    }

    #[test]
    fn euler_relation() {
        let q = FieldSpec::rationals();
        let f = form(q, 3, &[(&[2, 1, 0], 3), (&[0, 1, 2], -5), (&[1, 1, 1], 7)]);
        assert!(f.euler_relation_holds());
        let f2 = FieldSpec::prime(2).unwrap();
        let g = form(f2, 2, &[(&[2, 0], 1), (&[1, 1], 1)]);
        assert!(g.euler_relation_holds());
    }

    #[test]
    fn divisor_of_twisted_cubic_coordinate_forms() {
        // gcd(s0²s1, s0s1²) = s0s1: roots [1:0] and [0:1]
        let q = FieldSpec::rationals();
        let a = form(q, 2, &[(&[2, 1], 1)]);
        let b = form(q, 2, &[(&[1, 2], 1)]);
        let d = binary_divisor(&[a, b]).unwrap();
        assert_eq!(d.at_infinity, 1);
        assert_eq!(d.distinct_points(), 2);
        assert!(d.is_squarefree());
        assert!(binary_divisor(&[HomPoly::zero(q, 2, 3)]).is_none());
    }
}
