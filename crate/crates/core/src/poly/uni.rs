use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::PolyError;
use crate::field::{FieldElem, FieldSpec};
use crate::linalg::Matrix;

/// Dense univariate polynomial, coefficients low to high, trailing zeros
/// trimmed. The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    field: FieldSpec,
    coeffs: Vec<FieldElem>,
}

impl UniPoly {
    pub fn new(field: FieldSpec, mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { field, coeffs }
    }

    pub fn from_i64s(field: FieldSpec, coeffs: &[i64]) -> Self {
        UniPoly::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: FieldSpec) -> Self {
        UniPoly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: FieldElem) -> Self {
        UniPoly::new(c.field(), vec![c])
    }

    pub fn one(field: FieldSpec) -> Self {
        UniPoly::constant(field.one())
    }

    /// The polynomial `s`.
    pub fn var(field: FieldSpec) -> Self {
        UniPoly::new(field, vec![field.zero(), field.one()])
    }

    /// `s - a`.
    pub fn linear_root(a: &FieldElem) -> Self {
        let f = a.field();
        UniPoly::new(f, vec![-a, f.one()])
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&FieldElem> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &FieldElem) -> UniPoly {
        UniPoly::new(self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> UniPoly {
        match self.leading() {
            None => self.clone(),
            Some(lc) => self.scale(&lc.inverse().expect("leading coefficient nonzero")),
        }
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(
            self.field,
            (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect(),
        )
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(
            self.field,
            (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect(),
        )
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UniPoly::new(self.field, out)
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        let mut acc = UniPoly::one(self.field);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    /// Formal derivative.
    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &self.field.from_i64(i as i64))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &UniPoly) -> Result<(UniPoly, UniPoly), PolyError> {
        let dd = d.degree().ok_or(PolyError::ZeroPolynomial)?;
        let lc_inv = d.leading().unwrap().inverse().expect("nonzero");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((UniPoly::zero(self.field), self.clone()));
        }
        let mut q = vec![self.field.zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&c * dc);
            }
            q[k] = c;
        }
        r.truncate(dd);
        Ok((UniPoly::new(self.field, q), UniPoly::new(self.field, r)))
    }

    /// Exact quotient; errors when `d` does not divide `self`.
    pub fn div_exact(&self, d: &UniPoly) -> Result<UniPoly, PolyError> {
        let (q, r) = self.div_rem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(PolyError::InexactDivision)
        }
    }

    /// Monic gcd. Over `Q` the remainder sequence runs on primitive integer
    /// polynomials to keep coefficients small.
    pub fn gcd(&self, other: &UniPoly) -> Result<UniPoly, PolyError> {
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::BothZero);
        }
        if self.is_zero() {
            return Ok(other.monic());
        }
        if other.is_zero() {
            return Ok(self.monic());
        }
        if self.field.is_rationals() {
            let a = IntPoly::primitive_of(self);
            let b = IntPoly::primitive_of(other);
            return Ok(a.gcd(&b).to_uni(self.field).monic());
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Product of the distinct monic irreducible factors.
    pub fn squarefree_part(&self) -> Result<UniPoly, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        if self.is_constant() {
            return Ok(UniPoly::one(self.field));
        }
        let d = self.derivative();
        if d.is_zero() {
            // f = g(s^p): over F_p the p-th root just compresses exponents.
            return self.pth_root().squarefree_part();
        }
        let g = self.gcd(&d)?;
        let w = self.div_exact(&g)?.monic();
        if self.field.is_rationals() {
            return Ok(w);
        }
        // Strip from g every factor with multiplicity prime to p; what remains
        // has multiplicities divisible by p and a vanishing derivative.
        let mut rest = g;
        loop {
            let y = rest.gcd(&w)?;
            if y.is_constant() {
                break;
            }
            rest = rest.div_exact(&y)?;
        }
        if rest.is_constant() {
            return Ok(w);
        }
        let tail = rest.pth_root().squarefree_part()?;
        Ok(w.mul(&tail).monic())
    }

    /// Number of distinct roots in the algebraic closure.
    pub fn distinct_root_count(&self) -> Result<usize, PolyError> {
        Ok(self.squarefree_part()?.degree().unwrap_or(0))
    }

    pub fn is_squarefree(&self) -> Result<bool, PolyError> {
        Ok(self.squarefree_part()?.degree() == self.degree())
    }

    fn pth_root(&self) -> UniPoly {
        let p = self.field.characteristic() as usize;
        assert!(p > 0, "p-th root in characteristic 0");
        UniPoly::new(
            self.field,
            self.coeffs.iter().step_by(p).cloned().collect(),
        )
    }

    /// Determinant of the Sylvester matrix.
    pub fn resultant(&self, other: &UniPoly) -> Result<FieldElem, PolyError> {
        let m = self.degree().ok_or(PolyError::ZeroPolynomial)?;
        let n = other.degree().ok_or(PolyError::ZeroPolynomial)?;
        if m == 0 && n == 0 {
            return Err(PolyError::BothConstant);
        }
        Ok(self.sylvester_matrix(other).determinant())
    }

    pub fn sylvester_matrix(&self, other: &UniPoly) -> Matrix {
        let m = self.degree().unwrap_or(0);
        let n = other.degree().unwrap_or(0);
        let size = m + n;
        let mut rows = Vec::with_capacity(size);
        let rev = |p: &UniPoly| p.coeffs.iter().rev().cloned().collect::<Vec<_>>();
        let (a, b) = (rev(self), rev(other));
        for i in 0..n {
            let mut row = vec![self.field.zero(); size];
            row[i..i + a.len()].clone_from_slice(&a);
            rows.push(row);
        }
        for i in 0..m {
            let mut row = vec![self.field.zero(); size];
            row[i..i + b.len()].clone_from_slice(&b);
            rows.push(row);
        }
        Matrix::new(self.field, size, rows)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{i}")?,
            }
        }
        Ok(())
    }
}

/// Integer polynomial used for the primitive remainder sequence over `Q`.
#[derive(Clone, Debug)]
struct IntPoly(Vec<BigInt>);

impl IntPoly {
    fn primitive_of(p: &UniPoly) -> IntPoly {
        let qs: Vec<&BigRational> = p.coeffs.iter().map(|c| c.as_rational().unwrap()).collect();
        let l = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let v = qs
            .iter()
            .map(|q| (q.numer() * &l) / q.denom())
            .collect::<Vec<_>>();
        IntPoly(v).primitive()
    }

    fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn primitive(mut self) -> IntPoly {
        while self.0.len() > 1 && self.0.last().unwrap().is_zero() {
            self.0.pop();
        }
        let g = self.0.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in self.0.iter_mut() {
                *c = &*c / &g;
            }
        }
        if self.0.last().is_some_and(|c| c.is_negative()) {
            for c in self.0.iter_mut() {
                *c = -&*c;
            }
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    /// lc(b)^(deg a - deg b + 1) · a mod b.
    fn prem(&self, b: &IntPoly) -> IntPoly {
        let mut r = self.0.clone();
        let db = b.degree();
        let lb = b.0[db].clone();
        if r.len() <= db {
            return IntPoly(r);
        }
        let steps = r.len() - db;
        for k in (0..steps).rev() {
            let lead = r[k + db].clone();
            for c in r.iter_mut() {
                *c = &*c * &lb;
            }
            if !lead.is_zero() {
                for (j, bc) in b.0.iter().enumerate() {
                    r[k + j] = &r[k + j] - &lead * bc;
                }
            }
        }
        r.truncate(db.max(1));
        if db == 0 {
            r = vec![BigInt::zero()];
        }
        IntPoly(r)
    }

    fn gcd(&self, other: &IntPoly) -> IntPoly {
        let (mut a, mut b) = if self.degree() >= other.degree() {
            (self.clone(), other.clone())
        } else {
            (other.clone(), self.clone())
        };
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = if r.is_zero() { r } else { r.primitive() };
        }
        a.primitive()
    }

    fn to_uni(&self, field: FieldSpec) -> UniPoly {
        UniPoly::new(field, self.0.iter().map(|c| field.from_bigint(c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn up(c: &[i64]) -> UniPoly {
        UniPoly::from_i64s(q(), c)
    }

    #[test]
    fn gcd_examples() {
        // s²−1, s²−2s+1 → s−1
        assert_eq!(up(&[-1, 0, 1]).gcd(&up(&[1, -2, 1])).unwrap(), up(&[-1, 1]));
        let f = up(&[2, 0, 4]);
        assert_eq!(f.gcd(&UniPoly::zero(q())).unwrap(), f.monic());
        // (s−1)(s−2), s−3 → 1
        assert_eq!(up(&[2, -3, 1]).gcd(&up(&[-3, 1])).unwrap(), up(&[1]));
        assert_eq!(
            UniPoly::zero(q()).gcd(&UniPoly::zero(q())),
            Err(PolyError::BothZero)
        );
    }

    #[test]
    fn gcd_over_prime_field() {
        let f7 = FieldSpec::prime(7).unwrap();
        let a = UniPoly::from_i64s(f7, &[-1, 0, 1]);
        let b = UniPoly::from_i64s(f7, &[1, -2, 1]);
        assert_eq!(a.gcd(&b).unwrap(), UniPoly::from_i64s(f7, &[-1, 1]));
    }

    #[test]
    fn squarefree_examples() {
        // s²(s−1) → s(s−1)
        assert_eq!(up(&[0, 0, -1, 1]).squarefree_part().unwrap(), up(&[0, -1, 1]));
        let f5 = FieldSpec::prime(5).unwrap();
        let s5 = UniPoly::var(f5).pow(5);
        assert_eq!(s5.squarefree_part().unwrap(), UniPoly::var(f5));
        let sf = up(&[6, -5, 1]);
        assert_eq!(sf.squarefree_part().unwrap(), sf);
        assert_eq!(
            UniPoly::zero(q()).squarefree_part(),
            Err(PolyError::ZeroPolynomial)
        );
    }

    #[test]
    fn squarefree_mixed_multiplicities_char_p() {
        // (s−1)^5 (s−2)^2 (s−3) over F_5: radical (s−1)(s−2)(s−3)
        let f5 = FieldSpec::prime(5).unwrap();
        let lin = |a| UniPoly::linear_root(&f5.from_i64(a));
        let f = lin(1).pow(5).mul(&lin(2).pow(2)).mul(&lin(3));
        let expect = lin(1).mul(&lin(2)).mul(&lin(3));
        assert_eq!(f.squarefree_part().unwrap(), expect);
        // (s−1)^10 (s²+2)^5: radical of degree 3
        let g = lin(1).pow(10).mul(&UniPoly::from_i64s(f5, &[2, 0, 1]).pow(5));
        assert_eq!(g.distinct_root_count().unwrap(), 3);
    }

    #[test]
    fn distinct_roots() {
        assert_eq!(up(&[0, 0, -1, 1]).distinct_root_count().unwrap(), 2);
        assert_eq!(up(&[1, 0, 1]).distinct_root_count().unwrap(), 2);
        assert_eq!(up(&[7]).distinct_root_count().unwrap(), 0);
    }

    #[test]
    fn resultant_examples() {
        assert_eq!(up(&[-1, 1]).resultant(&up(&[1, 1])).unwrap(), q().from_i64(2));
        assert!(up(&[2, -3, 1]).resultant(&up(&[-1, 1])).unwrap().is_zero());
        // Res((s−2)(s−3), s−5): brute-force cofactor expansion of the 3×3 Sylvester matrix
        let s = up(&[6, -5, 1]).sylvester_matrix(&up(&[-5, 1]));
        assert_eq!(cofactor_det(s.rows()), q().from_i64(6));
        assert_eq!(up(&[6, -5, 1]).resultant(&up(&[-5, 1])).unwrap(), q().from_i64(6));
        assert_eq!(up(&[3]).resultant(&up(&[4])), Err(PolyError::BothConstant));
    }

    fn cofactor_det(m: &[Vec<FieldElem>]) -> FieldElem {
        let n = m.len();
        let field = m[0][0].field();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = field.zero();
        for j in 0..n {
            let minor: Vec<Vec<FieldElem>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &m[0][j] * &cofactor_det(&minor);
            acc = if j % 2 == 0 { acc + term } else { acc - term };
        }
        acc
    }

    #[test]
    fn division_round_trip() {
        let a = up(&[5, -3, 0, 2, 1]);
        let b = up(&[1, 2]);
        let (qq, r) = a.div_rem(&b).unwrap();
        assert_eq!(qq.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 1);
    }
}
