use std::collections::BTreeMap;
use std::fmt;

use super::{PolyError, UniPoly};
use crate::field::{FieldElem, FieldSpec};
use crate::linalg::Matrix;

/// Sparse polynomial in the affine variables `(s, t)`. Keys are exponent
/// pairs `(deg_s, deg_t)`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiPoly {
    field: FieldSpec,
    terms: BTreeMap<(u32, u32), FieldElem>,
}

impl BiPoly {
    pub fn zero(field: FieldSpec) -> Self {
        BiPoly {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FieldElem) -> Self {
        BiPoly::from_terms(c.field(), [((0, 0), c)])
    }

    pub fn s(field: FieldSpec) -> Self {
        BiPoly::from_terms(field, [((1, 0), field.one())])
    }

    pub fn t(field: FieldSpec) -> Self {
        BiPoly::from_terms(field, [((0, 1), field.one())])
    }

    pub fn from_terms(
        field: FieldSpec,
        terms: impl IntoIterator<Item = ((u32, u32), FieldElem)>,
    ) -> Self {
        let mut out = BiPoly::zero(field);
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn from_i64_terms(field: FieldSpec, terms: &[((u32, u32), i64)]) -> Self {
        BiPoly::from_terms(field, terms.iter().map(|&(e, c)| (e, field.from_i64(c))))
    }

    /// `q(s)` viewed as a bivariate polynomial.
    pub fn from_uni_s(q: &UniPoly) -> Self {
        BiPoly::from_terms(
            q.field(),
            q.coeffs().iter().enumerate().map(|(i, c)| ((i as u32, 0), c.clone())),
        )
    }

    /// `q(t)` viewed as a bivariate polynomial.
    pub fn from_uni_t(q: &UniPoly) -> Self {
        BiPoly::from_terms(
            q.field(),
            q.coeffs().iter().enumerate().map(|(i, c)| ((0, i as u32), c.clone())),
        )
    }

    /// `q(a·s + b·t)`.
    pub fn from_uni_linear(q: &UniPoly, a: &FieldElem, b: &FieldElem) -> Self {
        let f = q.field();
        let lin = BiPoly::from_terms(f, [((1, 0), a.clone()), ((0, 1), b.clone())]);
        let mut acc = BiPoly::zero(f);
        let mut power = BiPoly::constant(f.one());
        for c in q.coeffs() {
            acc = acc.add(&power.scale(c));
            power = power.mul(&lin);
        }
        acc
    }

    fn add_term(&mut self, e: (u32, u32), c: FieldElem) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &FieldElem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == (0, 0))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn degree_s(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.0).max()
    }

    pub fn degree_t(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.1).max()
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c);
        }
        out
    }

    pub fn scale(&self, c: &FieldElem) -> BiPoly {
        BiPoly::from_terms(self.field, self.terms.iter().map(|(e, a)| (*e, a * c)))
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero(self.field);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> BiPoly {
        let mut acc = BiPoly::constant(self.field.one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, s: &FieldElem, t: &FieldElem) -> FieldElem {
        self.terms.iter().fold(self.field.zero(), |acc, ((a, b), c)| {
            acc + &(c * &(s.pow(*a as u64) * t.pow(*b as u64)))
        })
    }

    /// Affine linear change of variables: `s ↦ m00·s + m01·t`,
    /// `t ↦ m10·s + m11·t`.
    pub fn substitute_linear(&self, m: &Matrix) -> Result<BiPoly, PolyError> {
        if m.nrows() != 2 || m.ncols() != 2 || !m.is_invertible() {
            return Err(PolyError::SingularMatrix);
        }
        let f = self.field;
        let s_img = BiPoly::from_terms(f, [((1, 0), m.get(0, 0).clone()), ((0, 1), m.get(0, 1).clone())]);
        let t_img = BiPoly::from_terms(f, [((1, 0), m.get(1, 0).clone()), ((0, 1), m.get(1, 1).clone())]);
        let max_s = self.degree_s().unwrap_or(0);
        let max_t = self.degree_t().unwrap_or(0);
        let s_pows = powers(&s_img, max_s);
        let t_pows = powers(&t_img, max_t);
        let mut out = BiPoly::zero(f);
        for ((a, b), c) in &self.terms {
            out = out.add(&s_pows[*a as usize].mul(&t_pows[*b as usize]).scale(c));
        }
        Ok(out)
    }

    /// `f(s - λt, t)`: in the new coordinates `s` stands for `s + λt`.
    pub fn shear(&self, lambda: &FieldElem) -> BiPoly {
        let f = self.field;
        let m = Matrix::new(
            f,
            2,
            vec![vec![f.one(), -lambda], vec![f.zero(), f.one()]],
        );
        self.substitute_linear(&m).expect("shear is invertible")
    }

    /// The polynomial as a univariate in `s`, if `t` does not occur.
    pub fn as_uni_s(&self) -> Option<UniPoly> {
        if self.terms.keys().any(|e| e.1 > 0) {
            return None;
        }
        let n = self.degree_s().map_or(0, |d| d as usize + 1);
        let mut c = vec![self.field.zero(); n];
        for ((a, _), v) in &self.terms {
            c[*a as usize] = v.clone();
        }
        Some(UniPoly::new(self.field, c))
    }

    /// The polynomial as a univariate in `t`, if `s` does not occur.
    pub fn as_uni_t(&self) -> Option<UniPoly> {
        self.swap_vars().as_uni_s()
    }

    pub fn swap_vars(&self) -> BiPoly {
        BiPoly::from_terms(self.field, self.terms.iter().map(|((a, b), c)| ((*b, *a), c.clone())))
    }

    /// Coefficients in `k[s]` of the powers of `t`.
    fn t_coeffs(&self) -> Vec<UniPoly> {
        let n = self.degree_t().map_or(0, |d| d as usize + 1);
        let ds = self.degree_s().map_or(0, |d| d as usize + 1);
        let mut raw = vec![vec![self.field.zero(); ds]; n];
        for ((a, b), c) in &self.terms {
            raw[*b as usize][*a as usize] = c.clone();
        }
        raw.into_iter().map(|v| UniPoly::new(self.field, v)).collect()
    }

    fn from_t_coeffs(field: FieldSpec, coeffs: &[UniPoly]) -> BiPoly {
        let mut out = BiPoly::zero(field);
        for (j, u) in coeffs.iter().enumerate() {
            for (i, c) in u.coeffs().iter().enumerate() {
                out.add_term((i as u32, j as u32), c.clone());
            }
        }
        out
    }

    /// Greatest common divisor in `k[s, t]`, normalized so the leading
    /// coefficient (lex, `t > s`) is 1. Computed as content times the
    /// primitive remainder sequence in `k[s][t]`.
    pub fn gcd(&self, other: &BiPoly) -> Result<BiPoly, PolyError> {
        if self.is_zero() && other.is_zero() {
            return Err(PolyError::BothZero);
        }
        if self.is_zero() {
            return Ok(other.normalized());
        }
        if other.is_zero() {
            return Ok(self.normalized());
        }
        let f = self.field;
        let (fa, fb) = (self.t_coeffs(), other.t_coeffs());
        let ca = content(&fa)?;
        let cb = content(&fb)?;
        let c = ca.gcd(&cb)?;
        let mut a = divide_coeffs(&fa, &ca)?;
        let mut b = divide_coeffs(&fb, &cb)?;
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        let pp = loop {
            if b.len() == 1 {
                // b is a nonzero element of k[s] with trivial content: a unit.
                break vec![UniPoly::one(f)];
            }
            let r = pseudo_remainder(&a, &b);
            if r.is_empty() {
                break b;
            }
            let cr = content(&r)?;
            a = b;
            b = divide_coeffs(&r, &cr)?;
        };
        let g: Vec<UniPoly> = pp.iter().map(|u| u.mul(&c)).collect();
        Ok(BiPoly::from_t_coeffs(f, &g).normalized())
    }

    /// Gcd of a list; `None` when every member is zero.
    pub fn gcd_all(polys: &[BiPoly]) -> Option<BiPoly> {
        let mut acc: Option<BiPoly> = None;
        for p in polys.iter().filter(|p| !p.is_zero()) {
            acc = Some(match acc {
                None => p.normalized(),
                Some(g) => g.gcd(p).expect("nonzero operand"),
            });
            if acc.as_ref().is_some_and(|g| g.is_constant()) {
                break;
            }
        }
        acc
    }

    /// Scales so the lex-leading coefficient (`t > s`) is 1.
    pub fn normalized(&self) -> BiPoly {
        match self.terms.iter().max_by_key(|((a, b), _)| (*b, *a)) {
            None => self.clone(),
            Some((_, lc)) => self.scale(&lc.inverse().expect("nonzero")),
        }
    }

    /// Over `Q`, the positive multiple with coprime integer coefficients.
    pub fn primitive(&self) -> BiPoly {
        let (keys, vals): (Vec<(u32, u32)>, Vec<FieldElem>) =
            self.terms.iter().map(|(k, v)| (*k, v.clone())).unzip();
        BiPoly::from_terms(self.field, keys.into_iter().zip(crate::field::primitive_integer_vector(&vals)))
    }

    /// Exact quotient in `k[s, t]`.
    pub fn div_exact(&self, d: &BiPoly) -> Result<BiPoly, PolyError> {
        if d.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let dc = d.t_coeffs();
        let mut r = self.t_coeffs();
        let dd = dc.len() - 1;
        let lead = &dc[dd];
        if r.len() < dc.len() {
            return if r.is_empty() {
                Ok(BiPoly::zero(self.field))
            } else {
                Err(PolyError::InexactDivision)
            };
        }
        let mut q = vec![UniPoly::zero(self.field); r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = &r[k + dd];
            if top.is_zero() {
                continue;
            }
            let c = top.div_exact(lead)?;
            for (j, dj) in dc.iter().enumerate() {
                r[k + j] = r[k + j].sub(&c.mul(dj));
            }
            q[k] = c;
        }
        if r.iter().any(|u| !u.is_zero()) {
            return Err(PolyError::InexactDivision);
        }
        Ok(BiPoly::from_t_coeffs(self.field, &q))
    }
}

fn powers(p: &BiPoly, max: u32) -> Vec<BiPoly> {
    let mut v = vec![BiPoly::constant(p.field.one())];
    for _ in 0..max {
        let next = v.last().unwrap().mul(p);
        v.push(next);
    }
    v
}

fn content(coeffs: &[UniPoly]) -> Result<UniPoly, PolyError> {
    let mut g = UniPoly::zero(coeffs[0].field());
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = if g.is_zero() { c.monic() } else { g.gcd(c)? };
        if g.is_constant() {
            break;
        }
    }
    if g.is_zero() {
        Err(PolyError::ZeroPolynomial)
    } else {
        Ok(g)
    }
}

fn divide_coeffs(coeffs: &[UniPoly], c: &UniPoly) -> Result<Vec<UniPoly>, PolyError> {
    let mut out = coeffs
        .iter()
        .map(|u| u.div_exact(c))
        .collect::<Result<Vec<_>, _>>()?;
    while out.last().is_some_and(|u| u.is_zero()) {
        out.pop();
    }
    Ok(out)
}

/// Pseudo-remainder of `a` by `b` as polynomials in `t` over `k[s]`;
/// trailing zero coefficients trimmed (empty means zero).
fn pseudo_remainder(a: &[UniPoly], b: &[UniPoly]) -> Vec<UniPoly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Vec<UniPoly> = a.to_vec();
    while r.len() > db {
        let k = r.len() - 1 - db;
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (j, bj) in b.iter().enumerate() {
            r[k + j] = r[k + j].sub(&lr.mul(bj));
        }
        while r.last().is_some_and(|u| u.is_zero()) {
            r.pop();
        }
    }
    r
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, ((a, b), c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            match a {
                0 => {}
                1 => write!(f, "*s")?,
                _ => write!(f, "*s^{a}")?,
            }
            match b {
                0 => {}
                1 => write!(f, "*t")?,
                _ => write!(f, "*t^{b}")?,
            }
        }
        Ok(())
    }
}
