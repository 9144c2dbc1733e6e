//! Zero-dimensional systems in two affine variables `(s, t)`.
//!
//! A degree-order Gröbner basis gives the quotient ring, and eliminants are
//! minimal polynomials of multiplication maps on it. Distinct closure
//! solutions are counted exactly as the dimension of the quotient by
//! `I + (sqf e_s(s), sqf e_t(t))`, which is radical over any perfect field.
//! Random shears `u = s + λt` give an independent count that certifies it.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{random_nonzero, FieldElem, FieldSpec};
use crate::poly::{BiPoly, PolyError, UniPoly};

/// Shear retries after the first two trials.
pub const DEFAULT_SHEAR_RETRIES: usize = 4;
const SHEAR_BOX: i64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BivarError {
    #[error("a system needs at least 2 generators, got {0}")]
    TooFewGenerators(usize),
    #[error("system has no eliminant in {0}: not zero-dimensional")]
    NotZeroDimensional(Var),
    #[error("shear counts {counts:?} never confirmed the exact count {exact}")]
    ShearDisagreement { exact: usize, counts: Vec<usize> },
    #[error("solution set has a curve component outside the coincidence locus")]
    PositiveDimensional,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Var {
    S,
    T,
}

impl std::fmt::Display for Var {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Var::S => "s",
            Var::T => "t",
        })
    }
}

/// Which variable is eliminated first. `TOverS` yields the `s`-eliminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexOrder {
    TOverS,
    SOverT,
}

impl LexOrder {
    fn major(self) -> Var {
        match self {
            LexOrder::TOverS => Var::T,
            LexOrder::SOverT => Var::S,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Collinearity,
    Slice,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarSystem {
    gens: Vec<BiPoly>,
    provenance: Provenance,
    field: FieldSpec,
}

impl BivarSystem {
    pub fn new(gens: Vec<BiPoly>, provenance: Provenance) -> Result<Self, BivarError> {
        if gens.len() < 2 {
            return Err(BivarError::TooFewGenerators(gens.len()));
        }
        let field = gens[0].field();
        Ok(BivarSystem {
            gens,
            provenance,
            field,
        })
    }

    pub fn generators(&self) -> &[BiPoly] {
        &self.gens
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    fn with(&self, extra: impl IntoIterator<Item = BiPoly>) -> BivarSystem {
        let mut gens = self.gens.clone();
        gens.extend(extra);
        BivarSystem {
            gens,
            provenance: self.provenance,
            field: self.field,
        }
    }

    #[cfg(test)]
    fn sheared(&self, lambda: &FieldElem) -> BivarSystem {
        BivarSystem {
            gens: self.gens.iter().map(|g| g.shear(lambda)).collect(),
            provenance: self.provenance,
            field: self.field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionCount {
    /// Distinct solutions over the algebraic closure.
    pub p: usize,
    /// Distinct `s`-coordinates.
    pub s: usize,
    /// Distinct `t`-coordinates.
    pub t: usize,
    /// Shear parameters tried, with the count each produced.
    pub shears: Vec<(String, usize)>,
    pub certified: bool,
}

// Monomial keys. Under `Lex` a key is the (major, minor) exponent pair;
// under `Graded` it is (total degree, s-exponent), a degree order with
// s > t. Both encodings are linear, so adding keys multiplies monomials,
// and the leading term is always the largest key.
type Key = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MonOrder {
    Lex,
    Graded,
}

impl MonOrder {
    fn exps(self, k: Key) -> (u32, u32) {
        match self {
            MonOrder::Lex => k,
            MonOrder::Graded => (k.1, k.0 - k.1),
        }
    }

    fn key(self, e: (u32, u32)) -> Key {
        match self {
            MonOrder::Lex => e,
            MonOrder::Graded => (e.0 + e.1, e.0),
        }
    }

    fn divides(self, a: Key, b: Key) -> bool {
        let (a, b) = (self.exps(a), self.exps(b));
        a.0 <= b.0 && a.1 <= b.1
    }

    fn lcm(self, a: Key, b: Key) -> Key {
        let (a, b) = (self.exps(a), self.exps(b));
        self.key((a.0.max(b.0), a.1.max(b.1)))
    }

    fn coprime(self, a: Key, b: Key) -> bool {
        let (a, b) = (self.exps(a), self.exps(b));
        a.0.min(b.0) == 0 && a.1.min(b.1) == 0
    }
}

#[derive(Clone, Debug)]
struct MPoly {
    terms: BTreeMap<Key, FieldElem>,
    ord: MonOrder,
}

impl MPoly {
    fn zero(ord: MonOrder) -> Self {
        MPoly {
            terms: BTreeMap::new(),
            ord,
        }
    }

    /// Lex keys put `major` first; graded keys ignore it.
    fn from_bi(p: &BiPoly, ord: MonOrder, major: Var) -> Self {
        let terms = p
            .terms()
            .map(|(&(a, b), c)| {
                let k = match (ord, major) {
                    (MonOrder::Lex, Var::T) => (b, a),
                    (MonOrder::Lex, Var::S) => (a, b),
                    (MonOrder::Graded, _) => ord.key((a, b)),
                };
                (k, c.clone())
            })
            .collect();
        MPoly { terms, ord }
    }

    fn to_bi(&self, field: FieldSpec, major: Var) -> BiPoly {
        BiPoly::from_terms(
            field,
            self.terms.iter().map(|(&k, c)| {
                let e = match (self.ord, major) {
                    (MonOrder::Lex, Var::T) => (k.1, k.0),
                    (MonOrder::Lex, Var::S) => k,
                    (MonOrder::Graded, _) => self.ord.exps(k),
                };
                (e, c.clone())
            }),
        )
    }

    fn lm(&self) -> Key {
        *self.terms.keys().next_back().expect("nonzero")
    }

    fn lc(&self) -> &FieldElem {
        self.terms.values().next_back().expect("nonzero")
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn monic(mut self) -> Self {
        let inv = self.lc().inverse().expect("nonzero");
        for c in self.terms.values_mut() {
            *c = &*c * &inv;
        }
        self
    }

    /// `self -= c · x^shift · g`
    fn sub_mul(&mut self, c: &FieldElem, shift: Key, g: &MPoly) {
        for (&(a, b), gc) in &g.terms {
            let k = (a + shift.0, b + shift.1);
            let v = c * gc;
            match self.terms.get_mut(&k) {
                Some(x) => {
                    *x = &*x - &v;
                    if x.is_zero() {
                        self.terms.remove(&k);
                    }
                }
                None => {
                    self.terms.insert(k, -v);
                }
            }
        }
    }
}

/// Full reduction of `f` by monic `basis`.
fn reduce(mut f: MPoly, basis: &[MPoly]) -> MPoly {
    let ord = f.ord;
    let mut rem = MPoly::zero(ord);
    while let Some((&k, c)) = f.terms.iter().next_back() {
        let c = c.clone();
        match basis.iter().find(|g| ord.divides(g.lm(), k)) {
            Some(g) => {
                let lm = g.lm();
                f.sub_mul(&c, (k.0 - lm.0, k.1 - lm.1), g);
            }
            None => {
                f.terms.remove(&k);
                rem.terms.insert(k, c);
            }
        }
    }
    rem
}

fn s_poly(f: &MPoly, g: &MPoly) -> MPoly {
    let ord = f.ord;
    let (a, b) = (f.lm(), g.lm());
    let l = ord.lcm(a, b);
    let mut out = MPoly::zero(ord);
    let one = f.lc().field().one();
    out.sub_mul(&-&one, (l.0 - a.0, l.1 - a.1), f);
    out.sub_mul(&one, (l.0 - b.0, l.1 - b.1), g);
    out
}

/// Reduced monic Gröbner basis, sorted by increasing leading monomial.
fn buchberger(gens: Vec<MPoly>) -> Vec<MPoly> {
    let Some(ord) = gens.first().map(|g| g.ord) else {
        return Vec::new();
    };
    let mut basis: Vec<MPoly> = Vec::new();
    for g in gens {
        let r = reduce(g, &basis);
        if !r.is_zero() {
            basis.push(r.monic());
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    while !pairs.is_empty() {
        // normal strategy: smallest lcm first
        let idx = (0..pairs.len())
            .min_by_key(|&k| {
                let (i, j) = pairs[k];
                ord.lcm(basis[i].lm(), basis[j].lm())
            })
            .expect("nonempty");
        let (i, j) = pairs.swap_remove(idx);
        done.insert((i, j));
        let (a, b) = (basis[i].lm(), basis[j].lm());
        if ord.coprime(a, b) {
            continue;
        }
        // chain criterion
        let l = ord.lcm(a, b);
        let key = |x: usize, y: usize| (x.min(y), x.max(y));
        let chained = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && ord.divides(basis[k].lm(), l)
                && done.contains(&key(i, k))
                && done.contains(&key(j, k))
        });
        if chained {
            continue;
        }
        let r = reduce(s_poly(&basis[i], &basis[j]), &basis);
        if r.is_zero() {
            continue;
        }
        let n = basis.len();
        basis.push(r.monic());
        if basis[n].lm() == (0, 0) {
            return vec![basis.pop().unwrap()];
        }
        for k in 0..n {
            pairs.push((k, n));
        }
    }
    interreduce(basis)
}

fn interreduce(basis: Vec<MPoly>) -> Vec<MPoly> {
    let Some(ord) = basis.first().map(|g| g.ord) else {
        return basis;
    };
    let mut minimal: Vec<MPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis
            .iter()
            .enumerate()
            .any(|(j, h)| j != i && ord.divides(h.lm(), g.lm()) && (h.lm() != g.lm() || j < i));
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut out: Vec<MPoly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<MPoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g.clone())
            .collect();
        // the leading term is irreducible in a minimal basis
        out.push(reduce(minimal[i].clone(), &others));
    }
    out.sort_by_key(|g| g.lm());
    out
}

fn nonzero_gens(sys: &BivarSystem, ord: MonOrder, major: Var) -> Vec<MPoly> {
    sys.gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| MPoly::from_bi(g, ord, major))
        .collect()
}

/// Reduced lex Gröbner basis, sorted by increasing leading monomial.
/// Fails when neither variable has an eliminant.
pub fn lex_groebner_2var(sys: &BivarSystem, order: LexOrder) -> Result<Vec<BiPoly>, BivarError> {
    let major = order.major();
    let gb = buchberger(nonzero_gens(sys, MonOrder::Lex, major));
    let has_pure = |pick_major: bool| {
        gb.iter().any(|g| {
            let lm = g.lm();
            if pick_major {
                lm.1 == 0
            } else {
                lm.0 == 0
            }
        })
    };
    if gb.is_empty() || !(has_pure(true) || has_pure(false)) {
        return Err(BivarError::NotZeroDimensional(if major == Var::T {
            Var::S
        } else {
            Var::T
        }));
    }
    Ok(gb.iter().map(|g| g.to_bi(sys.field, major)).collect())
}

/// Whether the system has no solution over the algebraic closure.
pub fn is_inconsistent(sys: &BivarSystem) -> bool {
    let gb = buchberger(nonzero_gens(sys, MonOrder::Graded, Var::S));
    gb.len() == 1 && gb[0].lm() == (0, 0)
}

/// The quotient ring `k[s, t]/I` of a zero-dimensional ideal, with the
/// matrices of multiplication by `s` and by `t` on its standard monomials.
///
/// One degree-order Gröbner basis serves every eliminant: `I ∩ k[u]` for a
/// linear form `u` is the annihilator of `1` under multiplication by `u`.
struct Quotient {
    field: FieldSpec,
    /// `mul[0][k]`, `mul[1][k]`: coordinates of `s·b_k` and `t·b_k`.
    mul: [Vec<Vec<FieldElem>>; 2],
    one: Option<usize>,
}

impl Quotient {
    fn new(sys: &BivarSystem) -> Result<Self, BivarError> {
        let ord = MonOrder::Graded;
        let field = sys.field;
        let gb = buchberger(nonzero_gens(sys, ord, Var::S));
        if gb.is_empty() {
            return Err(BivarError::NotZeroDimensional(Var::S));
        }
        if gb[0].lm() == (0, 0) {
            return Ok(Quotient {
                field,
                mul: [Vec::new(), Vec::new()],
                one: None,
            });
        }
        let pure = |want_s: bool| {
            gb.iter()
                .map(|g| ord.exps(g.lm()))
                .filter(|e| if want_s { e.1 == 0 } else { e.0 == 0 })
                .map(|e| if want_s { e.0 } else { e.1 })
                .min()
        };
        let a = pure(true).ok_or(BivarError::NotZeroDimensional(Var::S))?;
        let b = pure(false).ok_or(BivarError::NotZeroDimensional(Var::T))?;
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut monomials = Vec::new();
        for i in 0..a {
            for j in 0..b {
                let k = ord.key((i, j));
                if !gb.iter().any(|g| ord.divides(g.lm(), k)) {
                    index.insert(k, monomials.len());
                    monomials.push((i, j));
                }
            }
        }
        let coords = |e: (u32, u32)| {
            let mut m = MPoly::zero(ord);
            m.terms.insert(ord.key(e), field.one());
            let r = reduce(m, &gb);
            let mut v = vec![field.zero(); monomials.len()];
            for (k, c) in r.terms {
                v[index[&k]] = c;
            }
            v
        };
        let mul = [
            monomials.iter().map(|&(i, j)| coords((i + 1, j))).collect(),
            monomials.iter().map(|&(i, j)| coords((i, j + 1))).collect(),
        ];
        Ok(Quotient {
            field,
            mul,
            one: index.get(&(0, 0)).copied(),
        })
    }

    fn dim(&self) -> usize {
        self.mul[0].len()
    }

    /// Coordinates of `(a·s + b·t)·v`.
    fn apply(&self, v: &[FieldElem], a: &FieldElem, b: &FieldElem) -> Vec<FieldElem> {
        let mut out = vec![self.field.zero(); self.dim()];
        for (k, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (ca, cb) = (c * a, c * b);
            for (i, o) in out.iter_mut().enumerate() {
                *o = &(&*o + &(&ca * &self.mul[0][k][i])) + &(&cb * &self.mul[1][k][i]);
            }
        }
        out
    }

    /// Monic generator of `I ∩ k[u]` for `u = a·s + b·t`, in the variable `u`.
    fn min_poly(&self, a: &FieldElem, b: &FieldElem) -> UniPoly {
        let f = self.field;
        let n = self.dim();
        let Some(one) = self.one else {
            return UniPoly::one(f);
        };
        let mut v = vec![f.zero(); n];
        v[one] = f.one();
        // rows (pivot, reduced power, combination of powers that gives it)
        let mut rows: Vec<(usize, Vec<FieldElem>, Vec<FieldElem>)> = Vec::new();
        for k in 0..=n {
            let mut w = v.clone();
            let mut comb = vec![f.zero(); k + 1];
            comb[k] = f.one();
            for (p, rv, rc) in &rows {
                if w[*p].is_zero() {
                    continue;
                }
                let c = w[*p].clone();
                for (x, y) in w.iter_mut().zip(rv) {
                    *x = &*x - &(&c * y);
                }
                for (x, y) in comb.iter_mut().zip(rc) {
                    *x = &*x - &(&c * y);
                }
            }
            let Some(p) = w.iter().position(|x| !x.is_zero()) else {
                return UniPoly::new(f, comb).monic();
            };
            let inv = w[p].inverse().expect("nonzero pivot");
            for x in w.iter_mut().chain(comb.iter_mut()) {
                *x = &*x * &inv;
            }
            rows.push((p, w, comb));
            v = self.apply(&v, a, b);
        }
        unreachable!("more than dim powers are always dependent")
    }

    fn eliminant(&self, keep: Var) -> UniPoly {
        let (one, zero) = (self.field.one(), self.field.zero());
        match keep {
            Var::S => self.min_poly(&one, &zero),
            Var::T => self.min_poly(&zero, &one),
        }
    }

    /// Distinct values of `s + λt` on the solutions.
    fn shear_count(&self, lambda: &FieldElem) -> Result<usize, BivarError> {
        Ok(self.min_poly(&self.field.one(), lambda).distinct_root_count()?)
    }
}

/// Monic generator of the ideal intersected with `k[keep]`; `1` for the
/// empty solution set. Needs a zero-dimensional system.
pub fn eliminant(sys: &BivarSystem, keep: Var) -> Result<UniPoly, BivarError> {
    Ok(Quotient::new(sys)?.eliminant(keep))
}

/// Squarefree eliminants `(e_s, e_t)`.
pub fn radical_eliminants(sys: &BivarSystem) -> Result<(UniPoly, UniPoly), BivarError> {
    let q = Quotient::new(sys)?;
    Ok((q.eliminant(Var::S).squarefree_part()?, q.eliminant(Var::T).squarefree_part()?))
}

/// Exact distinct-solution count with the squarefree eliminants and the
/// quotient it came from.
struct Exact {
    p: usize,
    es: UniPoly,
    et: UniPoly,
    quotient: Quotient,
}

fn exact_count(sys: &BivarSystem) -> Result<Exact, BivarError> {
    let quotient = Quotient::new(sys)?;
    let es = quotient.eliminant(Var::S).squarefree_part()?;
    let et = quotient.eliminant(Var::T).squarefree_part()?;
    let spread = es.degree().unwrap_or(0).max(et.degree().unwrap_or(0));
    // at most dim points, at least as many as distinct coordinates
    let p = if spread == quotient.dim() {
        spread
    } else {
        Quotient::new(&sys.with([BiPoly::from_uni_s(&es), BiPoly::from_uni_t(&et)]))?.dim()
    };
    Ok(Exact { p, es, et, quotient })
}

fn draw_shear<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R, used: &[FieldElem]) -> Option<FieldElem> {
    if let Some(p) = field.modulus() {
        if used.len() as u64 + 1 >= p {
            return None;
        }
    }
    loop {
        let l = random_nonzero(field, rng, SHEAR_BOX);
        if !used.contains(&l) {
            return Some(l);
        }
    }
}

/// Counts distinct solutions `P`, distinct `s`-values `S` and distinct
/// `t`-values `T`. `P` is exact; it is certified when two independent
/// shears reproduce it. Over `Q` a failure to certify is an error; over a
/// small prime field the shears may be unable to separate closure points,
/// so the count is returned uncertified.
pub fn count_solutions<R: Rng + ?Sized>(
    sys: &BivarSystem,
    rng: &mut R,
) -> Result<SolutionCount, BivarError> {
    count_solutions_with(sys, rng, DEFAULT_SHEAR_RETRIES)
}

pub fn count_solutions_with<R: Rng + ?Sized>(
    sys: &BivarSystem,
    rng: &mut R,
    retries: usize,
) -> Result<SolutionCount, BivarError> {
    certify_count(sys.field, &exact_count(sys)?, rng, retries)
}

/// Shear certification of an already computed exact count.
fn certify_count<R: Rng + ?Sized>(
    field: FieldSpec,
    exact: &Exact,
    rng: &mut R,
    retries: usize,
) -> Result<SolutionCount, BivarError> {
    let p = exact.p;
    let s = exact.es.distinct_root_count()?;
    let t = exact.et.distinct_root_count()?;
    let mut used = Vec::new();
    let mut shears = Vec::new();
    let mut hits = 0;
    for _ in 0..2 + retries {
        let Some(l) = draw_shear(field, rng, &used) else {
            break;
        };
        let c = exact.quotient.shear_count(&l)?;
        shears.push((l.to_string(), c));
        used.push(l);
        if c == p {
            hits += 1;
            if hits == 2 {
                break;
            }
        }
    }
    let certified = hits >= 2;
    if !certified && field.is_rationals() {
        return Err(BivarError::ShearDisagreement {
            exact: p,
            counts: shears.into_iter().map(|x| x.1).collect(),
        });
    }
    Ok(SolutionCount {
        p,
        s,
        t,
        shears,
        certified,
    })
}

/// Solutions of an incidence system `I` split by the coincidence locus
/// `V(J)`, where `J` cuts the pairs whose two points coincide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceCount {
    /// `p_off + p_diag`.
    pub p: usize,
    /// Solutions off the coincidence locus.
    pub p_off: usize,
    /// Coincident pairs whose parameters also occur among the off-locus ones.
    pub p_diag: usize,
    /// Distinct `s`-values among off-locus solutions.
    pub s: usize,
    /// Distinct `t`-values among off-locus solutions.
    pub t: usize,
    pub certified: bool,
    pub shears: Vec<String>,
}

fn strip_common(g: &BiPoly, d: &BiPoly) -> Result<BiPoly, BivarError> {
    let mut r = g.clone();
    loop {
        let c = r.gcd(d)?;
        if c.is_constant() {
            return Ok(r);
        }
        r = r.div_exact(&c)?;
    }
}

/// Divides out the common factor of `I`, which must come from the
/// coincidence locus; any other common curve is reported as
/// [`BivarError::PositiveDimensional`].
fn strip_coincidence(i_gens: &[BiPoly], jp: &[BiPoly]) -> Result<Vec<BiPoly>, BivarError> {
    let ip: Vec<BiPoly> = i_gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let g = BiPoly::gcd_all(&ip).ok_or(BivarError::PositiveDimensional)?;
    if g.is_constant() {
        return Ok(ip);
    }
    let rest = match BiPoly::gcd_all(jp) {
        Some(d) if !d.is_constant() => strip_common(&g, &d)?,
        _ => g.clone(),
    };
    if !rest.is_constant() {
        return Err(BivarError::PositiveDimensional);
    }
    Ok(ip.iter().map(|f| f.div_exact(&g)).collect::<Result<_, _>>()?)
}

/// Whether the incidence system has infinitely many solutions off the
/// coincidence locus. Decided by gcds alone.
pub fn incidence_is_finite(i_gens: &[BiPoly], j_gens: &[BiPoly]) -> Result<bool, BivarError> {
    let jp: Vec<BiPoly> = j_gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    match strip_coincidence(i_gens, &jp) {
        Ok(_) => Ok(true),
        Err(BivarError::PositiveDimensional) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Counts an incidence system away from its coincidence locus, then adds
/// the coincident pairs lying over the counted parameters.
///
/// A common factor of `I` must come from the coincidence locus; any other
/// curve component means the fibres are infinite and yields
/// [`BivarError::PositiveDimensional`].
pub fn incidence_count<R: Rng + ?Sized>(
    i_gens: &[BiPoly],
    j_gens: &[BiPoly],
    provenance: Provenance,
    rng: &mut R,
) -> Result<IncidenceCount, BivarError> {
    let field = i_gens.first().map(|g| g.field()).ok_or(BivarError::TooFewGenerators(0))?;
    let jp: Vec<BiPoly> = j_gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let ip = strip_coincidence(i_gens, &jp)?;
    let base = BivarSystem::new(pad(ip, field), provenance)?;
    let bad = base.with(jp.iter().cloned());
    let (q_base, q_bad) = (Quotient::new(&base)?, Quotient::new(&bad)?);

    // Each shear gives a count of good solutions that can only fall short
    // of the truth; keep the largest and certify once it repeats.
    let mut shears = Vec::new();
    let mut used = Vec::new();
    let mut best: Option<Exact> = None;
    let mut hits = 0;
    let one = field.one();
    for _ in 0..2 + DEFAULT_SHEAR_RETRIES {
        let Some(l) = draw_shear(field, rng, &used) else {
            break;
        };
        used.push(l.clone());
        shears.push(l.to_string());
        let q = q_base.min_poly(&one, &l).squarefree_part()?;
        let qb = q_bad.min_poly(&one, &l).squarefree_part()?;
        let q_good = q.div_exact(&q.gcd(&qb)?)?;
        let good = base.with([BiPoly::from_uni_linear(&q_good, &one, &l)]);
        let exact = exact_count(&good)?;
        let n = exact.p;
        if n != q_good.degree().unwrap_or(0) {
            continue;
        }
        match &best {
            Some(b) if b.p == n => hits += 1,
            Some(b) if b.p > n => {}
            _ => {
                best = Some(exact);
                hits = 1;
            }
        }
        if hits == 2 {
            break;
        }
    }
    let Some(exact) = best else {
        return Err(BivarError::ShearDisagreement {
            exact: 0,
            counts: Vec::new(),
        });
    };
    let certified = hits >= 2;
    let sc = certify_count(field, &exact, rng, DEFAULT_SHEAR_RETRIES).or_else(|e| match e {
        BivarError::ShearDisagreement { .. } => certify_count(field, &exact, rng, 8),
        other => Err(other),
    })?;
    let p_diag = if sc.p == 0 || jp.is_empty() {
        0
    } else {
        let marker = BiPoly::from_uni_s(&exact.es).mul(&BiPoly::from_uni_t(&exact.et));
        let diag = BivarSystem::new(pad(jp.iter().cloned().chain([marker]).collect(), field), provenance)?;
        exact_count(&diag)?.p
    };
    Ok(IncidenceCount {
        p: sc.p + p_diag,
        p_off: sc.p,
        p_diag,
        s: sc.s,
        t: sc.t,
        certified: certified && sc.certified,
        shears,
    })
}

fn pad(mut gens: Vec<BiPoly>, field: FieldSpec) -> Vec<BiPoly> {
    while gens.len() < 2 {
        gens.push(BiPoly::zero(field));
    }
    gens
}
