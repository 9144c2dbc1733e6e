//! Exact scalars: the rationals and prime fields `F_p`.
//!
//! A [`FieldSpec`] names the field, a [`FieldElem`] carries one canonical
//! value. Rationals are reduced fractions with positive denominator; residues
//! live in `[0, p)`. Operator impls panic when the operands belong to
//! different fields, which is an internal invariant violation; the checked
//! entry points ([`field_ops`], [`FieldElem::inverse`]) return errors instead.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields ({0} and {1})")]
    MixedFields(FieldSpec, FieldSpec),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("every element of {0} is excluded")]
    ExhaustedField(FieldSpec),
    #[error("{0} is not invertible modulo {1}")]
    NotReducible(String, u64),
}

/// Either `Q` or `F_p` with `p` verified prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    modulus: Option<u64>,
}

impl FieldSpec {
    pub const fn rationals() -> Self {
        FieldSpec { modulus: None }
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(FieldSpec { modulus: Some(p) })
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    /// 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        self.modulus.unwrap_or(0)
    }

    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    pub fn is_rationals(&self) -> bool {
        self.modulus.is_none()
    }

    pub fn zero(&self) -> FieldElem {
        self.from_i64(0)
    }

    pub fn one(&self) -> FieldElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> FieldElem {
        match self.modulus {
            None => FieldElem::Rational(BigRational::from_integer(BigInt::from(n))),
            Some(p) => FieldElem::Residue {
                value: (n as i128).rem_euclid(p as i128) as u64,
                modulus: p,
            },
        }
    }

    pub fn from_bigint(&self, n: &BigInt) -> FieldElem {
        match self.modulus {
            None => FieldElem::Rational(BigRational::from_integer(n.clone())),
            Some(p) => {
                let r = n.mod_floor(&BigInt::from(p));
                FieldElem::Residue {
                    value: r.to_u64().expect("residue fits in u64"),
                    modulus: p,
                }
            }
        }
    }

    /// Maps a rational into this field, failing when `F_p` cannot invert the
    /// denominator.
    pub fn from_rational(&self, q: &BigRational) -> Result<FieldElem, FieldError> {
        match self.modulus {
            None => Ok(FieldElem::Rational(q.clone())),
            Some(p) => {
                let num = self.from_bigint(q.numer());
                let den = self.from_bigint(q.denom());
                if den.is_zero() {
                    return Err(FieldError::NotReducible(q.to_string(), p));
                }
                Ok(&num * &den.inverse()?)
            }
        }
    }

    /// Number of elements, `None` for the rationals.
    pub fn size(&self) -> Option<u64> {
        self.modulus
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulus {
            None => write!(f, "Q"),
            Some(p) => write!(f, "F_{p}"),
        }
    }
}

/// Instance files write the field as `"Q"` or `{"p": 7}`.
impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.modulus {
            None => s.serialize_str("Q"),
            Some(p) => {
                use serde::ser::SerializeMap;
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("p", &p)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PrimeRepr {
            p: u64,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Name(String),
            Prime(PrimeRepr),
        }
        match Repr::deserialize(d)? {
            Repr::Name(s) if s == "Q" => Ok(FieldSpec::rationals()),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "field must be \"Q\" or {{\"p\": prime}}, got \"{s}\""
            ))),
            Repr::Prime(PrimeRepr { p }) => FieldSpec::prime(p).map_err(serde::de::Error::custom),
        }
    }
}

/// Canonically normalized scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Rational(BigRational),
    Residue { value: u64, modulus: u64 },
}

impl FieldElem {
    pub fn field(&self) -> FieldSpec {
        match self {
            FieldElem::Rational(_) => FieldSpec::rationals(),
            FieldElem::Residue { modulus, .. } => FieldSpec {
                modulus: Some(*modulus),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_zero(),
            FieldElem::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElem::Rational(q) => q.is_one(),
            FieldElem::Residue { value, .. } => *value == 1,
        }
    }

    pub fn inverse(&self) -> Result<FieldElem, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match self {
            FieldElem::Rational(q) => FieldElem::Rational(q.recip()),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: mod_inverse(*value, *modulus),
                modulus: *modulus,
            },
        })
    }

    pub fn pow(&self, mut e: u64) -> FieldElem {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Rational value, when this is an element of `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            FieldElem::Rational(q) => Some(q),
            FieldElem::Residue { .. } => None,
        }
    }

    /// Residue value, when this is an element of `F_p`.
    pub fn as_residue(&self) -> Option<u64> {
        match self {
            FieldElem::Rational(_) => None,
            FieldElem::Residue { value, .. } => Some(*value),
        }
    }

    /// Reduces a rational element into `target`; elements already in `target`
    /// are returned unchanged.
    pub fn reduce_into(&self, target: FieldSpec) -> Result<FieldElem, FieldError> {
        match self {
            FieldElem::Rational(q) => target.from_rational(q),
            FieldElem::Residue { .. } if self.field() == target => Ok(self.clone()),
            FieldElem::Residue { .. } => Err(FieldError::MixedFields(self.field(), target)),
        }
    }

    fn check_same(&self, other: &FieldElem) -> Result<(), FieldError> {
        if self.field() == other.field() {
            Ok(())
        } else {
            Err(FieldError::MixedFields(self.field(), other.field()))
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Rational(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            FieldElem::Residue { value, .. } => write!(f, "{value}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic.
pub fn field_ops(a: &FieldElem, b: &FieldElem, op: FieldOp) -> Result<FieldElem, FieldError> {
    a.check_same(b)?;
    Ok(match op {
        FieldOp::Add => a + b,
        FieldOp::Sub => a - b,
        FieldOp::Mul => a * b,
        FieldOp::Div => a * &b.inverse()?,
    })
}

fn residue_pair(a: &FieldElem, b: &FieldElem) -> Option<(u64, u64, u64)> {
    match (a, b) {
        (
            FieldElem::Residue { value: x, modulus: p },
            FieldElem::Residue { value: y, modulus: q },
        ) => {
            assert_eq!(p, q, "arithmetic across different prime fields");
            Some((*x, *y, *p))
        }
        (FieldElem::Rational(_), FieldElem::Rational(_)) => None,
        _ => panic!("arithmetic between Q and F_p elements"),
    }
}

impl Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: &FieldElem) -> FieldElem {
        match residue_pair(self, rhs) {
            Some((x, y, p)) => FieldElem::Residue {
                value: ((x as u128 + y as u128) % p as u128) as u64,
                modulus: p,
            },
            None => FieldElem::Rational(self.as_rational().unwrap() + rhs.as_rational().unwrap()),
        }
    }
}

impl Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: &FieldElem) -> FieldElem {
        match residue_pair(self, rhs) {
            Some((x, y, p)) => FieldElem::Residue {
                value: ((x as u128 + p as u128 - y as u128) % p as u128) as u64,
                modulus: p,
            },
            None => FieldElem::Rational(self.as_rational().unwrap() - rhs.as_rational().unwrap()),
        }
    }
}

impl Mul for &FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: &FieldElem) -> FieldElem {
        match residue_pair(self, rhs) {
            Some((x, y, p)) => FieldElem::Residue {
                value: ((x as u128 * y as u128) % p as u128) as u64,
                modulus: p,
            },
            None => FieldElem::Rational(self.as_rational().unwrap() * rhs.as_rational().unwrap()),
        }
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        match self {
            FieldElem::Rational(q) => FieldElem::Rational(-q),
            FieldElem::Residue { value, modulus } => FieldElem::Residue {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: FieldElem) -> FieldElem {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, rhs: &FieldElem) -> FieldElem {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(p as i128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Trial division below 2³², deterministic Miller–Rabin above (the first
/// twelve primes are a complete witness set for 64-bit integers).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 1 << 32 {
        if n % 2 == 0 {
            return n == 2;
        }
        let mut d = 3u64;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        return true;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if WITNESSES.iter().any(|&w| n % w == 0) {
        return false;
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Over `Q`, the positive rescaling of `v` to coprime integers; over
/// `F_p`, `v` unchanged. Zero vectors are returned as they are.
pub fn primitive_integer_vector(v: &[FieldElem]) -> Vec<FieldElem> {
    let mut den = BigInt::one();
    let mut num = BigInt::zero();
    for c in v {
        let Some(q) = c.as_rational() else {
            return v.to_vec();
        };
        den = den.lcm(q.denom());
        num = num.gcd(q.numer());
    }
    if num.is_zero() {
        return v.to_vec();
    }
    let scale = BigRational::new(den, num);
    v.iter()
        .map(|c| FieldElem::Rational(c.as_rational().expect("checked") * &scale))
        .collect()
}

/// Default numerator/denominator bound for random rationals.
pub const DEFAULT_RATIONAL_BOX: i64 = 10;

/// Uniform element not in `avoid`. Over `Q` the numerator is drawn from
/// `[-bound, bound]` and the denominator from `[1, bound]`.
pub fn random_element<R: Rng + ?Sized>(
    spec: FieldSpec,
    rng: &mut R,
    avoid: &HashSet<FieldElem>,
) -> Result<FieldElem, FieldError> {
    random_element_in(spec, rng, avoid, DEFAULT_RATIONAL_BOX)
}

pub fn random_element_in<R: Rng + ?Sized>(
    spec: FieldSpec,
    rng: &mut R,
    avoid: &HashSet<FieldElem>,
    bound: i64,
) -> Result<FieldElem, FieldError> {
    let bound = bound.max(1);
    match spec.modulus {
        Some(p) => {
            if avoid.len() as u64 >= p {
                return Err(FieldError::ExhaustedField(spec));
            }
            loop {
                let e = FieldElem::Residue {
                    value: rng.gen_range(0..p),
                    modulus: p,
                };
                if !avoid.contains(&e) {
                    return Ok(e);
                }
            }
        }
        None => {
            // A box this small can still be covered; give up after many draws.
            for _ in 0..10_000 {
                let num = rng.gen_range(-bound..=bound);
                let den = rng.gen_range(1..=bound);
                let e = FieldElem::Rational(BigRational::new(num.into(), den.into()));
                if !avoid.contains(&e) {
                    return Ok(e);
                }
            }
            Err(FieldError::ExhaustedField(spec))
        }
    }
}

/// Element used for "general point" sampling: integers in `[-bound, bound]`
/// over `Q`, uniform residues over `F_p`.
pub fn random_scalar<R: Rng + ?Sized>(spec: FieldSpec, rng: &mut R, bound: i64) -> FieldElem {
    match spec.modulus {
        Some(p) => FieldElem::Residue {
            value: rng.gen_range(0..p),
            modulus: p,
        },
        None => spec.from_i64(rng.gen_range(-bound..=bound)),
    }
}

/// Nonzero variant of [`random_scalar`].
pub fn random_nonzero<R: Rng + ?Sized>(spec: FieldSpec, rng: &mut R, bound: i64) -> FieldElem {
    loop {
        let e = random_scalar(spec, rng, bound);
        if !e.is_zero() {
            return e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use num_traits::Signed;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> FieldElem {
        FieldElem::Rational(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn rational_add() {
        let r = field_ops(&q(2, 3), &q(1, 6), FieldOp::Add).unwrap();
        assert_eq!(r, q(5, 6));
    }

    #[test]
    fn residue_mul() {
        let f7 = FieldSpec::prime(7).unwrap();
        let r = field_ops(&f7.from_i64(3), &f7.from_i64(5), FieldOp::Mul).unwrap();
        assert_eq!(r, f7.from_i64(1));
    }

    #[test]
    fn divide_by_zero() {
        let qq = FieldSpec::rationals();
        assert_eq!(
            field_ops(&qq.one(), &qq.zero(), FieldOp::Div),
            Err(FieldError::DivisionByZero)
        );
    }

    #[test]
    fn mixed_fields_rejected() {
        let f7 = FieldSpec::prime(7).unwrap();
        let e = field_ops(&f7.one(), &FieldSpec::rationals().one(), FieldOp::Add);
        assert!(matches!(e, Err(FieldError::MixedFields(..))));
        let f5 = FieldSpec::prime(5).unwrap();
        assert!(matches!(
            field_ops(&f7.one(), &f5.one(), FieldOp::Mul),
            Err(FieldError::MixedFields(..))
        ));
    }

    #[test]
    fn inverses() {
        let f7 = FieldSpec::prime(7).unwrap();
        assert_eq!(f7.from_i64(3).inverse().unwrap(), f7.from_i64(5));
        assert_eq!(q(2, 3).inverse().unwrap(), q(3, 2));
        assert!(f7.one().inverse().unwrap().is_one());
        assert!(FieldSpec::rationals().one().inverse().unwrap().is_one());
        assert_eq!(f7.zero().inverse(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn negative_literals_normalize() {
        let f7 = FieldSpec::prime(7).unwrap();
        assert_eq!(f7.from_i64(-1).as_residue(), Some(6));
        assert_eq!(f7.from_i64(-15).as_residue(), Some(6));
        assert_eq!(f7.from_bigint(&BigInt::from(-8)).as_residue(), Some(6));
    }

    #[test]
    fn primality() {
        assert!(FieldSpec::prime(2).is_ok());
        assert!(FieldSpec::prime((1 << 31) - 1).is_ok());
        assert_eq!(FieldSpec::prime(4), Err(FieldError::NotPrime(4)));
        assert!(FieldSpec::prime(0).is_err());
        assert!(FieldSpec::prime(1).is_err());
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(18_446_744_073_709_551_559));
        // Carmichael number
        assert!(!is_prime(561));
        // strong pseudoprime to base 2
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn random_element_is_deterministic() {
        let f7 = FieldSpec::prime(7).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| random_element(f7, &mut rng, &HashSet::new()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(1), draw(1));
        assert!(draw(1).iter().all(|e| e.as_residue().unwrap() < 7));
    }

    #[test]
    fn random_element_exhausted() {
        let f2 = FieldSpec::prime(2).unwrap();
        let avoid: HashSet<_> = [f2.zero(), f2.one()].into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            random_element(f2, &mut rng, &avoid),
            Err(FieldError::ExhaustedField(f2))
        );
    }

    #[test]
    fn random_rational_in_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let e = random_element(FieldSpec::rationals(), &mut rng, &HashSet::new()).unwrap();
            let r = e.as_rational().unwrap();
            assert!(r.denom() > &BigInt::zero());
            assert!(r.numer().abs() <= BigInt::from(10));
            assert!(r.denom() <= &BigInt::from(10));
        }
    }

    #[test]
    fn rational_reduction() {
        let f7 = FieldSpec::prime(7).unwrap();
        let r = f7.from_rational(&BigRational::new(1.into(), 3.into())).unwrap();
        assert_eq!(r, f7.from_i64(5));
        assert!(f7
            .from_rational(&BigRational::new(1.into(), 14.into()))
            .is_err());
    }

    #[test]
    fn field_spec_json() {
        let q: FieldSpec = serde_json::from_str("\"Q\"").unwrap();
        assert!(q.is_rationals());
        let f: FieldSpec = serde_json::from_str("{\"p\": 7}").unwrap();
        assert_eq!(f.characteristic(), 7);
        assert!(serde_json::from_str::<FieldSpec>("{\"p\": 8}").is_err());
        assert!(serde_json::from_str::<FieldSpec>("\"R\"").is_err());
        assert_eq!(serde_json::to_string(&f).unwrap(), "{\"p\":7}");
    }
}
