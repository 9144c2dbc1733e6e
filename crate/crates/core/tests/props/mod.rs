//! Property suites shared by the `properties` and `acceptance` targets.
//! Each suite runs a deterministic proptest runner and reports the first
//! counterexample as a string.

#![allow(dead_code)]

use std::collections::BTreeSet;

use joindeg_core::bivar::{count_solutions, BivarSystem, Provenance};
use joindeg_core::commands::{cmd_crosscheck, CrosscheckFlags, Verdict};
use joindeg_core::field::{FieldElem, FieldSpec};
use joindeg_core::instance::InstanceFile;
use joindeg_core::poly::{BiPoly, HomPoly, UniPoly};
use joindeg_core::proj::{line_through, ProjPoint};
use joindeg_core::seed::rng_from;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const PRIMES: [u64; 6] = [2, 3, 5, 31, 101, 2_147_483_647];

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// `Q` or one of [`PRIMES`].
fn field() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        Just(FieldSpec::rationals()),
        proptest::sample::select(PRIMES.to_vec()).prop_map(|p| FieldSpec::prime(p).unwrap()),
    ]
}

fn elem(f: FieldSpec) -> impl Strategy<Value = FieldElem> {
    (-1000i64..1000, 1i64..50).prop_map(move |(n, d)| {
        let n = f.from_i64(n);
        match f.from_i64(d).inverse() {
            Ok(inv) => &n * &inv,
            Err(_) => n,
        }
    })
}

pub fn field_axioms(cases: u32) -> Result<(), String> {
    let strat = field().prop_flat_map(|f| (Just(f), elem(f), elem(f), elem(f)));
    runner(cases)
        .run(&strat, |(f, a, b, c)| {
            let (zero, one) = (f.zero(), f.one());
            prop_assert_eq!(&(&a + &b), &(&b + &a));
            prop_assert_eq!(&(&a * &b), &(&b * &a));
            prop_assert_eq!(&(&(&a + &b) + &c), &(&a + &(&b + &c)));
            prop_assert_eq!(&(&(&a * &b) * &c), &(&a * &(&b * &c)));
            prop_assert_eq!(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)));
            prop_assert_eq!(&(&a + &zero), &a);
            prop_assert_eq!(&(&a * &one), &a);
            prop_assert!((&a - &a).is_zero());
            prop_assert!((&a + &(-&a)).is_zero());
            if a.is_zero() {
                prop_assert!(a.inverse().is_err());
            } else {
                prop_assert!((&a * &a.inverse().unwrap()).is_one());
            }
            if let Some(p) = f.modulus() {
                // Frobenius fixes the prime field
                prop_assert_eq!(&a.pow(p), &a);
            }
            Ok(())
        })
        .map_err(|e| format!("field axioms: {e}"))
}

fn hom_poly() -> impl Strategy<Value = (HomPoly, Vec<FieldElem>)> {
    (field(), 1usize..5, 0u32..7)
        .prop_flat_map(|(f, nvars, d)| {
            let term = (proptest::collection::vec(0u32..=d, nvars), -30i64..30);
            (
                Just((f, nvars, d)),
                proptest::collection::vec(term, 1..8),
                proptest::collection::vec(elem(f), nvars),
            )
        })
        .prop_map(|((f, nvars, d), raw, pt)| {
            // squeeze each exponent vector onto total degree d
            let terms = raw.into_iter().map(|(mut e, c)| {
                let mut total: u32 = e.iter().sum();
                for x in e.iter_mut() {
                    let cut = (*x).min(total.saturating_sub(d));
                    *x -= cut;
                    total -= cut;
                }
                e[0] += d - total;
                (e, f.from_i64(c))
            });
            (HomPoly::new(f, nvars, d, terms).unwrap(), pt)
        })
}

pub fn euler_relations(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&hom_poly(), |(g, pt)| {
            prop_assert!(g.euler_relation_holds());
            let f = g.field();
            let mut lhs = f.zero();
            for (i, x) in pt.iter().enumerate() {
                let d = g.partial_derivative(i).map_err(|e| fail(e.to_string()))?;
                lhs = &lhs + &(x * &d.eval(&pt).map_err(|e| fail(e.to_string()))?);
            }
            let rhs = &f.from_i64(g.degree() as i64) * &g.eval(&pt).map_err(|e| fail(e.to_string()))?;
            prop_assert_eq!(lhs, rhs);
            Ok(())
        })
        .map_err(|e| format!("Euler relations: {e}"))
}

fn point(f: FieldSpec, n: usize) -> impl Strategy<Value = Vec<FieldElem>> {
    proptest::collection::vec(elem(f), n + 1)
}

pub fn plucker_relations(cases: u32) -> Result<(), String> {
    let strat = (field(), 1usize..6).prop_flat_map(|(f, n)| {
        (point(f, n), point(f, n), elem(f), elem(f), elem(f), elem(f))
    });
    runner(cases)
        .run(&strat, |(a, b, u, v, w, x)| {
            let (Ok(p), Ok(q)) = (ProjPoint::new(a.clone()), ProjPoint::new(b.clone())) else {
                return Ok(());
            };
            let Ok(l) = line_through(&p, &q) else {
                prop_assert_eq!(&p, &q);
                return Ok(());
            };
            prop_assert!(l.satisfies_plucker_relations());
            prop_assert!(l.contains(&p) && l.contains(&q));
            // another spanning pair of the same line gives the same point of the Grassmannian
            if (&(&u * &x) - &(&v * &w)).is_zero() {
                return Ok(());
            }
            let comb = |s: &FieldElem, t: &FieldElem| -> Vec<FieldElem> {
                a.iter().zip(&b).map(|(ai, bi)| &(s * ai) + &(t * bi)).collect()
            };
            let p2 = ProjPoint::new(comb(&u, &v)).map_err(|e| fail(e.to_string()))?;
            let q2 = ProjPoint::new(comb(&w, &x)).map_err(|e| fail(e.to_string()))?;
            let l2 = line_through(&p2, &q2).map_err(|e| fail(e.to_string()))?;
            prop_assert_eq!(l.plucker(), l2.plucker());
            Ok(())
        })
        .map_err(|e| format!("Plücker relations: {e}"))
}

fn uni(f: FieldSpec, max_deg: usize) -> impl Strategy<Value = UniPoly> {
    proptest::collection::vec(-20i64..20, 1..=max_deg + 1)
        .prop_map(move |c| UniPoly::new(f, c.into_iter().map(|x| f.from_i64(x)).collect()))
}

pub fn resultant_gcd_duality(cases: u32) -> Result<(), String> {
    let strat = field().prop_flat_map(|f| (uni(f, 4), uni(f, 4), uni(f, 2)));
    runner(cases)
        .run(&strat, |(f, g, h)| {
            // a shared factor half of the time
            let (f, g) = if h.degree().unwrap_or(0) % 2 == 1 { (f.mul(&h), g.mul(&h)) } else { (f, g) };
            if f.degree().unwrap_or(0) == 0 || g.degree().unwrap_or(0) == 0 {
                return Ok(());
            }
            let r = f.resultant(&g).map_err(|e| fail(e.to_string()))?;
            let d = f.gcd(&g).map_err(|e| fail(e.to_string()))?.degree().unwrap_or(0);
            prop_assert_eq!(r.is_zero(), d > 0, "res = {}, deg gcd = {}", r, d);
            let det = f.sylvester_matrix(&g).determinant();
            prop_assert_eq!(det.is_zero(), r.is_zero());
            Ok(())
        })
        .map_err(|e| format!("resultant/gcd duality: {e}"))
}

/// Ideal of a finite point set with distinct `s`-coordinates:
/// `∏ (s − a_i)` and `t − r(s)` with `r` interpolating, each multiplied
/// by random cofactors.
fn point_ideal(f: FieldSpec, pts: &[(i64, i64)], mix: &[i64]) -> Option<Vec<BiPoly>> {
    let mut prod = UniPoly::one(f);
    for (a, _) in pts {
        prod = prod.mul(&UniPoly::linear_root(&f.from_i64(*a)));
    }
    // Lagrange interpolation of t over s
    let mut r = UniPoly::zero(f);
    for (i, (ai, bi)) in pts.iter().enumerate() {
        let mut basis = UniPoly::constant(f.from_i64(*bi));
        for (j, (aj, _)) in pts.iter().enumerate() {
            if i != j {
                let den = f.from_i64(ai - aj).inverse().ok()?;
                basis = basis.mul(&UniPoly::linear_root(&f.from_i64(*aj))).scale(&den);
            }
        }
        r = r.add(&basis);
    }
    let g1 = BiPoly::from_uni_s(&prod);
    let g2 = BiPoly::t(f).sub(&BiPoly::from_uni_s(&r));
    let c = |k: i64| BiPoly::constant(f.from_i64(k));
    Some(vec![
        g1.add(&g2.mul(&c(mix[0]).add(&BiPoly::s(f).mul(&c(mix[1]))))),
        g2.mul(&c(1).add(&BiPoly::t(f).mul(&c(mix[2])))).add(&g1.mul(&c(mix[3]))),
        g2.mul(&g2),
        g1,
    ])
}

pub fn shear_certification(cases: u32) -> Result<(), String> {
    let strat = (
        proptest::collection::vec((-40i64..40, -40i64..40), 1..6),
        proptest::collection::vec(-5i64..5, 4),
        any::<u64>(),
        prop_oneof![Just(None), Just(Some(101u64)), Just(Some(2_147_483_647u64))],
    );
    runner(cases)
        .run(&strat, |(raw, mix, seed, p)| {
            let f = p.map_or_else(FieldSpec::rationals, |p| FieldSpec::prime(p).unwrap());
            let mut seen = BTreeSet::new();
            let pts: Vec<(i64, i64)> = raw.into_iter().filter(|(a, _)| seen.insert(*a)).collect();
            let Some(gens) = point_ideal(f, &pts, &mix) else {
                return Ok(());
            };
            let sys = BivarSystem::new(gens, Provenance::Other).map_err(|e| fail(e.to_string()))?;
            let c = count_solutions(&sys, &mut rng_from(seed)).map_err(|e| fail(e.to_string()))?;
            let ts: BTreeSet<i64> = pts.iter().map(|p| p.1).collect();
            prop_assert_eq!((c.p, c.s, c.t), (pts.len(), pts.len(), ts.len()));
            prop_assert!(c.certified, "uncertified: {:?}", c.shears);
            // a shear can merge solutions, never split them
            prop_assert!(c.shears.iter().all(|(_, n)| *n <= c.p), "{:?}", c.shears);
            prop_assert!(c.shears.iter().any(|(_, n)| *n == c.p), "{:?}", c.shears);
            Ok(())
        })
        .map_err(|e| format!("shear certification: {e}"))
}

const BASES: [(&str, &[&str], &[&str]); 4] = [
    ("skew", &["s0", "s1", "0", "0"], &["0", "0", "s0", "s1"]),
    ("cubic", &["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"], &["s0^3", "s0^2*s1", "s0*s1^2", "s1^3"]),
    ("conic-line", &["s0^2", "s0*s1", "s1^2", "0"], &["0", "s0", "0", "s1"]),
    ("cone", &["0", "0", "0", "1"], &["s0^2", "s0*s1", "s1^2", "0"]),
];

/// Components after a linear change of coordinates `m`.
fn transform(comps: &[&str], m: &[Vec<i64>]) -> Vec<String> {
    m.iter()
        .map(|row| {
            let parts: Vec<String> = row
                .iter()
                .zip(comps)
                .filter(|(c, s)| **c != 0 && **s != "0")
                .map(|(c, s)| format!("{c}*({s})"))
                .collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        })
        .collect()
}

pub fn oracle_exact_equivalence(cases: u32) -> Result<(), String> {
    let strat = (
        0usize..BASES.len(),
        proptest::collection::vec(proptest::collection::vec(-3i64..4, 4), 4),
        any::<u64>(),
    );
    runner(cases)
        .run(&strat, |(which, m, seed)| {
            let f = FieldSpec::prime(31).unwrap();
            let rows: Vec<Vec<FieldElem>> = m.iter().map(|r| r.iter().map(|x| f.from_i64(*x)).collect()).collect();
            if !joindeg_core::linalg::Matrix::new(f, 4, rows).is_invertible() {
                return Ok(());
            }
            let (name, x, y) = BASES[which];
            let (k_x, k_y) = (usize::from(!x.iter().all(|c| !c.contains('s'))), 1);
            let doc = serde_json::json!({
                "schema": 1, "ambient": 3, "field": {"p": 31},
                "X": {"label": name, "source_dim": k_x, "components": transform(x, &m)},
                "Y": {"source_dim": k_y, "components": transform(y, &m)},
                "seed": seed
            });
            let file = InstanceFile::from_json(&doc.to_string()).map_err(|e| fail(e.to_string()))?;
            let out = cmd_crosscheck(&file, &CrosscheckFlags::default()).map_err(|e| fail(e.to_string()))?;
            prop_assert_eq!(out.report.body.verdict, Verdict::Agree, "{}", out.to_json());
            Ok(())
        })
        .map_err(|e| format!("oracle/exact equivalence: {e}"))
}

/// Every suite with its case count, in a fixed order.
pub const SUITES: [(&str, fn(u32) -> Result<(), String>, u32); 6] = [
    ("field axioms", field_axioms, 512),
    ("Euler relations", euler_relations, 256),
    ("Plücker relations", plucker_relations, 256),
    ("resultant/gcd duality", resultant_gcd_duality, 256),
    ("shear certification", shear_certification, 128),
    ("oracle/exact equivalence", oracle_exact_equivalence, 24),
];
