//! Random series strategies and the algebraic laws they must satisfy.
#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use splitkit::series::{enumerate_words, Alphabet, Series, Word};

pub const DEGREE: u32 = 4;

fn alphabets() -> Vec<Arc<Alphabet>> {
    vec![Alphabet::two_letter(), Alphabet::polynomial_t(2)]
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn series_over(alphabet: Arc<Alphabet>, constant: Option<i64>) -> impl Strategy<Value = Series> {
    let words: Vec<Word> = enumerate_words(&alphabet, DEGREE)
        .unwrap()
        .into_iter()
        .filter(|w| !w.is_empty())
        .collect();
    let n = words.len();
    proptest::collection::vec((0..n, rational()), 0..10).prop_map(move |terms| {
        let mut all: Vec<(Word, BigRational)> = terms.into_iter().map(|(i, c)| (words[i].clone(), c)).collect();
        if let Some(k) = constant {
            all.push((Word::empty(), BigRational::from_integer(k.into())));
        }
        Series::from_terms(alphabet.clone(), DEGREE, all).unwrap()
    })
}

/// Three series over the same alphabet with arbitrary constant terms.
pub fn triple() -> impl Strategy<Value = (Series, Series, Series)> {
    (0..alphabets().len(), -2i64..=2, -2i64..=2, -2i64..=2).prop_flat_map(|(i, c0, c1, c2)| {
        let a = alphabets()[i].clone();
        (
            series_over(a.clone(), Some(c0)),
            series_over(a.clone(), Some(c1)),
            series_over(a, Some(c2)),
        )
    })
}

/// A series with zero constant term.
pub fn nilpotent() -> impl Strategy<Value = Series> {
    (0..alphabets().len()).prop_flat_map(|i| series_over(alphabets()[i].clone(), None))
}

fn eq(lhs: &Series, rhs: &Series, law: &str) -> Result<(), TestCaseError> {
    prop_assert_eq!(lhs, rhs, "{} fails", law);
    Ok(())
}

pub fn ring_axioms(x: &Series, y: &Series, z: &Series) -> Result<(), TestCaseError> {
    let alpha = x.alphabet().clone();
    let zero = Series::zero(alpha.clone(), DEGREE).unwrap();
    let one = Series::one(alpha, DEGREE).unwrap();
    eq(&x.add(y).unwrap(), &y.add(x).unwrap(), "additive commutativity")?;
    eq(&x.add(&y.add(z).unwrap()).unwrap(), &x.add(y).unwrap().add(z).unwrap(), "additive associativity")?;
    eq(&x.add(&zero).unwrap(), x, "additive identity")?;
    eq(&x.add(&x.neg()).unwrap(), &zero, "additive inverse")?;
    eq(&x.mul(&y.mul(z).unwrap()).unwrap(), &x.mul(y).unwrap().mul(z).unwrap(), "multiplicative associativity")?;
    eq(&x.mul(&one).unwrap(), x, "right unit")?;
    eq(&one.mul(x).unwrap(), x, "left unit")?;
    eq(
        &x.mul(&y.add(z).unwrap()).unwrap(),
        &x.mul(y).unwrap().add(&x.mul(z).unwrap()).unwrap(),
        "left distributivity",
    )?;
    eq(
        &x.add(y).unwrap().mul(z).unwrap(),
        &x.mul(z).unwrap().add(&y.mul(z).unwrap()).unwrap(),
        "right distributivity",
    )?;
    eq(&x.mul(&zero).unwrap(), &zero, "zero annihilates")?;
    Ok(())
}

pub fn exp_log_round_trip(x: &Series) -> Result<(), TestCaseError> {
    let e = x.exp().unwrap();
    prop_assert!(e.constant_term() == BigRational::from_integer(1.into()));
    eq(&e.log().unwrap(), x, "log(exp(x)) = x")?;
    let one = Series::one(x.alphabet().clone(), DEGREE).unwrap();
    let y = one.add(x).unwrap();
    eq(&y.log().unwrap().exp().unwrap(), &y, "exp(log(1+x)) = 1+x")?;
    // exp(x) exp(-x) = 1
    eq(&e.mul(&x.neg().exp().unwrap()).unwrap(), &one, "exp(x)exp(-x) = 1")?;
    Ok(())
}

pub fn grading_bounds(x: &Series, y: &Series) -> Result<(), TestCaseError> {
    let p = x.mul(y).unwrap();
    for (w, c) in p.terms() {
        prop_assert!(w.degree() <= DEGREE);
        prop_assert!(!c.is_zero());
    }
    for n in 0..=DEGREE {
        for (w, _) in x.degree_part(n).terms() {
            prop_assert_eq!(w.degree(), n);
        }
    }
    if let (Some(dx), Some(dy)) = (x.lowest_degree(), y.lowest_degree()) {
        match p.lowest_degree() {
            Some(dp) => prop_assert!(dp >= dx + dy),
            None => {}
        }
    }
    let t = x.truncate(2).unwrap();
    prop_assert!(t.terms().all(|(w, _)| w.degree() <= 2));
    for (w, c) in t.terms() {
        prop_assert_eq!(&x.coefficient(w), c);
    }
    Ok(())
}

pub fn commutator_laws(x: &Series, y: &Series, z: &Series) -> Result<(), TestCaseError> {
    let zero = Series::zero(x.alphabet().clone(), DEGREE).unwrap();
    eq(&x.commutator(y).unwrap(), &y.commutator(x).unwrap().neg(), "antisymmetry")?;
    eq(&x.commutator(x).unwrap(), &zero, "[x,x] = 0")?;
    let jacobi = x
        .commutator(&y.commutator(z).unwrap())
        .unwrap()
        .add(&y.commutator(&z.commutator(x).unwrap()).unwrap())
        .unwrap()
        .add(&z.commutator(&x.commutator(y).unwrap()).unwrap())
        .unwrap();
    eq(&jacobi, &zero, "Jacobi identity")?;
    Ok(())
}

pub fn reversal_anti_automorphism(x: &Series, y: &Series) -> Result<(), TestCaseError> {
    eq(
        &x.mul(y).unwrap().reverse_words(),
        &y.reverse_words().mul(&x.reverse_words()).unwrap(),
        "reverse(xy) = reverse(y) reverse(x)",
    )
}
