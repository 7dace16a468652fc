//! Schemes to series.
//!
//! Autonomous compilation produces a series over `{A, B}` whose words are
//! read in application order: the factor acting first contributes the
//! leftmost letters. This is the product order of the Lie-derivative
//! exponentials `e^{a₁τD_A} e^{b₁τD_B} ⋯ Id`, and it is what makes
//! `e^{τA} e^{τB}`'s mixed term come out as `AB` for Lie–Trotter.
//!
//! Nonautonomous compilation targets `u' = H(t)u`, `H(t) = Σ t^m H_m`, over
//! `{H0:1, H1:2, ...}`. Those series are in matrix order (later factors on
//! the left), matching the propagator recurrence `n T_n = Σ H_m T_j`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{CfScheme, Coefficient, Factor, Placement, Scheme, SchemeError};
use crate::series::{double_commutator_bba, Alphabet, Series, Word};

fn exact(c: &Coefficient) -> Result<BigRational, SchemeError> {
    c.to_rational()
        .ok_or_else(|| SchemeError::NonFinite(c.to_string()))
}

fn check_t_power(k: u32) -> Result<(), SchemeError> {
    if k == 1 || k == 2 {
        Ok(())
    } else {
        Err(SchemeError::UnsupportedModel(k))
    }
}

/// Series of the scheme over `{A:1, B:1}`, words in application order.
pub fn compile_autonomous(scheme: &Scheme, max_degree: u32) -> Result<Series, SchemeError> {
    let alphabet = Alphabet::two_letter();
    let a = Series::generator(alphabet.clone(), max_degree, "A")?;
    let b = Series::generator(alphabet.clone(), max_degree, "B")?;
    let bba = if scheme.is_classical() {
        None
    } else {
        Some(double_commutator_bba(&alphabet, max_degree)?)
    };
    let mut acc = Series::one(alphabet, max_degree)?;
    for factor in scheme.application_order() {
        match factor {
            Factor::A { a: coef } => {
                acc = acc.mul(&a.scale(&exact(coef)?).exp()?)?;
            }
            Factor::B { b: bc, c, placement } => {
                let b_part = b.scale(&exact(bc)?);
                let c_part = match &bba {
                    Some(comm) if !c.is_zero() => comm.scale(&exact(c)?),
                    _ => {
                        acc = acc.mul(&b_part.exp()?)?;
                        continue;
                    }
                };
                match placement {
                    Placement::Combined => {
                        acc = acc.mul(&b_part.add(&c_part)?.exp()?)?;
                    }
                    Placement::Separate => {
                        acc = acc.mul(&b_part.exp()?)?.mul(&c_part.exp()?)?;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Coefficients of a matrix polynomial in `s` whose entries are H-series
/// with integer coefficients: `M(s) = Σ_j s^j · state[j]`.
type SPolynomial = Vec<BTreeMap<Word, BigInt>>;

fn add_into(map: &mut BTreeMap<Word, BigInt>, word: Word, coeff: BigInt) {
    if coeff.is_zero() {
        return;
    }
    let entry = map.entry(word).or_insert_with(BigInt::zero);
    *entry += coeff;
}

/// Image of one application-order word under the Lie-derivative model of the
/// time-extended system `y = (s, u)`, `A(y) = (0, H(s)u)`, `B(y) = (1, 0)`,
/// evaluated at `s = 0` and restricted to the `u` component.
///
/// On maps `F(s, u) = M(s)u` the derivatives act as `D_A: M ↦ M·H(s)` and
/// `D_B: M ↦ ∂M/∂s`; the rightmost letter acts on `Id` first.
fn word_image(word: &Word, h_alphabet: &Alphabet, k: u32) -> BTreeMap<Word, BigInt> {
    const A: u8 = 0;
    let mut remaining_b = word.letters().iter().filter(|&&l| l != A).count();
    let mut state: SPolynomial = vec![BTreeMap::new()];
    state[0].insert(Word::empty(), BigInt::one());
    for &letter in word.letters().iter().rev() {
        if letter == A {
            // powers of s above the remaining derivative count vanish at s = 0
            let mut next: SPolynomial = vec![BTreeMap::new(); remaining_b + 1];
            for (j, poly) in state.iter().enumerate() {
                for m in 0..=k as usize {
                    if j + m > remaining_b {
                        break;
                    }
                    let grade = h_alphabet.grade(m as u8);
                    for (w, c) in poly {
                        let mut w2 = w.clone();
                        w2.push(m as u8, grade);
                        add_into(&mut next[j + m], w2, c.clone());
                    }
                }
            }
            state = next;
        } else {
            remaining_b -= 1;
            let mut next: SPolynomial = vec![BTreeMap::new(); remaining_b + 1];
            for (j, poly) in state.iter().enumerate().skip(1) {
                if j - 1 > remaining_b {
                    break;
                }
                let factor = BigInt::from(j);
                for (w, c) in poly {
                    add_into(&mut next[j - 1], w.clone(), c * &factor);
                }
            }
            state = next;
        }
        if state.iter().all(BTreeMap::is_empty) {
            return BTreeMap::new();
        }
    }
    state.swap_remove(0)
}

/// Maps a series over `{A, B}` (application order) to the propagator series
/// of `u' = (H0 + tH1 + ... + t^k Hk)u` over `{H0, ..., Hk}`.
pub fn lie_derivative_image(series: &Series, k: u32) -> Result<Series, SchemeError> {
    check_t_power(k)?;
    let h_alphabet = Alphabet::polynomial_t(k);
    let mut out = Series::zero(h_alphabet.clone(), series.max_degree())?;
    for (word, coeff) in series.terms() {
        for (hw, n) in word_image(word, &h_alphabet, k) {
            out.add_term(hw, coeff * BigRational::from_integer(n));
        }
    }
    Ok(out)
}

/// Propagator series of the scheme applied to the time-extended form of
/// `u' = H(t)u` started at `s = 0`, computed through the Lie-derivative
/// image of the autonomous series.
pub fn compile_nonautonomous(
    scheme: &Scheme,
    max_t_power: u32,
    max_degree: u32,
) -> Result<Series, SchemeError> {
    check_t_power(max_t_power)?;
    let auto = compile_autonomous(scheme, max_degree)?;
    lie_derivative_image(&auto, max_t_power)
}

/// The same propagator as [`compile_nonautonomous`], built directly from the
/// frozen flows: an A flow with coefficient `a` at accumulated shift `σ` is
/// `exp(aτH(στ))`, a B flow advances `σ` by `b`, and a commutator term acts as
/// `exp(cτ³H'') = exp(2c·H2)`.
pub fn compile_frozen_flows(
    scheme: &Scheme,
    max_t_power: u32,
    max_degree: u32,
) -> Result<Series, SchemeError> {
    check_t_power(max_t_power)?;
    let alphabet = Alphabet::polynomial_t(max_t_power);
    let h: Vec<Series> = (0..=max_t_power)
        .map(|m| Series::generator(alphabet.clone(), max_degree, &format!("H{m}")))
        .collect::<Result<_, _>>()?;
    let mut acc = Series::one(alphabet.clone(), max_degree)?;
    let mut shift = BigRational::zero();
    for factor in scheme.application_order() {
        match factor {
            Factor::A { a } => {
                let a = exact(a)?;
                let mut exponent = Series::zero(alphabet.clone(), max_degree)?;
                let mut weight = a.clone();
                for hm in &h {
                    exponent = exponent.add(&hm.scale(&weight))?;
                    weight = &weight * &shift;
                }
                acc = exponent.exp()?.mul(&acc)?;
            }
            Factor::B { b, c, .. } => {
                if max_t_power == 2 && !c.is_zero() {
                    let two_c = exact(c)? * BigRational::from_integer(2.into());
                    acc = h[2].scale(&two_c).exp()?.mul(&acc)?;
                }
                shift += exact(b)?;
            }
        }
    }
    Ok(acc)
}

/// `Π exp(a_j H0 + c_j H1)` in list (matrix) order.
pub fn compile_commutator_free(scheme: &CfScheme, max_degree: u32) -> Result<Series, SchemeError> {
    let alphabet: Arc<Alphabet> = Alphabet::polynomial_t(1);
    let h0 = Series::generator(alphabet.clone(), max_degree, "H0")?;
    let h1 = Series::generator(alphabet.clone(), max_degree, "H1")?;
    let mut acc = Series::one(alphabet, max_degree)?;
    for stage in scheme.stages() {
        let exponent = h0.scale(&exact(&stage.a)?).add(&h1.scale(&exact(&stage.c)?))?;
        acc = acc.mul(&exponent.exp()?)?;
    }
    Ok(acc)
}
