//! Truncated formal power series over noncommuting graded generators.
//!
//! A [`Series`] maps [`Word`]s to exact rational coefficients. The step size
//! never appears explicitly: a word of degree `n` stands for a `τ^n` term, and
//! everything above the truncation degree is dropped on every operation.
//!
//! Coefficients are [`BigRational`] throughout; there is no floating point in
//! this module.

mod word;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use word::{enumerate_words, Alphabet, Generator, Word, MAX_DEGREE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("generator {0} has grade 0; grades must be at least 1")]
    ZeroGrade(String),
    #[error("generator {0} appears twice in the alphabet")]
    DuplicateGenerator(String),
    #[error("alphabet has {0} generators, at most 255 are supported")]
    AlphabetTooLarge(usize),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("cannot enumerate positive-degree words over an empty alphabet")]
    EmptyAlphabet,
    #[error("operands are defined over different alphabets")]
    AlphabetMismatch,
    #[error("operands have different truncation degrees ({0} vs {1})")]
    TruncationMismatch(u32, u32),
    #[error("truncation degree {requested} exceeds the cap {cap}")]
    DegreeAboveCap { requested: u32, cap: u32 },
    #[error("exp requires a zero constant term")]
    NonzeroConstantTerm,
    #[error("log requires constant term 1")]
    ConstantTermNotOne,
}

/// A truncated series. Stored words all have degree `<= max_degree` and
/// nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    alphabet: Arc<Alphabet>,
    max_degree: u32,
    terms: BTreeMap<Word, BigRational>,
}

impl Series {
    pub fn zero(alphabet: Arc<Alphabet>, max_degree: u32) -> Result<Self, SeriesError> {
        if max_degree > MAX_DEGREE {
            return Err(SeriesError::DegreeAboveCap {
                requested: max_degree,
                cap: MAX_DEGREE,
            });
        }
        Ok(Self {
            alphabet,
            max_degree,
            terms: BTreeMap::new(),
        })
    }

    pub fn one(alphabet: Arc<Alphabet>, max_degree: u32) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alphabet, max_degree)?;
        s.terms.insert(Word::empty(), BigRational::one());
        Ok(s)
    }

    /// `coeff · word`, or zero if the word is above the truncation.
    pub fn monomial(
        alphabet: Arc<Alphabet>,
        max_degree: u32,
        word: Word,
        coeff: BigRational,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alphabet, max_degree)?;
        s.add_term(word, coeff);
        Ok(s)
    }

    /// The single generator `name` with coefficient 1.
    pub fn generator(
        alphabet: Arc<Alphabet>,
        max_degree: u32,
        name: &str,
    ) -> Result<Self, SeriesError> {
        let word = alphabet.word(&[name])?;
        Self::monomial(alphabet, max_degree, word, BigRational::one())
    }

    /// Builds a series from `(word, coefficient)` pairs, summing repeats.
    pub fn from_terms(
        alphabet: Arc<Alphabet>,
        max_degree: u32,
        terms: impl IntoIterator<Item = (Word, BigRational)>,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alphabet, max_degree)?;
        for (w, c) in terms {
            s.add_term(w, c);
        }
        Ok(s)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn coefficient(&self, word: &Word) -> BigRational {
        self.terms.get(word).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&Word::empty())
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn lowest_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(Word::degree)
    }

    /// The homogeneous part of degree `n`.
    pub fn degree_part(&self, n: u32) -> Series {
        Series {
            alphabet: self.alphabet.clone(),
            max_degree: self.max_degree,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.degree() == n)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Adds `coeff` to the coefficient of `word`, pruning zeros.
    pub(crate) fn add_term(&mut self, word: Word, coeff: BigRational) {
        if word.degree() > self.max_degree || coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &Series) -> Result<(), SeriesError> {
        if self.alphabet != other.alphabet {
            return Err(SeriesError::AlphabetMismatch);
        }
        if self.max_degree != other.max_degree {
            return Err(SeriesError::TruncationMismatch(
                self.max_degree,
                other.max_degree,
            ));
        }
        Ok(())
    }

    /// Same terms under a larger or smaller truncation.
    pub fn truncate(&self, max_degree: u32) -> Result<Series, SeriesError> {
        let mut s = Series::zero(self.alphabet.clone(), max_degree)?;
        for (w, c) in &self.terms {
            s.add_term(w.clone(), c.clone());
        }
        Ok(s)
    }

    pub fn add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &BigRational) -> Series {
        if factor.is_zero() {
            return Series {
                alphabet: self.alphabet.clone(),
                max_degree: self.max_degree,
                terms: BTreeMap::new(),
            };
        }
        Series {
            alphabet: self.alphabet.clone(),
            max_degree: self.max_degree,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c * factor))
                .collect(),
        }
    }

    pub fn neg(&self) -> Series {
        self.scale(&-BigRational::one())
    }

    /// Truncated Cauchy product over word concatenation.
    pub fn mul(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_compatible(other)?;
        let mut out = Series {
            alphabet: self.alphabet.clone(),
            max_degree: self.max_degree,
            terms: BTreeMap::new(),
        };
        for (u, cu) in &self.terms {
            let budget = self.max_degree - u.degree();
            // `other` iterates degree-major, so stop once it is too deep
            for (v, cv) in other.terms.iter().take_while(|(v, _)| v.degree() <= budget) {
                out.add_term(u.concat(v), cu * cv);
            }
        }
        Ok(out)
    }

    /// `xy - yx`.
    pub fn commutator(&self, other: &Series) -> Result<Series, SeriesError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Truncated `Σ x^k / k!`.
    pub fn exp(&self) -> Result<Series, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let mut sum = Series::one(self.alphabet.clone(), self.max_degree)?;
        let mut power = sum.clone();
        let mut k = 1u32;
        loop {
            power = power
                .mul(self)?
                .scale(&BigRational::new(BigInt::one(), BigInt::from(k)));
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power)?;
            k += 1;
        }
        Ok(sum)
    }

    /// Truncated `Σ (-1)^{k+1} (x-1)^k / k`.
    pub fn log(&self) -> Result<Series, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::ConstantTermNotOne);
        }
        let one = Series::one(self.alphabet.clone(), self.max_degree)?;
        let y = self.sub(&one)?;
        let mut sum = Series::zero(self.alphabet.clone(), self.max_degree)?;
        let mut power = one;
        let mut k = 1i64;
        loop {
            power = power.mul(&y)?;
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            sum = sum.add(&power.scale(&BigRational::new(sign.into(), k.into())))?;
            k += 1;
        }
        Ok(sum)
    }

    /// Reverses every word; an anti-automorphism of the product.
    pub fn reverse_words(&self) -> Series {
        Series {
            alphabet: self.alphabet.clone(),
            max_degree: self.max_degree,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.reversed(), c.clone()))
                .collect(),
        }
    }

    /// Human-readable rendering, e.g. `1 + A + 1/2*AB`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let negative = c < &BigRational::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let word = self.alphabet.render(w);
            if w.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&word);
            } else {
                out.push_str(&format!("{mag}*{word}"));
            }
        }
        out
    }
}

/// `BBA - 2BAB + ABB`, the word expansion of `[B,[B,A]]` over `{A, B}`.
pub fn double_commutator_bba(alphabet: &Arc<Alphabet>, max_degree: u32) -> Result<Series, SeriesError> {
    let a = Series::generator(alphabet.clone(), max_degree, "A")?;
    let b = Series::generator(alphabet.clone(), max_degree, "B")?;
    b.commutator(&b.commutator(&a)?)
}
