//! Exact propagator series, symbolic order determination, and order-condition
//! residuals.
//!
//! A method has order `q` in a model when its series agrees with the exact
//! propagator through degree `q`. Comparisons are exact; floats appear only
//! when a residual vector is handed back to a caller.

mod kernel;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::schemes::{
    compile_autonomous, compile_commutator_free, compile_nonautonomous, rational_to_f64,
    Coefficient, Method, Pattern, SchemeError,
};
use crate::series::{enumerate_words, Alphabet, Series, SeriesError, Word};

pub use kernel::ResidualKernel;

/// Largest `max_check` for the two-letter autonomous model (2^9 words).
pub const AUTONOMOUS_MAX_CHECK: u32 = 8;
/// Largest `max_check` for the polynomial-in-t models.
pub const NONAUTONOMOUS_MAX_CHECK: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("model {model} cannot be applied to {what}")]
    ModelMismatch { model: Model, what: &'static str },
    #[error("degree {requested} exceeds the {model} cap {cap}")]
    CapExceeded {
        model: Model,
        requested: u32,
        cap: u32,
    },
    #[error("unknown model {0:?}; expected autonomous, nonautonomous-k1 or nonautonomous-k2")]
    UnknownModel(String),
    #[error("coefficient {0} is not finite")]
    NonFinite(f64),
    #[error("propagator term of degree {0} is not homogeneous")]
    Grading(u32),
}

/// Which algebra a method is compared in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Free algebra over `{A, B}`: `e^{τ(A+B)}`.
    Autonomous,
    /// Time-extended `u' = (H0 + tH1)u`.
    NonautonomousK1,
    /// Time-extended `u' = (H0 + tH1 + t²H2)u`, where `[B,[B,[B,A]]]` vanishes.
    NonautonomousK2,
}

impl Model {
    pub const ALL: [Model; 3] = [
        Model::Autonomous,
        Model::NonautonomousK1,
        Model::NonautonomousK2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Autonomous => "autonomous",
            Model::NonautonomousK1 => "nonautonomous-k1",
            Model::NonautonomousK2 => "nonautonomous-k2",
        }
    }

    /// Highest power of `t` in `H(t)`; `None` for the autonomous model.
    pub fn t_power(self) -> Option<u32> {
        match self {
            Model::Autonomous => None,
            Model::NonautonomousK1 => Some(1),
            Model::NonautonomousK2 => Some(2),
        }
    }

    pub fn alphabet(self) -> Arc<Alphabet> {
        match self.t_power() {
            None => Alphabet::two_letter(),
            Some(k) => Alphabet::polynomial_t(k),
        }
    }

    pub fn max_check_cap(self) -> u32 {
        match self {
            Model::Autonomous => AUTONOMOUS_MAX_CHECK,
            _ => NONAUTONOMOUS_MAX_CHECK,
        }
    }

    fn check_cap(self, degree: u32) -> Result<(), OrderError> {
        let cap = self.max_check_cap();
        if degree > cap {
            Err(OrderError::CapExceeded {
                model: self,
                requested: degree,
                cap,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = OrderError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| OrderError::UnknownModel(s.to_string()))
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// `exp(A + B)` truncated at `max_degree`: every word of length `n` has
/// coefficient `1/n!`.
pub fn exact_series_autonomous(max_degree: u32) -> Result<Series, OrderError> {
    Model::Autonomous.check_cap(max_degree)?;
    let al = Alphabet::two_letter();
    let a = Series::generator(al.clone(), max_degree, "A")?;
    let b = Series::generator(al, max_degree, "B")?;
    Ok(a.add(&b)?.exp()?)
}

/// Propagator `T(τ) = Σ τ^n T_n` of `u' = (H0 + ... + t^k Hk)u`, from
/// `T_0 = 1` and `n T_n = Σ_{m+j=n-1} H_m T_j`.
pub fn exact_series_polynomial_t(max_t_power: u32, max_degree: u32) -> Result<Series, OrderError> {
    if !(1..=2).contains(&max_t_power) {
        return Err(SchemeError::UnsupportedModel(max_t_power).into());
    }
    let al = Alphabet::polynomial_t(max_t_power);
    let h: Vec<Series> = (0..=max_t_power)
        .map(|m| Series::generator(al.clone(), max_degree, &format!("H{m}")))
        .collect::<Result<_, _>>()?;
    let mut parts: Vec<Series> = vec![Series::one(al.clone(), max_degree)?];
    for n in 1..=max_degree {
        let mut t_n = Series::zero(al.clone(), max_degree)?;
        for (m, hm) in h.iter().enumerate() {
            let Some(j) = (n as usize).checked_sub(m + 1) else {
                break;
            };
            t_n = t_n.add(&hm.mul(&parts[j])?)?;
        }
        let t_n = t_n.scale(&BigRational::new(BigInt::one(), BigInt::from(n)));
        if t_n.terms().any(|(w, _)| w.degree() != n) {
            return Err(OrderError::Grading(n));
        }
        parts.push(t_n);
    }
    let mut total = Series::zero(al, max_degree)?;
    for p in &parts {
        total = total.add(p)?;
    }
    Ok(total)
}

pub fn exact_series(model: Model, max_degree: u32) -> Result<Series, OrderError> {
    match model.t_power() {
        None => exact_series_autonomous(max_degree),
        Some(k) => exact_series_polynomial_t(k, max_degree),
    }
}

/// The method's series in the given model.
pub fn method_series(method: &Method, model: Model, max_degree: u32) -> Result<Series, OrderError> {
    model.check_cap(max_degree)?;
    match (method, model.t_power()) {
        (Method::Splitting(s), None) => Ok(compile_autonomous(s, max_degree)?),
        (Method::Splitting(s), Some(k)) => Ok(compile_nonautonomous(s, k, max_degree)?),
        (Method::CommutatorFree(cf), Some(1)) => Ok(compile_commutator_free(cf, max_degree)?),
        (Method::CommutatorFree(_), _) => Err(OrderError::ModelMismatch {
            model,
            what: "a commutator-free scheme (only nonautonomous-k1 applies)",
        }),
    }
}

/// One nonvanishing defect coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectTerm {
    pub word: String,
    #[serde(serialize_with = "serialize_display")]
    pub coefficient: BigRational,
}

fn serialize_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub achieved_order: u32,
    /// True when no defect was found up to `max_check`, so the order is at
    /// least `achieved_order`.
    pub lower_bound: bool,
    pub max_check: u32,
    pub model: Model,
    /// Nonzero coefficients of the degree `achieved_order + 1` part of
    /// method series minus exact series.
    pub defect: Vec<DefectTerm>,
}

impl OrderReport {
    pub fn order_label(&self) -> String {
        if self.lower_bound {
            format!(">= {}", self.achieved_order)
        } else {
            self.achieved_order.to_string()
        }
    }
}

/// Largest `q <= max_check` whose defect vanishes through degree `q`.
pub fn order_of(method: &Method, model: Model, max_check: u32) -> Result<OrderReport, OrderError> {
    model.check_cap(max_check)?;
    let diff = method_series(method, model, max_check)?.sub(&exact_series(model, max_check)?)?;
    let alphabet = diff.alphabet().clone();
    let report = match diff.lowest_degree() {
        None => OrderReport {
            achieved_order: max_check,
            lower_bound: true,
            max_check,
            model,
            defect: Vec::new(),
        },
        Some(d) => OrderReport {
            achieved_order: d.saturating_sub(1),
            lower_bound: false,
            max_check,
            model,
            defect: diff
                .degree_part(d)
                .terms()
                .map(|(w, c)| DefectTerm {
                    word: alphabet.render(w),
                    coefficient: c.clone(),
                })
                .collect(),
        },
    };
    Ok(report)
}

/// Words indexing residual entries: all words of degree `1..=order`.
pub fn residual_words(model: Model, order: u32) -> Result<Vec<Word>, OrderError> {
    let mut words = enumerate_words(&model.alphabet(), order)?;
    words.remove(0);
    Ok(words)
}

fn to_f64_preserving_zero(q: &BigRational) -> f64 {
    let x = rational_to_f64(q);
    if x == 0.0 && !q.is_zero() {
        // never let a nonzero defect round to an exact zero
        if q.is_negative() {
            -f64::MIN_POSITIVE
        } else {
            f64::MIN_POSITIVE
        }
    } else {
        x
    }
}

/// Defect coefficients of the pattern at exact coefficient values, flattened
/// over [`residual_words`]. An entry is `0.0` exactly when the defect is 0.
pub fn residual_exact(
    pattern: &Pattern,
    values: &[BigRational],
    order: u32,
    model: Model,
) -> Result<Vec<f64>, OrderError> {
    let coeffs: Vec<Coefficient> = values.iter().cloned().map(Coefficient::Exact).collect();
    let method = pattern.instantiate(&coeffs)?;
    let diff = method_series(&method, model, order)?.sub(&exact_series(model, order)?)?;
    Ok(residual_words(model, order)?
        .iter()
        .map(|w| to_f64_preserving_zero(&diff.coefficient(w)))
        .collect())
}

/// [`residual_exact`] at float coefficients, each converted exactly from its
/// binary representation.
pub fn residual(
    pattern: &Pattern,
    values: &[f64],
    order: u32,
    model: Model,
) -> Result<Vec<f64>, OrderError> {
    let exact = values
        .iter()
        .map(|&x| BigRational::from_float(x).ok_or(OrderError::NonFinite(x)))
        .collect::<Result<Vec<_>, _>>()?;
    residual_exact(pattern, &exact, order, model)
}
