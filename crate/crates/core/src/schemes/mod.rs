//! Splitting schemes: the factor-list data model, the built-in catalog, the
//! text file format, and compilation to series.
//!
//! A [`Scheme`] is an ordered list of factors written the way the operator
//! product is printed: the **last** factor acts **first** on the state. So
//! `[B(1), A(1)]` means "flow A for a full step, then flow B".
//!
//! B-flow factors may carry a coefficient `c` on `τ³[B,[B,A]]`, either in the
//! same exponential as `bτB` ([`Placement::Combined`]) or as a separate
//! exponential applied right after the B flow ([`Placement::Separate`]).

mod coefficient;
mod compile;
mod format;
mod identity;
pub mod pattern;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::SeriesError;

pub use coefficient::{rationalize, Coefficient};
pub(crate) use coefficient::rational_to_f64;
pub use compile::{
    compile_autonomous, compile_commutator_free, compile_frozen_flows, compile_nonautonomous,
    lie_derivative_image,
};
pub use format::{parse_scheme, serialize_scheme};
pub use identity::{commutator_free_identity_suite, random_classical_scheme, IdentityReport};
pub use pattern::{Pattern, PatternFactor, Slot, SlotInfo, SlotRole};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("scheme has no factors")]
    Empty,
    #[error("claimed order {order} but coefficient sums are Σa = {sum_a}, Σb = {sum_b}; both must be 1")]
    Inconsistent {
        order: u32,
        sum_a: String,
        sum_b: String,
    },
    #[error("coefficient {0} is not finite")]
    NonFinite(String),
    #[error("unknown catalog scheme {0:?}; known: lie_trotter, strang, chin")]
    UnknownScheme(String),
    #[error("operation requires a classical scheme, but factor {0} carries a commutator term")]
    NotClassical(usize),
    #[error("nonautonomous model with t-power {0} is not supported (use 1 or 2)")]
    UnsupportedModel(u32),
    #[error("pattern shape {0:?}: use the letters A, B and G, or E for commutator-free stages")]
    BadShape(String),
    #[error("pattern expects {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// `exp(bτB + cτ³[B,[B,A]])`
    #[default]
    Combined,
    /// `exp(cτ³[B,[B,A]]) exp(bτB)`: the B flow acts first.
    Separate,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Combined => "combined",
            Placement::Separate => "separate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `exp(aτA)`
    A { a: Coefficient },
    /// `exp(bτB)` with an optional `cτ³[B,[B,A]]` term.
    B {
        b: Coefficient,
        c: Coefficient,
        placement: Placement,
    },
}

impl Factor {
    pub fn a(a: Coefficient) -> Self {
        Factor::A { a }
    }

    pub fn b(b: Coefficient) -> Self {
        Factor::B {
            b,
            c: Coefficient::zero(),
            placement: Placement::Combined,
        }
    }

    pub fn b_generalized(b: Coefficient, c: Coefficient, placement: Placement) -> Self {
        Factor::B { b, c, placement }
    }

    pub fn has_commutator(&self) -> bool {
        matches!(self, Factor::B { c, .. } if !c.is_zero())
    }

    fn coefficients(&self) -> Vec<&Coefficient> {
        match self {
            Factor::A { a } => vec![a],
            Factor::B { b, c, .. } => vec![b, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    name: String,
    factors: Vec<Factor>,
    claimed_order: Option<u32>,
}

impl Scheme {
    pub fn new(
        name: impl Into<String>,
        factors: Vec<Factor>,
        claimed_order: Option<u32>,
    ) -> Result<Self, SchemeError> {
        let s = Self {
            name: name.into(),
            factors,
            claimed_order,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), SchemeError> {
        if self.factors.is_empty() {
            return Err(SchemeError::Empty);
        }
        for f in &self.factors {
            for c in f.coefficients() {
                if !c.is_finite() {
                    return Err(SchemeError::NonFinite(c.to_string()));
                }
            }
        }
        if let Some(order) = self.claimed_order.filter(|&p| p >= 1) {
            let (sum_a, sum_b) = self.coefficient_sums();
            if !is_one(&sum_a) || !is_one(&sum_b) {
                return Err(SchemeError::Inconsistent {
                    order,
                    sum_a: sum_a.to_string(),
                    sum_b: sum_b.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn claimed_order(&self) -> Option<u32> {
        self.claimed_order
    }

    /// Factors in the order they act on the state (reverse of the list).
    pub fn application_order(&self) -> impl Iterator<Item = &Factor> {
        self.factors.iter().rev()
    }

    pub fn is_classical(&self) -> bool {
        !self.factors.iter().any(Factor::has_commutator)
    }

    /// `(Σa_j, Σb_j)`
    pub fn coefficient_sums(&self) -> (Coefficient, Coefficient) {
        let mut sa = Coefficient::zero();
        let mut sb = Coefficient::zero();
        for f in &self.factors {
            match f {
                Factor::A { a } => sa = &sa + a,
                Factor::B { b, .. } => sb = &sb + b,
            }
        }
        (sa, sb)
    }

    /// A-flow coefficients in application order.
    pub fn a_coefficients(&self) -> Vec<Coefficient> {
        self.application_order()
            .filter_map(|f| match f {
                Factor::A { a } => Some(a.clone()),
                _ => None,
            })
            .collect()
    }

    /// B-flow coefficients in application order.
    pub fn b_coefficients(&self) -> Vec<Coefficient> {
        self.application_order()
            .filter_map(|f| match f {
                Factor::B { b, .. } => Some(b.clone()),
                _ => None,
            })
            .collect()
    }

    /// Same scheme with every commutator coefficient set to zero. The claimed
    /// order is dropped since it no longer applies.
    pub fn with_zero_c(&self) -> Scheme {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::B { b, placement, .. } => Factor::B {
                    b: b.clone(),
                    c: Coefficient::zero(),
                    placement: *placement,
                },
                other => other.clone(),
            })
            .collect();
        Scheme {
            name: format!("{}_zero_c", self.name),
            factors,
            claimed_order: None,
        }
    }

    /// Factor list reversed (the adjoint applied at `-τ` would also negate).
    pub fn reversed(&self) -> Scheme {
        let mut factors = self.factors.clone();
        factors.reverse();
        Scheme {
            name: format!("{}_reversed", self.name),
            factors,
            claimed_order: self.claimed_order,
        }
    }

    /// Rewrites every B factor with the given commutator placement.
    pub fn with_placement(&self, placement: Placement) -> Scheme {
        let factors = self
            .factors
            .iter()
            .map(|f| match f {
                Factor::B { b, c, .. } => Factor::B {
                    b: b.clone(),
                    c: c.clone(),
                    placement,
                },
                other => other.clone(),
            })
            .collect();
        Scheme {
            name: self.name.clone(),
            factors,
            claimed_order: self.claimed_order,
        }
    }
}

fn is_one(c: &Coefficient) -> bool {
    match c {
        Coefficient::Exact(q) => num_traits::One::is_one(q),
        Coefficient::Float(x) => (x - 1.0).abs() <= 1e-12,
    }
}

/// One exponential `exp(aτH0 + cτ²H1)` of a commutator-free integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct CfStage {
    pub a: Coefficient,
    pub c: Coefficient,
}

impl CfStage {
    pub fn new(a: Coefficient, c: Coefficient) -> Self {
        Self { a, c }
    }
}

/// A commutator-free exponential integrator for `u' = (H0 + tH1)u`.
/// As with [`Scheme`], the last stage in the list acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct CfScheme {
    stages: Vec<CfStage>,
}

impl CfScheme {
    pub fn new(stages: Vec<CfStage>) -> Result<Self, SchemeError> {
        if stages.is_empty() {
            return Err(SchemeError::Empty);
        }
        for s in &stages {
            for c in [&s.a, &s.c] {
                if !c.is_finite() {
                    return Err(SchemeError::NonFinite(c.to_string()));
                }
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[CfStage] {
        &self.stages
    }

    pub fn application_order(&self) -> impl Iterator<Item = &CfStage> {
        self.stages.iter().rev()
    }
}

/// Anything that can be order-checked or applied.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Splitting(Scheme),
    CommutatorFree(CfScheme),
}

impl From<Scheme> for Method {
    fn from(s: Scheme) -> Self {
        Method::Splitting(s)
    }
}

impl From<CfScheme> for Method {
    fn from(s: CfScheme) -> Self {
        Method::CommutatorFree(s)
    }
}

pub const CATALOG: [&str; 3] = ["lie_trotter", "strang", "chin"];

pub fn catalog_get(name: &str) -> Result<Scheme, SchemeError> {
    let q = Coefficient::ratio;
    let (factors, order) = match name {
        "lie_trotter" => (vec![Factor::b(q(1, 1)), Factor::a(q(1, 1))], 1),
        "strang" => (
            vec![Factor::a(q(1, 2)), Factor::b(q(1, 1)), Factor::a(q(1, 2))],
            2,
        ),
        "chin" => (
            vec![
                Factor::b(q(1, 6)),
                Factor::a(q(1, 2)),
                Factor::b_generalized(q(2, 3), q(-1, 72), Placement::Combined),
                Factor::a(q(1, 2)),
                Factor::b(q(1, 6)),
            ],
            4,
        ),
        other => return Err(SchemeError::UnknownScheme(other.to_string())),
    };
    Scheme::new(name, factors, Some(order))
}

/// Rewrites a classical scheme for `u' = (H0 + tH1)u` as a commutator-free
/// product. Each A flow with coefficient `a`, reached after B flows summing to
/// `σ`, becomes the stage `(a, a·σ)`; B flows only shift time and vanish.
pub fn to_commutator_free(scheme: &Scheme) -> Result<CfScheme, SchemeError> {
    if let Some(i) = scheme.factors.iter().position(Factor::has_commutator) {
        return Err(SchemeError::NotClassical(i));
    }
    let mut shift = Coefficient::zero();
    let mut stages = Vec::new();
    for f in scheme.application_order() {
        match f {
            Factor::A { a } => stages.push(CfStage::new(a.clone(), a * &shift)),
            Factor::B { b, .. } => shift = &shift + b,
        }
    }
    if stages.is_empty() {
        // a pure time shift propagates u by the identity
        stages.push(CfStage::new(Coefficient::zero(), Coefficient::zero()));
    }
    stages.reverse();
    CfScheme::new(stages)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::ratio(n, d)
    }

    #[test]
    fn catalog_entries() {
        let strang = catalog_get("strang").unwrap();
        assert_eq!(
            strang.factors(),
            &[Factor::a(q(1, 2)), Factor::b(q(1, 1)), Factor::a(q(1, 2))]
        );
        assert_eq!(strang.claimed_order(), Some(2));

        let chin = catalog_get("chin").unwrap();
        assert_eq!(chin.factors().len(), 5);
        assert_eq!(
            chin.factors()[2],
            Factor::b_generalized(q(2, 3), q(-1, 72), Placement::Combined)
        );
        assert_eq!(chin.claimed_order(), Some(4));
        assert!(!chin.is_classical());

        let lt = catalog_get("lie_trotter").unwrap();
        assert_eq!(lt.factors(), &[Factor::b(q(1, 1)), Factor::a(q(1, 1))]);
        assert_eq!(lt.claimed_order(), Some(1));

        assert!(matches!(catalog_get("yoshida"), Err(SchemeError::UnknownScheme(_))));
    }

    #[test]
    fn inconsistent_claim_is_rejected() {
        let err = Scheme::new("bad", vec![Factor::a(q(1, 2)), Factor::b(q(1, 1))], Some(1));
        assert!(matches!(err, Err(SchemeError::Inconsistent { .. })));
        assert!(Scheme::new("ok", vec![Factor::a(q(1, 2)), Factor::b(q(1, 1))], None).is_ok());
        assert_eq!(Scheme::new("e", vec![], None), Err(SchemeError::Empty));
    }

    #[test]
    fn strang_to_commutator_free() {
        let cf = to_commutator_free(&catalog_get("strang").unwrap()).unwrap();
        let applied: Vec<_> = cf.application_order().cloned().collect();
        assert_eq!(
            applied,
            vec![CfStage::new(q(1, 2), q(0, 1)), CfStage::new(q(1, 2), q(1, 2))]
        );
    }

    #[test]
    fn lie_trotter_to_commutator_free() {
        let cf = to_commutator_free(&catalog_get("lie_trotter").unwrap()).unwrap();
        assert_eq!(cf.stages(), &[CfStage::new(q(1, 1), q(0, 1))]);
    }

    #[test]
    fn first_applied_stage_has_no_h1_term() {
        let s = Scheme::new(
            "x",
            vec![
                Factor::b(q(1, 3)),
                Factor::a(q(1, 4)),
                Factor::b(q(2, 3)),
                Factor::a(q(3, 4)),
            ],
            Some(1),
        )
        .unwrap();
        let cf = to_commutator_free(&s).unwrap();
        let first = cf.application_order().next().unwrap();
        assert!(first.c.is_zero());
        assert_eq!(cf.stages()[0], CfStage::new(q(1, 4), q(1, 6)));
    }

    #[test]
    fn generalized_input_is_rejected() {
        let chin = catalog_get("chin").unwrap();
        assert_eq!(to_commutator_free(&chin), Err(SchemeError::NotClassical(2)));
    }

    #[test]
    fn zero_c_variant_is_classical() {
        let z = catalog_get("chin").unwrap().with_zero_c();
        assert!(z.is_classical());
        assert_eq!(z.b_coefficients(), vec![q(1, 6), q(2, 3), q(1, 6)]);
        assert_eq!(z.a_coefficients(), vec![q(1, 2), q(1, 2)]);
    }
}
