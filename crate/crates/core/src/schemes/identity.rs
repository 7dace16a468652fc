//! Machine check of the commutator-free rewrite of classical schemes in the
//! `u' = (H0 + tH1)u` model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    compile_commutator_free, compile_nonautonomous, to_commutator_free, Coefficient, Factor, Scheme,
    SchemeError,
};

/// Classical `[B A]×s` scheme with `s <= max_stages` and coefficients
/// `k/12`, `k ∈ [-12, 12]` (no consistency condition).
pub fn random_classical_scheme(rng: &mut ChaCha8Rng, max_stages: usize) -> Scheme {
    let stages = rng.random_range(1..=max_stages);
    let mut draw = || Coefficient::ratio(rng.random_range(-12..=12), 12);
    let factors = (0..stages)
        .flat_map(|_| {
            let b = draw();
            [Factor::b(b), Factor::a(draw())]
        })
        .collect();
    Scheme::new("random", factors, None).expect("finite coefficients")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub schemes: usize,
    pub max_stages: usize,
    pub max_degree: u32,
    pub seed: u64,
    /// indices of schemes whose two series differ
    pub mismatches: Vec<usize>,
    pub words_compared: usize,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares [`compile_nonautonomous`] (k = 1) with the series of
/// [`to_commutator_free`] on `count` seeded random classical schemes.
pub fn commutator_free_identity_suite(
    count: usize,
    max_stages: usize,
    max_degree: u32,
    seed: u64,
) -> Result<IdentityReport, SchemeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    let mut words_compared = 0;
    for i in 0..count {
        let scheme = random_classical_scheme(&mut rng, max_stages);
        let lhs = compile_nonautonomous(&scheme, 1, max_degree)?;
        let rhs = compile_commutator_free(&to_commutator_free(&scheme)?, max_degree)?;
        words_compared += lhs.len().max(rhs.len());
        if lhs != rhs {
            mismatches.push(i);
        }
    }
    Ok(IdentityReport {
        schemes: count,
        max_stages,
        max_degree,
        seed,
        mismatches,
        words_compared,
    })
}
