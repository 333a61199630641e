//! Constructive searches for product structure inside a set: greedy IP-set
//! extraction, Nathanson decompositions `F₁⋯Fₙ·B ⊆ A`, productsets
//! `B·C ⊆ A`, and product-free sets.
//!
//! All searches are greedy with ties broken by the smallest element index,
//! so results do not depend on how candidate scoring is parallelized.

mod ip;
mod nathanson;
mod product_free;
mod productset;

pub use ip::{find_fp_base, ip_extract, nested_sets, IpCertificate, IpFailure, IpOutcome};
pub use nathanson::{
    nathanson_decompose, verify_nathanson, NathansonCertificate, NathansonFailure, NathansonFailureReason,
    NathansonOutcome, NathansonViolation,
};
pub use product_free::{max_product_free, product_free_check, MaxProductFree, DEFAULT_PF_EXACT_BOUND};
pub use productset::{
    difference_witnesses, max_biclique, productset_search, verify_productset, ProductsetCertificate,
    ProductsetFailure, ProductsetOutcome, RAMSEY_CAP,
};

use rayon::prelude::*;
use thiserror::Error;

use crate::rational::Rational;
use crate::sets::{Ambient, SetError, Subset};

/// Default finitary "wide" threshold: relative density 1/100.
pub fn default_width_floor() -> Rational {
    Rational::new(1, 100)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SumsetError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("a grid of side {k} needs a staircase of length {needed}, above the cap of {cap}")]
    RamseyBudgetExceeded { k: usize, needed: usize, cap: usize },
    #[error("search exceeded its node budget of {0}")]
    NodeBudget(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Either kind of decomposition, for code that handles both uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionCertificate<A: Ambient> {
    Nathanson(NathansonCertificate<A>),
    Productset(ProductsetCertificate<A>),
}

impl<A: Ambient> DecompositionCertificate<A> {
    /// Re-checks the claimed containment against `A`.
    pub fn holds(&self, set: &Subset<A>) -> bool {
        match self {
            DecompositionCertificate::Nathanson(c) => {
                c.b.is_subset(set) && verify_nathanson(set, &c.parts, &c.b).is_ok()
            }
            DecompositionCertificate::Productset(c) => verify_productset(set, &c.b, &c.c).is_ok(),
        }
    }
}

/// `x⁻¹·S`, i.e. the elements `y` with `x·y ∈ S`.
pub(crate) fn pullback<A: Ambient>(set: &Subset<A>, x: A::Elem) -> Subset<A> {
    set.translate(set.ambient().inverse(x)).set
}

/// Canonical-order argmax: highest score, then the earliest candidate.
/// Candidates must be supplied in ascending element order.
pub(crate) fn argmax_by_score<E: Copy + Send + Sync>(
    candidates: &[E],
    score: impl Fn(E) -> usize + Sync,
) -> Option<(E, usize)> {
    let scores: Vec<usize> = candidates.par_iter().map(|&x| score(x)).collect();
    let mut best: Option<(E, usize)> = None;
    for (&x, &s) in candidates.iter().zip(&scores) {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((x, s));
        }
    }
    best
}
