//! Irreducible character degrees and the finite product-containment experiment.
//!
//! Degrees come from the class-sum method: the normalized central characters
//! `ω_χ(C_k) = |C_k|·χ(g_k)/χ(1)` are the common eigenvectors of the class
//! multiplication matrices. Working modulo a prime `p ≡ 1 (mod exp G)`, a
//! random combination of those matrices is split into eigenspaces until all
//! are one-dimensional; each eigenvector `w` (scaled so `w_1 = 1`) gives
//! `χ(1)² = |G| / Σ_k w_k·w_{k*}/|C_k|`, which is lifted from 𝔽_p because
//! `p > 2√|G|`.
//!
//! The experiment draws sets of size `⌈ε|G|⌉` and looks for `n` distinct
//! non-identity elements whose ordered products all stay in the set: greedy
//! IP extraction first, then exhaustive search. Besides random sets it runs a
//! fixed adversarial battery:
//! 1. the largest product-free set found by [`max_product_free`], truncated
//!    or padded (with the smallest missing elements) to the set size;
//! 2. left translates of that set by the first four non-identity elements;
//! 3. for each proper nontrivial normal cyclic subgroup `H` (up to eight, in
//!    order of least generator), the union of the non-trivial cosets of `H`
//!    in element order, truncated or padded to the set size.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::groups::{ConjugacyData, GroupTable};
use crate::modp::{self, Matrix};
use crate::rational::Rational;
use crate::sets::{FpBudget, GroupSubset, Subset};
use crate::sumsets::{find_fp_base, ip_extract, max_product_free, IpOutcome, SumsetError, DEFAULT_PF_EXACT_BOUND};

pub const MAX_DEGREE_ORDER: usize = 2000;
const MAX_RETRIES: usize = 32;
const MAX_EXPERIMENT_N: usize = 6;
const EXHAUSTIVE_NODE_BUDGET: u64 = 1 << 24;
const BATTERY_TRANSLATES: usize = 4;
const BATTERY_SUBGROUPS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuasiError {
    #[error("group order {order} exceeds the limit of {limit} for degree computation")]
    OrderTooLarge { order: usize, limit: usize },
    #[error("degree recovery failed modulo {prime} (seed {seed})")]
    DegreeRecoveryFailed { prime: u64, seed: u64 },
    #[error("the trivial group has no nontrivial representations")]
    TrivialGroup,
    #[error("invalid experiment parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Search(#[from] SumsetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    /// Abelian group: every irreducible is one-dimensional.
    VerifiedSmall,
    /// Eigenvectors of class-sum matrices over 𝔽_p.
    ExactModular,
}

impl DegreeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DegreeMethod::VerifiedSmall => "verified-small",
            DegreeMethod::ExactModular => "exact-modular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterDegrees {
    /// Sorted ascending.
    pub degrees: Vec<u64>,
    pub method: DegreeMethod,
    /// The prime used by the modular method.
    pub prime: Option<u64>,
}

impl CharacterDegrees {
    /// Minimum degree over nontrivial irreducibles.
    pub fn quasirandom_degree(&self) -> Result<u64, QuasiError> {
        self.degrees.get(1).copied().ok_or(QuasiError::TrivialGroup)
    }

    /// `Σ d² = |G|`, count = class count, each degree divides `|G|`, and a trivial character.
    pub fn check(&self, order: usize, class_count: usize) -> bool {
        let sum: u64 = self.degrees.iter().map(|d| d * d).sum();
        sum == order as u64
            && self.degrees.len() == class_count
            && self.degrees.first() == Some(&1)
            && self.degrees.iter().all(|d| order as u64 % d == 0)
    }
}

/// Degrees of the complex irreducible characters.
pub fn character_degrees(g: &GroupTable, seed: u64) -> Result<CharacterDegrees, QuasiError> {
    if g.order() > MAX_DEGREE_ORDER {
        return Err(QuasiError::OrderTooLarge {
            order: g.order(),
            limit: MAX_DEGREE_ORDER,
        });
    }
    if g.is_abelian() {
        return Ok(CharacterDegrees {
            degrees: vec![1; g.order()],
            method: DegreeMethod::VerifiedSmall,
            prime: None,
        });
    }
    let classes = ConjugacyData::compute(g);
    let order = g.order() as u64;
    let bound = 2 * (order as f64).sqrt().ceil() as u64;
    let p = modp::prime_one_mod(g.exponent() as u64, bound);
    let failed = || QuasiError::DegreeRecoveryFailed { prime: p, seed };
    let vectors = split_eigenspaces(g, &classes, p, seed).ok_or_else(failed)?;

    let r = classes.class_count();
    let id_class = classes.class_of(g.identity());
    let sizes = classes.class_sizes();
    let max_d = (order as f64).sqrt().floor() as u64 + 1;
    let mut degrees = Vec::with_capacity(r);
    for v in vectors {
        let lead = v[id_class];
        if lead == 0 {
            return Err(failed());
        }
        let scale = modp::inv_mod(lead, p);
        let w: Vec<u64> = v.iter().map(|&x| modp::mul_mod(x, scale, p)).collect();
        let mut s = 0u64;
        for k in 0..r {
            let term = modp::mul_mod(w[k], w[classes.inverse_class(k)], p);
            s = (s + modp::mul_mod(term, modp::inv_mod(sizes[k] as u64 % p, p), p)) % p;
        }
        if s == 0 {
            return Err(failed());
        }
        let d2 = modp::mul_mod(order % p, modp::inv_mod(s, p), p);
        let d = (1..=max_d).find(|&d| d * d % p == d2).ok_or_else(failed)?;
        degrees.push(d);
    }
    degrees.sort_unstable();
    let result = CharacterDegrees {
        degrees,
        method: DegreeMethod::ExactModular,
        prime: Some(p),
    };
    if !result.check(g.order(), r) {
        return Err(failed());
    }
    Ok(result)
}

/// Matrix of `Σ_i c_i·M_i` where `(M_i)_{jk} = a_{ijk}`, built in `O(|G|·r)`.
fn combination_matrix(g: &GroupTable, classes: &ConjugacyData, coeffs: &[u64], p: u64) -> Matrix {
    let r = classes.class_count();
    let mut m = vec![vec![0u64; r]; r];
    for k in 0..r {
        let z = classes.representative(k);
        for x in 0..g.order() {
            let j = classes.class_of(g.mul(g.inv(x), z));
            m[j][k] = (m[j][k] + coeffs[classes.class_of(x)]) % p;
        }
    }
    m
}

/// Basis rows of a subspace in reduced echelon form, plus its pivot columns.
struct Subspace {
    rows: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    fn new(mut rows: Matrix, p: u64) -> Self {
        let pivots = modp::rref(&mut rows, p);
        Self { rows, pivots }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Splits `𝔽_p^r` into common one-dimensional eigenspaces of the class
/// matrices. Each returned vector is a right eigenvector of every `M_i`.
fn split_eigenspaces(g: &GroupTable, classes: &ConjugacyData, p: u64, seed: u64) -> Option<Vec<Vec<u64>>> {
    let r = classes.class_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity: Matrix = (0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect();
    let mut pending = vec![Subspace::new(identity, p)];
    let mut done = Vec::new();
    let mut retries = 0;
    while let Some(space) = pending.pop() {
        if space.dim() == 1 {
            done.push(space.rows[0].clone());
            continue;
        }
        let coeffs: Vec<u64> = (0..r).map(|_| rng.random_range(0..p)).collect();
        let m = combination_matrix(g, classes, &coeffs, p);
        // Action of m on the subspace in the coordinates given by the pivots.
        let images: Vec<Vec<u64>> = space.rows.iter().map(|b| modp::mat_vec(&m, b, p)).collect();
        let d = space.dim();
        let restricted: Matrix = (0..d).map(|s| (0..d).map(|t| images[t][space.pivots[s]]).collect()).collect();
        let poly = modp::charpoly(&restricted, p);
        let eigenvalues = modp::roots(&poly, p);
        let mut pieces = Vec::new();
        let mut total = 0;
        for lambda in &eigenvalues {
            let shifted: Matrix = (0..d)
                .map(|s| (0..d).map(|t| (restricted[s][t] + if s == t { p - lambda } else { 0 }) % p).collect())
                .collect();
            let coords = modp::nullspace(&shifted, d, p);
            total += coords.len();
            let vectors: Matrix = coords
                .iter()
                .map(|u| {
                    (0..r)
                        .map(|c| (0..d).fold(0, |acc, t| (acc + modp::mul_mod(u[t], space.rows[t][c], p)) % p))
                        .collect()
                })
                .collect();
            pieces.push(Subspace::new(vectors, p));
        }
        if eigenvalues.len() > 1 && total == d {
            pending.extend(pieces);
        } else {
            retries += 1;
            if retries > MAX_RETRIES {
                return None;
            }
            pending.push(space);
        }
    }
    done.sort();
    Some(done)
}

/// `d(G)`: the least dimension of a nontrivial irreducible representation.
pub fn quasirandom_degree(g: &GroupTable, seed: u64) -> Result<u64, QuasiError> {
    character_degrees(g, seed)?.quasirandom_degree()
}

/// Where a tested set came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetSource {
    Trial(usize),
    Battery(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    /// A base whose ordered products all lie in the set.
    Found { base: Vec<usize>, greedy: bool },
    /// Exhaustive search proved no such base exists.
    Counterexample,
    /// The greedy pass failed and exhaustive search was not allowed.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestedSet {
    pub source: SetSource,
    pub members: Vec<usize>,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiExperimentReport {
    pub group: String,
    pub epsilon: Rational,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub set_size: usize,
    pub successes: usize,
    /// Whether the exhaustive fallback was within the feasibility bound.
    pub exhaustive: bool,
    pub random: Vec<TestedSet>,
    pub battery: Vec<TestedSet>,
}

impl QuasiExperimentReport {
    pub fn counterexamples(&self) -> impl Iterator<Item = &TestedSet> {
        self.random
            .iter()
            .chain(&self.battery)
            .filter(|t| t.result == SearchResult::Counterexample)
    }

    pub fn undecided(&self) -> usize {
        self.random
            .iter()
            .chain(&self.battery)
            .filter(|t| t.result == SearchResult::Undecided)
            .count()
    }
}

/// Size `⌈ε·|G|⌉` of the tested sets.
pub fn experiment_set_size(order: usize, epsilon: Rational) -> usize {
    (epsilon * Rational::from_integer(order as i64)).ceil().to_integer() as usize
}

/// The random set for one trial, seeded by `seed + trial`.
pub fn trial_set(g: &Arc<GroupTable>, size: usize, seed: u64, trial: usize) -> GroupSubset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
    Subset::from_elements(g.clone(), sample(&mut rng, g.order(), size).into_iter()).0
}

/// The adversarial battery described in the module docs.
pub fn adversarial_battery(g: &Arc<GroupTable>, size: usize, seed: u64) -> Vec<(String, GroupSubset)> {
    let fit = |mut members: Vec<usize>| -> GroupSubset {
        members.truncate(size);
        let mut set = Subset::from_elements(g.clone(), members).0;
        let mut x = 0;
        while set.len() < size {
            set.insert(x);
            x += 1;
        }
        set
    };
    let mut out = Vec::new();
    let pf = max_product_free(g, DEFAULT_PF_EXACT_BOUND, seed);
    let base = fit(pf.witness.clone());
    for t in (0..g.order()).filter(|&t| t != g.identity()).take(BATTERY_TRANSLATES) {
        out.push((format!("product-free-translate:{t}"), base.translate(t).set));
    }
    out.insert(0, ("product-free".to_string(), base));

    let mut seen = BTreeSet::new();
    for x in 0..g.order() {
        if seen.len() >= BATTERY_SUBGROUPS {
            break;
        }
        let h = g.closure(&[x]);
        if h.len() <= 1 || h.len() == g.order() || !seen.insert(h.clone()) {
            continue;
        }
        let normal = (0..g.order()).all(|y| h.iter().all(|&z| h.binary_search(&g.conj(y, z)).is_ok()));
        if !normal {
            continue;
        }
        let members: Vec<usize> = (0..g.order()).filter(|z| h.binary_search(z).is_err()).collect();
        out.push((format!("cosets-of:{x}"), fit(members)));
    }
    out
}

/// Greedy extraction, then exhaustive search when allowed.
pub fn search_products(set: &GroupSubset, n: usize, exhaustive: bool) -> Result<SearchResult, QuasiError> {
    let floor = Rational::new(1, set.ambient().order() as i64);
    if let Ok(IpOutcome::Extracted(cert)) = ip_extract(set, n, floor, FpBudget::default()) {
        return Ok(SearchResult::Found {
            base: cert.base,
            greedy: true,
        });
    }
    if !exhaustive {
        return Ok(SearchResult::Undecided);
    }
    Ok(match find_fp_base(set, n, EXHAUSTIVE_NODE_BUDGET)? {
        Some(base) => SearchResult::Found { base, greedy: false },
        None => SearchResult::Counterexample,
    })
}

/// Runs the experiment. Trials are independent and evaluated in parallel;
/// results are reported in trial order.
pub fn quasi_products_experiment(
    g: &Arc<GroupTable>,
    epsilon: Rational,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<QuasiExperimentReport, QuasiError> {
    let bad = |m: String| Err(QuasiError::InvalidParameters(m));
    if epsilon <= Rational::from_integer(0) || epsilon > Rational::from_integer(1) {
        return bad(format!("epsilon must lie in (0, 1], got {epsilon}"));
    }
    if n == 0 || n > MAX_EXPERIMENT_N {
        return bad(format!("n must be between 1 and {MAX_EXPERIMENT_N}"));
    }
    let size = experiment_set_size(g.order(), epsilon);
    if size < n {
        return bad(format!("sets of size {size} cannot hold {n} distinct elements"));
    }
    // Exhaustive fallback is allowed when |G| ≤ 60/ε.
    let exhaustive = Rational::from_integer(g.order() as i64) * epsilon <= Rational::from_integer(60);

    let random: Vec<TestedSet> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let set = trial_set(g, size, seed, t);
            let result = search_products(&set, n, exhaustive)?;
            Ok(TestedSet {
                source: SetSource::Trial(t),
                members: set.to_vec(),
                result,
            })
        })
        .collect::<Result<_, QuasiError>>()?;
    let battery: Vec<TestedSet> = adversarial_battery(g, size, seed)
        .into_par_iter()
        .map(|(label, set)| {
            let result = search_products(&set, n, exhaustive)?;
            Ok(TestedSet {
                source: SetSource::Battery(label),
                members: set.to_vec(),
                result,
            })
        })
        .collect::<Result<_, QuasiError>>()?;
    let successes = random
        .iter()
        .filter(|t| matches!(t.result, SearchResult::Found { .. }))
        .count();
    Ok(QuasiExperimentReport {
        group: g.name().to_string(),
        epsilon,
        n,
        trials,
        seed,
        set_size: size,
        successes,
        exhaustive,
        random,
        battery,
    })
}
