use crate::rational::{ratio, Rational};
use crate::sets::{Ambient, Subset};

use super::{argmax_by_score, pullback};

#[derive(Debug, Clone, PartialEq)]
pub struct NathansonCertificate<A: Ambient> {
    /// `F₁, …, Fₙ`, each of size `m`, in selection order.
    pub parts: Vec<Vec<A::Elem>>,
    pub b: Subset<A>,
    /// Where every translate used to build `B` is fully inside the window.
    pub region: Subset<A>,
    /// Relative density of `B₁, …, Bₙ`; the last entry is the density of `B`.
    pub level_densities: Vec<Rational>,
}

impl<A: Ambient> NathansonCertificate<A> {
    pub fn density(&self) -> Rational {
        *self.level_densities.last().expect("at least one level")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NathansonFailureReason {
    /// The current set has fewer than `m` elements.
    TooFewElements { have: usize, need: usize },
    /// `B` ended up below the width floor.
    BelowFloor { density: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NathansonFailure<E> {
    /// 1-based recursion level that failed.
    pub level: usize,
    pub parts: Vec<Vec<E>>,
    pub reason: NathansonFailureReason,
    pub level_densities: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NathansonOutcome<A: Ambient> {
    Decomposed(NathansonCertificate<A>),
    Failed(NathansonFailure<A::Elem>),
}

/// A product `f₁⋯fₙ·b` that escapes `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NathansonViolation<E> {
    pub factors: Vec<E>,
    pub b: E,
    pub value: E,
}

/// Finds `F₁, …, Fₙ ⊆ A` of size `m` and `B ⊆ A` with `F₁⋯Fₙ·B ⊆ A`.
///
/// One level picks distinct `h₁ … h_m` from the current set `S`, each time
/// maximizing `|C ∩ h⁻¹·S|` where `C` starts as `S`, and returns
/// `B = S ∩ ⋂ h_i⁻¹·S`. Level `i + 1` runs on the `B` of level `i`, so the
/// parts compose as `F₁·(F₂·(⋯Fₙ·B)) ⊆ A`. Every level must keep relative
/// density at least `width_floor`.
pub fn nathanson_decompose<A: Ambient>(
    set: &Subset<A>,
    n: usize,
    m: usize,
    width_floor: Rational,
) -> NathansonOutcome<A> {
    assert!(n >= 1 && m >= 1, "n and m must be positive");
    let mut current = set.clone();
    let mut region = Subset::full(set.ambient().clone());
    let mut parts = Vec::with_capacity(n);
    let mut level_densities = Vec::with_capacity(n);
    for level in 1..=n {
        let source = current.clone();
        if source.len() < m {
            return NathansonOutcome::Failed(NathansonFailure {
                level,
                parts,
                reason: NathansonFailureReason::TooFewElements {
                    have: source.len(),
                    need: m,
                },
                level_densities,
            });
        }
        let mut chosen: Vec<A::Elem> = Vec::with_capacity(m);
        for _ in 0..m {
            let candidates: Vec<A::Elem> = source.iter().filter(|x| !chosen.contains(x)).collect();
            let (h, _) = argmax_by_score(&candidates, |h| current.intersection_len(&pullback(&source, h)))
                .expect("source has at least m elements");
            current = current.intersection(&pullback(&source, h));
            region = region.intersection(&pullback(&region, h));
            chosen.push(h);
        }
        parts.push(chosen);
        let density = if region.is_empty() {
            Rational::from_integer(0)
        } else {
            ratio(current.len(), region.len())
        };
        level_densities.push(density);
        if current.is_empty() || density < width_floor {
            return NathansonOutcome::Failed(NathansonFailure {
                level,
                parts,
                reason: NathansonFailureReason::BelowFloor { density },
                level_densities,
            });
        }
    }
    NathansonOutcome::Decomposed(NathansonCertificate {
        parts,
        b: current,
        region,
        level_densities,
    })
}

/// Checks `F₁⋯Fₙ·B ⊆ A` exhaustively. Returns the least violation in the
/// order (factor tuple, b).
pub fn verify_nathanson<A: Ambient>(
    set: &Subset<A>,
    parts: &[Vec<A::Elem>],
    b: &Subset<A>,
) -> Result<(), NathansonViolation<A::Elem>> {
    let ambient = set.ambient();
    // Every distinct left factor f₁⋯fₙ with its least factor tuple.
    let mut prefixes: Vec<(Vec<A::Elem>, A::Elem)> = vec![(Vec::new(), ambient.identity())];
    for part in parts {
        let mut next = Vec::new();
        for (factors, value) in &prefixes {
            for &f in part {
                let mut fs = factors.clone();
                fs.push(f);
                next.push((fs, ambient.op(*value, f)));
            }
        }
        next.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
        next.dedup_by(|x, y| x.1 == y.1);
        prefixes = next;
    }
    prefixes.sort_by(|x, y| x.0.cmp(&y.0));
    for (factors, value) in prefixes {
        for y in b.iter() {
            let v = ambient.op(value, y);
            if !set.contains(v) {
                return Err(NathansonViolation { factors, b: y, value: v });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::sets::IntWindow;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn floor() -> Rational {
        Rational::new(1, 100)
    }

    #[test]
    fn evens_keep_all_of_b() {
        let a = Subset::from_predicate(IntWindow::new(0, 1000).unwrap(), |x| x % 2 == 0);
        let NathansonOutcome::Decomposed(cert) = nathanson_decompose(&a, 1, 5, floor()) else {
            panic!("expected success");
        };
        assert_eq!(cert.parts, vec![vec![0, 2, 4, 6, 8]]);
        assert!(cert.b.iter().all(|x| x % 2 == 0));
        let d = cert.density();
        assert!(d >= Rational::new(49, 100) && d <= Rational::new(51, 100), "{d}");
        verify_nathanson(&a, &cert.parts, &cert.b).unwrap();
    }

    #[test]
    fn singleton_cannot_supply_two() {
        let a = Subset::from_elements(IntWindow::new(-5, 5).unwrap(), [0]).0;
        let NathansonOutcome::Failed(f) = nathanson_decompose(&a, 1, 2, floor()) else {
            panic!("expected failure");
        };
        assert_eq!(f.reason, NathansonFailureReason::TooFewElements { have: 1, need: 2 });
    }

    #[test]
    fn dense_random_sets_meet_union_bound() {
        let g = Arc::new(build_group("zn:200").unwrap());
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = Subset::from_elements(g.clone(), sample(&mut rng, 200, 180).into_iter()).0;
            a.insert(0);
            let delta = ratio(a.len(), 200);
            let NathansonOutcome::Decomposed(cert) = nathanson_decompose(&a, 1, 4, floor()) else {
                panic!("seed {seed} failed");
            };
            // With the identity in A the greedy picks it first, so only m translates cut B.
            assert_eq!(cert.parts[0][0], 0);
            assert!(cert.density() >= Rational::from_integer(1) - Rational::from_integer(4) * (Rational::from_integer(1) - delta));
            verify_nathanson(&a, &cert.parts, &cert.b).unwrap();
        }
    }

    #[test]
    fn two_levels_compose() {
        let g = Arc::new(build_group("dihedral:30").unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Subset::from_elements(g.clone(), sample(&mut rng, 60, 54).into_iter()).0;
        let NathansonOutcome::Decomposed(cert) = nathanson_decompose(&a, 2, 2, floor()) else {
            panic!("expected success");
        };
        assert_eq!(cert.parts.len(), 2);
        assert!(cert.b.is_subset(&a));
        verify_nathanson(&a, &cert.parts, &cert.b).unwrap();
    }

    #[test]
    fn extra_element_breaks_containment() {
        let a = Subset::from_predicate(IntWindow::new(0, 100).unwrap(), |x| x % 2 == 0);
        let NathansonOutcome::Decomposed(cert) = nathanson_decompose(&a, 1, 3, floor()) else {
            panic!("expected success");
        };
        let mut parts = cert.parts.clone();
        parts[0].push(1);
        let v = verify_nathanson(&a, &parts, &cert.b).unwrap_err();
        assert_eq!(v.factors, vec![1]);
        assert_eq!(v.value, 1 + v.b);
        // Deleting an element of B keeps the claim true.
        let mut smaller = cert.b.clone();
        smaller.remove(cert.b.min().unwrap());
        assert!(verify_nathanson(&a, &cert.parts, &smaller).is_ok());
    }
}
