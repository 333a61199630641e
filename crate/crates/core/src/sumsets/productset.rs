use fixedbitset::FixedBitSet;

use crate::sets::{Ambient, Subset};

use super::{argmax_by_score, pullback, SumsetError};

/// Longest staircase the search will build before giving up.
pub const RAMSEY_CAP: usize = 256;
const BICLIQUE_NODE_BUDGET: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductsetCertificate<A: Ambient> {
    pub b: Vec<A::Elem>,
    pub c: Vec<A::Elem>,
    /// For each `b`, a pair `(a, a′)` from `A` with `b = a·a′⁻¹`, when `B` was
    /// constrained to `A·A⁻¹`.
    pub b_witnesses: Option<Vec<(A::Elem, A::Elem)>>,
    pub staircase_b: Vec<A::Elem>,
    pub staircase_c: Vec<A::Elem>,
    _ambient: std::marker::PhantomData<A>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductsetFailure<E> {
    pub staircase_b: Vec<E>,
    pub staircase_c: Vec<E>,
    /// Largest square grid found inside the staircase.
    pub best_grid: usize,
    /// The grid search hit its node budget, so `best_grid` may be low.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProductsetOutcome<A: Ambient> {
    Found(ProductsetCertificate<A>),
    Failed(ProductsetFailure<A::Elem>),
}

/// For each element of `A·A⁻¹` (clipped to the ambient), the least pair
/// `(a, a′)` in element order with `a·a′⁻¹` equal to it.
pub fn difference_witnesses<A: Ambient>(set: &Subset<A>) -> (Subset<A>, Vec<(A::Elem, A::Elem)>) {
    let ambient = set.ambient();
    let mut pool = Subset::empty(ambient.clone());
    let mut witness = std::collections::BTreeMap::new();
    for a in set.iter() {
        for a2 in set.iter() {
            let b = ambient.op(a, ambient.inverse(a2));
            if pool.insert(b) {
                witness.entry(b).or_insert((a, a2));
            }
        }
    }
    let pairs = pool.iter().map(|b| witness[&b]).collect();
    (pool, pairs)
}

/// Searches for `B` (`|B| = k`) and `C ⊆ A` (`|C| = k`) with `B·C ⊆ A`.
///
/// Phase one builds a staircase `b₁, c₁, b₂, c₂, …` with `b_i·c_j ∈ A`
/// whenever `i ≤ j`. Each `b` maximizes the number of still-compatible
/// `c` candidates; each `c` maximizes the number of pool elements `b` with
/// `b·c ∈ A`. Once the staircase reaches length `2k − 1`, `b₁…b_k` and
/// `c_k…c_{2k−1}` already form a grid. Otherwise phase two searches the
/// staircase exhaustively for a `k × k` grid.
pub fn productset_search<A: Ambient>(
    set: &Subset<A>,
    k: usize,
    constrain_b: bool,
) -> Result<ProductsetOutcome<A>, SumsetError> {
    if k == 0 {
        return Err(SumsetError::InvalidArgument("k must be at least 1".into()));
    }
    let target = 2 * k - 1;
    if target > RAMSEY_CAP {
        return Err(SumsetError::RamseyBudgetExceeded {
            k,
            needed: target,
            cap: RAMSEY_CAP,
        });
    }
    let ambient = set.ambient().clone();
    let (mut pool, witnesses) = if constrain_b {
        let (pool, pairs) = difference_witnesses(set);
        (pool, Some(pairs))
    } else {
        (Subset::full(ambient.clone()), None)
    };
    let full_pool = pool.clone();
    let mut open_c = set.clone();
    let mut stair_b = Vec::new();
    let mut stair_c = Vec::new();
    while stair_b.len() < target {
        let candidates: Vec<A::Elem> = pool.iter().collect();
        let Some((b, score)) = argmax_by_score(&candidates, |b| open_c.intersection_len(&pullback(set, b))) else {
            break;
        };
        if score == 0 {
            break;
        }
        let compatible = open_c.intersection(&pullback(set, b));
        let cs: Vec<A::Elem> = compatible.iter().collect();
        let (c, _) = argmax_by_score(&cs, |c| {
            pool.intersection_len(&set.right_translate(ambient.inverse(c)).set)
        })
        .expect("compatible set is nonempty");
        pool.remove(b);
        stair_b.push(b);
        stair_c.push(c);
        open_c = compatible;
        open_c.remove(c);
    }

    let build = |bi: &[usize], cj: &[usize]| {
        let b: Vec<A::Elem> = bi.iter().map(|&i| stair_b[i]).collect();
        let c: Vec<A::Elem> = cj.iter().map(|&j| stair_c[j]).collect();
        let b_witnesses = witnesses.as_ref().map(|pairs| {
            b.iter()
                .map(|&x| {
                    let rank = full_pool.iter().position(|y| y == x).expect("b is in the pool");
                    pairs[rank]
                })
                .collect()
        });
        ProductsetCertificate {
            b,
            c,
            b_witnesses,
            staircase_b: stair_b.clone(),
            staircase_c: stair_c.clone(),
            _ambient: std::marker::PhantomData,
        }
    };

    if stair_b.len() >= target {
        let bi: Vec<usize> = (0..k).collect();
        let cj: Vec<usize> = (k - 1..target).collect();
        return Ok(ProductsetOutcome::Found(build(&bi, &cj)));
    }

    let compat: Vec<Vec<bool>> = stair_b
        .iter()
        .map(|&b| stair_c.iter().map(|&c| set.contains(ambient.op(b, c))).collect())
        .collect();
    let grid = max_biclique(&compat, k, BICLIQUE_NODE_BUDGET);
    match grid {
        Ok(Some((bi, cj))) if bi.len() >= k => {
            Ok(ProductsetOutcome::Found(build(&bi[..k], &cj[..k])))
        }
        other => {
            let (best_grid, budget_exhausted) = match other {
                Ok(Some((bi, _))) => (bi.len(), false),
                Ok(None) => (0, false),
                Err(_) => (0, true),
            };
            Ok(ProductsetOutcome::Failed(ProductsetFailure {
                staircase_b: stair_b,
                staircase_c: stair_c,
                best_grid,
                budget_exhausted,
            }))
        }
    }
}

/// Largest balanced biclique (up to side `cap`) in a bipartite compatibility
/// matrix, as sorted row and column index lists of equal length. Returns the
/// first one found at the maximal size in lexicographic order of rows.
pub fn max_biclique(
    compat: &[Vec<bool>],
    cap: usize,
    node_budget: u64,
) -> Result<Option<(Vec<usize>, Vec<usize>)>, SumsetError> {
    let rows = compat.len();
    let cols = compat.first().map_or(0, Vec::len);
    let neighbours: Vec<FixedBitSet> = compat
        .iter()
        .map(|row| {
            let mut bits = FixedBitSet::with_capacity(cols);
            for (j, &ok) in row.iter().enumerate() {
                bits.set(j, ok);
            }
            bits
        })
        .collect();

    struct Search<'a> {
        nbrs: &'a [FixedBitSet],
        cap: usize,
        nodes: u64,
        budget: u64,
        best: Option<(Vec<usize>, Vec<usize>)>,
    }

    impl Search<'_> {
        fn best_len(&self) -> usize {
            self.best.as_ref().map_or(0, |b| b.0.len())
        }

        fn rec(&mut self, chosen: &mut Vec<usize>, common: &FixedBitSet, next: usize) -> Result<(), SumsetError> {
            let side = chosen.len().min(common.count_ones(..));
            if side > self.best_len() {
                let cols: Vec<usize> = common.ones().take(side).collect();
                self.best = Some((chosen[..side].to_vec(), cols));
            }
            if self.best_len() >= self.cap {
                return Ok(());
            }
            let remaining = self.nbrs.len() - next;
            if (chosen.len() + remaining).min(common.count_ones(..)) <= self.best_len() {
                return Ok(());
            }
            for i in next..self.nbrs.len() {
                let mut narrowed = common.clone();
                narrowed.intersect_with(&self.nbrs[i]);
                if narrowed.count_ones(..) <= self.best_len() {
                    continue;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(SumsetError::NodeBudget(self.budget));
                }
                chosen.push(i);
                self.rec(chosen, &narrowed, i + 1)?;
                chosen.pop();
                if self.best_len() >= self.cap {
                    return Ok(());
                }
            }
            Ok(())
        }
    }

    if rows == 0 || cols == 0 {
        return Ok(None);
    }
    let mut all = FixedBitSet::with_capacity(cols);
    all.insert_range(..);
    let mut search = Search {
        nbrs: &neighbours,
        cap,
        nodes: 0,
        budget: node_budget,
        best: None,
    };
    search.rec(&mut Vec::new(), &all, 0)?;
    Ok(search.best)
}

/// Checks `B·C ⊆ A`; returns the least offending pair.
pub fn verify_productset<A: Ambient>(set: &Subset<A>, b: &[A::Elem], c: &[A::Elem]) -> Result<(), (A::Elem, A::Elem)> {
    let ambient = set.ambient();
    for &x in b {
        for &y in c {
            if !set.contains(ambient.op(x, y)) {
                return Err((x, y));
            }
        }
    }
    Ok(())
}
