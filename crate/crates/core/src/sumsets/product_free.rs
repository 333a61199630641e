use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::groups::GroupTable;
use crate::sets::GroupSubset;

/// Largest group order searched exactly by default.
pub const DEFAULT_PF_EXACT_BOUND: usize = 24;
const HEURISTIC_RESTARTS: usize = 48;
const SWAP_ROUNDS: usize = 4;

/// Least `(b, c)` in element order with `b, c, b·c ∈ A`, if any.
pub fn product_free_check(set: &GroupSubset) -> Option<(usize, usize, usize)> {
    let g = set.ambient();
    for b in set.iter() {
        for c in set.iter() {
            let v = g.mul(b, c);
            if set.contains(v) {
                return Some((b, c, v));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxProductFree {
    pub size: usize,
    pub witness: Vec<usize>,
    /// True when `size` is the proven maximum; false for a heuristic lower bound.
    pub exact: bool,
}

/// Incremental state: a product-free set and the elements that could still
/// join it.
#[derive(Clone)]
struct Builder<'a> {
    g: &'a GroupTable,
    roots: &'a [Vec<usize>],
    members: Vec<usize>,
    /// Elements whose addition would create a solution of `x·y = z`.
    blocked: FixedBitSet,
}

impl<'a> Builder<'a> {
    fn new(g: &'a GroupTable, roots: &'a [Vec<usize>]) -> Self {
        let mut blocked = FixedBitSet::with_capacity(g.order());
        blocked.insert(g.identity());
        Self {
            g,
            roots,
            members: Vec::new(),
            blocked,
        }
    }

    fn allowed(&self, x: usize) -> bool {
        !self.blocked.contains(x)
    }

    fn add(&mut self, x: usize) {
        let g = self.g;
        self.members.push(x);
        let xi = g.inv(x);
        self.blocked.insert(x);
        self.blocked.insert(g.mul(x, x));
        for &r in &self.roots[x] {
            self.blocked.insert(r);
        }
        for &s in &self.members {
            let si = g.inv(s);
            for v in [
                g.mul(x, s),
                g.mul(s, x),
                g.mul(x, si),
                g.mul(s, xi),
                g.mul(xi, s),
                g.mul(si, x),
            ] {
                self.blocked.insert(v);
            }
        }
    }

    fn rebuild(g: &'a GroupTable, roots: &'a [Vec<usize>], members: &[usize]) -> Self {
        let mut b = Self::new(g, roots);
        for &x in members {
            b.add(x);
        }
        b
    }
}

fn square_roots(g: &GroupTable) -> Vec<Vec<usize>> {
    let mut roots = vec![Vec::new(); g.order()];
    for y in 0..g.order() {
        roots[g.mul(y, y)].push(y);
    }
    roots
}

/// Maximum product-free subset. Exact branch and bound when the order is at
/// most `exact_bound`; otherwise seeded greedy restarts with 1-for-2 swaps,
/// returning a lower bound.
pub fn max_product_free(g: &Arc<GroupTable>, exact_bound: usize, seed: u64) -> MaxProductFree {
    let roots = square_roots(g);
    if g.order() <= exact_bound {
        exact(g, &roots)
    } else {
        heuristic(g, &roots, seed)
    }
}

fn exact(g: &GroupTable, roots: &[Vec<usize>]) -> MaxProductFree {
    fn rec(state: &Builder, next: usize, best: &mut Vec<usize>) {
        if state.members.len() > best.len() {
            *best = state.members.clone();
        }
        let open: Vec<usize> = (next..state.g.order()).filter(|&x| state.allowed(x)).collect();
        if state.members.len() + open.len() <= best.len() {
            return;
        }
        for (i, &x) in open.iter().enumerate() {
            if state.members.len() + open.len() - i <= best.len() {
                return;
            }
            let mut child = state.clone();
            child.add(x);
            rec(&child, x + 1, best);
        }
    }
    let mut best = Vec::new();
    rec(&Builder::new(g, roots), 0, &mut best);
    best.sort();
    MaxProductFree {
        size: best.len(),
        witness: best,
        exact: true,
    }
}

fn heuristic(g: &GroupTable, roots: &[Vec<usize>], seed: u64) -> MaxProductFree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..HEURISTIC_RESTARTS {
        let mut order: Vec<usize> = (0..g.order()).collect();
        order.shuffle(&mut rng);
        let mut state = Builder::new(g, roots);
        for &x in &order {
            if state.allowed(x) {
                state.add(x);
            }
        }
        for _ in 0..SWAP_ROUNDS {
            let mut improved = false;
            for i in 0..state.members.len() {
                let rest: Vec<usize> = state
                    .members
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &x)| x)
                    .collect();
                let mut trial = Builder::rebuild(g, roots, &rest);
                for &x in &order {
                    if x != state.members[i] && trial.allowed(x) {
                        trial.add(x);
                    }
                }
                if trial.members.len() > state.members.len() {
                    state = trial;
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        if state.members.len() > best.len() {
            best = state.members.clone();
        }
    }
    best.sort();
    MaxProductFree {
        size: best.len(),
        witness: best,
        exact: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::sets::Subset;

    fn group(spec: &str) -> Arc<GroupTable> {
        Arc::new(build_group(spec).unwrap())
    }

    /// Brute force over all subsets.
    fn brute_max(g: &GroupTable) -> usize {
        let n = g.order();
        (0u32..1 << n)
            .filter(|&mask| {
                (0..n).all(|b| {
                    mask >> b & 1 == 0 || (0..n).all(|c| mask >> c & 1 == 0 || mask >> g.mul(b, c) & 1 == 0)
                })
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn check_examples() {
        let z5 = group("zn:5");
        let (a, _) = Subset::from_elements(z5, [1, 2]);
        assert_eq!(product_free_check(&a), Some((1, 1, 2)));
        let z9 = group("zn:9");
        let (mid, _) = Subset::from_elements(z9.clone(), [3, 4, 5]);
        assert_eq!(product_free_check(&mid), None);
        let sub = Subset::from_predicate(z9, |x| x % 3 == 0);
        assert!(product_free_check(&sub).is_some());
    }

    #[test]
    fn exact_small_groups() {
        assert_eq!(max_product_free(&group("zn:2"), 24, 0).witness, vec![1]);
        let z10 = max_product_free(&group("zn:10"), 24, 0);
        assert!(z10.exact);
        assert_eq!(z10.size, 5);
        for spec in ["zn:7", "zn:10", "sym:3", "dihedral:4", "zn:12"] {
            let g = group(spec);
            let r = max_product_free(&g, 24, 0);
            assert_eq!(r.size, brute_max(&g), "{spec}");
            let (w, _) = Subset::from_elements(g.clone(), r.witness.iter().copied());
            assert_eq!(product_free_check(&w), None);
        }
    }

    #[test]
    fn heuristic_witness_is_product_free() {
        let g = group("alt:5");
        let r = max_product_free(&g, 24, 0);
        assert!(!r.exact);
        assert!(r.size >= 10, "{}", r.size);
        let (w, _) = Subset::from_elements(g, r.witness.iter().copied());
        assert_eq!(product_free_check(&w), None);
    }
}
