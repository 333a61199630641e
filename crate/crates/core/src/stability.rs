//! Ladder (order-property) and equation indices of finite binary relations.
//!
//! A ladder of length `k` is `a₁…a_k`, `b₁…b_k` with `R(a_i, b_j) ⟺ i ≤ j`.
//! An equation pattern of length `k` has `R(a_i, b_j)` for all `i < j` and
//! `¬R(a_i, b_i)` for all `i`; nothing is required when `i > j`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::sets::GroupSubset;

pub const DEFAULT_EXACT_BOUND: usize = 40;
const NODE_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("relation domains must be nonempty")]
    EmptyDomain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRelation {
    left: usize,
    right: usize,
    rows: Vec<FixedBitSet>,
    cols: Vec<FixedBitSet>,
}

impl FiniteRelation {
    pub fn from_fn(left: usize, right: usize, holds: impl Fn(usize, usize) -> bool) -> Result<Self, RelationError> {
        if left == 0 || right == 0 {
            return Err(RelationError::EmptyDomain);
        }
        let mut rows = vec![FixedBitSet::with_capacity(right); left];
        let mut cols = vec![FixedBitSet::with_capacity(left); right];
        for (a, row) in rows.iter_mut().enumerate() {
            for (b, col) in cols.iter_mut().enumerate() {
                if holds(a, b) {
                    row.insert(b);
                    col.insert(a);
                }
            }
        }
        Ok(Self { left, right, rows, cols })
    }

    /// `R(x, y) ⟺ y·x ∈ A` over `G × G`.
    pub fn from_set(set: &GroupSubset) -> Self {
        let g = set.ambient();
        Self::from_fn(g.order(), g.order(), |x, y| set.contains(g.mul(y, x))).expect("groups are nonempty")
    }

    /// Header `dims <l> <r>`, then `l` rows of `r` zeros and ones (spaces optional).
    pub fn parse(text: &str, path: &str) -> Result<Self, RelationError> {
        let err = |line: usize, message: String| RelationError::Parse {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| err(1, "missing `dims` header".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let (left, right) = match dims.as_slice() {
            ["dims", l, r] => match (l.parse::<usize>(), r.parse::<usize>()) {
                (Ok(l), Ok(r)) => (l, r),
                _ => return Err(err(hline, format!("bad dimensions `{header}`"))),
            },
            _ => return Err(err(hline, format!("expected `dims <l> <r>`, got `{header}`"))),
        };
        let mut table = Vec::with_capacity(left);
        let mut last = hline;
        for (line, row) in lines {
            last = line;
            let bits: Vec<bool> = row
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(err(line, format!("unexpected `{c}`"))),
                })
                .collect::<Result<_, _>>()?;
            if bits.len() != right {
                return Err(err(line, format!("expected {right} entries, found {}", bits.len())));
            }
            if table.len() == left {
                return Err(err(line, format!("more than {left} rows")));
            }
            table.push(bits);
        }
        if table.len() != left {
            return Err(err(last, format!("expected {left} rows, found {}", table.len())));
        }
        Self::from_fn(left, right, |a, b| table[a][b])
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dims {} {}\n", self.left, self.right);
        for row in &self.rows {
            out.extend((0..self.right).map(|b| if row.contains(b) { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn holds(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn transpose(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Restriction to the given left and right elements, reindexed in order.
    pub fn restrict(&self, left: &[usize], right: &[usize]) -> Result<Self, RelationError> {
        Self::from_fn(left.len(), right.len(), |a, b| self.holds(left[a], right[b]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Ladder,
    Equation,
}

impl IndexKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            IndexKind::Ladder => "ladder",
            IndexKind::Equation => "equation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexReport {
    pub kind: IndexKind,
    pub value: usize,
    /// False when `value` is only a lower bound.
    pub exact: bool,
    pub witness_a: Vec<usize>,
    pub witness_b: Vec<usize>,
}

pub fn verify_ladder(r: &FiniteRelation, a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && a.iter().all(|&x| x < r.left)
        && b.iter().all(|&y| y < r.right)
        && (0..a.len()).all(|i| (0..b.len()).all(|j| r.holds(a[i], b[j]) == (i <= j)))
}

pub fn verify_equation(r: &FiniteRelation, a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && a.iter().all(|&x| x < r.left)
        && b.iter().all(|&y| y < r.right)
        && (0..a.len()).all(|i| !r.holds(a[i], b[i]) && (i + 1..b.len()).all(|j| r.holds(a[i], b[j])))
}

/// Search state: the left and right elements still able to extend the pattern.
#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    ca: FixedBitSet,
    cb: FixedBitSet,
}

struct Search<'a> {
    r: &'a FiniteRelation,
    kind: IndexKind,
    /// Longest prefix length at which each state was already expanded.
    seen: HashMap<State, usize>,
    nodes: u64,
    best: (Vec<usize>, Vec<usize>),
    exhausted: bool,
}

impl Search<'_> {
    /// Pairs `(a, b)` that extend the pattern, and the successor state.
    fn moves(&self, s: &State) -> Vec<(usize, usize, State)> {
        let r = self.r;
        let mut out = Vec::new();
        for b in s.cb.ones() {
            let candidates: Vec<usize> = match self.kind {
                IndexKind::Ladder => s.ca.ones().filter(|&a| r.holds(a, b)).collect(),
                IndexKind::Equation => (0..r.left).filter(|&a| !r.holds(a, b)).collect(),
            };
            for a in candidates {
                let mut cb = s.cb.clone();
                cb.intersect_with(&r.rows[a]);
                cb.set(b, false);
                let ca = match self.kind {
                    IndexKind::Ladder => {
                        let mut ca = s.ca.clone();
                        ca.difference_with(&r.cols[b]);
                        ca
                    }
                    IndexKind::Equation => s.ca.clone(),
                };
                out.push((a, b, State { ca, cb }));
            }
        }
        out
    }

    fn bound(&self, s: &State) -> usize {
        match self.kind {
            IndexKind::Ladder => s.ca.count_ones(..).min(s.cb.count_ones(..)),
            IndexKind::Equation => s.cb.count_ones(..),
        }
    }

    fn rec(&mut self, s: &State, a: &mut Vec<usize>, b: &mut Vec<usize>) {
        if a.len() > self.best.0.len() {
            self.best = (a.clone(), b.clone());
        }
        if self.exhausted || a.len() + self.bound(s) <= self.best.0.len() {
            return;
        }
        match self.seen.get(s) {
            Some(&k) if k >= a.len() => return,
            _ => {
                self.seen.insert(s.clone(), a.len());
            }
        }
        for (x, y, next) in self.moves(s) {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                self.exhausted = true;
                return;
            }
            a.push(x);
            b.push(y);
            self.rec(&next, a, b);
            a.pop();
            b.pop();
        }
    }
}

fn initial(r: &FiniteRelation) -> State {
    let mut ca = FixedBitSet::with_capacity(r.left);
    ca.insert_range(..);
    let mut cb = FixedBitSet::with_capacity(r.right);
    cb.insert_range(..);
    State { ca, cb }
}

fn index(r: &FiniteRelation, kind: IndexKind, exact_bound: usize) -> IndexReport {
    let mut search = Search {
        r,
        kind,
        seen: HashMap::new(),
        nodes: 0,
        best: (Vec::new(), Vec::new()),
        exhausted: false,
    };
    let exact = r.left.max(r.right) <= exact_bound;
    if exact {
        search.rec(&initial(r), &mut Vec::new(), &mut Vec::new());
    } else {
        // Greedy: keep the move leaving the most room, earliest on ties.
        let mut s = initial(r);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        loop {
            let best = search
                .moves(&s)
                .into_iter()
                .enumerate()
                .max_by_key(|(i, (_, _, next))| (search.bound(next), std::cmp::Reverse(*i)));
            let Some((_, (x, y, next))) = best else { break };
            a.push(x);
            b.push(y);
            s = next;
        }
        search.best = (a, b);
    }
    let (witness_a, witness_b) = search.best;
    IndexReport {
        kind,
        value: witness_a.len(),
        exact: exact && !search.exhausted,
        witness_a,
        witness_b,
    }
}

/// Longest ladder. Exact by backtracking when both domains have at most
/// `exact_bound` elements, otherwise a flagged greedy lower bound.
pub fn ladder_index(r: &FiniteRelation, exact_bound: usize) -> IndexReport {
    index(r, IndexKind::Ladder, exact_bound)
}

/// Longest equation pattern, with the same exactness rule as [`ladder_index`].
pub fn equation_index(r: &FiniteRelation, exact_bound: usize) -> IndexReport {
    index(r, IndexKind::Equation, exact_bound)
}

/// Ladder index of `R(x, y) ⟺ y·x ∈ A`.
pub fn set_stability_index(set: &GroupSubset, exact_bound: usize) -> IndexReport {
    ladder_index(&FiniteRelation::from_set(set), exact_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::sets::Subset;
    use std::sync::Arc;

    /// Tries every pair of injective sequences of length `k`.
    fn brute_has(r: &FiniteRelation, k: usize, check: fn(&FiniteRelation, &[usize], &[usize]) -> bool) -> bool {
        fn seqs(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for s in seqs(n, k - 1) {
                for x in 0..n {
                    if !s.contains(&x) {
                        let mut t = s.clone();
                        t.push(x);
                        out.push(t);
                    }
                }
            }
            out
        }
        let left = seqs(r.left(), k);
        let right = seqs(r.right(), k);
        left.iter().any(|a| right.iter().any(|b| check(r, a, b)))
    }

    #[test]
    fn ladder_examples() {
        for n in 1..=8 {
            let le = FiniteRelation::from_fn(n, n, |a, b| a <= b).unwrap();
            let rep = ladder_index(&le, 40);
            assert_eq!(rep.value, n);
            assert!(rep.exact);
            assert!(verify_ladder(&le, &rep.witness_a, &rep.witness_b));
        }
        let eq = FiniteRelation::from_fn(8, 8, |a, b| a == b).unwrap();
        assert_eq!(ladder_index(&eq, 40).value, 1);
        assert!(!brute_has(&eq, 2, verify_ladder));
        let complete = FiniteRelation::from_fn(5, 5, |_, _| true).unwrap();
        assert_eq!(ladder_index(&complete, 40).value, 1);
        let empty = FiniteRelation::from_fn(5, 5, |_, _| false).unwrap();
        assert_eq!(ladder_index(&empty, 40).value, 0);
    }

    #[test]
    fn equation_examples() {
        for n in [3, 8] {
            let eq = FiniteRelation::from_fn(n, n, |a, b| a == b).unwrap();
            let rep = equation_index(&eq, 40);
            assert_eq!(rep.value, 2);
            assert!(verify_equation(&eq, &rep.witness_a, &rep.witness_b));
        }
        let eq = FiniteRelation::from_fn(4, 4, |a, b| a == b).unwrap();
        assert!(!brute_has(&eq, 3, verify_equation));
        let empty = FiniteRelation::from_fn(4, 4, |_, _| false).unwrap();
        assert_eq!(equation_index(&empty, 40).value, 1);
        let lt = FiniteRelation::from_fn(8, 8, |a, b| a < b).unwrap();
        assert_eq!(equation_index(&lt, 40).value, 8);
    }

    #[test]
    fn matches_brute_force_on_small_relations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let table: Vec<Vec<bool>> = (0..5).map(|_| (0..5).map(|_| rng.random_bool(0.5)).collect()).collect();
            let r = FiniteRelation::from_fn(5, 5, |a, b| table[a][b]).unwrap();
            let ladder = ladder_index(&r, 40).value;
            assert!(ladder == 0 || brute_has(&r, ladder, verify_ladder));
            assert!(!brute_has(&r, ladder + 1, verify_ladder));
            let eq = equation_index(&r, 40).value;
            assert!(eq == 0 || brute_has(&r, eq, verify_equation));
            assert!(!brute_has(&r, eq + 1, verify_equation));
        }
    }

    #[test]
    fn subgroups_have_small_ladders() {
        for (spec, pred) in [("zn:12", 4usize), ("zn:12", 3), ("zn:16", 2)] {
            let g = Arc::new(build_group(spec).unwrap());
            let h = Subset::from_predicate(g, |x| x % pred == 0);
            assert!(set_stability_index(&h, 40).value <= 2);
        }
        let g = Arc::new(build_group("sym:3").unwrap());
        let h = Subset::from_elements(g.clone(), g.closure(&[3])).0;
        let rep = set_stability_index(&h, 40);
        assert!(rep.exact && rep.value <= 2);
        assert_eq!(set_stability_index(&Subset::empty(g), 40).value, 0);
    }

    #[test]
    fn greedy_is_flagged() {
        let le = FiniteRelation::from_fn(50, 50, |a, b| a <= b).unwrap();
        let rep = ladder_index(&le, 40);
        assert!(!rep.exact);
        assert!(verify_ladder(&le, &rep.witness_a, &rep.witness_b));
    }

    #[test]
    fn relation_text_round_trip() {
        let r = FiniteRelation::parse("dims 2 3\n1 0 1\n011\n", "r.txt").unwrap();
        assert!(r.holds(0, 0) && !r.holds(0, 1) && r.holds(1, 2));
        assert_eq!(FiniteRelation::parse(&r.to_text(), "x").unwrap(), r);
        let e = FiniteRelation::parse("dims 2 2\n10\n1\n", "r.txt").unwrap_err();
        assert_eq!(e.to_string(), "r.txt:3: expected 2 entries, found 1");
        assert_eq!(r.transpose().transpose(), r);
    }
}
