//! Finite groups as validated multiplication tables.
//!
//! Built-in families are `zn:<n>`, `dihedral:<n>`, `sym:<n>`, `alt:<n>` and
//! `psl2:<q>`; arbitrary groups are read from a Cayley CSV. Every built-in
//! family puts the identity at index 0 so CSV export round-trips exactly.
//!
//! `PSL₂(q)` is built from `SL₂(𝔽_q)` modulo `±I`. A matrix is canonicalized
//! by negating it when the negation has the smaller field index at the first
//! nonzero coordinate (in `a, b, c, d` order). Elements are indexed by sorted
//! canonical form, identity first. For prime powers the field is
//! `𝔽_p[x]/(f)` with the Conway polynomial
//!
//! | q | f(x)          |
//! |---|---------------|
//! | 4 | x² + x + 1    |
//! | 8 | x³ + x + 1    |
//! | 9 | x² + 2x + 2   |

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest table kept in memory (sym:7).
pub const MAX_ORDER: usize = 5040;
/// Exhaustive associativity checks stop here; larger tables are sampled.
pub const EXHAUSTIVE_ASSOC_LIMIT: usize = 512;
const ASSOC_SAMPLES: usize = 100_000;
const ASSOC_SEED: u64 = 0x5eed_a550c;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("unknown group spec `{0}`")]
    UnknownSpec(String),
    #[error("group of order {order} exceeds the in-memory limit of {limit}")]
    TooLarge { order: usize, limit: usize },
    #[error("{path}:{line}: {message}")]
    Csv { path: String, line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// A finite group as a validated multiplication table.
#[derive(Clone)]
pub struct GroupTable {
    name: String,
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupTable({}, order {})", self.name, self.order)
    }
}

impl PartialEq for GroupTable {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.identity == other.identity && self.mul == other.mul
    }
}

impl Eq for GroupTable {}

impl GroupTable {
    /// Validates a row-major `n × n` table: Latin square, two-sided identity,
    /// inverses, associativity.
    pub fn from_table(name: impl Into<String>, order: usize, mul: Vec<u32>) -> Result<Self, GroupError> {
        let bad = |m: String| Err(GroupError::InvalidTable(m));
        if order == 0 {
            return bad("empty table".into());
        }
        if order > MAX_ORDER {
            return Err(GroupError::TooLarge { order, limit: MAX_ORDER });
        }
        if mul.len() != order * order {
            return bad(format!("expected {} entries, found {}", order * order, mul.len()));
        }
        if let Some(&x) = mul.iter().find(|&&x| x as usize >= order) {
            return bad(format!("entry {x} out of range"));
        }
        let mut seen = vec![0u32; order];
        for r in 0..order {
            for c in 0..order {
                let v = mul[r * order + c] as usize;
                if seen[v] == 2 * r as u32 + 1 {
                    return bad(format!("row {r} repeats {v}"));
                }
                seen[v] = 2 * r as u32 + 1;
            }
        }
        seen.iter_mut().for_each(|s| *s = u32::MAX);
        for c in 0..order {
            for r in 0..order {
                let v = mul[r * order + c] as usize;
                if seen[v] == c as u32 {
                    return bad(format!("column {c} repeats {v}"));
                }
                seen[v] = c as u32;
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul[e * order + x] as usize == x && mul[x * order + e] as usize == x))
            .ok_or_else(|| GroupError::InvalidTable("no two-sided identity".into()))?;
        let mut inv = vec![0u32; order];
        for a in 0..order {
            // Latin rows guarantee exactly one right inverse.
            let b = (0..order).find(|&b| mul[a * order + b] as usize == identity).unwrap();
            if mul[b * order + a] as usize != identity {
                return bad(format!("element {a} has no two-sided inverse"));
            }
            inv[a] = b as u32;
        }
        let table = Self {
            name: name.into(),
            order,
            mul,
            inv,
            identity,
        };
        table.check_associativity()?;
        Ok(table)
    }

    fn check_associativity(&self) -> Result<(), GroupError> {
        let n = self.order;
        let fail = |a: usize, b: usize, c: usize| {
            Err(GroupError::InvalidTable(format!("associativity fails for ({a}, {b}, {c})")))
        };
        if n <= EXHAUSTIVE_ASSOC_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    for c in 0..n {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return fail(a, b, c);
                        }
                    }
                }
            }
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(ASSOC_SEED);
        for _ in 0..ASSOC_SAMPLES {
            let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return fail(a, b, c);
            }
        }
        // Light's test: middle-associativity on a generating set implies it everywhere.
        for g in self.generating_set() {
            for x in 0..n {
                let xg = self.mul(x, g);
                for y in 0..n {
                    if self.mul(xg, y) != self.mul(x, self.mul(g, y)) {
                        return fail(x, g, y);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Least common multiple of element orders.
    pub fn exponent(&self) -> usize {
        (0..self.order).fold(1, |acc, a| num_integer::lcm(acc, self.element_order(a)))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// The subgroup generated by `gens` (sorted element indices).
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        inside[self.identity] = true;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(h) = queue.pop_front() {
            for &g in gens {
                let x = self.mul(h, g);
                if !inside[x] {
                    inside[x] = true;
                    queue.push_back(x);
                }
            }
        }
        (0..self.order).filter(|&x| inside[x]).collect()
    }

    /// Greedy generating set in element order.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut inside = vec![false; self.order];
        inside[self.identity] = true;
        for x in 0..self.order {
            if !inside[x] {
                gens.push(x);
                for h in self.closure(&gens) {
                    inside[h] = true;
                }
            }
        }
        gens
    }

    /// The derived subgroup [G, G].
    pub fn commutator_subgroup(&self) -> Vec<usize> {
        let comms: BTreeSet<usize> = (0..self.order)
            .flat_map(|a| (0..self.order).map(move |b| (a, b)))
            .map(|(a, b)| self.commutator(a, b))
            .collect();
        self.closure(&comms.into_iter().collect::<Vec<_>>())
    }

    /// Cayley CSV: `order,<n>` then `n` rows of 0-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = format!("order,{}\n", self.order);
        for r in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|c| self.mul(r, c).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, path: &str) -> Result<Self, GroupError> {
        let err = |line: usize, message: String| GroupError::Csv {
            path: path.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let order: usize = header
            .trim()
            .strip_prefix("order,")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| err(hline + 1, "expected `order,<n>`".into()))?;
        if order > MAX_ORDER {
            return Err(GroupError::TooLarge { order, limit: MAX_ORDER });
        }
        let mut mul = Vec::with_capacity(order * order);
        let mut rows = 0;
        for (lineno, line) in lines {
            if rows == order {
                return Err(err(lineno + 1, "more rows than the declared order".into()));
            }
            let before = mul.len();
            for tok in line.split(',') {
                let v: u32 = tok
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno + 1, format!("not an index: `{}`", tok.trim())))?;
                mul.push(v);
            }
            if mul.len() - before != order {
                return Err(err(lineno + 1, format!("expected {order} entries, found {}", mul.len() - before)));
            }
            rows += 1;
        }
        if rows != order {
            return Err(err(hline + 1, format!("declared order {order} but found {rows} rows")));
        }
        let g = Self::from_table(format!("cayley:{path}"), order, mul)?;
        if g.identity != 0 {
            return Err(GroupError::InvalidTable(format!("identity is index {}, must be 0", g.identity)));
        }
        Ok(g)
    }
}

/// Builds a group from a spec string such as `zn:6`, `psl2:7` or `cayley:table.csv`.
pub fn build_group(spec: &str) -> Result<GroupTable, GroupError> {
    let unknown = || GroupError::UnknownSpec(spec.to_string());
    let (family, arg) = spec.split_once(':').ok_or_else(unknown)?;
    if family == "cayley" {
        let text = std::fs::read_to_string(Path::new(arg)).map_err(|e| GroupError::Io {
            path: arg.to_string(),
            message: e.to_string(),
        })?;
        return GroupTable::from_csv(&text, arg);
    }
    let n: usize = arg.parse().map_err(|_| unknown())?;
    match family {
        "zn" if n >= 1 => cyclic(n),
        "dihedral" if n >= 1 => dihedral(n),
        "sym" if (1..=8).contains(&n) => symmetric(n, false),
        "alt" if (1..=8).contains(&n) => symmetric(n, true),
        "psl2" => psl2(n).ok_or_else(unknown)?,
        _ => Err(unknown()),
    }
}

fn cyclic(n: usize) -> Result<GroupTable, GroupError> {
    check_size(n)?;
    let mul = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
    GroupTable::from_table(format!("zn:{n}"), n, mul)
}

/// Elements `r^i` at index `i` and `s·r^i` at index `n + i`.
fn dihedral(n: usize) -> Result<GroupTable, GroupError> {
    let order = 2 * n;
    check_size(order)?;
    let mut mul = Vec::with_capacity(order * order);
    for x in 0..order {
        let (sa, i) = (x / n, x % n);
        for y in 0..order {
            let (sb, j) = (y / n, y % n);
            // (s^a r^i)(s^b r^j) = s^(a+b) r^((-1)^b i + j)
            let k = if sb == 0 { (i + j) % n } else { (n - i + j) % n };
            mul.push((((sa + sb) % 2) * n + k) as u32);
        }
    }
    GroupTable::from_table(format!("dihedral:{n}"), order, mul)
}

fn check_size(order: usize) -> Result<(), GroupError> {
    if order > MAX_ORDER {
        Err(GroupError::TooLarge { order, limit: MAX_ORDER })
    } else {
        Ok(())
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic rank of a permutation of `0..n`.
fn perm_rank(p: &[usize]) -> usize {
    let n = p.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank += smaller * factorial(n - 1 - i);
    }
    rank
}

fn is_even(p: &[usize]) -> bool {
    let inversions: usize = (0..p.len()).map(|i| p[i + 1..].iter().filter(|&&x| x < p[i]).count()).sum();
    inversions % 2 == 0
}

/// Permutations in lexicographic order, composed as `(a·b)(x) = a(b(x))`.
fn symmetric(n: usize, even_only: bool) -> Result<GroupTable, GroupError> {
    let full = factorial(n);
    let order = if even_only && n >= 2 { full / 2 } else { full };
    check_size(order)?;
    let mut perms = Vec::with_capacity(order);
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        if !even_only || is_even(&p) {
            perms.push(p.clone());
        }
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    let mut index = vec![u32::MAX; full];
    for (k, q) in perms.iter().enumerate() {
        index[perm_rank(q)] = k as u32;
    }
    let mut mul = Vec::with_capacity(order * order);
    let mut comp = vec![0; n];
    for a in &perms {
        for b in &perms {
            for x in 0..n {
                comp[x] = a[b[x]];
            }
            mul.push(index[perm_rank(&comp)]);
        }
    }
    let name = if even_only { format!("alt:{n}") } else { format!("sym:{n}") };
    GroupTable::from_table(name, order, mul)
}

/// 𝔽_q with elements `0..q` encoding base-`p` coefficient vectors.
#[derive(Debug, Clone)]
pub struct FiniteField {
    q: usize,
    p: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
}

impl FiniteField {
    /// Fields of order ≤ 13; prime powers use the Conway polynomials above.
    pub fn new(q: usize) -> Option<Self> {
        // low-to-high coefficients of f(x) without the leading 1
        let (p, modulus): (usize, Vec<usize>) = match q {
            2 | 3 | 5 | 7 | 11 | 13 => (q, vec![]),
            4 => (2, vec![1, 1]),
            8 => (2, vec![1, 1, 0]),
            9 => (3, vec![2, 2]),
            _ => return None,
        };
        let k = modulus.len().max(1);
        let digits = |mut x: usize| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let encode = |d: &[usize]| d.iter().rev().fold(0, |acc, &c| acc * p + c);
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<usize> = (0..k).map(|i| (da[i] + db[i]) % p).collect();
                add[a * q + b] = encode(&sum) as u16;
                let prod = if modulus.is_empty() {
                    vec![(a * b) % p]
                } else {
                    let mut full = vec![0usize; 2 * k - 1];
                    for i in 0..k {
                        for j in 0..k {
                            full[i + j] = (full[i + j] + da[i] * db[j]) % p;
                        }
                    }
                    for deg in (k..2 * k - 1).rev() {
                        let c = full[deg];
                        if c != 0 {
                            full[deg] = 0;
                            for (i, &m) in modulus.iter().enumerate() {
                                let t = full[deg - k + i] + (p - (c * m) % p);
                                full[deg - k + i] = t % p;
                            }
                        }
                    }
                    full.truncate(k);
                    full
                };
                mul[a * q + b] = encode(&prod) as u16;
            }
        }
        Some(Self { q, p, add, mul })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    pub fn neg(&self, a: usize) -> usize {
        (0..self.q).find(|&b| self.add(a, b) == 0).unwrap()
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: usize) -> Option<usize> {
        (1..self.q).find(|&b| self.mul(a, b) == 1)
    }
}

type Mat2 = [usize; 4];

fn mat_mul(f: &FiniteField, x: &Mat2, y: &Mat2) -> Mat2 {
    let dot = |a: usize, b: usize, c: usize, d: usize| f.add(f.mul(a, b), f.mul(c, d));
    [
        dot(x[0], y[0], x[1], y[2]),
        dot(x[0], y[1], x[1], y[3]),
        dot(x[2], y[0], x[3], y[2]),
        dot(x[2], y[1], x[3], y[3]),
    ]
}

fn canonical(f: &FiniteField, m: Mat2) -> Mat2 {
    let neg = m.map(|x| f.neg(x));
    let first = m.iter().position(|&x| x != 0).expect("invertible matrix");
    if neg[first] < m[first] {
        neg
    } else {
        m
    }
}

/// Canonical `PSL₂(q)` matrices in element-index order.
pub fn psl2_elements(q: usize) -> Option<(FiniteField, Vec<Mat2>)> {
    let f = FiniteField::new(q)?;
    let mut forms = BTreeSet::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if f.sub(f.mul(a, d), f.mul(b, c)) == 1 {
                        forms.insert(canonical(&f, [a, b, c, d]));
                    }
                }
            }
        }
    }
    let id = [1, 0, 0, 1];
    let mut elems = vec![id];
    elems.extend(forms.into_iter().filter(|m| *m != id));
    Some((f, elems))
}

fn psl2(q: usize) -> Option<Result<GroupTable, GroupError>> {
    let (f, elems) = psl2_elements(q)?;
    let expected = q * (q * q - 1) / num_integer::gcd(2, q - 1);
    if elems.len() != expected {
        return Some(Err(GroupError::InvalidTable(format!(
            "psl2:{q} produced {} elements, expected {expected}",
            elems.len()
        ))));
    }
    let index: HashMap<Mat2, u32> = elems.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
    let mut mul = Vec::with_capacity(elems.len() * elems.len());
    for x in &elems {
        for y in &elems {
            mul.push(index[&canonical(&f, mat_mul(&f, x, y))]);
        }
    }
    Some(GroupTable::from_table(format!("psl2:{q}"), elems.len(), mul))
}

/// Points of the projective line `(1:t)` for `t ∈ 𝔽_q` (index `t`) and `(0:1)` (index `q`).
/// Returns the permutation each `PSL₂(q)` element induces, in element order.
pub fn psl2_projective_action(q: usize) -> Option<Vec<Vec<usize>>> {
    let (f, elems) = psl2_elements(q)?;
    let point = |x: usize, y: usize| -> usize {
        if x == 0 {
            q
        } else {
            f.mul(y, f.inv(x).unwrap())
        }
    };
    Some(
        elems
            .iter()
            .map(|m| {
                (0..=q)
                    .map(|pt| {
                        let (x, y) = if pt == q { (0, 1) } else { (1, pt) };
                        point(f.add(f.mul(m[0], x), f.mul(m[1], y)), f.add(f.mul(m[2], x), f.mul(m[3], y)))
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Conjugacy classes and the data derived from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyData {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    inverse_class: Vec<usize>,
}

impl ConjugacyData {
    /// Orbits under conjugation, ordered by least member.
    pub fn compute(g: &GroupTable) -> Self {
        let n = g.order();
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let orbit: BTreeSet<usize> = (0..n).map(|h| g.conj(h, x)).collect();
            for &y in &orbit {
                class_of[y] = id;
            }
            classes.push(orbit.into_iter().collect());
        }
        let inverse_class = classes.iter().map(|c| class_of[g.inv(c[0])]).collect();
        Self {
            class_of,
            classes,
            inverse_class,
        }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    pub fn representative(&self, i: usize) -> usize {
        self.classes[i][0]
    }

    pub fn inverse_class(&self, i: usize) -> usize {
        self.inverse_class[i]
    }

    /// `a_{ijk}`: pairs `(x, y) ∈ C_i × C_j` with `x·y` equal to the
    /// representative of `C_k`, so that `C_i·C_j = Σ_k a_{ijk} C_k`.
    pub fn class_constant(&self, g: &GroupTable, i: usize, j: usize, k: usize) -> u64 {
        let z = self.representative(k);
        self.classes[i]
            .iter()
            .filter(|&&x| self.class_of[g.mul(g.inv(x), z)] == j)
            .count() as u64
    }

    /// The matrix `(a_{ijk})_{j,k}` of multiplication by the class sum `C_i`.
    pub fn class_matrix(&self, g: &GroupTable, i: usize) -> Vec<Vec<u64>> {
        let r = self.class_count();
        let mut m = vec![vec![0u64; r]; r];
        for k in 0..r {
            let z = self.representative(k);
            for &x in &self.classes[i] {
                m[self.class_of[g.mul(g.inv(x), z)]][k] += 1;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_orders() {
        assert_eq!(build_group("zn:6").unwrap().order(), 6);
        assert!(build_group("zn:6").unwrap().is_abelian());
        assert_eq!(build_group("dihedral:5").unwrap().order(), 10);
        assert!(!build_group("dihedral:5").unwrap().is_abelian());
        assert_eq!(build_group("sym:4").unwrap().order(), 24);
        assert_eq!(build_group("alt:5").unwrap().order(), 60);
        assert_eq!(build_group("alt:1").unwrap().order(), 1);
    }

    #[test]
    fn psl2_orders_match_formula() {
        for q in [2usize, 3, 4, 5, 7, 8, 9] {
            let expected = q * (q * q - 1) / num_integer::gcd(2, q - 1);
            let g = build_group(&format!("psl2:{q}")).unwrap();
            assert_eq!(g.order(), expected, "q = {q}");
            assert_eq!(g.identity(), 0);
        }
        assert_eq!(build_group("psl2:5").unwrap().order(), 60);
        assert_eq!(build_group("psl2:7").unwrap().order(), 168);
    }

    #[test]
    fn psl2_projective_action_is_faithful_homomorphism() {
        for q in [4usize, 5, 7] {
            let g = build_group(&format!("psl2:{q}")).unwrap();
            let act = psl2_projective_action(q).unwrap();
            let distinct: BTreeSet<&Vec<usize>> = act.iter().collect();
            assert_eq!(distinct.len(), g.order());
            for a in (0..g.order()).step_by(7) {
                for b in 0..g.order() {
                    let ab = g.mul(a, b);
                    let composed: Vec<usize> = (0..=q).map(|p| act[a][act[b][p]]).collect();
                    assert_eq!(act[ab], composed);
                }
            }
        }
    }

    #[test]
    fn field_axioms_small() {
        for q in [4usize, 8, 9] {
            let f = FiniteField::new(q).unwrap();
            for a in 1..q {
                assert!(f.inv(a).is_some(), "q={q} a={a}");
            }
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
        assert!(FiniteField::new(6).is_none());
    }

    #[test]
    fn unknown_and_invalid_specs() {
        assert!(matches!(build_group("foo:3"), Err(GroupError::UnknownSpec(_))));
        assert!(matches!(build_group("psl2:6"), Err(GroupError::UnknownSpec(_))));
        assert!(matches!(build_group("psl2:17"), Err(GroupError::UnknownSpec(_))));
        assert!(matches!(build_group("zn"), Err(GroupError::UnknownSpec(_))));
        assert!(matches!(build_group("sym:8"), Err(GroupError::TooLarge { .. })));
        // not a Latin square
        let bad = GroupTable::from_table("bad", 2, vec![0, 1, 1, 1]);
        assert!(matches!(bad, Err(GroupError::InvalidTable(_))));
        // Latin square with identity but not associative (order 5 loop)
        let loop5: Vec<u32> = vec![
            0, 1, 2, 3, 4, //
            1, 0, 3, 4, 2, //
            2, 4, 0, 1, 3, //
            3, 2, 4, 0, 1, //
            4, 3, 1, 2, 0,
        ];
        let e = GroupTable::from_table("loop", 5, loop5).unwrap_err();
        assert!(e.to_string().contains("associativity"), "{e}");
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        for spec in ["zn:7", "dihedral:6", "sym:4", "psl2:7"] {
            let g = build_group(spec).unwrap();
            let csv = g.to_csv();
            let h = GroupTable::from_csv(&csv, "mem.csv").unwrap();
            assert_eq!(g, h);
            assert_eq!(h.to_csv(), csv);
        }
    }

    #[test]
    fn csv_errors_cite_lines() {
        let e = GroupTable::from_csv("order,2\n0,1\n1\n", "t.csv").unwrap_err();
        assert_eq!(e.to_string(), "t.csv:3: expected 2 entries, found 1");
        let e = GroupTable::from_csv("size,2\n", "t.csv").unwrap_err();
        assert!(matches!(e, GroupError::Csv { line: 1, .. }));
        // identity at index 1
        let e = GroupTable::from_csv("order,2\n1,0\n0,1\n", "t.csv").unwrap_err();
        assert!(e.to_string().contains("identity"));
    }

    #[test]
    fn sampled_associativity_above_limit() {
        // psl2:13 has order 1092 > 512
        let g = build_group("psl2:13").unwrap();
        assert_eq!(g.order(), 1092);
        let gens = g.generating_set();
        assert_eq!(g.closure(&gens).len(), g.order());
    }

    #[test]
    fn class_structure() {
        let z = build_group("zn:9").unwrap();
        let c = ConjugacyData::compute(&z);
        assert_eq!(c.class_count(), 9);
        assert!(c.class_sizes().iter().all(|&s| s == 1));

        let s3 = build_group("sym:3").unwrap();
        assert_eq!(ConjugacyData::compute(&s3).class_sizes(), vec![1, 3, 2]);

        let a5 = build_group("alt:5").unwrap();
        let mut sizes = ConjugacyData::compute(&a5).class_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![1, 12, 12, 15, 20]);
    }

    #[test]
    fn class_constants_counting_identity() {
        for spec in ["sym:4", "alt:5", "dihedral:7", "psl2:7"] {
            let g = build_group(spec).unwrap();
            let c = ConjugacyData::compute(&g);
            let sizes = c.class_sizes();
            assert_eq!(sizes.iter().sum::<usize>(), g.order());
            assert_eq!(sizes[c.class_of(g.identity())], 1);
            for i in 0..c.class_count() {
                let m = c.class_matrix(&g, i);
                for j in 0..c.class_count() {
                    let total: u64 = (0..c.class_count()).map(|k| m[j][k] * sizes[k] as u64).sum();
                    assert_eq!(total, (sizes[i] * sizes[j]) as u64, "{spec} i={i} j={j}");
                    if i < 2 && j < 2 {
                        for k in 0..c.class_count() {
                            assert_eq!(m[j][k], c.class_constant(&g, i, j, k));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_permutes_classes() {
        let g = build_group("sym:4").unwrap();
        let c = ConjugacyData::compute(&g);
        for h in 0..g.order() {
            for class in c.classes() {
                let image: BTreeSet<usize> = class.iter().map(|&x| g.conj(h, x)).collect();
                assert_eq!(image, class.iter().copied().collect());
            }
        }
    }

    #[test]
    fn derived_subgroups() {
        assert_eq!(build_group("zn:8").unwrap().commutator_subgroup().len(), 1);
        assert_eq!(build_group("sym:4").unwrap().commutator_subgroup().len(), 12);
        assert_eq!(build_group("alt:5").unwrap().commutator_subgroup().len(), 60);
    }
}
