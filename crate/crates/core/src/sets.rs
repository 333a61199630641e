//! Bounded-universe set arithmetic.
//!
//! Two ambients are supported: a window `[lo, hi]` of the integers and a
//! finite group given by its multiplication table. Subsets of either are
//! dense bitsets over the ambient's element indices. Operations on integer
//! windows never leave the window; points pushed outside are counted and
//! reported as `clipped` so callers can widen the window.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;
use std::ops::ControlFlow;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::groups::GroupTable;

/// Default cap on the number of product words a single enumeration may visit.
pub const DEFAULT_FP_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("enumeration of {needed} product words exceeds the budget of {budget}")]
    CapExceeded { needed: u64, budget: u64 },
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("element {0} is not in the ambient")]
    NotInAmbient(i64),
    #[error("maxLen must be at least 1")]
    ZeroLength,
    #[error("product base is empty")]
    EmptyBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientKind {
    Integers,
    Group,
}

/// A finite universe that subsets live in, together with its operation.
///
/// For integer windows `op` is plain addition on `i64` and may produce values
/// outside the window; `index_of` is `None` for those.
pub trait Ambient: Clone + fmt::Debug + Send + Sync {
    type Elem: Copy + Ord + Eq + Hash + fmt::Debug + fmt::Display + Send + Sync;

    fn kind(&self) -> AmbientKind;
    fn size(&self) -> usize;
    fn index_of(&self, x: Self::Elem) -> Option<usize>;
    fn element(&self, i: usize) -> Self::Elem;
    fn op(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inverse(&self, a: Self::Elem) -> Self::Elem;
    fn identity(&self) -> Self::Elem;
    fn from_int(&self, x: i64) -> Option<Self::Elem>;
    fn to_int(&self, x: Self::Elem) -> i64;
    /// `g·S` restricted to the ambient.
    fn left_translate_bits(&self, bits: &FixedBitSet, g: Self::Elem) -> FixedBitSet;
    /// `S·g` restricted to the ambient.
    fn right_translate_bits(&self, bits: &FixedBitSet, g: Self::Elem) -> FixedBitSet;
    fn same_ambient(&self, other: &Self) -> bool;
}

/// The integer window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntWindow {
    lo: i64,
    hi: i64,
}

impl IntWindow {
    pub fn new(lo: i64, hi: i64) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Shifts every bit by `by` positions, dropping bits that fall off either end.
pub(crate) fn shift_bits(bits: &FixedBitSet, by: i64) -> FixedBitSet {
    const W: usize = usize::BITS as usize;
    let len = bits.len();
    if by == 0 {
        return bits.clone();
    }
    if by.unsigned_abs() as usize >= len {
        return FixedBitSet::with_capacity(len);
    }
    let src = bits.as_slice();
    let nblocks = src.len();
    let mut out = vec![0usize; nblocks];
    let s = by.unsigned_abs() as usize;
    let (wshift, bshift) = (s / W, s % W);
    if by > 0 {
        for i in (wshift..nblocks).rev() {
            let mut v = src[i - wshift] << bshift;
            if bshift > 0 && i > wshift {
                v |= src[i - wshift - 1] >> (W - bshift);
            }
            out[i] = v;
        }
    } else {
        for i in 0..nblocks - wshift {
            let mut v = src[i + wshift] >> bshift;
            if bshift > 0 && i + wshift + 1 < nblocks {
                v |= src[i + wshift + 1] << (W - bshift);
            }
            out[i] = v;
        }
    }
    let tail = len % W;
    if tail != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1usize << tail) - 1;
        }
    }
    FixedBitSet::with_capacity_and_blocks(len, out)
}

impl Ambient for IntWindow {
    type Elem = i64;

    fn kind(&self) -> AmbientKind {
        AmbientKind::Integers
    }

    fn size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    fn index_of(&self, x: i64) -> Option<usize> {
        self.contains(x).then(|| (x - self.lo) as usize)
    }

    fn element(&self, i: usize) -> i64 {
        self.lo + i as i64
    }

    fn op(&self, a: i64, b: i64) -> i64 {
        a + b
    }

    fn inverse(&self, a: i64) -> i64 {
        -a
    }

    fn identity(&self) -> i64 {
        0
    }

    fn from_int(&self, x: i64) -> Option<i64> {
        Some(x)
    }

    fn to_int(&self, x: i64) -> i64 {
        x
    }

    fn left_translate_bits(&self, bits: &FixedBitSet, g: i64) -> FixedBitSet {
        shift_bits(bits, g)
    }

    fn right_translate_bits(&self, bits: &FixedBitSet, g: i64) -> FixedBitSet {
        shift_bits(bits, g)
    }

    fn same_ambient(&self, other: &Self) -> bool {
        self == other
    }
}

impl Ambient for Arc<GroupTable> {
    type Elem = usize;

    fn kind(&self) -> AmbientKind {
        AmbientKind::Group
    }

    fn size(&self) -> usize {
        self.order()
    }

    fn index_of(&self, x: usize) -> Option<usize> {
        (x < self.order()).then_some(x)
    }

    fn element(&self, i: usize) -> usize {
        i
    }

    fn op(&self, a: usize, b: usize) -> usize {
        self.mul(a, b)
    }

    fn inverse(&self, a: usize) -> usize {
        self.inv(a)
    }

    fn identity(&self) -> usize {
        GroupTable::identity(self)
    }

    fn from_int(&self, x: i64) -> Option<usize> {
        (x >= 0 && (x as usize) < self.order()).then_some(x as usize)
    }

    fn to_int(&self, x: usize) -> i64 {
        x as i64
    }

    fn left_translate_bits(&self, bits: &FixedBitSet, g: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.order());
        for x in bits.ones() {
            out.insert(self.mul(g, x));
        }
        out
    }

    fn right_translate_bits(&self, bits: &FixedBitSet, g: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.order());
        for x in bits.ones() {
            out.insert(self.mul(x, g));
        }
        out
    }

    fn same_ambient(&self, other: &Self) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A subset of an ambient, stored as a bitset over element indices.
#[derive(Clone)]
pub struct Subset<A: Ambient> {
    ambient: A,
    bits: FixedBitSet,
}

pub type IntWindowSet = Subset<IntWindow>;
pub type GroupSubset = Subset<Arc<GroupTable>>;

/// Result of a translation: the translated set and how many members were lost
/// off the edge of the window (always 0 in groups).
#[derive(Debug, Clone, PartialEq)]
pub struct Translated<A: Ambient> {
    pub set: Subset<A>,
    pub clipped: usize,
}

impl<A: Ambient> fmt::Debug for Subset<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subset")
            .field("ambient", &self.ambient)
            .field("len", &self.len())
            .field("members", &self.iter().take(16).collect::<Vec<_>>())
            .finish()
    }
}

impl<A: Ambient> PartialEq for Subset<A> {
    fn eq(&self, other: &Self) -> bool {
        self.ambient.same_ambient(&other.ambient) && self.bits == other.bits
    }
}

impl<A: Ambient> Subset<A> {
    pub fn empty(ambient: A) -> Self {
        let bits = FixedBitSet::with_capacity(ambient.size());
        Self { ambient, bits }
    }

    pub fn full(ambient: A) -> Self {
        let mut bits = FixedBitSet::with_capacity(ambient.size());
        bits.insert_range(..);
        Self { ambient, bits }
    }

    /// Builds a subset from elements; returns the set and the number of
    /// elements that were outside the ambient.
    pub fn from_elements<I: IntoIterator<Item = A::Elem>>(ambient: A, elems: I) -> (Self, usize) {
        let mut set = Self::empty(ambient);
        let mut outside = 0;
        for x in elems {
            if !set.insert(x) {
                outside += 1;
            }
        }
        (set, outside)
    }

    pub fn from_predicate(ambient: A, mut pred: impl FnMut(A::Elem) -> bool) -> Self {
        let mut set = Self::empty(ambient);
        for i in 0..set.ambient.size() {
            if pred(set.ambient.element(i)) {
                set.bits.insert(i);
            }
        }
        set
    }

    pub(crate) fn from_bits(ambient: A, bits: FixedBitSet) -> Self {
        debug_assert_eq!(bits.len(), ambient.size());
        Self { ambient, bits }
    }

    pub fn ambient(&self) -> &A {
        &self.ambient
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    /// Inserts `x`; returns false (and does nothing) when `x` is outside the ambient.
    pub fn insert(&mut self, x: A::Elem) -> bool {
        match self.ambient.index_of(x) {
            Some(i) => {
                self.bits.insert(i);
                true
            }
            None => false,
        }
    }

    pub fn remove(&mut self, x: A::Elem) {
        if let Some(i) = self.ambient.index_of(x) {
            self.bits.set(i, false);
        }
    }

    pub fn contains(&self, x: A::Elem) -> bool {
        self.ambient.index_of(x).is_some_and(|i| self.bits.contains(i))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in ascending (canonical) order.
    pub fn iter(&self) -> impl Iterator<Item = A::Elem> + '_ {
        self.bits.ones().map(move |i| self.ambient.element(i))
    }

    pub fn to_vec(&self) -> Vec<A::Elem> {
        self.iter().collect()
    }

    pub fn min(&self) -> Option<A::Elem> {
        self.bits.minimum().map(|i| self.ambient.element(i))
    }

    /// `g·A`, clipped to the ambient.
    pub fn translate(&self, g: A::Elem) -> Translated<A> {
        let bits = self.ambient.left_translate_bits(&self.bits, g);
        let clipped = self.len() - bits.count_ones(..);
        Translated {
            set: Self::from_bits(self.ambient.clone(), bits),
            clipped,
        }
    }

    /// `A·g`, clipped to the ambient.
    pub fn right_translate(&self, g: A::Elem) -> Translated<A> {
        let bits = self.ambient.right_translate_bits(&self.bits, g);
        let clipped = self.len() - bits.count_ones(..);
        Translated {
            set: Self::from_bits(self.ambient.clone(), bits),
            clipped,
        }
    }

    /// `A⁻¹`, clipped to the ambient.
    pub fn inverse(&self) -> Translated<A> {
        let mut out = Self::empty(self.ambient.clone());
        let mut clipped = 0;
        for x in self.iter() {
            if !out.insert(self.ambient.inverse(x)) {
                clipped += 1;
            }
        }
        Translated { set: out, clipped }
    }

    /// `A·B = {a·b}`, clipped to the ambient; `clipped` counts products that
    /// fell outside (with multiplicity of distinct values).
    pub fn product(&self, other: &Self) -> Translated<A> {
        let mut out = Self::empty(self.ambient.clone());
        let mut outside = BTreeSet::new();
        for a in self.iter() {
            for b in other.iter() {
                let v = self.ambient.op(a, b);
                if !out.insert(v) {
                    outside.insert(v);
                }
            }
        }
        Translated {
            set: out,
            clipped: outside.len(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self::from_bits(self.ambient.clone(), bits)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self::from_bits(self.ambient.clone(), bits)
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Self::from_bits(self.ambient.clone(), bits)
    }

    pub fn complement(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self::from_bits(self.ambient.clone(), bits)
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

/// A product word over a base sequence: strictly increasing positions and the
/// left-to-right product of the referenced elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductWord<E> {
    pub indices: Vec<usize>,
    pub value: E,
}

/// Cap on product-word enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FpBudget(pub u64);

impl Default for FpBudget {
    fn default() -> Self {
        FpBudget(DEFAULT_FP_BUDGET)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of nonempty increasing words of length at most `max_len`:
/// Σ_{k=1..max_len} C(n, k), saturating.
pub fn word_count(n: usize, max_len: usize) -> u64 {
    let top = max_len.min(n) as u64;
    (1..=top).fold(0u64, |acc, k| acc.saturating_add(binomial(n as u64, k)))
}

fn check_words<E>(base: &[E], max_len: usize, budget: FpBudget) -> Result<u64, SetError> {
    if max_len == 0 {
        return Err(SetError::ZeroLength);
    }
    if base.is_empty() {
        return Err(SetError::EmptyBase);
    }
    let needed = word_count(base.len(), max_len);
    if needed > budget.0 {
        return Err(SetError::CapExceeded {
            needed,
            budget: budget.0,
        });
    }
    Ok(needed)
}

/// Visits every word in lexicographic order of its index sequence (a prefix
/// precedes its extensions).
fn walk_words<A: Ambient, B>(
    ambient: &A,
    base: &[A::Elem],
    max_len: usize,
    visit: &mut impl FnMut(&[usize], A::Elem) -> ControlFlow<B>,
) -> ControlFlow<B> {
    fn rec<A: Ambient, B>(
        ambient: &A,
        base: &[A::Elem],
        max_len: usize,
        indices: &mut Vec<usize>,
        value: A::Elem,
        visit: &mut impl FnMut(&[usize], A::Elem) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        visit(indices, value)?;
        if indices.len() == max_len {
            return ControlFlow::Continue(());
        }
        let start = indices.last().map_or(0, |&i| i + 1);
        for j in start..base.len() {
            indices.push(j);
            let next = ambient.op(value, base[j]);
            let r = rec(ambient, base, max_len, indices, next, visit);
            indices.pop();
            r?;
        }
        ControlFlow::Continue(())
    }

    let mut indices = Vec::with_capacity(max_len);
    for (i, &x) in base.iter().enumerate() {
        indices.push(i);
        let r = rec(ambient, base, max_len, &mut indices, x, visit);
        indices.pop();
        r?;
    }
    ControlFlow::Continue(())
}

/// All ordered products `x_{i1}⋯x_{ik}` with `i1 < … < ik` and `k ≤ max_len`.
pub fn fp_closure<A: Ambient>(
    ambient: &A,
    base: &[A::Elem],
    max_len: usize,
    budget: FpBudget,
) -> Result<Vec<ProductWord<A::Elem>>, SetError> {
    let needed = check_words(base, max_len, budget)?;
    let mut out = Vec::with_capacity(needed as usize);
    let _ = walk_words::<A, ()>(ambient, base, max_len, &mut |idx, v| {
        out.push(ProductWord {
            indices: idx.to_vec(),
            value: v,
        });
        ControlFlow::Continue(())
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpVerdict<E> {
    pub holds: bool,
    pub words_checked: u64,
    /// Lexicographically least violating word, if any.
    pub violation: Option<ProductWord<E>>,
}

/// Checks that every product word of length ≤ `max_len` lies in `set`.
pub fn verify_fp<A: Ambient>(
    base: &[A::Elem],
    set: &Subset<A>,
    max_len: usize,
    budget: FpBudget,
) -> Result<FpVerdict<A::Elem>, SetError> {
    check_words(base, max_len, budget)?;
    let mut checked = 0u64;
    let flow = walk_words(set.ambient(), base, max_len, &mut |idx, v| {
        checked += 1;
        if set.contains(v) {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(ProductWord {
                indices: idx.to_vec(),
                value: v,
            })
        }
    });
    let violation = match flow {
        ControlFlow::Break(w) => Some(w),
        ControlFlow::Continue(()) => None,
    };
    Ok(FpVerdict {
        holds: violation.is_none(),
        words_checked: checked,
        violation,
    })
}

/// One line of the integer-set text format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetDirective {
    Int(i64),
    Interval(i64, i64),
    Progression { first: i64, step: i64, count: u64 },
    Residue { r: i64, m: i64 },
}

impl fmt::Display for SetDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDirective::Int(n) => write!(f, "int {n}"),
            SetDirective::Interval(a, b) => write!(f, "interval {a} {b}"),
            SetDirective::Progression { first, step, count } => write!(f, "ap {first} {step} {count}"),
            SetDirective::Residue { r, m } => write!(f, "mod {r} {m}"),
        }
    }
}

/// Parsed set description: an optional window (mandatory for integer sets)
/// and a union of directives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSpec {
    pub window: Option<(i64, i64)>,
    pub directives: Vec<SetDirective>,
}

impl SetSpec {
    /// Parses the line format. Blank lines and `#` comments are ignored;
    /// `;` also separates directives so a spec fits on one line.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, SetError> {
        let err = |line: usize, message: String| SetError::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut window = None;
        let mut directives = Vec::new();
        let mut seen_any = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("");
            for part in content.split(';') {
                let toks: Vec<&str> = part.split_whitespace().collect();
                if toks.is_empty() {
                    continue;
                }
                let nums = |want: usize| -> Result<Vec<i64>, SetError> {
                    if toks.len() != want + 1 {
                        return Err(err(
                            line,
                            format!("`{}` takes {want} argument(s), got {}", toks[0], toks.len() - 1),
                        ));
                    }
                    toks[1..]
                        .iter()
                        .map(|t| t.parse::<i64>().map_err(|_| err(line, format!("not an integer: `{t}`"))))
                        .collect()
                };
                match toks[0] {
                    "window" => {
                        if seen_any {
                            return Err(err(line, "`window` must appear first".into()));
                        }
                        let v = nums(2)?;
                        if v[0] > v[1] {
                            return Err(err(line, format!("empty window [{}, {}]", v[0], v[1])));
                        }
                        window = Some((v[0], v[1]));
                    }
                    "int" => directives.push(SetDirective::Int(nums(1)?[0])),
                    "interval" => {
                        let v = nums(2)?;
                        directives.push(SetDirective::Interval(v[0], v[1]));
                    }
                    "ap" => {
                        let v = nums(3)?;
                        if v[2] < 0 {
                            return Err(err(line, "negative progression count".into()));
                        }
                        directives.push(SetDirective::Progression {
                            first: v[0],
                            step: v[1],
                            count: v[2] as u64,
                        });
                    }
                    "mod" => {
                        let v = nums(2)?;
                        if v[1] <= 0 {
                            return Err(err(line, "modulus must be positive".into()));
                        }
                        directives.push(SetDirective::Residue { r: v[0], m: v[1] });
                    }
                    other => return Err(err(line, format!("unknown directive `{other}`"))),
                }
                seen_any = true;
            }
        }
        Ok(Self { window, directives })
    }

    /// Canonical one-line form, used inside certificates.
    pub fn to_line(&self) -> String {
        let mut parts = Vec::new();
        if let Some((lo, hi)) = self.window {
            parts.push(format!("window {lo} {hi}"));
        }
        parts.extend(self.directives.iter().map(|d| d.to_string()));
        parts.join("; ")
    }

    fn fill<A: Ambient>(&self, set: &mut Subset<A>) -> usize {
        let ambient = set.ambient().clone();
        let mut outside = 0;
        let mut put = |set: &mut Subset<A>, x: i64| match ambient.from_int(x) {
            Some(e) if set.insert(e) => {}
            _ => outside += 1,
        };
        for d in &self.directives {
            match *d {
                SetDirective::Int(n) => put(set, n),
                SetDirective::Interval(a, b) => {
                    for x in a..=b {
                        put(set, x);
                    }
                }
                SetDirective::Progression { first, step, count } => {
                    for t in 0..count as i64 {
                        put(set, first + step * t);
                    }
                }
                SetDirective::Residue { r, m } => {
                    for i in 0..ambient.size() {
                        let x = ambient.to_int(ambient.element(i));
                        if (x - r).rem_euclid(m) == 0 {
                            set.bits.insert(i);
                        }
                    }
                }
            }
        }
        outside
    }

    /// Builds an integer-window set; the window directive is required.
    /// Returns the set and the count of listed points outside the window.
    pub fn build_int(&self, source_name: &str) -> Result<(IntWindowSet, usize), SetError> {
        let (lo, hi) = self.window.ok_or_else(|| SetError::Parse {
            source_name: source_name.to_string(),
            line: 1,
            message: "integer sets need a leading `window <lo> <hi>`".into(),
        })?;
        let mut set = Subset::empty(IntWindow::new(lo, hi).expect("validated window"));
        let outside = self.fill(&mut set);
        Ok((set, outside))
    }

    /// Builds a subset of a finite group; directives address element indices.
    pub fn build_group(&self, group: &Arc<GroupTable>, source_name: &str) -> Result<(GroupSubset, usize), SetError> {
        if let Some((lo, hi)) = self.window {
            if lo != 0 || hi != group.order() as i64 - 1 {
                return Err(SetError::Parse {
                    source_name: source_name.to_string(),
                    line: 1,
                    message: format!("window must be `0 {}` for a group of order {}", group.order() - 1, group.order()),
                });
            }
        }
        let mut set = Subset::empty(group.clone());
        let outside = self.fill(&mut set);
        Ok((set, outside))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;

    fn window(lo: i64, hi: i64) -> IntWindow {
        IntWindow::new(lo, hi).unwrap()
    }

    fn evens(lo: i64, hi: i64) -> IntWindowSet {
        Subset::from_predicate(window(lo, hi), |x| x % 2 == 0)
    }

    #[test]
    fn identity_translate() {
        let a = evens(0, 10);
        let t = a.translate(0);
        assert_eq!(t.set, a);
        assert_eq!(t.clipped, 0);
    }

    #[test]
    fn shift_translate_and_clipping() {
        let (a, _) = Subset::from_elements(window(0, 10), [0, 2, 4]);
        let t = a.translate(1);
        assert_eq!(t.set.to_vec(), vec![1, 3, 5]);
        assert_eq!(t.clipped, 0);

        let t = evens(0, 10).translate(3);
        assert_eq!(t.set.to_vec(), vec![3, 5, 7, 9]);
        assert_eq!(t.clipped, 2);
        let t = evens(0, 10).translate(-3);
        assert_eq!(t.set.to_vec(), vec![1, 3, 5, 7]);
        assert_eq!(t.clipped, 2);
    }

    #[test]
    fn shift_across_block_boundaries() {
        let w = window(0, 300);
        let a = Subset::from_predicate(w, |x| x % 7 == 3);
        for g in [-200, -65, -64, -63, -1, 1, 63, 64, 65, 130, 299, 301, -301] {
            let t = a.translate(g);
            let expect: Vec<i64> = a.iter().map(|x| x + g).filter(|x| w.contains(*x)).collect();
            assert_eq!(t.set.to_vec(), expect, "shift {g}");
            assert_eq!(t.clipped, a.len() - expect.len());
        }
    }

    #[test]
    fn group_translate_is_bijection() {
        let g = Arc::new(build_group("alt:5").unwrap());
        let (s, _) = Subset::from_elements(g.clone(), [0, 3, 7, 11, 20, 41, 59]);
        for x in 0..60 {
            let t = s.translate(x);
            assert_eq!(t.set.len(), s.len());
            assert_eq!(t.clipped, 0);
        }
    }

    #[test]
    fn fp_closure_binary() {
        let w = window(0, 100);
        let words = fp_closure(&w, &[1, 2, 4], 3, FpBudget::default()).unwrap();
        let mut values: Vec<i64> = words.iter().map(|w| w.value).collect();
        values.sort();
        assert_eq!(values, vec![1, 2, 3, 4, 5, 6, 7]);
        let single = fp_closure(&w, &[9], 4, FpBudget::default()).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].value, 9);
    }

    #[test]
    fn fp_closure_respects_index_order() {
        let g = Arc::new(build_group("sym:3").unwrap());
        let (a, b) = (1usize, 3usize);
        assert_ne!(g.mul(a, b), g.mul(b, a));
        let words = fp_closure(&g, &[a, b], 2, FpBudget::default()).unwrap();
        let values: Vec<usize> = words.iter().map(|w| w.value).collect();
        assert_eq!(values, vec![a, g.mul(a, b), b]);
        assert!(!values.contains(&g.mul(b, a)));
    }

    #[test]
    fn fp_cap() {
        let w = window(0, 10);
        let base: Vec<i64> = (0..21).collect();
        let err = fp_closure(&w, &base, 21, FpBudget::default()).unwrap_err();
        assert!(matches!(err, SetError::CapExceeded { .. }));
        assert!(fp_closure(&w, &base[..3], 3, FpBudget(6)).is_err());
        assert_eq!(fp_closure(&w, &base[..3], 3, FpBudget(7)).unwrap().len(), 7);
        assert_eq!(fp_closure(&w, &base[..3], 0, FpBudget(7)), Err(SetError::ZeroLength));
    }

    #[test]
    fn verify_fp_examples() {
        let mult3 = Subset::from_predicate(window(0, 100), |x| x % 3 == 0);
        let v = verify_fp(&[3, 6, 12], &mult3, 3, FpBudget::default()).unwrap();
        assert!(v.holds);
        assert_eq!(v.words_checked, 7);

        let odds = Subset::from_predicate(window(0, 10), |x| x % 2 == 1);
        let v = verify_fp(&[1, 3], &odds, 2, FpBudget::default()).unwrap();
        assert!(!v.holds);
        let w = v.violation.unwrap();
        assert_eq!(w.indices, vec![0, 1]);
        assert_eq!(w.value, 4);
    }

    #[test]
    fn verify_fp_twelve_generators_subgroup() {
        // The even elements of zn:24 form a subgroup; any 12 of them pass.
        let g = Arc::new(build_group("zn:24").unwrap());
        let sub = Subset::from_predicate(g.clone(), |x| x % 2 == 0);
        let base: Vec<usize> = (0..12).map(|i| 2 * i).collect();
        let v = verify_fp(&base, &sub, 12, FpBudget::default()).unwrap();
        assert!(v.holds);
        assert_eq!(v.words_checked, 4095);
    }

    #[test]
    fn set_format() {
        let text = "# demo\nwindow 0 20\nint 1\ninterval 5 7; ap 10 3 3\nmod 0 10\n";
        let spec = SetSpec::parse(text, "demo.set").unwrap();
        let (set, outside) = spec.build_int("demo.set").unwrap();
        assert_eq!(outside, 0);
        assert_eq!(set.to_vec(), vec![0, 1, 5, 6, 7, 10, 13, 16, 20]);
        assert_eq!(spec.to_line(), "window 0 20; int 1; interval 5 7; ap 10 3 3; mod 0 10");
        let again = SetSpec::parse(&spec.to_line(), "x").unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn set_format_errors_cite_line() {
        let e = SetSpec::parse("window 0 5\nint 3\nwindow 0 9\n", "f.set").unwrap_err();
        assert_eq!(e.to_string(), "f.set:3: `window` must appear first");
        let e = SetSpec::parse("window 0 5\n\nbogus 1\n", "f.set").unwrap_err();
        assert!(matches!(e, SetError::Parse { line: 3, .. }));
        let e = SetSpec::parse("int 4\n", "f.set").unwrap().build_int("f.set").unwrap_err();
        assert!(matches!(e, SetError::Parse { .. }));
    }

    #[test]
    fn word_counts() {
        assert_eq!(word_count(12, 12), 4095);
        assert_eq!(word_count(5, 2), 15);
        assert_eq!(word_count(3, 10), 7);
    }

    #[test]
    fn product_and_inverse() {
        let (a, _) = Subset::from_elements(window(-5, 5), [1, 2]);
        let p = a.product(&a);
        assert_eq!(p.set.to_vec(), vec![2, 3, 4]);
        let inv = a.inverse();
        assert_eq!(inv.set.to_vec(), vec![-2, -1]);
        let (b, _) = Subset::from_elements(window(-5, 5), [4, 5]);
        let p = b.product(&b);
        assert_eq!(p.set.len(), 0);
        assert_eq!(p.clipped, 3);
    }
}
