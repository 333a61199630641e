//! Densities along Følner families and a finite-depth invariant measure.
//!
//! Families are indexed from 1. The limsup of `|A ∩ F_n|/|F_n|` is replaced
//! by the maximum over the tail `n ∈ [max(1, N/2), N]`, ties going to the
//! smaller index. All values are exact rationals.
//!
//! The measure approximation follows the diagonal argument: stage 0 keeps
//! the tail indices where the frequency of `A` is maximal, and stage `s`
//! keeps, among the previous survivors, those where the frequency of the
//! requested set `(s − 1) mod r` is maximal. The diagonal family takes the
//! `s`-th survivor of stage `s` (or the last one if fewer remain), and all
//! values are read at the last diagonal stage.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::rational::{ratio, Rational};
use crate::sets::{Ambient, AmbientKind, IntWindowSet, Subset};

pub const MAX_REQUESTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("F_{index} is not inside the window")]
    WindowTooSmall { index: usize },
    #[error("index {index} is outside the family (1..={max})")]
    IndexOutOfFamily { index: usize, max: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("depth {depth} is below the number of requested sets ({needed})")]
    DepthInsufficient { depth: usize, needed: usize },
    #[error("{count} requested sets exceed the limit of {limit}")]
    TooManyRequests { count: usize, limit: usize },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// A sequence of finite sets `F_1, F_2, …` in the ambient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolnerFamily {
    /// `F_n = [−n, n]` in ℤ.
    Intervals { max_index: usize },
    /// `F_n = [a_n, a_n + n]` in ℤ.
    Shifted { starts: Vec<i64> },
    /// User-supplied sets (integers, or element indices in a group).
    Explicit { sets: Vec<Vec<i64>> },
    /// `F_n = G` for a finite group.
    WholeGroup,
}

/// One member of a family, either a contiguous range of integer labels or
/// an explicit sorted list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Member<'a> {
    Range(i64, i64),
    Elems(&'a [i64]),
}

impl Member<'_> {
    pub fn len(&self) -> usize {
        match self {
            Member::Range(lo, hi) => (hi - lo + 1) as usize,
            Member::Elems(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<i64> {
        match self {
            Member::Range(lo, hi) => (*lo..=*hi).collect(),
            Member::Elems(v) => v.to_vec(),
        }
    }
}

impl FolnerFamily {
    /// Explicit family with each set sorted and deduplicated.
    pub fn explicit(sets: Vec<Vec<i64>>) -> Self {
        let sets = sets
            .into_iter()
            .map(|s| s.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        FolnerFamily::Explicit { sets }
    }

    /// Parses `intervals:<N>`, `shifted:<path>`, `explicit:<path>` or `whole-group`.
    pub fn from_spec(spec: &str) -> Result<Self, DensityError> {
        let read = |path: &str| {
            std::fs::read_to_string(Path::new(path)).map_err(|e| DensityError::Io {
                path: path.to_string(),
                message: e.to_string(),
            })
        };
        match spec.split_once(':') {
            None if spec == "whole-group" => Ok(FolnerFamily::WholeGroup),
            Some(("intervals", n)) => n
                .parse()
                .ok()
                .filter(|&n: &usize| n >= 1)
                .map(|max_index| FolnerFamily::Intervals { max_index })
                .ok_or_else(|| DensityError::InvalidFamily(format!("bad interval count `{n}`"))),
            Some(("shifted", path)) => Self::parse_shifted(&read(path)?, path),
            Some(("explicit", path)) => Self::parse_explicit(&read(path)?, path),
            _ => Err(DensityError::InvalidFamily(format!("unknown family `{spec}`"))),
        }
    }

    /// One start `a_n` per line.
    pub fn parse_shifted(text: &str, path: &str) -> Result<Self, DensityError> {
        let mut starts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            starts.push(line.parse().map_err(|_| DensityError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: format!("not an integer: `{line}`"),
            })?);
        }
        if starts.is_empty() {
            return Err(DensityError::InvalidFamily(format!("{path} lists no starts")));
        }
        Ok(FolnerFamily::Shifted { starts })
    }

    /// One set per line: integers and `a..b` ranges separated by spaces or commas.
    pub fn parse_explicit(text: &str, path: &str) -> Result<Self, DensityError> {
        let mut sets = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
            if tokens.is_empty() {
                continue;
            }
            let err = |t: &str| DensityError::Parse {
                path: path.to_string(),
                line: i + 1,
                message: format!("bad element `{t}`"),
            };
            let mut set = Vec::new();
            for t in tokens {
                match t.split_once("..") {
                    Some((a, b)) => {
                        let a: i64 = a.parse().map_err(|_| err(t))?;
                        let b: i64 = b.parse().map_err(|_| err(t))?;
                        set.extend(a..=b);
                    }
                    None => set.push(t.parse().map_err(|_| err(t))?),
                }
            }
            sets.push(set);
        }
        if sets.is_empty() {
            return Err(DensityError::InvalidFamily(format!("{path} lists no sets")));
        }
        Ok(Self::explicit(sets))
    }

    /// Canonical spec-like description, used in certificates.
    pub fn describe(&self) -> String {
        match self {
            FolnerFamily::Intervals { max_index } => format!("intervals:{max_index}"),
            FolnerFamily::Shifted { starts } => format!("shifted[{}]", starts.len()),
            FolnerFamily::Explicit { sets } => format!("explicit[{}]", sets.len()),
            FolnerFamily::WholeGroup => "whole-group".to_string(),
        }
    }

    /// Number of members.
    pub fn max_index(&self) -> usize {
        match self {
            FolnerFamily::Intervals { max_index } => *max_index,
            FolnerFamily::Shifted { starts } => starts.len(),
            FolnerFamily::Explicit { sets } => sets.len(),
            FolnerFamily::WholeGroup => 1,
        }
    }

    pub fn member<A: Ambient>(&self, ambient: &A, n: usize) -> Result<Member<'_>, DensityError> {
        let max = self.max_index();
        if n == 0 || n > max {
            return Err(DensityError::IndexOutOfFamily { index: n, max });
        }
        let integers = ambient.kind() == AmbientKind::Integers;
        match self {
            FolnerFamily::Intervals { .. } | FolnerFamily::Shifted { .. } if !integers => Err(
                DensityError::Unsupported("interval families live in the integers".into()),
            ),
            FolnerFamily::WholeGroup if integers => Err(DensityError::Unsupported(
                "the whole-group family needs a finite group".into(),
            )),
            FolnerFamily::Intervals { .. } => Ok(Member::Range(-(n as i64), n as i64)),
            FolnerFamily::Shifted { starts } => Ok(Member::Range(starts[n - 1], starts[n - 1] + n as i64)),
            FolnerFamily::Explicit { sets } => Ok(Member::Elems(&sets[n - 1])),
            FolnerFamily::WholeGroup => Ok(Member::Range(0, ambient.size() as i64 - 1)),
        }
    }

    /// In ℤ the sizes must strictly increase.
    pub fn validate<A: Ambient>(&self, ambient: &A) -> Result<(), DensityError> {
        if ambient.kind() == AmbientKind::Integers {
            let mut prev = 0;
            for n in 1..=self.max_index() {
                let len = self.member(ambient, n)?.len();
                if len <= prev {
                    return Err(DensityError::InvalidFamily(format!("|F_{n}| = {len} does not increase")));
                }
                prev = len;
            }
        }
        Ok(())
    }
}

/// Prefix counts of a subset over element indices, for range queries.
struct Counter<'a, A: Ambient> {
    set: &'a Subset<A>,
    prefix: Vec<u32>,
}

impl<'a, A: Ambient> Counter<'a, A> {
    fn new(set: &'a Subset<A>) -> Self {
        let mut prefix = Vec::with_capacity(set.ambient().size() + 1);
        let mut acc = 0;
        prefix.push(0);
        for i in 0..set.ambient().size() {
            acc += u32::from(set.bits().contains(i));
            prefix.push(acc);
        }
        Self { set, prefix }
    }

    fn index(&self, x: i64) -> Option<usize> {
        let a = self.set.ambient();
        a.from_int(x).and_then(|e| a.index_of(e))
    }

    /// `|A ∩ F_n|`, failing when `F_n` leaves the ambient.
    fn count(&self, member: &Member, n: usize) -> Result<usize, DensityError> {
        let outside = DensityError::WindowTooSmall { index: n };
        match *member {
            Member::Range(lo, hi) => {
                let (Some(i), Some(j)) = (self.index(lo), self.index(hi)) else {
                    return Err(outside);
                };
                Ok((self.prefix[j + 1] - self.prefix[i]) as usize)
            }
            Member::Elems(elems) => {
                let mut c = 0;
                for &x in elems {
                    let i = self.index(x).ok_or(outside.clone())?;
                    c += usize::from(self.set.bits().contains(i));
                }
                Ok(c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Upper,
    Lower,
    Banach,
}

impl DensityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensityMode::Upper => "upper",
            DensityMode::Lower => "lower",
            DensityMode::Banach => "banach",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityReport {
    pub value: Rational,
    /// Family index `n` for upper/lower; window offset `m` for banach.
    pub witness: i64,
    pub mode: DensityMode,
}

/// `1 − |F_n ∩ g·F_n|/|F_n|`.
pub fn folner_defect<A: Ambient>(ambient: &A, family: &FolnerFamily, g: A::Elem, n: usize) -> Result<Rational, DensityError> {
    let member = family.member(ambient, n)?;
    if member.is_empty() {
        return Err(DensityError::InvalidFamily(format!("F_{n} is empty")));
    }
    let overlap = match member {
        Member::Range(lo, hi) if ambient.kind() == AmbientKind::Integers => {
            let shift = ambient.to_int(g).unsigned_abs() as usize;
            ((hi - lo + 1) as usize).saturating_sub(shift)
        }
        _ => {
            let elems: BTreeSet<i64> = member.to_vec().into_iter().collect();
            let mut overlap = 0;
            for &x in &elems {
                let e = ambient.from_int(x).ok_or(DensityError::WindowTooSmall { index: n })?;
                if elems.contains(&ambient.to_int(ambient.op(g, e))) {
                    overlap += 1;
                }
            }
            overlap
        }
    };
    Ok(Rational::from_integer(1) - ratio(overlap, member.len()))
}

fn tail(max_index: usize) -> std::ops::RangeInclusive<usize> {
    (max_index / 2).max(1)..=max_index
}

/// Frequencies `|S ∩ F_n|/|F_n|` over the tail.
fn tail_frequencies<A: Ambient>(
    set: &Subset<A>,
    family: &FolnerFamily,
    max_index: usize,
) -> Result<Vec<(usize, Rational)>, DensityError> {
    if max_index == 0 || max_index > family.max_index() {
        return Err(DensityError::IndexOutOfFamily {
            index: max_index,
            max: family.max_index(),
        });
    }
    let counter = Counter::new(set);
    tail(max_index)
        .map(|n| {
            let member = family.member(set.ambient(), n)?;
            if member.is_empty() {
                return Err(DensityError::InvalidFamily(format!("F_{n} is empty")));
            }
            Ok((n, ratio(counter.count(&member, n)?, member.len())))
        })
        .collect()
}

/// Tail maximum (upper) or minimum (lower) of `|A ∩ F_n|/|F_n|`.
pub fn upper_density<A: Ambient>(
    set: &Subset<A>,
    family: &FolnerFamily,
    max_index: usize,
    mode: DensityMode,
) -> Result<DensityReport, DensityError> {
    let freqs = tail_frequencies(set, family, max_index)?;
    let mut best = freqs[0];
    for &(n, f) in &freqs[1..] {
        let better = match mode {
            DensityMode::Lower => f < best.1,
            _ => f > best.1,
        };
        if better {
            best = (n, f);
        }
    }
    Ok(DensityReport {
        value: best.1,
        witness: best.0 as i64,
        mode: if mode == DensityMode::Lower { DensityMode::Lower } else { DensityMode::Upper },
    })
}

/// Exact `max_m |A ∩ [m+1, m+n]|/n` over windows inside `[lo, hi]`; the
/// witness is the smallest maximizing `m`.
pub fn banach_density_windowed(set: &IntWindowSet, n: usize) -> Result<DensityReport, DensityError> {
    let (m, count) = best_window(set, n)?;
    Ok(DensityReport {
        value: ratio(count, n),
        witness: m,
        mode: DensityMode::Banach,
    })
}

fn best_window(set: &IntWindowSet, n: usize) -> Result<(i64, usize), DensityError> {
    let size = set.ambient().size();
    if n == 0 || n > size {
        return Err(DensityError::WindowTooSmall { index: n });
    }
    let bits = set.bits();
    let mut count = bits.count_ones(..n);
    let (mut best_start, mut best) = (0, count);
    for start in 1..=size - n {
        count = count + usize::from(bits.contains(start + n - 1)) - usize::from(bits.contains(start - 1));
        if count > best {
            best = count;
            best_start = start;
        }
    }
    Ok((set.ambient().lo() + best_start as i64 - 1, best))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AveragingReport {
    pub density: DensityReport,
    pub n: usize,
    /// Maximizing `m` over the whole window, and its count.
    pub witness_m: i64,
    pub count: usize,
    /// `count/n ≥ density − 1/n`.
    pub holds: bool,
    /// `Σ_{m ∈ F_w} |A ∩ [m+1, m+n]|` and `Σ_{i=1..n} |A ∩ (i + F_w)|`.
    pub identity: (usize, usize),
}

/// Checks the averaging argument behind the equivalence of the two Banach
/// densities: some window of length `n` has relative count at least the
/// upper density minus `1/n`. Also evaluates both sides of the double
/// counting identity on the witness member `F_w`.
pub fn averaging_check(
    set: &IntWindowSet,
    family: &FolnerFamily,
    max_index: usize,
    n: usize,
) -> Result<AveragingReport, DensityError> {
    if !matches!(family, FolnerFamily::Intervals { .. } | FolnerFamily::Shifted { .. }) {
        return Err(DensityError::Unsupported("the averaging check needs an interval family".into()));
    }
    let density = upper_density(set, family, max_index, DensityMode::Upper)?;
    let (witness_m, count) = best_window(set, n)?;
    let holds = ratio(count, n) >= density.value - ratio(1, n);

    let w = density.witness as usize;
    let Member::Range(a, b) = family.member(set.ambient(), w)? else {
        unreachable!("interval families yield ranges")
    };
    let window = *set.ambient();
    if !window.contains(a + 1) || !window.contains(b + n as i64) {
        return Err(DensityError::WindowTooSmall { index: w });
    }
    let counter = Counter::new(set);
    let range_count = |lo: i64, hi: i64| counter.count(&Member::Range(lo, hi), w);
    let mut lhs = 0;
    for m in a..=b {
        lhs += range_count(m + 1, m + n as i64)?;
    }
    let mut rhs = 0;
    for i in 1..=n as i64 {
        rhs += range_count(a + i, b + i)?;
    }
    Ok(AveragingReport {
        density,
        n,
        witness_m,
        count,
        holds,
        identity: (lhs, rhs),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureApprox<E> {
    pub requests: Vec<Vec<E>>,
    /// Diagonal indices `F′_0 … F′_depth`.
    pub subseq_indices: Vec<usize>,
    /// Survivors after stage 0 and after the last stage.
    pub first_stage: Vec<usize>,
    pub last_stage: Vec<usize>,
    pub values: Vec<Rational>,
    /// Value of `A` itself; equals its upper density.
    pub base_value: Rational,
    pub depth: usize,
}

impl<E> MeasureApprox<E> {
    pub fn final_index(&self) -> usize {
        *self.subseq_indices.last().expect("stage 0 always exists")
    }
}

/// `g₁·A ∩ … ∩ g_r·A` and the region where every translate is fully determined.
pub fn translate_intersection<A: Ambient>(set: &Subset<A>, gs: &[A::Elem]) -> (Subset<A>, Subset<A>) {
    let mut out = Subset::full(set.ambient().clone());
    let mut region = Subset::full(set.ambient().clone());
    let full = region.clone();
    for &g in gs {
        out = out.intersection(&set.translate(g).set);
        region = region.intersection(&full.translate(g).set);
    }
    (out, region)
}

/// Frequency of an arbitrary set on `F_n`.
pub fn frequency_at<A: Ambient>(set: &Subset<A>, family: &FolnerFamily, n: usize) -> Result<Rational, DensityError> {
    let member = family.member(set.ambient(), n)?;
    if member.is_empty() {
        return Err(DensityError::InvalidFamily(format!("F_{n} is empty")));
    }
    Ok(ratio(Counter::new(set).count(&member, n)?, member.len()))
}

/// Finite-depth diagonal construction of a translation-invariant measure.
pub fn berg_measure_approx<A: Ambient>(
    set: &Subset<A>,
    requests: &[Vec<A::Elem>],
    family: &FolnerFamily,
    max_index: usize,
    depth: usize,
) -> Result<MeasureApprox<A::Elem>, DensityError> {
    if requests.len() > MAX_REQUESTS {
        return Err(DensityError::TooManyRequests {
            count: requests.len(),
            limit: MAX_REQUESTS,
        });
    }
    if depth < requests.len() {
        return Err(DensityError::DepthInsufficient {
            depth,
            needed: requests.len(),
        });
    }
    let base = tail_frequencies(set, family, max_index)?;
    let mut per_request = Vec::with_capacity(requests.len());
    for gs in requests {
        let (s, region) = translate_intersection(set, gs);
        let region_counter = Counter::new(&region);
        let counter = Counter::new(&s);
        let mut freqs = Vec::with_capacity(base.len());
        for &(n, _) in &base {
            let member = family.member(set.ambient(), n)?;
            if region_counter.count(&member, n)? != member.len() {
                return Err(DensityError::WindowTooSmall { index: n });
            }
            freqs.push(ratio(counter.count(&member, n)?, member.len()));
        }
        per_request.push(freqs);
    }

    let argmax = |positions: &[usize], freq: &dyn Fn(usize) -> Rational| -> Vec<usize> {
        let best = positions.iter().map(|&p| freq(p)).max().expect("nonempty survivors");
        positions.iter().copied().filter(|&p| freq(p) == best).collect()
    };
    let all: Vec<usize> = (0..base.len()).collect();
    let mut survivors = argmax(&all, &|p| base[p].1);
    let first_stage: Vec<usize> = survivors.iter().map(|&p| base[p].0).collect();
    let mut diagonal = vec![base[survivors[0]].0];
    for s in 1..=depth {
        if !requests.is_empty() {
            let j = (s - 1) % requests.len();
            survivors = argmax(&survivors, &|p| per_request[j][p]);
        }
        diagonal.push(base[survivors[s.min(survivors.len() - 1)]].0);
    }
    let last = *diagonal.last().unwrap();
    let position = last - base[0].0;
    Ok(MeasureApprox {
        requests: requests.to_vec(),
        subseq_indices: diagonal,
        first_stage,
        last_stage: survivors.iter().map(|&p| base[p].0).collect(),
        values: per_request.iter().map(|f| f[position]).collect(),
        base_value: base[position].1,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_group;
    use crate::sets::IntWindow;
    use num_traits::Signed;
    use std::sync::Arc;

    fn window(lo: i64, hi: i64) -> IntWindow {
        IntWindow::new(lo, hi).unwrap()
    }

    #[test]
    fn defects() {
        let w = window(-100, 100);
        let f = FolnerFamily::Intervals { max_index: 50 };
        assert_eq!(folner_defect(&w, &f, 0, 10).unwrap(), Rational::from_integer(0));
        assert_eq!(folner_defect(&w, &f, 3, 10).unwrap(), Rational::new(3, 21));
        assert_eq!(folner_defect(&w, &f, -4, 10).unwrap(), Rational::new(4, 21));
        let g = Arc::new(build_group("alt:4").unwrap());
        for x in 0..12 {
            assert_eq!(folner_defect(&g, &FolnerFamily::WholeGroup, x, 1).unwrap(), Rational::from_integer(0));
        }
        assert!(matches!(
            folner_defect(&w, &f, 0, 51),
            Err(DensityError::IndexOutOfFamily { index: 51, max: 50 })
        ));
    }

    #[test]
    fn periodic_upper_density() {
        let w = window(-2000, 2000);
        let a = Subset::from_predicate(w, |x| x.rem_euclid(7) == 3);
        let r = upper_density(&a, &FolnerFamily::Intervals { max_index: 1000 }, 1000, DensityMode::Upper).unwrap();
        let n = r.witness as usize;
        let slack = ratio(1, 2 * n + 1);
        assert!((r.value - Rational::new(1, 7)).abs() <= slack);
        let full = Subset::full(window(-50, 50));
        let r = upper_density(&full, &FolnerFamily::Intervals { max_index: 50 }, 50, DensityMode::Upper).unwrap();
        assert_eq!(r.value, Rational::from_integer(1));
        assert!(matches!(
            upper_density(&full, &FolnerFamily::Intervals { max_index: 60 }, 60, DensityMode::Upper),
            Err(DensityError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn squares_are_sparse() {
        let a = Subset::from_predicate(window(0, 1_000_000), |x| {
            let r = (x as f64).sqrt() as i64;
            (r - 1..=r + 1).any(|s| s >= 0 && s * s == x)
        });
        let starts = vec![0; 1000];
        let r = upper_density(&a, &FolnerFamily::Shifted { starts }, 1000, DensityMode::Upper).unwrap();
        // Direct count: squares in [0, n] number ⌊√n⌋ + 1.
        let oracle = (500..=1000usize)
            .map(|n| ratio((n as f64).sqrt() as usize + 1, n + 1))
            .max()
            .unwrap();
        assert_eq!(r.value, oracle);
        assert!(r.value <= Rational::new(5, 100));
    }

    #[test]
    fn banach_examples() {
        let evens = Subset::from_predicate(window(0, 1000), |x| x % 2 == 0);
        for n in [2, 10, 100] {
            assert_eq!(banach_density_windowed(&evens, n).unwrap().value, Rational::new(1, 2));
        }
        let block = Subset::from_predicate(window(0, 1000), |x| (100..200).contains(&x));
        let r = banach_density_windowed(&block, 50).unwrap();
        assert_eq!(r.value, Rational::from_integer(1));
        assert_eq!(r.witness, 99);
    }

    #[test]
    fn averaging_examples() {
        let mult3 = Subset::from_predicate(window(0, 3000), |x| x % 3 == 0);
        let f = FolnerFamily::Shifted { starts: vec![0; 2000] };
        let r = averaging_check(&mult3, &f, 2000, 30).unwrap();
        assert_eq!(r.count, 10);
        assert!(r.holds);
        assert_eq!(r.identity.0, r.identity.1);

        let empty = Subset::empty(window(0, 3000));
        let r = averaging_check(&empty, &f, 2000, 30).unwrap();
        assert!(r.holds);
        assert_eq!(r.density.value, Rational::from_integer(0));
    }

    #[test]
    fn measure_examples() {
        let sets: Vec<Vec<i64>> = (1..=20).map(|n| (-2 * n..2 * n).collect()).collect();
        let f = FolnerFamily::explicit(sets);
        let evens = Subset::from_predicate(window(-100, 100), |x| x % 2 == 0);
        let m = berg_measure_approx(&evens, &[vec![0], vec![0, 2], vec![0, 1]], &f, 20, 3).unwrap();
        assert_eq!(m.values, vec![Rational::new(1, 2), Rational::new(1, 2), Rational::from_integer(0)]);
        assert_eq!(m.base_value, Rational::new(1, 2));

        let sets: Vec<Vec<i64>> = (1..=20).map(|n| (-5 * n..5 * n).collect()).collect();
        let f = FolnerFamily::explicit(sets);
        let a = Subset::from_predicate(window(-200, 200), |x| x.rem_euclid(5) <= 1);
        let m = berg_measure_approx(&a, &[vec![0, 1]], &f, 20, 1).unwrap();
        assert_eq!(m.values, vec![Rational::new(1, 5)]);

        let g = Arc::new(build_group("sym:3").unwrap());
        let full = Subset::full(g.clone());
        let m = berg_measure_approx(&full, &[vec![1], vec![2, 3]], &FolnerFamily::WholeGroup, 1, 2).unwrap();
        assert!(m.values.iter().all(|v| *v == Rational::from_integer(1)));
    }

    #[test]
    fn measure_errors() {
        let f = FolnerFamily::Intervals { max_index: 10 };
        let a = Subset::full(window(-10, 10));
        assert!(matches!(
            berg_measure_approx(&a, &[vec![0], vec![1]], &f, 10, 1),
            Err(DensityError::DepthInsufficient { depth: 1, needed: 2 })
        ));
        assert!(matches!(
            berg_measure_approx(&a, &[vec![3]], &f, 10, 1),
            Err(DensityError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn family_parsing() {
        let f = FolnerFamily::parse_explicit("0..2\n# c\n-1, 5 7\n", "f.txt").unwrap();
        assert_eq!(f, FolnerFamily::Explicit { sets: vec![vec![0, 1, 2], vec![-1, 5, 7]] });
        assert!(f.validate(&window(-10, 10)).is_err());
        let e = FolnerFamily::parse_shifted("1\nx\n", "s.txt").unwrap_err();
        assert_eq!(e.to_string(), "s.txt:2: not an integer: `x`");
        assert_eq!(FolnerFamily::from_spec("intervals:7").unwrap(), FolnerFamily::Intervals { max_index: 7 });
        assert_eq!(FolnerFamily::from_spec("whole-group").unwrap(), FolnerFamily::WholeGroup);
        assert!(FolnerFamily::from_spec("bogus").is_err());
    }
}
