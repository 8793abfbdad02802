//! Missingness patterns and the coordinatewise partial order on them.
//!
//! A pattern is a bit-vector over the data coordinates where bit `i` is set
//! when coordinate `i` is observed. Patterns print as strings of `'0'`/`'1'`
//! characters, coordinate 0 first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Hard upper bound on the coordinate count a pattern can carry.
pub const MAX_PATTERN_LEN: usize = 64;

/// Default cap on `d` used by model construction, so that `2^d` stays small.
pub const DEFAULT_MAX_COORDINATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern length mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("invalid pattern string {0:?}: expected only '0' and '1'")]
    Parse(String),
    #[error("pattern length {0} exceeds the supported maximum of {MAX_PATTERN_LEN}")]
    TooLong(usize),
    #[error("pattern set is empty")]
    EmptySet,
    #[error("duplicate pattern {0} in pattern set")]
    Duplicate(MissingnessPattern),
}

/// A missingness pattern `r`: one bit per coordinate, 1 = observed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MissingnessPattern {
    len: u8,
    mask: u64,
}

impl MissingnessPattern {
    pub fn from_bits(bits: &[bool]) -> Result<Self, PatternError> {
        if bits.len() > MAX_PATTERN_LEN {
            return Err(PatternError::TooLong(bits.len()));
        }
        let mask = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |m, (i, _)| m | (1u64 << i));
        Ok(Self {
            len: bits.len() as u8,
            mask,
        })
    }

    /// Builds a pattern from a mask whose bit `i` is coordinate `i`.
    /// Bits at or above `len` are discarded.
    pub fn from_mask(len: usize, mask: u64) -> Result<Self, PatternError> {
        if len > MAX_PATTERN_LEN {
            return Err(PatternError::TooLong(len));
        }
        Ok(Self {
            len: len as u8,
            mask: mask & Self::full_mask(len),
        })
    }

    /// The complete-case pattern `r₁`.
    pub fn all_observed(len: usize) -> Self {
        assert!(len <= MAX_PATTERN_LEN);
        Self {
            len: len as u8,
            mask: Self::full_mask(len),
        }
    }

    /// The pattern `r₀` with nothing observed.
    pub fn none_observed(len: usize) -> Self {
        assert!(len <= MAX_PATTERN_LEN);
        Self {
            len: len as u8,
            mask: 0,
        }
    }

    fn full_mask(len: usize) -> u64 {
        if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_observed(&self, coord: usize) -> bool {
        coord < self.len() && self.mask & (1u64 << coord) != 0
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.is_observed(i))
    }

    /// Coordinates with bit 1, ascending.
    pub fn observed_coords(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_observed(i)).collect()
    }

    /// Coordinates with bit 0, ascending.
    pub fn missing_coords(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_observed(i)).collect()
    }

    /// The dot product `r·r`.
    pub fn observed_count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_all_observed(&self) -> bool {
        self.mask == Self::full_mask(self.len())
    }

    pub fn is_none_observed(&self) -> bool {
        self.mask == 0
    }

    /// Bitwise negation `¬r`.
    pub fn complement(&self) -> Self {
        Self {
            len: self.len,
            mask: !self.mask & Self::full_mask(self.len()),
        }
    }

    /// `self ≤ₚ other`: everything observed under `self` is observed under `other`.
    pub fn leq_p(&self, other: &Self) -> Result<bool, PatternError> {
        self.check_len(other)?;
        Ok(self.mask & !other.mask == 0)
    }

    /// Strict order `self <ₚ other`.
    pub fn lt_p(&self, other: &Self) -> Result<bool, PatternError> {
        Ok(self != other && self.leq_p(other)?)
    }

    pub(crate) fn check_len(&self, other: &Self) -> Result<(), PatternError> {
        if self.len != other.len {
            return Err(PatternError::Dimension {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }

    /// Every pattern of length `len`, all-ones first, then descending mask.
    pub fn enumerate_all(len: usize) -> impl Iterator<Item = Self> {
        assert!(len < MAX_PATTERN_LEN, "cannot enumerate 2^{len} patterns");
        (0..(1u64 << len))
            .rev()
            .map(move |mask| Self::from_mask(len, mask).expect("len checked"))
    }
}

impl fmt::Display for MissingnessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for MissingnessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r\"{self}\"")
    }
}

impl FromStr for MissingnessPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(PatternError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for MissingnessPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MissingnessPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The pattern set `ℛ = {r₁, …, r_k}`.
///
/// Order is insertion order, except that the all-ones pattern, when present,
/// is moved to index 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PatternSet {
    patterns: Vec<MissingnessPattern>,
}

impl PatternSet {
    pub fn new(patterns: Vec<MissingnessPattern>) -> Result<Self, PatternError> {
        let first = *patterns.first().ok_or(PatternError::EmptySet)?;
        for (i, p) in patterns.iter().enumerate() {
            first.check_len(p)?;
            if patterns[..i].contains(p) {
                return Err(PatternError::Duplicate(*p));
            }
        }
        let mut patterns = patterns;
        if let Some(pos) = patterns.iter().position(|p| p.is_all_observed()) {
            let ones = patterns.remove(pos);
            patterns.insert(0, ones);
        }
        Ok(Self { patterns })
    }

    /// All `2^d` patterns on `d` coordinates.
    pub fn full(d: usize) -> Self {
        Self {
            patterns: MissingnessPattern::enumerate_all(d).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.patterns.len()
    }

    /// Coordinate count shared by every member.
    pub fn width(&self) -> usize {
        self.patterns[0].len()
    }

    pub fn patterns(&self) -> &[MissingnessPattern] {
        &self.patterns
    }

    pub fn get(&self, index: usize) -> Option<MissingnessPattern> {
        self.patterns.get(index).copied()
    }

    pub fn index_of(&self, r: &MissingnessPattern) -> Option<usize> {
        self.patterns.iter().position(|p| p == r)
    }

    pub fn contains(&self, r: &MissingnessPattern) -> bool {
        self.index_of(r).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MissingnessPattern> {
        self.patterns.iter()
    }

    /// Covering pairs `(lower, upper)` of `≤ₚ` restricted to this set, as
    /// pattern indices sorted by `(lower, upper)`.
    pub fn lattice_edges(&self) -> Vec<(usize, usize)> {
        let ps = &self.patterns;
        let lt = |a: usize, b: usize| ps[a] != ps[b] && ps[a].mask & !ps[b].mask == 0;
        let mut edges = Vec::new();
        for lo in 0..ps.len() {
            for hi in 0..ps.len() {
                if lt(lo, hi) && !(0..ps.len()).any(|m| lt(lo, m) && lt(m, hi)) {
                    edges.push((lo, hi));
                }
            }
        }
        edges
    }

    /// True when the set is totally ordered by `≤ₚ` (monotone missingness).
    pub fn is_chain(&self) -> bool {
        self.patterns.iter().all(|a| {
            self.patterns
                .iter()
                .all(|b| a.mask & !b.mask == 0 || b.mask & !a.mask == 0)
        })
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a MissingnessPattern;
    type IntoIter = std::slice::Iter<'a, MissingnessPattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.patterns.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MissingnessPattern {
        s.parse().unwrap()
    }

    #[test]
    fn leq_p_examples() {
        assert!(p("10").leq_p(&p("11")).unwrap());
        assert!(!p("10").leq_p(&p("01")).unwrap());
        assert!(!p("01").leq_p(&p("10")).unwrap());
        for r in MissingnessPattern::enumerate_all(3) {
            assert!(r.leq_p(&r).unwrap());
        }
    }

    #[test]
    fn leq_p_rejects_length_mismatch() {
        assert_eq!(
            p("10").leq_p(&p("101")),
            Err(PatternError::Dimension { left: 2, right: 3 })
        );
    }

    #[test]
    fn complement_examples() {
        assert_eq!(p("101").complement(), p("010"));
        assert_eq!(p("1111").complement(), p("0000"));
        for r in MissingnessPattern::enumerate_all(4) {
            assert_eq!(r.complement().complement(), r);
            assert_eq!(r.complement().observed_count(), 4 - r.observed_count());
        }
    }

    #[test]
    fn string_form() {
        assert_eq!(p("1101").to_string(), "1101");
        assert_eq!(p("1101").observed_coords(), vec![0, 1, 3]);
        assert_eq!(p("1101").missing_coords(), vec![2]);
        assert!("1x".parse::<MissingnessPattern>().is_err());
        assert_eq!(p("").len(), 0);
    }

    #[test]
    fn pattern_set_puts_all_ones_first() {
        let ps = PatternSet::new(vec![p("10"), p("00"), p("11")]).unwrap();
        assert_eq!(ps.patterns(), &[p("11"), p("10"), p("00")]);
    }

    #[test]
    fn pattern_set_rejects_bad_input() {
        assert_eq!(PatternSet::new(vec![]), Err(PatternError::EmptySet));
        assert_eq!(
            PatternSet::new(vec![p("10"), p("10")]),
            Err(PatternError::Duplicate(p("10")))
        );
        assert!(matches!(
            PatternSet::new(vec![p("10"), p("1")]),
            Err(PatternError::Dimension { .. })
        ));
    }

    #[test]
    fn lattice_edges_chain_and_antichain() {
        let chain = PatternSet::new(vec![p("11"), p("10"), p("00")]).unwrap();
        // 00 -> 10 and 10 -> 11
        assert_eq!(chain.lattice_edges(), vec![(1, 0), (2, 1)]);
        assert!(chain.is_chain());

        let anti = PatternSet::new(vec![p("10"), p("01")]).unwrap();
        assert!(anti.lattice_edges().is_empty());
        assert!(!anti.is_chain());
    }

    #[test]
    fn lattice_edges_square_matches_brute_force() {
        let ps = PatternSet::full(2);
        let pats = ps.patterns();
        // brute force: strict pairs with no element strictly between
        let mut expected = Vec::new();
        for (i, a) in pats.iter().enumerate() {
            for (j, b) in pats.iter().enumerate() {
                let strict = |x: &MissingnessPattern, y: &MissingnessPattern| {
                    x != y && x.bits().zip(y.bits()).all(|(u, v)| u <= v)
                };
                if strict(a, b) && !pats.iter().any(|m| strict(a, m) && strict(m, b)) {
                    expected.push((i, j));
                }
            }
        }
        assert_eq!(expected.len(), 4);
        assert_eq!(ps.lattice_edges(), expected);
    }

    #[test]
    fn order_laws_exhaustive() {
        for d in 1..=4 {
            let all: Vec<_> = MissingnessPattern::enumerate_all(d).collect();
            for a in &all {
                for b in &all {
                    let ab = a.leq_p(b).unwrap();
                    if ab && b.leq_p(a).unwrap() {
                        assert_eq!(a, b);
                    }
                    if ab {
                        assert!(a.observed_count() <= b.observed_count());
                    }
                    for c in &all {
                        if ab && b.leq_p(c).unwrap() {
                            assert!(a.leq_p(c).unwrap());
                        }
                    }
                }
            }
        }
    }
}
