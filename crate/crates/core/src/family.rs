//! Bitmask set families.
//!
//! A member set is a single `u64`: bit `k - 1` is set exactly when element
//! `k` is present. Families keep their members sorted ascending by mask value
//! with no duplicates, so equality and fingerprints are canonical.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{BitAnd, BitOr, BitOrAssign, Not, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest element a family can hold.
pub const MAX_ELEMENT: u8 = 64;

/// An element of the ground set, in `1..=64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(u8);

impl ElementId {
    pub fn new(value: u8) -> Result<Self> {
        if value == 0 || value > MAX_ELEMENT {
            return Err(Error::input(format!(
                "element {value} outside 1..={MAX_ELEMENT}"
            )));
        }
        Ok(ElementId(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn bit(self) -> u64 {
        1u64 << (self.0 - 1)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ElementId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for ElementId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        ElementId::new(v).map_err(serde::de::Error::custom)
    }
}

/// A subset of `{1, ..., 64}` packed into one machine word.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetMask(u64);

impl SetMask {
    pub const EMPTY: SetMask = SetMask(0);

    pub const fn from_bits(bits: u64) -> Self {
        SetMask(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `[n] = {1, ..., n}`.
    pub fn full(n: u32) -> Self {
        assert!(n <= MAX_ELEMENT as u32, "ground set larger than 64");
        if n == 64 {
            SetMask(u64::MAX)
        } else {
            SetMask((1u64 << n) - 1)
        }
    }

    pub fn singleton(k: ElementId) -> Self {
        SetMask(k.bit())
    }

    pub fn from_elements<I: IntoIterator<Item = u8>>(elements: I) -> Result<Self> {
        let mut bits = 0u64;
        for e in elements {
            bits |= ElementId::new(e)?.bit();
        }
        Ok(SetMask(bits))
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, k: ElementId) -> bool {
        self.0 & k.bit() != 0
    }

    pub fn is_subset_of(self, other: SetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint_from(self, other: SetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn with(self, k: ElementId) -> Self {
        SetMask(self.0 | k.bit())
    }

    pub fn without(self, k: ElementId) -> Self {
        SetMask(self.0 & !k.bit())
    }

    pub fn min_element(self) -> Option<ElementId> {
        (self.0 != 0).then(|| ElementId(self.0.trailing_zeros() as u8 + 1))
    }

    pub fn max_element(self) -> Option<ElementId> {
        (self.0 != 0).then(|| ElementId(64 - self.0.leading_zeros() as u8))
    }

    /// Elements in ascending order.
    pub fn elements(self) -> Elements {
        Elements(self.0)
    }

    /// The `count` smallest elements (or all of them if there are fewer).
    pub fn smallest(self, count: usize) -> SetMask {
        self.elements()
            .take(count)
            .fold(SetMask::EMPTY, |acc, k| acc.with(k))
    }
}

pub struct Elements(u64);

impl Iterator for Elements {
    type Item = ElementId;

    fn next(&mut self) -> Option<ElementId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(ElementId(tz as u8 + 1))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elements {}

impl BitOr for SetMask {
    type Output = SetMask;
    fn bitor(self, rhs: SetMask) -> SetMask {
        SetMask(self.0 | rhs.0)
    }
}

impl BitOrAssign for SetMask {
    fn bitor_assign(&mut self, rhs: SetMask) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for SetMask {
    type Output = SetMask;
    fn bitand(self, rhs: SetMask) -> SetMask {
        SetMask(self.0 & rhs.0)
    }
}

/// Set difference.
impl Sub for SetMask {
    type Output = SetMask;
    fn sub(self, rhs: SetMask) -> SetMask {
        SetMask(self.0 & !rhs.0)
    }
}

impl Not for SetMask {
    type Output = SetMask;
    fn not(self) -> SetMask {
        SetMask(!self.0)
    }
}

/// Member syntax of the family text format: `0` for the empty set,
/// otherwise a comma-separated ascending element list.
impl fmt::Display for SetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, k) in self.elements().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

impl FromStr for SetMask {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "0" {
            return Ok(SetMask::EMPTY);
        }
        let mut bits = 0u64;
        let mut prev = 0u8;
        for tok in s.split(',') {
            if tok.is_empty() {
                return Err(format!("empty element in member `{s}`"));
            }
            if !tok.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("invalid element `{tok}` in member `{s}`"));
            }
            let v: u8 = tok
                .parse()
                .ok()
                .filter(|v| (1..=MAX_ELEMENT).contains(v))
                .ok_or_else(|| format!("element `{tok}` outside 1..={MAX_ELEMENT}"))?;
            if v <= prev {
                return Err(format!("member `{s}` is not strictly ascending"));
            }
            prev = v;
            bits |= 1u64 << (v - 1);
        }
        Ok(SetMask(bits))
    }
}

impl Serialize for SetMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SetMask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// 64-bit digest of a family's canonical member list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FamilyFingerprint(pub u64);

impl FamilyFingerprint {
    fn of_members(members: &[SetMask]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update((members.len() as u64).to_le_bytes());
        for m in members {
            hasher.update(m.bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        FamilyFingerprint(u64::from_be_bytes(head))
    }
}

impl fmt::Display for FamilyFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for FamilyFingerprint {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        u64::from_str_radix(s, 16)
            .map(FamilyFingerprint)
            .map_err(|e| format!("bad fingerprint `{s}`: {e}"))
    }
}

impl Serialize for FamilyFingerprint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FamilyFingerprint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-element occurrence counts of a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyProfile {
    counts: [usize; 64],
    m: usize,
}

impl FrequencyProfile {
    pub fn count(&self, k: ElementId) -> usize {
        self.counts[k.get() as usize - 1]
    }

    /// Number of members of the profiled family.
    pub fn member_count(&self) -> usize {
        self.m
    }

    pub fn high(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Elements attaining [`high`](Self::high); empty when the base set is.
    pub fn arg_high(&self) -> SetMask {
        let high = self.high();
        if high == 0 {
            return SetMask::EMPTY;
        }
        self.iter()
            .filter(|&(_, c)| c == high)
            .fold(SetMask::EMPTY, |acc, (k, _)| acc.with(k))
    }

    /// Nonzero counts, ascending by element.
    pub fn iter(&self) -> impl Iterator<Item = (ElementId, usize)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, &c)| (ElementId(i as u8 + 1), c))
    }

    /// Sum of all element frequencies, i.e. the total member size.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// An immutable family of distinct sets over a universe of at most 64
/// elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetFamily {
    universe: SetMask,
    members: Vec<SetMask>,
}

impl SetFamily {
    /// Sorts and deduplicates `members`, rejecting any that leave `universe`.
    pub fn new<I: IntoIterator<Item = SetMask>>(members: I, universe: SetMask) -> Result<Self> {
        let mut members: Vec<SetMask> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|m| !m.is_subset_of(universe)) {
            return Err(Error::Validation { mask: bad, universe });
        }
        members.sort_unstable();
        members.dedup();
        Ok(SetFamily { universe, members })
    }

    pub(crate) fn from_sorted(universe: SetMask, members: Vec<SetMask>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(members.iter().all(|m| m.is_subset_of(universe)));
        SetFamily { universe, members }
    }

    fn from_unsorted(universe: SetMask, mut members: Vec<SetMask>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self::from_sorted(universe, members)
    }

    pub fn empty(universe: SetMask) -> Self {
        SetFamily { universe, members: Vec::new() }
    }

    /// `2^[n]` over universe `[n]`.
    pub fn power_set(n: u32) -> Self {
        assert!(n <= 24, "power set too large to materialize");
        let members = (0..1u64 << n).map(SetMask::from_bits).collect();
        SetFamily { universe: SetMask::full(n), members }
    }

    pub fn universe(&self) -> SetMask {
        self.universe
    }

    pub fn members(&self) -> &[SetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True for the family `{∅}`.
    pub fn is_trivial(&self) -> bool {
        self.members == [SetMask::EMPTY]
    }

    pub fn contains(&self, set: SetMask) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    /// Union of all members.
    pub fn base_set(&self) -> SetMask {
        self.members.iter().fold(SetMask::EMPTY, |acc, &m| acc | m)
    }

    pub fn fingerprint(&self) -> FamilyFingerprint {
        FamilyFingerprint::of_members(&self.members)
    }

    /// Same members over a larger universe.
    pub fn widen(&self, universe: SetMask) -> Result<Self> {
        if !self.universe.is_subset_of(universe) {
            return Err(Error::Validation { mask: self.universe, universe });
        }
        Ok(SetFamily { universe, members: self.members.clone() })
    }

    /// Smallest union-closed superfamily.
    pub fn union_closure(&self) -> SetFamily {
        let mut seen: HashSet<SetMask> = HashSet::with_capacity(self.members.len() * 2);
        let mut closed: Vec<SetMask> = Vec::with_capacity(self.members.len() * 2);
        for &a in &self.members {
            if seen.insert(a) {
                closed.push(a);
            }
            let snapshot = closed.len();
            for i in 0..snapshot {
                let u = closed[i] | a;
                if seen.insert(u) {
                    closed.push(u);
                }
            }
        }
        Self::from_unsorted(self.universe, closed)
    }

    pub fn is_union_closed(&self) -> bool {
        let ms = &self.members;
        for (i, &a) in ms.iter().enumerate() {
            for &b in &ms[i + 1..] {
                let u = a | b;
                // a ∪ b ≥ b numerically, so only the tail needs searching
                if u != b && ms.binary_search(&u).is_err() {
                    return false;
                }
            }
        }
        true
    }

    fn check_in_universe(&self, b: SetMask) -> Result<()> {
        if b.is_subset_of(self.universe) {
            Ok(())
        } else {
            Err(Error::Validation { mask: b, universe: self.universe })
        }
    }

    /// Members containing all of `b`.
    pub fn restrict_contains(&self, b: SetMask) -> Result<SetFamily> {
        self.check_in_universe(b)?;
        let members = self.members.iter().copied().filter(|m| b.is_subset_of(*m)).collect();
        Ok(Self::from_sorted(self.universe, members))
    }

    /// Members disjoint from `b`.
    pub fn restrict_disjoint(&self, b: SetMask) -> Result<SetFamily> {
        self.check_in_universe(b)?;
        let members = self.members.iter().copied().filter(|m| m.is_disjoint_from(b)).collect();
        Ok(Self::from_sorted(self.universe, members))
    }

    /// `|𝒜_B|` without materializing the subfamily.
    pub fn count_containing(&self, b: SetMask) -> usize {
        self.members.iter().filter(|m| b.is_subset_of(**m)).count()
    }

    /// `|𝒜_B̄|` without materializing the subfamily.
    pub fn count_disjoint(&self, b: SetMask) -> usize {
        self.members.iter().filter(|m| m.is_disjoint_from(b)).count()
    }

    pub fn frequency_profile(&self) -> FrequencyProfile {
        let mut counts = [0usize; 64];
        for m in &self.members {
            for k in m.elements() {
                counts[k.get() as usize - 1] += 1;
            }
        }
        FrequencyProfile { counts, m: self.members.len() }
    }

    /// Membership pattern of every base-set element as a bit vector over
    /// member indices.
    fn membership_patterns(&self) -> Vec<(ElementId, Vec<u64>)> {
        let words = self.members.len().div_ceil(64);
        self.base_set()
            .elements()
            .map(|k| {
                let mut pattern = vec![0u64; words];
                for (i, m) in self.members.iter().enumerate() {
                    if m.contains(k) {
                        pattern[i / 64] |= 1 << (i % 64);
                    }
                }
                (k, pattern)
            })
            .collect()
    }

    pub fn is_separating(&self) -> bool {
        let patterns = self.membership_patterns();
        let mut seen = HashSet::with_capacity(patterns.len());
        patterns.into_iter().all(|(_, p)| seen.insert(p))
    }

    /// Collapses elements with identical membership patterns to one
    /// representative (the smallest id of the class), then relabels the
    /// representatives to `1..=n'` in ascending order.
    pub fn separating_quotient(&self) -> SetFamily {
        let mut class_of: HashMap<Vec<u64>, ElementId> = HashMap::new();
        let mut reps = SetMask::EMPTY;
        for (k, p) in self.membership_patterns() {
            class_of.entry(p).or_insert_with(|| {
                reps = reps.with(k);
                k
            });
        }
        let reps: Vec<ElementId> = reps.elements().collect();
        let members = self
            .members
            .iter()
            .map(|&m| {
                reps.iter()
                    .enumerate()
                    .filter(|(_, r)| m.contains(**r))
                    .fold(0u64, |acc, (i, _)| acc | 1 << i)
            })
            .map(SetMask::from_bits)
            .collect();
        Self::from_unsorted(SetMask::full(reps.len() as u32), members)
    }

    /// `{X ∪ Y : X ∈ self, Y ∈ other}`.
    pub fn join(&self, other: &SetFamily) -> Result<SetFamily> {
        if self.universe != other.universe {
            return Err(Error::UniverseMismatch { left: self.universe, right: other.universe });
        }
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &x in &self.members {
            for &y in &other.members {
                out.push(x | y);
            }
        }
        Ok(Self::from_unsorted(self.universe, out))
    }

    /// Joins with `{∅, {z}}` for a fresh element `z` one past the largest
    /// base-set element. The universe is widened to include `z`.
    pub fn extend_with_new_element(&self) -> Result<(SetFamily, ElementId)> {
        if self.is_empty() {
            return Err(Error::input("cannot extend the empty family"));
        }
        let next = self.base_set().max_element().map_or(1, |k| k.get() + 1);
        if next > MAX_ELEMENT {
            return Err(Error::Capacity(format!(
                "no room for element {next}; universe holds at most {MAX_ELEMENT}"
            )));
        }
        let z = ElementId(next);
        let universe = self.universe.with(z);
        let pair = SetFamily::from_sorted(universe, vec![SetMask::EMPTY, SetMask::singleton(z)]);
        Ok((self.widen(universe)?.join(&pair)?, z))
    }

    /// Removes `k` from every member, merging duplicates.
    pub fn delete_element(&self, k: ElementId) -> SetFamily {
        let members = self.members.iter().map(|m| m.without(k)).collect();
        Self::from_unsorted(self.universe, members)
    }

    /// True when the members are exactly all subsets of the base set.
    /// `{∅}` counts as the power set of the empty set.
    pub fn is_power_set(&self) -> bool {
        let b = self.base_set().len();
        b < 63 && self.members.len() as u64 == 1u64 << b
    }
}

/// A list of sets where repetition is allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiFamily {
    universe: SetMask,
    members: Vec<SetMask>,
}

impl MultiFamily {
    pub fn new(members: Vec<SetMask>, universe: SetMask) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|m| !m.is_subset_of(universe)) {
            return Err(Error::Validation { mask: bad, universe });
        }
        Ok(MultiFamily { universe, members })
    }

    pub fn universe(&self) -> SetMask {
        self.universe
    }

    pub fn members(&self) -> &[SetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self) -> SetMask {
        self.members.iter().fold(SetMask::EMPTY, |acc, &m| acc | m)
    }

    pub fn fingerprint(&self) -> FamilyFingerprint {
        FamilyFingerprint::of_members(&self.members)
    }
}

#[cfg(test)]
pub(crate) fn fam(sets: &[&[u8]]) -> SetFamily {
    let members: Vec<SetMask> = sets
        .iter()
        .map(|s| SetMask::from_elements(s.iter().copied()).unwrap())
        .collect();
    let universe = SetMask::full(
        members.iter().fold(SetMask::EMPTY, |a, &m| a | m).max_element().map_or(0, |k| k.get() as u32),
    );
    SetFamily::new(members, universe).unwrap()
}

#[cfg(test)]
pub(crate) fn set(elements: &[u8]) -> SetMask {
    SetMask::from_elements(elements.iter().copied()).unwrap()
}
