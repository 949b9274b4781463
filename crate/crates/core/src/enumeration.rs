//! Exhaustive and random generation of union-closed families.
//!
//! Exhaustive mode scans every subfamily of `2^[n]`: candidate index `i`
//! has member `j` (as a mask) exactly when bit `j` of `i` is set, so the
//! output order is ascending candidate index.

use std::fs;
use std::io;
use std::path::Path;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{SetFamily, SetMask};

pub const MAX_EXHAUSTIVE_N: u32 = 5;

/// Candidate indices per checkpointed chunk.
pub const CHUNK_SIZE: u64 = 1 << 24;

pub const CANONICAL_MAX_BASE: u32 = 8;

/// Generators drawn when `n` is too large to sample every subset.
pub const RANDOM_GENERATOR_CAP: usize = 16;

/// Above this, random generation draws a bounded generator list instead of
/// sampling each subset.
pub const DENSE_SAMPLING_MAX_N: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationSpec {
    pub n: u32,
    pub require_full_base: bool,
    pub exclude_empty_member: bool,
}

impl EnumerationSpec {
    /// Full base, `∅` allowed.
    pub fn new(n: u32) -> Result<Self> {
        if !(1..=MAX_EXHAUSTIVE_N).contains(&n) {
            return Err(Error::Size(format!(
                "exhaustive enumeration supports 1 <= n <= {MAX_EXHAUSTIVE_N}, got {n}; use `random` sampling instead"
            )));
        }
        Ok(EnumerationSpec { n, require_full_base: true, exclude_empty_member: false })
    }

    pub fn without_empty_member(mut self) -> Self {
        self.exclude_empty_member = true;
        self
    }

    pub fn allow_partial_base(mut self) -> Self {
        self.require_full_base = false;
        self
    }

    /// `2^(2^n)`.
    pub fn candidate_count(&self) -> u64 {
        1u64 << (1u32 << self.n)
    }

    fn universe(&self) -> SetMask {
        SetMask::full(self.n)
    }

    /// Whether candidate `index` is a family the spec admits. The empty
    /// family and `{∅}` are never admitted.
    pub fn accepts(&self, index: u64) -> bool {
        if index <= 1 {
            return false;
        }
        if self.exclude_empty_member && index & 1 == 1 {
            return false;
        }
        let top = (1u64 << self.n) - 1;
        if self.require_full_base && index >> top & 1 == 0 {
            // a closed family with full base contains [n]
            return false;
        }
        let mut base = 0u64;
        let mut rest = index;
        while rest != 0 {
            let a = rest.trailing_zeros() as u64;
            rest &= rest - 1;
            base |= a;
            let mut others = rest;
            while others != 0 {
                let b = others.trailing_zeros() as u64;
                others &= others - 1;
                if index >> (a | b) & 1 == 0 {
                    return false;
                }
            }
        }
        !self.require_full_base || base == top
    }

    pub fn family_at(&self, index: u64) -> SetFamily {
        let mut members = Vec::with_capacity(index.count_ones() as usize);
        let mut rest = index;
        while rest != 0 {
            members.push(SetMask::from_bits(rest.trailing_zeros() as u64));
            rest &= rest - 1;
        }
        SetFamily::from_sorted(self.universe(), members)
    }

    /// Accepted indices in `range`, ascending, scanned in parallel.
    pub fn scan(&self, range: std::ops::Range<u64>) -> Vec<u64> {
        const PIECE: u64 = 1 << 14;
        let start = range.start;
        let pieces = (range.end.saturating_sub(start)).div_ceil(PIECE);
        (0..pieces)
            .into_par_iter()
            .flat_map_iter(|p| {
                let lo = start + p * PIECE;
                let hi = (lo + PIECE).min(range.end);
                (lo..hi).filter(|&i| self.accepts(i))
            })
            .collect()
    }
}

/// Streams accepted families in ascending candidate order, scanning one
/// chunk at a time.
pub struct UnionClosedFamilies {
    spec: EnumerationSpec,
    next_chunk_start: u64,
    buffered: std::vec::IntoIter<u64>,
}

impl Iterator for UnionClosedFamilies {
    type Item = SetFamily;

    fn next(&mut self) -> Option<SetFamily> {
        loop {
            if let Some(i) = self.buffered.next() {
                return Some(self.spec.family_at(i));
            }
            let total = self.spec.candidate_count();
            if self.next_chunk_start >= total {
                return None;
            }
            let end = (self.next_chunk_start + CHUNK_SIZE).min(total);
            self.buffered = self.spec.scan(self.next_chunk_start..end).into_iter();
            self.next_chunk_start = end;
        }
    }
}

pub fn enumerate_union_closed(spec: EnumerationSpec) -> Result<UnionClosedFamilies> {
    EnumerationSpec::new(spec.n)?;
    Ok(UnionClosedFamilies { spec, next_chunk_start: 0, buffered: Vec::new().into_iter() })
}

/// Reads a `last_completed_index` checkpoint; absent file means a fresh run.
pub fn read_checkpoint(path: &Path) -> Result<Option<u64>> {
    match fs::read_to_string(path) {
        Ok(text) => text
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::input(format!("checkpoint {} is not an index", path.display()))),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_checkpoint(path: &Path, last: u64) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, format!("{last}\n"))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs the scan chunk by chunk, handing each accepted family to `sink` and
/// recording the last fully processed candidate index after every chunk. A
/// rerun with the same checkpoint resumes after that index. Returns the
/// number of families emitted in this invocation.
pub fn run_checkpointed<F>(spec: EnumerationSpec, checkpoint: &Path, mut sink: F) -> Result<u64>
where
    F: FnMut(SetFamily) -> Result<()>,
{
    EnumerationSpec::new(spec.n)?;
    let total = spec.candidate_count();
    let mut start = read_checkpoint(checkpoint)?.map_or(0, |last| last + 1);
    let mut emitted = 0;
    while start < total {
        let end = (start + CHUNK_SIZE).min(total);
        for i in spec.scan(start..end) {
            sink(spec.family_at(i))?;
            emitted += 1;
        }
        write_checkpoint(checkpoint, end - 1)?;
        start = end;
    }
    Ok(emitted)
}

fn check_random_args(n: u32, density: f64) -> Result<()> {
    if !(1..=64).contains(&n) {
        return Err(Error::Size(format!("random families need 1 <= n <= 64, got {n}")));
    }
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::Domain(format!("density must lie in (0, 1), got {density}")));
    }
    Ok(())
}

fn random_subset(rng: &mut ChaCha8Rng, n: u32) -> SetMask {
    SetMask::from_bits(rng.random::<u64>()) & SetMask::full(n)
}

/// Raw random members: each subset independently for small `n`, otherwise
/// a bounded list of uniform subsets.
fn random_members(rng: &mut ChaCha8Rng, n: u32, density: f64) -> Vec<SetMask> {
    if n <= DENSE_SAMPLING_MAX_N {
        (0..1u64 << n).filter(|_| rng.random_bool(density)).map(SetMask::from_bits).collect()
    } else {
        let expected = (density * 2f64.powi(n.min(32) as i32)).ceil() as usize;
        let count = expected.clamp(1, RANDOM_GENERATOR_CAP);
        (0..count).map(|_| random_subset(rng, n)).collect()
    }
}

/// Random union-closed family with base set `[n]`: sampled members, closed
/// under union, with `[n]` added.
pub fn random_union_closed(n: u32, density: f64, seed: u64) -> Result<SetFamily> {
    check_random_args(n, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = random_members(&mut rng, n, density);
    members.push(SetMask::full(n));
    Ok(SetFamily::new(members, SetMask::full(n))?.union_closure())
}

/// Random family over `[n]` with no closure applied. May be empty.
pub fn random_family(n: u32, density: f64, seed: u64) -> Result<SetFamily> {
    check_random_args(n, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SetFamily::new(random_members(&mut rng, n, density), SetMask::full(n))
}

/// Relabels the base set onto `[k]` by the bijection giving the
/// lexicographically least sorted member list.
pub fn canonical_form(family: &SetFamily) -> Result<SetFamily> {
    let base: Vec<u8> = family.base_set().elements().map(|e| e.get()).collect();
    let k = base.len();
    if k as u32 > CANONICAL_MAX_BASE {
        return Err(Error::Size(format!("canonical form needs a base set of at most {CANONICAL_MAX_BASE} elements, got {k}")));
    }
    let relabel = |perm: &[usize]| -> Vec<SetMask> {
        let mut out: Vec<SetMask> = family
            .members()
            .iter()
            .map(|m| {
                let bits = base
                    .iter()
                    .zip(perm)
                    .filter(|(&b, _)| m.bits() >> (b - 1) & 1 == 1)
                    .fold(0u64, |acc, (_, &p)| acc | 1 << p);
                SetMask::from_bits(bits)
            })
            .collect();
        out.sort_unstable();
        out
    };
    let best = (0..k)
        .permutations(k)
        .map(|perm| relabel(&perm))
        .min()
        .unwrap_or_else(|| family.members().to_vec());
    Ok(SetFamily::from_sorted(SetMask::full(k as u32), best))
}
