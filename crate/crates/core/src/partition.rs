//! Greedy max-frequency partition of a union-closed family and the size
//! sequence predicates built on it.
//!
//! The family is peeled block by block: pick an element of highest frequency
//! in what remains, move every remaining member containing it into the next
//! block. When only `{∅}` is left it becomes a final, unlabelled block.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::checks::{require_standard, ConjectureId, Verdict};
use crate::error::{Error, Result};
use crate::family::{ElementId, SetFamily, SetMask};

/// Which element of `arg_high` labels the next block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<SetMask>>,
    labels: Vec<Option<ElementId>>,
}

impl Partition {
    pub fn blocks(&self) -> &[Vec<SetMask>] {
        &self.blocks
    }

    /// `None` only for a trailing `{∅}` block.
    pub fn labels(&self) -> &[Option<ElementId>] {
        &self.labels
    }

    /// Block count `w`.
    pub fn width(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> SizeSequence {
        SizeSequence(self.blocks.iter().map(|b| b.len() as u64).collect())
    }

    /// Checks the defining properties against the source family: blocks
    /// cover it disjointly, block `i` holds exactly the residual members
    /// containing `labels[i]`, and that label has maximum residual
    /// frequency.
    pub fn validate(&self, family: &SetFamily) -> std::result::Result<(), String> {
        let mut residual: Vec<SetMask> = family.members().to_vec();
        for (i, (block, label)) in self.blocks.iter().zip(&self.labels).enumerate() {
            match label {
                None => {
                    if i + 1 != self.blocks.len() || block != &[SetMask::EMPTY] || residual != [SetMask::EMPTY] {
                        return Err(format!("unlabelled block {i} must be a final {{∅}}"));
                    }
                    residual.clear();
                }
                Some(k) => {
                    let rest = SetFamily::from_sorted(family.universe(), residual.clone());
                    if !rest.frequency_profile().arg_high().contains(*k) {
                        return Err(format!("label {k} of block {i} is not in arg_high"));
                    }
                    let expect: Vec<SetMask> = residual.iter().copied().filter(|m| m.contains(*k)).collect();
                    if &expect != block {
                        return Err(format!("block {i} is not the residual members containing {k}"));
                    }
                    residual.retain(|m| !m.contains(*k));
                }
            }
        }
        if residual.is_empty() {
            Ok(())
        } else {
            Err(format!("{} members left uncovered", residual.len()))
        }
    }
}

pub fn build_partition(family: &SetFamily, tie_break: TieBreak) -> Result<Partition> {
    require_standard(family)?;
    let universe = family.universe();
    let mut residual = family.members().to_vec();
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    while !residual.is_empty() {
        let arg_high = SetFamily::from_sorted(universe, residual.clone()).frequency_profile().arg_high();
        let label = match tie_break {
            TieBreak::Min => arg_high.min_element(),
            TieBreak::Max => arg_high.max_element(),
        }
        .ok_or_else(|| Error::internal("residual family has no elements but is not {∅}"))?;
        let (block, rest): (Vec<SetMask>, Vec<SetMask>) = residual.into_iter().partition(|m| m.contains(label));
        blocks.push(block);
        labels.push(Some(label));
        residual = rest;
        if residual == [SetMask::EMPTY] {
            blocks.push(vec![SetMask::EMPTY]);
            labels.push(None);
            residual.clear();
        }
    }
    Ok(Partition { blocks, labels })
}

/// How many block subsets to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockCheck {
    /// All `2^w` subsets; `w ≤ 20`.
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

pub const EXHAUSTIVE_MAX_BLOCKS: usize = 20;

fn blocks_union(partition: &Partition, universe: SetMask, subset: u64) -> SetFamily {
    let members = partition
        .blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| subset >> i & 1 == 1)
        .flat_map(|(_, b)| b.iter().copied());
    SetFamily::new(members, universe).expect("blocks stay inside the universe")
}

/// Checks that every union of blocks (or a seeded sample of them) is
/// union-closed. A failure is an internal-consistency failure.
pub fn verify_block_unions(family: &SetFamily, partition: &Partition, mode: BlockCheck) -> Result<Verdict> {
    let w = partition.width();
    let subsets: Vec<u64> = match mode {
        BlockCheck::Exhaustive => {
            if w > EXHAUSTIVE_MAX_BLOCKS {
                return Err(Error::Size(format!(
                    "{w} blocks exceed the exhaustive limit of {EXHAUSTIVE_MAX_BLOCKS}; use sampled mode"
                )));
            }
            (0..1u64 << w).collect()
        }
        BlockCheck::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if w < 64 && (samples as u64) >= 1u64 << w {
                (0..1u64 << w).collect()
            } else {
                let bits = w.min(63);
                let mut out: Vec<u64> = (0..samples)
                    .map(|_| {
                        let take = rand::Rng::random_range(&mut rng, 0..=bits);
                        index::sample(&mut rng, bits, take).iter().fold(0u64, |acc, i| acc | 1 << i)
                    })
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    };
    let universe = family.universe();
    let failing = subsets
        .par_iter()
        .find_first(|&&s| !blocks_union(partition, universe, s).is_union_closed())
        .copied();
    let detail = json!({
        "w": w,
        "subsets_checked": subsets.len(),
        "failing_subset": failing.map(|s| (0..w).filter(|i| s >> i & 1 == 1).map(|i| i + 1).collect::<Vec<_>>()),
    });
    Ok(Verdict::new(ConjectureId::BlockUnions, family, failing.is_none(), None, detail).proven(true))
}

/// Block sizes `|𝒫_1|, ..., |𝒫_w|`, all positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SizeSequence(Vec<u64>);

/// A `k` at which a block is smaller than the sum of all later blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuffixViolation {
    pub k: usize,
    pub size: u64,
    pub suffix_sum: u64,
}

impl SizeSequence {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::input("size sequence is empty"));
        }
        if sizes.contains(&0) {
            return Err(Error::input("size sequence entries must be positive"));
        }
        Ok(SizeSequence(sizes))
    }

    pub fn sizes(&self) -> &[u64] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// First block at least as large as all the others together.
    pub fn frankl_ok(&self) -> bool {
        let tail: u64 = self.0[1..].iter().sum();
        self.0[0] >= tail
    }

    /// `sizes[i] ≥ 2·sizes[j]` for all `i < j`.
    pub fn conj35_ok(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= 2 * w[1])
    }

    /// Every `k ∈ [w−1]` with `sizes[k] < Σ_{i>k} sizes[i]` (1-based).
    pub fn corollary34_violations(&self) -> Vec<SuffixViolation> {
        let mut suffix = 0u64;
        let mut out = Vec::new();
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            suffix += self.0[k + 1];
            if self.0[k] < suffix {
                out.push(SuffixViolation { k: k + 1, size: self.0[k], suffix_sum: suffix });
            }
        }
        out.reverse();
        out
    }

    pub fn corollary34_ok(&self) -> bool {
        self.corollary34_violations().is_empty()
    }

    /// Sum of blocks after the first.
    pub fn tail_sum(&self) -> u64 {
        self.0[1..].iter().sum()
    }
}

pub fn sequence_frankl_ok(seq: &SizeSequence) -> bool {
    seq.frankl_ok()
}

pub fn sequence_conj35_ok(seq: &SizeSequence) -> bool {
    seq.conj35_ok()
}

pub fn sequence_corollary34_ok(seq: &SizeSequence) -> bool {
    seq.corollary34_ok()
}

/// Sum of the `w − 1` iterated floor-halvings of `head`.
pub fn mu_bound(head: u64, w: usize) -> u64 {
    let mut cur = head;
    let mut sum = 0;
    for _ in 1..w {
        cur /= 2;
        if cur == 0 {
            break;
        }
        sum += cur;
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    AllMin,
    AllMax,
    Both,
}

impl TiePolicy {
    pub fn tie_breaks(self) -> &'static [TieBreak] {
        match self {
            TiePolicy::AllMin => &[TieBreak::Min],
            TiePolicy::AllMax => &[TieBreak::Max],
            TiePolicy::Both => &[TieBreak::Min, TieBreak::Max],
        }
    }
}

/// One verdict per tie-break in `policy`. Requires `∅ ∉ 𝒜`.
pub fn check_conj35_on_family(family: &SetFamily, policy: TiePolicy) -> Result<Vec<Verdict>> {
    require_standard(family)?;
    if family.contains(SetMask::EMPTY) {
        return Err(Error::input("the doubling conjecture only covers families without ∅"));
    }
    policy
        .tie_breaks()
        .iter()
        .map(|&tb| {
            let p = build_partition(family, tb)?;
            let sizes = p.sizes();
            let holds = sizes.conj35_ok();
            let detail = json!({
                "tie_break": tb,
                "labels": p.labels(),
                "sizes": sizes,
                "family": crate::format::render_family(family),
            });
            let witness = holds.then(|| crate::checks::Witness::Element(p.labels()[0].expect("first block is labelled")));
            Ok(Verdict::new(ConjectureId::Conj35, family, holds, witness, detail))
        })
        .collect()
}
