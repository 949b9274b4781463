//! Decision procedures for the union-closed conjecture and its
//! strengthenings. Each check returns a [`Verdict`] carrying the counts it
//! used so that the decision can be replayed.

use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::family::{ElementId, FamilyFingerprint, SetFamily, SetMask};
use crate::format::render_members;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureId {
    /// Some element lies in at least half the members.
    Frankl,
    /// For a given `x`, some `B` of size `n + 1 - x` has `|𝒜_B| ≥ |𝒜_B̄|`.
    Conj21,
    /// A balanced doubleton forces a balanced singleton.
    DoubletonImplication,
    /// `Σ_k |𝒜_{k}| ≥ (m/2)·log2(m)`.
    Reimer,
    /// Separating non-power-sets have `high > m/2`.
    Conj41a,
    /// For separating families, `high = m/2` exactly for power sets.
    Conj41b,
    /// Peeling-partition block sizes at least double going backwards.
    Conj35,
    /// Every union of peeling-partition blocks is union-closed.
    BlockUnions,
    /// The constructive witness chain for small `x`.
    WitnessChain,
    /// Sub-multiset whose removal count matches its union size plus one.
    Q23,
}

impl ConjectureId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConjectureId::Frankl => "frankl",
            ConjectureId::Conj21 => "conj21",
            ConjectureId::DoubletonImplication => "doubleton_implication",
            ConjectureId::Reimer => "reimer",
            ConjectureId::Conj41a => "conj41a",
            ConjectureId::Conj41b => "conj41b",
            ConjectureId::Conj35 => "conj35",
            ConjectureId::BlockUnions => "block_unions",
            ConjectureId::WitnessChain => "witness_chain",
            ConjectureId::Q23 => "q23",
        }
    }
}

impl fmt::Display for ConjectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Witness payload, rendered in the member syntax of the text format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Element(ElementId),
    Set(SetMask),
    Sets(Vec<SetMask>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Element(k) => write!(f, "{k}"),
            Witness::Set(s) => write!(f, "{s}"),
            Witness::Sets(sets) => f.write_str(&render_members(sets)),
        }
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// How a failed verdict should be treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Failure {
    /// Refutes an open conjecture: a research finding.
    Counterexample,
    /// Contradicts a proven statement: an implementation bug.
    Internal,
}

/// Outcome of one check on one family. Serializes with fixed field order
/// `{conjecture, fingerprint, holds, witness, detail}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub conjecture: ConjectureId,
    pub fingerprint: FamilyFingerprint,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub detail: Map<String, Value>,
    /// Whether the checked statement is a theorem for this instance.
    #[serde(skip)]
    pub proven: bool,
}

impl Verdict {
    pub(crate) fn new(conjecture: ConjectureId, family: &SetFamily, holds: bool, witness: Option<Witness>, detail: Value) -> Self {
        let detail = match detail {
            Value::Object(map) => map,
            Value::Null => Map::new(),
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Verdict {
            conjecture,
            fingerprint: family.fingerprint(),
            holds,
            witness,
            detail,
            proven: false,
        }
    }

    pub(crate) fn proven(mut self, proven: bool) -> Self {
        self.proven = proven;
        self
    }

    pub fn failure(&self) -> Option<Failure> {
        match (self.holds, self.proven) {
            (true, _) => None,
            (false, true) => Some(Failure::Internal),
            (false, false) => Some(Failure::Counterexample),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialize")
    }
}

/// Rejects families outside the standing assumptions: nonempty,
/// not `{∅}`, union-closed.
pub(crate) fn require_standard(family: &SetFamily) -> Result<()> {
    if family.is_empty() {
        return Err(Error::input("family is empty"));
    }
    if family.is_trivial() {
        return Err(Error::input("family is {∅}"));
    }
    if !family.is_union_closed() {
        return Err(Error::input("family is not union-closed"));
    }
    Ok(())
}

/// Length of the proven witness chain: `min(n, ⌈n/3⌉ + 1)`.
pub fn proven_range(n: u32) -> u32 {
    n.min(n.div_ceil(3) + 1)
}

pub fn check_frankl(family: &SetFamily) -> Result<Verdict> {
    require_standard(family)?;
    let profile = family.frequency_profile();
    let m = family.len();
    let witness = profile.iter().find(|&(_, c)| 2 * c >= m);
    let v = match witness {
        Some((k, c)) => Verdict::new(
            ConjectureId::Frankl,
            family,
            true,
            Some(Witness::Element(k)),
            json!({ "m": m, "count": c, "high": profile.high() }),
        ),
        None => Verdict::new(
            ConjectureId::Frankl,
            family,
            false,
            None,
            json!({ "m": m, "high": profile.high(), "arg_high": profile.arg_high().to_string() }),
        ),
    };
    Ok(v)
}

/// Result of scanning all `size`-subsets of `base` for a balanced one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BalancedScan {
    /// Lexicographically least `B` with `|𝒜_B| ≥ |𝒜_B̄|`, with its counts.
    pub first: Option<(SetMask, usize, usize)>,
    /// Subset maximizing `|𝒜_B| − |𝒜_B̄|` (least on ties), with its counts.
    pub best: Option<(SetMask, usize, usize)>,
    pub checked: u64,
}

/// Scans `size`-subsets of `ground` in lexicographic order of their sorted
/// element lists. Stops at the first balanced one.
pub fn scan_balanced(family: &SetFamily, ground: SetMask, size: usize) -> BalancedScan {
    let base: Vec<ElementId> = ground.elements().collect();
    let mut best: Option<(SetMask, usize, usize)> = None;
    let mut checked = 0u64;
    for combo in base.iter().copied().combinations(size) {
        let b = combo.iter().fold(SetMask::EMPTY, |acc, &k| acc.with(k));
        let inside = family.count_containing(b);
        let outside = family.count_disjoint(b);
        checked += 1;
        if inside >= outside {
            return BalancedScan { first: Some((b, inside, outside)), best: Some((b, inside, outside)), checked };
        }
        let margin = inside as i64 - outside as i64;
        if best.is_none_or(|(_, i, o)| margin > i as i64 - o as i64) {
            best = Some((b, inside, outside));
        }
    }
    BalancedScan { first: None, best, checked }
}

pub fn check_conj21_at(family: &SetFamily, x: u32) -> Result<Verdict> {
    require_standard(family)?;
    let n = family.base_set().len();
    if x < 1 || x > n {
        return Err(Error::input(format!("x = {x} outside 1..={n}")));
    }
    let size = (n + 1 - x) as usize;
    let scan = scan_balanced(family, family.base_set(), size);
    let proven = x <= proven_range(n);
    let v = match scan.first {
        Some((b, inside, outside)) => Verdict::new(
            ConjectureId::Conj21,
            family,
            true,
            Some(Witness::Set(b)),
            json!({ "x": x, "n": n, "size": size, "contains": inside, "disjoint": outside }),
        ),
        None => {
            let (b, inside, outside) = scan.best.expect("at least one subset of the base set");
            Verdict::new(
                ConjectureId::Conj21,
                family,
                false,
                None,
                json!({
                    "x": x, "n": n, "size": size, "checked": scan.checked,
                    "closest": b.to_string(), "contains": inside, "disjoint": outside,
                }),
            )
        }
    };
    Ok(v.proven(proven))
}

/// One verdict per `x ∈ [n]`, ascending.
pub fn check_conj21_all(family: &SetFamily) -> Result<Vec<Verdict>> {
    require_standard(family)?;
    let n = family.base_set().len();
    (1..=n).map(|x| check_conj21_at(family, x)).collect()
}

/// Evaluates: some balanced doubleton ⟹ some balanced singleton, with
/// both ranging over the universe. Applies to any family; a `false` result
/// is a bug.
pub fn check_doubleton_implication(family: &SetFamily) -> Verdict {
    let ground = family.universe() | family.base_set();
    let doubleton = scan_balanced(family, ground, 2).first;
    let singleton = scan_balanced(family, ground, 1).first;
    let detail = json!({
        "antecedent": doubleton.map(|(b, _, _)| b.to_string()),
        "consequent": singleton.map(|(b, _, _)| b.to_string()),
    });
    let holds = doubleton.is_none() || singleton.is_some();
    let witness = singleton.map(|(b, _, _)| Witness::Element(b.min_element().expect("singleton")));
    Verdict::new(ConjectureId::DoubletonImplication, family, holds, witness, detail).proven(true)
}

/// `Σ_k |𝒜_{k}|` over the base set.
pub fn reimer_sum(family: &SetFamily) -> u64 {
    family.frequency_profile().total()
}

/// `(m/2)·log2(m)`.
pub fn reimer_bound(m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    m / 2.0 * m.log2()
}

/// Relative slack applied to the real-valued bound.
pub const REIMER_SLACK: f64 = 1e-9;

pub fn check_reimer(family: &SetFamily) -> Result<Verdict> {
    if family.is_empty() {
        return Err(Error::input("family is empty"));
    }
    if !family.is_union_closed() {
        return Err(Error::input("family is not union-closed"));
    }
    let sum = reimer_sum(family);
    let bound = reimer_bound(family.len());
    let holds = sum as f64 >= bound - REIMER_SLACK * bound.max(1.0);
    Ok(Verdict::new(
        ConjectureId::Reimer,
        family,
        holds,
        None,
        json!({ "m": family.len(), "sum": sum, "bound": bound }),
    )
    .proven(true))
}

/// `I(c) = cm + (cm/2)·log2(cm) + ((1−c)m/2)·log2((1−c)m)` for
/// `c ∈ [1/2, 1)`. A log term whose argument drops below 1 counts as 0.
pub fn mix_lower_bound(c: f64, m: u64) -> Result<f64> {
    if !(0.5..1.0).contains(&c) {
        return Err(Error::Domain(format!("c = {c} outside [1/2, 1)")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    let m = m as f64;
    let t = |v: f64| if v < 1.0 { 0.0 } else { v / 2.0 * v.log2() };
    Ok(c * m + t(c * m) + t((1.0 - c) * m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conj41Variant {
    /// Not a power set ⟹ `high > m/2`.
    A,
    /// `high = m/2` ⟺ power set.
    B,
}

pub fn check_conj41(family: &SetFamily, variant: Conj41Variant) -> Result<Verdict> {
    require_standard(family)?;
    if !family.is_separating() {
        return Err(Error::input(
            "family is not separating; apply separating_quotient first",
        ));
    }
    let profile = family.frequency_profile();
    let high = profile.high();
    let m = family.len();
    let power = family.is_power_set();
    let (id, holds) = match variant {
        Conj41Variant::A => (ConjectureId::Conj41a, power || 2 * high > m),
        Conj41Variant::B => (ConjectureId::Conj41b, (2 * high == m) == power),
    };
    let witness = holds
        .then(|| profile.arg_high().min_element().map(Witness::Element))
        .flatten();
    Ok(Verdict::new(id, family, holds, witness, json!({ "high": high, "m": m, "power_set": power })))
}
