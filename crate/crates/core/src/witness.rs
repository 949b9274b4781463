//! Constructive witness chains.
//!
//! Starting from `C = [n]`, each step shrinks `C` by one element while
//! keeping `|𝒜_C| ≥ |𝒜_C̄|`. A step either drops an element `y'` whose
//! only covering members reach into `C` (removal), or builds a member `D`
//! of the right size out of sets that touch `C` in at most one element
//! (construction). Any member `D` is balanced because `X ↦ D ∪ X` injects
//! `𝒜_D̄` into `𝒜_D`.
//!
//! Construction is guaranteed for `x ≤ ⌈n/3⌉`. Past that point the chain can
//! still be continued with the sub-multiset solver in [`solve_q23`] whenever
//! it finds a solution ([`extend_chain_via_q23`]).
//!
//! Every existential choice is resolved by smallest mask value, then
//! smallest element, so certificates are reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks::{proven_range, require_standard};
use crate::error::{Error, Result};
use crate::family::{ElementId, FamilyFingerprint, MultiFamily, SetFamily, SetMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `x = 1`, `C = [n]`.
    Base,
    /// `C = C_prev ∖ {y'}`.
    Removal,
    /// `C = D = Z ∪ F`.
    Construction,
    /// `C = D = ⋃𝒮'` from a sub-multiset solution.
    Lifted,
}

/// Audit data for a construction step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    /// Members meeting `C_prev` in at most one element.
    pub p_family: Vec<SetMask>,
    pub p_union: SetMask,
    /// One covering member per element of `V`.
    pub v_family: Vec<SetMask>,
}

/// One replayable step of a witness chain. `c_set` has size `n + 1 - x`;
/// `counts` is `(|𝒜_C|, |𝒜_C̄|)`. Branch-specific fields describe how `C`
/// was obtained from `prev_c_set`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub fingerprint: FamilyFingerprint,
    pub x: u32,
    pub c_set: SetMask,
    pub branch: Branch,
    pub prev_c_set: Option<SetMask>,
    pub y_prime: Option<ElementId>,
    pub z_family: Option<Vec<SetMask>>,
    pub z_union: Option<SetMask>,
    pub v_set: Option<SetMask>,
    pub f_union: Option<SetMask>,
    pub d_set: Option<SetMask>,
    pub s_family: Option<Vec<SetMask>>,
    pub counts: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<StepTrace>,
}

impl WitnessCertificate {
    fn bare(family: &SetFamily, x: u32, c_set: SetMask, branch: Branch, prev: Option<SetMask>) -> Self {
        WitnessCertificate {
            fingerprint: family.fingerprint(),
            x,
            c_set,
            branch,
            prev_c_set: prev,
            y_prime: None,
            z_family: None,
            z_union: None,
            v_set: None,
            f_union: None,
            d_set: None,
            s_family: None,
            counts: balance(family, c_set),
            trace: None,
        }
    }
}

fn balance(family: &SetFamily, c: SetMask) -> (usize, usize) {
    (family.count_containing(c), family.count_disjoint(c))
}

fn union_of(sets: &[SetMask]) -> SetMask {
    sets.iter().fold(SetMask::EMPTY, |acc, &s| acc | s)
}

/// Smallest member `A` with `y ∈ A ⊆ outside ∪ {y}`.
fn first_cover(family: &SetFamily, outside: SetMask, y: ElementId) -> Option<SetMask> {
    let allowed = outside.with(y);
    family
        .members()
        .iter()
        .copied()
        .find(|a| a.contains(y) && a.is_subset_of(allowed))
}

/// Members meeting `c` in at most one element, i.e. the union over `y ∈ c`
/// of `𝒜 ∩ 2^{outside ∪ {y}}`.
fn touching_family(family: &SetFamily, c: SetMask) -> Vec<SetMask> {
    family
        .members()
        .iter()
        .copied()
        .filter(|a| (*a & c).len() <= 1)
        .collect()
}

/// Longest `x` the chain may reach by any branch:
/// `max(min(n, ⌈n/3⌉ + 1), min(n, ⌊n/2⌋ + 1))`.
pub fn extended_range(n: u32) -> u32 {
    proven_range(n).max(n.min(n / 2 + 1))
}

/// Builds the certificate for `x + 1` from a balanced `c` of size
/// `n + 1 - x`, using removal or construction.
fn proven_step(family: &SetFamily, n: u32, x: u32, c: SetMask, trace: bool) -> Result<WitnessCertificate> {
    let base = family.base_set();
    let outside = base - c;
    let fail = |what: &str| {
        Error::internal(format!(
            "witness step x={x} -> {} on family {}: {what} (C={c}, outside={outside})",
            x + 1,
            family.fingerprint()
        ))
    };

    if let Some(y) = c.elements().find(|&y| first_cover(family, outside, y).is_none()) {
        return removal_certificate(family, x, c, y).map_err(|e| fail(&e.to_string()));
    }

    let p_family = touching_family(family, c);
    let p_union = union_of(&p_family);
    let escaped = p_union - c;

    let mut z_family: Vec<SetMask> = escaped
        .elements()
        .map(|w| {
            p_family
                .iter()
                .copied()
                .find(|z| z.contains(w))
                .expect("every element of P lies in some member of 𝒫")
        })
        .collect();
    z_family.sort_unstable();
    z_family.dedup();
    let z_union = union_of(&z_family);

    if !escaped.is_subset_of(z_union) {
        return Err(fail("P∖C not covered by Z"));
    }
    if z_family.len() > escaped.len() as usize || escaped.len() > x - 1 {
        return Err(fail("|𝒵| ≤ |P∖C| ≤ x−1 violated"));
    }
    if z_union.len() > 2 * (x - 1) {
        return Err(fail(&format!("|Z| = {} exceeds 2(x−1)", z_union.len())));
    }
    let need = (n - x) as i64 - z_union.len() as i64;
    if need < 0 {
        return Err(fail(&format!("n−x−|Z| = {need} is negative")));
    }
    let available = p_union - z_union;
    if need as u32 >= available.len() {
        return Err(fail("not enough elements of P∖Z for V"));
    }
    let v_set = available.smallest(need as usize);
    if !v_set.is_subset_of(c) {
        return Err(fail("V ⊄ C"));
    }
    let v_family: Vec<SetMask> = v_set
        .elements()
        .map(|v| first_cover(family, outside, v).expect("construction branch covers every element of C"))
        .collect();
    let f_union = union_of(&v_family);
    let d = z_union | f_union;

    if !z_union.is_disjoint_from(v_set) {
        return Err(fail("Z ∩ V ≠ ∅"));
    }
    if !(f_union - v_set).is_subset_of(z_union) {
        return Err(fail("F∖V ⊄ Z"));
    }
    if d.len() != n - x {
        return Err(fail(&format!("|D| = {} but n−x = {}", d.len(), n - x)));
    }
    if !family.contains(d) {
        return Err(fail(&format!("D = {d} not in family")));
    }

    let mut cert = WitnessCertificate::bare(family, x + 1, d, Branch::Construction, Some(c));
    if cert.counts.0 < cert.counts.1 {
        return Err(fail("constructed D is unbalanced"));
    }
    cert.z_family = Some(z_family);
    cert.z_union = Some(z_union);
    cert.v_set = Some(v_set);
    cert.f_union = Some(f_union);
    cert.d_set = Some(d);
    if trace {
        cert.trace = Some(StepTrace { p_family, p_union, v_family });
    }
    Ok(cert)
}

fn removal_certificate(family: &SetFamily, x: u32, c: SetMask, y: ElementId) -> Result<WitnessCertificate> {
    let next = c.without(y);
    let mut cert = WitnessCertificate::bare(family, x + 1, next, Branch::Removal, Some(c));
    cert.y_prime = Some(y);
    let (inside_prev, outside_prev) = balance(family, c);
    if cert.counts.0 < inside_prev || cert.counts.1 != outside_prev {
        return Err(Error::internal(format!(
            "removal of {y}: counts {:?} against previous ({inside_prev}, {outside_prev})",
            cert.counts
        )));
    }
    if cert.counts.0 < cert.counts.1 {
        return Err(Error::internal(format!("removal of {y} produced an unbalanced set")));
    }
    Ok(cert)
}

/// Certificates for `x = 1, ..., min(n, ⌈n/3⌉ + 1)`.
pub fn construct_witness_chain(family: &SetFamily) -> Result<Vec<WitnessCertificate>> {
    construct_witness_chain_with(family, false)
}

/// As [`construct_witness_chain`]; `trace` attaches 𝒫, P and 𝒱 to every
/// construction step.
pub fn construct_witness_chain_with(family: &SetFamily, trace: bool) -> Result<Vec<WitnessCertificate>> {
    require_standard(family)?;
    let base = family.base_set();
    let n = base.len();
    let first = WitnessCertificate::bare(family, 1, base, Branch::Base, None);
    if first.counts.0 < first.counts.1 {
        return Err(Error::internal("base set is not balanced"));
    }
    let mut chain = vec![first];
    for x in 1..proven_range(n) {
        let c = chain.last().expect("nonempty chain").c_set;
        chain.push(proven_step(family, n, x, c, trace)?);
    }
    Ok(chain)
}

/// Why a certificate was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    FingerprintMismatch { certificate: FamilyFingerprint, family: FamilyFingerprint },
    ChainLengthExceeded { x: u32, limit: u32 },
    NotInBase,
    WrongSize { expected: u32, actual: u32 },
    CountsMismatch { claimed: (usize, usize), actual: (usize, usize) },
    Unbalanced,
    MissingField(&'static str),
    BadPrevious,
    RemovalCondition,
    DNotInFamily,
    Structure(&'static str),
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::FingerprintMismatch { .. } => "fingerprint_mismatch",
            RejectReason::ChainLengthExceeded { .. } => "chain_length_exceeded",
            RejectReason::NotInBase => "not_in_base",
            RejectReason::WrongSize { .. } => "wrong_size",
            RejectReason::CountsMismatch { .. } => "counts_mismatch",
            RejectReason::Unbalanced => "unbalanced",
            RejectReason::MissingField(_) => "missing_field",
            RejectReason::BadPrevious => "bad_previous",
            RejectReason::RemovalCondition => "removal_condition",
            RejectReason::DNotInFamily => "d_not_in_family",
            RejectReason::Structure(_) => "structure",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::FingerprintMismatch { certificate, family } => {
                write!(f, "certificate fingerprint {certificate} does not match family {family}")
            }
            RejectReason::ChainLengthExceeded { x, limit } => write!(f, "x = {x} exceeds chain limit {limit}"),
            RejectReason::NotInBase => f.write_str("C is not inside the base set"),
            RejectReason::WrongSize { expected, actual } => write!(f, "|C| = {actual}, expected {expected}"),
            RejectReason::CountsMismatch { claimed, actual } => {
                write!(f, "claimed counts {claimed:?}, recounted {actual:?}")
            }
            RejectReason::Unbalanced => f.write_str("|𝒜_C| < |𝒜_C̄|"),
            RejectReason::MissingField(name) => write!(f, "missing field {name}"),
            RejectReason::BadPrevious => f.write_str("previous C inconsistent with this step"),
            RejectReason::RemovalCondition => f.write_str("y' has a covering member; removal not justified"),
            RejectReason::DNotInFamily => f.write_str("D not in family"),
            RejectReason::Structure(what) => write!(f, "structure violated: {what}"),
        }
    }
}

fn need<T: Clone>(v: &Option<T>, name: &'static str) -> Result<T, RejectReason> {
    v.clone().ok_or(RejectReason::MissingField(name))
}

fn ensure(cond: bool, what: &'static str) -> Result<(), RejectReason> {
    if cond {
        Ok(())
    } else {
        Err(RejectReason::Structure(what))
    }
}

/// Recounts `|𝒜_C|` and `|𝒜_C̄|` from scratch and rechecks the structure
/// of the step that produced `C`.
pub fn verify_certificate(family: &SetFamily, cert: &WitnessCertificate) -> Result<(), RejectReason> {
    let fp = family.fingerprint();
    if cert.fingerprint != fp {
        return Err(RejectReason::FingerprintMismatch { certificate: cert.fingerprint, family: fp });
    }
    let base = family.base_set();
    let n = base.len();
    let x = cert.x;
    let limit = match cert.branch {
        Branch::Base => 1,
        Branch::Construction => proven_range(n),
        Branch::Removal | Branch::Lifted => extended_range(n),
    };
    if x < 1 || x > limit {
        return Err(RejectReason::ChainLengthExceeded { x, limit });
    }
    let c = cert.c_set;
    if !c.is_subset_of(base) {
        return Err(RejectReason::NotInBase);
    }
    if c.len() != n + 1 - x {
        return Err(RejectReason::WrongSize { expected: n + 1 - x, actual: c.len() });
    }
    let actual = balance(family, c);
    if actual != cert.counts {
        return Err(RejectReason::CountsMismatch { claimed: cert.counts, actual });
    }
    if actual.0 < actual.1 {
        return Err(RejectReason::Unbalanced);
    }

    if cert.branch == Branch::Base {
        return ensure(c == base && cert.prev_c_set.is_none(), "base certificate must have C = [n]");
    }
    let prev = need(&cert.prev_c_set, "prev_c_set")?;
    if !prev.is_subset_of(base) || prev.len() != c.len() + 1 {
        return Err(RejectReason::BadPrevious);
    }
    let outside = base - prev;

    match cert.branch {
        Branch::Base => unreachable!(),
        Branch::Removal => {
            let y = need(&cert.y_prime, "y_prime")?;
            if !prev.contains(y) || prev.without(y) != c {
                return Err(RejectReason::BadPrevious);
            }
            if first_cover(family, outside, y).is_some() {
                return Err(RejectReason::RemovalCondition);
            }
            ensure(family.count_disjoint(prev) == actual.1, "|𝒜_C̄| must equal |𝒜_C̄prev|")
        }
        Branch::Construction => {
            let z_family = need(&cert.z_family, "z_family")?;
            let z = need(&cert.z_union, "z_union")?;
            let v = need(&cert.v_set, "v_set")?;
            let f = need(&cert.f_union, "f_union")?;
            let d = need(&cert.d_set, "d_set")?;
            if !family.contains(d) {
                return Err(RejectReason::DNotInFamily);
            }
            let hyp = x - 1;
            let p_family = touching_family(family, prev);
            let p_union = union_of(&p_family);
            let escaped = p_union - prev;

            ensure(z_family.iter().all(|s| p_family.binary_search(s).is_ok()), "every z must lie in 𝒫")?;
            ensure(union_of(&z_family) == z, "Z must be the union of 𝒵")?;
            ensure(escaped.is_subset_of(z), "P∖C must lie in Z")?;
            ensure(z_family.len() as u32 <= escaped.len() && escaped.len() <= hyp - 1, "|𝒵| ≤ |P∖C| ≤ x−1")?;
            ensure(z.len() <= 2 * (hyp - 1), "|Z| ≤ 2(x−1)")?;
            ensure(v.is_subset_of(p_union - z), "V ⊆ P∖Z")?;
            ensure(v.is_subset_of(prev), "V ⊆ C")?;
            ensure(v.len() + z.len() == n - hyp, "|V| = n−x−|Z|")?;
            ensure(v.is_subset_of(f), "every V' contains its v")?;
            ensure(if v.is_empty() { f.is_empty() } else { family.contains(f) }, "F must be a member")?;
            ensure((f - v).is_subset_of(z), "F∖V ⊆ Z")?;
            ensure(d == (z | f) && d == c, "D = Z ∪ F = C")
        }
        Branch::Lifted => {
            let s_family = need(&cert.s_family, "s_family")?;
            let d = need(&cert.d_set, "d_set")?;
            if !family.contains(d) {
                return Err(RejectReason::DNotInFamily);
            }
            ensure(s_family.iter().all(|s| family.contains(*s)), "every S must be a member")?;
            ensure(s_family.iter().all(|s| (*s & prev).len() == 1), "each S meets C in one element")?;
            let touched = s_family.iter().fold(SetMask::EMPTY, |acc, &s| acc | (s & prev));
            ensure(touched.len() as usize == s_family.len(), "S members use distinct elements of C")?;
            ensure(union_of(&s_family) == d && d == c, "D = ⋃𝒮' = C")
        }
    }
}

/// Checks every certificate and that consecutive certificates link up.
pub fn verify_chain(family: &SetFamily, chain: &[WitnessCertificate]) -> Result<(), (usize, RejectReason)> {
    for (i, cert) in chain.iter().enumerate() {
        verify_certificate(family, cert).map_err(|r| (i, r))?;
        let linked = match i {
            0 => cert.branch == Branch::Base,
            _ => cert.x == chain[i - 1].x + 1 && cert.prev_c_set == Some(chain[i - 1].c_set),
        };
        if !linked {
            return Err((i, RejectReason::BadPrevious));
        }
    }
    Ok(())
}

/// A proper sub-multiset `𝒻'` with `|𝒻| − |𝒻'| = |⋃𝒻'| + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q23Solution {
    /// Indices into the input, ascending.
    pub indices: Vec<usize>,
    pub sub_family: MultiFamily,
    pub union_size: u32,
}

pub const Q23_DEFAULT_MAX_MEMBERS: usize = 24;

pub fn solve_q23(family: &MultiFamily) -> Result<Option<Q23Solution>> {
    solve_q23_with_limit(family, Q23_DEFAULT_MAX_MEMBERS)
}

/// Exhaustive search over index subsets, smallest cardinality first, then
/// index-lexicographic. A subset of size `k` must have a union of exactly
/// `|𝒻| − k − 1` elements, so branches whose running union already exceeds
/// that, or can no longer reach it, are cut.
pub fn solve_q23_with_limit(family: &MultiFamily, max_members: usize) -> Result<Option<Q23Solution>> {
    let len = family.len();
    let union = family.union().len() as usize;
    if len <= union + 1 {
        return Err(Error::input(format!(
            "need |𝒻| > |⋃𝒻| + 1, got {len} ≤ {}",
            union + 1
        )));
    }
    if len > max_members {
        return Err(Error::Size(format!("{len} members exceed the search cap of {max_members}")));
    }
    let members = family.members();
    let mut reach = vec![SetMask::EMPTY; len + 1];
    for i in (0..len).rev() {
        reach[i] = reach[i + 1] | members[i];
    }
    let search = Search { members, reach: &reach };
    let mut chosen = Vec::with_capacity(len);
    for k in 0..len {
        let target = (len - k - 1) as u32;
        if search.run(0, k, target, SetMask::EMPTY, &mut chosen) {
            let sub = chosen.iter().map(|&i| members[i]).collect();
            return Ok(Some(Q23Solution {
                indices: chosen,
                sub_family: MultiFamily::new(sub, family.universe())?,
                union_size: target,
            }));
        }
    }
    Ok(None)
}

struct Search<'a> {
    members: &'a [SetMask],
    /// `reach[i]` is the union of `members[i..]`.
    reach: &'a [SetMask],
}

impl Search<'_> {
    fn run(&self, start: usize, k: usize, target: u32, union: SetMask, chosen: &mut Vec<usize>) -> bool {
        if union.len() > target || (union | self.reach[start]).len() < target {
            return false;
        }
        if chosen.len() == k {
            return union.len() == target;
        }
        let remaining = k - chosen.len();
        for i in start..=self.members.len().saturating_sub(remaining) {
            if i >= self.members.len() {
                break;
            }
            chosen.push(i);
            if self.run(i + 1, k, target, union | self.members[i], chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

struct Lift {
    d: SetMask,
    s_prime: Vec<SetMask>,
}

fn lift_via_q23(family: &SetFamily, c: SetMask, x: u32, max_members: usize) -> Result<Option<Lift>> {
    require_standard(family)?;
    let base = family.base_set();
    let n = base.len();
    if x < 1 || x > n / 2 {
        return Err(Error::input(format!("x = {x} outside 1..=⌊n/2⌋ = {}", n / 2)));
    }
    if !c.is_subset_of(base) || c.len() != n + 1 - x {
        return Err(Error::input(format!("C = {c} must be a subset of the base set of size {}", n + 1 - x)));
    }
    let outside = base - c;
    let s_family: Vec<SetMask> = c
        .elements()
        .map(|y| {
            first_cover(family, outside, y)
                .ok_or_else(|| Error::input(format!("element {y} of C has no covering member")))
        })
        .collect::<Result<_>>()?;
    let t_family = MultiFamily::new(s_family.iter().map(|&s| s & outside).collect(), family.universe())?;
    let Some(solution) = solve_q23_with_limit(&t_family, max_members)? else {
        return Ok(None);
    };
    let s_prime: Vec<SetMask> = solution.indices.iter().map(|&i| s_family[i]).collect();
    let d = union_of(&s_prime);
    if d.len() != n - x || !family.contains(d) {
        return Err(Error::internal(format!(
            "lifted D = {d} has size {} (expected {}) or is not a member",
            d.len(),
            n - x
        )));
    }
    Ok(Some(Lift { d, s_prime }))
}

/// Builds a member `D` of size `n − x` from a balanced `C` of size
/// `n + 1 − x` through the sub-multiset solver. `None` means the solver
/// found no sub-multiset for this instance.
pub fn construct_witness_via_q23(family: &SetFamily, c_set: SetMask, x: u32) -> Result<Option<SetMask>> {
    Ok(lift_via_q23(family, c_set, x, Q23_DEFAULT_MAX_MEMBERS)?.map(|l| l.d))
}

/// A chain continued past the proven range.
#[derive(Clone, Debug)]
pub struct ExtendedChain {
    pub certificates: Vec<WitnessCertificate>,
    /// Hypothesis `x` at which the solver found nothing, if any.
    pub stalled_at: Option<u32>,
}

/// Continues a proven chain up to `x = min(n, ⌊n/2⌋ + 1)`, preferring
/// removal and otherwise lifting a sub-multiset solution.
pub fn extend_chain_via_q23(family: &SetFamily, chain: Vec<WitnessCertificate>) -> Result<ExtendedChain> {
    let n = family.base_set().len();
    let target = n.min(n / 2 + 1);
    let mut certificates = chain;
    let mut stalled_at = None;
    while let Some(last) = certificates.last() {
        let x = last.x;
        if x >= target {
            break;
        }
        let c = last.c_set;
        let outside = family.base_set() - c;
        if let Some(y) = c.elements().find(|&y| first_cover(family, outside, y).is_none()) {
            certificates.push(removal_certificate(family, x, c, y)?);
            continue;
        }
        match lift_via_q23(family, c, x, usize::MAX)? {
            Some(Lift { d, s_prime }) => {
                let mut cert = WitnessCertificate::bare(family, x + 1, d, Branch::Lifted, Some(c));
                if cert.counts.0 < cert.counts.1 {
                    return Err(Error::internal(format!("lifted D = {d} is unbalanced")));
                }
                cert.d_set = Some(d);
                cert.s_family = Some(s_prime);
                certificates.push(cert);
            }
            None => {
                stalled_at = Some(x);
                break;
            }
        }
    }
    Ok(ExtendedChain { certificates, stalled_at })
}
