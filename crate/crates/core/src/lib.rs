//! Bitmask toolkit for finite union-closed families of sets.
//!
//! Families are sorted, deduplicated lists of `u64` masks over a universe of
//! at most 64 elements. On top of that sit decision procedures for the
//! union-closed sets conjecture and several strengthenings, a constructive
//! witness chain with replayable certificates, the greedy max-frequency
//! partition, exhaustive and random family generators, and the `uclab`
//! batch driver.
//!
//! ```
//! use uclab::{check_frankl, SetFamily};
//!
//! let cube = SetFamily::power_set(3);
//! let verdict = check_frankl(&cube).unwrap();
//! assert!(verdict.holds);
//! ```

pub mod checks;
pub mod cli;
pub mod enumeration;
pub mod error;
pub mod family;
pub mod format;
pub mod partition;
pub mod witness;

pub use checks::{
    check_conj21_all, check_conj21_at, check_conj41, check_doubleton_implication, check_frankl, check_reimer,
    mix_lower_bound, proven_range, reimer_bound, reimer_sum, Conj41Variant, ConjectureId, Failure, Verdict, Witness,
};
pub use enumeration::{canonical_form, enumerate_union_closed, random_family, random_union_closed, EnumerationSpec};
pub use error::{Error, Result};
pub use family::{ElementId, FamilyFingerprint, FrequencyProfile, MultiFamily, SetFamily, SetMask};
pub use format::{parse_families, parse_multi_families, render_family};
pub use partition::{
    build_partition, check_conj35_on_family, mu_bound, verify_block_unions, BlockCheck, Partition, SizeSequence,
    TieBreak, TiePolicy,
};
pub use witness::{
    construct_witness_chain, extend_chain_via_q23, solve_q23, verify_certificate, verify_chain, Branch, Q23Solution,
    RejectReason, WitnessCertificate,
};
