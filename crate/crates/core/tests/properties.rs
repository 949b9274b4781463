use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use uclab::witness::construct_witness_via_q23;
use uclab::{
    build_partition, canonical_form, check_conj21_at, check_conj41, check_frankl, construct_witness_chain,
    mix_lower_bound, mu_bound, verify_block_unions, verify_certificate, BlockCheck, Branch, Conj41Variant,
    ElementId, SetFamily, SetMask, SizeSequence, TieBreak,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() }
}

fn family_over(n: u32, max_members: usize) -> impl Strategy<Value = SetFamily> {
    prop::collection::vec(0u64..1 << n, 0..=max_members)
        .prop_map(move |bits| SetFamily::new(bits.into_iter().map(SetMask::from_bits), SetMask::full(n)).unwrap())
}

fn any_family() -> impl Strategy<Value = SetFamily> {
    (1u32..=6).prop_flat_map(|n| family_over(n, 12))
}

/// Closed, nonempty and not `{∅}`.
fn closed_family() -> impl Strategy<Value = SetFamily> {
    (1u32..=6).prop_flat_map(|n| {
        prop::collection::vec(1u64..1 << n, 1..=6).prop_flat_map(move |bits| {
            any::<bool>().prop_map(move |with_empty| {
                let mut members: Vec<SetMask> = bits.iter().copied().map(SetMask::from_bits).collect();
                if with_empty {
                    members.push(SetMask::EMPTY);
                }
                SetFamily::new(members, SetMask::full(n)).unwrap().union_closure()
            })
        })
    })
}

fn separating_closed_family() -> impl Strategy<Value = SetFamily> {
    closed_family().prop_map(|f| f.separating_quotient())
}

fn n_of(f: &SetFamily) -> u32 {
    f.base_set().len()
}

proptest! {
    #![proptest_config(config(10_000))]

    #[test]
    fn closure_is_extensive_and_idempotent(f in any_family()) {
        let c = f.union_closure();
        prop_assert!(f.members().iter().all(|&m| c.contains(m)));
        prop_assert_eq!(c.union_closure(), c.clone());
        prop_assert!(c.is_union_closed());
    }

    #[test]
    fn restrictions_split_the_family(f in any_family(), b in 0u64..64) {
        let b = SetMask::from_bits(b) & f.universe();
        let inside = f.restrict_contains(b).unwrap();
        let outside = f.restrict_disjoint(b).unwrap();
        if b.is_empty() {
            prop_assert_eq!(&inside, &f);
            prop_assert_eq!(&outside, &f);
        } else {
            prop_assert!(inside.members().iter().all(|&m| f.contains(m) && !outside.contains(m)));
            prop_assert!(outside.members().iter().all(|&m| f.contains(m)));
        }
    }

    #[test]
    fn singleton_restriction_matches_frequency(f in any_family()) {
        let profile = f.frequency_profile();
        for k in f.universe().elements() {
            prop_assert_eq!(f.restrict_contains(SetMask::singleton(k)).unwrap().len(), profile.count(k));
        }
    }

    #[test]
    fn join_is_closed_associative_with_identity(a in closed_family(), b in closed_family(), c in closed_family()) {
        let u = a.universe() | b.universe() | c.universe();
        let (a, b, c) = (a.widen(u).unwrap(), b.widen(u).unwrap(), c.widen(u).unwrap());
        let ab = a.join(&b).unwrap();
        prop_assert!(ab.is_union_closed());
        prop_assert_eq!(ab.join(&c).unwrap(), a.join(&b.join(&c).unwrap()).unwrap());
        let unit = SetFamily::new([SetMask::EMPTY], u).unwrap();
        prop_assert_eq!(a.join(&unit).unwrap(), a.clone());
    }

    #[test]
    fn quotient_is_separating(f in closed_family()) {
        let q = f.separating_quotient();
        prop_assert!(q.is_separating());
        prop_assert!(q.is_union_closed());
    }

    #[test]
    fn closed_family_contains_its_base(f in closed_family()) {
        prop_assert!(f.contains(f.base_set()));
    }

    #[test]
    fn frankl_is_conj21_at_n(f in closed_family()) {
        let n = n_of(&f);
        prop_assume!(n >= 1);
        prop_assert_eq!(check_frankl(&f).unwrap().holds, check_conj21_at(&f, n).unwrap().holds);
    }

    #[test]
    fn partition_is_a_labelled_disjoint_cover(f in closed_family()) {
        for tb in [TieBreak::Min, TieBreak::Max] {
            let p = build_partition(&f, tb).unwrap();
            prop_assert_eq!(p.validate(&f), Ok(()));
            let total: usize = p.blocks().iter().map(Vec::len).sum();
            prop_assert_eq!(total, f.len());
        }
    }
}

proptest! {
    #![proptest_config(config(1_000))]

    #[test]
    fn extension_doubles_frequencies(f in separating_closed_family()) {
        let (g, z) = f.extend_with_new_element().unwrap();
        prop_assert_eq!(g.len(), 2 * f.len());
        prop_assert!(g.is_union_closed());
        prop_assert!(g.is_separating());
        let (old, new) = (f.frequency_profile(), g.frequency_profile());
        for k in f.base_set().elements() {
            prop_assert_eq!(new.count(k), 2 * old.count(k));
        }
        prop_assert_eq!(new.count(z), f.len());
        let v = check_conj41(&g, Conj41Variant::B).unwrap();
        prop_assert_eq!(v.detail["m"].as_u64(), Some(2 * new.count(z) as u64));
    }

    #[test]
    fn extension_of_frankl_failure_breaks_41b(f in separating_closed_family()) {
        // a separating family failing Frankl would extend to a 41b counterexample;
        // here we check the implication on whatever the generator gives
        let (g, _) = f.extend_with_new_element().unwrap();
        if !check_frankl(&f).unwrap().holds {
            prop_assert!(!check_conj41(&g, Conj41Variant::B).unwrap().holds);
        }
    }

    #[test]
    fn canonical_form_ignores_relabelling(f in closed_family(), seed in any::<u64>()) {
        prop_assume!(n_of(&f) <= 6);
        let n = f.universe().len();
        let mut perm: Vec<u8> = (1..=n as u8).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let relabelled = SetFamily::new(
            f.members().iter().map(|m| SetMask::from_elements(m.elements().map(|e| perm[e.get() as usize - 1])).unwrap()),
            f.universe(),
        ).unwrap();
        let c = canonical_form(&f).unwrap();
        prop_assert_eq!(&c, &canonical_form(&relabelled).unwrap());
        prop_assert_eq!(canonical_form(&c).unwrap(), c);
    }

    #[test]
    fn chain_certificates_verify(f in closed_family()) {
        let chain = construct_witness_chain(&f).unwrap();
        for cert in &chain {
            prop_assert_eq!(verify_certificate(&f, cert), Ok(()));
            prop_assert!(check_conj21_at(&f, cert.x).unwrap().holds);
            if cert.branch == Branch::Construction {
                let z = cert.z_union.unwrap();
                let n = n_of(&f);
                prop_assert!(z.len() <= 2 * (cert.x - 2));
                prop_assert!(cert.v_set.unwrap().is_subset_of(cert.prev_c_set.unwrap()));
                prop_assert_eq!(cert.d_set.unwrap().len(), n - cert.x + 1);
            }
        }
    }

    #[test]
    fn q23_lifts_are_balanced(f in closed_family()) {
        let n = n_of(&f);
        let chain = construct_witness_chain(&f).unwrap();
        for cert in &chain {
            if cert.x <= n / 2 {
                let covered = cert.c_set.elements().all(|y| {
                    let allowed = (f.base_set() - cert.c_set).with(y);
                    f.members().iter().any(|a| a.contains(y) && a.is_subset_of(allowed))
                });
                if covered {
                    if let Some(d) = construct_witness_via_q23(&f, cert.c_set, cert.x).unwrap() {
                        prop_assert!(f.contains(d));
                        prop_assert!(f.count_containing(d) >= f.count_disjoint(d));
                    }
                }
            }
        }
    }

    #[test]
    fn block_unions_stay_closed(f in closed_family()) {
        let p = build_partition(&f, TieBreak::Min).unwrap();
        let mode = if p.width() <= 12 { BlockCheck::Exhaustive } else { BlockCheck::Sampled { samples: 4096, seed: 1 } };
        prop_assert!(verify_block_unions(&f, &p, mode).unwrap().holds);
    }
}

fn corollary34_brute_force(s: &[u64]) -> bool {
    let w = s.len();
    (1..w).all(|k| {
        (0..k).all(|j| {
            (0u32..1 << (w - k)).all(|bits| {
                let sum: u64 = (0..w - k).filter(|i| bits >> i & 1 == 1).map(|i| s[k + i]).sum();
                s[j] >= sum
            })
        })
    })
}

fn conj35_pairwise(s: &[u64]) -> bool {
    (0..s.len()).all(|i| (i + 1..s.len()).all(|j| s[i] >= 2 * s[j]))
}

fn sizes() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..200, 1..=10)
}

/// Sequences built to satisfy the doubling condition.
fn doubling_sizes() -> impl Strategy<Value = Vec<u64>> {
    (1u64..1_000_000, prop::collection::vec(0u64..4, 0..=9)).prop_map(|(head, drops)| {
        let mut out = vec![head];
        for d in drops {
            let next = out.last().unwrap() / 2 >> d;
            if next == 0 {
                break;
            }
            out.push(next);
        }
        out
    })
}

proptest! {
    #![proptest_config(config(10_000))]

    #[test]
    fn suffix_reduction_is_sound(s in sizes()) {
        let seq = SizeSequence::new(s.clone()).unwrap();
        prop_assert_eq!(seq.corollary34_ok(), corollary34_brute_force(&s));
    }

    #[test]
    fn doubling_pairwise_matches_consecutive(s in sizes()) {
        let seq = SizeSequence::new(s.clone()).unwrap();
        prop_assert_eq!(seq.conj35_ok(), conj35_pairwise(&s));
    }

    #[test]
    fn doubling_tail_is_below_mu(s in doubling_sizes()) {
        let seq = SizeSequence::new(s.clone()).unwrap();
        prop_assert!(seq.conj35_ok());
        let mu = mu_bound(s[0], s.len());
        prop_assert!(seq.tail_sum() <= mu);
        prop_assert!(mu < s[0]);
    }

    #[test]
    fn mu_is_below_head(head in 1u64..u64::MAX / 2, w in 1usize..64) {
        prop_assert!(mu_bound(head, w) < head);
    }
}

#[test]
fn mix_bound_increases_on_grid() {
    for m in 2..=1024u64 {
        let values: Vec<f64> = (50..100).map(|c| mix_lower_bound(c as f64 / 100.0, m).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]), "m = {m}");
    }
}

#[test]
fn element_ids_round_trip() {
    for k in 1..=64u8 {
        let e = ElementId::new(k).unwrap();
        assert_eq!(SetMask::singleton(e).min_element(), Some(e));
    }
}
