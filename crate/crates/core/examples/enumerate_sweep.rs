//! Exhaustive sweep over every closed family with base set `[n]`, `n ≤ 4`,
//! tallying each check and the number of isomorphism classes.

use std::collections::HashSet;

use rayon::prelude::*;
use uclab::partition::TiePolicy;
use uclab::{
    canonical_form, check_conj21_all, check_conj35_on_family, check_doubleton_implication, check_frankl,
    check_reimer, enumerate_union_closed, EnumerationSpec, SetMask,
};

fn main() -> uclab::Result<()> {
    for n in 1..=4 {
        let families: Vec<_> = enumerate_union_closed(EnumerationSpec::new(n)?)?.collect();
        let failures: usize = families
            .par_iter()
            .map(|f| {
                let mut verdicts = vec![check_frankl(f).unwrap(), check_doubleton_implication(f), check_reimer(f).unwrap()];
                verdicts.extend(check_conj21_all(f).unwrap());
                if !f.contains(SetMask::EMPTY) {
                    verdicts.extend(check_conj35_on_family(f, TiePolicy::Both).unwrap());
                }
                verdicts.iter().filter(|v| !v.holds).count()
            })
            .sum();
        let classes: HashSet<_> = families.iter().map(|f| canonical_form(f).unwrap()).collect();
        println!("n={n}: {} families, {} up to relabelling, {failures} failing verdicts", families.len(), classes.len());
    }
    Ok(())
}
