//! Greedy max-frequency partitions and the block-size predicates, including
//! the four sequences of the permissibility table.

use uclab::{build_partition, mu_bound, verify_block_unions, BlockCheck, SetFamily, SetMask, SizeSequence, TieBreak};

fn yes(b: bool) -> &'static str {
    if b { "Yes" } else { "No" }
}

fn main() -> uclab::Result<()> {
    println!("{:<22} {:>7} {:>9} {:>7} {:>4}", "sizes", "frankl", "doubling", "suffix", "mu");
    for row in [[100, 50, 25, 12, 5], [100, 40, 10, 5, 2], [100, 40, 18, 10, 7], [60, 30, 20, 10, 5]] {
        let s = SizeSequence::new(row.to_vec())?;
        let flags: Vec<String> = s.corollary34_violations().iter().map(|v| format!("k={}", v.k)).collect();
        println!(
            "{:<22} {:>7} {:>9} {:>7} {:>4}  {}",
            format!("{row:?}"),
            yes(s.frankl_ok()),
            yes(s.conj35_ok()),
            yes(s.corollary34_ok()),
            mu_bound(row[0], row.len()),
            flags.join(" ")
        );
    }

    let cube = SetFamily::power_set(3);
    let without_empty = SetFamily::new(cube.members().iter().copied().filter(|m| !m.is_empty()), SetMask::full(3))?;
    for (name, family) in [("2^[3]", cube), ("2^[3] minus empty", without_empty)] {
        for tb in [TieBreak::Min, TieBreak::Max] {
            let p = build_partition(&family, tb)?;
            let unions = verify_block_unions(&family, &p, BlockCheck::Exhaustive)?;
            let labels: Vec<String> = p.labels().iter().map(|l| l.map_or("-".into(), |e| e.to_string())).collect();
            println!(
                "{name} {tb:?}: sizes {:?} labels [{}] block unions closed: {}",
                p.sizes().sizes(),
                labels.join(","),
                unions.holds
            );
        }
    }
    Ok(())
}
