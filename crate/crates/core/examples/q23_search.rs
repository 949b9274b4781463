//! Sub-multiset search: worked examples, then a seeded sweep over random
//! multisets looking for one without a solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uclab::format::render_members;
use uclab::{solve_q23, MultiFamily, SetMask};

fn multi(text: &str) -> MultiFamily {
    uclab::parse_multi_families(text).unwrap().remove(0).value
}

fn main() -> uclab::Result<()> {
    for text in ["0 0 0", "1 1 2 0", "1 2 1,2 0 1"] {
        let f = multi(text);
        let sol = solve_q23(&f)?.expect("small examples have solutions");
        println!("{text:<14} -> {} (indices {:?})", render_members(sol.sub_family.members()), sol.indices);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut tried, mut negative) = (0, 0);
    while tried < 20_000 {
        let n = rng.random_range(1..=5u32);
        let len = rng.random_range(2..=12usize);
        let members: Vec<SetMask> =
            (0..len).map(|_| SetMask::from_bits(rng.random::<u64>()) & SetMask::full(rng.random_range(0..=n))).collect();
        let f = MultiFamily::new(members, SetMask::full(n))?;
        if f.len() <= f.union().len() as usize + 1 {
            continue;
        }
        tried += 1;
        if solve_q23(&f)?.is_none() {
            negative += 1;
            println!("no solution: {}", render_members(f.members()));
        }
    }
    println!("{tried} multisets searched, {negative} without a solution");
    Ok(())
}
