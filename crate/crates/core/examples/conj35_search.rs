//! Random search for families whose greedy partition fails the doubling
//! condition `|𝒫_i| ≥ 2|𝒫_j|`, followed by greedy shrinking.
//!
//! ```text
//! cargo run --release --example conj35_search -- [n] [trials] [seed]
//! ```

use uclab::partition::TiePolicy;
use uclab::{canonical_form, check_conj35_on_family, random_union_closed, render_family, SetFamily, SetMask};

fn fails_everywhere(f: &SetFamily) -> bool {
    check_conj35_on_family(f, TiePolicy::Both).is_ok_and(|vs| vs.iter().all(|v| !v.holds))
}

/// Drops members one at a time while the family stays closed and keeps
/// failing under both tie-breaks.
fn shrink(mut f: SetFamily) -> SetFamily {
    loop {
        let smaller = f.members().iter().find_map(|&m| {
            let g = SetFamily::new(f.members().iter().copied().filter(|&x| x != m), f.universe()).ok()?;
            (g.is_union_closed() && fails_everywhere(&g)).then_some(g)
        });
        match smaller {
            Some(g) => f = g,
            None => return f,
        }
    }
}

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let n = args.first().copied().unwrap_or(5) as u32;
    let trials = args.get(1).copied().unwrap_or(20_000);
    let seed = args.get(2).copied().unwrap_or(0);

    let mut best: Option<SetFamily> = None;
    for t in 0..trials {
        let density = [0.1, 0.2, 0.3, 0.5][(t % 4) as usize];
        let closed = random_union_closed(n, density, seed.wrapping_add(t)).unwrap();
        let f = SetFamily::new(closed.members().iter().copied().filter(|m| !m.is_empty()), SetMask::full(n)).unwrap();
        if !fails_everywhere(&f) {
            continue;
        }
        let small = shrink(f);
        if best.as_ref().is_none_or(|b| small.len() < b.len()) {
            let c = canonical_form(&small).unwrap();
            let vs = check_conj35_on_family(&c, TiePolicy::Both).unwrap();
            println!("trial {t}: {} members, sizes {}", c.len(), vs[0].detail["sizes"]);
            println!("  {}", render_family(&c));
            best = Some(c);
        }
    }
    if best.is_none() {
        println!("no counterexample in {trials} trials");
    }
}
