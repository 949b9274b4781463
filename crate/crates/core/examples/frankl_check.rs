//! Frankl and the per-`x` balanced-subset checks on families read from a
//! file (or a few built-in ones).
//!
//! ```text
//! cargo run --example frankl_check -- families.txt
//! ```

use uclab::{check_conj21_all, check_frankl, parse_families, render_family};

const BUILT_IN: &str = "\
1 1,2
0 1
#universe 3
0 1 2 3 1,2 1,3 2,3 1,2,3
1 1,2 1,2,3
";

fn main() -> uclab::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => BUILT_IN.to_string(),
    };
    for located in parse_families(&text)? {
        let family = &located.value;
        println!("line {}: {}", located.line, render_family(family));
        let frankl = check_frankl(family)?;
        println!("  frankl holds={} witness={:?}", frankl.holds, frankl.witness.map(|w| w.to_string()));
        for v in check_conj21_all(family)? {
            let witness = v.witness.as_ref().map_or("-".to_string(), |w| w.to_string());
            println!(
                "  x={} B={witness:<8} |A_B|={} |A_~B|={} {}",
                v.detail["x"],
                v.detail["contains"],
                v.detail["disjoint"],
                if v.holds { "ok" } else { "COUNTEREXAMPLE" }
            );
        }
    }
    Ok(())
}
