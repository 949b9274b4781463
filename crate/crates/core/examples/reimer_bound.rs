//! How tight the total-frequency bound is on small families, and the
//! mixing curve used to prove it.

use uclab::{enumerate_union_closed, mix_lower_bound, reimer_bound, reimer_sum, render_family, EnumerationSpec};

fn main() -> uclab::Result<()> {
    for n in 1..=4 {
        let tightest = enumerate_union_closed(EnumerationSpec::new(n)?)?
            .filter(|f| f.len() > 1)
            .map(|f| (reimer_sum(&f) as f64 / reimer_bound(f.len()), f))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        println!("n={n}: tightest ratio {:.4} on {}", tightest.0, render_family(&tightest.1));
    }
    let m = 64;
    for c in [0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
        println!("I({c:.2}) at m={m}: {:.3}", mix_lower_bound(c, m)?);
    }
    Ok(())
}
