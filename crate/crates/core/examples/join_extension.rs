//! Joins of closed families and the one-element extension that doubles a
//! family while pinning the new element at exactly half.

use uclab::{check_conj41, check_frankl, parse_families, render_family, Conj41Variant, SetFamily};

fn main() -> uclab::Result<()> {
    let fams = parse_families("#universe 3\n0 1 1,2\n0 3\n")?;
    let (a, b) = (&fams[0].value, &fams[1].value);
    let joined = a.join(b)?;
    println!("{} join {} = {}", render_family(a), render_family(b), render_family(&joined));
    println!("closed: {}", joined.is_union_closed());

    let mut family: SetFamily = parse_families("1 1,2 1,2,3")?.remove(0).value;
    for _ in 0..3 {
        let (next, z) = family.extend_with_new_element()?;
        let profile = next.frequency_profile();
        let freqs: Vec<String> = profile.iter().map(|(k, c)| format!("{k}:{c}")).collect();
        println!(
            "extend by {z}: {} -> {} members, freq [{}], frankl {}, separating half {}",
            family.len(),
            next.len(),
            freqs.join(" "),
            check_frankl(&next)?.holds,
            check_conj41(&next, Conj41Variant::B)?.holds
        );
        family = next;
    }
    Ok(())
}
