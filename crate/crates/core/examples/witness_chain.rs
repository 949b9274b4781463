//! Witness chains on power sets: the guaranteed prefix, then the
//! continuation through the sub-multiset solver.

use uclab::{construct_witness_chain, extend_chain_via_q23, verify_chain, Branch, SetFamily};

fn main() -> uclab::Result<()> {
    for n in 1..=7 {
        let family = SetFamily::power_set(n);
        let chain = construct_witness_chain(&family)?;
        verify_chain(&family, &chain).expect("fresh chains verify");
        let proven = chain.len();
        let extended = extend_chain_via_q23(&family, chain)?;
        verify_chain(&family, &extended.certificates).expect("extended chains verify");
        println!("2^[{n}]: {proven} proven steps, {} after extension", extended.certificates.len());
        for cert in &extended.certificates {
            let how = match cert.branch {
                Branch::Base => "base".to_string(),
                Branch::Removal => format!("removal of {}", cert.y_prime.unwrap()),
                Branch::Construction => format!("construction Z={} V={}", cert.z_union.unwrap(), cert.v_set.unwrap()),
                Branch::Lifted => format!("lifted from {} sets", cert.s_family.as_ref().unwrap().len()),
            };
            println!("  x={} C={:<14} counts={:?}  {how}", cert.x, cert.c_set.to_string(), cert.counts);
        }
        if let Some(x) = extended.stalled_at {
            println!("  solver found nothing at x={x}");
        }
    }
    Ok(())
}
