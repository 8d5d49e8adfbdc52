//! Building finite fields and an extension, and moving elements between them.
use std::sync::Arc;

use inverted_kloosterman::gf::{build_field, field_maps};

fn main() -> inverted_kloosterman::Result<()> {
    let f9 = Arc::new(build_field(3, 2)?);
    println!("F_9: modulus {:?} (constant term first), generator {}", f9.modulus(), f9.generator());
    for t in 0..f9.units() as u64 {
        let x = f9.exp(t);
        println!("  g^{t} = {x:>2}  trace {}", f9.trace(x));
    }

    let maps = field_maps(&f9, 3)?;
    let ext = maps.ext();
    println!("F_729 over F_9: N(g_ext) = g^{}", maps.norm_log_factor());
    let x = ext.exp(100);
    println!("x = g_ext^100: relative trace {} and norm {}", maps.tr_rel(x), maps.norm_rel(x));
    let y = f9.exp(5);
    println!("embed(g^5) = {} restricts back to {:?}", maps.embed(y), maps.restrict(maps.embed(y)));
    Ok(())
}
