//! Untwisted and twisted inverted Kloosterman sums over a field and its extensions.
use std::sync::Arc;

use inverted_kloosterman::cyclotomic::reduce_mod_phi;
use inverted_kloosterman::expsum::{kloosterman_sum, CharacterTuple, Limits};
use inverted_kloosterman::gf::build_field;

fn main() -> inverted_kloosterman::Result<()> {
    let f = Arc::new(build_field(5, 1)?);
    let limits = Limits::default();
    let trivial = CharacterTuple::trivial(3, f.units());
    for k in 1..=3 {
        let s = kloosterman_sum(&f, k, 2, 1, &trivial, &limits)?;
        println!("S_{{{k},2}}(1) over F_{{5^{k}}} = {}", reduce_mod_phi(&s)?);
    }

    let chi = CharacterTuple::parse("1,2,3", f.units())?;
    for b in 1..f.order() {
        let s = kloosterman_sum(&f, 1, 2, b, &chi, &limits)?;
        let z = s.embed_complex();
        println!("S_2(chi=(1,2,3), b={b}) = {:+.6} {:+.6}i   |S| = {:.6} <= {:.6}", z.re, z.im, z.norm(), 5f64.powf(1.5));
    }

    // the cost of an enumeration is known before it starts
    let err = kloosterman_sum(&Arc::new(build_field(13, 1)?), 4, 2, 1, &CharacterTuple::trivial(3, 12), &Limits {
        enumeration: 1_000_000,
        ..limits
    });
    println!("budgeted: {}", err.unwrap_err());
    Ok(())
}
