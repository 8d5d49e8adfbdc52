//! Toric exponential sums of Laurent polynomials given as text or JSON.
use std::sync::Arc;

use inverted_kloosterman::cyclotomic::reduce_mod_phi;
use inverted_kloosterman::expsum::{toric_sum, CharacterTuple, Limits};
use inverted_kloosterman::gf::build_field;
use inverted_kloosterman::laurent::parse_laurent;

fn main() -> inverted_kloosterman::Result<()> {
    let f = Arc::new(build_field(3, 1)?);
    let poly = parse_laurent("x1 + x2 + 2*x1^-1*x2^-1", 3, 1, None)?;
    println!("f = {}", poly.to_json());
    let chi = CharacterTuple::trivial(2, f.units());
    for k in 1..=4 {
        let s = toric_sum(&f, k, &poly, &chi, &Limits::default())?;
        println!("k={k}: {}", reduce_mod_phi(&s)?);
    }

    let json = r#"{"p":7,"a":1,"vars":2,"terms":[{"c":1,"e":[1,0]},{"c":3,"e":[-1,-1]},{"c":1,"e":[0,1]}]}"#;
    let poly = parse_laurent(json, 7, 1, None)?;
    let f7 = Arc::new(build_field(7, 1)?);
    let twist = CharacterTuple::parse("1,3", f7.units())?;
    let s = toric_sum(&f7, 1, &poly, &twist, &Limits::default())?;
    println!("twisted over F_7: {:.6}", s.embed_complex());
    Ok(())
}
