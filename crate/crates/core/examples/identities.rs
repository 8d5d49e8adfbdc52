//! The exact identities tying S_n to the auxiliary sum E_n, the toric power
//! sums, the T_n transform and the Gauss-sum formula.
use std::sync::Arc;

use num_bigint::BigInt;

use inverted_kloosterman::cyclotomic::{reduce_mod_phi, CycloRational};
use inverted_kloosterman::expsum::{
    auxiliary_laurent, e_sum, gauss_formula_sum, kloosterman_sum, tn_transform, toric_sum, CharacterTuple, Limits,
};
use inverted_kloosterman::gf::build_field;
use inverted_kloosterman::lfun::toric_from_kloosterman;

fn main() -> inverted_kloosterman::Result<()> {
    let f = Arc::new(build_field(5, 1)?);
    let l = Limits::default();
    let (n, b) = (1, 2);
    let chi = CharacterTuple::parse("1,2", f.units())?;

    let s = kloosterman_sum(&f, 1, n, b, &chi, &l)?;
    let e = e_sum(&f, n, b, &chi, &l)?;
    let lhs = s.scale(&BigInt::from(5));
    let rhs = e.shift(0, 2 * f.log(b).unwrap() as u64);
    println!("q S = chi_2(b) E: {}", lhs.exact_eq(&rhs)?);

    let t = tn_transform(&f, n, b, &chi, &l)?;
    println!("T_n = {:.6} (agrees with the transformed S_n)", t.embed_complex());

    let g = gauss_formula_sum(&f, 1, n, b, &chi, &l)?;
    println!("Gauss formula / q = {:.6}, enumeration = {:.6}", g.embed_complex() / 5.0, s.embed_complex());

    // S*_k from the toric sum of the auxiliary polynomial
    let aux = auxiliary_laurent(&f, n, b)?;
    let trivial = CharacterTuple::trivial(n + 1, f.units());
    let sums: Vec<CycloRational> =
        (1..=2).map(|k| reduce_mod_phi(&kloosterman_sum(&f, k, n, b, &trivial, &l)?)).collect::<Result<_, _>>()?;
    let predicted = toric_from_kloosterman(&sums, n, 5);
    for k in 1..=2u32 {
        let direct = reduce_mod_phi(&toric_sum(&f, k, &aux, &CharacterTuple::trivial(n + 2, f.units()), &l)?)?;
        println!("k={k}: toric {direct}, from S_k {}", predicted[k as usize - 1]);
    }
    Ok(())
}
