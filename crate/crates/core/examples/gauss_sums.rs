//! Gauss sums as exact histograms, and their absolute values.
use inverted_kloosterman::expsum::gauss_sum;
use inverted_kloosterman::gf::build_field;

fn main() -> inverted_kloosterman::Result<()> {
    let f = build_field(7, 1)?;
    for j in 0..f.units() as u64 {
        let g = gauss_sum(&f, j);
        let z = g.embed_complex();
        println!("G(chi_{j}) = {:+.6} {:+.6}i   |G|^2 = {:.6}", z.re, z.im, z.norm_sqr());
    }
    // G(chi) G(conj chi) = chi(-1) q for nontrivial chi, checked exactly
    let g1 = gauss_sum(&f, 1);
    let g5 = gauss_sum(&f, 5);
    let prod = g1.mul(&g5)?;
    println!("G(chi_1) G(chi_5) = {:.6}", prod.embed_complex());
    Ok(())
}
