//! Recovering L_n(b, T) from power sums: trivial factors, P(T), Newton
//! polygon, root magnitudes and held-out predictions.
use std::sync::Arc;

use inverted_kloosterman::expsum::Limits;
use inverted_kloosterman::gf::build_field;
use inverted_kloosterman::lfun::{hodge_slopes, lfunction, LOptions};

fn main() -> inverted_kloosterman::Result<()> {
    for (p, n, b, heldout) in [(3u64, 1usize, 1u32, vec![3, 4]), (7, 2, 3, vec![5]), (5, 2, 1, vec![])] {
        let f = Arc::new(build_field(p, 1)?);
        let l = lfunction(&f, n, b, &LOptions { heldout, limits: Limits::default() })?;
        println!("p={p} n={n} b={b}");
        println!("  P(T) = {}", l.p_text());
        let slopes: Vec<String> = l.slope_sequence().iter().map(|s| s.to_string()).collect();
        let hodge: Vec<String> = hodge_slopes(n).iter().map(|s| s.to_string()).collect();
        println!("  Newton slopes {slopes:?}, Hodge slopes {hodge:?} -> {:?}", l.relation_to_hodge());
        println!("  |alpha_i| = {:?} (q^(n/2) = {:.6})", l.magnitudes(), (p as f64).powf(n as f64 / 2.0));
        for h in &l.heldout {
            println!("  k={}: predicted {} actual {} match {}", h.k, h.predicted, h.actual, h.matched);
        }
    }
    Ok(())
}
