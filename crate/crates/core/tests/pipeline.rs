//! Cross-module checks: the sums, the L-function pipeline and the polytope
//! agree with each other beyond the fixed verification grids.

use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;

use inverted_kloosterman::expsum::{kloosterman_sum, CharacterTuple, GaussTable, Limits};
use inverted_kloosterman::gf::{build_field, FieldTable};
use inverted_kloosterman::lfun::{hodge_slopes, lfunction, LOptions, PolygonRelation};
use inverted_kloosterman::polytope::ik_polytope;

fn field(p: u64, a: u32) -> Arc<FieldTable> {
    Arc::new(build_field(p, a).unwrap())
}

#[test]
fn lfunction_over_f9() {
    let f = field(3, 2);
    for b in 1..9 {
        let l = lfunction(&f, 1, b, &LOptions { heldout: vec![3, 4], limits: Limits::default() }).unwrap();
        assert_eq!(l.slope_sequence(), hodge_slopes(1), "b={b}");
        assert!(l.heldout_ok());
        assert!(l.magnitudes().iter().all(|m| (m - 3.0).abs() < 1e-9));
    }
}

#[test]
fn nontrivial_roots_plus_two_trivial_ones_fill_the_polytope_volume() {
    for (n, p) in [(1usize, 3u64), (1, 7), (2, 7), (2, 5)] {
        let l = lfunction(&field(p, 1), n, 1, &LOptions::default()).unwrap();
        let ik = ik_polytope(n).unwrap();
        assert_eq!((l.p_coeffs.len() - 1 + 2) as u64, ik.data.normalized_volume(), "n={n} p={p}");
        let expect = if p % (n as u64 + 1) == 1 { PolygonRelation::Equal } else { PolygonRelation::StrictlyAbove };
        assert_eq!(l.relation_to_hodge(), expect, "n={n} p={p}");
    }
}

#[test]
fn n1_is_ordinary_at_every_odd_prime() {
    // every odd prime is 1 mod 2: n = 1 is ordinary away from p = 2
    for p in [3u64, 5, 7, 11] {
        let l = lfunction(&field(p, 1), 1, 2 % p as u32, &LOptions::default()).unwrap();
        assert_eq!(l.relation_to_hodge(), PolygonRelation::Equal, "p={p}");
    }
}

fn small_field() -> impl Strategy<Value = (u64, u32)> {
    prop::sample::select(vec![(3u64, 1u32), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The square-root bound also holds over non-prime fields.
    #[test]
    fn square_root_bound_over_prime_powers((p, a) in small_field(), n in 1usize..=2, seed in any::<u64>()) {
        let f = field(p, a);
        let q = f.order() as f64;
        let units = f.units() as u64;
        let b = (seed % units) as u32 + 1;
        let idx: Vec<i64> = (0..=n).map(|i| ((seed >> (8 * (i + 1))) % units) as i64).collect();
        let chi = CharacterTuple::new(&idx, f.units());
        let s = kloosterman_sum(&f, 1, n, b, &chi, &Limits::default()).unwrap().embed_complex();
        let lb = f.log(b).unwrap() as f64;
        let c1 = num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * idx[0] as f64 * lb / units as f64);
        let main = if chi.all_equal() { c1 * (q - 1.0).powi(n as i32) / q } else { 0.0.into() };
        prop_assert!((s + main).norm() <= q.powf((n as f64 + 1.0) / 2.0) + 1e-6);
    }

    /// Gauss-sum formula equals the enumeration exactly, including over
    /// an extension of degree 2.
    #[test]
    fn gauss_formula_is_exact((p, a) in small_field(), k in 1u32..=2, seed in any::<u64>()) {
        let f = field(p, a);
        prop_assume!((f.order() as u64).pow(k) <= 81);
        let units = f.units() as u64;
        let b = (seed % units) as u32 + 1;
        let idx: Vec<i64> = (0..2).map(|i| ((seed >> (8 * (i + 1))) % units) as i64).collect();
        let chi = CharacterTuple::new(&idx, f.units());
        let table = GaussTable::new(&f, k, &Limits::default()).unwrap();
        let formula = table.scaled_sum(1, b, &chi, &Limits::default()).unwrap();
        let big_q = (f.order() as u64).pow(k);
        let direct = kloosterman_sum(&f, k, 1, b, &chi, &Limits::default()).unwrap();
        let direct = direct.lift((big_q - 1) as u32).unwrap().scale(&BigInt::from(big_q));
        prop_assert!(formula.exact_eq(&direct).unwrap());
    }
}
