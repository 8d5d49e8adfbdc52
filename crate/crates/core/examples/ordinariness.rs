//! Facial ordinariness of the auxiliary polynomial, and the bounded
//! non-degeneracy search for polynomials without diagonal facets.
use std::sync::Arc;

use inverted_kloosterman::expsum::auxiliary_laurent;
use inverted_kloosterman::gf::{build_field, is_prime};
use inverted_kloosterman::laurent::parse_laurent;
use inverted_kloosterman::polytope::{facial_ordinary, ik_polytope, nondegeneracy_search, solution_group, DEFAULT_DIM_CAP};

fn main() -> inverted_kloosterman::Result<()> {
    let ik = ik_polytope(2)?;
    let g = solution_group(&ik.m1, 7)?;
    let shown: Vec<String> = g
        .elements
        .iter()
        .map(|r| format!("({})", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    println!("S(M_1) for n=2 has {} elements: {}", g.elements.len(), shown.join(" "));

    for n in 1..=3usize {
        let row: Vec<String> = (2..30u64)
            .filter(|&p| is_prime(p) && (n as u64 + 1) % p != 0)
            .map(|p| {
                let f = build_field(p, 1).unwrap();
                let aux = auxiliary_laurent(&f, n, 1).unwrap();
                let v = facial_ordinary(&aux, p, DEFAULT_DIM_CAP).unwrap();
                format!("{p}:{}", if v.ordinary { "ord" } else { "-" })
            })
            .collect();
        println!("n={n}: {}", row.join(" "));
    }

    let f5 = Arc::new(build_field(5, 1)?);
    let poly = parse_laurent("x1 + 2*x1*x2 + x1*x2^2", 5, 1, None)?;
    println!("{:?}", nondegeneracy_search(&poly, &f5, 2, 1_000_000)?);
    Ok(())
}
