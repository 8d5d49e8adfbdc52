//! Newton polytope data: facets, weights, Hodge numbers and the Hodge polygon.
use inverted_kloosterman::polytope::{ik_polytope, PolytopeData, DEFAULT_BOX_BUDGET, DEFAULT_DIM_CAP};

fn main() -> inverted_kloosterman::Result<()> {
    for n in 1..=3 {
        let ik = ik_polytope(n)?;
        let h = ik.data.hodge_data(None, DEFAULT_BOX_BUDGET)?;
        println!("n={n}: D={} W={:?} H={:?} nvol={}", h.d, h.w, h.h, h.normalized_volume);
    }

    // a polytope with a non-trivial denominator
    let square = PolytopeData::from_json(r#"{"vertices":[[2,0],[0,2],[-2,0],[0,-2],[1,1]]}"#, DEFAULT_DIM_CAP)?;
    let h = square.hodge_data(None, DEFAULT_BOX_BUDGET)?;
    println!("{}", serde_json::to_string(&h.to_json()).unwrap());
    print!("{}", h.polygon_csv());
    Ok(())
}
