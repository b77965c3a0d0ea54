// A partial matrix on the graph edges completed to V Vᴴ.

use std::error::Error;

use opfrelax::bim::VoltageProfile;
use opfrelax::netmodel::{orient, parse_case, Orientation, TreeIndex};
use opfrelax::pmatrix::{partial_from_voltage, rank1_completion, two_by_two_checks, DEFAULT_RANK1_TOL};
use opfrelax::Complex64;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fig1.json"))?)?;
    let dnet = orient(&net, Orientation::AsListed)?;
    let v = VoltageProfile::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(0.99, -0.01),
        Complex64::from_polar(0.98, -0.02),
        Complex64::from_polar(0.985, 0.01),
        Complex64::from_polar(0.97, -0.03),
    ])?;
    let w = partial_from_voltage(&v, &dnet);
    println!("{} known entries off the diagonal", w.off().len());
    for c in two_by_two_checks(&w, DEFAULT_RANK1_TOL) {
        println!("edge {}: psd {}, rank-1 {}, gap {:+.1e}", c.edge, c.psd, c.rank1, c.relative_gap);
    }

    let done = rank1_completion(&w, &TreeIndex::new(&dnet), DEFAULT_RANK1_TOL)?;
    let err = w.distance_to(&done.full);
    println!("completion matches the known entries to {err:.1e}");
    println!("W[1][4] (not on the graph) = {:.6}", done.full[(1, 4)]);
    if err > 1e-12 {
        return Err("completion disagrees with the partial matrix".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
