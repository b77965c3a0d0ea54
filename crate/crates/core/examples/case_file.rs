// Load a case, orient it and inspect its spanning tree.

use std::error::Error;

use opfrelax::netmodel::{orient, parse_case, serialize_case, Orientation, TreeIndex};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder5.json"))?;
    let net = parse_case(&text)?;
    println!("buses {}, lines {}, radial {}", net.bus_count(), net.m(), net.is_radial());

    let dnet = orient(&net, Orientation::AwayFromRoot)?;
    println!("edges away from bus 0: {:?}", dnet.edges());
    let tree = TreeIndex::new(&dnet);
    for j in 1..net.bus_count() {
        println!("path to bus {j}: edges {:?}", tree.path(j));
    }
    println!("B_T^-1 = {}", tree.b_tree_inverse());

    if parse_case(&serialize_case(&net))? != net {
        return Err("case did not survive a round trip".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
