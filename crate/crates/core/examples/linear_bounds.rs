// Linear DistFlow bounds on power flows and voltages, in both orientations.

use std::error::Error;

use opfrelax::bfm::reverse_orientation;
use opfrelax::netmodel::{orient, parse_case, Orientation, TreeIndex};
use opfrelax::radial::{check_bounds, fixed_injections, solve_linear_distflow, solve_linear_reverse, solve_radial, SweepOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder5.json"))?)?;
    let s = fixed_injections(&net)?;
    let dnet = orient(&net, Orientation::AwayFromRoot)?;
    let x = solve_radial(&dnet, &s, SweepOptions::default())?;

    let lin = solve_linear_distflow(&dnet, &s)?;
    let away = check_bounds(&dnet, &x, &lin, &TreeIndex::new(&dnet), 1e-12);
    for e in &away.edges {
        println!("edge {}: S − S_lin = {:.3e}", e.edge, e.margin);
    }
    for b in &away.buses {
        println!("bus {}: v_lin − v = {:.3e}", b.bus, b.margin);
    }

    let (rdnet, rx) = reverse_orientation(&dnet, &x);
    let (_, rlin) = solve_linear_reverse(&net, &s)?;
    let toward = check_bounds(&rdnet, &rx, &rlin, &TreeIndex::new(&rdnet), 1e-12);
    println!("violations: away {}, toward {}", away.violations(), toward.violations());
    if away.violations() + toward.violations() > 0 {
        return Err("a linear bound failed on a load-only feeder".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
