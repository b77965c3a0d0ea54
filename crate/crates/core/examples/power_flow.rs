// Backward/forward sweep on a radial feeder, then angle recovery.

use std::error::Error;

use opfrelax::bfm::{bfm_residual, recover_angles, RecoveryOptions};
use opfrelax::netmodel::{orient, parse_case, Orientation, TreeIndex};
use opfrelax::radial::{distflow_residual, fixed_injections, solve_radial, SweepOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder5.json"))?)?;
    let dnet = orient(&net, Orientation::AwayFromRoot)?;
    let x = solve_radial(&dnet, &fixed_injections(&net)?, SweepOptions::default())?;
    println!("slack injection {:.6}", x.s[0]);
    println!("total loss {:.3e}", x.s.iter().map(|s| s.re).sum::<f64>());

    let full = recover_angles(&dnet, &x, &TreeIndex::new(&dnet), RecoveryOptions::default())?;
    for (j, v) in full.voltage.values().iter().enumerate() {
        println!("V{j} = {:.6} ∠ {:+.6} rad", v.norm(), v.arg());
    }
    let (r1, r2) = (distflow_residual(&dnet, &x).max(), bfm_residual(&dnet, &full).max());
    println!("residuals: distflow {r1:.1e}, branch flow {r2:.1e}");
    if r2 > 1e-8 {
        return Err("recovered state does not solve the branch flow equations".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
