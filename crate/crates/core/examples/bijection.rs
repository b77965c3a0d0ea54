// Voltages on a meshed network mapped to branch flows and back.

use std::error::Error;

use opfrelax::bfm::{bfm_residual, bfm_to_bim, bim_to_bfm};
use opfrelax::bim::{bim_residual, injections_from_voltage};
use opfrelax::generate::{self, GenParams};
use opfrelax::netmodel::{orient, Orientation};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = generate::rng(11);
    let net = generate::random_connected(&mut rng, 8, 4, &GenParams::default());
    let v = generate::random_voltage(&mut rng, 8);
    let dnet = orient(&net, Orientation::AsListed)?;

    let x = bim_to_bfm(&dnet, &v);
    println!("branch flow residual of the image: {:.1e}", bfm_residual(&dnet, &x).max());
    let s = injections_from_voltage(&net, &v);
    println!("bus injection residual: {:.1e}", bim_residual(&net, &v, &s).max_abs());

    let back = bfm_to_bim(&dnet, &x, 1e-8)?;
    if back.values() != v.values() {
        return Err("round trip changed the voltages".into());
    }
    println!("round trip reproduces all {} voltages exactly", back.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
