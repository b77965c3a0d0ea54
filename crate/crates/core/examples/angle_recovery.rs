// The cycle condition decides whether voltage angles can be recovered on a mesh.

use std::error::Error;

use opfrelax::bfm::{bim_to_bfm, check_cycle_condition, recover_angles, relax_magnitudes, RecoveryOptions, DEFAULT_ANGLE_TOL};
use opfrelax::bim::VoltageProfile;
use opfrelax::netmodel::{orient, parse_case, Orientation, TreeIndex};
use opfrelax::Complex64;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/ring3.json"))?)?;
    let dnet = orient(&net, Orientation::AsListed)?;
    let tree = TreeIndex::new(&dnet);
    let v = VoltageProfile::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(0.98, -0.02),
        Complex64::from_polar(0.97, -0.035),
    ])?;

    // magnitudes of a genuine profile: the cycle closes and the angles come back
    let x = relax_magnitudes(&bim_to_bfm(&dnet, &v));
    let ok = check_cycle_condition(&dnet, &x, &tree, DEFAULT_ANGLE_TOL)?;
    println!("genuine: satisfied {}, theta {:?}", ok.satisfied, ok.theta);
    let back = recover_angles(&dnet, &x, &tree, RecoveryOptions::default())?;
    println!("recovered V2 = {:.6}", back.voltage[2]);

    // rotate one branch flow: every cone stays tight but the cycle no longer closes
    let mut twisted = x.clone();
    twisted.flow[0] *= Complex64::from_polar(1.0, 1.0);
    let bad = check_cycle_condition(&dnet, &twisted, &tree, DEFAULT_ANGLE_TOL)?;
    println!("twisted: satisfied {}, defect {:.3e} rad", bad.satisfied, bad.defects[0].defect);
    match recover_angles(&dnet, &twisted, &tree, RecoveryOptions::default()) {
        Err(e) => println!("refused: {e}"),
        Ok(_) => return Err("a twisted ring should not be recoverable".into()),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
