// Grid search over injections gives an upper reference for the relaxation.

use std::error::Error;

use opfrelax::netmodel::{orient, parse_case, Orientation};
use opfrelax::relax::{brute_force_opf, solve_bfm, CostSpec, RelaxOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder3_boxed.json"))?)?;
    let dnet = orient(&net, Orientation::AwayFromRoot)?;
    let cost = CostSpec::generation_from(&net);

    let grid = brute_force_opf(&net, &cost, 9)?;
    let socp = solve_bfm(&dnet, &cost, &RelaxOptions::default())?.objective;
    println!(
        "grid: {} points, {} feasible, best {:.9} (polish gained {:.1e}, slack {:.1e})",
        grid.grid_points, grid.feasible_points, grid.c_opt, grid.polish_gain, grid.grid_slack
    );
    println!("relaxation {socp:.9}, difference {:.1e}", grid.c_opt - socp);
    if socp > grid.c_opt + grid.grid_slack + 1e-6 {
        return Err("relaxation exceeded a feasible cost".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
