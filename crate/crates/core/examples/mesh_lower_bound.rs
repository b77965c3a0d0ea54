// On a meshed network the relaxation is a lower bound with a verdict attached.

use std::error::Error;

use opfrelax::netmodel::{orient, parse_case, Orientation};
use opfrelax::relax::{solve_bfm, CostSpec, RelaxOptions, Verdict};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/ring3.json"))?)?;
    let dnet = orient(&net, Orientation::AsListed)?;
    let res = solve_bfm(&dnet, &CostSpec::TotalLoss, &RelaxOptions::default())?;
    println!("loss lower bound {:.9}", res.objective);
    println!("cone gaps {:?}", res.exactness.gaps);
    if let Some(c) = &res.exactness.cycle {
        for d in &c.defects {
            println!("cycle {:?}: defect {:+.3e} rad", d.cycle, d.defect);
        }
    }
    match res.exactness.verdict {
        Verdict::Exact => println!("exact: a power flow solution was recovered"),
        v => println!("{v:?}: only the bound is reported"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
