// Both SOCP relaxations of an OPF with injection boxes, exactness and recovery.

use std::error::Error;

use opfrelax::netmodel::{orient, parse_case, Orientation};
use opfrelax::relax::{solve_relaxation, CostSpec, Model, RelaxOptions, Verdict};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder3_boxed.json"))?)?;
    let dnet = orient(&net, Orientation::AwayFromRoot)?;
    let cost = CostSpec::generation_from(&net);

    let mut objectives = Vec::new();
    for model in [Model::Bfm, Model::Bim] {
        let res = solve_relaxation(&dnet, model, &cost, &RelaxOptions::default())?;
        let report = res.report(&dnet);
        println!(
            "{model:?}: objective {:.9}, verdict {:?}, {} iterations",
            report.objective, report.verdict, report.solver.iterations
        );
        if let Some(s) = &report.injections {
            println!("  optimal injections {s:.5?}");
        }
        if report.verdict != Verdict::Exact {
            return Err("radial relaxation should be exact".into());
        }
        objectives.push(report.objective);
    }
    println!("model gap {:.1e}", (objectives[0] - objectives[1]).abs());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
