// The OPF written as a quadratically constrained quadratic program in V.

use std::error::Error;

use opfrelax::bim::{build_qcqp, QcqpRowKind, VoltageProfile};
use opfrelax::netmodel::parse_case;
use opfrelax::relax::CostSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = parse_case(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/feeder3_boxed.json"))?)?;
    let q = build_qcqp(&net, &CostSpec::generation_from(&net));
    let count = |k: QcqpRowKind| q.constraints.iter().filter(|c| c.kind == k).count();
    println!(
        "{} rows: {} real-power, {} reactive, {} voltage",
        q.constraints.len(),
        count(QcqpRowKind::RealUpper) + count(QcqpRowKind::RealLower),
        count(QcqpRowKind::ReactiveUpper) + count(QcqpRowKind::ReactiveLower),
        count(QcqpRowKind::VoltageUpper) + count(QcqpRowKind::VoltageLower),
    );
    // a flat profile draws no power, so every load box is violated
    let flat = VoltageProfile::flat(net.bus_count(), 1.0);
    println!("flat profile: cost {:.4}, worst violation {:.4}", q.objective_value(&flat), q.max_violation(&flat));
    if q.max_violation(&flat) <= 0.0 {
        return Err("flat start should miss the load boxes".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
