#[allow(dead_code)]
mod case_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/case_file.rs"));
}

#[test]
fn case_file_runs() {
    case_file::run_example().expect("case_file example should run");
}

#[allow(dead_code)]
mod power_flow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/power_flow.rs"));
}

#[test]
fn power_flow_runs() {
    power_flow::run_example().expect("power_flow example should run");
}

#[allow(dead_code)]
mod bijection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bijection.rs"));
}

#[test]
fn bijection_runs() {
    bijection::run_example().expect("bijection example should run");
}

#[allow(dead_code)]
mod qcqp {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/qcqp.rs"));
}

#[test]
fn qcqp_runs() {
    qcqp::run_example().expect("qcqp example should run");
}

#[allow(dead_code)]
mod linear_bounds {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/linear_bounds.rs"));
}

#[test]
fn linear_bounds_runs() {
    linear_bounds::run_example().expect("linear_bounds example should run");
}

#[allow(dead_code)]
mod angle_recovery {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/angle_recovery.rs"));
}

#[test]
fn angle_recovery_runs() {
    angle_recovery::run_example().expect("angle_recovery example should run");
}

#[allow(dead_code)]
mod rank1_completion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rank1_completion.rs"));
}

#[test]
fn rank1_completion_runs() {
    rank1_completion::run_example().expect("rank1_completion example should run");
}

#[allow(dead_code)]
mod chordal_sdp {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/chordal_sdp.rs"));
}

#[test]
fn chordal_sdp_runs() {
    chordal_sdp::run_example().expect("chordal_sdp example should run");
}

#[allow(dead_code)]
mod socp_solve {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/socp_solve.rs"));
}

#[test]
fn socp_solve_runs() {
    socp_solve::run_example().expect("socp_solve example should run");
}

#[allow(dead_code)]
mod relaxation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/relaxation.rs"));
}

#[test]
fn relaxation_runs() {
    relaxation::run_example().expect("relaxation example should run");
}

#[allow(dead_code)]
mod mesh_lower_bound {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/mesh_lower_bound.rs"));
}

#[test]
fn mesh_lower_bound_runs() {
    mesh_lower_bound::run_example().expect("mesh_lower_bound example should run");
}

#[allow(dead_code)]
mod brute_force {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/brute_force.rs"));
}

#[test]
fn brute_force_runs() {
    brute_force::run_example().expect("brute_force example should run");
}
