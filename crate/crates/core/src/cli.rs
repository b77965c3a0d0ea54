//! `opfrelax` command line.
//!
//! Every command writes one JSON document (compact, or indented with `--pretty`) to
//! stdout or `--out`. Exit codes: 0 success, 1 usage or parse error, 2 numerical
//! non-convergence, 3 input outside the model's hypotheses.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bfm::{bfm_residual, recover_angles, RecoveryOptions};
use crate::generate::{self, GenParams};
use crate::netmodel::{orient, parse_case, Network, Orientation, TreeIndex};
use crate::pmatrix::{chordal_extension, sdp_standard_form};
use crate::radial::{check_bounds, distflow_residual, fixed_injections, solve_linear_distflow, solve_radial, RadialError, SweepOptions};
use crate::relax::{solve_relaxation, CostSpec, Model, RelaxError, RelaxOptions};
use crate::socp::SolverOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "opfrelax", version, about = "Power flow, OPF relaxations and chordal analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Indent the JSON report.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Solver and convergence tolerance.
    #[arg(long, global = true, env = "OPFRELAX_TOL")]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radial power flow: sweep solve, angle recovery, residuals.
    Pf {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, value_enum, default_value_t = Orient::Away)]
        orientation: Orient,
        #[command(flatten)]
        common: Common,
    },
    /// Solve an SOCP relaxation, check exactness, recover a solution.
    Relax {
        #[arg(long)]
        case: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Bfm)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = CostArg::Loss)]
        cost: CostArg,
        /// Defaults to away-from-root on trees and the listed directions on meshes.
        #[arg(long, value_enum)]
        orientation: Option<Orient>,
        #[command(flatten)]
        common: Common,
    },
    /// Check the linear DistFlow bounds on a case or on random radial instances.
    Bounds {
        /// Single case; when absent, random instances are generated.
        #[arg(long)]
        case: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Largest bus count of a random instance.
        #[arg(long, default_value_t = 30)]
        buses: usize,
        /// Flip random loads into generation.
        #[arg(long)]
        generators: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Chordal extension, maximal cliques and decoupling counts.
    Chordal {
        #[arg(long)]
        case: PathBuf,
        /// JSON array with an elimination ordering of all buses.
        #[arg(long)]
        ordering: Option<PathBuf>,
        /// Write the block SDP standard form here.
        #[arg(long)]
        sdp_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CostArg::Loss)]
        cost: CostArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Orient {
    Away,
    Toward,
    Listed,
}

impl From<Orient> for Orientation {
    fn from(o: Orient) -> Self {
        match o {
            Orient::Away => Orientation::AwayFromRoot,
            Orient::Toward => Orientation::TowardRoot,
            Orient::Listed => Orientation::AsListed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bfm,
    Bim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    /// Total line loss.
    Loss,
    /// Real injection weighted by each bus's `cost` field.
    Gen,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_case(path: &Path) -> Result<Network, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    parse_case(&text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn tolerance(common: &Common, default: f64) -> Result<f64, Failure> {
    match common.tol {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(fail(EXIT_USAGE, format!("tolerance must be positive, got {t}"))),
    }
}

fn radial_failure(e: RadialError) -> Failure {
    match e {
        RadialError::NoConvergence { .. } => fail(EXIT_NUMERIC, e.to_string()),
        RadialError::NotRadial { .. } => fail(EXIT_HYPOTHESIS, format!("radial solver requires tree: {e}")),
        RadialError::UnfixedInjection(_) => fail(EXIT_HYPOTHESIS, e.to_string()),
        RadialError::Length { .. } => fail(EXIT_USAGE, e.to_string()),
    }
}

fn cost_spec(net: &Network, c: CostArg) -> CostSpec {
    match c {
        CostArg::Loss => CostSpec::TotalLoss,
        CostArg::Gen => CostSpec::generation_from(net),
    }
}

fn polar(v: &[Complex64]) -> Vec<Value> {
    v.iter()
        .enumerate()
        .map(|(bus, x)| json!({"bus": bus, "magnitude": x.norm(), "angle": x.arg()}))
        .collect()
}

fn cmd_pf(case: &Path, orientation: Orient, common: &Common) -> Result<Value, Failure> {
    let net = read_case(case)?;
    if !net.is_radial() {
        return Err(fail(EXIT_HYPOTHESIS, "radial solver requires tree"));
    }
    if orientation == Orient::Listed {
        return Err(fail(EXIT_USAGE, "power flow needs --orientation away or toward"));
    }
    let dnet = orient(&net, orientation.into()).map_err(|e| fail(EXIT_HYPOTHESIS, e.to_string()))?;
    let s = fixed_injections(&net).map_err(radial_failure)?;
    let opts = SweepOptions {
        tol: tolerance(common, SweepOptions::default().tol)?,
        ..SweepOptions::default()
    };
    let x = solve_radial(&dnet, &s, opts).map_err(radial_failure)?;
    let tree = TreeIndex::new(&dnet);
    let full = recover_angles(&dnet, &x, &tree, RecoveryOptions::default()).map_err(|e| fail(EXIT_NUMERIC, e.to_string()))?;
    Ok(json!({
        "command": "pf",
        "buses": net.bus_count(),
        "edges": dnet.edges(),
        "v": x.v,
        "ell": x.ell,
        "flow": x.flow,
        "injections": x.s,
        "voltages": polar(full.voltage.values()),
        "distflow_residual": distflow_residual(&dnet, &x).max(),
        "bfm_residual": bfm_residual(&dnet, &full).max(),
    }))
}

fn cmd_relax(case: &Path, model: ModelArg, cost: CostArg, orientation: Option<Orient>, common: &Common) -> Result<Value, Failure> {
    let net = read_case(case)?;
    let mode = match orientation {
        Some(o) => o.into(),
        None if net.is_radial() => Orientation::AwayFromRoot,
        None => Orientation::AsListed,
    };
    let dnet = orient(&net, mode).map_err(|e| fail(EXIT_HYPOTHESIS, e.to_string()))?;
    let opts = RelaxOptions {
        solver: SolverOptions::with_tol(tolerance(common, SolverOptions::default().feas_tol)?),
        ..RelaxOptions::default()
    };
    let model = match model {
        ModelArg::Bfm => Model::Bfm,
        ModelArg::Bim => Model::Bim,
    };
    let result = solve_relaxation(&dnet, model, &cost_spec(&net, cost), &opts).map_err(|e| match e {
        RelaxError::NotSolved { .. } => fail(EXIT_NUMERIC, e.to_string()),
        RelaxError::Cost(_) | RelaxError::Hypothesis(_) | RelaxError::Pmatrix(_) => fail(EXIT_HYPOTHESIS, e.to_string()),
        _ => fail(EXIT_NUMERIC, e.to_string()),
    })?;
    let mut report = serde_json::to_value(result.report(&dnet)).expect("report serializes");
    report["command"] = json!("relax");
    report["mesh"] = json!(!net.is_radial());
    Ok(report)
}

#[derive(Debug, Default, Serialize)]
struct BoundsSummary {
    instances: usize,
    in_hypothesis: usize,
    violations: usize,
    out_of_hypothesis: usize,
    out_of_hypothesis_violations: usize,
    max_identity_residual: f64,
    min_edge_margin: f64,
    min_bus_margin: f64,
    all_tight: bool,
    notes: Vec<String>,
}

fn bounds_on(net: &Network, summary: &mut BoundsSummary, slack: f64) -> Result<(), Failure> {
    let dnet = orient(net, Orientation::AwayFromRoot).map_err(|e| fail(EXIT_HYPOTHESIS, e.to_string()))?;
    let s = fixed_injections(net).map_err(radial_failure)?;
    let x = solve_radial(&dnet, &s, SweepOptions::default()).map_err(radial_failure)?;
    let lin = solve_linear_distflow(&dnet, &s).map_err(radial_failure)?;
    let tree = TreeIndex::new(&dnet);
    let report = check_bounds(&dnet, &x, &lin, &tree, slack);
    // the bounds are stated for loads and lines with r, x ≥ 0
    let loads_only = s.iter().skip(1).all(|v| v.re <= 0.0 && v.im <= 0.0)
        && net.lines().iter().all(|l| l.z.re >= 0.0 && l.z.im >= 0.0);
    summary.instances += 1;
    if loads_only {
        summary.in_hypothesis += 1;
        summary.violations += report.violations();
    } else {
        summary.out_of_hypothesis += 1;
        summary.out_of_hypothesis_violations += report.violations();
    }
    summary.max_identity_residual = summary.max_identity_residual.max(report.max_identity_residual());
    for e in &report.edges {
        summary.min_edge_margin = summary.min_edge_margin.min(e.margin.re.min(e.margin.im));
    }
    for b in &report.buses {
        summary.min_bus_margin = summary.min_bus_margin.min(b.margin);
    }
    summary.all_tight &= report.all_tight(slack);
    Ok(())
}

fn cmd_bounds(
    case: Option<&Path>,
    seed: u64,
    instances: usize,
    buses: usize,
    generators: bool,
    common: &Common,
) -> Result<Value, Failure> {
    let slack = tolerance(common, 1e-9)?;
    let mut summary = BoundsSummary {
        min_edge_margin: f64::INFINITY,
        min_bus_margin: f64::INFINITY,
        all_tight: true,
        ..BoundsSummary::default()
    };
    match case {
        Some(path) => bounds_on(&read_case(path)?, &mut summary, slack)?,
        None => {
            if buses < 2 {
                return Err(fail(EXIT_USAGE, "--buses must be at least 2"));
            }
            let mut rng = generate::rng(seed);
            let params = GenParams::default();
            for _ in 0..instances {
                let nb = rand::Rng::gen_range(&mut rng, 2..=buses);
                let mut net = generate::random_tree(&mut rng, nb, &params);
                if generators {
                    let s: Vec<Complex64> = net.buses().iter().map(|b| -b.s_min).collect();
                    net = net.with_fixed_injections(&s).expect("same network");
                }
                bounds_on(&net, &mut summary, slack)?;
            }
        }
    }
    if summary.all_tight {
        summary.notes.push("all bounds tight".into());
    }
    if summary.out_of_hypothesis > 0 {
        summary
            .notes
            .push("instances with generation are outside the load-only hypothesis; their violations are not failures".into());
    }
    let mut v = serde_json::to_value(&summary).expect("summary serializes");
    v["command"] = json!("bounds");
    Ok(v)
}

fn cmd_chordal(case: &Path, ordering: Option<&Path>, sdp_out: Option<&Path>, cost: CostArg) -> Result<Value, Failure> {
    let net = read_case(case)?;
    let ord: Option<Vec<usize>> = match ordering {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let edges: Vec<(usize, usize)> = net.lines().iter().map(|l| (l.from, l.to)).collect();
    let ext = chordal_extension(net.bus_count(), &edges, ord.as_deref()).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    if let Some(path) = sdp_out {
        let form = sdp_standard_form(&ext, &net, &cost_spec(&net, cost)).map_err(|e| fail(EXIT_HYPOTHESIS, e.to_string()))?;
        std::fs::write(path, form.to_json()).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    }
    Ok(json!({
        "command": "chordal",
        "buses": net.bus_count(),
        "fill": ext.fill,
        "ordering": ext.ordering,
        "cliques": ext.cliques,
        "clique_sizes": ext.cliques.iter().map(|c| c.len()).collect::<Vec<_>>(),
        "clique_tree": ext.clique_tree,
        "separators": ext.separators,
        "decoupling_count": ext.decoupling_count(),
        "chordal": ext.is_chordal(),
        "sdp_out": sdp_out.map(|p| p.display().to_string()),
    }))
}

fn execute(cli: &Cli) -> Result<(Value, Common), Failure> {
    match &cli.command {
        Command::Pf { case, orientation, common } => Ok((cmd_pf(case, *orientation, common)?, common.clone())),
        Command::Relax {
            case,
            model,
            cost,
            orientation,
            common,
        } => Ok((cmd_relax(case, *model, *cost, *orientation, common)?, common.clone())),
        Command::Bounds {
            case,
            seed,
            instances,
            buses,
            generators,
            common,
        } => Ok((
            cmd_bounds(case.as_deref(), *seed, *instances, *buses, *generators, common)?,
            common.clone(),
        )),
        Command::Chordal {
            case,
            ordering,
            sdp_out,
            cost,
            common,
        } => Ok((
            cmd_chordal(case, ordering.as_deref(), sdp_out.as_deref(), *cost)?,
            common.clone(),
        )),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, common)) => {
            let text = if common.pretty {
                serde_json::to_string_pretty(&report)
            } else {
                serde_json::to_string(&report)
            }
            .expect("reports serialize");
            match &common.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        let _ = writeln!(stderr, "error: {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                }
                None => {
                    let _ = writeln!(stdout, "{text}");
                }
            }
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
