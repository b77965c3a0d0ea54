//! OPF relaxations: build, solve, check exactness, recover.
//!
//! Both relaxations are solved with the built-in cone solver. On a tree the
//! branch-flow and bus-injection SOCPs describe the same set through the maps
//! `g`/`g⁻¹` of [`crate::pmatrix`], so their optima coincide. On meshes the SOCP
//! only gives a lower bound; recovery is refused unless the cycle condition holds.

mod brute;
mod build;

pub use brute::{brute_force_opf, BruteForceResult};
pub use build::{build_bfm_socp, build_bim_socp, BfmIndex, BimIndex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bfm::{
    bfm_residual, check_cycle_condition, recover_angles, AngleRecoveryResult, BfmError, BranchFlowState, ComplexState,
    RecoveryOptions, DEFAULT_ANGLE_TOL,
};
use crate::netmodel::{DirectedNetwork, Network, TreeIndex};
use crate::pmatrix::{rank1_completion, two_by_two_checks, wg_to_x, EdgeCheck, PartialMatrix, PmatrixError, DEFAULT_RANK1_TOL};
use crate::socp::{self, ConeProblem, ConeSolution, KktResiduals, SolveStatus, SolverError, SolverOptions};

/// Default absolute tolerance on `v_j ℓ_jk − |S_jk|²`.
pub const DEFAULT_EXACT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// `Σ Re(z_jk) ℓ_jk`, equivalently `Σ_j Re s_j`.
    TotalLoss,
    /// `Σ_j c_j Re s_j`.
    WeightedGeneration(Vec<f64>),
    /// `tr(C W)` for Hermitian `C` supported on the diagonal and the network edges.
    QuadraticVoltage(DMatrix<Complex64>),
}

impl CostSpec {
    /// Generation cost with the per-bus weights stored in the case.
    pub fn generation_from(net: &Network) -> Self {
        CostSpec::WeightedGeneration(net.buses().iter().map(|b| b.cost).collect())
    }
}

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("invalid cost: {0}")]
    Cost(String),
    #[error(transparent)]
    Pmatrix(#[from] PmatrixError),
    #[error(transparent)]
    Bfm(#[from] BfmError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cone solver stopped with status {status:?}: {message}")]
    NotSolved { status: SolveStatus, message: String },
    #[error("relaxation is not exact ({:?}); no power-flow solution can be recovered", report.verdict)]
    Inexact { report: Box<ExactnessReport> },
    #[error("outside the model hypotheses: {0}")]
    Hypothesis(String),
    #[error("no feasible grid point among {0} candidates")]
    NoFeasiblePoint(usize),
}

/// `C` must be Hermitian and vanish off the diagonal and the network edges.
pub fn check_cost_on_graph(net: &Network, c: &DMatrix<Complex64>) -> Result<(), PmatrixError> {
    let nb = net.bus_count();
    if c.nrows() != nb || c.ncols() != nb {
        return Err(PmatrixError::Shape {
            expected: nb * nb,
            got: c.nrows() * c.ncols(),
        });
    }
    for j in 0..nb {
        for k in j..nb {
            let herm = (c[(j, k)] - c[(k, j)].conj()).norm() <= 1e-12 * (1.0 + c[(j, k)].norm());
            let on_graph = j == k || net.line_between(j, k).is_some() || c[(j, k)].norm() == 0.0;
            let finite = c[(j, k)].re.is_finite() && c[(j, k)].im.is_finite();
            if !(herm && on_graph && finite) {
                return Err(PmatrixError::CostOffGraph(j, k));
            }
        }
    }
    Ok(())
}

pub(crate) fn validate_cost(net: &Network, cost: &CostSpec) -> Result<(), RelaxError> {
    match cost {
        CostSpec::TotalLoss => Ok(()),
        CostSpec::WeightedGeneration(w) => {
            if w.len() != net.bus_count() {
                return Err(RelaxError::Cost(format!(
                    "{} weights for {} buses",
                    w.len(),
                    net.bus_count()
                )));
            }
            match w.iter().position(|x| !x.is_finite()) {
                Some(j) => Err(RelaxError::Cost(format!("weight of bus {j} is not finite"))),
                None => Ok(()),
            }
        }
        CostSpec::QuadraticVoltage(c) => Ok(check_cost_on_graph(net, c)?),
    }
}

/// Cost of a branch-flow state; `W_jk = v_j − z*S_jk` for the quadratic variant.
pub fn cost_of_state(dnet: &DirectedNetwork, x: &BranchFlowState, cost: &CostSpec) -> f64 {
    match cost {
        CostSpec::TotalLoss => (0..dnet.m()).map(|e| dnet.z(e).re * x.ell[e]).sum(),
        CostSpec::WeightedGeneration(w) => w.iter().zip(&x.s).map(|(c, s)| c * s.re).sum(),
        CostSpec::QuadraticVoltage(c) => {
            let diag: f64 = (0..dnet.bus_count()).map(|j| c[(j, j)].re * x.v[j]).sum();
            let off: f64 = dnet
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(j, k))| 2.0 * (c[(k, j)] * (x.v[j] - dnet.z(e).conj() * x.flow[e])).re)
                .sum();
            diag + off
        }
    }
}

/// Largest violation of the voltage and injection windows by a complex state.
pub fn opf_violation(net: &Network, x: &ComplexState) -> f64 {
    let out = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
    net.buses()
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let s = x.s[j];
            out(x.voltage[j].norm_sqr(), b.v_min, b.v_max)
                .max(out(s.re, b.s_min.re, b.s_max.re))
                .max(out(s.im, b.s_min.im, b.s_max.im))
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Bfm,
    Bim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exact,
    InexactCone,
    InexactCycle,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    /// `v_j ℓ_jk − |S_jk|²` per edge.
    pub gaps: Vec<f64>,
    pub tight: Vec<bool>,
    /// Edges whose cone is not tight.
    pub loose_edges: Vec<usize>,
    /// Cycle-condition check; `None` on trees, where it holds automatically.
    pub cycle: Option<AngleRecoveryResult>,
    pub verdict: Verdict,
    pub tol: f64,
}

/// Cone tightness per edge, then (meshes only, and only when all cones are tight) the
/// cycle condition.
pub fn check_exactness(
    dnet: &DirectedNetwork,
    x: &BranchFlowState,
    tree: &TreeIndex,
    tol: f64,
    angle_tol: f64,
) -> Result<ExactnessReport, RelaxError> {
    let gaps = x.cone_gaps(dnet);
    let tight: Vec<bool> = gaps.iter().map(|g| g.abs() <= tol).collect();
    let loose_edges: Vec<usize> = tight.iter().enumerate().filter(|(_, t)| !**t).map(|(e, _)| e).collect();
    let mesh = !tree.non_tree_edges().is_empty();
    let (cycle, verdict) = if !loose_edges.is_empty() {
        (None, Verdict::InexactCone)
    } else if mesh {
        let c = check_cycle_condition(dnet, x, tree, angle_tol)?;
        let v = if c.satisfied { Verdict::Exact } else { Verdict::InexactCycle };
        (Some(c), v)
    } else {
        (None, Verdict::Exact)
    };
    Ok(ExactnessReport {
        gaps,
        tight,
        loose_edges,
        cycle,
        verdict,
        tol,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    pub solver: SolverOptions,
    /// Absolute cone-gap tolerance for exactness.
    pub exact_tol: f64,
    pub angle_tol: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            exact_tol: DEFAULT_EXACT_TOL,
            angle_tol: DEFAULT_ANGLE_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverStats {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: KktResiduals,
    pub variables: usize,
    pub equalities: usize,
    pub cones: usize,
}

/// Outcome of one relaxation solve.
#[derive(Debug, Clone)]
pub struct OpfResult {
    pub model: Model,
    pub objective: f64,
    /// Optimal point mapped to branch-flow variables (through `g` for the BIM model).
    pub state: BranchFlowState,
    /// Optimal partial matrix (BIM model only).
    pub partial: Option<PartialMatrix>,
    /// 2×2 tests on the optimal partial matrix (BIM model only).
    pub edge_checks: Option<Vec<EdgeCheck>>,
    pub exactness: ExactnessReport,
    pub recovered: Option<ComplexState>,
    pub solution: ConeSolution,
    pub stats: SolverStats,
}

fn stats(p: &ConeProblem, sol: &ConeSolution) -> SolverStats {
    SolverStats {
        status: sol.status,
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        residuals: sol.residuals,
        variables: p.n_vars(),
        equalities: p.eq_rows.len(),
        cones: p.cones.len(),
    }
}

fn solve_checked(p: &ConeProblem, opts: &SolverOptions) -> Result<ConeSolution, RelaxError> {
    let sol = socp::solve(p, *opts)?;
    if sol.status != SolveStatus::Optimal {
        return Err(RelaxError::NotSolved {
            status: sol.status,
            message: sol.message.clone(),
        });
    }
    Ok(sol)
}

/// Moves `ℓ` onto the cone boundary, `ℓ = |S|²/v_j`. Used only once the gaps are
/// known to be within tolerance.
fn project_tight(dnet: &DirectedNetwork, x: &BranchFlowState) -> BranchFlowState {
    let mut y = x.clone();
    for (e, &(j, _)) in dnet.edges().iter().enumerate() {
        y.ell[e] = x.flow[e].norm_sqr() / x.v[j];
    }
    y
}

/// Branch-flow route: angle recovery on the (projected) relaxed state.
pub fn recover_bfm(
    dnet: &DirectedNetwork,
    x: &BranchFlowState,
    tree: &TreeIndex,
    report: &ExactnessReport,
    angle_tol: f64,
) -> Result<ComplexState, RelaxError> {
    if report.verdict != Verdict::Exact {
        return Err(RelaxError::Inexact {
            report: Box::new(report.clone()),
        });
    }
    let opts = RecoveryOptions {
        angle_tol,
        cone_tol: 1e-12,
    };
    Ok(recover_angles(dnet, &project_tight(dnet, x), tree, opts)?)
}

/// Bus-injection route: rank-1 completion of the (projected) partial matrix, then the
/// branch-flow state of the completed voltages.
pub fn recover_bim(
    dnet: &DirectedNetwork,
    w: &PartialMatrix,
    tree: &TreeIndex,
    report: &ExactnessReport,
) -> Result<ComplexState, RelaxError> {
    if report.verdict != Verdict::Exact {
        return Err(RelaxError::Inexact {
            report: Box::new(report.clone()),
        });
    }
    let off = w
        .edges()
        .iter()
        .zip(w.off())
        .map(|(&(j, k), &wjk)| {
            let r = (w.diag()[j] * w.diag()[k]).sqrt();
            if wjk.norm() > 0.0 {
                wjk * (r / wjk.norm())
            } else {
                Complex64::new(r, 0.0)
            }
        })
        .collect();
    let projected = PartialMatrix::new(w.edges().to_vec(), w.diag().to_vec(), off)?;
    let done = rank1_completion(&projected, tree, DEFAULT_RANK1_TOL)?;
    let x = crate::bfm::bim_to_bfm(dnet, &done.voltage);
    // the completion reproduces W on G; injections follow from the voltages
    Ok(x)
}

/// Recovers a power-flow solution from a solved relaxation by the route of its model.
pub fn recover_solution(dnet: &DirectedNetwork, result: &OpfResult, tree: &TreeIndex, angle_tol: f64) -> Result<ComplexState, RelaxError> {
    match (&result.model, &result.partial) {
        (Model::Bim, Some(w)) => recover_bim(dnet, w, tree, &result.exactness),
        _ => recover_bfm(dnet, &result.state, tree, &result.exactness, angle_tol),
    }
}

/// Solves the branch-flow SOCP and, when exact, recovers a solution.
pub fn solve_bfm(dnet: &DirectedNetwork, cost: &CostSpec, opts: &RelaxOptions) -> Result<OpfResult, RelaxError> {
    let (p, ix) = build_bfm_socp(dnet, cost)?;
    let sol = solve_checked(&p, &opts.solver)?;
    let state = ix.state(&sol.x);
    finish(dnet, Model::Bfm, state, None, &p, sol, opts)
}

/// Solves the bus-injection SOCP and, when exact, recovers a solution.
pub fn solve_bim(dnet: &DirectedNetwork, cost: &CostSpec, opts: &RelaxOptions) -> Result<OpfResult, RelaxError> {
    let (p, ix) = build_bim_socp(dnet, cost)?;
    let sol = solve_checked(&p, &opts.solver)?;
    let w = ix.partial(dnet, &sol.x)?;
    let mut state = wg_to_x(&w, dnet);
    // g reproduces the injections only up to solver accuracy; keep the solved ones
    state.s = (0..dnet.bus_count())
        .map(|j| Complex64::new(sol.x[ix.p_inj(j)], sol.x[ix.q_inj(j)]))
        .collect();
    finish(dnet, Model::Bim, state, Some(w), &p, sol, opts)
}

pub fn solve_relaxation(dnet: &DirectedNetwork, model: Model, cost: &CostSpec, opts: &RelaxOptions) -> Result<OpfResult, RelaxError> {
    match model {
        Model::Bfm => solve_bfm(dnet, cost, opts),
        Model::Bim => solve_bim(dnet, cost, opts),
    }
}

fn finish(
    dnet: &DirectedNetwork,
    model: Model,
    state: BranchFlowState,
    partial: Option<PartialMatrix>,
    p: &ConeProblem,
    sol: ConeSolution,
    opts: &RelaxOptions,
) -> Result<OpfResult, RelaxError> {
    let tree = TreeIndex::new(dnet);
    let exactness = check_exactness(dnet, &state, &tree, opts.exact_tol, opts.angle_tol)?;
    let edge_checks = partial.as_ref().map(|w| two_by_two_checks(w, DEFAULT_RANK1_TOL));
    let mut result = OpfResult {
        model,
        objective: sol.primal_objective,
        state,
        partial,
        edge_checks,
        exactness,
        recovered: None,
        stats: stats(p, &sol),
        solution: sol,
    };
    if result.exactness.verdict == Verdict::Exact {
        result.recovered = Some(recover_solution(dnet, &result, &tree, opts.angle_tol)?);
    }
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarVoltage {
    pub bus: usize,
    pub magnitude: f64,
    /// Radians.
    pub angle: f64,
}

/// JSON view of an [`OpfResult`].
#[derive(Debug, Clone, Serialize)]
pub struct OpfReport {
    pub model: Model,
    pub objective: f64,
    pub verdict: Verdict,
    pub gaps: Vec<f64>,
    pub loose_edges: Vec<usize>,
    pub cycle_defects: Option<Vec<f64>>,
    pub recovered: bool,
    pub voltages: Option<Vec<PolarVoltage>>,
    pub injections: Option<Vec<Complex64>>,
    pub bfm_residual: Option<f64>,
    pub solver: SolverStats,
}

impl OpfResult {
    pub fn report(&self, dnet: &DirectedNetwork) -> OpfReport {
        let voltages = self.recovered.as_ref().map(|x| {
            x.voltage
                .values()
                .iter()
                .enumerate()
                .map(|(bus, v)| PolarVoltage {
                    bus,
                    magnitude: v.norm(),
                    angle: v.arg(),
                })
                .collect()
        });
        OpfReport {
            model: self.model,
            objective: self.objective,
            verdict: self.exactness.verdict,
            gaps: self.exactness.gaps.clone(),
            loose_edges: self.exactness.loose_edges.clone(),
            cycle_defects: self
                .exactness
                .cycle
                .as_ref()
                .map(|c| c.defects.iter().map(|d| d.defect).collect()),
            recovered: self.recovered.is_some(),
            voltages,
            injections: self.recovered.as_ref().map(|x| x.s.clone()),
            bfm_residual: self.recovered.as_ref().map(|x| bfm_residual(dnet, x).max()),
            solver: self.stats.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{orient, Bus, Line, Orientation};
    use crate::radial::{solve_radial, SweepOptions};

    const Z: Complex64 = Complex64::new(0.01, 0.02);

    fn two_bus(load: Complex64) -> Network {
        Network::new(
            vec![Bus::unbounded(0, 1.0, 1.0), Bus::fixed(1, -load, 0.81, 1.21)],
            vec![Line::new(0, 1, Z)],
            1.0,
        )
        .unwrap()
    }

    fn away(net: &Network) -> DirectedNetwork {
        orient(net, Orientation::AwayFromRoot).unwrap()
    }

    /// Fixed point of `ℓ = |s + zℓ|²`, `v₁ = 1 − 2Re(z*(s + zℓ)) + |z|²ℓ` by iteration.
    fn two_bus_oracle(load: Complex64) -> (f64, f64) {
        let mut ell = 0.0;
        for _ in 0..200 {
            ell = (load + Z * ell).norm_sqr();
        }
        let s01 = load + Z * ell;
        (ell, 1.0 - 2.0 * (Z.conj() * s01).re + Z.norm_sqr() * ell)
    }

    #[test]
    fn bfm_dimensions() {
        let net = two_bus(Complex64::new(0.1, 0.05));
        let (p, ix) = build_bfm_socp(&away(&net), &CostSpec::TotalLoss).unwrap();
        assert_eq!(p.cones.len(), 1);
        assert_eq!(p.n_vars(), 3 + 2 + 4);
        assert_eq!(ix.len(), p.n_vars());
        // balance (2 per bus) + drop + v0 pin
        assert_eq!(p.eq_rows.len(), 4 + 1 + 1);
    }

    #[test]
    fn two_bus_loss_matches_oracle() {
        let load = Complex64::new(0.1, 0.05);
        let net = two_bus(load);
        let dnet = away(&net);
        let (ell, v1) = two_bus_oracle(load);
        for model in [Model::Bfm, Model::Bim] {
            let r = solve_relaxation(&dnet, model, &CostSpec::TotalLoss, &RelaxOptions::default()).unwrap();
            assert!((r.objective - Z.re * ell).abs() < 1e-6, "{model:?}: {} vs {}", r.objective, Z.re * ell);
            assert_eq!(r.exactness.verdict, Verdict::Exact);
            assert!((r.state.v[1] - v1).abs() < 1e-6);
            let x = r.recovered.as_ref().unwrap();
            assert!(bfm_residual(&dnet, x).max() < 1e-7);
            assert!(opf_violation(&net, x) < 1e-7);
            assert!((cost_of_state(&dnet, &crate::bfm::relax_magnitudes(x), &CostSpec::TotalLoss) - r.objective).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_load_has_zero_loss() {
        let net = two_bus(Complex64::new(0.0, 0.0));
        let dnet = away(&net);
        let r = solve_bfm(&dnet, &CostSpec::TotalLoss, &RelaxOptions::default()).unwrap();
        assert!(r.objective.abs() < 1e-8);
        assert!(r.state.flow[0].norm() < 1e-6);
        let x = r.recovered.unwrap();
        for v in x.voltage.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn inflated_current_is_reported_by_edge() {
        let net = Network::new(
            vec![
                Bus::unbounded(0, 1.0, 1.0),
                Bus::fixed(1, Complex64::new(-0.1, -0.05), 0.81, 1.21),
                Bus::fixed(2, Complex64::new(-0.05, -0.02), 0.81, 1.21),
            ],
            vec![Line::new(0, 1, Z), Line::new(1, 2, Z)],
            1.0,
        )
        .unwrap();
        let dnet = away(&net);
        let tree = TreeIndex::new(&dnet);
        let mut x = solve_radial(&dnet, &crate::radial::fixed_injections(&net).unwrap(), SweepOptions::default()).unwrap();
        let exact = check_exactness(&dnet, &x, &tree, DEFAULT_EXACT_TOL, DEFAULT_ANGLE_TOL).unwrap();
        assert_eq!(exact.verdict, Verdict::Exact);
        x.ell[1] += 1e-3;
        let r = check_exactness(&dnet, &x, &tree, DEFAULT_EXACT_TOL, DEFAULT_ANGLE_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::InexactCone);
        assert_eq!(r.loose_edges, vec![1]);
        let err = recover_bfm(&dnet, &x, &tree, &r, DEFAULT_ANGLE_TOL).unwrap_err();
        assert!(matches!(err, RelaxError::Inexact { .. }));
    }

    #[test]
    fn cost_validation() {
        let net = two_bus(Complex64::new(0.1, 0.05));
        let dnet = away(&net);
        assert!(build_bfm_socp(&dnet, &CostSpec::WeightedGeneration(vec![1.0])).is_err());
        assert!(build_bfm_socp(&dnet, &CostSpec::WeightedGeneration(vec![1.0, f64::NAN])).is_err());
        let mut c = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        c[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(build_bim_socp(&dnet, &CostSpec::QuadraticVoltage(c.clone())).is_err());
        c[(1, 0)] = Complex64::new(0.0, -1.0);
        assert!(build_bim_socp(&dnet, &CostSpec::QuadraticVoltage(c)).is_ok());
    }

    #[test]
    fn quadratic_cost_off_graph_rejected() {
        let net = Network::new(
            vec![Bus::unbounded(0, 1.0, 1.0), Bus::unbounded(1, 0.81, 1.21), Bus::unbounded(2, 0.81, 1.21)],
            vec![Line::new(0, 1, Z), Line::new(1, 2, Z)],
            1.0,
        )
        .unwrap();
        let mut c = DMatrix::from_element(3, 3, Complex64::new(0.0, 0.0));
        c[(0, 2)] = Complex64::new(1.0, 0.0);
        c[(2, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(check_cost_on_graph(&net, &c), Err(PmatrixError::CostOffGraph(0, 2))));
    }

    #[test]
    fn quadratic_cost_agrees_across_models() {
        let net = Network::new(
            vec![
                Bus::unbounded(0, 1.0, 1.0),
                Bus::fixed(1, Complex64::new(-0.1, -0.05), 0.81, 1.21),
                Bus::fixed(2, Complex64::new(-0.05, -0.02), 0.81, 1.21),
            ],
            vec![Line::new(0, 1, Z), Line::new(1, 2, Z)],
            1.0,
        )
        .unwrap();
        let dnet = away(&net);
        let mut c = DMatrix::from_element(3, 3, Complex64::new(0.0, 0.0));
        c[(1, 1)] = Complex64::new(1.0, 0.0);
        c[(2, 2)] = Complex64::new(2.0, 0.0);
        c[(1, 2)] = Complex64::new(-0.5, 0.1);
        c[(2, 1)] = Complex64::new(-0.5, -0.1);
        let cost = CostSpec::QuadraticVoltage(c);
        let a = solve_bfm(&dnet, &cost, &RelaxOptions::default()).unwrap();
        let b = solve_bim(&dnet, &cost, &RelaxOptions::default()).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-7, "{} vs {}", a.objective, b.objective);
        // the power flow of the fixed loads is feasible, so it bounds the relaxation from above
        let x = solve_radial(&dnet, &crate::radial::fixed_injections(&net).unwrap(), SweepOptions::default()).unwrap();
        let pf = cost_of_state(&dnet, &x, &cost);
        assert!(a.objective <= pf + 1e-7, "{} > {pf}", a.objective);
        if a.exactness.verdict == Verdict::Exact {
            assert!((pf - a.objective).abs() < 1e-6, "{pf} vs {}", a.objective);
        }
    }

    #[test]
    fn report_serializes() {
        let net = two_bus(Complex64::new(0.1, 0.05));
        let dnet = away(&net);
        let r = solve_bfm(&dnet, &CostSpec::TotalLoss, &RelaxOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(r.report(&dnet)).unwrap();
        assert_eq!(v["verdict"], "exact");
        assert_eq!(v["voltages"].as_array().unwrap().len(), 2);
        assert_eq!(v["solver"]["status"], "optimal");
    }
}
