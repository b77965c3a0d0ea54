//! Branch flow model.
//!
//! Complex states `(S, I, V, s)` satisfying Ohm's law, the branch-power definition and
//! per-bus balance; their magnitude relaxation `(S, ℓ, v, s)`; implied angle
//! differences and recovery of phase angles on a spanning tree.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::angle::{winding, wrap};
use crate::bim::{injections_from_voltage, ProfileError, VoltageProfile};
use crate::netmodel::{DirectedNetwork, TreeIndex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default band for "equal to zero mod 2π" (radians).
pub const DEFAULT_ANGLE_TOL: f64 = 1e-6;
/// Default tolerance on residuals when a state is required to satisfy the model.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BfmError {
    #[error("branch flow residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },
    #[error("edge {edge}: v_j − z*S_jk vanishes, angle difference undefined")]
    DegenerateEdge { edge: usize },
    #[error("cycle condition violated on {} cycle(s); worst defect {worst:.3e} rad on edge {edge}", defects.len())]
    CycleViolation {
        defects: Vec<CycleDefect>,
        edge: usize,
        worst: f64,
    },
    #[error("edge {edge}: v_j ℓ_jk − |S_jk|² = {gap:e}, state is not on the cone boundary")]
    NotOnBoundary { edge: usize, gap: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// A point of the branch flow model.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    /// Sending-end branch power `S_jk` per directed edge.
    pub flow: Vec<Complex64>,
    /// Branch current `I_jk` per directed edge.
    pub current: Vec<Complex64>,
    pub voltage: VoltageProfile,
    /// Bus injections.
    pub s: Vec<Complex64>,
}

/// A point of the relaxed (angle-free) branch flow model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchFlowState {
    /// `S_jk` per directed edge.
    pub flow: Vec<Complex64>,
    /// `ℓ_jk = |I_jk|²` per directed edge.
    pub ell: Vec<f64>,
    /// `v_j = |V_j|²` per bus.
    pub v: Vec<f64>,
    pub s: Vec<Complex64>,
}

impl BranchFlowState {
    /// No flow, every bus at `v0`.
    pub fn flat(dnet: &DirectedNetwork) -> Self {
        Self {
            flow: vec![ZERO; dnet.m()],
            ell: vec![0.0; dnet.m()],
            v: vec![dnet.base().v0(); dnet.bus_count()],
            s: vec![ZERO; dnet.bus_count()],
        }
    }

    /// `v_j ℓ_jk − |S_jk|²` per edge; nonnegative in the relaxed feasible set.
    pub fn cone_gaps(&self, dnet: &DirectedNetwork) -> Vec<f64> {
        dnet.edges()
            .iter()
            .enumerate()
            .map(|(e, &(j, _))| self.v[j] * self.ell[e] - self.flow[e].norm_sqr())
            .collect()
    }
}

/// Residuals of the branch flow equations.
#[derive(Debug, Clone)]
pub struct BfmResidual {
    /// Power balance per bus.
    pub balance: Vec<Complex64>,
    /// Ohm's law per edge.
    pub ohm: Vec<Complex64>,
    /// Branch-power definition per edge.
    pub branch: Vec<Complex64>,
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

impl BfmResidual {
    pub fn max(&self) -> f64 {
        max_norm(&self.balance).max(max_norm(&self.ohm)).max(max_norm(&self.branch))
    }
}

pub fn bfm_residual(dnet: &DirectedNetwork, x: &ComplexState) -> BfmResidual {
    let v = &x.voltage;
    let mut balance: Vec<Complex64> = x.s.iter().map(|s| -s).collect();
    let mut ohm = Vec::with_capacity(dnet.m());
    let mut branch = Vec::with_capacity(dnet.m());
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let (s, i) = (x.flow[e], x.current[e]);
        balance[j] += s;
        balance[k] -= s - dnet.z(e) * i.norm_sqr();
        ohm.push(i - dnet.y(e) * (v[j] - v[k]));
        branch.push(s - v[j] * i.conj());
    }
    BfmResidual { balance, ohm, branch }
}

/// Branch variables implied by a voltage profile.
pub fn bim_to_bfm(dnet: &DirectedNetwork, v: &VoltageProfile) -> ComplexState {
    let mut current = Vec::with_capacity(dnet.m());
    let mut flow = Vec::with_capacity(dnet.m());
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let i = dnet.y(e) * (v[j] - v[k]);
        current.push(i);
        flow.push(v[j] * i.conj());
    }
    ComplexState {
        flow,
        current,
        voltage: v.clone(),
        s: injections_from_voltage(dnet.base(), v),
    }
}

/// The voltage component of a branch flow solution; rejects states off the model.
pub fn bfm_to_bim(dnet: &DirectedNetwork, x: &ComplexState, tol: f64) -> Result<VoltageProfile, BfmError> {
    let residual = bfm_residual(dnet, x).max();
    if !(residual <= tol) {
        return Err(BfmError::Residual { residual, tol });
    }
    Ok(x.voltage.clone())
}

/// Drops phase angles: `ℓ = |I|²`, `v = |V|²`.
pub fn relax_magnitudes(x: &ComplexState) -> BranchFlowState {
    BranchFlowState {
        flow: x.flow.clone(),
        ell: x.current.iter().map(|i| i.norm_sqr()).collect(),
        v: x.voltage.values().iter().map(|v| v.norm_sqr()).collect(),
        s: x.s.clone(),
    }
}

/// Implied angle difference `β_jk = ∠(v_j − z_jkᴴ S_jk)` per edge, in `(−π, π]`.
pub fn beta(dnet: &DirectedNetwork, x: &BranchFlowState) -> Result<Vec<f64>, BfmError> {
    dnet.edges()
        .iter()
        .enumerate()
        .map(|(e, &(j, _))| {
            let w = x.v[j] - dnet.z(e).conj() * x.flow[e];
            if w.norm() <= f64::EPSILON * x.v[j].abs().max(f64::MIN_POSITIVE) {
                Err(BfmError::DegenerateEdge { edge: e })
            } else {
                Ok(wrap(w.arg()))
            }
        })
        .collect()
}

/// Angle sum around the basis cycle closed by one non-tree edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleDefect {
    /// The non-tree edge that closes the cycle.
    pub edge: usize,
    /// Buses of the cycle, starting at the edge's tail and returning through the tree.
    pub cycle: Vec<usize>,
    /// Wrapped angle sum, zero when the cycle condition holds.
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleRecoveryResult {
    pub satisfied: bool,
    /// Candidate angles per bus (slack included, always 0), in `(−π, π]`.
    pub theta: Vec<f64>,
    /// Winding `k` per edge with `Bθ = β + 2πk` (meaningful when satisfied).
    pub winding: Vec<i64>,
    /// One entry per non-tree edge.
    pub defects: Vec<CycleDefect>,
}

impl AngleRecoveryResult {
    pub fn worst(&self) -> Option<&CycleDefect> {
        self.defects
            .iter()
            .max_by(|a, b| a.defect.abs().total_cmp(&b.defect.abs()))
    }
}

/// Candidate angles from the tree alone: `θ = P(B_T⁻¹ β_T)`.
pub fn tree_angles(tree: &TreeIndex, beta: &[f64]) -> Vec<f64> {
    let mut theta = vec![0.0; tree.bus_count()];
    for j in 1..tree.bus_count() {
        let raw: f64 = tree.path(j).iter().map(|&e| -tree.tree_edge_sign(e) * beta[e]).sum();
        theta[j] = wrap(raw);
    }
    theta
}

/// Basis-cycle defects computed edge by edge along each cycle.
pub fn cycle_defects(tree: &TreeIndex, beta: &[f64]) -> Vec<CycleDefect> {
    tree.non_tree_edges()
        .iter()
        .map(|&e| {
            let (a, b) = tree.directed_edge(e);
            let path = tree.bus_path(b, a);
            let mut sum = beta[e];
            for w in path.windows(2) {
                let (u, t) = (w[0], w[1]);
                let pe = if tree.parent(t) == Some(u) {
                    tree.parent_edge(t).unwrap()
                } else {
                    tree.parent_edge(u).unwrap()
                };
                // β measures tail minus head along the edge's own direction
                sum += if tree.directed_edge(pe) == (u, t) { beta[pe] } else { -beta[pe] };
            }
            let mut cycle = vec![a];
            cycle.extend(path.iter().copied().take(path.len() - 1));
            CycleDefect {
                edge: e,
                cycle,
                defect: wrap(sum),
            }
        })
        .collect()
}

/// Non-tree defects `β_⊥ − B_⊥ B_T⁻¹ β_T`, wrapped, in [`TreeIndex::non_tree_edges`] order.
pub fn incidence_defects(tree: &TreeIndex, beta: &[f64]) -> Vec<f64> {
    let bt_inv = tree.b_tree_inverse();
    let beta_t = nalgebra::DVector::from_iterator(
        tree.tree_edges().len(),
        tree.tree_edges().iter().map(|&e| beta[e]),
    );
    let theta = bt_inv * beta_t;
    let implied = tree.b_perp() * theta;
    tree.non_tree_edges()
        .iter()
        .enumerate()
        .map(|(r, &e)| wrap(beta[e] - implied[r]))
        .collect()
}

/// Checks that implied angle differences sum to zero (mod 2π) around every basis cycle.
pub fn check_cycle_condition(
    dnet: &DirectedNetwork,
    x: &BranchFlowState,
    tree: &TreeIndex,
    angle_tol: f64,
) -> Result<AngleRecoveryResult, BfmError> {
    let b = beta(dnet, x)?;
    let theta = tree_angles(tree, &b);
    let defects = cycle_defects(tree, &b);
    let satisfied = defects.iter().all(|d| d.defect.abs() <= angle_tol);
    let winding = dnet
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(j, k))| winding(theta[j] - theta[k] - b[e]))
        .collect();
    Ok(AngleRecoveryResult {
        satisfied,
        theta,
        winding,
        defects,
    })
}

/// Options for [`recover_angles`].
#[derive(Debug, Clone, Copy)]
pub struct RecoveryOptions {
    pub angle_tol: f64,
    /// Allowed `|v_j ℓ_jk − |S_jk|²|` relative to `max(v_j ℓ_jk, 1)`.
    pub cone_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            angle_tol: DEFAULT_ANGLE_TOL,
            cone_tol: 1e-8,
        }
    }
}

/// Rebuilds phase angles: `V_j = √v_j e^{iθ_j}`, `I_jk = √ℓ_jk e^{i(θ_j − ∠S_jk)}`.
pub fn recover_angles(
    dnet: &DirectedNetwork,
    x: &BranchFlowState,
    tree: &TreeIndex,
    opts: RecoveryOptions,
) -> Result<ComplexState, BfmError> {
    for (e, &(j, _)) in dnet.edges().iter().enumerate() {
        let vl = x.v[j] * x.ell[e];
        let gap = vl - x.flow[e].norm_sqr();
        if gap.abs() > opts.cone_tol * vl.max(1.0) {
            return Err(BfmError::NotOnBoundary { edge: e, gap });
        }
    }
    let check = check_cycle_condition(dnet, x, tree, opts.angle_tol)?;
    if !check.satisfied {
        let worst = check.worst().expect("unsatisfied check has defects").clone();
        return Err(BfmError::CycleViolation {
            edge: worst.edge,
            worst: worst.defect,
            defects: check.defects,
        });
    }
    Ok(with_angles(dnet, x, &check.theta)?)
}

/// Applies angles `theta` to the magnitudes in `x` without any checks.
pub fn with_angles(dnet: &DirectedNetwork, x: &BranchFlowState, theta: &[f64]) -> Result<ComplexState, ProfileError> {
    let mut volts: Vec<Complex64> = x
        .v
        .iter()
        .zip(theta)
        .map(|(v, t)| Complex64::from_polar(v.max(0.0).sqrt(), *t))
        .collect();
    volts[0] = Complex64::new(x.v[0].max(0.0).sqrt(), 0.0);
    let current = dnet
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(j, _))| {
            let ang = if x.flow[e] == ZERO { 0.0 } else { x.flow[e].arg() };
            Complex64::from_polar(x.ell[e].max(0.0).sqrt(), theta[j] - ang)
        })
        .collect();
    Ok(ComplexState {
        flow: x.flow.clone(),
        current,
        voltage: VoltageProfile::new(volts)?,
        s: x.s.clone(),
    })
}

/// The same state on the reversed network: `Ŝ_kj = −(S_jk − z_jk ℓ_jk)`, `ℓ̂ = ℓ`, `v̂ = v`.
pub fn reverse_orientation(dnet: &DirectedNetwork, x: &BranchFlowState) -> (DirectedNetwork, BranchFlowState) {
    let flow = x
        .flow
        .iter()
        .enumerate()
        .map(|(e, s)| -(s - dnet.z(e) * x.ell[e]))
        .collect();
    (
        dnet.reversed(),
        BranchFlowState {
            flow,
            ell: x.ell.clone(),
            v: x.v.clone(),
            s: x.s.clone(),
        },
    )
}
