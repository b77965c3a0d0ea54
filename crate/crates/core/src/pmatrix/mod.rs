//! Partial Hermitian matrices on a network graph.
//!
//! A partial matrix holds the diagonal and one entry `W_jk` per directed edge `j→k`
//! (the mirrored entry is its conjugate). Built on top of it: 2×2 psd / rank-1 tests,
//! the angle cycle condition, the rank-1 completion along a spanning tree, the linear
//! maps to and from branch-flow states, and the OPF constraint residuals.

mod chordal;
mod sdp;

pub use chordal::{chordal_extension, is_perfect_elimination_ordering, ChordalExtension};
pub use sdp::{sdp_standard_form, BlockEntry, LinearRow, SdpEvaluation, SdpStandardForm};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::angle::wrap;
use crate::bfm::{BranchFlowState, CycleDefect, DEFAULT_ANGLE_TOL};
use crate::bim::{ProfileError, VoltageProfile};
use crate::netmodel::{DirectedNetwork, Network, TreeIndex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance for the 2×2 rank-1 test.
pub const DEFAULT_RANK1_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PmatrixError {
    #[error("diagonal entry {bus} must be finite and positive, got {value}")]
    Diagonal { bus: usize, value: f64 },
    #[error("partial matrix has {got} off-diagonal entries for {expected} edges")]
    Shape { expected: usize, got: usize },
    #[error("edge {edge}: 2×2 submatrix is not rank one (relative gap {gap:e})")]
    NotRank1 { edge: usize, gap: f64 },
    #[error("edge {edge}: zero off-diagonal entry, angle undefined")]
    DegenerateEdge { edge: usize },
    #[error("cycle through edge {edge} (buses {cycle:?}) has angle defect {defect:.3e} rad")]
    CycleViolation { edge: usize, cycle: Vec<usize>, defect: f64 },
    #[error("cost matrix is not Hermitian or does not vanish off the network graph at ({0}, {1})")]
    CostOffGraph(usize, usize),
    #[error("elimination ordering must be a permutation of 0..{0}")]
    Ordering(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Diagonal plus one complex entry per directed edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialMatrix {
    edges: Vec<(usize, usize)>,
    diag: Vec<f64>,
    off: Vec<Complex64>,
}

impl PartialMatrix {
    pub fn new(edges: Vec<(usize, usize)>, diag: Vec<f64>, off: Vec<Complex64>) -> Result<Self, PmatrixError> {
        if let Some((bus, &value)) = diag.iter().enumerate().find(|(_, d)| !(d.is_finite() && **d > 0.0)) {
            return Err(PmatrixError::Diagonal { bus, value });
        }
        if off.len() != edges.len() {
            return Err(PmatrixError::Shape {
                expected: edges.len(),
                got: off.len(),
            });
        }
        Ok(Self { edges, diag, off })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `W_jk` for edge `e = j→k`.
    pub fn off(&self) -> &[Complex64] {
        &self.off
    }

    pub fn bus_count(&self) -> usize {
        self.diag.len()
    }

    /// Entry `(j, k)` if it lies on the diagonal or an edge.
    pub fn get(&self, j: usize, k: usize) -> Option<Complex64> {
        if j == k {
            return Some(Complex64::new(self.diag[j], 0.0));
        }
        self.edges.iter().zip(&self.off).find_map(|(&(a, b), &w)| {
            if (a, b) == (j, k) {
                Some(w)
            } else if (b, a) == (j, k) {
                Some(w.conj())
            } else {
                None
            }
        })
    }

    /// Agreement with a full matrix on the diagonal and edges (max modulus).
    pub fn distance_to(&self, full: &DMatrix<Complex64>) -> f64 {
        let d = (0..self.bus_count()).map(|j| (full[(j, j)] - self.diag[j]).norm());
        let o = self
            .edges
            .iter()
            .zip(&self.off)
            .map(|(&(j, k), w)| (full[(j, k)] - w).norm().max((full[(k, j)] - w.conj()).norm()));
        d.chain(o).fold(0.0, f64::max)
    }
}

/// `W_jj = |V_j|²`, `W_jk = V_j V_kᴴ` on the edges of `dnet`.
pub fn partial_from_voltage(v: &VoltageProfile, dnet: &DirectedNetwork) -> PartialMatrix {
    PartialMatrix {
        edges: dnet.edges().to_vec(),
        diag: v.values().iter().map(|x| x.norm_sqr()).collect(),
        off: dnet.edges().iter().map(|&(j, k)| v[j] * v[k].conj()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCheck {
    pub edge: usize,
    pub psd: bool,
    pub rank1: bool,
    /// `(W_jj W_kk − |W_jk|²) / max(W_jj W_kk, 1)`.
    pub relative_gap: f64,
}

/// 2×2 psd and rank-1 tests on every edge; both allow `rank1_tol` of rounding.
pub fn two_by_two_checks(w: &PartialMatrix, rank1_tol: f64) -> Vec<EdgeCheck> {
    w.edges
        .iter()
        .zip(&w.off)
        .enumerate()
        .map(|(e, (&(j, k), wjk))| {
            let prod = w.diag[j] * w.diag[k];
            let gap = (prod - wjk.norm_sqr()) / prod.max(1.0);
            EdgeCheck {
                edge: e,
                psd: gap >= -rank1_tol,
                rank1: gap.abs() <= rank1_tol,
                relative_gap: gap,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WgCycleReport {
    pub satisfied: bool,
    pub defects: Vec<CycleDefect>,
}

/// Sums `∠W_jk` around each basis cycle of `tree`.
pub fn wg_cycle_condition(w: &PartialMatrix, tree: &TreeIndex, angle_tol: f64) -> Result<WgCycleReport, PmatrixError> {
    let mut angles = vec![0.0; w.off.len()];
    let on_cycle: Vec<bool> = cycle_edges(tree, w.off.len());
    for (e, a) in angles.iter_mut().enumerate() {
        if w.off[e] == ZERO {
            if on_cycle[e] {
                return Err(PmatrixError::DegenerateEdge { edge: e });
            }
        } else {
            *a = w.off[e].arg();
        }
    }
    let defects = crate::bfm::cycle_defects(tree, &angles);
    let satisfied = defects.iter().all(|d| d.defect.abs() <= angle_tol);
    Ok(WgCycleReport { satisfied, defects })
}

fn cycle_edges(tree: &TreeIndex, m: usize) -> Vec<bool> {
    let mut on = vec![false; m];
    for &e in tree.non_tree_edges() {
        on[e] = true;
        let (a, b) = tree.directed_edge(e);
        let path = tree.bus_path(b, a);
        for w in path.windows(2) {
            let pe = if tree.parent(w[1]) == Some(w[0]) {
                tree.parent_edge(w[1])
            } else {
                tree.parent_edge(w[0])
            };
            on[pe.unwrap()] = true;
        }
    }
    on
}

#[derive(Debug, Clone)]
pub struct CompletionResult {
    pub voltage: VoltageProfile,
    /// `V Vᴴ`.
    pub full: DMatrix<Complex64>,
}

/// The unique psd rank-1 completion: `|V_j| = √W_jj`, `∠V_j = −Σ_{P_j} ∠W_ik`.
pub fn rank1_completion(w: &PartialMatrix, tree: &TreeIndex, rank1_tol: f64) -> Result<CompletionResult, PmatrixError> {
    if let Some(c) = two_by_two_checks(w, rank1_tol).into_iter().find(|c| !c.rank1) {
        return Err(PmatrixError::NotRank1 {
            edge: c.edge,
            gap: c.relative_gap,
        });
    }
    let cycles = wg_cycle_condition(w, tree, DEFAULT_ANGLE_TOL)?;
    if let Some(d) = cycles.defects.iter().find(|d| d.defect.abs() > DEFAULT_ANGLE_TOL) {
        return Err(PmatrixError::CycleViolation {
            edge: d.edge,
            cycle: d.cycle.clone(),
            defect: d.defect,
        });
    }
    let nb = w.bus_count();
    let mut theta = vec![0.0; nb];
    for &j in tree.bfs_order().iter().skip(1) {
        let p = tree.parent(j).unwrap();
        let e = tree.parent_edge(j).unwrap();
        // angle of W_pj along the traversal direction
        let a = if w.edges[e] == (p, j) { w.off[e].arg() } else { -w.off[e].arg() };
        theta[j] = theta[p] - a;
    }
    let values: Vec<Complex64> = (0..nb)
        .map(|j| Complex64::from_polar(w.diag[j].sqrt(), wrap(theta[j])))
        .collect();
    let voltage = VoltageProfile::new(values)?;
    let vv = voltage.as_vector();
    let full = &vv * vv.adjoint();
    Ok(CompletionResult { voltage, full })
}

/// `g`: branch-flow state from a partial matrix.
pub fn wg_to_x(w: &PartialMatrix, dnet: &DirectedNetwork) -> BranchFlowState {
    let mut s = vec![ZERO; w.bus_count()];
    let mut flow = Vec::with_capacity(dnet.m());
    let mut ell = Vec::with_capacity(dnet.m());
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let y = dnet.y(e);
        let wjk = w.off[e];
        let (djj, dkk) = (w.diag[j], w.diag[k]);
        let sjk = y.conj() * (djj - wjk);
        flow.push(sjk);
        ell.push(y.norm_sqr() * (djj + dkk - 2.0 * wjk.re));
        s[j] += sjk;
        s[k] += y.conj() * (dkk - wjk.conj());
    }
    BranchFlowState {
        flow,
        ell,
        v: w.diag.clone(),
        s,
    }
}

/// `g⁻¹`: `W_jj = v_j`, `W_jk = v_j − z_jkᴴ S_jk`.
pub fn x_to_wg(x: &BranchFlowState, dnet: &DirectedNetwork) -> Result<PartialMatrix, PmatrixError> {
    let off = dnet
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(j, _))| x.v[j] - dnet.z(e).conj() * x.flow[e])
        .collect();
    PartialMatrix::new(dnet.edges().to_vec(), x.v.clone(), off)
}

/// Injections implied by a partial matrix: `s_j = Σ_k y_jkᴴ (W_jj − W_jk)`.
pub fn injections_from_wg(w: &PartialMatrix, net: &Network) -> Vec<Complex64> {
    let mut s = vec![ZERO; w.bus_count()];
    for (e, (&(j, k), wjk)) in w.edges.iter().zip(&w.off).enumerate() {
        let y = net.line(e).y.conj();
        s[j] += y * (w.diag[j] - wjk);
        s[k] += y * (w.diag[k] - wjk.conj());
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct WgResidual {
    /// Componentwise distance of each injection outside its window.
    pub injection: Vec<Complex64>,
    /// Distance of each diagonal entry outside its voltage window.
    pub voltage: Vec<f64>,
}

impl WgResidual {
    pub fn max(&self) -> f64 {
        self.injection
            .iter()
            .map(|c| c.re.max(c.im))
            .chain(self.voltage.iter().copied())
            .fold(0.0, f64::max)
    }
}

fn outside(x: f64, lo: f64, hi: f64) -> f64 {
    (lo - x).max(x - hi).max(0.0)
}

/// Violations of the injection and voltage windows by a partial matrix.
pub fn wg_constraints_residual(w: &PartialMatrix, net: &Network) -> WgResidual {
    let s = injections_from_wg(w, net);
    let injection = net
        .buses()
        .iter()
        .zip(&s)
        .map(|(b, s)| Complex64::new(outside(s.re, b.s_min.re, b.s_max.re), outside(s.im, b.s_min.im, b.s_max.im)))
        .collect();
    let voltage = net
        .buses()
        .iter()
        .zip(&w.diag)
        .map(|(b, &d)| outside(d, b.v_min, b.v_max))
        .collect();
    WgResidual { injection, voltage }
}
