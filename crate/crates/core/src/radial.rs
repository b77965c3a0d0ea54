//! DistFlow on radial networks: residuals, a backward/forward sweep solver, the linear
//! (lossless) approximation in both orientations, and the bounds it provides.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bfm::BranchFlowState;
use crate::netmodel::{orient, spanning_tree, CaseError, DirectedNetwork, Network, Orientation, TreeIndex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("radial solver requires a tree: {edges} lines for {buses} buses")]
    NotRadial { buses: usize, edges: usize },
    #[error("sweep did not converge in {iterations} iterations (last update {last_update:e})")]
    NoConvergence { iterations: usize, last_update: f64 },
    #[error("bus {0} has no fixed injection")]
    UnfixedInjection(usize),
    #[error("injection vector has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
}

fn require_tree(dnet: &DirectedNetwork) -> Result<(), RadialError> {
    if dnet.base().is_radial() {
        Ok(())
    } else {
        Err(RadialError::NotRadial {
            buses: dnet.bus_count(),
            edges: dnet.m(),
        })
    }
}

/// Residuals of the DistFlow equations.
#[derive(Debug, Clone, Serialize)]
pub struct DistFlowResidual {
    /// Power balance per bus.
    pub balance: Vec<Complex64>,
    /// Voltage drop per edge.
    pub drop: Vec<f64>,
    /// `v_j ℓ_jk − |S_jk|²` per edge.
    pub quadratic: Vec<f64>,
}

impl DistFlowResidual {
    /// Largest residual of the linear equations (balance and drop).
    pub fn max_linear(&self) -> f64 {
        let b = self.balance.iter().map(|x| x.norm()).fold(0.0, f64::max);
        self.drop.iter().map(|x| x.abs()).fold(b, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.quadratic.iter().map(|x| x.abs()).fold(self.max_linear(), f64::max)
    }
}

pub fn distflow_residual(dnet: &DirectedNetwork, x: &BranchFlowState) -> DistFlowResidual {
    let mut balance: Vec<Complex64> = x.s.iter().map(|s| -s).collect();
    let mut drop = Vec::with_capacity(dnet.m());
    let mut quadratic = Vec::with_capacity(dnet.m());
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let (s, l, z) = (x.flow[e], x.ell[e], dnet.z(e));
        balance[j] += s;
        balance[k] -= s - z * l;
        drop.push(x.v[j] - x.v[k] - 2.0 * (z.conj() * s).re + z.norm_sqr() * l);
        quadratic.push(x.v[j] * l - s.norm_sqr());
    }
    DistFlowResidual {
        balance,
        drop,
        quadratic,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Stop once the largest change in `ℓ` and `v` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Pinned injections of every non-slack bus (`s[0]` is left at zero).
pub fn fixed_injections(net: &Network) -> Result<Vec<Complex64>, RadialError> {
    let mut s = vec![ZERO; net.bus_count()];
    for (j, bus) in net.buses().iter().enumerate().skip(1) {
        if !bus.has_fixed_injection() || !bus.s_min.re.is_finite() || !bus.s_min.im.is_finite() {
            return Err(RadialError::UnfixedInjection(j));
        }
        s[j] = bus.s_min;
    }
    Ok(s)
}

// Flows in "away from root" convention: index t is the edge into bus t+1.
fn to_orientation(dnet: &DirectedNetwork, tree: &TreeIndex, away: &[Complex64], ell: &[f64]) -> Vec<Complex64> {
    let mut flow = vec![ZERO; dnet.m()];
    for (t, &e) in tree.tree_edges().iter().enumerate() {
        flow[e] = if tree.tree_edge_sign(e) > 0.0 {
            away[t]
        } else {
            -(away[t] - dnet.z(e) * ell[e])
        };
    }
    flow
}

/// Solves DistFlow on a tree by backward/forward sweeps from `ℓ = 0`, `v ≡ v0`.
///
/// `s` has one entry per bus; `s[0]` is ignored and returned as the computed slack
/// injection. Edges may point either way; flows are reported in `dnet`'s directions.
pub fn solve_radial(dnet: &DirectedNetwork, s: &[Complex64], opts: SweepOptions) -> Result<BranchFlowState, RadialError> {
    require_tree(dnet)?;
    let nb = dnet.bus_count();
    if s.len() != nb {
        return Err(RadialError::Length { expected: nb, got: s.len() });
    }
    let tree = spanning_tree(dnet);
    let v0 = dnet.base().v0();
    let order = tree.bfs_order();

    let mut ell = vec![0.0; dnet.m()];
    let mut v = vec![v0; nb];
    let mut away = vec![ZERO; nb - 1];
    let mut last_update = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        // backward: flow into j equals downstream flow plus losses minus local injection
        for &j in order.iter().rev().take(nb - 1) {
            let e = tree.parent_edge(j).unwrap();
            let downstream: Complex64 = tree.children(j).iter().map(|&c| away[c - 1]).sum();
            away[j - 1] = downstream + dnet.z(e) * ell[e] - s[j];
        }
        // forward: voltages from the root, then currents
        let mut update: f64 = 0.0;
        for &j in order.iter().skip(1) {
            let e = tree.parent_edge(j).unwrap();
            let p = tree.parent(j).unwrap();
            let z = dnet.z(e);
            let vj = v[p] - 2.0 * (z.conj() * away[j - 1]).re + z.norm_sqr() * ell[e];
            update = update.max((vj - v[j]).abs());
            v[j] = vj;
        }
        for &j in order.iter().skip(1) {
            let e = tree.parent_edge(j).unwrap();
            let p = tree.parent(j).unwrap();
            let l = away[j - 1].norm_sqr() / v[p];
            update = update.max((l - ell[e]).abs());
            ell[e] = l;
        }
        if !update.is_finite() || v.iter().any(|&x| !(x > 0.0)) {
            return Err(RadialError::NoConvergence {
                iterations: iter,
                last_update: update,
            });
        }
        last_update = update;
        if update < opts.tol {
            break;
        }
        if iter == opts.max_iter {
            return Err(RadialError::NoConvergence {
                iterations: iter,
                last_update,
            });
        }
    }
    // final backward pass so balance holds with the converged ℓ
    for &j in order.iter().rev().take(nb - 1) {
        let e = tree.parent_edge(j).unwrap();
        let downstream: Complex64 = tree.children(j).iter().map(|&c| away[c - 1]).sum();
        away[j - 1] = downstream + dnet.z(e) * ell[e] - s[j];
    }
    let _ = last_update;
    let mut inj = s.to_vec();
    inj[0] = tree.children(0).iter().map(|&c| away[c - 1]).sum();
    Ok(BranchFlowState {
        flow: to_orientation(dnet, &tree, &away, &ell),
        ell,
        v,
        s: inj,
    })
}

/// Solution of the linear (lossless) DistFlow equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearState {
    pub flow: Vec<Complex64>,
    pub v: Vec<f64>,
}

/// `S_lin` = net downstream demand, `v_lin` from lossless drops along the root path.
///
/// Works on either orientation: an edge pointing toward the root carries `−S_lin`.
pub fn solve_linear_distflow(dnet: &DirectedNetwork, s: &[Complex64]) -> Result<LinearState, RadialError> {
    require_tree(dnet)?;
    let nb = dnet.bus_count();
    if s.len() != nb {
        return Err(RadialError::Length { expected: nb, got: s.len() });
    }
    let tree = spanning_tree(dnet);
    let mut away = vec![ZERO; nb - 1];
    for &j in tree.bfs_order().iter().rev().take(nb - 1) {
        let downstream: Complex64 = tree.children(j).iter().map(|&c| away[c - 1]).sum();
        away[j - 1] = downstream - s[j];
    }
    let mut v = vec![dnet.base().v0(); nb];
    for &j in tree.bfs_order().iter().skip(1) {
        let e = tree.parent_edge(j).unwrap();
        v[j] = v[tree.parent(j).unwrap()] - 2.0 * (dnet.z(e).conj() * away[j - 1]).re;
    }
    let mut flow = vec![ZERO; dnet.m()];
    for (t, &e) in tree.tree_edges().iter().enumerate() {
        flow[e] = away[t] * tree.tree_edge_sign(e);
    }
    Ok(LinearState { flow, v })
}

/// Linear DistFlow on the toward-root orientation of `net`.
pub fn solve_linear_reverse(net: &Network, s: &[Complex64]) -> Result<(DirectedNetwork, LinearState), RadialError> {
    let dnet = orient(net, Orientation::TowardRoot).map_err(|e| match e {
        CaseError::NotRadial { buses, edges } => RadialError::NotRadial { buses, edges },
        _ => RadialError::NotRadial {
            buses: net.bus_count(),
            edges: net.m(),
        },
    })?;
    let lin = solve_linear_distflow(&dnet, s)?;
    Ok((dnet, lin))
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeBound {
    pub edge: usize,
    /// Edge points away from the root (`S ≥ S_lin`) or toward it (`Ŝ ≤ Ŝ_lin`).
    pub away: bool,
    /// Oriented so that the bound reads `margin ≥ 0` componentwise.
    pub margin: Complex64,
    /// `−Σ_{k∈T_j} s_k`, `T_j` the subtree below the edge.
    pub subtree_demand: Complex64,
    /// `z ℓ` on the edge plus all losses inside the subtree.
    pub losses: Complex64,
    /// Residual of the flow expansion into subtree demand and losses.
    pub identity_residual: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BusBound {
    pub bus: usize,
    /// `v_lin − v`, nonnegative when the bound holds.
    pub margin: f64,
    /// Residual of `v_j = v0 − Σ_{P_j} (2Re(zᴴS) − |z|²ℓ)`.
    pub identity_residual: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub edges: Vec<EdgeBound>,
    pub buses: Vec<BusBound>,
}

impl BoundReport {
    pub fn violations(&self) -> usize {
        self.edges.iter().filter(|e| e.violated).count() + self.buses.iter().filter(|b| b.violated).count()
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.identity_residual)
            .chain(self.buses.iter().map(|b| b.identity_residual))
            .fold(0.0, f64::max)
    }

    /// Every bound holds with equality (within `tol`).
    pub fn all_tight(&self, tol: f64) -> bool {
        self.edges.iter().all(|e| e.margin.re.abs() <= tol && e.margin.im.abs() <= tol)
            && self.buses.iter().all(|b| b.margin.abs() <= tol)
    }
}

/// Compares a DistFlow state against its linear approximation.
///
/// The comparison is componentwise on real and imaginary parts. `x` may satisfy the
/// quadratic equation only as `v ℓ ≥ |S|²`; the bounds need `ℓ ≥ 0` and lines with
/// nonnegative resistance and reactance.
pub fn check_bounds(dnet: &DirectedNetwork, x: &BranchFlowState, lin: &LinearState, tree: &TreeIndex, slack: f64) -> BoundReport {
    let nb = dnet.bus_count();
    let zl = |e: usize| dnet.z(e) * x.ell[e];
    let mut edges = Vec::with_capacity(dnet.m());
    for (t, &e) in tree.tree_edges().iter().enumerate() {
        let j = t + 1;
        let away = tree.tree_edge_sign(e) > 0.0;
        let demand: Complex64 = -tree.subtree_nodes(j).iter().map(|&k| x.s[k]).sum::<Complex64>();
        let inner: Complex64 = tree.subtree_edges(j).iter().map(|&f| zl(f)).sum();
        let losses = zl(e) + inner;
        let (margin, identity) = if away {
            (x.flow[e] - lin.flow[e], x.flow[e] - demand - losses)
        } else {
            (lin.flow[e] - x.flow[e], x.flow[e] + demand + inner)
        };
        let violated = margin.re < -slack || margin.im < -slack;
        edges.push(EdgeBound {
            edge: e,
            away,
            margin,
            subtree_demand: demand,
            losses,
            identity_residual: identity.norm(),
            violated,
        });
    }
    edges.sort_by_key(|b| b.edge);
    let v0 = dnet.base().v0();
    let buses = (0..nb)
        .map(|j| {
            let drop: f64 = tree
                .path(j)
                .iter()
                .map(|&e| {
                    // express each drop in the away-from-root direction
                    let z = dnet.z(e);
                    let d = 2.0 * (z.conj() * x.flow[e]).re - z.norm_sqr() * x.ell[e];
                    d * tree.tree_edge_sign(e)
                })
                .sum();
            let margin = lin.v[j] - x.v[j];
            BusBound {
                bus: j,
                margin,
                identity_residual: (x.v[j] - (v0 - drop)).abs(),
                violated: margin < -slack,
            }
        })
        .collect();
    BoundReport { edges, buses }
}
