//! SOCP relaxations of the OPF in branch-flow and bus-injection variables.

use num_complex::Complex64;

use super::{validate_cost, CostSpec, RelaxError};
use crate::bfm::BranchFlowState;
use crate::netmodel::DirectedNetwork;
use crate::pmatrix::PartialMatrix;
use crate::socp::ConeProblem;

/// Column layout of the branch-flow SOCP:
/// `[Re S | Im S | ℓ | v | Re s | Im s]`.
#[derive(Debug, Clone, Copy)]
pub struct BfmIndex {
    pub m: usize,
    pub bus_count: usize,
}

impl BfmIndex {
    pub fn p_flow(&self, e: usize) -> usize {
        e
    }
    pub fn q_flow(&self, e: usize) -> usize {
        self.m + e
    }
    pub fn ell(&self, e: usize) -> usize {
        2 * self.m + e
    }
    pub fn v(&self, j: usize) -> usize {
        3 * self.m + j
    }
    pub fn p_inj(&self, j: usize) -> usize {
        3 * self.m + self.bus_count + j
    }
    pub fn q_inj(&self, j: usize) -> usize {
        3 * self.m + 2 * self.bus_count + j
    }
    pub fn len(&self) -> usize {
        3 * self.m + 3 * self.bus_count
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, x: &[f64]) -> BranchFlowState {
        BranchFlowState {
            flow: (0..self.m).map(|e| Complex64::new(x[self.p_flow(e)], x[self.q_flow(e)])).collect(),
            ell: (0..self.m).map(|e| x[self.ell(e)]).collect(),
            v: (0..self.bus_count).map(|j| x[self.v(j)]).collect(),
            s: (0..self.bus_count)
                .map(|j| Complex64::new(x[self.p_inj(j)], x[self.q_inj(j)]))
                .collect(),
        }
    }
}

fn injection_bounds(p: &mut ConeProblem, dnet: &DirectedNetwork, pi: impl Fn(usize) -> usize, qi: impl Fn(usize) -> usize) {
    for (j, bus) in dnet.base().buses().iter().enumerate() {
        p.set_bounds(pi(j), bus.s_min.re, bus.s_max.re);
        p.set_bounds(qi(j), bus.s_min.im, bus.s_max.im);
    }
}

/// Relaxed DistFlow: linear balance and drop equations, `v_j ℓ_jk ≥ |S_jk|²` per edge,
/// voltage and injection windows, and `v_0` pinned by an equality row.
pub fn build_bfm_socp(dnet: &DirectedNetwork, cost: &CostSpec) -> Result<(ConeProblem, BfmIndex), RelaxError> {
    validate_cost(dnet.base(), cost)?;
    let nb = dnet.bus_count();
    let ix = BfmIndex { m: dnet.m(), bus_count: nb };
    let mut p = ConeProblem::new(ix.len());

    // balance: Σ_out S − Σ_in (S − zℓ) − s = 0, real and imaginary rows
    let mut re_rows: Vec<Vec<(usize, f64)>> = (0..nb).map(|j| vec![(ix.p_inj(j), -1.0)]).collect();
    let mut im_rows: Vec<Vec<(usize, f64)>> = (0..nb).map(|j| vec![(ix.q_inj(j), -1.0)]).collect();
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let z = dnet.z(e);
        re_rows[j].push((ix.p_flow(e), 1.0));
        im_rows[j].push((ix.q_flow(e), 1.0));
        re_rows[k].push((ix.p_flow(e), -1.0));
        re_rows[k].push((ix.ell(e), z.re));
        im_rows[k].push((ix.q_flow(e), -1.0));
        im_rows[k].push((ix.ell(e), z.im));
    }
    for row in re_rows.into_iter().chain(im_rows) {
        p.add_equality(row, 0.0);
    }
    // drop: v_j − v_k − 2(r P + x Q) + |z|² ℓ = 0
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let z = dnet.z(e);
        p.add_equality(
            vec![
                (ix.v(j), 1.0),
                (ix.v(k), -1.0),
                (ix.p_flow(e), -2.0 * z.re),
                (ix.q_flow(e), -2.0 * z.im),
                (ix.ell(e), z.norm_sqr()),
            ],
            0.0,
        );
        p.add_cone(vec![ix.p_flow(e), ix.q_flow(e)], ix.v(j), ix.ell(e));
    }
    p.add_equality(vec![(ix.v(0), 1.0)], dnet.base().v0());
    for (j, bus) in dnet.base().buses().iter().enumerate().skip(1) {
        p.set_bounds(ix.v(j), bus.v_min, bus.v_max);
    }
    injection_bounds(&mut p, dnet, |j| ix.p_inj(j), |j| ix.q_inj(j));

    match cost {
        CostSpec::TotalLoss => {
            for e in 0..dnet.m() {
                p.c[ix.ell(e)] = dnet.z(e).re;
            }
        }
        CostSpec::WeightedGeneration(w) => {
            for (j, wj) in w.iter().enumerate() {
                p.c[ix.p_inj(j)] = *wj;
            }
        }
        CostSpec::QuadraticVoltage(c) => {
            // tr(C W) with W_jj = v_j and W_jk = v_j − z*S_jk
            for j in 0..nb {
                p.c[ix.v(j)] += c[(j, j)].re;
            }
            for (e, &(j, k)) in dnet.edges().iter().enumerate() {
                let ckj = c[(k, j)];
                let a = ckj * dnet.z(e).conj();
                p.c[ix.v(j)] += 2.0 * ckj.re;
                p.c[ix.p_flow(e)] -= 2.0 * a.re;
                p.c[ix.q_flow(e)] += 2.0 * a.im;
            }
        }
    }
    Ok((p, ix))
}

/// Column layout of the bus-injection SOCP:
/// `[W_jj | Re W_jk | Im W_jk | Re s | Im s]`, with `W_jk` per directed edge.
#[derive(Debug, Clone, Copy)]
pub struct BimIndex {
    pub m: usize,
    pub bus_count: usize,
}

impl BimIndex {
    pub fn diag(&self, j: usize) -> usize {
        j
    }
    pub fn re(&self, e: usize) -> usize {
        self.bus_count + e
    }
    pub fn im(&self, e: usize) -> usize {
        self.bus_count + self.m + e
    }
    pub fn p_inj(&self, j: usize) -> usize {
        self.bus_count + 2 * self.m + j
    }
    pub fn q_inj(&self, j: usize) -> usize {
        2 * self.bus_count + 2 * self.m + j
    }
    pub fn len(&self) -> usize {
        3 * self.bus_count + 2 * self.m
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn partial(&self, dnet: &DirectedNetwork, x: &[f64]) -> Result<PartialMatrix, RelaxError> {
        let diag = (0..self.bus_count).map(|j| x[self.diag(j)]).collect();
        let off = (0..self.m).map(|e| Complex64::new(x[self.re(e)], x[self.im(e)])).collect();
        Ok(PartialMatrix::new(dnet.edges().to_vec(), diag, off)?)
    }
}

/// Relaxation on the partial matrix `W_G`: injection and voltage windows as linear rows,
/// `|W_jk|² ≤ W_jj W_kk` per edge.
///
/// The injections are explicit columns tied to `W` by equalities so that their windows
/// become simple bounds.
pub fn build_bim_socp(dnet: &DirectedNetwork, cost: &CostSpec) -> Result<(ConeProblem, BimIndex), RelaxError> {
    validate_cost(dnet.base(), cost)?;
    let nb = dnet.bus_count();
    let ix = BimIndex { m: dnet.m(), bus_count: nb };
    let mut p = ConeProblem::new(ix.len());

    let mut re_rows: Vec<Vec<(usize, f64)>> = (0..nb).map(|j| vec![(ix.p_inj(j), 1.0)]).collect();
    let mut im_rows: Vec<Vec<(usize, f64)>> = (0..nb).map(|j| vec![(ix.q_inj(j), 1.0)]).collect();
    for (e, &(j, k)) in dnet.edges().iter().enumerate() {
        let y = dnet.y(e);
        let (g, b) = (y.re, y.im);
        let (wr, wi) = (ix.re(e), ix.im(e));
        // s_j ∋ y*(W_jj − W_jk), s_k ∋ y*(W_kk − conj W_jk); rows read s − (…) = 0
        re_rows[j].extend([(ix.diag(j), -g), (wr, g), (wi, b)]);
        im_rows[j].extend([(ix.diag(j), b), (wr, -b), (wi, g)]);
        re_rows[k].extend([(ix.diag(k), -g), (wr, g), (wi, -b)]);
        im_rows[k].extend([(ix.diag(k), b), (wr, -b), (wi, -g)]);
        p.add_cone(vec![wr, wi], ix.diag(j), ix.diag(k));
    }
    for row in re_rows.into_iter().chain(im_rows) {
        p.add_equality(row, 0.0);
    }
    for (j, bus) in dnet.base().buses().iter().enumerate() {
        p.set_bounds(ix.diag(j), bus.v_min, bus.v_max);
    }
    injection_bounds(&mut p, dnet, |j| ix.p_inj(j), |j| ix.q_inj(j));

    match cost {
        CostSpec::TotalLoss => {
            for j in 0..nb {
                p.c[ix.p_inj(j)] = 1.0;
            }
        }
        CostSpec::WeightedGeneration(w) => {
            for (j, wj) in w.iter().enumerate() {
                p.c[ix.p_inj(j)] = *wj;
            }
        }
        CostSpec::QuadraticVoltage(c) => {
            for j in 0..nb {
                p.c[ix.diag(j)] = c[(j, j)].re;
            }
            for (e, &(j, k)) in dnet.edges().iter().enumerate() {
                let ckj = c[(k, j)];
                p.c[ix.re(e)] = 2.0 * ckj.re;
                p.c[ix.im(e)] = -2.0 * ckj.im;
            }
        }
    }
    Ok((p, ix))
}
