//! Block-diagonal standard form of the chordal relaxation.
//!
//! One Hermitian psd block per maximal clique. Every matrix entry used by the
//! objective or the constraints is read from a single primary block (the first clique
//! containing it); entries shared by neighbouring cliques in the clique tree are tied
//! together by decoupling equalities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{ChordalExtension, PmatrixError};
use crate::netmodel::Network;
use crate::relax::CostSpec;

/// Position `(row, col)` inside block `block`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// `lower ≤ Σ Re(coeff · X[entry]) ≤ upper`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearRow {
    pub label: String,
    pub terms: Vec<(BlockEntry, Complex64)>,
    #[serde(serialize_with = "bound")]
    pub lower: f64,
    #[serde(serialize_with = "bound")]
    pub upper: f64,
}

fn bound<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_some(x)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpStandardForm {
    /// Bus ids of each block, ascending; block size is the clique size.
    pub blocks: Vec<Vec<usize>>,
    /// Objective `Σ Re(coeff · X[entry])`.
    pub objective: Vec<(BlockEntry, Complex64)>,
    pub rows: Vec<LinearRow>,
    /// Pairs of block entries that must be equal.
    pub decoupling: Vec<(BlockEntry, BlockEntry)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpEvaluation {
    pub objective: f64,
    pub max_row_violation: f64,
    pub max_decoupling_residual: f64,
    pub min_block_eigenvalue: f64,
}

impl SdpStandardForm {
    fn entry(&self, block: usize, j: usize, k: usize) -> BlockEntry {
        let members = &self.blocks[block];
        BlockEntry {
            block,
            row: members.binary_search(&j).unwrap(),
            col: members.binary_search(&k).unwrap(),
        }
    }

    /// Principal submatrices of `full`, one per block.
    pub fn blocks_from_full(&self, full: &DMatrix<Complex64>) -> Vec<DMatrix<Complex64>> {
        self.blocks
            .iter()
            .map(|m| DMatrix::from_fn(m.len(), m.len(), |r, c| full[(m[r], m[c])]))
            .collect()
    }

    /// Evaluates objective, rows, decoupling and block psd-ness at the blocks of `full`.
    pub fn evaluate(&self, full: &DMatrix<Complex64>) -> SdpEvaluation {
        let blocks = self.blocks_from_full(full);
        let val = |terms: &[(BlockEntry, Complex64)]| -> f64 {
            terms.iter().map(|(e, c)| (c * blocks[e.block][(e.row, e.col)]).re).sum()
        };
        let max_row_violation = self
            .rows
            .iter()
            .map(|r| {
                let x = val(&r.terms);
                (r.lower - x).max(x - r.upper).max(0.0)
            })
            .fold(0.0, f64::max);
        let max_decoupling_residual = self
            .decoupling
            .iter()
            .map(|(a, b)| (blocks[a.block][(a.row, a.col)] - blocks[b.block][(b.row, b.col)]).norm())
            .fold(0.0, f64::max);
        let min_block_eigenvalue = blocks
            .iter()
            .map(|b| {
                let herm = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
                herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        SdpEvaluation {
            objective: val(&self.objective),
            max_row_violation,
            max_decoupling_residual,
            min_block_eigenvalue,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("standard form serializes")
    }
}

/// Builds the block standard form of the chordal relaxation of the OPF on `net`.
pub fn sdp_standard_form(ext: &ChordalExtension, net: &Network, cost: &CostSpec) -> Result<SdpStandardForm, PmatrixError> {
    let blocks = ext.cliques.clone();
    let mut form = SdpStandardForm {
        blocks,
        objective: Vec::new(),
        rows: Vec::new(),
        decoupling: Vec::new(),
    };
    let nb = net.bus_count();
    let primary = |j: usize, k: usize| -> usize {
        form.blocks
            .iter()
            .position(|m| m.binary_search(&j).is_ok() && m.binary_search(&k).is_ok())
            .expect("extension cliques cover every edge")
    };
    let at = |j: usize, k: usize| form.entry(primary(j, k), j, k);

    // injection coefficients: s_j = Σ_k y_jkᴴ (W_jj − W_jk)
    let mut inj: Vec<Vec<(BlockEntry, Complex64)>> = vec![Vec::new(); nb];
    for line in net.lines() {
        let yc = line.y.conj();
        for (j, k) in [(line.from, line.to), (line.to, line.from)] {
            inj[j].push((at(j, j), yc));
            inj[j].push((at(j, k), -yc));
        }
    }
    let mut rows = Vec::new();
    for (j, bus) in net.buses().iter().enumerate() {
        let imag: Vec<_> = inj[j].iter().map(|&(e, c)| (e, c * Complex64::new(0.0, -1.0))).collect();
        for (label, terms, lo, hi) in [
            ("p", inj[j].clone(), bus.s_min.re, bus.s_max.re),
            ("q", imag, bus.s_min.im, bus.s_max.im),
            ("v", vec![(at(j, j), Complex64::new(1.0, 0.0))], bus.v_min, bus.v_max),
        ] {
            if lo.is_finite() || hi.is_finite() {
                rows.push(LinearRow {
                    label: format!("{label}{j}"),
                    terms,
                    lower: lo,
                    upper: hi,
                });
            }
        }
    }

    let objective = match cost {
        CostSpec::TotalLoss => inj.concat(),
        CostSpec::WeightedGeneration(w) => inj
            .iter()
            .enumerate()
            .flat_map(|(j, t)| t.iter().map(move |&(e, c)| (e, c * w[j])))
            .collect(),
        CostSpec::QuadraticVoltage(c) => {
            crate::relax::check_cost_on_graph(net, c)?;
            let mut terms: Vec<_> = (0..nb).map(|j| (at(j, j), c[(j, j)])).collect();
            for line in net.lines() {
                let (j, k) = (line.from, line.to);
                // C_kj W_jk + C_jk W_kj = 2 Re(C_kj W_jk)
                terms.push((at(j, k), c[(k, j)] * 2.0));
            }
            terms
        }
    };

    let mut decoupling = Vec::new();
    for (&(p, c), sep) in ext.clique_tree.iter().zip(&ext.separators) {
        for &j in sep {
            for &k in sep {
                decoupling.push((form.entry(c, j, k), form.entry(p, j, k)));
            }
        }
    }
    form.rows = rows;
    form.objective = objective;
    form.decoupling = decoupling;
    Ok(form)
}
