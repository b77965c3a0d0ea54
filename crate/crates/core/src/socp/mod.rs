//! Second-order cone programs with rotated cones.
//!
//! ```text
//! minimize    cᵀx
//! subject to  A x = b
//!             ‖x_u‖² ≤ x_a · x_b,  x_a, x_b ≥ 0     (one per cone)
//!             l ≤ x ≤ u
//! ```
//!
//! [`solve`] runs a primal-dual interior-point method with Nesterov–Todd scaling and
//! Mehrotra predictor–corrector steps on the standard conic form
//! `min cᵀx s.t. Ax = b, Gx + s = h, s ∈ K`, where `K` is a product of a nonnegative
//! orthant (finite box bounds) and Lorentz cones (each rotated cone enters as
//! `(a + b, a − b, 2u)`). Boxes with `l = u` become equality rows.

mod ipm;
mod linalg;

pub use ipm::solve;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("problem dimensions are inconsistent: {0}")]
    Dimension(String),
}

/// `‖x[u]‖² ≤ x[a] · x[b]` with `x[a], x[b] ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotatedCone {
    pub u: Vec<usize>,
    pub a: usize,
    pub b: usize,
}

impl RotatedCone {
    /// Rows mapping `x` to the Lorentz point `(a + b, a − b, 2u)`; the rotated
    /// constraint holds iff that point lies in `{t : ‖t₁..‖ ≤ t₀}`.
    pub fn lorentz_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![vec![(self.a, 1.0), (self.b, 1.0)], vec![(self.a, 1.0), (self.b, -1.0)]];
        rows.extend(self.u.iter().map(|&i| vec![(i, 2.0)]));
        rows
    }

    pub fn lorentz_point(&self, x: &[f64]) -> Vec<f64> {
        self.lorentz_rows()
            .iter()
            .map(|row| row.iter().map(|&(i, v)| v * x[i]).sum())
            .collect()
    }

    /// `‖x_u‖² ≤ x_a x_b` with `x_a, x_b ≥ 0`, evaluated directly.
    pub fn contains(&self, x: &[f64]) -> bool {
        let u2: f64 = self.u.iter().map(|&i| x[i] * x[i]).sum();
        x[self.a] >= 0.0 && x[self.b] >= 0.0 && u2 <= x[self.a] * x[self.b]
    }
}

/// `‖t[1..]‖ ≤ t[0]`.
pub fn in_lorentz(t: &[f64]) -> bool {
    t[1..].iter().map(|v| v * v).sum::<f64>().sqrt() <= t[0]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeProblem {
    pub c: Vec<f64>,
    /// Sparse equality rows `Σ coeff · x[idx] = rhs`.
    pub eq_rows: Vec<Vec<(usize, f64)>>,
    pub eq_rhs: Vec<f64>,
    pub cones: Vec<RotatedCone>,
    #[serde(serialize_with = "bounds")]
    pub lower: Vec<f64>,
    #[serde(serialize_with = "bounds")]
    pub upper: Vec<f64>,
}

fn bounds<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.is_finite().then_some(*x))?;
    }
    seq.end()
}

impl ConeProblem {
    /// `n` free variables, zero objective, no constraints.
    pub fn new(n: usize) -> Self {
        Self {
            c: vec![0.0; n],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            cones: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.eq_rows.push(terms);
        self.eq_rhs.push(rhs);
    }

    pub fn add_cone(&mut self, u: Vec<usize>, a: usize, b: usize) {
        self.cones.push(RotatedCone { u, a, b });
    }

    pub fn set_bounds(&mut self, i: usize, lower: f64, upper: f64) {
        self.lower[i] = lower;
        self.upper[i] = upper;
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.n_vars();
        let dim = |m: String| Err(SolverError::Dimension(m));
        if self.lower.len() != n || self.upper.len() != n {
            return dim(format!("{n} variables but {} / {} bounds", self.lower.len(), self.upper.len()));
        }
        if self.eq_rows.len() != self.eq_rhs.len() {
            return dim("equality rows and right-hand sides differ in length".into());
        }
        if let Some((r, _)) = self
            .eq_rows
            .iter()
            .enumerate()
            .find(|(_, row)| row.iter().any(|&(i, v)| i >= n || !v.is_finite()))
        {
            return dim(format!("equality row {r} references a bad column or coefficient"));
        }
        for (k, cone) in self.cones.iter().enumerate() {
            let mut idx: Vec<usize> = cone.u.clone();
            idx.push(cone.a);
            idx.push(cone.b);
            if idx.iter().any(|&i| i >= n) {
                return dim(format!("cone {k} references a variable out of range"));
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                return dim(format!("cone {k} repeats a variable"));
            }
        }
        for i in 0..n {
            if self.lower[i].is_nan() || self.upper[i].is_nan() || self.lower[i] > self.upper[i] {
                return dim(format!("variable {i} has inconsistent bounds"));
            }
        }
        if self.c.iter().chain(&self.eq_rhs).any(|x| !x.is_finite()) {
            return dim("objective or right-hand side is not finite".into());
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// JSON dump for debugging; infinite bounds are written as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cone problem serializes")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative primal feasibility target.
    pub feas_tol: f64,
    /// Relative duality-gap target.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary a step may cover.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 100,
            step_fraction: 0.99,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            feas_tol: tol,
            gap_tol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals {
    /// Largest violation of equalities, bounds and cones, relative to the data.
    pub primal: f64,
    /// Stationarity plus dual cone violation, relative to `1 + ‖c‖∞`.
    pub dual: f64,
    /// `|primal objective − dual objective| / (1 + |cᵀx|)`.
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows, sign convention `c + Aᵀy + … = 0`.
    pub y: Vec<f64>,
    /// Multipliers of `x ≥ l` (nonnegative; zero where unbounded).
    pub lower_dual: Vec<f64>,
    /// Multipliers of `x ≤ u` (nonnegative; zero where unbounded).
    pub upper_dual: Vec<f64>,
    /// Multipliers of `x = l` for variables with `l = u`.
    pub fixed_dual: Vec<f64>,
    /// Lorentz-form multiplier of each cone, in `(a + b, a − b, 2u)` coordinates.
    pub cone_dual: Vec<Vec<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: KktResiduals,
    pub iterations: usize,
    pub message: String,
}

/// Recomputes the residuals of a solution from the problem data alone.
pub fn kkt_residuals(p: &ConeProblem, sol: &ConeSolution) -> KktResiduals {
    let n = p.n_vars();
    let x = &sol.x;
    let scale_b = p
        .eq_rhs
        .iter()
        .chain(p.lower.iter().chain(&p.upper).filter(|v| v.is_finite()))
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut primal: f64 = 0.0;
    for (row, rhs) in p.eq_rows.iter().zip(&p.eq_rhs) {
        let ax: f64 = row.iter().map(|&(i, v)| v * x[i]).sum();
        primal = primal.max((ax - rhs).abs());
    }
    for i in 0..n {
        primal = primal.max(p.lower[i] - x[i]).max(x[i] - p.upper[i]);
    }
    for cone in &p.cones {
        let (a, b) = (x[cone.a], x[cone.b]);
        let u2: f64 = cone.u.iter().map(|&i| x[i] * x[i]).sum();
        let t = a + b;
        let r = ((a - b) * (a - b) + 4.0 * u2).sqrt();
        primal = primal.max(r - t);
    }
    let primal = primal.max(0.0) / (1.0 + scale_b);

    // stationarity: c + Aᵀy + Gᵀz, with the G of the standard form
    let mut grad = p.c.clone();
    for (row, &yr) in p.eq_rows.iter().zip(&sol.y) {
        for &(i, v) in row {
            grad[i] += v * yr;
        }
    }
    let mut dual_cone: f64 = 0.0;
    for i in 0..n {
        grad[i] += sol.fixed_dual[i] - sol.lower_dual[i] + sol.upper_dual[i];
        dual_cone = dual_cone.max(-sol.lower_dual[i]).max(-sol.upper_dual[i]);
    }
    for (cone, z) in p.cones.iter().zip(&sol.cone_dual) {
        // s = (a + b, a − b, 2u) = −G x, so Gᵀz = −(z0 + z1, z0 − z1, 2 z_u)
        grad[cone.a] -= z[0] + z[1];
        grad[cone.b] -= z[0] - z[1];
        for (k, &i) in cone.u.iter().enumerate() {
            grad[i] -= 2.0 * z[2 + k];
        }
        let r = z[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        dual_cone = dual_cone.max(r - z[0]);
    }
    let c_norm = p.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dual = grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + c_norm) + dual_cone.max(0.0);

    let pobj = p.objective(x);
    let dobj = dual_objective(p, sol);
    KktResiduals {
        primal,
        dual,
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
    }
}

/// `−bᵀy − hᵀz` for the standard-form data of `p`.
pub fn dual_objective(p: &ConeProblem, sol: &ConeSolution) -> f64 {
    let mut d: f64 = -p.eq_rhs.iter().zip(&sol.y).map(|(b, y)| b * y).sum::<f64>();
    for i in 0..p.n_vars() {
        if p.lower[i] == p.upper[i] {
            d -= p.lower[i] * sol.fixed_dual[i];
            continue;
        }
        if p.lower[i].is_finite() {
            d += p.lower[i] * sol.lower_dual[i];
        }
        if p.upper[i].is_finite() {
            d -= p.upper[i] * sol.upper_dual[i];
        }
    }
    d
}
