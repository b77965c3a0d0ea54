//! Bus injection model.
//!
//! Power flow in terms of complex bus voltages: `s_j = Σ_k y_jkᴴ V_j (V_jᴴ − V_kᴴ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::netmodel::Network;
use crate::relax::CostSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("voltage profile has {got} entries, network has {expected} buses")]
    Length { expected: usize, got: usize },
    #[error("slack voltage must be real and positive, got {0}")]
    SlackPhase(Complex64),
    #[error("voltage profile contains a non-finite entry at bus {0}")]
    NonFinite(usize),
}

/// Complex bus voltages with the slack voltage real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageProfile {
    values: Vec<Complex64>,
}

impl VoltageProfile {
    /// Wraps `values`; `values[0]` must be real and positive (`1∠0°` in the usual base).
    pub fn new(values: Vec<Complex64>) -> Result<Self, ProfileError> {
        if let Some(j) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ProfileError::NonFinite(j));
        }
        match values.first() {
            Some(v) if v.im == 0.0 && v.re > 0.0 => Ok(Self { values }),
            Some(&v) => Err(ProfileError::SlackPhase(v)),
            None => Err(ProfileError::Length { expected: 1, got: 0 }),
        }
    }

    /// Removes the global phase so that the slack voltage becomes real and positive.
    pub fn from_rotated(values: Vec<Complex64>) -> Result<Self, ProfileError> {
        let rot = match values.first() {
            Some(v) if v.norm() > 0.0 => v.conj() / v.norm(),
            Some(&v) => return Err(ProfileError::SlackPhase(v)),
            None => return Err(ProfileError::Length { expected: 1, got: 0 }),
        };
        let mut values: Vec<Complex64> = values.iter().map(|v| v * rot).collect();
        values[0] = Complex64::new(values[0].norm(), 0.0);
        Self::new(values)
    }

    /// Every bus at `√v0 ∠ 0°`.
    pub fn flat(bus_count: usize, v0: f64) -> Self {
        Self {
            values: vec![Complex64::new(v0.sqrt(), 0.0); bus_count],
        }
    }

    /// Checks the length against a network and its slack magnitude against `v0`.
    pub fn for_network(net: &Network, values: Vec<Complex64>) -> Result<Self, ProfileError> {
        if values.len() != net.bus_count() {
            return Err(ProfileError::Length {
                expected: net.bus_count(),
                got: values.len(),
            });
        }
        let p = Self::new(values)?;
        if (p.values[0].re - net.v0().sqrt()).abs() > 1e-12 {
            return Err(ProfileError::SlackPhase(p.values[0]));
        }
        Ok(p)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_vector(&self) -> nalgebra::DVector<Complex64> {
        nalgebra::DVector::from_column_slice(&self.values)
    }
}

impl std::ops::Index<usize> for VoltageProfile {
    type Output = Complex64;
    fn index(&self, j: usize) -> &Complex64 {
        &self.values[j]
    }
}

/// Admittance matrix and the per-bus Hermitian operators derived from it.
///
/// The per-bus matrices are formed on demand: storing all of them costs
/// `(n+1)³` entries and most callers only need a few.
#[derive(Debug, Clone)]
pub struct AdmittanceOperators {
    y: DMatrix<Complex64>,
}

pub fn admittance_operators(net: &Network) -> AdmittanceOperators {
    let nb = net.bus_count();
    let mut y = DMatrix::from_element(nb, nb, ZERO);
    for line in net.lines() {
        let (j, k) = (line.from, line.to);
        y[(j, j)] += line.y;
        y[(k, k)] += line.y;
        y[(j, k)] -= line.y;
        y[(k, j)] -= line.y;
    }
    AdmittanceOperators { y }
}

impl AdmittanceOperators {
    /// The bus admittance matrix `Y`.
    pub fn y(&self) -> &DMatrix<Complex64> {
        &self.y
    }

    pub fn bus_count(&self) -> usize {
        self.y.nrows()
    }

    /// `Y_j = e_j e_jᴴ Y`: row `j` of `Y`, zero elsewhere.
    pub fn y_j(&self, j: usize) -> DMatrix<Complex64> {
        let nb = self.bus_count();
        let mut m = DMatrix::from_element(nb, nb, ZERO);
        m.set_row(j, &self.y.row(j));
        m
    }

    /// `Φ_j = (Y_jᴴ + Y_j) / 2`.
    pub fn phi(&self, j: usize) -> DMatrix<Complex64> {
        let yj = self.y_j(j);
        (yj.adjoint() + &yj) * Complex64::new(0.5, 0.0)
    }

    /// `Ψ_j = (Y_jᴴ − Y_j) / 2i`.
    pub fn psi(&self, j: usize) -> DMatrix<Complex64> {
        let yj = self.y_j(j);
        (yj.adjoint() - &yj) / Complex64::new(0.0, 2.0)
    }

    /// `J_j = e_j e_jᴴ`.
    pub fn selector(&self, j: usize) -> DMatrix<Complex64> {
        let nb = self.bus_count();
        let mut m = DMatrix::from_element(nb, nb, ZERO);
        m[(j, j)] = ONE;
        m
    }
}

/// `xᴴ M x`.
pub fn quad_form(m: &DMatrix<Complex64>, x: &[Complex64]) -> Complex64 {
    let mut acc = ZERO;
    for (j, xj) in x.iter().enumerate() {
        let mut row = ZERO;
        for (k, xk) in x.iter().enumerate() {
            row += m[(j, k)] * xk;
        }
        acc += xj.conj() * row;
    }
    acc
}

/// Bus injections implied by a voltage profile.
pub fn injections_from_voltage(net: &Network, v: &VoltageProfile) -> Vec<Complex64> {
    let mut s = vec![ZERO; net.bus_count()];
    for line in net.lines() {
        let (j, k) = (line.from, line.to);
        let d = v[j] - v[k];
        s[j] += line.y.conj() * v[j] * d.conj();
        s[k] -= line.y.conj() * v[k] * d.conj();
    }
    s
}

/// Per-bus mismatch between given injections and those implied by `v`.
#[derive(Debug, Clone)]
pub struct BimResidual {
    pub per_bus: Vec<Complex64>,
}

impl BimResidual {
    pub fn max_abs(&self) -> f64 {
        self.per_bus.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

pub fn bim_residual(net: &Network, v: &VoltageProfile, s: &[Complex64]) -> BimResidual {
    let implied = injections_from_voltage(net, v);
    BimResidual {
        per_bus: s.iter().zip(&implied).map(|(a, b)| a - b).collect(),
    }
}

/// What a QCQP row bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcqpRowKind {
    RealUpper,
    RealLower,
    ReactiveUpper,
    ReactiveLower,
    VoltageUpper,
    VoltageLower,
}

/// One row `Vᴴ M V ≤ bound`.
#[derive(Debug, Clone)]
pub struct QcqpConstraint {
    pub bus: usize,
    pub kind: QcqpRowKind,
    pub matrix: DMatrix<Complex64>,
    pub bound: f64,
}

/// `min Vᴴ C V` subject to `Vᴴ M_l V ≤ b_l`.
#[derive(Debug, Clone)]
pub struct Qcqp {
    pub objective: DMatrix<Complex64>,
    pub constraints: Vec<QcqpConstraint>,
}

impl Qcqp {
    /// Largest constraint violation at `v` (zero when feasible).
    pub fn max_violation(&self, v: &VoltageProfile) -> f64 {
        self.constraints
            .iter()
            .map(|c| (quad_form(&c.matrix, v.values()).re - c.bound).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn objective_value(&self, v: &VoltageProfile) -> f64 {
        quad_form(&self.objective, v.values()).re
    }
}

/// Objective matrix `C` with `Vᴴ C V` equal to the cost.
pub fn objective_matrix(net: &Network, ops: &AdmittanceOperators, cost: &CostSpec) -> DMatrix<Complex64> {
    let nb = net.bus_count();
    match cost {
        CostSpec::TotalLoss => {
            // Σ_j Re s_j equals the total line loss
            (0..nb).fold(DMatrix::from_element(nb, nb, ZERO), |acc, j| acc + ops.phi(j))
        }
        CostSpec::WeightedGeneration(c) => (0..nb).fold(DMatrix::from_element(nb, nb, ZERO), |acc, j| {
            acc + ops.phi(j) * Complex64::new(c[j], 0.0)
        }),
        CostSpec::QuadraticVoltage(c) => c.clone(),
    }
}

/// Writes the OPF as a QCQP: objective plus `(±Φ_j, ±Ψ_j, ±J_j)` rows for every finite bound.
pub fn build_qcqp(net: &Network, cost: &CostSpec) -> Qcqp {
    let ops = admittance_operators(net);
    let objective = objective_matrix(net, &ops, cost);
    let mut constraints = Vec::new();
    for (j, bus) in net.buses().iter().enumerate() {
        let phi = ops.phi(j);
        let psi = ops.psi(j);
        let sel = ops.selector(j);
        let rows = [
            (QcqpRowKind::RealUpper, &phi, 1.0, bus.s_max.re),
            (QcqpRowKind::RealLower, &phi, -1.0, -bus.s_min.re),
            (QcqpRowKind::ReactiveUpper, &psi, 1.0, bus.s_max.im),
            (QcqpRowKind::ReactiveLower, &psi, -1.0, -bus.s_min.im),
            (QcqpRowKind::VoltageUpper, &sel, 1.0, bus.v_max),
            (QcqpRowKind::VoltageLower, &sel, -1.0, -bus.v_min),
        ];
        for (kind, m, sign, bound) in rows {
            if bound.is_finite() {
                constraints.push(QcqpConstraint {
                    bus: j,
                    kind,
                    matrix: m * Complex64::new(sign, 0.0),
                    bound,
                });
            }
        }
    }
    Qcqp {
        objective,
        constraints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Bus, Line};

    fn two_bus(s1: Option<Complex64>) -> Network {
        let slack = Bus {
            s_min: Complex64::new(-10.0, -10.0),
            s_max: Complex64::new(10.0, 10.0),
            ..Bus::unbounded(0, 1.0, 1.0)
        };
        let load = match s1 {
            Some(s) => Bus::fixed(1, s, 0.81, 1.21),
            None => Bus::unbounded(1, 0.81, 1.21),
        };
        Network::new(vec![slack, load], vec![Line::new(0, 1, Complex64::new(0.01, 0.02))], 1.0).unwrap()
    }

    #[test]
    fn two_bus_admittance_matrix() {
        let net = two_bus(None);
        let ops = admittance_operators(&net);
        let y = Complex64::new(20.0, -40.0);
        assert!((ops.y()[(0, 0)] - y).norm() < 1e-12);
        assert!((ops.y()[(0, 1)] + y).norm() < 1e-12);
        assert!((ops.y()[(1, 0)] + y).norm() < 1e-12);
        assert!((ops.y()[(1, 1)] - y).norm() < 1e-12);
        let sum = ops.y_j(0) + ops.y_j(1);
        assert!((sum - ops.y()).norm() < 1e-12);
    }

    #[test]
    fn phi_plus_i_psi_is_yj_adjoint() {
        let net = two_bus(None);
        let ops = admittance_operators(&net);
        for j in 0..2 {
            let lhs = ops.phi(j) + ops.psi(j) * Complex64::i();
            assert!((lhs - ops.y_j(j).adjoint()).norm() < 1e-12);
            assert!((ops.phi(j).adjoint() - ops.phi(j)).norm() < 1e-12);
            assert!((ops.psi(j).adjoint() - ops.psi(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_voltage_draws_nothing() {
        let net = two_bus(None);
        let s = injections_from_voltage(&net, &VoltageProfile::flat(2, 1.0));
        assert!(s.iter().all(|x| x.norm() == 0.0));
        assert_eq!(bim_residual(&net, &VoltageProfile::flat(2, 1.0), &s).max_abs(), 0.0);
    }

    #[test]
    fn row_counts() {
        let net = two_bus(Some(Complex64::new(-0.1, -0.05)));
        assert_eq!(build_qcqp(&net, &CostSpec::TotalLoss).constraints.len(), 12);
        let open = Network::new(
            vec![Bus::unbounded(0, 1.0, 1.0), net.bus(1).clone()],
            net.lines().to_vec(),
            1.0,
        )
        .unwrap();
        assert_eq!(build_qcqp(&open, &CostSpec::TotalLoss).constraints.len(), 8);
    }

    #[test]
    fn profile_rejects_rotated_slack() {
        assert!(VoltageProfile::new(vec![Complex64::new(0.0, 1.0)]).is_err());
        let p = VoltageProfile::from_rotated(vec![Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(p[0], Complex64::new(1.0, 0.0));
        assert!((p[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
