//! Grid search over injections for tiny radial networks: a feasible-point estimate of
//! the true OPF optimum, used to check that relaxations never exceed it.

use num_complex::Complex64;
use serde::Serialize;

use super::{cost_of_state, validate_cost, CostSpec, RelaxError};
use crate::netmodel::{orient, DirectedNetwork, Network, Orientation};
use crate::radial::{solve_radial, SweepOptions};

/// Feasibility slack on voltage and slack-injection windows.
const FEAS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceResult {
    /// Best feasible cost found (an upper estimate of the OPF optimum).
    pub c_opt: f64,
    /// Injections attaining it; `s_opt[0]` is the resulting slack injection.
    pub s_opt: Vec<Complex64>,
    /// `Σ_d L_d h_d / 2` with `L_d` the largest observed cost slope along grid axis `d`
    /// and `h_d` its spacing: how far the grid best may sit above the grid-restricted
    /// optimum before polishing.
    pub grid_slack: f64,
    pub grid_points: usize,
    pub feasible_points: usize,
    /// Improvement from the local polish after the grid search.
    pub polish_gain: f64,
}

struct Problem<'a> {
    dnet: DirectedNetwork,
    net: &'a Network,
    cost: &'a CostSpec,
    /// (bus, imaginary?) per free coordinate
    axes: Vec<(usize, bool)>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    base: Vec<Complex64>,
}

impl Problem<'_> {
    fn injections(&self, t: &[f64]) -> Vec<Complex64> {
        let mut s = self.base.clone();
        for (&(j, imag), &x) in self.axes.iter().zip(t) {
            if imag {
                s[j].im = x;
            } else {
                s[j].re = x;
            }
        }
        s
    }

    /// Cost of the power flow at `t`, `None` when it fails to converge or violates a window.
    fn evaluate(&self, t: &[f64]) -> Option<f64> {
        let x = solve_radial(&self.dnet, &self.injections(t), SweepOptions::default()).ok()?;
        for (j, b) in self.net.buses().iter().enumerate() {
            if x.v[j] < b.v_min - FEAS_SLACK || x.v[j] > b.v_max + FEAS_SLACK {
                return None;
            }
        }
        let (b0, s0) = (self.net.bus(0), x.s[0]);
        if s0.re < b0.s_min.re - FEAS_SLACK
            || s0.re > b0.s_max.re + FEAS_SLACK
            || s0.im < b0.s_min.im - FEAS_SLACK
            || s0.im > b0.s_max.im + FEAS_SLACK
        {
            return None;
        }
        Some(cost_of_state(&self.dnet, &x, self.cost))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Grid search plus coordinate pattern-search polish over the injection boxes.
///
/// Requires a radial network with at most three non-slack buses and finite injection
/// boxes on every non-slack bus. `resolution ≥ 2` points per free coordinate.
pub fn brute_force_opf(net: &Network, cost: &CostSpec, resolution: usize) -> Result<BruteForceResult, RelaxError> {
    validate_cost(net, cost)?;
    if !net.is_radial() {
        return Err(RelaxError::Hypothesis("brute force needs a radial network".into()));
    }
    if net.n() > 3 {
        return Err(RelaxError::Hypothesis(format!("brute force handles n ≤ 3, got n = {}", net.n())));
    }
    if resolution < 2 {
        return Err(RelaxError::Hypothesis("grid resolution must be at least 2".into()));
    }
    let mut axes = Vec::new();
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    let mut base = vec![Complex64::new(0.0, 0.0); net.bus_count()];
    for (j, b) in net.buses().iter().enumerate().skip(1) {
        for (imag, l, h) in [(false, b.s_min.re, b.s_max.re), (true, b.s_min.im, b.s_max.im)] {
            if !(l.is_finite() && h.is_finite()) {
                return Err(RelaxError::Hypothesis(format!("bus {j} has an unbounded injection box")));
            }
            if l == h {
                if imag {
                    base[j].im = l;
                } else {
                    base[j].re = l;
                }
            } else {
                axes.push((j, imag));
                lo.push(l);
                hi.push(h);
            }
        }
    }
    let dnet = orient(net, Orientation::AwayFromRoot).map_err(|e| RelaxError::Hypothesis(e.to_string()))?;
    let prob = Problem {
        dnet,
        net,
        cost,
        axes,
        lo,
        hi,
        base,
    };
    let d = prob.axes.len();
    let grids: Vec<Vec<f64>> = (0..d).map(|i| linspace(prob.lo[i], prob.hi[i], resolution)).collect();
    let total = resolution.pow(d as u32);

    // full tensor grid, row-major over axes
    let mut values: Vec<Option<f64>> = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let t: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| grids[a][i]).collect();
        values.push(prob.evaluate(&t));
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < resolution {
                break;
            }
            idx[a] = 0;
        }
    }
    let feasible_points = values.iter().filter(|v| v.is_some()).count();
    let (best_flat, best) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|c| (i, c)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(RelaxError::NoFeasiblePoint(total))?;

    let unflatten = |mut f: usize| -> Vec<usize> {
        let mut out = vec![0; d];
        for a in (0..d).rev() {
            out[a] = f % resolution;
            f /= resolution;
        }
        out
    };
    let stride = |a: usize| resolution.pow((d - 1 - a) as u32);

    let mut grid_slack = 0.0;
    for a in 0..d {
        let h = (prob.hi[a] - prob.lo[a]) / (resolution - 1) as f64;
        let mut slope: f64 = 0.0;
        for (f, v) in values.iter().enumerate() {
            if unflatten(f)[a] + 1 < resolution {
                if let (Some(c1), Some(c2)) = (v, values[f + stride(a)]) {
                    slope = slope.max((c2 - c1).abs() / h);
                }
            }
        }
        grid_slack += slope * h / 2.0;
    }

    // pattern search from the grid best
    let mut t: Vec<f64> = unflatten(best_flat).iter().enumerate().map(|(a, &i)| grids[a][i]).collect();
    let mut cur = best;
    let mut step: Vec<f64> = (0..d).map(|a| (prob.hi[a] - prob.lo[a]) / (resolution - 1) as f64).collect();
    for _ in 0..200 {
        let mut improved = false;
        for a in 0..d {
            for dir in [-1.0, 1.0] {
                let mut trial = t.clone();
                trial[a] = (t[a] + dir * step[a]).clamp(prob.lo[a], prob.hi[a]);
                if trial[a] == t[a] {
                    continue;
                }
                if let Some(c) = prob.evaluate(&trial) {
                    if c < cur {
                        cur = c;
                        t = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for (a, h) in step.iter_mut().enumerate() {
                *h *= 0.5;
                if *h < 1e-10 * (prob.hi[a] - prob.lo[a]) {
                    *h = 0.0;
                }
            }
            if step.iter().all(|h| *h == 0.0) {
                break;
            }
        }
    }
    let x = solve_radial(&prob.dnet, &prob.injections(&t), SweepOptions::default())
        .expect("the polished point was evaluated as feasible");
    Ok(BruteForceResult {
        c_opt: cur,
        s_opt: x.s,
        grid_slack,
        grid_points: total,
        feasible_points,
        polish_gain: best - cur,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Bus, Line};

    const Z: Complex64 = Complex64::new(0.01, 0.02);

    fn two_bus(lo: Complex64, hi: Complex64) -> Network {
        let mut b1 = Bus::unbounded(1, 0.81, 1.21);
        b1.s_min = lo;
        b1.s_max = hi;
        Network::new(vec![Bus::unbounded(0, 1.0, 1.0), b1], vec![Line::new(0, 1, Z)], 1.0).unwrap()
    }

    #[test]
    fn fixed_load_is_single_point() {
        let s = Complex64::new(-0.1, -0.05);
        let net = two_bus(s, s);
        let r = brute_force_opf(&net, &CostSpec::TotalLoss, 5).unwrap();
        assert_eq!(r.grid_points, 1);
        // independent fixed point of ℓ = |s₁ − zℓ|² on one line
        let mut ell = 0.0;
        for _ in 0..200 {
            ell = (-s + Z * ell).norm_sqr();
        }
        assert!((r.c_opt - Z.re * ell).abs() < 1e-12);
        assert_eq!(r.grid_slack, 0.0);
    }

    #[test]
    fn loss_is_smallest_at_lightest_load() {
        let net = two_bus(Complex64::new(-0.2, -0.1), Complex64::new(-0.05, -0.02));
        let r = brute_force_opf(&net, &CostSpec::TotalLoss, 6).unwrap();
        assert!((r.s_opt[1] - Complex64::new(-0.05, -0.02)).norm() < 1e-12);
        assert_eq!(r.feasible_points, 36);
        assert!(r.grid_slack > 0.0);
    }

    #[test]
    fn hypotheses_enforced() {
        let net = Network::new(
            vec![Bus::unbounded(0, 1.0, 1.0), Bus::unbounded(1, 0.81, 1.21)],
            vec![Line::new(0, 1, Z)],
            1.0,
        )
        .unwrap();
        assert!(matches!(brute_force_opf(&net, &CostSpec::TotalLoss, 4), Err(RelaxError::Hypothesis(_))));
    }

    #[test]
    fn infeasible_box_reported() {
        let mut b1 = Bus::unbounded(1, 1.1, 1.21);
        b1.s_min = Complex64::new(-0.2, -0.1);
        b1.s_max = Complex64::new(-0.1, -0.05);
        let net = Network::new(vec![Bus::unbounded(0, 1.0, 1.0), b1], vec![Line::new(0, 1, Z)], 1.0).unwrap();
        assert!(matches!(brute_force_opf(&net, &CostSpec::TotalLoss, 4), Err(RelaxError::NoFeasiblePoint(16))));
    }
}
