//! Seeded random instances: trees, meshed graphs, voltage profiles and load boxes.
//!
//! Lines get `r, x` uniform in a short-feeder range and loads are light, so that the
//! sweep converges and every voltage stays well inside `[0.81, 1.21]`.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bim::VoltageProfile;
use crate::netmodel::{Bus, Line, Network, DEFAULT_V_MAX, DEFAULT_V_MIN};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    /// Range of line resistance and reactance.
    pub z_range: (f64, f64),
    /// Largest real load per bus.
    pub p_max: f64,
    /// Largest reactive load per bus.
    pub q_max: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            z_range: (0.001, 0.005),
            p_max: 0.02,
            q_max: 0.01,
        }
    }
}

fn impedance<R: Rng>(rng: &mut R, p: &GenParams) -> Complex64 {
    let (a, b) = p.z_range;
    Complex64::new(rng.gen_range(a..=b), rng.gen_range(a..=b))
}

/// A load `−(p + iq)` with `p ∈ [0, p_max]`, `q ∈ [0, q_max]`.
pub fn random_load<R: Rng>(rng: &mut R, p: &GenParams) -> Complex64 {
    -Complex64::new(rng.gen_range(0.0..=p.p_max), rng.gen_range(0.0..=p.q_max))
}

/// Random tree edges: each bus `j ≥ 1` attaches to a uniformly chosen earlier bus; each
/// line's listed direction is a coin flip.
fn tree_edges<R: Rng>(rng: &mut R, bus_count: usize) -> Vec<(usize, usize)> {
    (1..bus_count)
        .map(|j| {
            let p = rng.gen_range(0..j);
            if rng.gen_bool(0.5) {
                (p, j)
            } else {
                (j, p)
            }
        })
        .collect()
}

fn assemble(buses: Vec<Bus>, edges: &[(usize, usize)], z: Vec<Complex64>) -> Network {
    let lines = edges.iter().zip(z).map(|(&(a, b), z)| Line::new(a, b, z)).collect();
    Network::new(buses, lines, 1.0).expect("generated networks are valid")
}

fn slack() -> Bus {
    Bus::unbounded(0, 1.0, 1.0)
}

/// Radial network with fixed loads on every non-slack bus.
pub fn random_tree<R: Rng>(rng: &mut R, bus_count: usize, p: &GenParams) -> Network {
    let edges = tree_edges(rng, bus_count);
    let z = edges.iter().map(|_| impedance(rng, p)).collect();
    let mut buses = vec![slack()];
    for j in 1..bus_count {
        buses.push(Bus::fixed(j, random_load(rng, p), DEFAULT_V_MIN, DEFAULT_V_MAX));
    }
    assemble(buses, &edges, z)
}

/// Connected graph: a random tree plus up to `extra` chords. Buses are unbounded.
pub fn random_connected<R: Rng>(rng: &mut R, bus_count: usize, extra: usize, p: &GenParams) -> Network {
    let mut edges = tree_edges(rng, bus_count);
    let mut candidates: Vec<(usize, usize)> = (0..bus_count)
        .flat_map(|a| (a + 1..bus_count).map(move |b| (a, b)))
        .filter(|&(a, b)| !edges.contains(&(a, b)) && !edges.contains(&(b, a)))
        .collect();
    candidates.shuffle(rng);
    edges.extend(candidates.into_iter().take(extra));
    let z = edges.iter().map(|_| impedance(rng, p)).collect();
    let mut buses = vec![slack()];
    for j in 1..bus_count {
        buses.push(Bus::unbounded(j, DEFAULT_V_MIN, DEFAULT_V_MAX));
    }
    assemble(buses, &edges, z)
}

/// Voltages near `1∠0°`: magnitudes in `[0.95, 1.05]`, angles in `[−0.2, 0.2]` rad, `V₀ = 1`.
pub fn random_voltage<R: Rng>(rng: &mut R, bus_count: usize) -> VoltageProfile {
    let mut v: Vec<Complex64> = (0..bus_count)
        .map(|_| Complex64::from_polar(rng.gen_range(0.95..=1.05), rng.gen_range(-0.2..=0.2)))
        .collect();
    v[0] = Complex64::new(1.0, 0.0);
    VoltageProfile::new(v).expect("finite, slack real")
}

/// Radial network whose non-slack loads range over boxes `[−2L, −L/2]` around a random
/// load `L` (componentwise), for optimization over injections.
pub fn random_boxed_tree<R: Rng>(rng: &mut R, bus_count: usize, p: &GenParams) -> Network {
    let edges = tree_edges(rng, bus_count);
    let z = edges.iter().map(|_| impedance(rng, p)).collect();
    let mut buses = vec![slack()];
    for j in 1..bus_count {
        let load = -random_load(rng, p);
        let mut b = Bus::unbounded(j, DEFAULT_V_MIN, DEFAULT_V_MAX);
        b.s_min = -load * 2.0;
        b.s_max = -load * 0.5;
        b.cost = rng.gen_range(0.5..=2.0);
        buses.push(b);
    }
    assemble(buses, &edges, z)
}
