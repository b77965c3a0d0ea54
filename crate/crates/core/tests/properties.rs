use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use opfrelax::angle::wrap;
use opfrelax::bfm::{
    beta, bfm_residual, bfm_to_bim, bim_to_bfm, cycle_defects, incidence_defects, recover_angles, relax_magnitudes,
    reverse_orientation, with_angles, RecoveryOptions,
};
use opfrelax::bim::{admittance_operators, build_qcqp, injections_from_voltage, quad_form, VoltageProfile};
use opfrelax::generate::{self, GenParams};
use opfrelax::netmodel::{orient, parse_case, serialize_case, DirectedNetwork, Network, Orientation, TreeIndex};
use opfrelax::pmatrix::{
    chordal_extension, partial_from_voltage, rank1_completion, sdp_standard_form, two_by_two_checks,
    wg_constraints_residual, wg_cycle_condition, wg_to_x, PartialMatrix,
};
use opfrelax::radial::{check_bounds, distflow_residual, solve_linear_distflow, solve_linear_reverse, solve_radial, SweepOptions};
use opfrelax::relax::{solve_bfm, CostSpec, RelaxOptions};
use opfrelax::socp::{self, dual_objective, in_lorentz, RotatedCone, SolverOptions};

fn params() -> GenParams {
    GenParams::default()
}

fn tree(seed: u64, nb: usize) -> Network {
    generate::random_tree(&mut generate::rng(seed), nb, &params())
}

fn mesh(seed: u64, nb: usize, extra: usize) -> Network {
    generate::random_connected(&mut generate::rng(seed), nb, extra, &params())
}

fn listed(net: &Network) -> DirectedNetwork {
    orient(net, Orientation::AsListed).unwrap()
}

fn away(net: &Network) -> DirectedNetwork {
    orient(net, Orientation::AwayFromRoot).unwrap()
}

fn voltage(seed: u64, nb: usize) -> VoltageProfile {
    generate::random_voltage(&mut generate::rng(seed ^ 0x9e37), nb)
}

fn undirected(d: &DirectedNetwork) -> BTreeSet<(usize, usize)> {
    d.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
}

fn max_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Independent brute-force chordality test: no chordless cycle of length ≥ 4.
fn has_chordless_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    // grow induced paths; an induced path whose ends are adjacent closes a chordless cycle
    fn extend(adj: &[Vec<bool>], path: &mut Vec<usize>) -> bool {
        let last = *path.last().unwrap();
        for next in 0..adj.len() {
            if !adj[last][next] || path.contains(&next) || next < path[0] {
                continue;
            }
            // next may touch only `last` among the other path vertices, except that
            // touching the start closes a cycle
            let inner = path.iter().skip(1).take(path.len().saturating_sub(2));
            if inner.copied().any(|p| adj[p][next]) {
                continue;
            }
            if path.len() >= 2 && adj[path[0]][next] {
                if path.len() >= 3 {
                    return true;
                }
                continue;
            }
            path.push(next);
            if extend(adj, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    (0..n).any(|s| extend(&adj, &mut vec![s]))
}

#[test]
fn chordless_cycle_scan_sees_squares() {
    assert!(has_chordless_cycle(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]));
    assert!(!has_chordless_cycle(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]));
    assert!(!has_chordless_cycle(3, &[(0, 1), (1, 2), (2, 0)]));
    assert!(has_chordless_cycle(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (4, 5)]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_paths_match_inverse_pattern(seed in any::<u64>(), nb in 2usize..16, extra in 0usize..4) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let d = listed(&net);
        let t = TreeIndex::new(&d);
        let inv = t.b_tree_inverse();
        prop_assert!(t.path(0).is_empty());
        prop_assert_eq!(t.tree_edges().len(), nb - 1);
        for j in 1..nb {
            let on_path: BTreeSet<usize> = t.path(j).iter().copied().collect();
            prop_assert!(on_path.iter().all(|&e| t.is_tree_edge(e)));
            for (col, &e) in t.tree_edges().iter().enumerate() {
                let x = inv[(j - 1, col)];
                prop_assert!(x == 0.0 || x.abs() == 1.0);
                prop_assert_eq!(x != 0.0, on_path.contains(&e));
                // with edges pointing away from the root the nonzeros are exactly −1
                if on_path.contains(&e) && t.tree_edge_sign(e) > 0.0 {
                    prop_assert_eq!(x, -1.0);
                }
            }
        }
        let prod = t.b_tree() * &inv;
        prop_assert_eq!(prod, DMatrix::identity(nb - 1, nb - 1));
    }

    #[test]
    fn away_reversed_is_toward(seed in any::<u64>(), nb in 2usize..20) {
        let net = tree(seed, nb);
        let a = away(&net);
        let t = orient(&net, Orientation::TowardRoot).unwrap();
        let flipped: BTreeSet<(usize, usize)> = a.reversed().edges().iter().copied().collect();
        let toward: BTreeSet<(usize, usize)> = t.edges().iter().copied().collect();
        prop_assert_eq!(flipped, toward);
        prop_assert_eq!(undirected(&a), undirected(&listed(&net)));
    }

    #[test]
    fn case_round_trip(seed in any::<u64>(), nb in 2usize..12, extra in 0usize..3, boxed in any::<bool>()) {
        let net = if boxed {
            generate::random_boxed_tree(&mut generate::rng(seed), nb, &params())
        } else {
            mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)))
        };
        let back = parse_case(&serialize_case(&net)).unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn qcqp_forms_are_real(seed in any::<u64>(), nb in 2usize..9, extra in 0usize..3) {
        let net = generate::random_boxed_tree(&mut generate::rng(seed), nb, &params());
        let m = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let v = voltage(seed, nb);
        for n in [&net, &m] {
            let q = build_qcqp(n, &CostSpec::generation_from(n));
            prop_assert!(quad_form(&q.objective, v.values()).im.abs() <= 1e-12);
            for c in &q.constraints {
                prop_assert!(quad_form(&c.matrix, v.values()).im.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn injections_split_into_hermitian_parts(seed in any::<u64>(), nb in 2usize..10, extra in 0usize..4) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let v = voltage(seed, nb);
        let ops = admittance_operators(&net);
        let s = injections_from_voltage(&net, &v);
        for (j, sj) in s.iter().enumerate() {
            let p = quad_form(&ops.phi(j), v.values());
            let q = quad_form(&ops.psi(j), v.values());
            prop_assert!((sj - (p + Complex64::i() * q)).norm() <= 1e-10);
        }
        // energy balance: total injection equals total series loss
        let total: Complex64 = s.iter().sum();
        let loss: Complex64 = net
            .lines()
            .iter()
            .map(|l| l.z * (l.y * (v[l.from] - v[l.to])).norm_sqr())
            .sum();
        prop_assert!((total - loss).norm() <= 1e-10);
    }

    #[test]
    fn bijection_round_trip(seed in any::<u64>(), nb in 2usize..11, extra in 0usize..4) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let d = listed(&net);
        let v = voltage(seed, nb);
        let x = bim_to_bfm(&d, &v);
        prop_assert!(bfm_residual(&d, &x).max() <= 1e-10);
        let back = bfm_to_bim(&d, &x, 1e-8).unwrap();
        prop_assert_eq!(back.values(), v.values());
        for (e, &(i, j)) in d.edges().iter().enumerate() {
            let lhs = x.flow[e] - d.z(e) * x.current[e].norm_sqr();
            let rhs = -d.y(e).conj() * v[j] * (v[j] - v[i]).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn angle_shift_by_full_turn_is_invisible(seed in any::<u64>(), nb in 2usize..12, bus in 1usize..12) {
        let net = tree(seed, nb);
        let d = away(&net);
        let t = TreeIndex::new(&d);
        let x = solve_radial(&d, &opfrelax::radial::fixed_injections(&net).unwrap(), SweepOptions::default()).unwrap();
        let base = recover_angles(&d, &x, &t, RecoveryOptions::default()).unwrap();
        let mut theta: Vec<f64> = base.voltage.values().iter().map(|v| v.arg()).collect();
        theta[bus % nb] += 2.0 * PI;
        let shifted = with_angles(&d, &x, &theta).unwrap();
        prop_assert!(max_dist(shifted.voltage.values(), base.voltage.values()) <= 1e-12);
        prop_assert!(max_dist(&shifted.current, &base.current) <= 1e-12);
        prop_assert!(bfm_residual(&d, &base).max() <= 1e-8);
        let again = relax_magnitudes(&base);
        prop_assert!(distflow_residual(&d, &again).max() <= 1e-9);
    }

    #[test]
    fn cycle_defect_computations_agree(seed in any::<u64>(), nb in 3usize..10, extra in 1usize..4, noise in 0.0f64..0.5) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let d = listed(&net);
        let t = TreeIndex::new(&d);
        let mut r = generate::rng(seed.wrapping_add(1));
        let b: Vec<f64> = (0..d.m()).map(|_| wrap(r.gen_range(-noise..=noise) * PI)).collect();
        let by_walk = cycle_defects(&t, &b);
        let by_matrix = incidence_defects(&t, &b);
        prop_assert_eq!(by_walk.len(), by_matrix.len());
        for (w, m) in by_walk.iter().zip(&by_matrix) {
            prop_assert!(wrap(w.defect - m).abs() <= 1e-10);
        }
        // a genuine voltage profile has no defect at all
        let x = relax_magnitudes(&bim_to_bfm(&d, &voltage(seed, nb)));
        let real = beta(&d, &x).unwrap();
        prop_assert!(cycle_defects(&t, &real).iter().all(|c| c.defect.abs() <= 1e-10));
    }

    #[test]
    fn subtree_identities_and_voltage_bounds(seed in any::<u64>(), nb in 2usize..25) {
        let net = tree(seed, nb);
        let s = opfrelax::radial::fixed_injections(&net).unwrap();
        let d = away(&net);
        let t = TreeIndex::new(&d);
        let x = solve_radial(&d, &s, SweepOptions::default()).unwrap();
        let lin = solve_linear_distflow(&d, &s).unwrap();
        let rep = check_bounds(&d, &x, &lin, &t, 1e-12);
        prop_assert!(rep.max_identity_residual() <= 1e-9);
        prop_assert_eq!(rep.violations(), 0);
        for j in 0..nb {
            prop_assert!(x.v[j] <= lin.v[j] + 1e-12);
        }
        let (rd, rx) = reverse_orientation(&d, &x);
        let (rd2, rlin) = solve_linear_reverse(&net, &s).unwrap();
        prop_assert_eq!(rd.edges(), rd2.edges());
        let rt = TreeIndex::new(&rd);
        let rrep = check_bounds(&rd, &rx, &rlin, &rt, 1e-12);
        prop_assert!(rrep.max_identity_residual() <= 1e-9);
        prop_assert_eq!(rrep.violations(), 0);
        for j in 0..nb {
            prop_assert!(rx.v[j] <= rlin.v[j] + 1e-12);
        }
    }

    #[test]
    fn rank_one_data_passes_every_stage(seed in any::<u64>(), nb in 3usize..9, extra in 0usize..5) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let d = listed(&net);
        let t = TreeIndex::new(&d);
        let v = voltage(seed, nb);
        let vv = v.as_vector();
        let full = &vv * vv.adjoint();

        // W = VVᴴ → each clique block is psd with one nonzero eigenvalue
        let edges: Vec<_> = net.lines().iter().map(|l| (l.from, l.to)).collect();
        let ext = chordal_extension(nb, &edges, None).unwrap();
        let form = sdp_standard_form(&ext, &net, &CostSpec::TotalLoss).unwrap();
        for block in form.blocks_from_full(&full) {
            let h = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
            let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let trace: f64 = (0..block.nrows()).map(|i| block[(i, i)].re).sum();
            prop_assert!(eig[0] >= -1e-10);
            prop_assert!((eig[eig.len() - 1] - trace).abs() <= 1e-10);
        }

        // its restriction to G passes the 2×2 and cycle tests
        let w = partial_from_voltage(&v, &d);
        prop_assert!(two_by_two_checks(&w, 1e-12).iter().all(|c| c.psd && c.rank1));
        prop_assert!(wg_cycle_condition(&w, &t, 1e-10).unwrap().satisfied);

        // and the completion gives W back
        let done = rank1_completion(&w, &t, 1e-12).unwrap();
        let err = (&done.full - &full).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10);
    }

    #[test]
    fn bus_and_matrix_feasibility_agree(seed in any::<u64>(), nb in 2usize..8, extra in 0usize..3) {
        let base = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let v = voltage(seed, nb);
        let s = injections_from_voltage(&base, &v);
        let mut r = generate::rng(seed.wrapping_mul(3));
        let mut buses = base.buses().to_vec();
        for (j, b) in buses.iter_mut().enumerate().skip(1) {
            // windows that sometimes contain the point and sometimes miss it
            let c = s[j] + Complex64::new(r.gen_range(-0.05..0.05), r.gen_range(-0.05..0.05));
            let h = Complex64::new(r.gen_range(0.0..0.06), r.gen_range(0.0..0.06));
            b.s_min = c - h;
            b.s_max = c + h;
            b.v_min = r.gen_range(0.85..1.0);
            b.v_max = r.gen_range(1.0..1.15);
        }
        let net = Network::new(buses, base.lines().to_vec(), 1.0).unwrap();

        let mut margin = f64::INFINITY;
        let mut direct = true;
        for (j, b) in net.buses().iter().enumerate().skip(1) {
            let m = [
                s[j].re - b.s_min.re,
                b.s_max.re - s[j].re,
                s[j].im - b.s_min.im,
                b.s_max.im - s[j].im,
                v[j].norm_sqr() - b.v_min,
                b.v_max - v[j].norm_sqr(),
            ];
            for x in m {
                margin = margin.min(x.abs());
                direct &= x >= 0.0;
            }
        }
        prop_assume!(margin > 1e-9);
        let w = partial_from_voltage(&v, &listed(&net));
        let res = wg_constraints_residual(&w, &net);
        // slack bus rows are unbounded except for |V₀|² = 1, which holds by construction
        prop_assert_eq!(res.max() == 0.0, direct);
    }

    #[test]
    fn edge_psd_iff_branch_cone(seed in any::<u64>(), nb in 2usize..8, extra in 0usize..3) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let d = listed(&net);
        let mut r = generate::rng(seed.wrapping_add(17));
        let diag: Vec<f64> = (0..nb).map(|_| r.gen_range(0.8..1.2)).collect();
        let off: Vec<Complex64> = d
            .edges()
            .iter()
            .map(|&(j, k)| Complex64::from_polar((diag[j] * diag[k]).sqrt() * r.gen_range(0.9..1.1), r.gen_range(-0.3..0.3)))
            .collect();
        let w = PartialMatrix::new(d.edges().to_vec(), diag.clone(), off.clone()).unwrap();
        let x = wg_to_x(&w, &d);
        let gaps = x.cone_gaps(&d);
        for (e, c) in two_by_two_checks(&w, 0.0).iter().enumerate() {
            let (j, k) = d.edge(e);
            let mat_gap = diag[j] * diag[k] - off[e].norm_sqr();
            prop_assume!(mat_gap.abs() > 1e-9);
            prop_assert_eq!(c.psd, gaps[e] >= 0.0);
            prop_assert!((gaps[e] - d.y(e).norm_sqr() * mat_gap).abs() <= 1e-9 * d.y(e).norm_sqr());
        }
    }

    #[test]
    fn sdp_entries_have_one_home(seed in any::<u64>(), nb in 3usize..11, extra in 0usize..6) {
        let net = mesh(seed, nb, extra.min(nb * (nb - 1) / 2 - (nb - 1)));
        let edges: Vec<_> = net.lines().iter().map(|l| (l.from, l.to)).collect();
        let ext = chordal_extension(nb, &edges, None).unwrap();
        prop_assert!(ext.is_chordal());
        prop_assert!(!has_chordless_cycle(nb, &ext.extended_edges()));
        let form = sdp_standard_form(&ext, &net, &CostSpec::TotalLoss).unwrap();
        prop_assert_eq!(form.blocks.len(), ext.cliques.len());
        prop_assert_eq!(form.decoupling.len(), ext.decoupling_count());

        // every (j, k) the rows or objective touch is always read from one block
        let mut home = std::collections::BTreeMap::new();
        for (entry, _) in form.rows.iter().flat_map(|r| r.terms.iter()).chain(form.objective.iter()) {
            let m = &form.blocks[entry.block];
            let key = (m[entry.row], m[entry.col]);
            let b = *home.entry(key).or_insert(entry.block);
            prop_assert_eq!(b, entry.block);
        }
        // copies only meet through decoupling pairs between distinct blocks
        for (a, b) in &form.decoupling {
            prop_assert_ne!(a.block, b.block);
            let ka = (form.blocks[a.block][a.row], form.blocks[a.block][a.col]);
            let kb = (form.blocks[b.block][b.row], form.blocks[b.block][b.col]);
            prop_assert_eq!(ka, kb);
        }
        // cliques cover every extended edge
        for (a, b) in ext.extended_edges() {
            prop_assert!(ext.cliques.iter().any(|c| c.contains(&a) && c.contains(&b)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rotated_cone_transform_preserves_membership(seed in any::<u64>(), k in 1usize..4) {
        let cone = RotatedCone { u: (2..2 + k).collect(), a: 0, b: 1 };
        let mut r = generate::rng(seed);
        let mut checked = 0;
        while checked < 10_000 {
            let x: Vec<f64> = (0..2 + k).map(|_| r.gen_range(-2.0..2.0)).collect();
            let u2: f64 = cone.u.iter().map(|&i| x[i] * x[i]).sum();
            // stay clear of the boundary where rounding could decide either way
            if (x[0] * x[1] - u2).abs() < 1e-9 || x[0].abs() < 1e-9 || x[1].abs() < 1e-9 {
                continue;
            }
            prop_assert_eq!(cone.contains(&x), in_lorentz(&cone.lorentz_point(&x)));
            checked += 1;
        }
    }

    #[test]
    fn relaxed_optimum_respects_bounds_and_duality(seed in any::<u64>(), nb in 2usize..10) {
        let net = tree(seed, nb);
        let d = away(&net);
        let t = TreeIndex::new(&d);
        let opts = RelaxOptions::default();
        let res = solve_bfm(&d, &CostSpec::TotalLoss, &opts).unwrap();
        let sol = &res.solution;
        prop_assert!(sol.primal_objective >= sol.dual_objective - opts.solver.gap_tol.max(1e-8));
        let (p, _) = opfrelax::relax::build_bfm_socp(&d, &CostSpec::TotalLoss).unwrap();
        prop_assert!((dual_objective(&p, sol) - sol.dual_objective).abs() <= 1e-9);

        let lin = solve_linear_distflow(&d, &res.state.s).unwrap();
        let rep = check_bounds(&d, &res.state, &lin, &t, 1e-7);
        prop_assert_eq!(rep.violations(), 0);

        let again = socp::solve(&p, SolverOptions::default()).unwrap();
        prop_assert_eq!(again.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), sol.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(again.iterations, sol.iterations);
    }
}
