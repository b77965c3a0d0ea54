use std::collections::VecDeque;

use nalgebra::DMatrix;

use super::DirectedNetwork;

/// Spanning tree of a directed network rooted at bus 0, with path, subtree and
/// incidence bookkeeping.
///
/// Tree edge `t` is the edge joining bus `t + 1` to its parent, so the rows of the
/// tree block `B_T` of the reduced incidence matrix are indexed by non-slack buses.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    parent: Vec<Option<usize>>,
    parent_edge: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    bfs_order: Vec<usize>,
    paths: Vec<Vec<usize>>,
    subtree_nodes: Vec<Vec<usize>>,
    subtree_edges: Vec<Vec<usize>>,
    tree_edges: Vec<usize>,
    non_tree_edges: Vec<usize>,
    edge_to_tree_row: Vec<Option<usize>>,
    // +1 when the directed edge points away from the root
    tree_edge_sign: Vec<f64>,
    incidence: DMatrix<f64>,
    edges: Vec<(usize, usize)>,
}

/// Breadth-first spanning tree from bus 0, visiting neighbours in ascending id order.
pub fn spanning_tree(dnet: &DirectedNetwork) -> TreeIndex {
    TreeIndex::new(dnet)
}

impl TreeIndex {
    pub fn new(dnet: &DirectedNetwork) -> Self {
        let net = dnet.base();
        let n_bus = net.bus_count();
        let n = n_bus - 1;
        let m = dnet.m();

        let mut parent = vec![None; n_bus];
        let mut parent_edge = vec![None; n_bus];
        let mut children = vec![Vec::new(); n_bus];
        let mut visited = vec![false; n_bus];
        let mut bfs_order = Vec::with_capacity(n_bus);
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(j) = queue.pop_front() {
            bfs_order.push(j);
            for &(k, e) in net.neighbors(j) {
                if !visited[k] {
                    visited[k] = true;
                    parent[k] = Some(j);
                    parent_edge[k] = Some(e);
                    children[j].push(k);
                    queue.push_back(k);
                }
            }
        }

        let mut paths = vec![Vec::new(); n_bus];
        for &j in bfs_order.iter().skip(1) {
            let p = parent[j].unwrap();
            let mut path = paths[p].clone();
            path.push(parent_edge[j].unwrap());
            paths[j] = path;
        }

        let mut subtree_nodes: Vec<Vec<usize>> = (0..n_bus).map(|j| vec![j]).collect();
        let mut subtree_edges: Vec<Vec<usize>> = vec![Vec::new(); n_bus];
        for &j in bfs_order.iter().rev() {
            for &c in &children[j].clone() {
                let nodes = subtree_nodes[c].clone();
                let mut edges = subtree_edges[c].clone();
                edges.push(parent_edge[c].unwrap());
                subtree_nodes[j].extend(nodes);
                subtree_edges[j].extend(edges);
            }
        }
        for v in subtree_nodes.iter_mut().chain(subtree_edges.iter_mut()) {
            v.sort_unstable();
        }

        let tree_edges: Vec<usize> = (1..n_bus).map(|j| parent_edge[j].unwrap()).collect();
        let mut edge_to_tree_row = vec![None; m];
        for (t, &e) in tree_edges.iter().enumerate() {
            edge_to_tree_row[e] = Some(t);
        }
        let non_tree_edges: Vec<usize> = (0..m).filter(|&e| edge_to_tree_row[e].is_none()).collect();

        let edges = dnet.edges().to_vec();
        let tree_edge_sign = (0..m)
            .map(|e| match edge_to_tree_row[e] {
                Some(t) => {
                    let child = t + 1;
                    if edges[e].1 == child {
                        1.0
                    } else {
                        -1.0
                    }
                }
                None => 0.0,
            })
            .collect();

        // reduced incidence: row per edge, column per non-slack bus (bus j -> column j-1)
        let mut incidence = DMatrix::zeros(m, n);
        for (e, &(j, k)) in edges.iter().enumerate() {
            if j > 0 {
                incidence[(e, j - 1)] = 1.0;
            }
            if k > 0 {
                incidence[(e, k - 1)] = -1.0;
            }
        }

        Self {
            parent,
            parent_edge,
            children,
            bfs_order,
            paths,
            subtree_nodes,
            subtree_edges,
            tree_edges,
            non_tree_edges,
            edge_to_tree_row,
            tree_edge_sign,
            incidence,
            edges,
        }
    }

    pub fn bus_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        self.parent[j]
    }

    pub fn parent_edge(&self, j: usize) -> Option<usize> {
        self.parent_edge[j]
    }

    pub fn children(&self, j: usize) -> &[usize] {
        &self.children[j]
    }

    /// Buses in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    /// Edges of the tree path from bus 0 to `j`, root first.
    pub fn path(&self, j: usize) -> &[usize] {
        &self.paths[j]
    }

    /// Buses of the subtree rooted at `j`, including `j`.
    pub fn subtree_nodes(&self, j: usize) -> &[usize] {
        &self.subtree_nodes[j]
    }

    /// Tree edges with both endpoints in the subtree rooted at `j`.
    pub fn subtree_edges(&self, j: usize) -> &[usize] {
        &self.subtree_edges[j]
    }

    /// Tree edges; entry `t` joins bus `t + 1` to its parent.
    pub fn tree_edges(&self) -> &[usize] {
        &self.tree_edges
    }

    pub fn non_tree_edges(&self) -> &[usize] {
        &self.non_tree_edges
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.edge_to_tree_row[e].is_some()
    }

    /// `+1` if tree edge `e` points away from the root, `-1` if toward it, `0` off-tree.
    pub fn tree_edge_sign(&self, e: usize) -> f64 {
        self.tree_edge_sign[e]
    }

    pub fn directed_edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Reduced incidence matrix `B` (m × n): `+1` where an edge leaves a bus, `-1`
    /// where it enters; the slack column is dropped.
    pub fn incidence(&self) -> &DMatrix<f64> {
        &self.incidence
    }

    /// Rows of `B` for tree edges, ordered as [`Self::tree_edges`].
    pub fn b_tree(&self) -> DMatrix<f64> {
        self.select_rows(&self.tree_edges)
    }

    /// Rows of `B` for non-tree edges, ordered as [`Self::non_tree_edges`].
    pub fn b_perp(&self) -> DMatrix<f64> {
        self.select_rows(&self.non_tree_edges)
    }

    fn select_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        let n = self.incidence.ncols();
        DMatrix::from_fn(rows.len(), n, |r, c| self.incidence[(rows[r], c)])
    }

    /// `B_T⁻¹` from the path formula: entry `(i, t)` is `-1` when tree edge `t` lies on
    /// the path to bus `i + 1` and points away from the root, `+1` when it lies on the
    /// path but points toward the root, and `0` otherwise.
    pub fn b_tree_inverse(&self) -> DMatrix<f64> {
        let n = self.tree_edges.len();
        let mut inv = DMatrix::zeros(n, n);
        for i in 0..n {
            for &e in &self.paths[i + 1] {
                let t = self.edge_to_tree_row[e].unwrap();
                inv[(i, t)] = -self.tree_edge_sign[e];
            }
        }
        inv
    }

    /// Buses along the tree path from `a` to `b` (both included).
    pub fn bus_path(&self, a: usize, b: usize) -> Vec<usize> {
        let up = |mut j: usize| {
            let mut v = vec![j];
            while let Some(p) = self.parent[j] {
                v.push(p);
                j = p;
            }
            v
        };
        let pa = up(a);
        let pb = up(b);
        // strip the common ancestry; pa[ia] is then the lowest common ancestor
        let (mut ia, mut ib) = (pa.len() - 1, pb.len() - 1);
        while ia > 0 && ib > 0 && pa[ia - 1] == pb[ib - 1] {
            ia -= 1;
            ib -= 1;
        }
        let mut result: Vec<usize> = pa[..=ia].to_vec();
        result.extend(pb[..ib].iter().rev());
        result
    }
}
