use std::collections::BTreeSet;

use serde::Serialize;

use super::PmatrixError;

/// A chordal supergraph with its maximal cliques and a clique tree.
#[derive(Debug, Clone, Serialize)]
pub struct ChordalExtension {
    pub bus_count: usize,
    /// Undirected edges of the original graph, stored `(min, max)`.
    pub edges: Vec<(usize, usize)>,
    /// Added edges, `(min, max)`, in order of creation.
    pub fill: Vec<(usize, usize)>,
    /// Elimination order; it is a perfect elimination ordering of the extension.
    pub ordering: Vec<usize>,
    /// Maximal cliques, each sorted ascending.
    pub cliques: Vec<Vec<usize>>,
    /// Clique-tree edges as pairs of clique indices (parent, child).
    pub clique_tree: Vec<(usize, usize)>,
    /// Shared buses for each clique-tree edge.
    pub separators: Vec<Vec<usize>>,
}

impl ChordalExtension {
    /// Original plus fill edges.
    pub fn extended_edges(&self) -> Vec<(usize, usize)> {
        let mut all: Vec<_> = self.edges.iter().chain(&self.fill).copied().collect();
        all.sort_unstable();
        all
    }

    /// Number of equalities linking duplicated matrix entries across clique blocks:
    /// one per ordered pair `(j, k)` (diagonal included) of each separator.
    pub fn decoupling_count(&self) -> usize {
        self.separators.iter().map(|s| s.len() * s.len()).sum()
    }

    pub fn is_chordal(&self) -> bool {
        is_perfect_elimination_ordering(self.bus_count, &self.extended_edges(), &self.ordering)
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    adj
}

/// Whether `order` eliminates `edges` without creating fill.
pub fn is_perfect_elimination_ordering(n: usize, edges: &[(usize, usize)], order: &[usize]) -> bool {
    let adj = adjacency(n, edges);
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    order.iter().all(|&v| {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        later
            .iter()
            .enumerate()
            .all(|(i, &a)| later[i + 1..].iter().all(|&b| adj[a].contains(&b)))
    })
}

/// Chordal extension by vertex elimination.
///
/// With `ordering = None` the next vertex is one of minimum current degree, ties broken
/// by ascending id. A supplied ordering must list every bus exactly once.
pub fn chordal_extension(
    bus_count: usize,
    edges: &[(usize, usize)],
    ordering: Option<&[usize]>,
) -> Result<ChordalExtension, PmatrixError> {
    if let Some(ord) = ordering {
        let mut seen = vec![false; bus_count];
        let ok = ord.len() == bus_count && ord.iter().all(|&v| v < bus_count && !std::mem::replace(&mut seen[v], true));
        if !ok {
            return Err(PmatrixError::Ordering(bus_count));
        }
    }
    let base: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut adj = adjacency(bus_count, &base);
    let mut alive = vec![true; bus_count];
    let mut order = Vec::with_capacity(bus_count);
    let mut fill = Vec::new();
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(bus_count);
    for step in 0..bus_count {
        let v = match ordering {
            Some(ord) => ord[step],
            None => (0..bus_count)
                .filter(|&u| alive[u])
                .min_by_key(|&u| (adj[u].len(), u))
                .unwrap(),
        };
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].insert(b) {
                    adj[b].insert(a);
                    fill.push((a.min(b), a.max(b)));
                }
            }
        }
        let mut clique = nbrs.clone();
        clique.push(v);
        clique.sort_unstable();
        candidates.push(clique);
        for &u in &nbrs {
            adj[u].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
        order.push(v);
    }

    // keep candidates not contained in another (first occurrence wins on equality)
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates.iter().enumerate().any(|(j, d)| {
            j != i && d.len() >= c.len() && is_subset(c, d) && (d.len() > c.len() || j < i)
        });
        if !dominated {
            cliques.push(c.clone());
        }
    }

    let (clique_tree, separators) = clique_tree(&cliques);
    Ok(ChordalExtension {
        bus_count,
        edges: base,
        fill,
        ordering: order,
        cliques,
        clique_tree,
        separators,
    })
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

// Maximum-weight spanning tree of the clique intersection graph (Prim from clique 0,
// ties to the lowest indices). It has the running-intersection property.
fn clique_tree(cliques: &[Vec<usize>]) -> (Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let q = cliques.len();
    let mut in_tree = vec![false; q];
    let mut edges = Vec::new();
    let mut seps = Vec::new();
    if q == 0 {
        return (edges, seps);
    }
    in_tree[0] = true;
    for _ in 1..q {
        let mut best: Option<(usize, usize, usize)> = None;
        for a in (0..q).filter(|&a| in_tree[a]) {
            for b in (0..q).filter(|&b| !in_tree[b]) {
                let w = intersection(&cliques[a], &cliques[b]).len();
                if best.map_or(true, |(bw, _, _)| w > bw) {
                    best = Some((w, a, b));
                }
            }
        }
        let (_, a, b) = best.unwrap();
        in_tree[b] = true;
        edges.push((a, b));
        seps.push(intersection(&cliques[a], &cliques[b]));
    }
    (edges, seps)
}
