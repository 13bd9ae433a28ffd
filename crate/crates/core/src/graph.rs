//! Undirected weighted graphs over voxels or points.
//!
//! Two constructions are provided: the voxel adjacency graph, which links
//! occupied voxels that are neighbors under 6-, 18- or 26-connectivity, and
//! the k-nearest-neighbor graph over arbitrary points. Both use unit weights.

use std::collections::{BTreeSet, VecDeque};
use std::io::{self, Write};

use thiserror::Error;

use crate::voxel::VoxelGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one node")]
    Empty,
    #[error("k must satisfy 1 <= k < n (k = {k}, n = {n})")]
    InvalidK { k: usize, n: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("edge ({p}, {q}) is invalid: {msg}")]
    InvalidEdge { p: usize, q: usize, msg: String },
    #[error("payload length {found} does not match node count {expected}")]
    PayloadLength { found: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// shared face
    #[default]
    Six,
    /// shared face or edge
    Eighteen,
    /// shared face, edge or corner
    TwentySix,
}

impl Connectivity {
    pub fn from_count(count: u32) -> Option<Self> {
        match count {
            6 => Some(Self::Six),
            18 => Some(Self::Eighteen),
            26 => Some(Self::TwentySix),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Self::Six => 6,
            Self::Eighteen => 18,
            Self::TwentySix => 26,
        }
    }

    /// Neighbor offsets, lexicographically ordered.
    pub fn offsets(self) -> Vec<[i64; 3]> {
        let max_l1 = match self {
            Self::Six => 1,
            Self::Eighteen => 2,
            Self::TwentySix => 3,
        };
        let mut out = Vec::new();
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let l1 = dx.abs() + dy.abs() + dz.abs();
                    if l1 > 0 && l1 <= max_l1 {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

/// Node positions: integer voxel coordinates or points of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Positions {
    Voxels(Vec<[u32; 3]>),
    Points { dim: usize, coords: Vec<f64> },
}

impl Positions {
    pub fn len(&self) -> usize {
        match self {
            Self::Voxels(v) => v.len(),
            Self::Points { dim, coords } => {
                if *dim == 0 {
                    0
                } else {
                    coords.len() / dim
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn distance_sq(&self, a: usize, b: usize) -> f64 {
        match self {
            Self::Voxels(v) => (0..3)
                .map(|k| {
                    let d = v[a][k] as f64 - v[b][k] as f64;
                    d * d
                })
                .sum(),
            Self::Points { dim, coords } => {
                let pa = &coords[a * dim..(a + 1) * dim];
                let pb = &coords[b * dim..(b + 1) * dim];
                pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
    pub weight: f64,
}

/// Undirected graph without self-loops or parallel edges. Edges are stored
/// with `p < q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    positions: Positions,
    values: Vec<f64>,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(positions: Positions, values: Vec<f64>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = positions.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if values.len() != n {
            return Err(GraphError::PayloadLength {
                found: values.len(),
                expected: n,
            });
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let bad = |msg: &str| GraphError::InvalidEdge {
                p: e.p,
                q: e.q,
                msg: msg.to_string(),
            };
            if e.p >= n || e.q >= n {
                return Err(bad("endpoint out of range"));
            }
            if e.p == e.q {
                return Err(bad("self-loop"));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(bad("weight must be positive"));
            }
            let (p, q) = (e.p.min(e.q), e.p.max(e.q));
            if !seen.insert((p, q)) {
                return Err(bad("duplicate edge"));
            }
            normalized.push(Edge { p, q, weight: e.weight });
        }
        Ok(Self {
            positions,
            values,
            edges: normalized,
        })
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn positions(&self) -> &Positions {
        &self.positions
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.p].push(e.q);
            adj[e.q].push(e.p);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Write one `p q w` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {:?}", e.p, e.q, e.weight)?;
        }
        Ok(())
    }
}

/// One node per occupied voxel (lexicographic order), unit edges between
/// voxels that are neighbors under `connectivity`.
pub fn build_adjacency_graph(grid: &VoxelGrid, connectivity: Connectivity) -> Result<Graph, GraphError> {
    if grid.is_empty() {
        return Err(GraphError::Empty);
    }
    let (coords, values): (Vec<[u32; 3]>, Vec<f64>) = grid.iter().unzip();
    // only the offsets that are lexicographically positive, so each pair is visited once
    let forward: Vec<[i64; 3]> = connectivity
        .offsets()
        .into_iter()
        .filter(|o| *o > [0, 0, 0])
        .collect();
    let mut edges = Vec::new();
    for (p, c) in coords.iter().enumerate() {
        for o in &forward {
            let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
            if n.iter().any(|&x| x < 0) {
                continue;
            }
            let key = [n[0] as u32, n[1] as u32, n[2] as u32];
            if let Ok(q) = coords.binary_search(&key) {
                edges.push(Edge { p, q, weight: 1.0 });
            }
        }
    }
    edges.sort_by_key(|e| (e.p, e.q));
    Graph::new(Positions::Voxels(coords), values, edges)
}

/// Connect each point to its `k` nearest neighbors (Euclidean, ties broken by
/// smaller index) and symmetrize by union. All nodes get value 1.0.
pub fn build_knn_graph(points: &[Vec<f64>], k: usize) -> Result<Graph, GraphError> {
    let n = points.len();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    if k == 0 || k >= n {
        return Err(GraphError::InvalidK { k, n });
    }
    let dim = points[0].len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(GraphError::DimensionMismatch {
                index,
                found: p.len(),
                expected: dim,
            });
        }
    }
    let positions = Positions::Points {
        dim,
        coords: points.iter().flatten().copied().collect(),
    };
    let mut pairs = BTreeSet::new();
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        candidates.extend((0..n).filter(|&j| j != i).map(|j| (positions.distance_sq(i, j), j)));
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &candidates[..k] {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(p, q)| Edge { p, q, weight: 1.0 })
        .collect();
    Graph::new(positions, vec![1.0; n], edges)
}

/// Component label per node. Labels are assigned breadth-first starting
/// from the lowest-index unvisited node, so node 0 is always in component 0.
pub fn connected_components(graph: &Graph) -> (usize, Vec<usize>) {
    let adj = graph.adjacency();
    let n = graph.node_count();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if labels[v] == usize::MAX {
                    labels[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    (count, labels)
}

/// Connect all components with unit edges. Each step joins the two
/// components whose closest pair of nodes is globally nearest, preferring
/// the lexicographically smallest node pair on ties. Returns the new graph
/// and the number of edges added.
pub fn bridge_components(graph: &Graph) -> (Graph, usize) {
    let (count, labels) = connected_components(graph);
    if count <= 1 {
        return (graph.clone(), 0);
    }
    let n = graph.node_count();
    let positions = graph.positions();

    // closest node pair for every pair of original components; since the
    // distance between merged components is the minimum over their parts,
    // processing these in order with a union-find reproduces the greedy rule
    let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; count * count];
    for p in 0..n {
        for q in p + 1..n {
            let (a, b) = (labels[p], labels[q]);
            if a == b {
                continue;
            }
            let d = positions.distance_sq(p, q);
            let slot = &mut best[a.min(b) * count + a.max(b)];
            let better = match *slot {
                None => true,
                Some((bd, bp, bq)) => d < bd || (d == bd && (p, q) < (bp, bq)),
            };
            if better {
                *slot = Some((d, p, q));
            }
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = best.into_iter().flatten().collect();
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut edges = graph.edges().to_vec();
    let mut added = 0;
    for (_, p, q) in candidates {
        let (ra, rb) = (find(&mut parent, labels[p]), find(&mut parent, labels[q]));
        if ra == rb {
            continue;
        }
        parent[ra.max(rb)] = ra.min(rb);
        edges.push(Edge { p, q, weight: 1.0 });
        added += 1;
        if added == count - 1 {
            break;
        }
    }
    let bridged = Graph::new(positions.clone(), graph.values().to_vec(), edges)
        .expect("bridging edges join distinct components");
    (bridged, added)
}
