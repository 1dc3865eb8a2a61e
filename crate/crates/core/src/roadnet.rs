//! Road networks, shortest paths and landmark-based Road Network Embedding.
//!
//! A node is embedded as `E_i(u) = min_{s in S_i} d(u, s)` for each landmark
//! subset `S_i`. The max-metric between two embeddings lower-bounds the road
//! distance between the nodes.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, BlockParams, CodecError};

pub type NodeId = usize;

/// Default embedding dimension: eight singleton landmark subsets.
pub const DEFAULT_DIMENSION: usize = 8;

#[derive(Debug, Error)]
pub enum RoadnetError {
    #[error("grid must have at least one row and one column")]
    EmptyGrid,
    #[error("empty edge weight range {lo}..={hi}")]
    EmptyWeightRange { lo: u64, hi: u64 },
    #[error("network has no nodes")]
    NoNodes,
    #[error("node {node} out of range for a network of {count} nodes")]
    InvalidNode { node: NodeId, count: usize },
    #[error("nodes {from} and {to} are not connected")]
    Disconnected { from: NodeId, to: NodeId },
    #[error("landmark subset {0} is empty")]
    EmptyLandmarkSubset(usize),
    #[error("network has no landmark subsets")]
    NoLandmarks,
    #[error("embedding coordinate {value} of node {node} exceeds capacity {max}")]
    Capacity { node: NodeId, value: u64, max: u64 },
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("network file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    /// Meters.
    pub weight: u64,
}

/// Connected, undirected, integer-weighted road graph with landmark subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadNetwork {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, u64)>>,
    landmarks: Vec<Vec<NodeId>>,
}

impl RoadNetwork {
    pub fn new(
        node_count: usize,
        edges: Vec<Edge>,
        landmarks: Vec<Vec<NodeId>>,
    ) -> Result<Self, RoadnetError> {
        if node_count == 0 {
            return Err(RoadnetError::NoNodes);
        }
        let check = |node: NodeId| {
            if node < node_count {
                Ok(())
            } else {
                Err(RoadnetError::InvalidNode {
                    node,
                    count: node_count,
                })
            }
        };
        let mut adjacency = vec![Vec::new(); node_count];
        for e in &edges {
            check(e.u)?;
            check(e.v)?;
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        let net = Self {
            node_count,
            edges,
            adjacency,
            landmarks: Vec::new(),
        };
        if let Some(unreached) = net.first_unreachable() {
            return Err(RoadnetError::Disconnected {
                from: 0,
                to: unreached,
            });
        }
        net.with_landmarks(landmarks)
    }

    /// Replace the landmark subsets.
    pub fn with_landmarks(mut self, landmarks: Vec<Vec<NodeId>>) -> Result<Self, RoadnetError> {
        if landmarks.is_empty() {
            return Err(RoadnetError::NoLandmarks);
        }
        for (i, subset) in landmarks.iter().enumerate() {
            if subset.is_empty() {
                return Err(RoadnetError::EmptyLandmarkSubset(i));
            }
            for &node in subset {
                if node >= self.node_count {
                    return Err(RoadnetError::InvalidNode {
                        node,
                        count: self.node_count,
                    });
                }
            }
        }
        self.landmarks = landmarks;
        Ok(self)
    }

    /// `n` singleton subsets on distinct random nodes (repeating only when
    /// the graph has fewer than `n` nodes).
    pub fn sample_singleton_landmarks(&self, n: usize, seed: u64) -> Vec<Vec<NodeId>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes: Vec<NodeId> = (0..self.node_count).collect();
        nodes.shuffle(&mut rng);
        (0..n).map(|i| vec![nodes[i % nodes.len()]]).collect()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn landmarks(&self) -> &[Vec<NodeId>] {
        &self.landmarks
    }

    /// Embedding dimension `n`.
    pub fn dimension(&self) -> usize {
        self.landmarks.len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, u64)] {
        &self.adjacency[node]
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Multi-source Dijkstra. `None` marks unreachable nodes.
    pub fn distances_from(&self, sources: &[NodeId]) -> Vec<Option<u64>> {
        let mut dist: Vec<Option<u64>> = vec![None; self.node_count];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = Some(0);
            heap.push(Reverse((0u64, s)));
        }
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u].is_some_and(|best| d > best) {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if dist[v].is_none_or(|cur| nd < cur) {
                    dist[v] = Some(nd);
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }

    /// Largest shortest-path distance over all node pairs.
    pub fn diameter(&self) -> u64 {
        (0..self.node_count)
            .map(|s| {
                self.distances_from(&[s])
                    .into_iter()
                    .map(|d| d.expect("network is connected"))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Parse the line-oriented text format: `N M`, then `M` lines `u v w`,
    /// then one line of space-separated node ids per landmark subset.
    pub fn parse(text: &str) -> Result<Self, RoadnetError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let parse_err = |line, message: String| RoadnetError::Parse { line, message };
        let numbers = |line: usize, l: &str| -> Result<Vec<u64>, RoadnetError> {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|e| parse_err(line, format!("`{t}`: {e}")))
                })
                .collect()
        };

        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `N M` header".into()))?;
        let header = numbers(hline, header)?;
        let [n, m] = header[..] else {
            return Err(parse_err(hline, "header must be `N M`".into()));
        };

        let mut edges = Vec::with_capacity(m as usize);
        for k in 0..m {
            let (line, l) = lines
                .next()
                .ok_or_else(|| parse_err(hline, format!("expected {m} edges, found {k}")))?;
            let fields = numbers(line, l)?;
            let [u, v, weight] = fields[..] else {
                return Err(parse_err(line, "edge must be `u v w`".into()));
            };
            edges.push(Edge {
                u: u as NodeId,
                v: v as NodeId,
                weight,
            });
        }

        let mut landmarks = Vec::new();
        for (line, l) in lines {
            let subset = numbers(line, l)?;
            landmarks.push(subset.into_iter().map(|x| x as NodeId).collect());
        }
        Self::new(n as usize, edges, landmarks)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RoadnetError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.node_count, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
        for subset in &self.landmarks {
            let ids: Vec<String> = subset.iter().map(|n| n.to_string()).collect();
            let _ = writeln!(out, "{}", ids.join(" "));
        }
        out
    }
}

/// Grid of `rows x cols` nodes, 4-neighbour edges with weights drawn
/// uniformly from `weight_range`, and [`DEFAULT_DIMENSION`] singleton
/// landmarks. Deterministic in `seed`.
pub fn generate_grid_network(
    rows: usize,
    cols: usize,
    weight_range: RangeInclusive<u64>,
    seed: u64,
) -> Result<RoadNetwork, RoadnetError> {
    if rows == 0 || cols == 0 {
        return Err(RoadnetError::EmptyGrid);
    }
    if weight_range.is_empty() {
        return Err(RoadnetError::EmptyWeightRange {
            lo: *weight_range.start(),
            hi: *weight_range.end(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r, c + 1),
                    weight: rng.gen_range(weight_range.clone()),
                });
            }
            if r + 1 < rows {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r + 1, c),
                    weight: rng.gen_range(weight_range.clone()),
                });
            }
        }
    }
    let net = RoadNetwork::new(rows * cols, edges, vec![vec![0]])?;
    let landmarks = net.sample_singleton_landmarks(DEFAULT_DIMENSION, rng.gen());
    net.with_landmarks(landmarks)
}

pub fn shortest_path_distance(
    net: &RoadNetwork,
    u: NodeId,
    v: NodeId,
) -> Result<u64, RoadnetError> {
    for node in [u, v] {
        if node >= net.node_count() {
            return Err(RoadnetError::InvalidNode {
                node,
                count: net.node_count(),
            });
        }
    }
    net.distances_from(&[u])[v].ok_or(RoadnetError::Disconnected { from: u, to: v })
}

/// A node's location embedding `(E_1(u), ..., E_n(u))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RneVector(Vec<u64>);

impl RneVector {
    pub fn new(coords: Vec<u64>) -> Self {
        Self(coords)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    /// Per-coordinate block decompositions, indexed `[i][j]`.
    pub fn blocks(&self, params: BlockParams) -> Result<Vec<Vec<u32>>, CodecError> {
        self.0.iter().map(|&c| codec::decompose(c, params)).collect()
    }

    pub fn check_capacity(&self, params: BlockParams) -> Result<(), CodecError> {
        match self.0.iter().find(|&&c| c > params.max_value()) {
            Some(&value) => Err(CodecError::Capacity {
                value,
                bits: params.total_bits(),
            }),
            None => Ok(()),
        }
    }
}

impl From<Vec<u64>> for RneVector {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

/// Embedding of a single node, checked against `params` capacity.
pub fn rne_embed(
    net: &RoadNetwork,
    node: NodeId,
    params: BlockParams,
) -> Result<RneVector, RoadnetError> {
    if node >= net.node_count() {
        return Err(RoadnetError::InvalidNode {
            node,
            count: net.node_count(),
        });
    }
    let mut coords = Vec::with_capacity(net.dimension());
    for subset in net.landmarks() {
        let d = net.distances_from(subset)[node].expect("network is connected");
        if d > params.max_value() {
            return Err(RoadnetError::Capacity {
                node,
                value: d,
                max: params.max_value(),
            });
        }
        coords.push(d);
    }
    Ok(RneVector(coords))
}

/// `max_i |a_i - b_i|`
pub fn rne_distance(a: &RneVector, b: &RneVector) -> Result<u64, RoadnetError> {
    if a.dimension() != b.dimension() {
        return Err(RoadnetError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    Ok(a.0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0))
}

/// Cached embeddings of every node of a network.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    params: BlockParams,
    vectors: Vec<RneVector>,
}

impl EmbeddingTable {
    /// One multi-source Dijkstra per landmark subset.
    pub fn build(net: &RoadNetwork, params: BlockParams) -> Result<Self, RoadnetError> {
        let mut vectors = vec![Vec::with_capacity(net.dimension()); net.node_count()];
        for subset in net.landmarks() {
            for (node, d) in net.distances_from(subset).into_iter().enumerate() {
                let d = d.expect("network is connected");
                if d > params.max_value() {
                    return Err(RoadnetError::Capacity {
                        node,
                        value: d,
                        max: params.max_value(),
                    });
                }
                vectors[node].push(d);
            }
        }
        Ok(Self {
            params,
            vectors: vectors.into_iter().map(RneVector).collect(),
        })
    }

    pub fn params(&self) -> BlockParams {
        self.params
    }

    pub fn get(&self, node: NodeId) -> Option<&RneVector> {
        self.vectors.get(node)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &RneVector)> {
        self.vectors.iter().enumerate()
    }

    #[cfg(test)]
    pub(crate) fn from_vectors(params: BlockParams, vectors: Vec<RneVector>) -> Self {
        Self { params, vectors }
    }
}
