use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{MeshError, TriangleMesh};

/// Edge graph of a mesh with Euclidean edge lengths, stored as adjacency
/// lists. Shortest paths on it approximate surface geodesics.
#[derive(Clone, Debug)]
pub struct MeshGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    lengths: Vec<f64>,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on vertex index for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MeshGraph {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let n = mesh.n_vertices();
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(mesh.n_faces() * 6);
        for f in mesh.faces() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.push((a, b));
                edges.push((b, a));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &edges {
            offsets[a + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<usize> = edges.iter().map(|&(_, b)| b).collect();
        let lengths = edges.iter().map(|&(a, b)| mesh.edge_length(a, b)).collect();
        Self {
            offsets,
            targets,
            lengths,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.lengths[r].iter().copied())
    }

    /// Dijkstra distances from `source`; unreachable vertices get `+∞`.
    pub fn distances_from(&self, source: usize) -> Result<Vec<f64>, MeshError> {
        self.check(source)?;
        Ok(self.dijkstra(source, |_| false))
    }

    /// Dijkstra from `source` that stops once every vertex flagged by
    /// `wanted` is settled. Distances of unsettled vertices are upper bounds
    /// (or `+∞`).
    pub fn distances_until(&self, source: usize, wanted: &[usize]) -> Result<Vec<f64>, MeshError> {
        self.check(source)?;
        for &w in wanted {
            self.check(w)?;
        }
        let mut pending = vec![false; self.n_vertices()];
        let mut remaining = 0usize;
        for &w in wanted {
            if !pending[w] {
                pending[w] = true;
                remaining += 1;
            }
        }
        Ok(self.dijkstra(source, |v| {
            if pending[v] {
                pending[v] = false;
                remaining -= 1;
            }
            remaining == 0
        }))
    }

    fn check(&self, v: usize) -> Result<(), MeshError> {
        if v >= self.n_vertices() {
            return Err(MeshError::VertexOutOfRange {
                index: v,
                n_vertices: self.n_vertices(),
            });
        }
        Ok(())
    }

    fn dijkstra(&self, source: usize, mut settled: impl FnMut(usize) -> bool) -> Vec<f64> {
        let n = self.n_vertices();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            vertex: source,
        });
        while let Some(Entry { dist: d, vertex: v }) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            if settled(v) {
                break;
            }
            for (u, len) in self.neighbors(v) {
                let nd = d + len;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(Entry {
                        dist: nd,
                        vertex: u,
                    });
                }
            }
        }
        dist
    }
}

/// Graph-geodesic distances from `source` to every vertex.
pub fn geodesic_distances(mesh: &TriangleMesh, source: usize) -> Result<Vec<f64>, MeshError> {
    MeshGraph::new(mesh).distances_from(source)
}
