use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{norm, sub, MeshError, MeshGraph, TriangleMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingStrategy {
    FpsEuclidean,
    FpsGeodesic,
    Random,
    /// Indices supplied by the caller, e.g. a landmark file.
    Explicit,
}

impl fmt::Display for SamplingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FpsEuclidean => "fps-euclidean",
            Self::FpsGeodesic => "fps-geodesic",
            Self::Random => "random",
            Self::Explicit => "explicit",
        })
    }
}

impl FromStr for SamplingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fps-euclidean" => Ok(Self::FpsEuclidean),
            "fps-geodesic" => Ok(Self::FpsGeodesic),
            "random" => Ok(Self::Random),
            "explicit" => Ok(Self::Explicit),
            other => Err(format!("unknown sampling strategy `{other}`")),
        }
    }
}

/// Ordered set of distinct sample vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    indices: Vec<usize>,
    strategy: SamplingStrategy,
    seed: u64,
}

impl SampleSet {
    pub fn new(
        indices: Vec<usize>,
        n_vertices: usize,
        strategy: SamplingStrategy,
        seed: u64,
    ) -> Result<Self, MeshError> {
        if indices.is_empty() {
            return Err(MeshError::Sampling("sample set is empty".into()));
        }
        let mut seen = vec![false; n_vertices];
        for &i in &indices {
            if i >= n_vertices {
                return Err(MeshError::VertexOutOfRange {
                    index: i,
                    n_vertices,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(MeshError::Sampling(format!("vertex {i} sampled twice")));
            }
        }
        Ok(Self {
            indices,
            strategy,
            seed,
        })
    }

    /// Caller-provided indices, e.g. landmarks.
    pub fn explicit(indices: Vec<usize>, n_vertices: usize) -> Result<Self, MeshError> {
        Self::new(indices, n_vertices, SamplingStrategy::Explicit, 0)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn strategy(&self) -> SamplingStrategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Index of the largest value; ties go to the lowest index.
fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Picks `n` sample vertices.
///
/// Farthest point sampling starts from a seed-chosen vertex and then adds the
/// vertex maximizing the distance to the chosen set. `graph` is used for
/// geodesic FPS and built on demand when absent.
pub fn sample(
    mesh: &TriangleMesh,
    n: usize,
    strategy: SamplingStrategy,
    seed: u64,
    graph: Option<&MeshGraph>,
) -> Result<SampleSet, MeshError> {
    let nv = mesh.n_vertices();
    if n == 0 || n > nv {
        return Err(MeshError::Sampling(format!(
            "requested {n} samples from a mesh with {nv} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = match strategy {
        SamplingStrategy::Random => rand::seq::index::sample(&mut rng, nv, n).into_vec(),
        SamplingStrategy::FpsEuclidean => {
            let first = rng.random_range(0..nv);
            let pos = mesh.vertices();
            farthest_points(nv, n, first, |s| {
                Ok(pos.iter().map(|&p| norm(sub(p, pos[s]))).collect())
            })?
        }
        SamplingStrategy::FpsGeodesic => {
            let first = rng.random_range(0..nv);
            let owned;
            let g = match graph {
                Some(g) => g,
                None => {
                    owned = MeshGraph::new(mesh);
                    &owned
                }
            };
            farthest_points(nv, n, first, |s| g.distances_from(s))?
        }
        SamplingStrategy::Explicit => {
            return Err(MeshError::Sampling(
                "explicit samples must be supplied, not drawn".into(),
            ))
        }
    };
    SampleSet::new(indices, nv, strategy, seed)
}

fn farthest_points(
    nv: usize,
    n: usize,
    first: usize,
    mut distances: impl FnMut(usize) -> Result<Vec<f64>, MeshError>,
) -> Result<Vec<usize>, MeshError> {
    let mut chosen = vec![first];
    let mut min_dist = vec![f64::INFINITY; nv];
    let mut last = first;
    while chosen.len() < n {
        for (m, d) in min_dist.iter_mut().zip(distances(last)?) {
            *m = m.min(d);
        }
        for &c in &chosen {
            min_dist[c] = f64::NEG_INFINITY;
        }
        last = argmax_lowest(&min_dist);
        chosen.push(last);
    }
    Ok(chosen)
}

/// Displaces `count` seed-chosen samples to uniformly random vertices within
/// `noise_radius` times the largest geodesic distance from that sample.
/// Candidates already in the set are skipped so indices stay distinct.
pub fn perturb_samples(
    graph: &MeshGraph,
    samples: &SampleSet,
    noise_radius: f64,
    count: usize,
    seed: u64,
) -> Result<SampleSet, MeshError> {
    if count > samples.len() {
        return Err(MeshError::Sampling(format!(
            "cannot displace {count} of {} samples",
            samples.len()
        )));
    }
    if !(noise_radius >= 0.0) {
        return Err(MeshError::Sampling(format!(
            "noise radius must be non-negative, got {noise_radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, samples.len(), count).into_vec();
    picked.sort_unstable();
    let mut indices = samples.indices().to_vec();
    let nv = graph.n_vertices();
    for slot in picked {
        let s = indices[slot];
        let d = graph.distances_from(s)?;
        let max_d = d
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max);
        let bound = noise_radius * max_d;
        let candidates: Vec<usize> = (0..nv)
            .filter(|&v| d[v] <= bound && (v == s || !indices.contains(&v)))
            .collect();
        indices[slot] = candidates[rng.random_range(0..candidates.len())];
    }
    SampleSet::new(indices, nv, samples.strategy(), samples.seed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    #[test]
    fn single_sample_is_seed_choice() {
        let mesh = shapes::icosphere(2);
        for strategy in [
            SamplingStrategy::FpsEuclidean,
            SamplingStrategy::FpsGeodesic,
            SamplingStrategy::Random,
        ] {
            let s = sample(&mesh, 1, strategy, 11, None).unwrap();
            assert_eq!(s.len(), 1);
            let again = sample(&mesh, 1, strategy, 11, None).unwrap();
            assert_eq!(s, again);
        }
        let a = sample(&mesh, 1, SamplingStrategy::FpsEuclidean, 11, None).unwrap();
        let b = sample(&mesh, 1, SamplingStrategy::FpsGeodesic, 11, None).unwrap();
        assert_eq!(a.indices(), b.indices());
    }

    #[test]
    fn tetrahedron_fps_takes_all_vertices() {
        let mesh = shapes::tetrahedron();
        for seed in 0..8 {
            let s = sample(&mesh, 4, SamplingStrategy::FpsEuclidean, seed, None).unwrap();
            let mut idx = s.indices().to_vec();
            idx.sort_unstable();
            assert_eq!(idx, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn fps_matches_brute_force_greedy() {
        // brute force: recompute min distance to the whole chosen set each step
        let mesh = shapes::jitter_radial(&shapes::icosphere(2), 0.05, 1);
        let s = sample(&mesh, 10, SamplingStrategy::FpsEuclidean, 4, None).unwrap();
        let p = mesh.vertices();
        let idx = s.indices();
        for k in 1..idx.len() {
            let score = |v: usize| {
                idx[..k]
                    .iter()
                    .map(|&c| norm(sub(p[v], p[c])))
                    .fold(f64::INFINITY, f64::min)
            };
            let best = (0..p.len()).map(score).fold(f64::NEG_INFINITY, f64::max);
            assert!((score(idx[k]) - best).abs() < 1e-15);
        }
    }

    #[test]
    fn too_many_samples() {
        let mesh = shapes::tetrahedron();
        assert!(sample(&mesh, 5, SamplingStrategy::Random, 0, None).is_err());
        assert!(sample(&mesh, 0, SamplingStrategy::Random, 0, None).is_err());
    }

    #[test]
    fn random_samples_distinct_and_reproducible() {
        let mesh = shapes::icosphere(2);
        let a = sample(&mesh, 30, SamplingStrategy::Random, 9, None).unwrap();
        let b = sample(&mesh, 30, SamplingStrategy::Random, 9, None).unwrap();
        assert_eq!(a, b);
        let mut idx = a.indices().to_vec();
        idx.sort_unstable();
        idx.dedup();
        assert_eq!(idx.len(), 30);
    }

    #[test]
    fn perturbation_respects_radius() {
        let mesh = shapes::icosphere(3);
        let graph = MeshGraph::new(&mesh);
        let s = sample(&mesh, 6, SamplingStrategy::FpsEuclidean, 2, None).unwrap();
        assert_eq!(perturb_samples(&graph, &s, 0.0, 6, 5).unwrap(), s);
        for radius in [0.01, 0.05, 0.1] {
            let p = perturb_samples(&graph, &s, radius, 3, 5).unwrap();
            let moved = s
                .indices()
                .iter()
                .zip(p.indices())
                .filter(|(a, b)| a != b)
                .count();
            assert!(moved <= 3);
            for (&orig, &new) in s.indices().iter().zip(p.indices()) {
                let d = graph.distances_from(orig).unwrap();
                let max_d = d.iter().copied().fold(0.0, f64::max);
                assert!(d[new] <= radius * max_d + 1e-15);
            }
        }
        assert!(perturb_samples(&graph, &s, 0.1, 7, 0).is_err());
    }
}
