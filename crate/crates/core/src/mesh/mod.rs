//! Triangle meshes and the geometry built on them: file IO, area
//! normalization, the cotangent Laplacian, graph geodesics and sampling.

mod geodesic;
mod io;
mod laplacian;
mod sampling;
pub mod shapes;

pub use geodesic::{geodesic_distances, MeshGraph};
pub use io::{load_mesh, load_mesh_path, write_off, MeshFormat};
pub use laplacian::{build_laplacian, LaplacianPair};
pub use sampling::{perturb_samples, sample, SampleSet, SamplingStrategy};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {arity} vertices, only triangles are supported")]
    NonTriangle { line: usize, arity: usize },
    #[error("face {face}: vertex index {index} out of range (n_vertices = {n_vertices})")]
    IndexOutOfRange {
        face: usize,
        index: i64,
        n_vertices: usize,
    },
    #[error("face {face} repeats a vertex index")]
    RepeatedIndex { face: usize },
    #[error("face {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("mesh has no faces")]
    Empty,
    #[error("total surface area {0:e} is not positive")]
    NonPositiveArea(f64),
    #[error("isolated vertices without incident faces: {0:?}")]
    IsolatedVertices(Vec<usize>),
    #[error("vertex {index} out of range (n_vertices = {n_vertices})")]
    VertexOutOfRange { index: usize, n_vertices: usize },
    #[error("invalid sample request: {0}")]
    Sampling(String),
    #[error("unknown mesh format for {0}")]
    UnknownFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Point = [f64; 3];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

/// Vertex positions plus triangle index triples.
///
/// Construction through [`TriangleMesh::new`] checks index ranges, repeated
/// indices and degenerate faces, so every value of this type can be handed to
/// [`build_laplacian`] directly.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mesh = Self::new_unchecked_geometry(vertices, faces)?;
        mesh.check_face_areas()?;
        Ok(mesh)
    }

    /// Checks connectivity only (index ranges, repeated indices). Face areas
    /// are not inspected, so degenerate geometry is accepted.
    pub fn new_unchecked_geometry(
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        let n = vertices.len();
        for (f, face) in faces.iter().enumerate() {
            for &i in face {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        index: i as i64,
                        n_vertices: n,
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(MeshError::RepeatedIndex { face: f });
            }
        }
        Ok(Self { vertices, faces })
    }

    fn check_face_areas(&self) -> Result<(), MeshError> {
        if self.faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let areas: Vec<f64> = (0..self.n_faces()).map(|f| self.face_area(f)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        if !(mean > 0.0) {
            return Err(MeshError::NonPositiveArea(mean * areas.len() as f64));
        }
        let floor = 1e-14 * mean;
        match areas.iter().position(|&a| !(a > floor)) {
            Some(face) => Err(MeshError::DegenerateFace {
                face,
                area: areas[face],
            }),
            None => Ok(()),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_faces()).map(|f| self.face_area(f)).sum()
    }

    /// Applies `map` to every vertex position, keeping connectivity.
    pub fn map_vertices(&self, map: impl Fn(Point) -> Point) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| map(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    pub(crate) fn edge_length(&self, i: usize, j: usize) -> f64 {
        norm(sub(self.vertices[i], self.vertices[j]))
    }
}

/// Rescales the mesh to unit total area by dividing coordinates by the
/// square root of the area. Returns the rescaled mesh and the original area.
pub fn normalize_unit_area(mesh: &TriangleMesh) -> Result<(TriangleMesh, f64), MeshError> {
    let area = mesh.total_area();
    if !(area > 0.0) || !area.is_finite() {
        return Err(MeshError::NonPositiveArea(area));
    }
    let scale = area.sqrt().recip();
    let scaled = mesh.map_vertices(|p| p.map(|x| x * scale));
    Ok((scaled, area))
}
