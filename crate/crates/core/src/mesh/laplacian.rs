use super::{cross, dot, norm, sub, MeshError, TriangleMesh};
use crate::sparse::CsrMatrix;

/// Lumped mass and cotangent stiffness of a triangle mesh.
///
/// `stiffness` is the positive semi-definite FEM stiffness matrix: negative
/// cotangent weights off the diagonal, rows summing to zero. The discrete
/// Laplace–Beltrami operator is `mass⁻¹ · stiffness`.
#[derive(Clone, Debug)]
pub struct LaplacianPair {
    pub mass: Vec<f64>,
    pub stiffness: CsrMatrix,
    pub total_area: f64,
}

impl LaplacianPair {
    pub fn n(&self) -> usize {
        self.mass.len()
    }

    /// `A⁻¹ W x`
    pub fn apply_operator(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.stiffness.mul_vec(x);
        for (yi, ai) in y.iter_mut().zip(&self.mass) {
            *yi /= ai;
        }
        y
    }

    /// `Σ_i A_ii x_i`
    pub fn integrate(&self, x: &[f64]) -> f64 {
        self.mass.iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

/// Cotangent of the angle at `apex` in triangle (`apex`, `p`, `q`).
fn cot_at(apex: [f64; 3], p: [f64; 3], q: [f64; 3]) -> f64 {
    let u = sub(p, apex);
    let v = sub(q, apex);
    dot(u, v) / norm(cross(u, v))
}

/// Assembles the lumped (barycentric) mass matrix and the cotangent
/// stiffness matrix. Boundary edges receive a single cotangent, which is the
/// natural (Neumann) boundary condition.
pub fn build_laplacian(mesh: &TriangleMesh) -> Result<LaplacianPair, MeshError> {
    let n = mesh.n_vertices();
    let mut mass = vec![0.0; n];
    let mut trip = Vec::with_capacity(mesh.n_faces() * 9);
    let pos = mesh.vertices();
    for (f, face) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(f);
        for &i in face {
            mass[i] += area / 3.0;
        }
        for k in 0..3 {
            let apex = face[k];
            let i = face[(k + 1) % 3];
            let j = face[(k + 2) % 3];
            let w = 0.5 * cot_at(pos[apex], pos[i], pos[j]);
            trip.push((i, j, -w));
            trip.push((j, i, -w));
            trip.push((i, i, w));
            trip.push((j, j, w));
        }
    }
    let isolated: Vec<usize> = (0..n).filter(|&i| !(mass[i] > 0.0)).collect();
    if !isolated.is_empty() {
        return Err(MeshError::IsolatedVertices(isolated));
    }
    let stiffness = CsrMatrix::from_triplets(n, &trip);
    let total_area = mass.iter().sum();
    Ok(LaplacianPair {
        mass,
        stiffness,
        total_area,
    })
}
