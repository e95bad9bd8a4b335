//! Synthetic meshes for tests, experiments and benchmarks.

use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{norm, Point, TriangleMesh};

/// Regular icosahedron inscribed in the unit sphere.
pub fn icosahedron() -> TriangleMesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: [Point; 12] = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let vertices = raw.iter().map(|&v| unit(v)).collect();
    TriangleMesh::new(vertices, faces).expect("icosahedron is valid")
}

fn unit(p: Point) -> Point {
    let n = norm(p);
    p.map(|x| x / n)
}

/// Icosahedron subdivided `level` times with vertices projected onto the unit
/// sphere: 12, 42, 162, 642, 2562, 10242 vertices for levels 0 to 5.
pub fn icosphere(level: usize) -> TriangleMesh {
    let base = icosahedron();
    let mut vertices = base.vertices().to_vec();
    let mut faces = base.faces().to_vec();
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize| {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let (p, q) = (vertices[i], vertices[j]);
                    vertices.push(unit([
                        0.5 * (p[0] + q[0]),
                        0.5 * (p[1] + q[1]),
                        0.5 * (p[2] + q[2]),
                    ]));
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b);
            let bc = mid(b, c);
            let ca = mid(c, a);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Regular tetrahedron with unit circumradius.
pub fn tetrahedron() -> TriangleMesh {
    let s = 1.0 / 3f64.sqrt();
    TriangleMesh::new(
        vec![[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]],
        vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )
    .expect("tetrahedron is valid")
}

/// Flat `nx` by `ny` grid of unit-square cells in the z = 0 plane, each cell
/// split along its diagonal. Has a boundary.
pub fn grid(nx: usize, ny: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64, j as f64, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("grid is valid")
}

/// Displaces every vertex radially by a uniform factor in
/// `[1 - amplitude, 1 + amplitude]`. Breaks the symmetries of
/// [`icosphere`] while keeping the mesh valid for small amplitudes.
pub fn jitter_radial(mesh: &TriangleMesh, amplitude: f64, seed: u64) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<f64> = (0..mesh.n_vertices())
        .map(|_| 1.0 + amplitude * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&factors)
        .map(|(p, &f)| p.map(|x| x * f))
        .collect();
    TriangleMesh::new(vertices, mesh.faces().to_vec()).expect("jitter keeps faces valid")
}

/// Smooth non-rigid deformation: anisotropic stretch plus a low-frequency
/// bump. Connectivity is preserved, so the identity is the ground-truth map
/// between input and output.
pub fn smooth_deform(mesh: &TriangleMesh, strength: f64) -> TriangleMesh {
    mesh.map_vertices(|[x, y, z]| {
        let bump = 1.0 + 0.5 * strength * (2.0 * x).sin() * (1.5 * y).cos();
        [
            x * (1.0 + strength) * bump,
            y * bump,
            z * (1.0 - 0.5 * strength) * bump + 0.3 * strength * x * x,
        ]
    })
}

/// Rotation about an arbitrary axis followed by a translation.
pub fn rigid_motion(mesh: &TriangleMesh, axis: Point, angle: f64, shift: Point) -> TriangleMesh {
    let [ux, uy, uz] = unit(axis);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let r = [
        [c + ux * ux * t, ux * uy * t - uz * s, ux * uz * t + uy * s],
        [uy * ux * t + uz * s, c + uy * uy * t, uy * uz * t - ux * s],
        [uz * ux * t - uy * s, uz * uy * t + ux * s, c + uz * uz * t],
    ];
    mesh.map_vertices(|p| {
        let mut q = [0.0; 3];
        for i in 0..3 {
            q[i] = r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + shift[i];
        }
        q
    })
}

/// Two disjoint copies of the icosahedron, offset along x.
pub fn two_icosahedra() -> TriangleMesh {
    let a = icosahedron();
    let n = a.n_vertices();
    let mut vertices = a.vertices().to_vec();
    vertices.extend(a.vertices().iter().map(|p| [p[0] + 5.0, p[1], p[2]]));
    let mut faces = a.faces().to_vec();
    faces.extend(a.faces().iter().map(|f| f.map(|i| i + n)));
    TriangleMesh::new(vertices, faces).expect("two icosahedra are valid")
}
