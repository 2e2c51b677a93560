use std::collections::HashMap;

use super::{MeshError, SurfaceMesh};
use crate::geometry::{self, Vec3};
use crate::scalar::Real;

/// Unit-sphere vertices and outward-wound faces of a subdivided icosahedron.
fn unit_icosphere(subdivisions: u32) -> (Vec<Vec3<f64>>, Vec<[usize; 3]>) {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3<f64>> = [
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
    ]
    .into_iter()
    .map(geometry::normalize)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
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
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3<f64>>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = geometry::scale(geometry::add(vertices[a], vertices[b]), 0.5);
                vertices.push(geometry::normalize(m));
                vertices.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Subdivided icosahedron with all vertices on the sphere of the given radius.
pub fn generate_icosphere<T: Real>(radius: T, subdivisions: u32) -> Result<SurfaceMesh<T>, MeshError> {
    generate_ellipsoid([radius; 3], subdivisions)
}

/// Icosphere vertices mapped by the diagonal scaling `diag(semi_axes)`;
/// normals come from the mapped triangles.
pub fn generate_ellipsoid<T: Real>(semi_axes: [T; 3], subdivisions: u32) -> Result<SurfaceMesh<T>, MeshError> {
    if semi_axes.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
        return Err(MeshError::Parameter("semi-axes must be positive and finite".into()));
    }
    if subdivisions > 7 {
        return Err(MeshError::Parameter("subdivision level above 7 is not supported".into()));
    }
    let (unit, faces) = unit_icosphere(subdivisions);
    let vertices = unit
        .into_iter()
        .map(|v| {
            let v: Vec3<T> = geometry::cast3(v);
            // Re-project in the target precision so vertices lie on the surface.
            let u = geometry::normalize(v);
            [u[0] * semi_axes[0], u[1] * semi_axes[1], u[2] * semi_axes[2]]
        })
        .collect();
    SurfaceMesh::new(vertices, faces)
}

/// Spheroid with polar semi-axis `a` along x and equatorial semi-axis `b`.
pub fn generate_spheroid<T: Real>(a: T, b: T, subdivisions: u32) -> Result<SurfaceMesh<T>, MeshError> {
    generate_ellipsoid([a, b, b], subdivisions)
}
