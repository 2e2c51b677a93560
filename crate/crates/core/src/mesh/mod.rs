//! Closed triangulated surfaces: generation, OFF input/output, validation and
//! the two-copy configuration used by the splitting experiment.

mod generate;
mod off;

use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{self, Vec3};
use crate::scalar::Real;

pub use generate::{generate_ellipsoid, generate_icosphere, generate_spheroid};
pub use off::{load_off, load_off_with_report, parse_off, write_off, OffRepair};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("topology error: boundary edge ({0}, {1}) belongs to a single triangle")]
    BoundaryEdge(usize, usize),
    #[error("topology error: edge ({0}, {1}) is shared by {2} triangles")]
    NonManifoldEdge(usize, usize, usize),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("orientation error: {0}")]
    Orientation(String),
    #[error("degenerate triangle {0} (zero area)")]
    Degenerate(usize),
    #[error("overlap error: scaled copies intersect (|z| = {distance}, required > {required})")]
    Overlap { distance: f64, required: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Triangulated closed surface with per-panel centroid, area and outward normal.
#[derive(Clone, Debug)]
pub struct SurfaceMesh<T: Real> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[usize; 3]>,
    centroids: Vec<Vec3<T>>,
    areas: Vec<T>,
    normals: Vec<Vec3<T>>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MeshStats {
    pub panels: usize,
    pub vertices: usize,
    pub area: f64,
    pub volume: f64,
    pub min_quality: f64,
    pub max_quality: f64,
    pub min_edge: f64,
    pub max_edge: f64,
}

impl<T: Real> SurfaceMesh<T> {
    /// Builds a mesh and checks every invariant: indices in range, positive
    /// areas, each edge shared by exactly two consistently wound triangles,
    /// and positive enclosed volume.
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mesh = Self::from_parts_unchecked(vertices, triangles)?;
        mesh.check_topology()?;
        if mesh.volume() <= T::zero() {
            return Err(MeshError::Orientation(
                "signed volume is not positive (normals point inward)".into(),
            ));
        }
        Ok(mesh)
    }

    /// Computes derived panel data without topology checks.
    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Vec3<T>>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Topology("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        let mut centroids = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut normals = Vec::with_capacity(triangles.len());
        let third = T::one() / T::lit(3.0);
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&k| k >= nv) {
                return Err(MeshError::Topology(format!(
                    "triangle {i} references a vertex index out of range"
                )));
            }
            let [a, b, c] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            let n = geometry::cross(geometry::sub(b, a), geometry::sub(c, a));
            let len = geometry::norm(n);
            if !(len > T::zero()) || !len.is_finite() {
                return Err(MeshError::Degenerate(i));
            }
            areas.push(len * T::lit(0.5));
            normals.push(geometry::scale(n, T::one() / len));
            centroids.push(geometry::scale(geometry::add(geometry::add(a, b), c), third));
        }
        Ok(Self { vertices, triangles, centroids, areas, normals })
    }

    fn check_topology(&self) -> Result<(), MeshError> {
        // Directed edge counts: a closed consistently oriented surface uses
        // every directed edge exactly once and its reverse exactly once.
        let mut undirected: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                if u == v {
                    return Err(MeshError::Topology(format!("repeated vertex {u} in a triangle")));
                }
                let e = undirected.entry((u.min(v), u.max(v))).or_insert((0, 0));
                if u < v {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let mut edges: Vec<_> = undirected.into_iter().collect();
        edges.sort_unstable();
        for ((u, v), (fw, bw)) in edges {
            match fw + bw {
                1 => return Err(MeshError::BoundaryEdge(u, v)),
                2 if fw == 1 => {}
                2 => {
                    return Err(MeshError::Orientation(format!(
                        "inconsistent winding across edge ({u}, {v})"
                    )))
                }
                k => return Err(MeshError::NonManifoldEdge(u, v, k)),
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn centroids(&self) -> &[Vec3<T>] {
        &self.centroids
    }

    pub fn areas(&self) -> &[T] {
        &self.areas
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    pub fn num_panels(&self) -> usize {
        self.triangles.len()
    }

    pub fn panel(&self, i: usize) -> [Vec3<T>; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Longest edge of panel `i`.
    pub fn panel_diameter(&self, i: usize) -> T {
        let p = self.panel(i);
        geometry::dist(p[0], p[1]).max(geometry::dist(p[1], p[2])).max(geometry::dist(p[2], p[0]))
    }

    pub fn area(&self) -> T {
        self.areas.iter().copied().sum()
    }

    /// Enclosed volume by the divergence theorem.
    pub fn volume(&self) -> T {
        let third = T::one() / T::lit(3.0);
        self.centroids
            .iter()
            .zip(&self.normals)
            .zip(&self.areas)
            .map(|((c, n), a)| geometry::dot(*c, *n) * *a * third)
            .sum()
    }

    /// Sum of area-weighted normals; zero for a closed surface.
    pub fn normal_flux(&self) -> Vec3<T> {
        let mut s = [T::zero(); 3];
        for (n, a) in self.normals.iter().zip(&self.areas) {
            for k in 0..3 {
                s[k] = s[k] + n[k] * *a;
            }
        }
        s
    }

    /// Largest edge length over the mesh, used as the mesh size `h`.
    pub fn max_edge(&self) -> T {
        (0..self.num_panels()).map(|i| self.panel_diameter(i)).fold(T::zero(), T::max)
    }

    /// Mean of the vertex positions.
    pub fn center(&self) -> Vec3<T> {
        let mut c = [T::zero(); 3];
        for v in &self.vertices {
            c = geometry::add(c, *v);
        }
        geometry::scale(c, T::one() / T::lit(self.vertices.len() as f64))
    }

    pub fn bounding_radius(&self, center: Vec3<T>) -> T {
        self.vertices.iter().map(|v| geometry::dist(*v, center)).fold(T::zero(), T::max)
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }

    /// Mesh with every vertex scaled about the origin by `t`.
    pub fn scaled(&self, t: T) -> Result<Self, MeshError> {
        if !(t > T::zero()) {
            return Err(MeshError::Parameter("scale factor must be positive".into()));
        }
        let vertices = self.vertices.iter().map(|v| geometry::scale(*v, t)).collect();
        Self::from_parts_unchecked(vertices, self.triangles.clone())
    }

    /// Same surface in another scalar type.
    pub fn cast<U: Real>(&self) -> SurfaceMesh<U> {
        let vertices = self.vertices.iter().map(|v| geometry::cast3(*v)).collect();
        SurfaceMesh::from_parts_unchecked(vertices, self.triangles.clone())
            .expect("casting preserves validity")
    }

    /// Stable content hash of the vertex coordinates and connectivity.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            for x in v {
                h.update(x.to_f64_lossy().to_le_bytes());
            }
        }
        h.update((self.triangles.len() as u64).to_le_bytes());
        for t in &self.triangles {
            for &k in t {
                h.update((k as u64).to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// Short hexadecimal mesh identifier.
    pub fn id(&self) -> String {
        self.content_hash()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Panel adjacency through shared vertices: for every panel the sorted
    /// list of other panels sharing at least one vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (i, t) in self.triangles.iter().enumerate() {
            for &k in t {
                incident[k].push(i);
            }
        }
        self.triangles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut v: Vec<usize> =
                    t.iter().flat_map(|&k| incident[k].iter().copied()).filter(|&j| j != i).collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }
}

/// Area, volume, panel quality (inradius / circumradius) and edge-length range.
pub fn mesh_stats<T: Real>(mesh: &SurfaceMesh<T>) -> MeshStats {
    let mut min_q = f64::INFINITY;
    let mut max_q = 0.0f64;
    let mut min_e = f64::INFINITY;
    let mut max_e = 0.0f64;
    for i in 0..mesh.num_panels() {
        let p = mesh.panel(i);
        let a = geometry::dist(p[1], p[2]).to_f64_lossy();
        let b = geometry::dist(p[2], p[0]).to_f64_lossy();
        let c = geometry::dist(p[0], p[1]).to_f64_lossy();
        let area = mesh.areas()[i].to_f64_lossy();
        let s = 0.5 * (a + b + c);
        let inradius = area / s;
        let circumradius = a * b * c / (4.0 * area);
        let q = inradius / circumradius;
        min_q = min_q.min(q);
        max_q = max_q.max(q);
        for e in [a, b, c] {
            min_e = min_e.min(e);
            max_e = max_e.max(e);
        }
    }
    MeshStats {
        panels: mesh.num_panels(),
        vertices: mesh.vertices().len(),
        area: mesh.area().to_f64_lossy(),
        volume: mesh.volume().to_f64_lossy(),
        min_quality: min_q,
        max_quality: max_q,
        min_edge: min_e,
        max_edge: max_e,
    }
}

/// Disjoint union of `t·mesh` and `t·mesh + z`.
///
/// Fails when the bounding spheres of the two scaled copies intersect.
pub fn two_copy<T: Real>(mesh: &SurfaceMesh<T>, t: T, z: Vec3<T>) -> Result<SurfaceMesh<T>, MeshError> {
    if !(t > T::zero()) {
        return Err(MeshError::Parameter("scale t must be positive".into()));
    }
    let radius = mesh.bounding_radius(mesh.center()) * t;
    let distance = geometry::norm(z);
    let required = radius + radius;
    if !(distance > required) {
        return Err(MeshError::Overlap { distance: distance.to_f64_lossy(), required: required.to_f64_lossy() });
    }
    let nv = mesh.vertices.len();
    let mut vertices = Vec::with_capacity(2 * nv);
    vertices.extend(mesh.vertices.iter().map(|v| geometry::scale(*v, t)));
    vertices.extend(mesh.vertices.iter().map(|v| geometry::add(geometry::scale(*v, t), z)));
    let mut triangles = mesh.triangles.clone();
    triangles.extend(mesh.triangles.iter().map(|tr| [tr[0] + nv, tr[1] + nv, tr[2] + nv]));
    SurfaceMesh::new(vertices, triangles)
}

/// Smallest distance between two disjoint triangulated surfaces.
pub fn surface_distance<T: Real>(a: &SurfaceMesh<T>, b: &SurfaceMesh<T>) -> T {
    let mut best = T::infinity();
    for v in a.vertices() {
        for j in 0..b.num_panels() {
            best = best.min(geometry::point_triangle_distance(*v, &b.panel(j)));
        }
    }
    for v in b.vertices() {
        for i in 0..a.num_panels() {
            best = best.min(geometry::point_triangle_distance(*v, &a.panel(i)));
        }
    }
    let edges = |m: &SurfaceMesh<T>| {
        let mut e: Vec<(usize, usize)> = m
            .triangles()
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    };
    let (ea, eb) = (edges(a), edges(b));
    for &(p, q) in &ea {
        for &(r, s) in &eb {
            let d = geometry::segment_segment_distance(a.vertices[p], a.vertices[q], b.vertices[r], b.vertices[s]);
            best = best.min(d);
        }
    }
    best
}
