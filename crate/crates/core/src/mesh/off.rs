use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, SurfaceMesh};
use crate::geometry::{self, Vec3};
use crate::scalar::Real;

/// What the loader had to fix to obtain an outward-oriented surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OffRepair {
    /// Triangles whose winding was reversed to agree with their neighbours.
    pub rewound: usize,
    /// Whether the whole surface was flipped to make the volume positive.
    pub flipped: bool,
}

pub fn load_off<T: Real>(path: impl AsRef<Path>) -> Result<SurfaceMesh<T>, MeshError> {
    load_off_with_report(path).map(|(m, _)| m)
}

pub fn load_off_with_report<T: Real>(path: impl AsRef<Path>) -> Result<(SurfaceMesh<T>, OffRepair), MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_off(&text)
}

/// Parses ASCII OFF, triangulates quads along the shorter diagonal, checks the
/// surface is closed and repairs the winding.
pub fn parse_off<T: Real>(text: &str) -> Result<(SurfaceMesh<T>, OffRepair), MeshError> {
    let parse_err = |line: usize, message: String| MeshError::Parse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(ln, l)| (ln + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, first) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let mut header = first.split_whitespace();
    if header.next() != Some("OFF") {
        return Err(parse_err(ln, format!("expected OFF header, found `{first}`")));
    }
    let mut counts: Vec<usize> = Vec::with_capacity(3);
    let mut pending: Vec<(usize, String)> = header.map(|t| (ln, t.to_string())).collect();
    while counts.len() < 3 {
        if pending.is_empty() {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(ln, "truncated header".into()))?;
            pending = l.split_whitespace().map(|t| (ln, t.to_string())).collect();
        }
        for (ln, t) in pending.drain(..) {
            if counts.len() == 3 {
                return Err(parse_err(ln, "unexpected tokens after the counts".into()));
            }
            counts.push(t.parse().map_err(|_| parse_err(ln, format!("invalid count `{t}`")))?);
        }
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices: Vec<Vec3<T>> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in vertex list".into()))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(ln, format!("invalid coordinate `{t}`"))))
            .collect::<Result<_, _>>()?;
        if xs.len() != 3 || xs.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(ln, "vertex needs three finite coordinates".into()));
        }
        vertices.push([T::lit(xs[0]), T::lit(xs[1]), T::lit(xs[2])]);
    }

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in face list".into()))?;
        let mut it = l.split_whitespace();
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(ln, "invalid face vertex count".into()))?;
        let idx: Vec<usize> = it
            .take(k)
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("invalid vertex index `{t}`"))))
            .collect::<Result<_, _>>()?;
        if idx.len() != k {
            return Err(parse_err(ln, format!("face declares {k} vertices but lists {}", idx.len())));
        }
        if let Some(&bad) = idx.iter().find(|&&v| v >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range")));
        }
        match k {
            3 => triangles.push([idx[0], idx[1], idx[2]]),
            4 => {
                let d02 = geometry::dist(vertices[idx[0]], vertices[idx[2]]);
                let d13 = geometry::dist(vertices[idx[1]], vertices[idx[3]]);
                if d02 <= d13 {
                    triangles.push([idx[0], idx[1], idx[2]]);
                    triangles.push([idx[0], idx[2], idx[3]]);
                } else {
                    triangles.push([idx[0], idx[1], idx[3]]);
                    triangles.push([idx[1], idx[2], idx[3]]);
                }
            }
            _ => return Err(parse_err(ln, format!("faces with {k} vertices are not supported"))),
        }
    }

    let rewound = orient_consistently(&mut triangles)?;
    let mut mesh = SurfaceMesh::from_parts_unchecked(vertices, triangles)?;
    let mut flipped = false;
    if mesh.volume() < T::zero() {
        let tris = mesh.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect();
        mesh = SurfaceMesh::from_parts_unchecked(mesh.vertices, tris)?;
        flipped = true;
    }
    let mesh = SurfaceMesh::new(mesh.vertices, mesh.triangles)?;
    Ok((mesh, OffRepair { rewound, flipped }))
}

/// Checks the surface is a closed 2-manifold and propagates a consistent
/// winding by breadth-first search over edge-adjacent triangles. Returns how
/// many triangles were reversed.
fn orient_consistently(triangles: &mut [[usize; 3]]) -> Result<usize, MeshError> {
    let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            if u == v {
                return Err(MeshError::Topology(format!("face {f} repeats vertex {u}")));
            }
            edge_faces.entry((u.min(v), u.max(v))).or_default().push(f);
        }
    }
    let mut edges: Vec<_> = edge_faces.iter().collect();
    edges.sort_unstable_by_key(|(e, _)| **e);
    for (&(u, v), faces) in &edges {
        match faces.len() {
            1 => return Err(MeshError::BoundaryEdge(u, v)),
            2 => {}
            k => return Err(MeshError::NonManifoldEdge(u, v, k)),
        }
    }

    let has_directed = |t: &[usize; 3], u: usize, v: usize| (0..3).any(|k| t[k] == u && t[(k + 1) % 3] == v);
    let n = triangles.len();
    let mut visited = vec![false; n];
    let mut rewound = 0;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            let t = triangles[f];
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                for &g in &edge_faces[&(u.min(v), u.max(v))] {
                    if g == f {
                        continue;
                    }
                    // A consistent neighbour traverses the shared edge as v -> u.
                    let consistent = has_directed(&triangles[g], v, u);
                    if visited[g] {
                        if !consistent {
                            return Err(MeshError::Orientation(format!(
                                "surface is not orientable near edge ({u}, {v})"
                            )));
                        }
                        continue;
                    }
                    if !consistent {
                        triangles[g].swap(1, 2);
                        rewound += 1;
                    }
                    visited[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    Ok(rewound)
}

/// Serializes the mesh as ASCII OFF with full-precision coordinates.
pub fn write_off<T: Real>(mesh: &SurfaceMesh<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} 0", mesh.vertices().len(), mesh.num_panels());
    for v in mesh.vertices() {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e}",
            v[0].to_f64_lossy(),
            v[1].to_f64_lossy(),
            v[2].to_f64_lossy()
        );
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}
