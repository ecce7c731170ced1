//! 2D dual quadrilateral meshes.
//!
//! A dual quad mesh is a polygonal mesh in which every interior vertex has
//! valency exactly four and topological defects appear as non-quadrilateral
//! (extraordinary) faces. The same structure also represents the primal
//! meshes fed to [`primal_to_dual`].

mod dual;
mod generate;
mod io;
mod smooth;

pub use dual::{dual_to_primal, primal_to_dual};
pub use generate::{generate_test_mesh, MeshKind};
pub use io::{load, load_from_str, save, save_to_string};
pub use smooth::{laplacian_smooth, smoothing_displacements};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// 2D point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Per-vertex topological classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshClass {
    InteriorRegular,
    Boundary,
    Corner,
    /// Interior vertex with an extraordinary face among its incident faces.
    DefectAdjacent,
}

/// Undirected edge with its adjacent faces.
#[derive(Debug, Clone)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub faces: [Option<u32>; 2],
}

impl Edge {
    pub fn other(&self, v: u32) -> u32 {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.faces[1].is_none()
    }
}

/// Vertex/face complex with derived adjacency. Immutable after construction;
/// mutating operations return new meshes.
#[derive(Debug, Clone)]
pub struct DualMesh {
    vertices: Vec<Point2>,
    faces: Vec<Vec<u32>>,
    edges: Vec<Edge>,
    /// Incident edges per vertex, sorted counter-clockwise by direction.
    vertex_edges: Vec<Vec<u32>>,
    /// `dir_next[(u, v)] = (face, w)`: face whose CCW cycle contains u->v,
    /// and the vertex following v in that cycle.
    dir_next: HashMap<(u32, u32), (u32, u32)>,
    edge_index: HashMap<(u32, u32), u32>,
    boundary_vertex: Vec<bool>,
}

impl DualMesh {
    /// Builds a mesh and its adjacency. Fails on structurally broken input
    /// (degenerate faces, an edge shared by more than two faces, a directed
    /// edge used twice, i.e. inconsistent orientation).
    pub fn new(vertices: Vec<Point2>, faces: Vec<Vec<u32>>) -> Result<Self> {
        let nv = vertices.len() as u32;
        let mut dir_next = HashMap::new();
        let mut edge_index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (fi, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::InvalidInput(format!("face {fi} has fewer than 3 vertices")));
            }
            let mut seen = face.clone();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("face {fi} repeats a vertex")));
            }
            if face.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidInput(format!("face {fi} references missing vertex")));
            }
            let k = face.len();
            for i in 0..k {
                let u = face[i];
                let v = face[(i + 1) % k];
                let w = face[(i + 2) % k];
                if dir_next.insert((u, v), (fi as u32, w)).is_some() {
                    return Err(Error::InvalidInput(format!(
                        "directed edge {u}->{v} appears in two faces (inconsistent orientation)"
                    )));
                }
                let key = (u.min(v), u.max(v));
                match edge_index.get(&key) {
                    Some(&ei) => {
                        let e = &mut edges[ei as usize];
                        if e.faces[1].is_some() {
                            return Err(Error::InvalidInput(format!(
                                "edge {}-{} shared by more than two faces",
                                key.0, key.1
                            )));
                        }
                        e.faces[1] = Some(fi as u32);
                    }
                    None => {
                        edge_index.insert(key, edges.len() as u32);
                        edges.push(Edge {
                            a: key.0,
                            b: key.1,
                            faces: [Some(fi as u32), None],
                        });
                    }
                }
            }
        }

        let mut vertex_edges: Vec<Vec<u32>> = vec![Vec::new(); vertices.len()];
        for (ei, e) in edges.iter().enumerate() {
            vertex_edges[e.a as usize].push(ei as u32);
            vertex_edges[e.b as usize].push(ei as u32);
        }
        for (v, list) in vertex_edges.iter_mut().enumerate() {
            let p = vertices[v];
            list.sort_by(|&e1, &e2| {
                let a1 = edge_angle(&vertices, &edges[e1 as usize], v as u32, p);
                let a2 = edge_angle(&vertices, &edges[e2 as usize], v as u32, p);
                a1.partial_cmp(&a2).unwrap().then(e1.cmp(&e2))
            });
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for e in &edges {
            if e.is_boundary() {
                boundary_vertex[e.a as usize] = true;
                boundary_vertex[e.b as usize] = true;
            }
        }

        Ok(Self {
            vertices,
            faces,
            edges,
            vertex_edges,
            dir_next,
            edge_index,
            boundary_vertex,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: u32) -> Point2 {
        self.vertices[v as usize]
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<u32>] {
        &self.faces
    }

    pub fn face(&self, f: u32) -> &[u32] {
        &self.faces[f as usize]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: u32) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn incident_edges(&self, v: u32) -> &[u32] {
        &self.vertex_edges[v as usize]
    }

    pub fn valency(&self, v: u32) -> usize {
        self.vertex_edges[v as usize].len()
    }

    pub fn is_boundary_vertex(&self, v: u32) -> bool {
        self.boundary_vertex[v as usize]
    }

    pub fn edge_between(&self, u: u32, v: u32) -> Option<u32> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Face containing the directed edge u->v in its CCW cycle (the face on
    /// the left of the walk u->v) and the vertex after v in that cycle.
    pub fn left_face(&self, u: u32, v: u32) -> Option<(u32, u32)> {
        self.dir_next.get(&(u, v)).copied()
    }

    /// Faces incident to a vertex, CCW-ordered to match `incident_edges`:
    /// entry `i` is the face in the sector between edge `i` and edge `i+1`.
    pub fn incident_faces_ccw(&self, v: u32) -> Vec<Option<u32>> {
        self.vertex_edges[v as usize]
            .iter()
            .map(|&e| {
                let w = self.edges[e as usize].other(v);
                self.left_face(v, w).map(|(f, _)| f)
            })
            .collect()
    }

    /// Incident faces without sector ordering.
    pub fn incident_faces(&self, v: u32) -> Vec<u32> {
        let mut fs: Vec<u32> = self.incident_faces_ccw(v).into_iter().flatten().collect();
        fs.sort_unstable();
        fs.dedup();
        fs
    }

    pub fn is_extraordinary(&self, f: u32) -> bool {
        self.faces[f as usize].len() != 4
    }

    pub fn extraordinary_faces(&self) -> Vec<u32> {
        (0..self.faces.len() as u32)
            .filter(|&f| self.is_extraordinary(f))
            .collect()
    }

    pub fn classify(&self, v: u32) -> MeshClass {
        if self.boundary_vertex[v as usize] {
            let boundary_edges = self.vertex_edges[v as usize]
                .iter()
                .filter(|&&e| self.edges[e as usize].is_boundary())
                .count();
            if self.valency(v) == boundary_edges {
                MeshClass::Corner
            } else {
                MeshClass::Boundary
            }
        } else if self
            .incident_faces(v)
            .iter()
            .any(|&f| self.is_extraordinary(f))
        {
            MeshClass::DefectAdjacent
        } else {
            MeshClass::InteriorRegular
        }
    }

    /// Among the edges at `v`, the partner of `e` under the pairing that
    /// maximizes the angle between edge directions (most nearly opposite).
    pub fn opposite_edge(&self, v: u32, e: u32) -> Option<u32> {
        let p = self.position(v);
        let dir = |ei: u32| {
            let q = self.position(self.edges[ei as usize].other(v));
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let n = (dx * dx + dy * dy).sqrt();
            (dx / n, dy / n)
        };
        let d0 = dir(e);
        self.vertex_edges[v as usize]
            .iter()
            .filter(|&&other| other != e)
            .map(|&other| {
                let d = dir(other);
                (d0.0 * d.0 + d0.1 * d.1, other)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
            .map(|(_, other)| other)
    }

    pub fn average_edge_length(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|e| self.position(e.a).dist(self.position(e.b)))
            .sum();
        total / self.edges.len() as f64
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vertices.len() as u32).filter(|&v| !self.boundary_vertex[v as usize])
    }

    /// Boundary loops as cyclic vertex lists, each traversed with the domain
    /// interior on the left.
    pub fn boundary_loops(&self) -> Vec<Vec<u32>> {
        let mut succ: HashMap<u32, u32> = HashMap::new();
        for e in &self.edges {
            if !e.is_boundary() {
                continue;
            }
            // The interior is on the left of the direction stored in a face
            // cycle, so the boundary is walked in that same direction.
            if self.dir_next.contains_key(&(e.a, e.b)) {
                succ.insert(e.a, e.b);
            } else {
                succ.insert(e.b, e.a);
            }
        }
        let mut loops = Vec::new();
        let mut visited: Vec<u32> = Vec::new();
        let mut starts: Vec<u32> = succ.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            if visited.contains(&s) {
                continue;
            }
            let mut cycle = vec![s];
            visited.push(s);
            let mut cur = succ[&s];
            while cur != s {
                cycle.push(cur);
                visited.push(cur);
                cur = succ[&cur];
            }
            loops.push(cycle);
        }
        loops
    }

    /// Index of the loop enclosing the largest area (the outer boundary).
    pub fn outer_loop_index(&self, loops: &[Vec<u32>]) -> usize {
        loops
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                let aa = self.loop_area(a).abs();
                let ab = self.loop_area(b).abs();
                aa.partial_cmp(&ab).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    fn loop_area(&self, cycle: &[u32]) -> f64 {
        let mut s = 0.0;
        for i in 0..cycle.len() {
            let p = self.position(cycle[i]);
            let q = self.position(cycle[(i + 1) % cycle.len()]);
            s += p.x * q.y - q.x * p.y;
        }
        0.5 * s
    }

    /// Outward unit normal at a boundary vertex, averaged over its boundary
    /// edges. Interior vertices return None.
    pub fn boundary_normal(&self, v: u32) -> Option<(f64, f64)> {
        if !self.boundary_vertex[v as usize] {
            return None;
        }
        let mut nx = 0.0;
        let mut ny = 0.0;
        for &ei in &self.vertex_edges[v as usize] {
            let e = &self.edges[ei as usize];
            if !e.is_boundary() {
                continue;
            }
            // Interior on the left of the stored direction; outward normal
            // of a directed edge (a->b) is then (ty, -tx).
            let (a, b) = if self.dir_next.contains_key(&(e.a, e.b)) {
                (e.a, e.b)
            } else {
                (e.b, e.a)
            };
            let pa = self.position(a);
            let pb = self.position(b);
            let (tx, ty) = (pb.x - pa.x, pb.y - pa.y);
            let len = (tx * tx + ty * ty).sqrt();
            nx += ty / len;
            ny += -tx / len;
        }
        let n = (nx * nx + ny * ny).sqrt();
        if n == 0.0 {
            return None;
        }
        Some((nx / n, ny / n))
    }

    /// Checks the dual-mesh invariants and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for v in 0..self.vertices.len() as u32 {
            if !self.boundary_vertex[v as usize] && self.valency(v) != 4 {
                report.violations.push(Violation::InteriorValency {
                    vertex: v,
                    valency: self.valency(v),
                });
            }
        }
        for (fi, face) in self.faces.iter().enumerate() {
            let mut area = 0.0;
            for i in 0..face.len() {
                let p = self.position(face[i]);
                let q = self.position(face[(i + 1) % face.len()]);
                area += p.x * q.y - q.x * p.y;
            }
            if area <= 0.0 {
                report.violations.push(Violation::FaceOrientation { face: fi as u32 });
            }
        }
        for v in 0..self.vertices.len() as u32 {
            if self.boundary_vertex[v as usize] {
                let count = self.vertex_edges[v as usize]
                    .iter()
                    .filter(|&&e| self.edges[e as usize].is_boundary())
                    .count();
                if count != 2 {
                    report
                        .violations
                        .push(Violation::BoundaryStructure { vertex: v, boundary_edges: count });
                }
            }
        }
        report
    }

    /// Defect (extraordinary face) arities as a sorted multiset.
    pub fn defect_arities(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self
            .extraordinary_faces()
            .iter()
            .map(|&f| self.faces[f as usize].len())
            .collect();
        a.sort_unstable();
        a
    }

    pub fn centroid(&self, f: u32) -> Point2 {
        let face = &self.faces[f as usize];
        let mut x = 0.0;
        let mut y = 0.0;
        for &v in face {
            let p = self.position(v);
            x += p.x;
            y += p.y;
        }
        let n = face.len() as f64;
        Point2::new(x / n, y / n)
    }

    /// Applies an affine map to every vertex, keeping the topology.
    pub fn map_positions(&self, f: impl Fn(Point2) -> Point2) -> DualMesh {
        let vertices = self.vertices.iter().map(|&p| f(p)).collect();
        DualMesh::new(vertices, self.faces.clone()).expect("topology unchanged")
    }
}

fn edge_angle(vertices: &[Point2], e: &Edge, v: u32, p: Point2) -> f64 {
    let q = vertices[e.other(v) as usize];
    (q.y - p.y).atan2(q.x - p.x)
}

/// Validation outcome; empty means all invariants hold.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug)]
pub enum Violation {
    InteriorValency { vertex: u32, valency: usize },
    FaceOrientation { face: u32 },
    BoundaryStructure { vertex: u32, boundary_edges: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::InteriorValency { vertex, valency } => {
                write!(f, "interior vertex {vertex} has valency {valency}, expected 4")
            }
            Violation::FaceOrientation { face } => {
                write!(f, "face {face} is not counter-clockwise")
            }
            Violation::BoundaryStructure { vertex, boundary_edges } => {
                write!(f, "boundary vertex {vertex} has {boundary_edges} boundary edges, expected 2")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use generate::regular_plane;

    #[test]
    fn regular_grid_adjacency() {
        let m = regular_plane(4);
        assert_eq!(m.vertex_count(), 16);
        assert_eq!(m.face_count(), 9);
        assert_eq!(m.edge_count(), 24);
        assert!(m.validate().is_clean());
        let v = 5; // (1,1)
        assert_eq!(m.valency(v), 4);
        assert_eq!(m.classify(v), MeshClass::InteriorRegular);
        assert_eq!(m.classify(0), MeshClass::Corner);
        assert_eq!(m.classify(1), MeshClass::Boundary);
    }

    #[test]
    fn interior_valency_violation_detected() {
        // Merging two quads into a hexagon drops one edge of the center
        // vertex 4, leaving it interior with valency 3.
        let m = regular_plane(3);
        let mut faces = m.faces().to_vec();
        faces.remove(1);
        faces.remove(0);
        faces.push(vec![0, 1, 2, 5, 4, 3]);
        let broken = DualMesh::new(m.vertices().to_vec(), faces).unwrap();
        let report = broken.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::InteriorValency { vertex: 4, valency: 3 })));
    }

    #[test]
    fn opposite_edges_on_grid_are_collinear() {
        let m = regular_plane(5);
        let v = 12; // center
        for &e in m.incident_edges(v) {
            let o = m.opposite_edge(v, e).unwrap();
            let p = m.position(v);
            let a = m.position(m.edge(e).other(v));
            let b = m.position(m.edge(o).other(v));
            let cross = (a.x - p.x) * (b.y - p.y) - (a.y - p.y) * (b.x - p.x);
            let dot = (a.x - p.x) * (b.x - p.x) + (a.y - p.y) * (b.y - p.y);
            assert!(cross.abs() < 1e-12 && dot < 0.0);
        }
    }

    #[test]
    fn boundary_loop_of_grid() {
        let m = regular_plane(4);
        let loops = m.boundary_loops();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].len(), 12);
        // Outward normal on the south edge points down.
        let (nx, ny) = m.boundary_normal(1).unwrap();
        assert!(nx.abs() < 1e-12 && ny < 0.0);
    }
}
