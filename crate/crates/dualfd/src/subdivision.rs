//! Ternary dual-mesh refinement.
//!
//! Each step inserts one face point per (face, vertex) pair, one edge point
//! per (edge, endpoint) pair and one vertex point per vertex, then rebuilds
//! connectivity; edge lengths shrink roughly by a factor of three.
//!
//! Interior weights follow from inserting knots at one-third and two-thirds
//! of every interval of a uniform biquadratic B-spline surface. The 1D
//! masks on (previous, self, next) control points are
//!
//! ```text
//! toward previous: (1/3, 2/3, 0)
//! central:         (1/9, 7/9, 1/9)
//! toward next:     (0, 2/3, 1/3)
//! ```
//!
//! and the 2D masks are their tensor products, rearranged below as weighted
//! sums of the vertex and face/edge midpoints so that they also apply at
//! extraordinary faces. Boundary rules reduce to the 1D masks along the
//! boundary polyline: corner vertex points keep the original position,
//! boundary vertex points average the vertex and the midpoints of its two
//! boundary edges, boundary edge points average the edge endpoints only.

use crate::error::{Error, Result};
use crate::mesh::{DualMesh, Point2};

/// Weighted-sum coefficients for the three point kinds.
///
/// All masks are affine (weights sum to one). The `*_tensor` accessors give
/// the regular-case weights over the local 3x3 control neighborhood; the
/// midpoint forms are the equivalent combinations of the vertex with face
/// and edge midpoints, valid for any face arity.
#[derive(Debug, Clone)]
pub struct RefinementMasks {
    /// Face point = `fp_vertex * v + fp_face_mid * m_F + fp_edge_mid * (m_e1 + m_e2)`.
    pub fp_vertex: f64,
    pub fp_face_mid: f64,
    pub fp_edge_mid: f64,
    /// Edge point = `ep_vertex * v + ep_face_mid * (m_F1 + m_F2) + ep_edge_mid * m_e + ep_wing_mid * (m_g1 + m_g2)`.
    pub ep_vertex: f64,
    pub ep_face_mid: f64,
    pub ep_edge_mid: f64,
    pub ep_wing_mid: f64,
    /// Vertex point = `vp_vertex * v + vp_face_mid * sum m_F + vp_edge_mid * sum m_e`.
    pub vp_vertex: f64,
    pub vp_face_mid: f64,
    pub vp_edge_mid: f64,
    /// Boundary vertex point = `bvp_vertex * v + bvp_edge_mid * (m_b1 + m_b2)`.
    pub bvp_vertex: f64,
    pub bvp_edge_mid: f64,
    /// Boundary edge point = `bep_near * v + bep_far * w`.
    pub bep_near: f64,
    pub bep_far: f64,
}

/// 1D ternary quadratic masks on (previous, self, next).
pub const MASK_TOWARD: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 0.0];
pub const MASK_CENTRAL: [f64; 3] = [1.0 / 9.0, 7.0 / 9.0, 1.0 / 9.0];

/// Interior and boundary refinement masks.
pub fn derive_masks() -> RefinementMasks {
    RefinementMasks {
        fp_vertex: 1.0 / 9.0,
        fp_face_mid: 4.0 / 9.0,
        fp_edge_mid: 2.0 / 9.0,
        ep_vertex: 5.0 / 27.0,
        ep_face_mid: 4.0 / 27.0,
        ep_edge_mid: 10.0 / 27.0,
        ep_wing_mid: 2.0 / 27.0,
        vp_vertex: 25.0 / 81.0,
        vp_face_mid: 4.0 / 81.0,
        vp_edge_mid: 10.0 / 81.0,
        bvp_vertex: MASK_CENTRAL[1] - 2.0 * MASK_CENTRAL[0], // 5/9
        bvp_edge_mid: 2.0 * MASK_CENTRAL[0],                 // 2/9
        bep_near: MASK_TOWARD[1],
        bep_far: MASK_TOWARD[0],
    }
}

impl RefinementMasks {
    /// Regular-case tensor weights of the face point over
    /// `[v, x-neighbor, y-neighbor, diagonal]`.
    pub fn face_tensor(&self) -> [f64; 4] {
        let t = MASK_TOWARD;
        [t[1] * t[1], t[0] * t[1], t[1] * t[0], t[0] * t[0]]
    }

    /// Regular-case tensor weights of the edge point toward the x-neighbor
    /// over `[v, x-neighbor, y+, y-, diag(x,y+), diag(x,y-)]`.
    pub fn edge_tensor(&self) -> [f64; 6] {
        let t = MASK_TOWARD;
        let c = MASK_CENTRAL;
        [
            t[1] * c[1],
            t[0] * c[1],
            t[1] * c[2],
            t[1] * c[0],
            t[0] * c[2],
            t[0] * c[0],
        ]
    }

    /// Regular-case tensor weights of the vertex point over
    /// `[v, edge-neighbor, diagonal]` (the last two apply to each of four).
    pub fn vertex_tensor(&self) -> [f64; 3] {
        let c = MASK_CENTRAL;
        [c[1] * c[1], c[1] * c[0], c[0] * c[0]]
    }
}

/// One ternary refinement step.
pub fn refine(mesh: &DualMesh) -> Result<DualMesh> {
    let report = mesh.validate();
    if !report.is_clean() {
        return Err(Error::InvalidInput(format!(
            "refine requires a valid dual mesh: {}",
            report.violations[0]
        )));
    }
    let masks = derive_masks();

    // Scaffold midpoints.
    let face_mid: Vec<Point2> = (0..mesh.face_count() as u32).map(|f| mesh.centroid(f)).collect();
    let edge_mid: Vec<Point2> = mesh
        .edges()
        .iter()
        .map(|e| {
            let a = mesh.position(e.a);
            let b = mesh.position(e.b);
            Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
        })
        .collect();

    // Index layout for new vertices: face points, then edge points, then
    // vertex points.
    let mut face_offset = Vec::with_capacity(mesh.face_count() + 1);
    let mut acc = 0u32;
    for f in mesh.faces() {
        face_offset.push(acc);
        acc += f.len() as u32;
    }
    face_offset.push(acc);
    let edge_base = acc;
    let vertex_base = edge_base + 2 * mesh.edge_count() as u32;
    let total = vertex_base + mesh.vertex_count() as u32;

    let fp_id = |f: u32, slot: usize| face_offset[f as usize] + slot as u32;
    // Edge point belonging to endpoint a (slot 0) or b (slot 1).
    let ep_id = |e: u32, v: u32| {
        let edge = mesh.edge(e);
        edge_base + 2 * e + u32::from(v != edge.a)
    };
    let vp_id = |v: u32| vertex_base + v;

    let mut pos = vec![Point2::new(0.0, 0.0); total as usize];

    // Face points.
    for f in 0..mesh.face_count() as u32 {
        let cycle = mesh.face(f);
        let k = cycle.len();
        for (i, &v) in cycle.iter().enumerate() {
            let prev = cycle[(i + k - 1) % k];
            let next = cycle[(i + 1) % k];
            let e1 = mesh.edge_between(v, prev).unwrap();
            let e2 = mesh.edge_between(v, next).unwrap();
            let pv = mesh.position(v);
            let mf = face_mid[f as usize];
            let m1 = edge_mid[e1 as usize];
            let m2 = edge_mid[e2 as usize];
            pos[fp_id(f, i) as usize] = Point2::new(
                masks.fp_vertex * pv.x + masks.fp_face_mid * mf.x + masks.fp_edge_mid * (m1.x + m2.x),
                masks.fp_vertex * pv.y + masks.fp_face_mid * mf.y + masks.fp_edge_mid * (m1.y + m2.y),
            );
        }
    }

    // Edge points.
    for (ei, edge) in mesh.edges().iter().enumerate() {
        let e = ei as u32;
        for &v in &[edge.a, edge.b] {
            let w = edge.other(v);
            let idx = ep_id(e, v) as usize;
            if edge.is_boundary() {
                let pv = mesh.position(v);
                let pw = mesh.position(w);
                pos[idx] = Point2::new(
                    masks.bep_near * pv.x + masks.bep_far * pw.x,
                    masks.bep_near * pv.y + masks.bep_far * pw.y,
                );
                continue;
            }
            let pv = mesh.position(v);
            let me = edge_mid[ei];
            let mut x = masks.ep_vertex * pv.x + masks.ep_edge_mid * me.x;
            let mut y = masks.ep_vertex * pv.y + masks.ep_edge_mid * me.y;
            for side in 0..2 {
                let f = edge.faces[side].unwrap();
                let mf = face_mid[f as usize];
                x += masks.ep_face_mid * mf.x;
                y += masks.ep_face_mid * mf.y;
                // The other edge of this face at v.
                let cycle = mesh.face(f);
                let i = cycle.iter().position(|&u| u == v).unwrap();
                let k = cycle.len();
                let prev = cycle[(i + k - 1) % k];
                let next = cycle[(i + 1) % k];
                let other = if prev == w { next } else { prev };
                let g = mesh.edge_between(v, other).unwrap();
                let mg = edge_mid[g as usize];
                x += masks.ep_wing_mid * mg.x;
                y += masks.ep_wing_mid * mg.y;
            }
            pos[idx] = Point2::new(x, y);
        }
    }

    // Vertex points.
    for v in 0..mesh.vertex_count() as u32 {
        let idx = vp_id(v) as usize;
        let pv = mesh.position(v);
        if mesh.is_boundary_vertex(v) {
            let boundary_edges: Vec<u32> = mesh
                .incident_edges(v)
                .iter()
                .copied()
                .filter(|&e| mesh.edge(e).is_boundary())
                .collect();
            if boundary_edges.len() == mesh.valency(v) {
                pos[idx] = pv; // corner
            } else {
                let m1 = edge_mid[boundary_edges[0] as usize];
                let m2 = edge_mid[boundary_edges[1] as usize];
                pos[idx] = Point2::new(
                    masks.bvp_vertex * pv.x + masks.bvp_edge_mid * (m1.x + m2.x),
                    masks.bvp_vertex * pv.y + masks.bvp_edge_mid * (m1.y + m2.y),
                );
            }
            continue;
        }
        let mut x = masks.vp_vertex * pv.x;
        let mut y = masks.vp_vertex * pv.y;
        for &f in &mesh.incident_faces(v) {
            let mf = face_mid[f as usize];
            x += masks.vp_face_mid * mf.x;
            y += masks.vp_face_mid * mf.y;
        }
        for &e in mesh.incident_edges(v) {
            let me = edge_mid[e as usize];
            x += masks.vp_edge_mid * me.x;
            y += masks.vp_edge_mid * me.y;
        }
        pos[idx] = Point2::new(x, y);
    }

    // Connectivity: one face per old face, one quad per (face, edge) pair,
    // one quad per (vertex, incident face) pair.
    let mut faces: Vec<Vec<u32>> = Vec::new();
    for f in 0..mesh.face_count() as u32 {
        let k = mesh.face(f).len();
        faces.push((0..k).map(|i| fp_id(f, i)).collect());
    }
    for f in 0..mesh.face_count() as u32 {
        let cycle = mesh.face(f).to_vec();
        let k = cycle.len();
        for i in 0..k {
            let a = cycle[i];
            let b = cycle[(i + 1) % k];
            let e = mesh.edge_between(a, b).unwrap();
            faces.push(vec![ep_id(e, a), ep_id(e, b), fp_id(f, (i + 1) % k), fp_id(f, i)]);
        }
    }
    for v in 0..mesh.vertex_count() as u32 {
        for f in mesh.incident_faces(v) {
            let cycle = mesh.face(f);
            let k = cycle.len();
            let slot = cycle.iter().position(|&u| u == v).unwrap();
            let prev = cycle[(slot + k - 1) % k];
            let next = cycle[(slot + 1) % k];
            let e_out = mesh.edge_between(v, next).unwrap();
            let e_in = mesh.edge_between(v, prev).unwrap();
            faces.push(vec![vp_id(v), ep_id(e_out, v), fp_id(f, slot), ep_id(e_in, v)]);
        }
    }

    DualMesh::new(pos, faces)
}

/// Applies `refine` n times.
pub fn refine_times(mesh: &DualMesh, n: usize) -> Result<DualMesh> {
    let mut m = mesh.clone();
    for _ in 0..n {
        m = refine(&m)?;
    }
    Ok(m)
}
