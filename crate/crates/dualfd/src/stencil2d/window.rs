//! Local window construction: curve identification, structured walks and
//! stencil point selection.

use std::collections::BTreeMap;

use super::StencilFamily;
use crate::error::{Error, Result};
use crate::mesh::{DualMesh, MeshClass};

/// Quadrant of the local parametric plane, named by offset signs; the
/// quadrant containing an extraordinary face is omitted from the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quadrant {
    NorthEast,
    NorthWest,
    SouthWest,
    SouthEast,
}

impl Quadrant {
    pub(crate) fn of_slot(i: i32, j: i32) -> Quadrant {
        match (i >= 0, j >= 0) {
            (true, true) => Quadrant::NorthEast,
            (false, true) => Quadrant::NorthWest,
            (false, false) => Quadrant::SouthWest,
            (true, false) => Quadrant::SouthEast,
        }
    }

    /// Whether the point offset lies strictly inside this quadrant.
    pub(crate) fn contains_point(self, x: i32, y: i32) -> bool {
        match self {
            Quadrant::NorthEast => x >= 1 && y >= 1,
            Quadrant::NorthWest => x <= -1 && y >= 1,
            Quadrant::SouthWest => x <= -1 && y <= -1,
            Quadrant::SouthEast => x >= 1 && y <= -1,
        }
    }
}

/// A vertex window laid out on a local integer grid around `center`.
#[derive(Debug, Clone)]
pub(crate) struct Window {
    /// Offset of the point where derivatives are evaluated ((0, 0) unless
    /// the window is recentred for upwinding).
    pub eval: (i32, i32),
    pub x_offsets: Vec<i32>,
    pub y_offsets: Vec<i32>,
    pub omit: Option<Quadrant>,
    /// Kept points in lexicographic (y, x) offset order.
    pub points: Vec<((i32, i32), u32)>,
}

impl Window {
    pub fn eval_index(&self) -> usize {
        self.points
            .iter()
            .position(|(o, _)| *o == self.eval)
            .expect("eval point present")
    }
}

/// Frame of axis directions at a vertex: the first edge of each of the two
/// local curves, oriented right-handed.
struct Frame {
    /// Neighbor in +x, or None on a one-sided axis.
    east: Option<u32>,
    west: Option<u32>,
    north: Option<u32>,
    south: Option<u32>,
}

fn frame_at(mesh: &DualMesh, v: u32) -> Result<Frame> {
    let pos = mesh.position(v);
    let nbr = |e: u32| mesh.edge(e).other(v);
    let dir = |w: u32| {
        let q = mesh.position(w);
        let (dx, dy) = (q.x - pos.x, q.y - pos.y);
        let n = (dx * dx + dy * dy).sqrt();
        (dx / n, dy / n)
    };
    match mesh.classify(v) {
        MeshClass::InteriorRegular | MeshClass::DefectAdjacent => {
            let edges = mesh.incident_edges(v);
            if edges.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "interior vertex {v} has valency {}",
                    edges.len()
                )));
            }
            // Edges are CCW-sorted; the opposite-pairing matches i with i+2.
            let pair_a = (nbr(edges[0]), nbr(edges[2]));
            let pair_b = (nbr(edges[1]), nbr(edges[3]));
            let align_x = |p: (u32, u32)| {
                let d = dir(p.0);
                d.0.abs()
            };
            let (x_pair, y_pair) = if align_x(pair_a) >= align_x(pair_b) {
                (pair_a, pair_b)
            } else {
                (pair_b, pair_a)
            };
            let (east, west) = {
                let d = dir(x_pair.0);
                if d.0 > 0.0 || (d.0 == 0.0 && d.1 > 0.0) {
                    (x_pair.0, x_pair.1)
                } else {
                    (x_pair.1, x_pair.0)
                }
            };
            let de = dir(east);
            let (north, south) = {
                let d = dir(y_pair.0);
                if de.0 * d.1 - de.1 * d.0 > 0.0 {
                    (y_pair.0, y_pair.1)
                } else {
                    (y_pair.1, y_pair.0)
                }
            };
            Ok(Frame {
                east: Some(east),
                west: Some(west),
                north: Some(north),
                south: Some(south),
            })
        }
        MeshClass::Boundary => {
            let edges = mesh.incident_edges(v);
            let boundary: Vec<u32> = edges
                .iter()
                .copied()
                .filter(|&e| mesh.edge(e).is_boundary())
                .collect();
            let interior: Vec<u32> = edges
                .iter()
                .copied()
                .filter(|&e| !mesh.edge(e).is_boundary())
                .collect();
            if boundary.len() == 2 && interior.len() == 2 {
                // Reentrant boundary vertex (e.g. a hole corner): four
                // edges pair off diagonally like an interior vertex.
                let pair_a = (nbr(edges[0]), nbr(edges[2]));
                let pair_b = (nbr(edges[1]), nbr(edges[3]));
                let align_x = |p: (u32, u32)| dir(p.0).0.abs();
                let (x_pair, y_pair) = if align_x(pair_a) >= align_x(pair_b) {
                    (pair_a, pair_b)
                } else {
                    (pair_b, pair_a)
                };
                let (east, west) = {
                    let d = dir(x_pair.0);
                    if d.0 > 0.0 || (d.0 == 0.0 && d.1 > 0.0) {
                        (x_pair.0, x_pair.1)
                    } else {
                        (x_pair.1, x_pair.0)
                    }
                };
                let de = dir(east);
                let (north, south) = {
                    let d = dir(y_pair.0);
                    if de.0 * d.1 - de.1 * d.0 > 0.0 {
                        (y_pair.0, y_pair.1)
                    } else {
                        (y_pair.1, y_pair.0)
                    }
                };
                return Ok(Frame {
                    east: Some(east),
                    west: Some(west),
                    north: Some(north),
                    south: Some(south),
                });
            }
            if boundary.len() != 2 || interior.len() != 1 {
                return Err(Error::InvalidInput(format!(
                    "boundary vertex {v} has {} boundary and {} interior edges",
                    boundary.len(),
                    interior.len()
                )));
            }
            let inward = nbr(interior[0]);
            let di = dir(inward);
            let (b0, b1) = (nbr(boundary[0]), nbr(boundary[1]));
            let d0 = dir(b0);
            // Right-handed: east x north > 0 with north pointing inward.
            let (east, west) = if d0.0 * di.1 - d0.1 * di.0 > 0.0 {
                (b0, b1)
            } else {
                (b1, b0)
            };
            Ok(Frame {
                east: Some(east),
                west: Some(west),
                north: Some(inward),
                south: None,
            })
        }
        MeshClass::Corner => {
            let edges = mesh.incident_edges(v);
            if edges.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "corner vertex {v} has valency {}",
                    edges.len()
                )));
            }
            let (a, b) = (nbr(edges[0]), nbr(edges[1]));
            let da = dir(a);
            let db = dir(b);
            let (east, north) = if da.0 * db.1 - da.1 * db.0 > 0.0 { (a, b) } else { (b, a) };
            Ok(Frame {
                east: Some(east),
                west: None,
                north: Some(north),
                south: None,
            })
        }
    }
}

/// Continues a walk arriving at `v` from `prev` one step straight ahead.
/// Returns None when the walk must stop at `v`.
fn straight(mesh: &DualMesh, prev: u32, v: u32) -> Option<u32> {
    let arrival = mesh.edge_between(prev, v).expect("walk along edges");
    if mesh.is_boundary_vertex(v) {
        if !mesh.edge(arrival).is_boundary() {
            return None; // walked into the boundary head-on
        }
        if mesh.classify(v) == MeshClass::Corner {
            return None;
        }
        let next = mesh
            .incident_edges(v)
            .iter()
            .copied()
            .find(|&e| e != arrival && mesh.edge(e).is_boundary())?;
        return Some(mesh.edge(next).other(v));
    }
    let partner = mesh.opposite_edge(v, arrival)?;
    Some(mesh.edge(partner).other(v))
}

/// Walks up to `max_steps` along one curve direction; returns the vertices
/// reached (one per step, possibly fewer when the walk stops early).
fn walk(mesh: &DualMesh, center: u32, first: Option<u32>, max_steps: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let Some(first) = first else { return out };
    if max_steps == 0 {
        return out;
    }
    out.push(first);
    let mut prev = center;
    let mut cur = first;
    while out.len() < max_steps {
        match straight(mesh, prev, cur) {
            Some(next) => {
                out.push(next);
                prev = cur;
                cur = next;
            }
            None => break,
        }
    }
    out
}

/// The two discrete curves through an interior valency-4 vertex, extended
/// outward until `radius`, a boundary, or a vertex next to an extraordinary
/// face is reached. Each curve is an ordered point sequence containing the
/// vertex itself.
pub fn identify_curves(mesh: &DualMesh, v: u32, radius: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    let frame = frame_at(mesh, v)?;
    let stop_at_defect = |walked: Vec<u32>| {
        let mut out = Vec::new();
        for w in walked {
            out.push(w);
            if mesh.classify(w) == MeshClass::DefectAdjacent || mesh.is_boundary_vertex(w) {
                break;
            }
        }
        out
    };
    let east = stop_at_defect(walk(mesh, v, frame.east, radius));
    let west = stop_at_defect(walk(mesh, v, frame.west, radius));
    let north = stop_at_defect(walk(mesh, v, frame.north, radius));
    let south = stop_at_defect(walk(mesh, v, frame.south, radius));
    let mut curve1: Vec<u32> = west.iter().rev().copied().collect();
    curve1.push(v);
    curve1.extend(&east);
    let mut curve2: Vec<u32> = south.iter().rev().copied().collect();
    curve2.push(v);
    curve2.extend(&north);
    Ok((curve1, curve2))
}

/// Candidate per-axis offset ranges in preference order: symmetric first,
/// then shifted inward by growing amounts, keeping `2r + 1` points within
/// the walkable span.
fn offset_candidates(avail_minus: usize, avail_plus: usize, r: usize) -> Vec<Vec<i32>> {
    let r = r as i32;
    let (am, ap) = (avail_minus as i32, avail_plus as i32);
    let mut out = Vec::new();
    let mut shifts: Vec<i32> = (-r..=r).collect();
    shifts.sort_by_key(|s| (s.abs(), *s));
    for s in shifts {
        let lo = -r + s;
        let hi = r + s;
        if -lo <= am && hi <= ap {
            out.push((lo..=hi).collect());
        }
    }
    out
}

pub(crate) fn build_window(mesh: &DualMesh, center: u32, family: StencilFamily) -> Result<Window> {
    build_window_at(mesh, center, family, (0, 0))
}

/// Builds the window around `center` with the derivative evaluation point
/// at local offset `eval` (used by upwind stencils, where the window is
/// centred on a neighbor of the vertex being differentiated).
pub(crate) fn build_window_at(
    mesh: &DualMesh,
    center: u32,
    family: StencilFamily,
    eval: (i32, i32),
) -> Result<Window> {
    let r = family.radius();
    let frame = frame_at(mesh, center)?;

    let east = walk(mesh, center, frame.east, 2 * r);
    let west = walk(mesh, center, frame.west, 2 * r);
    let north = walk(mesh, center, frame.north, 2 * r);
    let south = walk(mesh, center, frame.south, 2 * r);

    let x_candidates = offset_candidates(west.len(), east.len(), r);
    let y_candidates = offset_candidates(south.len(), north.len(), r);
    if x_candidates.is_empty() || y_candidates.is_empty() {
        return Err(Error::InvalidConfiguration(format!(
            "vertex {center}: window of half-width {r} does not fit in the mesh"
        )));
    }

    // Preferred (least shifted) candidates first; a later candidate is only
    // used when an earlier one cannot be filled (pinched boundary).
    let mut combos: Vec<(usize, usize)> = Vec::new();
    for xi in 0..x_candidates.len() {
        for yi in 0..y_candidates.len() {
            combos.push((xi, yi));
        }
    }
    combos.sort_by_key(|&(xi, yi)| (xi + yi, xi, yi));
    let mut first_err = None;
    for (xi, yi) in combos {
        match try_window(
            mesh,
            center,
            eval,
            r,
            &east,
            &west,
            &x_candidates[xi],
            &y_candidates[yi],
        ) {
            Ok(w) => return Ok(w),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    Err(first_err.unwrap())
}

#[allow(clippy::too_many_arguments)]
fn try_window(
    mesh: &DualMesh,
    center: u32,
    eval: (i32, i32),
    r: usize,
    east: &[u32],
    west: &[u32],
    x_offsets: &[i32],
    y_offsets: &[i32],
) -> Result<Window> {
    let x_offsets = x_offsets.to_vec();
    let y_offsets = y_offsets.to_vec();
    // Row 0 from the axis walks, restricted to the selected offsets; the
    // walks may have probed further than the window needs.
    let mut grid: BTreeMap<(i32, i32), u32> = BTreeMap::new();
    grid.insert((0, 0), center);
    for (i, &w) in east.iter().enumerate() {
        if x_offsets.contains(&(i as i32 + 1)) {
            grid.insert((i as i32 + 1, 0), w);
        }
    }
    for (i, &w) in west.iter().enumerate() {
        if x_offsets.contains(&(-(i as i32) - 1)) {
            grid.insert((-(i as i32) - 1, 0), w);
        }
    }

    let mut ef: Vec<(u32, (i32, i32))> = Vec::new();

    // Fills the row at `j + dir` from the known row `j` using face cycles.
    // dir = +1 walks north faces of eastward edges, dir = -1 south faces.
    let fill = |grid: &mut BTreeMap<(i32, i32), u32>,
                    ef: &mut Vec<(u32, (i32, i32))>,
                    j: i32,
                    dir: i32|
     -> Result<()> {
        let xs: Vec<i32> = grid
            .keys()
            .filter(|&&(_, y)| y == j)
            .map(|&(x, _)| x)
            .collect();
        for &i in &xs {
            if !xs.contains(&(i + 1)) {
                continue;
            }
            let a = grid[&(i, j)];
            let b = grid[&(i + 1, j)];
            // For dir = +1 use the face left of a->b (north side); for
            // dir = -1 the face left of b->a (south side).
            let (u1, u2) = if dir > 0 { (a, b) } else { (b, a) };
            let Some((f, w)) = mesh.left_face(u1, u2) else {
                continue; // boundary on that side
            };
            let slot = (i, if dir > 0 { j } else { j - 1 });
            if mesh.is_extraordinary(f) {
                if !ef.iter().any(|&(g, _)| g == f) {
                    ef.push((f, slot));
                }
                continue;
            }
            // Quad cycle u1 -> u2 -> w -> t.
            let (_, t) = mesh.left_face(u2, w).expect("quad cycle");
            let (far, near) = if dir > 0 {
                (((i + 1), j + 1), (i, j + 1))
            } else {
                ((i, j - 1), ((i + 1), j - 1))
            };
            for (key, vert) in [(far, w), (near, t)] {
                if let Some(&existing) = grid.get(&key) {
                    if existing != vert {
                        return Err(Error::InvalidConfiguration(format!(
                            "window around vertex {center} is not grid-consistent at {key:?}"
                        )));
                    }
                } else {
                    grid.insert(key, vert);
                }
            }
        }
        Ok(())
    };

    let max_y = *y_offsets.last().unwrap();
    let min_y = y_offsets[0];
    for j in 0..max_y {
        fill(&mut grid, &mut ef, j, 1)?;
    }
    for j in (min_y + 1..=0).rev() {
        fill(&mut grid, &mut ef, j, -1)?;
    }

    // Decide quadrant omission from the extraordinary faces encountered.
    let omit = if ef.is_empty() {
        None
    } else {
        let symmetric = x_offsets[0] == -(r as i32)
            && *x_offsets.last().unwrap() == r as i32
            && y_offsets[0] == -(r as i32)
            && *y_offsets.last().unwrap() == r as i32;
        if !symmetric {
            return Err(Error::InvalidConfiguration(format!(
                "vertex {center}: extraordinary face {} interferes with a one-sided window",
                ef[0].0
            )));
        }
        let quadrants: Vec<Quadrant> = ef.iter().map(|&(_, (i, j))| Quadrant::of_slot(i, j)).collect();
        if quadrants.windows(2).any(|w| w[0] != w[1]) {
            let ids: Vec<u32> = ef.iter().map(|&(f, _)| f).collect();
            return Err(Error::InvalidConfiguration(format!(
                "vertex {center}: extraordinary faces {ids:?} occupy different quadrants \
                 (separation requirement violated)"
            )));
        }
        Some(quadrants[0])
    };

    // Collect required points.
    let mut points = Vec::new();
    for &j in &y_offsets {
        for &i in &x_offsets {
            if let Some(q) = omit {
                if q.contains_point(i, j) {
                    continue;
                }
            }
            match grid.get(&(i, j)) {
                Some(&v) => points.push(((i, j), v)),
                None => {
                    let ids: Vec<u32> = ef.iter().map(|&(f, _)| f).collect();
                    return Err(Error::InvalidConfiguration(format!(
                        "vertex {center}: window point ({i},{j}) unreachable \
                         (extraordinary faces {ids:?} or boundary in the way)"
                    )));
                }
            }
        }
    }
    // Duplicate vertices (a walk wrapping around a defect) are invalid.
    let mut ids: Vec<u32> = points.iter().map(|&(_, v)| v).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != points.len() {
        return Err(Error::InvalidConfiguration(format!(
            "vertex {center}: window points collide around a defect"
        )));
    }
    if !points.iter().any(|&(o, _)| o == eval) {
        return Err(Error::InvalidConfiguration(format!(
            "vertex {center}: evaluation offset {eval:?} not in window"
        )));
    }

    Ok(Window {
        eval,
        x_offsets,
        y_offsets,
        omit,
        points,
    })
}

/// Stencil point selection: the window vertices except the vertex itself,
/// in deterministic (y, x) offset order, plus the vertex classification.
pub fn select_stencil_points(
    mesh: &DualMesh,
    v: u32,
    family: StencilFamily,
) -> Result<(Vec<u32>, MeshClass)> {
    let w = build_window(mesh, v, family)?;
    let neighbors = w
        .points
        .iter()
        .filter(|&&(o, _)| o != (0, 0))
        .map(|&(_, u)| u)
        .collect();
    Ok((neighbors, mesh.classify(v)))
}

/// Separation report: window construction failures per vertex plus ring
/// distances between extraordinary face pairs.
#[derive(Debug, Default)]
pub struct SeparationReport {
    pub failures: Vec<(u32, String)>,
    /// (face, face, rings of ordinary faces strictly between them).
    pub pair_rings: Vec<(u32, u32, usize)>,
}

impl SeparationReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Attempts stencil construction at every vertex and measures defect pair
/// separations. A non-empty failure list means the family cannot be used on
/// this mesh without further refinement.
pub fn check_separation(mesh: &DualMesh, family: StencilFamily) -> SeparationReport {
    let mut report = SeparationReport::default();
    for v in 0..mesh.vertex_count() as u32 {
        if let Err(e) = build_window(mesh, v, family) {
            report.failures.push((v, e.to_string()));
        }
    }
    let defects = mesh.extraordinary_faces();
    for (i, &f) in defects.iter().enumerate() {
        for &g in defects.iter().skip(i + 1) {
            if let Some(d) = face_distance(mesh, f, g) {
                report.pair_rings.push((f, g, d.saturating_sub(1)));
            }
        }
    }
    report
}

/// BFS distance in the face graph with vertex-sharing adjacency.
fn face_distance(mesh: &DualMesh, from: u32, to: u32) -> Option<usize> {
    let mut vertex_faces: Vec<Vec<u32>> = vec![Vec::new(); mesh.vertex_count()];
    for (fi, face) in mesh.faces().iter().enumerate() {
        for &v in face {
            vertex_faces[v as usize].push(fi as u32);
        }
    }
    let mut dist = vec![usize::MAX; mesh.face_count()];
    dist[from as usize] = 0;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(from);
    while let Some(f) = queue.pop_front() {
        if f == to {
            return Some(dist[f as usize]);
        }
        for &v in mesh.face(f) {
            for &g in &vertex_faces[v as usize] {
                if dist[g as usize] == usize::MAX {
                    dist[g as usize] = dist[f as usize] + 1;
                    queue.push_back(g);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_mesh, MeshKind};

    #[test]
    fn regular_interior_window_is_tensor_grid() {
        let mesh = generate_test_mesh(MeshKind::RegularPlane { n: 7 });
        let v = 3 * 7 + 3;
        let w = build_window(&mesh, v, StencilFamily::Compact).unwrap();
        assert_eq!(w.points.len(), 9);
        assert!(w.omit.is_none());
        // Positions match the offsets on the uniform grid.
        let h = 2.0 / 6.0;
        let c = mesh.position(v);
        for &((i, j), u) in &w.points {
            let p = mesh.position(u);
            assert!((p.x - (c.x + h * i as f64)).abs() < 1e-12);
            assert!((p.y - (c.y + h * j as f64)).abs() < 1e-12);
        }
        let we = build_window(&mesh, v, StencilFamily::Extended).unwrap();
        assert_eq!(we.points.len(), 25);
    }

    #[test]
    fn boundary_and_corner_windows_shift_inward() {
        let mesh = generate_test_mesh(MeshKind::RegularPlane { n: 7 });
        // South boundary, non-corner.
        let w = build_window(&mesh, 3, StencilFamily::Compact).unwrap();
        assert_eq!(w.y_offsets, vec![0, 1, 2]);
        assert_eq!(w.x_offsets, vec![-1, 0, 1]);
        // Corner.
        let w = build_window(&mesh, 0, StencilFamily::Compact).unwrap();
        assert_eq!(w.x_offsets, vec![0, 1, 2]);
        assert_eq!(w.y_offsets, vec![0, 1, 2]);
        // One ring in from the west boundary, extended family.
        let v = 3 * 7 + 1;
        let w = build_window(&mesh, v, StencilFamily::Extended).unwrap();
        assert_eq!(w.x_offsets, vec![-1, 0, 1, 2, 3]);
        assert_eq!(w.y_offsets, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn curves_on_regular_grid_are_grid_lines() {
        let mesh = generate_test_mesh(MeshKind::RegularPlane { n: 7 });
        let v = 3 * 7 + 3;
        let (c1, c2) = identify_curves(&mesh, v, 2).unwrap();
        assert_eq!(c1.len(), 5);
        assert_eq!(c2.len(), 5);
        let y = mesh.position(v).y;
        for &u in &c1 {
            assert!((mesh.position(u).y - y).abs() < 1e-12);
        }
        let x = mesh.position(v).x;
        for &u in &c2 {
            assert!((mesh.position(u).x - x).abs() < 1e-12);
        }
    }

    #[test]
    fn curve_turning_angle_bounded_on_smoothed_mesh() {
        let mesh = generate_test_mesh(MeshKind::UnstructuredPlane);
        for v in mesh.interior_vertices() {
            if mesh.classify(v) != MeshClass::InteriorRegular {
                continue;
            }
            let (c1, c2) = identify_curves(&mesh, v, 2).unwrap();
            for curve in [&c1, &c2] {
                for w in curve.windows(3) {
                    let a = mesh.position(w[0]);
                    let b = mesh.position(w[1]);
                    let c = mesh.position(w[2]);
                    let (ux, uy) = (b.x - a.x, b.y - a.y);
                    let (vx, vy) = (c.x - b.x, c.y - b.y);
                    let dot = ux * vx + uy * vy;
                    assert!(dot > 0.0, "turning angle >= 90 degrees at vertex {v}");
                }
            }
        }
    }

    #[test]
    fn defect_adjacent_vertex_gets_quadrant_omitted_window() {
        let mesh = generate_test_mesh(MeshKind::Triangle);
        let ef = mesh.extraordinary_faces()[0];
        let v = mesh.face(ef)[0];
        let w = build_window(&mesh, v, StencilFamily::Compact).unwrap();
        assert_eq!(w.points.len(), 8);
        assert!(w.omit.is_some());
        let (nbrs, class) = select_stencil_points(&mesh, v, StencilFamily::Compact).unwrap();
        assert_eq!(nbrs.len(), 7);
        assert_eq!(class, MeshClass::DefectAdjacent);
    }

    #[test]
    fn separation_violated_on_two_hole_extended_at_zero_refinements() {
        let mesh = generate_test_mesh(MeshKind::TwoHole);
        let report = check_separation(&mesh, StencilFamily::Extended);
        assert!(!report.is_clean());
        assert!(report.pair_rings.iter().any(|&(_, _, r)| r < 2));
    }

    #[test]
    fn separation_grows_under_refinement() {
        // Defect pairs at least one ring apart gain at least another ring
        // per ternary refinement step.
        let mesh = generate_test_mesh(MeshKind::TwoHole);
        let before = check_separation(&mesh, StencilFamily::Compact);
        let refined = crate::subdivision::refine(&mesh).unwrap();
        let after = check_separation(&refined, StencilFamily::Compact);
        for &(_, _, rings) in &before.pair_rings {
            assert!(rings >= 1);
        }
        for &(_, _, rings) in &after.pair_rings {
            assert!(rings >= 2, "refined separation only {rings} rings");
        }
    }

    #[test]
    fn separation_clean_on_regular_grid() {
        let mesh = generate_test_mesh(MeshKind::RegularPlane { n: 7 });
        assert!(check_separation(&mesh, StencilFamily::Compact).is_clean());
        assert!(check_separation(&mesh, StencilFamily::Extended).is_clean());
    }
}
