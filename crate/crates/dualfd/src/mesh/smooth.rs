//! Laplacian smoothing with fixed boundary.

use super::{DualMesh, Point2};
use crate::error::{Error, Result};

/// Iteratively replaces every interior vertex by the average of its edge
/// neighbors until the maximum displacement in one sweep drops below
/// `h * tol_factor`, with `h` the average initial edge length. Boundary and
/// corner vertices never move; topology is unchanged.
pub fn laplacian_smooth(mesh: &DualMesh, tol_factor: f64) -> Result<DualMesh> {
    laplacian_smooth_capped(mesh, tol_factor, 10_000)
}

pub fn laplacian_smooth_capped(mesh: &DualMesh, tol_factor: f64, max_sweeps: usize) -> Result<DualMesh> {
    let h = mesh.average_edge_length();
    let threshold = h * tol_factor;
    let mut pos: Vec<Point2> = mesh.vertices().to_vec();
    let interior: Vec<u32> = mesh.interior_vertices().collect();
    for _ in 0..max_sweeps {
        let mut max_move: f64 = 0.0;
        for &v in &interior {
            let mut x = 0.0;
            let mut y = 0.0;
            let edges = mesh.incident_edges(v);
            for &e in edges {
                let w = mesh.edge(e).other(v);
                x += pos[w as usize].x;
                y += pos[w as usize].y;
            }
            let n = edges.len() as f64;
            let next = Point2::new(x / n, y / n);
            max_move = max_move.max(next.dist(pos[v as usize]));
            pos[v as usize] = next;
        }
        if max_move < threshold {
            return DualMesh::new(pos, mesh.faces().to_vec());
        }
    }
    Err(Error::NumericalFailure(format!(
        "smoothing did not converge below {threshold:.3e} in {max_sweeps} sweeps"
    )))
}

/// Per-sweep maximum displacements, for convergence diagnostics.
pub fn smoothing_displacements(mesh: &DualMesh, sweeps: usize) -> Vec<f64> {
    let mut pos: Vec<Point2> = mesh.vertices().to_vec();
    let interior: Vec<u32> = mesh.interior_vertices().collect();
    let mut out = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        let mut max_move: f64 = 0.0;
        for &v in &interior {
            let mut x = 0.0;
            let mut y = 0.0;
            let edges = mesh.incident_edges(v);
            for &e in edges {
                let w = mesh.edge(e).other(v);
                x += pos[w as usize].x;
                y += pos[w as usize].y;
            }
            let n = edges.len() as f64;
            let next = Point2::new(x / n, y / n);
            max_move = max_move.max(next.dist(pos[v as usize]));
            pos[v as usize] = next;
        }
        out.push(max_move);
    }
    out
}
