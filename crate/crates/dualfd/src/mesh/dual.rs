//! Primal/dual conversion.
//!
//! A primal quad mesh carries its defects as extraordinary vertices; the
//! dual form carries them as extraordinary faces. Dual vertices are primal
//! face centroids and every interior primal vertex of valency v becomes a
//! v-sided dual face.

use super::DualMesh;
use crate::error::{Error, Result};

/// Converts a primal quad mesh into its dual. Every interior vertex of
/// valency v becomes a v-gon; all interior vertices of the output have
/// valency four.
pub fn primal_to_dual(primal: &DualMesh) -> Result<DualMesh> {
    if let Some(f) = (0..primal.face_count() as u32).find(|&f| primal.face(f).len() != 4) {
        return Err(Error::InvalidInput(format!(
            "primal input must be all-quad; face {f} has {} sides",
            primal.face(f).len()
        )));
    }
    convert(primal)
}

/// Topology-level inverse of [`primal_to_dual`]; vertex positions are face
/// centroids. A valency-v interior vertex appears per v-gon face of the
/// input, so the defect multiset is preserved.
pub fn dual_to_primal(dual: &DualMesh) -> Result<DualMesh> {
    convert(dual)
}

fn convert(mesh: &DualMesh) -> Result<DualMesh> {
    let vertices = (0..mesh.face_count() as u32).map(|f| mesh.centroid(f)).collect();
    let mut faces = Vec::new();
    for v in mesh.interior_vertices() {
        let ring = mesh.incident_faces_ccw(v);
        let cycle: Vec<u32> = ring.into_iter().flatten().collect();
        if cycle.len() != mesh.valency(v) {
            return Err(Error::InvalidInput(format!(
                "interior vertex {v} has an open face fan"
            )));
        }
        faces.push(cycle);
    }
    DualMesh::new(vertices, faces)
}
