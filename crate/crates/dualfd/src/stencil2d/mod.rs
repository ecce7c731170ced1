//! Per-vertex 2D derivative stencils on dual quadrilateral meshes.
//!
//! Every vertex receives a window of neighboring vertices laid out on a
//! local integer grid (a tensor window in the regular case, shifted inward
//! at boundaries, with one quadrant omitted next to an extraordinary face).
//! Unit-step stencil rows on that grid and the Vandermonde matrix of the
//! actual positions yield one small linear system per vertex whose solution
//! expresses all derivatives up to total order p as weight rows over the
//! window samples.

mod assemble;
mod tables;
mod window;

pub use assemble::{
    assemble_local_stencil, assemble_local_stencil_at, differentiate_field, FieldDerivatives,
    LocalStencil,
};
pub use tables::{precompute_tables, unit_step_tables, TableCache};
pub use window::{check_separation, identify_curves, select_stencil_points, Quadrant, SeparationReport};

/// Named stencil neighborhoods.
///
/// `Compact` uses a 3x3 window (9 points, 8 at an extraordinary face) and
/// supports derivatives up to total order 2; `Extended` uses 5x5 (25/21
/// points) up to total order 4. The required defect separation is one ring
/// of ordinary faces for `Compact` and two for `Extended`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StencilFamily {
    Compact,
    Extended,
}

impl StencilFamily {
    /// Highest total derivative order the family resolves.
    pub fn p(self) -> usize {
        match self {
            StencilFamily::Compact => 2,
            StencilFamily::Extended => 4,
        }
    }

    /// Window half-width.
    pub fn radius(self) -> usize {
        match self {
            StencilFamily::Compact => 1,
            StencilFamily::Extended => 2,
        }
    }

    /// Rings of ordinary faces required between extraordinary faces.
    pub fn rings_required(self) -> usize {
        match self {
            StencilFamily::Compact => 1,
            StencilFamily::Extended => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StencilFamily::Compact => "compact",
            StencilFamily::Extended => "extended",
        }
    }

    /// The compact tables keep the historical convention of integer-scaled
    /// unit-step rows; scaling a row of `[Cbar | C]` jointly cancels in the
    /// solve, so only the printed form changes.
    pub(crate) fn integerized(self) -> bool {
        matches!(self, StencilFamily::Compact)
    }
}

/// 2D derivative multi-index (jx, jy).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    pub jx: u8,
    pub jy: u8,
}

impl MultiIndex {
    pub fn new(jx: usize, jy: usize) -> Self {
        Self { jx: jx as u8, jy: jy as u8 }
    }

    pub fn total(self) -> usize {
        (self.jx + self.jy) as usize
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name: String = "x".repeat(self.jx as usize) + &"y".repeat(self.jy as usize);
        write!(f, "d{name}")
    }
}

/// Derivative multi-indices with `1 <= jx + jy <= p`, grouped by total
/// order, jx descending within a group: `dx, dy, dxx, dxy, dyy, ...`.
pub fn multi_indices(p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for total in 1..=p {
        for jx in (0..=total).rev() {
            out.push(MultiIndex::new(jx, total - jx));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_order_matches_convention() {
        let m = multi_indices(2);
        let expect = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        assert_eq!(m.len(), 5);
        for (mi, (jx, jy)) in m.iter().zip(expect) {
            assert_eq!((mi.jx as usize, mi.jy as usize), (jx, jy));
        }
        assert_eq!(multi_indices(4).len(), 14);
    }
}
