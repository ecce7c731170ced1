//! Procedural test meshes.
//!
//! The unstructured meshes are built as block-structured primal quad meshes
//! with prescribed singular block corners, converted to dual form, smoothed
//! and rescaled. Defect placement is chosen so that
//!
//! - `Triangle`/`Pentagon` carry a single extraordinary face at the domain
//!   center,
//! - `UnstructuredPlane` carries exactly one triangular and one pentagonal
//!   face, at least two quad rings apart and away from the boundary,
//! - `TwoHole` carries a cluster of four extraordinary faces close enough
//!   together that the extended stencil family requires one refinement.

use std::collections::HashMap;

use super::{dual::primal_to_dual, smooth::laplacian_smooth, DualMesh, Point2};

/// Named generator presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// n x n regular dual grid on [-1,1]^2.
    RegularPlane { n: usize },
    /// Triangle-shaped plane mesh with one triangular extraordinary face.
    Triangle,
    /// Pentagon-shaped plane mesh with one pentagonal extraordinary face.
    Pentagon,
    /// Plane mesh on [-1,1]^2 with one triangle and one pentagon defect.
    UnstructuredPlane,
    /// Coarser variant used where a dense eigensolve bounds the size.
    UnstructuredPlaneSmall,
    /// Polygonal domain with two holes and four extraordinary faces.
    TwoHole,
}

pub fn generate_test_mesh(kind: MeshKind) -> DualMesh {
    match kind {
        MeshKind::RegularPlane { n } => regular_plane(n),
        MeshKind::Triangle => fan_plane(3, 3),
        MeshKind::Pentagon => fan_plane(5, 3),
        MeshKind::UnstructuredPlane => unstructured_plane([3, 3, 3, 3, 3]),
        MeshKind::UnstructuredPlaneSmall => unstructured_plane([2, 2, 2, 2, 2]),
        MeshKind::TwoHole => two_hole(),
    }
}

/// Regular n x n dual grid on [-1,1]^2.
pub fn regular_plane(n: usize) -> DualMesh {
    assert!(n >= 2);
    let mut vertices = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            vertices.push(Point2::new(x, y));
        }
    }
    let mut faces = Vec::with_capacity((n - 1) * (n - 1));
    let id = |i: usize, j: usize| (j * n + i) as u32;
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    DualMesh::new(vertices, faces).expect("grid is well-formed")
}

/// Block-structured primal mesh builder with node deduplication along
/// shared block sides.
struct BlockMesh {
    nodes: Vec<Point2>,
    faces: Vec<Vec<u32>>,
    side_nodes: HashMap<(u32, u32, usize), u32>,
}

impl BlockMesh {
    fn new() -> Self {
        Self {
            nodes: Vec::new(),
            faces: Vec::new(),
            side_nodes: HashMap::new(),
        }
    }

    fn corner(&mut self, p: Point2) -> u32 {
        self.nodes.push(p);
        (self.nodes.len() - 1) as u32
    }

    /// Node at parameter i/k along the straight side a->b, shared between
    /// the blocks on either side.
    fn side_node(&mut self, a: u32, b: u32, i: usize, k: usize) -> u32 {
        if i == 0 {
            return a;
        }
        if i == k {
            return b;
        }
        let key = if a < b { (a, b, i) } else { (b, a, k - i) };
        if let Some(&n) = self.side_nodes.get(&key) {
            return n;
        }
        let lo = self.nodes[key.0 as usize];
        let hi = self.nodes[key.1 as usize];
        let t = key.2 as f64 / k as f64;
        let p = Point2::new(lo.x + t * (hi.x - lo.x), lo.y + t * (hi.y - lo.y));
        self.nodes.push(p);
        let n = (self.nodes.len() - 1) as u32;
        self.side_nodes.insert(key, n);
        n
    }

    /// Meshes the CCW block (c0, c1, c2, c3) with nx cells along c0->c1 and
    /// ny cells along c0->c3, by bilinear interpolation of the corners.
    fn add_block(&mut self, c: [u32; 4], nx: usize, ny: usize) {
        let p: Vec<Point2> = c.iter().map(|&i| self.nodes[i as usize]).collect();
        let mut grid = vec![vec![0u32; ny + 1]; nx + 1];
        for i in 0..=nx {
            for j in 0..=ny {
                let node = if j == 0 {
                    self.side_node(c[0], c[1], i, nx)
                } else if j == ny {
                    self.side_node(c[3], c[2], i, nx)
                } else if i == 0 {
                    self.side_node(c[0], c[3], j, ny)
                } else if i == nx {
                    self.side_node(c[1], c[2], j, ny)
                } else {
                    let u = i as f64 / nx as f64;
                    let v = j as f64 / ny as f64;
                    let x = (1.0 - u) * (1.0 - v) * p[0].x
                        + u * (1.0 - v) * p[1].x
                        + u * v * p[2].x
                        + (1.0 - u) * v * p[3].x;
                    let y = (1.0 - u) * (1.0 - v) * p[0].y
                        + u * (1.0 - v) * p[1].y
                        + u * v * p[2].y
                        + (1.0 - u) * v * p[3].y;
                    self.nodes.push(Point2::new(x, y));
                    (self.nodes.len() - 1) as u32
                };
                grid[i][j] = node;
            }
        }
        for i in 0..nx {
            for j in 0..ny {
                self.faces.push(vec![
                    grid[i][j],
                    grid[i + 1][j],
                    grid[i + 1][j + 1],
                    grid[i][j + 1],
                ]);
            }
        }
    }

    fn build(self) -> DualMesh {
        DualMesh::new(self.nodes, self.faces).expect("block mesh is well-formed")
    }
}

/// Primal mesh of a regular `sectors`-gon domain with a single interior
/// vertex of valency `sectors` at the center; each sector is an m x m block.
pub fn fan_primal(sectors: usize, m: usize) -> DualMesh {
    let mut bm = BlockMesh::new();
    let center = bm.corner(Point2::new(0.0, 0.0));
    let r = 1.25;
    let corner_at = |k: usize| {
        let a = std::f64::consts::TAU * (k as f64 + 0.5) / sectors as f64 + std::f64::consts::FRAC_PI_2;
        Point2::new(r * a.cos(), r * a.sin())
    };
    let corners: Vec<u32> = (0..sectors).map(|k| bm.corner(corner_at(k))).collect();
    let mids: Vec<u32> = (0..sectors)
        .map(|k| {
            let a = bm.nodes[corners[k] as usize];
            let b = bm.nodes[corners[(k + 1) % sectors] as usize];
            bm.corner(Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)))
        })
        .collect();
    // Sector k: center -> mid_{k-1} -> corner_k -> mid_k, counter-clockwise.
    for k in 0..sectors {
        let prev = mids[(k + sectors - 1) % sectors];
        bm.add_block([center, prev, corners[k], mids[k]], m, m);
    }
    bm.build()
}

fn fan_plane(sectors: usize, m: usize) -> DualMesh {
    let dual = primal_to_dual(&fan_primal(sectors, m)).expect("fan primal is all-quad");
    laplacian_smooth(&dual, 1e-4).expect("smoothing converges")
}

/// Plane mesh with a valency-3 block corner P (triangle defect) and a
/// valency-5 block corner Q (pentagon defect) joined by a shared edge; the
/// two singular nodes share the blocks above and below that edge. Every
/// boundary node of the block complex touches at most one interior side,
/// which keeps the dual boundary free of valency-4 vertices.
///
/// `n = [n_a, n_b, n_c, n_d, n_e]` are the side subdivision counts.
fn unstructured_plane(n: [usize; 5]) -> DualMesh {
    let [na, nb, nc, nd, ne] = n;
    let mut bm = BlockMesh::new();
    let p = bm.corner(Point2::new(-0.35, 0.0));
    let q = bm.corner(Point2::new(0.3, 0.0));
    let tl = bm.corner(Point2::new(-1.0, 1.0));
    let tr = bm.corner(Point2::new(0.2, 1.0));
    let crt = bm.corner(Point2::new(1.0, 1.0));
    let mrt = bm.corner(Point2::new(1.0, 0.45));
    let cr = bm.corner(Point2::new(1.0, 0.0));
    let mrb = bm.corner(Point2::new(1.0, -0.45));
    let crb = bm.corner(Point2::new(1.0, -1.0));
    let br = bm.corner(Point2::new(0.2, -1.0));
    let bl = bm.corner(Point2::new(-1.0, -1.0));
    let cl = bm.corner(Point2::new(-1.0, 0.0));

    bm.add_block([p, q, tr, tl], na, nb); // above the P-Q edge
    bm.add_block([q, p, bl, br], na, nc); // below the P-Q edge
    bm.add_block([p, tl, cl, bl], nb, nc); // left of P
    bm.add_block([q, mrt, crt, tr], nd, nb); // Q fan, north-east
    bm.add_block([q, mrb, cr, mrt], ne, nd); // Q fan, east
    bm.add_block([q, br, crb, mrb], nc, ne); // Q fan, south-east

    let dual = primal_to_dual(&bm.build()).expect("plane primal is all-quad");
    let smoothed = laplacian_smooth(&dual, 1e-4).expect("smoothing converges");
    scale_to_unit_square(&smoothed)
}

/// Rectangular domain with two square holes, each wrapped in a diagonal
/// collar: every hole corner connects outward to a valency-5 block corner,
/// so the dual carries eight pentagonal extraordinary faces sitting close
/// to the holes. At zero refinements the extended stencil family cannot be
/// built near them; one refinement restores the required separation.
fn two_hole() -> DualMesh {
    let nc = 2; // subdivisions along collar and hole sides
    let nd = 2; // subdivisions along the corner diagonals
    let s = 2; // subdivisions across the outer strips and the hole gap
    let mut bm = BlockMesh::new();
    let pt = |x: f64, y: f64| Point2::new(x, y);

    let d1 = bm.corner(pt(0.0, 0.0));
    let d2 = bm.corner(pt(14.0, 0.0));
    let d3 = bm.corner(pt(14.0, 8.0));
    let d4 = bm.corner(pt(0.0, 8.0));
    let p20 = bm.corner(pt(2.0, 0.0));
    let p60 = bm.corner(pt(6.0, 0.0));
    let p80 = bm.corner(pt(8.0, 0.0));
    let p120 = bm.corner(pt(12.0, 0.0));
    let p28 = bm.corner(pt(2.0, 8.0));
    let p68 = bm.corner(pt(6.0, 8.0));
    let p88 = bm.corner(pt(8.0, 8.0));
    let p128 = bm.corner(pt(12.0, 8.0));
    let q02 = bm.corner(pt(0.0, 2.0));
    let q06 = bm.corner(pt(0.0, 6.0));
    let r142 = bm.corner(pt(14.0, 2.0));
    let r146 = bm.corner(pt(14.0, 6.0));

    // Per hole: hole corners h1..h4 and collar corners c1..c4, connected
    // by corner diagonals so that every collar corner joins five blocks.
    let collar = |bm: &mut BlockMesh, x0: f64| -> [u32; 8] {
        let h1 = bm.corner(pt(x0 + 1.0, 3.0));
        let h2 = bm.corner(pt(x0 + 3.0, 3.0));
        let h3 = bm.corner(pt(x0 + 3.0, 5.0));
        let h4 = bm.corner(pt(x0 + 1.0, 5.0));
        let c1 = bm.corner(pt(x0, 2.0));
        let c2 = bm.corner(pt(x0 + 4.0, 2.0));
        let c3 = bm.corner(pt(x0 + 4.0, 6.0));
        let c4 = bm.corner(pt(x0, 6.0));
        bm.add_block([c1, c2, h2, h1], nc, nd);
        bm.add_block([c2, c3, h3, h2], nc, nd);
        bm.add_block([c3, c4, h4, h3], nc, nd);
        bm.add_block([c4, c1, h1, h4], nc, nd);
        [h1, h2, h3, h4, c1, c2, c3, c4]
    };
    let a = collar(&mut bm, 2.0);
    let b = collar(&mut bm, 8.0);
    let [_, _, _, _, ca1, ca2, ca3, ca4] = a;
    let [_, _, _, _, cb1, cb2, cb3, cb4] = b;

    // Bottom strip.
    bm.add_block([d1, p20, ca1, q02], s, s);
    bm.add_block([p20, p60, ca2, ca1], nc, s);
    bm.add_block([p60, p80, cb1, ca2], s, s);
    bm.add_block([p80, p120, cb2, cb1], nc, s);
    bm.add_block([p120, d2, r142, cb2], s, s);
    // Middle strips.
    bm.add_block([q02, ca1, ca4, q06], s, nc);
    bm.add_block([ca2, cb1, cb4, ca3], s, nc);
    bm.add_block([cb2, r142, r146, cb3], s, nc);
    // Top strip.
    bm.add_block([q06, ca4, p28, d4], s, s);
    bm.add_block([ca4, ca3, p68, p28], nc, s);
    bm.add_block([ca3, cb4, p88, p68], s, s);
    bm.add_block([cb4, cb3, p128, p88], nc, s);
    bm.add_block([cb3, r146, d3, p128], s, s);

    let primal = bm.build();
    let dual = primal_to_dual(&primal).expect("two-hole primal is all-quad");
    let smoothed = laplacian_smooth(&dual, 1e-4).expect("smoothing converges");
    scale_to_unit_square(&smoothed)
}

/// Affine rescale so the bounding box spans [-1,1] in x (isotropic).
fn scale_to_unit_square(mesh: &DualMesh) -> DualMesh {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in mesh.vertices() {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let s = 2.0 / (x1 - x0);
    let cx = 0.5 * (x0 + x1);
    let cy = 0.5 * (y0 + y1);
    mesh.map_positions(|p| Point2::new((p.x - cx) * s, (p.y - cy) * s))
}
