//! Global sparse operators, direct solves, Newton iteration, implicit Euler
//! stepping and spectrum computation.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{DualMesh, MeshClass};
use crate::stencil2d::{
    assemble_local_stencil, MultiIndex, StencilFamily, TableCache,
};

/// Row classification of the assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Interior,
    Dirichlet,
    Neumann,
}

/// Sparse operator with right-hand side, one row per mesh vertex.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    n: usize,
    triplets: Vec<(u32, u32, f64)>,
    rhs: DVector<f64>,
    row_kind: Vec<RowKind>,
}

impl LinearOperator {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            triplets: Vec::new(),
            rhs: DVector::zeros(n),
            row_kind: vec![RowKind::Interior; n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, row: u32, col: u32, value: f64) {
        if value != 0.0 {
            self.triplets.push((row, col, value));
        }
    }

    pub fn set_rhs(&mut self, row: u32, value: f64) {
        self.rhs[row as usize] = value;
    }

    pub fn set_row_kind(&mut self, row: u32, kind: RowKind) {
        self.row_kind[row as usize] = kind;
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn row_kind(&self, row: u32) -> RowKind {
        self.row_kind[row as usize]
    }

    /// Dense row contents, summing duplicate entries (test support).
    pub fn dense_row(&self, row: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(r, c, v) in &self.triplets {
            if r == row {
                out[c as usize] += v;
            }
        }
        out
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for &(r, c, v) in &self.triplets {
            out[r as usize] += v * x[c as usize];
        }
        out
    }

    fn to_sparse(&self, row_scale: &[f64]) -> Result<SparseColMat<u32, f64>> {
        let triplets: Vec<Triplet<u32, u32, f64>> = self
            .triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v * row_scale[r as usize]))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::NumericalFailure(format!("sparse assembly failed: {e:?}")))
    }

    fn to_sparse_f32(&self, row_scale: &[f64]) -> Result<SparseColMat<u32, f32>> {
        let triplets: Vec<Triplet<u32, u32, f32>> = self
            .triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, (v * row_scale[r as usize]) as f32))
            .collect();
        SparseColMat::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| Error::NumericalFailure(format!("sparse assembly failed: {e:?}")))
    }

    fn row_inf_norms(&self) -> Vec<f64> {
        // Upper bound on the row norm (duplicate entries are summed in the
        // matrix, here they only grow the bound); adequate for scaling.
        let mut norms = vec![0.0f64; self.n];
        for &(r, _, v) in &self.triplets {
            norms[r as usize] += v.abs();
        }
        norms
    }

    /// Dense submatrix over the rows/columns where `keep` is true.
    pub fn dense_submatrix(&self, keep: &[bool]) -> DMatrix<f64> {
        let index: Vec<Option<usize>> = {
            let mut k = 0;
            keep.iter()
                .map(|&flag| {
                    if flag {
                        k += 1;
                        Some(k - 1)
                    } else {
                        None
                    }
                })
                .collect()
        };
        let m = index.iter().flatten().count();
        let mut out = DMatrix::zeros(m, m);
        for &(r, c, v) in &self.triplets {
            if let (Some(i), Some(j)) = (index[r as usize], index[c as usize]) {
                out[(i, j)] += v;
            }
        }
        out
    }
}

/// Above this size the factorization is computed in single precision and
/// the solution recovered by iterative refinement against the
/// double-precision operator, halving the factor memory.
const MIXED_PRECISION_ROWS: usize = 250_000;

/// Direct sparse solve with row equilibration. The scaled residual
/// `||A u - b||_inf / ||b||_inf` must not exceed 1e-10.
pub fn solve_linear(op: &LinearOperator) -> Result<DVector<f64>> {
    let norms = op.row_inf_norms();
    if let Some(r) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "row {r} is empty (vertex without equation)"
        )));
    }
    let scale: Vec<f64> = norms.iter().map(|&x| 1.0 / x).collect();
    let u = if op.n <= MIXED_PRECISION_ROWS {
        let a = op.to_sparse(&scale)?;
        let sym = SymbolicLu::try_new(a.symbolic())
            .map_err(|e| Error::NumericalFailure(format!("symbolic factorization failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(sym, a.rb())
            .map_err(|e| Error::NumericalFailure(format!("LU factorization failed: {e:?}")))?;
        let mut b = Mat::from_fn(op.n, 1, |i, _| op.rhs[i] * scale[i]);
        lu.solve_in_place(b.rb_mut());
        DVector::from_fn(op.n, |i, _| b[(i, 0)])
    } else {
        let a = op.to_sparse_f32(&scale)?;
        let sym = SymbolicLu::try_new(a.symbolic())
            .map_err(|e| Error::NumericalFailure(format!("symbolic factorization failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(sym, a.rb())
            .map_err(|e| Error::NumericalFailure(format!("LU factorization failed: {e:?}")))?;
        let mut u = DVector::zeros(op.n);
        // Iterative refinement: the single-precision factors act as the
        // preconditioner, residuals stay in double precision.
        for _ in 0..60 {
            let au = op.matvec(&u);
            let mut worst: f64 = 0.0;
            let mut b32 = Mat::from_fn(op.n, 1, |i, _| {
                let r = (op.rhs[i] - au[i]) * scale[i];
                worst = worst.max(r.abs());
                r as f32
            });
            if worst <= 1e-13 {
                break;
            }
            lu.solve_in_place(b32.rb_mut());
            for i in 0..op.n {
                u[i] += b32[(i, 0)] as f64;
            }
        }
        u
    };

    // Residual of the scaled system.
    let mut residual: f64 = 0.0;
    let mut bnorm: f64 = 0.0;
    let au = op.matvec(&u);
    for i in 0..op.n {
        residual = residual.max(((au[i] - op.rhs[i]) * scale[i]).abs());
        bnorm = bnorm.max((op.rhs[i] * scale[i]).abs());
    }
    let rel = if bnorm > 0.0 { residual / bnorm } else { residual };
    if !rel.is_finite() || rel > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "direct solve residual {rel:.3e} exceeds 1e-10"
        )));
    }
    Ok(u)
}

/// Newton iteration record.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Residual max-norm before each update, then the final residual.
    pub history: Vec<f64>,
}

/// Solves `residual(u) = 0` by Newton's method with an analytically
/// assembled Jacobian. Converges when the residual max-norm drops to `tol`.
pub fn solve_newton(
    mut residual: impl FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    mut jacobian: impl FnMut(&DVector<f64>) -> Result<LinearOperator>,
    initial: DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, NewtonReport)> {
    let mut u = initial;
    let mut history = Vec::new();
    for it in 0..max_iter {
        let r = residual(&u)?;
        let norm = r.amax();
        history.push(norm);
        if norm <= tol {
            return Ok((
                u,
                NewtonReport {
                    iterations: it,
                    history,
                },
            ));
        }
        let mut jac = jacobian(&u)?;
        for i in 0..r.len() {
            jac.set_rhs(i as u32, r[i]);
        }
        let delta = solve_linear(&jac)?;
        u -= &delta;
    }
    Err(Error::NumericalFailure(format!(
        "Newton did not reach {tol:.1e} in {max_iter} iterations; history {history:?}"
    )))
}

/// Implicit Euler stepper for `du/dt = A u`: solves `(I - dt A) u' = u`
/// with the factorization cached across steps. Dirichlet rows of `a` are
/// held at their right-hand-side value.
pub struct ImplicitEuler {
    lu: Lu<u32, f64>,
    scale: Vec<f64>,
    dirichlet: Vec<(usize, f64)>,
    n: usize,
}

impl ImplicitEuler {
    pub fn new(a: &LinearOperator, dt: f64) -> Result<Self> {
        let n = a.size();
        let mut stepper = LinearOperator::new(n);
        let mut dirichlet = Vec::new();
        for i in 0..n {
            if a.row_kind(i as u32) == RowKind::Dirichlet {
                dirichlet.push((i, a.rhs()[i]));
                stepper.push(i as u32, i as u32, 1.0);
            } else {
                stepper.push(i as u32, i as u32, 1.0);
            }
        }
        for &(r, c, v) in &a.triplets {
            if a.row_kind(r) != RowKind::Dirichlet {
                stepper.push(r, c, -dt * v);
            }
        }
        let norms = stepper.row_inf_norms();
        let scale: Vec<f64> = norms.iter().map(|&x| 1.0 / x).collect();
        let m = stepper.to_sparse(&scale)?;
        let sym = SymbolicLu::try_new(m.symbolic())
            .map_err(|e| Error::NumericalFailure(format!("symbolic factorization failed: {e:?}")))?;
        let lu = Lu::try_new_with_symbolic(sym, m.rb())
            .map_err(|e| Error::NumericalFailure(format!("step matrix singular: {e:?}")))?;
        Ok(Self {
            lu,
            scale,
            dirichlet,
            n,
        })
    }

    pub fn step(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut b = Mat::from_fn(self.n, 1, |i, _| u[i]);
        for &(i, v) in &self.dirichlet {
            b[(i, 0)] = v;
        }
        for i in 0..self.n {
            b[(i, 0)] *= self.scale[i];
        }
        self.lu.solve_in_place(b.rb_mut());
        DVector::from_fn(self.n, |i, _| b[(i, 0)])
    }
}

/// Budget for the dense eigensolver.
pub const EIGEN_SIZE_BUDGET: usize = 5_000;

/// Full spectrum of the operator restricted to the rows/columns where
/// `keep` is true (interior vertices for stability studies).
pub fn eigenvalues(op: &LinearOperator, keep: &[bool]) -> Result<Vec<(f64, f64)>> {
    let m = keep.iter().filter(|&&k| k).count();
    if m > EIGEN_SIZE_BUDGET {
        return Err(Error::InvalidConfiguration(format!(
            "{m} rows exceed the dense eigensolve budget of {EIGEN_SIZE_BUDGET}; \
             use a smaller refinement"
        )));
    }
    let dense = op.dense_submatrix(keep);
    let eigs = dense.complex_eigenvalues();
    Ok(eigs.iter().map(|z| (z.re, z.im)).collect())
}

/// Centred-difference advection operator `-(vx Dx + vy Dy)` on a periodic
/// n x n grid with spacing `h`; its spectrum is purely imaginary.
pub fn periodic_centered_advection(n: usize, velocity: (f64, f64), h: f64) -> DMatrix<f64> {
    let size = n * n;
    let idx = |i: usize, j: usize| (j % n) * n + (i % n);
    let mut a = DMatrix::zeros(size, size);
    for j in 0..n {
        for i in 0..n {
            let r = idx(i, j);
            a[(r, idx(i + 1, j))] += -velocity.0 / (2.0 * h);
            a[(r, idx(i + n - 1, j))] += velocity.0 / (2.0 * h);
            a[(r, idx(i, j + 1))] += -velocity.1 / (2.0 * h);
            a[(r, idx(i, j + n - 1))] += velocity.1 / (2.0 * h);
        }
    }
    a
}

/// Per-boundary-vertex condition for [`assemble`].
#[derive(Debug, Clone, Copy)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    /// Normal derivative datum applied at the boundary vertex row.
    Neumann(f64),
    /// Dirichlet at the vertex plus a normal-derivative row placed on its
    /// inward neighbor (clamped conditions, e.g. the biharmonic problem).
    Both { value: f64, normal: f64 },
}

/// Assembles the global operator for a linear PDE: interior rows take the
/// requested combination of derivative weight rows, boundary rows implement
/// the given conditions. `coefficients` is evaluated per interior vertex.
pub fn assemble(
    mesh: &DualMesh,
    family: StencilFamily,
    cache: &TableCache,
    coefficients: &dyn Fn(u32) -> Vec<(MultiIndex, f64)>,
    interior_rhs: &dyn Fn(u32) -> f64,
    bc: &dyn Fn(u32) -> BoundaryCondition,
) -> Result<LinearOperator> {
    let n = mesh.vertex_count();
    let mut op = LinearOperator::new(n);

    // First pass: boundary conditions, collecting Neumann rows assigned to
    // inward partners of clamped boundary vertices.
    let mut partner_rows: Vec<(u32, u32, f64)> = Vec::new(); // (row vertex, boundary vertex, datum)
    let mut claimed = vec![false; n];
    for v in 0..n as u32 {
        if !mesh.is_boundary_vertex(v) {
            continue;
        }
        match bc(v) {
            BoundaryCondition::Dirichlet(g) => {
                op.push(v, v, 1.0);
                op.set_rhs(v, g);
                op.set_row_kind(v, RowKind::Dirichlet);
            }
            BoundaryCondition::Neumann(h) => {
                neumann_row(mesh, family, cache, &mut op, v, v, h)?;
            }
            BoundaryCondition::Both { value, normal } => {
                op.push(v, v, 1.0);
                op.set_rhs(v, value);
                op.set_row_kind(v, RowKind::Dirichlet);
                // Corners carry Dirichlet data only.
                if mesh.classify(v) == MeshClass::Corner {
                    continue;
                }
                if let Some(p) = inward_partner(mesh, v) {
                    if !claimed[p as usize] && !mesh.is_boundary_vertex(p) {
                        claimed[p as usize] = true;
                        partner_rows.push((p, v, normal));
                    }
                }
            }
        }
    }
    for (row, bvertex, h) in partner_rows {
        neumann_row(mesh, family, cache, &mut op, row, bvertex, h)?;
    }

    // Second pass: interior PDE rows.
    for v in mesh.interior_vertices() {
        if claimed[v as usize] {
            continue;
        }
        let stencil = assemble_local_stencil(mesh, v, family, cache)?;
        for (mi, coeff) in coefficients(v) {
            let k = stencil.row_index(mi).ok_or_else(|| {
                Error::InvalidConfiguration(format!("derivative {mi} beyond family order"))
            })?;
            for (c, &u) in stencil.points.iter().enumerate() {
                op.push(v, u, coeff * stencil.rows[(k, c)]);
            }
        }
        op.set_rhs(v, interior_rhs(v));
    }
    Ok(op)
}

/// Writes `du/dn = h` (evaluated at boundary vertex `bvertex`, with its
/// one-sided stencil) into row `row`.
fn neumann_row(
    mesh: &DualMesh,
    family: StencilFamily,
    cache: &TableCache,
    op: &mut LinearOperator,
    row: u32,
    bvertex: u32,
    h: f64,
) -> Result<()> {
    let (nx, ny) = mesh
        .boundary_normal(bvertex)
        .ok_or_else(|| Error::InvalidInput(format!("vertex {bvertex} is not on the boundary")))?;
    let stencil = assemble_local_stencil(mesh, bvertex, family, cache)?;
    let kx = stencil.row_index(MultiIndex::new(1, 0)).unwrap();
    let ky = stencil.row_index(MultiIndex::new(0, 1)).unwrap();
    for (c, &u) in stencil.points.iter().enumerate() {
        op.push(row, u, nx * stencil.rows[(kx, c)] + ny * stencil.rows[(ky, c)]);
    }
    op.set_rhs(row, h);
    op.set_row_kind(row, RowKind::Neumann);
    Ok(())
}

/// The interior vertex reached along the single inward edge of a boundary
/// vertex (None at corners or reentrant boundary vertices).
fn inward_partner(mesh: &DualMesh, v: u32) -> Option<u32> {
    let interior: Vec<u32> = mesh
        .incident_edges(v)
        .iter()
        .copied()
        .filter(|&e| !mesh.edge(e).is_boundary())
        .collect();
    if interior.len() == 1 {
        Some(mesh.edge(interior[0]).other(v))
    } else {
        None
    }
}
