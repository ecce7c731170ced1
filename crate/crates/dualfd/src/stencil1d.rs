//! Derivative approximation on arbitrary 1D grids.
//!
//! The approach: regular-grid stencil rows are applied to an auxiliary
//! function whose derivatives vanish at the evaluation point, which turns
//! the unknown derivatives into the solution of a small linear system
//!
//! ```text
//! (C X D) u = Cbar f
//! ```
//!
//! where `Cbar` holds unit-step stencil rows for derivatives 1..=p, `C` is
//! `Cbar` with the evaluation-point column removed, `X` is the Vandermonde
//! matrix of signed distances to the evaluation point and `D` the diagonal
//! of inverse factorials. On a regular grid `C X D` is diagonal with entries
//! `h^j` and the classical stencils are recovered.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{self, Rat};

/// Strictly increasing point sequence with a marked evaluation index.
#[derive(Debug, Clone)]
pub struct Grid1D {
    points: Vec<f64>,
    center: usize,
}

impl Grid1D {
    pub fn new(points: Vec<f64>, center: usize) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("grid needs at least two points".into()));
        }
        if center >= points.len() {
            return Err(Error::InvalidInput(format!(
                "center index {} out of range for {} points",
                center,
                points.len()
            )));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid points must be strictly increasing".into()));
        }
        Ok(Self { points, center })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn center_index(&self) -> usize {
        self.center
    }

    pub fn center(&self) -> f64 {
        self.points[self.center]
    }
}

/// Exact unit-spacing stencil weights for the `q`-th derivative on the given
/// integer offsets, evaluated at offset `eval`.
///
/// The weights reproduce the derivative of every polynomial through degree
/// `offsets.len() - 1`, the highest degree the point count admits.
pub(crate) fn weights_rat(q: usize, offsets: &[i64], eval: i64) -> Option<Vec<Rat>> {
    let n = offsets.len();
    if n <= q {
        return None;
    }
    // Conditions: sum_i w_i o_i^m = d^q/dx^q x^m |_{x=eval}, m = 0..n-1.
    let mut a = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    for (m, row) in a.iter_mut().enumerate() {
        for (i, &o) in offsets.iter().enumerate() {
            row[i] = rational::rat_pow(&rational::rat_int(o), m);
        }
        b[m] = monomial_derivative(m, q, eval);
    }
    rational::solve_square(a, b)
}

/// d^q/dx^q (x^m) evaluated at integer x.
fn monomial_derivative(m: usize, q: usize, x: i64) -> Rat {
    if q > m {
        return Rat::zero();
    }
    // falling factorial m (m-1) ... (m-q+1) * x^(m-q)
    let mut coeff = rational::rat_int(1);
    for k in 0..q {
        coeff *= rational::rat_int((m - k) as i64);
    }
    coeff * rational::rat_pow(&rational::rat_int(x), m - q)
}

/// Highest degree of polynomial exactness the weights achieve, found by
/// probing monomials beyond the guaranteed degree `n - 1` (symmetric offset
/// sets gain an extra order by parity).
pub(crate) fn exact_degree(w: &[Rat], q: usize, offsets: &[i64], eval: i64) -> usize {
    let n = offsets.len();
    let mut deg = n - 1;
    for m in n..n + 8 {
        let mut s = Rat::zero();
        for (wi, &o) in w.iter().zip(offsets) {
            s += wi * rational::rat_pow(&rational::rat_int(o), m);
        }
        if s == monomial_derivative(m, q, eval) {
            deg = m;
        } else {
            break;
        }
    }
    deg
}

/// Stencil weights for the `q`-th derivative at offset 0 with accuracy order
/// at least `r`, on distinct integer offsets.
pub fn regular_weights(q: usize, r: usize, offsets: &[i64]) -> Result<Vec<f64>> {
    check_offsets(offsets)?;
    if offsets.len() <= q {
        return Err(Error::InvalidConfiguration(format!(
            "derivative {} needs at least {} offsets, got {}",
            q,
            q + 1,
            offsets.len()
        )));
    }
    let w = weights_rat(q, offsets, 0).ok_or_else(|| {
        Error::NumericalFailure("weight system singular (offsets not distinct?)".into())
    })?;
    let achieved = exact_degree(&w, q, offsets, 0) + 1 - q;
    if achieved < r {
        return Err(Error::InvalidConfiguration(format!(
            "derivative {} on {} offsets reaches order {}, requested {}",
            q,
            offsets.len(),
            achieved,
            r
        )));
    }
    Ok(w.iter().map(rational::to_f64).collect())
}

fn check_offsets(offsets: &[i64]) -> Result<()> {
    let mut sorted = offsets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != offsets.len() {
        return Err(Error::InvalidConfiguration("offsets must be distinct".into()));
    }
    Ok(())
}

/// Precomputed regular-grid rows for derivatives `1..=p`.
#[derive(Debug, Clone)]
pub struct RegularStencilTable {
    q: usize,
    r: usize,
    p: usize,
    offsets: Vec<i64>,
    center_col: usize,
    /// `Cbar`: p x n unit-step weight rows, row j for the j-th derivative.
    full_rows: DMatrix<f64>,
    /// `C`: `Cbar` with the center column deleted.
    reduced_rows: DMatrix<f64>,
    /// Diagonal of `D`, entry j-1 equal to 1/j!.
    factorial_diag: DVector<f64>,
}

impl RegularStencilTable {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn center_col(&self) -> usize {
        self.center_col
    }

    pub fn full_rows(&self) -> &DMatrix<f64> {
        &self.full_rows
    }

    pub fn reduced_rows(&self) -> &DMatrix<f64> {
        &self.reduced_rows
    }

    pub fn factorial_diag(&self) -> &DVector<f64> {
        &self.factorial_diag
    }
}

/// Builds the stencil table for an `r`-th order approximation of the `q`-th
/// derivative. Row `j` must be accurate to order `r + q - j`; with rows built
/// to the highest accuracy the offsets admit (`n - j`), the rule holds for
/// every row exactly when `n >= p + 1`.
pub fn build_stencil_table(q: usize, r: usize, offsets: &[i64]) -> Result<RegularStencilTable> {
    check_offsets(offsets)?;
    if q == 0 || r == 0 {
        return Err(Error::InvalidConfiguration(
            "derivative and accuracy orders must be positive".into(),
        ));
    }
    let n = offsets.len();
    let p = q + r - 1;
    let center_col = offsets
        .iter()
        .position(|&o| o == 0)
        .ok_or_else(|| Error::InvalidConfiguration("offsets must contain 0".into()))?;
    if n < p + 1 {
        return Err(Error::InvalidConfiguration(format!(
            "row {} (derivative {}) needs at least {} offsets, got {}",
            p,
            p,
            p + 1,
            n
        )));
    }

    let mut full = DMatrix::zeros(p, n);
    for j in 1..=p {
        let w = weights_rat(j, offsets, 0)
            .ok_or_else(|| Error::NumericalFailure("singular weight system".into()))?;
        let required = r + q - j;
        let achieved = exact_degree(&w, j, offsets, 0) + 1 - j;
        if achieved < required {
            return Err(Error::InvalidConfiguration(format!(
                "row {} (derivative {}) reaches order {} on {} offsets, needs {}",
                j, j, achieved, n, required
            )));
        }
        for (i, wi) in w.iter().enumerate() {
            full[(j - 1, i)] = rational::to_f64(wi);
        }
    }
    let reduced = full.clone().remove_column(center_col);
    let diag = DVector::from_iterator(
        p,
        (1..=p).map(|j| 1.0 / rational::to_f64(&rational::factorial(j))),
    );
    Ok(RegularStencilTable {
        q,
        r,
        p,
        offsets: offsets.to_vec(),
        center_col,
        full_rows: full,
        reduced_rows: reduced,
        factorial_diag: diag,
    })
}

/// Vandermonde matrix `X_ij = (x_i - x_k)^j`, j = 1..=p, over the non-center
/// points in grid order.
pub fn build_vandermonde(grid: &Grid1D, p: usize) -> DMatrix<f64> {
    let n = grid.len();
    let xk = grid.center();
    let mut x = DMatrix::zeros(n - 1, p);
    let mut row = 0;
    for (i, &xi) in grid.points().iter().enumerate() {
        if i == grid.center_index() {
            continue;
        }
        let d = xi - xk;
        let mut pw = 1.0;
        for j in 0..p {
            pw *= d;
            x[(row, j)] = pw;
        }
        row += 1;
    }
    x
}

/// Column scaling for the Vandermonde system: column `j` is divided by
/// `s^j` with `s` the largest point distance, bringing all entries to O(1).
///
/// Returns the scaled matrix and the diagonal `K` with `K_jj = s^j`; the
/// solution of the scaled system must be divided by `K` entrywise.
pub fn jacobi_precondition(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let s = x.column(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s == 0.0 {
        return Err(Error::InvalidInput(
            "all stencil points coincide with the evaluation point".into(),
        ));
    }
    let p = x.ncols();
    let mut scaled = x.clone();
    let mut k = DVector::zeros(p);
    let mut sj = 1.0;
    for j in 0..p {
        sj *= s;
        k[j] = sj;
        scaled.column_mut(j).scale_mut(1.0 / sj);
    }
    Ok((scaled, k))
}

/// Derivative estimates at the grid center, entry `j-1` approximating the
/// j-th derivative.
#[derive(Debug, Clone)]
pub struct DerivativeSet {
    values: Vec<f64>,
    orders: Vec<usize>,
}

impl DerivativeSet {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Predicted accuracy order of each entry (`p + 1 - j`).
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j - 1]
    }
}

/// Solves `(C X D) u = Cbar f` for all derivatives 1..=p at the grid center,
/// where `p = q + r - 1`.
pub fn differentiate_1d(grid: &Grid1D, values: &[f64], q: usize, r: usize) -> Result<DerivativeSet> {
    let rows = derivative_weight_rows(grid, q, r)?;
    let f = DVector::from_column_slice(values);
    if values.len() != grid.len() {
        return Err(Error::InvalidInput("one sample per grid point required".into()));
    }
    let u = &rows * f;
    let p = q + r - 1;
    Ok(DerivativeSet {
        values: u.iter().copied().collect(),
        orders: (1..=p).map(|j| p + 1 - j).collect(),
    })
}

/// Weight rows expressing each derivative 1..=p as a linear functional of
/// the samples, i.e. the solved system `D^-1 K^-1 (C Xs)^-1 Cbar`.
pub fn derivative_weight_rows(grid: &Grid1D, q: usize, r: usize) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let p = q + r - 1;
    if n < p + 1 {
        return Err(Error::InvalidConfiguration(format!(
            "{} points cannot support p = {}",
            n, p
        )));
    }
    let offsets: Vec<i64> = (0..n).map(|i| i as i64 - grid.center_index() as i64).collect();
    let table = build_stencil_table(q, r, &offsets)?;
    let x = build_vandermonde(grid, p);
    let (xs, k) = jacobi_precondition(&x)?;
    let m = table.reduced_rows() * xs;
    let qr = m.clone().col_piv_qr();
    let sol = qr.solve(table.full_rows()).ok_or_else(|| {
        let cond = condition_estimate(&m);
        Error::NumericalFailure(format!(
            "mesh correction system singular or near-singular (condition ~ {:.3e})",
            cond
        ))
    })?;
    // Unscale: u = D^-1 K^-1 v.
    let mut rows = sol;
    for j in 0..p {
        let factor = rational::to_f64(&rational::factorial(j + 1)) / k[j];
        rows.row_mut(j).scale_mut(factor);
    }
    Ok(rows)
}

pub(crate) fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
