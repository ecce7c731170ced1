//! Convergence studies, error metrics and CSV emission.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linsolve::{eigenvalues, solve_linear, solve_newton, ImplicitEuler};
use crate::mesh::{generate_test_mesh, DualMesh, MeshKind};
use crate::pde::{
    assemble_advection, initial_condition, minimal_surface_jacobian, minimal_surface_residual,
    AdvectionParams, PdeKind, ProblemSpec,
};
use crate::stencil2d::{differentiate_field, precompute_tables, MultiIndex, StencilFamily, TableCache};
use crate::stencil1d::{differentiate_1d, Grid1D};
use crate::subdivision::refine_times;

/// Tabulated study: one row per level, plus the observed order per error
/// column computed from the last three levels.
#[derive(Debug, Clone)]
pub struct Study {
    /// First column name (refinement index or point count).
    pub level_name: &'static str,
    pub columns: Vec<String>,
    pub levels: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    /// Observed order per column (negated log-log slope).
    pub orders: Vec<f64>,
    /// Least-squares residual of each fit.
    pub fit_residuals: Vec<f64>,
    /// Whether levels are refinement counts (base-3 spacing) or point
    /// counts (direct log spacing).
    pub ternary_levels: bool,
    /// Error that stopped the study early, if any; the completed levels
    /// are still reported.
    pub failure: Option<String>,
}

impl Study {
    /// All requested levels completed.
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(self.level_name);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (lvl, row) in self.levels.iter().zip(&self.rows) {
            out.push_str(&lvl.to_string());
            for v in row {
                out.push(',');
                out.push_str(&format!("{v:.16e}"));
            }
            out.push('\n');
        }
        for (i, c) in self.columns.iter().enumerate() {
            out.push_str(&format!(
                "# order_{c} = {:.4} (fit residual {:.3e})\n",
                self.orders[i], self.fit_residuals[i]
            ));
        }
        if let Some(f) = &self.failure {
            out.push_str(&format!("# incomplete: {f}\n"));
        }
        out
    }

    pub fn order(&self, column: &str) -> f64 {
        let i = self
            .columns
            .iter()
            .position(|c| c == column)
            .unwrap_or_else(|| panic!("column {column}"));
        self.orders[i]
    }
}

/// Least-squares slope of y against x, with the fit residual max-norm.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (slope * a + intercept)).abs())
        .fold(0.0f64, f64::max);
    (slope, residual)
}

fn finish_study(
    level_name: &'static str,
    columns: Vec<String>,
    levels: Vec<usize>,
    rows: Vec<Vec<f64>>,
    ternary: bool,
) -> Study {
    let ncols = columns.len();
    let tail = levels.len().min(3);
    let start = levels.len() - tail;
    let xs: Vec<f64> = levels[start..]
        .iter()
        .map(|&l| {
            if ternary {
                l as f64 * 3.0f64.ln()
            } else {
                (l as f64).ln()
            }
        })
        .collect();
    let mut orders = Vec::with_capacity(ncols);
    let mut fit_residuals = Vec::with_capacity(ncols);
    for c in 0..ncols {
        let ys: Vec<f64> = rows[start..].iter().map(|r| r[c].max(1e-300).ln()).collect();
        let (slope, res) = least_squares_slope(&xs, &ys);
        orders.push(-slope);
        fit_residuals.push(res);
    }
    Study {
        level_name,
        columns,
        levels,
        rows,
        orders,
        fit_residuals,
        ternary_levels: ternary,
        failure: None,
    }
}

fn f_1d(x: f64) -> f64 {
    (0.7 * x).exp() + x * x
}

fn f_1d_derivative(j: usize, x: f64) -> f64 {
    let base = 0.7f64.powi(j as i32) * (0.7 * x).exp();
    match j {
        1 => base + 2.0 * x,
        2 => base + 2.0,
        _ => base,
    }
}

/// 1D differentiation study on the regular and irregular five-point grids
/// scaled by 1/n, n = 4..64: absolute errors of derivatives 1..4 at x = 0.
pub fn run_1d_study() -> Result<(Study, Study)> {
    let ns = [4usize, 8, 16, 32, 64];
    let mut reg_rows = Vec::new();
    let mut irreg_rows = Vec::new();
    for &n in &ns {
        let nf = n as f64;
        let reg = Grid1D::new(
            vec![-2.0 / nf, -1.0 / nf, 0.0, 1.0 / nf, 2.0 / nf],
            2,
        )?;
        let irreg = Grid1D::new(
            vec![-2.0 / nf, -1.0 / nf, 0.0, 2.0 / (5.0 * nf), 4.0 / (5.0 * nf)],
            2,
        )?;
        let row_for = |grid: &Grid1D| -> Result<Vec<f64>> {
            let samples: Vec<f64> = grid.points().iter().map(|&x| f_1d(x)).collect();
            let d = differentiate_1d(grid, &samples, 1, 4)?;
            Ok((1..=4)
                .map(|j| (d.value(j) - f_1d_derivative(j, 0.0)).abs())
                .collect())
        };
        reg_rows.push(row_for(&reg)?);
        irreg_rows.push(row_for(&irreg)?);
    }
    let reg_cols = (1..=4).map(|j| format!("reg{j}")).collect();
    let irreg_cols = (1..=4).map(|j| format!("irreg{j}")).collect();
    Ok((
        finish_study("n", reg_cols, ns.to_vec(), reg_rows, false),
        finish_study("n", irreg_cols, ns.to_vec(), irreg_rows, false),
    ))
}

fn f_2d(x: f64, y: f64) -> f64 {
    (-x * x - y * y).exp()
}

fn f_2d_derivative(mi: MultiIndex, x: f64, y: f64) -> f64 {
    let f = f_2d(x, y);
    match (mi.jx, mi.jy) {
        (1, 0) => -2.0 * x * f,
        (0, 1) => -2.0 * y * f,
        (2, 0) => (4.0 * x * x - 2.0) * f,
        (1, 1) => 4.0 * x * y * f,
        (0, 2) => (4.0 * y * y - 2.0) * f,
        _ => unreachable!("diff study uses derivatives up to order 2"),
    }
}

/// 2D differentiation study: per-derivative max errors under refinement.
pub fn run_diff_study(
    kind: MeshKind,
    refinements: std::ops::RangeInclusive<usize>,
    family: StencilFamily,
) -> Result<Study> {
    let base = generate_test_mesh(kind);
    let cache = precompute_tables(family);
    let multi = crate::stencil2d::multi_indices(2);
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let mut failure = None;
    for r in refinements {
        let outcome = refine_times(&base, r).and_then(|mesh| {
            let samples: Vec<f64> = mesh.vertices().iter().map(|p| f_2d(p.x, p.y)).collect();
            differentiate_field(&mesh, family, &samples, &cache).map(|f| (mesh, f))
        });
        let (mesh, field) = match outcome {
            Ok(v) => v,
            Err(e) => {
                if levels.is_empty() {
                    return Err(e);
                }
                failure = Some(e.to_string());
                break;
            }
        };
        // Max error over non-boundary vertices: one-sided windows lose an
        // order for the pure second derivatives, so boundary points are
        // reported by the PDE studies (where they carry boundary data)
        // rather than here.
        let mut errs = vec![0.0f64; multi.len()];
        for v in mesh.interior_vertices() {
            let p = mesh.position(v);
            for (k, &mi) in multi.iter().enumerate() {
                let e = (field.values[v as usize][k] - f_2d_derivative(mi, p.x, p.y)).abs();
                errs[k] = errs[k].max(e);
            }
        }
        levels.push(r);
        rows.push(errs);
    }
    if levels.is_empty() {
        return Err(Error::InvalidConfiguration("no levels requested".into()));
    }
    let columns = vec!["dx".into(), "dy".into(), "dxx".into(), "dxy".into(), "dyy".into()];
    let mut study = finish_study("n", columns, levels, rows, true);
    study.failure = failure;
    Ok(study)
}

/// Max-norm error of the discrete solution against the analytic one.
fn solution_error(mesh: &DualMesh, problem: &ProblemSpec, u: &DVector<f64>) -> f64 {
    let mut err: f64 = 0.0;
    for v in 0..mesh.vertex_count() {
        let p = mesh.position(v as u32);
        err = err.max((u[v] - (problem.exact)(p.x, p.y)).abs());
    }
    err
}

/// Solves one problem instance on a prepared mesh.
pub fn solve_problem(
    problem: &ProblemSpec,
    mesh: &DualMesh,
    family: StencilFamily,
    cache: &TableCache,
) -> Result<DVector<f64>> {
    match problem.kind {
        PdeKind::Poisson | PdeKind::Biharmonic => {
            let op = problem.assemble_linear(mesh, family, cache)?;
            solve_linear(&op)
        }
        PdeKind::MinimalSurface => {
            let initial = DVector::zeros(mesh.vertex_count());
            let (u, _report) = solve_newton(
                |u| minimal_surface_residual(mesh, family, cache, u),
                |u| minimal_surface_jacobian(mesh, family, cache, u),
                initial,
                1e-10,
                NEWTON_MAX_ITER,
            )?;
            Ok(u)
        }
        PdeKind::Advection => {
            let params = problem.advection.expect("advection parameters");
            advect(mesh, family, cache, params)
        }
    }
}

fn advect(
    mesh: &DualMesh,
    family: StencilFamily,
    cache: &TableCache,
    params: AdvectionParams,
) -> Result<DVector<f64>> {
    let a = assemble_advection(mesh, family, cache, params.velocity)?;
    let stepper = ImplicitEuler::new(&a, params.dt)?;
    let mut u = DVector::from_iterator(
        mesh.vertex_count(),
        mesh.vertices().iter().map(|p| initial_condition(p.x, p.y)),
    );
    let steps = (params.t_final / params.dt).round() as usize;
    for _ in 0..steps {
        u = stepper.step(&u);
    }
    Ok(u)
}

/// Newton iteration count gate used by the convergence driver.
pub const NEWTON_MAX_ITER: usize = 15;

/// PDE convergence study: max-norm error per refinement level.
pub fn run_convergence(
    problem: &ProblemSpec,
    kind: MeshKind,
    refinements: std::ops::RangeInclusive<usize>,
    family: StencilFamily,
) -> Result<Study> {
    let base = generate_test_mesh(kind);
    let cache = precompute_tables(family);
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    let mut failure = None;
    for r in refinements {
        let outcome = refine_times(&base, r)
            .and_then(|mesh| solve_problem(problem, &mesh, family, &cache).map(|u| (mesh, u)));
        match outcome {
            Ok((mesh, u)) => {
                levels.push(r);
                rows.push(vec![solution_error(&mesh, problem, &u)]);
            }
            Err(e) => {
                if levels.is_empty() {
                    return Err(e);
                }
                failure = Some(e.to_string());
                break;
            }
        }
    }
    if levels.is_empty() {
        return Err(Error::InvalidConfiguration("no levels requested".into()));
    }
    let mut study = finish_study("n", vec!["error".into()], levels, rows, true);
    study.failure = failure;
    Ok(study)
}

/// Spectrum of the upwinded advection operator over interior vertices.
pub struct EigenStudy {
    pub spectrum: Vec<(f64, f64)>,
    pub max_real: f64,
}

impl EigenStudy {
    pub fn csv(&self) -> String {
        let mut out = String::from("real,imag\n");
        for &(re, im) in &self.spectrum {
            out.push_str(&format!("{re:.16e},{im:.16e}\n"));
        }
        out.push_str(&format!("# max_real = {:.6e}\n", self.max_real));
        out
    }
}

pub fn run_eigen_study(kind: MeshKind, refinements: usize) -> Result<EigenStudy> {
    let family = StencilFamily::Compact;
    let base = generate_test_mesh(kind);
    let mesh = refine_times(&base, refinements)?;
    let cache = precompute_tables(family);
    let a = assemble_advection(&mesh, family, &cache, (1.0, 1.0))?;
    let keep: Vec<bool> = (0..mesh.vertex_count())
        .map(|v| !mesh.is_boundary_vertex(v as u32))
        .collect();
    let mut spectrum = eigenvalues(&a, &keep)?;
    spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max_real = spectrum.iter().map(|&(re, _)| re).fold(f64::NEG_INFINITY, f64::max);
    if max_real >= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "upwinded spectrum reaches the right half-plane: max Re = {max_real:.3e}"
        )));
    }
    Ok(EigenStudy { spectrum, max_real })
}
