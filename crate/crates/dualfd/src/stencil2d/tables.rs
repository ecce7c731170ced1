//! Unit-step stencil tables per window shape.
//!
//! Tables depend only on the window layout (offset lists, omitted quadrant,
//! evaluation offset), never on vertex positions, so they are computed once
//! per shape in exact rational arithmetic and cached.
//!
//! Row conventions:
//! - full tensor windows: tensor products of 1D stencil rows per axis;
//! - quadrant-omitted windows: pure derivatives use the 1D row along the
//!   axis line when it survives the omission, mixed derivatives use the
//!   minimum-norm weights exact through the highest consistent total
//!   degree (p + 1 when attainable, p otherwise).
//!
//! The compact family scales each 1D factor to integer entries; row scaling
//! of `[Cbar | C]` cancels in the solve.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use super::window::{Quadrant, Window};
use super::{multi_indices, MultiIndex, StencilFamily};
use crate::error::{Error, Result};
use crate::rational::{self, Rat};
use crate::stencil1d;

/// Cache key: everything the table depends on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Signature {
    pub family: StencilFamily,
    pub x_offsets: Vec<i32>,
    pub y_offsets: Vec<i32>,
    pub omit: Option<Quadrant>,
    pub eval: (i32, i32),
}

impl Signature {
    pub fn of(window: &Window, family: StencilFamily) -> Self {
        Self {
            family,
            x_offsets: window.x_offsets.clone(),
            y_offsets: window.y_offsets.clone(),
            omit: window.omit,
            eval: window.eval,
        }
    }
}

/// Precomputed `Cbar`, `C` and factorial diagonal for one window shape.
#[derive(Debug)]
pub(crate) struct Tables {
    pub multi: Vec<MultiIndex>,
    /// Kept offsets in window (y, x)-lex order.
    #[allow(dead_code)]
    pub offsets: Vec<(i32, i32)>,
    #[allow(dead_code)]
    pub eval_col: usize,
    /// p_rows x n unit-step weight rows.
    pub cbar: DMatrix<f64>,
    /// `cbar` with the evaluation column removed.
    pub c: DMatrix<f64>,
    /// Inverse factorial per derivative row (1 / (jx! jy!)).
    pub factorial_inv: DVector<f64>,
}

fn kept_offsets(sig: &Signature) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for &j in &sig.y_offsets {
        for &i in &sig.x_offsets {
            if let Some(q) = sig.omit {
                if q.contains_point(i, j) {
                    continue;
                }
            }
            out.push((i, j));
        }
    }
    out
}

fn axis_row_1d(q: usize, offsets: &[i32], eval: i32, integerize: bool) -> Result<Vec<Rat>> {
    let offs: Vec<i64> = offsets.iter().map(|&o| o as i64).collect();
    let w = stencil1d::weights_rat(q, &offs, eval as i64).ok_or_else(|| {
        Error::NumericalFailure("singular 1D weight system".into())
    })?;
    Ok(if integerize { rational::integerize(&w) } else { w })
}

/// Minimum-norm weights on `points` reproducing the derivative `mi` of all
/// monomials of total degree <= deg at `eval`. None when inconsistent.
fn min_norm_row(
    points: &[(i32, i32)],
    mi: MultiIndex,
    eval: (i32, i32),
    deg: usize,
) -> Option<Vec<Rat>> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for total in 0..=deg {
        for ax in 0..=total {
            let ay = total - ax;
            let row: Vec<Rat> = points
                .iter()
                .map(|&(x, y)| {
                    rational::rat_pow(&rational::rat_int(x as i64), ax)
                        * rational::rat_pow(&rational::rat_int(y as i64), ay)
                })
                .collect();
            a.push(row);
            b.push(
                monomial_partial(ax, mi.jx as usize, eval.0)
                    * monomial_partial(ay, mi.jy as usize, eval.1),
            );
        }
    }
    rational::solve_min_norm(a, b)
}

/// d^q/dt^q (t^m) at integer t.
fn monomial_partial(m: usize, q: usize, t: i32) -> Rat {
    if q > m {
        return Rat::zero();
    }
    let mut coeff = rational::rat_int(1);
    for k in 0..q {
        coeff *= rational::rat_int((m - k) as i64);
    }
    coeff * rational::rat_pow(&rational::rat_int(t as i64), m - q)
}

fn build_tables(sig: &Signature) -> Result<Tables> {
    let p = sig.family.p();
    let multi = multi_indices(p);
    let offsets = kept_offsets(sig);
    let n = offsets.len();
    let col_of = |o: (i32, i32)| offsets.iter().position(|&q| q == o);
    let eval_col = col_of(sig.eval)
        .ok_or_else(|| Error::InvalidConfiguration("evaluation offset omitted".into()))?;

    let mut cbar_rat: Vec<Vec<Rat>> = Vec::with_capacity(multi.len());
    for &mi in &multi {
        let mut row = vec![Rat::zero(); n];
        let full_line_x: bool = sig
            .x_offsets
            .iter()
            .all(|&i| col_of((i, sig.eval.1)).is_some());
        let full_line_y: bool = sig
            .y_offsets
            .iter()
            .all(|&j| col_of((sig.eval.0, j)).is_some());
        if sig.omit.is_none() || (mi.jy == 0 && full_line_x) || (mi.jx == 0 && full_line_y) {
            if sig.omit.is_none() {
                // Tensor product of the two 1D rows.
                let wx = axis_row_1d(mi.jx as usize, &sig.x_offsets, sig.eval.0, sig.family.integerized())?;
                let wy = axis_row_1d(mi.jy as usize, &sig.y_offsets, sig.eval.1, sig.family.integerized())?;
                for (c, &(i, j)) in offsets.iter().enumerate() {
                    let xi = sig.x_offsets.iter().position(|&o| o == i).unwrap();
                    let yi = sig.y_offsets.iter().position(|&o| o == j).unwrap();
                    row[c] = &wx[xi] * &wy[yi];
                }
            } else if mi.jy == 0 {
                let wx = axis_row_1d(mi.jx as usize, &sig.x_offsets, sig.eval.0, sig.family.integerized())?;
                for (xi, &i) in sig.x_offsets.iter().enumerate() {
                    let c = col_of((i, sig.eval.1)).unwrap();
                    row[c] = wx[xi].clone();
                }
            } else {
                let wy = axis_row_1d(mi.jy as usize, &sig.y_offsets, sig.eval.1, sig.family.integerized())?;
                for (yi, &j) in sig.y_offsets.iter().enumerate() {
                    let c = col_of((sig.eval.0, j)).unwrap();
                    row[c] = wy[yi].clone();
                }
            }
        } else {
            // Quadrant-omitted mixed (or clipped pure) derivative row.
            let needed_deg = mi.total() + (p + 1 - mi.total()) - 1; // = p
            let w = min_norm_row(&offsets, mi, sig.eval, p + 1)
                .or_else(|| min_norm_row(&offsets, mi, sig.eval, needed_deg))
                .ok_or_else(|| {
                    Error::InvalidConfiguration(format!(
                        "no stencil of the required accuracy for {mi} on the omitted-quadrant window"
                    ))
                })?;
            row = w;
        }
        cbar_rat.push(row);
    }

    let mut cbar = DMatrix::zeros(multi.len(), n);
    for (r, row) in cbar_rat.iter().enumerate() {
        for (c, val) in row.iter().enumerate() {
            cbar[(r, c)] = rational::to_f64(val);
        }
    }
    let c = cbar.clone().remove_column(eval_col);
    let factorial_inv = DVector::from_iterator(
        multi.len(),
        multi.iter().map(|mi| {
            1.0 / (rational::to_f64(&rational::factorial(mi.jx as usize))
                * rational::to_f64(&rational::factorial(mi.jy as usize)))
        }),
    );
    Ok(Tables {
        multi,
        offsets,
        eval_col,
        cbar,
        c,
        factorial_inv,
    })
}

/// Shared, lazily filled table cache with hit/miss counters.
pub struct TableCache {
    family: StencilFamily,
    map: Mutex<BTreeMap<Signature, Arc<Tables>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl TableCache {
    pub fn family(&self) -> StencilFamily {
        self.family
    }

    pub(crate) fn get(&self, sig: &Signature) -> Result<Arc<Tables>> {
        {
            let map = self.map.lock().unwrap();
            if let Some(t) = map.get(sig) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(Arc::clone(t));
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let t = Arc::new(build_tables(sig)?);
        let mut map = self.map.lock().unwrap();
        Ok(Arc::clone(map.entry(sig.clone()).or_insert(t)))
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

/// Unit-step stencil tables for one window shape: `(Cbar, C, D)` with `C`
/// equal to `Cbar` minus the evaluation column and `D` the inverse
/// factorial diagonal. Points run in (y, x)-lexicographic offset order.
pub fn unit_step_tables(
    family: StencilFamily,
    x_offsets: &[i32],
    y_offsets: &[i32],
    omit: Option<Quadrant>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
    let sig = Signature {
        family,
        x_offsets: x_offsets.to_vec(),
        y_offsets: y_offsets.to_vec(),
        omit,
        eval: (0, 0),
    };
    let t = build_tables(&sig)?;
    Ok((t.cbar.clone(), t.c.clone(), t.factorial_inv.clone()))
}

/// Builds the cache for a family and eagerly fills the shapes that appear
/// on any mesh: all inward shifts and the four quadrant omissions.
pub fn precompute_tables(family: StencilFamily) -> TableCache {
    let cache = TableCache {
        family,
        map: Mutex::new(BTreeMap::new()),
        hits: AtomicUsize::new(0),
        misses: AtomicUsize::new(0),
    };
    let r = family.radius() as i32;
    let shifts: Vec<Vec<i32>> = (0..=2 * r)
        .map(|s| ((-r + s - r)..=(r + s - r)).map(|_| 0).collect::<Vec<i32>>())
        .collect();
    let _ = shifts;
    let mut shapes: Vec<(Vec<i32>, Vec<i32>, Option<Quadrant>)> = Vec::new();
    let offset_range = |lo: i32| (lo..=lo + 2 * r).collect::<Vec<i32>>();
    for xlo in -2 * r..=0 {
        for ylo in -2 * r..=0 {
            shapes.push((offset_range(xlo), offset_range(ylo), None));
        }
    }
    for q in [
        Quadrant::NorthEast,
        Quadrant::NorthWest,
        Quadrant::SouthWest,
        Quadrant::SouthEast,
    ] {
        shapes.push((offset_range(-r), offset_range(-r), Some(q)));
    }
    for (x, y, omit) in shapes {
        let sig = Signature {
            family,
            x_offsets: x,
            y_offsets: y,
            omit,
            eval: (0, 0),
        };
        let _ = cache.get(&sig);
    }
    // Reset counters so that cache statistics reflect use, not warmup.
    cache.hits.store(0, Ordering::Relaxed);
    cache.misses.store(0, Ordering::Relaxed);
    cache
}
