//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Stencil weight tables are small (at most ~21 unknowns) and their entries
//! are rational numbers. Solving the defining systems exactly removes any
//! doubt about which weights a table contains; conversion to `f64` happens
//! once, at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

#[cfg_attr(not(test), allow(dead_code))]
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `base^exp` for integer exponents >= 0.
pub fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from_integer(acc)
}

pub fn to_f64(x: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(x).expect("rational out of f64 range")
}

/// Solves the square system `a x = b` by Gaussian elimination with exact
/// arithmetic. Returns `None` if the matrix is singular.
pub fn solve_square(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = a.len();
    assert!(a.iter().all(|row| row.len() == n));
    assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &factor * &b[col];
            b[r] -= sub;
        }
    }
    Some(
        (0..n)
            .map(|i| &b[i] / &a[i][i])
            .collect(),
    )
}

/// Minimum-norm solution of a (possibly overdetermined but consistent)
/// system `a w = b`. Returns `None` if the system is inconsistent.
///
/// Dependent constraint rows are eliminated first; the minimum-norm solution
/// on the independent rows `A_r` is `A_r^T (A_r A_r^T)^{-1} b_r`.
pub fn solve_min_norm(a: Vec<Vec<Rat>>, b: Vec<Rat>) -> Option<Vec<Rat>> {
    let m = a.len();
    assert_eq!(b.len(), m);
    let n = if m == 0 { return None } else { a[0].len() };

    // Row reduction on [A | b] keeping track of the original independent rows.
    let mut work: Vec<(Vec<Rat>, Rat)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    let mut independent: Vec<usize> = Vec::new();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (work row, col)
    let mut next_row = 0usize;
    for col in 0..n {
        let Some(p) = (next_row..m).find(|&r| !work[r].0[col].is_zero()) else {
            continue;
        };
        work.swap(next_row, p);
        independent.push(next_row);
        pivots.push((next_row, col));
        let pv = work[next_row].0[col].clone();
        for r in (next_row + 1)..m {
            if work[r].0[col].is_zero() {
                continue;
            }
            let factor = &work[r].0[col] / &pv;
            for c in col..n {
                let sub = &factor * &work[next_row].0[c];
                work[r].0[c] -= sub;
            }
            let sub = &factor * &work[next_row].1;
            work[r].1 -= sub;
        }
        next_row += 1;
        if next_row == m {
            break;
        }
    }
    // Any remaining row must have been reduced to 0 = 0, else inconsistent.
    for r in next_row..m {
        if work[r].0.iter().all(Zero::is_zero) && !work[r].1.is_zero() {
            return None;
        }
    }

    // Rebuild the independent subsystem from the *original* rows: the row
    // space is unchanged, so min-norm on the reduced rows equals min-norm on
    // the original consistent system. Using reduced rows directly is fine.
    let rows: Vec<Vec<Rat>> = independent.iter().map(|&r| work[r].0.clone()).collect();
    let rhs: Vec<Rat> = independent.iter().map(|&r| work[r].1.clone()).collect();
    let k = rows.len();
    // Gram matrix G = A_r A_r^T.
    let mut g = vec![vec![Rat::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Rat::zero();
            for c in 0..n {
                s += &rows[i][c] * &rows[j][c];
            }
            g[i][j] = s;
        }
    }
    let y = solve_square(g, rhs)?;
    let mut w = vec![Rat::zero(); n];
    for (i, yi) in y.iter().enumerate() {
        for c in 0..n {
            w[c] += yi * &rows[i][c];
        }
    }
    Some(w)
}

/// Scales a weight vector by the least common multiple of its denominators,
/// producing integer entries with the same direction.
pub fn integerize(w: &[Rat]) -> Vec<Rat> {
    let mut lcm = BigInt::one();
    for x in w {
        let d = x.denom().abs();
        let g = num_integer_gcd(&lcm, &d);
        lcm = &lcm / g * d;
    }
    let f = Rat::from_integer(lcm);
    w.iter().map(|x| x * &f).collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}
