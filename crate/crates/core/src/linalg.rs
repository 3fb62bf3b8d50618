//! Small dense linear algebra over a generic field.
//!
//! Everything here works on `Vec<S>` rows of length 4 or 5 (homogeneous
//! coordinates in RP^3 / RP^4). Rank decisions use column-pivoted elimination
//! with a relative pivot threshold: rows are max-abs normalized up front, so
//! a pivot below `tol` is treated as zero. The exact backend short-circuits
//! the threshold and tests pivots for literal zero.

use crate::error::{GeomError, Result};
use crate::scalar::{max_abs, Scalar, Tol};

pub type Vecn<S> = Vec<S>;
pub type Mat<S> = Vec<Vec<S>>;

pub fn vec_add<S: Scalar>(a: &[S], b: &[S]) -> Vecn<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> Vecn<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn vec_scale<S: Scalar>(s: &S, a: &[S]) -> Vecn<S> {
    a.iter().map(|x| s.clone() * x.clone()).collect()
}

/// a + s*b
pub fn vec_axpy<S: Scalar>(a: &[S], s: &S, b: &[S]) -> Vecn<S> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + s.clone() * y.clone())
        .collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn is_zero_vec<S: Scalar>(v: &[S], tol: Tol) -> bool {
    if S::EXACT {
        v.iter().all(|x| x.is_zero())
    } else {
        max_abs(v).to_f64() <= tol.rel
    }
}

/// Scale a row so its largest-magnitude entry is 1 (sign kept).
/// Zero rows are returned unchanged.
pub fn row_normalize<S: Scalar>(v: &[S]) -> Vecn<S> {
    let m = max_abs(v);
    if m.is_zero() {
        return v.to_vec();
    }
    v.iter().map(|x| x.clone() / m.clone()).collect()
}

fn pivot_is_zero<S: Scalar>(p: &S, tol: Tol) -> bool {
    if S::EXACT {
        p.is_zero()
    } else {
        p.to_f64().abs() <= tol.rel
    }
}

/// Row echelon reduction with column pivoting on max-abs-normalized rows.
///
/// Returns the eliminated rows (nonzero rows first) and the rank. The rows
/// spanned are the same subspace as the input rows.
pub fn row_echelon<S: Scalar>(rows: &[Vecn<S>], tol: Tol) -> (Mat<S>, usize) {
    let mut m: Mat<S> = rows.iter().map(|r| row_normalize(r)).collect();
    let nrows = m.len();
    let ncols = if nrows == 0 { 0 } else { m[0].len() };
    let mut rank = 0;
    for col in 0..ncols {
        // pick the row with the largest entry in this column
        let mut best: Option<(usize, S)> = None;
        for r in rank..nrows {
            let a = m[r][col].abs();
            match &best {
                Some((_, b)) if *b >= a => {}
                _ => best = Some((r, a)),
            }
        }
        let (r, a) = match best {
            Some(x) => x,
            None => break,
        };
        if pivot_is_zero(&a, tol) {
            continue;
        }
        m.swap(rank, r);
        let piv = m[rank][col].clone();
        for r2 in 0..nrows {
            if r2 != rank && !m[r2][col].is_zero() {
                let f = m[r2][col].clone() / piv.clone();
                let neg = -f;
                m[r2] = vec_axpy(&m[r2], &neg, &m[rank]);
                m[r2][col] = S::zero();
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    (m, rank)
}

pub fn rank<S: Scalar>(rows: &[Vecn<S>], tol: Tol) -> usize {
    row_echelon(rows, tol).1
}

/// Basis of the right null space { x : rows * x = 0 }.
pub fn nullspace<S: Scalar>(rows: &[Vecn<S>], tol: Tol) -> Vec<Vecn<S>> {
    let nrows = rows.len();
    let ncols = if nrows == 0 { 0 } else { rows[0].len() };
    let mut m: Mat<S> = rows.iter().map(|r| row_normalize(r)).collect();
    // reduced row echelon form, tracking pivot columns
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let mut best: Option<(usize, S)> = None;
        for r in rank..nrows {
            let a = m[r][col].abs();
            match &best {
                Some((_, b)) if *b >= a => {}
                _ => best = Some((r, a)),
            }
        }
        let (r, a) = match best {
            Some(x) => x,
            None => break,
        };
        if pivot_is_zero(&a, tol) {
            continue;
        }
        m.swap(rank, r);
        let piv = m[rank][col].clone();
        let inv_rows: Vecn<S> = m[rank].iter().map(|x| x.clone() / piv.clone()).collect();
        m[rank] = inv_rows;
        for r2 in 0..nrows {
            if r2 != rank && !m[r2][col].is_zero() {
                let f = m[r2][col].clone();
                let neg = -f;
                m[r2] = vec_axpy(&m[r2], &neg, &m[rank]);
                m[r2][col] = S::zero();
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![S::zero(); ncols];
        v[fc] = S::one();
        for (prow, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[prow][fc].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn mat_vec<S: Scalar>(m: &Mat<S>, v: &[S]) -> Vecn<S> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    let n = a.len();
    let k = b.len();
    let p = b[0].len();
    let mut out = vec![vec![S::zero(); p]; n];
    for i in 0..n {
        for j in 0..p {
            let mut acc = S::zero();
            for t in 0..k {
                acc = acc + a[i][t].clone() * b[t][j].clone();
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn transpose<S: Scalar>(m: &Mat<S>) -> Mat<S> {
    let n = m.len();
    let p = m[0].len();
    (0..p)
        .map(|j| (0..n).map(|i| m[i][j].clone()).collect())
        .collect()
}

pub fn identity<S: Scalar>(n: usize) -> Mat<S> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { S::one() } else { S::zero() })
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free-ish elimination with partial pivoting.
pub fn det<S: Scalar>(m: &Mat<S>, tol: Tol) -> S {
    let n = m.len();
    let mut a: Mat<S> = m.to_vec();
    let mut result = S::one();
    for col in 0..n {
        let mut best: Option<(usize, S)> = None;
        for r in col..n {
            let v = a[r][col].abs();
            match &best {
                Some((_, b)) if *b >= v => {}
                _ => best = Some((r, v)),
            }
        }
        let (r, v) = best.unwrap();
        if pivot_is_zero(&v, tol) && S::EXACT {
            return S::zero();
        }
        if a[r][col].is_zero() {
            return S::zero();
        }
        if r != col {
            a.swap(r, col);
            result = -result;
        }
        let piv = a[col][col].clone();
        result = result * piv.clone();
        for r2 in col + 1..n {
            if !a[r2][col].is_zero() {
                let f = a[r2][col].clone() / piv.clone();
                let neg = -f;
                a[r2] = vec_axpy(&a[r2], &neg, &a[col]);
            }
        }
    }
    result
}

/// Determinant after max-abs normalizing each row: a scale-free residual for
/// coplanarity and concurrency tests.
pub fn normalized_det<S: Scalar>(m: &Mat<S>, tol: Tol) -> S {
    let rows: Mat<S> = m.iter().map(|r| row_normalize(r)).collect();
    det(&rows, tol)
}

/// Inverse; `None` when a pivot falls below the threshold.
pub fn inverse<S: Scalar>(m: &Mat<S>, tol: Tol) -> Option<Mat<S>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut b = identity::<S>(n);
    for col in 0..n {
        let mut best: Option<(usize, S)> = None;
        for r in col..n {
            let v = a[r][col].abs();
            match &best {
                Some((_, bv)) if *bv >= v => {}
                _ => best = Some((r, v)),
            }
        }
        let (r, v) = best.unwrap();
        if pivot_is_zero(&v, tol) {
            return None;
        }
        a.swap(r, col);
        b.swap(r, col);
        let piv = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / piv.clone();
            b[col][j] = b[col][j].clone() / piv.clone();
        }
        for r2 in 0..n {
            if r2 != col && !a[r2][col].is_zero() {
                let f = a[r2][col].clone();
                for j in 0..n {
                    a[r2][j] = a[r2][j].clone() - f.clone() * a[col][j].clone();
                    b[r2][j] = b[r2][j].clone() - f.clone() * b[col][j].clone();
                }
            }
        }
    }
    Some(b)
}

/// Solve m x = rhs for square m. `None` if singular at the tolerance.
pub fn solve<S: Scalar>(m: &Mat<S>, rhs: &[S], tol: Tol) -> Option<Vecn<S>> {
    let inv = inverse(m, tol)?;
    Some(mat_vec(&inv, rhs))
}

/// Homogeneous coordinates of `q` in the span of `basis` (column vectors of
/// length n). Errors if `q` is outside the span or the representation is not
/// unique (rank-deficient basis).
pub fn coords_in_basis<S: Scalar>(basis: &[Vecn<S>], q: &[S], tol: Tol) -> Result<Vecn<S>> {
    let k = basis.len();
    let n = q.len();
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(k + 1);
        for b in basis {
            row.push(b[r].clone());
        }
        row.push(q[r].clone());
        rows.push(row);
    }
    let kernel = nullspace(&rows, tol);
    if kernel.len() != 1 {
        return Err(GeomError::DegenerateSpan);
    }
    let v = &kernel[0];
    if tol.is_zero(&v[k]) || is_zero_vec(&v[..k], tol) {
        return Err(GeomError::DegenerateSpan);
    }
    Ok(v[..k].to_vec())
}

/// Are two nonzero vectors proportional? Cross-product style exact test with
/// relative tolerance for floats.
pub fn proportional<S: Scalar>(a: &[S], b: &[S], tol: Tol) -> bool {
    let an = row_normalize(a);
    let bn = row_normalize(b);
    if is_zero_vec(&an, tol) || is_zero_vec(&bn, tol) {
        return false;
    }
    for i in 0..an.len() {
        for j in (i + 1)..an.len() {
            let r = an[i].clone() * bn[j].clone() - an[j].clone() * bn[i].clone();
            if !tol.is_zero(&r) {
                return false;
            }
        }
    }
    true
}
