//! Exact integer linear algebra: determinant, adjugate, Hermite and Smith
//! normal forms, integer kernels and integer linear systems.
//!
//! Everything here is fraction-free. The Hermite form is the column-style
//! lower-triangular one: positive diagonal, and every entry left of a
//! diagonal pivot reduced into `[0, pivot)`. Two non-singular matrices
//! generate the same lattice iff their Hermite forms are identical.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::{ext_gcd, IntScalar};

/// Hermite normal form with the unimodular column transform,
/// `input · transform = hnf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfResult<T> {
    pub hnf: Matrix<T>,
    pub transform: Matrix<T>,
}

/// Smith normal form, `left · input · right = snf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult<T> {
    pub snf: Matrix<T>,
    pub left: Matrix<T>,
    pub right: Matrix<T>,
}

impl<T: IntScalar> SnfResult<T> {
    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        let n = self.snf.rows().min(self.snf.cols());
        (0..n).take_while(|&i| !self.snf[(i, i)].is_zero()).count()
    }

    pub fn invariant_factors(&self) -> Vec<T> {
        (0..self.rank()).map(|i| self.snf[(i, i)].clone()).collect()
    }
}

/// Determinant by Bareiss fraction-free elimination.
///
/// Panics if `m` is not square.
pub fn det<T: IntScalar>(m: &Matrix<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n.saturating_sub(1) {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                Some(i) => {
                    a.swap_rows(k, i);
                    negate = !negate;
                }
                None => return T::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                a[(i, j)] = v / prev.clone();
            }
        }
        prev = a[(k, k)].clone();
    }
    let d = a[(n - 1, n - 1)].clone();
    if negate {
        -d
    } else {
        d
    }
}

fn minor<T: IntScalar>(m: &Matrix<T>, skip_row: usize, skip_col: usize) -> Matrix<T> {
    let n = m.rows();
    let data = (0..n)
        .filter(|&i| i != skip_row)
        .flat_map(|i| (0..n).filter(move |&j| j != skip_col).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].clone())
        .collect();
    Matrix::new(n - 1, n - 1, data).expect("minor of a matrix larger than 1x1")
}

/// Classical adjugate (transposed cofactor matrix): `m · adj(m) = det(m) · I`.
pub fn adjugate<T: IntScalar>(m: &Matrix<T>) -> Matrix<T> {
    assert!(m.is_square(), "adjugate of a non-square matrix");
    let n = m.rows();
    if n == 1 {
        return Matrix::identity(1);
    }
    let mut adj = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(m, i, j));
            adj[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}

pub fn is_unimodular<T: IntScalar>(m: &Matrix<T>) -> bool {
    m.is_square() && det(m).abs().is_one()
}

/// Inverse of a unimodular matrix (`adj · det`, since `det = ±1`).
pub fn unimodular_inverse<T: IntScalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    m.ensure_square()?;
    let d = det(m);
    if !d.abs().is_one() {
        return Err(Error::InvalidInput("matrix is not unimodular".into()));
    }
    Ok(adjugate(m).scale(&d))
}

/// Column-style Hermite normal form of a non-singular square matrix.
pub fn hnf<T: IntScalar>(m: &Matrix<T>) -> Result<HnfResult<T>> {
    m.ensure_square()?;
    let n = m.rows();
    let mut h = m.clone();
    let mut u = Matrix::identity(n);
    for i in 0..n {
        // Fold every entry right of the diagonal in row i into column i.
        for j in i + 1..n {
            if h[(i, j)].is_zero() {
                continue;
            }
            let a = h[(i, i)].clone();
            let b = h[(i, j)].clone();
            let (g, x, y) = ext_gcd(&a, &b);
            let bg = b / g.clone();
            let ag = a / g;
            // [x  -b/g]
            // [y   a/g]  has determinant 1.
            h.combine_cols(i, j, &x, &y, &-bg.clone(), &ag);
            u.combine_cols(i, j, &x, &y, &-bg, &ag);
        }
        if h[(i, i)].is_zero() {
            return Err(Error::SingularMatrix);
        }
        if h[(i, i)].is_negative() {
            h.negate_col(i);
            u.negate_col(i);
        }
        let pivot = h[(i, i)].clone();
        for j in 0..i {
            let q = h[(i, j)].div_floor(&pivot);
            if !q.is_zero() {
                h.add_col_multiple(j, i, &-q.clone());
                u.add_col_multiple(j, i, &-q);
            }
        }
    }
    Ok(HnfResult { hnf: h, transform: u })
}

fn min_abs_nonzero<T: IntScalar>(
    s: &Matrix<T>,
    cells: impl Iterator<Item = (usize, usize)>,
) -> Option<(usize, usize)> {
    cells
        .filter(|&c| !s[c].is_zero())
        .min_by(|&a, &b| s[a].abs().cmp(&s[b].abs()))
}

/// Smith normal form of an arbitrary (possibly rectangular or singular)
/// integer matrix.
pub fn snf<T: IntScalar>(m: &Matrix<T>) -> SnfResult<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = m.clone();
    let mut left = Matrix::identity(rows);
    let mut right = Matrix::identity(cols);

    for t in 0..rows.min(cols) {
        let region = (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j)));
        let Some((pi, pj)) = min_abs_nonzero(&s, region) else {
            break;
        };
        s.swap_rows(t, pi);
        left.swap_rows(t, pi);
        s.swap_cols(t, pj);
        right.swap_cols(t, pj);

        loop {
            let cross = (t..rows).map(|i| (i, t)).chain((t + 1..cols).map(|j| (t, j)));
            let (pi, pj) = min_abs_nonzero(&s, cross).expect("pivot cross holds a nonzero entry");
            s.swap_rows(t, pi);
            left.swap_rows(t, pi);
            s.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let pivot = s[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = s[(i, t)].div_floor(&pivot);
                if !q.is_zero() {
                    s.add_row_multiple(i, t, &-q.clone());
                    left.add_row_multiple(i, t, &-q);
                }
                clean &= s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                let q = s[(t, j)].div_floor(&pivot);
                if !q.is_zero() {
                    s.add_col_multiple(j, t, &-q.clone());
                    right.add_col_multiple(j, t, &-q);
                }
                clean &= s[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // Divisibility chain: pull any offending row into row t.
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    s.add_row_multiple(t, i, &T::one());
                    left.add_row_multiple(t, i, &T::one());
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            left.negate_row(t);
        }
    }
    SnfResult { snf: s, left, right }
}

/// Basis of the integer null space `{z : m·z = 0}`.
///
/// The basis is saturated: it spans every integer solution, not just a
/// finite-index sublattice of them.
pub fn integer_kernel<T: IntScalar>(m: &Matrix<T>) -> Vec<Vector<T>> {
    let f = snf(m);
    (f.rank()..m.cols()).map(|j| f.right.column(j)).collect()
}

/// One integer solution of `m·x = b`, or `None` when none exists.
pub fn solve_integer_system<T: IntScalar>(m: &Matrix<T>, b: &Vector<T>) -> Result<Option<Vector<T>>> {
    if b.dim() != m.rows() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: b.dim() });
    }
    Ok(solve_with_snf(&snf(m), b))
}

pub(crate) fn solve_with_snf<T: IntScalar>(f: &SnfResult<T>, b: &Vector<T>) -> Option<Vector<T>> {
    let c = f.left.mul_vec(b);
    let rank = f.rank();
    if c.iter().skip(rank).any(|x| !x.is_zero()) {
        return None;
    }
    let mut y = Vec::with_capacity(f.right.rows());
    for i in 0..f.right.rows() {
        if i < rank {
            let (q, r) = c[i].div_rem(&f.snf[(i, i)]);
            if !r.is_zero() {
                return None;
            }
            y.push(q);
        } else {
            y.push(T::zero());
        }
    }
    Some(f.right.mul_vec(&Vector::new(y)))
}
