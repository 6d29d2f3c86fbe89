//! Lattices generated by integer matrices, their fundamental parallelepipeds
//! and the vector remainder operator.

use crate::error::{Error, Result};
use crate::exactint::{adjugate, det, hnf, integer_kernel, snf, unimodular_inverse};
use crate::matrix::{Matrix, Vector};
use crate::scalar::IntScalar;

/// `LAT(M) = { M·n : n ∈ Z^D }`, stored by its canonical Hermite basis so
/// that `==` is lattice equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice<T> {
    basis: Matrix<T>,
}

impl<T: IntScalar> Lattice<T> {
    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Absolute determinant of the basis: the index of the lattice in `Z^D`.
    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, i| acc * self.basis[(i, i)].clone())
    }
}

pub fn lattice_of<T: IntScalar>(m: &Matrix<T>) -> Result<Lattice<T>> {
    Ok(Lattice { basis: hnf(m)?.hnf })
}

pub fn lattice_equal<T: IntScalar>(a: &Lattice<T>, b: &Lattice<T>) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    Ok(a == b)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// True iff `adj(m)·v ≡ 0 (mod det m)`, i.e. `m⁻¹v` is integral.
fn divides<T: IntScalar>(adj: &Matrix<T>, d: &T, v: &Vector<T>) -> bool {
    adj.mul_vec(v).iter().all(|x| x.is_multiple_of(d))
}

pub fn contains<T: IntScalar>(l: &Lattice<T>, v: &Vector<T>) -> Result<bool> {
    check_dim(l.dim(), v.dim())?;
    // The basis is lower triangular: forward substitution is exact.
    let mut rest = v.clone().into_entries();
    for i in 0..l.dim() {
        let (q, r) = rest[i].div_rem(&l.basis[(i, i)]);
        if !r.is_zero() {
            return Ok(false);
        }
        for (k, x) in rest.iter_mut().enumerate().skip(i) {
            *x = x.clone() - q.clone() * l.basis[(k, i)].clone();
        }
    }
    Ok(true)
}

pub fn intersect<T: IntScalar>(a: &Lattice<T>, b: &Lattice<T>) -> Result<Lattice<T>> {
    check_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let block = a.basis.hstack(&(-&b.basis))?;
    let kernel = integer_kernel(&block);
    let x_parts: Vec<Vector<T>> = kernel
        .iter()
        .map(|z| Vector::new(z.entries()[..n].to_vec()))
        .collect();
    let x = Matrix::from_columns(&x_parts)?;
    lattice_of(&(&a.basis * &x))
}

/// Canonical least common right multiple of the moduli.
pub fn lcrm<T: IntScalar>(moduli: &[Matrix<T>]) -> Result<Matrix<T>> {
    let (first, rest) = moduli
        .split_first()
        .ok_or_else(|| Error::InvalidInput("lcrm of an empty list".into()))?;
    first.ensure_square()?;
    let mut acc = lattice_of(first)?;
    for m in rest {
        m.ensure_square()?;
        check_dim(acc.dim(), m.rows())?;
        acc = intersect(&acc, &lattice_of(m)?)?;
    }
    Ok(acc.basis)
}

/// True iff `candidate` generates the same lattice as the canonical lcrm.
pub fn is_lcrm<T: IntScalar>(candidate: &Matrix<T>, moduli: &[Matrix<T>]) -> Result<bool> {
    candidate.ensure_square()?;
    let canonical = lattice_of(&lcrm(moduli)?)?;
    check_dim(canonical.dim(), candidate.rows())?;
    match lattice_of(candidate) {
        Ok(l) => Ok(l == canonical),
        Err(Error::SingularMatrix) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `f = modulus·quotient + remainder` with `remainder ∈ N(modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionResult<T> {
    pub quotient: Vector<T>,
    pub remainder: Vector<T>,
}

/// Precomputed adjugate and determinant of a modulus, for repeated
/// remainders and membership tests against the same matrix.
#[derive(Clone, Debug)]
pub struct Reducer<T> {
    modulus: Matrix<T>,
    adj: Matrix<T>,
    det: T,
}

impl<T: IntScalar> Reducer<T> {
    pub fn new(modulus: &Matrix<T>) -> Result<Self> {
        modulus.ensure_square()?;
        let d = det(modulus);
        if d.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(Reducer { modulus: modulus.clone(), adj: adjugate(modulus), det: d })
    }

    pub fn modulus(&self) -> &Matrix<T> {
        &self.modulus
    }

    pub fn abs_det(&self) -> T {
        self.det.abs()
    }

    /// `|det|·M⁻¹·v`, sign-normalised so the scale factor is positive.
    fn scaled_coords(&self, v: &Vector<T>) -> Vector<T> {
        let c = self.adj.mul_vec(v);
        if self.det.is_negative() {
            -&c
        } else {
            c
        }
    }

    pub fn remainder(&self, f: &Vector<T>) -> Vector<T> {
        assert_eq!(f.dim(), self.modulus.rows(), "vector dimension mismatch");
        let ad = self.abs_det();
        let frac = Vector::new(self.scaled_coords(f).iter().map(|x| x.mod_floor(&ad)).collect());
        let scaled = self.modulus.mul_vec(&frac);
        Vector::new(scaled.iter().map(|x| x.clone() / ad.clone()).collect())
    }

    pub fn divide(&self, f: &Vector<T>) -> DivisionResult<T> {
        let remainder = self.remainder(f);
        let diff = f - &remainder;
        let quotient = Vector::new(
            self.adj.mul_vec(&diff).iter().map(|x| x.clone() / self.det.clone()).collect(),
        );
        DivisionResult { quotient, remainder }
    }

    /// True iff `p ∈ N(modulus)`, i.e. `M⁻¹p ∈ [0,1)^D`.
    pub fn in_fpd(&self, p: &Vector<T>) -> bool {
        let ad = self.abs_det();
        p.dim() == self.modulus.rows()
            && self.scaled_coords(p).iter().all(|x| !x.is_negative() && *x < ad)
    }

    pub fn in_lattice(&self, v: &Vector<T>) -> bool {
        divides(&self.adj, &self.det, v)
    }
}

pub fn vector_remainder<T: IntScalar>(f: &Vector<T>, m: &Matrix<T>) -> Result<DivisionResult<T>> {
    let r = Reducer::new(m)?;
    check_dim(m.rows(), f.dim())?;
    Ok(r.divide(f))
}

/// True iff `2v ∈ LAT(m)`.
pub fn in_half_lattice<T: IntScalar>(v: &Vector<T>, m: &Matrix<T>) -> Result<bool> {
    let r = Reducer::new(m)?;
    check_dim(m.rows(), v.dim())?;
    Ok(r.in_lattice(&v.scale(&T::two())))
}

/// True iff `v − s ∈ l` for some shift `s`.
pub fn in_shifted_lattice_sum<'a, T: IntScalar>(
    v: &Vector<T>,
    l: &Lattice<T>,
    shifts: impl IntoIterator<Item = &'a Vector<T>>,
) -> bool {
    shifts
        .into_iter()
        .any(|s| s.dim() == v.dim() && contains(l, &(v - s)).unwrap_or(false))
}

/// The fundamental parallelepiped `N(M)`: the `|det M|` integer points
/// `M·x` with `x ∈ [0,1)^D`.
#[derive(Clone, Debug)]
pub struct Fpd<T> {
    reducer: Reducer<T>,
    /// Inverse of the Smith left transform; its columns map Smith
    /// coordinates back to representatives.
    left_inv: Matrix<T>,
    factors: Vec<T>,
}

pub fn fpd<T: IntScalar>(m: &Matrix<T>) -> Result<Fpd<T>> {
    let reducer = Reducer::new(m)?;
    let s = snf(m);
    let left_inv = unimodular_inverse(&s.left)?;
    Ok(Fpd { reducer, left_inv, factors: s.invariant_factors() })
}

impl<T: IntScalar> Fpd<T> {
    pub fn modulus(&self) -> &Matrix<T> {
        self.reducer.modulus()
    }

    pub fn size(&self) -> T {
        self.reducer.abs_det()
    }

    pub fn contains(&self, p: &Vector<T>) -> bool {
        self.reducer.in_fpd(p)
    }

    pub fn reducer(&self) -> &Reducer<T> {
        &self.reducer
    }

    /// Every point of `N(M)`, ordered lexicographically by Smith
    /// coordinates (the first coordinate varies slowest).
    pub fn points(&self) -> FpdPoints<'_, T> {
        FpdPoints { fpd: self, next: Some(vec![T::zero(); self.factors.len()]) }
    }

    /// Points sorted lexicographically by their own coordinates.
    pub fn sorted_points(&self) -> Vec<Vector<T>> {
        let mut pts: Vec<_> = self.points().collect();
        pts.sort();
        pts
    }
}

pub struct FpdPoints<'a, T> {
    fpd: &'a Fpd<T>,
    next: Option<Vec<T>>,
}

impl<T: IntScalar> Iterator for FpdPoints<'_, T> {
    type Item = Vector<T>;

    fn next(&mut self) -> Option<Vector<T>> {
        let y = self.next.take()?;
        let rep = self.fpd.left_inv.mul_vec(&Vector::new(y.clone()));
        let point = self.fpd.reducer.remainder(&rep);

        let mut succ = y;
        let mut carry = true;
        for i in (0..succ.len()).rev() {
            succ[i] = succ[i].clone() + T::one();
            if succ[i] < self.fpd.factors[i] {
                carry = false;
                break;
            }
            succ[i] = T::zero();
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(point)
    }
}
