//! Single-vector reconstruction from congruences modulo integer matrices.

use crate::error::{Error, Result};
use crate::exactint::{snf, solve_with_snf, SnfResult};
use crate::lattice::{lcrm, Reducer};
use crate::matrix::{Matrix, Vector};
use crate::scalar::IntScalar;

/// `f ≡ residue (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence<T> {
    modulus: Matrix<T>,
    residue: Vector<T>,
}

impl<T: IntScalar> Congruence<T> {
    /// Fails unless the modulus is non-singular and `residue ∈ N(modulus)`.
    pub fn new(modulus: Matrix<T>, residue: Vector<T>) -> Result<Self> {
        let red = Reducer::new(&modulus)?;
        if residue.dim() != modulus.rows() {
            return Err(Error::DimensionMismatch { expected: modulus.rows(), found: residue.dim() });
        }
        if !red.in_fpd(&residue) {
            return Err(Error::InvalidInput(format!(
                "residue {residue} is not in the fundamental parallelepiped of {modulus}"
            )));
        }
        Ok(Congruence { modulus, residue })
    }

    pub fn modulus(&self) -> &Matrix<T> {
        &self.modulus
    }

    pub fn residue(&self) -> &Vector<T> {
        &self.residue
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtSolution<T> {
    /// The unique solution inside `N(combined_modulus)`.
    pub value: Vector<T>,
    /// Canonical lcrm of every modulus in the system.
    pub combined_modulus: Matrix<T>,
}

pub fn merge_pair<T: IntScalar>(a: &Congruence<T>, b: &Congruence<T>) -> Result<Congruence<T>> {
    let n = a.modulus.rows();
    if b.modulus.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.modulus.rows() });
    }
    let step = MergeStep::new(&a.modulus, &b.modulus)?;
    let residue = step.merge(&a.residue, &b.residue).ok_or(Error::NoSolution)?;
    Ok(Congruence { modulus: step.reducer.modulus().clone(), residue })
}

/// Everything needed to merge residues modulo `A` and `B` into one
/// residue modulo their canonical lcrm.
#[derive(Clone, Debug)]
struct MergeStep<T> {
    a: Matrix<T>,
    block: SnfResult<T>,
    reducer: Reducer<T>,
}

impl<T: IntScalar> MergeStep<T> {
    fn new(a: &Matrix<T>, b: &Matrix<T>) -> Result<Self> {
        let block = snf(&a.hstack(&(-b))?);
        let reducer = Reducer::new(&lcrm(&[a.clone(), b.clone()])?)?;
        Ok(MergeStep { a: a.clone(), block, reducer })
    }

    /// Solves `A·n1 − B·n2 = rb − ra` and returns `rem(A·n1 + ra, R)`.
    fn merge(&self, ra: &Vector<T>, rb: &Vector<T>) -> Option<Vector<T>> {
        let n = self.a.rows();
        let z = solve_with_snf(&self.block, &(rb - ra))?;
        let n1 = Vector::new(z.entries()[..n].to_vec());
        Some(self.reducer.remainder(&(&self.a.mul_vec(&n1) + ra)))
    }
}

/// A fixed list of moduli with every intermediate lcrm and Smith form
/// precomputed, for solving many systems over the same moduli.
#[derive(Clone, Debug)]
pub struct CrtPlan<T> {
    dim: usize,
    first: Reducer<T>,
    steps: Vec<MergeStep<T>>,
}

impl<T: IntScalar> CrtPlan<T> {
    pub fn new(moduli: &[Matrix<T>]) -> Result<Self> {
        let (first, rest) = moduli
            .split_first()
            .ok_or_else(|| Error::InvalidInput("empty congruence system".into()))?;
        first.ensure_square()?;
        let dim = first.rows();
        let mut acc = lcrm(std::slice::from_ref(first))?;
        let first = Reducer::new(&acc)?;
        let mut steps = Vec::with_capacity(rest.len());
        for m in rest {
            m.ensure_square()?;
            if m.rows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.rows() });
            }
            let step = MergeStep::new(&acc, m)?;
            acc = step.reducer.modulus().clone();
            steps.push(step);
        }
        Ok(CrtPlan { dim, first, steps })
    }

    pub fn combined_modulus(&self) -> &Matrix<T> {
        self.steps.last().map_or(self.first.modulus(), |s| s.reducer.modulus())
    }

    /// Solves `f ≡ residues[j] (mod M_j)`, one residue per modulus.
    pub fn solve(&self, residues: &[Vector<T>]) -> Result<CrtSolution<T>> {
        if residues.len() != self.steps.len() + 1 {
            return Err(Error::DimensionMismatch { expected: self.steps.len() + 1, found: residues.len() });
        }
        if let Some(r) = residues.iter().find(|r| r.dim() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: r.dim() });
        }
        let mut acc = self.first.remainder(&residues[0]);
        for (step, r) in self.steps.iter().zip(&residues[1..]) {
            acc = step.merge(&acc, r).ok_or(Error::NoSolution)?;
        }
        Ok(CrtSolution { value: acc, combined_modulus: self.combined_modulus().clone() })
    }
}

/// Solves the system by folding [`merge_pair`] over it in input order.
pub fn solve<T: IntScalar>(system: &[Congruence<T>]) -> Result<CrtSolution<T>> {
    let moduli: Vec<Matrix<T>> = system.iter().map(|c| c.modulus.clone()).collect();
    let residues: Vec<Vector<T>> = system.iter().map(|c| c.residue.clone()).collect();
    CrtPlan::new(&moduli)?.solve(&residues)
}
