//! Reconstruction of two unknown vectors when their difference is known to
//! satisfy a lattice condition, which recovers the full range `N(R)`.

mod onedim;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lattice::{in_shifted_lattice_sum, is_lcrm, lattice_of, lcrm, Lattice, Reducer};
use crate::matrix::{Matrix, Vector};
use crate::mdcrt::CrtPlan;
use crate::multivec::ModuliSet;
use crate::scalar::IntScalar;

pub use onedim::{onedim_condition_set, onedim_prior_sets, OneDimProblem, PriorSets};

/// Residue sets `{v_j1, v_j2}` of two unknown vectors.
#[derive(Clone, Debug)]
pub struct PairSystem<T> {
    ms: ModuliSet<T>,
    sets: Vec<Vec<Vector<T>>>,
}

impl<T: IntScalar> PairSystem<T> {
    /// Validates each set: one or two distinct residues inside `N(M_j)`.
    pub fn new(ms: ModuliSet<T>, sets: Vec<Vec<Vector<T>>>) -> Result<Self> {
        if sets.len() != ms.gamma() {
            return Err(Error::DimensionMismatch { expected: ms.gamma(), found: sets.len() });
        }
        for (j, set) in sets.iter().enumerate() {
            let distinct = set.iter().collect::<BTreeSet<_>>().len();
            if set.is_empty() || set.len() > 2 || distinct != set.len() {
                return Err(Error::InvalidInput(format!("residue set {j} must hold one or two distinct residues")));
            }
            for r in set {
                if r.dim() != ms.dim() {
                    return Err(Error::DimensionMismatch { expected: ms.dim(), found: r.dim() });
                }
                if !ms.reducer(j).in_fpd(r) {
                    return Err(Error::InvalidInput(format!(
                        "residue {r} of set {j} is outside the fundamental parallelepiped of {}",
                        ms.modulus(j)
                    )));
                }
            }
        }
        Ok(PairSystem { ms, sets })
    }

    /// Residue sets of `f1` and `f2`.
    pub fn generate(ms: ModuliSet<T>, f1: &Vector<T>, f2: &Vector<T>) -> Result<Self> {
        let sets = (0..ms.gamma())
            .map(|j| {
                let a = ms.reducer(j).remainder(f1);
                let b = ms.reducer(j).remainder(f2);
                if a == b {
                    vec![a]
                } else {
                    vec![a, b]
                }
            })
            .collect();
        Self::new(ms, sets)
    }

    pub fn moduli(&self) -> &ModuliSet<T> {
        &self.ms
    }

    pub fn sets(&self) -> &[Vec<Vector<T>>] {
        &self.sets
    }
}

/// `d1 = rem(v1 − v2, M_j)` and `d2 = rem(v2 − v1, M_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferencePair<T> {
    pub d1: Vector<T>,
    pub d2: Vector<T>,
}

impl<T: IntScalar> DifferencePair<T> {
    pub fn of(reducer: &Reducer<T>, v1: &Vector<T>, v2: &Vector<T>) -> Self {
        DifferencePair { d1: reducer.remainder(&(v1 - v2)), d2: reducer.remainder(&(v2 - v1)) }
    }

    pub fn contains(&self, d: &Vector<T>) -> bool {
        self.d1 == *d || self.d2 == *d
    }
}

/// `⋂_j N(M_j)`, sorted.
pub fn common_difference_set<T: IntScalar>(ms: &ModuliSet<T>) -> Vec<Vector<T>> {
    let smallest = (0..ms.gamma())
        .min_by(|&a, &b| ms.reducer(a).abs_det().cmp(&ms.reducer(b).abs_det()))
        .expect("at least one modulus");
    let f = crate::lattice::fpd(ms.modulus(smallest)).expect("moduli are non-singular");
    let mut pts: Vec<_> = f
        .points()
        .filter(|p| (0..ms.gamma()).all(|j| ms.reducer(j).in_fpd(p)))
        .collect();
    pts.sort();
    pts
}

/// The pair condition with `LAT(R)` and `⋂ N(M_j)` computed once, for
/// sweeps over many differences.
#[derive(Clone, Debug)]
pub struct ConditionChecker<T> {
    ms: ModuliSet<T>,
    lattice: Lattice<T>,
    shifts: Vec<Vector<T>>,
}

impl<T: IntScalar> ConditionChecker<T> {
    pub fn new(ms: &ModuliSet<T>) -> Result<Self> {
        let lattice = lattice_of(&lcrm(&ms.moduli())?)?;
        Ok(ConditionChecker { ms: ms.clone(), lattice, shifts: common_difference_set(ms) })
    }

    /// True iff `d` or `−d` lies in `LAT(R) + ⋂ N(M_j)` and `d` avoids
    /// every half lattice `{v : 2v ∈ LAT(M_j)}`.
    pub fn check(&self, d: &Vector<T>) -> bool {
        let in_sum = in_shifted_lattice_sum(d, &self.lattice, &self.shifts)
            || in_shifted_lattice_sum(&-d, &self.lattice, &self.shifts);
        in_sum && !self.in_some_half_lattice(d)
    }

    fn in_some_half_lattice(&self, d: &Vector<T>) -> bool {
        let twice = d.scale(&T::two());
        (0..self.ms.gamma()).any(|j| self.ms.reducer(j).in_lattice(&twice))
    }
}

pub fn check_condition<T: IntScalar>(ms: &ModuliSet<T>, d: &Vector<T>) -> bool {
    ConditionChecker::new(ms).is_ok_and(|c| c.check(d))
}

/// True iff `f1` and `f2` have different residues modulo every `M_j`.
pub fn distinct_in_all_sets<T: IntScalar>(ms: &ModuliSet<T>, f1: &Vector<T>, f2: &Vector<T>) -> bool {
    (0..ms.gamma()).all(|j| ms.reducer(j).remainder(f1) != ms.reducer(j).remainder(f2))
}

/// True iff `rem(r1 − r2, M_j) ≠ rem(r2 − r1, M_j)` for every `j`, where
/// `r_i` are the residues of `f_i`.
pub fn asymmetric_difference<T: IntScalar>(ms: &ModuliSet<T>, f1: &Vector<T>, f2: &Vector<T>) -> bool {
    (0..ms.gamma()).all(|j| {
        let red = ms.reducer(j);
        let pair = DifferencePair::of(red, &red.remainder(f1), &red.remainder(f2));
        pair.d1 != pair.d2
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReconstruction<T> {
    /// The difference remainder shared by every set.
    pub d_star: Vector<T>,
    /// Both vectors inside `N(r)`, ordered so that `vectors[0] − vectors[1]`
    /// leaves remainder `d_star` modulo every `M_j`.
    pub vectors: [Vector<T>; 2],
}

/// Recovers `{f1, f2} ⊆ N(r)` from their residue sets, where `r` is any
/// lcrm of the moduli.
///
/// When several differences are common to every set the smallest is used;
/// any of them pairs the residues into the same two vectors.
pub fn reconstruct_pair<T: IntScalar>(ps: &PairSystem<T>, r: &Matrix<T>) -> Result<PairReconstruction<T>> {
    let ms = &ps.ms;
    let moduli = ms.moduli();
    if !r.is_square() || r.rows() != ms.dim() || !is_lcrm(r, &moduli)? {
        return Err(Error::InvalidInput(format!("{r} is not an lcrm of the moduli")));
    }
    if ps.sets.iter().any(|s| s.len() != 2) {
        return Err(Error::NoCommonDifference);
    }

    let diffs: Vec<DifferencePair<T>> = ps
        .sets
        .iter()
        .enumerate()
        .map(|(j, s)| DifferencePair::of(ms.reducer(j), &s[0], &s[1]))
        .collect();
    let d_star = [&diffs[0].d1, &diffs[0].d2]
        .into_iter()
        .filter(|d| diffs.iter().all(|p| p.contains(d)))
        .min()
        .cloned()
        .ok_or(Error::NoCommonDifference)?;

    let (mut first, mut second) = (Vec::new(), Vec::new());
    for (s, p) in ps.sets.iter().zip(&diffs) {
        if p.d1 == d_star {
            first.push(s[0].clone());
            second.push(s[1].clone());
        } else {
            first.push(s[1].clone());
            second.push(s[0].clone());
        }
    }
    let plan = CrtPlan::new(&moduli)?;
    let target = Reducer::new(r)?;
    let f1 = target.remainder(&plan.solve(&first)?.value);
    let f2 = target.remainder(&plan.solve(&second)?.value);
    Ok(PairReconstruction { d_star, vectors: [f1, f2] })
}
