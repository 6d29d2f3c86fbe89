//! Reconstruction of several unknown vectors from unordered residue sets,
//! without any prior information about how residues pair up.

mod bound;
mod reconstruct;

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::lattice::{fpd, is_lcrm, lcrm, Reducer};
use crate::matrix::{Matrix, Vector};
use crate::mdcrt::CrtPlan;
use crate::scalar::IntScalar;

pub use bound::crt_invocation_bound;
pub use reconstruct::{reconstruct, AuditEvent, CorrectionStep, ReconstructionOutcome, Verdict};

/// The moduli `M_1..M_γ`, with cached reducers.
#[derive(Clone, Debug)]
pub struct ModuliSet<T> {
    reducers: Vec<Reducer<T>>,
}

impl<T: IntScalar> ModuliSet<T> {
    pub fn new(moduli: Vec<Matrix<T>>) -> Result<Self> {
        let first = moduli
            .first()
            .ok_or_else(|| Error::InvalidInput("at least one modulus is required".into()))?;
        let dim = first.rows();
        let mut reducers = Vec::with_capacity(moduli.len());
        for m in &moduli {
            m.ensure_square()?;
            if m.rows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.rows() });
            }
            reducers.push(Reducer::new(m)?);
        }
        Ok(ModuliSet { reducers })
    }

    pub fn gamma(&self) -> usize {
        self.reducers.len()
    }

    pub fn dim(&self) -> usize {
        self.reducers[0].modulus().rows()
    }

    pub fn modulus(&self, j: usize) -> &Matrix<T> {
        self.reducers[j].modulus()
    }

    pub fn moduli(&self) -> Vec<Matrix<T>> {
        self.reducers.iter().map(|r| r.modulus().clone()).collect()
    }

    pub fn reducer(&self, j: usize) -> &Reducer<T> {
        &self.reducers[j]
    }

    /// `(rem(f, M_1), ..., rem(f, M_γ))`.
    pub fn residues_of(&self, f: &Vector<T>) -> Vec<Vector<T>> {
        self.reducers.iter().map(|r| r.remainder(f)).collect()
    }

    fn check_vector(&self, v: &Vector<T>) -> Result<()> {
        if v.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: v.dim() })
        }
    }
}

/// `γ` unordered residue sets `S_j` and the number `ρ` of unknown vectors.
///
/// Each set keeps its elements in insertion order; that order drives the
/// deterministic choices of the solver but not its result. Equality
/// ignores it.
#[derive(Clone, Debug)]
pub struct ResidueSetSystem<T> {
    sets: Vec<Vec<Vector<T>>>,
    rho: usize,
}

impl<T: IntScalar> ResidueSetSystem<T> {
    /// Validates the sets against the moduli. Repeated elements within a
    /// set collapse to their first occurrence.
    pub fn new(ms: &ModuliSet<T>, sets: Vec<Vec<Vector<T>>>, rho: usize) -> Result<Self> {
        if sets.len() != ms.gamma() {
            return Err(Error::DimensionMismatch { expected: ms.gamma(), found: sets.len() });
        }
        if rho == 0 {
            return Err(Error::InvalidInput("rho must be at least 1".into()));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for (j, set) in sets.into_iter().enumerate() {
            let set: Vec<Vector<T>> = set.into_iter().unique().collect();
            if set.is_empty() || set.len() > rho {
                return Err(Error::InvalidInput(format!(
                    "residue set {j} has {} elements, expected 1..={rho}",
                    set.len()
                )));
            }
            for r in &set {
                ms.check_vector(r)?;
                if !ms.reducer(j).in_fpd(r) {
                    return Err(Error::InvalidInput(format!(
                        "residue {r} of set {j} is outside the fundamental parallelepiped of {}",
                        ms.modulus(j)
                    )));
                }
            }
            clean.push(set);
        }
        Ok(ResidueSetSystem { sets: clean, rho })
    }

    /// Residue sets of distinct vectors; rejects repeats.
    pub fn generate(ms: &ModuliSet<T>, vectors: &[Vector<T>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidInput("at least one vector is required".into()));
        }
        if vectors.iter().collect::<BTreeSet<_>>().len() != vectors.len() {
            return Err(Error::InvalidInput("unknown vectors must be distinct".into()));
        }
        for v in vectors {
            ms.check_vector(v)?;
        }
        let mut sets = vec![Vec::new(); ms.gamma()];
        for v in vectors {
            for (set, r) in sets.iter_mut().zip(ms.residues_of(v)) {
                if !set.contains(&r) {
                    set.push(r);
                }
            }
        }
        Ok(ResidueSetSystem { sets, rho: vectors.len() })
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn gamma(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<Vector<T>>] {
        &self.sets
    }

    pub fn canonical_sets(&self) -> Vec<BTreeSet<Vector<T>>> {
        self.sets.iter().map(|s| s.iter().cloned().collect()).collect()
    }
}

impl<T: IntScalar> PartialEq for ResidueSetSystem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rho == other.rho && self.canonical_sets() == other.canonical_sets()
    }
}

impl<T: IntScalar> Eq for ResidueSetSystem<T> {}

/// `N_η`: the intersection of `N(R_A)` over every size-`η` subset `A`.
///
/// Membership is tested against every `R_A`; the point set itself is only
/// enumerated on request since it can be as large as `|det R|`.
#[derive(Clone, Debug)]
pub struct DeterminableRange<T> {
    eta: usize,
    alpha: usize,
    rho: usize,
    subset_lcrms: BTreeMap<Vec<usize>, Matrix<T>>,
    reducers: Vec<Reducer<T>>,
    subset_plans: Vec<CrtPlan<T>>,
    full_plan: CrtPlan<T>,
}

impl<T: IntScalar> DeterminableRange<T> {
    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    /// The chosen `R_A` for each size-`η` subset (0-based indices).
    pub fn subset_lcrms(&self) -> &BTreeMap<Vec<usize>, Matrix<T>> {
        &self.subset_lcrms
    }

    pub fn subset_lcrm(&self, subset: &[usize]) -> Option<&Matrix<T>> {
        self.subset_lcrms.get(subset)
    }

    pub(crate) fn subset_reducer(&self, index: usize) -> &Reducer<T> {
        &self.reducers[index]
    }

    pub(crate) fn subset_plan(&self, index: usize) -> &CrtPlan<T> {
        &self.subset_plans[index]
    }

    pub(crate) fn full_plan(&self) -> &CrtPlan<T> {
        &self.full_plan
    }

    pub fn contains(&self, p: &Vector<T>) -> bool {
        self.reducers.iter().all(|r| r.in_fpd(p))
    }

    /// Every point of `N_η`, sorted.
    pub fn points(&self) -> Vec<Vector<T>> {
        let smallest = self
            .reducers
            .iter()
            .min_by(|a, b| a.abs_det().cmp(&b.abs_det()))
            .expect("at least one subset");
        let f = fpd(smallest.modulus()).expect("subset lcrm is non-singular");
        let mut pts: Vec<_> = f.points().filter(|p| self.contains(p)).collect();
        pts.sort();
        pts
    }
}

/// Builds `N_η` for `ρ` unknown vectors. `overrides` replaces the canonical
/// lcrm of chosen size-`η` subsets (0-based, ascending indices) by another
/// basis of the same lattice.
pub fn compute_range<T: IntScalar>(
    ms: &ModuliSet<T>,
    rho: usize,
    overrides: Option<&BTreeMap<Vec<usize>, Matrix<T>>>,
) -> Result<DeterminableRange<T>> {
    let gamma = ms.gamma();
    if rho == 0 || rho > gamma {
        return Err(Error::InvalidInput(format!("need 1 <= rho <= gamma = {gamma}, got rho = {rho}")));
    }
    let eta = gamma / rho;
    let alpha = gamma - eta * rho;
    let moduli = ms.moduli();

    if let Some(ov) = overrides {
        for subset in ov.keys() {
            let well_formed = subset.len() == eta
                && subset.windows(2).all(|w| w[0] < w[1])
                && subset.iter().all(|&j| j < gamma);
            if !well_formed {
                return Err(Error::InvalidOverride { subset: subset.clone() });
            }
        }
    }

    let mut subset_lcrms = BTreeMap::new();
    let mut reducers = Vec::new();
    let mut subset_plans = Vec::new();
    for subset in (0..gamma).combinations(eta) {
        let members: Vec<Matrix<T>> = subset.iter().map(|&j| moduli[j].clone()).collect();
        subset_plans.push(CrtPlan::new(&members)?);
        let chosen = match overrides.and_then(|ov| ov.get(&subset)) {
            Some(m) => {
                let valid = m.is_square() && m.rows() == ms.dim() && is_lcrm(m, &members)?;
                if !valid {
                    return Err(Error::InvalidOverride { subset });
                }
                m.clone()
            }
            None => lcrm(&members)?,
        };
        reducers.push(Reducer::new(&chosen)?);
        subset_lcrms.insert(subset, chosen);
    }
    let full_plan = CrtPlan::new(&moduli)?;
    Ok(DeterminableRange { eta, alpha, rho, subset_lcrms, reducers, subset_plans, full_plan })
}

/// True iff the vectors all lie in one `N(M_j)`, or all lie in `N_η`.
pub fn satisfies_recovery_conditions<T: IntScalar>(
    ms: &ModuliSet<T>,
    range: &DeterminableRange<T>,
    vectors: &[Vector<T>],
) -> bool {
    let in_one_fpd = (0..ms.gamma()).any(|j| vectors.iter().all(|v| ms.reducer(j).in_fpd(v)));
    in_one_fpd || vectors.iter().all(|v| range.contains(v))
}

/// True iff `f ∈ N_η` and every residue of `f` belongs to the matching set.
pub fn candidate_valid<T: IntScalar>(
    f: &Vector<T>,
    range: &DeterminableRange<T>,
    system: &ResidueSetSystem<T>,
    ms: &ModuliSet<T>,
) -> bool {
    f.dim() == ms.dim() && range.contains(f) && residue_mismatch(f, system.sets(), ms).is_none()
}

/// First set index whose set does not contain the matching residue of `f`.
pub(crate) fn residue_mismatch<T: IntScalar>(
    f: &Vector<T>,
    sets: &[Vec<Vector<T>>],
    ms: &ModuliSet<T>,
) -> Option<usize> {
    (0..ms.gamma()).find(|&j| !sets[j].contains(&ms.reducer(j).remainder(f)))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn two_vector_range_is_the_box() {
        let ms = moduli(4);
        let r = compute_range(&ms, 2, Some(&two_vector_overrides())).unwrap();
        assert_eq!((r.eta(), r.alpha()), (2, 0));
        assert_eq!(r.points().into_iter().collect::<BTreeSet<_>>(), box_3x9());
    }

    #[test]
    fn three_vector_overrides_give_the_box() {
        let ms = moduli(6);
        let r = compute_range(&ms, 3, Some(&three_vector_overrides())).unwrap();
        assert_eq!((r.eta(), r.alpha()), (2, 0));
        assert_eq!(r.subset_lcrms().len(), 15);
        assert_eq!(r.points().into_iter().collect::<BTreeSet<_>>(), box_3x9());
    }

    #[test]
    fn larger_range_from_other_bases() {
        let ms = moduli(4);
        let mut ov = two_vector_overrides();
        ov.extend(overrides(&[(&[0, 3], [[3, 3], [-20, 28]]), (&[1, 2], [[4, 4], [-15, 21]])]));
        let r = compute_range(&ms, 2, Some(&ov)).unwrap();
        let pts = r.points();
        assert!(pts.len() > 27);
        assert_eq!(pts.len(), 43);
    }

    #[test]
    fn single_vector_range_is_lcrm_fpd() {
        let ms = moduli(4);
        let r = compute_range(&ms, 1, None).unwrap();
        assert_eq!((r.eta(), r.alpha()), (4, 0));
        let all = lcrm(&ms.moduli()).unwrap();
        let expected: BTreeSet<V> = fpd(&all).unwrap().points().collect();
        assert_eq!(r.points().into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn overrides_are_validated() {
        let ms = moduli(4);
        let bad = overrides(&[(&[0, 3], [[3, 0], [0, 48]])]);
        assert_eq!(
            compute_range(&ms, 2, Some(&bad)).unwrap_err(),
            Error::InvalidOverride { subset: vec![0, 3] }
        );
        let wrong_size = overrides(&[(&[0], [[3, 0], [1, 3]])]);
        assert!(matches!(compute_range(&ms, 2, Some(&wrong_size)), Err(Error::InvalidOverride { .. })));
        assert!(compute_range(&ms, 5, None).is_err());
    }

    #[test]
    fn recovery_conditions() {
        let ms = moduli(4);
        let r = compute_range(&ms, 2, Some(&two_vector_overrides())).unwrap();
        assert!(satisfies_recovery_conditions(&ms, &r, &vs(&[[2, 4], [1, 7]])));
        assert!(satisfies_recovery_conditions(&ms, &r, &vs(&[[0, 0]])));
        assert!(!satisfies_recovery_conditions(&ms, &r, &vs(&[[0, 0], [100, 100]])));
    }

    #[test]
    fn candidate_checks() {
        let ms = moduli(4);
        let r = compute_range(&ms, 2, Some(&two_vector_overrides())).unwrap();
        let sys = ResidueSetSystem::generate(&ms, &vs(&[[2, 4], [1, 7]])).unwrap();
        assert!(!candidate_valid(&v(&[2, 1]), &r, &sys, &ms));
        assert!(candidate_valid(&v(&[1, 7]), &r, &sys, &ms));

        let ms6 = moduli(6);
        let r6 = compute_range(&ms6, 3, Some(&three_vector_overrides())).unwrap();
        let sys6 = ResidueSetSystem::generate(&ms6, &vs(&[[2, 6], [1, 8], [0, 3]])).unwrap();
        assert!(!candidate_valid(&v(&[0, 24]), &r6, &sys6, &ms6));
        assert!(!r6.contains(&v(&[0, 24])));
    }

    #[test]
    fn example_residue_sets() {
        let ms = moduli(4);
        let sys = ResidueSetSystem::generate(&ms, &vs(&[[2, 4], [1, 7]])).unwrap();
        let expected = [
            vs(&[[2, 1], [1, 1]]),
            vs(&[[1, 1], [2, 1]]),
            vs(&[[2, 4], [1, 3]]),
            vs(&[[1, 0], [4, 3]]),
        ];
        assert_eq!(sys, ResidueSetSystem::new(&ms, expected.to_vec(), 2).unwrap());

        let ms6 = moduli(6);
        let sys6 = ResidueSetSystem::generate(&ms6, &vs(&[[2, 6], [0, 3], [1, 8]])).unwrap();
        assert_eq!(sys6.sets()[5], vs(&[[1, 1], [5, 3]]));
    }

    #[test]
    fn system_validation() {
        let ms = moduli(4);
        assert!(ResidueSetSystem::generate(&ms, &vs(&[[1, 1], [1, 1]])).is_err());
        let outside = vec![vs(&[[3, 0]]), vs(&[[0, 0]]), vs(&[[0, 0]]), vs(&[[0, 0]])];
        assert!(ResidueSetSystem::new(&ms, outside, 1).is_err());
        let too_many = vec![vs(&[[0, 0], [1, 1]]), vs(&[[0, 0]]), vs(&[[0, 0]]), vs(&[[0, 0]])];
        assert!(ResidueSetSystem::new(&ms, too_many, 1).is_err());
    }
}
