//! The two-integer case with scalar moduli, and the older sufficient
//! conditions it is compared against.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::IntScalar;

/// Scalar moduli `1 < m_1 < ... < m_γ` and their lcm `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneDimProblem<T> {
    moduli: Vec<T>,
    lcm: T,
}

impl<T: IntScalar> OneDimProblem<T> {
    pub fn new(moduli: Vec<T>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidInput("at least one modulus is required".into()));
        }
        if moduli[0] <= T::one() {
            return Err(Error::InvalidInput("the smallest modulus must exceed 1".into()));
        }
        if moduli.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("moduli must be strictly increasing".into()));
        }
        let lcm = moduli.iter().fold(T::one(), |acc, m| acc.lcm(m));
        Ok(OneDimProblem { moduli, lcm })
    }

    pub fn moduli(&self) -> &[T] {
        &self.moduli
    }

    pub fn lcm(&self) -> &T {
        &self.lcm
    }

    fn m1(&self) -> &T {
        &self.moduli[0]
    }

    /// True iff `x` is a multiple of some `m_j / 2`.
    fn in_half_multiples(&self, x: &T) -> bool {
        let twice = x.clone() * T::two();
        self.moduli.iter().any(|m| twice.is_multiple_of(m))
    }
}

/// Admissible differences `N_2 − N_1`: the first and last `m_1 − 1`
/// residues modulo `M`, minus every multiple of some `m_j / 2`.
pub fn onedim_condition_set<T: IntScalar>(p: &OneDimProblem<T>) -> BTreeSet<T> {
    let big = p.lcm.clone();
    let low = range(T::one(), p.m1().clone());
    let high = range(big.clone() - p.m1().clone() + T::one(), big.clone());
    low.chain(high)
        .filter(|x| *x >= T::one() && *x < big && !p.in_half_multiples(x))
        .collect()
}

/// Admissible difference sets of the three earlier sufficient conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorSets<T> {
    /// `N_2 − N_1 < m_1 / 2`.
    pub half_smallest: BTreeSet<T>,
    /// `N_2 − N_1 < m_1`, every modulus odd, `γ ≥ 2`.
    pub all_odd: BTreeSet<T>,
    /// `N_2 − N_1 < m_1`, all but the largest modulus odd, `m_γ > 2·m_1`.
    pub largest_exceeds_twice_smallest: BTreeSet<T>,
}

pub fn onedim_prior_sets<T: IntScalar>(p: &OneDimProblem<T>) -> PriorSets<T> {
    let m1 = p.m1().clone();
    let odd = |m: &T| m.is_odd();
    let below_m1 = || range(T::one(), m1.clone()).collect::<BTreeSet<T>>();
    let gamma = p.moduli.len();

    let half_ceil = (m1.clone() + T::one()) / T::two();
    let half_smallest = range(T::one(), half_ceil).collect();

    let all_odd = if gamma >= 2 && p.moduli.iter().all(odd) { below_m1() } else { BTreeSet::new() };

    let last = &p.moduli[gamma - 1];
    let cond3 = gamma >= 2 && p.moduli[..gamma - 1].iter().all(odd) && *last > m1.clone() * T::two();
    let largest_exceeds_twice_smallest = if cond3 { below_m1() } else { BTreeSet::new() };

    PriorSets { half_smallest, all_odd, largest_exceeds_twice_smallest }
}

/// `[cur, end)`.
fn range<T: IntScalar>(mut cur: T, end: T) -> impl Iterator<Item = T> {
    std::iter::from_fn(move || {
        if cur < end {
            let out = cur.clone();
            cur = cur.clone() + T::one();
            Some(out)
        } else {
            None
        }
    })
}
