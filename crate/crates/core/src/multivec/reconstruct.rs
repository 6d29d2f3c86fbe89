use itertools::Itertools;

use super::{residue_mismatch, DeterminableRange, ModuliSet, ResidueSetSystem};
use crate::error::{Error, Result};
use crate::matrix::Vector;
use crate::scalar::IntScalar;

/// Why a candidate was accepted or rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    /// The chosen residues admit no common solution.
    NoSolution,
    OutsideRange,
    /// The residue modulo this set's matrix is not in the current set.
    ResidueMismatch { set_index: usize },
    AlreadyFound,
}

/// One residue swap of a correction: `removed` leaves `S_j ∩ A_j`,
/// `restored` comes back from `B_l(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionStep<T> {
    pub set_index: usize,
    pub removed: Vector<T>,
    pub restored: Vector<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditEvent<T> {
    /// Some `S_j`, read as the vector set itself, regenerates the system.
    FastPath { set_index: usize },
    /// One CRT solve. `value` is the raw solution, `candidate` its
    /// representative inside the chosen `N(R_A)`.
    Candidate {
        round: usize,
        tuple: Vec<Vector<T>>,
        subset: Vec<usize>,
        value: Option<Vector<T>>,
        candidate: Option<Vector<T>>,
        verdict: Verdict,
    },
    /// A round found no residue to pick in this set.
    EmptySet { round: usize, set_index: usize },
    Correction { round: usize, steps: Vec<CorrectionStep<T>> },
    /// The correction just tried led nowhere and was undone.
    Rollback { round: usize },
    /// A complete vector set that does not regenerate the input.
    AuditFailed { vectors: Vec<Vector<T>> },
    /// Prior-information path: the common difference that paired residues.
    PairDifference { d_star: Vector<T> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconstructionOutcome<T> {
    /// The recovered vectors, sorted.
    pub vectors: Vec<Vector<T>>,
    pub rounds: Vec<AuditEvent<T>>,
    pub crt_invocations: usize,
}

/// Residue sets as they evolve between rounds.
#[derive(Clone, Debug)]
struct State<T> {
    sets: Vec<Vec<Vector<T>>>,
    /// `A_j`: kept residues of already found vectors.
    anchored: Vec<Vec<Vector<T>>>,
    /// `B_l(j)`: residues removed so far, in removal order.
    removed: Vec<Vec<Vector<T>>>,
    found: Vec<Vector<T>>,
}

struct Solver<'a, T> {
    ms: &'a ModuliSet<T>,
    range: &'a DeterminableRange<T>,
    system: &'a ResidueSetSystem<T>,
    subsets: Vec<Vec<usize>>,
    events: Vec<AuditEvent<T>>,
    invocations: usize,
    audit_failed: bool,
}

/// Recovers the `ρ` vectors behind `system`.
///
/// Choices are deterministic: each round picks the first residue of every
/// set (preferring ones not yet anchored to a found vector), tries size-`η`
/// subsets in lexicographic order, and accepts the first valid candidate.
/// The last round solves the full system. When a round fails, corrections
/// swap anchored residues for previously removed ones, one set at a time,
/// then two, and so on, backtracking through every combination.
pub fn reconstruct<T: IntScalar>(
    ms: &ModuliSet<T>,
    system: &ResidueSetSystem<T>,
    range: &DeterminableRange<T>,
) -> Result<ReconstructionOutcome<T>> {
    if system.gamma() != ms.gamma() {
        return Err(Error::DimensionMismatch { expected: ms.gamma(), found: system.gamma() });
    }
    if system.rho() != range.rho() {
        return Err(Error::InvalidInput(format!(
            "system has rho = {} but the range was built for rho = {}",
            system.rho(),
            range.rho()
        )));
    }

    let mut solver = Solver {
        ms,
        range,
        system,
        subsets: range.subset_lcrms().keys().cloned().collect(),
        events: Vec::new(),
        invocations: 0,
        audit_failed: false,
    };

    if let Some(outcome) = solver.fast_path() {
        return Ok(outcome);
    }

    let gamma = ms.gamma();
    let start = State {
        sets: system.sets().to_vec(),
        anchored: vec![Vec::new(); gamma],
        removed: vec![Vec::new(); gamma],
        found: Vec::new(),
    };
    match solver.search(start, false)? {
        Some(mut vectors) => {
            vectors.sort();
            Ok(ReconstructionOutcome { vectors, rounds: solver.events, crt_invocations: solver.invocations })
        }
        None if solver.audit_failed => Err(Error::InconsistentSystem),
        None => Err(Error::ReconstructionFailed),
    }
}

impl<T: IntScalar> Solver<'_, T> {
    fn regenerates(&self, vectors: &[Vector<T>]) -> bool {
        ResidueSetSystem::generate(self.ms, vectors).is_ok_and(|s| &s == self.system)
    }

    fn fast_path(&mut self) -> Option<ReconstructionOutcome<T>> {
        let rho = self.system.rho();
        let j = (0..self.ms.gamma()).find(|&j| {
            let set = &self.system.sets()[j];
            set.len() == rho && self.regenerates(set)
        })?;
        let mut vectors = self.system.sets()[j].clone();
        vectors.sort();
        Some(ReconstructionOutcome {
            vectors,
            rounds: vec![AuditEvent::FastPath { set_index: j }],
            crt_invocations: 0,
        })
    }

    /// Runs rounds until all vectors are found or a round fails. A failure
    /// right after a correction is reported to the caller, which tries the
    /// next correction instead of stacking another one on top.
    fn search(&mut self, mut st: State<T>, mut just_corrected: bool) -> Result<Option<Vec<Vector<T>>>> {
        loop {
            if st.found.len() == self.system.rho() {
                if self.regenerates(&st.found) {
                    return Ok(Some(st.found));
                }
                self.audit_failed = true;
                self.events.push(AuditEvent::AuditFailed { vectors: st.found });
                return Ok(None);
            }
            match self.round(&st)? {
                Some(f) => {
                    self.remove_residues(&mut st, f);
                    just_corrected = false;
                }
                None if just_corrected => return Ok(None),
                None => return self.correct(&st),
            }
        }
    }

    fn round(&mut self, st: &State<T>) -> Result<Option<Vector<T>>> {
        let round = st.found.len() + 1;
        let mut tuple = Vec::with_capacity(st.sets.len());
        for (j, (set, anchored)) in st.sets.iter().zip(&st.anchored).enumerate() {
            match set.iter().find(|r| !anchored.contains(r)).or(set.first()) {
                Some(r) => tuple.push(r.clone()),
                None => {
                    self.events.push(AuditEvent::EmptySet { round, set_index: j });
                    return Ok(None);
                }
            }
        }

        if self.system.rho() - st.found.len() == 1 {
            let all: Vec<usize> = (0..self.ms.gamma()).collect();
            return self.try_subset(st, round, &tuple, &all, None);
        }
        for index in 0..self.subsets.len() {
            let subset = self.subsets[index].clone();
            if let Some(f) = self.try_subset(st, round, &tuple, &subset, Some(index))? {
                return Ok(Some(f));
            }
        }
        Ok(None)
    }

    /// Solves the congruences of `subset` (`None` plans the full system)
    /// and tests the solution's representative in the matching `N(R_A)`.
    /// The full system uses the first subset's `R_A`; any point of `N_η`
    /// lies in it, and it holds one representative per solution class.
    fn try_subset(
        &mut self,
        st: &State<T>,
        round: usize,
        tuple: &[Vector<T>],
        subset: &[usize],
        index: Option<usize>,
    ) -> Result<Option<Vector<T>>> {
        self.invocations += 1;
        let plan = index.map_or(self.range.full_plan(), |i| self.range.subset_plan(i));
        let residues: Vec<Vector<T>> = subset.iter().map(|&j| tuple[j].clone()).collect();
        let (value, candidate, verdict) = match plan.solve(&residues) {
            Err(Error::NoSolution) => (None, None, Verdict::NoSolution),
            Err(e) => return Err(e),
            Ok(sol) => {
                let f = self.range.subset_reducer(index.unwrap_or(0)).remainder(&sol.value);
                let verdict = self.judge(st, &f);
                (Some(sol.value), Some(f), verdict)
            }
        };
        let accepted = verdict == Verdict::Accepted;
        self.events.push(AuditEvent::Candidate {
            round,
            tuple: tuple.to_vec(),
            subset: subset.to_vec(),
            value,
            candidate: candidate.clone(),
            verdict,
        });
        Ok(if accepted { candidate } else { None })
    }

    fn judge(&self, st: &State<T>, f: &Vector<T>) -> Verdict {
        if !self.range.contains(f) {
            Verdict::OutsideRange
        } else if let Some(set_index) = residue_mismatch(f, &st.sets, self.ms) {
            Verdict::ResidueMismatch { set_index }
        } else if st.found.contains(f) {
            Verdict::AlreadyFound
        } else {
            Verdict::Accepted
        }
    }

    /// A residue leaves `S_j` only when `S_j` holds exactly one residue per
    /// remaining vector; otherwise it may be shared and is anchored.
    fn remove_residues(&self, st: &mut State<T>, f: Vector<T>) {
        let remaining = self.system.rho() - st.found.len();
        for (j, r) in self.ms.residues_of(&f).into_iter().enumerate() {
            if st.sets[j].len() == remaining {
                st.sets[j].retain(|x| *x != r);
                st.anchored[j].retain(|x| *x != r);
                st.removed[j].push(r);
            } else if !st.anchored[j].contains(&r) {
                st.anchored[j].push(r);
            }
        }
        st.found.push(f);
    }

    fn correct(&mut self, st: &State<T>) -> Result<Option<Vec<Vector<T>>>> {
        let round = st.found.len() + 1;
        let options: Vec<(usize, Vec<CorrectionStep<T>>)> = (0..st.sets.len())
            .filter_map(|j| {
                let steps: Vec<_> = st.sets[j]
                    .iter()
                    .filter(|r| st.anchored[j].contains(r))
                    .cartesian_product(&st.removed[j])
                    .map(|(a, b)| CorrectionStep { set_index: j, removed: a.clone(), restored: b.clone() })
                    .collect();
                (!steps.is_empty()).then_some((j, steps))
            })
            .collect();

        for tier in 1..=options.len() {
            for combo in options.iter().combinations(tier) {
                for steps in combo.iter().map(|(_, s)| s.iter()).multi_cartesian_product() {
                    let mut next = st.clone();
                    for step in &steps {
                        let j = step.set_index;
                        let pos = next.sets[j].iter().position(|x| *x == step.removed).expect("anchored residue");
                        next.sets[j][pos] = step.restored.clone();
                        next.anchored[j].retain(|x| *x != step.removed);
                        next.removed[j].retain(|x| *x != step.restored);
                    }
                    self.events.push(AuditEvent::Correction {
                        round,
                        steps: steps.into_iter().cloned().collect(),
                    });
                    if let Some(found) = self.search(next, true)? {
                        return Ok(Some(found));
                    }
                    self.events.push(AuditEvent::Rollback { round });
                }
            }
        }
        Ok(None)
    }
}
