//! Priority assignment: the `S^DCA` feasibility test, optimal priority
//! ordering (OPDCA), deadline-monotonic pairwise assignment with repair
//! (DM / DMR), and admission-controller variants of both.
//!
//! OPDCA is Audsley's optimal priority assignment driven by the
//! delay-composition test: priorities are handed out from lowest to
//! highest, and a job may take the current level as soon as its bound with
//! *all remaining jobs above it* meets the deadline. This is optimal
//! exactly when the bound mode is OPA-compatible, so the plain
//! non-preemptive modes are rejected here.
//!
//! DMR starts from the deadline-monotonic orientation of every competing
//! pair and then repairs deadline violations one job at a time by flipping
//! pairs against donors with spare slack, flipping only when the donor
//! stays feasible.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::dca::{self, BoundMode, DelayBound};
use crate::error::{Error, Result};
use crate::model::{competitor_sets, interference_sets, JobId, JobSet, Time};
use crate::opt::{pairwise_bound, Polarity};

/// A total priority order over a set of jobs, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityOrdering {
    ranked: Vec<JobId>,
}

impl PriorityOrdering {
    /// Builds an ordering from job ids listed highest-priority first.
    pub fn from_ranked(ranked: Vec<JobId>) -> Result<PriorityOrdering> {
        let mut seen = BTreeSet::new();
        for &i in &ranked {
            if !seen.insert(i) {
                return Err(Error::arg(format!("job {i} listed twice in ordering")));
            }
        }
        Ok(PriorityOrdering { ranked })
    }

    /// Builds an ordering from per-job priority values `rho[i] ∈ [1, n]`
    /// (1 = highest); must be a bijection.
    pub fn from_rho(rho: &[u32]) -> Result<PriorityOrdering> {
        let n = rho.len();
        let mut ranked = vec![usize::MAX; n];
        for (i, &p) in rho.iter().enumerate() {
            if p == 0 || p as usize > n || ranked[p as usize - 1] != usize::MAX {
                return Err(Error::arg("rho must be a bijection onto [1, n]"));
            }
            ranked[p as usize - 1] = i;
        }
        Ok(PriorityOrdering { ranked })
    }

    /// Job ids from highest to lowest priority.
    pub fn ranked(&self) -> &[JobId] {
        &self.ranked
    }

    /// Priority value of a job (1 = highest), if the job is covered.
    pub fn rho(&self, i: JobId) -> Option<u32> {
        self.ranked.iter().position(|&k| k == i).map(|p| p as u32 + 1)
    }

    pub fn covers_all(&self, n: usize) -> bool {
        self.ranked.len() == n && (0..n).all(|i| self.rho(i).is_some())
    }

    /// Jobs ranked above `i` (the candidate higher-priority set).
    pub fn higher_set(&self, i: JobId) -> BTreeSet<JobId> {
        self.ranked.iter().take_while(|&&k| k != i).copied().collect()
    }

    /// Jobs ranked below `i`.
    pub fn lower_set(&self, i: JobId) -> BTreeSet<JobId> {
        match self.ranked.iter().position(|&k| k == i) {
            Some(p) => self.ranked[p + 1..].iter().copied().collect(),
            None => BTreeSet::new(),
        }
    }

    /// Swaps the jobs at priority levels `p` and `p + 1` (1-based).
    pub fn swap_adjacent(&mut self, p: usize) {
        self.ranked.swap(p - 1, p);
    }
}

impl Serialize for PriorityOrdering {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.ranked.serialize(s)
    }
}

/// An antisymmetric winner relation over the competing pairs of a job set.
///
/// The domain is fixed at construction (exactly the pairs that share at
/// least one resource); each pair is either undecided or directed. Pairs
/// outside the domain do not exist: a job removed by an admission
/// controller simply has all its pairs dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairwiseAssignment {
    pairs: BTreeMap<(JobId, JobId), Option<JobId>>,
}

impl PairwiseAssignment {
    /// All competing pairs of the job set, every pair undecided.
    pub fn undecided_for(jobset: &JobSet) -> PairwiseAssignment {
        let comp = competitor_sets(jobset);
        PairwiseAssignment {
            pairs: comp.pairs().into_iter().map(|p| (p, None)).collect(),
        }
    }

    /// Orient every competing pair according to a total ordering. Pairs
    /// involving jobs outside the ordering's domain are dropped.
    pub fn from_ordering(jobset: &JobSet, ordering: &PriorityOrdering) -> PairwiseAssignment {
        let comp = competitor_sets(jobset);
        let mut pairs = BTreeMap::new();
        for (i, k) in comp.pairs() {
            if let (Some(pi), Some(pk)) = (ordering.rho(i), ordering.rho(k)) {
                pairs.insert((i, k), Some(if pi < pk { i } else { k }));
            }
        }
        PairwiseAssignment { pairs }
    }

    fn key(i: JobId, k: JobId) -> (JobId, JobId) {
        if i < k {
            (i, k)
        } else {
            (k, i)
        }
    }

    pub fn contains_pair(&self, i: JobId, k: JobId) -> bool {
        self.pairs.contains_key(&Self::key(i, k))
    }

    /// `Some(winner)` when decided, `None` when undecided. Errors when the
    /// pair is not in the domain.
    pub fn winner(&self, i: JobId, k: JobId) -> Result<Option<JobId>> {
        self.pairs
            .get(&Self::key(i, k))
            .copied()
            .ok_or_else(|| Error::arg(format!("jobs {i} and {k} are not a competing pair")))
    }

    pub fn set_winner(&mut self, i: JobId, k: JobId, winner: JobId) -> Result<()> {
        if winner != i && winner != k {
            return Err(Error::arg(format!(
                "winner {winner} is not one of the pair ({i}, {k})"
            )));
        }
        match self.pairs.get_mut(&Self::key(i, k)) {
            Some(slot) => {
                *slot = Some(winner);
                Ok(())
            }
            None => Err(Error::arg(format!("jobs {i} and {k} are not a competing pair"))),
        }
    }

    pub fn clear(&mut self, i: JobId, k: JobId) -> Result<()> {
        match self.pairs.get_mut(&Self::key(i, k)) {
            Some(slot) => {
                *slot = None;
                Ok(())
            }
            None => Err(Error::arg(format!("jobs {i} and {k} are not a competing pair"))),
        }
    }

    /// Drops every pair involving `job` (admission-controller discard).
    pub fn remove_job(&mut self, job: JobId) {
        self.pairs.retain(|&(i, k), _| i != job && k != job);
    }

    pub fn is_complete(&self) -> bool {
        self.pairs.values().all(|w| w.is_some())
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn undecided_pairs(&self) -> Vec<(JobId, JobId)> {
        self.pairs
            .iter()
            .filter(|(_, w)| w.is_none())
            .map(|(&p, _)| p)
            .collect()
    }

    pub fn domain(&self) -> impl Iterator<Item = (JobId, JobId)> + '_ {
        self.pairs.keys().copied()
    }

    /// Decided pairs as `(winner, loser)`, sorted by pair.
    pub fn directed_pairs(&self) -> Vec<(JobId, JobId)> {
        self.pairs
            .iter()
            .filter_map(|(&(i, k), w)| w.map(|w| if w == i { (i, k) } else { (k, i) }))
            .collect()
    }

    /// Competing jobs of `i` (within the domain) that currently beat it.
    pub fn beats(&self, i: JobId) -> BTreeSet<JobId> {
        self.pairs
            .iter()
            .filter_map(|(&(a, b), w)| match *w {
                Some(won) if (a == i || b == i) && won != i => Some(won),
                _ => None,
            })
            .collect()
    }
}

impl Serialize for PairwiseAssignment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let directed = self.directed_pairs();
        let mut seq = s.serialize_seq(Some(directed.len()))?;
        for pair in directed {
            seq.serialize_element(&pair)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    /// The exact solver ran out of search budget before reaching a verdict.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Assignment {
    Ordering(PriorityOrdering),
    Pairwise(PairwiseAssignment),
}

/// Result of any assignment operation: verdict, the assignment itself,
/// per-job bounds where available, and (for admission controllers) the
/// accepted set plus the rejected jobs in rejection order.
#[derive(Debug, Clone, Serialize)]
pub struct AssignmentOutcome {
    pub status: Feasibility,
    pub assignment: Option<Assignment>,
    pub bounds: Vec<Option<DelayBound>>,
    pub accepted: Vec<JobId>,
    pub rejected: Vec<JobId>,
    /// Repair-phase flips as `(promoted, demoted)`, in order (DMR only).
    pub flips: Vec<(JobId, JobId)>,
    /// Search nodes explored (exact solver only).
    pub nodes: u64,
}

impl AssignmentOutcome {
    pub(crate) fn new(status: Feasibility, n: usize) -> AssignmentOutcome {
        AssignmentOutcome {
            status,
            assignment: None,
            bounds: vec![None; n],
            accepted: Vec::new(),
            rejected: Vec::new(),
            flips: Vec::new(),
            nodes: 0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == Feasibility::Feasible
    }
}

/// The schedulability test: job `i` is feasible with higher set `H` and
/// lower set `L` when its delay bound meets the deadline.
pub fn sdca(
    jobset: &JobSet,
    i: JobId,
    higher: &BTreeSet<JobId>,
    lower: &BTreeSet<JobId>,
    mode: BoundMode,
) -> Result<bool> {
    let sets = interference_sets(jobset, i, higher, lower)?;
    let b = dca::bound(jobset, i, &sets, mode)?;
    Ok(b.meets(jobset.jobs[i].deadline))
}

fn opa_compatible_or_err(mode: BoundMode) -> Result<()> {
    if !mode.is_opa_compatible() {
        return Err(Error::mode(format!(
            "{} is not OPA-compatible; growing the higher set can shrink its bound",
            mode.name()
        )));
    }
    Ok(())
}

/// Bound of job `i` when the unassigned set `u` sits above it and `lower`
/// below.
fn audsley_bound(
    jobset: &JobSet,
    i: JobId,
    u: &BTreeSet<JobId>,
    lower: &BTreeSet<JobId>,
    mode: BoundMode,
) -> Result<DelayBound> {
    let higher: BTreeSet<JobId> = u.iter().copied().filter(|&k| k != i).collect();
    let sets = interference_sets(jobset, i, &higher, lower)?;
    dca::bound(jobset, i, &sets, mode)
}

/// Optimal priority ordering by Audsley's scheme over the DCA test.
///
/// Priorities are assigned from `n` (lowest) to 1; at each level the
/// lowest-id feasible job takes the level. Infeasible as soon as some
/// level has no feasible job.
pub fn opdca(jobset: &JobSet, mode: BoundMode) -> Result<AssignmentOutcome> {
    opa_compatible_or_err(mode)?;
    let n = jobset.len();
    let mut unassigned: BTreeSet<JobId> = (0..n).collect();
    let mut lower: BTreeSet<JobId> = BTreeSet::new();
    let mut lowest_first: Vec<JobId> = Vec::with_capacity(n);
    let mut bounds: Vec<Option<DelayBound>> = vec![None; n];

    while !unassigned.is_empty() {
        let candidates: Vec<JobId> = unassigned.iter().copied().collect();
        let mut assigned = None;
        for i in candidates {
            let b = audsley_bound(jobset, i, &unassigned, &lower, mode)?;
            if b.meets(jobset.jobs[i].deadline) {
                assigned = Some((i, b));
                break;
            }
        }
        match assigned {
            Some((i, b)) => {
                bounds[i] = Some(b);
                unassigned.remove(&i);
                lower.insert(i);
                lowest_first.push(i);
            }
            None => return Ok(AssignmentOutcome::new(Feasibility::Infeasible, n)),
        }
    }

    let ranked: Vec<JobId> = lowest_first.into_iter().rev().collect();
    let ordering = PriorityOrdering::from_ranked(ranked)?;
    let mut out = AssignmentOutcome::new(Feasibility::Feasible, n);
    out.accepted = (0..n).collect();
    out.bounds = bounds;
    out.assignment = Some(Assignment::Ordering(ordering));
    Ok(out)
}

/// Violation margin used by the admission controllers; saturated bounds
/// sort above everything.
fn violation(b: &DelayBound, deadline: Time) -> i128 {
    if b.saturated {
        i128::MAX
    } else {
        b.total as i128 - deadline as i128
    }
}

/// OPDCA as an admission controller: when a priority level has no feasible
/// job, the unassigned job with the largest `Δ - D` is discarded (lowest
/// id on ties) and assignment resumes at the same level over the rest.
pub fn opdca_admission(jobset: &JobSet, mode: BoundMode) -> Result<AssignmentOutcome> {
    opa_compatible_or_err(mode)?;
    let n = jobset.len();
    let mut unassigned: BTreeSet<JobId> = (0..n).collect();
    let mut lower: BTreeSet<JobId> = BTreeSet::new();
    let mut lowest_first: Vec<JobId> = Vec::with_capacity(n);
    let mut rejected: Vec<JobId> = Vec::new();
    let mut bounds: Vec<Option<DelayBound>> = vec![None; n];

    while !unassigned.is_empty() {
        let candidates: Vec<JobId> = unassigned.iter().copied().collect();
        let mut assigned = None;
        let mut evaluated: Vec<(JobId, DelayBound)> = Vec::new();
        for i in candidates {
            let b = audsley_bound(jobset, i, &unassigned, &lower, mode)?;
            if b.meets(jobset.jobs[i].deadline) {
                assigned = Some((i, b));
                break;
            }
            evaluated.push((i, b));
        }
        match assigned {
            Some((i, b)) => {
                bounds[i] = Some(b);
                unassigned.remove(&i);
                lower.insert(i);
                lowest_first.push(i);
            }
            None => {
                let worst = evaluated
                    .iter()
                    .max_by_key(|(i, b)| {
                        (violation(b, jobset.jobs[*i].deadline), std::cmp::Reverse(*i))
                    })
                    .map(|(i, _)| *i)
                    .expect("stuck level implies at least one candidate");
                unassigned.remove(&worst);
                rejected.push(worst);
            }
        }
    }

    let ranked: Vec<JobId> = lowest_first.iter().rev().copied().collect();
    let ordering = PriorityOrdering::from_ranked(ranked)?;
    let mut out = AssignmentOutcome::new(Feasibility::Feasible, n);
    out.accepted = {
        let mut a = lowest_first;
        a.sort_unstable();
        a
    };
    out.rejected = rejected;
    out.bounds = bounds;
    out.assignment = Some(Assignment::Ordering(ordering));
    Ok(out)
}

/// Deadline-monotonic orientation of every competing pair: scanning pairs
/// `(i, k)` with `i < k`, `i` wins iff `D_i <= D_k`, so ties favor the
/// lower id.
pub fn dm_pairwise(jobset: &JobSet) -> PairwiseAssignment {
    let mut x = PairwiseAssignment::undecided_for(jobset);
    let pairs: Vec<(JobId, JobId)> = x.domain().collect();
    for (i, k) in pairs {
        let winner = if jobset.jobs[i].deadline <= jobset.jobs[k].deadline {
            i
        } else {
            k
        };
        x.set_winner(i, k, winner).expect("pair in domain");
    }
    x
}

fn dmr_mode_or_err(mode: BoundMode) -> Result<()> {
    match mode {
        BoundMode::PreemptiveRefined | BoundMode::NonpreemptiveMulti | BoundMode::EdgeMixed => {
            Ok(())
        }
        other => Err(Error::mode(format!(
            "pairwise assignment is defined for the multi-resource bounds, not {}",
            other.name()
        ))),
    }
}

/// One repair pass for job `i`: flip pairs against feasible donors in
/// decreasing-slack order until `i` meets its deadline or donors run out.
/// A flip is kept only when the donor stays feasible. Returns whether `i`
/// ended feasible.
fn repair_job(
    jobset: &JobSet,
    x: &mut PairwiseAssignment,
    bounds: &mut [DelayBound],
    i: JobId,
    mode: BoundMode,
    flips: &mut Vec<(JobId, JobId)>,
) -> Result<bool> {
    let deadline = |k: JobId| jobset.jobs[k].deadline;
    // Donors: competitors currently above i with strictly positive slack,
    // frozen and sorted once per violating job.
    let mut donors: Vec<(JobId, Time)> = x
        .beats(i)
        .into_iter()
        .filter(|&k| !bounds[k].saturated && bounds[k].total < deadline(k))
        .map(|k| (k, deadline(k) - bounds[k].total))
        .collect();
    donors.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    for (k, _) in donors {
        x.set_winner(i, k, i)?;
        let new_k = pairwise_bound(jobset, x, k, mode, Polarity::Pessimistic)?;
        if new_k.meets(deadline(k)) {
            bounds[k] = new_k;
            flips.push((i, k));
            bounds[i] = pairwise_bound(jobset, x, i, mode, Polarity::Pessimistic)?;
            if bounds[i].meets(deadline(i)) {
                return Ok(true);
            }
        } else {
            x.set_winner(i, k, k)?;
        }
    }
    Ok(bounds[i].meets(deadline(i)))
}

/// Deadline-monotonic pairwise assignment followed by slack-ordered repair.
pub fn dmr(jobset: &JobSet, mode: BoundMode) -> Result<AssignmentOutcome> {
    dmr_mode_or_err(mode)?;
    let n = jobset.len();
    let mut x = dm_pairwise(jobset);
    let mut bounds: Vec<DelayBound> = (0..n)
        .map(|i| pairwise_bound(jobset, &x, i, mode, Polarity::Pessimistic))
        .collect::<Result<_>>()?;
    let mut flips = Vec::new();

    for i in 0..n {
        if bounds[i].meets(jobset.jobs[i].deadline) {
            continue;
        }
        if !repair_job(jobset, &mut x, &mut bounds, i, mode, &mut flips)? {
            let mut out = AssignmentOutcome::new(Feasibility::Infeasible, n);
            out.assignment = Some(Assignment::Pairwise(x));
            out.bounds = bounds.into_iter().map(Some).collect();
            out.flips = flips;
            return Ok(out);
        }
    }

    let mut out = AssignmentOutcome::new(Feasibility::Feasible, n);
    out.accepted = (0..n).collect();
    out.bounds = bounds.into_iter().map(Some).collect();
    out.assignment = Some(Assignment::Pairwise(x));
    out.flips = flips;
    Ok(out)
}

/// DMR as an admission controller: whenever some job cannot be repaired,
/// the active job with the largest `Δ - D` is discarded (lowest id on
/// ties) and the repair scan restarts over the survivors.
pub fn dmr_admission(jobset: &JobSet, mode: BoundMode) -> Result<AssignmentOutcome> {
    dmr_mode_or_err(mode)?;
    let n = jobset.len();
    let mut active: BTreeSet<JobId> = (0..n).collect();
    let mut x = dm_pairwise(jobset);
    // Entries of removed jobs go stale and are never read again: the
    // repair scan and the discard argmax only touch active ids, and
    // donors come from x's domain, which drops a job on removal.
    let mut bounds: Vec<DelayBound> = (0..n)
        .map(|i| pairwise_bound(jobset, &x, i, mode, Polarity::Pessimistic))
        .collect::<Result<_>>()?;
    let mut rejected = Vec::new();
    let mut flips = Vec::new();

    'restart: loop {
        let scan: Vec<JobId> = active.iter().copied().collect();
        for i in scan {
            if bounds[i].meets(jobset.jobs[i].deadline) {
                continue;
            }
            if !repair_job(jobset, &mut x, &mut bounds, i, mode, &mut flips)? {
                let worst = active
                    .iter()
                    .copied()
                    .max_by_key(|&k| {
                        (violation(&bounds[k], jobset.jobs[k].deadline), std::cmp::Reverse(k))
                    })
                    .expect("active set non-empty");
                active.remove(&worst);
                rejected.push(worst);
                x.remove_job(worst);
                for &k in &active {
                    bounds[k] = pairwise_bound(jobset, &x, k, mode, Polarity::Pessimistic)?;
                }
                continue 'restart;
            }
        }
        break;
    }

    let mut out = AssignmentOutcome::new(Feasibility::Feasible, n);
    out.bounds = bounds
        .into_iter()
        .enumerate()
        .map(|(i, b)| active.contains(&i).then_some(b))
        .collect();
    out.accepted = active.into_iter().collect();
    out.rejected = rejected;
    out.assignment = Some(Assignment::Pairwise(x));
    out.flips = flips;
    Ok(out)
}

/// Re-validates a total ordering from scratch: every covered job's bound
/// under its ordering-induced sets must meet its deadline.
pub fn validate_ordering(
    jobset: &JobSet,
    ordering: &PriorityOrdering,
    mode: BoundMode,
) -> Result<bool> {
    for &i in ordering.ranked() {
        let sets =
            interference_sets(jobset, i, &ordering.higher_set(i), &ordering.lower_set(i))?;
        let b = dca::bound(jobset, i, &sets, mode)?;
        if !b.meets(jobset.jobs[i].deadline) {
            return Ok(false);
        }
    }
    Ok(true)
}
