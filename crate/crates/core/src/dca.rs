//! Delay-composition upper bounds on end-to-end pipeline delay.
//!
//! Every bound decomposes the delay of a job into a *job-additive*
//! component (largest stage-processing times of each interfering job,
//! once or twice per shared segment) and a *stage-additive* component
//! (per-stage maxima over the job's higher-priority set, accounting for
//! overlapped execution). Non-preemptive variants add one lower-priority
//! blocking term per stage.
//!
//! Seven modes are supported:
//!
//! * [`BoundMode::PreemptiveSingle`] / [`BoundMode::NonpreemptiveSingle`] —
//!   the single-resource pipeline bounds. Preemptive:
//!   `Σ_{k∈Q} t_{k,1} + Σ_{k∈Hᵃ} t_{k,2} + Σ_{j<N} max_{k∈Q} P_{k,j}`.
//!   Non-preemptive drops the late-arrival term and adds
//!   `Σ_{j≤N} max_{k∈L} P_{k,j}`.
//! * [`BoundMode::PreemptiveMulti`] / [`BoundMode::NonpreemptiveMulti`] —
//!   the multi-resource generalizations; each interfering job contributes
//!   `2·m` (resp. `m`) copies of its largest shared stage time, where `m`
//!   is the number of shared segments.
//! * [`BoundMode::NonpreemptiveOpa`] — as `NonpreemptiveMulti` but the
//!   blocking term maximizes over all other jobs rather than the
//!   lower-priority set, which makes the test usable inside an optimal
//!   priority-assignment loop.
//! * [`BoundMode::PreemptiveRefined`] — replaces the `2m` copies by the
//!   `w = u + 2v` largest shared stage times (one term per single-stage
//!   segment, two per longer segment); the self term uses `w = 1`.
//! * [`BoundMode::EdgeMixed`] — the 3-stage offload/compute/download
//!   pipeline with non-preemptive network stages: the refined preemptive
//!   bound plus one download blocking term over the lower-priority set.
//!
//! Totals saturate instead of wrapping on overflow; a saturated bound
//! carries a flag and compares as larger than any deadline.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, InterferenceSets, JobId, JobSet, SegmentProfile, Time};

/// Which delay bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundMode {
    PreemptiveSingle,
    NonpreemptiveSingle,
    PreemptiveMulti,
    NonpreemptiveMulti,
    NonpreemptiveOpa,
    PreemptiveRefined,
    EdgeMixed,
}

impl BoundMode {
    /// Modes only defined for pipelines with one resource per stage.
    pub fn requires_single_resource(self) -> bool {
        matches!(self, BoundMode::PreemptiveSingle | BoundMode::NonpreemptiveSingle)
    }

    /// Whether the induced schedulability test depends only on the
    /// higher/lower *sets* and is monotone under adjacent priority swaps,
    /// the precondition for Audsley-style assignment. The plain
    /// non-preemptive bounds fail this: growing the higher set can shrink
    /// the lower-priority blocking term.
    pub fn is_opa_compatible(self) -> bool {
        !matches!(
            self,
            BoundMode::NonpreemptiveSingle | BoundMode::NonpreemptiveMulti
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundMode::PreemptiveSingle => "preemptive-single",
            BoundMode::NonpreemptiveSingle => "nonpreemptive-single",
            BoundMode::PreemptiveMulti => "preemptive-multi",
            BoundMode::NonpreemptiveMulti => "nonpreemptive-multi",
            BoundMode::NonpreemptiveOpa => "nonpreemptive-opa",
            BoundMode::PreemptiveRefined => "preemptive-refined",
            BoundMode::EdgeMixed => "edge-mixed",
        }
    }
}

/// An end-to-end delay bound with its term breakdown.
///
/// `total` always equals the (saturating) sum of every listed component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DelayBound {
    pub job: JobId,
    pub total: Time,
    /// Per interfering job (including the job itself): its summed
    /// job-additive contribution.
    pub job_additive: Vec<(JobId, Time)>,
    /// Per-stage maxima over `Q`, one entry per stage except the last.
    pub stage_additive: Vec<Time>,
    /// Per-stage lower-priority blocking terms (non-preemptive modes and
    /// the download stage of the edge bound); empty for preemptive modes.
    pub lower_blocking: Vec<Time>,
    /// Set when any addition or multiplication overflowed; the total is
    /// then a saturated underestimate and must be treated as `+∞`.
    pub saturated: bool,
}

impl DelayBound {
    /// Whether the bound certifies the deadline. A saturated bound never
    /// does.
    pub fn meets(&self, deadline: Time) -> bool {
        !self.saturated && self.total <= deadline
    }
}

/// Saturating accumulator that remembers whether it clipped.
struct Acc {
    total: Time,
    saturated: bool,
}

impl Acc {
    fn new() -> Acc {
        Acc { total: 0, saturated: false }
    }

    fn add(&mut self, v: Time) {
        match self.total.checked_add(v) {
            Some(t) => self.total = t,
            None => {
                self.total = Time::MAX;
                self.saturated = true;
            }
        }
    }
}

fn mul_count(count: usize, value: Time) -> (Time, bool) {
    match (count as Time).checked_mul(value) {
        Some(v) => (v, false),
        None => (Time::MAX, true),
    }
}

/// Term sources for one evaluation: interference sets plus the profile
/// cache for the job under analysis.
struct Eval<'a> {
    jobset: &'a JobSet,
    i: JobId,
    profiles: Vec<Option<SegmentProfile>>,
}

impl<'a> Eval<'a> {
    fn new(jobset: &'a JobSet, i: JobId) -> Eval<'a> {
        Eval { jobset, i, profiles: vec![None; jobset.len()] }
    }

    fn profile(&mut self, k: JobId) -> &SegmentProfile {
        if self.profiles[k].is_none() {
            let p = if k == self.i {
                model::self_profile(&self.jobset.jobs[k])
            } else {
                model::segment_profile(self.jobset, self.i, k).expect("ids validated")
            };
            self.profiles[k] = Some(p);
        }
        self.profiles[k].as_ref().unwrap()
    }

    /// `p̃_{k,j}`: `P_{k,j}` when the pair shares stage `j`, else 0.
    fn shared_proc(&mut self, k: JobId, j: usize) -> Time {
        self.profile(k).shared_proc[j]
    }
}

/// Evaluates the selected bound from raw higher/lower sets.
///
/// This is the common path behind [`bound`] and the pairwise-assignment
/// bounds; it performs no set validation, so the two sets may deliberately
/// intersect (the pessimistic envelope of a partial pairwise assignment).
pub(crate) fn eval_sets(
    jobset: &JobSet,
    i: JobId,
    higher: &BTreeSet<JobId>,
    lower: &BTreeSet<JobId>,
    higher_after: &BTreeSet<JobId>,
    mode: BoundMode,
) -> Result<DelayBound> {
    let me = jobset.job(i)?;
    let n_stages = jobset.num_stages();
    if mode.requires_single_resource() && !jobset.pipeline.is_single_resource() {
        return Err(Error::mode(format!(
            "{} requires exactly one resource per stage",
            mode.name()
        )));
    }
    if mode == BoundMode::EdgeMixed && n_stages != 3 {
        return Err(Error::mode(format!(
            "edge-mixed requires a 3-stage pipeline, got {n_stages}"
        )));
    }
    for &k in higher.iter().chain(lower.iter()) {
        jobset.job(k)?;
    }

    let mut ev = Eval::new(jobset, i);
    let mut acc = Acc::new();
    let mut job_additive: Vec<(JobId, Time)> = Vec::new();
    let mut q: Vec<JobId> = higher.iter().copied().collect();
    q.push(i);
    q.sort_unstable();

    // Job-additive component.
    for &k in &q {
        let (term, sat) = match mode {
            BoundMode::PreemptiveSingle => {
                let mut t = jobset.jobs[k].stage_max(1);
                let mut sat = false;
                if higher_after.contains(&k) {
                    match t.checked_add(jobset.jobs[k].stage_max(2)) {
                        Some(v) => t = v,
                        None => {
                            t = Time::MAX;
                            sat = true;
                        }
                    }
                }
                (t, sat)
            }
            BoundMode::NonpreemptiveSingle => (jobset.jobs[k].stage_max(1), false),
            BoundMode::PreemptiveMulti => {
                let p = ev.profile(k);
                mul_count(2 * p.m(), p.shared_max(1))
            }
            BoundMode::NonpreemptiveMulti | BoundMode::NonpreemptiveOpa => {
                let p = ev.profile(k);
                mul_count(p.m(), p.shared_max(1))
            }
            BoundMode::PreemptiveRefined | BoundMode::EdgeMixed => {
                // Self term uses w = 1: the job contributes its single
                // largest stage time.
                let w = if k == i { 1 } else { ev.profile(k).w() };
                (ev.profile(k).shared_top_sum(w), false)
            }
        };
        acc.saturated |= sat;
        acc.add(term);
        job_additive.push((k, term));
    }

    // Stage-additive component: per-stage maxima over Q, excluding the
    // final stage.
    let mut stage_additive = Vec::with_capacity(n_stages.saturating_sub(1));
    for j in 0..n_stages.saturating_sub(1) {
        let theta = q
            .iter()
            .map(|&k| match mode {
                BoundMode::PreemptiveSingle | BoundMode::NonpreemptiveSingle => {
                    jobset.jobs[k].proc[j]
                }
                _ => {
                    if k == i {
                        me.proc[j]
                    } else {
                        ev.shared_proc(k, j)
                    }
                }
            })
            .max()
            .unwrap_or(0);
        acc.add(theta);
        stage_additive.push(theta);
    }

    // Lower-priority blocking component.
    let mut lower_blocking = Vec::new();
    match mode {
        BoundMode::NonpreemptiveSingle | BoundMode::NonpreemptiveMulti => {
            for j in 0..n_stages {
                let block = lower
                    .iter()
                    .map(|&k| match mode {
                        BoundMode::NonpreemptiveSingle => jobset.jobs[k].proc[j],
                        _ => ev.shared_proc(k, j),
                    })
                    .max()
                    .unwrap_or(0);
                acc.add(block);
                lower_blocking.push(block);
            }
        }
        BoundMode::NonpreemptiveOpa => {
            // Maximize over every other job under consideration (the union
            // of both sets): more pessimistic than the lower set alone, but
            // independent of how priorities are distributed within it.
            let others: Vec<JobId> = higher.union(lower).copied().filter(|&k| k != i).collect();
            for j in 0..n_stages {
                let block = others.iter().map(|&k| ev.shared_proc(k, j)).max().unwrap_or(0);
                acc.add(block);
                lower_blocking.push(block);
            }
        }
        BoundMode::EdgeMixed => {
            // Only the download stage is exposed to lower-priority
            // blocking; offloading starts in priority order in the batch
            // model and the compute stage is preemptive.
            let block = lower.iter().map(|&k| ev.shared_proc(k, 2)).max().unwrap_or(0);
            lower_blocking.extend([0, 0, block]);
            acc.add(block);
        }
        _ => {}
    }

    Ok(DelayBound {
        job: i,
        total: acc.total,
        job_additive,
        stage_additive,
        lower_blocking,
        saturated: acc.saturated,
    })
}

/// End-to-end delay bound of job `i` under the given interference sets.
pub fn bound(
    jobset: &JobSet,
    i: JobId,
    sets: &InterferenceSets,
    mode: BoundMode,
) -> Result<DelayBound> {
    if sets.job != i {
        return Err(Error::arg(format!(
            "interference sets were built for job {}, not {i}",
            sets.job
        )));
    }
    eval_sets(jobset, i, &sets.higher, &sets.lower, &sets.higher_after, mode)
}

/// The 3-stage edge pipeline bound: non-preemptive offload, preemptive
/// compute, non-preemptive download.
///
/// Assumes batch scheduling (all jobs released together for priority
/// assignment), under which no higher-priority job joins the pipeline
/// after the job under analysis.
pub fn bound_edge(jobset: &JobSet, i: JobId, sets: &InterferenceSets) -> Result<DelayBound> {
    bound(jobset, i, sets, BoundMode::EdgeMixed)
}
