//! Domain types for the MSMR system and the combinatorial structure derived
//! from a job-to-resource mapping: shared segments, competitor sets, and
//! interference sets.
//!
//! A *segment* of a job pair is a maximal run of consecutive stages on which
//! both jobs are mapped to the same resource and both have positive
//! processing time. A stage with zero processing time is skipped by the job
//! and never counts as shared. Segment counts drive the job-additive terms
//! of every multi-resource delay bound: a pair with `u` single-stage
//! segments and `v` longer segments admits at most `w = u + 2v` interfering
//! stage-processing terms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete time units. All analysis is exact integer arithmetic.
pub type Time = u64;

/// Index of a job inside its [`JobSet`] (`0..n`).
pub type JobId = usize;

/// Identifier of a resource inside a stage pool. Identities are stage-local:
/// the same number in two different stages names two different resources.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ResourceId(pub u32);

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A single real-time job: arrival, per-stage processing times, end-to-end
/// deadline, and the per-stage resource mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    pub arrival: Time,
    pub deadline: Time,
    /// Processing time per stage; zero means the job skips that stage.
    pub proc: Vec<Time>,
    /// Resource the job uses at each stage.
    pub mapping: Vec<ResourceId>,
}

impl Job {
    /// End of the job's interference window, `A_i + D_i`, saturating.
    pub fn window_end(&self) -> Time {
        self.arrival.saturating_add(self.deadline)
    }

    /// Whether the interference windows `[A, A+D]` of two jobs intersect.
    /// Jobs with disjoint windows cannot delay each other.
    pub fn windows_overlap(&self, other: &Job) -> bool {
        self.arrival <= other.window_end() && other.arrival <= self.window_end()
    }

    /// The `x`-th largest stage-processing time (1-based); zero when `x`
    /// exceeds the number of stages.
    pub fn stage_max(&self, x: usize) -> Time {
        let mut sorted = self.proc.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if x == 0 || x > sorted.len() {
            0
        } else {
            sorted[x - 1]
        }
    }
}

/// The pipeline shape: number of stages and the resource pool per stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pipeline {
    /// Resource pool per stage, in stage order. Pools are kept sorted.
    pub pools: Vec<Vec<ResourceId>>,
}

impl Pipeline {
    pub fn new(mut pools: Vec<Vec<ResourceId>>) -> Result<Pipeline> {
        if pools.is_empty() {
            return Err(Error::arg("pipeline must have at least one stage"));
        }
        for (j, pool) in pools.iter_mut().enumerate() {
            if pool.is_empty() {
                return Err(Error::arg(format!("stage {j} has an empty resource pool")));
            }
            pool.sort_unstable();
            if pool.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::arg(format!(
                    "stage {j} has duplicate resource identifiers"
                )));
            }
        }
        Ok(Pipeline { pools })
    }

    pub fn num_stages(&self) -> usize {
        self.pools.len()
    }

    /// True when every stage offers exactly one resource, i.e. all jobs
    /// compete everywhere (the single-resource pipeline shape).
    pub fn is_single_resource(&self) -> bool {
        self.pools.iter().all(|p| p.len() == 1)
    }
}

/// A pipeline together with the jobs to schedule on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSet {
    pub pipeline: Pipeline,
    pub jobs: Vec<Job>,
}

impl JobSet {
    pub fn new(pipeline: Pipeline, jobs: Vec<Job>) -> Result<JobSet> {
        let n_stages = pipeline.num_stages();
        for (idx, job) in jobs.iter().enumerate() {
            if job.id != idx {
                return Err(Error::arg(format!(
                    "job ids must be 0..n without gaps; found {} at position {idx}",
                    job.id
                )));
            }
            if job.proc.len() != n_stages || job.mapping.len() != n_stages {
                return Err(Error::arg(format!(
                    "job {idx}: proc/mapping length must equal {n_stages} stages"
                )));
            }
            if job.deadline == 0 {
                return Err(Error::arg(format!("job {idx}: deadline must be positive")));
            }
            for (j, r) in job.mapping.iter().enumerate() {
                if !pipeline.pools[j].contains(r) {
                    return Err(Error::arg(format!(
                        "job {idx}: resource {r} is not in stage {j}'s pool"
                    )));
                }
            }
        }
        Ok(JobSet { pipeline, jobs })
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn num_stages(&self) -> usize {
        self.pipeline.num_stages()
    }

    pub fn job(&self, i: JobId) -> Result<&Job> {
        self.jobs.get(i).ok_or_else(|| Error::arg(format!("invalid job id {i}")))
    }

    /// Whether jobs `i` and `k` share stage `j`: same resource and both
    /// actually visit the stage.
    pub fn shares_stage(&self, i: JobId, k: JobId, j: usize) -> bool {
        let (a, b) = (&self.jobs[i], &self.jobs[k]);
        a.mapping[j] == b.mapping[j] && a.proc[j] > 0 && b.proc[j] > 0
    }
}

/// Shared-stage structure of an ordered job pair `(i, k)`.
///
/// `shared_proc[j]` is `P_{k,j}` when the pair shares stage `j` and zero
/// otherwise; `u`/`v` count shared segments of exactly one stage and of two
/// or more stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentProfile {
    pub shared_proc: Vec<Time>,
    pub u: usize,
    pub v: usize,
}

impl SegmentProfile {
    /// Number of shared segments, `m = u + v`.
    pub fn m(&self) -> usize {
        self.u + self.v
    }

    /// Maximum number of interfering stage-processing terms, `w = u + 2v`.
    pub fn w(&self) -> usize {
        self.u + 2 * self.v
    }

    /// The `x`-th largest shared stage-processing time (1-based); zero past
    /// the number of positive shared stages.
    pub fn shared_max(&self, x: usize) -> Time {
        let mut sorted = self.shared_proc.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if x == 0 || x > sorted.len() {
            0
        } else {
            sorted[x - 1]
        }
    }

    /// Sum of the `count` largest shared stage-processing times.
    pub fn shared_top_sum(&self, count: usize) -> Time {
        let mut sorted = self.shared_proc.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.iter().take(count).sum()
    }
}

fn profile_from_flags(shared: &[bool], proc_k: &[Time]) -> SegmentProfile {
    let mut u = 0;
    let mut v = 0;
    let mut run = 0usize;
    let flush = |run: &mut usize, u: &mut usize, v: &mut usize| {
        match *run {
            0 => {}
            1 => *u += 1,
            _ => *v += 1,
        }
        *run = 0;
    };
    let mut shared_proc = vec![0; shared.len()];
    for (j, &s) in shared.iter().enumerate() {
        if s {
            run += 1;
            shared_proc[j] = proc_k[j];
        } else {
            flush(&mut run, &mut u, &mut v);
        }
    }
    flush(&mut run, &mut u, &mut v);
    SegmentProfile { shared_proc, u, v }
}

/// Shared-segment structure of the ordered pair `(i, k)` via a run-length
/// scan over the stage mappings.
pub fn segment_profile(jobset: &JobSet, i: JobId, k: JobId) -> Result<SegmentProfile> {
    if i == k {
        return Err(Error::arg("segment profile requires two distinct jobs"));
    }
    jobset.job(i)?;
    jobset.job(k)?;
    let n_stages = jobset.num_stages();
    let shared: Vec<bool> = (0..n_stages).map(|j| jobset.shares_stage(i, k, j)).collect();
    Ok(profile_from_flags(&shared, &jobset.jobs[k].proc))
}

/// The job's segment structure with respect to itself: maximal runs of
/// stages it actually visits. Used for the self terms of the
/// multi-resource bounds.
pub(crate) fn self_profile(job: &Job) -> SegmentProfile {
    let shared: Vec<bool> = job.proc.iter().map(|&p| p > 0).collect();
    profile_from_flags(&shared, &job.proc)
}

/// Per-job, per-stage competitor sets: which jobs are mapped to the same
/// resource as job `i` at each stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompetitorSets {
    per_stage: Vec<Vec<BTreeSet<JobId>>>,
    overall: Vec<BTreeSet<JobId>>,
}

impl CompetitorSets {
    /// Jobs mapped with `i` at stage `j`.
    pub fn at_stage(&self, i: JobId, j: usize) -> &BTreeSet<JobId> {
        &self.per_stage[i][j]
    }

    /// All jobs that compete with `i` somewhere in the pipeline.
    pub fn of(&self, i: JobId) -> &BTreeSet<JobId> {
        &self.overall[i]
    }

    pub fn competes(&self, i: JobId, k: JobId) -> bool {
        self.overall[i].contains(&k)
    }

    /// All unordered competing pairs `(i, k)` with `i < k`, in
    /// lexicographic order.
    pub fn pairs(&self) -> Vec<(JobId, JobId)> {
        let mut out = Vec::new();
        for (i, set) in self.overall.iter().enumerate() {
            for &k in set.iter().filter(|&&k| k > i) {
                out.push((i, k));
            }
        }
        out
    }
}

/// Competitor sets for every job: `k` competes with `i` at stage `j` iff
/// `k != i` and both are mapped to the same resource there.
pub fn competitor_sets(jobset: &JobSet) -> CompetitorSets {
    let n = jobset.len();
    let n_stages = jobset.num_stages();
    let mut per_stage = vec![vec![BTreeSet::new(); n_stages]; n];
    let mut overall = vec![BTreeSet::new(); n];
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n_stages {
                if jobset.jobs[i].mapping[j] == jobset.jobs[k].mapping[j] {
                    per_stage[i][j].insert(k);
                    per_stage[k][j].insert(i);
                    overall[i].insert(k);
                    overall[k].insert(i);
                }
            }
        }
    }
    CompetitorSets { per_stage, overall }
}

/// Interference sets of a job: higher- and lower-priority jobs whose
/// windows overlap the job's own, the higher-priority jobs arriving
/// strictly later, and `Q = higher ∪ {i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceSets {
    pub job: JobId,
    pub higher: BTreeSet<JobId>,
    pub lower: BTreeSet<JobId>,
    /// Higher-priority jobs with `A_k > A_i` (they join the pipeline after
    /// the job under analysis).
    pub higher_after: BTreeSet<JobId>,
}

impl InterferenceSets {
    /// `Q_i = H_i ∪ {i}`.
    pub fn q(&self) -> BTreeSet<JobId> {
        let mut q = self.higher.clone();
        q.insert(self.job);
        q
    }
}

/// Builds the interference sets of job `i` from candidate higher/lower sets,
/// dropping every job whose window `[A_k, A_k+D_k]` does not overlap
/// `[A_i, A_i+D_i]`.
pub fn interference_sets(
    jobset: &JobSet,
    i: JobId,
    higher: &BTreeSet<JobId>,
    lower: &BTreeSet<JobId>,
) -> Result<InterferenceSets> {
    let me = jobset.job(i)?;
    if higher.contains(&i) || lower.contains(&i) {
        return Err(Error::arg(format!(
            "job {i} cannot appear in its own higher/lower set"
        )));
    }
    if let Some(k) = higher.intersection(lower).next() {
        return Err(Error::arg(format!(
            "job {k} appears in both the higher and the lower set"
        )));
    }
    let keep = |k: &JobId| -> Result<bool> {
        Ok(jobset.job(*k)?.windows_overlap(me))
    };
    let mut h = BTreeSet::new();
    for &k in higher {
        if keep(&k)? {
            h.insert(k);
        }
    }
    let mut l = BTreeSet::new();
    for &k in lower {
        if keep(&k)? {
            l.insert(k);
        }
    }
    let higher_after = h
        .iter()
        .copied()
        .filter(|&k| jobset.jobs[k].arrival > me.arrival)
        .collect();
    Ok(InterferenceSets {
        job: i,
        higher: h,
        lower: l,
        higher_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rid(r: u32) -> ResourceId {
        ResourceId(r)
    }

    /// 4-stage pipeline with two resources per stage; mappings chosen per
    /// test via the `maps` rows.
    fn jobset_4stage(maps: &[[u32; 4]], procs: &[[Time; 4]]) -> JobSet {
        let pools = vec![vec![rid(0), rid(1)]; 4];
        let pipeline = Pipeline::new(pools).unwrap();
        let jobs = maps
            .iter()
            .zip(procs)
            .enumerate()
            .map(|(id, (m, p))| Job {
                id,
                arrival: 0,
                deadline: 100,
                proc: p.to_vec(),
                mapping: m.iter().copied().map(rid).collect(),
            })
            .collect();
        JobSet::new(pipeline, jobs).unwrap()
    }

    #[test]
    fn segments_disjoint_mapping() {
        let js = jobset_4stage(
            &[[0, 0, 0, 0], [1, 1, 1, 1]],
            &[[1, 1, 1, 1], [1, 1, 1, 1]],
        );
        let p = segment_profile(&js, 0, 1).unwrap();
        assert_eq!((p.u, p.v, p.m(), p.w()), (0, 0, 0, 0));
        assert!(p.shared_proc.iter().all(|&t| t == 0));
    }

    #[test]
    fn segments_single_shared_stage() {
        // mappings coincide exactly at stage index 1
        let js = jobset_4stage(
            &[[0, 0, 0, 0], [1, 0, 1, 1]],
            &[[1, 2, 1, 1], [1, 3, 1, 1]],
        );
        let p = segment_profile(&js, 0, 1).unwrap();
        assert_eq!((p.u, p.v, p.m(), p.w()), (1, 0, 1, 1));
        assert_eq!(p.shared_proc, vec![0, 3, 0, 0]);
    }

    #[test]
    fn segments_two_runs() {
        // shared at stages {0,1} and {3}: one long segment, one short
        let js = jobset_4stage(
            &[[0, 0, 0, 0], [0, 0, 1, 0]],
            &[[1, 1, 1, 1], [4, 5, 6, 7]],
        );
        let p = segment_profile(&js, 0, 1).unwrap();
        assert_eq!((p.u, p.v, p.m(), p.w()), (1, 1, 2, 3));
        assert_eq!(p.shared_proc, vec![4, 5, 0, 7]);
    }

    #[test]
    fn zero_processing_breaks_segment() {
        // same resource everywhere, but job 1 skips stage 1: two runs
        let js = jobset_4stage(
            &[[0, 0, 0, 0], [0, 0, 0, 0]],
            &[[1, 1, 1, 1], [2, 0, 2, 2]],
        );
        let p = segment_profile(&js, 0, 1).unwrap();
        assert_eq!((p.u, p.v), (1, 1));
        assert_eq!(p.shared_proc, vec![2, 0, 2, 2]);
    }

    #[test]
    fn segment_profile_rejects_self_and_bad_ids() {
        let js = jobset_4stage(&[[0; 4], [1; 4]], &[[1; 4], [1; 4]]);
        assert!(segment_profile(&js, 0, 0).is_err());
        assert!(segment_profile(&js, 0, 7).is_err());
    }

    #[test]
    fn competitors_disjoint_and_symmetric() {
        let js = jobset_4stage(&[[0; 4], [1; 4]], &[[1; 4], [1; 4]]);
        let c = competitor_sets(&js);
        assert!(c.of(0).is_empty());
        assert!(c.of(1).is_empty());

        let js = jobset_4stage(&[[0, 0, 1, 1], [0, 1, 1, 0]], &[[1; 4], [1; 4]]);
        let c = competitor_sets(&js);
        assert!(c.competes(0, 1) && c.competes(1, 0));
        assert!(c.at_stage(0, 0).contains(&1));
        assert!(c.at_stage(0, 1).is_empty());
        assert_eq!(c.pairs(), vec![(0, 1)]);
    }

    #[test]
    fn single_resource_pipeline_everyone_competes_everywhere() {
        let pools = vec![vec![rid(0)]; 3];
        let jobs = (0..4)
            .map(|id| Job {
                id,
                arrival: 0,
                deadline: 10,
                proc: vec![1, 1, 1],
                mapping: vec![rid(0); 3],
            })
            .collect();
        let js = JobSet::new(Pipeline::new(pools).unwrap(), jobs).unwrap();
        let c = competitor_sets(&js);
        for i in 0..4 {
            assert_eq!(c.of(i).len(), 3);
            for j in 0..3 {
                assert_eq!(c.at_stage(i, j).len(), 3);
            }
        }
    }

    #[test]
    fn interference_filters_by_window() {
        let pipeline = Pipeline::new(vec![vec![rid(0)]]).unwrap();
        let mk = |id, arrival, deadline| Job {
            id,
            arrival,
            deadline,
            proc: vec![1],
            mapping: vec![rid(0)],
        };
        // i: [0,10]; k1: overlaps and arrives later; k2: disjoint window
        let js = JobSet::new(
            pipeline,
            vec![mk(0, 0, 10), mk(1, 5, 10), mk(2, 11, 3)],
        )
        .unwrap();
        let higher: BTreeSet<_> = [1, 2].into_iter().collect();
        let sets = interference_sets(&js, 0, &higher, &BTreeSet::new()).unwrap();
        assert!(sets.higher.contains(&1));
        assert!(!sets.higher.contains(&2));
        assert!(sets.higher_after.contains(&1));

        // all arrivals equal: nothing arrives strictly after
        let js2 = {
            let pipeline = Pipeline::new(vec![vec![rid(0)]]).unwrap();
            JobSet::new(pipeline, vec![mk(0, 0, 10), mk(1, 0, 10)]).unwrap()
        };
        let sets = interference_sets(&js2, 0, &[1].into_iter().collect(), &BTreeSet::new())
            .unwrap();
        assert!(sets.higher_after.is_empty());
    }

    #[test]
    fn interference_rejects_overlapping_sets() {
        let pipeline = Pipeline::new(vec![vec![rid(0)]]).unwrap();
        let mk = |id| Job {
            id,
            arrival: 0,
            deadline: 10,
            proc: vec![1],
            mapping: vec![rid(0)],
        };
        let js = JobSet::new(pipeline, vec![mk(0), mk(1)]).unwrap();
        let s: BTreeSet<_> = [1].into_iter().collect();
        assert!(interference_sets(&js, 0, &s, &s).is_err());
        assert!(interference_sets(&js, 0, &[0].into_iter().collect(), &BTreeSet::new()).is_err());
    }

    #[test]
    fn interference_filter_is_idempotent() {
        let pipeline = Pipeline::new(vec![vec![rid(0)]]).unwrap();
        let mk = |id, arrival, deadline| Job {
            id,
            arrival,
            deadline,
            proc: vec![1],
            mapping: vec![rid(0)],
        };
        let js = JobSet::new(
            pipeline,
            vec![mk(0, 0, 10), mk(1, 3, 4), mk(2, 30, 5), mk(3, 9, 20)],
        )
        .unwrap();
        let higher: BTreeSet<_> = [1, 2].into_iter().collect();
        let lower: BTreeSet<_> = [3].into_iter().collect();
        let once = interference_sets(&js, 0, &higher, &lower).unwrap();
        let twice = interference_sets(&js, 0, &once.higher, &once.lower).unwrap();
        assert_eq!(once, twice);
    }
}
