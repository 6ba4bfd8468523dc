//! Discrete-event simulation of fixed-priority pipeline execution.
//!
//! The simulator is the empirical soundness oracle for the analytic
//! bounds: any simulated end-to-end delay must stay at or below the bound
//! of the matching mode. Execution is work-conserving and event-driven;
//! each resource runs at most one job, preemptive resources switch to a
//! higher-priority job on arrival, and jobs advance stage by stage,
//! skipping stages with zero processing time.
//!
//! Simultaneous events are processed finish-first, then arrivals, then one
//! dispatch pass per touched resource, with resource id and job id breaking
//! remaining ties, so identical inputs always produce identical traces.
//!
//! Dispatch can follow a total ordering, a pairwise tournament (the winner
//! among queued jobs is the one with the most pairwise wins; cycles fall
//! back to the tie-break rule), or per-stage numeric keys, which is how the
//! deadline-decomposition baseline (DCMP) schedules by virtual deadline.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::assign::{
    AssignmentOutcome, Feasibility, PairwiseAssignment, PriorityOrdering,
};
use crate::error::{Error, Result};
use crate::model::{competitor_sets, JobId, JobSet, ResourceId, Time};
use crate::workload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preemption {
    Preemptive,
    NonPreemptive,
}

/// Deterministic rule applied when the dispatch policy itself ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TieBreak {
    LowestId,
    EarliestArrival,
}

/// How a resource picks among its queued jobs.
///
/// The analytic bounds are only claimed against total orderings; pairwise
/// dispatch is provided for experimentation (a cyclic tournament has no
/// canonical runtime semantics, so the most-wins rule here is one choice
/// among several).
#[derive(Debug, Clone)]
pub enum DispatchPolicy {
    Ordering(PriorityOrdering),
    Pairwise(PairwiseAssignment),
    /// Per-job, per-stage numeric key; smaller runs first.
    StageKeys(Vec<Vec<Time>>),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Preemption flag per stage.
    pub preemption: Vec<Preemption>,
    pub tie_break: TieBreak,
}

impl SimConfig {
    pub fn uniform(n_stages: usize, p: Preemption) -> SimConfig {
        SimConfig {
            preemption: vec![p; n_stages],
            tie_break: TieBreak::LowestId,
        }
    }

    /// The edge pipeline shape: non-preemptive offload, preemptive
    /// compute, non-preemptive download.
    pub fn edge() -> SimConfig {
        SimConfig {
            preemption: vec![
                Preemption::NonPreemptive,
                Preemption::Preemptive,
                Preemption::NonPreemptive,
            ],
            tie_break: TieBreak::LowestId,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Start,
    Preempt,
    Resume,
    FinishStage,
    ExitPipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub time: Time,
    pub stage: usize,
    pub resource: ResourceId,
    pub job: JobId,
    pub kind: EventKind,
}

/// Timestamped execution trace plus per-job pipeline-exit times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
    /// Absolute exit time per job.
    pub completion: Vec<Time>,
}

impl SimTrace {
    /// End-to-end delay of a job: exit time minus arrival.
    pub fn delay(&self, jobset: &JobSet, i: JobId) -> Time {
        self.completion[i] - jobset.jobs[i].arrival
    }

    /// Checks the structural trace invariants: per-resource mutual
    /// exclusion, stage ordering, exact processed time per stage, no
    /// preemptions on non-preemptive resources, and work conservation (a
    /// resource never idles while a job waits on it).
    pub fn validate(&self, jobset: &JobSet, preemption: &[Preemption]) -> Result<()> {
        let n = jobset.len();
        let n_stages = jobset.num_stages();
        let fail = |msg: String| Err(Error::Argument(msg));

        // Reconstruct run intervals per (job, stage).
        let mut open: BTreeMap<(JobId, usize), Time> = BTreeMap::new();
        let mut runs: BTreeMap<(JobId, usize), Vec<(Time, Time)>> = BTreeMap::new();
        for ev in &self.events {
            match ev.kind {
                EventKind::Start | EventKind::Resume => {
                    if open.insert((ev.job, ev.stage), ev.time).is_some() {
                        return fail(format!("job {} started twice at stage {}", ev.job, ev.stage));
                    }
                }
                EventKind::Preempt | EventKind::FinishStage => {
                    match open.remove(&(ev.job, ev.stage)) {
                        Some(begin) => runs
                            .entry((ev.job, ev.stage))
                            .or_default()
                            .push((begin, ev.time)),
                        None => {
                            return fail(format!(
                                "job {} stopped at stage {} without running",
                                ev.job, ev.stage
                            ))
                        }
                    }
                    if ev.kind == EventKind::Preempt
                        && preemption[ev.stage] == Preemption::NonPreemptive
                    {
                        return fail(format!("preemption on non-preemptive stage {}", ev.stage));
                    }
                }
                EventKind::ExitPipeline => {}
            }
        }
        if !open.is_empty() {
            return fail("trace ended with a job still running".into());
        }

        // Processed time per stage must equal the stage demand exactly.
        for (i, job) in jobset.jobs.iter().enumerate() {
            for j in 0..n_stages {
                let processed: Time = runs
                    .get(&(i, j))
                    .map(|v| v.iter().map(|(b, e)| e - b).sum())
                    .unwrap_or(0);
                if processed != job.proc[j] {
                    return fail(format!(
                        "job {i} processed {processed} at stage {j}, expected {}",
                        job.proc[j]
                    ));
                }
            }
        }

        // Stage ordering and per-resource busy intervals.
        let mut busy: BTreeMap<(usize, ResourceId), Vec<(Time, Time)>> = BTreeMap::new();
        for ((job, stage), intervals) in &runs {
            let r = jobset.jobs[*job].mapping[*stage];
            busy.entry((*stage, r)).or_default().extend(intervals.iter().copied());
        }
        for intervals in busy.values_mut() {
            intervals.sort_unstable();
            for w in intervals.windows(2) {
                if w[1].0 < w[0].1 {
                    return fail("two jobs overlap on one resource".into());
                }
            }
        }

        // Ready intervals are covered by resource busy time (work
        // conservation) and stages run in order.
        let covered = |intervals: &[(Time, Time)], from: Time, to: Time| -> bool {
            let mut t = from;
            for &(b, e) in intervals {
                if b > t {
                    break;
                }
                if e > t {
                    t = e;
                }
                if t >= to {
                    return true;
                }
            }
            t >= to
        };
        for i in 0..n {
            let mut ready = jobset.jobs[i].arrival;
            for j in 0..n_stages {
                if jobset.jobs[i].proc[j] == 0 {
                    continue;
                }
                let Some(intervals) = runs.get(&(i, j)) else {
                    return fail(format!("job {i} never ran stage {j}"));
                };
                let r = jobset.jobs[i].mapping[j];
                let resource_busy = &busy[&(j, r)];
                let mut waiting_from = ready;
                for &(b, e) in intervals {
                    if b < ready {
                        return fail(format!("job {i} ran stage {j} before it was ready"));
                    }
                    if b > waiting_from && !covered(resource_busy, waiting_from, b) {
                        return fail(format!(
                            "resource idled while job {i} waited at stage {j}"
                        ));
                    }
                    waiting_from = e;
                }
                ready = intervals.last().unwrap().1;
            }
            if self.completion[i] != ready.max(jobset.jobs[i].arrival) {
                return fail(format!("job {i} completion inconsistent with its last run"));
            }
        }
        Ok(())
    }
}

/// Heap entry: (time, class, stage, resource slot, job, version); class 0
/// is a finish check, class 1 an arrival, so finishes drain first.
type Ev = (Time, u8, usize, usize, JobId, u64);

struct ResState {
    stage: usize,
    id: ResourceId,
    queue: BTreeSet<JobId>,
    running: Option<Running>,
    version: u64,
}

struct Running {
    job: JobId,
    since: Time,
    remaining: Time,
    version: u64,
}

struct Engine<'a> {
    jobset: &'a JobSet,
    policy: &'a DispatchPolicy,
    config: &'a SimConfig,
    resources: Vec<ResState>,
    slot_of: BTreeMap<(usize, ResourceId), usize>,
    /// Remaining work of each in-flight job at its current stage.
    job_remaining: Vec<Time>,
    preempted_before: Vec<BTreeSet<usize>>,
    heap: BinaryHeap<std::cmp::Reverse<Ev>>,
    events: Vec<TraceEvent>,
    completion: Vec<Time>,
}

impl<'a> Engine<'a> {
    /// Policy comparison: does `a` rank strictly before `b` at `stage`?
    fn outranks(&self, a: JobId, b: JobId, stage: usize) -> bool {
        match self.policy {
            DispatchPolicy::Ordering(o) => o.rho(a).unwrap() < o.rho(b).unwrap(),
            DispatchPolicy::Pairwise(x) => x.winner(a, b).ok().flatten() == Some(a),
            DispatchPolicy::StageKeys(keys) => keys[a][stage] < keys[b][stage],
        }
    }

    fn tie_key(&self, j: JobId) -> (Time, JobId) {
        match self.config.tie_break {
            TieBreak::LowestId => (0, j),
            TieBreak::EarliestArrival => (self.jobset.jobs[j].arrival, j),
        }
    }

    /// Best queued job at a resource, if any.
    fn select(&self, slot: usize) -> Option<JobId> {
        let res = &self.resources[slot];
        let queue = &res.queue;
        match self.policy {
            DispatchPolicy::Ordering(o) => {
                queue.iter().copied().min_by_key(|&j| o.rho(j).unwrap())
            }
            DispatchPolicy::Pairwise(x) => {
                // Tournament restricted to the queue: most pairwise wins,
                // then the tie-break rule.
                queue.iter().copied().min_by_key(|&j| {
                    let wins = queue
                        .iter()
                        .filter(|&&k| k != j && x.winner(j, k).ok().flatten() == Some(j))
                        .count();
                    (std::cmp::Reverse(wins), self.tie_key(j))
                })
            }
            DispatchPolicy::StageKeys(keys) => queue
                .iter()
                .copied()
                .min_by_key(|&j| (keys[j][res.stage], self.tie_key(j))),
        }
    }

    fn record(&mut self, time: Time, slot: usize, job: JobId, kind: EventKind) {
        let res = &self.resources[slot];
        self.events.push(TraceEvent {
            time,
            stage: res.stage,
            resource: res.id,
            job,
            kind,
        });
    }

    /// Moves a finished job to its next positive stage, or out of the
    /// pipeline.
    fn advance(&mut self, now: Time, job: JobId, from_stage: usize) {
        let n_stages = self.jobset.num_stages();
        let mut j = from_stage + 1;
        while j < n_stages && self.jobset.jobs[job].proc[j] == 0 {
            j += 1;
        }
        if j == n_stages {
            let last_slot = self.slot_of[&(from_stage, self.jobset.jobs[job].mapping[from_stage])];
            self.record(now, last_slot, job, EventKind::ExitPipeline);
            self.completion[job] = now;
        } else {
            let slot = self.slot_of[&(j, self.jobset.jobs[job].mapping[j])];
            self.heap.push(std::cmp::Reverse((now, 1, j, slot, job, 0)));
        }
    }

    fn dispatch(&mut self, now: Time, slot: usize) {
        let stage = self.resources[slot].stage;
        let Some(best) = self.select(slot) else { return };

        if let Some(run) = &self.resources[slot].running {
            let can_preempt = self.config.preemption[stage] == Preemption::Preemptive
                && self.outranks(best, run.job, stage);
            if !can_preempt {
                return;
            }
            let (old_job, since, remaining) = (run.job, run.since, run.remaining);
            let elapsed = now - since;
            self.job_remaining[old_job] = remaining - elapsed;
            self.record(now, slot, old_job, EventKind::Preempt);
            self.preempted_before[old_job].insert(stage);
            let res = &mut self.resources[slot];
            res.running = None;
            res.version += 1;
            res.queue.insert(old_job);
        }

        // Re-select: requeueing the preempted job may change the winner
        // when the pairwise tournament is cyclic.
        let Some(next) = self.select(slot) else { return };
        let res = &mut self.resources[slot];
        res.queue.remove(&next);
        let version = res.version;
        let remaining = self.job_remaining[next];
        res.running = Some(Running {
            job: next,
            since: now,
            remaining,
            version,
        });
        let kind = if self.preempted_before[next].contains(&stage) {
            EventKind::Resume
        } else {
            EventKind::Start
        };
        self.record(now, slot, next, kind);
        self.heap.push(std::cmp::Reverse((
            now + remaining,
            0,
            stage,
            slot,
            next,
            version,
        )));
    }

    fn run(&mut self) {
        while let Some(&std::cmp::Reverse((now, ..))) = self.heap.peek() {
            let mut touched: BTreeSet<usize> = BTreeSet::new();
            while let Some(&std::cmp::Reverse((t, class, stage, slot, job, version))) =
                self.heap.peek()
            {
                if t != now {
                    break;
                }
                self.heap.pop();
                if class == 0 {
                    // Finish check; stale when the resource moved on.
                    let valid = self.resources[slot]
                        .running
                        .as_ref()
                        .is_some_and(|r| r.job == job && r.version == version);
                    if valid {
                        self.resources[slot].running = None;
                        self.resources[slot].version += 1;
                        self.job_remaining[job] = 0;
                        self.record(now, slot, job, EventKind::FinishStage);
                        self.advance(now, job, stage);
                        touched.insert(slot);
                    }
                } else {
                    self.job_remaining[job] = self.jobset.jobs[job].proc[stage];
                    self.resources[slot].queue.insert(job);
                    touched.insert(slot);
                }
            }
            for slot in touched {
                self.dispatch(now, slot);
            }
        }
    }
}

/// Runs the job set to completion under the given dispatch policy.
pub fn simulate(
    jobset: &JobSet,
    policy: &DispatchPolicy,
    config: &SimConfig,
) -> Result<SimTrace> {
    let n = jobset.len();
    let n_stages = jobset.num_stages();
    if config.preemption.len() != n_stages {
        return Err(Error::arg(format!(
            "config has {} preemption flags for {n_stages} stages",
            config.preemption.len()
        )));
    }
    match policy {
        DispatchPolicy::Ordering(o) => {
            if !o.covers_all(n) {
                return Err(Error::arg("ordering does not cover every job"));
            }
        }
        DispatchPolicy::Pairwise(x) => {
            let comp = competitor_sets(jobset);
            for (i, k) in comp.pairs() {
                if x.winner(i, k).ok().flatten().is_none() {
                    return Err(Error::arg(format!(
                        "pairwise priorities leave competing pair ({i}, {k}) undecided"
                    )));
                }
            }
        }
        DispatchPolicy::StageKeys(keys) => {
            if keys.len() != n || keys.iter().any(|k| k.len() != n_stages) {
                return Err(Error::arg("stage keys must be n x stages"));
            }
        }
    }

    let mut resources = Vec::new();
    let mut slot_of = BTreeMap::new();
    for (stage, pool) in jobset.pipeline.pools.iter().enumerate() {
        for &rid in pool {
            slot_of.insert((stage, rid), resources.len());
            resources.push(ResState {
                stage,
                id: rid,
                queue: BTreeSet::new(),
                running: None,
                version: 0,
            });
        }
    }

    let mut engine = Engine {
        jobset,
        policy,
        config,
        resources,
        slot_of,
        job_remaining: vec![0; n],
        preempted_before: vec![BTreeSet::new(); n],
        heap: BinaryHeap::new(),
        events: Vec::new(),
        completion: vec![0; n],
    };

    for (i, job) in jobset.jobs.iter().enumerate() {
        match (0..n_stages).find(|&j| job.proc[j] > 0) {
            Some(first) => {
                let slot = engine.slot_of[&(first, job.mapping[first])];
                engine
                    .heap
                    .push(std::cmp::Reverse((job.arrival, 1, first, slot, i, 0)));
            }
            None => {
                // Nothing to process anywhere: the job exits on arrival.
                engine.completion[i] = job.arrival;
                let slot = engine.slot_of[&(n_stages - 1, job.mapping[n_stages - 1])];
                engine.record(job.arrival, slot, i, EventKind::ExitPipeline);
            }
        }
    }

    engine.run();
    let mut events = engine.events;
    events.sort_by_key(|e| e.time);
    Ok(SimTrace {
        events,
        completion: engine.completion,
    })
}

/// Splits each end-to-end deadline into per-stage virtual deadlines
/// proportional to the heaviness of the resources the job visits, rounding
/// down with the remainder credited to the last stage so the parts sum to
/// the deadline exactly.
pub fn virtual_deadlines(jobset: &JobSet) -> Result<Vec<Vec<Time>>> {
    let chi = workload::chi(jobset);
    let n_stages = jobset.num_stages();
    let mut out = Vec::with_capacity(jobset.len());
    for job in &jobset.jobs {
        let upsilon: Vec<BigRational> = (0..n_stages)
            .map(|j| chi[j].get(&job.mapping[j]).cloned().unwrap_or_else(BigRational::zero))
            .collect();
        let total: BigRational = upsilon.iter().sum();
        if total.is_zero() {
            return Err(Error::arg(format!(
                "job {} has zero total heaviness across its resources",
                job.id
            )));
        }
        let mut vd: Vec<Time> = Vec::with_capacity(n_stages);
        let deadline = BigRational::from_integer(job.deadline.into());
        for u in &upsilon {
            let share = &deadline * u / &total;
            vd.push(share.floor().to_integer().to_u64().unwrap_or(0));
        }
        let assigned: Time = vd.iter().sum();
        *vd.last_mut().unwrap() += job.deadline - assigned;
        out.push(vd);
    }
    Ok(out)
}

/// The deadline-decomposition baseline: per stage, dispatch by earliest
/// absolute virtual deadline (arrival plus the job's virtual-deadline
/// prefix), accept iff every simulated exit meets the end-to-end deadline.
pub fn dcmp(jobset: &JobSet, preemption: &[Preemption]) -> Result<AssignmentOutcome> {
    let n = jobset.len();
    let vds = virtual_deadlines(jobset)?;
    let keys: Vec<Vec<Time>> = jobset
        .jobs
        .iter()
        .zip(&vds)
        .map(|(job, vd)| {
            let mut acc = job.arrival;
            vd.iter()
                .map(|&d| {
                    acc = acc.saturating_add(d);
                    acc
                })
                .collect()
        })
        .collect();
    let config = SimConfig {
        preemption: preemption.to_vec(),
        tie_break: TieBreak::LowestId,
    };
    let trace = simulate(jobset, &DispatchPolicy::StageKeys(keys), &config)?;
    let ok = jobset
        .jobs
        .iter()
        .enumerate()
        .all(|(i, job)| trace.completion[i] <= job.window_end());
    let mut out = AssignmentOutcome::new(
        if ok { Feasibility::Feasible } else { Feasibility::Infeasible },
        n,
    );
    if ok {
        out.accepted = (0..n).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dca::{self, BoundMode};
    use crate::model::{interference_sets, Job, Pipeline};

    fn example1(deadlines: [Time; 4]) -> JobSet {
        let pools = vec![vec![ResourceId(0)]; 3];
        let procs: [[Time; 3]; 4] = [[5, 7, 15], [7, 9, 17], [6, 8, 30], [2, 4, 3]];
        let jobs = procs
            .iter()
            .zip(deadlines)
            .enumerate()
            .map(|(id, (p, d))| Job {
                id,
                arrival: 0,
                deadline: d,
                proc: p.to_vec(),
                mapping: vec![ResourceId(0); 3],
            })
            .collect();
        JobSet::new(Pipeline::new(pools).unwrap(), jobs).unwrap()
    }

    fn ordering(ids: &[JobId]) -> DispatchPolicy {
        DispatchPolicy::Ordering(PriorityOrdering::from_ranked(ids.to_vec()).unwrap())
    }

    #[test]
    fn single_job_runs_unimpeded() {
        let pools = vec![vec![ResourceId(0)]; 3];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![Job {
                id: 0,
                arrival: 0,
                deadline: 100,
                proc: vec![5, 7, 15],
                mapping: vec![ResourceId(0); 3],
            }],
        )
        .unwrap();
        let config = SimConfig::uniform(3, Preemption::Preemptive);
        let trace = simulate(&js, &ordering(&[0]), &config).unwrap();
        assert_eq!(trace.completion[0], 27);
        trace.validate(&js, &config.preemption).unwrap();
    }

    #[test]
    fn two_equal_jobs_serialize() {
        let pools = vec![vec![ResourceId(0)]];
        let mk = |id| Job {
            id,
            arrival: 0,
            deadline: 100,
            proc: vec![10],
            mapping: vec![ResourceId(0)],
        };
        let js = JobSet::new(Pipeline::new(pools).unwrap(), vec![mk(0), mk(1)]).unwrap();
        let config = SimConfig::uniform(1, Preemption::NonPreemptive);
        let trace = simulate(&js, &ordering(&[0, 1]), &config).unwrap();
        assert_eq!(trace.completion, vec![10, 20]);
        trace.validate(&js, &config.preemption).unwrap();
    }

    #[test]
    fn example1_simulation_within_bound() {
        let js = example1([60, 92, 55, 50]);
        let config = SimConfig::uniform(3, Preemption::NonPreemptive);
        let trace = simulate(&js, &ordering(&[0, 1, 2, 3]), &config).unwrap();
        trace.validate(&js, &config.preemption).unwrap();
        let sets = interference_sets(
            &js,
            1,
            &[0].into_iter().collect(),
            &[2, 3].into_iter().collect(),
        )
        .unwrap();
        let b = dca::bound(&js, 1, &sets, BoundMode::NonpreemptiveSingle).unwrap();
        assert_eq!(b.total, 92);
        assert!(trace.delay(&js, 1) <= b.total);
    }

    #[test]
    fn preemption_events_recorded() {
        // Low-priority long job starts first, high-priority job arrives
        // later and preempts it.
        let pools = vec![vec![ResourceId(0)]];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![
                Job {
                    id: 0,
                    arrival: 5,
                    deadline: 100,
                    proc: vec![3],
                    mapping: vec![ResourceId(0)],
                },
                Job {
                    id: 1,
                    arrival: 0,
                    deadline: 100,
                    proc: vec![20],
                    mapping: vec![ResourceId(0)],
                },
            ],
        )
        .unwrap();
        let config = SimConfig::uniform(1, Preemption::Preemptive);
        let trace = simulate(&js, &ordering(&[0, 1]), &config).unwrap();
        trace.validate(&js, &config.preemption).unwrap();
        assert_eq!(trace.completion, vec![8, 23]);
        assert!(trace
            .events
            .iter()
            .any(|e| e.kind == EventKind::Preempt && e.job == 1 && e.time == 5));
        assert!(trace
            .events
            .iter()
            .any(|e| e.kind == EventKind::Resume && e.job == 1 && e.time == 8));

        // Same instance, non-preemptive: the long job blocks.
        let config = SimConfig::uniform(1, Preemption::NonPreemptive);
        let trace = simulate(&js, &ordering(&[0, 1]), &config).unwrap();
        trace.validate(&js, &config.preemption).unwrap();
        assert_eq!(trace.completion, vec![23, 20]);
    }

    #[test]
    fn zero_proc_stage_is_skipped() {
        let pools = vec![vec![ResourceId(0)]; 3];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![
                Job {
                    id: 0,
                    arrival: 0,
                    deadline: 100,
                    proc: vec![4, 0, 4],
                    mapping: vec![ResourceId(0); 3],
                },
                Job {
                    id: 1,
                    arrival: 0,
                    deadline: 100,
                    proc: vec![0, 6, 0],
                    mapping: vec![ResourceId(0); 3],
                },
            ],
        )
        .unwrap();
        let config = SimConfig::uniform(3, Preemption::Preemptive);
        let trace = simulate(&js, &ordering(&[0, 1]), &config).unwrap();
        trace.validate(&js, &config.preemption).unwrap();
        // Job 0 never touches stage 1, so job 1 computes from t = 0.
        assert_eq!(trace.completion[0], 8);
        assert_eq!(trace.completion[1], 6);
    }

    #[test]
    fn all_zero_job_exits_on_arrival() {
        let pools = vec![vec![ResourceId(0)]];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![Job {
                id: 0,
                arrival: 7,
                deadline: 1,
                proc: vec![0],
                mapping: vec![ResourceId(0)],
            }],
        )
        .unwrap();
        let config = SimConfig::uniform(1, Preemption::Preemptive);
        let trace = simulate(&js, &ordering(&[0]), &config).unwrap();
        assert_eq!(trace.completion[0], 7);
    }

    #[test]
    fn identical_inputs_identical_traces() {
        let js = example1([60, 92, 55, 50]);
        let config = SimConfig::uniform(3, Preemption::NonPreemptive);
        let a = simulate(&js, &ordering(&[2, 0, 3, 1]), &config).unwrap();
        let b = simulate(&js, &ordering(&[2, 0, 3, 1]), &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn incomplete_pairwise_rejected() {
        let js = example1([60, 92, 55, 50]);
        let x = PairwiseAssignment::undecided_for(&js);
        let config = SimConfig::uniform(3, Preemption::Preemptive);
        assert!(matches!(
            simulate(&js, &DispatchPolicy::Pairwise(x), &config),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn pairwise_dispatch_runs_to_completion() {
        let js = example1([100, 100, 100, 100]);
        let x = crate::assign::dm_pairwise(&js);
        let config = SimConfig::uniform(3, Preemption::Preemptive);
        let trace = simulate(&js, &DispatchPolicy::Pairwise(x), &config).unwrap();
        trace.validate(&js, &config.preemption).unwrap();
    }

    #[test]
    fn virtual_deadline_splits() {
        // Single job on a 3-stage single-resource pipeline: its own
        // heaviness is equal at every stage exactly when the stage times
        // are equal.
        let pools = vec![vec![ResourceId(0)]; 3];
        let mk = |proc: [Time; 3], deadline| {
            JobSet::new(
                Pipeline::new(pools.clone()).unwrap(),
                vec![Job {
                    id: 0,
                    arrival: 0,
                    deadline,
                    proc: proc.to_vec(),
                    mapping: vec![ResourceId(0); 3],
                }],
            )
            .unwrap()
        };
        assert_eq!(virtual_deadlines(&mk([5, 5, 5], 30)).unwrap()[0], vec![10, 10, 10]);
        assert_eq!(virtual_deadlines(&mk([5, 10, 5], 40)).unwrap()[0], vec![10, 20, 10]);
        assert_eq!(virtual_deadlines(&mk([5, 5, 5], 10)).unwrap()[0], vec![3, 3, 4]);
    }

    #[test]
    fn virtual_deadline_zero_heaviness_errors() {
        let pools = vec![vec![ResourceId(0)]];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![Job {
                id: 0,
                arrival: 0,
                deadline: 10,
                proc: vec![0],
                mapping: vec![ResourceId(0)],
            }],
        )
        .unwrap();
        assert!(virtual_deadlines(&js).is_err());
    }

    #[test]
    fn dcmp_can_reject_what_the_analysis_accepts() {
        // Job 2's download-side resource is loaded by job 0's long stage,
        // so the proportional split hands job 2 a small stage-1 virtual
        // deadline and it jumps ahead of job 1 there; job 1 then misses.
        // The optimal ordering (1, 2, 0) is provable analytically.
        let pools = vec![vec![ResourceId(1)], vec![ResourceId(2), ResourceId(3)]];
        let mk = |id, proc: [Time; 2], d, r2| Job {
            id,
            arrival: 0,
            deadline: d,
            proc: proc.to_vec(),
            mapping: vec![ResourceId(1), ResourceId(r2)],
        };
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![
                mk(0, [0, 50], 60, 3),
                mk(1, [10, 10], 25, 2),
                mk(2, [10, 0], 30, 3),
            ],
        )
        .unwrap();
        let vds = virtual_deadlines(&js).unwrap();
        assert_eq!(vds[1][0], 16);
        assert_eq!(vds[2][0], 14);
        let flags = [Preemption::Preemptive; 2];
        assert!(!dcmp(&js, &flags).unwrap().is_feasible());
        let out = crate::assign::opdca(&js, BoundMode::PreemptiveRefined).unwrap();
        assert!(out.is_feasible());
    }

    #[test]
    fn dcmp_single_and_disjoint() {
        let pools = vec![vec![ResourceId(0)]; 3];
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![Job {
                id: 0,
                arrival: 0,
                deadline: 27,
                proc: vec![5, 7, 15],
                mapping: vec![ResourceId(0); 3],
            }],
        )
        .unwrap();
        let flags = [Preemption::Preemptive; 3];
        assert!(dcmp(&js, &flags).unwrap().is_feasible());

        let pools = vec![vec![ResourceId(0), ResourceId(1)]; 3];
        let mk = |id, r, d| Job {
            id,
            arrival: 0,
            deadline: d,
            proc: vec![5, 7, 15],
            mapping: vec![ResourceId(r); 3],
        };
        let js = JobSet::new(
            Pipeline::new(pools).unwrap(),
            vec![mk(0, 0, 27), mk(1, 1, 27)],
        )
        .unwrap();
        assert!(dcmp(&js, &flags).unwrap().is_feasible());
        let js = JobSet::new(
            Pipeline::new(vec![vec![ResourceId(0), ResourceId(1)]; 3]).unwrap(),
            vec![mk(0, 0, 27), mk(1, 1, 26)],
        )
        .unwrap();
        assert!(!dcmp(&js, &flags).unwrap().is_feasible());
    }
}
