//! Workload generation and heaviness metrics.
//!
//! The edge generator produces 3-stage job sets (offload AP, compute
//! server, download AP) whose load is controlled through *heaviness*:
//! `h_{i,j} = P_{i,j} / D_i` per job and stage, `χ` per resource is the sum
//! over its mapped jobs, and `H` is the system-wide maximum. A job is
//! heavy at a stage when `h_{i,j} >= β`; the generator hits a target
//! heavy-job count per stage exactly, caps every `h_{i,j}` at `2β`, and
//! rejects mappings whose `H` exceeds `γ`.
//!
//! All heaviness arithmetic is exact rational; there are no floats
//! anywhere in the generation or validation path.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::model::{Job, JobSet, Pipeline, ResourceId, Time};

/// Parses an exact non-negative rational from decimal (`"0.15"`),
/// fraction (`"3/20"`), or integer (`"2"`) notation.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::arg(format!("cannot parse '{s}' as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() || n.is_negative() || d.is_negative() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int_part: BigInt = if int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        if int_part.is_negative() {
            return Err(bad());
        }
        return Ok(BigRational::from_integer(int_part) + BigRational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    if n.is_negative() {
        return Err(bad());
    }
    Ok(BigRational::from_integer(n))
}

pub(crate) fn ratio_from_time(t: Time) -> BigRational {
    BigRational::from_integer(t.into())
}

/// Per-stage map from resource to the summed heaviness of its mapped jobs.
pub fn chi(jobset: &JobSet) -> Vec<BTreeMap<ResourceId, BigRational>> {
    let n_stages = jobset.num_stages();
    let mut out = vec![BTreeMap::new(); n_stages];
    for job in &jobset.jobs {
        for j in 0..n_stages {
            let h = BigRational::new(job.proc[j].into(), job.deadline.into());
            out[j]
                .entry(job.mapping[j])
                .and_modify(|v: &mut BigRational| *v += &h)
                .or_insert(h);
        }
    }
    out
}

/// Exact heaviness metrics of a job set.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavinessReport {
    /// `h[i][j] = P_{i,j} / D_i`.
    pub h: Vec<Vec<BigRational>>,
    /// Per stage: resource -> summed heaviness of mapped jobs.
    pub chi: Vec<BTreeMap<ResourceId, BigRational>>,
    /// `H`: the maximum `χ` over all resources and stages.
    pub max_chi: BigRational,
    /// Per stage: fraction of jobs with `h_{i,j} >= β`.
    pub heavy_ratio: Vec<BigRational>,
}

/// Computes `h`, `χ`, `H` and the per-stage heavy-job ratios.
pub fn heaviness(jobset: &JobSet, beta: &BigRational) -> HeavinessReport {
    let n = jobset.len();
    let n_stages = jobset.num_stages();
    let h: Vec<Vec<BigRational>> = jobset
        .jobs
        .iter()
        .map(|job| {
            (0..n_stages)
                .map(|j| BigRational::new(job.proc[j].into(), job.deadline.into()))
                .collect()
        })
        .collect();
    let chi = chi(jobset);
    let max_chi = chi
        .iter()
        .flat_map(|m| m.values())
        .cloned()
        .max()
        .unwrap_or_else(BigRational::zero);
    let heavy_ratio = (0..n_stages)
        .map(|j| {
            if n == 0 {
                return BigRational::zero();
            }
            let heavy = h.iter().filter(|hi| &hi[j] >= beta).count();
            BigRational::new(BigInt::from(heavy), BigInt::from(n))
        })
        .collect();
    HeavinessReport {
        h,
        chi,
        max_chi,
        heavy_ratio,
    }
}

/// Parameters of the edge-computing workload generator.
#[derive(Debug, Clone)]
pub struct EdgeConfig {
    pub num_aps: usize,
    pub num_servers: usize,
    pub num_jobs: usize,
    /// Inclusive per-stage processing-time ranges.
    pub offload_range: (Time, Time),
    pub compute_range: (Time, Time),
    pub download_range: (Time, Time),
    /// Heaviness threshold β: heavy means `h_{i,j} ∈ [β, 2β]`.
    pub beta: BigRational,
    /// Target fraction of heavy jobs per stage.
    pub heavy_targets: [BigRational; 3],
    /// Bound on the system heaviness `H`.
    pub gamma: BigRational,
    /// Optional scheduling-horizon cap on sampled deadlines; the derived
    /// deadline range is clipped from above when set.
    pub deadline_cap: Option<Time>,
    pub seed: u64,
}

impl Default for EdgeConfig {
    fn default() -> EdgeConfig {
        EdgeConfig {
            num_aps: 25,
            num_servers: 20,
            num_jobs: 100,
            offload_range: (2, 200),
            compute_range: (50, 500),
            download_range: (2, 100),
            beta: parse_ratio("0.15").unwrap(),
            heavy_targets: [
                parse_ratio("0.05").unwrap(),
                parse_ratio("0.05").unwrap(),
                parse_ratio("0.01").unwrap(),
            ],
            gamma: parse_ratio("0.7").unwrap(),
            deadline_cap: None,
            seed: 0,
        }
    }
}

impl EdgeConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("offload", self.offload_range),
            ("compute", self.compute_range),
            ("download", self.download_range),
        ] {
            if lo == 0 || hi < lo {
                return Err(Error::arg(format!("{name} range must be positive and non-empty")));
            }
        }
        if self.num_aps == 0 || self.num_servers == 0 {
            return Err(Error::arg("resource pools must be non-empty"));
        }
        if !self.beta.is_positive() {
            return Err(Error::arg("beta must be positive"));
        }
        if !self.gamma.is_positive() {
            return Err(Error::arg("gamma must be positive"));
        }
        for h in &self.heavy_targets {
            if h.is_negative() || h > &BigRational::one() {
                return Err(Error::arg("per-stage heavy ratios must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    fn ranges(&self) -> [(Time, Time); 3] {
        [self.offload_range, self.compute_range, self.download_range]
    }
}

fn floor_to_time(r: &BigRational) -> Time {
    r.floor().to_integer().to_u64().unwrap_or(0)
}

fn ceil_to_time(r: &BigRational) -> Time {
    r.ceil().to_integer().to_u64().unwrap_or(0)
}

/// Largest integer strictly below `r` (0 when none).
fn below(r: &BigRational) -> Time {
    if r.is_integer() {
        floor_to_time(r).saturating_sub(1)
    } else {
        floor_to_time(r)
    }
}

/// Deadline range under which the sampled labels are drawable: a stage
/// with light jobs needs an integer below `βD` inside its range, a stage
/// with heavy jobs an integer in `[βD, 2βD]` inside it. Only the
/// constraints of labels actually in use apply, so a stage whose heavy
/// count rounds to zero does not cap deadlines from above. When no stage
/// has heavy jobs the top defaults to the deadline at which even maximal
/// stage times sum to heaviness `β`.
fn deadline_range(cfg: &EdgeConfig, heavy_counts: &[usize; 3]) -> Result<(Time, Time)> {
    let n = cfg.num_jobs;
    let beta = &cfg.beta;
    let two_beta = beta * BigRational::from_integer(2.into());
    let mut lo: Time = 1;
    let mut hi: Time = Time::MAX;
    for (j, (range_lo, range_hi)) in cfg.ranges().into_iter().enumerate() {
        let l = ratio_from_time(range_lo);
        let h = ratio_from_time(range_hi);
        if heavy_counts[j] < n {
            // light draws exist: βD > range_lo
            lo = lo.max(floor_to_time(&(&l / beta)) + 1);
        }
        if heavy_counts[j] > 0 {
            // heavy draws exist: 2βD >= range_lo, βD >= 1, βD <= range_hi
            lo = lo.max(ceil_to_time(&(&l / &two_beta)));
            lo = lo.max(ceil_to_time(&(BigRational::one() / beta)));
            hi = hi.min(floor_to_time(&(&h / beta)));
        }
    }
    if hi == Time::MAX {
        let total: Time = cfg.ranges().iter().map(|&(_, h)| h).sum();
        hi = floor_to_time(&(ratio_from_time(total) / beta)).max(lo);
    }
    if let Some(cap) = cfg.deadline_cap {
        hi = hi.min(cap);
    }
    if lo > hi {
        return Err(Error::Generation {
            target: "a deadline range compatible with beta and the stage time ranges".into(),
            attempts: 0,
        });
    }
    Ok((lo, hi))
}

fn round_half_up_count(target: &BigRational, n: usize) -> usize {
    let half = BigRational::new(1.into(), 2.into());
    let v = target * BigRational::from_integer(n.into()) + half;
    floor_to_time(&v).min(n as Time) as usize
}

const GENERATE_ATTEMPTS: u32 = 64;

/// Generates an edge job set meeting the config's heaviness targets,
/// deterministically in the seed, together with its validated report.
///
/// Sampling order: per-stage heavy labels are drawn without replacement to
/// hit the rounded target count exactly; each deadline is uniform over the
/// derived admissible range; each stage time is uniform over the heavy or
/// light sub-interval for the job's label; resources are assigned greedily
/// to the least-loaded pool member (random tie-breaks). The whole draw is
/// rejected and retried when `H > γ`, and generation fails after a fixed
/// attempt budget.
pub fn generate(cfg: &EdgeConfig) -> Result<(JobSet, HeavinessReport)> {
    cfg.validate()?;
    let n = cfg.num_jobs;
    let heavy_counts = [
        round_half_up_count(&cfg.heavy_targets[0], n),
        round_half_up_count(&cfg.heavy_targets[1], n),
        round_half_up_count(&cfg.heavy_targets[2], n),
    ];
    let (d_lo, d_hi) = deadline_range(cfg, &heavy_counts)?;
    let beta = &cfg.beta;
    let two_beta = beta * BigRational::from_integer(2.into());
    let ranges = cfg.ranges();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for _attempt in 0..GENERATE_ATTEMPTS {
        // Heavy labels per stage, exact counts.
        let mut heavy: Vec<BTreeSet<usize>> = Vec::with_capacity(3);
        for &count in &heavy_counts {
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            heavy.push(ids.into_iter().take(count).collect());
        }

        // Deadlines first, then stage times within the label's interval.
        let mut deadlines: Vec<Time> = Vec::with_capacity(n);
        let mut procs: Vec<[Time; 3]> = Vec::with_capacity(n);
        for i in 0..n {
            let d = rng.gen_range(d_lo..=d_hi);
            deadlines.push(d);
            let d_rat = ratio_from_time(d);
            let mut p = [0; 3];
            for j in 0..3 {
                let (range_lo, range_hi) = ranges[j];
                p[j] = if heavy[j].contains(&i) {
                    let lo = range_lo.max(ceil_to_time(&(beta * &d_rat)));
                    let hi = range_hi.min(floor_to_time(&(&two_beta * &d_rat)));
                    if lo > hi {
                        return Err(Error::Generation {
                            target: format!("a heavy stage-{j} time within the stage range"),
                            attempts: GENERATE_ATTEMPTS,
                        });
                    }
                    rng.gen_range(lo..=hi)
                } else {
                    let hi = range_hi.min(below(&(beta * &d_rat)));
                    if range_lo > hi {
                        return Err(Error::Generation {
                            target: format!("a light stage-{j} time within the stage range"),
                            attempts: GENERATE_ATTEMPTS,
                        });
                    }
                    rng.gen_range(range_lo..=hi)
                };
            }
            procs.push(p);
        }

        // Greedy least-loaded mapping, heaviest jobs placed first.
        let pool_sizes = [cfg.num_aps, cfg.num_servers, cfg.num_aps];
        let mut mapping = vec![[ResourceId(0); 3]; n];
        let mut max_chi = BigRational::zero();
        for j in 0..3 {
            let mut loads = vec![BigRational::zero(); pool_sizes[j]];
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                let ha = BigRational::new(procs[a][j].into(), deadlines[a].into());
                let hb = BigRational::new(procs[b][j].into(), deadlines[b].into());
                hb.cmp(&ha).then(a.cmp(&b))
            });
            for i in order {
                let min = loads.iter().min().cloned().expect("non-empty pool");
                let tied: Vec<usize> = (0..loads.len()).filter(|&y| loads[y] == min).collect();
                let pick = tied[rng.gen_range(0..tied.len())];
                mapping[i][j] = ResourceId(pick as u32);
                loads[pick] += BigRational::new(procs[i][j].into(), deadlines[i].into());
                if loads[pick] > max_chi {
                    max_chi = loads[pick].clone();
                }
            }
        }
        if max_chi > cfg.gamma {
            continue;
        }

        let pools = vec![
            (0..cfg.num_aps as u32).map(ResourceId).collect(),
            (0..cfg.num_servers as u32).map(ResourceId).collect(),
            (0..cfg.num_aps as u32).map(ResourceId).collect(),
        ];
        let jobs = (0..n)
            .map(|i| Job {
                id: i,
                arrival: 0,
                deadline: deadlines[i],
                proc: procs[i].to_vec(),
                mapping: mapping[i].to_vec(),
            })
            .collect();
        let jobset = JobSet::new(Pipeline::new(pools)?, jobs)?;
        let report = heaviness(&jobset, beta);
        return Ok((jobset, report));
    }
    Err(Error::Generation {
        target: format!("system heaviness H <= {}", cfg.gamma),
        attempts: GENERATE_ATTEMPTS,
    })
}

/// Parameters for the generic random instances used by the test oracles.
#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub jobs: (usize, usize),
    pub stages: (usize, usize),
    pub resources_per_stage: (usize, usize),
    pub proc_range: (Time, Time),
    pub arrival_range: (Time, Time),
    /// Deadline factor over the job's total processing time, as an
    /// inclusive rational range `(num, den)..=(num, den)`.
    pub deadline_factor: ((u64, u64), (u64, u64)),
}

impl Default for RandomConfig {
    fn default() -> RandomConfig {
        RandomConfig {
            jobs: (3, 6),
            stages: (2, 4),
            resources_per_stage: (1, 2),
            proc_range: (1, 20),
            arrival_range: (0, 0),
            deadline_factor: ((1, 2), (4, 1)),
        }
    }
}

/// Uniform random instance: mapping, arrivals, and deadlines drawn
/// independently; deadlines scale with each job's own total demand so that
/// feasible and infeasible instances both occur.
pub fn random_jobset(cfg: &RandomConfig, rng: &mut impl Rng) -> JobSet {
    let n = rng.gen_range(cfg.jobs.0..=cfg.jobs.1);
    let n_stages = rng.gen_range(cfg.stages.0..=cfg.stages.1);
    let pools: Vec<Vec<ResourceId>> = (0..n_stages)
        .map(|_| {
            let count = rng.gen_range(cfg.resources_per_stage.0..=cfg.resources_per_stage.1);
            (0..count as u32).map(ResourceId).collect()
        })
        .collect();
    let jobs = (0..n)
        .map(|id| {
            let proc: Vec<Time> = (0..n_stages)
                .map(|_| rng.gen_range(cfg.proc_range.0..=cfg.proc_range.1))
                .collect();
            let total: Time = proc.iter().sum();
            let ((ln, ld), (hn, hd)) = cfg.deadline_factor;
            let lo = (total * ln / ld).max(1);
            let hi = (total * hn / hd).max(lo);
            Job {
                id,
                arrival: rng.gen_range(cfg.arrival_range.0..=cfg.arrival_range.1),
                deadline: rng.gen_range(lo..=hi),
                proc,
                mapping: pools
                    .iter()
                    .map(|pool| pool[rng.gen_range(0..pool.len())])
                    .collect(),
            }
        })
        .collect();
    JobSet::new(Pipeline::new(pools).unwrap(), jobs).unwrap()
}
