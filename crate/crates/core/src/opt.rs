//! Exact pairwise priority assignment and LP export.
//!
//! A pairwise assignment orients every competing pair instead of imposing a
//! total order, which is strictly more permissive in a multi-resource
//! pipeline: an instance can be pairwise-feasible while no total ordering
//! works. [`solve_exact`] decides feasibility by depth-first
//! branch-and-bound over the pair orientation variables, pruning with
//! optimistic bounds and accepting on pessimistic ones.
//!
//! [`pairwise_bound`] evaluates a job's delay bound under a (possibly
//! partial) assignment. Undecided pairs contribute according to the
//! caller's [`Polarity`]: `Optimistic` drops them from both the
//! interfering and the blocking side (an admissible lower envelope),
//! `Pessimistic` counts them on both sides (a sound upper envelope). For a
//! complete assignment the two coincide.
//!
//! [`export_lp`] writes the same feasibility problem as a 0/1 program in
//! LP text format: antisymmetry rows per pair, big-M linearizations of the
//! per-stage maxima with selector binaries, and one deadline row per job.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::assign::{Assignment, AssignmentOutcome, Feasibility, PairwiseAssignment};
use crate::dca::{self, BoundMode, DelayBound};
use crate::error::{Error, Result};
use crate::model::{self, competitor_sets, JobId, JobSet, Time};

/// How undecided pairs contribute to a partial-assignment bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Undecided competitors are ignored entirely: the bound can only grow
    /// as pairs get decided.
    Optimistic,
    /// Undecided competitors count both as interferers and as blockers:
    /// no completion can exceed this.
    Pessimistic,
}

fn pairwise_mode_or_err(mode: BoundMode) -> Result<()> {
    match mode {
        BoundMode::PreemptiveRefined | BoundMode::NonpreemptiveMulti | BoundMode::EdgeMixed => {
            Ok(())
        }
        other => Err(Error::mode(format!(
            "pairwise bounds are defined for the multi-resource modes, not {}",
            other.name()
        ))),
    }
}

/// Delay bound of job `i` under a pairwise assignment.
///
/// Partners outside the assignment's domain are treated as absent (they
/// were discarded by an admission controller); partners whose interference
/// window does not overlap the job's are skipped.
pub fn pairwise_bound(
    jobset: &JobSet,
    x: &PairwiseAssignment,
    i: JobId,
    mode: BoundMode,
    polarity: Polarity,
) -> Result<DelayBound> {
    pairwise_mode_or_err(mode)?;
    let me = jobset.job(i)?;
    let mut higher = BTreeSet::new();
    let mut lower = BTreeSet::new();
    for (a, b) in x.domain() {
        let k = if a == i {
            b
        } else if b == i {
            a
        } else {
            continue;
        };
        if !jobset.job(k)?.windows_overlap(me) {
            continue;
        }
        match x.winner(i, k)? {
            Some(w) if w == k => {
                higher.insert(k);
            }
            Some(_) => {
                lower.insert(k);
            }
            None => {
                if polarity == Polarity::Pessimistic {
                    higher.insert(k);
                    lower.insert(k);
                }
            }
        }
    }
    dca::eval_sets(jobset, i, &higher, &lower, &BTreeSet::new(), mode)
}

/// Checks a complete assignment from scratch: every listed job's bound
/// must meet its deadline.
pub fn validate_pairwise(
    jobset: &JobSet,
    x: &PairwiseAssignment,
    jobs: impl IntoIterator<Item = JobId>,
    mode: BoundMode,
) -> Result<bool> {
    for i in jobs {
        let b = pairwise_bound(jobset, x, i, mode, Polarity::Pessimistic)?;
        if !b.meets(jobset.jobs[i].deadline) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Default node budget for the exact search.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Orientation of a pair relative to a fixed job (search-internal).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Rel {
    Undecided,
    /// The row job beats the partner.
    Wins,
    /// The partner beats the row job.
    Loses,
}

/// Dense per-pair interference data so the search can evaluate a job's
/// optimistic bound without allocation: the job-additive coefficient of
/// every partner, its shared stage times, and the self terms.
struct PairModel {
    n_stages: usize,
    /// Stages whose lower-priority blocking term the mode includes.
    blocking_stages: Vec<usize>,
    deadline: Vec<Time>,
    self_term: Vec<Time>,
    self_proc: Vec<Vec<Time>>,
    /// Window-overlapping competitors of each job, ascending.
    partner: Vec<Vec<JobId>>,
    /// `coef[i][p]`: job-additive contribution of `partner[i][p]` when it
    /// outranks job `i`.
    coef: Vec<Vec<Time>>,
    /// `ps[i][p][j]`: the partner's processing time at stage `j` when the
    /// pair shares that stage, else 0.
    ps: Vec<Vec<Vec<Time>>>,
}

impl PairModel {
    fn build(jobset: &JobSet, mode: BoundMode) -> PairModel {
        let n = jobset.len();
        let n_stages = jobset.num_stages();
        let comp = competitor_sets(jobset);
        let mut partner = vec![Vec::new(); n];
        let mut coef = vec![Vec::new(); n];
        let mut ps = vec![Vec::new(); n];
        let mut self_term = vec![0; n];
        let mut self_proc = vec![Vec::new(); n];
        for i in 0..n {
            self_proc[i] = jobset.jobs[i].proc.clone();
            self_term[i] = match mode {
                BoundMode::NonpreemptiveMulti => {
                    let p = model::self_profile(&jobset.jobs[i]);
                    (p.m() as Time).saturating_mul(jobset.jobs[i].stage_max(1))
                }
                _ => jobset.jobs[i].stage_max(1),
            };
            for &k in comp.of(i) {
                if !jobset.jobs[i].windows_overlap(&jobset.jobs[k]) {
                    continue;
                }
                let p = model::segment_profile(jobset, i, k).expect("valid ids");
                let c = match mode {
                    BoundMode::NonpreemptiveMulti => {
                        (p.m() as Time).saturating_mul(p.shared_max(1))
                    }
                    _ => p.shared_top_sum(p.w()),
                };
                partner[i].push(k);
                coef[i].push(c);
                ps[i].push(p.shared_proc);
            }
        }
        PairModel {
            n_stages,
            blocking_stages: match mode {
                BoundMode::NonpreemptiveMulti => (0..n_stages).collect(),
                BoundMode::EdgeMixed => vec![2],
                _ => Vec::new(),
            },
            deadline: jobset.jobs.iter().map(|j| j.deadline).collect(),
            self_term,
            self_proc,
            partner,
            coef,
            ps,
        }
    }

    /// Optimistic bound of job `i` under the orientation matrix: undecided
    /// partners contribute nothing. Saturates on overflow (and then
    /// certainly misses any deadline).
    fn eval(&self, i: JobId, rel: &[Vec<Rel>]) -> Time {
        let mut total = self.self_term[i];
        for (p, &k) in self.partner[i].iter().enumerate() {
            if rel[i][k] == Rel::Loses {
                total = total.saturating_add(self.coef[i][p]);
            }
        }
        for j in 0..self.n_stages - 1 {
            let mut theta = self.self_proc[i][j];
            for (p, &k) in self.partner[i].iter().enumerate() {
                if rel[i][k] == Rel::Loses {
                    theta = theta.max(self.ps[i][p][j]);
                }
            }
            total = total.saturating_add(theta);
        }
        for &j in &self.blocking_stages {
            let mut block = 0;
            for (p, &k) in self.partner[i].iter().enumerate() {
                if rel[i][k] == Rel::Wins {
                    block = block.max(self.ps[i][p][j]);
                }
            }
            total = total.saturating_add(block);
        }
        total
    }
}

struct Search<'a> {
    model: &'a PairModel,
    rel: Vec<Vec<Rel>>,
    /// Optimistic bound per job, kept in sync with `rel`.
    bounds: Vec<Time>,
    undecided: Vec<(JobId, JobId)>,
    nodes: u64,
    budget: u64,
}

enum Verdict {
    Feasible(Vec<Vec<Rel>>),
    Infeasible,
    Unknown,
}

impl<'a> Search<'a> {
    fn orient(&mut self, i: JobId, k: JobId, winner: JobId) {
        let (w, l) = if winner == i { (i, k) } else { (k, i) };
        self.rel[w][l] = Rel::Wins;
        self.rel[l][w] = Rel::Loses;
    }

    fn unorient(&mut self, i: JobId, k: JobId) {
        self.rel[i][k] = Rel::Undecided;
        self.rel[k][i] = Rel::Undecided;
    }

    /// Largest change either endpoint's optimistic bound can see from
    /// orienting the pair, with every other undecided pair left
    /// optimistic.
    fn swing(&mut self, i: JobId, k: JobId) -> Time {
        let mut swing = 0;
        for job in [i, k] {
            self.orient(i, k, if job == i { k } else { i });
            let hi = self.model.eval(job, &self.rel);
            self.orient(i, k, job);
            let lo = self.model.eval(job, &self.rel);
            swing = swing.max(hi.abs_diff(lo));
        }
        self.unorient(i, k);
        swing
    }

    fn dfs(&mut self) -> Verdict {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Verdict::Unknown;
        }
        for (i, &b) in self.bounds.iter().enumerate() {
            if b > self.model.deadline[i] {
                return Verdict::Infeasible;
            }
        }
        if self.undecided.is_empty() {
            // All pairs decided: the optimistic bound is the exact bound
            // and every job just passed the deadline check.
            return Verdict::Feasible(self.rel.clone());
        }

        // Branch on the undecided pair with the largest bound swing; ties
        // fall to the lexicographically first pair.
        let mut best = (0usize, 0 as Time);
        for idx in 0..self.undecided.len() {
            let (i, k) = self.undecided[idx];
            let s = self.swing(i, k);
            if s > best.1 {
                best = (idx, s);
            }
        }
        let (i, k) = self.undecided.remove(best.0);

        // Deadline-monotonic direction first: it is feasible more often.
        let first = if self.model.deadline[i] <= self.model.deadline[k] {
            i
        } else {
            k
        };
        let second = if first == i { k } else { i };

        let saved = (self.bounds[i], self.bounds[k]);
        let mut unknown = false;
        for winner in [first, second] {
            self.orient(i, k, winner);
            self.bounds[i] = self.model.eval(i, &self.rel);
            self.bounds[k] = self.model.eval(k, &self.rel);
            match self.dfs() {
                Verdict::Feasible(rel) => return Verdict::Feasible(rel),
                Verdict::Unknown => {
                    unknown = true;
                    break;
                }
                Verdict::Infeasible => {}
            }
        }
        self.unorient(i, k);
        self.bounds[i] = saved.0;
        self.bounds[k] = saved.1;
        self.undecided.insert(best.0, (i, k));
        if unknown {
            Verdict::Unknown
        } else {
            Verdict::Infeasible
        }
    }
}

/// Decides pairwise feasibility by depth-first branch-and-bound.
///
/// Returns `Feasible` with a complete witness assignment, `Infeasible`
/// once the search space is exhausted, or `Unknown` when the node budget
/// runs out — never misreporting a truncated search as infeasible.
pub fn solve_exact(jobset: &JobSet, mode: BoundMode, budget: u64) -> Result<AssignmentOutcome> {
    pairwise_mode_or_err(mode)?;
    if mode == BoundMode::EdgeMixed && jobset.num_stages() != 3 {
        return Err(Error::mode(format!(
            "edge-mixed requires a 3-stage pipeline, got {}",
            jobset.num_stages()
        )));
    }
    let n = jobset.len();
    let x = PairwiseAssignment::undecided_for(jobset);
    let undecided = x.undecided_pairs();
    let pair_model = PairModel::build(jobset, mode);
    let rel = vec![vec![Rel::Undecided; n]; n];
    let mut search = Search {
        bounds: (0..n).map(|i| pair_model.eval(i, &rel)).collect(),
        model: &pair_model,
        rel,
        undecided,
        nodes: 0,
        budget,
    };
    let verdict = search.dfs();
    let mut out = match verdict {
        Verdict::Feasible(rel) => {
            let mut witness = x;
            for (i, k) in witness.undecided_pairs() {
                let winner = if rel[i][k] == Rel::Wins { i } else { k };
                witness.set_winner(i, k, winner)?;
            }
            let bounds = (0..n)
                .map(|i| pairwise_bound(jobset, &witness, i, mode, Polarity::Pessimistic))
                .collect::<Result<Vec<_>>>()?;
            let mut out = AssignmentOutcome::new(Feasibility::Feasible, n);
            out.accepted = (0..n).collect();
            out.bounds = bounds.into_iter().map(Some).collect();
            out.assignment = Some(Assignment::Pairwise(witness));
            out
        }
        Verdict::Infeasible => AssignmentOutcome::new(Feasibility::Infeasible, n),
        Verdict::Unknown => AssignmentOutcome::new(Feasibility::Unknown, n),
    };
    out.nodes = search.nodes;
    Ok(out)
}

/// Appends an LP coefficient term like ` + 12 x_0_1`, skipping zeros.
fn push_term(row: &mut String, coef: Time, var: &str) {
    if coef == 0 {
        return;
    }
    let _ = write!(row, " + {coef} {var}");
}

/// Writes the pairwise feasibility problem in LP text format.
///
/// Variables: `x_i_k` (binary, job `i` beats job `k`), `th_i_j`
/// (continuous stage maxima), `b_i_j_y` (selector binaries pinning each
/// `th` to its maximum), and for modes with lower-priority blocking
/// `ph_i_j` with selectors `c_i_j_y` (`y = 0` is the "nobody blocks"
/// option). The objective is the constant zero: this is a pure
/// feasibility program.
pub fn export_lp(jobset: &JobSet, mode: BoundMode) -> Result<String> {
    pairwise_mode_or_err(mode)?;
    let n = jobset.len();
    let n_stages = jobset.num_stages();
    if mode == BoundMode::EdgeMixed && n_stages != 3 {
        return Err(Error::mode(format!(
            "edge-mixed requires a 3-stage pipeline, got {n_stages}"
        )));
    }
    let comp = competitor_sets(jobset);
    let big_m: Time = jobset
        .jobs
        .iter()
        .flat_map(|j| j.proc.iter().copied())
        .max()
        .unwrap_or(0);

    let overlap = |i: JobId, k: JobId| jobset.jobs[i].windows_overlap(&jobset.jobs[k]);
    // Shared structure of k with respect to i.
    let profile = |i: JobId, k: JobId| model::segment_profile(jobset, i, k).expect("valid ids");

    let mut constraints = String::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut continuous: Vec<String> = Vec::new();

    // Antisymmetry per competing pair.
    for (i, k) in comp.pairs() {
        let _ = writeln!(constraints, " pair_{i}_{k}: x_{i}_{k} + x_{k}_{i} = 1");
        binaries.push(format!("x_{i}_{k}"));
        binaries.push(format!("x_{k}_{i}"));
    }

    let theta_stages = n_stages - 1;
    let blocking_stages: Vec<usize> = match mode {
        BoundMode::NonpreemptiveMulti => (0..n_stages).collect(),
        BoundMode::EdgeMixed => vec![2],
        _ => Vec::new(),
    };

    for i in 0..n {
        // Stage maxima over {i} ∪ {higher-priority competitors}: lower
        // rows force th above every selected term, the selector binaries
        // pin it to one of them.
        for j in 0..theta_stages {
            let th = format!("th_{i}_{j}");
            continuous.push(th.clone());
            let mut cands: Vec<JobId> = vec![i];
            cands.extend(comp.at_stage(i, j).iter().copied().filter(|&k| overlap(i, k)));
            cands.sort_unstable();
            for (y, &k) in cands.iter().enumerate() {
                let b = format!("b_{i}_{j}_{y}");
                if k == i {
                    let p = jobset.jobs[i].proc[j];
                    let _ = writeln!(constraints, " tl_{i}_{j}_{y}: th_{i}_{j} >= {p}");
                    let _ = writeln!(
                        constraints,
                        " tu_{i}_{j}_{y}: th_{i}_{j} + {big_m} {b} <= {}",
                        p.saturating_add(big_m)
                    );
                } else {
                    let p = profile(i, k).shared_proc[j];
                    let _ = writeln!(
                        constraints,
                        " tl_{i}_{j}_{y}: th_{i}_{j} - {p} x_{k}_{i} >= 0"
                    );
                    let _ = writeln!(
                        constraints,
                        " tu_{i}_{j}_{y}: th_{i}_{j} - {p} x_{k}_{i} + {big_m} {b} <= {big_m}"
                    );
                }
                binaries.push(b);
            }
            let sum: Vec<String> =
                (0..cands.len()).map(|y| format!("b_{i}_{j}_{y}")).collect();
            let _ = writeln!(constraints, " ts_{i}_{j}: {} = 1", sum.join(" + "));
        }

        // Lower-priority blocking maxima; option y = 0 selects "no
        // blocker" and pins ph to zero.
        for &j in &blocking_stages {
            let ph = format!("ph_{i}_{j}");
            continuous.push(ph.clone());
            let cands: Vec<JobId> = comp
                .at_stage(i, j)
                .iter()
                .copied()
                .filter(|&k| overlap(i, k))
                .collect();
            let _ = writeln!(
                constraints,
                " bu_{i}_{j}_0: ph_{i}_{j} + {big_m} c_{i}_{j}_0 <= {big_m}"
            );
            binaries.push(format!("c_{i}_{j}_0"));
            for (y, &k) in cands.iter().enumerate() {
                let y = y + 1;
                let p = profile(i, k).shared_proc[j];
                let _ = writeln!(
                    constraints,
                    " bl_{i}_{j}_{y}: ph_{i}_{j} - {p} x_{i}_{k} >= 0"
                );
                let _ = writeln!(
                    constraints,
                    " bu_{i}_{j}_{y}: ph_{i}_{j} - {p} x_{i}_{k} + {big_m} c_{i}_{j}_{y} <= {big_m}"
                );
                binaries.push(format!("c_{i}_{j}_{y}"));
            }
            let sum: Vec<String> =
                (0..=cands.len()).map(|y| format!("c_{i}_{j}_{y}")).collect();
            let _ = writeln!(constraints, " bs_{i}_{j}: {} = 1", sum.join(" + "));
        }

        // Deadline row: job-additive coefficients on x_k_i plus the stage
        // variables; the constant self term moves to the right-hand side.
        let self_term: Time = match mode {
            BoundMode::NonpreemptiveMulti => {
                let p = model::self_profile(&jobset.jobs[i]);
                (p.m() as Time).saturating_mul(jobset.jobs[i].stage_max(1))
            }
            _ => jobset.jobs[i].stage_max(1),
        };
        let mut row = String::new();
        for &k in comp.of(i).iter().filter(|&&k| overlap(i, k)) {
            let p = profile(i, k);
            let coef = match mode {
                BoundMode::NonpreemptiveMulti => {
                    (p.m() as Time).saturating_mul(p.shared_max(1))
                }
                _ => p.shared_top_sum(p.w()),
            };
            push_term(&mut row, coef, &format!("x_{k}_{i}"));
        }
        for j in 0..theta_stages {
            push_term(&mut row, 1, &format!("th_{i}_{j}"));
        }
        for &j in &blocking_stages {
            push_term(&mut row, 1, &format!("ph_{i}_{j}"));
        }
        let rhs = jobset.jobs[i].deadline as i128 - self_term as i128;
        if row.is_empty() {
            // Constant check: the `zero` variable is pinned to 0 in the
            // bounds section, so the row holds iff the rhs is nonnegative.
            if !continuous.iter().any(|v| v == "zero") {
                continuous.push("zero".to_string());
            }
            let _ = writeln!(constraints, " dl_{i}: zero <= {rhs}");
        } else {
            let _ = writeln!(constraints, " dl_{i}:{row} <= {rhs}");
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "\\ pairwise priority assignment feasibility program");
    let _ = writeln!(out, "\\ mode: {}", mode.name());
    let _ = writeln!(out, "\\ jobs: {n}  stages: {n_stages}  big-M: {big_m}");
    let _ = writeln!(out, "Minimize");
    let _ = writeln!(out, " obj: 0");
    let _ = writeln!(out, "Subject To");
    out.push_str(&constraints);
    let _ = writeln!(out, "Bounds");
    for v in &continuous {
        if v == "zero" {
            let _ = writeln!(out, " 0 <= zero <= 0");
        } else {
            let _ = writeln!(out, " 0 <= {v} <= {big_m}");
        }
    }
    let _ = writeln!(out, "Binaries");
    for chunk in binaries.chunks(8) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    let _ = writeln!(out, "End");
    Ok(out)
}
