//! Per-instance analysis reports: bounds with term breakdowns, the
//! assignment or witness, and the feasibility verdict, as text or JSON.

use serde::Serialize;

use msmr_core::assign::{
    dm_pairwise, dmr, dmr_admission, opdca, opdca_admission, Assignment, Feasibility,
    PriorityOrdering,
};
use msmr_core::dca::{bound, BoundMode, DelayBound};
use msmr_core::error::{Error, Result};
use msmr_core::model::{interference_sets, JobId, JobSet, Time};
use msmr_core::opt::{pairwise_bound, solve_exact, Polarity};
use msmr_core::sim::{dcmp, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzeMethod {
    /// Evaluate bounds under a caller-supplied ordering; no assignment is
    /// computed.
    Bound,
    Dm,
    Dmr,
    Opdca,
    OpdcaAdmission,
    DmrAdmission,
    Opt,
    Dcmp,
}

impl AnalyzeMethod {
    pub fn parse(s: &str) -> Result<AnalyzeMethod> {
        match s.to_ascii_lowercase().as_str() {
            "bound" => Ok(AnalyzeMethod::Bound),
            "dm" => Ok(AnalyzeMethod::Dm),
            "dmr" => Ok(AnalyzeMethod::Dmr),
            "opdca" => Ok(AnalyzeMethod::Opdca),
            "opdca-admit" => Ok(AnalyzeMethod::OpdcaAdmission),
            "dmr-admit" => Ok(AnalyzeMethod::DmrAdmission),
            "opt" => Ok(AnalyzeMethod::Opt),
            "dcmp" => Ok(AnalyzeMethod::Dcmp),
            other => Err(Error::Argument(format!("unknown method '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnalyzeMethod::Bound => "bound",
            AnalyzeMethod::Dm => "dm",
            AnalyzeMethod::Dmr => "dmr",
            AnalyzeMethod::Opdca => "opdca",
            AnalyzeMethod::OpdcaAdmission => "opdca-admit",
            AnalyzeMethod::DmrAdmission => "dmr-admit",
            AnalyzeMethod::Opt => "opt",
            AnalyzeMethod::Dcmp => "dcmp",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct JobReport {
    pub id: JobId,
    pub deadline: Time,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<DelayBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meets_deadline: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub method: &'static str,
    pub mode: &'static str,
    pub verdict: &'static str,
    pub jobs: Vec<JobReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<JobId>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairwise: Vec<(JobId, JobId)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flips: Vec<(JobId, JobId)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub accepted: Vec<JobId>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rejected: Vec<JobId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<u64>,
}

impl Report {
    pub fn is_infeasible(&self) -> bool {
        self.verdict == "infeasible" || self.verdict == "unknown"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "method: {}  mode: {}", self.method, self.mode);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        if let Some(ref o) = self.ordering {
            let ids: Vec<String> = o.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "ordering (highest first): {}", ids.join(" "));
        }
        if !self.pairwise.is_empty() {
            let pairs: Vec<String> = self
                .pairwise
                .iter()
                .map(|(w, l)| format!("{w}>{l}"))
                .collect();
            let _ = writeln!(out, "pairwise: {}", pairs.join(" "));
        }
        if !self.flips.is_empty() {
            for (w, l) in &self.flips {
                let _ = writeln!(out, "flip: {l}>{w} -> {w}>{l}");
            }
        }
        if !self.rejected.is_empty() {
            let ids: Vec<String> = self.rejected.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "rejected (in order): {}", ids.join(" "));
        }
        if let Some(nodes) = self.nodes {
            let _ = writeln!(out, "search nodes: {nodes}");
        }
        for job in &self.jobs {
            let mut line = format!("job {}: D={}", job.id, job.deadline);
            if let Some(ref b) = job.bound {
                let _ = write!(line, " bound={}", b.total);
                if b.saturated {
                    line.push_str(" (saturated)");
                }
                let ja: Vec<String> = b
                    .job_additive
                    .iter()
                    .map(|(k, t)| format!("{k}:{t}"))
                    .collect();
                let sa: Vec<String> =
                    b.stage_additive.iter().map(|t| t.to_string()).collect();
                let _ = write!(line, "  [jobs {} | stages {}", ja.join(" "), sa.join(" "));
                if !b.lower_blocking.is_empty() {
                    let lb: Vec<String> =
                        b.lower_blocking.iter().map(|t| t.to_string()).collect();
                    let _ = write!(line, " | blocking {}", lb.join(" "));
                }
                line.push(']');
            }
            match job.meets_deadline {
                Some(true) => line.push_str("  ok"),
                Some(false) => line.push_str("  MISS"),
                None => {}
            }
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn verdict_str(f: Feasibility) -> &'static str {
    match f {
        Feasibility::Feasible => "feasible",
        Feasibility::Infeasible => "infeasible",
        Feasibility::Unknown => "unknown",
    }
}

fn job_reports(jobset: &JobSet, bounds: &[Option<DelayBound>]) -> Vec<JobReport> {
    jobset
        .jobs
        .iter()
        .map(|job| JobReport {
            id: job.id,
            deadline: job.deadline,
            bound: bounds.get(job.id).cloned().flatten(),
            meets_deadline: bounds
                .get(job.id)
                .and_then(|b| b.as_ref())
                .map(|b| b.meets(job.deadline)),
        })
        .collect()
}

fn outcome_report(
    jobset: &JobSet,
    method: AnalyzeMethod,
    mode: BoundMode,
    out: msmr_core::assign::AssignmentOutcome,
) -> Report {
    let (ordering, pairwise) = match out.assignment {
        Some(Assignment::Ordering(ref o)) => (Some(o.ranked().to_vec()), Vec::new()),
        Some(Assignment::Pairwise(ref x)) => (None, x.directed_pairs()),
        None => (None, Vec::new()),
    };
    Report {
        method: method.name(),
        mode: mode.name(),
        verdict: verdict_str(out.status),
        jobs: job_reports(jobset, &out.bounds),
        ordering,
        pairwise,
        flips: out.flips,
        accepted: out.accepted,
        rejected: out.rejected,
        nodes: (out.nodes > 0).then_some(out.nodes),
    }
}

/// Runs one analysis method over an instance and builds its report.
pub fn analyze(
    jobset: &JobSet,
    method: AnalyzeMethod,
    mode: BoundMode,
    ordering: Option<&[JobId]>,
    budget: u64,
) -> Result<Report> {
    match method {
        AnalyzeMethod::Bound => {
            let ranked = ordering
                .ok_or_else(|| {
                    Error::Argument("--method bound requires --ordering".into())
                })?
                .to_vec();
            let o = PriorityOrdering::from_ranked(ranked)?;
            if !o.covers_all(jobset.len()) {
                return Err(Error::Argument("ordering must cover every job".into()));
            }
            let mut bounds = Vec::with_capacity(jobset.len());
            for i in 0..jobset.len() {
                let sets =
                    interference_sets(jobset, i, &o.higher_set(i), &o.lower_set(i))?;
                bounds.push(Some(bound(jobset, i, &sets, mode)?));
            }
            let all_meet = jobset.jobs.iter().all(|j| {
                bounds[j.id].as_ref().is_some_and(|b| b.meets(j.deadline))
            });
            let jobs = job_reports(jobset, &bounds);
            Ok(Report {
                method: method.name(),
                mode: mode.name(),
                verdict: if all_meet { "feasible" } else { "infeasible" },
                jobs,
                ordering: Some(o.ranked().to_vec()),
                pairwise: Vec::new(),
                flips: Vec::new(),
                accepted: Vec::new(),
                rejected: Vec::new(),
                nodes: None,
            })
        }
        AnalyzeMethod::Dm => {
            let x = dm_pairwise(jobset);
            let mut bounds = Vec::with_capacity(jobset.len());
            for i in 0..jobset.len() {
                bounds.push(Some(pairwise_bound(jobset, &x, i, mode, Polarity::Pessimistic)?));
            }
            let all_meet = jobset.jobs.iter().all(|j| {
                bounds[j.id].as_ref().is_some_and(|b| b.meets(j.deadline))
            });
            Ok(Report {
                method: method.name(),
                mode: mode.name(),
                verdict: if all_meet { "feasible" } else { "infeasible" },
                jobs: job_reports(jobset, &bounds),
                ordering: None,
                pairwise: x.directed_pairs(),
                flips: Vec::new(),
                accepted: Vec::new(),
                rejected: Vec::new(),
                nodes: None,
            })
        }
        AnalyzeMethod::Dmr => Ok(outcome_report(jobset, method, mode, dmr(jobset, mode)?)),
        AnalyzeMethod::Opdca => {
            Ok(outcome_report(jobset, method, mode, opdca(jobset, mode)?))
        }
        AnalyzeMethod::OpdcaAdmission => Ok(outcome_report(
            jobset,
            method,
            mode,
            opdca_admission(jobset, mode)?,
        )),
        AnalyzeMethod::DmrAdmission => Ok(outcome_report(
            jobset,
            method,
            mode,
            dmr_admission(jobset, mode)?,
        )),
        AnalyzeMethod::Opt => Ok(outcome_report(
            jobset,
            method,
            mode,
            solve_exact(jobset, mode, budget)?,
        )),
        AnalyzeMethod::Dcmp => {
            let preemption = if jobset.num_stages() == 3 {
                SimConfig::edge().preemption
            } else {
                SimConfig::uniform(
                    jobset.num_stages(),
                    msmr_core::sim::Preemption::Preemptive,
                )
                .preemption
            };
            Ok(outcome_report(jobset, method, mode, dcmp(jobset, &preemption)?))
        }
    }
}
