//! Instance, trace, and witness serialization.
//!
//! Job sets have two interchangeable on-disk forms:
//!
//! * a line-oriented text format:
//!
//!   ```text
//!   msmr 1
//!   stages 3
//!   pool 0 1
//!   pool 0
//!   pool 0 1
//!   job 0 0 55 7 9 17 0 0 1
//!   ```
//!
//!   one `pool` line per stage listing its resource ids, then one `job`
//!   line per job: id, arrival, deadline, the N stage times, the N
//!   resource ids. `#` starts a comment; blank lines are ignored.
//!
//! * a self-describing JSON form (the serde representation of
//!   [`JobSet`]).
//!
//! Both round-trip bit-exactly: the writers are canonical (pools sorted,
//! jobs in id order, single spaces, trailing newline) and parsing a
//! canonical document reproduces it byte for byte.

use crate::assign::{PairwiseAssignment, PriorityOrdering};
use crate::error::{Error, Result};
use crate::model::{Job, JobSet, Pipeline, ResourceId, Time};
use crate::sim::SimTrace;
use std::fmt::Write as _;

/// Canonical text form of a job set.
pub fn write_jobset_text(jobset: &JobSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "msmr 1");
    let _ = writeln!(out, "stages {}", jobset.num_stages());
    for pool in &jobset.pipeline.pools {
        let ids: Vec<String> = pool.iter().map(|r| r.0.to_string()).collect();
        let _ = writeln!(out, "pool {}", ids.join(" "));
    }
    for job in &jobset.jobs {
        let mut line = format!("job {} {} {}", job.id, job.arrival, job.deadline);
        for p in &job.proc {
            let _ = write!(line, " {p}");
        }
        for r in &job.mapping {
            let _ = write!(line, " {}", r.0);
        }
        let _ = writeln!(out, "{line}");
    }
    out
}

struct LineParser<'a> {
    line: &'a str,
    line_no: usize,
    /// Byte offset of the next unread token.
    cursor: usize,
    /// Start of the most recently read token, for error positions.
    token_start: usize,
}

impl<'a> LineParser<'a> {
    fn new(line: &'a str, line_no: usize) -> LineParser<'a> {
        LineParser { line, line_no, cursor: 0, token_start: 0 }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line_no,
            column: self.token_start + 1,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Option<&'a str> {
        let rest = &self.line[self.cursor..];
        let start = rest.find(|c: char| !c.is_whitespace());
        let token_start = match start {
            Some(s) => self.cursor + s,
            None => {
                self.token_start = self.line.len();
                return None;
            }
        };
        let end = self.line[token_start..]
            .find(char::is_whitespace)
            .map(|e| token_start + e)
            .unwrap_or(self.line.len());
        self.token_start = token_start;
        self.cursor = end;
        Some(&self.line[token_start..end])
    }

    fn expect_u64(&mut self, what: &str) -> Result<u64> {
        match self.next_token() {
            Some(tok) => tok
                .parse()
                .map_err(|_| self.err(format!("expected {what}, found '{tok}'"))),
            None => Err(self.err(format!("missing {what}"))),
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        if let Some(tok) = self.next_token() {
            return Err(self.err(format!("unexpected trailing token '{tok}'")));
        }
        Ok(())
    }
}

/// Parses the line-oriented text format.
pub fn parse_jobset_text(text: &str) -> Result<JobSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(idx, l)| (idx + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        });

    let perr = |line: usize, message: String| Error::Parse { line, column: 1, message };

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| perr(1, "empty document".into()))?;
    if header.trim() != "msmr 1" {
        return Err(perr(line_no, "expected header 'msmr 1'".into()));
    }

    let (line_no, stages_line) = lines
        .next()
        .ok_or_else(|| perr(line_no, "missing 'stages' line".into()))?;
    let mut p = LineParser::new(stages_line, line_no);
    match p.next_token() {
        Some("stages") => {}
        _ => return Err(p.err("expected 'stages <count>'")),
    }
    let n_stages = p.expect_u64("stage count")? as usize;
    p.expect_end()?;
    if n_stages == 0 {
        return Err(p.err("stage count must be positive"));
    }

    let mut pools: Vec<Vec<ResourceId>> = Vec::with_capacity(n_stages);
    for _ in 0..n_stages {
        let (line_no, pool_line) = lines
            .next()
            .ok_or_else(|| perr(line_no, format!("expected {n_stages} 'pool' lines")))?;
        let mut p = LineParser::new(pool_line, line_no);
        match p.next_token() {
            Some("pool") => {}
            _ => return Err(p.err("expected 'pool <resource ids>'")),
        }
        let mut pool = Vec::new();
        while let Some(tok) = p.next_token() {
            let id: u32 = tok
                .parse()
                .map_err(|_| p.err(format!("expected resource id, found '{tok}'")))?;
            pool.push(ResourceId(id));
        }
        if pool.is_empty() {
            return Err(p.err("pool must list at least one resource"));
        }
        pools.push(pool);
    }

    let mut jobs = Vec::new();
    for (line_no, job_line) in lines {
        let mut p = LineParser::new(job_line, line_no);
        match p.next_token() {
            Some("job") => {}
            Some(tok) => return Err(p.err(format!("expected 'job', found '{tok}'"))),
            None => unreachable!("blank lines are filtered"),
        }
        let id = p.expect_u64("job id")? as usize;
        let arrival = p.expect_u64("arrival")?;
        let deadline = p.expect_u64("deadline")?;
        let proc: Vec<Time> = (0..n_stages)
            .map(|_| p.expect_u64("stage time"))
            .collect::<Result<_>>()?;
        let mapping: Vec<ResourceId> = (0..n_stages)
            .map(|_| p.expect_u64("resource id").map(|r| ResourceId(r as u32)))
            .collect::<Result<_>>()?;
        p.expect_end()?;
        jobs.push(Job { id, arrival, deadline, proc, mapping });
    }

    JobSet::new(Pipeline::new(pools)?, jobs)
}

/// Canonical JSON form of a job set.
pub fn write_jobset_json(jobset: &JobSet) -> String {
    let mut s = serde_json::to_string_pretty(jobset).expect("jobset serializes");
    s.push('\n');
    s
}

pub fn parse_jobset_json(text: &str) -> Result<JobSet> {
    let jobset: JobSet = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    // Re-validate the structural invariants.
    JobSet::new(jobset.pipeline, jobset.jobs)
}

/// Parses either format, sniffing JSON by its leading brace.
pub fn parse_jobset(text: &str) -> Result<JobSet> {
    if text.trim_start().starts_with('{') {
        parse_jobset_json(text)
    } else {
        parse_jobset_text(text)
    }
}

/// One line per event: time, stage, resource, job, event kind.
pub fn write_trace_events(trace: &SimTrace) -> String {
    let mut out = String::new();
    for ev in &trace.events {
        let kind = match ev.kind {
            crate::sim::EventKind::Start => "start",
            crate::sim::EventKind::Preempt => "preempt",
            crate::sim::EventKind::Resume => "resume",
            crate::sim::EventKind::FinishStage => "finish-stage",
            crate::sim::EventKind::ExitPipeline => "exit-pipeline",
        };
        let _ = writeln!(
            out,
            "t={} stage={} res={} job={} {}",
            ev.time, ev.stage, ev.resource, ev.job, kind
        );
    }
    out
}

/// Per-job completion table: exit time, end-to-end delay, deadline verdict.
pub fn write_completion_table(jobset: &JobSet, trace: &SimTrace) -> String {
    let mut out = String::from("job arrival deadline exit delay met\n");
    for (i, job) in jobset.jobs.iter().enumerate() {
        let exit = trace.completion[i];
        let delay = exit - job.arrival;
        let _ = writeln!(
            out,
            "{i} {} {} {exit} {delay} {}",
            job.arrival,
            job.deadline,
            if delay <= job.deadline { "yes" } else { "no" }
        );
    }
    out
}

/// Witness ordering as ranked ids, highest priority first.
pub fn write_ordering(ordering: &PriorityOrdering) -> String {
    let ids: Vec<String> = ordering.ranked().iter().map(|i| i.to_string()).collect();
    format!("{}\n", ids.join(" "))
}

/// Witness pairwise assignment as one `winner > loser` line per decided
/// pair.
pub fn write_pairwise(x: &PairwiseAssignment) -> String {
    let mut out = String::new();
    for (winner, loser) in x.directed_pairs() {
        let _ = writeln!(out, "{winner} > {loser}");
    }
    out
}
