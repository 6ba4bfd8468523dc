//! Fixed-priority scheduling analysis for multi-stage multi-resource (MSMR)
//! pipelines.
//!
//! A job set runs through an `N`-stage pipeline where each stage offers a
//! pool of resources and every job is mapped to one resource per stage.
//! This crate computes analytic end-to-end delay upper bounds for such jobs
//! under fixed-priority scheduling (preemptive, non-preemptive, and the
//! mixed offload/compute/download shape used by edge systems), and builds
//! priority assignments on top of them:
//!
//! * [`model`] — jobs, pipelines, shared-segment structure, competitor and
//!   interference sets.
//! * [`dca`] — the delay-composition bounds themselves.
//! * [`assign`] — the `S^DCA` feasibility test, Audsley-style optimal
//!   priority ordering (OPDCA), deadline-monotonic pairwise assignment with
//!   a repair phase (DMR), and admission-controller variants.
//! * [`opt`] — exact pairwise priority assignment by branch-and-bound, plus
//!   export of the equivalent 0/1 program in LP text format.
//! * [`sim`] — a discrete-event simulator used as an empirical soundness
//!   oracle and to evaluate the deadline-decomposition baseline (DCMP).
//! * [`workload`] — a heaviness-parameterized generator of edge-computing
//!   job sets, plus exact (rational) heaviness metrics.
//! * [`io`] — text and JSON instance formats, trace and witness export.
//!
//! Time is an unsigned 64-bit integer throughout; there is no floating
//! point anywhere in the analysis path.

pub mod assign;
pub mod dca;
pub mod error;
pub mod io;
pub mod model;
pub mod opt;
pub mod sim;
pub mod workload;

pub use error::{Error, Result};
pub use model::{Job, JobId, JobSet, Pipeline, ResourceId, Time};
