//! Command-line front end: argument grammar, command execution and the
//! audit report.

pub mod args;
pub mod report;
pub mod run;

pub use args::{parse_args, Command, UsageError};
pub use run::{run, Io};

/// Stack for the main worker and per-document threads. Parsing and
/// validation are iterative; what recurses is bounded by schema nesting and
/// by tree teardown, both capped through `max_depth`.
pub const WORKER_STACK: usize = 64 * 1024 * 1024;
