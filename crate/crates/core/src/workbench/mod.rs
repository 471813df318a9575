//! Problem files, command dispatch with precision escalation, and reports.

mod problem;
mod report;
mod run;

pub use problem::{
    parse_problem, ModuleSpec, Problem, ProblemError, DEFAULT_PRECISION, SCHEMA_VERSION,
};
pub use report::{status_name, EscalationRecord, EulerEntry, RunReport, TaskResult, TOOL_NAME};
pub use run::{run, Command, RunError, RunOptions, DEFAULT_BUDGET, SELFTEST_CASES};
