use std::fmt::Write as _;

use serde::Serialize;

use crate::euler::{EulerResult, EulerStatus, TwistSearchReport};

pub const TOOL_NAME: &str = "iwalab";

/// One precision doubling, tied to the task that needed it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EscalationRecord {
    pub task: String,
    pub from: u32,
    pub to: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerEntry {
    pub route: String,
    pub character: String,
    pub n: u32,
    pub m: u32,
    #[serde(flatten)]
    pub result: EulerResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum TaskResult {
    /// Weierstrass data of the characteristic element (gamma) or of an Akashi
    /// polynomial (crossed, one per level).
    Prepare {
        label: String,
        lambda: usize,
        mu: u32,
        distinguished: Vec<String>,
        /// Leading coefficients of the unit part, up to the truncation order.
        unit: Vec<String>,
        precision: u32,
    },
    Characteristic {
        lambda: usize,
        mu: u32,
        coefficients: Vec<String>,
        precision: u32,
    },
    Euler(EulerEntry),
    Akashi {
        n: u32,
        m: u32,
        degree: usize,
        coefficients: Vec<String>,
    },
    Twist {
        accepted: Option<String>,
        search: TwistSearchReport,
        /// Whether every accepted level exponent is reproduced at twice the precision.
        reverified: Option<bool>,
    },
    Selftest {
        suite: String,
        cases: usize,
        checks: usize,
        disagreements: Vec<String>,
    },
}

impl TaskResult {
    pub fn is_decided(&self) -> bool {
        match self {
            TaskResult::Euler(e) => e.result.is_decided(),
            TaskResult::Twist {
                accepted,
                reverified,
                ..
            } => accepted.is_some() && *reverified != Some(false),
            TaskResult::Selftest { disagreements, .. } => disagreements.is_empty(),
            _ => true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input_digest: String,
    pub kind: String,
    pub p: String,
    pub precision: u32,
    pub max_precision: u32,
    pub tasks: Vec<TaskResult>,
    pub escalations: Vec<EscalationRecord>,
    pub all_decided: bool,
    /// Wall-clock milliseconds; the only field that may differ between runs.
    pub timing_ms: u64,
}

impl RunReport {
    /// The JSON result block.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// JSON with the timing field removed, for determinism comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing_ms");
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// The human-readable table printed to standard output.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {}  command={}  kind={}  p={}",
            self.tool, self.version, self.command, self.kind, self.p
        );
        let _ = writeln!(out, "input sha256 {}", self.input_digest);
        let _ = writeln!(
            out,
            "precision N={} (cap {})",
            self.precision, self.max_precision
        );
        for task in &self.tasks {
            match task {
                TaskResult::Prepare {
                    label,
                    lambda,
                    mu,
                    distinguished,
                    ..
                } => {
                    let _ = writeln!(
                        out,
                        "prepare {label:<10} lambda={lambda} mu={mu} P=[{}]",
                        distinguished.join(", ")
                    );
                }
                TaskResult::Characteristic {
                    lambda,
                    mu,
                    coefficients,
                    ..
                } => {
                    let _ = writeln!(
                        out,
                        "char       lambda={lambda} mu={mu} p^mu*P=[{}]",
                        coefficients.join(", ")
                    );
                }
                TaskResult::Euler(e) => {
                    let _ = writeln!(
                        out,
                        "euler {:<10} u={:<6} n={} m={}  {:<24} chi={}  (N={})",
                        e.route,
                        e.character,
                        e.n,
                        e.m,
                        status_name(e.result.status),
                        e.result
                            .chi_exponent
                            .map_or("-".to_string(), |x| format!("p^{x}")),
                        e.result.precision
                    );
                }
                TaskResult::Akashi {
                    n,
                    m,
                    degree,
                    coefficients,
                } => {
                    let _ = writeln!(
                        out,
                        "akashi ({n}, {m}) degree={degree} [{}]",
                        coefficients.join(", ")
                    );
                }
                TaskResult::Twist {
                    accepted,
                    search,
                    reverified,
                } => {
                    for c in &search.candidates {
                        let levels: Vec<String> = c
                            .levels
                            .iter()
                            .map(|l| {
                                let e = l.result.chi_exponent.map_or_else(
                                    || status_name(l.result.status).to_string(),
                                    |x| x.to_string(),
                                );
                                format!("({}, {}):{e}", l.n, l.m)
                            })
                            .collect();
                        let mark = if c.accepted { "accepted" } else { "rejected" };
                        let _ = writeln!(out, "twist u={:<6} {mark}  {}", c.u, levels.join(" "));
                    }
                    match accepted {
                        Some(u) => {
                            let check = match reverified {
                                Some(true) => "re-verified at 2N",
                                Some(false) => "NOT reproduced at 2N",
                                None => "not re-verified",
                            };
                            let _ = writeln!(out, "twist result u={u} ({check})");
                        }
                        None => {
                            let _ = writeln!(
                                out,
                                "twist result: budget of {} exhausted",
                                search.budget
                            );
                        }
                    }
                }
                TaskResult::Selftest {
                    suite,
                    cases,
                    checks,
                    disagreements,
                } => {
                    let _ = writeln!(
                        out,
                        "selftest {suite}: {cases} cases, {checks} checks, {} disagreements",
                        disagreements.len()
                    );
                    for d in disagreements {
                        let _ = writeln!(out, "  {d}");
                    }
                }
            }
        }
        for e in &self.escalations {
            let _ = writeln!(out, "escalated {}: N {} -> {}", e.task, e.from, e.to);
        }
        let _ = writeln!(
            out,
            "all tasks decided: {}",
            if self.all_decided { "yes" } else { "no" }
        );
        out
    }
}

pub fn status_name(s: EulerStatus) -> &'static str {
    match s {
        EulerStatus::Exists => "Exists",
        EulerStatus::NotFiniteDetected => "NotFiniteDetected",
        EulerStatus::IndeterminateAtPrecision => "IndeterminateAtPrecision",
    }
}
