use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use super::problem::{ModuleSpec, Problem};
use super::report::{EscalationRecord, EulerEntry, RunReport, TaskResult, TOOL_NAME};
use crate::corpus::{crossed_corpus, gamma_corpus};
use crate::crossed::{
    akashi_series, euler_characteristic_crossed, euler_via_akashi, find_twist_crossed,
    group_ring_oracle, CrossedError, CrossedModule, CrossedTwistSearch, Level,
    DEFAULT_GROUP_RING_CAP,
};
use crate::euler::{escalate, EulerResult, SearchOrder, TwistSearchReport, DEFAULT_MAX_PRECISION};
use crate::gamma::{
    characteristic_data, euler_characteristic_analytic, euler_characteristic_direct, find_twist,
    GammaError, GammaModule, TwistSearch,
};
use crate::padic::{PadicContext, PadicError};
use crate::series::{weierstrass_prepare, Character, SeriesError, WeierstrassData};

pub const DEFAULT_BUDGET: usize = 25;
/// Modules drawn from the seeded corpus by `selftest`.
pub const SELFTEST_CASES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Prepare,
    Char,
    Euler,
    Akashi,
    FindTwist,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Prepare,
        Command::Char,
        Command::Euler,
        Command::Akashi,
        Command::FindTwist,
        Command::Selftest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Prepare => "prepare",
            Command::Char => "char",
            Command::Euler => "euler",
            Command::Akashi => "akashi",
            Command::FindTwist => "find-twist",
            Command::Selftest => "selftest",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Command-line overrides of the problem file.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub precision: Option<u32>,
    pub max_precision: Option<u32>,
    pub budget: Option<usize>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("command {command} does not apply to a {kind} problem")]
    Mismatch {
        command: Command,
        kind: &'static str,
    },
    #[error("max precision {max} is below the starting precision {start}")]
    BadPrecision { start: u32, max: u32 },
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Crossed(#[from] CrossedError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

struct Runner<'a> {
    problem: &'a Problem,
    precision: u32,
    cap: u32,
    budget: usize,
    tasks: Vec<TaskResult>,
    escalations: Vec<EscalationRecord>,
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

impl Runner<'_> {
    fn ctx(&self, precision: u32) -> Result<Arc<PadicContext>, RunError> {
        Ok(PadicContext::new(self.problem.p.clone(), precision)?)
    }

    fn euler(
        &mut self,
        route: &str,
        u: &BigInt,
        (n, m): (u32, u32),
        compute: impl Fn(&Character) -> Result<EulerResult, RunError>,
    ) -> Result<(), RunError> {
        let (result, steps) = escalate(&self.problem.p, self.precision, self.cap, |ctx| {
            compute(&Character::from_integer(ctx, u)?)
        })?;
        let task = format!("euler {route} u={u} n={n} m={m}");
        self.escalations
            .extend(steps.into_iter().map(|s| EscalationRecord {
                task: task.clone(),
                from: s.from,
                to: s.to,
            }));
        self.tasks.push(TaskResult::Euler(EulerEntry {
            route: route.into(),
            character: u.to_string(),
            n,
            m,
            result,
        }));
        Ok(())
    }

    /// Weierstrass data, doubling the precision while the series vanishes.
    fn prepared(
        &mut self,
        label: &str,
        f: impl Fn(&Arc<PadicContext>) -> Result<WeierstrassData, RunError>,
    ) -> Result<(WeierstrassData, u32), RunError> {
        let mut precision = self.precision;
        loop {
            match f(&self.ctx(precision)?) {
                Ok(w) => return Ok((w, precision)),
                Err(RunError::Gamma(GammaError::ZeroDeterminant))
                | Err(RunError::Series(SeriesError::ZeroToPrecision))
                    if precision < self.cap =>
                {
                    let next = (precision * 2).min(self.cap);
                    self.escalations.push(EscalationRecord {
                        task: format!("prepare {label}"),
                        from: precision,
                        to: next,
                    });
                    precision = next;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn prepare_task(&self, label: String, w: &WeierstrassData) -> TaskResult {
        let unit: Vec<String> = w
            .unit
            .to_signed_coeffs()
            .iter()
            .take(self.problem.truncation)
            .map(|c| c.to_string())
            .collect();
        TaskResult::Prepare {
            label,
            lambda: w.lambda(),
            mu: w.mu,
            distinguished: strings(&w.distinguished.to_signed_coeffs()),
            unit,
            precision: w.distinguished.context().precision(),
        }
    }

    fn gamma(
        &mut self,
        command: Command,
        module: &GammaModule,
        levels: &[u32],
    ) -> Result<(), RunError> {
        match command {
            Command::Prepare => {
                let (w, _) = self.prepared("det F", |ctx| Ok(characteristic_data(module, ctx)?))?;
                let t = self.prepare_task("det F".into(), &w);
                self.tasks.push(t);
            }
            Command::Char => {
                let (w, precision) =
                    self.prepared("det F", |ctx| Ok(characteristic_data(module, ctx)?))?;
                let ctx = self.ctx(precision)?;
                self.tasks.push(TaskResult::Characteristic {
                    lambda: w.lambda(),
                    mu: w.mu,
                    coefficients: strings(&w.normalized(&ctx).to_signed_coeffs()),
                    precision,
                });
            }
            Command::Euler => {
                for u in &self.problem.characters.clone() {
                    for &n in levels {
                        self.euler("direct", u, (n, 0), |rho| {
                            Ok(euler_characteristic_direct(module, rho, n)?)
                        })?;
                        self.euler("analytic", u, (n, 0), |rho| {
                            Ok(euler_characteristic_analytic(module, rho, n)?)
                        })?;
                    }
                }
            }
            Command::Akashi => {
                return Err(RunError::Mismatch {
                    command,
                    kind: "gamma",
                })
            }
            Command::FindTwist => {
                let n_max = self
                    .problem
                    .n_max
                    .unwrap_or_else(|| levels.iter().copied().max().unwrap_or(0));
                let mut search = TwistSearch::new(n_max, self.budget);
                if let Some(seed) = self.problem.seed {
                    search.order = SearchOrder::Seeded(seed);
                }
                let ctx = self.ctx(self.precision)?;
                match find_twist(module, &ctx, search) {
                    Ok((rho, report)) => {
                        let wide = self.ctx(self.precision.saturating_mul(2))?;
                        let rho2 = rho.reembed(&wide);
                        let mut ok = true;
                        for l in &report.accepted().expect("accepted candidate").levels {
                            ok &= euler_characteristic_direct(module, &rho2, l.n)?.verdict()
                                == l.result.verdict();
                        }
                        self.tasks.push(TaskResult::Twist {
                            accepted: Some(rho.label()),
                            search: report,
                            reverified: Some(ok),
                        });
                    }
                    Err(GammaError::BudgetExhausted(report)) => self.push_exhausted(*report),
                    Err(e) => return Err(e.into()),
                }
            }
            Command::Selftest => {
                let seed = self.problem.seed.unwrap_or(0);
                let mut cases = gamma_corpus(seed, SELFTEST_CASES);
                cases.push(crate::corpus::GammaCase {
                    module: module.clone(),
                    characters: self.problem.characters.clone(),
                });
                let mut checks = 0;
                let mut disagreements = Vec::new();
                for (i, case) in cases.iter().enumerate() {
                    let p = case.module.p().clone();
                    for u in &case.characters {
                        for n in 0..=2 {
                            let run = |analytic: bool| {
                                escalate(
                                    &p,
                                    self.precision,
                                    self.cap,
                                    |ctx| -> Result<_, RunError> {
                                        let rho = Character::from_integer(ctx, u)?;
                                        Ok(if analytic {
                                            euler_characteristic_analytic(&case.module, &rho, n)?
                                        } else {
                                            euler_characteristic_direct(&case.module, &rho, n)?
                                        })
                                    },
                                )
                            };
                            let (a, _) = run(false)?;
                            let (b, _) = run(true)?;
                            checks += 1;
                            if a.verdict() != b.verdict() {
                                disagreements.push(format!(
                                    "case {i} u={u} n={n}: direct {:?} analytic {:?}",
                                    a.verdict(),
                                    b.verdict()
                                ));
                            }
                        }
                    }
                }
                self.tasks.push(TaskResult::Selftest {
                    suite: "twisting-lemma".into(),
                    cases: cases.len(),
                    checks,
                    disagreements,
                });
            }
        }
        Ok(())
    }

    fn push_exhausted(&mut self, report: TwistSearchReport) {
        self.tasks.push(TaskResult::Twist {
            accepted: None,
            search: report,
            reverified: None,
        });
    }

    fn crossed(
        &mut self,
        command: Command,
        module: &CrossedModule,
        levels: &[Level],
    ) -> Result<(), RunError> {
        match command {
            Command::Prepare => {
                for &l in levels {
                    let ak = akashi_series(module, l);
                    let label = format!("Ak{l}");
                    let (w, _) =
                        self.prepared(&label, |ctx| Ok(weierstrass_prepare(&ak.to_series(ctx))?))?;
                    let t = self.prepare_task(label, &w);
                    self.tasks.push(t);
                }
            }
            Command::Char => {
                return Err(RunError::Mismatch {
                    command,
                    kind: "crossed",
                })
            }
            Command::Euler => {
                for u in &self.problem.characters.clone() {
                    for &l in levels {
                        let nm = (l.n(), l.m());
                        self.euler("reduced", u, nm, |rho| {
                            Ok(euler_characteristic_crossed(module, rho, l)?)
                        })?;
                        self.euler("akashi", u, nm, |rho| Ok(euler_via_akashi(module, rho, l)?))?;
                        if group_ring_fits(module, l) {
                            self.euler("group-ring", u, nm, |rho| {
                                Ok(group_ring_oracle(module, rho, l, DEFAULT_GROUP_RING_CAP)?)
                            })?;
                        }
                    }
                }
            }
            Command::Akashi => {
                for &l in levels {
                    let ak = akashi_series(module, l);
                    self.tasks.push(TaskResult::Akashi {
                        n: l.n(),
                        m: l.m(),
                        degree: ak.degree(),
                        coefficients: strings(&ak.coeffs),
                    });
                }
            }
            Command::FindTwist => {
                let mut search = CrossedTwistSearch::new(levels.to_vec(), self.budget);
                if let Some(seed) = self.problem.seed {
                    search.order = SearchOrder::Seeded(seed);
                }
                let ctx = self.ctx(self.precision)?;
                match find_twist_crossed(module, &ctx, &search) {
                    Ok((rho, report)) => {
                        let wide = self.ctx(self.precision.saturating_mul(2))?;
                        let rho2 = rho.reembed(&wide);
                        let mut ok = true;
                        for (l, outcome) in levels
                            .iter()
                            .zip(&report.accepted().expect("accepted candidate").levels)
                        {
                            ok &= euler_characteristic_crossed(module, &rho2, *l)?.verdict()
                                == outcome.result.verdict();
                        }
                        self.tasks.push(TaskResult::Twist {
                            accepted: Some(rho.label()),
                            search: report,
                            reverified: Some(ok),
                        });
                    }
                    Err(CrossedError::BudgetExhausted(report)) => self.push_exhausted(*report),
                    Err(e) => return Err(e.into()),
                }
            }
            Command::Selftest => {
                let seed = self.problem.seed.unwrap_or(0);
                let mut cases = crossed_corpus(seed, SELFTEST_CASES);
                cases.push(crate::corpus::CrossedCase {
                    module: module.clone(),
                    levels: levels.to_vec(),
                    characters: self.problem.characters.clone(),
                });
                let mut checks = 0;
                let mut disagreements = Vec::new();
                for (i, case) in cases.iter().enumerate() {
                    let x = &case.module;
                    for u in &case.characters {
                        for &l in &case.levels {
                            let run = |route: usize| {
                                escalate(
                                    x.p(),
                                    self.precision,
                                    self.cap,
                                    |ctx| -> Result<_, RunError> {
                                        let rho = Character::from_integer(ctx, u)?;
                                        Ok(match route {
                                            0 => euler_characteristic_crossed(x, &rho, l)?,
                                            1 => euler_via_akashi(x, &rho, l)?,
                                            _ => group_ring_oracle(
                                                x,
                                                &rho,
                                                l,
                                                DEFAULT_GROUP_RING_CAP,
                                            )?,
                                        })
                                    },
                                )
                            };
                            let (a, _) = run(0)?;
                            let (b, _) = run(1)?;
                            let g = if group_ring_fits(x, l) {
                                Some(run(2)?.0)
                            } else {
                                None
                            };
                            checks += 1;
                            let h1_ok =
                                [Some(&a), Some(&b), g.as_ref()]
                                    .into_iter()
                                    .flatten()
                                    .all(|r| {
                                        r.status != crate::euler::EulerStatus::Exists
                                            || r.h1_exponent == Some(0)
                                    });
                            let agree = a.verdict() == b.verdict()
                                && g.as_ref().is_none_or(|g| g.verdict() == a.verdict());
                            if !agree || !h1_ok {
                                disagreements.push(format!(
                                    "case {i} u={u} level {l}: reduced {:?} akashi {:?} group-ring {:?}",
                                    a.verdict(),
                                    b.verdict(),
                                    g.map(|g| g.verdict())
                                ));
                            }
                        }
                    }
                }
                self.tasks.push(TaskResult::Selftest {
                    suite: "triple-agreement".into(),
                    cases: cases.len(),
                    checks,
                    disagreements,
                });
            }
        }
        Ok(())
    }
}

fn group_ring_fits(x: &CrossedModule, l: Level) -> bool {
    let size = BigUint::from(x.rank()) * x.p().pow(l.n() + l.m());
    size <= BigUint::from(DEFAULT_GROUP_RING_CAP)
}

/// Executes `command` on a validated problem.
pub fn run(
    problem: &Problem,
    command: Command,
    options: RunOptions,
) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let precision = options.precision.unwrap_or(problem.precision);
    let cap = options
        .max_precision
        .unwrap_or(DEFAULT_MAX_PRECISION.max(precision));
    if cap < precision || precision == 0 {
        return Err(RunError::BadPrecision {
            start: precision,
            max: cap,
        });
    }
    let budget = options.budget.or(problem.budget).unwrap_or(DEFAULT_BUDGET);
    let mut runner = Runner {
        problem,
        precision,
        cap,
        budget,
        tasks: Vec::new(),
        escalations: Vec::new(),
    };
    match &problem.module {
        ModuleSpec::Gamma { module, levels } => runner.gamma(command, module, levels)?,
        ModuleSpec::Crossed { module, levels } => runner.crossed(command, module, levels)?,
    }
    let all_decided = runner.tasks.iter().all(TaskResult::is_decided);
    Ok(RunReport {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.as_str().into(),
        input_digest: problem.digest.clone(),
        kind: problem.module.kind().into(),
        p: problem.p.to_string(),
        precision,
        max_precision: cap,
        tasks: runner.tasks,
        escalations: runner.escalations,
        all_decided,
        timing_ms: start.elapsed().as_millis() as u64,
    })
}
