//! Acceptance suite: one PASS/FAIL line per criterion, exact comparisons
//! throughout. Runs without the libtest harness so the lines always print;
//! exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use iwalab_core::corpus::{
    crossed_corpus, gamma_corpus, nonabelian_corpus, CrossedCase, GammaCase,
};
use iwalab_core::crossed::{
    euler_characteristic_crossed, euler_via_akashi, find_twist_crossed, group_ring_oracle,
    CrossedModule, CrossedTwistSearch, Level, DEFAULT_GROUP_RING_CAP,
};
use iwalab_core::euler::{escalate, EulerResult, EulerStatus, DEFAULT_MAX_PRECISION};
use iwalab_core::gamma::{
    euler_characteristic_analytic, euler_characteristic_direct, find_twist, GammaModule,
    TwistSearch,
};
use iwalab_core::matrix::{smith_form, PadicMatrix};
use iwalab_core::padic::{integer_valuation, PadicContext, PadicError, Valuation};
use iwalab_core::poly::{bareiss_det, omega, sylvester_resultant, Integers};
use iwalab_core::series::{
    det_mult_mod_omega, weierstrass_prepare, Character, PowerSeries, Variable,
};
use iwalab_core::workbench::{parse_problem, run, Command, RunOptions, RunReport};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_SEED: u64 = 0x1a2b;
const CROSSED_SEED: u64 = 0x3c4d;
const GAMMA_CASES: usize = 200;
const CROSSED_CASES: usize = 100;
const N: u32 = 64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ctx(p: &BigUint, precision: u32) -> Arc<PadicContext> {
    PadicContext::new(p.clone(), precision).unwrap()
}

type Route<'a> = Box<dyn Fn(&Character) -> EulerResult + 'a>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

/// Runs a route with precision doubling from `N` up to the cap.
fn escalated(p: &BigUint, u: &BigInt, route: &Route) -> EulerResult {
    escalate::<PadicError>(p, N, DEFAULT_MAX_PRECISION, |c| {
        Ok(route(&Character::from_integer(c, u).unwrap()))
    })
    .unwrap()
    .0
}

fn gamma_routes(m: &GammaModule, n: u32) -> [Route<'_>; 2] {
    [
        Box::new(move |rho| euler_characteristic_direct(m, rho, n).unwrap()),
        Box::new(move |rho| euler_characteristic_analytic(m, rho, n).unwrap()),
    ]
}

fn crossed_routes(x: &CrossedModule, l: Level) -> [Route<'_>; 3] {
    [
        Box::new(move |rho| euler_characteristic_crossed(x, rho, l).unwrap()),
        Box::new(move |rho| euler_via_akashi(x, rho, l).unwrap()),
        Box::new(move |rho| group_ring_oracle(x, rho, l, DEFAULT_GROUP_RING_CAP).unwrap()),
    ]
}

fn criterion_1(corpus: &[GammaCase]) -> Outcome {
    let start = Instant::now();
    let (mut checks, mut exists, mut not_finite, mut bad) = (0, 0, 0, Vec::new());
    for (i, case) in corpus.iter().enumerate() {
        let p = case.module.p();
        for u in &case.characters {
            for n in 0..=2 {
                let [direct, analytic] = gamma_routes(&case.module, n);
                let a = escalated(p, u, &direct);
                let b = escalated(p, u, &analytic);
                checks += 1;
                match a.status {
                    EulerStatus::Exists => exists += 1,
                    EulerStatus::NotFiniteDetected => not_finite += 1,
                    EulerStatus::IndeterminateAtPrecision => {
                        bad.push(format!("case {i} u={u} n={n} undecided at cap"))
                    }
                }
                if a.verdict() != b.verdict() {
                    bad.push(format!(
                        "case {i} u={u} n={n}: {:?} vs {:?}",
                        a.verdict(),
                        b.verdict()
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: bad.is_empty() && corpus.len() >= 200 && elapsed < Duration::from_secs(60),
        detail: format!(
            "{} modules, {checks} comparisons ({exists} exist, {not_finite} not finite), {} mismatches, {:.1}s{}",
            corpus.len(),
            bad.len(),
            elapsed.as_secs_f64(),
            first(&bad)
        ),
    }
}

fn criterion_2(corpus: &[CrossedCase]) -> Outcome {
    let start = Instant::now();
    let (mut checks, mut exists, mut max_rank, mut bad) = (0, 0, 0u64, Vec::new());
    for (i, case) in corpus.iter().enumerate() {
        let x = &case.module;
        let p64 = u64::try_from(x.p().clone()).unwrap();
        for &l in &case.levels {
            max_rank = max_rank.max(x.rank() as u64 * p64.pow(l.n() + l.m()));
            for u in &case.characters {
                let rs: Vec<EulerResult> = crossed_routes(x, l)
                    .iter()
                    .map(|r| escalated(x.p(), u, r))
                    .collect();
                checks += 1;
                if rs[0].status == EulerStatus::Exists {
                    exists += 1;
                }
                if rs.iter().any(|r| r.verdict() != rs[0].verdict()) {
                    bad.push(format!(
                        "case {i} level {l} u={u}: {:?}",
                        rs.iter().map(EulerResult::verdict).collect::<Vec<_>>()
                    ));
                }
                if rs
                    .iter()
                    .any(|r| r.status == EulerStatus::Exists && r.h1_exponent != Some(0))
                {
                    bad.push(format!("case {i} level {l} u={u}: nonzero H_1"));
                }
                if rs[0].status == EulerStatus::IndeterminateAtPrecision {
                    bad.push(format!("case {i} level {l} u={u}: undecided at cap"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty() && corpus.len() >= 100,
        detail: format!(
            "{} modules, {checks} triple comparisons ({exists} exist), largest group-ring rank {max_rank}, {} mismatches, {:.1}s{}",
            corpus.len(),
            bad.len(),
            start.elapsed().as_secs_f64(),
            first(&bad)
        ),
    }
}

fn strip_timing(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timing_ms");
    v
}

fn criterion_3() -> Outcome {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    let text = std::fs::read_to_string(format!("{dir}/worked_example.json")).unwrap();
    let golden = std::fs::read_to_string(format!("{dir}/worked_example.report.json")).unwrap();
    let problem = parse_problem(&text).unwrap();
    let report: RunReport = run(&problem, Command::Euler, RunOptions::default()).unwrap();
    let matches_golden = strip_timing(&report.to_json()) == strip_timing(&golden);

    // the same numbers straight from the library
    let x = CrossedModule::new(
        BigUint::from(3u32),
        BigInt::from(4),
        vec![vec![vec![BigInt::from(1)]]],
    )
    .unwrap();
    let l = x.level(1, 1).unwrap();
    let c = ctx(x.p(), N);
    let u4 = Character::from_integer(&c, &BigInt::from(4)).unwrap();
    let triv = Character::trivial(&c);
    let routes = crossed_routes(&x, l);
    let six = routes
        .iter()
        .all(|r| r(&u4).verdict() == (EulerStatus::Exists, Some(6)));
    let infinite = routes
        .iter()
        .all(|r| r(&triv).status == EulerStatus::NotFiniteDetected);
    Outcome {
        pass: matches_golden && six && infinite,
        detail: format!("golden report match {matches_golden}, chi = 3^6 on all routes {six}, trivial character not finite {infinite}"),
    }
}

fn criterion_4(gamma: &[GammaCase], crossed: &[CrossedCase]) -> Outcome {
    let start = Instant::now();
    let (mut found, mut bad, mut max_tried) = (0, Vec::new(), 0);
    for (i, case) in gamma.iter().enumerate() {
        let m = &case.module;
        let c = ctx(m.p(), N);
        match find_twist(m, &c, TwistSearch::new(2, 25)) {
            Ok((rho, report)) => {
                found += 1;
                max_tried = max_tried.max(report.candidates.len());
                let wide = rho.reembed(&ctx(m.p(), 2 * N));
                let accepted = report.accepted().unwrap();
                for lvl in &accepted.levels {
                    if euler_characteristic_direct(m, &wide, lvl.n)
                        .unwrap()
                        .verdict()
                        != lvl.result.verdict()
                    {
                        bad.push(format!(
                            "gamma case {i}: level {} not reproduced at 2N",
                            lvl.n
                        ));
                    }
                }
            }
            Err(e) => bad.push(format!("gamma case {i}: {e}")),
        }
    }
    for (i, case) in crossed.iter().enumerate() {
        let x = &case.module;
        let c = ctx(x.p(), N);
        match find_twist_crossed(x, &c, &CrossedTwistSearch::new(case.levels.clone(), 25)) {
            Ok((rho, report)) => {
                found += 1;
                max_tried = max_tried.max(report.candidates.len());
                let wide = rho.reembed(&ctx(x.p(), 2 * N));
                let accepted = report.accepted().unwrap();
                for (l, outcome) in case.levels.iter().zip(&accepted.levels) {
                    if euler_characteristic_crossed(x, &wide, *l)
                        .unwrap()
                        .verdict()
                        != outcome.result.verdict()
                    {
                        bad.push(format!("crossed case {i}: level {l} not reproduced at 2N"));
                    }
                    if outcome.akashi_agrees != Some(true) {
                        bad.push(format!(
                            "crossed case {i}: level {l} Akashi cross-check failed"
                        ));
                    }
                }
            }
            Err(e) => bad.push(format!("crossed case {i}: {e}")),
        }
    }
    let total = gamma.len() + crossed.len();
    Outcome {
        pass: bad.is_empty() && found == total,
        detail: format!(
            "{found}/{total} searches certified within budget 25 (at most {max_tried} candidates tried), {} failures, {:.1}s{}",
            bad.len(),
            start.elapsed().as_secs_f64(),
            first(&bad)
        ),
    }
}

fn criterion_5() -> Outcome {
    let modules = nonabelian_corpus(0x5e, 24);
    let mut bad = Vec::new();
    let mut checks = 0;
    for (i, x) in modules.iter().enumerate() {
        let l = x.level(1, 2).unwrap();
        for u in [1, 4, 10] {
            let u = BigInt::from(u);
            let routes = crossed_routes(x, l);
            let reduced = escalated(x.p(), &u, &routes[0]);
            let group = escalated(x.p(), &u, &routes[2]);
            checks += 1;
            if reduced.verdict() != group.verdict()
                || reduced.status == EulerStatus::IndeterminateAtPrecision
            {
                bad.push(format!(
                    "module {i} u={u}: {:?} vs {:?}",
                    reduced.verdict(),
                    group.verdict()
                ));
            }
        }
    }
    Outcome {
        pass: bad.is_empty() && modules.len() >= 20,
        detail: format!("{} modules at level (1, 2) of the order-27 quotient, {checks} comparisons, {} mismatches{}", modules.len(), bad.len(), first(&bad)),
    }
}

fn random_int(rng: &mut ChaCha8Rng, p: i64) -> BigInt {
    let v: i64 = rng.random_range(-30..=30);
    match rng.random_range(0..3) {
        0 => BigInt::from(v * p),
        _ => BigInt::from(v),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x66);
    let mut bad = Vec::new();

    // Weierstrass reconstruction
    let mut reconstructions = 0;
    while reconstructions < 1000 {
        let p: i64 = [3, 5, 7][rng.random_range(0..3)];
        let c = ctx(&BigUint::from(p as u64), 48);
        let exact = rng.random_range(0..2) == 0;
        let len = if exact {
            rng.random_range(1..10)
        } else {
            rng.random_range(12..40)
        };
        let shift: u32 = rng.random_range(0..3);
        let scale = BigInt::from(p).pow(shift);
        let coeffs: Vec<BigInt> = (0..len).map(|_| random_int(&mut rng, p) * &scale).collect();
        let f = if exact {
            PowerSeries::polynomial(&c, Variable::X, &coeffs, 64)
        } else {
            PowerSeries::truncated(&c, Variable::X, &coeffs, len)
        };
        let Ok(w) = weierstrass_prepare(&f) else {
            continue;
        };
        reconstructions += 1;
        let back = w.reconstruct(&c);
        let known = if exact {
            len + 4
        } else {
            back.truncation_order()
        };
        let digits = c.precision() - w.mu;
        for i in 0..known {
            let diff = (&back.coeff(i) - &f.coeff(i)).valuation();
            if diff < Valuation::Finite(digits.min(c.precision())) {
                bad.push(format!(
                    "reconstruction {reconstructions}: coefficient {i} differs"
                ));
                break;
            }
        }
    }

    // Smith form against Bareiss determinants
    let mut smith_checks = 0;
    for _ in 0..300 {
        let p: u32 = [3, 5][rng.random_range(0..2)];
        let n = rng.random_range(1..7usize);
        let rows: Vec<Vec<BigInt>> = (0..n)
            .map(|_| (0..n).map(|_| random_int(&mut rng, p as i64)).collect())
            .collect();
        let det = bareiss_det(&rows);
        let pb = BigUint::from(p);
        let c = ctx(&pb, 64);
        let m = PadicMatrix::from_residues(
            &c,
            rows.iter()
                .map(|r| r.iter().map(|x| c.element(x).residue().clone()).collect())
                .collect(),
        );
        let total = smith_form(&m).total();
        let expected = integer_valuation(&det, &pb)
            .map(u64::from)
            .filter(|&v| v < 64);
        smith_checks += 1;
        // a nonzero determinant with valuation >= N is invisible mod p^N
        if (det.is_zero() || expected.is_some()) && total != expected {
            bad.push(format!("smith {total:?} vs bareiss valuation {expected:?}"));
        }
    }

    // det of multiplication mod ω_n against the Sylvester resultant
    let mut resultant_checks = 0;
    for _ in 0..300 {
        let p: u32 = [3, 5][rng.random_range(0..2)];
        let pb = BigUint::from(p);
        let deg = rng.random_range(0..=6usize);
        let f: Vec<BigInt> = (0..=deg).map(|_| random_int(&mut rng, p as i64)).collect();
        let n = rng.random_range(0..=2u32);
        let c = ctx(&pb, 64);
        let w = omega(&Integers, &pb, n);
        let res = sylvester_resultant(&w, &f);
        let det = det_mult_mod_omega(&PowerSeries::polynomial(&c, Variable::X, &f, 64), n).unwrap();
        resultant_checks += 1;
        // Res(ω_n, f) = ± det since ω_n is monic
        if det != c.element(&res) && det != c.element(&-&res) {
            bad.push(format!(
                "p={p} n={n} f={f:?}: det {} vs resultant {res}",
                det.to_signed()
            ));
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{reconstructions} Weierstrass reconstructions, {smith_checks} Smith/Bareiss, {resultant_checks} resultant identities, {} failures{}",
            bad.len(),
            first(&bad)
        ),
    }
}

fn at_precision(p: &BigUint, u: &BigInt, precision: u32, route: &Route) -> EulerResult {
    route(&Character::from_integer(&ctx(p, precision), u).unwrap())
}

fn criterion_7(gamma: &[GammaCase], crossed: &[CrossedCase]) -> Outcome {
    let start = Instant::now();
    let (mut compared, mut bad) = (0, Vec::new());
    let mut check = |label: String, p: &BigUint, u: &BigInt, route: &Route| {
        let low = at_precision(p, u, 32, route);
        if low.status != EulerStatus::Exists {
            return;
        }
        for hi in [64, 128] {
            compared += 1;
            let r = at_precision(p, u, hi, route);
            if r.verdict() != low.verdict() {
                bad.push(format!(
                    "{label}: N=32 {:?}, N={hi} {:?}",
                    low.verdict(),
                    r.verdict()
                ));
            }
        }
    };
    for (i, case) in gamma.iter().enumerate() {
        for u in &case.characters {
            for n in 0..=2 {
                for (k, r) in gamma_routes(&case.module, n).iter().enumerate() {
                    check(
                        format!("gamma {i} route {k} u={u} n={n}"),
                        case.module.p(),
                        u,
                        r,
                    );
                }
            }
        }
    }
    for (i, case) in crossed.iter().enumerate() {
        for u in &case.characters {
            for &l in &case.levels {
                for (k, r) in crossed_routes(&case.module, l).iter().enumerate() {
                    check(
                        format!("crossed {i} route {k} u={u} level {l}"),
                        case.module.p(),
                        u,
                        r,
                    );
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{compared} Exists exponents at N=32 re-checked at N=64 and N=128, {} changed, {:.1}s{}", bad.len(), start.elapsed().as_secs_f64(), first(&bad)),
    }
}

fn first(v: &[String]) -> String {
    v.first()
        .map(|s| format!("; first: {s}"))
        .unwrap_or_default()
}

fn main() {
    let gamma = gamma_corpus(GAMMA_SEED, GAMMA_CASES);
    let crossed = crossed_corpus(CROSSED_SEED, CROSSED_CASES);
    let criteria: [Criterion; 7] = [
        ("twisting-lemma suite", Box::new(|| criterion_1(&gamma))),
        ("triple agreement", Box::new(|| criterion_2(&crossed))),
        ("worked golden example", Box::new(criterion_3)),
        ("twist search", Box::new(|| criterion_4(&gamma, &crossed))),
        ("nonabelian sanity", Box::new(criterion_5)),
        ("kernel and series checks", Box::new(criterion_6)),
        (
            "precision stability",
            Box::new(|| criterion_7(&gamma, &crossed)),
        ),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {} - {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 7 criteria passed");
}
