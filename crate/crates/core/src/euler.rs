//! Results shared by the commutative and crossed computations: Euler
//! characteristic outcomes, twist-search reports, candidate enumeration and
//! precision escalation.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::matrix::{cokernel_kernel_orders, ElementaryDivisors, OrderReport};
use crate::padic::PadicContext;

/// Precision cap used when escalating.
pub const DEFAULT_MAX_PRECISION: u32 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EulerStatus {
    Exists,
    NotFiniteDetected,
    IndeterminateAtPrecision,
}

/// `χ = p^e` together with the orders of `H_0` and `H_1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerResult {
    pub status: EulerStatus,
    pub chi_exponent: Option<u64>,
    pub h0_exponent: Option<u64>,
    pub h1_exponent: Option<u64>,
    /// Working precision `N` the result was obtained at.
    pub precision: u32,
}

impl EulerResult {
    pub fn exists(h0: u64, h1: u64, precision: u32) -> Self {
        EulerResult {
            status: EulerStatus::Exists,
            chi_exponent: Some(h0 - h1),
            h0_exponent: Some(h0),
            h1_exponent: Some(h1),
            precision,
        }
    }

    pub fn not_finite(precision: u32) -> Self {
        EulerResult {
            status: EulerStatus::NotFiniteDetected,
            chi_exponent: None,
            h0_exponent: None,
            h1_exponent: None,
            precision,
        }
    }

    pub fn indeterminate(precision: u32) -> Self {
        EulerResult {
            status: EulerStatus::IndeterminateAtPrecision,
            chi_exponent: None,
            h0_exponent: None,
            h1_exponent: None,
            precision,
        }
    }

    /// Builds the result from the elementary divisors of a square presentation
    /// of the coinvariants. `vanishes` is consulted only when some divisor is
    /// zero to working precision; it must return `Some(true)` only on an exact
    /// proof that the determinant is zero.
    pub fn from_divisors(
        divisors: &ElementaryDivisors,
        precision: u32,
        vanishes: impl FnOnce() -> Option<bool>,
    ) -> Self {
        match cokernel_kernel_orders(divisors).expect("square presentation") {
            (OrderReport::PowerOfP(h0), OrderReport::PowerOfP(h1)) => {
                Self::exists(h0, h1, precision)
            }
            _ => match vanishes() {
                Some(true) => Self::not_finite(precision),
                _ => Self::indeterminate(precision),
            },
        }
    }

    pub fn is_decided(&self) -> bool {
        self.status != EulerStatus::IndeterminateAtPrecision
    }

    /// Status and exponent, the part that must agree between routes.
    pub fn verdict(&self) -> (EulerStatus, Option<u64>) {
        (self.status, self.chi_exponent)
    }
}

/// One precision doubling performed because a result was undecided.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Escalation {
    pub from: u32,
    pub to: u32,
}

/// Runs `compute` at precision `start`, doubling up to `cap` while the result
/// stays undecided.
pub fn escalate<E>(
    p: &BigUint,
    start: u32,
    cap: u32,
    mut compute: impl FnMut(&Arc<PadicContext>) -> Result<EulerResult, E>,
) -> Result<(EulerResult, Vec<Escalation>), E>
where
    E: From<crate::padic::PadicError>,
{
    let mut precision = start;
    let mut steps = Vec::new();
    loop {
        let ctx = PadicContext::new(p.clone(), precision)?;
        let result = compute(&ctx)?;
        if result.is_decided() || precision >= cap {
            return Ok((result, steps));
        }
        let next = precision.saturating_mul(2).min(cap);
        steps.push(Escalation {
            from: precision,
            to: next,
        });
        precision = next;
    }
}

/// Order in which twist candidates `u = 1 + kp` are tried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchOrder {
    /// `k = start, start + 1, …`
    Ascending,
    /// A seeded shuffle of `k ∈ [start, start + 4·budget)`.
    Seeded(u64),
}

/// The `k` values of the first `budget` candidates `u = 1 + kp`.
pub fn candidate_indices(start: u64, budget: usize, order: SearchOrder) -> Vec<u64> {
    match order {
        SearchOrder::Ascending => (start..start + budget as u64).collect(),
        SearchOrder::Seeded(seed) => {
            let mut pool: Vec<u64> = (start..start + 4 * budget as u64).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            pool.shuffle(&mut rng);
            pool.truncate(budget);
            pool
        }
    }
}

pub fn candidate_value(p: &BigUint, k: u64) -> BigInt {
    BigInt::from(1) + BigInt::from(k) * BigInt::from(p.clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelOutcome {
    pub n: u32,
    /// H-level; always 0 in the commutative case.
    pub m: u32,
    pub result: EulerResult,
    /// Agreement with the Akashi evaluation, where that cross-check was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub akashi_agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateReport {
    pub u: String,
    pub accepted: bool,
    pub levels: Vec<LevelOutcome>,
}

/// Every candidate tried, in order; the last one is the accepted character
/// when the search succeeded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwistSearchReport {
    pub precision: u32,
    pub budget: usize,
    pub candidates: Vec<CandidateReport>,
}

impl TwistSearchReport {
    pub fn accepted(&self) -> Option<&CandidateReport> {
        self.candidates.iter().find(|c| c.accepted)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &CandidateReport> {
        self.candidates.iter().filter(|c| !c.accepted)
    }
}
