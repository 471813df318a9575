//! Seeded random modules for agreement testing.

use num_bigint::{BigInt, BigUint};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crossed::{CrossedModule, Level};
use crate::gamma::GammaModule;
use crate::poly::IntPoly;

/// Largest `d·p^{n+m}` a corpus level may have.
pub const MAX_GROUP_RING_RANK: u64 = 162;

#[derive(Clone, Debug)]
pub struct GammaCase {
    pub module: GammaModule,
    /// Character values `u ≡ 1 mod p`.
    pub characters: Vec<BigInt>,
}

#[derive(Clone, Debug)]
pub struct CrossedCase {
    pub module: CrossedModule,
    pub levels: Vec<Level>,
    pub characters: Vec<BigInt>,
}

fn coefficient(rng: &mut ChaCha8Rng, p: i64) -> BigInt {
    // weighted toward multiples of p so that λ and μ vary
    let base: i64 = rng.random_range(-9..=9);
    match rng.random_range(0..4) {
        0 => BigInt::from(base * p),
        1 => BigInt::from(base * p * p),
        _ => BigInt::from(base),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, p: i64, max_degree: usize) -> IntPoly {
    let deg = rng.random_range(0..=max_degree);
    (0..=deg).map(|_| coefficient(rng, p)).collect()
}

/// `count` torsion presentations with `d ≤ 3`, entries of degree `≤ 4`,
/// `p ∈ {3, 5}`, each with five characters (the trivial one included).
pub fn gamma_corpus(seed: u64, count: usize) -> Vec<GammaCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: i64 = if rng.random_range(0..2) == 0 { 3 } else { 5 };
        let d = rng.random_range(1..=3usize);
        let entries = (0..d)
            .map(|_| (0..d).map(|_| random_poly(&mut rng, p, 4)).collect())
            .collect();
        let Ok(module) = GammaModule::new(BigUint::from(p as u64), entries) else {
            continue;
        };
        let k: i64 = rng.random_range(2..=6);
        let characters = [1, 1 + p, 1 - p, 1 + p * p, 1 + k * p]
            .into_iter()
            .map(BigInt::from)
            .collect();
        out.push(GammaCase { module, characters });
    }
    out
}

/// `count` action matrices with `d ≤ 2`, entries of degree `≤ 2`,
/// `κ ∈ {1 + p, 1 + 2p}`, `p ∈ {3, 5}`; levels `n, m ≤ 2` that are normal and
/// have `d·p^{n+m} ≤ 162`; characters `1, 1 + p, 1 + p²`.
pub fn crossed_corpus(seed: u64, count: usize) -> Vec<CrossedCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: i64 = if rng.random_range(0..3) < 2 { 3 } else { 5 };
        let d = rng.random_range(1..=2usize);
        let kappa = if rng.random_range(0..2) == 0 {
            1 + p
        } else {
            1 + 2 * p
        };
        let entries = (0..d)
            .map(|_| (0..d).map(|_| random_poly(&mut rng, p, 2)).collect())
            .collect();
        let Ok(module) = CrossedModule::new(BigUint::from(p as u64), BigInt::from(kappa), entries)
        else {
            continue;
        };
        let levels = corpus_levels(&module);
        let characters = [1, 1 + p, 1 + p * p]
            .into_iter()
            .map(BigInt::from)
            .collect();
        out.push(CrossedCase {
            module,
            levels,
            characters,
        });
    }
    out
}

pub fn corpus_levels(module: &CrossedModule) -> Vec<Level> {
    let p = u64::try_from(module.p().clone()).expect("small prime");
    let d = module.rank() as u64;
    let mut levels = Vec::new();
    for n in 0..=2u32 {
        for m in 0..=2u32 {
            if d * p.pow(n + m) > MAX_GROUP_RING_RANK {
                continue;
            }
            if let Ok(l) = module.level(n, m) {
                levels.push(l);
            }
        }
    }
    levels
}

/// Random modules at the order-27 level `(1, 2)` with `κ = 4`, `p = 3`.
pub fn nonabelian_corpus(seed: u64, count: usize) -> Vec<CrossedModule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = rng.random_range(1..=2usize);
        let entries = (0..d)
            .map(|_| (0..d).map(|_| random_poly(&mut rng, 3, 2)).collect())
            .collect();
        if let Ok(m) = CrossedModule::new(BigUint::from(3u32), BigInt::from(4), entries) {
            out.push(m);
        }
    }
    out
}
