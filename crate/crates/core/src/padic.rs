//! Fixed-precision arithmetic in `Z_p`, carried as residues modulo `p^N`.
//!
//! A [`PadicContext`] fixes the prime and the precision exponent; every
//! [`PadicInt`] remembers the context it was created in and arithmetic between
//! elements of different contexts is refused. Valuations saturate at
//! [`Valuation::AtLeastN`], which means "indistinguishable from zero at this
//! precision" and is never confused with an actual exponent.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::poly::CoeffRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("p = {0} is not an odd prime")]
    NotAnOddPrime(BigUint),
    #[error("precision exponent must be at least 1")]
    ZeroPrecision,
    #[error("element has positive valuation and is not a unit")]
    NotAUnit,
    #[error("elements live in different p-adic contexts")]
    MixedContext,
}

/// The coefficient ring `Z/p^N`, read as `Z_p` known to `N` digits.
#[derive(Debug)]
pub struct PadicContext {
    p: BigUint,
    precision: u32,
    modulus: BigUint,
    // p as a machine word when it fits; speeds up divisibility tests
    small_p: Option<u64>,
}

impl PartialEq for PadicContext {
    fn eq(&self, other: &Self) -> bool {
        self.precision == other.precision && self.p == other.p
    }
}

impl Eq for PadicContext {}

impl PadicContext {
    pub fn new(p: impl Into<BigUint>, precision: u32) -> Result<Arc<Self>, PadicError> {
        let p = p.into();
        if !is_odd_prime(&p) {
            return Err(PadicError::NotAnOddPrime(p));
        }
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        Ok(Arc::new(Self::build(p, precision)))
    }

    fn build(p: BigUint, precision: u32) -> Self {
        let modulus = num_traits::pow(p.clone(), precision as usize);
        let small_p = p.to_u64();
        PadicContext {
            p,
            precision,
            modulus,
            small_p,
        }
    }

    /// Same prime, different number of digits.
    pub fn with_precision(&self, precision: u32) -> Arc<Self> {
        assert!(precision >= 1, "precision exponent must be at least 1");
        Arc::new(Self::build(self.p.clone(), precision))
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^N`.
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn element(self: &Arc<Self>, value: &BigInt) -> PadicInt {
        PadicInt {
            ctx: Arc::clone(self),
            residue: self.reduce(value),
        }
    }

    pub fn element_u64(self: &Arc<Self>, value: u64) -> PadicInt {
        self.element(&BigInt::from(value))
    }

    pub fn zero(self: &Arc<Self>) -> PadicInt {
        PadicInt {
            ctx: Arc::clone(self),
            residue: BigUint::zero(),
        }
    }

    pub fn one(self: &Arc<Self>) -> PadicInt {
        self.element_u64(1)
    }

    /// Wraps a raw residue. The residue must already lie in `[0, p^N)`.
    pub fn from_residue(self: &Arc<Self>, residue: BigUint) -> PadicInt {
        debug_assert!(residue < self.modulus);
        PadicInt {
            ctx: Arc::clone(self),
            residue,
        }
    }

    pub(crate) fn reduce(&self, value: &BigInt) -> BigUint {
        let r = value.mod_floor(&BigInt::from_biguint(Sign::Plus, self.modulus.clone()));
        r.to_biguint()
            .expect("mod_floor by a positive modulus is nonnegative")
    }

    pub(crate) fn reduce_uint(&self, value: &BigUint) -> BigUint {
        if value < &self.modulus {
            value.clone()
        } else {
            value % &self.modulus
        }
    }

    pub(crate) fn is_unit_residue(&self, r: &BigUint) -> bool {
        match self.small_p {
            Some(p) => !(r % p).is_zero(),
            None => !(r % &self.p).is_zero(),
        }
    }

    pub fn valuation_of(&self, r: &BigUint) -> Valuation {
        if r.is_zero() {
            return Valuation::AtLeastN;
        }
        let mut v = 0u32;
        let mut x = r.clone();
        loop {
            let (q, rem) = match self.small_p {
                Some(p) => {
                    let (q, rem) = x.div_rem(&BigUint::from(p));
                    (q, rem)
                }
                None => x.div_rem(&self.p),
            };
            if !rem.is_zero() {
                break;
            }
            v += 1;
            x = q;
        }
        // a nonzero residue below p^N has valuation below N
        debug_assert!(v < self.precision);
        Valuation::Finite(v)
    }

    /// Multiplicative inverse of a unit residue.
    pub(crate) fn inverse_of(&self, r: &BigUint) -> Option<BigUint> {
        if !self.is_unit_residue(r) {
            return None;
        }
        let a = BigInt::from(r.clone());
        let m = BigInt::from(self.modulus.clone());
        let ext = a.extended_gcd(&m);
        debug_assert!(ext.gcd.is_one());
        Some(self.reduce(&ext.x))
    }

    /// Divides a residue by `p^k`, assuming `p^k` divides it. The quotient is
    /// only meaningful modulo `p^(N-k)`.
    pub(crate) fn shift_down(&self, r: &BigUint, k: u32) -> BigUint {
        if k == 0 {
            return r.clone();
        }
        let pk = num_traits::pow(self.p.clone(), k as usize);
        debug_assert!((r % &pk).is_zero());
        r / pk
    }

    /// `p^k` as a residue (zero once `k >= N`).
    pub(crate) fn p_power(&self, k: u32) -> BigUint {
        if k >= self.precision {
            BigUint::zero()
        } else {
            num_traits::pow(self.p.clone(), k as usize)
        }
    }

    /// Symmetric representative in `(-p^N/2, p^N/2]`, used for display.
    pub fn signed_of(&self, r: &BigUint) -> BigInt {
        let half = &self.modulus >> 1u32;
        if r > &half {
            BigInt::from(r.clone()) - BigInt::from(self.modulus.clone())
        } else {
            BigInt::from(r.clone())
        }
    }
}

impl CoeffRing for PadicContext {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }

    fn one(&self) -> BigUint {
        self.reduce_uint(&BigUint::one())
    }

    fn from_int(&self, v: &BigInt) -> BigUint {
        self.reduce(v)
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.modulus {
            s - &self.modulus
        } else {
            s
        }
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            (a + &self.modulus) - b
        }
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a.is_zero() || b.is_zero() {
            return BigUint::zero();
        }
        (a * b) % &self.modulus
    }

    fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.modulus - a
        }
    }

    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
}

/// `v_p` of a residue: an exponent below `N`, or "at least `N`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    AtLeastN,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeastN => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeastN => write!(f, ">=N"),
        }
    }
}

/// An element of `Z_p` known modulo `p^N`.
#[derive(Clone)]
pub struct PadicInt {
    ctx: Arc<PadicContext>,
    residue: BigUint,
}

impl PadicInt {
    pub fn context(&self) -> &Arc<PadicContext> {
        &self.ctx
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn valuation(&self) -> Valuation {
        self.ctx.valuation_of(&self.residue)
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.is_unit_residue(&self.residue)
    }

    pub fn unit_inverse(&self) -> Result<PadicInt, PadicError> {
        self.ctx
            .inverse_of(&self.residue)
            .map(|r| PadicInt {
                ctx: Arc::clone(&self.ctx),
                residue: r,
            })
            .ok_or(PadicError::NotAUnit)
    }

    pub fn pow(&self, mut e: u64) -> PadicInt {
        let ctx = &self.ctx;
        let mut base = self.residue.clone();
        let mut acc = ctx.one().residue;
        while e > 0 {
            if e & 1 == 1 {
                acc = ctx.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = ctx.mul(&base, &base);
            }
        }
        PadicInt {
            ctx: Arc::clone(ctx),
            residue: acc,
        }
    }

    /// Symmetric integer representative.
    pub fn to_signed(&self) -> BigInt {
        self.ctx.signed_of(&self.residue)
    }

    /// Re-embeds the canonical residue into another precision for the same
    /// prime. Digits below the smaller precision are preserved.
    pub fn reembed(&self, ctx: &Arc<PadicContext>) -> PadicInt {
        assert_eq!(ctx.p(), self.ctx.p(), "re-embedding across primes");
        PadicInt {
            ctx: Arc::clone(ctx),
            residue: ctx.reduce_uint(&self.residue),
        }
    }

    pub fn try_add(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.check(rhs)?;
        Ok(self.with(self.ctx.add(&self.residue, &rhs.residue)))
    }

    pub fn try_sub(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.check(rhs)?;
        Ok(self.with(self.ctx.sub(&self.residue, &rhs.residue)))
    }

    pub fn try_mul(&self, rhs: &PadicInt) -> Result<PadicInt, PadicError> {
        self.check(rhs)?;
        Ok(self.with(self.ctx.mul(&self.residue, &rhs.residue)))
    }

    fn check(&self, rhs: &PadicInt) -> Result<(), PadicError> {
        if Arc::ptr_eq(&self.ctx, &rhs.ctx) || *self.ctx == *rhs.ctx {
            Ok(())
        } else {
            Err(PadicError::MixedContext)
        }
    }

    fn with(&self, residue: BigUint) -> PadicInt {
        PadicInt {
            ctx: Arc::clone(&self.ctx),
            residue,
        }
    }
}

impl PartialEq for PadicInt {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.residue == other.residue
    }
}

impl Eq for PadicInt {}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + O({}^{})",
            self.to_signed(),
            self.ctx.p,
            self.ctx.precision
        )
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_signed())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&PadicInt> for &PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: &PadicInt) -> PadicInt {
                self.$checked(rhs)
                    .expect("arithmetic across p-adic contexts")
            }
        }
        impl $tr<PadicInt> for PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: PadicInt) -> PadicInt {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        self.with(self.ctx.neg(&self.residue))
    }
}

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        -&self
    }
}

/// Exact `v_p` of a nonzero integer; `None` for zero.
pub fn integer_valuation(value: &BigInt, p: &BigUint) -> Option<u32> {
    if value.is_zero() {
        return None;
    }
    let p = BigInt::from(p.clone());
    let mut x = value.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        x = q;
    }
}

const SMALL_PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Miller-Rabin with the first 24 prime bases; deterministic far beyond 64 bits.
pub fn is_odd_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n <= &two {
        return false;
    }
    for &q in SMALL_PRIMES.iter() {
        let q = BigUint::from(q);
        if n == &q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1u32;
        s += 1;
    }
    'bases: for &a in SMALL_PRIMES.iter() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32, n: u32) -> Arc<PadicContext> {
        PadicContext::new(BigUint::from(p), n).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let c = ctx(3, 8);
        assert_eq!(c.element_u64(9).valuation(), Valuation::Finite(2));
        assert_eq!(c.element_u64(0).valuation(), Valuation::AtLeastN);
        // 350 = 2 * 5^2 * 7
        let c = ctx(5, 4);
        assert_eq!(c.element_u64(350).valuation(), Valuation::Finite(2));
        // 3^8 reduces to zero at N = 8
        assert_eq!(ctx(3, 8).element_u64(6561).valuation(), Valuation::AtLeastN);
    }

    #[test]
    fn unit_inverse_examples() {
        let c = ctx(3, 4);
        assert_eq!(c.one().unit_inverse().unwrap(), c.one());
        // 4 * 61 = 244 = 3 * 81 + 1
        assert_eq!(c.element_u64(4).unit_inverse().unwrap(), c.element_u64(61));
        assert_eq!(c.element_u64(3).unit_inverse(), Err(PadicError::NotAUnit));
    }

    #[test]
    fn negative_integers_reduce() {
        let c = ctx(3, 4);
        let m3 = c.element(&BigInt::from(-3));
        assert_eq!(m3.residue(), &BigUint::from(78u32));
        assert_eq!(m3.to_signed(), BigInt::from(-3));
        assert_eq!(m3.valuation(), Valuation::Finite(1));
    }

    #[test]
    fn rejects_bad_contexts() {
        assert!(matches!(
            PadicContext::new(BigUint::from(2u32), 4),
            Err(PadicError::NotAnOddPrime(_))
        ));
        assert!(matches!(
            PadicContext::new(BigUint::from(9u32), 4),
            Err(PadicError::NotAnOddPrime(_))
        ));
        assert_eq!(
            PadicContext::new(BigUint::from(3u32), 0).unwrap_err(),
            PadicError::ZeroPrecision
        );
    }

    #[test]
    fn mixed_context_is_an_error() {
        let a = ctx(3, 4).one();
        let b = ctx(3, 5).one();
        assert_eq!(a.try_add(&b), Err(PadicError::MixedContext));
        let c = ctx(5, 4).one();
        assert_eq!(a.try_mul(&c), Err(PadicError::MixedContext));
    }

    #[test]
    fn primality() {
        let primes = [
            3u64,
            5,
            7,
            97,
            7919,
            1_000_000_007,
            2_305_843_009_213_693_951,
        ];
        for p in primes {
            assert!(is_odd_prime(&BigUint::from(p)), "{p}");
        }
        for n in [1u64, 2, 9, 15, 561, 1_000_000_011 * 3] {
            assert!(!is_odd_prime(&BigUint::from(n)), "{n}");
        }
    }

    #[test]
    fn integer_valuation_matches_residue_valuation() {
        let p = BigUint::from(5u32);
        assert_eq!(integer_valuation(&BigInt::from(-350), &p), Some(2));
        assert_eq!(integer_valuation(&BigInt::from(0), &p), None);
    }
}
