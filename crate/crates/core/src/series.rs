//! Truncated power series over `Z_p`: the Iwasawa algebra `Z_p[[X]]`
//! (identified with `Λ(Γ)` through `γ ↦ 1 + X`) and its copy `Z_p[[Y]]` for
//! `Λ(H)`.
//!
//! A series either is an exact polynomial (no truncation loss; every
//! coefficient beyond the stored ones is zero) or is known up to an X-adic
//! truncation order. Products of exact polynomials stay exact; as soon as a
//! truncated operand is involved the result is truncated at the smallest
//! truncation order among the truncated operands.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{determinant, smith_form, ElementaryDivisors, PadicMatrix};
use crate::padic::{PadicContext, PadicError, PadicInt, Valuation};
use crate::poly::{self, CoeffRing};

pub const DEFAULT_TRUNCATION: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("divisor is divisible by p up to its truncation order")]
    DivisorDivisibleByP,
    #[error("precision exhausted: need truncation order {needed}, have {available}")]
    PrecisionExhausted { needed: usize, available: usize },
    #[error("series is zero to working precision")]
    ZeroToPrecision,
    #[error("discarded tail may affect digits below p^N")]
    TailUncertified,
    #[error("series live in different p-adic contexts")]
    MixedContext,
    #[error("series are in different variables")]
    VariableMismatch,
    #[error("character value must be congruent to 1 mod p")]
    NotInOnePlusPZp,
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variable {
    /// `Λ(Γ)`, with `γ ↔ 1 + X`.
    X,
    /// `Λ(H)`, with `h ↔ 1 + Y`.
    Y,
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variable::X => "X",
            Variable::Y => "Y",
        })
    }
}

#[derive(Clone)]
pub struct PowerSeries {
    ctx: Arc<PadicContext>,
    var: Variable,
    // never longer than `truncation` unless exact
    coeffs: Vec<BigUint>,
    truncation: usize,
    exact: bool,
}

impl PowerSeries {
    /// An exact polynomial with integer coefficients (little-endian).
    pub fn polynomial(
        ctx: &Arc<PadicContext>,
        var: Variable,
        coeffs: &[BigInt],
        truncation: usize,
    ) -> Self {
        let coeffs = coeffs.iter().map(|c| ctx.reduce(c)).collect();
        Self::from_residues(ctx, var, coeffs, truncation, true)
    }

    /// A series known only up to `truncation`; coefficients beyond it are dropped.
    pub fn truncated(
        ctx: &Arc<PadicContext>,
        var: Variable,
        coeffs: &[BigInt],
        truncation: usize,
    ) -> Self {
        let coeffs = coeffs
            .iter()
            .take(truncation)
            .map(|c| ctx.reduce(c))
            .collect();
        Self::from_residues(ctx, var, coeffs, truncation, false)
    }

    pub fn from_residues(
        ctx: &Arc<PadicContext>,
        var: Variable,
        mut coeffs: Vec<BigUint>,
        truncation: usize,
        exact: bool,
    ) -> Self {
        assert!(truncation >= 1, "truncation order must be positive");
        if !exact {
            coeffs.truncate(truncation);
        }
        poly::trim(&**ctx, &mut coeffs);
        PowerSeries {
            ctx: Arc::clone(ctx),
            var,
            coeffs,
            truncation,
            exact,
        }
    }

    pub fn from_padic_coeffs(
        coeffs: &[PadicInt],
        var: Variable,
        truncation: usize,
        exact: bool,
    ) -> Self {
        let ctx = Arc::clone(coeffs.first().expect("at least one coefficient").context());
        let residues = coeffs.iter().map(|c| c.residue().clone()).collect();
        Self::from_residues(&ctx, var, residues, truncation, exact)
    }

    pub fn zero(ctx: &Arc<PadicContext>, var: Variable) -> Self {
        Self::from_residues(ctx, var, Vec::new(), DEFAULT_TRUNCATION, true)
    }

    pub fn one(ctx: &Arc<PadicContext>, var: Variable) -> Self {
        Self::from_residues(
            ctx,
            var,
            vec![ctx.one().residue().clone()],
            DEFAULT_TRUNCATION,
            true,
        )
    }

    /// The variable itself.
    pub fn gen(ctx: &Arc<PadicContext>, var: Variable) -> Self {
        Self::from_residues(
            ctx,
            var,
            vec![BigUint::zero(), ctx.one().residue().clone()],
            DEFAULT_TRUNCATION,
            true,
        )
    }

    pub fn constant(c: &PadicInt, var: Variable) -> Self {
        Self::from_residues(
            c.context(),
            var,
            vec![c.residue().clone()],
            DEFAULT_TRUNCATION,
            true,
        )
    }

    pub fn context(&self) -> &Arc<PadicContext> {
        &self.ctx
    }

    pub fn variable(&self) -> Variable {
        self.var
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Degree when the series is an exact polynomial (zero counts as degree 0).
    pub fn exact_degree(&self) -> Option<usize> {
        self.exact.then(|| self.coeffs.len().saturating_sub(1))
    }

    pub fn coeff(&self, i: usize) -> PadicInt {
        self.ctx
            .from_residue(self.coeffs.get(i).cloned().unwrap_or_default())
    }

    pub(crate) fn residues(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Coefficients as symmetric integers, little-endian, trailing zeros dropped.
    pub fn to_signed_coeffs(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|c| self.ctx.signed_of(c)).collect()
    }

    /// Zero at this precision on every known coefficient.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn with_truncation(&self, truncation: usize) -> Self {
        let mut out = self.clone();
        out.truncation = truncation;
        if !out.exact {
            out.coeffs.truncate(truncation);
        }
        out
    }

    /// Re-embeds the residues in another precision for the same prime.
    pub fn reembed(&self, ctx: &Arc<PadicContext>) -> Self {
        let coeffs = self.coeffs.iter().map(|c| ctx.reduce_uint(c)).collect();
        Self::from_residues(ctx, self.var, coeffs, self.truncation, self.exact)
    }

    fn check(&self, other: &PowerSeries) -> Result<(), SeriesError> {
        if !(Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx) {
            return Err(SeriesError::MixedContext);
        }
        if self.var != other.var {
            return Err(SeriesError::VariableMismatch);
        }
        Ok(())
    }

    fn combined_truncation(&self, other: &PowerSeries) -> (usize, bool) {
        match (self.exact, other.exact) {
            (true, true) => (self.truncation.min(other.truncation), true),
            (true, false) => (other.truncation, false),
            (false, true) => (self.truncation, false),
            (false, false) => (self.truncation.min(other.truncation), false),
        }
    }

    pub fn try_add(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check(other)?;
        let (t, exact) = self.combined_truncation(other);
        let c = poly::add(&*self.ctx, &self.coeffs, &other.coeffs);
        Ok(Self::from_residues(&self.ctx, self.var, c, t, exact))
    }

    pub fn try_sub(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check(other)?;
        let (t, exact) = self.combined_truncation(other);
        let c = poly::sub(&*self.ctx, &self.coeffs, &other.coeffs);
        Ok(Self::from_residues(&self.ctx, self.var, c, t, exact))
    }

    pub fn try_mul(&self, other: &PowerSeries) -> Result<PowerSeries, SeriesError> {
        self.check(other)?;
        let (t, exact) = self.combined_truncation(other);
        let c = if exact {
            poly::mul(&*self.ctx, &self.coeffs, &other.coeffs)
        } else {
            poly::mul_trunc(&*self.ctx, &self.coeffs, &other.coeffs, t)
        };
        Ok(Self::from_residues(&self.ctx, self.var, c, t, exact))
    }

    pub fn neg(&self) -> PowerSeries {
        let c = self.coeffs.iter().map(|x| self.ctx.neg(x)).collect();
        Self::from_residues(&self.ctx, self.var, c, self.truncation, self.exact)
    }

    pub fn scale(&self, c: &PadicInt) -> PowerSeries {
        let v = poly::scale(&*self.ctx, &self.coeffs, c.residue());
        Self::from_residues(&self.ctx, self.var, v, self.truncation, self.exact)
    }

    /// `μ`: the smallest coefficient valuation among the known coefficients.
    pub fn min_valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .map(|c| self.ctx.valuation_of(c))
            .min()
            .unwrap_or(Valuation::AtLeastN)
    }

    /// Index of the first coefficient that is a unit.
    pub fn first_unit_index(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| self.ctx.is_unit_residue(c))
    }

    /// Multiplicative inverse of a series with unit constant term, to its
    /// own truncation order (exact inputs use their nominal order).
    pub fn unit_inverse(&self) -> Result<PowerSeries, SeriesError> {
        let inv =
            series_inverse(&self.ctx, &self.coeffs, self.truncation).ok_or(PadicError::NotAUnit)?;
        Ok(Self::from_residues(
            &self.ctx,
            self.var,
            inv,
            self.truncation,
            false,
        ))
    }

    /// Drops the first `k` coefficients and divides by `X^k`.
    fn shift_down(&self, k: usize) -> PowerSeries {
        let c = self.coeffs.iter().skip(k).cloned().collect();
        let t = if self.exact {
            self.truncation
        } else {
            self.truncation.saturating_sub(k).max(1)
        };
        Self::from_residues(&self.ctx, self.var, c, t, self.exact)
    }

    fn low_part(&self, k: usize) -> Vec<BigUint> {
        let mut v: Vec<BigUint> = self.coeffs.iter().take(k).cloned().collect();
        v.resize(k, BigUint::zero());
        v
    }
}

fn series_inverse(ctx: &PadicContext, a: &[BigUint], len: usize) -> Option<Vec<BigUint>> {
    let a0_inv = ctx.inverse_of(a.first()?)?;
    let mut b: Vec<BigUint> = Vec::with_capacity(len);
    b.push(a0_inv.clone());
    for k in 1..len {
        let mut acc = BigUint::zero();
        for i in 1..=k.min(a.len() - 1) {
            if !a[i].is_zero() && !b[k - i].is_zero() {
                acc = ctx.add(&acc, &ctx.mul(&a[i], &b[k - i]));
            }
        }
        b.push(ctx.neg(&ctx.mul(&acc, &a0_inv)));
    }
    Some(b)
}

impl PartialEq for PowerSeries {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx
            && self.var == other.var
            && self.exact == other.exact
            && self.coeffs == other.coeffs
            && (self.exact || self.truncation == other.truncation)
    }
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = self.ctx.signed_of(c);
            terms.push(match i {
                0 => format!("{c}"),
                1 => format!("{c}*{}", self.var),
                _ => format!("{c}*{}^{i}", self.var),
            });
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(f, "{}", terms.join(" + "))?;
        if !self.exact {
            write!(f, " + O({}^{})", self.var, self.truncation)?;
        }
        Ok(())
    }
}

macro_rules! series_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl std::ops::$tr<&PowerSeries> for &PowerSeries {
            type Output = PowerSeries;
            fn $method(self, rhs: &PowerSeries) -> PowerSeries {
                self.$checked(rhs).expect("incompatible power series")
            }
        }
    };
}

series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

/// A continuous character `ρ: Γ → Z_p^×`, determined by `u = ρ(γ) ∈ 1 + pZ_p`.
///
/// Characters built from an integer keep that integer so that exact
/// (non-p-adic) certificates and re-embeddings at higher precision stay
/// available.
#[derive(Clone, Debug, PartialEq)]
pub struct Character {
    value: PadicInt,
    exact: Option<BigInt>,
}

impl Character {
    pub fn new(value: PadicInt) -> Result<Self, SeriesError> {
        Self::check(&value)?;
        Ok(Character { value, exact: None })
    }

    pub fn from_integer(ctx: &Arc<PadicContext>, u: &BigInt) -> Result<Self, SeriesError> {
        let value = ctx.element(u);
        Self::check(&value)?;
        Ok(Character {
            value,
            exact: Some(u.clone()),
        })
    }

    pub fn trivial(ctx: &Arc<PadicContext>) -> Self {
        Character {
            value: ctx.one(),
            exact: Some(BigInt::from(1)),
        }
    }

    fn check(value: &PadicInt) -> Result<(), SeriesError> {
        let one = value.context().one();
        if (value - &one).valuation() == Valuation::Finite(0) {
            return Err(SeriesError::NotInOnePlusPZp);
        }
        Ok(())
    }

    /// `u = ρ(γ)`.
    pub fn value(&self) -> &PadicInt {
        &self.value
    }

    /// `u^{-1}`, always defined since `u ≡ 1 mod p`.
    pub fn inverse_value(&self) -> PadicInt {
        self.value
            .unit_inverse()
            .expect("character values are units")
    }

    pub fn exact_value(&self) -> Option<&BigInt> {
        self.exact.as_ref()
    }

    pub fn is_trivial(&self) -> bool {
        self.value == self.value.context().one()
    }

    /// The pointwise product `ρ ρ'`.
    pub fn product(&self, other: &Character) -> Character {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Character {
            value: &self.value * &other.value,
            exact,
        }
    }

    /// The same character in another precision.
    pub fn reembed(&self, ctx: &Arc<PadicContext>) -> Character {
        match &self.exact {
            Some(u) => Character {
                value: ctx.element(u),
                exact: Some(u.clone()),
            },
            None => Character {
                value: self.value.reembed(ctx),
                exact: None,
            },
        }
    }

    /// Display form of `u`.
    pub fn label(&self) -> String {
        match &self.exact {
            Some(u) => u.to_string(),
            None => self.value.to_signed().to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Use `u` itself.
    Forward,
    /// Use `u^{-1}` (the character `ρ^{-1}`).
    Inverse,
}

fn direction_value(rho: &Character, direction: Direction) -> PadicInt {
    match direction {
        Direction::Forward => rho.value().clone(),
        Direction::Inverse => rho.inverse_value(),
    }
}

/// `f = q g + r` with `deg r < λ_g`.
#[derive(Clone, Debug)]
pub struct WeierstrassDivision {
    pub quotient: PowerSeries,
    pub remainder: PowerSeries,
    /// Number of p-adic digits of `q` and `r` that no truncated input can
    /// disturb; equals the precision `N` for exact polynomial inputs.
    pub certified_digits: u32,
}

/// `p^μ · P · u` with `P` distinguished of degree `λ` and `u` a unit.
///
/// `P` and `u` live in the context of precision `N - μ`: dividing by `p^μ`
/// costs that many digits. [`WeierstrassData::normalized`] and
/// [`WeierstrassData::reconstruct`] multiply the `p^μ` back in.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub mu: u32,
    pub distinguished: PowerSeries,
    pub unit: PowerSeries,
}

impl WeierstrassData {
    pub fn lambda(&self) -> usize {
        self.distinguished
            .exact_degree()
            .expect("distinguished part is a polynomial")
    }

    /// `p^μ · P` in the precision `N` context.
    pub fn normalized(&self, ctx: &Arc<PadicContext>) -> PowerSeries {
        let p_mu = ctx.from_residue(ctx.p_power(self.mu));
        self.distinguished.reembed(ctx).scale(&p_mu)
    }

    /// `p^μ · P · u` in the precision `N` context.
    pub fn reconstruct(&self, ctx: &Arc<PadicContext>) -> PowerSeries {
        &self.normalized(ctx) * &self.unit.reembed(ctx)
    }
}

/// Weierstrass division of `f` by `g`, where `g` is not divisible by `p`.
pub fn weierstrass_divide(
    f: &PowerSeries,
    g: &PowerSeries,
) -> Result<WeierstrassDivision, SeriesError> {
    f.check(g)?;
    let ctx = &f.ctx;
    let lambda = g
        .first_unit_index()
        .ok_or(SeriesError::DivisorDivisibleByP)?;
    if !f.exact && f.truncation < lambda {
        return Err(SeriesError::PrecisionExhausted {
            needed: lambda,
            available: f.truncation,
        });
    }
    let target_truncation = if f.exact {
        f.truncation.max(g.truncation)
    } else {
        f.truncation
    };
    if lambda == 0 {
        let inv = g.with_truncation(target_truncation).unit_inverse()?;
        let q = f * &inv;
        return Ok(WeierstrassDivision {
            quotient: q,
            remainder: PowerSeries::zero(ctx, f.var),
            certified_digits: ctx.precision(),
        });
    }
    if g.exact {
        let (p_dist, v_unit) = hensel_split(g, lambda);
        let low = p_dist.low_part(lambda);
        let (q1, r, cert) = divide_rounds(f, &low, None, lambda);
        let q = if v_unit.coeffs.len() == 1 && v_unit.coeffs[0] == ctx.one().residue().clone() {
            q1
        } else {
            let v_inv = v_unit.with_truncation(target_truncation).unit_inverse()?;
            &q1 * &v_inv
        };
        return Ok(WeierstrassDivision {
            quotient: q,
            remainder: r,
            certified_digits: cert,
        });
    }
    let low = g.low_part(lambda);
    let u_inv = g.shift_down(lambda).unit_inverse()?;
    let (q, r, cert) = divide_rounds(f, &low, Some(&u_inv), lambda);
    Ok(WeierstrassDivision {
        quotient: q,
        remainder: r,
        certified_digits: cert,
    })
}

/// The division loop for `g = g_low + X^λ U`: peel `h = h_low + X^λ h_high`,
/// move `h_high U^{-1}` into the quotient and continue with
/// `-h_high U^{-1} g_low`, which is divisible by one more power of `p`.
fn divide_rounds(
    f: &PowerSeries,
    g_low: &[BigUint],
    u_inv: Option<&PowerSeries>,
    lambda: usize,
) -> (PowerSeries, PowerSeries, u32) {
    let ctx = Arc::clone(&f.ctx);
    let var = f.var;
    let precision = ctx.precision();
    let g_low_series = PowerSeries::from_residues(
        &ctx,
        var,
        g_low.to_vec(),
        f.truncation.max(lambda + 1),
        true,
    );
    let mut h = f.clone();
    let mut q = PowerSeries::zero(&ctx, var).with_truncation(f.truncation);
    let mut r = vec![BigUint::zero(); lambda];
    let mut rounds: u32 = 0;
    let certified;
    loop {
        if h.is_zero() {
            certified = if h.exact {
                precision
            } else {
                precision.min(rounds)
            };
            break;
        }
        if !h.exact && rounds >= precision {
            certified = precision;
            break;
        }
        if !h.exact && h.truncation <= lambda {
            // whatever remains of h is unknown but divisible by p^rounds
            for (i, c) in h.coeffs.iter().enumerate().take(lambda) {
                r[i] = ctx.add(&r[i], c);
            }
            certified = precision.min(rounds);
            break;
        }
        for (i, c) in h.low_part(lambda).iter().enumerate() {
            r[i] = ctx.add(&r[i], c);
        }
        let high = h.shift_down(lambda);
        let t = match u_inv {
            Some(u) => &high * u,
            None => high,
        };
        q = &q + &t;
        h = (&t * &g_low_series).neg();
        rounds += 1;
    }
    let remainder = PowerSeries::from_residues(&ctx, var, r, f.truncation.max(lambda), true);
    (q, remainder, certified)
}

/// Splits an exact polynomial `g` (first unit coefficient at index `λ`) as
/// `g = P · V` with `P` distinguished monic of degree `λ` and `V` an exact
/// polynomial with unit constant term, by linear Hensel lifting of
/// `g ≡ X^λ · V̄ (mod p)`.
fn hensel_split(g: &PowerSeries, lambda: usize) -> (PowerSeries, PowerSeries) {
    let ctx = Arc::clone(&g.ctx);
    let r = &*ctx;
    let one = ctx.one().residue().clone();
    let mut p_dist: Vec<BigUint> = vec![BigUint::zero(); lambda + 1];
    p_dist[lambda] = one.clone();
    let mut v: Vec<BigUint> = g.coeffs[lambda..].to_vec();
    // each round gains at least one digit
    for _ in 0..=ctx.precision() + 1 {
        let mut e = poly::sub(r, &g.coeffs, &poly::mul(r, &p_dist, &v));
        poly::trim(r, &mut e);
        if e.is_empty() {
            break;
        }
        let v_inv = series_inverse(r, &v, lambda).expect("V has unit constant term");
        let mut dp = poly::mul_trunc(r, &e, &v_inv, lambda);
        dp.resize(lambda, BigUint::zero());
        let mut rest = poly::sub(r, &e, &poly::mul(r, &v, &dp));
        debug_assert!(rest.iter().take(lambda).all(|c| c.is_zero()));
        let w: Vec<BigUint> = if rest.len() > lambda {
            rest.split_off(lambda)
        } else {
            Vec::new()
        };
        for (i, c) in dp.iter().enumerate() {
            p_dist[i] = r.add(&p_dist[i], c);
        }
        v = poly::add(r, &v, &w);
        poly::trim(r, &mut v);
    }
    (
        PowerSeries::from_residues(&ctx, g.var, p_dist, g.truncation, true),
        PowerSeries::from_residues(&ctx, g.var, v, g.truncation, true),
    )
}

/// Weierstrass preparation `f = p^μ · P · u`.
pub fn weierstrass_prepare(f: &PowerSeries) -> Result<WeierstrassData, SeriesError> {
    let mu = f
        .min_valuation()
        .finite()
        .ok_or(SeriesError::ZeroToPrecision)?;
    let ctx = &f.ctx;
    let reduced_ctx = if mu == 0 {
        Arc::clone(ctx)
    } else {
        ctx.with_precision(ctx.precision() - mu)
    };
    let shifted: Vec<BigUint> = f
        .coeffs
        .iter()
        .map(|c| reduced_ctx.reduce_uint(&ctx.shift_down(c, mu)))
        .collect();
    let f1 = PowerSeries::from_residues(&reduced_ctx, f.var, shifted, f.truncation, f.exact);
    let lambda = f1
        .first_unit_index()
        .expect("some coefficient has valuation mu");
    if lambda == 0 {
        return Ok(WeierstrassData {
            mu,
            distinguished: PowerSeries::one(&reduced_ctx, f.var),
            unit: f1,
        });
    }
    if f1.exact {
        let (p_dist, v_unit) = hensel_split(&f1, lambda);
        return Ok(WeierstrassData {
            mu,
            distinguished: p_dist,
            unit: v_unit,
        });
    }
    // X^λ = q f1 + r, so P = X^λ - r = q f1 and u = q^{-1}
    let mut x_lambda = vec![BigUint::zero(); lambda + 1];
    x_lambda[lambda] = reduced_ctx.one().residue().clone();
    let x_lambda = PowerSeries::from_residues(&reduced_ctx, f.var, x_lambda, f.truncation, true);
    let div = weierstrass_divide(&x_lambda, &f1)?;
    let p_dist = &x_lambda - &div.remainder;
    let unit = div.quotient.unit_inverse()?;
    Ok(WeierstrassData {
        mu,
        distinguished: p_dist,
        unit,
    })
}

/// `(λ, μ)` of a nonzero series.
pub fn lambda_mu(f: &PowerSeries) -> Result<(usize, u32), SeriesError> {
    let w = weierstrass_prepare(f)?;
    Ok((w.lambda(), w.mu))
}

/// The twist `Tw_ρ` (forward) or `Tw_{ρ^{-1}}` (inverse) on `Λ(Γ)`: the
/// substitution `X ↦ c(1+X) - 1` with `c = u` or `u^{-1}`.
pub fn twist_series(
    f: &PowerSeries,
    rho: &Character,
    direction: Direction,
) -> Result<PowerSeries, SeriesError> {
    if f.var != Variable::X {
        return Err(SeriesError::VariableMismatch);
    }
    if **rho.value().context() != *f.ctx {
        return Err(SeriesError::MixedContext);
    }
    let r = &*f.ctx;
    let c = direction_value(rho, direction);
    let a = r.sub(c.residue(), &CoeffRing::one(r));
    let mut out = poly::compose_affine(r, &f.coeffs, &a, c.residue());
    if !f.exact {
        out.truncate(f.truncation);
    }
    Ok(PowerSeries::from_residues(
        &f.ctx,
        f.var,
        out,
        f.truncation,
        f.exact,
    ))
}

/// `ρ̃(f) = f(u - 1)` (forward) or `ρ̃^{-1}(f) = f(u^{-1} - 1)` (inverse).
pub fn evaluate_character(
    f: &PowerSeries,
    rho: &Character,
    direction: Direction,
) -> Result<PadicInt, SeriesError> {
    if **rho.value().context() != *f.ctx {
        return Err(SeriesError::MixedContext);
    }
    let r = &*f.ctx;
    let c = direction_value(rho, direction);
    let x = r.sub(c.residue(), &CoeffRing::one(r));
    if !f.exact {
        if let Valuation::Finite(v) = r.valuation_of(&x) {
            // the dropped tail has valuation at least truncation * v
            if (f.truncation as u64) * u64::from(v) < u64::from(r.precision()) {
                return Err(SeriesError::TailUncertified);
            }
        }
    }
    Ok(f.ctx.from_residue(poly::evaluate(r, &f.coeffs, &x)))
}

/// `ω_n = (1+X)^{p^n} - 1`, exact.
pub fn omega(n: u32, ctx: &Arc<PadicContext>) -> PowerSeries {
    let c = poly::omega(&**ctx, ctx.p(), n);
    let t = c.len().max(DEFAULT_TRUNCATION);
    PowerSeries::from_residues(ctx, Variable::X, c, t, true)
}

/// Matrix of multiplication by `f` on `Λ/(ω_n)`, basis `1, X, …, X^{p^n - 1}`.
///
/// For a truncated `f` the dropped tail `X^k`, `k ≥ T`, reduces into
/// `p^{⌊k/p^n⌋} Λ/(ω_n)`, so the matrix is returned in the coarser context of
/// precision `min(N, ⌊T/p^n⌋)`.
pub fn mult_matrix_mod_omega(f: &PowerSeries, n: u32) -> Result<PadicMatrix, SeriesError> {
    let w = omega(n, &f.ctx);
    let size = w.coeffs.len() - 1;
    let ctx = if f.exact {
        Arc::clone(&f.ctx)
    } else {
        if f.truncation < size {
            return Err(SeriesError::PrecisionExhausted {
                needed: size,
                available: f.truncation,
            });
        }
        let digits = (f.truncation / size).min(f.ctx.precision() as usize) as u32;
        if digits == f.ctx.precision() {
            Arc::clone(&f.ctx)
        } else {
            f.ctx.with_precision(digits)
        }
    };
    let rows = poly::mult_matrix_mod_monic(&*f.ctx, &f.coeffs, &w.coeffs);
    let m = PadicMatrix::from_residues(&f.ctx, rows);
    Ok(if Arc::ptr_eq(&ctx, &f.ctx) {
        m
    } else {
        m.reembed(&ctx)
    })
}

/// `det` of multiplication by `f` on `Λ/(ω_n)`, i.e. `±Res(ω_n, f)`.
pub fn det_mult_mod_omega(f: &PowerSeries, n: u32) -> Result<PadicInt, SeriesError> {
    let m = mult_matrix_mod_omega(f, n)?;
    Ok(determinant(&m).expect("multiplication matrix is square"))
}

/// Elementary divisors of multiplication by `f` on `Λ/(ω_n)`; their sum is
/// `v_p(Res(ω_n, f))` even when that exceeds `N`.
pub fn mult_mod_omega_divisors(f: &PowerSeries, n: u32) -> Result<ElementaryDivisors, SeriesError> {
    Ok(smith_form(&mult_matrix_mod_omega(f, n)?))
}
