//! Finitely generated torsion `Λ(Γ)`-modules given by square presentations
//! `M = Λ^d / Λ^d F` (row vectors, cokernel of right multiplication by `F`).

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::euler::{
    candidate_indices, candidate_value, CandidateReport, EulerResult, LevelOutcome, SearchOrder,
    TwistSearchReport,
};
use crate::matrix::{smith_form, PadicMatrix};
use crate::padic::{is_odd_prime, PadicContext, PadicError};
use crate::poly::{self, IntPoly, Integers};
use crate::series::{
    mult_mod_omega_divisors, twist_series, weierstrass_prepare, Character, Direction, PowerSeries,
    SeriesError, Variable, WeierstrassData, DEFAULT_TRUNCATION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("presentation must be a non-empty square matrix")]
    NotSquare,
    #[error("presentation determinant is zero: module is not torsion")]
    NotTorsion,
    #[error("characteristic element vanishes to working precision")]
    ZeroDeterminant,
    #[error("{0} is not an odd prime")]
    BadPrime(BigUint),
    #[error("module is over p = {module}, context is over p = {context}")]
    PrimeMismatch { module: BigUint, context: BigUint },
    #[error("twisting a presentation needs an integer character value")]
    NeedsIntegerCharacter,
    #[error("no candidate among {} certified every level", .0.candidates.len())]
    BudgetExhausted(Box<TwistSearchReport>),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaModule {
    p: BigUint,
    entries: Vec<Vec<IntPoly>>,
}

impl GammaModule {
    /// Validates squareness and torsion (`det F ≠ 0` exactly).
    pub fn new(p: BigUint, mut entries: Vec<Vec<IntPoly>>) -> Result<Self, GammaError> {
        if !is_odd_prime(&p) {
            return Err(GammaError::BadPrime(p));
        }
        let d = entries.len();
        if d == 0 || entries.iter().any(|row| row.len() != d) {
            return Err(GammaError::NotSquare);
        }
        for row in &mut entries {
            for e in row.iter_mut() {
                poly::trim(&Integers, e);
            }
        }
        let m = GammaModule { p, entries };
        if m.determinant().is_empty() {
            return Err(GammaError::NotTorsion);
        }
        Ok(m)
    }

    /// `Λ/(f)`.
    pub fn cyclic(p: BigUint, f: IntPoly) -> Result<Self, GammaError> {
        Self::new(p, vec![vec![f]])
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<IntPoly>] {
        &self.entries
    }

    /// `det F` over `Z[X]`.
    pub fn determinant(&self) -> IntPoly {
        poly::det_poly_matrix(&Integers, &self.entries)
    }

    fn max_degree(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// The presentation of `M(ρ)`: every entry twisted by `ρ^{-1}` and scaled
    /// by the unit `u^D` (`D` the largest entry degree) so that it stays an
    /// integer polynomial.
    pub fn twisted(&self, rho: &Character) -> Result<GammaModule, GammaError> {
        let u = rho.exact_value().ok_or(GammaError::NeedsIntegerCharacter)?;
        let d = self.max_degree();
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| scaled_inverse_twist(e, u, d)).collect())
            .collect();
        Ok(GammaModule {
            p: self.p.clone(),
            entries,
        })
    }

    /// Block-diagonal presentation of `M ⊕ M'`.
    pub fn direct_sum(&self, other: &GammaModule) -> Result<GammaModule, GammaError> {
        if self.p != other.p {
            return Err(GammaError::PrimeMismatch {
                module: self.p.clone(),
                context: other.p.clone(),
            });
        }
        let (a, b) = (self.rank(), other.rank());
        let mut entries = vec![vec![IntPoly::new(); a + b]; a + b];
        for i in 0..a {
            entries[i][..a].clone_from_slice(&self.entries[i]);
        }
        for i in 0..b {
            entries[a + i][a..].clone_from_slice(&other.entries[i]);
        }
        Ok(GammaModule {
            p: self.p.clone(),
            entries,
        })
    }

    /// The presentation as exact series in `ctx`.
    pub fn presentation(&self, ctx: &Arc<PadicContext>) -> Vec<Vec<PowerSeries>> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| PowerSeries::polynomial(ctx, Variable::X, e, DEFAULT_TRUNCATION))
                    .collect()
            })
            .collect()
    }

    fn check_context(&self, ctx: &PadicContext) -> Result<(), GammaError> {
        if ctx.p() != &self.p {
            return Err(GammaError::PrimeMismatch {
                module: self.p.clone(),
                context: ctx.p().clone(),
            });
        }
        Ok(())
    }
}

/// `u^D f(u^{-1}(1+X) - 1) = Σ a_k u^{D-k} (X + 1 - u)^k`, exactly.
pub(crate) fn scaled_inverse_twist(f: &[BigInt], u: &BigInt, d: usize) -> IntPoly {
    if f.is_empty() {
        return IntPoly::new();
    }
    let scaled: IntPoly = f
        .iter()
        .enumerate()
        .map(|(k, a)| a * u.pow((d - k) as u32))
        .collect();
    let mut out = poly::compose_affine(&Integers, &scaled, &(BigInt::one() - u), &BigInt::one());
    poly::trim(&Integers, &mut out);
    out
}

/// `Φ_{p^k}(1 + X)` as an integer polynomial.
fn cyclotomic_shifted(p: &BigUint, k: u32) -> IntPoly {
    let phi: IntPoly = if k == 0 {
        vec![BigInt::from(-1), BigInt::one()]
    } else {
        let step = num_traits::ToPrimitive::to_usize(&p.pow(k - 1)).expect("small level");
        let pu = num_traits::ToPrimitive::to_usize(p).expect("small prime");
        let mut c = vec![BigInt::zero(); step * (pu - 1) + 1];
        for i in 0..pu {
            c[i * step] = BigInt::one();
        }
        c
    };
    poly::taylor_shift_one(&Integers, &phi)
}

/// Whether the integer polynomial `g` vanishes at some root of `ω_n`.
pub(crate) fn shares_root_with_omega(g: &[BigInt], p: &BigUint, n: u32) -> bool {
    (0..=n).any(|k| {
        let mut r = poly::rem_monic(&Integers, g, &cyclotomic_shifted(p, k));
        poly::trim(&Integers, &mut r);
        r.is_empty()
    })
}

/// `det F` in Weierstrass form over `ctx`.
pub fn characteristic_data(
    m: &GammaModule,
    ctx: &Arc<PadicContext>,
) -> Result<WeierstrassData, GammaError> {
    m.check_context(ctx)?;
    let det = PowerSeries::polynomial(ctx, Variable::X, &m.determinant(), DEFAULT_TRUNCATION);
    weierstrass_prepare(&det).map_err(|e| match e {
        SeriesError::ZeroToPrecision => GammaError::ZeroDeterminant,
        e => e.into(),
    })
}

/// The characteristic element `p^μ · P`, unit part dropped.
pub fn characteristic_element(
    m: &GammaModule,
    ctx: &Arc<PadicContext>,
) -> Result<PowerSeries, GammaError> {
    Ok(characteristic_data(m, ctx)?.normalized(ctx))
}

fn character_context(m: &GammaModule, rho: &Character) -> Result<Arc<PadicContext>, GammaError> {
    let ctx = Arc::clone(rho.value().context());
    m.check_context(&ctx)?;
    Ok(ctx)
}

/// `χ(Γ_n, M(ρ))` from the Smith form of the twisted presentation reduced
/// modulo `ω_n`.
pub fn euler_characteristic_direct(
    m: &GammaModule,
    rho: &Character,
    n: u32,
) -> Result<EulerResult, GammaError> {
    let ctx = character_context(m, rho)?;
    let twisted: Vec<Vec<Vec<BigUint>>> = m
        .presentation(&ctx)
        .iter()
        .map(|row| {
            row.iter()
                .map(|f| twist_series(f, rho, Direction::Inverse).map(|t| t.residues().to_vec()))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let omega = poly::omega(&*ctx, m.p(), n);
    let rows = poly::block_mult_matrix(&*ctx, &twisted, &omega);
    let divisors = smith_form(&PadicMatrix::from_residues(&ctx, rows));
    Ok(EulerResult::from_divisors(
        &divisors,
        ctx.precision(),
        || {
            let u = rho.exact_value()?;
            let tw = m.twisted(&Character::from_integer(&ctx, u).ok()?).ok()?;
            let omega = poly::omega(&Integers, m.p(), n);
            let rows = poly::block_mult_matrix(&Integers, &tw.entries, &omega);
            Some(poly::bareiss_det(&rows).is_zero())
        },
    ))
}

/// `χ(Γ_n, M(ρ))` as the valuation of the norm of the twisted characteristic
/// element from `Λ/ω_n` down to `Z_p`.
pub fn euler_characteristic_analytic(
    m: &GammaModule,
    rho: &Character,
    n: u32,
) -> Result<EulerResult, GammaError> {
    let ctx = character_context(m, rho)?;
    let c = characteristic_element(m, &ctx)?;
    let c_rho = twist_series(&c, rho, Direction::Inverse)?;
    let divisors = mult_mod_omega_divisors(&c_rho, n)?;
    Ok(EulerResult::from_divisors(
        &divisors,
        ctx.precision(),
        || {
            let u = rho.exact_value()?;
            let det = m.determinant();
            let g = scaled_inverse_twist(&det, u, det.len() - 1);
            Some(shares_root_with_omega(&g, m.p(), n))
        },
    ))
}

/// Options for [`find_twist`].
#[derive(Clone, Copy, Debug)]
pub struct TwistSearch {
    pub n_max: u32,
    pub budget: usize,
    pub order: SearchOrder,
}

impl TwistSearch {
    pub fn new(n_max: u32, budget: usize) -> Self {
        TwistSearch {
            n_max,
            budget,
            order: SearchOrder::Ascending,
        }
    }
}

/// Tries `u = 1 + p, 1 + 2p, …` and returns the first character for which
/// every level `n ≤ n_max` has a finite Euler characteristic.
pub fn find_twist(
    m: &GammaModule,
    ctx: &Arc<PadicContext>,
    search: TwistSearch,
) -> Result<(Character, TwistSearchReport), GammaError> {
    m.check_context(ctx)?;
    let mut report = TwistSearchReport {
        precision: ctx.precision(),
        budget: search.budget,
        candidates: Vec::new(),
    };
    for k in candidate_indices(1, search.budget, search.order) {
        let u = candidate_value(m.p(), k);
        let rho = Character::from_integer(ctx, &u)?;
        let mut levels = Vec::new();
        let mut good = true;
        for n in 0..=search.n_max {
            let result = euler_characteristic_direct(m, &rho, n)?;
            good &= result.status == crate::euler::EulerStatus::Exists;
            levels.push(LevelOutcome {
                n,
                m: 0,
                result,
                akashi_agrees: None,
            });
            if !good {
                break;
            }
        }
        report.candidates.push(CandidateReport {
            u: u.to_string(),
            accepted: good,
            levels,
        });
        if good {
            return Ok((rho, report));
        }
    }
    Err(GammaError::BudgetExhausted(Box::new(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::EulerStatus;
    use crate::padic::Valuation;
    use crate::poly::int_poly;

    fn p3() -> BigUint {
        BigUint::from(3u32)
    }

    fn ctx(n: u32) -> Arc<PadicContext> {
        PadicContext::new(p3(), n).unwrap()
    }

    fn cyclic(c: &[i64]) -> GammaModule {
        GammaModule::cyclic(p3(), int_poly(c)).unwrap()
    }

    fn u(c: &Arc<PadicContext>, v: i64) -> Character {
        Character::from_integer(c, &BigInt::from(v)).unwrap()
    }

    #[test]
    fn rejects_bad_presentations() {
        assert_eq!(
            GammaModule::cyclic(p3(), int_poly(&[0])).unwrap_err(),
            GammaError::NotTorsion
        );
        let sing = vec![
            vec![int_poly(&[0, 1]), int_poly(&[0, 1])],
            vec![int_poly(&[0, 2]), int_poly(&[0, 2])],
        ];
        assert_eq!(
            GammaModule::new(p3(), sing).unwrap_err(),
            GammaError::NotTorsion
        );
        assert_eq!(
            GammaModule::new(p3(), vec![vec![int_poly(&[1]), int_poly(&[1])]]).unwrap_err(),
            GammaError::NotSquare
        );
        assert!(matches!(
            GammaModule::cyclic(BigUint::from(2u32), int_poly(&[1])),
            Err(GammaError::BadPrime(_))
        ));
    }

    #[test]
    fn characteristic_element_examples() {
        let c = ctx(20);
        let w = characteristic_data(&cyclic(&[-3, 1]), &c).unwrap();
        assert_eq!((w.lambda(), w.mu), (1, 0));
        assert_eq!(
            characteristic_element(&cyclic(&[-3, 1]), &c)
                .unwrap()
                .to_signed_coeffs(),
            int_poly(&[-3, 1])
        );

        let diag = GammaModule::new(
            p3(),
            vec![
                vec![int_poly(&[0, 1]), vec![]],
                vec![vec![], int_poly(&[3])],
            ],
        )
        .unwrap();
        let w = characteristic_data(&diag, &c).unwrap();
        assert_eq!((w.lambda(), w.mu), (1, 1));
        assert_eq!(w.distinguished.to_signed_coeffs(), int_poly(&[0, 1]));
        assert_eq!(
            characteristic_element(&diag, &c)
                .unwrap()
                .to_signed_coeffs(),
            int_poly(&[0, 3])
        );

        let sym = GammaModule::new(
            p3(),
            vec![
                vec![int_poly(&[0, 1]), int_poly(&[3])],
                vec![int_poly(&[3]), int_poly(&[0, 1])],
            ],
        )
        .unwrap();
        assert_eq!(sym.determinant(), int_poly(&[-9, 0, 1]));
        let w = characteristic_data(&sym, &c).unwrap();
        assert_eq!((w.lambda(), w.mu), (2, 0));
        assert_eq!(w.distinguished.to_signed_coeffs(), int_poly(&[-9, 0, 1]));
    }

    #[test]
    fn direct_examples() {
        let c = ctx(64);
        let triv = Character::trivial(&c);
        let r = euler_characteristic_direct(&cyclic(&[0, 1]), &triv, 0).unwrap();
        assert_eq!(r.status, EulerStatus::NotFiniteDetected);
        let r = euler_characteristic_direct(&cyclic(&[-3, 1]), &triv, 0).unwrap();
        assert_eq!(r, EulerResult::exists(1, 0, 64));
        let r = euler_characteristic_direct(&cyclic(&[0, 1]), &u(&c, 4), 0).unwrap();
        assert_eq!(r.verdict(), (EulerStatus::Exists, Some(1)));
    }

    #[test]
    fn analytic_examples() {
        let c = ctx(64);
        let triv = Character::trivial(&c);
        assert_eq!(
            euler_characteristic_analytic(&cyclic(&[-3, 1]), &triv, 0)
                .unwrap()
                .chi_exponent,
            Some(1)
        );
        assert_eq!(
            euler_characteristic_analytic(&cyclic(&[0, 1]), &u(&c, 4), 0)
                .unwrap()
                .chi_exponent,
            Some(1)
        );
        assert_eq!(
            euler_characteristic_analytic(&cyclic(&[-3, 1]), &triv, 1)
                .unwrap()
                .chi_exponent,
            Some(2)
        );
        assert_eq!(
            euler_characteristic_analytic(&cyclic(&[0, 1]), &triv, 1)
                .unwrap()
                .status,
            EulerStatus::NotFiniteDetected
        );
    }

    #[test]
    fn undecidable_without_exact_character() {
        // u = 1 + 3^70 is 1 at precision 64, but only p-adically
        let c = ctx(64);
        let one = Character::new(c.one()).unwrap();
        let r = euler_characteristic_direct(&cyclic(&[0, 1]), &one, 0).unwrap();
        assert_eq!(r.status, EulerStatus::IndeterminateAtPrecision);
        let u = BigInt::from(1) + BigInt::from(3).pow(70);
        let r = euler_characteristic_direct(
            &cyclic(&[0, 1]),
            &Character::from_integer(&c, &u).unwrap(),
            0,
        )
        .unwrap();
        assert_eq!(r.status, EulerStatus::IndeterminateAtPrecision);
        let wide = ctx(128);
        let r = euler_characteristic_direct(
            &cyclic(&[0, 1]),
            &Character::from_integer(&wide, &u).unwrap(),
            0,
        )
        .unwrap();
        assert_eq!(r.chi_exponent, Some(70));
    }

    #[test]
    fn find_twist_examples() {
        let c = ctx(64);
        let (rho, report) = find_twist(&cyclic(&[0, 1]), &c, TwistSearch::new(1, 25)).unwrap();
        assert_eq!(rho.exact_value(), Some(&BigInt::from(4)));
        assert_eq!(report.candidates.len(), 1);

        let (rho, report) = find_twist(&cyclic(&[3]), &c, TwistSearch::new(2, 25)).unwrap();
        assert_eq!(rho.exact_value(), Some(&BigInt::from(4)));
        let exps: Vec<_> = report.candidates[0]
            .levels
            .iter()
            .map(|l| l.result.chi_exponent)
            .collect();
        assert_eq!(exps, vec![Some(1), Some(3), Some(9)]);

        let omega1 = GammaModule::cyclic(p3(), poly::omega(&Integers, &p3(), 1)).unwrap();
        let triv = Character::trivial(&c);
        assert_eq!(
            euler_characteristic_direct(&omega1, &triv, 1)
                .unwrap()
                .status,
            EulerStatus::NotFiniteDetected
        );
        let (rho, _) = find_twist(&omega1, &c, TwistSearch::new(1, 25)).unwrap();
        assert_eq!(rho.exact_value(), Some(&BigInt::from(4)));
    }

    #[test]
    fn budget_exhaustion_reports_candidates() {
        // (X - 3)(X - 6) at u^{-1} - 1 = -3/4: valuations 1 and 3
        let c = ctx(64);
        let m = cyclic(&[18, -9, 1]);
        let u4 = Character::from_integer(&c, &BigInt::from(4)).unwrap();
        assert_eq!(
            euler_characteristic_direct(&m, &u4, 0)
                .unwrap()
                .chi_exponent,
            Some(4)
        );
        let err = find_twist(&cyclic(&[0, 1]), &c, TwistSearch::new(0, 0)).unwrap_err();
        assert!(matches!(err, GammaError::BudgetExhausted(r) if r.candidates.is_empty()));
    }

    #[test]
    fn twisted_presentation_is_integral() {
        let c = ctx(40);
        let m = cyclic(&[0, 1]);
        let tw = m.twisted(&u(&c, 4)).unwrap();
        // 4 * (4^{-1}(1+X) - 1) = X - 3
        assert_eq!(tw.entries()[0][0], int_poly(&[-3, 1]));
        let s = PowerSeries::polynomial(&c, Variable::X, &tw.entries()[0][0], DEFAULT_TRUNCATION);
        assert_eq!(s.coeff(0).valuation(), Valuation::Finite(1));
    }
}
