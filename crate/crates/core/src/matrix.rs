//! Dense matrices over `Z/p^N` and their elementary divisors.
//!
//! The elimination picks, at every step, an entry of minimal valuation in the
//! remaining block. Over the chain ring `Z/p^N` that entry divides the whole
//! block, so the exponents come out in ascending order and each one below `N`
//! is the true elementary divisor of any lift of the matrix.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::padic::{PadicContext, PadicInt, Valuation};
use crate::poly::CoeffRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix entries live in different p-adic contexts")]
    MixedContext,
    #[error("rows have different lengths")]
    Ragged,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
}

/// Row-major matrix of residues sharing one context.
#[derive(Clone, Debug)]
pub struct PadicMatrix {
    ctx: Arc<PadicContext>,
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl PadicMatrix {
    pub fn from_rows(rows: &[Vec<PadicInt>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let ctx = match rows.iter().flatten().next() {
            Some(x) => Arc::clone(x.context()),
            None => {
                return Err(MatrixError::Ragged);
            }
        };
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(MatrixError::Ragged);
            }
            for x in row {
                if **x.context() != *ctx {
                    return Err(MatrixError::MixedContext);
                }
                data.push(x.residue().clone());
            }
        }
        Ok(PadicMatrix {
            ctx,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds from raw residues already reduced into `ctx`.
    pub fn from_residues(ctx: &Arc<PadicContext>, rows: Vec<Vec<BigUint>>) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<BigUint> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * cols, "ragged residue matrix");
        PadicMatrix {
            ctx: Arc::clone(ctx),
            rows: r,
            cols,
            data,
        }
    }

    pub fn identity(ctx: &Arc<PadicContext>, n: usize) -> Self {
        let mut data = vec![BigUint::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = ctx.one().residue().clone();
        }
        PadicMatrix {
            ctx: Arc::clone(ctx),
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn context(&self) -> &Arc<PadicContext> {
        &self.ctx
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PadicInt {
        self.ctx.from_residue(self.data[i * self.cols + j].clone())
    }

    pub(crate) fn residue(&self, i: usize, j: usize) -> &BigUint {
        &self.data[i * self.cols + j]
    }

    pub fn to_residue_rows(&self) -> Vec<Vec<BigUint>> {
        self.data
            .chunks(self.cols.max(1))
            .map(|c| c.to_vec())
            .collect()
    }

    /// Re-embeds every residue into another precision.
    pub fn reembed(&self, ctx: &Arc<PadicContext>) -> Self {
        let data = self.data.iter().map(|r| ctx.reduce_uint(r)).collect();
        PadicMatrix {
            ctx: Arc::clone(ctx),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &i in row_perm {
            for &j in col_perm {
                data.push(self.data[i * self.cols + j].clone());
            }
        }
        PadicMatrix {
            ctx: Arc::clone(&self.ctx),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Elementary divisor exponents, ascending with `AtLeastN` last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryDivisors {
    pub exponents: Vec<Valuation>,
    pub row_count: usize,
    pub col_count: usize,
}

impl ElementaryDivisors {
    pub fn all_finite(&self) -> bool {
        self.exponents.iter().all(|v| v.is_finite())
    }

    /// Sum of the exponents when none saturated.
    pub fn total(&self) -> Option<u64> {
        self.exponents
            .iter()
            .map(|v| v.finite().map(u64::from))
            .sum()
    }
}

struct Elimination {
    divisors: ElementaryDivisors,
    // det = sign * unit_product * p^(sum of exponents), meaningful for square input
    unit_product: BigUint,
    negate: bool,
}

fn eliminate(mat: &PadicMatrix) -> Elimination {
    let ctx = &*mat.ctx;
    let (rows, cols) = (mat.rows, mat.cols);
    let steps = rows.min(cols);
    let mut a: Vec<Vec<BigUint>> = mat.to_residue_rows();
    if cols == 0 {
        a = vec![Vec::new(); rows];
    }
    let mut exponents = Vec::with_capacity(steps);
    let mut unit_product = ctx.one();
    let mut negate = false;

    for k in 0..steps {
        let Some((pi, pj, v)) = find_pivot(ctx, &a, k) else {
            exponents.extend(std::iter::repeat_n(Valuation::AtLeastN, steps - k));
            unit_product = BigUint::zero();
            break;
        };
        if pi != k {
            a.swap(pi, k);
            negate = !negate;
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(pj, k);
            }
            negate = !negate;
        }
        exponents.push(Valuation::Finite(v));
        let pivot = a[k][k].clone();
        let unit = ctx.shift_down(&pivot, v);
        let unit = ctx.reduce_uint(&unit);
        let unit_inv = ctx.inverse_of(&unit).expect("pivot unit part is a unit");
        unit_product = ctx.mul(&unit_product, &unit);

        // clear column k below the pivot with row operations; the row of the
        // pivot is then cleared by column operations that touch nothing else
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            if row[k].is_zero() {
                continue;
            }
            let e = ctx.shift_down(&row[k], v);
            let factor = ctx.mul(&e, &unit_inv);
            for j in k + 1..cols {
                if pivot_row[j].is_zero() {
                    continue;
                }
                let t = ctx.mul(&factor, &pivot_row[j]);
                row[j] = ctx.sub(&row[j], &t);
            }
            row[k] = BigUint::zero();
        }
    }

    Elimination {
        divisors: ElementaryDivisors {
            exponents,
            row_count: rows,
            col_count: cols,
        },
        unit_product,
        negate,
    }
}

fn find_pivot(ctx: &PadicContext, a: &[Vec<BigUint>], k: usize) -> Option<(usize, usize, u32)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    // a unit is always a minimal pivot; look for one first
    for i in k..rows {
        for j in k..cols {
            if ctx.is_unit_residue(&a[i][j]) {
                return Some((i, j, 0));
            }
        }
    }
    let mut best: Option<(usize, usize, u32)> = None;
    for i in k..rows {
        for j in k..cols {
            if let Valuation::Finite(v) = ctx.valuation_of(&a[i][j]) {
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                    if v == 1 {
                        return best;
                    }
                }
            }
        }
    }
    best
}

/// Elementary divisors of `mat` over `Z/p^N`.
pub fn smith_form(mat: &PadicMatrix) -> ElementaryDivisors {
    eliminate(mat).divisors
}

/// Determinant over `Z/p^N`, read off the same elimination.
pub fn determinant(mat: &PadicMatrix) -> Result<PadicInt, MatrixError> {
    if mat.rows != mat.cols {
        return Err(MatrixError::NotSquare {
            rows: mat.rows,
            cols: mat.cols,
        });
    }
    let ctx = &mat.ctx;
    if mat.rows == 0 {
        return Ok(ctx.one());
    }
    let elim = eliminate(mat);
    let det = match elim.divisors.total() {
        Some(e) if e < u64::from(ctx.precision()) => {
            let pe = ctx.p_power(e as u32);
            ctx.mul(&elim.unit_product, &pe)
        }
        _ => BigUint::zero(),
    };
    let det = if elim.negate { ctx.neg(&det) } else { det };
    Ok(ctx.from_residue(det))
}

/// Order of a homology group, as a power of `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "snake_case")]
pub enum OrderReport {
    /// The group has order `p^e`; `e = 0` is the trivial group.
    PowerOfP(u64),
    /// Precision ran out before the order could be certified.
    Indeterminate,
}

impl OrderReport {
    pub fn exponent(self) -> Option<u64> {
        match self {
            OrderReport::PowerOfP(e) => Some(e),
            OrderReport::Indeterminate => None,
        }
    }
}

/// Orders of `coker` and `ker` of a square map between free modules of equal
/// rank, from its elementary divisors.
pub fn cokernel_kernel_orders(
    divisors: &ElementaryDivisors,
) -> Result<(OrderReport, OrderReport), MatrixError> {
    if divisors.row_count != divisors.col_count {
        return Err(MatrixError::NotSquare {
            rows: divisors.row_count,
            cols: divisors.col_count,
        });
    }
    Ok(match divisors.total() {
        // all divisors nonzero: the map is injective, so the kernel vanishes
        Some(e) => (OrderReport::PowerOfP(e), OrderReport::PowerOfP(0)),
        None => (OrderReport::Indeterminate, OrderReport::Indeterminate),
    })
}
