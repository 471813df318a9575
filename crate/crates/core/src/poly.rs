//! Dense polynomial kernels shared by the p-adic and the exact-integer paths.
//!
//! Polynomials are little-endian coefficient vectors. Everything here is
//! generic over [`CoeffRing`], so the same routine that builds a matrix over
//! `Z/p^N` also builds its integer preimage when an exactness certificate is
//! needed.

use std::collections::HashMap;
use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// The handful of ring operations the kernels need.
pub trait CoeffRing {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn from_i64(&self, v: i64) -> Self::Elem {
        self.from_int(&BigInt::from(v))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// The integers, for exact certificates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl CoeffRing for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_int(&self, v: &BigInt) -> BigInt {
        v.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
}

pub type IntPoly = Vec<BigInt>;

pub fn trim<R: CoeffRing>(r: &R, a: &mut Vec<R::Elem>) {
    while a.last().is_some_and(|c| r.is_zero(c)) {
        a.pop();
    }
}

/// Degree of a trimmed-or-not polynomial; `None` for zero.
pub fn degree<R: CoeffRing>(r: &R, a: &[R::Elem]) -> Option<usize> {
    a.iter().rposition(|c| !r.is_zero(c))
}

pub fn add<R: CoeffRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    let n = a.len().max(b.len());
    let zero = r.zero();
    (0..n)
        .map(|i| r.add(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
        .collect()
}

pub fn sub<R: CoeffRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    let n = a.len().max(b.len());
    let zero = r.zero();
    (0..n)
        .map(|i| r.sub(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero)))
        .collect()
}

pub fn scale<R: CoeffRing>(r: &R, a: &[R::Elem], c: &R::Elem) -> Vec<R::Elem> {
    a.iter().map(|x| r.mul(x, c)).collect()
}

pub fn mul<R: CoeffRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    mul_trunc(r, a, b, a.len() + b.len() - 1)
}

/// Product keeping only the coefficients below `len`.
pub fn mul_trunc<R: CoeffRing>(r: &R, a: &[R::Elem], b: &[R::Elem], len: usize) -> Vec<R::Elem> {
    let mut out = vec![r.zero(); len.min((a.len() + b.len()).saturating_sub(1))];
    for (i, x) in a.iter().enumerate() {
        if i >= out.len() || r.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let k = i + j;
            if k >= out.len() {
                break;
            }
            if !r.is_zero(y) {
                let t = r.mul(x, y);
                out[k] = r.add(&out[k], &t);
            }
        }
    }
    out
}

/// Remainder modulo a monic polynomial; the result has exactly `deg(m)` slots.
pub fn rem_monic<R: CoeffRing>(r: &R, a: &[R::Elem], m: &[R::Elem]) -> Vec<R::Elem> {
    let dm = m.len() - 1;
    debug_assert!(m[dm] == r.one(), "modulus must be monic");
    let mut work: Vec<R::Elem> = a.to_vec();
    if work.len() < dm {
        work.resize(dm, r.zero());
        return work;
    }
    for top in (dm..work.len()).rev() {
        let c = work[top].clone();
        if r.is_zero(&c) {
            continue;
        }
        let base = top - dm;
        for (j, mj) in m[..dm].iter().enumerate() {
            if !r.is_zero(mj) {
                let t = r.mul(&c, mj);
                work[base + j] = r.sub(&work[base + j], &t);
            }
        }
        work[top] = r.zero();
    }
    work.truncate(dm);
    work
}

pub fn mulmod_monic<R: CoeffRing>(
    r: &R,
    a: &[R::Elem],
    b: &[R::Elem],
    m: &[R::Elem],
) -> Vec<R::Elem> {
    rem_monic(r, &mul(r, a, b), m)
}

/// `a(c0 + c1 X)`, by Horner.
pub fn compose_affine<R: CoeffRing>(
    r: &R,
    a: &[R::Elem],
    c0: &R::Elem,
    c1: &R::Elem,
) -> Vec<R::Elem> {
    let mut acc: Vec<R::Elem> = Vec::with_capacity(a.len());
    for coeff in a.iter().rev() {
        // acc = acc * (c0 + c1 X) + coeff
        let mut next = vec![r.zero(); acc.len() + 1];
        for (i, x) in acc.iter().enumerate() {
            let lo = r.mul(x, c0);
            next[i] = r.add(&next[i], &lo);
            let hi = r.mul(x, c1);
            next[i + 1] = r.add(&next[i + 1], &hi);
        }
        next[0] = r.add(&next[0], coeff);
        acc = next;
    }
    acc
}

/// `a(1 + X)`.
pub fn taylor_shift_one<R: CoeffRing>(r: &R, a: &[R::Elem]) -> Vec<R::Elem> {
    compose_affine(r, a, &r.one(), &r.one())
}

pub fn evaluate<R: CoeffRing>(r: &R, a: &[R::Elem], x: &R::Elem) -> R::Elem {
    a.iter()
        .rev()
        .fold(r.zero(), |acc, c| r.add(&r.mul(&acc, x), c))
}

/// Binomial coefficient `C(n, k)` as an exact integer.
pub fn binomial(n: &BigUint, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// `(1 + X)^(p^n) - 1`, exact of degree `p^n`.
pub fn omega<R: CoeffRing>(r: &R, p: &BigUint, n: u32) -> Vec<R::Elem> {
    let e = num_traits::pow(p.clone(), n as usize);
    let deg: usize = e.clone().try_into().expect("p^n must fit in memory");
    let mut out = Vec::with_capacity(deg + 1);
    out.push(r.zero());
    let mut c = BigUint::one();
    for k in 1..=deg as u64 {
        c = c * (&e - BigUint::from(k - 1)) / BigUint::from(k);
        out.push(r.from_int(&BigInt::from(c.clone())));
    }
    out
}

/// Matrix (row-vector convention) of multiplication by `f` on `R[X]/(m)` in
/// the basis `1, X, ..., X^(k-1)`, `k = deg m`. Row `j` holds `X^j f mod m`.
pub fn mult_matrix_mod_monic<R: CoeffRing>(
    r: &R,
    f: &[R::Elem],
    m: &[R::Elem],
) -> Vec<Vec<R::Elem>> {
    let k = m.len() - 1;
    let mut row = rem_monic(r, f, m);
    let mut rows = Vec::with_capacity(k);
    for _ in 0..k {
        rows.push(row.clone());
        // multiply by X and reduce once
        let top = row[k - 1].clone();
        let mut next = Vec::with_capacity(k);
        next.push(r.zero());
        next.extend(row[..k - 1].iter().cloned());
        if !r.is_zero(&top) {
            for j in 0..k {
                let t = r.mul(&top, &m[j]);
                next[j] = r.sub(&next[j], &t);
            }
        }
        row = next;
    }
    rows
}

/// Right multiplication by the matrix `F` on `(R[X]/m)^d` for monic `m` of
/// degree `s`; the basis element `X^j e_i` has index `i·s + j`.
pub fn block_mult_matrix<R: CoeffRing>(
    r: &R,
    entries: &[Vec<Vec<R::Elem>>],
    m: &[R::Elem],
) -> Vec<Vec<R::Elem>> {
    let d = entries.len();
    let size = m.len() - 1;
    let mut rows = vec![vec![r.zero(); d * size]; d * size];
    for (i, row) in entries.iter().enumerate() {
        for (l, f) in row.iter().enumerate() {
            let block = mult_matrix_mod_monic(r, f, m);
            for (j, brow) in block.into_iter().enumerate() {
                for (c, v) in brow.into_iter().enumerate() {
                    rows[i * size + j][l * size + c] = v;
                }
            }
        }
    }
    rows
}

/// Characteristic polynomial `det(tI - B)` by Berkowitz's division-free
/// algorithm; returned little-endian and monic of degree `n`.
pub fn charpoly_berkowitz<R: CoeffRing>(r: &R, b: &[Vec<R::Elem>]) -> Vec<R::Elem> {
    let n = b.len();
    if n == 0 {
        return vec![r.one()];
    }
    // coefficient vectors are kept big-endian during the recursion
    let mut vect: Vec<R::Elem> = vec![r.one(), r.neg(&b[0][0])];
    for k in 1..n {
        // leading principal k x k block A, column C = b[0..k][k], row R = b[k][0..k]
        let a_kk = &b[k][k];
        let col: Vec<R::Elem> = (0..k).map(|i| b[i][k].clone()).collect();
        let row: Vec<R::Elem> = (0..k).map(|j| b[k][j].clone()).collect();
        // entries of the Toeplitz column: 1, -a_kk, -R C, -R A C, -R A^2 C, ...
        let mut toeplitz = Vec::with_capacity(k + 2);
        toeplitz.push(r.one());
        toeplitz.push(r.neg(a_kk));
        let mut v = col;
        for _ in 0..k {
            let dot = row
                .iter()
                .zip(&v)
                .fold(r.zero(), |acc, (x, y)| r.add(&acc, &r.mul(x, y)));
            toeplitz.push(r.neg(&dot));
            v = (0..k)
                .map(|i| (0..k).fold(r.zero(), |acc, j| r.add(&acc, &r.mul(&b[i][j], &v[j]))))
                .collect();
        }
        // multiply the (k+2) x (k+1) lower-triangular Toeplitz matrix by vect
        let mut next = Vec::with_capacity(k + 2);
        for i in 0..k + 2 {
            let mut acc = r.zero();
            for j in 0..=k.min(i) {
                if i - j < toeplitz.len() {
                    acc = r.add(&acc, &r.mul(&toeplitz[i - j], &vect[j]));
                }
            }
            next.push(acc);
        }
        vect = next;
    }
    vect.reverse();
    vect
}

/// Determinant of a square matrix of polynomials by Laplace expansion with
/// memoised minors (`O(d 2^d)` polynomial products; fraction-free).
pub fn det_poly_matrix<R: CoeffRing>(r: &R, m: &[Vec<Vec<R::Elem>>]) -> Vec<R::Elem> {
    let d = m.len();
    if d == 0 {
        return vec![r.one()];
    }
    assert!(d < 32, "presentation rank too large for minor expansion");
    // minors over the last rows, keyed by the set of columns they use
    let mut memo: HashMap<u32, Vec<R::Elem>> = HashMap::new();
    memo.insert(0, vec![r.one()]);
    for row in (0..d).rev() {
        let used = d - row;
        let mut next: HashMap<u32, Vec<R::Elem>> = HashMap::new();
        for mask in 0u32..(1u32 << d) {
            if mask.count_ones() as usize != used {
                continue;
            }
            let mut acc: Vec<R::Elem> = Vec::new();
            let mut sign_positive = true;
            for col in 0..d {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let rest = mask & !(1 << col);
                let minor = &memo[&rest];
                let term = mul(r, &m[row][col], minor);
                acc = if sign_positive {
                    add(r, &acc, &term)
                } else {
                    sub(r, &acc, &term)
                };
                sign_positive = !sign_positive;
            }
            next.insert(mask, acc);
        }
        memo = next;
    }
    let mut det = memo.remove(&((1u32 << d) - 1)).unwrap_or_default();
    trim(r, &mut det);
    det
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Sylvester-matrix resultant of two integer polynomials.
pub fn sylvester_resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let mut f = f.to_vec();
    let mut g = g.to_vec();
    trim(&Integers, &mut f);
    trim(&Integers, &mut g);
    if f.is_empty() || g.is_empty() {
        return BigInt::zero();
    }
    let (df, dg) = (f.len() - 1, g.len() - 1);
    let n = df + dg;
    if n == 0 {
        return BigInt::one();
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..dg {
        let mut row = vec![BigInt::zero(); n];
        for (j, c) in f.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..df {
        let mut row = vec![BigInt::zero(); n];
        for (j, c) in g.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    bareiss_det(&rows)
}

/// Largest absolute coefficient, handy for generator sanity checks.
pub fn height(a: &[BigInt]) -> BigInt {
    a.iter().map(|c| c.abs()).max().unwrap_or_default()
}

pub fn int_poly(coeffs: &[i64]) -> IntPoly {
    coeffs.iter().map(|&c| BigInt::from(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(c: &[i64]) -> IntPoly {
        int_poly(c)
    }

    #[test]
    fn omega_small_cases() {
        let z = Integers;
        assert_eq!(omega(&z, &BigUint::from(3u32), 0), ip(&[0, 1]));
        assert_eq!(omega(&z, &BigUint::from(3u32), 1), ip(&[0, 3, 3, 1]));
        assert_eq!(
            omega(&z, &BigUint::from(5u32), 1),
            ip(&[0, 5, 10, 10, 5, 1])
        );
    }

    #[test]
    fn remainder_and_affine_composition() {
        let z = Integers;
        // X^2 = (X - 3)(X + 3) + 9
        assert_eq!(rem_monic(&z, &ip(&[0, 0, 1]), &ip(&[3, 1])), ip(&[9]));
        // X at X -> 3 + 4X
        assert_eq!(
            compose_affine(&z, &ip(&[0, 1]), &BigInt::from(3), &BigInt::from(4)),
            ip(&[3, 4])
        );
        assert_eq!(taylor_shift_one(&z, &ip(&[0, 0, 1])), ip(&[1, 2, 1]));
    }

    #[test]
    fn berkowitz_matches_hand_computation() {
        let z = Integers;
        // [[1,2],[3,4]]: t^2 - 5t - 2
        let b = vec![ip(&[1, 2]), ip(&[3, 4])];
        assert_eq!(charpoly_berkowitz(&z, &b), ip(&[-2, -5, 1]));
        let b = vec![ip(&[2, 0, 0]), ip(&[0, 3, 0]), ip(&[0, 0, 5])];
        assert_eq!(charpoly_berkowitz(&z, &b), ip(&[-30, 31, -10, 1]));
        let b = vec![ip(&[0, 1, 0]), ip(&[0, 0, 1]), ip(&[6, -11, 6])];
        // companion matrix of t^3 - 6t^2 + 11t - 6
        assert_eq!(charpoly_berkowitz(&z, &b), ip(&[-6, 11, -6, 1]));
    }

    #[test]
    fn poly_matrix_determinant() {
        let z = Integers;
        // [[X, 3], [3, X]] -> X^2 - 9
        let m = vec![vec![ip(&[0, 1]), ip(&[3])], vec![ip(&[3]), ip(&[0, 1])]];
        assert_eq!(det_poly_matrix(&z, &m), ip(&[-9, 0, 1]));
    }

    #[test]
    fn bareiss_small() {
        let m = vec![ip(&[3, 6]), ip(&[9, 12])];
        assert_eq!(bareiss_det(&m), BigInt::from(-18));
        let m = vec![ip(&[0, 1, 2]), ip(&[1, 0, 3]), ip(&[4, -3, 8])];
        assert_eq!(bareiss_det(&m), BigInt::from(-2));
        let singular = vec![ip(&[1, 2]), ip(&[2, 4])];
        assert_eq!(bareiss_det(&singular), BigInt::zero());
    }

    #[test]
    fn resultant_against_root_product() {
        // Res(X^3 + 3X^2 + 3X, X - 3) = -(omega_1(3)) up to sign; |.| = 63
        let r = sylvester_resultant(&ip(&[0, 3, 3, 1]), &ip(&[-3, 1]));
        assert_eq!(r.abs(), BigInt::from(63));
    }

    #[test]
    fn multiplication_matrix_rows() {
        let z = Integers;
        let m = ip(&[0, 3, 3, 1]);
        let rows = mult_matrix_mod_monic(&z, &ip(&[-3, 1]), &m);
        assert_eq!(rows[0], ip(&[-3, 1, 0]));
        assert_eq!(rows[1], ip(&[0, -3, 1]));
        // X^2 (X - 3) = X^3 - 3X^2 = -3X - 6X^2 mod omega_1
        assert_eq!(rows[2], ip(&[0, -3, -6]));
    }
}
