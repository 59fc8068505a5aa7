//! Arithmetic over a truncated discrete valuation ring `O/π^N` and its
//! residue field `F_p`, together with the matrix normal forms used by the
//! lattice machinery: a canonical column π-Hermite form, Smith divisors,
//! and reduced echelon linear algebra over `F_p`.
//!
//! Two flavors are supported: `Z/p^N` with `π = p`, and `F_p[t]/t^N` with
//! `π = t`. Elements are kept in a unique canonical form so that equality
//! of values (and of Hermite bases) is plain structural equality.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which truncated DVR is in play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "p-adic")]
    PAdic,
    #[serde(rename = "power-series")]
    PowerSeries,
}

/// The ring `O/π^N`: a prime `p`, a precision `N ≥ 1` and a flavor.
///
/// Valuation of zero is reported as `N` (the precision sentinel); every
/// consumer must treat `val ≥ N` as "zero at working precision".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingContext {
    p: u64,
    precision: u32,
    flavor: Flavor,
    /// `p^N` for the p-adic flavor (1 for power series, unused).
    pn: u64,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Build a ring context. Fails on non-prime `p`, `N < 1`, or a modulus
/// too large for exact 64-bit canonical residues.
pub fn make_ring(p: u64, precision: u32, flavor: Flavor) -> Result<RingContext> {
    if !is_prime(p) {
        return Err(Error::NonPrime(p));
    }
    if precision < 1 {
        return Err(Error::BadPrecision);
    }
    let pn = match flavor {
        Flavor::PAdic => {
            let mut acc: u128 = 1;
            for _ in 0..precision {
                acc = acc.checked_mul(p as u128).ok_or_else(|| {
                    Error::Spec(format!("p^N = {p}^{precision} overflows the scalar type"))
                })?;
                if acc >= (1u128 << 62) {
                    return Err(Error::Spec(format!(
                        "p^N = {p}^{precision} too large for exact arithmetic"
                    )));
                }
            }
            acc as u64
        }
        Flavor::PowerSeries => 1,
    };
    Ok(RingContext { p, precision, flavor, pn })
}

/// A canonical element of `O/π^N`: an integer in `[0, p^N)` for the
/// p-adic flavor, or the coefficient vector of a polynomial of degree
/// `< N` over `F_p` for power series.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DVRScalar {
    Int(u64),
    Poly(Vec<u64>),
}

impl RingContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Same ring at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<RingContext> {
        make_ring(self.p, precision, self.flavor)
    }

    pub fn zero(&self) -> DVRScalar {
        match self.flavor {
            Flavor::PAdic => DVRScalar::Int(0),
            Flavor::PowerSeries => DVRScalar::Poly(vec![0; self.precision as usize]),
        }
    }

    pub fn one(&self) -> DVRScalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, x: i64) -> DVRScalar {
        match self.flavor {
            Flavor::PAdic => {
                let m = self.pn as i128;
                let r = ((x as i128 % m) + m) % m;
                DVRScalar::Int(r as u64)
            }
            Flavor::PowerSeries => {
                let m = self.p as i128;
                let r = ((x as i128 % m) + m) % m;
                let mut c = vec![0; self.precision as usize];
                c[0] = r as u64;
                DVRScalar::Poly(c)
            }
        }
    }

    /// Element from π-adic digits, lowest first (power-series coefficients
    /// or base-p digits).
    pub fn from_digits(&self, digits: &[i64]) -> DVRScalar {
        let mut acc = self.zero();
        for (k, &d) in digits.iter().enumerate() {
            if k as u32 >= self.precision {
                break;
            }
            let t = self
                .shift(&self.from_i64(d), k as i64)
                .expect("non-negative shift cannot fail");
            acc = self.add(&acc, &t);
        }
        acc
    }

    pub fn is_zero(&self, a: &DVRScalar) -> bool {
        match a {
            DVRScalar::Int(x) => *x == 0,
            DVRScalar::Poly(c) => c.iter().all(|&x| x == 0),
        }
    }

    /// π-adic valuation; `N` for zero (precision sentinel, never ∞).
    pub fn val(&self, a: &DVRScalar) -> u32 {
        match a {
            DVRScalar::Int(x) => {
                if *x == 0 {
                    return self.precision;
                }
                let mut v = 0;
                let mut y = *x;
                while y % self.p == 0 {
                    y /= self.p;
                    v += 1;
                }
                v
            }
            DVRScalar::Poly(c) => c
                .iter()
                .position(|&x| x != 0)
                .map(|k| k as u32)
                .unwrap_or(self.precision),
        }
    }

    pub fn add(&self, a: &DVRScalar, b: &DVRScalar) -> DVRScalar {
        match (a, b) {
            (DVRScalar::Int(x), DVRScalar::Int(y)) => {
                DVRScalar::Int(((*x as u128 + *y as u128) % self.pn as u128) as u64)
            }
            (DVRScalar::Poly(x), DVRScalar::Poly(y)) => {
                DVRScalar::Poly(x.iter().zip(y).map(|(&a, &b)| (a + b) % self.p).collect())
            }
            _ => unreachable!("mixed scalar flavors"),
        }
    }

    pub fn neg(&self, a: &DVRScalar) -> DVRScalar {
        match a {
            DVRScalar::Int(x) => DVRScalar::Int(if *x == 0 { 0 } else { self.pn - *x }),
            DVRScalar::Poly(c) => {
                DVRScalar::Poly(c.iter().map(|&x| (self.p - x) % self.p).collect())
            }
        }
    }

    pub fn sub(&self, a: &DVRScalar, b: &DVRScalar) -> DVRScalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &DVRScalar, b: &DVRScalar) -> DVRScalar {
        match (a, b) {
            (DVRScalar::Int(x), DVRScalar::Int(y)) => {
                DVRScalar::Int(((*x as u128 * *y as u128) % self.pn as u128) as u64)
            }
            (DVRScalar::Poly(x), DVRScalar::Poly(y)) => {
                let n = self.precision as usize;
                let mut out = vec![0u64; n];
                for i in 0..n {
                    if x[i] == 0 {
                        continue;
                    }
                    for j in 0..n - i {
                        out[i + j] = (out[i + j] + x[i] * y[j]) % self.p;
                    }
                }
                DVRScalar::Poly(out)
            }
            _ => unreachable!("mixed scalar flavors"),
        }
    }

    /// Inverse of a unit. Errors when `val(a) > 0`.
    pub fn inv(&self, a: &DVRScalar) -> Result<DVRScalar> {
        if self.val(a) != 0 {
            return Err(Error::PrecisionExhausted(
                "inverting a non-unit".to_string(),
            ));
        }
        match a {
            DVRScalar::Int(x) => Ok(DVRScalar::Int(inv_mod(*x, self.pn))),
            DVRScalar::Poly(c) => {
                let n = self.precision as usize;
                let f0inv = fp_inv(c[0], self.p);
                let mut g = vec![0u64; n];
                g[0] = f0inv;
                for k in 1..n {
                    let mut s = 0u64;
                    for i in 1..=k {
                        s = (s + c[i] * g[k - i]) % self.p;
                    }
                    g[k] = (f0inv * ((self.p - s) % self.p)) % self.p;
                }
                Ok(DVRScalar::Poly(g))
            }
        }
    }

    /// Multiply by `π^k`. For `k < 0` the division must be exact
    /// (`val(a) ≥ -k`), otherwise an error is returned. The quotient is the
    /// canonical representative with zero top digits.
    pub fn shift(&self, a: &DVRScalar, k: i64) -> Result<DVRScalar> {
        if k == 0 {
            return Ok(a.clone());
        }
        if k > 0 {
            if k as u32 >= self.precision {
                return Ok(self.zero());
            }
            match a {
                DVRScalar::Int(x) => {
                    let mut acc = *x as u128;
                    for _ in 0..k {
                        acc = (acc * self.p as u128) % self.pn as u128;
                    }
                    Ok(DVRScalar::Int(acc as u64))
                }
                DVRScalar::Poly(c) => {
                    let n = self.precision as usize;
                    let mut out = vec![0u64; n];
                    for i in 0..n - k as usize {
                        out[i + k as usize] = c[i];
                    }
                    Ok(DVRScalar::Poly(out))
                }
            }
        } else {
            let j = (-k) as u32;
            if self.val(a) < j {
                return Err(Error::PrecisionExhausted(
                    "shifting below valuation 0".to_string(),
                ));
            }
            match a {
                DVRScalar::Int(x) => {
                    let mut y = *x;
                    for _ in 0..j {
                        y /= self.p;
                    }
                    Ok(DVRScalar::Int(y))
                }
                DVRScalar::Poly(c) => {
                    let n = self.precision as usize;
                    let mut out = vec![0u64; n];
                    for i in j as usize..n {
                        out[i - j as usize] = c[i];
                    }
                    Ok(DVRScalar::Poly(out))
                }
            }
        }
    }

    /// Canonical remainder of `a` modulo `π^k`, paired with the exact
    /// quotient: `a = q·π^k + r` with `r` reduced.
    pub fn divrem_pi(&self, a: &DVRScalar, k: u32) -> (DVRScalar, DVRScalar) {
        if k >= self.precision {
            return (self.zero(), a.clone());
        }
        let r = match a {
            DVRScalar::Int(x) => {
                let mut m = 1u64;
                for _ in 0..k {
                    m *= self.p;
                }
                DVRScalar::Int(*x % m)
            }
            DVRScalar::Poly(c) => {
                let mut out = vec![0u64; self.precision as usize];
                out[..k as usize].copy_from_slice(&c[..k as usize]);
                DVRScalar::Poly(out)
            }
        };
        let q = self
            .shift(&self.sub(a, &r), -(k as i64))
            .expect("difference is divisible by construction");
        (q, r)
    }

    /// Image in the residue field `F_p`.
    pub fn residue(&self, a: &DVRScalar) -> u64 {
        match a {
            DVRScalar::Int(x) => *x % self.p,
            DVRScalar::Poly(c) => c[0],
        }
    }

    /// Canonical lift of a residue (zero higher digits).
    pub fn lift(&self, r: u64) -> DVRScalar {
        self.from_i64((r % self.p) as i64)
    }

    /// The unit `u` with `a = u·π^val(a)`; errors on zero.
    pub fn unit_part(&self, a: &DVRScalar) -> Result<DVRScalar> {
        let v = self.val(a);
        if v >= self.precision {
            return Err(Error::PrecisionExhausted("unit part of zero".to_string()));
        }
        self.shift(a, -(v as i64))
    }

    /// Compact canonical text form, independent of the working precision
    /// for values whose digits fit below it (decimal for p-adic, trimmed
    /// digit list for power series).
    pub fn scalar_string(&self, a: &DVRScalar) -> String {
        match a {
            DVRScalar::Int(x) => x.to_string(),
            DVRScalar::Poly(c) => {
                let last = c.iter().rposition(|&x| x != 0);
                match last {
                    None => "0".to_string(),
                    Some(k) => c[..=k]
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join("."),
                }
            }
        }
    }
}

fn inv_mod(x: u64, m: u64) -> u64 {
    // extended gcd on i128; x is a unit mod m by the caller's check
    let (mut r0, mut r1) = (m as i128, x as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    (((s0 % m as i128) + m as i128) % m as i128) as u64
}

pub(crate) fn fp_inv(x: u64, p: u64) -> u64 {
    inv_mod(x % p, p)
}

// ---------------------------------------------------------------------------
// Matrices over O/π^N
// ---------------------------------------------------------------------------

/// A rectangular matrix with entries in one `RingContext`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DVRMatrix {
    ctx: RingContext,
    rows: usize,
    cols: usize,
    e: Vec<DVRScalar>,
}

impl DVRMatrix {
    pub fn zero(ctx: RingContext, rows: usize, cols: usize) -> Self {
        DVRMatrix { ctx, rows, cols, e: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: RingContext, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_fn(ctx: RingContext, rows: usize, cols: usize, f: impl Fn(usize, usize) -> DVRScalar) -> Self {
        let mut e = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                e.push(f(i, j));
            }
        }
        DVRMatrix { ctx, rows, cols, e }
    }

    pub fn from_int_rows(ctx: RingContext, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(ctx, r, c, |i, j| ctx.from_i64(rows[i][j]))
    }

    pub fn ctx(&self) -> RingContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &DVRScalar {
        &self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: DVRScalar) {
        self.e[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ctx, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &DVRMatrix) -> Self {
        assert_eq!(self.cols, other.rows);
        let ctx = self.ctx;
        Self::from_fn(ctx, self.rows, other.cols, |i, j| {
            let mut acc = ctx.zero();
            for k in 0..self.cols {
                acc = ctx.add(&acc, &ctx.mul(self.at(i, k), other.at(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[DVRScalar]) -> Vec<DVRScalar> {
        assert_eq!(self.cols, v.len());
        let ctx = self.ctx;
        (0..self.rows)
            .map(|i| {
                let mut acc = ctx.zero();
                for k in 0..self.cols {
                    acc = ctx.add(&acc, &ctx.mul(self.at(i, k), &v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn concat_cols(parts: &[&DVRMatrix]) -> Self {
        let ctx = parts[0].ctx;
        let rows = parts[0].rows;
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = Self::zero(ctx, rows, cols);
        let mut off = 0;
        for m in parts {
            assert_eq!(m.rows, rows);
            for i in 0..rows {
                for j in 0..m.cols {
                    out.set(i, off + j, m.at(i, j).clone());
                }
            }
            off += m.cols;
        }
        out
    }

    /// Multiply every entry by `π^k` (`k` may be negative; exactness required).
    pub fn shift_all(&self, k: i64) -> Result<Self> {
        let ctx = self.ctx;
        let mut out = Self::zero(ctx, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, ctx.shift(self.at(i, j), k)?);
            }
        }
        Ok(out)
    }

    /// Minimum valuation over all entries (`N` if the matrix vanishes).
    pub fn min_val(&self) -> u32 {
        self.e.iter().map(|x| self.ctx.val(x)).min().unwrap_or(self.ctx.precision())
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| self.ctx.is_zero(x))
    }

    /// Reduction mod π as a matrix over `F_p`.
    pub fn residue_matrix(&self) -> ResidueMatrix {
        ResidueMatrix {
            p: self.ctx.p(),
            rows: self.rows,
            cols: self.cols,
            e: self.e.iter().map(|x| self.ctx.residue(x)).collect(),
        }
    }

    /// Canonical lift of an `F_p` matrix (zero higher digits).
    pub fn lift_residue(ctx: RingContext, m: &ResidueMatrix) -> Self {
        Self::from_fn(ctx, m.rows, m.cols, |i, j| ctx.lift(m.at(i, j)))
    }

    /// Determinant by Laplace expansion; intended for the small dimensions
    /// this library works at.
    pub fn det(&self) -> DVRScalar {
        assert_eq!(self.rows, self.cols);
        assert!(self.rows <= 8, "determinant expansion capped at 8x8");
        let ctx = self.ctx;
        if self.rows == 0 {
            return ctx.one();
        }
        // expand along the first row with a column mask
        fn go(m: &DVRMatrix, row: usize, mask: u32) -> DVRScalar {
            let ctx = m.ctx;
            if row == m.rows {
                return ctx.one();
            }
            let mut acc = ctx.zero();
            let mut sign_pos = true;
            for j in 0..m.cols {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let a = m.at(row, j);
                if !ctx.is_zero(a) {
                    let sub = go(m, row + 1, mask | (1 << j));
                    let term = ctx.mul(a, &sub);
                    acc = if sign_pos { ctx.add(&acc, &term) } else { ctx.sub(&acc, &term) };
                }
                sign_pos = !sign_pos;
            }
            acc
        }
        go(self, 0, 0)
    }

    /// Inverse of a matrix with unit determinant, by Gauss–Jordan with
    /// unit pivots. Errors when the determinant is not a unit.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.ctx;
        let mut a = self.clone();
        let mut b = Self::identity(ctx, n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| ctx.val(a.at(r, col)) == 0).ok_or_else(|| {
                Error::PrecisionExhausted("matrix has non-unit determinant".to_string())
            })?;
            if pivot != col {
                for j in 0..n {
                    a.e.swap(pivot * n + j, col * n + j);
                    b.e.swap(pivot * n + j, col * n + j);
                }
            }
            let inv = ctx.inv(a.at(col, col))?;
            for j in 0..n {
                a.set(col, j, ctx.mul(a.at(col, j), &inv));
                b.set(col, j, ctx.mul(b.at(col, j), &inv));
            }
            for r in 0..n {
                if r == col || ctx.is_zero(a.at(r, col)) {
                    continue;
                }
                let f = a.at(r, col).clone();
                for j in 0..n {
                    let va = ctx.sub(a.at(r, j), &ctx.mul(&f, a.at(col, j)));
                    a.set(r, j, va);
                    let vb = ctx.sub(b.at(r, j), &ctx.mul(&f, b.at(col, j)));
                    b.set(r, j, vb);
                }
            }
        }
        Ok(b)
    }
}

/// Result of the column π-Hermite reduction.
pub struct HnfForm {
    /// The canonical form, `h = m·transform`.
    pub h: DVRMatrix,
    /// Unimodular column transform.
    pub transform: DVRMatrix,
    /// `(row, valuation)` of each pivot, in column order.
    pub pivots: Vec<(usize, u32)>,
}

fn hnf_engine(m: &DVRMatrix, want_transform: bool) -> (DVRMatrix, Option<DVRMatrix>, Vec<(usize, u32)>) {
    let ctx = m.ctx();
    let n = ctx.precision();
    let mut h = m.clone();
    let mut u = want_transform.then(|| DVRMatrix::identity(ctx, m.cols()));
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    let mut pcol = 0usize;

    let col_swap = |h: &mut DVRMatrix, u: &mut Option<DVRMatrix>, a: usize, b: usize| {
        for i in 0..h.rows() {
            let x = h.at(i, a).clone();
            let y = h.at(i, b).clone();
            h.set(i, a, y);
            h.set(i, b, x);
        }
        if let Some(u) = u {
            for i in 0..u.rows() {
                let x = u.at(i, a).clone();
                let y = u.at(i, b).clone();
                u.set(i, a, y);
                u.set(i, b, x);
            }
        }
    };
    let col_scale = |h: &mut DVRMatrix, u: &mut Option<DVRMatrix>, c: usize, f: &DVRScalar| {
        for i in 0..h.rows() {
            h.set(i, c, ctx.mul(h.at(i, c), f));
        }
        if let Some(u) = u {
            for i in 0..u.rows() {
                u.set(i, c, ctx.mul(u.at(i, c), f));
            }
        }
    };
    // col_j -= f * col_c
    let col_axpy = |h: &mut DVRMatrix, u: &mut Option<DVRMatrix>, j: usize, c: usize, f: &DVRScalar| {
        for i in 0..h.rows() {
            let v = ctx.sub(h.at(i, j), &ctx.mul(f, h.at(i, c)));
            h.set(i, j, v);
        }
        if let Some(u) = u {
            for i in 0..u.rows() {
                let v = ctx.sub(u.at(i, j), &ctx.mul(f, u.at(i, c)));
                u.set(i, j, v);
            }
        }
    };

    for row in 0..h.rows() {
        if pcol == h.cols() {
            break;
        }
        // pivot: minimal valuation in this row among unpivoted columns
        let mut best: Option<(u32, usize)> = None;
        for j in pcol..h.cols() {
            let v = ctx.val(h.at(row, j));
            if v < n && best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, j));
            }
        }
        let Some((e, jbest)) = best else { continue };
        if jbest != pcol {
            col_swap(&mut h, &mut u, pcol, jbest);
        }
        // make the pivot exactly π^e
        let unit = ctx.unit_part(h.at(row, pcol)).expect("pivot is nonzero");
        let uinv = ctx.inv(&unit).expect("unit part is a unit");
        col_scale(&mut h, &mut u, pcol, &uinv);
        // clear to the right (valuations there are ≥ e by pivot choice)
        for j in pcol + 1..h.cols() {
            if ctx.is_zero(h.at(row, j)) {
                continue;
            }
            let q = ctx.shift(h.at(row, j), -(e as i64)).expect("val ≥ pivot val");
            col_axpy(&mut h, &mut u, j, pcol, &q);
        }
        // reduce earlier columns in this row modulo π^e
        for j in 0..pcol {
            let (q, _r) = ctx.divrem_pi(h.at(row, j), e);
            if !ctx.is_zero(&q) {
                col_axpy(&mut h, &mut u, j, pcol, &q);
            }
        }
        pivots.push((row, e));
        pcol += 1;
    }
    (h, u, pivots)
}

/// Canonical column π-Hermite form `(H, U)` with `H = M·U` and `U`
/// unimodular over `O`. Pivots are `π^{e_i}` in strictly increasing rows;
/// entries above a pivot vanish and the other entries of a pivot row are
/// reduced modulo that pivot, which makes `H` the unique canonical basis
/// of the column span. Requires full column rank at working precision.
pub fn pi_hnf(m: &DVRMatrix) -> Result<(DVRMatrix, DVRMatrix)> {
    let (h, u, pivots) = hnf_engine(m, true);
    if pivots.len() < m.cols() {
        return Err(Error::PrecisionExhausted(
            "matrix does not have full column rank at working precision".to_string(),
        ));
    }
    Ok((h, u.expect("transform requested")))
}

/// Canonical basis of the column span, with zero columns dropped.
/// Used for lattice sums where the input columns may be dependent.
pub fn span_hnf(m: &DVRMatrix) -> (DVRMatrix, Vec<(usize, u32)>) {
    let (h, _, pivots) = hnf_engine(m, false);
    let r = pivots.len();
    let ctx = h.ctx();
    let out = DVRMatrix::from_fn(ctx, h.rows(), r, |i, j| h.at(i, j).clone());
    (out, pivots)
}

/// Valuations `e_1 ≤ … ≤ e_n` of the Smith normal form of a square
/// full-rank matrix: `diag(π^{e_i}) = A·M·B` with `A, B` unimodular.
pub fn smith_divisors(m: &DVRMatrix) -> Result<Vec<u32>> {
    assert_eq!(m.rows(), m.cols());
    let ctx = m.ctx();
    let n = ctx.precision();
    let d = m.rows();
    let mut a = m.clone();
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        // global minimum valuation in the trailing block
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..d {
            for j in k..d {
                let v = ctx.val(a.at(i, j));
                if v < n && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((e, bi, bj)) = best else {
            return Err(Error::PrecisionExhausted(
                "matrix is singular at working precision".to_string(),
            ));
        };
        // move pivot to (k, k)
        if bi != k {
            for j in 0..d {
                let x = a.at(bi, j).clone();
                let y = a.at(k, j).clone();
                a.set(bi, j, y);
                a.set(k, j, x);
            }
        }
        if bj != k {
            for i in 0..d {
                let x = a.at(i, bj).clone();
                let y = a.at(i, k).clone();
                a.set(i, bj, y);
                a.set(i, k, x);
            }
        }
        let unit = ctx.unit_part(a.at(k, k))?;
        let uinv = ctx.inv(&unit)?;
        for i in 0..d {
            a.set(i, k, ctx.mul(a.at(i, k), &uinv));
        }
        // clear row and column k; all trailing entries have valuation ≥ e
        for j in k + 1..d {
            if ctx.is_zero(a.at(k, j)) {
                continue;
            }
            let q = ctx.shift(a.at(k, j), -(e as i64))?;
            for i in 0..d {
                let v = ctx.sub(a.at(i, j), &ctx.mul(&q, a.at(i, k)));
                a.set(i, j, v);
            }
        }
        for i in k + 1..d {
            if ctx.is_zero(a.at(i, k)) {
                continue;
            }
            let q = ctx.shift(a.at(i, k), -(e as i64))?;
            for j in 0..d {
                let v = ctx.sub(a.at(i, j), &ctx.mul(&q, a.at(k, j)));
                a.set(i, j, v);
            }
        }
        out.push(e);
    }
    Ok(out)
}

/// `adj(B)·X` for a canonical lower-triangular Hermite basis `B`, via a
/// forward triangular solve of `B·Z = π^E·X` with `E = val(det B)`.
///
/// Returns `(Z, E)`. Entries of `Z` are reliable modulo `π^{N−E}`: the
/// exact π-divisions zero the top digits, so callers must keep
/// `E + (largest valuation they need to decide) < N`.
pub fn adjugate_times(b: &DVRMatrix, x: &DVRMatrix) -> Result<(DVRMatrix, u32)> {
    let ctx = b.ctx();
    let d = b.rows();
    assert_eq!(b.cols(), d);
    assert_eq!(x.rows(), d);
    let mut pivots = Vec::with_capacity(d);
    for i in 0..d {
        let v = ctx.val(b.at(i, i));
        for j in i + 1..d {
            debug_assert!(ctx.is_zero(b.at(i, j)), "basis must be lower triangular");
        }
        pivots.push(v);
    }
    let total: u32 = pivots.iter().sum();
    if total >= ctx.precision() {
        return Err(Error::PrecisionExhausted(format!(
            "det valuation {total} exceeds precision {}",
            ctx.precision()
        )));
    }
    let mut z = DVRMatrix::zero(ctx, d, x.cols());
    for c in 0..x.cols() {
        for i in 0..d {
            let mut num = ctx.shift(x.at(i, c), total as i64)?;
            for j in 0..i {
                num = ctx.sub(&num, &ctx.mul(b.at(i, j), z.at(j, c)));
            }
            if ctx.val(&num) < pivots[i] {
                return Err(Error::PrecisionExhausted(
                    "triangular solve hit an inexact division".to_string(),
                ));
            }
            z.set(i, c, ctx.shift(&num, -(pivots[i] as i64))?);
        }
    }
    Ok((z, total))
}

// ---------------------------------------------------------------------------
// Residue field linear algebra
// ---------------------------------------------------------------------------

/// A matrix over the residue field `F_p`, entries canonical in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    e: Vec<u64>,
}

impl ResidueMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        ResidueMatrix { p, rows, cols, e: vec![0; rows * cols] }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zero(p, r, c);
        for i in 0..r {
            for j in 0..c {
                let v = ((rows[i][j] % p as i64) + p as i64) % p as i64;
                m.set(i, j, v as u64);
            }
        }
        m
    }

    pub fn from_vec_rows(p: u64, rows: Vec<Vec<u64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zero(p, r, c);
        for i in 0..r {
            for j in 0..c {
                m.set(i, j, rows[i][j] % p);
            }
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.e[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.e[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> Vec<u64> {
        self.e[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn entries(&self) -> &[u64] {
        &self.e
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.at(i, j));
            }
        }
        m
    }

    pub fn mul(&self, other: &ResidueMatrix) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut m = Self::zero(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u128;
                for k in 0..self.cols {
                    acc += self.at(i, k) as u128 * other.at(k, j) as u128;
                }
                m.set(i, j, (acc % self.p as u128) as u64);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u128;
                for k in 0..self.cols {
                    acc += self.at(i, k) as u128 * v[k] as u128;
                }
                (acc % self.p as u128) as u64
            })
            .collect()
    }

    pub fn add(&self, other: &ResidueMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for i in 0..self.e.len() {
            m.e[i] = (self.e[i] + other.e[i]) % self.p;
        }
        m
    }

    pub fn sub(&self, other: &ResidueMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for i in 0..self.e.len() {
            m.e[i] = (self.e[i] + self.p - other.e[i]) % self.p;
        }
        m
    }

    /// Row-reduce in place to reduced echelon form; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.at(i, c) != 0) else { continue };
            if pr != r {
                for j in 0..self.cols {
                    self.e.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = fp_inv(self.at(r, c), p);
            for j in 0..self.cols {
                let v = (self.at(r, j) * inv) % p;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.at(i, c) == 0 {
                    continue;
                }
                let f = self.at(i, c);
                for j in 0..self.cols {
                    let v = (self.at(i, j) + (p - f) * self.at(r, j)) % p;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Canonical reduced echelon basis of the row space (zero rows dropped).
    pub fn row_space_basis(&self) -> ResidueMatrix {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let r = pivots.len();
        let mut out = ResidueMatrix::zero(self.p, r, self.cols);
        for i in 0..r {
            for j in 0..self.cols {
                out.set(i, j, m.at(i, j));
            }
        }
        out
    }

    /// Basis of `{v : M·v = 0}` in canonical reduced echelon form.
    pub fn kernel_basis(&self) -> ResidueMatrix {
        let p = self.p;
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u64; self.cols];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                // pivot variable = -R[r][f]
                v[pc] = (p - m.at(r, f)) % p;
            }
            rows.push(v);
        }
        ResidueMatrix::from_vec_rows(p, rows).row_space_basis()
    }

    /// One solution of `M·x = b` plus the kernel, or `None` if insoluble.
    pub fn solve(&self, b: &[u64]) -> Option<(Vec<u64>, ResidueMatrix)> {
        assert_eq!(b.len(), self.rows);
        let p = self.p;
        let mut aug = ResidueMatrix::zero(p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.at(i, j));
            }
            aug.set(i, self.cols, b[i] % p);
        }
        let pivots = aug.rref_in_place();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.at(r, self.cols);
        }
        Some((x, self.kernel_basis()))
    }

    /// Inverse of an invertible `F_p` matrix.
    pub fn inverse(&self) -> Option<ResidueMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.p;
        let mut aug = ResidueMatrix::zero(p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.at(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        let mut out = ResidueMatrix::zero(p, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.at(i, n + j));
            }
        }
        Some(out)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Characteristic polynomial coefficients, constant term first.
    /// Cofactor expansion of `xI − M` over `F_p[x]`; fine at the small
    /// dimensions simple modules have here.
    pub fn charpoly(&self) -> Vec<u64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        assert!(n <= 12, "charpoly expansion capped at 12x12");
        let p = self.p;
        // entries of xI - M as polynomials
        let poly = |i: usize, j: usize| -> Vec<u64> {
            let c = (p - self.at(i, j)) % p;
            if i == j {
                vec![c, 1]
            } else {
                vec![c]
            }
        };
        fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
            if a.is_empty() || b.is_empty() {
                return vec![];
            }
            let mut out = vec![0u64; a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] = (out[i + j] + x * y) % p;
                }
            }
            out
        }
        fn padd(a: &mut Vec<u64>, b: &[u64], sign_pos: bool, p: u64) {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            for (i, &y) in b.iter().enumerate() {
                a[i] = if sign_pos { (a[i] + y) % p } else { (a[i] + p - y) % p };
            }
        }
        fn go(
            m: &ResidueMatrix,
            row: usize,
            mask: u32,
            poly: &dyn Fn(usize, usize) -> Vec<u64>,
        ) -> Vec<u64> {
            let p = m.p;
            let n = m.rows;
            if row == n {
                return vec![1];
            }
            let mut acc: Vec<u64> = vec![];
            let mut sign_pos = true;
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let e = poly(row, j);
                if !(e.len() == 1 && e[0] == 0) {
                    let sub = go(m, row + 1, mask | (1 << j), poly);
                    let term = pmul(&e, &sub, p);
                    padd(&mut acc, &term, sign_pos, p);
                }
                sign_pos = !sign_pos;
            }
            acc
        }
        let mut out = go(self, 0, 0, &poly);
        out.resize(n + 1, 0);
        out
    }
}
