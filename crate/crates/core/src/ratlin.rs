//! Exact dense linear algebra over the rationals.
//!
//! Everything here is exact: inversion goes through fraction-free
//! (Bareiss) Gauss-Jordan elimination on a denominator-cleared integer
//! matrix, and inertia is read off a symmetric congruence
//! diagonalization. No floating point is involved anywhere.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not symmetric: entry ({row}, {col}) differs from ({col}, {row})")]
    NotSymmetric { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix must be square with dimension at least 1")]
    NotSquare,
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Parses a plain decimal literal such as `-1.54` into the exact rational it denotes.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Rounds to `places` decimals (half away from zero), exactly.
pub fn round_decimal(r: &Rational, places: u32) -> Rational {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = r * Rational::from_integer(scale.clone());
    let twice = &scaled + &scaled;
    // round(x) = sign(x) * floor((2|x| + 1) / 2)
    let mag = (twice.abs() + Rational::one()) / int(2);
    let rounded = mag.floor().to_integer();
    let rounded = if r.is_negative() { -rounded } else { rounded };
    Rational::new(rounded, scale)
}

/// Decimal rendering of an exact rational with a fixed number of places.
pub fn format_decimal(r: &Rational, places: u32) -> String {
    let rounded = round_decimal(r, places);
    let scale = BigInt::from(10u32).pow(places);
    let scaled = (rounded * Rational::from_integer(scale)).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let p = places as usize;
    let body = if p == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = p + 1);
        let (w, f) = padded.split_at(padded.len() - p);
        format!("{w}.{f}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Sylvester inertia of a symmetric form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

impl Inertia {
    pub fn signature(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    pub fn dimension(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(+{}, 0:{}, -{})", self.n_plus, self.n_zero, self.n_minus)
    }
}

/// Square matrix of exact rationals, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::NotSquare);
        }
        Ok(Self { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| int(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn diagonal(values: &[i64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { int(values[i]) } else { Rational::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|e| e * s).collect() }
    }

    pub fn check_symmetric(&self) -> Result<(), LinalgError> {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.check_symmetric().is_ok()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.n != rhs.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: rhs.n });
        }
        Ok(Self::from_fn(self.n, |i, j| {
            (0..self.n).fold(Rational::zero(), |acc, k| acc + self.get(i, k) * rhs.get(k, j))
        }))
    }

    /// `Pᵀ · self · P` for an integer change of basis `P`.
    pub fn congruent_by<R: AsRef<[i64]>>(&self, p: &[R]) -> Result<Self, LinalgError> {
        let p = Self::from_integers(p)?;
        p.transpose().try_mul(self)?.try_mul(&p)
    }

    /// Least common multiple of all entry denominators.
    fn common_denominator(&self) -> BigInt {
        self.entries.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()))
    }

    fn cleared(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let l = self.common_denominator();
        let rows = self
            .rows()
            .map(|r| r.iter().map(|e| (e * Rational::from_integer(l.clone())).to_integer()).collect())
            .collect();
        (l, rows)
    }

    /// Determinant by Bareiss elimination.
    pub fn determinant(&self) -> Rational {
        let (l, mut a) = self.cleared();
        let n = self.n;
        let mut prev = BigInt::one();
        let mut negate = false;
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        negate = !negate;
                    }
                    None => return Rational::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                    a[i][j] = exact_div(v, &prev);
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let det = Rational::new(a[n - 1][n - 1].clone(), l.pow(n as u32));
        if negate {
            -det
        } else {
            det
        }
    }

    /// Exact inverse via fraction-free Gauss-Jordan on `[L·M | I]`.
    pub fn invert(&self) -> Result<Self, LinalgError> {
        let n = self.n;
        let (l, cleared) = self.cleared();
        let mut a: Vec<Vec<BigInt>> = cleared
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
                row
            })
            .collect();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                let i = (k + 1..n).find(|&i| !a[i][k].is_zero()).ok_or(LinalgError::SingularMatrix)?;
                a.swap(k, i);
            }
            let pivot_row = a[k].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == k {
                    continue;
                }
                let factor = row[k].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    let v = &pivot_row[k] * &*x - &factor * p;
                    *x = exact_div(v, &prev);
                }
            }
            prev = pivot_row[k].clone();
        }
        // Left block is now prev·I and the right block is prev·(L·M)⁻¹.
        let l = Rational::from_integer(l);
        Ok(Self::from_fn(n, |i, j| Rational::new(a[i][n + j].clone(), prev.clone()) * &l))
    }

    /// Inertia by symmetric congruence diagonalization.
    pub fn inertia(&self) -> Result<Inertia, LinalgError> {
        self.check_symmetric()?;
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = self.rows().map(|r| r.to_vec()).collect();
        let mut inertia = Inertia { n_plus: 0, n_zero: 0, n_minus: 0 };
        for k in 0..n {
            if a[k][k].is_zero() {
                if let Some(j) = (k + 1..n).find(|&j| !a[j][j].is_zero()) {
                    swap_symmetric(&mut a, k, j);
                } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                    // Zero diagonal but a[k][j] ≠ 0: replacing basis vector k by
                    // b_k + b_j makes the new diagonal entry 2·a[k][j].
                    add_symmetric(&mut a, k, j);
                } else if let Some((i, j)) =
                    (k + 1..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())
                {
                    add_symmetric(&mut a, i, j);
                    swap_symmetric(&mut a, k, i);
                } else {
                    inertia.n_zero += n - k;
                    break;
                }
            }
            let pivot = a[k][k].clone();
            if pivot.is_positive() {
                inertia.n_plus += 1;
            } else {
                inertia.n_minus += 1;
            }
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &pivot;
                for j in k + 1..n {
                    let d = &f * &a[k][j];
                    a[i][j] -= d;
                }
            }
            for i in k + 1..n {
                a[i][k] = Rational::zero();
                a[k][i] = Rational::zero();
            }
        }
        Ok(inertia)
    }

    pub fn signature(&self) -> Result<i64, LinalgError> {
        Ok(self.inertia()?.signature())
    }

    /// `cᵀ · M · c` for an integer vector `c`.
    pub fn evaluate_form(&self, c: &[i64]) -> Result<Rational, LinalgError> {
        let c: Vec<Rational> = c.iter().map(|&v| int(v)).collect();
        self.evaluate_form_rational(&c)
    }

    pub fn evaluate_form_rational(&self, c: &[Rational]) -> Result<Rational, LinalgError> {
        if c.len() != self.n {
            return Err(LinalgError::DimensionMismatch { expected: self.n, got: c.len() });
        }
        let mut acc = Rational::zero();
        for (i, ci) in c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, cj) in c.iter().enumerate() {
                if !cj.is_zero() {
                    acc += ci * self.get(i, j) * cj;
                }
            }
        }
        Ok(acc)
    }

    pub fn is_negative_definite(&self) -> Result<bool, LinalgError> {
        let inertia = self.inertia()?;
        Ok(inertia.n_minus == self.n)
    }
}

impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn exact_div(v: BigInt, d: &BigInt) -> BigInt {
    let (q, r) = v.div_rem(d);
    debug_assert!(r.is_zero(), "Bareiss step produced an inexact division");
    q
}

fn swap_symmetric(a: &mut [Vec<Rational>], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

/// Basis change b_i ← b_i + b_j applied as a congruence.
fn add_symmetric(a: &mut [Vec<Rational>], i: usize, j: usize) {
    let n = a.len();
    for c in 0..n {
        let v = a[j][c].clone();
        a[i][c] += v;
    }
    for r in 0..n {
        let v = a[r][j].clone();
        a[r][i] += v;
    }
}
