//! Independent oracles shared by the integration tests and the acceptance
//! runner. None of these go through `ratlin`'s elimination code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use starcalc::ratlin::{Inertia, Rational, RationalMatrix};

pub const Q: [[i64; 7]; 7] = [
    [-5, 1, 1, 1, 0, 1, 0],
    [1, -3, 0, 0, 0, 0, 0],
    [1, 0, -2, 0, 0, 0, 0],
    [1, 0, 0, -2, 1, 0, 0],
    [0, 0, 0, 1, -3, 0, 0],
    [1, 0, 0, 0, 0, -2, 1],
    [0, 0, 0, 0, 0, 1, -2],
];

/// Printed inverse of Q, to be scaled by −1/261.
pub const Q_INV_261: [[i64; 7]; 7] = [
    [90, 30, 45, 54, 18, 60, 30],
    [30, 97, 15, 18, 6, 20, 10],
    [45, 15, 153, 27, 9, 30, 15],
    [54, 18, 27, 189, 63, 36, 18],
    [18, 6, 9, 63, 108, 12, 6],
    [60, 20, 30, 36, 12, 214, 107],
    [30, 10, 15, 18, 6, 107, 184],
];

pub const R_FORM: [[i64; 2]; 2] = [[-10, -23], [-23, -79]];
/// Printed inverse of R's form, to be scaled by 1/261.
pub const R_INV_261: [[i64; 2]; 2] = [[-79, 23], [23, -10]];

pub const K: [[i64; 5]; 5] = [
    [-6, 1, 1, 1, 1],
    [1, -2, 0, 0, 0],
    [1, 0, -2, 0, 0],
    [1, 0, 0, -2, 0],
    [1, 0, 0, 0, -2],
];
/// Printed inverse of K, to be scaled by −1/16.
pub const K_INV_16: [[i64; 5]; 5] =
    [[4, 2, 2, 2, 2], [2, 9, 1, 1, 1], [2, 1, 9, 1, 1], [2, 1, 1, 9, 1], [2, 1, 1, 1, 9]];

pub const S2: [[i64; 5]; 5] = [
    [-5, 1, 1, 1, 1],
    [1, -2, 0, 0, 0],
    [1, 0, -2, 0, 0],
    [1, 0, 0, -2, 0],
    [1, 0, 0, 0, -2],
];
/// Printed inverse of S2, to be scaled by −1/12.
pub const S2_INV_12: [[i64; 5]; 5] =
    [[4, 2, 2, 2, 2], [2, 7, 1, 1, 1], [2, 1, 7, 1, 1], [2, 1, 1, 7, 1], [2, 1, 1, 1, 7]];

/// U written out by hand: center −5, arms (−2,−2,−3), (−2,−3), (−2,−3), (−3).
pub fn u_matrix() -> Vec<Vec<i64>> {
    let weights = [-5, -2, -2, -3, -2, -3, -2, -3, -3];
    let edges = [(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (0, 6), (6, 7), (0, 8)];
    let mut m = vec![vec![0; 9]; 9];
    for (i, w) in weights.iter().enumerate() {
        m[i][i] = *w;
    }
    for (a, b) in edges {
        m[a][b] = 1;
        m[b][a] = 1;
    }
    m
}

pub fn rows<const N: usize>(m: &[[i64; N]; N]) -> Vec<Vec<i64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

pub fn r(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn scaled(m: &[Vec<i64>], num: i64, den: i64) -> RationalMatrix {
    let s = r(num, den);
    RationalMatrix::from_rows(m.iter().map(|row| row.iter().map(|&x| r(x, 1) * &s).collect()).collect()).unwrap()
}

fn minor(m: &[Vec<Rational>], skip_row: usize, skip_col: usize) -> Vec<Vec<Rational>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != skip_col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Cofactor expansion along the first row.
pub fn laplace_det(m: &[Vec<Rational>]) -> Rational {
    match m.len() {
        0 => Rational::one(),
        1 => m[0][0].clone(),
        _ => (0..m.len())
            .filter(|&j| !m[0][j].is_zero())
            .map(|j| {
                let term = &m[0][j] * laplace_det(&minor(m, 0, j));
                if j % 2 == 0 { term } else { -term }
            })
            .fold(Rational::zero(), |a, b| a + b),
    }
}

/// Inverse as adjugate / determinant; `None` when singular.
pub fn adjugate_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<Rational>>> {
    let q: Vec<Vec<Rational>> = m.iter().map(|row| row.iter().map(|&x| r(x, 1)).collect()).collect();
    let det = laplace_det(&q);
    if det.is_zero() {
        return None;
    }
    let n = m.len();
    Some(
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        // (adj M)_{ij} = (−1)^{i+j} det(M with row j and column i removed)
                        let c = laplace_det(&minor(&q, j, i));
                        let c = if (i + j) % 2 == 0 { c } else { -c };
                        c / &det
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Inertia from floating-point eigenvalues; only trusted for small, well
/// separated integer matrices.
pub fn eigen_inertia(m: &[Vec<i64>]) -> Inertia {
    let n = m.len();
    let dm = DMatrix::from_fn(n, n, |i, j| m[i][j] as f64);
    let eig = dm.symmetric_eigen();
    let tol = 1e-9 * (1.0 + eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let mut inertia = Inertia { n_plus: 0, n_zero: 0, n_minus: 0 };
    for &v in eig.eigenvalues.iter() {
        if v > tol {
            inertia.n_plus += 1;
        } else if v < -tol {
            inertia.n_minus += 1;
        } else {
            inertia.n_zero += 1;
        }
    }
    inertia
}

/// A random integer matrix of determinant ±1, built from elementary moves.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, moves: usize) -> Vec<Vec<i64>> {
    let mut p: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..moves {
        match rng.gen_range(0..3) {
            0 if n > 1 => {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if a != b {
                    let k = if rng.gen_bool(0.5) { 1 } else { -1 };
                    for row in p.iter_mut() {
                        row[a] += k * row[b];
                    }
                }
            }
            1 if n > 1 => {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                for row in p.iter_mut() {
                    row.swap(a, b);
                }
            }
            _ => {
                let a = rng.gen_range(0..n);
                for row in p.iter_mut() {
                    row[a] = -row[a];
                }
            }
        }
    }
    p
}

/// Coefficients of (t − t⁻¹)^m by repeated multiplication, keyed by exponent.
pub fn laurent_power(m: u32) -> Vec<(i64, i64)> {
    let mut coeffs = std::collections::BTreeMap::from([(0i64, 1i64)]);
    for _ in 0..m {
        let mut next = std::collections::BTreeMap::new();
        for (&e, &c) in &coeffs {
            *next.entry(e + 1).or_insert(0) += c;
            *next.entry(e - 1).or_insert(0) -= c;
        }
        next.retain(|_, c| *c != 0);
        coeffs = next;
    }
    coeffs.into_iter().collect()
}
