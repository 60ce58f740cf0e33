use num_traits::{One, Zero};

use super::{IntMatrix, Rational};

/// An exact solution of a linear system, with a flag telling whether it is the only one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSolution {
    pub values: Vec<Rational>,
    pub unique: bool,
}

pub fn solve_rational(a: &IntMatrix, b: &[Rational]) -> Option<RationalSolution> {
    assert_eq!(b.len(), a.rows(), "right-hand side length must equal row count");
    let rows: Vec<Vec<Rational>> = (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect();
    solve_rational_matrix(&rows, a.cols(), b)
}

/// Gauss-Jordan over Q. Free variables are set to zero.
pub fn solve_rational_matrix(a: &[Vec<Rational>], cols: usize, b: &[Rational]) -> Option<RationalSolution> {
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pr) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut values = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        values[c] = m[i][cols].clone();
    }
    Some(RationalSolution { values, unique: pivots.len() == cols })
}

/// Rank of a rational matrix.
pub fn rational_rank(a: &[Vec<Rational>], cols: usize) -> usize {
    let mut m = a.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pr = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pr[c];
            for (x, y) in row.iter_mut().zip(&pr) {
                *x -= &f * y;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}
