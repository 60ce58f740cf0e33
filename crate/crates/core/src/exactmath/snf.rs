use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{ExactMathError, IntMatrix};

/// `left * A * right = diag`, with `left` and `right` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub left: IntMatrix,
    pub diag: IntMatrix,
    pub right: IntMatrix,
}

impl SmithDecomposition {
    /// The diagonal entries d_1 | d_2 | ... (length min(rows, cols)).
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.diag.rows().min(self.diag.cols());
        (0..k).map(|i| self.diag[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

/// Position of the nonzero entry of smallest absolute value in the block starting at (t, t).
fn smallest_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let v = &d[(i, j)];
            if v.is_zero() {
                continue;
            }
            let a = v.abs();
            if best.as_ref().map_or(true, |(_, _, b)| a < *b) {
                let one = a.is_one();
                best = Some((i, j, a));
                if one {
                    let (i, j, _) = best.unwrap();
                    return Some((i, j));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut left = IntMatrix::identity(m);
    let mut right = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        let Some((pi, pj)) = smallest_entry(&d, t) else { break };
        d.swap_rows(t, pi);
        left.swap_rows(t, pi);
        d.swap_cols(t, pj);
        right.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                left.add_row_multiple(i, t, &q);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                right.add_col_multiple(j, t, &q);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // Every remaining entry must be divisible by the pivot.
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
                match bad {
                    None => break,
                    Some((i, _)) => {
                        d.add_row_multiple(t, i, &BigInt::one());
                        left.add_row_multiple(t, i, &BigInt::one());
                        continue;
                    }
                }
            }
            // A smaller remainder appeared; move the smallest entry of row/column t to the pivot.
            let (mut bi, mut bj) = (t, t);
            let mut best = d[(t, t)].abs();
            for i in t + 1..m {
                let v = d[(i, t)].abs();
                if !v.is_zero() && v < best {
                    best = v;
                    bi = i;
                    bj = t;
                }
            }
            for j in t + 1..n {
                let v = d[(t, j)].abs();
                if !v.is_zero() && v < best {
                    best = v;
                    bi = t;
                    bj = j;
                }
            }
            d.swap_rows(t, bi);
            left.swap_rows(t, bi);
            d.swap_cols(t, bj);
            right.swap_cols(t, bj);
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            left.negate_row(t);
        }
    }
    SmithDecomposition { left, diag: d, right }
}

/// Index of A(Z^cols) in Z^rows; requires full row rank.
pub fn lattice_index(a: &IntMatrix) -> Result<BigInt, ExactMathError> {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    if rank < a.rows() {
        return Err(ExactMathError::RankDeficient { rank, rows: a.rows() });
    }
    Ok(snf.diagonal().into_iter().filter(|d| !d.is_zero()).product())
}

/// Row Hermite normal form of the lattice spanned by the rows; zero rows dropped.
pub fn hermite_rows(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        loop {
            let pivot = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&x, &y| a[x][c].abs().cmp(&a[y][c].abs()));
            let Some(p) = pivot else { break };
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r == a.len() || a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pr = a[r].clone();
        for i in 0..r {
            let q = a[i][c].div_floor(&pr[c]);
            if q.is_zero() {
                continue;
            }
            for (x, y) in a[i].iter_mut().zip(&pr) {
                *x -= &q * y;
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Saturated basis (as columns) of {x in Z^cols : A x = 0}, in Hermite-reduced form.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let n = a.cols();
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let raw: Vec<Vec<BigInt>> = (rank..n).map(|j| snf.right.column(j)).collect();
    let basis = hermite_rows(&raw, n);
    IntMatrix::from_columns(&basis, n)
}

/// Saturation of the lattice spanned by the columns of `b` (same rational span).
pub fn saturate_columns(b: &IntMatrix) -> IntMatrix {
    // The saturation is the kernel of any integral map whose kernel is the span.
    let annihilator = integer_kernel(&b.transpose());
    integer_kernel(&annihilator.transpose())
}

/// A surjection Z^n -> Z^(n-k) whose kernel is the saturation of the column span of `b`.
pub fn quotient_map(b: &IntMatrix) -> IntMatrix {
    let n = b.rows();
    if b.cols() == 0 {
        return IntMatrix::identity(n);
    }
    let snf = smith_normal_form(b);
    let rank = snf.rank();
    // left * b = diag * right^-1 has zero rows below the rank, so those rows of `left`
    // annihilate the span; unimodularity of `left` makes them a surjection.
    let rows: Vec<Vec<BigInt>> = (rank..n).map(|i| snf.left.row(i).to_vec()).collect();
    IntMatrix::from_rows(hermite_rows(&rows, n), n)
}
