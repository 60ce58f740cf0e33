//! Phase-one simplex for feasibility of `A x = b` with some variables sign-constrained.
//!
//! The routine is generic so the same code runs exactly over the rationals and, as a fast
//! filter, in floating point.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use super::Rational;

pub trait LpScalar: Clone {
    fn s_zero() -> Self;
    fn s_one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Sign, with a tolerance for inexact types.
    fn sign(&self) -> Ordering;
    fn magnitude(&self) -> f64;
    fn is_exact() -> bool;
}

impl LpScalar for Rational {
    fn s_zero() -> Self {
        Zero::zero()
    }
    fn s_one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn magnitude(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_exact() -> bool {
        true
    }
}

const FLOAT_TOL: f64 = 1e-9;

impl LpScalar for f64 {
    fn s_zero() -> Self {
        0.0
    }
    fn s_one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> Ordering {
        if self.abs() <= FLOAT_TOL {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_exact() -> bool {
        false
    }
}

/// Outcome of phase one. `residual` is the optimal total infeasibility (zero iff feasible
/// for exact scalars).
#[derive(Clone, Debug)]
pub struct PhaseOne<S> {
    pub point: Option<Vec<S>>,
    pub residual: S,
    /// False when the pivot budget ran out before optimality.
    pub converged: bool,
}

impl<S: LpScalar> PhaseOne<S> {
    pub fn feasible(&self) -> bool {
        self.point.is_some()
    }
}

fn is_zero<S: LpScalar>(x: &S) -> bool {
    x.sign() == Ordering::Equal
}

/// Finds a point of `{x : A x = b, x_j >= 0 where nonneg[j]}` if one exists.
pub fn phase_one<S: LpScalar>(a: &[Vec<S>], b: &[S], nonneg: &[bool]) -> PhaseOne<S> {
    let n = nonneg.len();
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            debug_assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    // Eliminate free variables; each claims one defining row.
    let mut defining: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; m.len()];
    for j in (0..n).filter(|&j| !nonneg[j]) {
        let pick = (0..m.len()).filter(|&i| !used[i] && !is_zero(&m[i][j])).max_by(|&x, &y| {
            if S::is_exact() {
                y.cmp(&x)
            } else {
                m[x][j].magnitude().partial_cmp(&m[y][j].magnitude()).unwrap_or(Ordering::Equal)
            }
        });
        let Some(p) = pick else { continue };
        used[p] = true;
        let inv = S::s_one().div(&m[p][j]);
        for x in m[p].iter_mut() {
            *x = x.mul(&inv);
        }
        let pr = m[p].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == p || is_zero(&row[j]) {
                continue;
            }
            let f = row[j].clone();
            for (x, y) in row.iter_mut().zip(&pr) {
                if !is_zero(y) {
                    *x = x.sub(&f.mul(y));
                }
            }
            row[j] = S::s_zero();
        }
        defining.push((j, p));
    }

    let cols: Vec<usize> = (0..n).filter(|&j| nonneg[j]).collect();
    let mut tab: Vec<Vec<S>> = Vec::new();
    for (i, row) in m.iter().enumerate() {
        if used[i] {
            continue;
        }
        let mut t: Vec<S> = cols.iter().map(|&j| row[j].clone()).collect();
        let mut rhs = row[n].clone();
        if t.iter().all(is_zero) {
            if is_zero(&rhs) {
                continue;
            }
            return PhaseOne { point: None, residual: if rhs.sign() == Ordering::Less { rhs.neg() } else { rhs }, converged: true };
        }
        if rhs.sign() == Ordering::Less {
            t = t.iter().map(|x| x.neg()).collect();
            rhs = rhs.neg();
        }
        t.push(rhs);
        tab.push(t);
    }

    let k = tab.len();
    let nn = cols.len();
    // Columns: nonneg vars 0..nn, artificials nn..nn+k, rhs at nn+k.
    let width = nn + k + 1;
    let mut t: Vec<Vec<S>> = tab
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = Vec::with_capacity(width);
            r.extend(row[..nn].iter().cloned());
            for a in 0..k {
                r.push(if a == i { S::s_one() } else { S::s_zero() });
            }
            r.push(row[nn].clone());
            r
        })
        .collect();
    let mut basis: Vec<usize> = (nn..nn + k).collect();
    // Reduced-cost row for minimizing the sum of artificials: obj[j] > 0 means entering helps.
    let mut obj: Vec<S> = vec![S::s_zero(); width];
    for row in &t {
        for j in 0..nn {
            obj[j] = obj[j].add(&row[j]);
        }
        obj[width - 1] = obj[width - 1].add(&row[width - 1]);
    }

    let max_iter = 50 * (width + k + 10);
    let mut iter = 0;
    let mut converged = true;
    loop {
        iter += 1;
        if iter > max_iter {
            converged = false;
            break;
        }
        let Some(enter) = (0..nn + k).find(|&j| !basis.contains(&j) && obj[j].sign() == Ordering::Greater) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best: Option<S> = None;
        for i in 0..k {
            if t[i][enter].sign() != Ordering::Greater {
                continue;
            }
            let ratio = t[i][width - 1].div(&t[i][enter]);
            let better = match &best {
                None => true,
                Some(b) => match ratio.sub(b).sign() {
                    Ordering::Less => true,
                    Ordering::Equal => basis[i] < basis[leave.unwrap()],
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some(ratio);
                leave = Some(i);
            }
        }
        let Some(r) = leave else {
            // Unbounded direction cannot occur in phase one (objective bounded below).
            break;
        };
        let inv = S::s_one().div(&t[r][enter]);
        for x in t[r].iter_mut() {
            *x = x.mul(&inv);
        }
        let pr = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || is_zero(&row[enter]) {
                continue;
            }
            let f = row[enter].clone();
            for (x, y) in row.iter_mut().zip(&pr) {
                if !is_zero(y) {
                    *x = x.sub(&f.mul(y));
                }
            }
            row[enter] = S::s_zero();
        }
        if !is_zero(&obj[enter]) {
            let f = obj[enter].clone();
            for (x, y) in obj.iter_mut().zip(&pr) {
                if !is_zero(y) {
                    *x = x.sub(&f.mul(y));
                }
            }
            obj[enter] = S::s_zero();
        }
        basis[r] = enter;
    }

    let residual = obj[width - 1].clone();
    if residual.sign() != Ordering::Equal {
        return PhaseOne { point: None, residual, converged };
    }
    let mut x = vec![S::s_zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < nn {
            x[cols[bv]] = t[i][width - 1].clone();
        }
    }
    for &(j, p) in &defining {
        let mut v = m[p][n].clone();
        for (l, coef) in m[p].iter().enumerate().take(n) {
            if l != j && nonneg[l] && !is_zero(coef) {
                v = v.sub(&coef.mul(&x[l]));
            }
        }
        x[j] = v;
    }
    PhaseOne { point: Some(x), residual, converged }
}

/// Builder for systems mixing equalities and inequalities over rational data.
#[derive(Clone, Debug, Default)]
pub struct LinearSystem {
    vars: usize,
    nonneg: Vec<bool>,
    eq: Vec<(Vec<Rational>, Rational)>,
    ge: Vec<(Vec<Rational>, Rational)>,
}

impl LinearSystem {
    /// `vars` free variables.
    pub fn new(vars: usize) -> Self {
        LinearSystem { vars, nonneg: vec![false; vars], ..Default::default() }
    }

    pub fn set_nonneg(&mut self, j: usize) {
        self.nonneg[j] = true;
    }

    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.vars);
        self.eq.push((row, rhs));
    }

    /// row . x >= rhs
    pub fn add_ge(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.vars);
        self.ge.push((row, rhs));
    }

    fn assemble(&self) -> (Vec<Vec<Rational>>, Vec<Rational>, Vec<bool>) {
        let s = self.ge.len();
        let total = self.vars + s;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, rhs) in &self.eq {
            let mut r = row.clone();
            r.resize(total, Rational::zero());
            a.push(r);
            b.push(rhs.clone());
        }
        for (k, (row, rhs)) in self.ge.iter().enumerate() {
            let mut r = row.clone();
            r.resize(total, Rational::zero());
            r[self.vars + k] = -Rational::one();
            a.push(r);
            b.push(rhs.clone());
        }
        let mut nonneg = self.nonneg.clone();
        nonneg.resize(total, true);
        (a, b, nonneg)
    }

    /// An exact feasible point, if any.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        let (a, b, nonneg) = self.assemble();
        let mut p = phase_one(&a, &b, &nonneg).point?;
        p.truncate(self.vars);
        Some(p)
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_some()
    }
}
