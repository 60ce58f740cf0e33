//! Exact integer and rational linear algebra.

mod lp;
mod matrix;
mod snf;
mod solve;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

pub use lp::{phase_one, LinearSystem, LpScalar, PhaseOne};
pub use matrix::IntMatrix;
pub use snf::{hermite_rows, integer_kernel, lattice_index, quotient_map, saturate_columns, smith_normal_form, SmithDecomposition};
pub use solve::{rational_rank, solve_rational, solve_rational_matrix, RationalSolution};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactMathError {
    #[error("matrix has rank {rank} but {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_rational(x: &BigInt) -> Rational {
    Rational::from_integer(x.clone())
}

/// Formats as "p/q", or "p" when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ExactMathError> {
    let t = s.trim();
    let bad = || ExactMathError::BadRational(s.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// gcd of the entries (zero for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    use num_integer::Integer;
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Smallest positive integer multiple of a rational vector that is integral, divided by content.
pub fn primitive_direction(v: &[Rational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = content(&ints);
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Scales a rational row to a primitive integer row with the same sign.
pub fn clear_denominators(v: &[Rational]) -> Vec<BigInt> {
    primitive_direction(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "3", "-7/2", "5/10"] {
            let x = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
        }
        assert_eq!(format_rational(&parse_rational("5/10").unwrap()), "1/2");
        assert_eq!(format_rational(&parse_rational("4/-2").unwrap()), "-2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn primitive_direction_clears() {
        let v = primitive_direction(&[rat(1, 2), rat(-3, 4)]);
        assert_eq!(v, vec![BigInt::from(2), BigInt::from(-3)]);
    }
}
