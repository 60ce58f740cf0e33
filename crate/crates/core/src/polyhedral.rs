//! Complete simplicial fans, cone location and the strata of the compactified fan.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{integer_kernel, quotient_map, saturate_columns, solve_rational, IntMatrix, Rational};

pub type ConeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyhedralError {
    #[error("projective space needs dimension at least 1")]
    ZeroDimension,
    #[error("ray {index} has length {got}, expected {rank}")]
    RayLength { index: usize, got: usize, rank: usize },
    #[error("ray {0} is zero")]
    ZeroRay(usize),
    #[error("ray {0} is not primitive")]
    NonPrimitiveRay(usize),
    #[error("duplicate ray {0}")]
    DuplicateRay(usize),
    #[error("cone {0:?} refers to a missing ray")]
    UnknownRay(Vec<usize>),
    #[error("cone {0:?} is not simplicial (its rays are linearly dependent)")]
    NonSimplicial(Vec<usize>),
    #[error("no cone of the fan contains the point")]
    NotComplete,
    #[error("direction is zero or lies outside the fan")]
    DirectionOutsideFan,
    #[error("subspace generators are linearly dependent")]
    DependentGenerators,
    #[error("point has {got} coordinates, fan rank is {rank}")]
    DimensionMismatch { got: usize, rank: usize },
    #[error("subspace basis has {got} rows, fan rank is {rank}")]
    BasisShape { got: usize, rank: usize },
}

#[derive(Clone, Debug)]
struct ConeData {
    rays: IntMatrix,
    /// Surjection N -> N / span(cone), rows in Hermite form.
    quotient: IntMatrix,
    /// Rows recovering ray coefficients of a point of span(cone) (rational left inverse).
    coefficients: Vec<Vec<Rational>>,
}

/// A complete simplicial fan. Cones are stored closed under faces; cone 0 is the zero cone.
#[derive(Clone, Debug)]
pub struct Fan {
    name: String,
    rank: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, ConeId>,
    maximal: Vec<ConeId>,
    data: Vec<ConeData>,
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.rays == other.rays && self.cones == other.cones
    }
}

impl Eq for Fan {}

fn ray_matrix(rank: usize, rays: &[Vec<i64>], set: &[usize]) -> IntMatrix {
    let mut m = IntMatrix::zeros(rank, set.len());
    for (j, &r) in set.iter().enumerate() {
        for i in 0..rank {
            m[(i, j)] = BigInt::from(rays[r][i]);
        }
    }
    m
}

fn left_inverse(b: &IntMatrix) -> Vec<Vec<Rational>> {
    // Solve (B^T B) X = B^T column by column.
    let k = b.cols();
    let bt = b.transpose();
    let gram = bt.mul(b);
    let mut rows = vec![Vec::with_capacity(b.rows()); k];
    for i in 0..b.rows() {
        let rhs: Vec<Rational> = (0..k).map(|j| Rational::from_integer(b[(i, j)].clone())).collect();
        let sol = solve_rational(&gram, &rhs).expect("Gram matrix of independent rays is invertible");
        for (j, v) in sol.values.into_iter().enumerate() {
            rows[j].push(v);
        }
    }
    rows
}

impl Fan {
    pub fn new(name: &str, rank: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Fan, PolyhedralError> {
        for (i, r) in rays.iter().enumerate() {
            if r.len() != rank {
                return Err(PolyhedralError::RayLength { index: i, got: r.len(), rank });
            }
            let g = r.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g == 0 {
                return Err(PolyhedralError::ZeroRay(i));
            }
            if g != 1 {
                return Err(PolyhedralError::NonPrimitiveRay(i));
            }
            if rays[..i].contains(r) {
                return Err(PolyhedralError::DuplicateRay(i));
            }
        }
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        all.insert(Vec::new());
        for c in &cones {
            let mut set: Vec<usize> = c.clone();
            set.sort_unstable();
            set.dedup();
            if set.iter().any(|&r| r >= rays.len()) {
                return Err(PolyhedralError::UnknownRay(c.clone()));
            }
            if ray_matrix(rank, &rays, &set).rank() < set.len() {
                return Err(PolyhedralError::NonSimplicial(set));
            }
            let k = set.len();
            for mask in 0u64..(1u64 << k) {
                let sub: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| set[b]).collect();
                all.insert(sub);
            }
        }
        let mut cones: Vec<Vec<usize>> = all.into_iter().collect();
        cones.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let lookup: HashMap<Vec<usize>, ConeId> = cones.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let maximal: Vec<ConeId> = (0..cones.len())
            .filter(|&i| !cones.iter().any(|d| d.len() > cones[i].len() && cones[i].iter().all(|r| d.contains(r))))
            .collect();
        let data = cones
            .iter()
            .map(|set| {
                let m = ray_matrix(rank, &rays, set);
                ConeData { quotient: quotient_map(&m), coefficients: left_inverse(&m), rays: m }
            })
            .collect();
        Ok(Fan { name: name.to_string(), rank, rays, cones, lookup, maximal, data })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn cone(&self, c: ConeId) -> &[usize] {
        &self.cones[c]
    }

    pub fn cone_count(&self) -> usize {
        self.cones.len()
    }

    pub fn dim(&self, c: ConeId) -> usize {
        self.cones[c].len()
    }

    pub fn maximal_cones(&self) -> &[ConeId] {
        &self.maximal
    }

    pub fn is_maximal(&self, c: ConeId) -> bool {
        self.dim(c) == self.rank
    }

    pub fn zero_cone(&self) -> ConeId {
        0
    }

    pub fn cone_index(&self, rays: &[usize]) -> Option<ConeId> {
        let mut s = rays.to_vec();
        s.sort_unstable();
        s.dedup();
        self.lookup.get(&s).copied()
    }

    /// Is `a` a face of `b` (including a = b)?
    pub fn is_face(&self, a: ConeId, b: ConeId) -> bool {
        self.cones[a].iter().all(|r| self.cones[b].contains(r))
    }

    /// Smallest cone having both as faces, if the fan has one.
    pub fn join(&self, a: ConeId, b: ConeId) -> Option<ConeId> {
        let mut s: Vec<usize> = self.cones[a].iter().chain(&self.cones[b]).copied().collect();
        s.sort_unstable();
        s.dedup();
        self.lookup.get(&s).copied()
    }

    /// Intersection of two cones (always a common face in a fan).
    pub fn meet(&self, a: ConeId, b: ConeId) -> ConeId {
        let s: Vec<usize> = self.cones[a].iter().filter(|r| self.cones[b].contains(r)).copied().collect();
        self.lookup[&s]
    }

    pub fn ray_matrix(&self, c: ConeId) -> &IntMatrix {
        &self.data[c].rays
    }

    /// The fixed integral basis of N / span(cone), as a surjective matrix.
    pub fn quotient_basis(&self, c: ConeId) -> &IntMatrix {
        &self.data[c].quotient
    }

    /// Coefficients of `p` with respect to the rays of `c`; meaningful when p lies in span(c).
    pub fn ray_coefficients(&self, c: ConeId, p: &[Rational]) -> Vec<Rational> {
        self.data[c]
            .coefficients
            .iter()
            .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Integral rows `g` with `g . p >= 0` (all rows) and `q . p = 0` (quotient rows) describing the
    /// closed cone inside its span; the first list is the scaled coefficient functionals.
    pub fn cone_inequalities(&self, c: ConeId) -> Vec<Vec<BigInt>> {
        self.data[c].coefficients.iter().map(|row| crate::exactmath::clear_denominators(row)).collect()
    }

    pub fn in_span(&self, c: ConeId, p: &[Rational]) -> bool {
        self.data[c].quotient.mul_rational(p).iter().all(|x| x.is_zero())
    }

    pub fn contains_closed(&self, c: ConeId, p: &[Rational]) -> bool {
        self.in_span(c, p) && self.ray_coefficients(c, p).iter().all(|x| !x.is_negative())
    }

    pub fn contains_relint(&self, c: ConeId, p: &[Rational]) -> bool {
        self.in_span(c, p) && self.ray_coefficients(c, p).iter().all(|x| x.is_positive())
    }

    /// The unique cone whose relative interior contains `p`.
    pub fn locate(&self, p: &[Rational]) -> Result<ConeId, PolyhedralError> {
        if p.len() != self.rank {
            return Err(PolyhedralError::DimensionMismatch { got: p.len(), rank: self.rank });
        }
        for &m in &self.maximal {
            if self.dim(m) != self.rank {
                continue;
            }
            let lambda = self.ray_coefficients(m, p);
            if lambda.iter().all(|x| !x.is_negative()) {
                let support: Vec<usize> =
                    self.cones[m].iter().zip(&lambda).filter(|(_, l)| l.is_positive()).map(|(&r, _)| r).collect();
                return Ok(self.lookup[&support]);
            }
        }
        (0..self.cones.len()).find(|&c| self.contains_relint(c, p)).ok_or(PolyhedralError::NotComplete)
    }

    pub fn locate_integer(&self, v: &[BigInt]) -> Result<ConeId, PolyhedralError> {
        let p: Vec<Rational> = v.iter().map(|x| Rational::from_integer(x.clone())).collect();
        self.locate(&p)
    }

    /// If `v` is a positive multiple of a ray, returns (ray, multiple).
    pub fn ray_of(&self, v: &[BigInt]) -> Option<(usize, BigInt)> {
        let g = crate::exactmath::content(v);
        if g.is_zero() {
            return None;
        }
        let prim: Vec<BigInt> = v.iter().map(|x| x / &g).collect();
        self.rays
            .iter()
            .position(|r| r.iter().zip(&prim).all(|(a, b)| BigInt::from(*a) == *b))
            .map(|i| (i, g))
    }

    /// The stratum point reached by the ray `base + t * direction` as t grows.
    pub fn extended_point(&self, base: &[Rational], direction: &[BigInt]) -> Result<ExtendedPoint, PolyhedralError> {
        if base.len() != self.rank || direction.len() != self.rank {
            return Err(PolyhedralError::DimensionMismatch { got: base.len().min(direction.len()), rank: self.rank });
        }
        if direction.iter().all(|x| x.is_zero()) {
            return Err(PolyhedralError::DirectionOutsideFan);
        }
        let stratum = self.locate_integer(direction).map_err(|_| PolyhedralError::DirectionOutsideFan)?;
        Ok(ExtendedPoint { stratum, coset: self.quotient_basis(stratum).mul_rational(base) })
    }

    pub fn finite_point(&self, p: &[Rational]) -> ExtendedPoint {
        ExtendedPoint { stratum: 0, coset: p.to_vec() }
    }

    pub fn quotient_projection(&self, basis: &IntMatrix) -> Result<QuotientProjection, PolyhedralError> {
        QuotientProjection::new(self.rank, basis)
    }

    pub fn to_json(&self) -> FanJson {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_index = vec![0; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut cones: Vec<Vec<usize>> = self
            .maximal
            .iter()
            .map(|&c| {
                let mut s: Vec<usize> = self.cones[c].iter().map(|&r| new_index[r]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        cones.sort();
        FanJson {
            schema: Some(crate::SCHEMA.to_string()),
            rank: self.rank,
            rays: order.iter().map(|&i| self.rays[i].clone()).collect(),
            cones,
            name: self.name.clone(),
        }
    }

    pub fn from_json(j: &FanJson) -> Result<Fan, PolyhedralError> {
        Fan::new(&j.name, j.rank, j.rays.clone(), j.cones.clone())
    }

    /// Ray vectors of a cone, sorted; a fan-order independent description.
    pub fn cone_rays(&self, c: ConeId) -> Vec<Vec<i64>> {
        let mut v: Vec<Vec<i64>> = self.cones[c].iter().map(|&r| self.rays[r].clone()).collect();
        v.sort();
        v
    }

    pub fn cone_from_rays(&self, rays: &[Vec<i64>]) -> Option<ConeId> {
        let idx: Option<Vec<usize>> = rays.iter().map(|r| self.rays.iter().position(|x| x == r)).collect();
        self.cone_index(&idx?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Vec<usize>>,
    #[serde(default)]
    pub name: String,
}

/// Rays e_1..e_r and -(e_1+...+e_r); cones are the proper subsets.
pub fn fan_projective_space(r: usize) -> Result<Fan, PolyhedralError> {
    if r == 0 {
        return Err(PolyhedralError::ZeroDimension);
    }
    let mut rays: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect();
    rays.push(vec![-1; r]);
    let cones: Vec<Vec<usize>> = (0..=r).map(|skip| (0..=r).filter(|&i| i != skip).collect()).collect();
    Fan::new(&format!("P{r}"), r, rays, cones)
}

/// The fan of a point: rank 0, only the zero cone.
pub fn point_fan() -> Fan {
    Fan::new("point", 0, Vec::new(), Vec::new()).expect("point fan is valid")
}

pub fn fan_product(f: &Fan, g: &Fan) -> Fan {
    let rank = f.rank + g.rank;
    let mut rays: Vec<Vec<i64>> = f
        .rays
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v.resize(rank, 0);
            v
        })
        .collect();
    for r in &g.rays {
        let mut v = vec![0; f.rank];
        v.extend(r);
        rays.push(v);
    }
    let off = f.rays.len();
    let mut cones = Vec::new();
    for &a in &f.maximal {
        for &b in &g.maximal {
            let mut s = f.cones[a].clone();
            s.extend(g.cones[b].iter().map(|x| x + off));
            cones.push(s);
        }
    }
    let name = if g.rank == 0 {
        f.name.clone()
    } else if f.rank == 0 {
        g.name.clone()
    } else {
        format!("{}x{}", f.name, g.name)
    };
    Fan::new(&name, rank, rays, cones).expect("product of simplicial fans is simplicial")
}

/// A point of the compactified fan: a stratum N/span(sigma) and coordinates in its fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtendedPoint {
    pub stratum: ConeId,
    pub coset: Vec<Rational>,
}

/// A saturated sublattice L of Z^rank with an integral surjection killing exactly L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientProjection {
    pub subspace_basis: IntMatrix,
    pub projection: IntMatrix,
}

impl QuotientProjection {
    pub fn new(rank: usize, basis: &IntMatrix) -> Result<Self, PolyhedralError> {
        if basis.rows() != rank {
            return Err(PolyhedralError::BasisShape { got: basis.rows(), rank });
        }
        if basis.rank() < basis.cols() {
            return Err(PolyhedralError::DependentGenerators);
        }
        let subspace_basis = if basis.cols() == 0 { basis.clone() } else { saturate_columns(basis) };
        let projection = quotient_map(&subspace_basis);
        Ok(QuotientProjection { subspace_basis, projection })
    }

    pub fn codimension(&self) -> usize {
        self.projection.rows()
    }

    /// Kernel check used by tests: the projection kills the basis.
    pub fn is_consistent(&self) -> bool {
        self.projection.mul(&self.subspace_basis).is_zero() && integer_kernel(&self.projection).cols() == self.subspace_basis.cols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, rat};

    fn p2() -> Fan {
        fan_projective_space(2).unwrap()
    }

    fn pt(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn projective_spaces() {
        let p1 = fan_projective_space(1).unwrap();
        assert_eq!(p1.rays(), &[vec![1], vec![-1]]);
        assert_eq!(p1.maximal_cones().len(), 2);
        let f = p2();
        assert_eq!(f.rays().len(), 3);
        assert_eq!(f.maximal_cones().len(), 3);
        for &m in f.maximal_cones() {
            assert_eq!(f.dim(m), 2);
            assert_eq!(f.ray_matrix(m).det().abs(), BigInt::from(1));
        }
        assert_eq!(f.cone_count(), 7);
        assert!(matches!(fan_projective_space(0), Err(PolyhedralError::ZeroDimension)));
    }

    #[test]
    fn products() {
        let p1 = fan_projective_space(1).unwrap();
        let q = fan_product(&p1, &p1);
        assert_eq!(q.rays().len(), 4);
        assert_eq!(q.maximal_cones().len(), 4);
        assert_eq!(fan_product(&p2(), &point_fan()), p2());
        let x = fan_product(&p2(), &p1);
        assert_eq!(x.maximal_cones().len(), 6);
        assert!(x.maximal_cones().iter().all(|&c| x.dim(c) == 3));
    }

    #[test]
    fn locate_examples() {
        let f = p2();
        assert_eq!(f.locate(&pt(&[0, 0])).unwrap(), 0);
        let c = f.locate(&pt(&[1, 1])).unwrap();
        assert_eq!(f.cone(c), &[0, 1]);
        let c = f.locate(&pt(&[2, 0])).unwrap();
        assert_eq!(f.cone(c), &[0]);
        let c = f.locate(&[rat(-1, 3), rat(-1, 2)]).unwrap();
        assert_eq!(f.cone(c), &[0, 2]);
    }

    #[test]
    fn rejects_bad_fans() {
        assert!(matches!(
            Fan::new("bad", 2, vec![vec![1, 0], vec![0, 1], vec![1, 1]], vec![vec![0, 1, 2]]),
            Err(PolyhedralError::NonSimplicial(_))
        ));
        assert!(matches!(Fan::new("bad", 2, vec![vec![2, 0]], vec![]), Err(PolyhedralError::NonPrimitiveRay(0))));
        assert!(matches!(Fan::new("bad", 2, vec![vec![0, 0]], vec![]), Err(PolyhedralError::ZeroRay(0))));
    }

    #[test]
    fn quotient_projection_examples() {
        let f = p2();
        let q = f.quotient_projection(&IntMatrix::zeros(2, 0)).unwrap();
        assert_eq!(q.projection, IntMatrix::identity(2));
        let q = f.quotient_projection(&IntMatrix::from_i64_rows(&[vec![1], vec![1]], 1)).unwrap();
        assert_eq!(q.projection, IntMatrix::from_i64_rows(&[vec![1, -1]], 2));
        let q = f.quotient_projection(&IntMatrix::identity(2)).unwrap();
        assert_eq!(q.codimension(), 0);
        assert!(matches!(
            f.quotient_projection(&IntMatrix::from_i64_rows(&[vec![1, 2], vec![1, 2]], 2)),
            Err(PolyhedralError::DependentGenerators)
        ));
    }

    #[test]
    fn extended_point_examples() {
        let f = p2();
        let e = f.extended_point(&pt(&[1, 1]), &bi(&[-1, -1])).unwrap();
        assert_eq!(f.cone(e.stratum), &[2]);
        assert_eq!(e.coset, vec![int(0)]);
        let e = f.extended_point(&pt(&[0, 0]), &bi(&[1, 0])).unwrap();
        assert_eq!(f.cone(e.stratum), &[0]);
        assert_eq!(e.coset, vec![int(0)]);
        let e = f.extended_point(&pt(&[0, 5]), &bi(&[1, 0])).unwrap();
        assert_eq!(e.coset, vec![int(5)]);
        assert!(f.extended_point(&pt(&[0, 0]), &bi(&[0, 0])).is_err());
    }

    #[test]
    fn json_round_trip_sorts_rays() {
        let f = p2();
        let j = f.to_json();
        assert_eq!(j.rays, vec![vec![-1, -1], vec![0, 1], vec![1, 0]]);
        let g = Fan::from_json(&j).unwrap();
        assert_eq!(g.to_json(), j);
        assert_eq!(g.maximal_cones().len(), 3);
    }
}
