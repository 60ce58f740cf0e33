//! Discrete data, combinatorial types and tropical stable maps to a fan.

mod canonical;
mod json;
mod subdivide;
mod validate;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::curves::{is_tree, CurveError, EdgeLength, TropicalCurve};
use crate::exactmath::Rational;
use crate::polyhedral::{ConeId, ExtendedPoint, Fan, PolyhedralError};

pub use canonical::CanonicalForm;
pub use json::{LegJson, MapJson, TypeEdgeJson, TypeJson};
pub use subdivide::subdivide;
pub use validate::{validate, ValidationReport, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("leg labels must be exactly 1..{0}")]
    BadLabels(usize),
    #[error("contact order of leg {0} has the wrong length")]
    ContactLength(usize),
    #[error("contact order of leg {0} lies in no cone of the fan")]
    ContactOutsideFan(usize),
    #[error("contact orders do not sum to zero, so no balanced map exists")]
    Unbalanced,
    #[error("no leg with label {0}")]
    UnknownLabel(usize),
    #[error("type is malformed: {0}")]
    Malformed(String),
    #[error("edge of the curve crosses infinitely many walls or leaves the fan")]
    InfiniteCrossing,
    #[error(transparent)]
    Polyhedral(#[from] PolyhedralError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("cone {0:?} is not a cone of the fan")]
    UnknownCone(Vec<Vec<i64>>),
    #[error("bad number {0:?}")]
    BadNumber(String),
}

pub type Vector = Vec<i64>;

pub fn is_zero_vec(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

pub(crate) fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub(crate) fn to_rat(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
}

/// The data Gamma: contact orders of the n contact legs and the labels of the m trivial legs.
#[derive(Clone, Debug)]
pub struct DiscreteData {
    fan: Arc<Fan>,
    contact_legs: Vec<(usize, Vector)>,
    trivial_legs: Vec<usize>,
}

impl DiscreteData {
    /// Contact legs get labels 1..n in the given order, trivial legs n+1..n+m.
    pub fn new(fan: Arc<Fan>, contacts: Vec<Vector>, trivial: usize) -> Result<Self, MapError> {
        let n = contacts.len();
        let contact_legs = contacts.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect();
        Self::with_labels(fan, contact_legs, (n + 1..=n + trivial).collect())
    }

    pub fn with_labels(fan: Arc<Fan>, contact_legs: Vec<(usize, Vector)>, trivial_legs: Vec<usize>) -> Result<Self, MapError> {
        let total = contact_legs.len() + trivial_legs.len();
        let labels: BTreeSet<usize> = contact_legs.iter().map(|c| c.0).chain(trivial_legs.iter().copied()).collect();
        if labels.len() != total || labels.iter().copied().ne(1..=total) {
            return Err(MapError::BadLabels(total));
        }
        let mut sum = vec![0i64; fan.rank()];
        for (label, c) in &contact_legs {
            if c.len() != fan.rank() {
                return Err(MapError::ContactLength(*label));
            }
            if is_zero_vec(c) || fan.locate_integer(&to_big(c)).is_err() {
                return Err(MapError::ContactOutsideFan(*label));
            }
            for (s, x) in sum.iter_mut().zip(c) {
                *s += x;
            }
        }
        if !is_zero_vec(&sum) {
            return Err(MapError::Unbalanced);
        }
        let mut contact_legs = contact_legs;
        contact_legs.sort_by_key(|c| c.0);
        let mut trivial_legs = trivial_legs;
        trivial_legs.sort_unstable();
        Ok(DiscreteData { fan, contact_legs, trivial_legs })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn fan_arc(&self) -> Arc<Fan> {
        self.fan.clone()
    }

    pub fn contact_legs(&self) -> &[(usize, Vector)] {
        &self.contact_legs
    }

    pub fn trivial_legs(&self) -> &[usize] {
        &self.trivial_legs
    }

    pub fn n(&self) -> usize {
        self.contact_legs.len()
    }

    pub fn m(&self) -> usize {
        self.trivial_legs.len()
    }

    pub fn leg_count(&self) -> usize {
        self.n() + self.m()
    }

    /// Contact order of any leg (zero for trivial legs).
    pub fn contact(&self, label: usize) -> Option<Vector> {
        if let Some((_, c)) = self.contact_legs.iter().find(|c| c.0 == label) {
            return Some(c.clone());
        }
        self.trivial_legs.contains(&label).then(|| vec![0; self.fan.rank()])
    }

    pub fn torically_transverse(&self) -> bool {
        self.contact_legs.iter().all(|(_, c)| self.fan.ray_of(&to_big(c)).is_some())
    }

    /// Total weight of contacts along each ray; defined for torically transverse data.
    pub fn degree_vector(&self) -> Option<Vec<BigInt>> {
        let mut deg = vec![BigInt::zero(); self.fan.rays().len()];
        for (_, c) in &self.contact_legs {
            let (ray, w) = self.fan.ray_of(&to_big(c))?;
            deg[ray] += w;
        }
        Some(deg)
    }

    /// Expected dimension of the moduli space: rank - 3 + n + m.
    pub fn expected_dimension(&self) -> i64 {
        self.fan.rank() as i64 - 3 + self.leg_count() as i64
    }
}

pub fn torically_transverse(gamma: &DiscreteData) -> bool {
    gamma.torically_transverse()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeEdge {
    pub tail: usize,
    pub head: usize,
    /// Direction from tail to head per unit length.
    pub contact: Vector,
    pub carrier: Option<ConeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeLeg {
    pub label: usize,
    pub vertex: usize,
    pub contact: Vector,
    pub carrier: Option<ConeId>,
}

/// The combinatorial type of a map: tree, vertex cones, contact orders and carrier cones.
/// Carriers are `None` for stabilized types, which forget how edges cross walls.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombinatorialType {
    pub vertex_cones: Vec<ConeId>,
    pub edges: Vec<TypeEdge>,
    pub legs: Vec<TypeLeg>,
}

impl CombinatorialType {
    pub fn vertex_count(&self) -> usize {
        self.vertex_cones.len()
    }

    pub fn rank(&self) -> usize {
        self.legs.first().map(|l| l.contact.len()).or_else(|| self.edges.first().map(|e| e.contact.len())).unwrap_or(0)
    }

    /// Number of incident edges and legs.
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.tail == v || e.head == v).count() + self.legs.iter().filter(|l| l.vertex == v).count()
    }

    pub fn leg(&self, label: usize) -> Option<&TypeLeg> {
        self.legs.iter().find(|l| l.label == label)
    }

    /// Neighbours of a vertex with the edge index and the direction pointing away from `v`.
    pub fn neighbours(&self, v: usize) -> Vec<(usize, usize, Vector)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail == v {
                out.push((e.head, i, e.contact.clone()));
            } else if e.head == v {
                out.push((e.tail, i, e.contact.iter().map(|x| -x).collect()));
            }
        }
        out
    }

    pub fn is_tree(&self) -> bool {
        is_tree(self.vertex_count(), self.edges.iter().map(|e| (e.tail, e.head)))
    }

    /// Checks the shape: a tree with in-range indices, tail < head, labels 1..N.
    pub fn check_shape(&self) -> Result<(), MapError> {
        let v = self.vertex_count();
        let rank = self.rank();
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail >= v || e.head >= v {
                return Err(MapError::Malformed(format!("edge {i} has an endpoint out of range")));
            }
            if e.tail >= e.head {
                return Err(MapError::Malformed(format!("edge {i} is not oriented from the lower index")));
            }
            if e.contact.len() != rank {
                return Err(MapError::Malformed(format!("edge {i} has a contact of the wrong length")));
            }
        }
        for l in &self.legs {
            if l.vertex >= v {
                return Err(MapError::Malformed(format!("leg {} is attached to a missing vertex", l.label)));
            }
            if l.contact.len() != rank {
                return Err(MapError::Malformed(format!("leg {} has a contact of the wrong length", l.label)));
            }
        }
        let labels: BTreeSet<usize> = self.legs.iter().map(|l| l.label).collect();
        if labels.len() != self.legs.len() || labels.iter().copied().ne(1..=self.legs.len()) {
            return Err(MapError::BadLabels(self.legs.len()));
        }
        if !self.is_tree() {
            return Err(MapError::Malformed("graph is not a tree".into()));
        }
        Ok(())
    }

    /// Sum of outgoing contact orders at `v`.
    pub fn imbalance(&self, v: usize) -> Vector {
        let mut s = vec![0i64; self.rank()];
        for (_, _, d) in self.neighbours(v) {
            for (a, b) in s.iter_mut().zip(&d) {
                *a += b;
            }
        }
        for l in self.legs.iter().filter(|l| l.vertex == v) {
            for (a, b) in s.iter_mut().zip(&l.contact) {
                *a += b;
            }
        }
        s
    }

    pub fn is_balanced(&self) -> bool {
        (0..self.vertex_count()).all(|v| is_zero_vec(&self.imbalance(v)))
    }

    /// The underlying abstract curve with the given lengths.
    pub fn curve(&self, lengths: &[EdgeLength]) -> Result<TropicalCurve, CurveError> {
        TropicalCurve::new(
            self.vertex_count(),
            self.edges.iter().zip(lengths).map(|(e, l)| (e.tail, e.head, l.clone())).collect(),
            self.legs.iter().map(|l| (l.vertex, l.label)).collect(),
        )
    }

    /// The curve with unit lengths, for purely combinatorial questions.
    pub fn shape(&self) -> TropicalCurve {
        let ones = vec![EdgeLength::Finite(Rational::from_integer(1.into())); self.edges.len()];
        self.curve(&ones).expect("type shape is a tree")
    }

    pub fn overvalence(&self) -> usize {
        self.shape().overvalence()
    }

    /// Builds the type realized by concrete geometry: vertex cones and carriers by location.
    pub fn from_geometry(
        fan: &Fan,
        positions: &[Vec<Rational>],
        edges: &[(usize, usize, Vector)],
        legs: &[(usize, usize, Vector)],
    ) -> Result<CombinatorialType, MapError> {
        let vertex_cones = positions.iter().map(|p| fan.locate(p)).collect::<Result<Vec<_>, _>>()?;
        let two = Rational::from_integer(2.into());
        let mut out_edges = Vec::new();
        for (a, b, c) in edges {
            let (tail, head, contact) = if a < b { (*a, *b, c.clone()) } else { (*b, *a, c.iter().map(|x| -x).collect()) };
            let mid: Vec<Rational> = positions[tail].iter().zip(&positions[head]).map(|(x, y)| (x + y) / &two).collect();
            out_edges.push(TypeEdge { tail, head, contact, carrier: Some(fan.locate(&mid)?) });
        }
        let mut out_legs = Vec::new();
        for (label, v, c) in legs {
            let q: Vec<Rational> = positions[*v].iter().zip(c).map(|(x, y)| x + Rational::from_integer((*y).into())).collect();
            out_legs.push(TypeLeg { label: *label, vertex: *v, contact: c.clone(), carrier: Some(fan.locate(&q)?) });
        }
        out_legs.sort_by_key(|l| l.label);
        Ok(CombinatorialType { vertex_cones, edges: out_edges, legs: out_legs })
    }
}

/// A concrete map: vertex positions and internal edge lengths for a combinatorial type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalStableMap {
    pub ty: CombinatorialType,
    pub positions: Vec<Vec<Rational>>,
    pub lengths: Vec<EdgeLength>,
}

impl TropicalStableMap {
    pub fn curve(&self) -> Result<TropicalCurve, CurveError> {
        self.ty.curve(&self.lengths)
    }

    pub fn finite_lengths(&self) -> Option<Vec<Rational>> {
        self.lengths.iter().map(|l| l.finite().cloned()).collect()
    }

    /// Builds a map from positions and lengths, deriving vertex cones and carriers.
    pub fn from_geometry(
        fan: &Fan,
        positions: Vec<Vec<Rational>>,
        edges: &[(usize, usize, Vector, Rational)],
        legs: &[(usize, usize, Vector)],
    ) -> Result<TropicalStableMap, MapError> {
        let plain: Vec<(usize, usize, Vector)> = edges.iter().map(|(a, b, c, _)| (*a, *b, c.clone())).collect();
        let ty = CombinatorialType::from_geometry(fan, &positions, &plain, legs)?;
        let lengths = edges.iter().map(|e| EdgeLength::Finite(e.3.clone())).collect();
        Ok(TropicalStableMap { ty, positions, lengths })
    }
}

/// Image of the end of the leg with this label.
pub fn ev_trop(fan: &Fan, f: &TropicalStableMap, label: usize) -> Result<ExtendedPoint, MapError> {
    let leg = f.ty.leg(label).ok_or(MapError::UnknownLabel(label))?;
    let p = &f.positions[leg.vertex];
    if is_zero_vec(&leg.contact) {
        return Ok(fan.finite_point(p));
    }
    Ok(fan.extended_point(p, &to_big(&leg.contact))?)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::exactmath::int;
    use crate::polyhedral::fan_projective_space;

    pub fn p2() -> Arc<Fan> {
        Arc::new(fan_projective_space(2).unwrap())
    }

    pub fn pt(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    /// Degree-1 tripod with root at `root`, legs along the three rays of P2 (not subdivided).
    pub fn tripod_at(fan: &Fan, root: &[i64]) -> TropicalStableMap {
        TropicalStableMap::from_geometry(
            fan,
            vec![pt(root)],
            &[],
            &[(1, 0, vec![1, 0]), (2, 0, vec![0, 1]), (3, 0, vec![-1, -1])],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::exactmath::int;

    #[test]
    fn discrete_data_checks() {
        let f = p2();
        let g = DiscreteData::new(f.clone(), vec![vec![1, 0], vec![0, 1], vec![-1, -1]], 2).unwrap();
        assert!(g.torically_transverse());
        assert_eq!(g.degree_vector().unwrap(), vec![BigInt::from(1); 3]);
        assert_eq!(g.expected_dimension(), 4);
        let h = DiscreteData::new(f.clone(), vec![vec![1, 1], vec![-1, -1]], 0).unwrap();
        assert!(!h.torically_transverse());
        assert!(h.degree_vector().is_none());
        let e = DiscreteData::new(f.clone(), vec![], 3).unwrap();
        assert!(e.torically_transverse());
        assert!(matches!(DiscreteData::new(f.clone(), vec![vec![1, 0]], 0), Err(MapError::Unbalanced)));
        assert!(matches!(DiscreteData::new(f, vec![vec![0, 0]], 0), Err(MapError::ContactOutsideFan(1))));
    }

    #[test]
    fn ev_trop_examples() {
        let f = p2();
        let m = TropicalStableMap::from_geometry(
            &f,
            vec![pt(&[3, 5])],
            &[],
            &[(1, 0, vec![0, 0]), (2, 0, vec![1, 0]), (3, 0, vec![-1, 0])],
        );
        // the leg (-1,0) is not along a ray of P2 but the map still evaluates
        let m = m.unwrap();
        let e = ev_trop(&f, &m, 1).unwrap();
        assert_eq!(e.stratum, 0);
        assert_eq!(e.coset, pt(&[3, 5]));
        let t = tripod_at(&f, &[1, 1]);
        let e = ev_trop(&f, &t, 3).unwrap();
        assert_eq!(f.cone(e.stratum), &[2]);
        assert_eq!(e.coset, vec![int(0)]);
        let t = tripod_at(&f, &[0, 0]);
        let e = ev_trop(&f, &t, 1).unwrap();
        assert_eq!(f.cone(e.stratum), &[0]);
        assert_eq!(e.coset, vec![int(0)]);
        assert!(matches!(ev_trop(&f, &t, 9), Err(MapError::UnknownLabel(9))));
    }

    #[test]
    fn from_geometry_orients_edges() {
        let f = p2();
        let m = TropicalStableMap::from_geometry(
            &f,
            vec![pt(&[1, 0]), pt(&[0, 0])],
            &[(1, 0, vec![1, 0], int(1))],
            &[(1, 1, vec![0, 1]), (2, 1, vec![-1, -1]), (3, 0, vec![1, 0])],
        )
        .unwrap();
        assert_eq!(m.ty.edges[0].tail, 0);
        assert_eq!(m.ty.edges[0].contact, vec![-1, 0]);
        assert!(m.ty.is_balanced());
    }
}
