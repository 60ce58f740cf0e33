//! Moduli cones of combinatorial types, their faces, the assembled cone complex and its
//! embedding as a fan.

mod complex;
mod embed;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::curves::EdgeLength;
use crate::exactmath::{integer_kernel, rational_rank, solve_rational, to_rational, IntMatrix, LinearSystem, Rational};
use crate::maps::{CombinatorialType, MapError, TropicalStableMap, TypeEdge, TypeLeg};
use crate::polyhedral::Fan;

pub use complex::{assemble_complex, labeled_trivalent_trees, ComplexJson, ConeComplex, FaceMap};
pub use embed::{gkm_embedding, hexagon_fan, unimodular_equivalence, EmbeddedFan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuliError {
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("map does not have the shape of the type")]
    ShapeMismatch,
    #[error("complex assembly supports fans of rank at most 2, got {0}")]
    UnsupportedRank(usize),
    #[error("contact orders are not torically transverse")]
    NotTransverse,
    #[error("need at least two legs")]
    TooFewLegs,
    #[error("complex has no cones")]
    NotAssembled,
    #[error("unknown leg label {0}")]
    UnknownLabel(usize),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// sigma_Theta inside prod sigma_v x R_{>=0}^E, with an integral basis of its linear span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliCone {
    pub ty: CombinatorialType,
    pub ambient_dim: usize,
    pub constraint_matrix: IntMatrix,
    pub span_basis: IntMatrix,
    pub dimension: usize,
    /// Rows g with g . x >= 0 on the cone (edge lengths and ray coefficients of vertices).
    pub inequalities: IntMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

/// Coordinates: positions of vertex 0, 1, ... (rank each), then edge lengths.
pub fn moduli_cone(fan: &Fan, ty: &CombinatorialType) -> Result<ModuliCone, ModuliError> {
    ty.check_shape().map_err(|e| ModuliError::InvalidType(e.to_string()))?;
    if !ty.is_balanced() {
        return Err(ModuliError::InvalidType("not balanced".into()));
    }
    if ty.vertex_cones.iter().any(|&c| c >= fan.cone_count()) {
        return Err(ModuliError::InvalidType("vertex cone index out of range".into()));
    }
    let r = fan.rank();
    let nv = ty.vertex_count();
    let ne = ty.edges.len();
    let amb = r * nv + ne;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for (i, e) in ty.edges.iter().enumerate() {
        for k in 0..r {
            let mut row = vec![BigInt::zero(); amb];
            row[r * e.head + k] += 1;
            row[r * e.tail + k] -= 1;
            row[r * nv + i] = BigInt::from(-e.contact[k]);
            rows.push(row);
        }
    }
    let mut ineq: Vec<Vec<BigInt>> = Vec::new();
    for (v, &c) in ty.vertex_cones.iter().enumerate() {
        let q = fan.quotient_basis(c);
        for i in 0..q.rows() {
            let mut row = vec![BigInt::zero(); amb];
            for k in 0..r {
                row[r * v + k] = q[(i, k)].clone();
            }
            rows.push(row);
        }
        for g in fan.cone_inequalities(c) {
            let mut row = vec![BigInt::zero(); amb];
            for k in 0..r {
                row[r * v + k] = g[k].clone();
            }
            ineq.push(row);
        }
    }
    for i in 0..ne {
        let mut row = vec![BigInt::zero(); amb];
        row[r * nv + i] = BigInt::one();
        ineq.push(row);
    }
    let constraint_matrix = IntMatrix::from_rows(rows, amb);
    let span_basis = integer_kernel(&constraint_matrix);
    Ok(ModuliCone {
        ty: ty.clone(),
        ambient_dim: amb,
        dimension: span_basis.cols(),
        constraint_matrix,
        span_basis,
        inequalities: IntMatrix::from_rows(ineq, amb),
    })
}

impl ModuliCone {
    pub fn ambient_point(&self, f: &TropicalStableMap) -> Option<Vec<Rational>> {
        let mut x: Vec<Rational> = f.positions.iter().flatten().cloned().collect();
        for l in &f.lengths {
            x.push(l.finite()?.clone());
        }
        Some(x)
    }

    /// Span coordinates of an ambient point lying in the span.
    pub fn span_coordinates(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        let s = solve_rational(&self.span_basis, x)?;
        Some(s.values)
    }

    /// Inequality rows expressed on span coordinates (G * K).
    pub fn span_inequalities(&self) -> IntMatrix {
        self.inequalities.mul(&self.span_basis)
    }

    /// Map with this type at an ambient point.
    pub fn map_at(&self, x: &[Rational], rank: usize) -> TropicalStableMap {
        let nv = self.ty.vertex_count();
        TropicalStableMap {
            ty: self.ty.clone(),
            positions: (0..nv).map(|v| x[rank * v..rank * (v + 1)].to_vec()).collect(),
            lengths: x[rank * nv..].iter().map(|l| EdgeLength::Finite(l.clone())).collect(),
        }
    }
}

fn same_shape(a: &CombinatorialType, b: &CombinatorialType) -> bool {
    a.vertex_count() == b.vertex_count()
        && a.edges.len() == b.edges.len()
        && a.edges.iter().zip(&b.edges).all(|(x, y)| x.tail == y.tail && x.head == y.head)
        && a.legs.len() == b.legs.len()
        && a.legs.iter().zip(&b.legs).all(|(x, y)| x.label == y.label && x.vertex == y.vertex)
}

pub fn contains(cone: &ModuliCone, f: &TropicalStableMap) -> Result<Membership, ModuliError> {
    if !same_shape(&cone.ty, &f.ty) || f.positions.iter().any(|p| p.len() * f.positions.len() + f.lengths.len() != cone.ambient_dim) {
        return Err(ModuliError::ShapeMismatch);
    }
    let Some(x) = cone.ambient_point(f) else { return Ok(Membership::Outside) };
    if cone.constraint_matrix.mul_rational(&x).iter().any(|v| !v.is_zero()) {
        return Ok(Membership::Outside);
    }
    let values = cone.inequalities.mul_rational(&x);
    if values.iter().any(|v| v.is_negative()) {
        return Ok(Membership::Outside);
    }
    if values.iter().all(|v| v.is_positive()) {
        Ok(Membership::Interior)
    } else {
        Ok(Membership::Boundary)
    }
}

/// A codimension-one face together with how the parent's vertices and edges map into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceType {
    pub ty: CombinatorialType,
    pub dimension: usize,
    /// parent vertex -> face vertex
    pub vertex_map: Vec<usize>,
    /// parent edge -> face edge, or None when the edge is contracted
    pub edge_map: Vec<Option<usize>>,
    /// a point in the relative interior of the face, in the parent's ambient coordinates
    pub witness: Vec<Rational>,
}

fn rat_row(row: &[BigInt]) -> Vec<Rational> {
    row.iter().map(to_rational).collect()
}

/// Is there y with G y >= 0, rows in `zero` vanishing, and `probe . y >= 1`?
fn can_be_positive(g: &IntMatrix, zero: &[usize], probe: usize) -> bool {
    relint_point(g, zero, &[probe]).is_some()
}

/// A point with rows in `zero` vanishing, rows in `strict` >= 1 and all other rows >= 0.
fn relint_point(g: &IntMatrix, zero: &[usize], strict: &[usize]) -> Option<Vec<Rational>> {
    let d = g.cols();
    let mut sys = LinearSystem::new(d);
    for i in 0..g.rows() {
        let row = rat_row(g.row(i));
        if zero.contains(&i) {
            sys.add_eq(row, Rational::zero());
        } else if strict.contains(&i) {
            sys.add_ge(row, Rational::one());
        } else {
            sys.add_ge(row, Rational::zero());
        }
    }
    sys.solve()
}

fn rank_of_rows(g: &IntMatrix, rows: &[usize]) -> usize {
    let r: Vec<Vec<Rational>> = rows.iter().map(|&i| rat_row(g.row(i))).collect();
    rational_rank(&r, g.cols())
}

/// Rows of `g` that vanish on all of {G y >= 0, rows in `zero` = 0}.
fn implicit_equalities(g: &IntMatrix, zero: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = zero.to_vec();
    for i in 0..g.rows() {
        if out.contains(&i) {
            continue;
        }
        if g.row(i).iter().all(|x| x.is_zero()) || !can_be_positive(g, zero, i) {
            out.push(i);
        }
    }
    out.sort_unstable();
    out
}

/// Type of the maps at an ambient point: contracts zero-length edges and locates vertices.
pub(crate) fn type_at_point(
    fan: &Fan,
    parent: &CombinatorialType,
    x: &[Rational],
) -> Result<(TropicalStableMap, Vec<usize>, Vec<Option<usize>>), ModuliError> {
    let r = fan.rank();
    let nv = parent.vertex_count();
    let lengths = &x[r * nv..];
    let mut rep: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut a = v;
        while p[a] != a {
            a = p[a];
        }
        a
    }
    for (e, l) in parent.edges.iter().zip(lengths) {
        if l.is_zero() {
            let (a, b) = (find(&mut rep, e.tail), find(&mut rep, e.head));
            let (lo, hi) = (a.min(b), a.max(b));
            rep[hi] = lo;
        }
    }
    let roots: Vec<usize> = (0..nv).map(|v| find(&mut rep, v)).collect();
    let mut uniq: Vec<usize> = roots.clone();
    uniq.sort_unstable();
    uniq.dedup();
    let vertex_map: Vec<usize> = roots.iter().map(|r0| uniq.binary_search(r0).unwrap()).collect();
    let positions: Vec<Vec<Rational>> = uniq.iter().map(|&v| x[r * v..r * (v + 1)].to_vec()).collect();
    let mut edge_map = vec![None; parent.edges.len()];
    let mut edges: Vec<(usize, usize, Vec<i64>, Rational)> = Vec::new();
    for (i, (e, l)) in parent.edges.iter().zip(lengths).enumerate() {
        if l.is_zero() {
            continue;
        }
        edge_map[i] = Some(edges.len());
        edges.push((vertex_map[e.tail], vertex_map[e.head], e.contact.clone(), l.clone()));
    }
    let legs: Vec<(usize, usize, Vec<i64>)> =
        parent.legs.iter().map(|l| (l.label, vertex_map[l.vertex], l.contact.clone())).collect();
    let mut map = TropicalStableMap::from_geometry(fan, positions, &edges, &legs)?;
    // from_geometry may reorient edges; keep edge order aligned with `edges`.
    let stabilized = parent.edges.iter().all(|e| e.carrier.is_none()) && parent.legs.iter().all(|l| l.carrier.is_none());
    if stabilized {
        for e in map.ty.edges.iter_mut() {
            e.carrier = None;
        }
        for l in map.ty.legs.iter_mut() {
            l.carrier = None;
        }
    }
    Ok((map, vertex_map, edge_map))
}

/// All codimension-one faces of the moduli cone of `ty`.
pub fn face_types(fan: &Fan, ty: &CombinatorialType) -> Result<Vec<FaceType>, ModuliError> {
    let cone = moduli_cone(fan, ty)?;
    let g = cone.span_inequalities();
    let base_eq = implicit_equalities(&g, &[]);
    let d0 = cone.dimension - rank_of_rows(&g, &base_eq);
    if d0 == 0 {
        return Ok(Vec::new());
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for i in 0..g.rows() {
        if base_eq.contains(&i) {
            continue;
        }
        let mut zero = base_eq.clone();
        zero.push(i);
        if relint_point(&g, &zero, &[]).is_none() {
            continue;
        }
        let tight = implicit_equalities(&g, &zero);
        if seen.contains(&tight) {
            continue;
        }
        seen.push(tight.clone());
        let dim = cone.dimension - rank_of_rows(&g, &tight);
        if dim + 1 != d0 {
            continue;
        }
        let strict: Vec<usize> = (0..g.rows()).filter(|j| !tight.contains(j)).collect();
        let Some(y) = relint_point(&g, &tight, &strict) else { continue };
        let witness = cone.span_basis.mul_rational(&y);
        let (map, vertex_map, edge_map) = type_at_point(fan, ty, &witness)?;
        let face_cone = moduli_cone(fan, &map.ty)?;
        if face_cone.dimension + 1 != d0 {
            continue;
        }
        out.push(FaceType { ty: map.ty, dimension: face_cone.dimension, vertex_map, edge_map, witness });
    }
    Ok(out)
}

/// Matrix of the inclusion of the face's ambient space into the parent's ambient space.
pub fn face_inclusion(rank: usize, parent: &CombinatorialType, face: &CombinatorialType, vertex_map: &[usize], edge_map: &[Option<usize>]) -> IntMatrix {
    let (pv, pe) = (parent.vertex_count(), parent.edges.len());
    let (fv, fe) = (face.vertex_count(), face.edges.len());
    let mut m = IntMatrix::zeros(rank * pv + pe, rank * fv + fe);
    for v in 0..pv {
        for k in 0..rank {
            m[(rank * v + k, rank * vertex_map[v] + k)] = BigInt::one();
        }
    }
    for (e, img) in edge_map.iter().enumerate() {
        if let Some(f) = img {
            m[(rank * pv + e, rank * fv + f)] = BigInt::one();
        }
    }
    m
}

/// Expresses the columns of `vectors` in the integral basis `basis`; None if not integral.
pub fn integral_coordinates(basis: &IntMatrix, vectors: &IntMatrix) -> Option<IntMatrix> {
    let mut cols = Vec::new();
    for j in 0..vectors.cols() {
        let b: Vec<Rational> = vectors.column(j).iter().map(to_rational).collect();
        let s = solve_rational(basis, &b)?;
        let ints: Option<Vec<BigInt>> = s.values.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect();
        cols.push(ints?);
    }
    Some(IntMatrix::from_columns(&cols, basis.cols()))
}

/// Rebuilds a stabilized type (no carriers, vertices located) from a type with carriers.
pub fn forget_carriers(ty: &CombinatorialType) -> CombinatorialType {
    CombinatorialType {
        vertex_cones: ty.vertex_cones.clone(),
        edges: ty.edges.iter().map(|e| TypeEdge { carrier: None, ..e.clone() }).collect(),
        legs: ty.legs.iter().map(|l| TypeLeg { carrier: None, ..l.clone() }).collect(),
    }
}
