use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{face_inclusion, face_types, integral_coordinates, moduli_cone, ModuliCone, ModuliError};
use crate::exactmath::{content, to_rational, IntMatrix, LinearSystem, Rational};
use crate::maps::{subdivide, CombinatorialType, DiscreteData, TropicalStableMap, TypeJson, Vector};
use crate::polyhedral::Fan;

/// Inclusion of `face` into `cone`: columns are the face's span basis written in the cone's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceMap {
    pub face: usize,
    pub cone: usize,
    pub matrix: IntMatrix,
}

/// The assembled moduli space as a cone complex. Cones are sorted by dimension, then key.
#[derive(Clone, Debug)]
pub struct ConeComplex {
    pub gamma: DiscreteData,
    pub cones: Vec<ModuliCone>,
    pub keys: Vec<String>,
    pub face_maps: Vec<FaceMap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeJson {
    pub index: usize,
    pub dimension: usize,
    #[serde(rename = "type")]
    pub ty: TypeJson,
    pub span_basis: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceMapJson {
    pub face: usize,
    pub cone: usize,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub schema: String,
    pub f_vector: Vec<usize>,
    pub cones: Vec<ConeJson>,
    #[serde(rename = "faces")]
    pub face_maps: Vec<FaceMapJson>,
}

fn matrix_text(m: &IntMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect()
}

impl ConeComplex {
    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.cones.iter().map(|c| c.dimension).max().unwrap_or(0);
        let mut f = vec![0; top + 1];
        for c in &self.cones {
            f[c.dimension] += 1;
        }
        f
    }

    pub fn dimension(&self) -> usize {
        self.cones.iter().map(|c| c.dimension).max().unwrap_or(0)
    }

    /// Direct (codimension one) faces.
    pub fn facets_of(&self, cone: usize) -> Vec<usize> {
        self.face_maps.iter().filter(|m| m.cone == cone).map(|m| m.face).collect()
    }

    /// All faces, including the cone itself.
    pub fn faces_of(&self, cone: usize) -> Vec<usize> {
        let mut out = vec![cone];
        let mut i = 0;
        while i < out.len() {
            for f in self.facets_of(out[i]) {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    pub fn maximal_cones(&self) -> Vec<usize> {
        (0..self.cones.len()).filter(|&c| self.face_maps.iter().all(|m| m.face != c)).collect()
    }

    pub fn to_json(&self) -> ComplexJson {
        let fan = self.gamma.fan();
        ComplexJson {
            schema: crate::SCHEMA.to_string(),
            f_vector: self.f_vector(),
            cones: self
                .cones
                .iter()
                .enumerate()
                .map(|(i, c)| ConeJson {
                    index: i,
                    dimension: c.dimension,
                    ty: c.ty.to_json(fan),
                    span_basis: matrix_text(&c.span_basis),
                })
                .collect(),
            face_maps: self
                .face_maps
                .iter()
                .map(|m| FaceMapJson { face: m.face, cone: m.cone, matrix: matrix_text(&m.matrix) })
                .collect(),
        }
    }

    /// Rebuilds a complex from its JSON; the discrete data is read off the legs.
    pub fn from_json(fan: Arc<Fan>, j: &ComplexJson) -> Result<ConeComplex, ModuliError> {
        let types = j.cones.iter().map(|c| CombinatorialType::from_json(&fan, &c.ty)).collect::<Result<Vec<_>, _>>()?;
        let first = types.first().ok_or(ModuliError::NotAssembled)?;
        let contacts: Vec<(usize, Vector)> = first.legs.iter().filter(|l| l.contact.iter().any(|x| *x != 0)).map(|l| (l.label, l.contact.clone())).collect();
        let trivial: Vec<usize> = first.legs.iter().filter(|l| l.contact.iter().all(|x| *x == 0)).map(|l| l.label).collect();
        let gamma = DiscreteData::with_labels(fan.clone(), contacts, trivial)?;
        let cones = types.iter().map(|t| moduli_cone(&fan, t)).collect::<Result<Vec<_>, _>>()?;
        let keys = types.iter().map(|t| t.canonical_key(false)).collect();
        let mut face_maps = Vec::new();
        for m in &j.face_maps {
            let rows: Vec<Vec<BigInt>> = m
                .matrix
                .iter()
                .map(|r| r.iter().map(|x| x.parse::<BigInt>().map_err(|_| ModuliError::InvalidType(format!("bad integer {x}")))).collect())
                .collect::<Result<_, _>>()?;
            let cols = if m.cone < cones.len() && m.face < cones.len() { cones[m.face].dimension } else { return Err(ModuliError::NotAssembled) };
            face_maps.push(FaceMap { face: m.face, cone: m.cone, matrix: IntMatrix::from_rows(rows, cols) });
        }
        Ok(ConeComplex { gamma, cones, keys, face_maps })
    }
}

/// All trivalent trees with leaves 0..n-1 (n >= 3); internal nodes are n, n+1, ...
pub fn labeled_trivalent_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 3);
    let mut trees = vec![vec![(0, n), (1, n), (2, n)]];
    for k in 3..n {
        let x = n + k - 2;
        let mut next = Vec::new();
        for t in &trees {
            for i in 0..t.len() {
                let (a, b) = t[i];
                let mut u = t.clone();
                u[i] = (a, x);
                u.push((x, b));
                u.push((k, x));
                next.push(u);
            }
        }
        trees = next;
    }
    trees
}

/// A family of maps of one trivalent tree, linear in parameters.
struct Family {
    params: usize,
    /// rank x params matrix per vertex
    positions: Vec<Vec<Vec<BigInt>>>,
    /// (tail, head, direction, index of the length parameter)
    edges: Vec<(usize, usize, Vector, usize)>,
    legs: Vec<(usize, usize, Vector)>,
    first_length: usize,
}

fn tree_family(rank: usize, legs: &[(usize, Vector)], tree: &[(usize, usize)]) -> Family {
    let n = legs.len();
    let internal = n - 2;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + internal];
    for &(a, b) in tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    // contact sum of leaves on b's side of the edge a-b
    fn side(adj: &[Vec<usize>], legs: &[(usize, Vector)], from: usize, at: usize, rank: usize) -> Vector {
        if at < legs.len() {
            return legs[at].1.clone();
        }
        let mut s = vec![0i64; rank];
        for &w in &adj[at] {
            if w != from {
                for (x, y) in s.iter_mut().zip(side(adj, legs, at, w, rank)) {
                    *x += y;
                }
            }
        }
        s
    }
    let bounded: Vec<(usize, usize)> = tree.iter().copied().filter(|&(a, b)| a >= n && b >= n).collect();
    let params = rank + bounded.len();
    let mut positions: Vec<Option<Vec<Vec<BigInt>>>> = vec![None; internal];
    let mut root = vec![vec![BigInt::zero(); params]; rank];
    for (k, row) in root.iter_mut().enumerate() {
        row[k] = BigInt::one();
    }
    positions[0] = Some(root);
    let mut edges = Vec::new();
    let mut stack = vec![n];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if w < n || positions[w - n].is_some() {
                continue;
            }
            let idx = bounded.iter().position(|&(a, b)| (a, b) == (v, w) || (a, b) == (w, v)).unwrap();
            let dir = side(&adj, legs, v, w, rank);
            let mut p = positions[v - n].clone().unwrap();
            for k in 0..rank {
                p[k][rank + idx] += dir[k];
            }
            positions[w - n] = Some(p);
            edges.push((v - n, w - n, dir, rank + idx));
            stack.push(w);
        }
    }
    let leg_list = (0..n).map(|i| (legs[i].0, adj[i][0] - n, legs[i].1.clone())).collect();
    Family { params, positions: positions.into_iter().map(Option::unwrap).collect(), edges, legs: leg_list, first_length: rank }
}

fn det2(a: &[i64], p: &[Vec<BigInt>]) -> Vec<BigInt> {
    p[1].iter().zip(&p[0]).map(|(y, x)| y * a[0] - x * a[1]).collect()
}

fn normalize_form(f: Vec<BigInt>) -> Option<Vec<BigInt>> {
    let g = content(&f);
    if g.is_zero() {
        return None;
    }
    let mut f: Vec<BigInt> = f.iter().map(|x| x / &g).collect();
    if f.iter().find(|x| !x.is_zero()).map_or(false, |x| x < &BigInt::zero()) {
        f = f.iter().map(|x| -x).collect();
    }
    Some(f)
}

/// Linear forms whose signs determine the combinatorial type along the family.
fn wall_forms(fan: &Fan, fam: &Family) -> Vec<Vec<BigInt>> {
    let mut forms = Vec::new();
    if fan.rank() == 1 {
        forms.extend(fam.positions.iter().map(|p| p[0].clone()));
    } else {
        for p in &fam.positions {
            for u in fan.rays() {
                forms.push(det2(u, p));
            }
        }
        for (a, _, d, _) in &fam.edges {
            forms.push(det2(d, &fam.positions[*a]));
        }
        for (_, v, c) in &fam.legs {
            if c.iter().any(|x| *x != 0) {
                forms.push(det2(c, &fam.positions[*v]));
            }
        }
    }
    let mut out: Vec<Vec<BigInt>> = forms.into_iter().filter_map(normalize_form).collect();
    out.sort();
    out.dedup();
    out
}

fn rat_row(row: &[BigInt]) -> Vec<Rational> {
    row.iter().map(to_rational).collect()
}

/// Interior points of all full-dimensional chambers cut out by the forms.
fn chamber_points(params: usize, first_length: usize, forms: &[Vec<BigInt>]) -> Vec<Vec<Rational>> {
    let mut base = LinearSystem::new(params);
    for j in first_length..params {
        let mut row = vec![Rational::zero(); params];
        row[j] = Rational::one();
        base.add_ge(row, Rational::one());
    }
    let mut out = Vec::new();
    fn go(sys: &LinearSystem, forms: &[Vec<BigInt>], i: usize, out: &mut Vec<Vec<Rational>>) {
        if i == forms.len() {
            if let Some(p) = sys.solve() {
                out.push(p);
            }
            return;
        }
        for sign in [1i64, -1] {
            let mut s = sys.clone();
            let row: Vec<Rational> = rat_row(&forms[i]).into_iter().map(|x| x * Rational::from_integer(sign.into())).collect();
            s.add_ge(row, Rational::one());
            if s.is_feasible() {
                go(&s, forms, i + 1, out);
            }
        }
    }
    go(&base, forms, 0, &mut out);
    out
}

fn realize(fan: &Fan, fam: &Family, y: &[Rational]) -> Result<TropicalStableMap, ModuliError> {
    let positions: Vec<Vec<Rational>> = fam.positions.iter().map(|p| p.iter().map(|row| rat_row(row).iter().zip(y).map(|(a, b)| a * b).sum()).collect()).collect();
    let edges: Vec<(usize, usize, Vector, Rational)> = fam.edges.iter().map(|(a, b, d, j)| (*a, *b, d.clone(), y[*j].clone())).collect();
    Ok(TropicalStableMap::from_geometry(fan, positions, &edges, &fam.legs)?)
}

/// Removes 2-valent vertices that are neither contracted nor on a wall crossing.
pub(crate) fn erase_unstable(fan: &Fan, f: &TropicalStableMap) -> Result<TropicalStableMap, ModuliError> {
    let mut positions = f.positions.clone();
    let mut edges: Vec<(usize, usize, Vector, Rational)> =
        f.ty.edges.iter().zip(&f.lengths).map(|(e, l)| (e.tail, e.head, e.contact.clone(), l.finite().cloned().unwrap_or_else(Rational::zero))).collect();
    let mut legs: Vec<(usize, usize, Vector)> = f.ty.legs.iter().map(|l| (l.label, l.vertex, l.contact.clone())).collect();
    loop {
        let current = TropicalStableMap::from_geometry(fan, positions.clone(), &edges, &legs)?;
        let ty = &current.ty;
        let bad = (0..ty.vertex_count()).find(|&v| {
            if ty.valence(v) != 2 || ty.vertex_count() == 1 {
                return false;
            }
            let mut carriers = Vec::new();
            for e in ty.edges.iter().filter(|e| e.tail == v || e.head == v) {
                carriers.push(e.carrier);
            }
            for l in ty.legs.iter().filter(|l| l.vertex == v) {
                if l.contact.iter().all(|x| *x == 0) {
                    return false;
                }
                carriers.push(l.carrier);
            }
            let s = ty.vertex_cones[v];
            carriers.iter().all(|c| *c == Some(s))
        });
        let Some(v) = bad else { return Ok(current) };
        let incident: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].0 == v || edges[i].1 == v).collect();
        if incident.len() == 2 {
            let (i, j) = (incident[0], incident[1]);
            let (a, da) = if edges[i].1 == v { (edges[i].0, edges[i].2.clone()) } else { (edges[i].1, edges[i].2.iter().map(|x| -x).collect()) };
            let b = if edges[j].0 == v { edges[j].1 } else { edges[j].0 };
            let len = &edges[i].3 + &edges[j].3;
            edges[i] = (a, b, da, len);
            edges.remove(j);
        } else {
            let i = incident[0];
            let other = if edges[i].0 == v { edges[i].1 } else { edges[i].0 };
            for l in legs.iter_mut().filter(|l| l.1 == v) {
                l.1 = other;
            }
            edges.remove(i);
        }
        positions.remove(v);
        let shift = |x: usize| if x > v { x - 1 } else { x };
        for e in edges.iter_mut() {
            e.0 = shift(e.0);
            e.1 = shift(e.1);
        }
        for l in legs.iter_mut() {
            l.1 = shift(l.1);
        }
    }
}

/// Maps with two legs: a line through a base point, parametrized transversally to the line.
fn two_leg_maps(fan: &Fan, legs: &[(usize, Vector)]) -> Result<Vec<TropicalStableMap>, ModuliError> {
    let c = &legs[0].1;
    let leg_list: Vec<(usize, usize, Vector)> = legs.iter().map(|(l, c)| (*l, 0, c.clone())).collect();
    let mut points: Vec<Vec<Rational>> = Vec::new();
    if fan.rank() == 1 {
        points.push(vec![Rational::zero()]);
    } else {
        // w with det(c, w) != 0
        let w: Vec<i64> = if c[0] != 0 { vec![0, 1] } else { vec![1, 0] };
        for s in [1i64, -1] {
            points.push(w.iter().map(|x| Rational::from_integer((x * s).into())).collect());
        }
    }
    points
        .into_iter()
        .map(|p| {
            let f = TropicalStableMap::from_geometry(fan, vec![p], &[], &leg_list)?;
            erase_unstable(fan, &subdivide(fan, &f)?)
        })
        .collect()
}

/// Maximal cells of the moduli space, as subdivided maps of generic shape.
fn maximal_maps(gamma: &DiscreteData) -> Result<Vec<TropicalStableMap>, ModuliError> {
    let fan = gamma.fan();
    let legs: Vec<(usize, Vector)> = gamma
        .contact_legs()
        .iter()
        .cloned()
        .chain(gamma.trivial_legs().iter().map(|&l| (l, vec![0; fan.rank()])))
        .collect();
    if legs.len() < 2 {
        return Err(ModuliError::TooFewLegs);
    }
    if legs.len() == 2 {
        return two_leg_maps(fan, &legs);
    }
    let trees = labeled_trivalent_trees(legs.len());
    let per_tree: Vec<Result<Vec<TropicalStableMap>, ModuliError>> = trees
        .par_iter()
        .map(|t| {
            let fam = tree_family(fan.rank(), &legs, t);
            let forms = wall_forms(fan, &fam);
            chamber_points(fam.params, fam.first_length, &forms)
                .iter()
                .map(|y| Ok(subdivide(fan, &realize(fan, &fam, y)?)?))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_tree {
        out.extend(r?);
    }
    Ok(out)
}

/// Assembles the moduli space of maps with discrete data `gamma` (fan rank at most 2).
pub fn assemble_complex(gamma: &DiscreteData) -> Result<ConeComplex, ModuliError> {
    let fan = gamma.fan();
    if fan.rank() > 2 {
        return Err(ModuliError::UnsupportedRank(fan.rank()));
    }
    if !gamma.torically_transverse() {
        return Err(ModuliError::NotTransverse);
    }
    let r = fan.rank();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut types: Vec<CombinatorialType> = Vec::new();
    let mut cones: Vec<ModuliCone> = Vec::new();
    let mut frontier: Vec<usize> = Vec::new();
    for f in maximal_maps(gamma)? {
        let cf = f.ty.canonical_form(false);
        if !index.contains_key(&cf.key) {
            index.insert(cf.key.clone(), types.len());
            cones.push(moduli_cone(fan, &cf.ty)?);
            frontier.push(types.len());
            types.push(cf.ty);
        }
    }
    let mut raw_maps: Vec<(usize, usize, IntMatrix)> = Vec::new();
    while !frontier.is_empty() {
        let faces: Vec<Result<Vec<super::FaceType>, ModuliError>> = frontier.par_iter().map(|&i| face_types(fan, &types[i])).collect();
        let mut next = Vec::new();
        for (&parent, fs) in frontier.iter().zip(faces) {
            for face in fs? {
                let cf = face.ty.canonical_form(false);
                let idx = match index.get(&cf.key) {
                    Some(&i) => i,
                    None => {
                        let i = types.len();
                        index.insert(cf.key.clone(), i);
                        cones.push(moduli_cone(fan, &cf.ty)?);
                        types.push(cf.ty.clone());
                        next.push(i);
                        i
                    }
                };
                if raw_maps.iter().any(|m| m.0 == idx && m.1 == parent) {
                    continue;
                }
                let vmap: Vec<usize> = face.vertex_map.iter().map(|&v| cf.vertex_map[v]).collect();
                let emap: Vec<Option<usize>> = face.edge_map.iter().map(|e| e.map(|e| cf.edge_map[e])).collect();
                let iota = face_inclusion(r, &types[parent], &types[idx], &vmap, &emap);
                let image = iota.mul(&cones[idx].span_basis);
                let matrix = integral_coordinates(&cones[parent].span_basis, &image)
                    .ok_or_else(|| ModuliError::InvalidType("face lattice is not a sublattice of its cone's lattice".into()))?;
                raw_maps.push((idx, parent, matrix));
            }
        }
        frontier = next;
    }
    let keys: Vec<String> = types.iter().map(|t| t.canonical_key(false)).collect();
    let mut order: Vec<usize> = (0..types.len()).collect();
    order.sort_by(|&a, &b| (cones[a].dimension, &keys[a]).cmp(&(cones[b].dimension, &keys[b])));
    let mut new_index = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let mut face_maps: Vec<FaceMap> =
        raw_maps.into_iter().map(|(f, c, matrix)| FaceMap { face: new_index[f], cone: new_index[c], matrix }).collect();
    face_maps.sort_by_key(|m| (m.cone, m.face));
    Ok(ConeComplex {
        gamma: gamma.clone(),
        cones: order.iter().map(|&i| cones[i].clone()).collect(),
        keys: order.iter().map(|&i| keys[i].clone()).collect(),
        face_maps,
    })
}
