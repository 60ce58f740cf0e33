//! Pruned search over stabilized trivalent trees.
//!
//! Contact legs are assembled into trees first; trivial legs are then inserted one at a time
//! onto bounded edges or contact legs. A partial tree survives when its evaluation rows are
//! independent and the constraints can still be met with nonnegative lengths.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{multiplicity, Contribution, CountError, CountProblem};
use crate::curves::EdgeLength;
use crate::exactmath::{phase_one, solve_rational, IntMatrix, Rational};
use crate::maps::{is_zero_vec, subdivide, validate, CombinatorialType, TropicalStableMap, TypeEdge, TypeLeg, Vector};
use crate::moduli::{contains, moduli_cone, Membership};

#[derive(Clone, Debug)]
struct Tree {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    legs: Vec<(usize, usize, Vector)>,
}

impl Tree {
    fn tripod(legs: &[(usize, Vector)]) -> Tree {
        Tree { vertices: 1, edges: Vec::new(), legs: legs.iter().map(|(l, c)| (*l, 0, c.clone())).collect() }
    }

    fn insert_on_edge(&self, i: usize, label: usize, contact: &Vector) -> Tree {
        let mut t = self.clone();
        let x = t.vertices;
        t.vertices += 1;
        let (a, b) = t.edges[i];
        t.edges[i] = (a, x);
        t.edges.push((x, b));
        t.legs.push((label, x, contact.clone()));
        t
    }

    fn insert_on_leg(&self, j: usize, label: usize, contact: &Vector) -> Tree {
        let mut t = self.clone();
        let x = t.vertices;
        t.vertices += 1;
        let v = t.legs[j].1;
        t.legs[j].1 = x;
        t.edges.push((v, x));
        t.legs.push((label, x, contact.clone()));
        t
    }

    /// Extensions by one leg, onto every bounded edge and every leg with nonzero contact.
    fn extensions(&self, label: usize, contact: &Vector) -> Vec<Tree> {
        let mut out: Vec<Tree> = (0..self.edges.len()).map(|i| self.insert_on_edge(i, label, contact)).collect();
        for j in 0..self.legs.len() {
            if !is_zero_vec(&self.legs[j].2) {
                out.push(self.insert_on_leg(j, label, contact));
            }
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        adj
    }

    /// Direction of each edge from its first to its second endpoint (balancing).
    fn directions(&self, rank: usize) -> Vec<Vector> {
        let adj = self.adjacency();
        let mut leg_sum = vec![vec![0i64; rank]; self.vertices];
        for (_, v, c) in &self.legs {
            for (s, x) in leg_sum[*v].iter_mut().zip(c) {
                *s += x;
            }
        }
        // subtree sums rooted at 0
        let mut order = vec![0usize];
        let mut parent = vec![(usize::MAX, usize::MAX); self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for &(u, e) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = (v, e);
                    order.push(u);
                }
            }
            i += 1;
        }
        let mut sub = leg_sum;
        let mut dirs = vec![vec![0i64; rank]; self.edges.len()];
        for &v in order.iter().rev() {
            let (p, e) = parent[v];
            if p == usize::MAX {
                continue;
            }
            // edge p -> v carries the contacts beyond v
            let d = sub[v].clone();
            dirs[e] = if self.edges[e].0 == p { d.clone() } else { d.iter().map(|x| -x).collect() };
            for (s, x) in sub[p].iter_mut().zip(&d) {
                *s += x;
            }
        }
        dirs
    }

    fn to_type(&self, rank: usize, cones: Option<&[usize]>) -> CombinatorialType {
        let dirs = self.directions(rank);
        let edges = self
            .edges
            .iter()
            .zip(dirs)
            .map(|(&(a, b), d)| {
                if a < b {
                    TypeEdge { tail: a, head: b, contact: d, carrier: None }
                } else {
                    TypeEdge { tail: b, head: a, contact: d.iter().map(|x| -x).collect(), carrier: None }
                }
            })
            .collect();
        let mut legs: Vec<TypeLeg> = self.legs.iter().map(|(l, v, c)| TypeLeg { label: *l, vertex: *v, contact: c.clone(), carrier: None }).collect();
        legs.sort_by_key(|l| l.label);
        CombinatorialType { vertex_cones: cones.map_or_else(|| vec![0; self.vertices], |c| c.to_vec()), edges, legs }
    }

    fn key(&self, rank: usize) -> String {
        self.to_type(rank, None).canonical_key(true)
    }

    /// Positions as integer linear forms in (root, lengths): rank x (rank + E) per vertex.
    fn position_forms(&self, rank: usize, dirs: &[Vector]) -> Vec<Vec<Vec<i64>>> {
        let p = rank + self.edges.len();
        let adj = self.adjacency();
        let mut pos: Vec<Option<Vec<Vec<i64>>>> = vec![None; self.vertices];
        let mut root = vec![vec![0i64; p]; rank];
        for (k, row) in root.iter_mut().enumerate() {
            row[k] = 1;
        }
        pos[0] = Some(root);
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &(u, e) in &adj[v] {
                if pos[u].is_some() {
                    continue;
                }
                let sign = if self.edges[e].0 == v { 1 } else { -1 };
                let mut f = pos[v].clone().unwrap();
                for k in 0..rank {
                    f[k][rank + e] += sign * dirs[e][k];
                }
                pos[u] = Some(f);
                stack.push(u);
            }
        }
        pos.into_iter().map(Option::unwrap).collect()
    }
}

/// Vertex with three nonzero, pairwise parallel directions: can slide along its line.
fn has_parallel_vertex(t: &Tree, dirs: &[Vector]) -> bool {
    let mut at: Vec<Vec<Vector>> = vec![Vec::new(); t.vertices];
    for (&(a, b), d) in t.edges.iter().zip(dirs) {
        at[a].push(d.clone());
        at[b].push(d.iter().map(|x| -x).collect());
    }
    for (_, v, c) in &t.legs {
        at[*v].push(c.clone());
    }
    at.iter().any(|ds| {
        ds.len() == 3
            && ds.iter().all(|d| !is_zero_vec(d))
            && ds.iter().all(|d| ds.iter().all(|e| (0..d.len()).all(|i| (0..d.len()).all(|j| d[i] * e[j] == d[j] * e[i]))))
    })
}

/// Checked i128 Bareiss rank, falling back to big integers.
fn int_rank(rows: &[Vec<i64>], cols: usize) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    let mut prev: i128 = 1;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            for j in c + 1..cols {
                let v = m[rank][c].checked_mul(m[i][j]).and_then(|x| m[i][c].checked_mul(m[rank][j]).and_then(|y| x.checked_sub(y)));
                match v {
                    Some(v) => m[i][j] = v / prev,
                    None => return IntMatrix::from_i64_rows(rows, cols).rank(),
                }
            }
            m[i][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Evaluation rows and right-hand sides for the legs already in the tree.
fn evaluation_system(t: &Tree, problem: &CountProblem, forms: &[Vec<Vec<i64>>]) -> (Vec<Vec<i64>>, Vec<Rational>) {
    let rank = problem.fan().rank();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (label, v, _) in &t.legs {
        let Some(c) = problem.constraint(*label) else { continue };
        let q = c.projection.projection.to_i64_rows().expect("projection fits in i64");
        let target = c.target();
        for (qi, ti) in q.iter().zip(target) {
            let row: Vec<i64> = (0..forms[*v][0].len()).map(|j| (0..rank).map(|k| qi[k] * forms[*v][k][j]).sum()).collect();
            rows.push(row);
            rhs.push(ti);
        }
    }
    (rows, rhs)
}

const PRUNE_GAP: f64 = 1e-6;
const ACCEPT_GAP: f64 = 1e-10;

/// Can the rows be met with a free root and nonnegative lengths? Floating point first,
/// exact arithmetic when the float answer is unclear.
fn lp_feasible(rows: &[Vec<i64>], rhs: &[Rational], rank: usize) -> bool {
    let cols = rows.first().map_or(0, |r| r.len());
    let nonneg: Vec<bool> = (0..cols).map(|j| j >= rank).collect();
    let af: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let bf: Vec<f64> = rhs.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    let scale = 1.0 + bf.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let fast = phase_one(&af, &bf, &nonneg);
    if fast.feasible() {
        return true;
    }
    if fast.converged && fast.residual.is_finite() && fast.residual.abs() > PRUNE_GAP * scale {
        return false;
    }
    let _ = ACCEPT_GAP;
    let ar: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect();
    phase_one(&ar, rhs, &nonneg).feasible()
}

fn survives(t: &Tree, problem: &CountProblem) -> bool {
    let rank = problem.fan().rank();
    let dirs = t.directions(rank);
    let forms = t.position_forms(rank, &dirs);
    let (rows, rhs) = evaluation_system(t, problem, &forms);
    if rows.is_empty() {
        return true;
    }
    let cols = rank + t.edges.len();
    if rows.len() > cols || int_rank(&rows, cols) < rows.len() {
        return false;
    }
    lp_feasible(&rows, &rhs, rank)
}

fn dedupe(trees: Vec<(String, Tree)>) -> Vec<(String, Tree)> {
    let mut map: BTreeMap<String, Tree> = BTreeMap::new();
    for (k, t) in trees {
        map.entry(k).or_insert(t);
    }
    map.into_iter().collect()
}

/// Complete contact trees, without zero-direction edges or sliding vertices.
fn contact_trees(problem: &CountProblem) -> Vec<Tree> {
    let gamma = &problem.gamma;
    let rank = problem.fan().rank();
    let contacts = gamma.contact_legs();
    let trivial = gamma.trivial_legs();
    let zero = vec![0i64; rank];
    let mut start: Vec<(usize, Vector)> = contacts.iter().take(3).cloned().collect();
    for &l in trivial.iter().take(3 - start.len().min(3)) {
        start.push((l, zero.clone()));
    }
    let mut level = vec![(String::new(), Tree::tripod(&start))];
    for (label, c) in contacts.iter().skip(3) {
        let next: Vec<(String, Tree)> = level
            .par_iter()
            .flat_map_iter(|(_, t)| t.extensions(*label, c))
            .map(|t| (t.key(rank), t))
            .collect();
        level = dedupe(next);
    }
    level
        .into_iter()
        .map(|(_, t)| t)
        .filter(|t| {
            let dirs = t.directions(rank);
            !dirs.iter().any(|d| is_zero_vec(d)) && !has_parallel_vertex(t, &dirs)
        })
        .collect()
}

/// Trees with every leg inserted that pass all pruning tests, with the node count.
fn rigid_trees(problem: &CountProblem) -> (Vec<Tree>, usize) {
    let rank = problem.fan().rank();
    let gamma = &problem.gamma;
    let already = 3usize.saturating_sub(gamma.n());
    let mut level: Vec<(String, Tree)> = contact_trees(problem)
        .into_iter()
        .filter(|t| survives(t, problem))
        .map(|t| (t.key(rank), t))
        .collect();
    let mut nodes = level.len();
    let zero = vec![0i64; rank];
    for &label in gamma.trivial_legs().iter().skip(already) {
        let next: Vec<(String, Tree)> = level
            .par_iter()
            .flat_map_iter(|(_, t)| t.extensions(label, &zero))
            .filter(|t| survives(t, problem))
            .map(|t| (t.key(rank), t))
            .collect();
        level = dedupe(next);
        nodes += level.len();
    }
    (level.into_iter().map(|(_, t)| t).collect(), nodes)
}

enum Leaf {
    Rejected,
    NonGeneric(String),
    Accepted(Box<Contribution>),
}

fn solve_leaf(t: &Tree, problem: &CountProblem) -> Result<Leaf, CountError> {
    let fan = problem.fan();
    let rank = fan.rank();
    let dirs = t.directions(rank);
    let forms = t.position_forms(rank, &dirs);
    let (rows, rhs) = evaluation_system(t, problem, &forms);
    let cols = rank + t.edges.len();
    if rows.len() != cols {
        return Ok(Leaf::Rejected);
    }
    let a = IntMatrix::from_i64_rows(&rows, cols);
    let Some(sol) = solve_rational(&a, &rhs) else { return Ok(Leaf::Rejected) };
    if !sol.unique {
        return Ok(Leaf::Rejected);
    }
    let x = sol.values;
    let lengths = &x[rank..];
    if lengths.iter().any(|l| l.is_negative()) {
        return Ok(Leaf::Rejected);
    }
    let key = t.key(rank);
    if lengths.iter().any(|l| l.is_zero()) {
        return Ok(Leaf::NonGeneric(format!("zero edge length in {key}")));
    }
    let positions: Vec<Vec<Rational>> = forms
        .iter()
        .map(|f| f.iter().map(|row| row.iter().zip(&x).map(|(c, v)| v * Rational::from_integer((*c).into())).sum()).collect())
        .collect();
    let mut cones = Vec::new();
    for p in &positions {
        let c = fan.locate(p)?;
        if !fan.is_maximal(c) {
            return Ok(Leaf::NonGeneric(format!("vertex on a wall in {key}")));
        }
        cones.push(c);
    }
    let ty = t.to_type(rank, Some(&cones));
    let cf = ty.canonical_form(true);
    // relabel the geometry to canonical vertex order
    let mut canon_pos = vec![Vec::new(); positions.len()];
    for (old, p) in positions.into_iter().enumerate() {
        canon_pos[cf.vertex_map[old]] = p;
    }
    let mut canon_len = vec![Rational::zero(); lengths.len()];
    for (old, l) in lengths.iter().enumerate() {
        // edge indices of `ty` follow the tree's edge order
        canon_len[cf.edge_map[old]] = l.clone();
    }
    let ty = cf.ty;
    let stab = TropicalStableMap { ty: ty.clone(), positions: canon_pos, lengths: canon_len.iter().cloned().map(EdgeLength::Finite).collect() };
    let cone = moduli_cone(fan, &ty)?;
    if contains(&cone, &stab)? != Membership::Interior {
        return Ok(Leaf::NonGeneric(format!("solution on the boundary of {key}")));
    }
    let mult = multiplicity(&ty, problem)?;
    debug_assert_eq!(mult, a.det().abs());
    let edges: Vec<(usize, usize, Vector, Rational)> =
        ty.edges.iter().zip(&canon_len).map(|(e, l)| (e.tail, e.head, e.contact.clone(), l.clone())).collect();
    let legs: Vec<(usize, usize, Vector)> = ty.legs.iter().map(|l| (l.label, l.vertex, l.contact.clone())).collect();
    let placed = TropicalStableMap::from_geometry(fan, stab.positions.clone(), &edges, &legs)?;
    let map = subdivide(fan, &placed)?;
    let report = validate(fan, &map);
    if !report.is_valid() {
        return Ok(Leaf::NonGeneric(format!("solved map fails validation in {key}: {report:?}")));
    }
    Ok(Leaf::Accepted(Box::new(Contribution { key: cf.key, ty, map, multiplicity: mult })))
}

/// All contributions, canonically sorted, and the number of search nodes.
pub(super) fn solve_all(problem: &CountProblem) -> Result<(Vec<Contribution>, usize), CountError> {
    let (trees, nodes) = rigid_trees(problem);
    let leaves: Vec<Result<Leaf, CountError>> = trees.par_iter().map(|t| solve_leaf(t, problem)).collect();
    let mut out = Vec::new();
    let mut nongeneric: Vec<String> = Vec::new();
    for l in leaves {
        match l? {
            Leaf::Rejected => {}
            Leaf::NonGeneric(s) => nongeneric.push(s),
            Leaf::Accepted(c) => out.push(*c),
        }
    }
    if !nongeneric.is_empty() {
        nongeneric.sort();
        return Err(CountError::NonGeneric(nongeneric.swap_remove(0)));
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out.dedup_by(|a, b| a.key == b.key);
    Ok((out, nodes))
}

/// Stabilized rigid types meeting the problem's constraints, located at their solutions.
pub fn enumerate_rigid_types(problem: &CountProblem) -> Result<Vec<CombinatorialType>, CountError> {
    Ok(solve_all(problem)?.0.into_iter().map(|c| c.ty).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_rank_matches_big_rank() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(int_rank(&rows, 3), 2);
        let big = vec![vec![i64::MAX / 2, 3], vec![i64::MAX / 3, 5]];
        assert_eq!(int_rank(&big, 2), IntMatrix::from_i64_rows(&big, 2).rank());
    }

    #[test]
    fn directions_follow_balancing() {
        let t = Tree::tripod(&[(1, vec![1, 0]), (2, vec![0, 1]), (3, vec![-1, -1])]).insert_on_leg(0, 4, &vec![0, 0]);
        let d = t.directions(2);
        assert_eq!(d, vec![vec![1, 0]]);
        let e = t.insert_on_edge(0, 5, &vec![0, 0]);
        assert_eq!(e.directions(2), vec![vec![1, 0], vec![1, 0]]);
    }
}
