//! Random generic maps and fans shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tropcount::exactmath::Rational;
use tropcount::maps::{CombinatorialType, TropicalStableMap, TypeEdge, TypeLeg, Vector};
use tropcount::polyhedral::{fan_product, fan_projective_space, Fan};

pub fn p2() -> Arc<Fan> {
    Arc::new(fan_projective_space(2).unwrap())
}

pub fn p1xp1() -> Arc<Fan> {
    let p1 = fan_projective_space(1).unwrap();
    Arc::new(fan_product(&p1, &p1))
}

pub fn p2_contacts(d: usize) -> Vec<Vector> {
    [vec![1, 0], vec![0, 1], vec![-1, -1]].iter().flat_map(|v| std::iter::repeat(v.clone()).take(d)).collect()
}

pub fn p1xp1_contacts(a: usize, b: usize) -> Vec<Vector> {
    let mut v: Vec<Vector> = Vec::new();
    for _ in 0..a {
        v.push(vec![0, 1]);
        v.push(vec![0, -1]);
    }
    for _ in 0..b {
        v.push(vec![1, 0]);
        v.push(vec![-1, 0]);
    }
    v
}

fn rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    Rational::new(rng.gen_range(lo..=hi).into(), rng.gen_range(1..=7i64).into())
}

/// Uniform labeled trivalent tree on leaves 0..n-1; internal nodes n, n+1, ...
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut t = vec![(0, n), (1, n), (2, n)];
    for k in 3..n {
        let x = n + k - 2;
        let i = rng.gen_range(0..t.len());
        let (a, b) = t[i];
        t[i] = (a, x);
        t.push((x, b));
        t.push((k, x));
    }
    t
}

/// A trivalent map with the given legs (label, contact) at random positions and lengths,
/// stabilized (no carriers). None when some vertex misses the open maximal cones.
pub fn random_generic_map(fan: &Fan, legs: &[(usize, Vector)], rng: &mut ChaCha8Rng) -> Option<TropicalStableMap> {
    let n = legs.len();
    let r = fan.rank();
    let tree = random_tree(n, rng);
    let internal = n - 2;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + internal];
    for &(a, b) in &tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    fn beyond(adj: &[Vec<usize>], legs: &[(usize, Vector)], from: usize, at: usize, r: usize) -> Vector {
        if at < legs.len() {
            return legs[at].1.clone();
        }
        let mut s = vec![0; r];
        for &w in &adj[at] {
            if w != from {
                for (x, y) in s.iter_mut().zip(beyond(adj, legs, at, w, r)) {
                    *x += y;
                }
            }
        }
        s
    }
    let mut pos: Vec<Option<Vec<Rational>>> = vec![None; internal];
    pos[0] = Some((0..r).map(|_| rat(rng, -20, 20)).collect());
    let mut edges = Vec::new();
    let mut lengths = Vec::new();
    let mut stack = vec![n];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if w < n || pos[w - n].is_some() {
                continue;
            }
            let d = beyond(&adj, legs, v, w, r);
            let l = rat(rng, 1, 12);
            let p: Vec<Rational> = pos[v - n].as_ref().unwrap().iter().zip(&d).map(|(x, c)| x + &l * Rational::from_integer((*c).into())).collect();
            pos[w - n] = Some(p);
            edges.push((v - n, w - n, d, l.clone()));
            lengths.push(l);
            stack.push(w);
        }
    }
    let positions: Vec<Vec<Rational>> = pos.into_iter().map(Option::unwrap).collect();
    let mut cones = Vec::new();
    for p in &positions {
        let c = fan.locate(p).ok()?;
        if !fan.is_maximal(c) {
            return None;
        }
        cones.push(c);
    }
    let type_edges = edges
        .iter()
        .map(|(a, b, d, _)| {
            if a < b {
                TypeEdge { tail: *a, head: *b, contact: d.clone(), carrier: None }
            } else {
                TypeEdge { tail: *b, head: *a, contact: d.iter().map(|x| -x).collect(), carrier: None }
            }
        })
        .collect();
    let mut type_legs: Vec<TypeLeg> =
        (0..n).map(|i| TypeLeg { label: legs[i].0, vertex: adj[i][0] - n, contact: legs[i].1.clone(), carrier: None }).collect();
    type_legs.sort_by_key(|l| l.label);
    let ty = CombinatorialType { vertex_cones: cones, edges: type_edges, legs: type_legs };
    Some(TropicalStableMap { ty, positions, lengths: lengths.into_iter().map(tropcount::curves::EdgeLength::Finite).collect() })
}

/// Labeled legs: contacts first, then `m` trivial legs.
pub fn labeled(contacts: &[Vector], m: usize, rank: usize) -> Vec<(usize, Vector)> {
    let mut v: Vec<(usize, Vector)> = contacts.iter().cloned().enumerate().map(|(i, c)| (i + 1, c)).collect();
    for j in 0..m {
        v.push((contacts.len() + j + 1, vec![0; rank]));
    }
    v
}
