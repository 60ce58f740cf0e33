//! Abstract rational tropical curves: metric trees with labeled legs.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("a curve needs at least one vertex")]
    Empty,
    #[error("edge {0} has an endpoint out of range")]
    EndpointOutOfRange(usize),
    #[error("leg with label {0} is attached to a missing vertex")]
    LegOutOfRange(usize),
    #[error("edge {0} is a loop")]
    Loop(usize),
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(usize),
    #[error("graph is not a tree ({edges} internal edges on {vertices} vertices, or disconnected)")]
    NotATree { vertices: usize, edges: usize },
    #[error("leg labels must be exactly 1..{expected}")]
    BadLabels { expected: usize },
    #[error("bad length {0:?}")]
    BadLength(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLength {
    Finite(Rational),
    Infinite,
}

impl EdgeLength {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            EdgeLength::Finite(x) => Some(x),
            EdgeLength::Infinite => None,
        }
    }

    pub fn add(&self, other: &EdgeLength) -> EdgeLength {
        match (self, other) {
            (EdgeLength::Finite(a), EdgeLength::Finite(b)) => EdgeLength::Finite(a + b),
            _ => EdgeLength::Infinite,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            EdgeLength::Finite(x) => format_rational(x),
            EdgeLength::Infinite => "inf".to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<EdgeLength, CurveError> {
        if s.trim() == "inf" {
            return Ok(EdgeLength::Infinite);
        }
        parse_rational(s).map(EdgeLength::Finite).map_err(|_| CurveError::BadLength(s.to_string()))
    }
}

impl fmt::Display for EdgeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A tree with finite or infinite internal edge lengths and labeled legs of infinite length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalCurve {
    vertices: usize,
    edges: Vec<(usize, usize, EdgeLength)>,
    legs: Vec<(usize, usize)>,
}

/// Checks that `edges` form a spanning tree on `vertices` vertices.
pub(crate) fn is_tree(vertices: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let mut count = 0;
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
        count += 1;
    }
    vertices > 0 && count + 1 == vertices
}

impl TropicalCurve {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, EdgeLength)>, legs: Vec<(usize, usize)>) -> Result<Self, CurveError> {
        if vertices == 0 {
            return Err(CurveError::Empty);
        }
        for (i, (a, b, l)) in edges.iter().enumerate() {
            if *a >= vertices || *b >= vertices {
                return Err(CurveError::EndpointOutOfRange(i));
            }
            if a == b {
                return Err(CurveError::Loop(i));
            }
            if let EdgeLength::Finite(x) = l {
                if !x.is_positive() {
                    return Err(CurveError::NonPositiveLength(i));
                }
            }
        }
        for &(v, label) in &legs {
            if v >= vertices {
                return Err(CurveError::LegOutOfRange(label));
            }
        }
        let labels: BTreeSet<usize> = legs.iter().map(|l| l.1).collect();
        if labels.len() != legs.len() || labels.iter().copied().ne(1..=legs.len()) {
            return Err(CurveError::BadLabels { expected: legs.len() });
        }
        if !is_tree(vertices, edges.iter().map(|e| (e.0, e.1))) {
            return Err(CurveError::NotATree { vertices, edges: edges.len() });
        }
        Ok(TropicalCurve { vertices, edges, legs })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, EdgeLength)] {
        &self.edges
    }

    pub fn legs(&self) -> &[(usize, usize)] {
        &self.legs
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count() + self.legs.iter().filter(|l| l.0 == v).count()
    }

    pub fn is_smooth(&self) -> bool {
        self.edges.iter().all(|e| e.2.finite().is_some())
    }

    /// Erases 2-valent vertices, adding up the lengths of merged edges.
    pub fn stabilize(&self) -> TropicalCurve {
        let mut c = self.clone();
        loop {
            let Some(w) = (0..c.vertices).find(|&v| c.valence(v) == 2 && c.vertices > 1) else { break };
            let incident: Vec<usize> = (0..c.edges.len()).filter(|&i| c.edges[i].0 == w || c.edges[i].1 == w).collect();
            let other = |e: &(usize, usize, EdgeLength)| if e.0 == w { e.1 } else { e.0 };
            match incident.as_slice() {
                [i, j] => {
                    let (ei, ej) = (c.edges[*i].clone(), c.edges[*j].clone());
                    let (u, x) = (other(&ei), other(&ej));
                    let len = ei.2.add(&ej.2);
                    let (hi, lo) = if i > j { (*i, *j) } else { (*j, *i) };
                    c.edges.remove(hi);
                    c.edges[lo] = (u.min(x), u.max(x), len);
                }
                [i] => {
                    let u = other(&c.edges[*i]);
                    c.edges.remove(*i);
                    for leg in c.legs.iter_mut().filter(|l| l.0 == w) {
                        leg.0 = u;
                    }
                }
                _ => unreachable!("a 2-valent vertex of a tree with more than one vertex has an internal edge"),
            }
            c.remove_vertex(w);
        }
        c
    }

    fn remove_vertex(&mut self, w: usize) {
        let shift = |v: usize| if v > w { v - 1 } else { v };
        for e in self.edges.iter_mut() {
            e.0 = shift(e.0);
            e.1 = shift(e.1);
        }
        for l in self.legs.iter_mut() {
            l.0 = shift(l.0);
        }
        self.vertices -= 1;
    }

    /// Sum over vertices of the stabilization of (valence - 3), counting only excess valence.
    pub fn overvalence(&self) -> usize {
        let s = self.stabilize();
        (0..s.vertices).map(|v| s.valence(v).saturating_sub(3)).sum()
    }

    /// Vertex path between two vertices, as edge indices.
    pub fn path_edges(&self, from: usize, to: usize) -> Vec<usize> {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for (i, e) in self.edges.iter().enumerate() {
                let n = if e.0 == v { e.1 } else if e.1 == v { e.0 } else { continue };
                if !seen[n] {
                    seen[n] = true;
                    prev[n] = Some((v, i));
                    stack.push(n);
                }
            }
        }
        let mut out = Vec::new();
        let mut v = to;
        while let Some((p, e)) = prev[v] {
            out.push(e);
            v = p;
        }
        out.reverse();
        out
    }

    pub fn leg_vertex(&self, label: usize) -> Option<usize> {
        self.legs.iter().find(|l| l.1 == label).map(|l| l.0)
    }

    /// Length of the path between two legs; `Infinite` if it crosses an infinite edge.
    pub fn leg_distance(&self, a: usize, b: usize) -> Option<EdgeLength> {
        let (va, vb) = (self.leg_vertex(a)?, self.leg_vertex(b)?);
        Some(
            self.path_edges(va, vb)
                .into_iter()
                .fold(EdgeLength::Finite(Rational::zero()), |acc, e| acc.add(&self.edges[e].2)),
        )
    }

    pub fn to_json(&self) -> CurveJson {
        CurveJson {
            schema: Some(crate::SCHEMA.to_string()),
            vertices: self.vertices,
            edges: self.edges.iter().map(|(a, b, l)| (*a, *b, l.to_text())).collect(),
            legs: self.legs.clone(),
        }
    }

    pub fn from_json(j: &CurveJson) -> Result<Self, CurveError> {
        let edges = j
            .edges
            .iter()
            .map(|(a, b, l)| Ok((*a, *b, EdgeLength::parse(l)?)))
            .collect::<Result<Vec<_>, CurveError>>()?;
        TropicalCurve::new(j.vertices, edges, j.legs.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub vertices: usize,
    pub edges: Vec<(usize, usize, String)>,
    pub legs: Vec<(usize, usize)>,
}
