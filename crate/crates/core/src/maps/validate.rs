use std::fmt;

use num_traits::Signed;

use super::{is_zero_vec, to_rat, CombinatorialType, TropicalStableMap};
use crate::curves::EdgeLength;
use crate::polyhedral::Fan;

/// One failed condition, naming the offending vertex, edge or leg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Tree(String),
    Smoothness { edge: usize },
    VertexCone { vertex: usize },
    LengthSign { edge: usize },
    EdgeEquation { edge: usize },
    SingleCone { edge: usize },
    LegCone { label: usize },
    Balancing { vertex: usize },
    Stability { vertices: Vec<usize> },
}

impl Violation {
    /// Short name of the violated condition.
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Tree(_) => "tree",
            Violation::Smoothness { .. } => "smoothness",
            Violation::VertexCone { .. } => "vertex-cone",
            Violation::LengthSign { .. } => "length-sign",
            Violation::EdgeEquation { .. } => "edge-equation",
            Violation::SingleCone { .. } | Violation::LegCone { .. } => "single-cone",
            Violation::Balancing { .. } => "balancing",
            Violation::Stability { .. } => "stability",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Tree(msg) => write!(f, "tree: {msg}"),
            Violation::Smoothness { edge } => write!(f, "smoothness: edge {edge} has infinite length"),
            Violation::VertexCone { vertex } => {
                write!(f, "vertex-cone: vertex {vertex} is not in the relative interior of its cone")
            }
            Violation::LengthSign { edge } => write!(f, "length-sign: edge {edge} has non-positive length"),
            Violation::EdgeEquation { edge } => write!(f, "edge-equation: edge {edge} violates head - tail = length * contact"),
            Violation::SingleCone { edge } => write!(f, "single-cone: edge {edge} leaves its carrier cone"),
            Violation::LegCone { label } => write!(f, "single-cone: leg {label} leaves its carrier cone"),
            Violation::Balancing { vertex } => write!(f, "balancing: vertex {vertex} is not balanced"),
            Violation::Stability { vertices } => write!(f, "stability: vertices {vertices:?} form an unstable component"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition() == condition)
    }
}

/// Checks every condition of a tropical stable map, in order, collecting all failures.
pub fn validate(fan: &Fan, f: &TropicalStableMap) -> ValidationReport {
    let mut out = Vec::new();
    let ty = &f.ty;
    if let Err(e) = ty.check_shape() {
        out.push(Violation::Tree(e.to_string()));
        return ValidationReport { violations: out };
    }
    if f.positions.len() != ty.vertex_count() || f.lengths.len() != ty.edges.len() {
        out.push(Violation::Tree("positions or lengths do not match the type".into()));
        return ValidationReport { violations: out };
    }
    if f.positions.iter().any(|p| p.len() != fan.rank()) || ty.vertex_cones.iter().any(|&c| c >= fan.cone_count()) {
        out.push(Violation::Tree("positions or cones do not match the fan".into()));
        return ValidationReport { violations: out };
    }
    for (i, l) in f.lengths.iter().enumerate() {
        if matches!(l, EdgeLength::Infinite) {
            out.push(Violation::Smoothness { edge: i });
        }
    }
    for (v, p) in f.positions.iter().enumerate() {
        if !fan.contains_relint(ty.vertex_cones[v], p) {
            out.push(Violation::VertexCone { vertex: v });
        }
    }
    for (i, (e, l)) in ty.edges.iter().zip(&f.lengths).enumerate() {
        let EdgeLength::Finite(len) = l else { continue };
        if !len.is_positive() {
            out.push(Violation::LengthSign { edge: i });
        }
        let c = to_rat(&e.contact);
        let ok = (0..fan.rank()).all(|k| &f.positions[e.head][k] - &f.positions[e.tail][k] == len * &c[k]);
        if !ok {
            out.push(Violation::EdgeEquation { edge: i });
        }
    }
    for (i, e) in ty.edges.iter().enumerate() {
        let ok = match e.carrier {
            Some(s) if s < fan.cone_count() => {
                fan.contains_closed(s, &f.positions[e.tail]) && fan.contains_closed(s, &f.positions[e.head])
            }
            _ => false,
        };
        if !ok {
            out.push(Violation::SingleCone { edge: i });
        }
    }
    for l in &ty.legs {
        let ok = match l.carrier {
            Some(s) if s < fan.cone_count() => {
                fan.contains_closed(s, &f.positions[l.vertex]) && fan.contains_closed(s, &to_rat(&l.contact))
            }
            _ => false,
        };
        if !ok {
            out.push(Violation::LegCone { label: l.label });
        }
    }
    for v in 0..ty.vertex_count() {
        if !is_zero_vec(&ty.imbalance(v)) {
            out.push(Violation::Balancing { vertex: v });
        }
    }
    out.extend(stability_violations(fan, ty));
    ValidationReport { violations: out }
}

/// A contracted vertex (all incident contacts zero) needs three special points; any other
/// vertex of valence two is allowed only where the image crosses a wall between two carriers.
fn stability_violations(fan: &Fan, ty: &CombinatorialType) -> Vec<Violation> {
    let mut out = Vec::new();
    for v in 0..ty.vertex_count() {
        let contracted = ty.neighbours(v).iter().all(|(_, _, d)| is_zero_vec(d))
            && ty.legs.iter().filter(|l| l.vertex == v).all(|l| is_zero_vec(&l.contact));
        let valence = ty.valence(v);
        let stable = if contracted || valence != 2 { valence >= 3 } else { is_wall_crossing(fan, ty, v) };
        if !stable {
            out.push(Violation::Stability { vertices: vec![v] });
        }
    }
    out
}

fn is_wall_crossing(fan: &Fan, ty: &CombinatorialType, v: usize) -> bool {
    let mut carriers = Vec::new();
    for e in ty.edges.iter().filter(|e| e.tail == v || e.head == v) {
        carriers.push(e.carrier);
    }
    for l in ty.legs.iter().filter(|l| l.vertex == v) {
        if is_zero_vec(&l.contact) {
            return false;
        }
        carriers.push(l.carrier);
    }
    let [Some(a), Some(b)] = carriers[..] else { return false };
    let s = ty.vertex_cones[v];
    a != b && s != a && s != b && fan.is_face(s, a) && fan.is_face(s, b)
}
