use num_traits::{One, Signed, Zero};

use super::{to_rat, CombinatorialType, MapError, TropicalStableMap, TypeEdge, TypeLeg, Vector};
use crate::curves::EdgeLength;
use crate::exactmath::Rational;
use crate::polyhedral::{ConeId, Fan};

fn point_at(a: &[Rational], d: &[Rational], t: &Rational) -> Vec<Rational> {
    a.iter().zip(d).map(|(x, y)| x + y * t).collect()
}

/// Parameters in (0, end) where the path a + t d may change cones (end = None for a ray).
fn candidate_breaks(fan: &Fan, a: &[Rational], d: &[Rational], end: Option<&Rational>) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for &m in fan.maximal_cones() {
        let alpha = fan.ray_coefficients(m, a);
        let beta = fan.ray_coefficients(m, d);
        for (al, be) in alpha.iter().zip(&beta) {
            if be.is_zero() {
                continue;
            }
            let t = -al / be;
            if t.is_positive() && end.map_or(true, |e| &t < e) {
                out.push(t);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Splits the path a + t d, t in (0, end), into maximal pieces each inside one closed cone.
/// Returns the interior cut parameters and the carrier of each piece.
fn cut_path(fan: &Fan, a: &[Rational], d: &[Rational], end: Option<&Rational>) -> Result<(Vec<Rational>, Vec<ConeId>), MapError> {
    let breaks = candidate_breaks(fan, a, d, end);
    let two = Rational::from_integer(2.into());
    let mut samples: Vec<Rational> = Vec::new();
    let mut prev = Rational::zero();
    for b in &breaks {
        samples.push((&prev + b) / &two);
        prev = b.clone();
    }
    samples.push(match end {
        Some(e) => (&prev + e) / &two,
        None => &prev + Rational::one(),
    });
    let cones = samples
        .iter()
        .map(|t| fan.locate(&point_at(a, d, t)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| MapError::InfiniteCrossing)?;
    let mut cuts = Vec::new();
    let mut carriers = vec![cones[0]];
    for (i, b) in breaks.iter().enumerate() {
        let (l, r) = (*carriers.last().unwrap(), cones[i + 1]);
        if l == r || fan.is_face(r, l) {
            continue;
        }
        if fan.is_face(l, r) {
            *carriers.last_mut().unwrap() = r;
            continue;
        }
        cuts.push(b.clone());
        carriers.push(r);
    }
    Ok((cuts, carriers))
}

/// Minimal subdivision: inserts 2-valent vertices where edges or legs cross walls.
pub fn subdivide(fan: &Fan, f: &TropicalStableMap) -> Result<TropicalStableMap, MapError> {
    let ty = &f.ty;
    let lengths = f.finite_lengths().ok_or_else(|| MapError::Malformed("infinite edge length".into()))?;
    let mut positions = f.positions.clone();
    let mut edges: Vec<(TypeEdge, Rational)> = Vec::new();
    let push_edge = |edges: &mut Vec<(TypeEdge, Rational)>, a: usize, b: usize, c: &Vector, len: Rational, carrier: ConeId| {
        let (tail, head, contact) = if a < b { (a, b, c.clone()) } else { (b, a, c.iter().map(|x| -x).collect()) };
        edges.push((TypeEdge { tail, head, contact, carrier: Some(carrier) }, len));
    };

    for (e, len) in ty.edges.iter().zip(&lengths) {
        let a = f.positions[e.tail].clone();
        let d: Vec<Rational> = f.positions[e.head].iter().zip(&a).map(|(x, y)| x - y).collect();
        let one = Rational::one();
        let (cuts, carriers) = cut_path(fan, &a, &d, Some(&one))?;
        if cuts.is_empty() {
            let keep = e.carrier.filter(|&s| {
                s < fan.cone_count() && fan.contains_closed(s, &a) && fan.contains_closed(s, &f.positions[e.head])
            });
            push_edge(&mut edges, e.tail, e.head, &e.contact, len.clone(), keep.unwrap_or(carriers[0]));
            continue;
        }
        let mut prev_v = e.tail;
        let mut prev_t = Rational::zero();
        for (k, t) in cuts.iter().enumerate() {
            positions.push(point_at(&a, &d, t));
            let w = positions.len() - 1;
            push_edge(&mut edges, prev_v, w, &e.contact, len * (t - &prev_t), carriers[k]);
            prev_v = w;
            prev_t = t.clone();
        }
        push_edge(&mut edges, prev_v, e.head, &e.contact, len * (Rational::one() - &prev_t), *carriers.last().unwrap());
    }

    let mut legs = Vec::new();
    for l in &ty.legs {
        let a = f.positions[l.vertex].clone();
        let d = to_rat(&l.contact);
        if d.iter().all(|x| x.is_zero()) {
            legs.push(TypeLeg { carrier: Some(fan.locate(&a)?), ..l.clone() });
            continue;
        }
        let (cuts, carriers) = cut_path(fan, &a, &d, None)?;
        if cuts.is_empty() {
            let keep = l.carrier.filter(|&s| s < fan.cone_count() && fan.contains_closed(s, &a) && fan.contains_closed(s, &d));
            legs.push(TypeLeg { carrier: Some(keep.unwrap_or(carriers[0])), ..l.clone() });
            continue;
        }
        let mut prev_v = l.vertex;
        let mut prev_t = Rational::zero();
        for (k, t) in cuts.iter().enumerate() {
            positions.push(point_at(&a, &d, t));
            let w = positions.len() - 1;
            push_edge(&mut edges, prev_v, w, &l.contact, t - &prev_t, carriers[k]);
            prev_v = w;
            prev_t = t.clone();
        }
        legs.push(TypeLeg { vertex: prev_v, carrier: Some(*carriers.last().unwrap()), ..l.clone() });
    }

    let vertex_cones = positions
        .iter()
        .enumerate()
        .map(|(v, p)| match ty.vertex_cones.get(v) {
            Some(&s) if s < fan.cone_count() && fan.contains_relint(s, p) => Ok(s),
            _ => fan.locate(p),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (edges, lens): (Vec<TypeEdge>, Vec<Rational>) = edges.into_iter().unzip();
    debug_assert!(lens.iter().all(|l| l.is_positive()) || lengths.iter().any(|l| !l.is_positive()));
    Ok(TropicalStableMap {
        ty: CombinatorialType { vertex_cones, edges, legs },
        positions,
        lengths: lens.into_iter().map(EdgeLength::Finite).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::validate;
    use super::*;
    use crate::exactmath::int;

    #[test]
    fn root_inside_cone_gets_one_wall_vertex() {
        let f = p2();
        let t = tripod_at(&f, &[2, 1]);
        let s = subdivide(&f, &t).unwrap();
        assert_eq!(s.positions.len(), 2);
        assert_eq!(s.positions[1], pt(&[1, 0]));
        assert_eq!(s.lengths, vec![EdgeLength::Finite(int(1))]);
        assert_eq!(f.cone(s.ty.vertex_cones[1]), &[0]);
        assert!(validate(&f, &s).is_valid(), "{:?}", validate(&f, &s));
        assert_eq!(subdivide(&f, &s).unwrap(), s);
    }

    #[test]
    fn origin_tripod_is_unchanged() {
        let f = p2();
        let t = tripod_at(&f, &[0, 0]);
        assert_eq!(subdivide(&f, &t).unwrap(), t);
    }

    #[test]
    fn leg_through_the_origin() {
        let f = p2();
        // Root on ray u1 at (3,0): the (-1,-1) leg stays in <u1,u3>; the (0,1) leg stays in <u1,u2>.
        let t = tripod_at(&f, &[3, 0]);
        let s = subdivide(&f, &t).unwrap();
        assert_eq!(s.positions.len(), 1);
        assert!(validate(&f, &s).is_valid(), "{:?}", validate(&f, &s));
        // Root at (-2,-2) on ray u3: the leg (1,0) runs (-2+t,-2) and crosses ray u3's opposite side.
        let t = tripod_at(&f, &[-2, -1]);
        let s = subdivide(&f, &t).unwrap();
        assert!(validate(&f, &s).is_valid(), "{:?}", validate(&f, &s));
        let c = s.curve().unwrap();
        assert_eq!(c.stabilize().vertex_count(), 1);
    }
}
